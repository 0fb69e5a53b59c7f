//! Closed forms against brute-force enumeration on random tables.

use dbp::oracle::{verify, EnumerationBudget};
use dbp::WordLength;

fn main() -> dbp::Result<()> {
    for m in 1..=3 {
        let report = verify(WordLength::new(m)?, 10, 10, 42, &EnumerationBudget::default())?;
        println!("m = {m}");
        for c in &report.checks {
            println!(
                "  {:<45} {:>6} comparisons  max error {:.2e}  {}",
                c.name,
                c.comparisons,
                c.max_error,
                if c.passed { "ok" } else { "FAILED" }
            );
        }
    }
    Ok(())
}
