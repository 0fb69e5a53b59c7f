//! Expected edge counts and Fisher information, checked against the
//! enumeration and simulation oracles.

use dbp::inference::{expected_transition_count, fisher_information, fisher_information_free};
use dbp::oracle::{brute_force_expected_count, monte_carlo_fisher, EnumerationBudget};
use dbp::{TransitionTable, WordLength};

fn main() -> dbp::Result<()> {
    let table = TransitionTable::new(WordLength::new(2)?, vec![0.9, 0.25, 0.75, 0.1])?;
    let n = 10;
    println!("edge  E[n_k]   brute    I(p_k)    MC mean n_k/p_k^2");
    for k in 0..8 {
        let e = expected_transition_count(&table, n, k)?;
        let b = brute_force_expected_count(&table, n, k, &EnumerationBudget::default())?;
        let i = fisher_information(&table, n, k)?;
        let mc = monte_carlo_fisher(&table, n, k, 20_000, k as u64)?;
        println!(
            "{k:>4}  {e:.5}  {b:.5}  {i:>8.4}  {:>8.4} +- {:.4}",
            mc.information, mc.information_se
        );
    }
    for w in 0..4 {
        let mc = monte_carlo_fisher(&table, n, 2 * w + 1, 20_000, 100 + w as u64)?;
        println!(
            "word {w}: I_free = {:.4}, score variance = {:.4} +- {:.4}",
            fisher_information_free(&table, n, w)?,
            mc.score_variance,
            mc.score_variance_se
        );
    }
    Ok(())
}
