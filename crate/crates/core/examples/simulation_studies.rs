//! Short versions of the replicate studies: estimation accuracy, interval
//! width against length, and the word-length selection histogram.
//!
//! `cargo run --release --example simulation_studies -- 1000` for the full
//! histogram size.

use dbp::experiment::{
    estimation_study, length_study, selection_study, teinf_left_table, teinf_right_table, Estimator,
    TEINF2_LENGTHS,
};
use dbp::inference::PriorRule;
use dbp::WordLength;

fn main() -> dbp::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    let rule = PriorRule::uniform();

    let s = estimation_study(&teinf_left_table(), 200, 100, 0, &rule, &Estimator::Conjugate)?;
    println!(
        "n = 200, 100 replicates: mean abs error {:.4}, coverage {:?}",
        s.average_mean_abs_error, s.coverage
    );

    let l = length_study(&teinf_left_table(), &TEINF2_LENGTHS, 100, 0, &rule)?;
    for row in &l.rows {
        println!("n = {:>3}: widths {:.3?}", row.n, row.widths());
    }

    let m_max = WordLength::new(10)?;
    for (name, t) in [("m = 2 table", teinf_left_table()), ("m = 3 table", teinf_right_table())] {
        let h = selection_study(&t, 200, reps, 0, m_max, &rule)?;
        println!("{name}: selected m histogram {:?}", h.counts);
    }
    Ok(())
}
