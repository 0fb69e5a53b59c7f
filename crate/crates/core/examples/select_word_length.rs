//! Bayes-factor comparison of word lengths 1..=10.

use dbp::inference::{select_word_length, select_word_length_with, Conditioning, PriorRule};
use dbp::process::{simulate, SimulationConfig};
use dbp::{TransitionTable, WordLength};

fn main() -> dbp::Result<()> {
    let truth = TransitionTable::new(WordLength::new(3)?, vec![0.1, 0.7, 0.5, 0.8, 0.2, 0.5, 0.3, 0.9])?;
    let seq = simulate(&truth, &SimulationConfig::new(400, 3))?;
    let m_max = WordLength::new(10)?;
    let report = select_word_length(&seq, m_max, &PriorRule::uniform())?;
    println!("m  transitions  ln evidence  wins");
    for a in 0..report.candidates.len() {
        println!(
            "{:>2}  {:>11}  {:>11.3}  {:>4}",
            report.candidates[a], report.transitions[a], report.log_evidence[a], report.wins[a]
        );
    }
    println!("selected m = {}", report.selected);
    println!("ln B(2, 3) = {:.3}", report.log_bayes_factor(2, 3).unwrap());

    let per_model = select_word_length_with(&seq, m_max, &PriorRule::uniform(), Conditioning::PerModel)?;
    println!("argmax of per-model evidence: m = {}", per_model.selected);
    Ok(())
}
