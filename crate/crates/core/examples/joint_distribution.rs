//! Stationary distribution, simulation and exact sequence probabilities.

use dbp::distribution::JointDistribution;
use dbp::process::{simulate, SimulationConfig};
use dbp::{TransitionTable, WordLength};

fn main() -> dbp::Result<()> {
    // append-1 probabilities for words 00, 01, 10, 11
    let table = TransitionTable::new(WordLength::new(2)?, vec![0.9, 0.25, 0.75, 0.1])?;
    let joint = JointDistribution::new(&table)?;
    println!("stationary word probabilities: {:?}", joint.stationary().pi);
    println!("letter marginal [P(0), P(1)]: {:?}", joint.stationary().letter_marginal());

    println!("P(101) = {:.6}", joint.probability(&[1, 0, 1]));
    println!("P(101) via indexed form = {:.6}", joint.probability_indexed(3, 0b101)?);

    let seq = simulate(&table, &SimulationConfig::new(60, 7))?;
    println!("simulated: {}", seq.to_letter_string());
    let letters = seq.as_contiguous().expect("no gaps");
    println!("ln P(simulated) = {:.4}", joint.ln_probability(&letters));
    Ok(())
}
