//! Counts, maximum likelihood, conjugate posteriors and Metropolis–Hastings
//! on a simulated sequence.

use dbp::inference::{count_transitions, mh_sample_posterior, mle, posterior, BetaPrior, MhConfig};
use dbp::process::{simulate, SimulationConfig};
use dbp::{TransitionTable, WordLength};

fn main() -> dbp::Result<()> {
    let m = WordLength::new(2)?;
    let truth = TransitionTable::new(m, vec![0.9, 0.25, 0.75, 0.1])?;
    let seq = simulate(&truth, &SimulationConfig::new(200, 1))?;
    let counts = count_transitions(&seq, m);
    println!("n0 = {:?}, n1 = {:?}", counts.n0(), counts.n1());

    let fit = mle(&counts);
    let post = posterior(&counts, &BetaPrior::uniform(m))?;
    let mh = mh_sample_posterior(&counts, &BetaPrior::uniform(m), &MhConfig::default())?;
    println!("word  truth  mle     post.mean  95% credible      mh.mean  mh 95%");
    for (i, e) in post.summaries(0.95).iter().enumerate() {
        let d = &mh.edges[i];
        println!(
            "{i:>4}  {:.2}   {:.3}   {:.3}      [{:.3}, {:.3}]    {:.3}    [{:.3}, {:.3}]",
            truth.probabilities()[i],
            fit.edges[i].estimate.unwrap_or(f64::NAN),
            e.mean,
            e.lower,
            e.upper,
            d.mean,
            d.interval.0,
            d.interval.1
        );
    }
    Ok(())
}
