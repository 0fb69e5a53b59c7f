//! The Oxford–Cambridge boat race series: word-length selection, fits at
//! m = 2 and m = 3, and a prediction for the next race.

use dbp::experiment::boat_race_study;
use dbp::inference::PriorRule;
use dbp::io::boat_race;
use dbp::WordLength;

fn main() -> dbp::Result<()> {
    let series = boat_race()?;
    println!(
        "{}-{}: {}",
        series.first_year,
        series.last_year(),
        series.sequence.to_letter_string()
    );
    let fits = [WordLength::new(2)?, WordLength::new(3)?];
    let study = boat_race_study(&series, WordLength::new(10)?, &fits, &PriorRule::uniform())?;
    println!(
        "{} results, {} Oxford (0), {} Cambridge (1); selected m = {}",
        study.usable, study.zeros, study.ones, study.evidence.selected
    );
    for f in &study.fits {
        println!("m = {}: word occurrences {:?}", f.m, f.word_occurrences);
        for (i, e) in f.posterior.iter().enumerate() {
            println!(
                "  word {i:0w$b}: mean {:.3} [{:.3}, {:.3}]  mle {:.3}",
                e.mean,
                e.lower,
                e.upper,
                f.mle[i].estimate.unwrap_or(f64::NAN),
                w = f.m as usize
            );
        }
        println!(
            "  P(Cambridge next): window-marginal {:.3}, filtered {:.3}",
            f.prediction_posterior_mean.window_marginal, f.prediction_posterior_mean.conditional
        );
    }
    Ok(())
}
