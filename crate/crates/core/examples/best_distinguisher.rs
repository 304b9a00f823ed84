//! Which measurement best tells the two equilibrium states apart, and how
//! much of it lies in the σ^Z direction.

use nonthermal::diagnostics::optimal_distinguisher;
use nonthermal::experiments::{best_distinguisher_report, run_quench_pair, QuenchSample};
use nonthermal::model::sample_spec;

fn main() -> nonthermal::Result<()> {
    let n = 6;
    let mut outcomes = Vec::new();
    for i in 0..5u64 {
        let sample = QuenchSample::prepare(sample_spec(n, 1.0, 0.4, 500 + i)?, i as usize, 1)?;
        for k in 0..1 << n {
            outcomes.push(run_quench_pair(&sample, k)?);
        }
    }
    let first = &outcomes[0];
    let best = optimal_distinguisher(&first.omega_s1, &first.omega_s2)?;
    println!("optimal projector for k=0:\n{}attains {:.6}", best.observable, best.value);
    for a in best_distinguisher_report(&outcomes)? {
        println!(
            "n = {}: {} pairs, median σ^Z alignment {:.6}, min {:.6}, {:.1}% above {}",
            a.n,
            a.instances,
            a.median,
            a.min,
            100.0 * a.fraction_above_threshold,
            a.threshold
        );
    }
    Ok(())
}
