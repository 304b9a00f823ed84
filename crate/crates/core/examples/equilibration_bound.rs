//! Time-averaged distance of the evolving subsystem state from its
//! equilibrium, against the bound ½√(d_S²/d_eff).

use nonthermal::diagnostics::{effective_dimension, equilibration_coefficient, trace_distance};
use nonthermal::hilbert::{partial_trace_pure, Bipartition};
use nonthermal::model::{build_hamiltonian, sample_spec};
use nonthermal::spectral::{basis_overlaps, dephase_reduced, diagonalize, evolve_overlaps, reduced_eigenstate_cache, uniform_times};

fn main() -> nonthermal::Result<()> {
    let n = 8;
    let spec = sample_spec(n, 1.0, 0.4, 2024)?;
    let sd = diagonalize(&build_hamiltonian(&spec)?.full)?;
    let part = Bipartition::single_site(n, 1)?;
    let cache = reduced_eigenstate_cache(&sd, &part)?;
    let times = uniform_times(1e4, 1000, 1);
    println!("{:>5} {:>9} {:>9} {:>9}", "k", "d_eff", "C_eq", "<D>_t");
    for k in [0, 1, 37, 128, 255] {
        let c = basis_overlaps(&sd, k)?;
        let omega_s = dephase_reduced(&sd, &cache, &c)?;
        let mut total = 0.0;
        for &t in &times {
            let reduced = partial_trace_pure(&evolve_overlaps(&sd, &c, t), &part)?;
            total += trace_distance(&reduced, &omega_s)?;
        }
        println!(
            "{k:>5} {:>9.3} {:>9.4} {:>9.4}",
            effective_dimension(&c, sd.blocks()),
            equilibration_coefficient(&c, sd.blocks(), part.d_s()),
            total / times.len() as f64
        );
    }
    Ok(())
}
