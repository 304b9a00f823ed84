//! The infinite-time average of a quenched state equals its dephasing in the
//! energy eigenbasis; compare against sampled time averages for growing horizons.

use nonthermal::linalg::trace_norm_hermitian;
use nonthermal::model::{build_hamiltonian, sample_spec};
use nonthermal::hilbert::PureState;
use nonthermal::spectral::{dephase, diagonalize, sampled_time_average, uniform_times};

fn main() -> nonthermal::Result<()> {
    let spec = sample_spec(4, 1.0, 0.4, 7)?;
    let sd = diagonalize(&build_hamiltonian(&spec)?.full)?;
    let psi = PureState::basis(sd.dim(), 5)?;
    let omega = dephase(&sd, &psi)?;
    println!("Tr ω² = {:.6}", omega.purity());
    for (i, horizon) in [1.0, 10.0, 100.0, 1e3, 1e4].into_iter().enumerate() {
        let times = uniform_times(horizon, 10_000, 100 + i as u64);
        let avg = sampled_time_average(&sd, &psi, &times)?;
        let r = trace_norm_hermitian(&(avg.matrix() - omega.matrix()));
        println!("T = {horizon:>7}  ‖ω − avg‖₁ = {r:.5}");
    }
    Ok(())
}
