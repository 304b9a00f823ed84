//! Effective dimension three ways: IPR of the overlaps, purity of the
//! dephased state and the long-time Loschmidt echo.

use nonthermal::diagnostics::{
    effective_dimension, empirical_loschmidt, haar_random_state, inverse_participation_ratio, loschmidt_time_average,
};
use nonthermal::model::{build_hamiltonian, sample_spec};
use nonthermal::spectral::{dephase, diagonalize, overlaps, uniform_times};

fn main() -> nonthermal::Result<()> {
    let spec = sample_spec(6, 1.0, 0.4, 3)?;
    let sd = diagonalize(&build_hamiltonian(&spec)?.full)?;
    let psi = haar_random_state(sd.dim(), 11)?;
    let c = overlaps(&sd, &psi)?;
    let d_eff = effective_dimension(&c, sd.blocks());
    println!("d_eff          = {d_eff:.4}");
    println!("1/IPR          = {:.4}", 1.0 / inverse_participation_ratio(&c));
    println!("1/Tr ω²        = {:.4}", 1.0 / dephase(&sd, &psi)?.purity());
    let (mean, se) = empirical_loschmidt(&sd, &c, &uniform_times(1e4, 20_000, 5));
    println!("echo average   = {mean:.6} ± {se:.6} (exact {:.6})", loschmidt_time_average(&c, sd.blocks()));
    Ok(())
}
