//! Average effective entanglement over Haar-random bath states, compared
//! with 2δd_S.

use nonthermal::diagnostics::haar_entanglement_check;
use nonthermal::hilbert::Bipartition;
use nonthermal::model::{build_hamiltonian, sample_spec};
use nonthermal::spectral::{diagonalize, reduced_eigenstate_cache};

fn main() -> nonthermal::Result<()> {
    let n = 6;
    for seed in 0..3 {
        let sd = diagonalize(&build_hamiltonian(&sample_spec(n, 1.0, 0.4, seed)?)?.full)?;
        let cache = reduced_eigenstate_cache(&sd, &Bipartition::single_site(n, 1)?)?;
        for i in 0..2 {
            let out = haar_entanglement_check(&sd, &cache, i, 500, 1000 + seed)?;
            println!(
                "seed {seed} |{i}>: mean R = {:.4} ± {:.4}, δ = {:.4}, bound {:.4}, pass {}",
                out.mean, out.std_error, out.delta, out.bound, out.pass
            );
        }
    }
    Ok(())
}
