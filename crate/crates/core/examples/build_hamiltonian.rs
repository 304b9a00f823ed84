//! Sample a disordered XYZ chain, build its Hamiltonian and look at the spectrum.
//!
//! ```text
//! cargo run --example build_hamiltonian -- 6 42
//! ```

use nonthermal::hilbert::{embed_pauli, Axis};
use nonthermal::linalg;
use nonthermal::model::{build_hamiltonian, sample_spec, SpinChainSpec};
use nonthermal::spectral::diagonalize;

fn main() -> nonthermal::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(6, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(42, |s| s.parse().expect("seed"));

    let spec = sample_spec(n, 1.0, 0.4, seed)?;
    println!("fields    {:?}", spec.h);
    println!("couplings {:?}", spec.b);

    let ham = build_hamiltonian(&spec)?;
    let sd = diagonalize(&ham.full)?;
    let e = sd.eigenvalues();
    println!("dim {}  E in [{:.6}, {:.6}]", sd.dim(), e[0], e[e.len() - 1]);
    println!("nondegenerate levels: {}  nondegenerate gaps: {}", sd.is_nondegenerate(), !sd.gap_degenerate());
    println!("residual {:.2e}  unitarity {:.2e}", sd.max_residual(&ham.full), sd.unitarity_defect());

    // global Z parity commutes with H
    let mut parity = embed_pauli(n, 1, Axis::Z)?;
    for site in 2..=n {
        parity *= embed_pauli(n, site, Axis::Z)?;
    }
    let comm = &parity * &ham.full - &ham.full * &parity;
    println!("|[P, H]|_max = {:.2e}", linalg::max_abs(&comm));

    let json = spec.to_json()?;
    assert_eq!(SpinChainSpec::from_json(&json)?, spec);
    println!("spec JSON round trip ok ({} bytes)", json.len());
    Ok(())
}
