//! Reduced states of a few textbook states and the defining duality of the
//! partial trace.

use nonthermal::diagnostics::{trace_distance, von_neumann_entropy};
use nonthermal::hilbert::{embed_pauli, partial_trace, pauli, Axis, Bipartition, DensityOperator, Keep, PureState};
use nonthermal::linalg::{CVector, C64};

fn state(amps: &[f64]) -> PureState {
    PureState::normalized(CVector::from_iterator(amps.len(), amps.iter().map(|&a| C64::new(a, 0.0)))).unwrap()
}

fn main() -> nonthermal::Result<()> {
    // (|00> + |11>)/√2 on two sites
    let bell = state(&[1.0, 0.0, 0.0, 1.0]);
    let part = Bipartition::single_site(2, 1)?;
    let red = partial_trace(&bell.projector(), &part, Keep::Subsystem)?;
    println!("Bell: ρ_S =\n{}", red.matrix());
    println!("entropy {:.6} (ln 2 = {:.6})", von_neumann_entropy(&red)?, 2f64.ln());
    println!("distance to I/2: {:.2e}", trace_distance(&red, &DensityOperator::maximally_mixed(2))?);

    // GHZ on three sites, keep sites 1 and 3
    let mut ghz = vec![0.0; 8];
    ghz[0] = 1.0;
    ghz[7] = 1.0;
    let ghz = state(&ghz).projector();
    let ends = Bipartition::new(3, &[1, 3])?;
    let red = partial_trace(&ghz, &ends, Keep::Subsystem)?;
    println!("GHZ on sites 1,3: diag = {:?}", red.matrix().diagonal().iter().map(|z| z.re).collect::<Vec<_>>());

    // Tr[(σ^X_1 σ^X_3) ρ] = Tr[(X ⊗ X) ρ_S]
    let full = embed_pauli(3, 1, Axis::X)? * embed_pauli(3, 3, Axis::X)?;
    let local = pauli(Axis::X).kronecker(&pauli(Axis::X));
    println!("<X1 X3> = {:.6} vs reduced {:.6}", ghz.expectation(&full).re, red.expectation(&local).re);

    let bath = partial_trace(&ghz, &ends, Keep::Bath)?;
    println!("bath (site 2) state =\n{}", bath.matrix());
    Ok(())
}
