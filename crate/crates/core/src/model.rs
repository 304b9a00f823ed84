//! Disordered XYZ chain with open boundaries:
//!
//! ```text
//! H = Σ_{i=1}^{n} h_i σ^Z_i + Σ_{i=1}^{n-1} (b_i^X σ^X_i σ^X_{i+1} + b_i^Y σ^Y_i σ^Y_{i+1} + b_i^Z σ^Z_i σ^Z_{i+1})
//! ```
//!
//! with `h_i ~ N(0, σ₀²)` and every coupling component `~ N(0, σ₁²)`. The
//! field term is `H₀`, whose eigenbasis is the computational basis; the
//! coupling term is `H₁`. Energies are in units of `σ₀`.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{PureState, SiteIndexing};
use crate::linalg::{CMatrix, C64};
use crate::rng::{substream, Stream};

/// Largest chain this crate will build as a dense matrix.
pub const MAX_DENSE_SITES: usize = 14;

/// One disorder realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinChainSpec {
    pub n: usize,
    pub sigma0: f64,
    pub sigma1: f64,
    pub seed: u64,
    pub h: Vec<f64>,
    pub b: Vec<[f64; 3]>,
}

fn check_parameters(n: usize, sigma0: f64, sigma1: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("chain needs at least 2 sites, got {n}")));
    }
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::invalid(format!("sigma0 must be positive and finite, got {sigma0}")));
    }
    if !(sigma1 >= 0.0 && sigma1.is_finite()) {
        return Err(Error::invalid(format!("sigma1 must be nonnegative and finite, got {sigma1}")));
    }
    Ok(())
}

/// Draws fields from the `Fields` stream and couplings from the `Couplings`
/// stream of `seed`; couplings are drawn bond by bond in X, Y, Z order.
pub fn sample_spec(n: usize, sigma0: f64, sigma1: f64, seed: u64) -> Result<SpinChainSpec> {
    check_parameters(n, sigma0, sigma1)?;
    let field = Normal::new(0.0, sigma0).map_err(|e| Error::invalid(e.to_string()))?;
    let coupling = Normal::new(0.0, sigma1).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = substream(seed, Stream::Fields);
    let h = (0..n).map(|_| field.sample(&mut rng)).collect();
    let mut rng = substream(seed, Stream::Couplings);
    let b = (0..n - 1)
        .map(|_| {
            let x = coupling.sample(&mut rng);
            let y = coupling.sample(&mut rng);
            let z = coupling.sample(&mut rng);
            [x, y, z]
        })
        .collect();
    Ok(SpinChainSpec { n, sigma0, sigma1, seed, h, b })
}

impl SpinChainSpec {
    pub fn validate(&self) -> Result<()> {
        check_parameters(self.n, self.sigma0, self.sigma1)?;
        if self.h.len() != self.n || self.b.len() != self.n - 1 {
            return Err(Error::invalid(format!(
                "spec with n={} needs {} fields and {} bonds, got {} and {}",
                self.n,
                self.n,
                self.n - 1,
                self.h.len(),
                self.b.len()
            )));
        }
        if !self.h.iter().chain(self.b.iter().flatten()).all(|x| x.is_finite()) {
            return Err(Error::invalid("spec contains non-finite values"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SpinChainSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// `H₀` eigenvalue of a computational basis state.
    pub fn field_energy(&self, config: usize) -> f64 {
        let idx = SiteIndexing::new(self.n).expect("validated spec");
        (1..=self.n).map(|site| self.h[site - 1] * idx.z(config, site)).sum()
    }
}

/// `H = H₀ + H₁` as dense matrices.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub full: CMatrix,
    pub fields: CMatrix,
    pub couplings: CMatrix,
}

pub fn build_hamiltonian(spec: &SpinChainSpec) -> Result<Hamiltonian> {
    spec.validate()?;
    if spec.n > MAX_DENSE_SITES {
        return Err(Error::ResourceCap(format!(
            "dense Hamiltonian for n={} exceeds the {MAX_DENSE_SITES}-site limit",
            spec.n
        )));
    }
    let idx = SiteIndexing::new(spec.n)?;
    let d = idx.dim();
    let mut fields = CMatrix::zeros(d, d);
    let mut couplings = CMatrix::zeros(d, d);
    for col in 0..d {
        fields[(col, col)] = C64::new(spec.field_energy(col), 0.0);
        for (bond, &[bx, by, bz]) in spec.b.iter().enumerate() {
            let (i, j) = (bond + 1, bond + 2);
            let (zi, zj) = (idx.z(col, i), idx.z(col, j));
            couplings[(col, col)] += C64::new(bz * zi * zj, 0.0);
            // σ^Yσ^Y on a pair picks up i·z_i · i·z_j = -z_i z_j
            let row = idx.flip(idx.flip(col, i), j);
            couplings[(row, col)] += C64::new(bx - by * zi * zj, 0.0);
        }
    }
    Ok(Hamiltonian {
        full: &fields + &couplings,
        fields,
        couplings,
    })
}

/// Computational basis state with its `H₀` energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductEigenstate {
    pub configuration: usize,
    pub energy0: f64,
}

impl ProductEigenstate {
    pub fn to_state(&self, n: usize) -> PureState {
        PureState::basis(1 << n, self.configuration).expect("configuration within chain")
    }

    /// Configuration rendered with site 1 first.
    pub fn bits(&self, n: usize) -> String {
        (0..n)
            .map(|b| if self.configuration >> b & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn flipped(&self, spec: &SpinChainSpec, site: usize) -> Result<ProductEigenstate> {
        let idx = SiteIndexing::new(spec.n)?;
        idx.check_site(site)?;
        let configuration = idx.flip(self.configuration, site);
        Ok(ProductEigenstate {
            configuration,
            energy0: spec.field_energy(configuration),
        })
    }
}

/// All `2^n` eigenstates of `H₀`, ordered by basis index.
pub fn product_eigenbasis(spec: &SpinChainSpec) -> Result<Vec<ProductEigenstate>> {
    spec.validate()?;
    Ok((0..spec.dim())
        .map(|configuration| ProductEigenstate {
            configuration,
            energy0: spec.field_energy(configuration),
        })
        .collect())
}

/// `σ^X_site` applied to a product eigenstate.
pub fn flip_subsystem(state: &ProductEigenstate, spec: &SpinChainSpec, site: usize) -> Result<PureState> {
    Ok(state.flipped(spec, site)?.to_state(spec.n))
}
