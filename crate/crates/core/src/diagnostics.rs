//! Scalar diagnostics of a quench: distances, effective dimension,
//! equilibration coefficient, effective entanglement in the eigenbasis,
//! geometric entanglement of eigenstates, and the Haar-average check of the
//! entanglement bound.

use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{reduce_vector, Bipartition, DensityOperator, PureState};
use crate::linalg::{self, CMatrix, CVector, C64, ONE};
use crate::rng::{substream, Stream};
use crate::spectral::{overlaps, OverlapVector, ReducedEigenstateCache, SpectralData};

/// Blocks whose weight `<ψ₀|π|ψ₀>` is below this contribute nothing to the
/// degenerate form of `R`.
pub const BLOCK_WEIGHT_FLOOR: f64 = 1e-14;

fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!(
            "operators of shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `½ ‖ρ − σ‖₁`
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dim(rho.matrix(), sigma.matrix())?;
    Ok(half_trace_norm(&(rho.matrix() - sigma.matrix())))
}

fn half_trace_norm(diff: &CMatrix) -> f64 {
    (0.5 * linalg::trace_norm_hermitian(diff)).min(1.0)
}

/// Two-outcome measurement that best tells `rho` from `sigma`.
#[derive(Debug, Clone)]
pub struct Distinguisher {
    /// Projector onto the positive eigenspace of `rho − sigma`.
    pub observable: CMatrix,
    /// `Tr[A(ρ − σ)]`, equal to the trace distance.
    pub value: f64,
}

pub fn optimal_distinguisher(rho: &DensityOperator, sigma: &DensityOperator) -> Result<Distinguisher> {
    check_same_dim(rho.matrix(), sigma.matrix())?;
    let diff = rho.matrix() - sigma.matrix();
    let (values, vectors) = linalg::hermitian_eigen(&diff);
    let d = diff.nrows();
    let mut observable = CMatrix::zeros(d, d);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda > 0.0 {
            observable += linalg::outer(&vectors.column(k).into_owned());
        }
    }
    let value = (&observable * &diff).trace().re;
    Ok(Distinguisher { observable, value })
}

/// `Σ_k |c_k|⁴`
pub fn inverse_participation_ratio(c: &OverlapVector) -> f64 {
    c.as_slice().iter().map(|z| z.norm_sqr().powi(2)).sum()
}

/// Infinite-time average of the Loschmidt echo `|<ψ₀|ψ_t>|²`, i.e.
/// `Σ_{k,l} δ_{E_k,E_l} |c_k|²|c_l|²`, which is `Σ_j <ψ₀|π_j|ψ₀>²` over
/// degeneracy blocks and reduces to the IPR for nondegenerate spectra.
pub fn loschmidt_time_average(c: &OverlapVector, blocks: &[Range<usize>]) -> f64 {
    c.block_weights(blocks).iter().map(|w| w * w).sum()
}

/// `1 / Tr[ω²]`
pub fn effective_dimension(c: &OverlapVector, blocks: &[Range<usize>]) -> f64 {
    1.0 / loschmidt_time_average(c, blocks)
}

/// `½ √(d_S² / d_eff)`
pub fn equilibration_coefficient(c: &OverlapVector, blocks: &[Range<usize>], d_s: usize) -> f64 {
    coefficient_from_dimension(effective_dimension(c, blocks), d_s)
}

pub fn coefficient_from_dimension(d_eff: f64, d_s: usize) -> f64 {
    0.5 * ((d_s * d_s) as f64 / d_eff).sqrt()
}

/// Empirical mean and standard error of the Loschmidt echo over sample times.
pub fn empirical_loschmidt(spectral: &SpectralData, c: &OverlapVector, times: &[f64]) -> (f64, f64) {
    let w = c.weights();
    let echoes: Vec<f64> = times
        .iter()
        .map(|&t| {
            w.iter()
                .zip(spectral.eigenvalues())
                .map(|(wk, &e)| C64::from_polar(*wk, -e * t))
                .sum::<C64>()
                .norm_sqr()
        })
        .collect();
    mean_and_stderr(&echoes)
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Effective entanglement in the eigenbasis,
/// `R = Σ_j <ψ₀|π_j|ψ₀> · D(Tr_B(π_j ψ₀ π_j)/<ψ₀|π_j|ψ₀>, ψ₀^S)`.
///
/// Singleton blocks read the cached `Tr_B|E_k><E_k|`, which makes this the
/// plain `Σ_k |c_k|² D(Tr_B|E_k><E_k|, ψ₀^S)` for nondegenerate spectra.
pub fn effective_entanglement(
    spectral: &SpectralData,
    cache: &ReducedEigenstateCache,
    c: &OverlapVector,
    psi0_s: &DensityOperator,
) -> Result<f64> {
    if c.len() != spectral.dim() || cache.len() != spectral.dim() {
        return Err(Error::invalid("overlaps, cache and spectrum disagree in dimension"));
    }
    if psi0_s.dim() != cache.partition().d_s() {
        return Err(Error::invalid(format!(
            "initial subsystem state of dim {} on a subsystem of dim {}",
            psi0_s.dim(),
            cache.partition().d_s()
        )));
    }
    let amps = c.as_slice();
    let mut r = 0.0;
    for block in spectral.blocks() {
        if block.len() == 1 {
            let w = amps[block.start].norm_sqr();
            if w > 0.0 {
                r += w * half_trace_norm(&(cache.get(block.start).matrix() - psi0_s.matrix()));
            }
            continue;
        }
        let w: f64 = amps[block.clone()].iter().map(|z| z.norm_sqr()).sum();
        if w < BLOCK_WEIGHT_FLOOR {
            continue;
        }
        let mut u = CVector::zeros(spectral.dim());
        for k in block.clone() {
            u.axpy(amps[k], &spectral.eigenvectors().column(k), ONE);
        }
        let reduced = reduce_vector(&u, cache.partition())? / C64::new(w, 0.0);
        r += w * half_trace_norm(&(reduced - psi0_s.matrix()));
    }
    Ok(r)
}

/// Per-eigenstate geometric entanglement with respect to a basis of `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricEntanglement {
    /// `δ_k = min_i D(Tr_B|E_k><E_k|, |i><i|)`
    pub per_state: Vec<f64>,
    /// `max_k δ_k`
    pub max: f64,
}

impl GeometricEntanglement {
    pub fn mean(&self) -> f64 {
        self.per_state.iter().sum::<f64>() / self.per_state.len() as f64
    }
}

/// Computational basis of a `dim`-dimensional space.
pub fn computational_basis(dim: usize) -> Vec<PureState> {
    (0..dim).map(|i| PureState::basis(dim, i).expect("index in range")).collect()
}

pub fn geometric_entanglement(cache: &ReducedEigenstateCache, basis: &[PureState]) -> Result<GeometricEntanglement> {
    let d_s = cache.partition().d_s();
    if basis.len() != d_s || basis.iter().any(|b| b.dim() != d_s) {
        return Err(Error::invalid(format!("need {d_s} basis vectors of dimension {d_s}")));
    }
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            if (a.inner(b) - C64::new(expect, 0.0)).norm() > 1e-10 {
                return Err(Error::invalid("subsystem basis is not orthonormal"));
            }
        }
    }
    let projectors: Vec<CMatrix> = basis.iter().map(|b| b.projector().into_matrix()).collect();
    let per_state: Vec<f64> = cache
        .iter()
        .map(|rho| {
            projectors
                .iter()
                .map(|p| half_trace_norm(&(rho.matrix() - p)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let max = per_state.iter().copied().fold(0.0, f64::max);
    Ok(GeometricEntanglement { per_state, max })
}

/// Lower bound on `D(ω^{S(1)}, ω^{S(2)})` for two product initial states:
/// `D(ψ₀^{S(1)}, ψ₀^{S(2)}) − R₁ − R₂`.
pub fn nonthermalization_bound(
    psi1_s: &DensityOperator,
    psi2_s: &DensityOperator,
    r1: f64,
    r2: f64,
) -> Result<f64> {
    Ok(trace_distance(psi1_s, psi2_s)? - r1 - r2)
}

/// Haar-random pure state: normalized complex standard Gaussian vector.
pub fn haar_random_state_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::invalid("Haar state needs dim >= 1"));
    }
    let v = CVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    PureState::normalized(v)
}

/// Haar-random pure state from the `Haar` stream of `seed`.
pub fn haar_random_state(dim: usize, seed: u64) -> Result<PureState> {
    haar_random_state_from(dim, &mut substream(seed, Stream::Haar))
}

/// Outcome of sampling `R(|i><i| ⊗ φ_B)` over Haar-random bath states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HaarBoundCheck {
    pub basis_index: usize,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    pub delta: f64,
    /// `2 δ d_S`
    pub bound: f64,
    /// `mean ≤ bound + 3·std_error`
    pub pass: bool,
}

/// Standard errors of slack granted to the sampled mean.
pub const HAAR_STDERR_ALLOWANCE: f64 = 3.0;

pub fn haar_entanglement_check(
    spectral: &SpectralData,
    cache: &ReducedEigenstateCache,
    basis_index: usize,
    n_samples: usize,
    seed: u64,
) -> Result<HaarBoundCheck> {
    if !spectral.is_nondegenerate() {
        return Err(Error::Degenerate(
            "the Haar-average entanglement bound is stated for nondegenerate Hamiltonians".into(),
        ));
    }
    if n_samples == 0 {
        return Err(Error::invalid("need at least one Haar sample"));
    }
    let part: &Bipartition = cache.partition();
    let s_state = PureState::basis(part.d_s(), basis_index)?;
    let s_proj = s_state.projector();
    let delta = geometric_entanglement(cache, &computational_basis(part.d_s()))?.max;
    let mut rng = substream(seed, Stream::Haar);
    let samples = (0..n_samples)
        .map(|_| {
            let phi = haar_random_state_from(part.d_b(), &mut rng)?;
            let psi0 = part.product_state(&s_state, &phi)?;
            let c = overlaps(spectral, &psi0)?;
            effective_entanglement(spectral, cache, &c, &s_proj)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, std_error) = mean_and_stderr(&samples);
    let bound = 2.0 * delta * part.d_s() as f64;
    Ok(HaarBoundCheck {
        basis_index,
        pass: mean <= bound + HAAR_STDERR_ALLOWANCE * std_error,
        samples,
        mean,
        std_error,
        delta,
        bound,
    })
}

/// `−Σ λ ln λ` over the clamped spectrum.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    Ok(rho
        .clamped_spectrum()?
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum())
}

/// Fraction of `‖A‖_F²` carried by the diagonal of `A` in the computational
/// basis of the subsystem, i.e. by the algebra generated by the `σ^Z`s.
/// `None` for the zero matrix.
pub fn sigma_z_alignment(a: &CMatrix) -> Option<f64> {
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if total <= f64::MIN_POSITIVE {
        return None;
    }
    let diag: f64 = a.diagonal().iter().map(|z| z.norm_sqr()).sum();
    Some(diag / total)
}

/// Every scalar produced by one quench pair `ψ₀^(1) = |E⁰_k>`,
/// `ψ₀^(2) = σ^X_S |E⁰_k>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchRecord {
    pub n: usize,
    pub sample_index: usize,
    pub seed: u64,
    pub k: usize,
    pub k_config_bits: String,
    pub d_eff_1: f64,
    pub d_eff_2: f64,
    #[serde(rename = "C_eq_1")]
    pub c_eq_1: f64,
    #[serde(rename = "C_eq_2")]
    pub c_eq_2: f64,
    #[serde(rename = "R_1")]
    pub r_1: f64,
    #[serde(rename = "R_2")]
    pub r_2: f64,
    pub delta_sample: f64,
    #[serde(rename = "D_init")]
    pub d_init: f64,
    #[serde(rename = "D_omega")]
    pub d_omega: f64,
    /// `D_omega − C_eq_1 − C_eq_2`
    #[serde(rename = "Delta")]
    pub margin: f64,
    pub thm1_lb: f64,
    pub degenerate_flag: bool,
}

impl QuenchRecord {
    /// Range and definitional checks on the stored values.
    pub fn check_invariants(&self) -> Result<()> {
        let d = (1usize << self.n) as f64;
        let in_unit = |x: f64| (-1e-12..=1.0 + 1e-12).contains(&x);
        let fail = |what: &str| Err(Error::Numeric(format!("record n={} k={}: {what}", self.n, self.k)));
        if ![self.d_init, self.d_omega, self.r_1, self.r_2, self.delta_sample].into_iter().all(in_unit) {
            return fail("distance outside [0,1]");
        }
        if ![self.d_eff_1, self.d_eff_2].into_iter().all(|x| x >= 1.0 - 1e-9 && x <= d + 1e-9) {
            return fail("effective dimension outside [1, d]");
        }
        if self.margin != self.d_omega - self.c_eq_1 - self.c_eq_2 {
            return fail("Delta is not D_omega - C_eq_1 - C_eq_2");
        }
        if self.thm1_lb != self.d_init - self.r_1 - self.r_2 {
            return fail("thm1_lb is not D_init - R_1 - R_2");
        }
        if self.d_omega < self.thm1_lb - 1e-10 {
            return fail("time-averaged distance below the nonthermalization bound");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{partial_trace_pure, Bipartition};
    use crate::linalg::ZERO;
    use crate::model::{build_hamiltonian, sample_spec};
    use crate::spectral::{basis_overlaps, dephase, diagonalize, reduced_eigenstate_cache};
    use proptest::prelude::{any, prop_assert, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rho_from(m: CMatrix) -> DensityOperator {
        DensityOperator::new(m).unwrap()
    }

    fn diag_state(p: &[f64]) -> DensityOperator {
        rho_from(CMatrix::from_diagonal(&CVector::from_iterator(
            p.len(),
            p.iter().map(|&x| C64::new(x, 0.0)),
        )))
    }

    fn random_mixed(dim: usize, rng: &mut impl Rng) -> DensityOperator {
        let g = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = &g * g.adjoint();
        let tr = linalg::trace(&m);
        rho_from(m / tr)
    }

    fn plus() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(CVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)])).unwrap()
    }

    #[test]
    fn distance_basics() {
        let zero = PureState::basis(2, 0).unwrap();
        let one = PureState::basis(2, 1).unwrap();
        assert_eq!(trace_distance(&zero.projector(), &zero.projector()).unwrap(), 0.0);
        assert!((trace_distance(&zero.projector(), &one.projector()).unwrap() - 1.0).abs() < 1e-15);
        // pure-state oracle √(1 − |<φ|χ>|²)
        let oracle = (1.0 - zero.inner(&plus()).norm_sqr()).sqrt();
        let d = trace_distance(&zero.projector(), &plus().projector()).unwrap();
        assert!((d - oracle).abs() < 1e-14);
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        assert!(trace_distance(&zero.projector(), &DensityOperator::maximally_mixed(4)).is_err());
    }

    #[test]
    fn distance_pure_state_oracle_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for dim in [2usize, 3, 8] {
            let a = haar_random_state_from(dim, &mut rng).unwrap();
            let b = haar_random_state_from(dim, &mut rng).unwrap();
            let oracle = (1.0 - a.inner(&b).norm_sqr()).sqrt();
            let d = trace_distance(&a.projector(), &b.projector()).unwrap();
            assert!((d - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn distinguisher_cases() {
        let a = diag_state(&[0.7, 0.3]);
        let b = diag_state(&[0.3, 0.7]);
        let best = optimal_distinguisher(&a, &b).unwrap();
        assert!((best.value - 0.4).abs() < 1e-15);
        let p0 = PureState::basis(2, 0).unwrap().projector();
        assert!(linalg::frobenius(&(best.observable - p0.matrix())) < 1e-15);
        let same = optimal_distinguisher(&a, &a).unwrap();
        assert_eq!(same.value, 0.0);
        assert!(same.observable.iter().all(|z| *z == ZERO));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let r = random_mixed(2, &mut rng);
            let s = random_mixed(2, &mut rng);
            let best = optimal_distinguisher(&r, &s).unwrap();
            assert!((best.value - trace_distance(&r, &s).unwrap()).abs() < 1e-10);
        }
    }

    fn overlaps_from(amps: &[C64]) -> OverlapVector {
        let d = amps.len();
        let sd = diagonalize(&CMatrix::from_diagonal(&CVector::from_iterator(d, (0..d).map(|k| C64::new(k as f64, 0.0))))).unwrap();
        overlaps(&sd, &PureState::new(CVector::from_vec(amps.to_vec())).unwrap()).unwrap()
    }

    #[test]
    fn effective_dimension_cases() {
        let blocks: Vec<Range<usize>> = (0..4).map(|k| k..k + 1).collect();
        let e = overlaps_from(&[ZERO, ONE, ZERO, ZERO]);
        assert_eq!(effective_dimension(&e, &blocks), 1.0);
        assert_eq!(loschmidt_time_average(&e, &blocks), 1.0);
        assert_eq!(equilibration_coefficient(&e, &blocks, 2), 1.0);
        let h = C64::new(0.5, 0.0);
        let sup = overlaps_from(&[h, h, h, h]);
        assert!((effective_dimension(&sup, &blocks) - 4.0).abs() < 1e-14);
        assert!((equilibration_coefficient(&sup, &blocks, 2) - 0.5).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let two = overlaps_from(&[C64::new(r, 0.0), ZERO, C64::new(0.0, r), ZERO]);
        assert!((loschmidt_time_average(&two, &blocks) - 0.5).abs() < 1e-15);
        // merging the two populated levels into one block
        let merged = vec![0..3, 3..4];
        assert!((loschmidt_time_average(&two, &merged) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn effective_dimension_is_inverse_purity_of_omega() {
        let spec = sample_spec(4, 1.0, 0.4, 90).unwrap();
        let sd = diagonalize(&build_hamiltonian(&spec).unwrap().full).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = haar_random_state_from(16, &mut rng).unwrap();
        let c = overlaps(&sd, &psi).unwrap();
        let omega = dephase(&sd, &psi).unwrap();
        assert!((effective_dimension(&c, sd.blocks()) - 1.0 / omega.purity()).abs() < 1e-10);
        assert!((inverse_participation_ratio(&c) - loschmidt_time_average(&c, sd.blocks())).abs() < 1e-15);
    }

    #[test]
    fn empirical_echo_matches_average() {
        let spec = sample_spec(4, 1.0, 0.4, 91).unwrap();
        let sd = diagonalize(&build_hamiltonian(&spec).unwrap().full).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = haar_random_state_from(16, &mut rng).unwrap();
        let c = overlaps(&sd, &psi).unwrap();
        let times = crate::spectral::uniform_times(1e4, 10_000, 3);
        let (mean, se) = empirical_loschmidt(&sd, &c, &times);
        let exact = loschmidt_time_average(&c, sd.blocks());
        assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} ± {se}");
    }

    /// Per-k loop oracle with reductions computed from scratch.
    fn naive_r(sd: &SpectralData, part: &Bipartition, psi: &PureState, psi_s: &DensityOperator) -> f64 {
        let mut r = 0.0;
        for k in 0..sd.dim() {
            let ek = PureState::new(sd.eigenvector(k)).unwrap();
            let ck = ek.inner(psi);
            let red = partial_trace_pure(&ek, part).unwrap();
            r += ck.norm_sqr() * trace_distance(&red, psi_s).unwrap();
        }
        r
    }

    #[test]
    fn r_matches_naive_loop() {
        let spec = sample_spec(3, 1.0, 0.4, 5).unwrap();
        let sd = diagonalize(&build_hamiltonian(&spec).unwrap().full).unwrap();
        let part = Bipartition::single_site(3, 1).unwrap();
        let cache = reduced_eigenstate_cache(&sd, &part).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let s = haar_random_state_from(2, &mut rng).unwrap();
            let b = haar_random_state_from(4, &mut rng).unwrap();
            let psi = part.product_state(&s, &b).unwrap();
            let c = overlaps(&sd, &psi).unwrap();
            let fast = effective_entanglement(&sd, &cache, &c, &s.projector()).unwrap();
            let slow = naive_r(&sd, &part, &psi, &s.projector());
            assert!((fast - slow).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&fast));
        }
    }

    #[test]
    fn r_vanishes_and_saturates() {
        // uncoupled chain: eigenstates are product states
        let spec = sample_spec(3, 1.0, 0.0, 5).unwrap();
        let sd = diagonalize(&build_hamiltonian(&spec).unwrap().full).unwrap();
        let part = Bipartition::single_site(3, 1).unwrap();
        let cache = reduced_eigenstate_cache(&sd, &part).unwrap();
        let c = basis_overlaps(&sd, 6).unwrap();
        let s0 = PureState::basis(2, 0).unwrap().projector();
        assert_eq!(effective_entanglement(&sd, &cache, &c, &s0).unwrap(), 0.0);
        // every contributing eigenstate has site 1 down, orthogonal to |0>
        let c = basis_overlaps(&sd, 5).unwrap();
        assert!((effective_entanglement(&sd, &cache, &c, &s0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn r_degenerate_form_uses_block_projections() {
        // H = σ^Z on site 2 of a 2-site chain: both levels doubly degenerate
        let z = crate::hilbert::embed_pauli(2, 2, crate::hilbert::Axis::Z).unwrap();
        let sd = diagonalize(&z).unwrap();
        let part = Bipartition::single_site(2, 1).unwrap();
        let cache = reduced_eigenstate_cache(&sd, &part).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = haar_random_state_from(2, &mut rng).unwrap();
        let b = haar_random_state_from(2, &mut rng).unwrap();
        let psi = part.product_state(&s, &b).unwrap();
        let c = overlaps(&sd, &psi).unwrap();
        // each block projection keeps site 1 untouched, so every term vanishes
        let r = effective_entanglement(&sd, &cache, &c, &s.projector()).unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn geometric_entanglement_cases() {
        let spec = sample_spec(3, 1.0, 0.0, 5).unwrap();
        let sd = diagonalize(&build_hamiltonian(&spec).unwrap().full).unwrap();
        let part = Bipartition::single_site(3, 1).unwrap();
        let cache = reduced_eigenstate_cache(&sd, &part).unwrap();
        let g = geometric_entanglement(&cache, &computational_basis(2)).unwrap();
        assert!(g.per_state.iter().all(|&d| d < 1e-15));
        // Bell-type eigenstates of σ^Xσ^X
        let x = crate::hilbert::pauli(crate::hilbert::Axis::X);
        let sd = diagonalize(&x.kronecker(&x)).unwrap();
        let part = Bipartition::single_site(2, 1).unwrap();
        let cache = reduced_eigenstate_cache(&sd, &part).unwrap();
        let basis = computational_basis(2);
        let g = geometric_entanglement(&cache, &basis).unwrap();
        // D(I/2, |i><i|) = 1/2 from the eigenvalues ±1/2 of the difference
        for (k, d) in g.per_state.iter().enumerate() {
            let oracle = half_trace_norm(&(cache.get(k).matrix() - basis[0].projector().matrix()));
            assert!((d - oracle).abs() < 1e-15);
        }
        let reversed: Vec<PureState> = basis.iter().rev().cloned().collect();
        assert_eq!(geometric_entanglement(&cache, &reversed).unwrap(), g);
        let bad = vec![basis[0].clone(), basis[0].clone()];
        assert!(geometric_entanglement(&cache, &bad).is_err());
    }

    #[test]
    fn bell_reduction_has_half_delta() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(CVector::from_vec(vec![C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)])).unwrap();
        let red = partial_trace_pure(&bell, &Bipartition::single_site(2, 1).unwrap()).unwrap();
        for b in computational_basis(2) {
            assert!((trace_distance(&red, &b.projector()).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn nonthermalization_bound_cases() {
        let p0 = PureState::basis(2, 0).unwrap().projector();
        let p1 = PureState::basis(2, 1).unwrap().projector();
        assert!(nonthermalization_bound(&p0, &p0, 0.1, 0.0).unwrap() <= 0.0);
        assert!((nonthermalization_bound(&p0, &p1, 0.1, 0.2).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn haar_states_are_normalized_and_unbiased() {
        let dim = 4;
        let m = 10_000;
        let mut rng = substream(17, Stream::Haar);
        let mut avg = CMatrix::zeros(dim, dim);
        let mut first = 0.0;
        for _ in 0..m {
            let phi = haar_random_state_from(dim, &mut rng).unwrap();
            assert!((phi.amplitudes().norm() - 1.0).abs() < 1e-12);
            first += phi.amplitudes()[0].norm_sqr();
            avg += phi.projector().into_matrix();
        }
        avg /= C64::new(m as f64, 0.0);
        let dev = linalg::max_abs(&(avg - CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0)));
        assert!(dev <= 5.0 / (m as f64).sqrt(), "{dev}");
        // |<e_1|φ>|² ~ Beta(1, dim−1), mean 1/dim, variance (dim−1)/(dim²(dim+1))
        let mean = first / m as f64;
        let sd = (((dim - 1) as f64) / ((dim * dim * (dim + 1)) as f64) / m as f64).sqrt();
        assert!((mean - 0.25).abs() < 4.0 * sd, "{mean}");
        assert_eq!(haar_random_state(3, 5).unwrap(), haar_random_state(3, 5).unwrap());
    }

    #[test]
    fn haar_check_on_uncoupled_chain_is_trivially_tight() {
        let spec = sample_spec(4, 1.0, 0.0, 12).unwrap();
        let sd = diagonalize(&build_hamiltonian(&spec).unwrap().full).unwrap();
        let cache = reduced_eigenstate_cache(&sd, &Bipartition::single_site(4, 1).unwrap()).unwrap();
        let out = haar_entanglement_check(&sd, &cache, 1, 50, 3).unwrap();
        assert_eq!(out.delta, 0.0);
        assert_eq!(out.bound, 0.0);
        assert!(out.samples.iter().all(|&r| r < 1e-14));
        assert!(out.pass);
    }

    #[test]
    fn haar_check_refuses_degenerate_spectrum() {
        let z = crate::hilbert::embed_pauli(2, 2, crate::hilbert::Axis::Z).unwrap();
        let sd = diagonalize(&z).unwrap();
        let cache = reduced_eigenstate_cache(&sd, &Bipartition::single_site(2, 1).unwrap()).unwrap();
        assert!(matches!(haar_entanglement_check(&sd, &cache, 0, 10, 1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn haar_check_reports_definitional_bound() {
        let spec = sample_spec(5, 1.0, 0.4, 13).unwrap();
        let sd = diagonalize(&build_hamiltonian(&spec).unwrap().full).unwrap();
        let cache = reduced_eigenstate_cache(&sd, &Bipartition::single_site(5, 1).unwrap()).unwrap();
        let out = haar_entanglement_check(&sd, &cache, 0, 100, 3).unwrap();
        let delta = geometric_entanglement(&cache, &computational_basis(2)).unwrap().max;
        assert_eq!(out.delta, delta);
        assert_eq!(out.bound, 2.0 * delta * 2.0);
        assert_eq!(out.samples.len(), 100);
    }

    #[test]
    fn entropy_cases() {
        assert!(von_neumann_entropy(&PureState::basis(3, 1).unwrap().projector()).unwrap().abs() < 1e-15);
        let mixed = DensityOperator::maximally_mixed(8);
        assert!((von_neumann_entropy(&mixed).unwrap() - 8f64.ln()).abs() < 1e-14);
        let s = von_neumann_entropy(&diag_state(&[0.5, 0.25, 0.25])).unwrap();
        // direct evaluation: ½ln2 + 2·¼·ln4 = 1.5 ln 2
        assert!((s - 1.5 * 2f64.ln()).abs() < 1e-14);
        assert!((s - 1.0397).abs() < 1e-4);
    }

    #[test]
    fn alignment_cases() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(0.3, 0.0), C64::new(-0.3, 0.0)]));
        assert_eq!(sigma_z_alignment(&d), Some(1.0));
        let x = crate::hilbert::pauli(crate::hilbert::Axis::X) * C64::new(0.2, 0.0);
        assert_eq!(sigma_z_alignment(&x), Some(0.0));
        assert_eq!(sigma_z_alignment(&CMatrix::zeros(2, 2)), None);
    }

    proptest! {
        #[test]
        fn triangle_inequality(seed in any::<u64>(), dim in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_mixed(dim, &mut rng);
            let b = random_mixed(dim, &mut rng);
            let c = random_mixed(dim, &mut rng);
            let ab = trace_distance(&a, &b).unwrap();
            let bc = trace_distance(&b, &c).unwrap();
            let ac = trace_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
        }
    }
}
