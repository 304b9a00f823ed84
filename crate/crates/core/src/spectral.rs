//! Spectral decomposition of Hamiltonians and the maps built from it: the
//! infinite-time average (dephasing onto eigenspaces), unitary evolution and
//! the per-eigenstate reduced states used by the quench diagnostics.

use std::ops::Range;
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{reduce_vector, Bipartition, DensityOperator, PureState};
use crate::linalg::{self, CMatrix, CVector, C64, ZERO};
use crate::rng::{substream, Stream};

/// Relative width used to merge eigenvalues into degenerate blocks.
pub const DEGENERACY_RELATIVE_TOLERANCE: f64 = 1e-9;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    blocks: Vec<Range<usize>>,
    tolerance: f64,
    gap_degenerate: OnceLock<bool>,
}

/// Diagonalizes a Hermitian matrix.
///
/// Eigenvalues come out ascending. Each eigenvector is rephased so that its
/// largest-magnitude component (first one on ties) is real and positive.
pub fn diagonalize(h: &CMatrix) -> Result<SpectralData> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::invalid("Hamiltonian must be a nonempty square matrix"));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("Hamiltonian has non-finite entries"));
    }
    let scale = linalg::max_abs(h).max(1.0);
    let defect = linalg::hermiticity_defect(h);
    if defect > 1e-12 * scale {
        return Err(Error::invalid(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    let (eigenvalues, mut eigenvectors) = linalg::hermitian_eigen(h);
    if eigenvalues.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numeric("eigensolver returned non-finite eigenvalues".into()));
    }
    for mut col in eigenvectors.column_iter_mut() {
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm();
            if m > best {
                best = m;
                pivot = i;
            }
        }
        let p = col[pivot];
        let phase = p.conj() / C64::new(p.norm(), 0.0);
        col *= phase;
        col[pivot] = C64::new(col[pivot].re, 0.0);
    }
    let range = eigenvalues[eigenvalues.len() - 1] - eigenvalues[0];
    let tolerance = DEGENERACY_RELATIVE_TOLERANCE * range;
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..eigenvalues.len() {
        if eigenvalues[k] - eigenvalues[k - 1] > tolerance {
            blocks.push(start..k);
            start = k;
        }
    }
    blocks.push(start..eigenvalues.len());
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        blocks,
        tolerance,
        gap_degenerate: OnceLock::new(),
    })
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// Maximal runs of (numerically) equal eigenvalues, as index ranges.
    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn degeneracy_tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn spectral_range(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.blocks.len() == self.dim()
    }

    /// Whether two distinct gaps between distinct levels coincide within
    /// the degeneracy tolerance. Computed on first use (`O(L² log L)` in the
    /// number of levels `L`).
    pub fn gap_degenerate(&self) -> bool {
        *self.gap_degenerate.get_or_init(|| {
            let levels: Vec<f64> = self.blocks.iter().map(|b| self.eigenvalues[b.start]).collect();
            let mut gaps = Vec::with_capacity(levels.len() * levels.len().saturating_sub(1) / 2);
            for (a, &ea) in levels.iter().enumerate() {
                for &eb in &levels[a + 1..] {
                    gaps.push(eb - ea);
                }
            }
            gaps.sort_unstable_by(f64::total_cmp);
            gaps.windows(2).any(|w| w[1] - w[0] <= self.tolerance)
        })
    }

    /// `max_k ‖H v_k − E_k v_k‖`, an `O(d³)` check.
    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        let hv = h * &self.eigenvectors;
        (0..self.dim())
            .map(|k| {
                let e = C64::new(self.eigenvalues[k], 0.0);
                (hv.column(k) - self.eigenvectors.column(k) * e).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `‖V†V − I‖_max`
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.eigenvectors.adjoint() * &self.eigenvectors;
        let d = self.dim();
        linalg::max_abs(&(g - CMatrix::identity(d, d)))
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::invalid(format!(
                "state of dim {d} against a spectrum of dim {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Amplitudes `c_k = <E_k|ψ₀>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapVector(Vec<C64>);

impl OverlapVector {
    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|c_k|²`
    pub fn weights(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Weight `<ψ₀|π|ψ₀>` carried by each block.
    pub fn block_weights(&self, blocks: &[Range<usize>]) -> Vec<f64> {
        blocks
            .iter()
            .map(|b| self.0[b.clone()].iter().map(|c| c.norm_sqr()).sum())
            .collect()
    }
}

pub fn overlaps(spectral: &SpectralData, psi0: &PureState) -> Result<OverlapVector> {
    spectral.check_dim(psi0.dim())?;
    let c = spectral.eigenvectors.ad_mul(psi0.amplitudes());
    Ok(OverlapVector(c.iter().copied().collect()))
}

/// Overlaps of a computational basis state: row `index` of `V`, conjugated.
pub fn basis_overlaps(spectral: &SpectralData, index: usize) -> Result<OverlapVector> {
    if index >= spectral.dim() {
        return Err(Error::invalid(format!("basis index {index} >= dim {}", spectral.dim())));
    }
    Ok(OverlapVector(
        spectral.eigenvectors.row(index).iter().map(|z| z.conj()).collect(),
    ))
}

/// `π_j ψ₀` for each block `j`, as columns.
fn block_projections(spectral: &SpectralData, c: &OverlapVector) -> CMatrix {
    let d = spectral.dim();
    let mut u = CMatrix::zeros(d, spectral.blocks.len());
    for (j, block) in spectral.blocks.iter().enumerate() {
        let mut col = u.column_mut(j);
        for k in block.clone() {
            col.axpy(c.0[k], &spectral.eigenvectors.column(k), ONE_C);
        }
    }
    u
}

const ONE_C: C64 = C64::new(1.0, 0.0);

/// The time-averaged state `ω = Σ_j π_j |ψ₀><ψ₀| π_j`.
pub fn dephase(spectral: &SpectralData, psi0: &PureState) -> Result<DensityOperator> {
    let c = overlaps(spectral, psi0)?;
    let u = block_projections(spectral, &c);
    Ok(DensityOperator::from_raw(&u * u.adjoint()))
}

/// Pinching of a mixed state onto the eigenspaces: `Σ_j π_j ρ π_j`.
pub fn pinch(spectral: &SpectralData, rho: &CMatrix) -> Result<CMatrix> {
    spectral.check_dim(rho.nrows())?;
    let v = &spectral.eigenvectors;
    let mut inner = v.adjoint() * rho * v;
    let mut block_of = vec![0usize; spectral.dim()];
    for (j, b) in spectral.blocks.iter().enumerate() {
        for k in b.clone() {
            block_of[k] = j;
        }
    }
    for r in 0..spectral.dim() {
        for c in 0..spectral.dim() {
            if block_of[r] != block_of[c] {
                inner[(r, c)] = ZERO;
            }
        }
    }
    Ok(v * inner * v.adjoint())
}

/// `ψ_t = Σ_k e^{-i E_k t} c_k |E_k>`
pub fn evolve(spectral: &SpectralData, psi0: &PureState, t: f64) -> Result<PureState> {
    if !t.is_finite() {
        return Err(Error::invalid("evolution time must be finite"));
    }
    let c = overlaps(spectral, psi0)?;
    Ok(evolve_overlaps(spectral, &c, t))
}

pub fn evolve_overlaps(spectral: &SpectralData, c: &OverlapVector, t: f64) -> PureState {
    let phased = CVector::from_iterator(
        spectral.dim(),
        c.0.iter()
            .zip(&spectral.eigenvalues)
            .map(|(ck, &e)| ck * C64::from_polar(1.0, -e * t)),
    );
    PureState::from_raw(&spectral.eigenvectors * phased)
}

/// `Tr_B |E_k><E_k|` for every eigenvector.
#[derive(Debug, Clone)]
pub struct ReducedEigenstateCache {
    part: Bipartition,
    states: Vec<DensityOperator>,
}

impl ReducedEigenstateCache {
    pub fn new(spectral: &SpectralData, part: &Bipartition) -> Result<Self> {
        spectral.check_dim(part.dim())?;
        let states = (0..spectral.dim())
            .map(|k| {
                reduce_vector(&spectral.eigenvector(k), part).map(DensityOperator::from_raw)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { part: part.clone(), states })
    }

    pub fn partition(&self) -> &Bipartition {
        &self.part
    }

    pub fn get(&self, k: usize) -> &DensityOperator {
        &self.states[k]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DensityOperator> {
        self.states.iter()
    }
}

pub fn reduced_eigenstate_cache(spectral: &SpectralData, part: &Bipartition) -> Result<ReducedEigenstateCache> {
    ReducedEigenstateCache::new(spectral, part)
}

/// Reduced time-averaged state `ω^S = Tr_B ω`, in `O(d · d_S²)` for
/// nondegenerate spectra. Degenerate blocks are reduced from `π_j ψ₀`.
pub fn dephase_reduced(
    spectral: &SpectralData,
    cache: &ReducedEigenstateCache,
    c: &OverlapVector,
) -> Result<DensityOperator> {
    spectral.check_dim(c.len())?;
    let d_s = cache.partition().d_s();
    let mut out = CMatrix::zeros(d_s, d_s);
    for block in &spectral.blocks {
        if block.len() == 1 {
            let w = c.0[block.start].norm_sqr();
            if w > 0.0 {
                out += cache.get(block.start).matrix() * C64::new(w, 0.0);
            }
        } else {
            let mut u = CVector::zeros(spectral.dim());
            for k in block.clone() {
                u.axpy(c.0[k], &spectral.eigenvectors.column(k), ONE_C);
            }
            out += reduce_vector(&u, cache.partition())?;
        }
    }
    Ok(DensityOperator::from_raw(out))
}

/// Uniform sample times on `[0, horizon]` from the `Times` stream of `seed`.
pub fn uniform_times(horizon: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, Stream::Times);
    (0..count).map(|_| rng.random::<f64>() * horizon).collect()
}

/// Empirical average `(1/N) Σ_t |ψ_t><ψ_t|` over explicit time samples.
/// Validation only; the exact average is [`dephase`].
pub fn sampled_time_average(spectral: &SpectralData, psi0: &PureState, times: &[f64]) -> Result<DensityOperator> {
    if times.is_empty() {
        return Err(Error::invalid("need at least one sample time"));
    }
    let c = overlaps(spectral, psi0)?;
    let d = spectral.dim();
    let mut acc = CMatrix::zeros(d, d);
    for &t in times {
        let psi = evolve_overlaps(spectral, &c, t);
        acc += linalg::outer(psi.amplitudes());
    }
    Ok(DensityOperator::from_raw(acc / C64::new(times.len() as f64, 0.0)))
}

/// `‖[A, B]‖_F`
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::frobenius(&(a * b - b * a))
}
