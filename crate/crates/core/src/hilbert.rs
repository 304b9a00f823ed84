//! Tensor-product bookkeeping for chains of spin-1/2 sites.
//!
//! Basis convention: site `i` (1-based) is bit `i - 1` of the basis index, so
//! site 1 is the least significant bit. Bit value 0 is spin up, the `+1`
//! eigenvector of `σ^Z`. For a [`Bipartition`] the subsystem index packs the
//! subsystem sites in increasing order (first listed site lowest), and the
//! bath index packs the remaining sites the same way.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};

/// Numerical negative-eigenvalue floor tolerated in reduced states.
pub const NEGATIVE_EIGENVALUE_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteIndexing {
    n: usize,
}

impl SiteIndexing {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 30 {
            return Err(Error::invalid(format!("site count {n} outside 1..=30")));
        }
        Ok(Self { n })
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n {
            return Err(Error::invalid(format!("site {site} outside 1..={}", self.n)));
        }
        Ok(())
    }

    /// Bit mask of a (1-based) site.
    pub fn mask(&self, site: usize) -> usize {
        1 << (site - 1)
    }

    /// `true` when the site is spin down in basis state `index`.
    pub fn is_down(&self, index: usize, site: usize) -> bool {
        index & self.mask(site) != 0
    }

    /// `σ^Z` eigenvalue of a site in a basis state.
    pub fn z(&self, index: usize, site: usize) -> f64 {
        if self.is_down(index, site) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn flip(&self, index: usize, site: usize) -> usize {
        index ^ self.mask(site)
    }
}

/// Split of the chain into a subsystem `S` and its complement, the bath `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    indexing: SiteIndexing,
    subsystem: Vec<usize>,
    bath: Vec<usize>,
    /// `join[b * d_s + s]` is the full basis index of `|s>_S |b>_B`.
    join: Vec<usize>,
}

impl Bipartition {
    pub fn new(n: usize, subsystem_sites: &[usize]) -> Result<Self> {
        let indexing = SiteIndexing::new(n)?;
        if subsystem_sites.is_empty() {
            return Err(Error::invalid("subsystem must contain at least one site"));
        }
        for &s in subsystem_sites {
            indexing.check_site(s)?;
        }
        if subsystem_sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("subsystem sites must be strictly increasing"));
        }
        let bath: Vec<usize> = (1..=n).filter(|s| !subsystem_sites.contains(s)).collect();
        let d_s = 1usize << subsystem_sites.len();
        let d_b = 1usize << bath.len();
        let mut join = Vec::with_capacity(d_s * d_b);
        for b in 0..d_b {
            for s in 0..d_s {
                join.push(scatter(s, subsystem_sites) | scatter(b, &bath));
            }
        }
        Ok(Self {
            indexing,
            subsystem: subsystem_sites.to_vec(),
            bath,
            join,
        })
    }

    /// Single-site subsystem.
    pub fn single_site(n: usize, site: usize) -> Result<Self> {
        Self::new(n, &[site])
    }

    pub fn indexing(&self) -> SiteIndexing {
        self.indexing
    }

    pub fn subsystem_sites(&self) -> &[usize] {
        &self.subsystem
    }

    pub fn bath_sites(&self) -> &[usize] {
        &self.bath
    }

    pub fn dim(&self) -> usize {
        self.indexing.dim()
    }

    pub fn d_s(&self) -> usize {
        1 << self.subsystem.len()
    }

    pub fn d_b(&self) -> usize {
        1 << self.bath.len()
    }

    /// Full basis index of `|s>_S ⊗ |b>_B`.
    #[inline]
    pub fn join(&self, s: usize, b: usize) -> usize {
        self.join[b * self.d_s() + s]
    }

    /// Inverse of [`join`](Self::join).
    pub fn split(&self, index: usize) -> (usize, usize) {
        (gather(index, &self.subsystem), gather(index, &self.bath))
    }

    /// `|s>_S ⊗ |φ>_B`, or more generally the product of two states.
    pub fn product_state(&self, s_state: &PureState, b_state: &PureState) -> Result<PureState> {
        if s_state.dim() != self.d_s() || b_state.dim() != self.d_b() {
            return Err(Error::invalid(format!(
                "product of dims {}x{} does not fit bipartition {}x{}",
                s_state.dim(),
                b_state.dim(),
                self.d_s(),
                self.d_b()
            )));
        }
        let mut amps = CVector::zeros(self.dim());
        for b in 0..self.d_b() {
            for s in 0..self.d_s() {
                amps[self.join(s, b)] = s_state.amplitudes()[s] * b_state.amplitudes()[b];
            }
        }
        Ok(PureState { amps })
    }
}

fn scatter(bits: usize, sites: &[usize]) -> usize {
    sites
        .iter()
        .enumerate()
        .filter(|(j, _)| bits >> j & 1 == 1)
        .fold(0, |acc, (_, &site)| acc | 1 << (site - 1))
}

fn gather(index: usize, sites: &[usize]) -> usize {
    sites
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &site)| acc | ((index >> (site - 1)) & 1) << j)
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
}

impl PureState {
    /// Wraps amplitudes after checking the norm to 1e-10.
    pub fn new(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amps })
    }

    /// Normalizes the given amplitudes.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self { amps: amps / C64::new(norm, 0.0) })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::invalid(format!("basis index {index} >= dim {dim}")));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = ONE;
        Ok(Self { amps })
    }

    pub(crate) fn from_raw(amps: CVector) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            matrix: linalg::outer(&self.amps),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity (to the floor
    /// [`NEGATIVE_EIGENVALUE_FLOOR`]).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::invalid("density operator must be a nonempty square matrix"));
        }
        let scale = linalg::max_abs(&matrix).max(1.0);
        if linalg::hermiticity_defect(&matrix) > 1e-10 * scale {
            return Err(Error::invalid("density operator is not Hermitian"));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::invalid(format!("density operator trace {tr} is not 1")));
        }
        let rho = Self { matrix };
        rho.clamped_spectrum()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    /// `Tr[ρ²]`
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Tr[A ρ]`
    pub fn expectation(&self, observable: &CMatrix) -> C64 {
        (observable * &self.matrix).trace()
    }

    /// Eigenvalues ascending, with values in `[NEGATIVE_EIGENVALUE_FLOOR, 0)`
    /// clamped to zero and the spectrum renormalized to unit sum. Anything
    /// below the floor is reported as an error.
    pub fn clamped_spectrum(&self) -> Result<Vec<f64>> {
        let mut values = linalg::hermitian_eigenvalues(&self.matrix);
        if let Some(&lowest) = values.first() {
            if lowest < NEGATIVE_EIGENVALUE_FLOOR {
                return Err(Error::Numeric(format!(
                    "density operator has eigenvalue {lowest:e} below {NEGATIVE_EIGENVALUE_FLOOR:e}"
                )));
            }
        }
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v /= total);
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> CMatrix {
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// `I ⊗ … ⊗ σ^axis ⊗ … ⊗ I` with the Pauli matrix acting on `site`.
pub fn embed_pauli(n: usize, site: usize, axis: Axis) -> Result<CMatrix> {
    let idx = SiteIndexing::new(n)?;
    idx.check_site(site)?;
    let d = idx.dim();
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let down = idx.is_down(col, site);
        match axis {
            Axis::Z => m[(col, col)] = C64::new(idx.z(col, site), 0.0),
            Axis::X => m[(idx.flip(col, site), col)] = ONE,
            // σ^Y|0> = i|1>, σ^Y|1> = -i|0>
            Axis::Y => {
                m[(idx.flip(col, site), col)] = if down {
                    C64::new(0.0, -1.0)
                } else {
                    C64::new(0.0, 1.0)
                }
            }
        }
    }
    Ok(m)
}

/// Kronecker product of single-site operators, `ops[0]` acting on site 1.
pub fn kron_sites(ops: &[CMatrix]) -> CMatrix {
    ops.iter()
        .fold(CMatrix::from_element(1, 1, ONE), |acc, op| op.kronecker(&acc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    Subsystem,
    Bath,
}

/// Partial trace of an operator on the full chain.
pub fn partial_trace(rho: &DensityOperator, part: &Bipartition, keep: Keep) -> Result<DensityOperator> {
    partial_trace_matrix(rho.matrix(), part, keep).map(DensityOperator::from_raw)
}

/// Partial trace of an arbitrary (not necessarily normalized) operator.
pub fn partial_trace_matrix(m: &CMatrix, part: &Bipartition, keep: Keep) -> Result<CMatrix> {
    if m.nrows() != part.dim() || m.ncols() != part.dim() {
        return Err(Error::invalid(format!(
            "operator of size {}x{} on a {}-dimensional bipartition",
            m.nrows(),
            m.ncols(),
            part.dim()
        )));
    }
    let (d_s, d_b) = (part.d_s(), part.d_b());
    Ok(match keep {
        Keep::Subsystem => CMatrix::from_fn(d_s, d_s, |s, t| {
            (0..d_b).map(|b| m[(part.join(s, b), part.join(t, b))]).sum()
        }),
        Keep::Bath => CMatrix::from_fn(d_b, d_b, |b, c| {
            (0..d_s).map(|s| m[(part.join(s, b), part.join(s, c))]).sum()
        }),
    })
}

/// `Tr_B |ψ><ψ|` in `O(d · d_S)`.
pub fn partial_trace_pure(psi: &PureState, part: &Bipartition) -> Result<DensityOperator> {
    reduce_vector(psi.amplitudes(), part).map(DensityOperator::from_raw)
}

/// `Tr_B |v><v|` for an unnormalized vector.
pub(crate) fn reduce_vector(v: &CVector, part: &Bipartition) -> Result<CMatrix> {
    if v.len() != part.dim() {
        return Err(Error::invalid(format!(
            "state of dim {} on a {}-dimensional bipartition",
            v.len(),
            part.dim()
        )));
    }
    let (d_s, d_b) = (part.d_s(), part.d_b());
    let mut out = CMatrix::zeros(d_s, d_s);
    let mut column = vec![ZERO; d_s];
    for b in 0..d_b {
        for (s, slot) in column.iter_mut().enumerate() {
            *slot = v[part.join(s, b)];
        }
        for s in 0..d_s {
            for t in 0..d_s {
                out[(s, t)] += column[s] * column[t].conj();
            }
        }
    }
    Ok(out)
}
