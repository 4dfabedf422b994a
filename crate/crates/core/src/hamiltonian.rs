//! k-local Hamiltonians, the transverse-field Ising builder, the
//! shifted-positive convention and the dense eigensystem used as ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

pub const DEFAULT_DENSE_LIMIT: usize = 1 << 14;

/// Shifted spectra are only checked against `(0, emax)` up to this dimension;
/// above it the triangle inequality is trusted.
pub const VALIDATION_LIMIT: usize = 1 << 12;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LocalTerm {
    support: Vec<usize>,
    block: CMatrix,
    norm: f64,
}

impl LocalTerm {
    pub fn new(support: Vec<usize>, block: CMatrix, d: usize) -> Result<Self> {
        let local = d.pow(support.len() as u32);
        if block.nrows() != local || block.ncols() != local {
            return Err(Error::InvalidTerm(format!(
                "block is {}x{}, expected {local}x{local} for support {:?}",
                block.nrows(),
                block.ncols(),
                support
            )));
        }
        for (i, s) in support.iter().enumerate() {
            if support[..i].contains(s) {
                return Err(Error::InvalidTerm(format!("repeated site {s} in support {support:?}")));
            }
        }
        let herm = linalg::hermiticity_error(&block);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidTerm(format!("block is not Hermitian (deviation {herm:e})")));
        }
        let norm = linalg::hermitian_norm(&block);
        Ok(Self { support, block, norm })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn block(&self) -> &CMatrix {
        &self.block
    }

    /// Cached spectral norm of the block.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftPolicy {
    /// `E* = Σ‖h_j‖ + margin`.
    Triangle,
    /// `E* = −λ_min + margin`, from a dense eigensolve.
    ExactGround,
}

/// `H = Σ_j h_j + shift·I` on `n` sites of dimension `d`.
#[derive(Debug, Clone)]
pub struct LocalHamiltonian {
    n: usize,
    d: usize,
    k: usize,
    terms: Vec<LocalTerm>,
    shift: f64,
    emax: f64,
    policy: Option<ShiftPolicy>,
    dense_limit: usize,
}

impl LocalHamiltonian {
    /// Unshifted Hamiltonian; `emax` starts at the triangle bound `Σ‖h_j‖`.
    pub fn new(n: usize, d: usize, k: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        if n == 0 || d < 2 {
            return Err(Error::InvalidParameter(format!("need n ≥ 1 and d ≥ 2, got n={n}, d={d}")));
        }
        for t in &terms {
            if t.support.len() > k {
                return Err(Error::InvalidTerm(format!("support {:?} exceeds locality {k}", t.support)));
            }
            if let Some(&s) = t.support.iter().find(|&&s| s >= n) {
                return Err(Error::InvalidTerm(format!("site {s} out of range for n={n}")));
            }
            if t.block.nrows() != d.pow(t.support.len() as u32) {
                return Err(Error::InvalidTerm("block dimension does not match d".into()));
            }
        }
        let emax = terms.iter().map(LocalTerm::norm).sum();
        Ok(Self { n, d, k, terms, shift: 0.0, emax, policy: None, dense_limit: DEFAULT_DENSE_LIMIT })
    }

    pub fn with_dense_limit(mut self, limit: usize) -> Self {
        self.dense_limit = limit;
        self
    }

    /// Apply an explicit shift; `emax` becomes `shift + Σ‖h_j‖`.
    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self.emax = shift + self.norm_sum();
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn emax(&self) -> f64 {
        self.emax
    }

    pub fn policy(&self) -> Option<ShiftPolicy> {
        self.policy
    }

    pub fn dense_limit(&self) -> usize {
        self.dense_limit
    }

    pub fn norm_sum(&self) -> f64 {
        self.terms.iter().map(LocalTerm::norm).sum()
    }

    fn check_dense(&self) -> Result<()> {
        let dim = self.dim();
        if dim > self.dense_limit {
            return Err(Error::DenseLimit { dim, limit: self.dense_limit });
        }
        Ok(())
    }

    /// Dense matrix of the term sum, without the shift.
    pub fn dense_unshifted(&self) -> Result<CMatrix> {
        self.check_dense()?;
        let dim = self.dim();
        let mut h = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            h += linalg::embed(&t.block, &t.support, self.n, self.d);
        }
        Ok(h)
    }

    /// Dense matrix including the shift.
    pub fn dense(&self) -> Result<CMatrix> {
        let mut h = self.dense_unshifted()?;
        for i in 0..h.nrows() {
            h[(i, i)] += C64::new(self.shift, 0.0);
        }
        Ok(h)
    }

    /// Dense matrix of a single term, embedded in the full space.
    pub fn dense_term(&self, index: usize) -> Result<CMatrix> {
        self.check_dense()?;
        let t = &self.terms[index];
        Ok(linalg::embed(&t.block, &t.support, self.n, self.d))
    }

    /// True when every term is diagonal in the computational basis.
    pub fn is_classical(&self) -> bool {
        self.terms.iter().all(|t| {
            let b = &t.block;
            (0..b.nrows()).all(|i| (0..b.ncols()).all(|j| i == j || b[(i, j)].norm() == 0.0))
        })
    }
}

/// Transverse-field Ising chain `Σ_i g σx_i + J σz_i σz_{i+1}` (unshifted).
pub fn build_ising(n: usize, coupling: f64, field: f64, boundary: Boundary, dense_limit: usize) -> Result<LocalHamiltonian> {
    if n == 0 {
        return Err(Error::InvalidParameter("Ising chain needs n ≥ 1".into()));
    }
    if !coupling.is_finite() || !field.is_finite() {
        return Err(Error::InvalidParameter("couplings must be finite".into()));
    }
    let dim = 2usize.checked_pow(n as u32).unwrap_or(usize::MAX);
    if dim > dense_limit {
        return Err(Error::DenseLimit { dim, limit: dense_limit });
    }
    let sx = linalg::pauli_x() * C64::new(field, 0.0);
    let zz = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z()) * C64::new(coupling, 0.0);
    let mut terms = Vec::with_capacity(2 * n);
    for i in 0..n {
        terms.push(LocalTerm::new(vec![i], sx.clone(), 2)?);
    }
    let bonds = match boundary {
        Boundary::Open => n.saturating_sub(1),
        Boundary::Periodic => n,
    };
    for i in 0..bonds {
        let j = (i + 1) % n;
        if j == i {
            continue;
        }
        terms.push(LocalTerm::new(vec![i, j], zz.clone(), 2)?);
    }
    Ok(LocalHamiltonian::new(n, 2, 2, terms)?.with_dense_limit(dense_limit))
}

/// Couplings `(g, J)` with `g/J = ratio` and `‖H(J, g)‖ = ‖H(1, 0)‖`.
pub fn normalize_couplings(ratio: f64, n: usize, boundary: Boundary, dense_limit: usize) -> Result<(f64, f64)> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::InvalidParameter(format!("g/J must be positive, got {ratio}")));
    }
    let target = linalg::hermitian_norm(&build_ising(n, 1.0, 0.0, boundary, dense_limit)?.dense_unshifted()?);
    let unit = linalg::hermitian_norm(&build_ising(n, 1.0, ratio, boundary, dense_limit)?.dense_unshifted()?);
    let scale = target / unit;
    Ok((ratio * scale, scale))
}

fn default_margin(norm_sum: f64) -> f64 {
    if norm_sum > 0.0 {
        1e-6 * norm_sum
    } else {
        1e-6
    }
}

/// Shift so that `0 < H < emax` strictly.
///
/// The margin also pads `emax`, so the top of the spectrum stays strictly
/// below it even when the triangle inequality is tight.
pub fn shift_positive(h: &LocalHamiltonian, policy: ShiftPolicy) -> Result<LocalHamiltonian> {
    shift_positive_with_margin(h, policy, default_margin(h.norm_sum()))
}

pub fn shift_positive_with_margin(h: &LocalHamiltonian, policy: ShiftPolicy, margin: f64) -> Result<LocalHamiltonian> {
    if !(margin > 0.0) {
        return Err(Error::InvalidParameter("shift margin must be positive".into()));
    }
    let sum = h.norm_sum();
    let mut spectrum = None;
    let shift = match policy {
        ShiftPolicy::Triangle => sum + margin,
        ShiftPolicy::ExactGround => {
            let values = linalg::eigvalsh(&h.dense_unshifted()?);
            let lo = values[0];
            spectrum = Some(values);
            -lo + margin
        }
    };
    let mut out = h.clone();
    out.shift = shift;
    out.emax = shift + sum + margin;
    out.policy = Some(policy);
    if out.dim() <= VALIDATION_LIMIT.min(out.dense_limit) {
        let values = match spectrum {
            Some(v) => v,
            None => linalg::eigvalsh(&h.dense_unshifted()?),
        };
        let (min, max) = (values[0] + shift, values[values.len() - 1] + shift);
        if !(min > 0.0 && max < out.emax) {
            return Err(Error::SpectrumOutOfRange { min, max, emax: out.emax });
        }
    }
    Ok(out)
}

/// Triangle-inequality bound `shift + Σ‖h_j‖` on the shifted spectrum.
pub fn bound_emax(h: &LocalHamiltonian) -> f64 {
    h.shift + h.norm_sum()
}

/// Eigenvalues `E_a` (ascending) and eigenvectors `|a⟩` as columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn from_hermitian(h: &CMatrix) -> Self {
        let eig = linalg::eigh(h);
        Self { energies: eig.values, vectors: eig.vectors }
    }

    /// Diagonal Hamiltonian in the computational basis, energies kept in the
    /// given order.
    pub fn diagonal(energies: Vec<f64>) -> Self {
        let dim = energies.len();
        Self { energies, vectors: CMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn min_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        linalg::spectral_map(&linalg::HermitianEigen { values: self.energies.clone(), vectors: self.vectors.clone() }, |e| C64::new(e, 0.0))
    }

    /// `V diag(f(E)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (col, &e) in self.energies.iter().enumerate() {
            let w = f(e);
            for row in 0..n {
                scaled[(row, col)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn eigendecompose(h: &LocalHamiltonian) -> Result<EigenSystem> {
    Ok(EigenSystem::from_hermitian(&h.dense()?))
}

/// JSON model description shared by the CLI commands.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelConfig {
    pub n: usize,
    #[serde(rename = "J", default = "one")]
    pub coupling: f64,
    #[serde(default = "one")]
    pub g: f64,
    /// When present, `(g, J)` are replaced by the normalized couplings.
    #[serde(default, rename = "g_over_J", alias = "g_over_j")]
    pub g_over_j: Option<f64>,
    #[serde(default = "periodic")]
    pub boundary: Boundary,
    #[serde(default = "exact_ground")]
    pub shift_policy: ShiftPolicy,
    #[serde(default = "dense_limit")]
    pub dense_limit: usize,
}

fn one() -> f64 {
    1.0
}

fn periodic() -> Boundary {
    Boundary::Periodic
}

fn exact_ground() -> ShiftPolicy {
    ShiftPolicy::ExactGround
}

fn dense_limit() -> usize {
    DEFAULT_DENSE_LIMIT
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n: 3,
            coupling: 1.0,
            g: 1.0,
            g_over_j: None,
            boundary: Boundary::Periodic,
            shift_policy: ShiftPolicy::ExactGround,
            dense_limit: DEFAULT_DENSE_LIMIT,
        }
    }
}

impl ModelConfig {
    /// Resolved `(g, J)` after optional normalization.
    pub fn couplings(&self) -> Result<(f64, f64)> {
        match self.g_over_j {
            Some(r) => normalize_couplings(r, self.n, self.boundary, self.dense_limit),
            None => Ok((self.g, self.coupling)),
        }
    }

    /// Shifted Ising Hamiltonian described by this config.
    pub fn build(&self) -> Result<LocalHamiltonian> {
        let (g, j) = self.couplings()?;
        let h = build_ising(self.n, j, g, self.boundary, self.dense_limit)?;
        shift_positive(&h, self.shift_policy)
    }
}
