//! Matrix logarithms of unitaries, the wedge contour, Lipschitz constants,
//! and numerical checks of the partition-function and fidelity bounds.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, I};
use crate::seed;

/// `6π + 12`.
pub const K_BOUND: f64 = 6.0 * PI + 12.0;

/// Eigenvalues and Schur vectors of a normal matrix.
pub fn unitary_eigen(a: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    let (q, t) = a.clone().schur().unpack();
    let off: f64 = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).map(|(i, j)| t[(i, j)].norm_sqr()).sum::<f64>().sqrt();
    if off > 1e-8 * (1.0 + a.norm()) {
        return Err(Error::InvalidParameter(format!("matrix is not normal (Schur off-diagonal {off:.2e})")));
    }
    Ok(((0..n).map(|i| t[(i, i)]).collect(), q))
}

fn from_eigen(values: &[C64], q: &CMatrix) -> CMatrix {
    let mut scaled = q.clone();
    for (j, &v) in values.iter().enumerate() {
        for i in 0..q.nrows() {
            scaled[(i, j)] *= v;
        }
    }
    scaled * q.adjoint()
}

/// Eigenphases `arg λ ∈ (−π, π]` of a unitary, ascending.
pub fn eigenphases(u: &CMatrix) -> Result<Vec<f64>> {
    let (vals, _) = unitary_eigen(u)?;
    let mut p: Vec<f64> = vals.iter().map(|z| z.arg()).collect();
    p.sort_by(f64::total_cmp);
    Ok(p)
}

/// `S diag(log a_i) S⁻¹` with the principal scalar logarithm.
pub fn principal_log_unitary(a: &CMatrix) -> Result<CMatrix> {
    let (vals, q) = unitary_eigen(a)?;
    if let Some(z) = vals.iter().find(|z| PI - z.arg().abs() < 1e-9) {
        return Err(Error::BranchCut { phase: z.arg() });
    }
    let logs: Vec<C64> = vals.iter().map(|z| z.ln()).collect();
    Ok(from_eigen(&logs, &q))
}

/// Closed contour bounding `I(γ) = {1/R < |z| < R, Re z > 0}`: outer arc,
/// upper segment, inner arc, lower segment, traversed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeContour {
    pub r: f64,
    pub nodes: [usize; 4],
}

impl Default for WedgeContour {
    fn default() -> Self {
        Self { r: 2.0, nodes: [4096; 4] }
    }
}

impl WedgeContour {
    pub fn new(r: f64, nodes: usize) -> Result<Self> {
        if !(r > 1.0) || nodes == 0 {
            return Err(Error::InvalidParameter(format!("contour needs R > 1 and nodes ≥ 1 (got R={r}, nodes={nodes})")));
        }
        Ok(Self { r, nodes: [nodes; 4] })
    }

    pub fn piece_lengths(&self) -> [f64; 4] {
        let r = self.r;
        [PI * r, r - 1.0 / r, PI / r, r - 1.0 / r]
    }

    pub fn length(&self) -> f64 {
        self.piece_lengths().iter().sum()
    }

    /// Largest arc-length step of the quadrature.
    pub fn step(&self) -> f64 {
        self.piece_lengths().iter().zip(&self.nodes).map(|(l, &n)| l / n as f64).fold(0.0, f64::max)
    }

    /// `(z, dz/ds)` of piece `j` at parameter `s`.
    fn point(&self, j: usize, s: f64) -> (C64, C64) {
        let r = self.r;
        match j {
            0 => {
                let z = C64::from_polar(r, s);
                (z, I * z)
            }
            1 => (C64::new(0.0, r - s), -I),
            2 => {
                let z = C64::from_polar(1.0 / r, -s);
                (z, -I * z)
            }
            _ => (C64::new(0.0, -1.0 / r - s), -I),
        }
    }

    fn range(&self, j: usize) -> (f64, f64) {
        match j {
            0 | 2 => (-FRAC_PI_2, FRAC_PI_2),
            _ => (0.0, self.r - 1.0 / self.r),
        }
    }

    /// Trapezoid nodes `(z, weight·dz/ds)` over the whole contour.
    pub fn quadrature(&self) -> Vec<(C64, C64)> {
        let mut out = Vec::with_capacity(self.nodes.iter().sum::<usize>() + 4);
        for j in 0..4 {
            let (a, b) = self.range(j);
            let n = self.nodes[j];
            let h = (b - a) / n as f64;
            for k in 0..=n {
                let w = if k == 0 || k == n { 0.5 * h } else { h };
                let (z, dz) = self.point(j, a + k as f64 * h);
                out.push((z, dz * w));
            }
        }
        out
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re > 0.0 && z.norm() > 1.0 / self.r && z.norm() < self.r
    }

    /// Euclidean distance from `z` to the contour.
    pub fn distance(&self, z: C64) -> f64 {
        let r = self.r;
        let arc = |rad: f64| {
            if z.re >= 0.0 {
                (z.norm() - rad).abs()
            } else {
                (z - C64::new(0.0, rad)).norm().min((z + C64::new(0.0, rad)).norm())
            }
        };
        let seg = |lo: f64, hi: f64| {
            let y = z.im.clamp(lo, hi);
            (z - C64::new(0.0, y)).norm()
        };
        arc(r).min(arc(1.0 / r)).min(seg(1.0 / r, r)).min(seg(-r, -1.0 / r))
    }
}

fn resolvent(z: C64, a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let m = CMatrix::identity(n, n) * z - a;
    m.try_inverse().ok_or_else(|| Error::InvalidParameter(format!("zI − A is singular at z = {z}")))
}

/// `(1/2πi)∮ log z (zI − A)⁻¹ dz` by composite trapezoid quadrature.
///
/// Every eigenvalue must lie inside `I(γ)` at least ten quadrature steps
/// away from the contour.
pub fn contour_log(a: &CMatrix, contour: &WedgeContour) -> Result<CMatrix> {
    let margin = 10.0 * contour.step();
    let (vals, _) = unitary_eigen(a)?;
    for &z in &vals {
        let d = contour.distance(z);
        if !contour.contains(z) {
            return Err(Error::ContourMargin { distance: -d, margin });
        }
        if d < margin {
            return Err(Error::ContourMargin { distance: d, margin });
        }
    }
    let n = a.nrows();
    let nodes = contour.quadrature();
    let parts: Vec<CMatrix> = nodes
        .par_chunks(256)
        .map(|chunk| {
            let mut acc = CMatrix::zeros(n, n);
            for &(z, wdz) in chunk {
                let r = resolvent(z, a).expect("contour avoids the spectrum");
                acc += r * (z.ln() * wdz);
            }
            acc
        })
        .collect();
    let sum = parts.into_iter().fold(CMatrix::zeros(n, n), |acc, p| acc + p);
    Ok(sum / (I * 2.0 * PI))
}

/// `e^X` for an arbitrary square matrix.
pub fn expm(x: &CMatrix) -> CMatrix {
    x.exp()
}

/// Unitary with Haar eigenvectors and eigenphases uniform in `(−max_phase, max_phase)`.
pub fn random_wedge_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_phase: f64) -> (CMatrix, CMatrix) {
    let v = linalg::haar_unitary(rng, dim);
    let phases: Vec<f64> = (0..dim).map(|_| rng.random_range(-max_phase..max_phase)).collect();
    let h = linalg::spectral_map(&linalg::HermitianEigen { values: phases.clone(), vectors: v.clone() }, |p| C64::new(p, 0.0));
    (linalg::unitary_with_phases(&v, &phases), h)
}

/// `A = e^{iH_A}` with wedge spectrum and `B = e^{i(H_A + P)}`, `‖P‖ ≤ max_dist`.
pub fn random_near_pair<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_dist: f64) -> (CMatrix, CMatrix) {
    let (a, h) = random_wedge_unitary(rng, dim, FRAC_PI_4);
    let p_norm = rng.random_range(0.0..max_dist);
    let p = linalg::random_hermitian(rng, dim, p_norm);
    let b = linalg::expi_hermitian(&(h + p), -1.0);
    (a, b)
}

/// Uniform sample of `I(γ)`.
pub fn sample_region<R: Rng + ?Sized>(rng: &mut R, r: f64) -> C64 {
    let (lo, hi) = (1.0 / (r * r), r * r);
    let rad = rng.random_range(lo..hi).sqrt();
    C64::from_polar(rad, rng.random_range(-FRAC_PI_2..FRAC_PI_2))
}

/// Uniform sample of the unit-circle wedge `|arg z| < π/3`.
pub fn sample_wedge<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(-FRAC_PI_3..FRAC_PI_3))
}

/// `max{2/R, R}`.
pub fn kappa(r: f64) -> f64 {
    (2.0 / r).max(r)
}

/// `|log a − log b| / |a − b|`, `None` when `|a − b| < 1e-12`.
pub fn scalar_ratio(a: C64, b: C64) -> Option<f64> {
    let d = (a - b).norm();
    (d >= 1e-12).then(|| (a.ln() - b.ln()).norm() / d)
}

/// Largest scalar Lipschitz ratio over the given pairs.
pub fn scalar_lipschitz_check(samples: &[(C64, C64)]) -> f64 {
    samples.iter().filter_map(|&(a, b)| scalar_ratio(a, b)).fold(0.0, f64::max)
}

/// `‖Log A − Log B‖ / ‖A − B‖`, `None` for `A = B`.
pub fn matrix_lipschitz_ratio(a: &CMatrix, b: &CMatrix) -> Result<Option<f64>> {
    let d = linalg::op_norm(&(a - b));
    if d < 1e-12 {
        return Ok(None);
    }
    let la = principal_log_unitary(a)?;
    let lb = principal_log_unitary(b)?;
    Ok(Some(linalg::op_norm(&(la - lb)) / d))
}

pub fn matrix_lipschitz_check(pairs: &[(CMatrix, CMatrix)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (a, b) in pairs {
        if let Some(r) = matrix_lipschitz_ratio(a, b)? {
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeCheck {
    pub phases: Vec<f64>,
    /// All eigenphases in `(−π/3, π/3)`.
    pub in_wedge: bool,
    /// `σ(H̃) ⊂ (min σ(H) − ε/t, max σ(H) + ε/t)`.
    pub interval_eps: bool,
    /// `σ(H̃) ⊂ [min σ(H) − 2 arcsin(ε/2)/t, max σ(H) + 2 arcsin(ε/2)/t]`.
    pub interval_chord: bool,
}

/// Eigenphase location of `Ũ` given `‖U − Ũ‖ ≤ eps` with `U = e^{−iHt}`.
pub fn wedge_spectrum_check(u_tilde: &CMatrix, eps: f64, h_spectrum: &[f64], t: f64) -> Result<WedgeCheck> {
    let phases = eigenphases(u_tilde)?;
    let energies: Vec<f64> = phases.iter().map(|p| -p / t).collect();
    let lo = h_spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = h_spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 2.0 * (0.5 * eps).min(1.0).asin() / t;
    Ok(WedgeCheck {
        in_wedge: phases.iter().all(|p| p.abs() < FRAC_PI_3),
        interval_eps: energies.iter().all(|&e| e > lo - eps / t && e < hi + eps / t),
        interval_chord: energies.iter().all(|&e| e >= lo - slack - 1e-12 && e <= hi + slack + 1e-12),
        phases,
    })
}

/// `H̃ = (i/t) Log Ũ`, so that `Ũ = e^{−iH̃t}`.
pub fn effective_hamiltonian(u_tilde: &CMatrix, t: f64) -> Result<CMatrix> {
    let l = principal_log_unitary(u_tilde)?;
    let h = l * (I / t);
    Ok((&h + h.adjoint()) * C64::new(0.5, 0.0))
}

fn trace_exp(h: &CMatrix, scale: f64) -> f64 {
    linalg::eigvalsh(h).iter().map(|l| (scale * l).exp()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylCheck {
    pub z: f64,
    pub z_tilde: f64,
    pub lower: f64,
    pub upper: f64,
    pub distance: f64,
    /// `max_j |λ_j↓(H) − λ_j↓(H̃)|`.
    pub eigen_shift: f64,
    pub holds: bool,
}

pub fn weyl_partition_bound(h: &CMatrix, h_tilde: &CMatrix, beta: f64) -> WeylCheck {
    let d = linalg::hermitian_norm(&(h - h_tilde));
    let z = trace_exp(h, -beta);
    let z_tilde = trace_exp(h_tilde, -beta);
    let (lower, upper) = ((-beta * d).exp() * z, (beta * d).exp() * z);
    let eigen_shift = linalg::eigvalsh(h).iter().zip(linalg::eigvalsh(h_tilde)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let tol = 1e-12 * z.max(z_tilde);
    WeylCheck {
        holds: lower <= z_tilde + tol && z_tilde <= upper + tol && eigen_shift <= d + 1e-12 * (1.0 + d),
        z,
        z_tilde,
        lower,
        upper,
        distance: d,
        eigen_shift,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCheck {
    pub fidelity: f64,
    /// `e^{−β‖H − H̃‖}`.
    pub bound: f64,
    /// `Ẑ/√(Z Z̃)` with `Ĥ = (H + H̃)/2`.
    pub chain: f64,
    /// `1 − β‖H − H̃‖`.
    pub linear: f64,
    pub holds: bool,
}

fn gibbs(h: &CMatrix, beta: f64) -> CMatrix {
    let e = linalg::eigh(h);
    let shift = e.values.first().copied().unwrap_or(0.0);
    let rho = linalg::spectral_map(&e, |l| C64::new((-beta * (l - shift)).exp(), 0.0));
    let tr = linalg::trace(&rho).re;
    rho / C64::new(tr, 0.0)
}

pub fn fidelity_bound(h: &CMatrix, h_tilde: &CMatrix, beta: f64) -> Result<FidelityCheck> {
    let d = linalg::hermitian_norm(&(h - h_tilde));
    let fid = crate::oracle::fidelity(&gibbs(h, beta), &gibbs(h_tilde, beta))?;
    let hat = (h + h_tilde) * C64::new(0.5, 0.0);
    let lz = |m: &CMatrix| {
        let v = linalg::eigvalsh(m);
        let lo = v[0];
        -beta * lo + v.iter().map(|l| (-beta * (l - lo)).exp()).sum::<f64>().ln()
    };
    let chain = (lz(&hat) - 0.5 * (lz(h) + lz(h_tilde))).exp();
    let bound = (-beta * d).exp();
    let tol = 1e-10;
    Ok(FidelityCheck {
        holds: fid >= bound - tol && fid >= chain - tol && chain >= bound - tol,
        fidelity: fid,
        bound,
        chain,
        linear: 1.0 - beta * d,
    })
}

/// `Tr(e^{pB/2} e^{pA} e^{pB/2})^{1/p}` for each `p`.
pub fn gt_values(a: &CMatrix, b: &CMatrix, p_grid: &[f64]) -> Vec<f64> {
    let ea = linalg::eigh(a);
    let eb = linalg::eigh(b);
    p_grid
        .iter()
        .map(|&p| {
            let x = linalg::spectral_map(&eb, |l| C64::new((0.5 * p * l).exp(), 0.0));
            let y = linalg::spectral_map(&ea, |l| C64::new((p * l).exp(), 0.0));
            let m = &x * y * &x;
            let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            linalg::eigvalsh(&m).iter().map(|l| l.max(0.0).powf(1.0 / p)).sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtCheck {
    pub values: Vec<f64>,
    /// `Tr e^{A+B}`.
    pub limit: f64,
    /// `Tr(e^A e^B)`.
    pub golden_thompson: f64,
    /// Largest relative decrease between consecutive grid points.
    pub max_drop: f64,
    pub monotone: bool,
    pub above_limit: bool,
}

pub fn gt_monotonicity_check(a: &CMatrix, b: &CMatrix, p_grid: &[f64], tol: f64) -> GtCheck {
    let values = gt_values(a, b, p_grid);
    let limit = trace_exp(&(a + b), 1.0);
    let ea = linalg::hermitian_fn(a, |l| C64::new(l.exp(), 0.0));
    let eb = linalg::hermitian_fn(b, |l| C64::new(l.exp(), 0.0));
    let golden_thompson = linalg::trace(&(ea * eb)).re;
    let max_drop = values.windows(2).map(|w| (w[0] - w[1]) / w[0].abs().max(1.0)).fold(0.0, f64::max);
    GtCheck {
        monotone: max_drop <= tol,
        above_limit: values.first().is_none_or(|&v| v >= limit - tol * limit.max(1.0)),
        values,
        limit,
        golden_thompson,
        max_drop,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventCheck {
    /// `max ‖(zI − A)⁻¹‖·(R − 1)` on the outer arc.
    pub outer: f64,
    /// `max ‖(zI − A)⁻¹‖·(R − 1)/R` on the inner arc.
    pub inner: f64,
    /// `max ‖(zI − A)⁻¹‖/2` on the segments.
    pub segments: f64,
}

impl ResolventCheck {
    pub fn holds(&self) -> bool {
        let tol = 1.0 + 1e-10;
        self.outer <= tol && self.inner <= tol && self.segments <= tol
    }
}

/// Resolvent norms of `a` at `samples` points per contour piece.
pub fn resolvent_check(a: &CMatrix, contour: &WedgeContour, samples: usize) -> Result<ResolventCheck> {
    let r = contour.r;
    let mut worst = [0.0f64; 4];
    for (j, w) in worst.iter_mut().enumerate() {
        let (lo, hi) = contour.range(j);
        for k in 0..=samples {
            let s = lo + (hi - lo) * k as f64 / samples.max(1) as f64;
            let (z, _) = contour.point(j, s);
            *w = w.max(linalg::op_norm(&resolvent(z, a)?));
        }
    }
    Ok(ResolventCheck { outer: worst[0] * (r - 1.0), inner: worst[2] * (r - 1.0) / r, segments: worst[1].max(worst[3]) / 2.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub trials: usize,
    pub max_observed_ratio: f64,
    pub bound: f64,
    pub pass: bool,
    pub violations: usize,
    /// Seed of the first violating trial.
    pub first_violation: Option<u64>,
    /// Reported only; excluded from the overall verdict.
    pub informational: bool,
}

impl BoundReport {
    fn from_ratios(name: &str, bound: f64, ratios: &[(u64, f64, bool)]) -> Self {
        let bad: Vec<u64> = ratios.iter().filter(|r| !r.2).map(|r| r.0).collect();
        Self {
            name: name.into(),
            trials: ratios.len(),
            max_observed_ratio: ratios.iter().map(|r| r.1).fold(0.0, f64::max),
            bound,
            pass: bad.is_empty(),
            violations: bad.len(),
            first_violation: bad.first().copied(),
            informational: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub scalar_pairs: usize,
    pub dim: usize,
    pub contour_trials: usize,
    pub contour: WedgeContour,
    pub betas: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub eps_over_t: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1000,
            scalar_pairs: 100_000,
            dim: 8,
            contour_trials: 8,
            contour: WedgeContour::default(),
            betas: vec![0.5, 1.0, 2.0],
            p_grid: vec![0.1, 0.5, 1.0, 2.0, 4.0],
            eps_over_t: 0.2 / FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub bounds: Vec<BoundReport>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass || b.informational)
    }

    pub fn get(&self, name: &str) -> Option<&BoundReport> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

fn trials<T: Send>(n: usize, master: u64, stream: u64, f: impl Fn(u64) -> T + Sync) -> Vec<T> {
    (0..n as u64).into_par_iter().map(|i| f(seed::mix(seed::mix(master, stream), i))).collect()
}

fn hermitian_pair(s: u64, dim: usize, max_dist: f64) -> (CMatrix, CMatrix) {
    let mut rng = seed::rng(s, 0);
    let h_norm = rng.random_range(0.5..2.0);
    let h = linalg::random_hermitian(&mut rng, dim, h_norm);
    let e_norm = rng.random_range(0.0..max_dist);
    let e = linalg::random_hermitian(&mut rng, dim, e_norm);
    let ht = &h + e;
    (h, ht)
}

/// Run every bound check with seeded trials.
pub fn verify_bounds(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut bounds = Vec::new();
    let dim = cfg.dim;
    let r = cfg.contour.r;

    let matrix = trials(cfg.trials, cfg.seed, 1, |s| -> Result<(u64, f64, bool)> {
        let (a, b) = random_near_pair(&mut seed::rng(s, 0), dim, 0.1);
        let ratio = matrix_lipschitz_ratio(&a, &b)?.unwrap_or(0.0);
        Ok((s, ratio, ratio <= K_BOUND))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    bounds.push(BoundReport::from_ratios("log_lipschitz_matrix", K_BOUND, &matrix));

    let commuting = trials(cfg.trials, cfg.seed, 2, |s| {
        let mut rng = seed::rng(s, 0);
        let v = linalg::haar_unitary(&mut rng, dim);
        let pa: Vec<f64> = (0..dim).map(|_| rng.random_range(-FRAC_PI_4..FRAC_PI_4)).collect();
        let pb: Vec<f64> = pa.iter().map(|p| p + rng.random_range(-0.05..0.05)).collect();
        let a = linalg::unitary_with_phases(&v, &pa);
        let b = linalg::unitary_with_phases(&v, &pb);
        let ratio = matrix_lipschitz_ratio(&a, &b).ok().flatten().unwrap_or(0.0);
        (s, ratio, ratio <= kappa(r) + 1e-9)
    });
    bounds.push(BoundReport::from_ratios("log_lipschitz_commuting", kappa(r), &commuting));

    let chunk = 1000usize;
    let scalar_chunks = cfg.scalar_pairs.div_ceil(chunk);
    let scalar = |stream: u64, pick: fn(&mut rand_chacha::ChaCha8Rng, f64) -> C64| {
        trials(scalar_chunks, cfg.seed, stream, |s| {
            let mut rng = seed::rng(s, 0);
            let pairs: Vec<(C64, C64)> = (0..chunk).map(|_| (pick(&mut rng, r), pick(&mut rng, r))).collect();
            (s, scalar_lipschitz_check(&pairs))
        })
    };
    let region = scalar(3, sample_region);
    let kr = kappa(r);
    let rows: Vec<(u64, f64, bool)> = region.iter().map(|&(s, m)| (s, m, m <= kr + 1e-9)).collect();
    bounds.push(BoundReport { informational: true, ..BoundReport::from_ratios("scalar_kappa_region", kr, &rows) });
    let wedge = scalar(4, |rng, _| sample_wedge(rng));
    let rows: Vec<(u64, f64, bool)> = wedge.iter().map(|&(s, m)| (s, m, m <= kr + 1e-9)).collect();
    bounds.push(BoundReport::from_ratios("scalar_kappa_wedge", kr, &rows));
    let full = FRAC_PI_2 * r;
    let rows: Vec<(u64, f64, bool)> = region.iter().map(|&(s, m)| (s, m, m <= full + 1e-9)).collect();
    bounds.push(BoundReport::from_ratios("scalar_lipschitz_region_half_pi_r", full, &rows));

    let contour = trials(cfg.contour_trials.min(cfg.trials), cfg.seed, 5, |s| -> Result<(u64, f64, bool)> {
        let (a, _) = random_wedge_unitary(&mut seed::rng(s, 0), dim, FRAC_PI_3 - 0.05);
        let err = linalg::op_norm(&(contour_log(&a, &cfg.contour)? - principal_log_unitary(&a)?));
        Ok((s, err, err <= 1e-6))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    bounds.push(BoundReport::from_ratios("contour_vs_spectral_log", 1e-6, &contour));

    let resolvent = trials(cfg.contour_trials.min(cfg.trials), cfg.seed, 6, |s| -> Result<(u64, f64, bool)> {
        let (a, _) = random_wedge_unitary(&mut seed::rng(s, 0), dim, FRAC_PI_3);
        let c = resolvent_check(&a, &cfg.contour, 256)?;
        Ok((s, c.outer.max(c.inner).max(c.segments), c.holds()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    bounds.push(BoundReport::from_ratios("resolvent_norms", 1.0, &resolvent));

    let wedge_rows = trials(cfg.trials, cfg.seed, 7, |s| -> Result<(u64, f64, bool)> {
        let mut rng = seed::rng(s, 0);
        let (u, h) = random_wedge_unitary(&mut rng, dim, FRAC_PI_4);
        let eps = rng.random_range(0.01..0.25);
        let p = linalg::random_hermitian(&mut rng, dim, 1.0);
        let ut = &u * linalg::expi_hermitian(&p, -eps_to_angle(eps));
        let c = wedge_spectrum_check(&ut, eps, &linalg::eigvalsh(&(-h)), 1.0)?;
        let worst = c.phases.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        Ok((s, worst, c.in_wedge && c.interval_chord))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    bounds.push(BoundReport::from_ratios("wedge_spectrum", FRAC_PI_3, &wedge_rows));

    let heff = trials(cfg.trials, cfg.seed, 8, |s| -> Result<(u64, f64, bool)> {
        let mut rng = seed::rng(s, 0);
        let t = FRAC_PI_4;
        let h = shifted_hermitian(&mut rng, dim, 1.0);
        let u = linalg::expi_hermitian(&h, t);
        let eps = rng.random_range(0.01..0.25);
        let p = linalg::random_hermitian(&mut rng, dim, 1.0);
        let ut = &u * linalg::expi_hermitian(&p, eps_to_angle(eps));
        let eps_cert = linalg::op_norm(&(&u - &ut));
        let ht = effective_hamiltonian(&ut, t)?;
        let ratio = linalg::hermitian_norm(&(&h - &ht)) / (eps_cert / t);
        Ok((s, ratio, ratio <= K_BOUND))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    bounds.push(BoundReport::from_ratios("effective_hamiltonian", K_BOUND, &heff));

    let weyl: Vec<(u64, f64, bool)> = trials(cfg.trials, cfg.seed, 9, |s| {
        let (h, ht) = hermitian_pair(s, dim, 0.5);
        cfg.betas
            .iter()
            .map(|&b| {
                let w = weyl_partition_bound(&h, &ht, b);
                let ratio = if w.distance > 0.0 { (w.z_tilde / w.z).ln().abs() / (b * w.distance) } else { 0.0 };
                (s, ratio, w.holds)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    bounds.push(BoundReport::from_ratios("weyl_partition", 1.0, &weyl));

    let eps_over_t = cfg.eps_over_t;
    let fid = trials(cfg.trials, cfg.seed, 10, |s| -> Result<(u64, f64, bool)> {
        let (h, ht) = hermitian_pair(s, dim, eps_over_t);
        let f = fidelity_bound(&h, &ht, 1.0)?;
        let d = linalg::hermitian_norm(&(&h - &ht));
        let ratio = if d > 0.0 { -f.fidelity.ln() / d } else { 0.0 };
        Ok((s, ratio, f.holds && f.fidelity >= (-eps_over_t).exp() - 1e-10))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    bounds.push(BoundReport::from_ratios("fidelity", 1.0, &fid));

    let p_grid = cfg.p_grid.clone();
    let gt = trials(cfg.trials, cfg.seed, 11, |s| {
        let mut rng = seed::rng(s, 0);
        let a_norm = rng.random_range(0.1..2.0);
        let a = linalg::random_hermitian(&mut rng, 6, a_norm);
        let b_norm = rng.random_range(0.1..2.0);
        let b = linalg::random_hermitian(&mut rng, 6, b_norm);
        let c = gt_monotonicity_check(&a, &b, &p_grid, 1e-9);
        (s, c.max_drop.max(0.0), c.monotone && c.above_limit)
    });
    bounds.push(BoundReport::from_ratios("gt_monotonicity", 1e-9, &gt));

    Ok(VerifyReport { bounds })
}

/// Rotation angle whose unitary sits at operator distance `eps` from the identity.
fn eps_to_angle(eps: f64) -> f64 {
    2.0 * (0.5 * eps).asin()
}

/// Random Hermitian matrix with spectrum inside `(0, emax)`.
pub fn shifted_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, emax: f64) -> CMatrix {
    let v = linalg::haar_unitary(rng, dim);
    let e: Vec<f64> = (0..dim).map(|_| rng.random_range(0.01 * emax..0.99 * emax)).collect();
    linalg::spectral_map(&linalg::HermitianEigen { values: e, vectors: v }, |l| C64::new(l, 0.0))
}

/// Diagonal matrix with the given entries.
pub fn diag(values: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_row_slice(values))
}
