//! Phase estimation: evolution unitaries, the outcome kernel, padded rounding
//! and the coherent median of repeated estimates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{EigenSystem, LocalHamiltonian};
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::state::CompressedState;

pub const DEFAULT_PADDING: u32 = 4;

/// Largest `η·m` for which the median tail is computed by the exact
/// order-statistics recursion; beyond it the two-bin bound is used.
pub const EXACT_DP_LIMIT: u64 = 4096;

/// Register offsets closer than this to an integer are treated as on-grid.
const ON_GRID_TOL: f64 = 1e-11;

/// `t = π/(4·E_max)`.
pub fn evolution_time(emax: f64) -> f64 {
    std::f64::consts::FRAC_PI_4 / emax
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpeConfig {
    pub m: u32,
    pub padding: u32,
    pub eta: u32,
    pub t: f64,
}

impl QpeConfig {
    pub fn new(m: u32, padding: u32, eta: u32, emax: f64) -> Result<Self> {
        if m == 0 || eta == 0 {
            return Err(Error::InvalidParameter(format!("QPE needs m ≥ 1 and η ≥ 1, got m={m}, η={eta}")));
        }
        if m + padding > 28 {
            return Err(Error::InvalidParameter(format!("m + padding = {} exceeds 28 bits", m + padding)));
        }
        if !(emax > 0.0) {
            return Err(Error::InvalidParameter(format!("emax must be positive, got {emax}")));
        }
        Ok(Self { m, padding, eta, t: evolution_time(emax) })
    }

    pub fn emax(&self) -> f64 {
        std::f64::consts::FRAC_PI_4 / self.t
    }

    /// Controlled-`U` applications of one padded estimate.
    pub fn u_applications_per_run(&self) -> u64 {
        (1u64 << (self.m + self.padding)) - 1
    }
}

/// `U = V diag(e^{−iE_a t}) V†`.
pub fn evolution_unitary(eig: &EigenSystem, emax: f64) -> CMatrix {
    let t = evolution_time(emax);
    eig.map(|e| C64::from_polar(1.0, -e * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    Trotter,
    RandomHermitian,
}

#[derive(Debug, Clone)]
pub struct EvolutionPair {
    pub u_exact: CMatrix,
    pub u_tilde: CMatrix,
    /// Certified `‖U − Ũ‖`.
    pub eps: f64,
    /// Trotter steps (1 for the random mode).
    pub steps: usize,
}

/// Approximate evolution `Ũ` with certified distance at most `eps` from `U`.
pub fn perturbed_unitary(h: &LocalHamiltonian, eig: &EigenSystem, eps: f64, mode: PerturbationMode, seed: u64) -> Result<EvolutionPair> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::InvalidParameter(format!("perturbation eps must lie in (0, 1/4], got {eps}")));
    }
    let emax = h.emax();
    let t = evolution_time(emax);
    let u_exact = evolution_unitary(eig, emax);
    match mode {
        PerturbationMode::Trotter => {
            let dense: Vec<CMatrix> = (0..h.terms().len()).map(|j| h.dense_term(j)).collect::<Result<_>>()?;
            let mut c = 0.0;
            for j in 0..dense.len() {
                for k in j + 1..dense.len() {
                    let comm = &dense[j] * &dense[k] - &dense[k] * &dense[j];
                    c += linalg::op_norm(&comm);
                }
            }
            let steps = ((t * t * c / (2.0 * eps)).ceil() as usize).max(1);
            let dt = t / steps as f64;
            let dim = h.dim();
            let mut step = CMatrix::identity(dim, dim) * C64::from_polar(1.0, -h.shift() * dt);
            for term in &dense {
                step = linalg::expi_hermitian(term, dt) * step;
            }
            let mut u_tilde = CMatrix::identity(dim, dim);
            for _ in 0..steps {
                u_tilde = &step * u_tilde;
            }
            Ok(EvolutionPair { u_exact, u_tilde, eps: t * t * c / (2.0 * steps as f64), steps })
        }
        PerturbationMode::RandomHermitian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = linalg::random_hermitian(&mut rng, eig.dim(), 1.0);
            let h_dense = eig.reconstruct();
            let distance = |s: f64| -> (f64, CMatrix) {
                let ut = linalg::expi_hermitian(&(&h_dense + &g * C64::new(s, 0.0)), t);
                (linalg::op_norm(&(&u_exact - &ut)), ut)
            };
            let (mut lo, mut hi) = (0.0, 1.0 / t);
            while distance(hi).0 <= eps {
                lo = hi;
                hi *= 2.0;
                if hi > 1e6 / t {
                    break;
                }
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if distance(mid).0 <= eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (d, u_tilde) = distance(lo);
            Ok(EvolutionPair { u_exact, u_tilde, eps: d, steps: 1 })
        }
    }
}

fn grid_offset(energy: f64, bits: u32, emax: f64) -> f64 {
    let n = (1u64 << bits) as f64;
    energy * n / (8.0 * emax)
}

fn on_grid(c: f64) -> Option<i64> {
    let r = c.round();
    ((c - r).abs() < ON_GRID_TOL).then_some(r as i64)
}

/// `sin(πc)` evaluated from the offset to the nearest integer.
fn sin_pi(c: f64) -> f64 {
    let r = c.round();
    let s = (std::f64::consts::PI * (c - r)).sin();
    if r.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

/// Fejér law `sin²(πc)/(N² sin²(π(x − c)/N))` for a phase sitting `c` grid
/// steps above zero on an `N = 2^bits` register.
fn fejer_row(c: f64, bits: u32) -> Vec<f64> {
    let n = 1usize << bits;
    if let Some(k) = on_grid(c) {
        let mut row = vec![0.0; n];
        row[k.rem_euclid(n as i64) as usize] = 1.0;
        return row;
    }
    let nf = n as f64;
    let num = sin_pi(c).powi(2);
    (0..n)
        .map(|x| {
            let s = (std::f64::consts::PI * (x as f64 - c) / nf).sin();
            num / (nf * nf * s * s)
        })
        .collect()
}

/// Outcome probabilities `|f(E, E_a)|²` over all `2^bits` register values.
pub fn kernel_row(energy: f64, bits: u32, emax: f64) -> Vec<f64> {
    fejer_row(grid_offset(energy, bits, emax), bits)
}

/// Outcome law of phase estimation of the eigenphase `e^{iφ}` on `bits` bits.
pub fn phase_kernel_row(phase: f64, bits: u32) -> Vec<f64> {
    let n = (1u64 << bits) as f64;
    fejer_row(phase * n / (2.0 * std::f64::consts::PI), bits)
}

pub fn kernel_prob(x: usize, energy: f64, bits: u32, emax: f64) -> f64 {
    let n = 1usize << bits;
    assert!(x < n, "grid index {x} out of range for {bits} bits");
    let c = grid_offset(energy, bits, emax);
    if let Some(k) = on_grid(c) {
        return if k.rem_euclid(n as i64) as usize == x { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let s = (std::f64::consts::PI * (x as f64 - c) / nf).sin();
    sin_pi(c).powi(2) / (nf * nf * s * s)
}

/// Complex amplitudes `f(E, E_a) = N^{-1} Σ_r e^{irδ}` with `δ = 2π(x − E_a/step)/N`.
pub fn kernel_amplitudes(energy: f64, bits: u32, emax: f64) -> Vec<C64> {
    let n = 1usize << bits;
    let c = grid_offset(energy, bits, emax);
    if let Some(k) = on_grid(c) {
        let mut row = vec![ZERO; n];
        row[k.rem_euclid(n as i64) as usize] = C64::new(1.0, 0.0);
        return row;
    }
    let nf = n as f64;
    let pi = std::f64::consts::PI;
    let sc = sin_pi(c);
    (0..n)
        .map(|x| {
            let u = x as f64 - c;
            let sign = if x % 2 == 0 { -1.0 } else { 1.0 };
            let mag = sign * sc / (nf * (pi * u / nf).sin());
            C64::from_polar(1.0, pi * u * (nf - 1.0) / nf) * mag
        })
        .collect()
}

/// Single-run law of the `m`-bit estimate obtained by rounding an
/// `(m + padding)`-bit estimate to the nearest `m`-bit value.
pub fn rounded_distribution(energy: f64, m: u32, padding: u32, emax: f64) -> Vec<f64> {
    let fine = kernel_row(energy, m + padding, emax);
    let mask = (1usize << m) - 1;
    let half = if padding == 0 { 0 } else { 1usize << (padding - 1) };
    let mut out = vec![0.0; 1 << m];
    for (p, w) in fine.into_iter().enumerate() {
        out[((p + half) >> padding) & mask] += w;
    }
    out
}

/// The two closest `m`-bit grid values `(E^-, E^+)` of an energy.
pub fn two_peaks(energy: f64, m: u32, emax: f64) -> (usize, usize) {
    let c = grid_offset(energy, m, emax);
    let n = 1i64 << m;
    if let Some(k) = on_grid(c) {
        let k = k.rem_euclid(n) as usize;
        return (k, k);
    }
    let lo = c.floor() as i64;
    (lo.rem_euclid(n) as usize, (lo + 1).rem_euclid(n) as usize)
}

/// Mass of a distribution outside the two peaks.
pub fn tail_mass(dist: &[f64], peaks: (usize, usize)) -> f64 {
    dist.iter().enumerate().filter(|&(e, _)| e != peaks.0 && e != peaks.1).map(|(_, p)| p).sum()
}

/// Distribution of the number of successes in `eta` runs with success probability `p`.
fn count_distribution(p: f64, eta: u32) -> Vec<f64> {
    let mut dp = vec![0.0; eta as usize + 1];
    dp[0] = 1.0;
    for run in 0..eta as usize {
        for c in (0..=run + 1).rev() {
            let stay = if c <= run { dp[c] * (1.0 - p) } else { 0.0 };
            let step = if c > 0 { dp[c - 1] * p } else { 0.0 };
            dp[c] = stay + step;
        }
    }
    dp
}

/// Lower-median order statistic `⌈η/2⌉`.
pub fn median_rank(eta: u32) -> u32 {
    eta.div_ceil(2)
}

/// Law of the lower median of `eta` independent draws from `single`.
///
/// `P(M ≤ k)` is the probability that at least `⌈η/2⌉` draws are `≤ k`.
pub fn median_distribution(single: &[f64], eta: u32) -> Vec<f64> {
    if eta == 1 {
        return single.to_vec();
    }
    let j = median_rank(eta) as usize;
    let mut cdf = 0.0;
    let mut prev = 0.0;
    single
        .iter()
        .map(|&p| {
            cdf = (cdf + p).min(1.0);
            let g: f64 = count_distribution(cdf, eta)[j..].iter().sum();
            let out = (g - prev).max(0.0);
            prev = g;
            out
        })
        .collect()
}

/// Exact probability that the median falls outside `peaks`.
pub fn median_tail_mass(single: &[f64], eta: u32, peaks: (usize, usize)) -> f64 {
    let j = median_rank(eta) as usize;
    let (lo, hi) = (peaks.0.min(peaks.1), peaks.0.max(peaks.1));
    let below: f64 = single[..lo].iter().sum();
    let upto_hi: f64 = single[..=hi].iter().sum();
    let p_low = count_distribution(below.min(1.0), eta)[j..].iter().sum::<f64>();
    let p_high = count_distribution(upto_hi.min(1.0), eta)[..j].iter().sum::<f64>();
    p_low + p_high
}

/// Two-bin bound: each run lands far with probability at most `far`, and a
/// far median needs at least `⌈η/2⌉` far runs.
pub fn two_bin_tail_bound(far: f64, eta: u32) -> f64 {
    let j = median_rank(eta) as usize;
    count_distribution(far, eta)[j..].iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianOutcome {
    /// Per-eigencomponent probability that the median misses both peaks.
    pub tails: Vec<f64>,
    /// Squared norm added to the state's bad-mass bound.
    pub badmass_added: f64,
    /// False when the two-bin bound replaced the exact tail.
    pub exact: bool,
}

fn check_energies(state: &CompressedState, energies: &[f64]) -> Result<()> {
    let l = state.layout();
    if l.exact_levels.is_some() {
        return Err(Error::LayoutMismatch("phase estimation needs a grid energy register".into()));
    }
    if energies.len() != l.system_dim {
        return Err(Error::LayoutMismatch(format!("{} energies for D={}", energies.len(), l.system_dim)));
    }
    if state.register_occupied() {
        return Err(Error::RegisterOccupied);
    }
    Ok(())
}

fn component_weights(state: &CompressedState) -> Vec<f64> {
    let l = state.layout();
    (0..l.system_dim).map(|a| (0..l.flag_states()).map(|f| state.amplitude(a, 0, f).norm_sqr()).sum()).collect()
}

/// Single phase estimation on the layout's full register width.
///
/// `energies[a]` is the effective energy of eigencomponent `a` of the
/// unitary being estimated, i.e. its eigenphase divided by `−t`.
pub fn qpe_apply(state: &mut CompressedState, energies: &[f64]) -> Result<MedianOutcome> {
    check_energies(state, energies)?;
    let l = state.layout().clone();
    let rows: Vec<Vec<C64>> = energies.par_iter().map(|&e| kernel_amplitudes(e, l.energy_bits, l.emax)).collect();
    let peaks: Vec<(usize, usize)> = energies.iter().map(|&e| two_peaks(e, l.energy_bits, l.emax)).collect();
    let tails: Vec<f64> = rows.iter().zip(&peaks).map(|(r, &p)| tail_mass(&r.iter().map(C64::norm_sqr).collect::<Vec<_>>(), p)).collect();
    let weights = component_weights(state);
    let added: f64 = weights.iter().zip(&tails).map(|(w, t)| w * t).sum();
    state.write_register(&rows)?;
    state.set_peaks(peaks);
    state.add_badmass(added);
    Ok(MedianOutcome { tails, badmass_added: added, exact: true })
}

/// `η` padded estimates, each rounded to `m` bits, and their coherent lower
/// median written to the energy register.
///
/// The estimate registers stay entangled with the median as junk; in the
/// compressed span that leaves amplitude `√P_a(M)` on median value `M`.
pub fn median_qpe(state: &mut CompressedState, energies: &[f64], cfg: &QpeConfig) -> Result<MedianOutcome> {
    check_energies(state, energies)?;
    let l = state.layout().clone();
    if l.energy_bits != cfg.m {
        return Err(Error::LayoutMismatch(format!("register has {} bits, config asks for m={}", l.energy_bits, cfg.m)));
    }
    let exact = cfg.eta as u64 * cfg.m as u64 <= EXACT_DP_LIMIT;
    let per_a: Vec<(Vec<C64>, (usize, usize), f64)> = energies
        .par_iter()
        .map(|&e| {
            let single = rounded_distribution(e, cfg.m, cfg.padding, l.emax);
            let peaks = two_peaks(e, cfg.m, l.emax);
            let median = median_distribution(&single, cfg.eta);
            let tail = if exact { median_tail_mass(&single, cfg.eta, peaks) } else { two_bin_tail_bound(1.0 / 16.0, cfg.eta) };
            let row = median.iter().map(|&p| C64::new(p.sqrt(), 0.0)).collect();
            (row, peaks, tail)
        })
        .collect();
    let weights = component_weights(state);
    let mut rows = Vec::with_capacity(per_a.len());
    let mut peaks = Vec::with_capacity(per_a.len());
    let mut tails = Vec::with_capacity(per_a.len());
    for (r, p, t) in per_a {
        rows.push(r);
        peaks.push(p);
        tails.push(t);
    }
    let added: f64 = weights.iter().zip(&tails).map(|(w, t)| w * t).sum();
    state.write_register(&rows)?;
    state.set_peaks(peaks);
    state.add_badmass(added);
    Ok(MedianOutcome { tails, badmass_added: added, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_ising, eigendecompose, shift_positive, Boundary, ShiftPolicy, DEFAULT_DENSE_LIMIT};
    use crate::state::RegisterLayout;
    use approx::assert_abs_diff_eq;

    fn dft_row(energy: f64, bits: u32, emax: f64) -> Vec<C64> {
        let n = 1usize << bits;
        let t = evolution_time(emax);
        (0..n)
            .map(|x| {
                let delta = 2.0 * std::f64::consts::PI * x as f64 / n as f64 - t * energy;
                (0..n).map(|r| C64::from_polar(1.0, r as f64 * delta)).sum::<C64>() / n as f64
            })
            .collect()
    }

    #[test]
    fn config_invariants() {
        let c = QpeConfig::new(6, 4, 3, 2.5).unwrap();
        assert!((c.t * 2.5 - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
        assert!(QpeConfig::new(0, 4, 3, 1.0).is_err());
        assert!(QpeConfig::new(3, 4, 0, 1.0).is_err());
    }

    #[test]
    fn evolution_unitary_examples() {
        let eig = EigenSystem::diagonal(vec![0.7; 4]);
        let u = evolution_unitary(&eig, 1.0);
        let want = C64::from_polar(1.0, -0.7 * evolution_time(1.0));
        assert!((u - CMatrix::identity(4, 4) * want).norm() < 1e-14);

        let h = shift_positive(&build_ising(3, 1.0, 1.0, Boundary::Periodic, DEFAULT_DENSE_LIMIT).unwrap(), ShiftPolicy::Triangle).unwrap();
        let eig = eigendecompose(&h).unwrap();
        let u = evolution_unitary(&eig, h.emax());
        assert!(linalg::unitarity_error(&u) < 1e-12);
        let t = evolution_time(h.emax());
        for (a, &e) in eig.energies.iter().enumerate() {
            let v = eig.vectors.column(a).into_owned();
            let phase = (v.adjoint() * &u * &v)[(0, 0)].arg();
            assert!((phase + e * t).abs() < 1e-12);
            assert!(phase < 0.0 && phase > -std::f64::consts::FRAC_PI_4);
        }
    }

    #[test]
    fn kernel_matches_explicit_dft() {
        for &(e, bits) in &[(0.3137, 5u32), (1.0, 4), (0.0625, 6), (0.99, 3)] {
            let amp = kernel_amplitudes(e, bits, 1.0);
            let dft = dft_row(e, bits, 1.0);
            for (a, b) in amp.iter().zip(&dft) {
                assert!((a - b).norm() < 1e-12, "energy {e}, bits {bits}: {a} vs {b}");
            }
            let row = kernel_row(e, bits, 1.0);
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            for (x, p) in row.iter().enumerate() {
                assert_abs_diff_eq!(*p, kernel_prob(x, e, bits, 1.0), epsilon = 1e-15);
                assert_abs_diff_eq!(*p, amp[x].norm_sqr(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn kernel_on_grid_and_midpoint() {
        let emax = 1.5;
        let bits = 6;
        let step = 8.0 * emax / 64.0;
        let row = kernel_row(5.0 * step, bits, emax);
        assert_eq!(row[5], 1.0);
        assert_eq!(row.iter().sum::<f64>(), 1.0);
        let row = kernel_row(5.5 * step, bits, emax);
        let expect = 1.0 / (64.0 * 64.0 * (std::f64::consts::PI / 128.0).sin().powi(2));
        assert_abs_diff_eq!(row[5], expect, epsilon = 1e-12);
        assert_abs_diff_eq!(row[6], expect, epsilon = 1e-12);
        assert!((row[5] - 4.0 / std::f64::consts::PI.powi(2)).abs() < 1e-3);
    }

    #[test]
    fn rows_sum_to_one_over_a_cell() {
        let (emax, bits) = (1.0, 5);
        let step = 8.0 * emax / 32.0;
        for i in 0..=100 {
            let e = 3.0 * step + step * i as f64 / 100.0;
            let s: f64 = kernel_row(e, bits, emax).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn median_of_one_is_single_run() {
        let single = rounded_distribution(0.377, 4, 4, 1.0);
        assert_eq!(median_distribution(&single, 1), single);
        assert_abs_diff_eq!(single.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn median_tail_nonincreasing_in_eta() {
        let emax = 1.0;
        let step = 8.0 * emax / 16.0;
        for frac in [0.5, 0.1, 0.93] {
            let e = 2.0 * step + frac * step;
            let single = rounded_distribution(e, 4, 4, emax);
            let peaks = two_peaks(e, 4, emax);
            let mut last = 1.0;
            for eta in [1, 3, 5, 7] {
                let tail = median_tail_mass(&single, eta, peaks);
                let direct = tail_mass(&median_distribution(&single, eta), peaks);
                assert_abs_diff_eq!(tail, direct, epsilon = 1e-13);
                assert!(tail <= last + 1e-15);
                assert!(tail <= 0.5f64.powi(eta as i32));
                last = tail;
            }
        }
    }

    #[test]
    fn median_on_grid_has_no_badmass() {
        let emax = 1.0;
        let layout = RegisterLayout::grid(3, 5, 1, emax).unwrap();
        let energies: Vec<f64> = [1usize, 4, 3].iter().map(|&e| layout.energy(e)).collect();
        let cfg = QpeConfig::new(5, 4, 5, emax).unwrap();
        let mut s = CompressedState::maximally_entangled_init(layout);
        let out = median_qpe(&mut s, &energies, &cfg).unwrap();
        assert_eq!(out.badmass_added, 0.0);
        assert_eq!(s.badmass(), 0.0);
        assert_abs_diff_eq!(s.amplitude(1, 4, 0).norm_sqr(), 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(s.measured_badmass(), Some(0.0));
    }

    #[test]
    fn qpe_apply_marginals_match_kernel() {
        let emax = 2.0;
        let layout = RegisterLayout::grid(2, 4, 1, emax).unwrap();
        let energies = [0.41, 1.37];
        let mut s = CompressedState::maximally_entangled_init(layout);
        qpe_apply(&mut s, &energies).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        for (a, &e) in energies.iter().enumerate() {
            let row = kernel_row(e, 4, emax);
            for (x, p) in row.iter().enumerate() {
                assert_abs_diff_eq!(2.0 * s.amplitude(a, x, 0).norm_sqr(), *p, epsilon = 1e-12);
            }
        }
        assert!(matches!(qpe_apply(&mut s, &energies), Err(Error::RegisterOccupied)));
    }

    #[test]
    fn perturbed_unitary_modes() {
        let h = shift_positive(&build_ising(3, 1.0, 0.8, Boundary::Periodic, DEFAULT_DENSE_LIMIT).unwrap(), ShiftPolicy::Triangle).unwrap();
        let eig = eigendecompose(&h).unwrap();
        let p = perturbed_unitary(&h, &eig, 0.1, PerturbationMode::RandomHermitian, 3).unwrap();
        let d = linalg::op_norm(&(&p.u_exact - &p.u_tilde));
        assert!(d > 0.09 && d <= 0.1 + 1e-10, "distance {d}");
        assert!(linalg::unitarity_error(&p.u_tilde) < 1e-10);
        let tiny = perturbed_unitary(&h, &eig, 1e-12, PerturbationMode::RandomHermitian, 3).unwrap();
        assert!(linalg::op_norm(&(&tiny.u_exact - &tiny.u_tilde)) <= 1e-12);

        let tr = perturbed_unitary(&h, &eig, 0.05, PerturbationMode::Trotter, 0).unwrap();
        assert!(tr.eps <= 0.05);
        assert!(linalg::op_norm(&(&tr.u_exact - &tr.u_tilde)) <= tr.eps + 1e-10);
        assert!(perturbed_unitary(&h, &eig, 0.3, PerturbationMode::Trotter, 0).is_err());

        let classical =
            shift_positive(&build_ising(3, 1.0, 0.0, Boundary::Periodic, DEFAULT_DENSE_LIMIT).unwrap(), ShiftPolicy::Triangle).unwrap();
        let ceig = eigendecompose(&classical).unwrap();
        let c = perturbed_unitary(&classical, &ceig, 0.01, PerturbationMode::Trotter, 0).unwrap();
        assert_eq!(c.steps, 1);
        assert!(linalg::op_norm(&(&c.u_exact - &c.u_tilde)) < 1e-12);
    }
}
