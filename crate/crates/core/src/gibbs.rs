//! Cooling schedules, purified marked Gibbs states, amplitude amplification
//! and the thermalization cost model.

use std::collections::HashMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::EigenSystem;
use crate::linalg::C64;
use crate::oracle;
use crate::qpe::{self, QpeConfig, DEFAULT_PADDING};
use crate::state::{CompressedState, RegisterLayout};

/// Flag rotated to build `|Ψ_k⟩`.
pub const GIBBS_FLAG: u32 = 0;
/// Flag rotated to build `|Φ_k⟩`.
pub const RATIO_FLAG: u32 = 1;

const MAX_FIXED_POINT_LEVELS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchedulePolicy {
    #[default]
    Uniform,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingSchedule {
    pub betas: Vec<f64>,
    pub ell: usize,
    pub deltas: Vec<f64>,
}

impl CoolingSchedule {
    fn from_betas(betas: Vec<f64>) -> Self {
        let deltas = betas.windows(2).map(|w| w[1] - w[0]).collect();
        Self { ell: betas.len() - 1, betas, deltas }
    }

    pub fn target(&self) -> f64 {
        *self.betas.last().expect("schedule has at least β₀")
    }
}

/// `ℓ = ⌈E_max β/ln 2⌉`, ignoring float noise below 1e-12.
pub fn uniform_length(beta: f64, emax: f64) -> usize {
    let x = emax * beta / LN_2;
    (x - 1e-12).ceil().max(0.0) as usize
}

/// Uniform schedule `β_k = kβ/ℓ`, or (oracle scale only) greedy steps that
/// keep every ratio at least ½.
pub fn make_schedule(beta: f64, emax: f64, policy: SchedulePolicy, eig: Option<&EigenSystem>) -> Result<CoolingSchedule> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be finite and ≥ 0, got {beta}")));
    }
    if !(emax > 0.0) {
        return Err(Error::InvalidParameter(format!("emax must be positive, got {emax}")));
    }
    if beta == 0.0 {
        return Ok(CoolingSchedule::from_betas(vec![0.0]));
    }
    match policy {
        SchedulePolicy::Uniform => {
            let ell = uniform_length(beta, emax).max(1);
            let mut betas: Vec<f64> = (0..ell).map(|k| k as f64 * beta / ell as f64).collect();
            betas.push(beta);
            Ok(CoolingSchedule::from_betas(betas))
        }
        SchedulePolicy::Adaptive => {
            let eig = eig.ok_or_else(|| Error::InvalidParameter("adaptive schedule needs the eigensystem".into()))?;
            let mut betas = vec![0.0];
            let mut b = 0.0;
            while b < beta {
                let next = if oracle::ratio(eig, b, beta)? >= 0.5 {
                    beta
                } else {
                    let (mut lo, mut hi) = (b, beta);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if oracle::ratio(eig, b, mid)? >= 0.5 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    lo
                };
                if next <= b {
                    return Err(Error::InvalidParameter("adaptive schedule stalled".into()));
                }
                betas.push(next);
                b = next;
            }
            Ok(CoolingSchedule::from_betas(betas))
        }
    }
}

/// `m = ⌈log₂(βℓ/(tε))⌉`, at least 1.
pub fn energy_bits_for(beta: f64, ell: usize, emax: f64, eps: f64) -> u32 {
    let x = beta * ell as f64 / (qpe::evolution_time(emax) * eps);
    if x <= 2.0 {
        return 1;
    }
    (x.log2() - 1e-12).ceil() as u32
}

/// `η = ⌈(ln(ℓ/ε) + β_k E_max)/ln 2⌉`, at least 1 (ℓ taken as 1 when zero).
pub fn eta_for(ell: usize, eps: f64, beta_k: f64, emax: f64) -> u32 {
    let x = ((ell.max(1) as f64 / eps).ln() + beta_k * emax) / LN_2;
    (x - 1e-12).ceil().max(1.0) as u32
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cost {
    /// Controlled-`U` applications.
    pub u_applications: u64,
    /// Phase-estimation runs.
    pub qpe_invocations: u64,
    /// Executions of the base-state preparation circuit.
    pub preparations: u64,
}

impl Cost {
    pub fn scaled(self, times: u64) -> Self {
        Self {
            u_applications: self.u_applications.saturating_mul(times),
            qpe_invocations: self.qpe_invocations.saturating_mul(times),
            preparations: self.preparations.saturating_mul(times),
        }
    }

    pub fn add(&mut self, other: Cost) {
        self.u_applications = self.u_applications.saturating_add(other.u_applications);
        self.qpe_invocations = self.qpe_invocations.saturating_add(other.qpe_invocations);
        self.preparations = self.preparations.saturating_add(other.preparations);
    }
}

#[derive(Debug, Clone)]
pub struct PurifiedGibbs {
    pub state: CompressedState,
    pub beta: f64,
    pub badmass_bound: f64,
    /// Cost of one preparation of `state`.
    pub cost: Cost,
}

/// Maximally entangled state marked by the median of `η` padded estimates.
///
/// `energies[a]` are the effective energies of the evolution used for the
/// estimates (the exact spectrum when `U` is exact).
pub fn prepare_infinite_temperature(energies: &[f64], emax: f64, cfg: &QpeConfig) -> Result<PurifiedGibbs> {
    let layout = RegisterLayout::grid(energies.len(), cfg.m, 2, emax)?;
    let mut state = CompressedState::maximally_entangled_init(layout);
    qpe::median_qpe(&mut state, energies, cfg)?;
    let cost = Cost { u_applications: cfg.eta as u64 * cfg.u_applications_per_run(), qpe_invocations: cfg.eta as u64, preparations: 1 };
    Ok(PurifiedGibbs { badmass_bound: state.badmass(), state, beta: 0.0, cost })
}

/// Rotate the lowest fresh flag by `θ(E, β_next − β_k)`.
pub fn step_rotate(pg: &PurifiedGibbs, beta_next: f64) -> Result<CompressedState> {
    if beta_next < pg.beta {
        return Err(Error::InvalidParameter(format!("beta_next {beta_next} is below the current β = {}", pg.beta)));
    }
    let flag = pg.state.fresh_flag().ok_or_else(|| Error::InvalidParameter("no fresh flag left to rotate".into()))?;
    let mut s = pg.state.clone();
    s.conditional_rotation(beta_next - pg.beta, flag)?;
    Ok(s)
}

fn last_rotated_flag(state: &CompressedState) -> Result<u32> {
    (0..state.layout().flag_count)
        .rev()
        .find(|&f| state.flag_beta(f).is_some())
        .ok_or_else(|| Error::InvalidParameter("state has no rotated flag to amplify".into()))
}

#[derive(Debug, Clone)]
pub struct Amplified {
    pub state: CompressedState,
    pub flag: u32,
    pub weight_before: f64,
    pub weight_after: f64,
    /// Grover iterations (or fixed-point recursion depth).
    pub iterations: u32,
    /// Base-state preparations per run of the amplified circuit.
    pub preparations: u64,
    /// Factor applied to the tracked bad-mass bound.
    pub badmass_growth: f64,
    /// Flag-0 weight after each fixed-point level (empty for Grover).
    pub trace: Vec<f64>,
}

/// Squared-norm growth of any component under a map that sends the flagged
/// direction from weight `w` to `w_f` inside the two-dimensional block.
fn block_growth(w: f64, w_f: f64) -> f64 {
    let g = if w > 0.0 { w_f / w } else { 1.0 };
    let b = if w < 1.0 { (1.0 - w_f) / (1.0 - w) } else { 1.0 };
    g.max(b).max(1.0)
}

/// `q = ⌊√(D/ẑ)⌋`.
pub fn grover_iterations(z_estimate: f64, dim: usize) -> u32 {
    (dim as f64 / z_estimate).sqrt().floor().min(u32::MAX as f64) as u32
}

/// `q` Grover iterations `(I − 2|Ψ⟩⟨Ψ|)(2Π₀ − I)` on the last rotated flag.
pub fn amplitude_amplify(state: &CompressedState, z_estimate: f64, dim: usize) -> Result<Amplified> {
    if !(z_estimate > 0.0) {
        return Err(Error::InvalidParameter(format!("z estimate must be positive, got {z_estimate}")));
    }
    grover_with(state, grover_iterations(z_estimate, dim))
}

/// Grover amplification with an explicit iteration count.
pub fn grover_with(state: &CompressedState, q: u32) -> Result<Amplified> {
    let flag = last_rotated_flag(state)?;
    let w = state.flag_weight(flag, false)?;
    let mut v = state.clone();
    for _ in 0..q {
        v.reflect_flag(flag)?;
        v.reflect_about(state)?;
    }
    let w_f = v.flag_weight(flag, false)?;
    let growth = block_growth(w, w_f);
    v.scale_badmass(growth);
    Ok(Amplified {
        state: v,
        flag,
        weight_before: w,
        weight_after: w_f,
        iterations: q,
        preparations: 2 * q as u64 + 1,
        badmass_growth: growth,
        trace: Vec::new(),
    })
}

/// π/3 fixed-point recursion `Ψ_{j+1} = (I − (1−ω)|Ψ_j⟩⟨Ψ_j|)(I − (1−ω)Π₀)Ψ_j`, `ω = e^{iπ/3}`.
///
/// Each level cubes the unflagged weight and triples the preparation count.
pub fn fixed_point_amplify(state: &CompressedState, target_residual: f64, weight_lower_bound: Option<f64>) -> Result<Amplified> {
    if !(target_residual > 0.0) {
        return Err(Error::InvalidParameter(format!("target residual must be positive, got {target_residual}")));
    }
    let flag = last_rotated_flag(state)?;
    let w = state.flag_weight(flag, false)?;
    let w_known = weight_lower_bound.unwrap_or(w);
    if !(w_known > 0.0) {
        return Err(Error::InvalidParameter("fixed-point search needs a positive weight lower bound".into()));
    }
    let omega = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    let mut psi = state.clone();
    let mut weight = w;
    let mut levels = 0;
    let mut trace = vec![w];
    while 1.0 - weight > target_residual {
        if levels == MAX_FIXED_POINT_LEVELS {
            return Err(Error::InvalidParameter(format!("fixed-point search did not reach residual {target_residual}")));
        }
        let mut next = psi.clone();
        next.phase_flag_zero(flag, omega)?;
        next.phase_about(&psi, omega)?;
        psi = next;
        weight = psi.flag_weight(flag, false)?;
        trace.push(weight);
        levels += 1;
    }
    let growth = block_growth(w, weight);
    psi.scale_badmass(growth);
    Ok(Amplified {
        state: psi,
        flag,
        weight_before: w,
        weight_after: weight,
        iterations: levels,
        preparations: 3u64.pow(levels),
        badmass_growth: growth,
        trace,
    })
}

/// Preparations divided by `(1/√w)·ln(1/residual)`.
pub fn fixed_point_constant(amp: &Amplified, target_residual: f64) -> f64 {
    amp.preparations as f64 / ((1.0 / amp.weight_before.sqrt()) * (1.0 / target_residual).ln().max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Amplifier {
    /// Grover only; falls back to fixed-point search when the final weight is below ¼.
    Grover,
    /// Grover followed by fixed-point search down to residual `ε/ℓ`.
    #[default]
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EtaMode {
    #[default]
    PerStep,
    GlobalMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ZSource {
    Oracle,
    /// Estimates of `Z(β_k)` for `k = 1..=ℓ`.
    Estimates(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareOptions {
    pub amplifier: Amplifier,
    pub z_source: ZSource,
    pub m: Option<u32>,
    pub padding: u32,
    pub eta_mode: EtaMode,
    pub schedule: SchedulePolicy,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        Self {
            amplifier: Amplifier::default(),
            z_source: ZSource::Oracle,
            m: None,
            padding: DEFAULT_PADDING,
            eta_mode: EtaMode::default(),
            schedule: SchedulePolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub beta: f64,
    pub eta: u32,
    pub q: u32,
    pub weight_before: f64,
    pub weight_after: f64,
    pub fixed_point_levels: u32,
    pub badmass_bound: f64,
    pub measured_badmass: f64,
    pub u_applications: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareDiagnostics {
    pub betas: Vec<f64>,
    pub m: u32,
    pub steps: Vec<StepDiagnostics>,
    pub cost: Cost,
}

/// Amplify `Ψ` according to `amplifier`, returning the state and its cost in preparations.
pub fn amplify(psi: &CompressedState, q: u32, amplifier: Amplifier, residual: f64) -> Result<(Amplified, u32)> {
    let grover = grover_with(psi, q)?;
    match amplifier {
        Amplifier::Grover if grover.weight_after >= 0.25 => Ok((grover, 0)),
        Amplifier::Grover => {
            let fp = fixed_point_amplify(psi, residual, None)?;
            let levels = fp.iterations;
            Ok((fp, levels))
        }
        Amplifier::FixedPoint => {
            let mut fp = fixed_point_amplify(&grover.state, residual, None)?;
            let levels = fp.iterations;
            fp.preparations *= grover.preparations;
            fp.weight_before = grover.weight_before;
            fp.badmass_growth *= grover.badmass_growth;
            fp.iterations = grover.iterations;
            Ok((fp, levels))
        }
    }
}

/// Sequentially prepare `|β_k⟩` for every point of the schedule and return
/// the state at the target `β`.
///
/// `energies` are the effective energies used by phase estimation; `eig`
/// supplies the oracle `Z(β_k)` when `z_source` is [`ZSource::Oracle`].
pub fn prepare_purified_gibbs(
    eig: &EigenSystem,
    energies: &[f64],
    emax: f64,
    beta: f64,
    eps: f64,
    opts: &PrepareOptions,
) -> Result<(PurifiedGibbs, PrepareDiagnostics)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let schedule = make_schedule(beta, emax, opts.schedule, Some(eig))?;
    let ell = schedule.ell;
    let m = opts.m.unwrap_or_else(|| energy_bits_for(beta, ell, emax, eps));
    let residual = eps / ell.max(1) as f64;
    let mut bases: HashMap<u32, PurifiedGibbs> = HashMap::new();
    let mut base_for = |eta: u32| -> Result<PurifiedGibbs> {
        if let Some(b) = bases.get(&eta) {
            return Ok(b.clone());
        }
        let cfg = QpeConfig::new(m, opts.padding, eta, emax)?;
        let b = prepare_infinite_temperature(energies, emax, &cfg)?;
        bases.insert(eta, b.clone());
        Ok(b)
    };
    let eta_at = |bk: f64| match opts.eta_mode {
        EtaMode::PerStep => eta_for(ell, eps, bk, emax),
        EtaMode::GlobalMax => eta_for(ell, eps, beta, emax),
    };

    let mut total = Cost::default();
    let mut steps = Vec::with_capacity(ell);
    let mut current = base_for(eta_at(0.0))?;
    total.add(current.cost);
    for k in 1..=ell {
        let bk = schedule.betas[k];
        let eta = eta_at(bk);
        let base = base_for(eta)?;
        let psi = step_rotate(&base, bk)?;
        let z = match &opts.z_source {
            ZSource::Oracle => oracle::partition_function(eig, bk)?,
            ZSource::Estimates(zs) => *zs.get(k - 1).ok_or_else(|| Error::InvalidParameter(format!("missing Z estimate for step {k}")))?,
        };
        let q = grover_iterations(z, energies.len());
        let (amp, levels) = amplify(&psi, q, opts.amplifier, residual)?;
        let cost = base.cost.scaled(amp.preparations);
        total.add(cost);
        steps.push(StepDiagnostics {
            beta: bk,
            eta,
            q,
            weight_before: amp.weight_before,
            weight_after: amp.weight_after,
            fixed_point_levels: levels,
            badmass_bound: amp.state.badmass(),
            measured_badmass: amp.state.measured_badmass().unwrap_or(0.0),
            u_applications: cost.u_applications,
        });
        current = PurifiedGibbs { badmass_bound: amp.state.badmass(), state: amp.state, beta: bk, cost };
    }
    let diag = PrepareDiagnostics { betas: schedule.betas.clone(), m, steps, cost: total };
    Ok((current, diag))
}

/// `√(D/Z) (βE_max/δ) ln(1/δ) (ln(1/δ) + βE_max)` with unit constant; zero at `β = 0`.
pub fn thermalization_cost(beta: f64, emax: f64, delta: f64, dim: usize, z: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    let be = beta * emax;
    let l = (1.0 / delta).ln();
    (dim as f64 / z).sqrt() * (be / delta) * l * (l + be)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_ising, eigendecompose, shift_positive, Boundary, ShiftPolicy, DEFAULT_DENSE_LIMIT};
    use approx::assert_abs_diff_eq;

    fn ising2() -> (EigenSystem, f64) {
        let h = shift_positive(&build_ising(2, 1.0, 1.0, Boundary::Open, DEFAULT_DENSE_LIMIT).unwrap(), ShiftPolicy::ExactGround).unwrap();
        (eigendecompose(&h).unwrap(), h.emax())
    }

    fn on_grid_base(levels: &[usize], m: u32, emax: f64) -> (PurifiedGibbs, Vec<f64>) {
        let layout = RegisterLayout::grid(levels.len(), m, 2, emax).unwrap();
        let energies: Vec<f64> = levels.iter().map(|&e| layout.energy(e)).collect();
        let cfg = QpeConfig::new(m, 4, 3, emax).unwrap();
        (prepare_infinite_temperature(&energies, emax, &cfg).unwrap(), energies)
    }

    #[test]
    fn schedule_examples() {
        let s = make_schedule(0.0, 3.0, SchedulePolicy::Uniform, None).unwrap();
        assert_eq!((s.ell, s.betas.clone()), (0, vec![0.0]));
        let s = make_schedule(3.0, LN_2, SchedulePolicy::Uniform, None).unwrap();
        assert_eq!(s.ell, 3);
        for d in &s.deltas {
            assert_abs_diff_eq!(*d, 1.0, epsilon = 1e-15);
        }
        assert_eq!(s.target(), 3.0);
        assert!(make_schedule(1.0, 1.0, SchedulePolicy::Adaptive, None).is_err());
    }

    #[test]
    fn schedule_ratios_at_least_half() {
        let h =
            shift_positive(&build_ising(3, 1.0, 1.0, Boundary::Periodic, DEFAULT_DENSE_LIMIT).unwrap(), ShiftPolicy::ExactGround).unwrap();
        let eig = eigendecompose(&h).unwrap();
        for policy in [SchedulePolicy::Uniform, SchedulePolicy::Adaptive] {
            let s = make_schedule(2.0, h.emax(), policy, Some(&eig)).unwrap();
            for w in s.betas.windows(2) {
                assert!(oracle::ratio(&eig, w[0], w[1]).unwrap() >= 0.5 - 1e-12);
            }
        }
        let u = make_schedule(2.0, h.emax(), SchedulePolicy::Uniform, None).unwrap();
        let a = make_schedule(2.0, h.emax(), SchedulePolicy::Adaptive, Some(&eig)).unwrap();
        assert!(a.ell <= u.ell);
    }

    #[test]
    fn parameter_formulas() {
        let emax = 2.0;
        let t = qpe::evolution_time(emax);
        let m = energy_bits_for(1.0, 8, emax, 0.1);
        assert_eq!(m, (8.0 / (t * 0.1)).log2().ceil() as u32);
        assert_eq!(eta_for(8, 0.1, 1.0, emax), ((80f64.ln() + 2.0) / LN_2).ceil() as u32);
        assert_eq!(energy_bits_for(0.0, 0, emax, 0.1), 1);
    }

    #[test]
    fn infinite_temperature_on_grid_is_exact() {
        let (pg, _) = on_grid_base(&[1, 2, 5, 6], 4, 1.0);
        assert_eq!(pg.badmass_bound, 0.0);
        let w = pg.state.reduced_system_state();
        assert!(w.iter().all(|x| (x - 0.25).abs() < 1e-14));
        assert_eq!(pg.cost.qpe_invocations, 3);
        assert_eq!(pg.cost.u_applications, 3 * 255);
    }

    #[test]
    fn infinite_temperature_ising_fidelity() {
        let (eig, emax) = ising2();
        let cfg = QpeConfig::new(8, 4, 5, emax).unwrap();
        let pg = prepare_infinite_temperature(&eig.energies, emax, &cfg).unwrap();
        assert!(pg.badmass_bound <= 1.0 / 32.0);
        let rho = pg.state.reduced_density(&eig).unwrap();
        let f = oracle::fidelity(&rho, &oracle::gibbs_state(&eig, 0.0).unwrap()).unwrap();
        assert!(f >= 1.0 - 1.0 / 32.0);
    }

    #[test]
    fn step_rotate_examples() {
        let (pg, energies) = on_grid_base(&[1, 2, 5, 6], 4, 1.0);
        let s = step_rotate(&pg, 0.0).unwrap();
        assert_abs_diff_eq!(s.flag_weight(0, false).unwrap(), 1.0, epsilon = 1e-14);
        let s = step_rotate(&pg, 0.8).unwrap();
        let z = oracle::partition_function(&EigenSystem::diagonal(energies.clone()), 0.8).unwrap();
        assert_abs_diff_eq!(s.flag_weight(0, false).unwrap(), z / 4.0, epsilon = 1e-12);
        assert!(step_rotate(&PurifiedGibbs { beta: 1.0, ..pg.clone() }, 0.5).is_err());

        let amp = amplitude_amplify(&s, z, 4).unwrap();
        let next = PurifiedGibbs { state: amp.state.clone(), beta: 0.8, badmass_bound: 0.0, cost: Cost::default() };
        let phi = step_rotate(&next, 1.1).unwrap();
        let ratio = oracle::ratio(&EigenSystem::diagonal(energies), 0.8, 1.1).unwrap();
        let good = amp.weight_after;
        let f = phi.flag_weight(1, false).unwrap();
        assert!((f - ratio).abs() <= (1.0 - good) + 1e-10);
    }

    #[test]
    fn grover_examples() {
        let (pg, _) = on_grid_base(&[0, 0, 0, 0], 3, 1.0);
        let psi = step_rotate(&pg, 1.0).unwrap();
        let out = amplitude_amplify(&psi, 4.0, 4).unwrap();
        assert_eq!(out.iterations, 1);
        let ov = psi.inner(&out.state).unwrap();
        assert_abs_diff_eq!(ov.norm_sqr(), 1.0, epsilon = 1e-14);
        assert_eq!(grover_iterations(2.0, 8), 2);

        let (eig, emax) = ising2();
        let cfg = QpeConfig::new(10, 4, 12, emax).unwrap();
        let base = prepare_infinite_temperature(&eig.energies, emax, &cfg).unwrap();
        let psi = step_rotate(&base, 1.0).unwrap();
        let z = oracle::partition_function(&eig, 1.0).unwrap();
        let out = amplitude_amplify(&psi, z, 4).unwrap();
        let theta = out.weight_before.sqrt().asin();
        let analytic = ((2 * out.iterations + 1) as f64 * theta).sin().powi(2);
        assert_abs_diff_eq!(out.weight_after, analytic, epsilon = 1e-10);
        assert!(out.weight_after >= 0.9);
    }

    #[test]
    fn fixed_point_examples() {
        let (pg, _) = on_grid_base(&[0, 3, 3, 7], 3, 1.0);
        let psi = step_rotate(&pg, 0.0).unwrap();
        let same = fixed_point_amplify(&psi, 1.0, None).unwrap();
        assert_eq!(same.iterations, 0);
        assert_eq!(same.state, psi);

        let layout = RegisterLayout::grid(2, 1, 1, 1.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); layout.len()];
        amps[layout.index(0, 0, 0)] = C64::new(h, 0.0);
        amps[layout.index(1, 0, 1)] = C64::new(h, 0.0);
        let mut half = CompressedState::from_amplitudes(layout, amps).unwrap();
        half.conditional_rotation(0.0, 0).unwrap();
        let out = fixed_point_amplify(&half, 1e-3, Some(0.5)).unwrap();
        assert!(out.weight_after >= 0.999);
        assert!(out.trace.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        for (j, w) in out.trace.iter().enumerate() {
            assert_abs_diff_eq!(1.0 - w, 0.5f64.powi(3i32.pow(j as u32)), epsilon = 1e-12);
        }
        assert_eq!(out.preparations, 3u64.pow(out.iterations));
    }

    #[test]
    fn pipeline_on_ising_beta_one() {
        let (eig, emax) = ising2();
        let (pg, diag) = prepare_purified_gibbs(&eig, &eig.energies, emax, 1.0, 0.1, &PrepareOptions::default()).unwrap();
        let rho = pg.state.reduced_density(&eig).unwrap();
        let f = oracle::fidelity(&rho, &oracle::gibbs_state(&eig, 1.0).unwrap()).unwrap();
        assert!(f >= 0.95, "fidelity {f}");
        let ell = diag.steps.len() as f64;
        assert!(pg.badmass_bound <= 0.1 / ell, "badmass {}", pg.badmass_bound);
        assert_eq!(diag.betas.len(), diag.steps.len() + 1);
        let (pg0, _) = prepare_purified_gibbs(&eig, &eig.energies, emax, 0.0, 0.1, &PrepareOptions::default()).unwrap();
        assert_eq!(pg0.beta, 0.0);
        assert!(pg0.state.fresh_flag() == Some(0));
    }

    #[test]
    fn thermalization_cost_model() {
        assert_eq!(thermalization_cost(0.0, 3.0, 0.01, 8, 8.0), 0.0);
        let a = thermalization_cost(1.0, 3.0, 0.02, 8, 2.0);
        let b = thermalization_cost(1.0, 3.0, 0.01, 8, 2.0);
        assert!(b >= 2.0 * a);
    }
}
