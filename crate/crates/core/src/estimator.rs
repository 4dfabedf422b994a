//! Quantum counting of the ratios `F_k` and the telescoping estimate of `Z(β)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{self, Amplifier, CoolingSchedule, Cost, PurifiedGibbs, SchedulePolicy, RATIO_FLAG};
use crate::hamiltonian::{eigendecompose, EigenSystem, LocalHamiltonian};
use crate::linalg::{CMatrix, C64, ZERO};
use crate::oracle;
use crate::qpe::{self, QpeConfig, DEFAULT_PADDING};
use crate::seed;
use crate::state::{CompressedState, RegisterLayout};

/// Two-dimensional invariant block of `G = (I − 2|Φ⟩⟨Φ|)(2Π₀ − I)`.
///
/// In the basis `(good, bad)` with `|Φ⟩ = sin θ|good⟩ + cos θ|bad⟩`, `G` is the
/// rotation by `−2θ`, so its eigenphases are `±2θ`.
#[derive(Debug, Clone)]
pub struct GroverBlock {
    pub theta: f64,
    pub weight: f64,
    pub good: Option<CompressedState>,
    pub bad: Option<CompressedState>,
    /// Set when `Φ` lies entirely in one of the two flag subspaces.
    pub exact: bool,
}

impl GroverBlock {
    pub fn eigenphases(&self) -> [f64; 2] {
        [2.0 * self.theta, -2.0 * self.theta]
    }

    /// Action of `G` on `(good, bad)` coordinates.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (s, c) = (2.0 * self.theta).sin_cos();
        [[c, s], [-s, c]]
    }
}

fn split_flag(phi: &CompressedState, flag: u32, value: bool) -> Result<Option<CompressedState>> {
    let fs = phi.layout().flag_states();
    let bit = 1usize << flag;
    let amps: Vec<C64> = phi.amplitudes().iter().enumerate().map(|(i, &z)| if ((i % fs) & bit != 0) == value { z } else { ZERO }).collect();
    let n = amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
    if n < 1e-15 {
        return Ok(None);
    }
    let amps = amps.into_iter().map(|z| z / n).collect();
    CompressedState::from_amplitudes(phi.layout().clone(), amps).map(Some)
}

pub fn grover_operator_block(phi: &CompressedState, flag: u32) -> Result<GroverBlock> {
    let norm = phi.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("Φ must have unit norm, got {norm}")));
    }
    let weight = phi.flag_weight(flag, false)?.clamp(0.0, 1.0);
    let good = split_flag(phi, flag, false)?;
    let bad = split_flag(phi, flag, true)?;
    Ok(GroverBlock { theta: weight.sqrt().asin(), weight, exact: good.is_none() || bad.is_none(), good, bad })
}

/// Smallest `b` with `π/2^b + π²/4^b ≤ precision`.
pub fn counting_register_bits(precision: f64) -> u32 {
    let mut b = 1;
    loop {
        let m = (1u64 << b) as f64;
        if PI / m + (PI / m).powi(2) <= precision || b >= 40 {
            return b;
        }
        b += 1;
    }
}

/// `8⌈ln(1/(1 − confidence))⌉` runs whose median meets the confidence.
pub fn counting_repetitions(confidence: f64) -> u32 {
    8 * (1.0 / (1.0 - confidence)).ln().ceil().max(1.0) as u32
}

/// Outcome law of phase estimation of `G` on `|Φ⟩`: equal mixture of the
/// kernels at `±2θ`.
pub fn counting_distribution(theta: f64, bits: u32) -> Vec<f64> {
    let plus = qpe::phase_kernel_row(2.0 * theta, bits);
    let minus = qpe::phase_kernel_row(-2.0 * theta, bits);
    plus.iter().zip(&minus).map(|(p, q)| 0.5 * (p + q)).collect()
}

pub fn estimate_from_outcome(y: usize, bits: u32) -> f64 {
    let m = (1u64 << bits) as f64;
    (PI * y as f64 / m).sin().powi(2)
}

fn sample(dist: &[f64], rng: &mut impl Rng) -> usize {
    let mut u: f64 = rng.random::<f64>() * dist.iter().sum::<f64>();
    for (i, &p) in dist.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub estimate: f64,
    /// Uses of the circuit preparing `|Φ⟩`: register size times repetitions.
    pub uses: u64,
    pub bits: u32,
    pub repetitions: u32,
}

/// Median of independent counting runs on a flag weight `weight`.
pub fn count_ratio(weight: f64, precision: f64, confidence: f64, seed: u64) -> Result<CountResult> {
    if !(precision > 0.0 && precision < 1.0) {
        return Err(Error::InvalidParameter(format!("precision must lie in (0, 1), got {precision}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    if !(0.0..=1.0 + 1e-12).contains(&weight) {
        return Err(Error::InvalidParameter(format!("flag weight must lie in [0, 1], got {weight}")));
    }
    let bits = counting_register_bits(precision);
    let reps = counting_repetitions(confidence);
    let dist = counting_distribution(weight.min(1.0).sqrt().asin(), bits);
    let mut estimates: Vec<f64> =
        (0..reps as u64).into_par_iter().map(|r| estimate_from_outcome(sample(&dist, &mut seed::rng(seed, r)), bits)).collect();
    estimates.sort_by(f64::total_cmp);
    Ok(CountResult { estimate: estimates[(reps as usize).div_ceil(2) - 1], uses: (1u64 << bits) * reps as u64, bits, repetitions: reps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMode {
    #[default]
    Universal,
    Classical,
    Supplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZMode {
    /// Grover counts from the running estimate `D·Π F̂`.
    #[default]
    SelfHosted,
    /// Grover counts from the exact `Z(β_k)`.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub eps: f64,
    pub confidence: f64,
    pub mode: EstimationMode,
    pub z_mode: ZMode,
    pub amplifier: Amplifier,
    pub schedule: SchedulePolicy,
    pub padding: u32,
    pub m: Option<u32>,
    /// Use the circuit's flag weight as `F̂` instead of sampling counting outcomes.
    pub exact_counting: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            eps: 0.1,
            confidence: 0.9,
            mode: EstimationMode::default(),
            z_mode: ZMode::default(),
            amplifier: Amplifier::default(),
            schedule: SchedulePolicy::default(),
            padding: DEFAULT_PADDING,
            m: None,
            exact_counting: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub beta_k: f64,
    pub beta_k1: f64,
    pub q: u32,
    pub f_hat: f64,
    /// Flag weight of the simulated `|Φ_k⟩`.
    pub f_circuit: f64,
    pub f_oracle: f64,
    pub precision: f64,
    pub uses: u64,
    pub badmass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub beta: f64,
    pub dim: usize,
    pub mode: EstimationMode,
    pub ell: usize,
    pub m: u32,
    pub z_hat: f64,
    pub z_oracle: f64,
    pub rel_err_target: f64,
    pub confidence: f64,
    pub ratios: Vec<RatioEntry>,
    pub cost: Cost,
    /// `e^{−βE*}`; multiply `z_hat` by it for the unshifted partition function.
    pub shift_factor: f64,
    pub model_cost: f64,
}

impl EstimateReport {
    pub fn rel_err(&self) -> f64 {
        (self.z_hat / self.z_oracle - 1.0).abs()
    }
}

/// `D·Π F̂_k` evaluated left to right.
pub fn telescope(dim: usize, ratios: &[f64]) -> f64 {
    ratios.iter().fold(dim as f64, |z, f| z * f)
}

/// `√(D/Z) β⁵ E_max⁵ / ε²` with unit constant.
pub fn total_cost_model(dim: usize, z: f64, beta: f64, emax: f64, eps: f64) -> f64 {
    (dim as f64 / z).sqrt() * (beta * emax).powi(5) / (eps * eps)
}

/// `T_th β⁵ E_max⁵ / ε²` for a supplied thermalizer of cost `t_th`.
pub fn supplied_cost_model(t_th: f64, beta: f64, emax: f64, eps: f64) -> f64 {
    t_th * (beta * emax).powi(5) / (eps * eps)
}

/// A unitary `V` on system ⊗ bath that thermalizes `I/D ⊗ |0⟩⟨0|`.
pub trait Thermalizer: Sync {
    fn bath_dim(&self) -> usize;
    /// `V` at inverse temperature `beta`, system index major.
    fn unitary(&self, beta: f64) -> Result<CMatrix>;
    /// Cost of one application of `V`.
    fn cost(&self, _beta: f64) -> Cost {
        Cost { preparations: 1, ..Cost::default() }
    }
}

/// Eigenbasis weights `⟨v_a| Tr_B V(I/D ⊗ |0⟩⟨0|)V† |v_a⟩`.
pub fn thermalizer_weights(v: &CMatrix, eig: &EigenSystem, bath_dim: usize) -> Result<Vec<f64>> {
    let d = eig.dim();
    if v.nrows() != d * bath_dim || v.ncols() != d * bath_dim {
        return Err(Error::LayoutMismatch(format!("thermalizer is {}×{}, expected {}", v.nrows(), v.ncols(), d * bath_dim)));
    }
    let mut rho = CMatrix::zeros(d, d);
    for x in 0..d {
        let col = v.column(x * bath_dim);
        for b in 0..bath_dim {
            for i in 0..d {
                let vi = col[i * bath_dim + b];
                for j in 0..d {
                    rho[(i, j)] += vi * col[j * bath_dim + b].conj();
                }
            }
        }
    }
    rho /= C64::new(d as f64, 0.0);
    Ok((0..d)
        .map(|a| {
            let va = eig.vectors.column(a);
            (va.adjoint() * &rho * va)[(0, 0)].re.max(0.0)
        })
        .collect())
}

/// `V|x⟩|0⟩ = Σ_a √p_a |v_a⟩|x + a mod D⟩` with Boltzmann `p`, completed to a unitary.
pub struct GibbsThermalizer {
    eig: EigenSystem,
}

impl GibbsThermalizer {
    pub fn new(eig: EigenSystem) -> Self {
        Self { eig }
    }
}

fn complete_unitary(mut cols: Vec<Option<Vec<C64>>>, dim: usize) -> CMatrix {
    let mut basis: Vec<Vec<C64>> = cols.iter().flatten().cloned().collect();
    let mut candidate = 0;
    for slot in cols.iter_mut().filter(|c| c.is_none()) {
        loop {
            let mut v = vec![ZERO; dim];
            v[candidate] = C64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for b in &basis {
                    let p: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= p * bi;
                    }
                }
            }
            let n = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
            if n > 1e-8 {
                let v: Vec<C64> = v.into_iter().map(|z| z / n).collect();
                basis.push(v.clone());
                *slot = Some(v);
                break;
            }
        }
    }
    CMatrix::from_fn(dim, dim, |i, j| cols[j].as_ref().expect("completed")[i])
}

impl Thermalizer for GibbsThermalizer {
    fn bath_dim(&self) -> usize {
        self.eig.dim()
    }

    fn unitary(&self, beta: f64) -> Result<CMatrix> {
        let d = self.eig.dim();
        let p = oracle::boltzmann_weights(&self.eig, beta)?;
        let mut cols: Vec<Option<Vec<C64>>> = vec![None; d * d];
        for x in 0..d {
            let mut v = vec![ZERO; d * d];
            for (a, &pa) in p.iter().enumerate() {
                let b = (x + a) % d;
                let va = self.eig.vectors.column(a);
                for i in 0..d {
                    v[i * d + b] += va[i] * pa.sqrt();
                }
            }
            cols[x * d] = Some(v);
        }
        Ok(complete_unitary(cols, d * d))
    }
}

#[derive(Debug, Clone)]
struct Prepared {
    f_circuit: f64,
    cost: Cost,
    badmass: f64,
}

enum Source<'a> {
    Universal { bases: Mutex<HashMap<u32, PurifiedGibbs>> },
    Classical { base: PurifiedGibbs },
    Supplied { thermalizer: &'a dyn Thermalizer },
}

/// Partition-function estimator for one target `β`; caches circuit states
/// so repeated seeded runs only resample the counting outcomes.
pub struct Estimator<'a> {
    eig: EigenSystem,
    energies: Vec<f64>,
    emax: f64,
    shift: f64,
    beta: f64,
    opts: EstimateOptions,
    schedule: CoolingSchedule,
    m: u32,
    source: Source<'a>,
    memo: Mutex<HashMap<(usize, u32), Prepared>>,
}

fn distinct_levels(energies: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut levels: Vec<f64> = Vec::new();
    let mut index = Vec::with_capacity(energies.len());
    for &e in energies {
        match levels.iter().position(|&l| (l - e).abs() <= 1e-12 * e.abs().max(1.0)) {
            Some(i) => index.push(i),
            None => {
                index.push(levels.len());
                levels.push(e);
            }
        }
    }
    (levels, index)
}

impl<'a> Estimator<'a> {
    /// Universal or classical mode on a shifted Hamiltonian.
    pub fn new(h: &LocalHamiltonian, beta: f64, opts: EstimateOptions) -> Result<Self> {
        let eig = eigendecompose(h)?;
        let energies = eig.energies.clone();
        Self::with_energies(h, eig, energies, beta, opts)
    }

    /// Universal mode with phase estimation seeing `energies` (e.g. the
    /// spectrum of an effective Hamiltonian) instead of the exact spectrum.
    pub fn with_energies(h: &LocalHamiltonian, eig: EigenSystem, energies: Vec<f64>, beta: f64, opts: EstimateOptions) -> Result<Self> {
        let source = match opts.mode {
            EstimationMode::Universal => Source::Universal { bases: Mutex::new(HashMap::new()) },
            EstimationMode::Classical => {
                if !h.is_classical() {
                    return Err(Error::ModeMismatch("classical mode needs a Hamiltonian diagonal in the product basis".into()));
                }
                let (levels, index) = distinct_levels(&energies);
                let layout = RegisterLayout::exact(eig.dim(), levels.clone(), 2)?;
                let mut state = CompressedState::maximally_entangled_init(layout);
                let rows: Vec<Vec<C64>> = index
                    .iter()
                    .map(|&i| {
                        let mut r = vec![ZERO; levels.len()];
                        r[i] = C64::new(1.0, 0.0);
                        r
                    })
                    .collect();
                state.write_register(&rows)?;
                Source::Classical {
                    base: PurifiedGibbs { state, beta: 0.0, badmass_bound: 0.0, cost: Cost { preparations: 1, ..Cost::default() } },
                }
            }
            EstimationMode::Supplied => {
                return Err(Error::ModeMismatch("supplied mode needs a thermalizer; use Estimator::supplied".into()));
            }
        };
        Self::build(h, eig, energies, beta, opts, source)
    }

    /// Supplied-thermalizer mode.
    pub fn supplied(h: &LocalHamiltonian, beta: f64, opts: EstimateOptions, thermalizer: &'a dyn Thermalizer) -> Result<Self> {
        let eig = eigendecompose(h)?;
        let energies = eig.energies.clone();
        let opts = EstimateOptions { mode: EstimationMode::Supplied, ..opts };
        Self::build(h, eig, energies, beta, opts, Source::Supplied { thermalizer })
    }

    fn build(
        h: &LocalHamiltonian,
        eig: EigenSystem,
        energies: Vec<f64>,
        beta: f64,
        opts: EstimateOptions,
        source: Source<'a>,
    ) -> Result<Self> {
        if !(opts.eps > 0.0 && opts.eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {}", opts.eps)));
        }
        if !(opts.confidence > 0.0 && opts.confidence < 1.0) {
            return Err(Error::InvalidParameter(format!("confidence must lie in (0, 1), got {}", opts.confidence)));
        }
        if energies.len() != eig.dim() {
            return Err(Error::LayoutMismatch(format!("{} energies for D={}", energies.len(), eig.dim())));
        }
        let emax = h.emax();
        let schedule = gibbs::make_schedule(beta, emax, opts.schedule, Some(&eig))?;
        let m = opts.m.unwrap_or_else(|| gibbs::energy_bits_for(beta, schedule.ell, emax, opts.eps));
        Ok(Self { eig, energies, emax, shift: h.shift(), beta, opts, schedule, m, source, memo: Mutex::new(HashMap::new()) })
    }

    pub fn schedule(&self) -> &CoolingSchedule {
        &self.schedule
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eig
    }

    fn eta(&self, beta_k: f64) -> u32 {
        gibbs::eta_for(self.schedule.ell, self.opts.eps, beta_k, self.emax)
    }

    fn universal_base(&self, eta: u32) -> Result<PurifiedGibbs> {
        let Source::Universal { bases } = &self.source else {
            unreachable!("universal base requested in another mode");
        };
        if let Some(b) = bases.lock().expect("base cache").get(&eta) {
            return Ok(b.clone());
        }
        let cfg = QpeConfig::new(self.m, self.opts.padding, eta, self.emax)?;
        let b = gibbs::prepare_infinite_temperature(&self.energies, self.emax, &cfg)?;
        bases.lock().expect("base cache").insert(eta, b.clone());
        Ok(b)
    }

    /// Prepare `|β_k⟩` with `q` Grover iterations and rotate the ratio flag.
    fn prepare_ratio(&self, k: usize, q: u32) -> Result<Prepared> {
        if let Some(p) = self.memo.lock().expect("memo").get(&(k, q)) {
            return Ok(p.clone());
        }
        let bk = self.schedule.betas[k];
        let residual = self.opts.eps / self.schedule.ell.max(1) as f64;
        let (mut state, cost) = match &self.source {
            Source::Supplied { thermalizer } => {
                let v = thermalizer.unitary(bk)?;
                let w = thermalizer_weights(&v, &self.eig, thermalizer.bath_dim())?;
                let layout = RegisterLayout::grid(self.eig.dim(), self.m, 2, self.emax)?;
                let mut state = CompressedState::from_weights(layout, &w)?;
                let cfg = QpeConfig::new(self.m, self.opts.padding, self.eta(bk), self.emax)?;
                qpe::median_qpe(&mut state, &self.energies, &cfg)?;
                let mut cost = thermalizer.cost(bk);
                cost.add(Cost {
                    u_applications: cfg.eta as u64 * cfg.u_applications_per_run(),
                    qpe_invocations: cfg.eta as u64,
                    preparations: 0,
                });
                (state, cost)
            }
            source => {
                let base = match source {
                    Source::Classical { base } => base.clone(),
                    _ => self.universal_base(self.eta(bk))?,
                };
                if k == 0 {
                    (base.state.clone(), base.cost)
                } else {
                    let psi = gibbs::step_rotate(&base, bk)?;
                    let (amp, _) = gibbs::amplify(&psi, q, self.opts.amplifier, residual)?;
                    (amp.state, base.cost.scaled(amp.preparations))
                }
            }
        };
        state.conditional_rotation(self.schedule.deltas[k], RATIO_FLAG)?;
        let p = Prepared { f_circuit: state.flag_weight(RATIO_FLAG, false)?, cost, badmass: state.badmass() };
        self.memo.lock().expect("memo").insert((k, q), p.clone());
        Ok(p)
    }

    fn grover_count(&self, k: usize, z_running: f64) -> Result<u32> {
        if k == 0 || matches!(self.source, Source::Supplied { .. }) {
            return Ok(0);
        }
        let bk = self.schedule.betas[k];
        let d = self.eig.dim() as f64;
        let z = match self.opts.z_mode {
            ZMode::Oracle => oracle::partition_function(&self.eig, bk)?,
            ZMode::SelfHosted => z_running.clamp(d * (-bk * self.emax).exp(), d),
        };
        Ok(gibbs::grover_iterations(z, self.eig.dim()))
    }

    /// One seeded estimate of `Z(β)`.
    pub fn run(&self, seed: u64) -> Result<EstimateReport> {
        let ell = self.schedule.ell;
        let dim = self.eig.dim();
        let precision = self.opts.eps / ell.max(1) as f64;
        let confidence = 1.0 - (1.0 - self.opts.confidence) / ell.max(1) as f64;
        let mut ratios = Vec::with_capacity(ell);
        let mut f_hats = Vec::with_capacity(ell);
        let mut cost = Cost::default();
        for k in 0..ell {
            let q = self.grover_count(k, telescope(dim, &f_hats))?;
            let p = self.prepare_ratio(k, q)?;
            let (f_hat, uses) = if self.opts.exact_counting {
                (p.f_circuit, 0)
            } else {
                let c = count_ratio(p.f_circuit, precision, confidence, seed::mix(seed, k as u64))?;
                (c.estimate, c.uses)
            };
            cost.add(p.cost.scaled(uses));
            let (bk, bk1) = (self.schedule.betas[k], self.schedule.betas[k + 1]);
            ratios.push(RatioEntry {
                beta_k: bk,
                beta_k1: bk1,
                q,
                f_hat,
                f_circuit: p.f_circuit,
                f_oracle: oracle::ratio(&self.eig, bk, bk1)?,
                precision,
                uses,
                badmass: p.badmass,
            });
            f_hats.push(f_hat);
        }
        let z_oracle = oracle::partition_function(&self.eig, self.beta)?;
        let model_cost = if matches!(self.opts.mode, EstimationMode::Supplied) {
            supplied_cost_model(1.0, self.beta, self.emax, self.opts.eps)
        } else {
            total_cost_model(dim, z_oracle, self.beta, self.emax, self.opts.eps)
        };
        Ok(EstimateReport {
            beta: self.beta,
            dim,
            mode: self.opts.mode,
            ell,
            m: self.m,
            z_hat: telescope(dim, &f_hats),
            z_oracle,
            rel_err_target: self.opts.eps,
            confidence: self.opts.confidence,
            ratios,
            cost,
            shift_factor: (-self.beta * self.shift).exp(),
            model_cost,
        })
    }
}

/// Estimate `Z(β)` of a shifted Hamiltonian. Supplied mode uses a
/// [`GibbsThermalizer`] built from the exact spectrum.
pub fn estimate_partition(h: &LocalHamiltonian, beta: f64, opts: &EstimateOptions, seed: u64) -> Result<EstimateReport> {
    match opts.mode {
        EstimationMode::Supplied => {
            let th = GibbsThermalizer::new(eigendecompose(h)?);
            Estimator::supplied(h, beta, opts.clone(), &th)?.run(seed)
        }
        _ => Estimator::new(h, beta, opts.clone())?.run(seed),
    }
}
