//! Amplitude-level simulation of the algorithm's invariant subspace.
//!
//! A [`CompressedState`] stores one amplitude per `(a, E, flags)` where `a`
//! indexes eigenvectors of the Hamiltonian, `E` is the energy register and
//! `flags` are single-qubit ancillas. The system and scratchpad registers are
//! implicit: component `a` stands for `|a⟩⊗|φ_a⟩` together with whatever
//! junk registers the coherent median left behind, and all of these are
//! orthonormal across `(a, E)`. Every operation of the pipeline maps this span
//! to itself.
//!
//! Flags are little-endian: bit 0 of the flag index is `flag[0]` (the Gibbs
//! rotation ancilla), bit 1 is `flag[1]` (the ratio ancilla).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::EigenSystem;
use crate::linalg::{CMatrix, CVector, C64, ZERO};

pub const FULL_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub system_dim: usize,
    pub energy_bits: u32,
    pub flag_count: u32,
    /// Energy per grid step, `8·E_max/2^m`. Zero for an exact register.
    pub grid_base: f64,
    pub emax: f64,
    /// Register values when energies are written exactly instead of on a grid.
    pub exact_levels: Option<Vec<f64>>,
}

impl RegisterLayout {
    pub fn grid(system_dim: usize, energy_bits: u32, flag_count: u32, emax: f64) -> Result<Self> {
        if system_dim == 0 || energy_bits == 0 || flag_count == 0 || energy_bits > 30 {
            return Err(Error::InvalidParameter(format!(
                "layout needs D ≥ 1, 1 ≤ m ≤ 30, flags ≥ 1 (got D={system_dim}, m={energy_bits}, flags={flag_count})"
            )));
        }
        if !(emax > 0.0) {
            return Err(Error::InvalidParameter(format!("emax must be positive, got {emax}")));
        }
        Ok(Self { system_dim, energy_bits, flag_count, grid_base: 8.0 * emax / (1u64 << energy_bits) as f64, emax, exact_levels: None })
    }

    /// Register holding the given energy values exactly (classical mode).
    pub fn exact(system_dim: usize, levels: Vec<f64>, flag_count: u32) -> Result<Self> {
        if system_dim == 0 || flag_count == 0 || levels.is_empty() {
            return Err(Error::InvalidParameter("exact layout needs D ≥ 1, flags ≥ 1 and at least one level".into()));
        }
        let bits = (usize::BITS - (levels.len() - 1).leading_zeros()).max(1);
        let emax = levels.iter().copied().fold(0.0, f64::max);
        Ok(Self { system_dim, energy_bits: bits, flag_count, grid_base: 0.0, emax, exact_levels: Some(levels) })
    }

    pub fn register_size(&self) -> usize {
        match &self.exact_levels {
            Some(l) => l.len(),
            None => 1 << self.energy_bits,
        }
    }

    pub fn flag_states(&self) -> usize {
        1 << self.flag_count
    }

    pub fn len(&self) -> usize {
        self.system_dim * self.register_size() * self.flag_states()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, a: usize, e: usize, f: usize) -> usize {
        (a * self.register_size() + e) * self.flag_states() + f
    }

    /// Energy encoded by register value `e`.
    pub fn energy(&self, e: usize) -> f64 {
        match &self.exact_levels {
            Some(l) => l[e],
            None => e as f64 * self.grid_base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedState {
    amps: Vec<C64>,
    layout: RegisterLayout,
    badmass: f64,
    register_occupied: bool,
    flag_betas: Vec<Option<f64>>,
    peaks: Option<Vec<(usize, usize)>>,
    renormalizations: Vec<f64>,
}

fn flag_bit(flag: u32) -> usize {
    1 << flag
}

impl CompressedState {
    /// `D^{-1/2} Σ_a |a⟩|φ_a⟩|0⟩|0…0⟩`.
    pub fn maximally_entangled_init(layout: RegisterLayout) -> Self {
        let w = vec![1.0 / layout.system_dim as f64; layout.system_dim];
        Self::from_weights(layout, &w).expect("uniform weights match the layout")
    }

    /// `Σ_a √w_a |a⟩|φ_a⟩|0⟩|0…0⟩` for a probability vector `w` over eigenstates.
    pub fn from_weights(layout: RegisterLayout, weights: &[f64]) -> Result<Self> {
        if weights.len() != layout.system_dim {
            return Err(Error::LayoutMismatch(format!("{} weights for D={}", weights.len(), layout.system_dim)));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be nonnegative".into()));
        }
        let mut amps = vec![ZERO; layout.len()];
        for (a, &w) in weights.iter().enumerate() {
            amps[layout.index(a, 0, 0)] = C64::new(w.sqrt(), 0.0);
        }
        let flags = layout.flag_count as usize;
        Ok(Self {
            amps,
            layout,
            badmass: 0.0,
            register_occupied: false,
            flag_betas: vec![None; flags],
            peaks: None,
            renormalizations: Vec::new(),
        })
    }

    /// Wrap raw amplitudes (used by round trips and tests).
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.len() {
            return Err(Error::LayoutMismatch(format!("{} amplitudes for a layout of {}", amps.len(), layout.len())));
        }
        let occupied = (0..layout.system_dim)
            .any(|a| (1..layout.register_size()).any(|e| (0..layout.flag_states()).any(|f| amps[layout.index(a, e, f)] != ZERO)));
        let flags = layout.flag_count as usize;
        Ok(Self {
            amps,
            layout,
            badmass: 0.0,
            register_occupied: occupied,
            flag_betas: vec![None; flags],
            peaks: None,
            renormalizations: Vec::new(),
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, a: usize, e: usize, f: usize) -> C64 {
        self.amps[self.layout.index(a, e, f)]
    }

    pub fn badmass(&self) -> f64 {
        self.badmass
    }

    pub fn register_occupied(&self) -> bool {
        self.register_occupied
    }

    /// Inverse temperature last used to rotate `flag`, if any.
    pub fn flag_beta(&self, flag: u32) -> Option<f64> {
        self.flag_betas.get(flag as usize).copied().flatten()
    }

    /// Lowest flag that has not been rotated yet.
    pub fn fresh_flag(&self) -> Option<u32> {
        self.flag_betas.iter().position(Option::is_none).map(|f| f as u32)
    }

    /// Per-eigencomponent closest grid values `(E_a^-, E_a^+)` recorded by the median.
    pub fn peaks(&self) -> Option<&[(usize, usize)]> {
        self.peaks.as_deref()
    }

    pub fn renormalizations(&self) -> &[f64] {
        &self.renormalizations
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum()
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same_layout(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(x, y)| x.conj() * y).sum())
    }

    fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("states have different register layouts".into()));
        }
        Ok(())
    }

    fn check_flag(&self, flag: u32) -> Result<()> {
        if flag >= self.layout.flag_count {
            return Err(Error::InvalidParameter(format!("flag {flag} does not exist (have {})", self.layout.flag_count)));
        }
        Ok(())
    }

    /// Squared norm of the component where `flag` has the given value.
    pub fn flag_weight(&self, flag: u32, value: bool) -> Result<f64> {
        self.check_flag(flag)?;
        let bit = flag_bit(flag);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i % self.layout.flag_states()) & bit != 0) == value)
            .map(|(_, z)| z.norm_sqr())
            .sum())
    }

    /// `2Π₀ − I` on `flag`: negate every amplitude with the flag set.
    pub fn reflect_flag(&mut self, flag: u32) -> Result<()> {
        self.check_flag(flag)?;
        let bit = flag_bit(flag);
        let fs = self.layout.flag_states();
        for (i, z) in self.amps.iter_mut().enumerate() {
            if (i % fs) & bit != 0 {
                *z = -*z;
            }
        }
        Ok(())
    }

    /// `(I − 2|axis⟩⟨axis|)`.
    pub fn reflect_about(&mut self, axis: &Self) -> Result<()> {
        let overlap = axis.inner(self)?;
        let two = overlap * 2.0;
        for (z, x) in self.amps.iter_mut().zip(&axis.amps) {
            *z -= two * x;
        }
        Ok(())
    }

    /// Multiply the `flag = 0` component by `phase`: `I − (1 − ω)Π₀`.
    pub fn phase_flag_zero(&mut self, flag: u32, phase: C64) -> Result<()> {
        self.check_flag(flag)?;
        let bit = flag_bit(flag);
        let fs = self.layout.flag_states();
        for (i, z) in self.amps.iter_mut().enumerate() {
            if (i % fs) & bit == 0 {
                *z *= phase;
            }
        }
        Ok(())
    }

    /// `I − (1 − ω)|axis⟩⟨axis|`.
    pub fn phase_about(&mut self, axis: &Self, phase: C64) -> Result<()> {
        let overlap = axis.inner(self)?;
        let c = (C64::new(1.0, 0.0) - phase) * overlap;
        for (z, x) in self.amps.iter_mut().zip(&axis.amps) {
            *z -= c * x;
        }
        Ok(())
    }

    /// Rotate `flag` by `θ(E) = arcsin(e^{−β'E/2})` conditioned on the energy register.
    ///
    /// On the `(flag=0, flag=1)` pair this is `[[sin θ, cos θ], [cos θ, −sin θ]]`,
    /// so a fresh flag ends up in `sin θ|0⟩ + cos θ|1⟩`.
    pub fn conditional_rotation(&mut self, beta_prime: f64, flag: u32) -> Result<()> {
        self.check_flag(flag)?;
        if !(beta_prime >= 0.0) || !beta_prime.is_finite() {
            return Err(Error::InvalidParameter(format!("rotation needs β' ≥ 0, got {beta_prime}")));
        }
        let bit = flag_bit(flag);
        let fs = self.layout.flag_states();
        let rs = self.layout.register_size();
        let angles: Vec<(f64, f64)> = (0..rs)
            .map(|e| {
                let s = (-0.5 * beta_prime * self.layout.energy(e)).exp();
                (s, (1.0 - s * s).max(0.0).sqrt())
            })
            .collect();
        for a in 0..self.layout.system_dim {
            for (e, &(s, c)) in angles.iter().enumerate() {
                let base = self.layout.index(a, e, 0);
                for f in 0..fs {
                    if f & bit != 0 {
                        continue;
                    }
                    let (i0, i1) = (base + f, base + (f | bit));
                    let (z0, z1) = (self.amps[i0], self.amps[i1]);
                    self.amps[i0] = z0 * s + z1 * c;
                    self.amps[i1] = z0 * c - z1 * s;
                }
            }
        }
        self.flag_betas[flag as usize] = Some(beta_prime);
        Ok(())
    }

    /// Write per-eigencomponent register contents: the `E = 0` amplitude of
    /// component `a` is spread over `rows[a]` (length = register size).
    pub fn write_register(&mut self, rows: &[Vec<C64>]) -> Result<()> {
        if self.register_occupied {
            return Err(Error::RegisterOccupied);
        }
        let rs = self.layout.register_size();
        if rows.len() != self.layout.system_dim || rows.iter().any(|r| r.len() != rs) {
            return Err(Error::LayoutMismatch("register rows do not match the layout".into()));
        }
        let fs = self.layout.flag_states();
        for (a, row) in rows.iter().enumerate() {
            for f in 0..fs {
                let c = self.amps[self.layout.index(a, 0, f)];
                for (e, &g) in row.iter().enumerate() {
                    self.amps[self.layout.index(a, e, f)] = c * g;
                }
            }
        }
        self.register_occupied = true;
        Ok(())
    }

    pub(crate) fn set_peaks(&mut self, peaks: Vec<(usize, usize)>) {
        self.peaks = Some(peaks);
    }

    pub(crate) fn add_badmass(&mut self, mass: f64) {
        self.badmass = (self.badmass + mass).clamp(0.0, 1.0);
    }

    pub(crate) fn scale_badmass(&mut self, factor: f64) {
        self.badmass = (self.badmass * factor).clamp(0.0, 1.0);
    }

    /// Squared norm on register values outside each component's two peaks.
    pub fn measured_badmass(&self) -> Option<f64> {
        let peaks = self.peaks.as_ref()?;
        let fs = self.layout.flag_states();
        let mut total = 0.0;
        for (a, &(lo, hi)) in peaks.iter().enumerate() {
            for e in 0..self.layout.register_size() {
                if e == lo || e == hi {
                    continue;
                }
                for f in 0..fs {
                    total += self.amplitude(a, e, f).norm_sqr();
                }
            }
        }
        Some(total)
    }

    /// Diagonal of the reduced system state in the eigenbasis.
    pub fn reduced_system_state(&self) -> Vec<f64> {
        let block = self.layout.register_size() * self.layout.flag_states();
        self.amps.chunks(block).map(|c| c.iter().map(C64::norm_sqr).sum()).collect()
    }

    /// Reduced system density matrix in the computational basis.
    pub fn reduced_density(&self, eig: &EigenSystem) -> Result<CMatrix> {
        crate::oracle::density_from_weights(eig, &self.reduced_system_state())
    }

    /// Rescale to unit norm and record the correction factor.
    pub fn renormalize(&mut self) -> f64 {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 && n != 1.0 {
            for z in &mut self.amps {
                *z /= n;
            }
        }
        self.renormalizations.push(n);
        n
    }

    /// Little-endian dump: `D: u64`, `m: u32`, `flags: u32`, then `(re, im)` as `f32` pairs.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.layout.system_dim as u64).to_le_bytes())?;
        w.write_all(&self.layout.energy_bits.to_le_bytes())?;
        w.write_all(&self.layout.flag_count.to_le_bytes())?;
        for z in &self.amps {
            w.write_all(&(z.re as f32).to_le_bytes())?;
            w.write_all(&(z.im as f32).to_le_bytes())?;
        }
        Ok(())
    }
}

/// Contents of a binary amplitude dump.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub system_dim: u64,
    pub energy_bits: u32,
    pub flag_count: u32,
    pub amplitudes: Vec<C64>,
}

pub fn read_dump<R: Read>(mut r: R) -> Result<Dump> {
    let mut b8 = [0u8; 8];
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b8)?;
    let system_dim = u64::from_le_bytes(b8);
    r.read_exact(&mut b4)?;
    let energy_bits = u32::from_le_bytes(b4);
    r.read_exact(&mut b4)?;
    let flag_count = u32::from_le_bytes(b4);
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if rest.len() % 8 != 0 {
        return Err(Error::LayoutMismatch("truncated amplitude dump".into()));
    }
    let amplitudes = rest
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            C64::new(re as f64, im as f64)
        })
        .collect();
    Ok(Dump { system_dim, energy_bits, flag_count, amplitudes })
}

/// Explicit vector over system ⊗ scratchpad ⊗ energy ⊗ flags.
///
/// The scratchpad partner of eigenvector `a` is the computational state `|a⟩`.
#[derive(Debug, Clone)]
pub struct FullState {
    amps: Vec<C64>,
    system_dim: usize,
    register_size: usize,
    flag_states: usize,
}

impl FullState {
    fn index(&self, x: usize, s: usize, e: usize, f: usize) -> usize {
        ((x * self.system_dim + s) * self.register_size + e) * self.flag_states + f
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|ψ⟩ = Σ c_{a,E,f} (V|a⟩) ⊗ |a⟩ ⊗ |E⟩ ⊗ |f⟩`.
    pub fn expand(state: &CompressedState, eig: &EigenSystem) -> Result<Self> {
        let l = state.layout();
        if eig.dim() != l.system_dim {
            return Err(Error::LayoutMismatch("eigensystem dimension differs from the layout".into()));
        }
        let d = l.system_dim;
        let len = d * l.len();
        if len > FULL_LIMIT {
            return Err(Error::DenseLimit { dim: len, limit: FULL_LIMIT });
        }
        let mut out = Self { amps: vec![ZERO; len], system_dim: d, register_size: l.register_size(), flag_states: l.flag_states() };
        for a in 0..d {
            for e in 0..l.register_size() {
                for f in 0..l.flag_states() {
                    let c = state.amplitude(a, e, f);
                    if c == ZERO {
                        continue;
                    }
                    for x in 0..d {
                        let i = out.index(x, a, e, f);
                        out.amps[i] += eig.vectors[(x, a)] * c;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Project onto the compressed span: `c_{a,E,f} = Σ_x conj(V_{xa}) ψ(x, a, E, f)`.
    pub fn compress(&self, layout: RegisterLayout, eig: &EigenSystem) -> Result<CompressedState> {
        if layout.system_dim != self.system_dim || layout.register_size() != self.register_size || layout.flag_states() != self.flag_states
        {
            return Err(Error::LayoutMismatch("full state does not match the layout".into()));
        }
        let d = self.system_dim;
        let mut amps = vec![ZERO; layout.len()];
        for a in 0..d {
            for e in 0..self.register_size {
                for f in 0..self.flag_states {
                    let mut c = ZERO;
                    for x in 0..d {
                        c += eig.vectors[(x, a)].conj() * self.amps[self.index(x, a, e, f)];
                    }
                    amps[layout.index(a, e, f)] = c;
                }
            }
        }
        CompressedState::from_amplitudes(layout, amps)
    }

    /// Phase estimation circuit on an `m`-bit register: Hadamards, controlled
    /// `U^r` on the system, then the Fourier transform `|r⟩ ↦ N^{-1/2} Σ_E e^{2πi rE/N}|E⟩`.
    pub fn qpe(&mut self, u: &CMatrix) -> Result<()> {
        let d = self.system_dim;
        let n = self.register_size;
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::LayoutMismatch("unitary does not act on the system register".into()));
        }
        for s in 0..d {
            for f in 0..self.flag_states {
                for e in 1..n {
                    for x in 0..d {
                        if self.amps[self.index(x, s, e, f)] != ZERO {
                            return Err(Error::RegisterOccupied);
                        }
                    }
                }
            }
        }
        let omega: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
        let scale = 1.0 / n as f64;
        for s in 0..d {
            for f in 0..self.flag_states {
                let mut v = CVector::from_fn(d, |x, _| self.amps[self.index(x, s, 0, f)]);
                if v.iter().all(|z| *z == ZERO) {
                    continue;
                }
                let mut out = vec![CVector::zeros(d); n];
                for r in 0..n {
                    for (e, o) in out.iter_mut().enumerate() {
                        *o += &v * (omega[(r * e) % n] * scale);
                    }
                    v = u * v;
                }
                for (e, o) in out.iter().enumerate() {
                    for x in 0..d {
                        let i = self.index(x, s, e, f);
                        self.amps[i] = o[x];
                    }
                }
            }
        }
        Ok(())
    }

    /// Same conditional rotation as the compressed engine, acting on every basis state.
    pub fn conditional_rotation(&mut self, layout: &RegisterLayout, beta_prime: f64, flag: u32) {
        let bit = flag_bit(flag);
        for x in 0..self.system_dim {
            for s in 0..self.system_dim {
                for e in 0..self.register_size {
                    let sn = (-0.5 * beta_prime * layout.energy(e)).exp();
                    let cs = (1.0 - sn * sn).max(0.0).sqrt();
                    for f in 0..self.flag_states {
                        if f & bit != 0 {
                            continue;
                        }
                        let (i0, i1) = (self.index(x, s, e, f), self.index(x, s, e, f | bit));
                        let (z0, z1) = (self.amps[i0], self.amps[i1]);
                        self.amps[i0] = z0 * sn + z1 * cs;
                        self.amps[i1] = z0 * cs - z1 * sn;
                    }
                }
            }
        }
    }

    pub fn reflect_flag(&mut self, flag: u32) {
        let bit = flag_bit(flag);
        let fs = self.flag_states;
        for (i, z) in self.amps.iter_mut().enumerate() {
            if (i % fs) & bit != 0 {
                *z = -*z;
            }
        }
    }

    pub fn reflect_about(&mut self, axis: &Self) {
        let overlap: C64 = axis.amps.iter().zip(&self.amps).map(|(x, y)| x.conj() * y).sum();
        for (z, x) in self.amps.iter_mut().zip(&axis.amps) {
            *z -= overlap * 2.0 * x;
        }
    }
}
