//! Linear-optical realization of the hyper-entangled measurement.
//!
//! Photon A lives in spatial modes 1 and 2, photon B in modes 3 and 4; each
//! spatial mode carries H and V polarization, giving eight modes with index
//! `2·(spatial − 1) + (0 for H, 1 for V)`. Logical qubits map as
//!
//! ```text
//! |m n⟩_{Ap,As} ↔ photon A with polarization m (0 → H, 1 → V) in mode 1 + n
//! |k l⟩_{Bp,Bs} ↔ photon B with polarization k in mode 3 + l
//! ```
//!
//! Two-photon states are symmetric amplitude matrices `A` over the eight modes
//! (first-quantized bosonic wavefunction, `Σ|A_ij|² = 1`). A single-photon
//! transfer matrix `U` acts as `A → U A Uᵀ`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8, SQRT_2};
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::qmat::{c, DensityMatrix, QubitLayout, C64};
use crate::witness::{singlet_ket, SettingIndex};

pub const MODES: usize = 8;
const SYMMETRY_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;
/// Minima below this make [`ratio_r`] infinite.
pub const RATIO_FLOOR: f64 = 1e-12;
/// Default number of phase points in a scan over `[0, 2π)`.
pub const DEFAULT_PHASE_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Self::H
        } else {
            Self::V
        }
    }

    fn offset(self) -> usize {
        match self {
            Self::H => 0,
            Self::V => 1,
        }
    }
}

/// Spatial mode `1..=4` with a polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpticalMode {
    pub spatial: u8,
    pub polarization: Polarization,
}

impl OpticalMode {
    pub fn new(spatial: u8, polarization: Polarization) -> Result<Self> {
        check_spatial(spatial)?;
        Ok(Self {
            spatial,
            polarization,
        })
    }

    pub fn index(self) -> usize {
        2 * (self.spatial as usize - 1) + self.polarization.offset()
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < MODES, "mode index {index} out of range");
        Self {
            spatial: (index / 2 + 1) as u8,
            polarization: Polarization::from_bit((index % 2) as u8),
        }
    }
}

impl fmt::Display for OpticalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.polarization, self.spatial)
    }
}

fn check_spatial(spatial: u8) -> Result<()> {
    if (1..=4).contains(&spatial) {
        Ok(())
    } else {
        Err(Error::InvalidConfiguration(format!(
            "spatial mode {spatial} outside 1..=4"
        )))
    }
}

fn mode(spatial: u8, pol: Polarization) -> usize {
    2 * (spatial as usize - 1) + pol.offset()
}

/// Modes occupied by `(photon A, photon B)` for the logical bits `|m n⟩_A |k l⟩_B`.
pub fn encode_logical(m: u8, n: u8, k: u8, l: u8) -> (OpticalMode, OpticalMode) {
    (
        OpticalMode {
            spatial: 1 + n,
            polarization: Polarization::from_bit(m),
        },
        OpticalMode {
            spatial: 3 + l,
            polarization: Polarization::from_bit(k),
        },
    )
}

/// Modes of photon A and photon B for canonical basis index
/// `8·Ap + 4·As + 2·Bp + Bs`.
fn modes_of_basis_index(idx: usize) -> (usize, usize) {
    let bit = |p: usize| ((idx >> p) & 1) as u8;
    let (a, b) = encode_logical(bit(3), bit(2), bit(1), bit(0));
    (a.index(), b.index())
}

/// Single-photon amplitude vector over the eight modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeKet(pub [C64; MODES]);

impl ModeKet {
    pub fn zero() -> Self {
        Self([c(0.0, 0.0); MODES])
    }

    pub fn basis(m: OpticalMode) -> Self {
        let mut k = Self::zero();
        k.0[m.index()] = c(1.0, 0.0);
        k
    }

    /// Photon A's ket for a two-qubit `(Ap, As)` vector.
    pub fn from_photon_a(logical: &[C64; 4]) -> Self {
        let mut k = Self::zero();
        for (idx, amp) in logical.iter().enumerate() {
            let (a, _) = encode_logical((idx >> 1) as u8, (idx & 1) as u8, 0, 0);
            k.0[a.index()] += amp;
        }
        k
    }

    /// Photon B's ket for a two-qubit `(Bp, Bs)` vector.
    pub fn from_photon_b(logical: &[C64; 4]) -> Self {
        let mut k = Self::zero();
        for (idx, amp) in logical.iter().enumerate() {
            let (_, b) = encode_logical(0, 0, (idx >> 1) as u8, (idx & 1) as u8);
            k.0[b.index()] += amp;
        }
        k
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(i, _)| i)
    }

    /// Largest `|⟨self|other⟩|` deviation from 1, i.e. equality up to a global phase.
    pub fn phase_distance(&self, other: &ModeKet) -> f64 {
        let overlap: C64 = self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        (1.0 - overlap.norm()).abs()
    }

    fn apply(&self, u: &DMatrix<C64>) -> ModeKet {
        let mut out = ModeKet::zero();
        for r in 0..MODES {
            out.0[r] = (0..MODES).map(|k| u[(r, k)] * self.0[k]).sum();
        }
        out
    }
}

/// Photon A's projection ket for a measurement setting.
pub fn setting_ket(s: SettingIndex) -> ModeKet {
    ModeKet::from_photon_a(&s.ket())
}

/// Photon B's singlet projection `(|H⟩₄ − |V⟩₃)/√2`.
pub fn singlet_mode_ket() -> ModeKet {
    ModeKet::from_photon_b(&singlet_ket())
}

/// Reflection phase applied to V light crossing a polarizing beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Reflection {
    #[default]
    PlusI,
    MinusI,
}

impl Reflection {
    fn phase(self) -> C64 {
        match self {
            Self::PlusI => c(0.0, 1.0),
            Self::MinusI => c(0.0, -1.0),
        }
    }
}

/// An optical component. Angles are in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Element {
    /// Half-wave plate with fast axis at `theta`, on one spatial mode.
    Hwp { theta: f64, spatial: u8 },
    /// Quarter-wave plate with fast axis at `theta`, on one spatial mode.
    Qwp { theta: f64, spatial: u8 },
    /// Phase `e^{iφ}` on the listed mode indices.
    Phase { phi: f64, modes: Vec<usize> },
    /// Beam displacer as a mode routing `(from, to)`; unlisted modes pass through.
    BeamDisplacer { routing: Vec<(usize, usize)> },
    /// Polarizing beam splitter joining spatial modes `a` and `b`:
    /// H is transmitted, V crosses to the other mode.
    Pbs {
        a: u8,
        b: u8,
        reflection: Reflection,
    },
    /// Keeps only `axis` in `spatial`; the other polarization is absorbed.
    Polarizer { axis: Polarization, spatial: u8 },
}

impl Element {
    pub fn hwp(theta: f64, spatial: u8) -> Self {
        Self::Hwp { theta, spatial }
    }

    pub fn qwp(theta: f64, spatial: u8) -> Self {
        Self::Qwp { theta, spatial }
    }

    /// Phase on both polarizations of a spatial mode.
    pub fn spatial_phase(phi: f64, spatial: u8) -> Self {
        Self::Phase {
            phi,
            modes: vec![
                mode(spatial, Polarization::H),
                mode(spatial, Polarization::V),
            ],
        }
    }

    /// Displacer exchanging the V components of two spatial modes.
    pub fn displace_v(a: u8, b: u8) -> Self {
        let (va, vb) = (mode(a, Polarization::V), mode(b, Polarization::V));
        Self::BeamDisplacer {
            routing: vec![(va, vb), (vb, va)],
        }
    }

    pub fn pbs(a: u8, b: u8) -> Self {
        Self::Pbs {
            a,
            b,
            reflection: Reflection::default(),
        }
    }

    pub fn polarizer(axis: Polarization, spatial: u8) -> Self {
        Self::Polarizer { axis, spatial }
    }

    /// Mode indices whose amplitudes the element can change.
    pub fn touched_modes(&self) -> Vec<usize> {
        let both = |s: u8| [mode(s, Polarization::H), mode(s, Polarization::V)];
        match self {
            Element::Hwp { spatial, .. }
            | Element::Qwp { spatial, .. }
            | Element::Polarizer { spatial, .. } => both(*spatial).to_vec(),
            Element::Phase { modes, .. } => modes.clone(),
            Element::BeamDisplacer { routing } => {
                let mut m: Vec<usize> = routing.iter().flat_map(|(a, b)| [*a, *b]).collect();
                m.sort_unstable();
                m.dedup();
                m
            }
            Element::Pbs { a, b, .. } => [both(*a), both(*b)].concat(),
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Element::Polarizer { .. })
    }
}

fn set_block(u: &mut DMatrix<C64>, spatial: u8, block: [[C64; 2]; 2]) {
    let (h, v) = (
        mode(spatial, Polarization::H),
        mode(spatial, Polarization::V),
    );
    u[(h, h)] = block[0][0];
    u[(h, v)] = block[0][1];
    u[(v, h)] = block[1][0];
    u[(v, v)] = block[1][1];
}

/// 8×8 single-photon transfer matrix of `e`.
pub fn transfer_matrix(e: &Element) -> Result<DMatrix<C64>> {
    let mut u = DMatrix::<C64>::identity(MODES, MODES);
    match e {
        Element::Hwp { theta, spatial } => {
            check_spatial(*spatial)?;
            let (s, co) = (2.0 * theta).sin_cos();
            set_block(
                &mut u,
                *spatial,
                [[c(co, 0.0), c(s, 0.0)], [c(s, 0.0), c(-co, 0.0)]],
            );
        }
        Element::Qwp { theta, spatial } => {
            check_spatial(*spatial)?;
            let (s, co) = theta.sin_cos();
            let global = C64::from_polar(1.0, -FRAC_PI_4);
            let i = c(0.0, 1.0);
            let off = (c(1.0, 0.0) - i) * s * co;
            set_block(
                &mut u,
                *spatial,
                [
                    [global * (co * co + i * s * s), global * off],
                    [global * off, global * (s * s + i * co * co)],
                ],
            );
        }
        Element::Phase { phi, modes } => {
            let z = C64::from_polar(1.0, *phi);
            for &m in modes {
                if m >= MODES {
                    return Err(Error::InvalidConfiguration(format!(
                        "mode index {m} out of range"
                    )));
                }
                u[(m, m)] = z;
            }
        }
        Element::BeamDisplacer { routing } => {
            let mut target: Vec<Option<usize>> = vec![None; MODES];
            for &(from, to) in routing {
                if from >= MODES || to >= MODES {
                    return Err(Error::InvalidConfiguration(format!(
                        "routing {from}→{to} out of range"
                    )));
                }
                if target[from].replace(to).is_some() {
                    return Err(Error::InvalidConfiguration(format!(
                        "mode {from} routed twice"
                    )));
                }
            }
            let map: Vec<usize> = target
                .iter()
                .enumerate()
                .map(|(i, t)| t.unwrap_or(i))
                .collect();
            let mut hit = [false; MODES];
            for &t in &map {
                if std::mem::replace(&mut hit[t], true) {
                    return Err(Error::InvalidConfiguration(format!(
                        "beam displacer collision on mode {}",
                        OpticalMode::from_index(t)
                    )));
                }
            }
            u.fill(c(0.0, 0.0));
            for (from, to) in map.into_iter().enumerate() {
                u[(to, from)] = c(1.0, 0.0);
            }
        }
        Element::Pbs { a, b, reflection } => {
            check_spatial(*a)?;
            check_spatial(*b)?;
            if a == b {
                return Err(Error::InvalidConfiguration(
                    "PBS needs two distinct spatial modes".into(),
                ));
            }
            let (va, vb) = (mode(*a, Polarization::V), mode(*b, Polarization::V));
            let r = reflection.phase();
            u[(va, va)] = c(0.0, 0.0);
            u[(vb, vb)] = c(0.0, 0.0);
            u[(vb, va)] = r;
            u[(va, vb)] = r;
        }
        Element::Polarizer { axis, spatial } => {
            check_spatial(*spatial)?;
            let blocked = match axis {
                Polarization::H => mode(*spatial, Polarization::V),
                Polarization::V => mode(*spatial, Polarization::H),
            };
            u[(blocked, blocked)] = c(0.0, 0.0);
        }
    }
    Ok(u)
}

/// Composed transfer matrix; the first element acts first.
pub fn chain_matrix(elements: &[Element]) -> Result<DMatrix<C64>> {
    elements
        .iter()
        .try_fold(DMatrix::identity(MODES, MODES), |acc, e| {
            Ok(transfer_matrix(e)? * acc)
        })
}

/// Largest entry of `|U†U − I|`.
pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    let d = u.adjoint() * u - DMatrix::<C64>::identity(u.nrows(), u.ncols());
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Two photons over eight modes with a scalar distinguishability.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    amplitude: DMatrix<C64>,
    tau: f64,
    lost: f64,
}

impl TwoPhotonState {
    /// `amplitude` must be symmetric and normalized.
    pub fn new(amplitude: DMatrix<C64>, tau: f64) -> Result<Self> {
        Self::with_loss(amplitude, tau, 0.0)
    }

    fn with_loss(amplitude: DMatrix<C64>, tau: f64, lost: f64) -> Result<Self> {
        check_unit_interval("tau", tau)?;
        if amplitude.shape() != (MODES, MODES) {
            return Err(Error::DimensionMismatch {
                expected: MODES,
                found: amplitude.nrows(),
            });
        }
        let asym = (&amplitude - amplitude.transpose())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > SYMMETRY_TOL {
            return Err(Error::Invalid(format!(
                "two-photon amplitude not symmetric (residual {asym:e})"
            )));
        }
        let s = Self {
            amplitude,
            tau,
            lost,
        };
        let total = s.norm_sqr() + lost;
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::Invalid(format!(
                "two-photon norm plus loss is {total}, expected 1"
            )));
        }
        Ok(s)
    }

    /// Photon A in `a`, photon B in `b` (symmetrized). The kets must have
    /// disjoint support and unit norm.
    pub fn from_product(a: &ModeKet, b: &ModeKet, tau: f64) -> Result<Self> {
        check_arms(a, b)?;
        let amplitude = DMatrix::from_fn(MODES, MODES, |i, j| {
            (a.0[i] * b.0[j] + b.0[i] * a.0[j]) * FRAC_1_SQRT_2
        });
        Self::new(amplitude, tau)
    }

    /// Encodes a normalized canonical-layout 16-vector through the mode map.
    pub fn from_hes_ket(ket: &[C64], tau: f64) -> Result<Self> {
        if ket.len() != 16 {
            return Err(Error::DimensionMismatch {
                expected: 16,
                found: ket.len(),
            });
        }
        let mut amplitude = DMatrix::<C64>::zeros(MODES, MODES);
        for (idx, z) in ket.iter().enumerate() {
            let (ma, mb) = modes_of_basis_index(idx);
            amplitude[(ma, mb)] += z * FRAC_1_SQRT_2;
            amplitude[(mb, ma)] += z * FRAC_1_SQRT_2;
        }
        Self::new(amplitude, tau)
    }

    /// Inverse of [`TwoPhotonState::from_hes_ket`] on the one-photon-per-arm sector.
    pub fn hes_ket(&self) -> Vec<C64> {
        (0..16)
            .map(|idx| {
                let (ma, mb) = modes_of_basis_index(idx);
                self.amplitude[(ma, mb)] * SQRT_2
            })
            .collect()
    }

    pub fn amplitude(&self) -> &DMatrix<C64> {
        &self.amplitude
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Probability already discarded by absorption or post-selection.
    pub fn lost(&self) -> f64 {
        self.lost
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitude.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        check_unit_interval("tau", tau)?;
        self.tau = tau;
        Ok(self)
    }

    /// Keeps only events with one photon in spatial modes 1–2 and one in 3–4.
    pub fn post_select_coincidence(&self) -> Self {
        let arm = |m: usize| OpticalMode::from_index(m).spatial <= 2;
        let amplitude = DMatrix::from_fn(MODES, MODES, |i, j| {
            if arm(i) != arm(j) {
                self.amplitude[(i, j)]
            } else {
                c(0.0, 0.0)
            }
        });
        let before = self.norm_sqr();
        let mut out = Self {
            amplitude,
            tau: self.tau,
            lost: self.lost,
        };
        out.lost += before - out.norm_sqr();
        out
    }

    /// Rescales to unit norm and clears the loss record; returns the state and
    /// the norm it had.
    pub fn renormalized(&self) -> Result<(Self, f64)> {
        let n = self.norm_sqr();
        if n < RATIO_FLOOR {
            return Err(Error::Invalid(
                "cannot renormalize an empty two-photon state".into(),
            ));
        }
        let amplitude = self.amplitude.map(|z| z / n.sqrt());
        Ok((Self::new(amplitude, self.tau)?, n))
    }
}

/// Runs the state through `elements` in order.
pub fn evolve(state: &TwoPhotonState, elements: &[Element]) -> Result<TwoPhotonState> {
    if elements.is_empty() {
        return Ok(state.clone());
    }
    let u = chain_matrix(elements)?;
    let amplitude = &u * &state.amplitude * u.transpose();
    let before = state.norm_sqr();
    let mut out = TwoPhotonState {
        amplitude,
        tau: state.tau,
        lost: state.lost,
    };
    out.lost += before - out.norm_sqr();
    Ok(out)
}

fn check_arms(a: &ModeKet, b: &ModeKet) -> Result<()> {
    for k in [a, b] {
        let n = k.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::UnnormalizedKet(n));
        }
    }
    let sa: Vec<usize> = a.support().collect();
    if let Some(m) = b.support().find(|m| sa.contains(m)) {
        return Err(Error::OverlappingArms(m));
    }
    Ok(())
}

fn spatial_modes(k: &ModeKet) -> Vec<u8> {
    let mut s: Vec<u8> = k
        .support()
        .map(|m| OpticalMode::from_index(m).spatial)
        .collect();
    s.dedup();
    s
}

/// Probability of one photon in `proj_a` and the other in `proj_b`.
///
/// Indistinguishable photons (`τ = 1`) interfere fully. For `τ < 1` the
/// result is `τ·coherent + (1−τ)·incoherent`, where the incoherent value sums
/// squared amplitudes over the spatial routes (one spatial mode per photon)
/// instead of adding the route amplitudes.
pub fn coincidence_probability(
    state: &TwoPhotonState,
    proj_a: &ModeKet,
    proj_b: &ModeKet,
) -> Result<f64> {
    check_arms(proj_a, proj_b)?;
    let a = &state.amplitude;
    let route_amplitude = |sa: Option<u8>, sb: Option<u8>| -> C64 {
        let mut acc = c(0.0, 0.0);
        for i in proj_a.support() {
            if sa.is_some_and(|s| OpticalMode::from_index(i).spatial != s) {
                continue;
            }
            for j in proj_b.support() {
                if sb.is_some_and(|s| OpticalMode::from_index(j).spatial != s) {
                    continue;
                }
                acc += proj_a.0[i].conj() * proj_b.0[j].conj() * a[(i, j)];
            }
        }
        acc
    };
    let coherent = 2.0 * route_amplitude(None, None).norm_sqr();
    let value = if state.tau < 1.0 {
        let mut incoherent = 0.0;
        for sa in spatial_modes(proj_a) {
            for sb in spatial_modes(proj_b) {
                incoherent += 2.0 * route_amplitude(Some(sa), Some(sb)).norm_sqr();
            }
        }
        state.tau * coherent + (1.0 - state.tau) * incoherent
    } else {
        coherent
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Weighted mixture of two-photon states.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonEnsemble {
    members: Vec<(f64, TwoPhotonState)>,
}

impl From<TwoPhotonState> for PhotonEnsemble {
    fn from(s: TwoPhotonState) -> Self {
        Self {
            members: vec![(1.0, s)],
        }
    }
}

impl PhotonEnsemble {
    pub fn new(members: Vec<(f64, TwoPhotonState)>) -> Result<Self> {
        let total: f64 = members.iter().map(|(w, _)| *w).sum();
        if members.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > NORM_TOL {
            return Err(Error::Invalid(format!(
                "ensemble weights must be nonnegative and sum to 1, got {total}"
            )));
        }
        Ok(Self { members })
    }

    /// Spectral decomposition of a canonical-layout HES, each eigenvector
    /// encoded through the mode map.
    pub fn from_density(rho_hes: &DensityMatrix, tau: f64) -> Result<Self> {
        rho_hes.require_layout(&QubitLayout::canonical())?;
        let members = rho_hes
            .pure_decomposition(1e-15)
            .into_iter()
            .map(|(w, v)| Ok((w, TwoPhotonState::from_hes_ket(&v, tau)?)))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        let members = members.into_iter().map(|(w, s)| (w / total, s)).collect();
        Self::new(members)
    }

    pub fn members(&self) -> &[(f64, TwoPhotonState)] {
        &self.members
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        let members = self
            .members
            .into_iter()
            .map(|(w, s)| Ok((w, s.with_tau(tau)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }

    pub fn evolve(&self, elements: &[Element]) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|(w, s)| Ok((*w, evolve(s, elements)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }

    pub fn coincidence_probability(&self, proj_a: &ModeKet, proj_b: &ModeKet) -> Result<f64> {
        self.members.iter().try_fold(0.0, |acc, (w, s)| {
            Ok(acc + w * coincidence_probability(s, proj_a, proj_b)?)
        })
    }

    /// Coincidence probabilities of the five measured settings, photon B on the singlet.
    pub fn setting_probabilities(&self) -> Result<[f64; 5]> {
        let b = singlet_mode_ket();
        let mut out = [0.0; 5];
        for (slot, s) in out.iter_mut().zip(SettingIndex::MEASURED) {
            *slot = self.coincidence_probability(&setting_ket(s), &b)?;
        }
        Ok(out)
    }
}

/// `n` uniform phases on `[0, 2π)`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| std::f64::consts::TAU * k as f64 / n as f64)
        .collect()
}

/// `p++` coincidences with a phase `φ` on spatial mode 2, for each `φ`.
pub fn phase_scan(state: &PhotonEnsemble, phis: &[f64]) -> Result<Vec<(f64, f64)>> {
    let proj_a = setting_ket(SettingIndex::SPP);
    let proj_b = singlet_mode_ket();
    phis.par_iter()
        .map(|&phi| {
            let shifted = state.evolve(&[Element::spatial_phase(phi, 2)])?;
            Ok((phi, shifted.coincidence_probability(&proj_a, &proj_b)?))
        })
        .collect()
}

/// `cc_max / cc_min` of a phase scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(r) => r,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(r) => write!(f, "{r}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

pub fn ratio_r(scan: &[(f64, f64)]) -> Result<Ratio> {
    if scan.is_empty() {
        return Err(Error::Invalid("empty phase scan".into()));
    }
    let max = scan
        .iter()
        .map(|(_, cc)| *cc)
        .fold(f64::NEG_INFINITY, f64::max);
    let min = scan.iter().map(|(_, cc)| *cc).fold(f64::INFINITY, f64::min);
    if min < RATIO_FLOOR {
        Ok(Ratio::Infinite)
    } else {
        Ok(Ratio::Finite(max / min))
    }
}

/// The fixed wiring of the experiment: source, displacers, wave plates, the
/// interaction PBS, and the two projection stages.
#[derive(Debug, Clone, Copy, Default)]
pub struct Fig2Setup {
    pub reflection: Reflection,
}

/// Result of running the preparation stage.
#[derive(Debug, Clone)]
pub struct Preparation {
    /// Post-selected and renormalized HES.
    pub state: TwoPhotonState,
    /// Probability of the coincidence post-selection.
    pub success: f64,
}

impl Fig2Setup {
    pub const NAME: &'static str = "fig2";

    pub fn by_name(name: &str) -> Result<Self> {
        if name == Self::NAME {
            Ok(Self::default())
        } else {
            Err(Error::Invalid(format!(
                "unknown setup `{name}` (available: {})",
                Self::NAME
            )))
        }
    }

    /// Source pair: photon A enters mode 1, photon B mode 3, with the
    /// polarization state `Σ c_ab |a⟩_A |b⟩_B` (0 → H, 1 → V).
    pub fn source(polarization: &[C64; 4], tau: f64) -> Result<TwoPhotonState> {
        let mut amplitude = DMatrix::<C64>::zeros(MODES, MODES);
        for (idx, z) in polarization.iter().enumerate() {
            let ma = mode(1, Polarization::from_bit((idx >> 1) as u8));
            let mb = mode(3, Polarization::from_bit((idx & 1) as u8));
            amplitude[(ma, mb)] += z * FRAC_1_SQRT_2;
            amplitude[(mb, ma)] += z * FRAC_1_SQRT_2;
        }
        TwoPhotonState::new(amplitude, tau)
    }

    /// Displacers copy polarization into the path, wave plates reset every
    /// beam to diagonal polarization, and the PBS pair re-entangles
    /// polarization under coincidence post-selection. The closing QWP pair
    /// on photon A's modes flips the sign of V.
    pub fn preparation(&self) -> Vec<Element> {
        let pbs = |a, b| Element::Pbs {
            a,
            b,
            reflection: self.reflection,
        };
        vec![
            Element::displace_v(1, 2),
            Element::displace_v(3, 4),
            Element::hwp(FRAC_PI_8, 1),
            Element::hwp(3.0 * FRAC_PI_8, 2),
            Element::hwp(FRAC_PI_8, 3),
            Element::hwp(3.0 * FRAC_PI_8, 4),
            pbs(1, 3),
            pbs(2, 4),
            Element::qwp(0.0, 1),
            Element::qwp(0.0, 1),
            Element::qwp(0.0, 2),
            Element::qwp(0.0, 2),
        ]
    }

    pub fn prepare(&self, source: &TwoPhotonState) -> Result<Preparation> {
        let out = evolve(source, &self.preparation())?.post_select_coincidence();
        let (state, success) = out.renormalized()?;
        Ok(Preparation { state, success })
    }

    /// Photon A's analyzer for `s`, ending on detector mode `H1`.
    pub fn analyzer_a(s: SettingIndex) -> Vec<Element> {
        use crate::witness::Basis::{One, Plus, Zero};
        let det = Element::polarizer(Polarization::H, 1);
        match (s.i, s.j) {
            (Zero, Zero) => vec![det],
            (One, Zero) => vec![Element::hwp(FRAC_PI_4, 1), det],
            (Zero, One) => vec![
                Element::hwp(FRAC_PI_4, 2),
                Element::displace_v(1, 2),
                Element::hwp(FRAC_PI_4, 1),
                det,
            ],
            (One, One) => vec![Element::displace_v(1, 2), Element::hwp(FRAC_PI_4, 1), det],
            (Plus, Plus) => vec![
                Element::hwp(FRAC_PI_8, 1),
                Element::hwp(3.0 * FRAC_PI_8, 2),
                Element::displace_v(1, 2),
                Element::hwp(FRAC_PI_8, 1),
                det,
            ],
            _ => panic!("setting {s} is not measured"),
        }
    }

    /// Photon B's singlet analyzer, ending on detector mode `V4`.
    pub fn analyzer_b() -> Vec<Element> {
        vec![
            Element::displace_v(3, 4),
            Element::hwp(FRAC_PI_8, 4),
            Element::polarizer(Polarization::V, 4),
        ]
    }

    /// Ket projected onto by an analyzer chain ending in detector mode `detector`.
    pub fn analyzer_ket(chain: &[Element], detector: OpticalMode) -> Result<ModeKet> {
        let u = chain_matrix(chain)?;
        Ok(ModeKet::basis(detector).apply(&u.adjoint()))
    }

    pub fn detector_a() -> OpticalMode {
        OpticalMode {
            spatial: 1,
            polarization: Polarization::H,
        }
    }

    pub fn detector_b() -> OpticalMode {
        OpticalMode {
            spatial: 4,
            polarization: Polarization::V,
        }
    }

    /// Coincidence probabilities of the five settings measured through the
    /// analyzer chains.
    pub fn measure(&self, state: &PhotonEnsemble) -> Result<[f64; 5]> {
        let b = Self::analyzer_ket(&Self::analyzer_b(), Self::detector_b())?;
        let mut out = [0.0; 5];
        for (slot, s) in out.iter_mut().zip(SettingIndex::MEASURED) {
            let a = Self::analyzer_ket(&Self::analyzer_a(s), Self::detector_a())?;
            *slot = state.coincidence_probability(&a, &b)?;
        }
        Ok(out)
    }
}
