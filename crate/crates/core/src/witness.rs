//! The collectibility witness.
//!
//! Photon A is measured with product projections `Π_i ⊗ Π_j` on its
//! polarization and spatial qubits while photon B is projected onto the
//! singlet across its two qubits. Five joint probabilities feed
//!
//! ```text
//! η = 16 P (1−P) √(p00 p11) + 4 p++
//! W = ½ [η + P²(1−p00) + (1−P)²(1−p11) + 2P(1−P)(1−p01) − 1]
//! ```
//!
//! How the raw joint probabilities are normalized before entering `W` is a
//! [`NormalizationPolicy`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::qmat::{c, probability, ComplexMatrix, DensityMatrix, QubitLayout, C64};

/// Denominators below this produce the all-zero quartet.
pub const ZERO_COINCIDENCE: f64 = 1e-12;
const TABLE_TOL: f64 = 1e-10;

/// Single-qubit projection basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Zero,
    One,
    Plus,
}

impl Basis {
    pub fn ket(self) -> [C64; 2] {
        match self {
            Basis::Zero => [c(1.0, 0.0), c(0.0, 0.0)],
            Basis::One => [c(0.0, 0.0), c(1.0, 0.0)],
            Basis::Plus => [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
        }
    }

    fn symbol(self) -> char {
        match self {
            Basis::Zero => '0',
            Basis::One => '1',
            Basis::Plus => '+',
        }
    }
}

/// Projection setting `(i, j)` on `(Ap, As)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SettingIndex {
    pub i: Basis,
    pub j: Basis,
}

impl SettingIndex {
    pub const S00: Self = Self::new(Basis::Zero, Basis::Zero);
    pub const S01: Self = Self::new(Basis::Zero, Basis::One);
    pub const S10: Self = Self::new(Basis::One, Basis::Zero);
    pub const S11: Self = Self::new(Basis::One, Basis::One);
    pub const SPP: Self = Self::new(Basis::Plus, Basis::Plus);

    /// The five settings that are actually measured.
    pub const MEASURED: [Self; 5] = [Self::S00, Self::S01, Self::S10, Self::S11, Self::SPP];

    pub const fn new(i: Basis, j: Basis) -> Self {
        Self { i, j }
    }

    /// Two-qubit ket on `(Ap, As)`.
    pub fn ket(self) -> [C64; 4] {
        let (a, b) = (self.i.ket(), self.j.ket());
        [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    }

    pub fn is_computational(self) -> bool {
        self.i != Basis::Plus && self.j != Basis::Plus
    }

    /// `"00"`, `"01"`, `"10"`, `"11"`, `"++"`.
    pub fn label(self) -> String {
        [self.i.symbol(), self.j.symbol()].iter().collect()
    }
}

impl fmt::Display for SettingIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Rank-1 projector `Π_i ⊗ Π_j` on `(Ap, As)`.
pub fn local_projector(s: SettingIndex) -> ComplexMatrix {
    ComplexMatrix::outer(&s.ket()).expect("4-dim ket")
}

/// `|ψ⁻⟩ = (|01⟩ − |10⟩)/√2` on `(Bp, Bs)`.
pub fn singlet_ket() -> [C64; 4] {
    let s = FRAC_1_SQRT_2;
    [c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]
}

pub fn singlet_projector() -> ComplexMatrix {
    ComplexMatrix::outer(&singlet_ket()).expect("4-dim ket")
}

/// Raw joint probabilities of the five settings and of the singlet outcome alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbTable {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    pub ppp: f64,
    pub singlet_success: f64,
}

impl ProbTable {
    /// Validated table: entries in `[0,1]`, computational settings summing to
    /// `singlet_success`, and `ppp ≤ singlet_success`.
    pub fn new(
        p00: f64,
        p01: f64,
        p10: f64,
        p11: f64,
        ppp: f64,
        singlet_success: f64,
    ) -> Result<Self> {
        let t = Self {
            p00,
            p01,
            p10,
            p11,
            ppp,
            singlet_success,
        };
        for (name, v) in [
            ("p00", p00),
            ("p01", p01),
            ("p10", p10),
            ("p11", p11),
            ("p++", ppp),
            ("singlet_success", singlet_success),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidTable(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if (t.computational_sum() - singlet_success).abs() > TABLE_TOL {
            return Err(Error::InvalidTable(format!(
                "computational settings sum to {}, singlet success is {singlet_success}",
                t.computational_sum()
            )));
        }
        if ppp > singlet_success + TABLE_TOL {
            return Err(Error::InvalidTable(format!(
                "p++ = {ppp} exceeds singlet success {singlet_success}"
            )));
        }
        Ok(t)
    }

    pub fn computational_sum(&self) -> f64 {
        self.p00 + self.p01 + self.p10 + self.p11
    }

    pub fn get(&self, s: SettingIndex) -> f64 {
        match (s.i, s.j) {
            (Basis::Zero, Basis::Zero) => self.p00,
            (Basis::Zero, Basis::One) => self.p01,
            (Basis::One, Basis::Zero) => self.p10,
            (Basis::One, Basis::One) => self.p11,
            (Basis::Plus, Basis::Plus) => self.ppp,
            _ => panic!("setting {s} is not measured"),
        }
    }

    /// The five measured probabilities in [`SettingIndex::MEASURED`] order.
    pub fn measured(&self) -> [f64; 5] {
        [self.p00, self.p01, self.p10, self.p11, self.ppp]
    }

    pub fn max_abs_diff(&self, other: &ProbTable) -> f64 {
        self.measured()
            .iter()
            .zip(other.measured().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(
                (self.singlet_success - other.singlet_success).abs(),
                f64::max,
            )
    }
}

/// How raw joint probabilities are turned into the quartet fed to `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum NormalizationPolicy {
    /// Raw joint probabilities.
    Joint,
    /// Divided by the singlet success probability.
    ConditionalOnSinglet,
    /// Conditional, with `p01 ← (p01 + p10)/singlet_success`.
    #[default]
    ConditionalSymmetrized,
    /// Divided by `p00 + p01 + p10 + p11`.
    BasisNormalized,
}

impl NormalizationPolicy {
    pub const ALL: [Self; 4] = [
        Self::Joint,
        Self::ConditionalOnSinglet,
        Self::ConditionalSymmetrized,
        Self::BasisNormalized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Joint => "joint",
            Self::ConditionalOnSinglet => "cond",
            Self::ConditionalSymmetrized => "cond-sym",
            Self::BasisNormalized => "basis",
        }
    }
}

impl fmt::Display for NormalizationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormalizationPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown normalization policy `{s}`")))
    }
}

/// The four numbers `(p00, p01, p11, p++)` that enter the witness.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quartet {
    pub p00: f64,
    pub p01: f64,
    pub p11: f64,
    pub ppp: f64,
}

impl Quartet {
    pub const ZERO: Self = Self {
        p00: 0.0,
        p01: 0.0,
        p11: 0.0,
        ppp: 0.0,
    };

    pub fn new(p00: f64, p01: f64, p11: f64, ppp: f64) -> Self {
        Self { p00, p01, p11, ppp }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p00, self.p01, self.p11, self.ppp]
    }

    fn validate(&self) -> Result<()> {
        check_unit_interval("quartet p00", self.p00)?;
        check_unit_interval("quartet p01", self.p01)?;
        check_unit_interval("quartet p11", self.p11)?;
        check_unit_interval("quartet p++", self.ppp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub w: f64,
    /// The weighting parameter `P`.
    pub p: f64,
    /// `None` when the quartet was supplied directly.
    pub policy: Option<NormalizationPolicy>,
    pub normalized: Quartet,
    pub eta: f64,
}

/// `|s⟩_A ⊗ |ψ⁻⟩_B` on the canonical layout.
fn setting_singlet_projector(s: SettingIndex) -> ComplexMatrix {
    local_projector(s).kron(&singlet_projector())
}

/// Joint probabilities of a canonical-layout HES.
pub fn prob_table(rho_hes: &DensityMatrix) -> Result<ProbTable> {
    rho_hes.require_layout(&QubitLayout::canonical())?;
    let [p00, p01, p10, p11, ppp] =
        SettingIndex::MEASURED.map(|s| probability(&setting_singlet_projector(s), rho_hes));
    let identity_a = ComplexMatrix::identity(4)?;
    let singlet = probability(&identity_a.kron(&singlet_projector()), rho_hes)?;
    ProbTable::new(p00?, p01?, p10?, p11?, ppp?, singlet)
}

pub fn normalize(t: &ProbTable, policy: NormalizationPolicy) -> Quartet {
    let (denominator, p01) = match policy {
        NormalizationPolicy::Joint => (1.0, t.p01),
        NormalizationPolicy::ConditionalOnSinglet => (t.singlet_success, t.p01),
        NormalizationPolicy::ConditionalSymmetrized => (t.singlet_success, t.p01 + t.p10),
        NormalizationPolicy::BasisNormalized => (t.computational_sum(), t.p01),
    };
    if denominator < ZERO_COINCIDENCE {
        return Quartet::ZERO;
    }
    Quartet::new(
        t.p00 / denominator,
        p01 / denominator,
        t.p11 / denominator,
        t.ppp / denominator,
    )
}

pub fn witness_formula(p: f64, q: Quartet) -> Result<WitnessResult> {
    check_unit_interval("P", p)?;
    q.validate()?;
    let pq = p * (1.0 - p);
    let eta = 16.0 * pq * (q.p00 * q.p11).sqrt() + 4.0 * q.ppp;
    // P² + (1−P)² + 2P(1−P) − 1 vanishes identically; dropping it keeps the
    // all-zero quartet at exactly 0 instead of a rounding residue.
    let w = 0.5 * (eta - p * p * q.p00 - (1.0 - p).powi(2) * q.p11 - 2.0 * pq * q.p01);
    Ok(WitnessResult {
        w,
        p,
        policy: None,
        normalized: q,
        eta,
    })
}

pub fn witness_of_state(
    rho_hes: &DensityMatrix,
    p: f64,
    policy: NormalizationPolicy,
) -> Result<WitnessResult> {
    let table = prob_table(rho_hes)?;
    witness_of_table(&table, p, policy)
}

pub fn witness_of_table(
    table: &ProbTable,
    p: f64,
    policy: NormalizationPolicy,
) -> Result<WitnessResult> {
    let mut r = witness_formula(p, normalize(table, policy))?;
    r.policy = Some(policy);
    Ok(r)
}

/// `p²·w_bell + (1−p²)·w_mixed`.
pub fn werner_interpolate(w_bell: f64, w_mixed: f64, p: f64) -> Result<f64> {
    check_unit_interval("werner p", p)?;
    let p2 = p * p;
    Ok(p2 * w_bell + (1.0 - p2) * w_mixed)
}

/// Zero crossing of [`werner_interpolate`]: `√(w_mixed / (w_mixed − w_bell))`.
pub fn detection_threshold(w_bell: f64, w_mixed: f64) -> Result<f64> {
    if !(w_bell < 0.0 && 0.0 < w_mixed) {
        return Err(Error::ThresholdSign { w_bell, w_mixed });
    }
    Ok((w_mixed / (w_mixed - w_bell)).sqrt())
}
