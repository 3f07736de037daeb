//! Test states of the collectibility experiment and the dephasing channels
//! used to model loss of purity in one degree of freedom.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::qmat::{
    c, partial_trace, permute, tensor, ComplexMatrix, DensityMatrix, QubitLayout, C64,
};

/// The two-qubit states encoded into each degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CanonicalState {
    /// `(|00⟩ + |11⟩)/√2`.
    Bell,
    /// `|10⟩`: A's qubit is 1, B's is 0.
    Separable,
    /// `I/4`.
    MaximallyMixed,
    /// `p·|Bell⟩⟨Bell| + (1−p)·I/4`.
    Werner(f64),
}

impl CanonicalState {
    pub fn werner(p: f64) -> Result<Self> {
        check_unit_interval("werner p", p)?;
        Ok(Self::Werner(p))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Werner(p) => check_unit_interval("werner p", *p),
            _ => Ok(()),
        }
    }

    /// The P value the experiment tuned for this state.
    pub fn default_p(&self) -> f64 {
        match self {
            Self::Separable => 0.01,
            _ => 0.5,
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CanonicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bell => f.write_str("bell"),
            Self::Separable => f.write_str("separable"),
            Self::MaximallyMixed => f.write_str("mixed"),
            Self::Werner(p) => write!(f, "werner:{p}"),
        }
    }
}

impl FromStr for CanonicalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bell" => Ok(Self::Bell),
            "separable" => Ok(Self::Separable),
            "mixed" => Ok(Self::MaximallyMixed),
            _ => {
                let p = s
                    .strip_prefix("werner:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::Invalid(format!("unknown state `{s}`")))?;
                Self::werner(p)
            }
        }
    }
}

fn bell_ket() -> [C64; 4] {
    let s = FRAC_1_SQRT_2;
    [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]
}

/// Density matrix of `kind` on a two-qubit `layout` (A's qubit first).
pub fn single_copy(kind: CanonicalState, layout: &QubitLayout) -> Result<DensityMatrix> {
    if layout.len() != 2 {
        return Err(Error::Invalid(format!(
            "single-copy states need a 2-qubit layout, got {layout}"
        )));
    }
    kind.validate()?;
    let layout = layout.clone();
    match kind {
        CanonicalState::Bell => DensityMatrix::from_pure(&bell_ket(), layout),
        CanonicalState::Separable => {
            DensityMatrix::new(ComplexMatrix::basis_projector(4, 0b10)?, layout)
        }
        CanonicalState::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(layout)),
        CanonicalState::Werner(p) => {
            let bell = DensityMatrix::from_pure(&bell_ket(), layout.clone())?;
            bell.mix(&DensityMatrix::maximally_mixed(layout), p)
        }
    }
}

/// `ρ^(p) ⊗ ρ^(s)` reordered into the canonical `(Ap, As, Bp, Bs)` layout.
pub fn hes_product(rho_p: &DensityMatrix, rho_s: &DensityMatrix) -> Result<DensityMatrix> {
    rho_p.require_layout(&QubitLayout::polarization())?;
    rho_s.require_layout(&QubitLayout::spatial())?;
    permute(&tensor(rho_p, rho_s)?, &QubitLayout::canonical())
}

/// The same canonical state encoded into both degrees of freedom.
pub fn hes_of(kind: CanonicalState) -> Result<DensityMatrix> {
    hes_product(
        &single_copy(kind, &QubitLayout::polarization())?,
        &single_copy(kind, &QubitLayout::spatial())?,
    )
}

/// Polarization and spatial marginals of a canonical HES.
pub fn hes_marginals(rho_hes: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    rho_hes.require_layout(&QubitLayout::canonical())?;
    Ok((
        partial_trace(rho_hes, &QubitLayout::polarization())?,
        partial_trace(rho_hes, &QubitLayout::spatial())?,
    ))
}

/// Which pair of canonical-index bits a dephasing channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dof {
    Polarization,
    Spatial,
}

impl Dof {
    /// Mask of `(Xp)` or `(Xs)` bits in `8·Ap + 4·As + 2·Bp + Bs`.
    fn mask(self) -> usize {
        match self {
            Dof::Polarization => 0b1010,
            Dof::Spatial => 0b0101,
        }
    }
}

fn dephase(rho_hes: &DensityMatrix, v: f64, dof: Dof) -> Result<DensityMatrix> {
    rho_hes.require_layout(&QubitLayout::canonical())?;
    check_unit_interval("visibility", v)?;
    let mask = dof.mask();
    let m = ComplexMatrix::from_fn(rho_hes.dim(), |r, col| {
        let z = rho_hes.get(r, col);
        if r & mask == col & mask {
            z
        } else {
            z * v
        }
    })?;
    DensityMatrix::new(m, rho_hes.layout().clone())
}

/// Scales every coherence between different `(As, Bs)` sectors by `v`.
///
/// `v = 1` is the identity, `v = 0` removes all spatial coherence while
/// keeping populations.
pub fn dephase_spatial(rho_hes: &DensityMatrix, v: f64) -> Result<DensityMatrix> {
    dephase(rho_hes, v, Dof::Spatial)
}

/// Polarization counterpart of [`dephase_spatial`], acting on `(Ap, Bp)` sectors.
///
/// Same rule applied to the other degree of freedom; the measured experiment
/// only parametrizes the spatial side.
pub fn dephase_polarization(rho_hes: &DensityMatrix, v: f64) -> Result<DensityMatrix> {
    dephase(rho_hes, v, Dof::Polarization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::Qubit;
    use approx::assert_abs_diff_eq;

    fn bell_hes() -> DensityMatrix {
        hes_of(CanonicalState::Bell).unwrap()
    }

    #[test]
    fn werner_endpoints() {
        let l = QubitLayout::polarization();
        let w1 = single_copy(CanonicalState::Werner(1.0), &l).unwrap();
        let bell = single_copy(CanonicalState::Bell, &l).unwrap();
        assert!(w1.matrix().max_abs_diff(bell.matrix()) < 1e-15);
        let w0 = single_copy(CanonicalState::Werner(0.0), &l).unwrap();
        let mixed = single_copy(CanonicalState::MaximallyMixed, &l).unwrap();
        assert!(w0.matrix().max_abs_diff(mixed.matrix()) < 1e-15);
    }

    #[test]
    fn werner_half_purity() {
        // p² + 2p(1−p)/4 + (1−p)²/4 at p = 1/2
        let p: f64 = 0.5;
        let oracle = p * p + 2.0 * p * (1.0 - p) / 4.0 + (1.0 - p).powi(2) / 4.0;
        assert_abs_diff_eq!(oracle, 0.4375, epsilon = 1e-15);
        let w = single_copy(CanonicalState::Werner(0.5), &QubitLayout::polarization()).unwrap();
        assert_abs_diff_eq!(w.purity(), 0.4375, epsilon = 1e-14);
    }

    #[test]
    fn werner_out_of_range_rejected() {
        assert!(CanonicalState::werner(1.5).is_err());
        assert!(single_copy(CanonicalState::Werner(-0.1), &QubitLayout::polarization()).is_err());
        assert!("werner:2".parse::<CanonicalState>().is_err());
    }

    #[test]
    fn single_copy_needs_two_qubits() {
        let l = QubitLayout::new(vec![Qubit::Ap]).unwrap();
        assert!(single_copy(CanonicalState::Bell, &l).is_err());
    }

    #[test]
    fn state_names_round_trip() {
        for s in ["bell", "separable", "mixed", "werner:0.7"] {
            assert_eq!(s.parse::<CanonicalState>().unwrap().to_string(), s);
        }
        assert!("ghz".parse::<CanonicalState>().is_err());
    }

    #[test]
    fn bell_hes_amplitudes_follow_the_mode_encoding() {
        // ψ₁ ⊗ ψ₁ = ½ Σ_{a,b} |a b a b⟩ in (Ap, As, Bp, Bs):
        // ½(|H⟩₁|H⟩₃ + |V⟩₁|V⟩₃ + |H⟩₂|H⟩₄ + |V⟩₂|V⟩₄)
        let mut ket = [c(0.0, 0.0); 16];
        for idx in [0b0000, 0b0101, 0b1010, 0b1111] {
            ket[idx] = c(0.5, 0.0);
        }
        let expect = DensityMatrix::from_pure(&ket, QubitLayout::canonical()).unwrap();
        assert!(bell_hes().matrix().max_abs_diff(expect.matrix()) < 1e-15);
    }

    #[test]
    fn separable_hes_is_v2_h3() {
        // |10⟩_{Ap,Bp} ⊗ |10⟩_{As,Bs}: Ap = As = 1, Bp = Bs = 0
        let hes = hes_of(CanonicalState::Separable).unwrap();
        assert_eq!(
            hes.matrix(),
            &ComplexMatrix::basis_projector(16, 0b1100).unwrap()
        );
    }

    #[test]
    fn mixed_hes_is_identity_over_sixteen() {
        let hes = hes_of(CanonicalState::MaximallyMixed).unwrap();
        let expect = DensityMatrix::maximally_mixed(QubitLayout::canonical());
        assert!(hes.matrix().max_abs_diff(expect.matrix()) < 1e-15);
    }

    #[test]
    fn hes_product_rejects_swapped_layouts() {
        let p = single_copy(CanonicalState::Bell, &QubitLayout::polarization()).unwrap();
        let s = single_copy(CanonicalState::Bell, &QubitLayout::spatial()).unwrap();
        assert!(matches!(
            hes_product(&s, &p),
            Err(Error::WrongLayout { .. })
        ));
    }

    #[test]
    fn bell_with_mixed_marginal() {
        let p = single_copy(CanonicalState::Bell, &QubitLayout::polarization()).unwrap();
        let s = single_copy(CanonicalState::MaximallyMixed, &QubitLayout::spatial()).unwrap();
        let hes = hes_product(&p, &s).unwrap();
        let (mp, ms) = hes_marginals(&hes).unwrap();
        assert!(mp.matrix().max_abs_diff(p.matrix()) < 1e-12);
        assert!(ms.matrix().max_abs_diff(s.matrix()) < 1e-12);
    }

    #[test]
    fn bell_hes_purity_and_b_marginal() {
        let hes = bell_hes();
        assert_abs_diff_eq!(hes.trace(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(hes.purity(), 1.0, epsilon = 1e-14);
        let b = partial_trace(&hes, &QubitLayout::photon_b()).unwrap();
        let mixed = DensityMatrix::maximally_mixed(QubitLayout::photon_b());
        assert!(b.matrix().max_abs_diff(mixed.matrix()) < 1e-15);
    }

    #[test]
    fn dephasing_identity_and_populations() {
        let hes = bell_hes();
        assert_eq!(dephase_spatial(&hes, 1.0).unwrap(), hes);
        let dead = dephase_spatial(&hes, 0.0).unwrap();
        for i in 0..16 {
            assert_eq!(dead.get(i, i), hes.get(i, i));
        }
    }

    #[test]
    fn fully_dephased_bell_purity() {
        // pure ψ₁ polarization ⊗ ½(|00⟩⟨00| + |11⟩⟨11|) spatial
        let p = single_copy(CanonicalState::Bell, &QubitLayout::polarization()).unwrap();
        let s = DensityMatrix::new(
            ComplexMatrix::basis_projector(4, 0)
                .unwrap()
                .add(&ComplexMatrix::basis_projector(4, 3).unwrap())
                .unwrap()
                .scale(0.5),
            QubitLayout::spatial(),
        )
        .unwrap();
        let oracle = hes_product(&p, &s).unwrap();
        let dead = dephase_spatial(&bell_hes(), 0.0).unwrap();
        assert!(dead.matrix().max_abs_diff(oracle.matrix()) < 1e-15);
        assert_abs_diff_eq!(dead.purity(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn dephasing_rejects_bad_visibility() {
        let hes = bell_hes();
        assert!(dephase_spatial(&hes, 1.1).is_err());
        assert!(dephase_polarization(&hes, -0.1).is_err());
        let p = single_copy(CanonicalState::Bell, &QubitLayout::polarization()).unwrap();
        assert!(dephase_spatial(&p, 0.5).is_err());
    }

    #[test]
    fn polarization_dephasing_mirrors_spatial() {
        let p = single_copy(CanonicalState::Bell, &QubitLayout::polarization()).unwrap();
        let s = single_copy(CanonicalState::MaximallyMixed, &QubitLayout::spatial()).unwrap();
        let swapped_p =
            single_copy(CanonicalState::MaximallyMixed, &QubitLayout::polarization()).unwrap();
        let swapped_s = single_copy(CanonicalState::Bell, &QubitLayout::spatial()).unwrap();
        let a = dephase_polarization(&hes_product(&p, &s).unwrap(), 0.3).unwrap();
        let b = dephase_spatial(&hes_product(&swapped_p, &swapped_s).unwrap(), 0.3).unwrap();
        let (ap, _) = hes_marginals(&a).unwrap();
        let (_, bs) = hes_marginals(&b).unwrap();
        let relabel = QubitLayout::polarization();
        let bs_as_p = DensityMatrix::new(bs.matrix().clone(), relabel).unwrap();
        assert!(ap.matrix().max_abs_diff(bs_as_p.matrix()) < 1e-15);
    }
}
