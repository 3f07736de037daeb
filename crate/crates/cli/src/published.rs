//! Published reference values, emitted only as `published_*` annotation
//! columns and never mixed into computed ones.

use collectikit::states::CanonicalState;

/// One published witness value: measured `w ± sigma` and the quoted theory `w_th`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Published {
    pub w: f64,
    pub sigma: f64,
    pub w_th: f64,
}

const fn entry(w: f64, sigma: f64, w_th: f64) -> Published {
    Published { w, sigma, w_th }
}

/// The three characteristic states.
pub const STATES: [(CanonicalState, Published); 3] = [
    (CanonicalState::Bell, entry(-0.21, 0.03, -0.25)),
    (CanonicalState::Separable, entry(-0.01, 0.03, 0.00)),
    (CanonicalState::MaximallyMixed, entry(0.69, 0.06, 0.75)),
];

/// Werner family, keyed by the mixing weight `p`.
pub const WERNER: [(f64, Published); 6] = [
    (0.0, entry(0.69, 0.06, 0.75)),
    (0.2, entry(0.65, 0.06, 0.71)),
    (0.4, entry(0.55, 0.06, 0.59)),
    (0.6, entry(0.37, 0.06, 0.39)),
    (0.8, entry(0.11, 0.06, 0.11)),
    (1.0, entry(-0.21, 0.03, -0.25)),
];

/// Quality check, keyed by (polarization pure, spatial pure).
pub const QUALITY: [((bool, bool), Published); 4] = [
    ((true, true), entry(-0.21, 0.03, -0.25)),
    ((true, false), entry(0.71, 0.06, 0.75)),
    ((false, true), entry(0.70, 0.06, 0.75)),
    ((false, false), entry(0.69, 0.06, 0.75)),
];

/// Endpoints the published Werner theory curve interpolates between.
pub const WERNER_ENDPOINTS: (f64, f64) = (-0.25, 0.75);

pub fn for_state(kind: CanonicalState) -> Option<Published> {
    STATES.iter().find(|(k, _)| *k == kind).map(|(_, p)| *p)
}

pub fn for_werner(p: f64) -> Option<Published> {
    WERNER
        .iter()
        .find(|(q, _)| (q - p).abs() < 1e-9)
        .map(|(_, e)| *e)
}

pub fn for_quality(pol_pure: bool, spatial_pure: bool) -> Published {
    QUALITY
        .iter()
        .find(|(k, _)| *k == (pol_pure, spatial_pure))
        .map(|(_, e)| *e)
        .expect("all four combinations are tabulated")
}
