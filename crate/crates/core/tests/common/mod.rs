#![allow(dead_code)]

use collectikit::qmat::{ComplexMatrix, DensityMatrix, QubitLayout, C64};
use proptest::prelude::*;

/// `G G† / tr(G G†)` from raw entries of `G`.
pub fn density_from_entries(entries: &[(f64, f64)], layout: QubitLayout) -> DensityMatrix {
    let dim = layout.dim();
    let g = ComplexMatrix::from_fn(dim, |r, c| {
        let (re, im) = entries[r * dim + c];
        C64::new(re, im)
    })
    .unwrap();
    let gg = g.matmul(&g.adjoint()).unwrap();
    let tr = gg.trace().re;
    let m = gg.scale(1.0 / tr);
    // symmetrize away rounding so the strict Hermiticity check holds
    let herm = m.add(&m.adjoint()).unwrap().scale(0.5);
    DensityMatrix::new(herm, layout).unwrap()
}

pub fn arb_density(layout: QubitLayout) -> impl Strategy<Value = DensityMatrix> {
    let dim = layout.dim();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
        .prop_filter("nonzero", |v| {
            v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
        })
        .prop_map(move |v| density_from_entries(&v, layout.clone()))
}
