#![allow(dead_code)]

use nalgebra::DMatrix;
use pf_lattice::{CoordinateIdeal, PosMatrix, Tolerances};
use proptest::prelude::*;

/// Sparse nonnegative `n × n` matrix: each entry is zero or in `[0.05, 3]`.
pub fn sparse_matrix(n: usize, density: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec((prop::bool::weighted(density), 0.05f64..3.0), n * n).prop_map(
        move |cells| {
            DMatrix::from_iterator(
                n,
                n,
                cells.into_iter().map(|(on, x)| if on { x } else { 0.0 }),
            )
        },
    )
}

pub fn pos(m: DMatrix<f64>) -> PosMatrix {
    PosMatrix::from_dmatrix(m, &Tolerances::default()).unwrap()
}

/// All `2ⁿ` coordinate ideals.
pub fn all_ideals(n: usize) -> impl Iterator<Item = CoordinateIdeal> {
    (0u64..1 << n).map(move |mask| CoordinateIdeal::from_mask(n, mask))
}

/// `A e_j` stays inside `S` for each `j ∈ S`, by multiplication.
pub fn invariant_by_multiplication(a: &DMatrix<f64>, s: &CoordinateIdeal, zero: f64) -> bool {
    let n = a.nrows();
    s.iter().all(|j| {
        let mut e = nalgebra::DVector::zeros(n);
        e[j] = 1.0;
        let image = a * e;
        (0..n).all(|i| s.contains(i) || image[i].abs() <= zero)
    })
}
