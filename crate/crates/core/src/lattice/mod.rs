//! Order structure of ℝⁿ: nonnegative operators, coordinate ideals and the
//! predicates the rest of the crate is phrased in.
//!
//! Every closed ideal of ℝⁿ with the coordinatewise order is a coordinate
//! subspace `I_S = span{e_i : i ∈ S}`, so ideals are stored as index sets.
//! Indices are 0-based in the API and 1-based in serialized output.

pub mod io;
pub mod ser;

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Real column vector; also used for functionals acting by the dot product.
pub type Vector = DVector<f64>;

/// Numerical thresholds shared by every routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute threshold below which an entry counts as zero.
    pub zero: f64,
    /// Relative modulus gap used to group peripheral eigenvalues.
    pub peripheral_band: f64,
    /// Cosine-distance threshold for proportionality clustering.
    pub cluster: f64,
    /// Slack allowed on LP constraints.
    pub lp_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero: 1e-9,
            peripheral_band: 1e-6,
            cluster: 1e-8,
            lp_eps: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.zero, self.peripheral_band, self.cluster, self.lp_eps];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidMatrix(format!(
                "tolerances must be finite and strictly positive: {self:?}"
            )));
        }
        if self.zero >= 1.0 {
            return Err(Error::InvalidMatrix(
                "tolerance `zero` must be below 1".into(),
            ));
        }
        Ok(())
    }

    /// Same tolerances with `zero` replaced.
    pub fn with_zero(mut self, zero: f64) -> Self {
        self.zero = zero;
        self
    }
}

/// Dense entrywise-nonnegative `n × n` matrix, `n ≥ 2`.
#[derive(Clone, PartialEq)]
pub struct PosMatrix {
    inner: DMatrix<f64>,
}

impl PosMatrix {
    /// Builds from rows. Entries in `(-tol.zero, 0)` are clamped to zero;
    /// anything more negative, non-finite or a ragged/non-square shape is rejected.
    pub fn from_rows(rows: &[Vec<f64>], tol: &Tolerances) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
        }
        let inner = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_dmatrix(inner, tol)
    }

    pub fn from_dmatrix(mut inner: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        if !inner.is_square() {
            return Err(Error::InvalidMatrix(format!(
                "matrix is {}x{}, expected square",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.nrows() < 2 {
            return Err(Error::InvalidMatrix(format!(
                "dimension {} is below 2",
                inner.nrows()
            )));
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let v = inner[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) is not finite",
                        i + 1,
                        j + 1
                    )));
                }
                if v < 0.0 {
                    if v > -tol.zero {
                        inner[(i, j)] = 0.0;
                    } else {
                        return Err(Error::InvalidMatrix(format!(
                            "entry ({}, {}) = {v} is negative",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(PosMatrix { inner })
    }

    /// Identity of dimension `n`.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 2, "dimension must be at least 2");
        PosMatrix {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| self.inner.row(i).iter().copied().collect())
            .collect()
    }

    pub fn transpose(&self) -> PosMatrix {
        PosMatrix {
            inner: self.inner.transpose(),
        }
    }

    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.inner)
    }

    pub fn is_zero(&self, tol: &Tolerances) -> bool {
        self.inner.iter().all(|v| *v <= tol.zero)
    }

    /// Product of two nonnegative matrices (still nonnegative).
    pub fn mul(&self, other: &PosMatrix) -> PosMatrix {
        PosMatrix {
            inner: &self.inner * &other.inner,
        }
    }

    pub fn add(&self, other: &PosMatrix) -> PosMatrix {
        PosMatrix {
            inner: &self.inner + &other.inner,
        }
    }

    pub fn scale(&self, c: f64) -> PosMatrix {
        assert!(c >= 0.0);
        PosMatrix {
            inner: &self.inner * c,
        }
    }
}

impl fmt::Debug for PosMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PosMatrix{:?}", self.rows())
    }
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// `AB - BA`.
pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// A coordinate ideal `I_S` of ℝⁿ, stored as its support `S`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoordinateIdeal {
    n: usize,
    support: BTreeSet<usize>,
}

impl CoordinateIdeal {
    /// Ideal from 0-based coordinates. Panics on an index `>= n`.
    pub fn new(n: usize, coords: impl IntoIterator<Item = usize>) -> Self {
        let support: BTreeSet<usize> = coords.into_iter().collect();
        if let Some(&max) = support.iter().next_back() {
            assert!(max < n, "coordinate {max} out of range for dimension {n}");
        }
        CoordinateIdeal { n, support }
    }

    /// Ideal from 1-based coordinates, as written in reports and fixtures.
    pub fn from_one_based(n: usize, coords: &[usize]) -> Self {
        Self::new(n, coords.iter().map(|c| c - 1))
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, [])
    }

    pub fn full(n: usize) -> Self {
        Self::new(n, 0..n)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.support.contains(&i)
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.iter().copied()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.support.iter().map(|i| i + 1).collect()
    }

    /// `{0}` and the whole space are the trivial ideals.
    pub fn is_trivial(&self) -> bool {
        self.support.is_empty() || self.support.len() == self.n
    }

    pub fn is_subset(&self, other: &CoordinateIdeal) -> bool {
        self.support.is_subset(&other.support)
    }

    pub fn union(&self, other: &CoordinateIdeal) -> CoordinateIdeal {
        CoordinateIdeal {
            n: self.n,
            support: self.support.union(&other.support).copied().collect(),
        }
    }

    pub fn with(&self, i: usize) -> CoordinateIdeal {
        let mut next = self.clone();
        assert!(i < self.n);
        next.support.insert(i);
        next
    }

    /// Bitmask form; only meaningful for `n <= 64`.
    pub fn mask(&self) -> u64 {
        self.support.iter().fold(0u64, |m, i| m | (1u64 << i))
    }

    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self::new(n, (0..n).filter(|i| mask & (1u64 << i) != 0))
    }
}

impl fmt::Debug for CoordinateIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I{:?}", self.one_based())
    }
}

impl Serialize for CoordinateIdeal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoordinateIdeal {
    /// Deserializes the 1-based index list. The dimension is not part of the
    /// serialized form, so it is set to `max index`; callers re-embed with
    /// [`CoordinateIdeal::new`] when the ambient dimension matters.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<usize>::deserialize(d)?;
        if coords.contains(&0) {
            return Err(serde::de::Error::custom("coordinates are 1-based"));
        }
        let n = coords.iter().copied().max().unwrap_or(0);
        Ok(CoordinateIdeal::from_one_based(n, &coords))
    }
}

/// Coordinates where `|v_i| > tol.zero`: the ideal generated by `v`.
pub fn support_of(v: &Vector, tol: &Tolerances) -> CoordinateIdeal {
    CoordinateIdeal::new(
        v.len(),
        v.iter()
            .enumerate()
            .filter(|(_, x)| x.abs() > tol.zero)
            .map(|(i, _)| i),
    )
}

/// Ideal generated by a set of vectors: the union of their supports.
pub fn generated_ideal<'a>(
    n: usize,
    vectors: impl IntoIterator<Item = &'a Vector>,
    tol: &Tolerances,
) -> CoordinateIdeal {
    vectors
        .into_iter()
        .fold(CoordinateIdeal::empty(n), |acc, v| {
            acc.union(&support_of(v, tol))
        })
}

/// `A · I_S ⊆ I_S`, i.e. `|A_ij| <= tol.zero` whenever `i ∉ S` and `j ∈ S`.
///
/// Takes a general real matrix so the same test applies to commutators.
pub fn is_invariant_ideal(a: &DMatrix<f64>, ideal: &CoordinateIdeal, tol: &Tolerances) -> bool {
    is_invariant_ideal_within(a, ideal, tol.zero)
}

pub(crate) fn is_invariant_ideal_within(
    a: &DMatrix<f64>,
    ideal: &CoordinateIdeal,
    threshold: f64,
) -> bool {
    ideal.iter().all(|j| {
        (0..a.nrows())
            .filter(|i| !ideal.contains(*i))
            .all(|i| a[(i, j)].abs() <= threshold)
    })
}

/// First coordinate (0-based) that is not strictly positive, if any.
pub fn quasi_interior_violation(v: &Vector, tol: &Tolerances) -> Option<usize> {
    v.iter().position(|x| *x <= tol.zero)
}

/// In ℝⁿ a quasi-interior point is a strictly positive vector.
pub fn is_quasi_interior(v: &Vector, tol: &Tolerances) -> bool {
    quasi_interior_violation(v, tol).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    pub(crate) fn swap_plus_identity() -> PosMatrix {
        PosMatrix::from_rows(
            &[
                vec![0.0, 1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ],
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn support_examples() {
        let v = Vector::from_vec(vec![1.0, 0.0, 2.0, 0.0]);
        assert_eq!(support_of(&v, &tol()).one_based(), vec![1, 3]);
        assert!(support_of(&Vector::zeros(4), &tol()).is_empty());
        let x0 = Vector::from_element(4, 1.0);
        assert_eq!(support_of(&x0, &tol()).one_based(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn invariance_examples() {
        let upper = PosMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]], &tol()).unwrap();
        assert!(is_invariant_ideal(
            upper.as_matrix(),
            &CoordinateIdeal::from_one_based(2, &[1]),
            &tol()
        ));
        let ones = DMatrix::from_element(4, 4, 1.0);
        for mask in 1..15u64 {
            let s = CoordinateIdeal::from_mask(4, mask);
            assert!(!is_invariant_ideal(&ones, &s, &tol()));
        }
        let k = swap_plus_identity();
        assert!(is_invariant_ideal(
            k.as_matrix(),
            &CoordinateIdeal::from_one_based(4, &[3, 4]),
            &tol()
        ));
    }

    #[test]
    fn quasi_interior_examples() {
        assert!(is_quasi_interior(&Vector::from_element(4, 1.0), &tol()));
        let v = Vector::from_vec(vec![1.0, 0.0, 1.0, 1.0]);
        assert_eq!(quasi_interior_violation(&v, &tol()), Some(1));
        assert!(is_quasi_interior(
            &Vector::from_vec(vec![1.0, 1.0, 2.0, 2.0]),
            &tol()
        ));
    }

    #[test]
    fn construction_clamps_and_rejects() {
        let m = PosMatrix::from_rows(&[vec![1.0, -1e-12], vec![0.0, 1.0]], &tol()).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert!(PosMatrix::from_rows(&[vec![1.0, -1e-3], vec![0.0, 1.0]], &tol()).is_err());
        assert!(PosMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0]], &tol()).is_err());
        assert!(PosMatrix::from_rows(&[vec![1.0]], &tol()).is_err());
        assert!(PosMatrix::from_rows(&[vec![1.0, f64::NAN], vec![0.0, 1.0]], &tol()).is_err());
    }

    #[test]
    fn trivial_ideals() {
        assert!(CoordinateIdeal::empty(3).is_trivial());
        assert!(CoordinateIdeal::full(3).is_trivial());
        assert!(!CoordinateIdeal::from_one_based(3, &[2]).is_trivial());
    }

    #[test]
    fn tolerances_validate() {
        assert!(tol().validate().is_ok());
        assert!(tol().with_zero(0.0).validate().is_err());
        assert!(tol().with_zero(2.0).validate().is_err());
    }
}
