//! Plain JSON shapes for matrices and vectors: row arrays and flat arrays.

use nalgebra::DMatrix;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use super::Vector;

pub fn rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = m.row(i).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

pub fn vector<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
    v.as_slice().serialize(s)
}

pub fn vectors<S: Serializer>(vs: &[Vector], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(vs.len()))?;
    for v in vs {
        seq.serialize_element(v.as_slice())?;
    }
    seq.end()
}

pub fn one_based<S: Serializer>(idx: &[usize], s: S) -> Result<S::Ok, S::Error> {
    idx.iter().map(|i| i + 1).collect::<Vec<_>>().serialize(s)
}
