//! Finite-dimensional reducibility criteria for a semi-commuting pair, and
//! the strict comparison of spectral radii under an irreducible majorant.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::commutant::commutant_equality_gap;
use crate::error::{Error, Result};
use crate::lattice::{commutator, inf_norm, CoordinateIdeal, PosMatrix, Tolerances, Vector};
use crate::perron::{is_ideal_irreducible, require_irreducible};
use crate::spectral::{matrix_power, Spectral};

/// Relative gap below which a local radius counts as strictly smaller.
const STRICT_GAP: f64 = 1e-6;

/// Commutator mass above which a partner counts as strictly semi-commuting.
const GAP_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `K` is nilpotent.
    NilpotentPartner,
    /// Some `x > 0` has local radius under `K` below `r(K)`.
    LocalRadiusGap,
    /// The same for `Kᵀ`.
    DualLocalRadiusGap,
    /// `TK` is nilpotent.
    NilpotentProduct,
    /// Some `x > 0` has local radius under `T` below `r(TK)/r(K)`.
    ProductRatioGap,
    /// The same for `Tᵀ`.
    DualProductRatioGap,
    /// Some positive operator semi-commutes with `T` without commuting.
    StrictPartner,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectorHit {
    pub criterion: Criterion,
    /// Test vector (0-based index into the probe list) or gap value.
    pub detail: String,
    /// Nontrivial ideal invariant under `T`.
    pub witness: CoordinateIdeal,
}

fn is_nilpotent(a: &DMatrix<f64>) -> bool {
    let norm = inf_norm(a);
    norm == 0.0
        || inf_norm(&matrix_power(a, a.nrows() as u64)) <= 1e-7 * norm.powi(a.nrows() as i32)
}

/// Probe vectors `x > 0`: the coordinate vectors and the all-ones vector.
fn probes(n: usize) -> Vec<Vector> {
    let mut v: Vec<Vector> = (0..n)
        .map(|i| {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect();
    v.push(Vector::from_element(n, 1.0));
    v
}

/// First probe whose exact local radius under `a` lies below `bound`.
fn local_gap(a: &Spectral, bound: f64, tol: &Tolerances) -> Result<Option<(usize, f64)>> {
    for (i, x) in probes(a.schur().n()).iter().enumerate() {
        let r = a.local_radius_exact(x, tol)?;
        if r < bound * (1.0 - STRICT_GAP) {
            return Ok(Some((i, r)));
        }
    }
    Ok(None)
}

fn describe(probe: usize, n: usize, radius: f64) -> String {
    if probe == n {
        format!("x = (1, …, 1), local radius {radius}")
    } else {
        format!("x = e{}, local radius {radius}", probe + 1)
    }
}

/// Evaluates every checkable criterion that forces `T` to have a
/// nontrivial invariant ideal, and attaches such an ideal to each hit.
pub fn reducibility_detectors(
    t: &PosMatrix,
    k: &PosMatrix,
    tol: &Tolerances,
) -> Result<Vec<DetectorHit>> {
    let n = t.n();
    if k.n() != n {
        return Err(Error::PreconditionViolation(
            "T and K differ in dimension".into(),
        ));
    }
    if t.is_zero(tol) || k.is_zero(tol) {
        return Err(Error::PreconditionViolation(
            "T and K must be nonzero".into(),
        ));
    }
    let floor = tol.zero * t.inf_norm() * k.inf_norm();
    let c = commutator(t.as_matrix(), k.as_matrix());
    if c.iter().any(|v| *v > floor) && c.iter().any(|v| *v < -floor) {
        return Err(Error::PreconditionViolation(
            "T and K do not semi-commute".into(),
        ));
    }

    let mut found: Vec<(Criterion, String)> = Vec::new();
    let km = k.as_matrix();
    let tm = t.as_matrix();
    let tk = tm * km;

    let k_nilpotent = is_nilpotent(km);
    let rk = if k_nilpotent {
        0.0
    } else {
        Spectral::new(km)?.radius()
    };
    if k_nilpotent {
        found.push((Criterion::NilpotentPartner, "K^n = 0".into()));
    } else {
        if let Some((i, r)) = local_gap(&Spectral::new(km)?, rk, tol)? {
            found.push((Criterion::LocalRadiusGap, describe(i, n, r)));
        }
        if let Some((i, r)) = local_gap(&Spectral::new(&km.transpose())?, rk, tol)? {
            found.push((Criterion::DualLocalRadiusGap, describe(i, n, r)));
        }
        if is_nilpotent(&tk) {
            found.push((Criterion::NilpotentProduct, "(TK)^n = 0".into()));
        } else {
            let ratio = Spectral::new(&tk)?.radius() / rk;
            if let Some((i, r)) = local_gap(&Spectral::new(tm)?, ratio, tol)? {
                found.push((Criterion::ProductRatioGap, describe(i, n, r)));
            }
            if let Some((i, r)) = local_gap(&Spectral::new(&tm.transpose())?, ratio, tol)? {
                found.push((Criterion::DualProductRatioGap, describe(i, n, r)));
            }
        }
    }
    let (right, left) = commutant_equality_gap(t, tol)?;
    if right.max(left) > GAP_THRESHOLD {
        found.push((Criterion::StrictPartner, format!("gaps ({right}, {left})")));
    }

    if found.is_empty() {
        return Ok(Vec::new());
    }
    let cert = is_ideal_irreducible([t], tol)?;
    let witness = match (cert.irreducible, cert.witness_ideal) {
        (false, Some(w)) if cert_checks(&w, tm, tol) => w,
        _ => {
            return Err(Error::HypothesisViolated(format!(
                "criteria {:?} triggered but T has no invariant coordinate ideal",
                found.iter().map(|f| f.0).collect::<Vec<_>>()
            )))
        }
    };
    Ok(found
        .into_iter()
        .map(|(criterion, detail)| DetectorHit {
            criterion,
            detail,
            witness: witness.clone(),
        })
        .collect())
}

fn cert_checks(w: &CoordinateIdeal, t: &DMatrix<f64>, tol: &Tolerances) -> bool {
    !w.is_trivial() && crate::lattice::is_invariant_ideal(t, w, tol)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonReport {
    pub radius_a: f64,
    pub radius_b: f64,
    /// `r(A) − r(B)`.
    pub margin: f64,
    /// `‖A − B‖∞ ≤ tol.zero`
    pub identical: bool,
    /// Strict decrease when `B ≠ A`, equality otherwise (to `1e-12` relative).
    pub holds: bool,
}

/// Compares spectral radii of an irreducible `A` and a minorant `0 ≤ B ≤ A`.
pub fn comparison_check(
    a: &PosMatrix,
    b: &PosMatrix,
    tol: &Tolerances,
) -> Result<ComparisonReport> {
    if a.n() != b.n() {
        return Err(Error::PreconditionViolation(
            "A and B differ in dimension".into(),
        ));
    }
    require_irreducible(a, tol, "comparison_check")?;
    let diff = a.as_matrix() - b.as_matrix();
    if diff.iter().any(|v| *v < -tol.zero) {
        return Err(Error::PreconditionViolation(
            "B is not dominated by A".into(),
        ));
    }
    let radius_a = Spectral::new(a.as_matrix())?.radius();
    let radius_b = Spectral::new(b.as_matrix())?.radius();
    let margin = radius_a - radius_b;
    let identical = inf_norm(&diff) <= tol.zero;
    let holds = if identical {
        margin.abs() <= 1e-12 * radius_a.max(1.0)
    } else {
        margin > 0.0
    };
    Ok(ComparisonReport {
        radius_a,
        radius_b,
        margin,
        identical,
        holds,
    })
}
