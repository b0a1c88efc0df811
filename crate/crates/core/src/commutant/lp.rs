//! Linear programs over the entries of a member `A` of one side, solved by
//! the revised simplex method of `microlp`.
//!
//! Variables are the `n²` entries of `A`, all nonnegative. Each entry of the
//! signed commutator gives one inequality `±(AK − KA)_pq ≥ 0`. `K` is scaled
//! to unit norm first; the cone does not depend on the scale.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;

use super::Side;
use crate::error::{Error, Result};
use crate::lattice::inf_norm;

/// Extra equality cutting the cone down to a bounded or pinned slice.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Slice {
    /// `A_ij = 1`.
    Pin(usize, usize),
    /// `Σ A_ij = 1`.
    Normalize,
}

#[derive(Debug, Clone)]
pub(crate) enum Objective {
    /// Feasibility only.
    Zero,
    /// `Σ c_ij A_ij`, row-major coefficients.
    Entries(Vec<f64>),
    /// `Σ_pq ±(AK − KA)_pq`, in units of the unscaled `K`.
    CommutatorMass,
}

#[derive(Debug, Clone)]
pub(crate) enum LpOutcome {
    Optimal { a: DMatrix<f64>, value: f64 },
    Infeasible,
}

/// Maximizes the objective over the slice of the side. Entries at or below
/// `eps` in the optimum are set to zero.
pub(crate) fn maximize(
    k: &DMatrix<f64>,
    side: Side,
    slice: Slice,
    objective: &Objective,
    eps: f64,
) -> Result<LpOutcome> {
    let n = k.nrows();
    let norm = inf_norm(k);
    let ks = if norm > 0.0 { k / norm } else { k.clone() };
    let sign = match side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };

    let coefficients: Vec<f64> = match objective {
        Objective::Zero => vec![0.0; n * n],
        Objective::Entries(c) => c.clone(),
        // ∂/∂a_uv of Σ_pq (AK − KA)_pq is (row sum v of K) − (column sum u of K).
        Objective::CommutatorMass => (0..n * n)
            .map(|idx| {
                let (u, v) = (idx / n, idx % n);
                sign * (ks.row(v).sum() - ks.column(u).sum())
            })
            .collect(),
    };

    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = coefficients
        .iter()
        .map(|&c| problem.add_var(c, (0.0, f64::INFINITY)))
        .collect();

    let mut row = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            row.iter_mut().for_each(|v| *v = 0.0);
            // (AK)_pq = Σ_v a_pv K_vq
            for v in 0..n {
                row[p * n + v] += sign * ks[(v, q)];
            }
            // (KA)_pq = Σ_u K_pu a_uq
            for u in 0..n {
                row[u * n + q] -= sign * ks[(p, u)];
            }
            let terms: Vec<_> = row
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| (vars[i], *c))
                .collect();
            if !terms.is_empty() {
                problem.add_constraint(terms.as_slice(), ComparisonOp::Ge, 0.0);
            }
        }
    }
    match slice {
        Slice::Pin(i, j) => problem.add_constraint([(vars[i * n + j], 1.0)], ComparisonOp::Eq, 1.0),
        Slice::Normalize => {
            let all: Vec<_> = vars.iter().map(|v| (*v, 1.0)).collect();
            problem.add_constraint(all.as_slice(), ComparisonOp::Eq, 1.0);
        }
    }

    match problem.solve() {
        Ok(solution) => {
            let a = DMatrix::from_fn(n, n, |i, j| {
                let v = *solution.var_value(vars[i * n + j]);
                if v <= eps {
                    0.0
                } else {
                    v
                }
            });
            let mut value = solution.objective();
            if matches!(objective, Objective::CommutatorMass) {
                value *= norm;
            }
            Ok(LpOutcome::Optimal { a, value })
        }
        Err(microlp::Error::Infeasible) => Ok(LpOutcome::Infeasible),
        Err(microlp::Error::Unbounded) => Err(Error::SolverFailure(
            "objective unbounded on the slice".into(),
        )),
        Err(microlp::Error::InternalError(e)) => Err(Error::SolverFailure(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pins() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        // Right side of diag(2, 1): A_12 must vanish, A_21 is free.
        assert!(matches!(
            maximize(&k, Side::Right, Slice::Pin(0, 1), &Objective::Zero, 1e-9).unwrap(),
            LpOutcome::Infeasible
        ));
        match maximize(&k, Side::Right, Slice::Pin(1, 0), &Objective::Zero, 1e-9).unwrap() {
            LpOutcome::Optimal { a, .. } => assert_eq!(a[(1, 0)], 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn commutator_mass_matches_direct_evaluation() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        match maximize(
            &k,
            Side::Right,
            Slice::Normalize,
            &Objective::CommutatorMass,
            1e-9,
        )
        .unwrap()
        {
            LpOutcome::Optimal { a, value } => {
                let direct = (&a * &k - &k * &a).sum();
                assert!((value - direct).abs() < 1e-12);
                assert!((value - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
