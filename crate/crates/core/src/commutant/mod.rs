//! Super right- and left-commutants of a positive operator, explored with
//! small linear programs over the entries of `A`.
//!
//! The right side is `{A ≥ 0 : AK ≥ KA}`, the left side `{A ≥ 0 : AK ≤ KA}`.
//! Both are convex cones and multiplicative semigroups containing `I` and `K`.

mod lp;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::lattice::{commutator, inf_norm, is_invariant_ideal_within, PosMatrix, Tolerances};
use crate::perron::{certificate_from_digraph, IrreducibilityCertificate};
use lp::{maximize, LpOutcome, Objective, Slice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `AK ≥ KA`
    Right,
    /// `AK ≤ KA`
    Left,
}

impl Side {
    /// `AK − KA` for the right side, `KA − AK` for the left; nonnegative on
    /// members of the side.
    pub fn signed_commutator(self, a: &DMatrix<f64>, k: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Side::Right => commutator(a, k),
            Side::Left => commutator(k, a),
        }
    }
}

/// Outcome of a pinned feasibility problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(DMatrix<f64>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Which entries can be positive on members of one side.
#[derive(Debug, Clone, Serialize)]
pub struct CommutantRelation {
    pub side: Side,
    pub n: usize,
    /// `edges[i][j]` iff some member `A` has `A_ij > 0`.
    pub edges: Vec<Vec<bool>>,
    /// A member with `A_ij = 1` for each true off-diagonal edge.
    #[serde(skip)]
    pub witnesses: Vec<Vec<Option<DMatrix<f64>>>>,
}

impl CommutantRelation {
    /// Digraph with `j → i` for each edge `(i, j)`.
    pub fn digraph(&self) -> Digraph {
        let mut adj = vec![vec![false; self.n]; self.n];
        for (i, row) in self.edges.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                if e {
                    adj[j][i] = true;
                }
            }
        }
        Digraph::from_adjacency(&adj)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().filter(|e| **e).count()
    }

    /// Every witness matrix, in row-major edge order.
    pub fn witness_matrices(&self) -> impl Iterator<Item = &DMatrix<f64>> {
        self.witnesses.iter().flatten().flatten()
    }
}

fn check_index(n: usize, i: usize, j: usize) -> Result<()> {
    if i >= n || j >= n {
        return Err(Error::PreconditionViolation(format!(
            "entry ({}, {}) outside a {n}×{n} matrix",
            i + 1,
            j + 1
        )));
    }
    Ok(())
}

/// Side inequality for `a` with slack `tol.lp_eps` relative to the size of the products.
pub fn satisfies_side(a: &DMatrix<f64>, k: &DMatrix<f64>, side: Side, tol: &Tolerances) -> bool {
    let slack = tol.lp_eps * (inf_norm(a) * inf_norm(k)).max(1.0);
    a.iter().all(|v| *v >= 0.0) && side.signed_commutator(a, k).iter().all(|v| *v >= -slack)
}

/// Is there `A ≥ 0` on the given side with `A_ij = 1`? Indices are 0-based.
pub fn semi_commutant_feasible(
    k: &PosMatrix,
    side: Side,
    i: usize,
    j: usize,
    tol: &Tolerances,
) -> Result<Feasibility> {
    let n = k.n();
    check_index(n, i, j)?;
    if i == j {
        return Ok(Feasibility::Feasible(DMatrix::identity(n, n)));
    }
    let km = k.as_matrix();
    match maximize(km, side, Slice::Pin(i, j), &Objective::Zero, tol.lp_eps)? {
        LpOutcome::Optimal { a: w, .. } => {
            if !satisfies_side(&w, km, side, tol) || (w[(i, j)] - 1.0).abs() > tol.lp_eps {
                return Err(Error::SolverFailure(format!(
                    "witness for entry ({}, {}) fails verification",
                    i + 1,
                    j + 1
                )));
            }
            Ok(Feasibility::Feasible(w))
        }
        LpOutcome::Infeasible => Ok(Feasibility::Infeasible),
    }
}

/// Runs the pinned feasibility problem for every entry. The result must be
/// reflexive and transitive; a violation is reported, never repaired.
pub fn super_commutant_relation(
    k: &PosMatrix,
    side: Side,
    tol: &Tolerances,
) -> Result<CommutantRelation> {
    let n = k.n();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let outcomes: Vec<Result<Feasibility>> = cells
        .par_iter()
        .map(|&(i, j)| {
            semi_commutant_feasible(k, side, i, j, tol).map_err(|e| match e {
                Error::SolverFailure(msg) => {
                    Error::SolverFailure(format!("entry ({}, {}): {msg}", i + 1, j + 1))
                }
                other => other,
            })
        })
        .collect();

    let mut edges = vec![vec![false; n]; n];
    let mut witnesses = vec![vec![None; n]; n];
    for (&(i, j), outcome) in cells.iter().zip(outcomes) {
        if let Feasibility::Feasible(w) = outcome? {
            edges[i][j] = true;
            if i != j {
                witnesses[i][j] = Some(w);
            }
        }
    }

    for i in 0..n {
        if !edges[i][i] {
            return Err(Error::SolverFailure(format!(
                "relation is not reflexive at {}",
                i + 1
            )));
        }
        for j in 0..n {
            for l in 0..n {
                if edges[i][j] && edges[j][l] && !edges[i][l] {
                    return Err(Error::SolverFailure(format!(
                        "relation is not transitive: ({}, {}) and ({}, {}) without ({}, {})",
                        i + 1,
                        j + 1,
                        j + 1,
                        l + 1,
                        i + 1,
                        l + 1
                    )));
                }
            }
        }
    }
    Ok(CommutantRelation {
        side,
        n,
        edges,
        witnesses,
    })
}

/// Irreducibility of a whole side: the relation digraph is strongly
/// connected. A reducible side gets a coordinate set invariant under every
/// member, checked against `I`, `K` and every LP witness.
pub fn is_super_commutant_irreducible(
    k: &PosMatrix,
    side: Side,
    tol: &Tolerances,
) -> Result<IrreducibilityCertificate> {
    let relation = super_commutant_relation(k, side, tol)?;
    let cert = certificate_from_digraph(&relation.digraph());
    if let Some(w) = &cert.witness_ideal {
        let n = k.n();
        let identity = DMatrix::identity(n, n);
        let ok = [&identity, k.as_matrix()]
            .into_iter()
            .chain(relation.witness_matrices())
            .all(|m| {
                is_invariant_ideal_within(m, w, tol.lp_eps.max(tol.zero) * inf_norm(m).max(1.0))
            });
        if !ok {
            return Err(Error::SolverFailure(format!(
                "witness ideal {:?} is not invariant under the side",
                w.one_based()
            )));
        }
    }
    Ok(cert)
}

/// Largest total commutator mass `Σ (AK − KA)_ij` over members of the side
/// with `Σ A_ij = 1`.
fn side_gap(k: &PosMatrix, side: Side, tol: &Tolerances) -> Result<f64> {
    match maximize(
        k.as_matrix(),
        side,
        Slice::Normalize,
        &Objective::CommutatorMass,
        tol.lp_eps,
    )? {
        LpOutcome::Optimal { value, .. } => Ok(value.max(0.0)),
        LpOutcome::Infeasible => Err(Error::SolverFailure(
            "normalized commutant problem infeasible".into(),
        )),
    }
}

/// `(gap_right, gap_left)`. A zero gap on a side means every member of that
/// side commutes with `K`.
pub fn commutant_equality_gap(k: &PosMatrix, tol: &Tolerances) -> Result<(f64, f64)> {
    Ok((
        side_gap(k, Side::Right, tol)?,
        side_gap(k, Side::Left, tol)?,
    ))
}

#[derive(Debug, Clone)]
pub struct SemiCommutingSample {
    pub matrices: Vec<PosMatrix>,
    /// The cone holds nothing beyond nonnegative combinations of `I` and `K`.
    pub degenerate: bool,
}

/// Seeded samples from one side: `I` and `K` first, then LP vertices for
/// random objectives on the slice `Σ A_ij = 1`, then random convex
/// combinations of what came before.
pub fn sample_semi_commuting(
    k: &PosMatrix,
    side: Side,
    seed: u64,
    count: usize,
    tol: &Tolerances,
) -> Result<SemiCommutingSample> {
    if count == 0 {
        return Err(Error::PreconditionViolation(
            "sample count must be at least 1".into(),
        ));
    }
    let n = k.n();
    let n2 = n * n;
    let km = k.as_matrix();
    let identity = DMatrix::identity(n, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let vertex_target = count.saturating_sub(2).div_ceil(2).max(1);
    let mut vertices: Vec<DMatrix<f64>> = Vec::new();
    for _ in 0..vertex_target {
        let c: Vec<f64> = (0..n2).map(|_| rng.random::<f64>()).collect();
        match maximize(
            km,
            side,
            Slice::Normalize,
            &Objective::Entries(c),
            tol.lp_eps,
        )? {
            LpOutcome::Optimal { a: w, .. } => {
                if !vertices.iter().any(|v| (v - &w).amax() <= tol.lp_eps) {
                    vertices.push(w);
                }
            }
            LpOutcome::Infeasible => {
                return Err(Error::SolverFailure(
                    "sampling problem reported infeasible".into(),
                ));
            }
        }
    }

    let structural = [identity.clone(), km.clone()];
    let degenerate = vertices
        .iter()
        .all(|v| in_structural_cone(v, &identity, km, tol.lp_eps.max(1e-9)));

    let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(count);
    if degenerate {
        out.push(identity);
        if !in_structural_cone(km, &DMatrix::identity(n, n), &DMatrix::zeros(n, n), 1e-9) {
            out.push(km.clone());
        }
        out.truncate(count);
    } else {
        out.extend(structural.iter().cloned());
        out.extend(vertices.iter().cloned());
        out.truncate(count);
        while out.len() < count {
            let pool = out.len();
            let weights: Vec<f64> = (0..pool).map(|_| rng.random::<f64>()).collect();
            let total: f64 = weights.iter().sum();
            let mix = out
                .iter()
                .zip(&weights)
                .fold(DMatrix::zeros(n, n), |acc, (m, w)| acc + m * (*w / total));
            out.push(mix);
        }
    }

    let mut matrices = Vec::with_capacity(out.len());
    for m in out {
        if !satisfies_side(&m, km, side, tol) {
            return Err(Error::SolverFailure(
                "sample violates its side inequality".into(),
            ));
        }
        matrices.push(PosMatrix::from_dmatrix(m, tol)?);
    }
    Ok(SemiCommutingSample {
        matrices,
        degenerate,
    })
}

/// `v = αI + βK` with `α, β ≥ 0`, by least squares on the two coefficients.
fn in_structural_cone(v: &DMatrix<f64>, i: &DMatrix<f64>, k: &DMatrix<f64>, eps: f64) -> bool {
    let n = v.nrows();
    let basis = DMatrix::from_fn(n * n, 2, |r, c| {
        let (p, q) = (r / n, r % n);
        if c == 0 {
            i[(p, q)]
        } else {
            k[(p, q)]
        }
    });
    let target = nalgebra::DVector::from_fn(n * n, |r, _| v[(r / n, r % n)]);
    let Ok(coef) = basis.clone().svd(true, true).solve(&target, 1e-12) else {
        return false;
    };
    let residual = (&basis * &coef - &target).amax();
    residual <= eps * v.amax().max(1.0) && coef.iter().all(|c| *c >= -eps)
}
