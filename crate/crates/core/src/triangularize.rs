//! Chains of invariant coordinate ideals and nilpotency certificates for
//! commutators of semi-commuting positive pairs.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::lattice::{
    commutator, inf_norm, is_invariant_ideal_within, CoordinateIdeal, PosMatrix, Tolerances,
};
use crate::spectral::spectral_radius;

/// Strictly increasing coordinate ideals from `∅` to the full set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealChain {
    pub links: Vec<CoordinateIdeal>,
    /// Consecutive links differ by exactly one coordinate.
    pub maximal: bool,
}

impl IdealChain {
    pub fn new(links: Vec<CoordinateIdeal>) -> Result<Self> {
        let first = links
            .first()
            .ok_or_else(|| Error::PreconditionViolation("empty chain".into()))?;
        let n = first.dim();
        if !first.is_empty() || links.last().map(|l| l.len()) != Some(n) {
            return Err(Error::PreconditionViolation(
                "chain must run from the empty set to the full set".into(),
            ));
        }
        for w in links.windows(2) {
            if w[1].dim() != n || !w[0].is_subset(&w[1]) || w[0].len() == w[1].len() {
                return Err(Error::PreconditionViolation(format!(
                    "links {:?} and {:?} are not strictly nested",
                    w[0].one_based(),
                    w[1].one_based()
                )));
            }
        }
        let maximal = links.len() == n + 1;
        Ok(IdealChain { links, maximal })
    }

    pub fn dim(&self) -> usize {
        self.links[0].dim()
    }

    /// Coordinates of each gap `M \ M₋`, in chain order.
    pub fn gaps(&self) -> Vec<Vec<usize>> {
        self.links
            .windows(2)
            .map(|w| w[1].iter().filter(|&i| !w[0].contains(i)).collect())
            .collect()
    }

    /// Union of all links strictly contained in link `k`.
    pub fn predecessor(&self, k: usize) -> CoordinateIdeal {
        self.links[..k]
            .iter()
            .fold(CoordinateIdeal::empty(self.dim()), |acc, l| acc.union(l))
    }

    /// Order in which coordinates enter the chain.
    pub fn coordinate_order(&self) -> Vec<usize> {
        self.gaps().into_iter().flatten().collect()
    }

    pub fn all_invariant(&self, a: &DMatrix<f64>, threshold: f64) -> bool {
        self.links
            .iter()
            .all(|l| is_invariant_ideal_within(a, l, threshold))
    }
}

fn block(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Chain of `T`-invariant coordinate ideals obtained by adding the strongly
/// connected components of the support digraph sinks-first. Every quotient
/// block is irreducible, so no invariant coordinate ideal fits between
/// consecutive links.
pub fn invariant_ideal_chain(t: &PosMatrix, tol: &Tolerances) -> IdealChain {
    let n = t.n();
    let g = Digraph::from_supports(n, [t.as_matrix()], tol.zero);
    let mut links = vec![CoordinateIdeal::empty(n)];
    for comp in g.closure_order() {
        let sub = block(t.as_matrix(), &comp);
        assert!(
            Digraph::from_supports(comp.len(), [&sub], tol.zero).is_strongly_connected(),
            "quotient block {comp:?} is reducible"
        );
        let next = comp.iter().fold(
            links
                .last()
                .expect("chain starts with the empty link")
                .clone(),
            |acc, &i| acc.with(i),
        );
        links.push(next);
    }
    IdealChain::new(links).expect("component closure order yields a nested chain")
}

/// Refines `chain` by single coordinates inside each gap, in increasing
/// coordinate order. Allowed only where the quotient block of `s` vanishes.
pub fn refine_to_maximal_chain(
    chain: &IdealChain,
    s: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<IdealChain> {
    let threshold = tol.zero * inf_norm(s);
    let mut links = vec![chain.links[0].clone()];
    for gap in chain.gaps() {
        let magnitude = block(s, &gap).amax();
        if magnitude > threshold {
            return Err(Error::QuotientNotScalarZero {
                coords: gap.iter().map(|i| i + 1).collect(),
                magnitude,
            });
        }
        for i in gap {
            let next = links.last().expect("nonempty").with(i);
            links.push(next);
        }
    }
    let refined = IdealChain::new(links)?;
    if !refined.all_invariant(s, threshold) {
        return Err(Error::HypothesisViolated(
            "refined chain is not invariant under the commutator".into(),
        ));
    }
    Ok(refined)
}

/// Evidence that `S = TK − KT` is nilpotent: a maximal chain of
/// `S`-invariant coordinate ideals, under whose order `S` is strictly upper
/// triangular.
#[derive(Debug, Clone, Serialize)]
pub struct NilpotencyCertificate {
    #[serde(serialize_with = "crate::lattice::ser::rows")]
    pub commutator: DMatrix<f64>,
    pub chain: IdealChain,
    /// Coordinate order making the commutator strictly upper triangular.
    #[serde(serialize_with = "crate::lattice::ser::one_based")]
    pub permuted_form: Vec<usize>,
    pub radius: f64,
    /// Smallest `p` with `‖S^p‖∞ ≤ 1e-7 ‖S‖∞^p`.
    pub index: usize,
}

impl NilpotencyCertificate {
    /// The commutator with rows and columns in chain order.
    pub fn permuted_commutator(&self) -> DMatrix<f64> {
        let o = &self.permuted_form;
        DMatrix::from_fn(o.len(), o.len(), |i, j| self.commutator[(o[i], o[j])])
    }
}

fn nilpotency_index(s: &DMatrix<f64>) -> Option<usize> {
    let n = s.nrows();
    let norm = inf_norm(s);
    if norm == 0.0 {
        return Some(1);
    }
    let mut power = s.clone();
    for p in 1..=n {
        if inf_norm(&power) <= 1e-7 * norm.powi(p as i32) {
            return Some(p);
        }
        power = &power * s;
    }
    None
}

/// Certifies that the commutator of a semi-commuting pair is nilpotent.
///
/// Entries of `TK − KT` below `tol.zero · ‖T‖∞ ‖K‖∞` are treated as zero.
pub fn commutator_nilpotency(
    t: &PosMatrix,
    k: &PosMatrix,
    tol: &Tolerances,
) -> Result<NilpotencyCertificate> {
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
    let s =
        commutator(t.as_matrix(), k.as_matrix()).map(|v| if v.abs() <= floor { 0.0 } else { v });
    if s.iter().any(|v| *v > 0.0) && s.iter().any(|v| *v < 0.0) {
        return Err(Error::PreconditionViolation(
            "TK − KT has entries of both signs; the pair is not semi-commuting".into(),
        ));
    }

    let sum = t.add(k);
    let chain = invariant_ideal_chain(&sum, tol);
    if !chain.all_invariant(t.as_matrix(), tol.zero)
        || !chain.all_invariant(k.as_matrix(), tol.zero)
    {
        return Err(Error::HypothesisViolated(
            "chain links are not invariant under T and K".into(),
        ));
    }
    let refined = refine_to_maximal_chain(&chain, &s, tol)?;
    let permuted_form = refined.coordinate_order();

    let s_norm = inf_norm(&s);
    let radius = spectral_radius(&s)?;
    if radius > 1e-6 * s_norm.max(1.0) {
        return Err(Error::HypothesisViolated(format!(
            "commutator has spectral radius {radius:e}"
        )));
    }
    let index = nilpotency_index(&s).ok_or_else(|| {
        Error::HypothesisViolated("commutator powers do not vanish by the dimension".into())
    })?;
    Ok(NilpotencyCertificate {
        commutator: s,
        chain: refined,
        permuted_form,
        radius,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn pm(rows: &[&[f64]]) -> PosMatrix {
        PosMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), &tol()).unwrap()
    }

    fn ones4() -> PosMatrix {
        pm(&[&[1.0; 4], &[1.0; 4], &[1.0; 4], &[1.0; 4]])
    }

    fn swap_plus_identity() -> PosMatrix {
        pm(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ])
    }

    fn links(c: &IdealChain) -> Vec<Vec<usize>> {
        c.links.iter().map(|l| l.one_based()).collect()
    }

    #[test]
    fn chains_of_examples() {
        let upper = pm(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let c = invariant_ideal_chain(&upper, &tol());
        assert_eq!(links(&c), vec![vec![], vec![1], vec![1, 2]]);
        assert!(c.maximal);

        let c = invariant_ideal_chain(&ones4(), &tol());
        assert_eq!(links(&c), vec![vec![], vec![1, 2, 3, 4]]);
        assert!(!c.maximal);

        let c = invariant_ideal_chain(&swap_plus_identity(), &tol());
        assert_eq!(
            links(&c),
            vec![vec![], vec![1, 2], vec![1, 2, 3], vec![1, 2, 3, 4]]
        );
        for l in &c.links {
            assert!(is_invariant_ideal_within(
                swap_plus_identity().as_matrix(),
                l,
                0.0
            ));
        }
    }

    #[test]
    fn predecessor_is_previous_link() {
        let c = invariant_ideal_chain(&swap_plus_identity(), &tol());
        for k in 1..c.links.len() {
            assert_eq!(c.predecessor(k), c.links[k - 1]);
        }
    }

    #[test]
    fn refinement_examples() {
        let zero = DMatrix::zeros(2, 2);
        let c = IdealChain::new(vec![
            CoordinateIdeal::empty(2),
            CoordinateIdeal::from_one_based(2, &[1]),
            CoordinateIdeal::full(2),
        ])
        .unwrap();
        assert_eq!(refine_to_maximal_chain(&c, &zero, &tol()).unwrap(), c);

        let coarse =
            IdealChain::new(vec![CoordinateIdeal::empty(4), CoordinateIdeal::full(4)]).unwrap();
        let r = refine_to_maximal_chain(&coarse, &DMatrix::zeros(4, 4), &tol()).unwrap();
        assert_eq!(
            links(&r),
            vec![vec![], vec![1], vec![1, 2], vec![1, 2, 3], vec![1, 2, 3, 4]]
        );
        assert!(r.maximal);

        let chain = invariant_ideal_chain(&swap_plus_identity(), &tol());
        let s = commutator(ones4().as_matrix(), swap_plus_identity().as_matrix());
        let r = refine_to_maximal_chain(&chain, &s, &tol()).unwrap();
        assert_eq!(r.links.len(), 5);

        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            refine_to_maximal_chain(&coarse_of(2), &bad, &tol()),
            Err(Error::QuotientNotScalarZero { .. })
        ));
    }

    fn coarse_of(n: usize) -> IdealChain {
        IdealChain::new(vec![CoordinateIdeal::empty(n), CoordinateIdeal::full(n)]).unwrap()
    }

    #[test]
    fn nilpotency_examples() {
        let c = commutator_nilpotency(&ones4(), &swap_plus_identity(), &tol()).unwrap();
        assert_eq!(c.index, 1);
        assert_eq!(c.commutator, DMatrix::zeros(4, 4));
        assert!(c.chain.maximal);

        let t = pm(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let k = pm(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let c = commutator_nilpotency(&t, &k, &tol()).unwrap();
        assert_eq!(
            c.commutator,
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 0.0, 0.0])
        );
        assert_eq!(c.index, 2);
        assert_eq!(links(&c.chain), vec![vec![], vec![1], vec![1, 2]]);
        assert!(c.radius <= 1e-12);
        let p = c.permuted_commutator();
        assert_eq!(p[(1, 0)], 0.0);

        let cyc = pm(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let c = commutator_nilpotency(&cyc, &cyc, &tol()).unwrap();
        assert_eq!(c.index, 1);
    }

    #[test]
    fn rejects_mixed_sign_commutator() {
        let t = pm(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let k = pm(&[&[0.0, 0.0], &[1.0, 0.0]]);
        // TK − KT = diag(1, −1)
        assert!(matches!(
            commutator_nilpotency(&t, &k, &tol()),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn serialized_certificate_uses_one_based_indices() {
        let t = pm(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let k = pm(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let c = commutator_nilpotency(&t, &k, &tol()).unwrap();
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["permuted_form"], serde_json::json!([1, 2]));
        assert_eq!(json["chain"]["links"], serde_json::json!([[], [1], [1, 2]]));
        assert_eq!(
            json["commutator"],
            serde_json::json!([[0.0, -1.0], [0.0, 0.0]])
        );
    }
}
