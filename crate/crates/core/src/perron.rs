//! Ideal irreducibility, Perron eigendata and the peripheral permutation
//! structure of positive operators.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::lattice::{
    inf_norm, is_invariant_ideal, is_quasi_interior, vec_inf_norm, CoordinateIdeal, PosMatrix,
    Tolerances, Vector,
};
use crate::spectral::{settle_projection_limit, Spectral};

/// Relative slack for "commutes" preconditions: `‖AB - BA‖∞ ≤ 1e-8 ‖A‖∞ ‖B‖∞`.
pub const COMMUTING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrreducibilityCertificate {
    pub irreducible: bool,
    /// Nontrivial ideal invariant under every input; present iff reducible.
    pub witness_ideal: Option<CoordinateIdeal>,
}

impl IrreducibilityCertificate {
    /// Witness checks out against each matrix.
    pub fn verify<'a>(
        &self,
        matrices: impl IntoIterator<Item = &'a DMatrix<f64>>,
        tol: &Tolerances,
    ) -> bool {
        match (&self.witness_ideal, self.irreducible) {
            (None, true) => true,
            (Some(w), false) => {
                !w.is_trivial() && matrices.into_iter().all(|m| is_invariant_ideal(m, w, tol))
            }
            _ => false,
        }
    }
}

/// Irreducibility of a collection through the union support digraph. A
/// reducible collection gets the sink component holding the smallest
/// coordinate as witness.
pub fn is_ideal_irreducible<'a>(
    matrices: impl IntoIterator<Item = &'a PosMatrix>,
    tol: &Tolerances,
) -> Result<IrreducibilityCertificate> {
    let mats: Vec<&DMatrix<f64>> = matrices.into_iter().map(|m| m.as_matrix()).collect();
    let first = mats
        .first()
        .ok_or_else(|| Error::PreconditionViolation("empty matrix collection".into()))?;
    let n = first.nrows();
    if mats.iter().any(|m| m.nrows() != n) {
        return Err(Error::PreconditionViolation(
            "matrices differ in dimension".into(),
        ));
    }
    Ok(certificate_from_digraph(&Digraph::from_supports(
        n, mats, tol.zero,
    )))
}

pub(crate) fn certificate_from_digraph(g: &Digraph) -> IrreducibilityCertificate {
    if g.is_strongly_connected() {
        IrreducibilityCertificate {
            irreducible: true,
            witness_ideal: None,
        }
    } else {
        IrreducibilityCertificate {
            irreducible: false,
            witness_ideal: Some(CoordinateIdeal::new(g.n(), g.smallest_sink_component())),
        }
    }
}

pub(crate) fn require_irreducible(a: &PosMatrix, tol: &Tolerances, what: &str) -> Result<()> {
    let cert = is_ideal_irreducible([a], tol)?;
    if !cert.irreducible {
        return Err(Error::PreconditionViolation(format!(
            "{what} requires an ideal irreducible matrix; invariant ideal {:?}",
            cert.witness_ideal
                .expect("reducible certificate carries a witness")
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct PerronPair {
    pub radius: f64,
    /// Right eigenvector, `‖x0‖₁ = 1`.
    #[serde(serialize_with = "crate::lattice::ser::vector")]
    pub x0: Vector,
    /// Left eigenvector, `x0star · x0 = 1`.
    #[serde(serialize_with = "crate::lattice::ser::vector")]
    pub x0star: Vector,
}

/// Unit null vector of `m` for its smallest singular value, sign-fixed to
/// have a nonnegative sum, and the nullity at `threshold`.
fn null_vector(m: &DMatrix<f64>, threshold: f64) -> (Vector, usize) {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    let nullity = svd
        .singular_values
        .iter()
        .filter(|s| **s <= threshold)
        .count();
    let mut v: Vector = vt.row(idx).transpose();
    if v.sum() < 0.0 {
        v = -v;
    }
    (v, nullity)
}

/// Perron value with strictly positive right and left eigenvectors of an
/// irreducible matrix.
pub fn perron_pair(a: &PosMatrix, tol: &Tolerances) -> Result<PerronPair> {
    require_irreducible(a, tol, "perron_pair")?;
    let m = a.as_matrix();
    let n = a.n();
    let radius = Spectral::new(m)?.radius();
    if radius <= 0.0 {
        return Err(Error::HypothesisViolated(
            "irreducible matrix with zero spectral radius".into(),
        ));
    }
    let shifted = m - DMatrix::identity(n, n) * radius;
    let rank_tol = tol.zero * inf_norm(m).max(1.0) * n as f64;
    let (x, right_nullity) = null_vector(&shifted, rank_tol);
    let (y, left_nullity) = null_vector(&shifted.transpose(), rank_tol);
    if right_nullity != 1 || left_nullity != 1 {
        return Err(Error::HypothesisViolated(format!(
            "Perron eigenspaces have dimensions {right_nullity} and {left_nullity}, expected 1"
        )));
    }
    let x0 = &x / x.sum();
    let x0star = &y / y.dot(&x0);
    if !is_quasi_interior(&x0, tol) || !is_quasi_interior(&x0star, tol) {
        return Err(Error::HypothesisViolated(
            "Perron eigenvectors of an irreducible matrix are not strictly positive".into(),
        ));
    }
    Ok(PerronPair { radius, x0, x0star })
}

/// Nonnegative right eigenvector for the spectral radius of a possibly
/// reducible nonnegative matrix.
///
/// The support is a component `c` of radius `ρ` together with everything
/// reachable from it; all reachable components must have radius below `ρ`.
/// Among admissible components the one with the most ancestors wins, then the
/// smallest coordinate.
pub fn nonnegative_eigenvector(m: &DMatrix<f64>, tol: &Tolerances) -> Result<(f64, Vector)> {
    let n = m.nrows();
    let rho = Spectral::new(m)?.radius();
    let g = Digraph::from_supports(n, [m], tol.zero);
    let comps = g.strongly_connected_components();
    let slack = 1e-9 * rho.max(1.0);

    let block = |idx: &[usize]| DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
    let mut radii = Vec::with_capacity(comps.len());
    for c in &comps {
        radii.push(Spectral::new(&block(c))?.radius());
    }
    let mut comp_of = vec![0; n];
    for (ci, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = ci;
        }
    }
    let reversed = g.reversed();

    let mut chosen: Vec<(usize, usize)> = Vec::new(); // (component, ancestors)
    for (ci, c) in comps.iter().enumerate() {
        if (radii[ci] - rho).abs() > slack {
            continue;
        }
        let reach = g.reachable_from(c[0]);
        let admissible = (0..n)
            .filter(|&v| reach[v] && comp_of[v] != ci)
            .all(|v| radii[comp_of[v]] < rho - slack);
        if !admissible {
            continue;
        }
        let back = reversed.reachable_from(c[0]);
        let ancestors = (0..n).filter(|&v| back[v] && comp_of[v] != ci).count();
        chosen.push((ci, ancestors));
    }
    let most = chosen.iter().map(|c| c.1).max().ok_or_else(|| {
        Error::HypothesisViolated("no admissible component for a nonnegative eigenvector".into())
    })?;

    // Components tied on ancestor count each carry an eigenvector; sum them.
    let mut v = Vector::zeros(n);
    for &(ci, _) in chosen.iter().filter(|c| c.1 == most) {
        v += component_eigenvector(m, &g, &comps[ci], &comp_of, ci, rho, block)?;
    }
    let s = v.sum();
    Ok((rho, v / s))
}

fn component_eigenvector(
    m: &DMatrix<f64>,
    g: &Digraph,
    core: &[usize],
    comp_of: &[usize],
    ci: usize,
    rho: f64,
    block: impl Fn(&[usize]) -> DMatrix<f64>,
) -> Result<Vector> {
    let n = m.nrows();
    let reach = g.reachable_from(core[0]);
    let below: Vec<usize> = (0..n).filter(|&v| reach[v] && comp_of[v] != ci).collect();

    let mut v = Vector::zeros(n);
    let core_vec = if core.len() == 1 {
        Vector::from_element(1, 1.0)
    } else {
        let b = block(core);
        let shifted = &b - DMatrix::identity(core.len(), core.len()) * rho;
        let nv = null_vector(&shifted, f64::INFINITY).0;
        let peak = vec_inf_norm(&nv);
        nv / peak
    };
    for (k, &i) in core.iter().enumerate() {
        v[i] = core_vec[k].abs();
    }
    if !below.is_empty() && rho > 0.0 {
        let d = below.len();
        let m_dd = block(&below);
        let rhs = Vector::from_fn(d, |i, _| {
            core.iter()
                .enumerate()
                .map(|(k, &j)| m[(below[i], j)] * core_vec[k].abs())
                .sum()
        });
        let lhs = DMatrix::identity(d, d) * rho - m_dd;
        let sol = lhs.lu().solve(&rhs).ok_or_else(|| {
            Error::HypothesisViolated("singular resolvent on descendant block".into())
        })?;
        for (k, &i) in below.iter().enumerate() {
            v[i] = sol[k].max(0.0);
        }
    }
    let peak = vec_inf_norm(&v);
    Ok(v / peak)
}

/// Peripheral data of a positive operator whose peripheral spectral
/// projection is a positive sum of disjoint rank-one pieces permuted by the
/// operator.
#[derive(Debug, Clone, Serialize)]
pub struct PeripheralStructure {
    pub radius: f64,
    #[serde(serialize_with = "crate::lattice::ser::rows")]
    pub projection: DMatrix<f64>,
    pub rank: usize,
    /// Disjoint positive vectors spanning the range of the projection.
    #[serde(serialize_with = "crate::lattice::ser::vectors")]
    pub vectors: Vec<Vector>,
    /// Disjoint positive functionals with `functionals[i] · vectors[j] = δ_ij`.
    #[serde(serialize_with = "crate::lattice::ser::vectors")]
    pub functionals: Vec<Vector>,
    /// `K x_i = r x_{π(i)}`; 0-based here, 1-based when serialized.
    #[serde(serialize_with = "crate::lattice::ser::one_based")]
    pub permutation: Vec<usize>,
    /// Order of the permutation.
    pub period: usize,
    #[serde(serialize_with = "crate::lattice::ser::vector")]
    pub x0: Vector,
    #[serde(serialize_with = "crate::lattice::ser::vector")]
    pub x0star: Vector,
    pub x0_quasi_interior: bool,
    pub x0star_strictly_positive: bool,
    /// Power `N·m` at which `‖(K/r)^{Nm} - P‖∞ ≤ 1e-6` was checked.
    pub verified_power: u64,
}

impl PeripheralStructure {
    /// Cycles of the permutation, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        permutation_cycles(&self.permutation)
    }
}

pub fn permutation_cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut cycles = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i);
            i = perm[i];
        }
        cycles.push(cycle);
    }
    cycles
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn cosine_distance(a: &Vector, b: &Vector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    1.0 - a.dot(b) / (na * nb)
}

/// Greedy proportionality clustering of nonnegative vectors. Returns, per
/// cluster, the index of its largest member.
fn cluster_directions(vectors: &[(usize, Vector)], tol: &Tolerances) -> Result<Vec<usize>> {
    let mut reps: Vec<(usize, Vector, f64)> = Vec::new();
    for (idx, v) in vectors {
        let mut joined = false;
        for rep in reps.iter_mut() {
            let d = cosine_distance(&rep.1, v);
            if d < tol.cluster {
                let norm = v.norm();
                if norm > rep.2 {
                    *rep = (*idx, v.clone(), norm);
                }
                joined = true;
                break;
            }
            if d < 100.0 * tol.cluster {
                return Err(Error::HypothesisViolated(format!(
                    "ambiguous proportionality (cosine distance {d:e})"
                )));
            }
        }
        if !joined {
            reps.push((*idx, v.clone(), v.norm()));
        }
    }
    Ok(reps.into_iter().map(|r| r.0).collect())
}

fn supports_disjoint(vectors: &[Vector]) -> bool {
    for (i, a) in vectors.iter().enumerate() {
        let ta = 1e-9 * vec_inf_norm(a);
        for b in &vectors[i + 1..] {
            let tb = 1e-9 * vec_inf_norm(b);
            if a.iter()
                .zip(b.iter())
                .any(|(x, y)| x.abs() > ta && y.abs() > tb)
            {
                return false;
            }
        }
    }
    true
}

/// Extracts the peripheral permutation structure of `K`.
///
/// Requires a semisimple peripheral part and an entrywise nonnegative
/// peripheral projection; anything else is reported as
/// [`Error::HypothesisViolated`].
pub fn peripheral_cycle_structure(k: &PosMatrix, tol: &Tolerances) -> Result<PeripheralStructure> {
    let spec = Spectral::new(k.as_matrix())?;
    let radius = spec.radius();
    if radius <= tol.zero {
        return Err(Error::QuasiNilpotentInput { radius });
    }
    let p = spec.peripheral_projection(tol)?;
    if !spec.peripheral_semisimple(tol) {
        return Err(Error::HypothesisViolated(
            "peripheral part is defective".into(),
        ));
    }
    let n = k.n();
    let pscale = inf_norm(&p).max(1.0);
    let min_entry = p.iter().copied().fold(f64::INFINITY, f64::min);
    if min_entry < -tol.zero * pscale {
        return Err(Error::HypothesisViolated(format!(
            "peripheral projection has a negative entry {min_entry:e}"
        )));
    }
    let p = p.map(|v| v.max(0.0));
    let rank = p.trace().round() as usize;
    let khat = k.as_matrix() / radius;

    let live = tol.zero * pscale;
    let columns: Vec<(usize, Vector)> = (0..n)
        .map(|j| (j, p.column(j).into_owned()))
        .filter(|(_, c)| vec_inf_norm(c) > live)
        .collect();
    let rows: Vec<(usize, Vector)> = (0..n)
        .map(|i| (i, p.row(i).transpose()))
        .filter(|(_, r)| vec_inf_norm(r) > live)
        .collect();
    let col_reps = cluster_directions(&columns, tol)?;
    let row_reps = cluster_directions(&rows, tol)?;
    if col_reps.len() != rank || row_reps.len() != rank {
        return Err(Error::HypothesisViolated(format!(
            "projection of rank {rank} splits into {} column and {} row directions",
            col_reps.len(),
            row_reps.len()
        )));
    }

    let unit = |v: Vector| {
        let s = vec_inf_norm(&v);
        v / s
    };
    let mut vectors: Vec<Vector> = col_reps
        .iter()
        .map(|&j| unit(p.column(j).into_owned()))
        .collect();
    let row_dirs: Vec<Vector> = row_reps
        .iter()
        .map(|&i| unit(p.row(i).transpose()))
        .collect();

    // Pair each vector with the one functional that sees it.
    let mut functionals: Vec<Vector> = Vec::with_capacity(rank);
    let mut used = vec![false; rank];
    for x in &vectors {
        let hits: Vec<usize> = (0..rank)
            .filter(|&i| row_dirs[i].dot(x) > 1e-9 * x.norm() * row_dirs[i].norm())
            .collect();
        if hits.len() != 1 || used[hits[0]] {
            return Err(Error::HypothesisViolated(
                "peripheral vectors and functionals do not pair off".into(),
            ));
        }
        used[hits[0]] = true;
        functionals.push(row_dirs[hits[0]].clone());
    }

    // Action of K/r on the vectors.
    let mut permutation = vec![usize::MAX; rank];
    for (i, x) in vectors.iter().enumerate() {
        let y = &khat * x;
        let target = (0..rank).find(|&j| cosine_distance(&y, &vectors[j]) < tol.cluster);
        match target {
            Some(j) => permutation[i] = j,
            None => {
                return Err(Error::HypothesisViolated(format!(
                    "K does not map peripheral vector {} onto another one",
                    i + 1
                )))
            }
        }
    }
    let mut seen = vec![false; rank];
    for &j in &permutation {
        if seen[j] {
            return Err(Error::HypothesisViolated(
                "K does not permute the peripheral vectors".into(),
            ));
        }
        seen[j] = true;
    }

    // Rescale along each cycle so that K/r maps x_i exactly onto x_{π(i)}.
    let cycles = permutation_cycles(&permutation);
    for cycle in &cycles {
        for w in 0..cycle.len() - 1 {
            let next = &khat * &vectors[cycle[w]];
            vectors[cycle[w + 1]] = next;
        }
        let back = &khat * &vectors[*cycle.last().expect("nonempty cycle")];
        let start = &vectors[cycle[0]];
        if vec_inf_norm(&(&back - start)) > 1e-7 * vec_inf_norm(start) {
            return Err(Error::HypothesisViolated(
                "weights around a peripheral cycle do not multiply to one".into(),
            ));
        }
    }
    for (f, x) in functionals.iter_mut().zip(&vectors) {
        let s = f.dot(x);
        *f /= s;
    }
    let period = cycles
        .iter()
        .map(|c| c.len())
        .fold(1, |acc, l| acc / gcd(acc, l) * l);

    // Invariants.
    for (i, f) in functionals.iter().enumerate() {
        for (j, x) in vectors.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (f.dot(x) - expected).abs() > 1e-7 {
                return Err(Error::HypothesisViolated("biorthogonality fails".into()));
            }
        }
    }
    let mut rebuilt = DMatrix::<f64>::zeros(n, n);
    for (x, f) in vectors.iter().zip(&functionals) {
        rebuilt += x * f.transpose();
    }
    if (&rebuilt - &p).iter().any(|v| v.abs() > 1e-7) {
        return Err(Error::HypothesisViolated(
            "projection is not the sum of the rank-one pieces".into(),
        ));
    }
    if !supports_disjoint(&vectors) || !supports_disjoint(&functionals) {
        return Err(Error::HypothesisViolated(
            "peripheral supports overlap".into(),
        ));
    }
    let x0: Vector = vectors.iter().fold(Vector::zeros(n), |acc, x| acc + x);
    let x0star: Vector = functionals.iter().fold(Vector::zeros(n), |acc, f| acc + f);
    let kx = k.as_matrix() * &x0;
    let ktf = k.as_matrix().transpose() * &x0star;
    if vec_inf_norm(&(&kx - &x0 * radius)) > 1e-7 * radius * vec_inf_norm(&x0)
        || vec_inf_norm(&(&ktf - &x0star * radius)) > 1e-7 * radius * vec_inf_norm(&x0star)
    {
        return Err(Error::HypothesisViolated(
            "x0 or x0* is not a Perron eigenvector".into(),
        ));
    }
    let subdominant = spec
        .eigenvalues()
        .iter()
        .map(|e| e.norm() / radius)
        .filter(|m| *m < 1.0 - tol.peripheral_band)
        .fold(0.0, f64::max);
    let (verified_power, _) = settle_projection_limit(&khat, &p, period, subdominant, 1e-6)
        .ok_or_else(|| Error::HypothesisViolated("powers K^{Nm} do not settle on P".into()))?;

    Ok(PeripheralStructure {
        radius,
        projection: p,
        rank,
        x0_quasi_interior: is_quasi_interior(&x0, tol),
        x0star_strictly_positive: is_quasi_interior(&x0star, tol),
        vectors,
        functionals,
        permutation,
        period,
        x0,
        x0star,
        verified_power,
    })
}

/// `T̃ = Σ_{n≥1} Tⁿ = (I - T)⁻¹ T` after rescaling `T ← T / (2‖T‖∞)`.
/// For irreducible `T` every entry is positive.
pub fn strongly_expanding_sum(t: &PosMatrix, tol: &Tolerances) -> Result<PosMatrix> {
    require_irreducible(t, tol, "strongly_expanding_sum")?;
    let n = t.n();
    let scaled = t.as_matrix() / (2.0 * t.inf_norm());
    let resolvent = (DMatrix::identity(n, n) - &scaled)
        .lu()
        .solve(&scaled)
        .expect("I - T is invertible when ‖T‖∞ = 1/2");
    if let Some(bad) = resolvent.iter().find(|v| **v <= 0.0) {
        return Err(Error::HypothesisViolated(format!(
            "Neumann sum of an irreducible matrix has a non-positive entry {bad:e}"
        )));
    }
    PosMatrix::from_dmatrix(resolvent, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct CommonEigenpair {
    #[serde(serialize_with = "crate::lattice::ser::vector")]
    pub x0: Vector,
    #[serde(serialize_with = "crate::lattice::ser::vector")]
    pub x0star: Vector,
    pub lambda_t: f64,
    pub mu_k: f64,
}

pub(crate) fn check_commuting(a: &DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<()> {
    let c = inf_norm(&(a * b - b * a));
    let bound = COMMUTING_TOL * inf_norm(a) * inf_norm(b);
    if c > bound {
        return Err(Error::PreconditionViolation(format!(
            "{what}: commutator norm {c:e} exceeds {bound:e}"
        )));
    }
    Ok(())
}

fn rayleigh(a: &DMatrix<f64>, x: &Vector, f: &Vector) -> f64 {
    f.dot(&(a * x)) / f.dot(x)
}

/// Shared eigenvector pair for an irreducible `T` and a commuting `K > 0`:
/// the Perron pair of `T̃ K T̃`.
pub fn common_peripheral_eigenpair(
    t: &PosMatrix,
    k: &PosMatrix,
    tol: &Tolerances,
) -> Result<CommonEigenpair> {
    require_irreducible(t, tol, "common_peripheral_eigenpair")?;
    if k.is_zero(tol) {
        return Err(Error::PreconditionViolation("K must be nonzero".into()));
    }
    check_commuting(t.as_matrix(), k.as_matrix(), "common_peripheral_eigenpair")?;
    let tt = strongly_expanding_sum(t, tol)?;
    let kt = tt.mul(k).mul(&tt);
    let pair = perron_pair(&kt, tol)?;
    let (x0, x0star) = (pair.x0, pair.x0star);

    let lambda_t = rayleigh(t.as_matrix(), &x0, &x0star);
    let mu_k = rayleigh(k.as_matrix(), &x0, &x0star);
    let check = |a: &DMatrix<f64>, lambda: f64, name: &str| -> Result<()> {
        let scale = inf_norm(a) * vec_inf_norm(&x0);
        let right = vec_inf_norm(&(a * &x0 - &x0 * lambda));
        let left = vec_inf_norm(&(a.transpose() * &x0star - &x0star * lambda));
        if right > 1e-6 * scale || left > 1e-6 * inf_norm(a) * vec_inf_norm(&x0star) {
            return Err(Error::HypothesisViolated(format!(
                "{name} does not share the eigenvector pair (residuals {right:e}, {left:e})"
            )));
        }
        Ok(())
    };
    check(t.as_matrix(), lambda_t, "T")?;
    check(k.as_matrix(), mu_k, "K")?;
    let rk = Spectral::new(k.as_matrix())?.radius();
    if (mu_k - rk).abs() > 1e-6 * rk {
        return Err(Error::HypothesisViolated(format!(
            "eigenvalue of K at the common eigenvector is {mu_k}, spectral radius {rk}"
        )));
    }
    Ok(CommonEigenpair {
        x0,
        x0star,
        lambda_t,
        mu_k,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutingEigenpair {
    pub lambda: f64,
    #[serde(serialize_with = "crate::lattice::ser::vector")]
    pub x: Vector,
    #[serde(serialize_with = "crate::lattice::ser::vector")]
    pub xstar: Vector,
}

/// Nonnegative eigenvector pair of `S` commuting with `K`, built inside the
/// peripheral range of `K` from the matrix `M_ij = x_i*(S x_j)`.
pub fn commuting_eigenvalue(
    s: &PosMatrix,
    k: &PosMatrix,
    structure: &PeripheralStructure,
    tol: &Tolerances,
) -> Result<CommutingEigenpair> {
    check_commuting(s.as_matrix(), k.as_matrix(), "commuting_eigenvalue")?;
    let r = structure.rank;
    let sm = s.as_matrix();
    let m = DMatrix::from_fn(r, r, |i, j| {
        structure.functionals[i]
            .dot(&(sm * &structure.vectors[j]))
            .max(0.0)
    });
    let (lambda, v) = nonnegative_eigenvector(&m, tol)?;
    let (_, w) = nonnegative_eigenvector(&m.transpose(), tol)?;
    let n = s.n();
    let x = (0..r).fold(Vector::zeros(n), |acc, i| {
        acc + &structure.vectors[i] * v[i]
    });
    let xstar = (0..r).fold(Vector::zeros(n), |acc, i| {
        acc + &structure.functionals[i] * w[i]
    });

    let scale = inf_norm(sm).max(lambda).max(1.0);
    let right = vec_inf_norm(&(sm * &x - &x * lambda));
    let left = vec_inf_norm(&(sm.transpose() * &xstar - &xstar * lambda));
    if right > 1e-6 * scale * vec_inf_norm(&x) || left > 1e-6 * scale * vec_inf_norm(&xstar) {
        return Err(Error::HypothesisViolated(format!(
            "eigenvector residuals {right:e}, {left:e} exceed tolerance"
        )));
    }
    Ok(CommutingEigenpair { lambda, x, xstar })
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

    fn weighted_ones() -> PosMatrix {
        pm(&[
            &[1.0, 1.0, 1.0, 1.0],
            &[1.0, 1.0, 1.0, 1.0],
            &[1.0, 1.0, 2.5, 2.5],
            &[1.0, 1.0, 2.5, 2.5],
        ])
    }

    fn cyclic3() -> PosMatrix {
        pm(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])
    }

    fn vclose(a: &Vector, b: &[f64], eps: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
    }

    #[test]
    fn irreducibility_examples() {
        assert!(
            is_ideal_irreducible([&ones4()], &tol())
                .unwrap()
                .irreducible
        );
        let upper = pm(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let c = is_ideal_irreducible([&upper], &tol()).unwrap();
        assert!(!c.irreducible);
        assert_eq!(c.witness_ideal.as_ref().unwrap().one_based(), vec![1]);
        let k = swap_plus_identity();
        let c = is_ideal_irreducible([&k], &tol()).unwrap();
        assert_eq!(c.witness_ideal.as_ref().unwrap().one_based(), vec![1, 2]);
        assert!(c.verify([k.as_matrix()], &tol()));
    }

    #[test]
    fn collection_irreducibility() {
        // Each alone is reducible; together they connect both coordinates.
        let a = pm(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let b = pm(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert!(!is_ideal_irreducible([&a], &tol()).unwrap().irreducible);
        assert!(is_ideal_irreducible([&a, &b], &tol()).unwrap().irreducible);
        let empty: [&PosMatrix; 0] = [];
        assert!(is_ideal_irreducible(empty, &tol()).is_err());
        assert!(is_ideal_irreducible([&a, &ones4()], &tol()).is_err());
    }

    #[test]
    fn perron_pair_examples() {
        let c = perron_pair(&cyclic3(), &tol()).unwrap();
        assert!((c.radius - 1.0).abs() < 1e-12);
        assert!(vclose(&c.x0, &[1.0 / 3.0; 3], 1e-12));
        assert!(vclose(&c.x0star, &[1.0; 3], 1e-12));

        let r = perron_pair(&weighted_ones(), &tol()).unwrap();
        assert!((r.radius - 6.0).abs() < 1e-9);
        assert!(vclose(
            &r.x0,
            &[1.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0],
            1e-12
        ));
        assert!(vclose(&r.x0star, &[0.6, 0.6, 1.2, 1.2], 1e-12));

        let o = perron_pair(&ones4(), &tol()).unwrap();
        assert!((o.radius - 4.0).abs() < 1e-12);
        assert!(vclose(&o.x0, &[0.25; 4], 1e-12));
        assert!(vclose(&o.x0star, &[1.0; 4], 1e-12));
    }

    #[test]
    fn perron_pair_rejects_reducible() {
        assert!(matches!(
            perron_pair(&swap_plus_identity(), &tol()),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn peripheral_structure_of_swap_plus_identity() {
        let s = peripheral_cycle_structure(&swap_plus_identity(), &tol()).unwrap();
        assert!((s.radius - 1.0).abs() < 1e-12);
        assert!(inf_norm(&(&s.projection - DMatrix::identity(4, 4))) < 1e-12);
        assert_eq!(s.rank, 4);
        for (i, x) in s.vectors.iter().enumerate() {
            let mut e = vec![0.0; 4];
            e[i] = 1.0;
            assert!(vclose(x, &e, 1e-12));
        }
        assert_eq!(s.permutation, vec![1, 0, 2, 3]);
        assert_eq!(s.period, 2);
        assert!(vclose(&s.x0, &[1.0; 4], 1e-12));
        assert!(s.x0_quasi_interior && s.x0star_strictly_positive);
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["permutation"], serde_json::json!([2, 1, 3, 4]));
    }

    #[test]
    fn peripheral_structure_of_three_cycle() {
        let s = peripheral_cycle_structure(&cyclic3(), &tol()).unwrap();
        assert_eq!(s.rank, 3);
        assert_eq!(s.cycles().len(), 1);
        assert_eq!(s.period, 3);
        assert!(inf_norm(&(&s.projection - DMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn peripheral_structure_of_diagonal() {
        let s = peripheral_cycle_structure(&pm(&[&[1.0, 0.0], &[0.0, 0.5]]), &tol()).unwrap();
        assert_eq!(s.rank, 1);
        assert!(vclose(&s.vectors[0], &[1.0, 0.0], 1e-12));
        assert_eq!(s.permutation, vec![0]);
        assert_eq!(s.period, 1);
        assert!(!s.x0_quasi_interior);
    }

    #[test]
    fn peripheral_structure_rejects_defective_and_nilpotent() {
        let j = pm(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            peripheral_cycle_structure(&j, &tol()),
            Err(Error::HypothesisViolated(_))
        ));
        let nil = pm(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            peripheral_cycle_structure(&nil, &tol()),
            Err(Error::QuasiNilpotentInput { .. })
        ));
    }

    #[test]
    fn strongly_expanding_examples() {
        let swap = pm(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let t = strongly_expanding_sum(&swap, &tol()).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0]);
        assert!(inf_norm(&(t.as_matrix() - expected)) < 1e-14);

        let t = strongly_expanding_sum(&ones4(), &tol()).unwrap();
        assert!(t.as_matrix().iter().all(|v| *v > tol().zero));

        let t = strongly_expanding_sum(&cyclic3(), &tol()).unwrap();
        assert!(t.as_matrix().iter().all(|v| *v > tol().zero));
        for i in 0..3 {
            assert!((t.as_matrix().row(i).sum() - 1.0).abs() < 1e-14);
        }
        assert!(strongly_expanding_sum(&swap_plus_identity(), &tol()).is_err());
    }

    #[test]
    fn common_eigenpair_examples() {
        let c = common_peripheral_eigenpair(&ones4(), &swap_plus_identity(), &tol()).unwrap();
        assert!(vclose(&c.x0, &[0.25; 4], 1e-12));
        assert!((c.lambda_t - 4.0).abs() < 1e-12);
        assert!((c.mu_k - 1.0).abs() < 1e-12);

        let c =
            common_peripheral_eigenpair(&weighted_ones(), &swap_plus_identity(), &tol()).unwrap();
        let scaled = &c.x0 / c.x0[0];
        assert!(vclose(&scaled, &[1.0, 1.0, 2.0, 2.0], 1e-9));
        assert!((c.lambda_t - 6.0).abs() < 1e-9);
        assert!((c.mu_k - 1.0).abs() < 1e-9);

        let t = cyclic3();
        let c = common_peripheral_eigenpair(&t, &t, &tol()).unwrap();
        assert!(vclose(&c.x0, &[1.0 / 3.0; 3], 1e-12));
        assert!((c.lambda_t - 1.0).abs() < 1e-12 && (c.mu_k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn common_eigenpair_rejects_non_commuting() {
        let t = ones4();
        let k = pm(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]);
        assert!(matches!(
            common_peripheral_eigenpair(&t, &k, &tol()),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn commuting_eigenvalue_examples() {
        let k = swap_plus_identity();
        let structure = peripheral_cycle_structure(&k, &tol()).unwrap();

        // S e3 = 0 and Sᵀ e4 = 0
        let s = pm(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]);
        let e = commuting_eigenvalue(&s, &k, &structure, &tol()).unwrap();
        assert!(e.lambda.abs() <= 1e-9);
        assert!(vclose(&e.x, &[0.0, 0.0, 1.0, 0.0], 1e-12));
        assert!(vclose(&e.xstar, &[0.0, 0.0, 0.0, 1.0], 1e-12));

        let e = commuting_eigenvalue(&k, &k, &structure, &tol()).unwrap();
        assert!((e.lambda - 1.0).abs() < 1e-12);
        let x0 = &structure.x0 / structure.x0.sum();
        let x = &e.x / e.x.sum();
        assert!(vclose(&x, x0.as_slice(), 1e-12));

        let e = commuting_eigenvalue(&ones4(), &k, &structure, &tol()).unwrap();
        assert!((e.lambda - 4.0).abs() < 1e-12);
        assert!(vclose(&(&e.x / e.x[0]), &[1.0; 4], 1e-12));
    }

    #[test]
    fn nonnegative_eigenvector_on_triangular_blocks() {
        // ρ = 2 from the first block; the second block (ρ = 1) feeds into it.
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let (rho, v) = nonnegative_eigenvector(&m, &tol()).unwrap();
        assert!((rho - 2.0).abs() < 1e-12);
        assert!(vclose(&v, &[1.0, 0.0], 1e-12));
        let (_, w) = nonnegative_eigenvector(&m.transpose(), &tol()).unwrap();
        // left eigenvector (1, 1)
        assert!(vclose(&w, &[0.5, 0.5], 1e-12));
    }
}
