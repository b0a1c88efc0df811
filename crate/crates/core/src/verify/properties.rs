//! The executable properties run by the suite. Each takes a dimension, a
//! trial seed and tolerances, builds its instance, and reports a verdict
//! with a margin (positive when passing).

use nalgebra::DMatrix;
use rand::Rng;

use super::detectors::{comparison_check, reducibility_detectors};
use super::generators::{
    peripheral_instance, random_irreducible, random_nonnegative, random_reducible, rng_for,
};
use super::{TrialResult, Verdict};
use crate::commutant::{is_super_commutant_irreducible, sample_semi_commuting, Side};
use crate::error::Result;
use crate::lattice::{
    commutator, inf_norm, is_invariant_ideal, vec_inf_norm, CoordinateIdeal, PosMatrix, Tolerances,
    Vector,
};
use crate::perron::{
    common_peripheral_eigenpair, is_ideal_irreducible, peripheral_cycle_structure, perron_pair,
    strongly_expanding_sum,
};
use crate::spectral::{local_spectral_radius, matrix_power, Spectral};
use crate::triangularize::commutator_nilpotency;

pub(crate) type PropertyFn = fn(usize, u64, &Tolerances) -> TrialResult;

/// Runs `body` and turns library errors into failures carrying the instance.
fn trial(
    instance: Vec<(&'static str, &PosMatrix)>,
    body: impl FnOnce() -> Result<(Verdict, Option<f64>)>,
) -> TrialResult {
    let matrices = instance
        .into_iter()
        .map(|(name, m)| (name.to_string(), m.as_matrix().clone()))
        .collect();
    let (verdict, margin) = match body() {
        Ok(v) => v,
        Err(e) => (Verdict::Fail(e.to_string()), None),
    };
    TrialResult {
        verdict,
        margin,
        matrices,
    }
}

fn verdict(ok: bool, why: impl FnOnce() -> String) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail(why())
    }
}

fn random_side(rng: &mut impl Rng) -> Side {
    if rng.random::<bool>() {
        Side::Right
    } else {
        Side::Left
    }
}

/// A sampled member of one side of `k`, preferring the non-structural
/// samples.
fn partner(k: &PosMatrix, side: Side, rng: &mut impl Rng, tol: &Tolerances) -> Result<PosMatrix> {
    let sample = sample_semi_commuting(k, side, rng.random(), 6, tol)?;
    let m = sample.matrices;
    let idx = if m.len() > 2 {
        rng.random_range(2..m.len())
    } else {
        m.len() - 1
    };
    Ok(m[idx].clone())
}

fn random_positive(n: usize, rng: &mut impl Rng) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(0.1..1.0))
}

fn positive_probes(n: usize, rng: &mut impl Rng) -> Vec<Vector> {
    let mut v: Vec<Vector> = (0..n)
        .map(|i| {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect();
    v.extend((0..3).map(|_| random_positive(n, rng)));
    v
}

pub(crate) fn irreducible_has_positive_radius(
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> TrialResult {
    let mut rng = rng_for(seed);
    let density = rng.random_range(0.0..0.6);
    // Sparse random matrices are mostly reducible; half the trials start from a cycle.
    let a = if rng.random_bool(0.5) {
        random_irreducible(n, density, rng.random())
    } else {
        random_nonnegative(n, density.max(0.1), rng.random())
    };
    trial(vec![("A", &a)], || {
        if !is_ideal_irreducible([&a], tol)?.irreducible {
            return Ok((
                Verdict::Skip("hypothesis not met: matrix is reducible".into()),
                None,
            ));
        }
        let r = Spectral::new(a.as_matrix())?.radius();
        Ok((verdict(r > 0.0, || format!("spectral radius {r}")), Some(r)))
    })
}

/// Exhaustive search over all nontrivial coordinate subsets.
fn reducible_by_enumeration(a: &PosMatrix, tol: &Tolerances) -> bool {
    let n = a.n();
    (1..(1u64 << n) - 1)
        .any(|mask| is_invariant_ideal(a.as_matrix(), &CoordinateIdeal::from_mask(n, mask), tol))
}

pub(crate) fn irreducibility_matches_enumeration(
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> TrialResult {
    let mut rng = rng_for(seed);
    let density = rng.random_range(0.05..0.6);
    let a = random_nonnegative(n, density, rng.random());
    trial(vec![("A", &a)], || {
        if n > 16 {
            return Ok((Verdict::Skip("enumeration limited to n ≤ 16".into()), None));
        }
        let fast = is_ideal_irreducible([&a], tol)?.irreducible;
        let slow = !reducible_by_enumeration(&a, tol);
        Ok((
            verdict(fast == slow, || {
                format!("digraph test says {fast}, enumeration says {slow}")
            }),
            None,
        ))
    })
}

pub(crate) fn comparison_strict_decrease(n: usize, seed: u64, tol: &Tolerances) -> TrialResult {
    let mut rng = rng_for(seed);
    let density = rng.random_range(0.0..0.7);
    let a = random_irreducible(n, density, rng.random());
    let positive: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| a.get(i, j) > 0.0)
        .collect();
    let mut reduced = a.as_matrix().clone();
    let forced = rng.random_range(0..positive.len());
    for (idx, &(i, j)) in positive.iter().enumerate() {
        if idx == forced || rng.random::<f64>() < 0.3 {
            reduced[(i, j)] *= 1.0 - rng.random_range(0.1..=1.0);
        }
    }
    let b = PosMatrix::from_dmatrix(reduced, tol).expect("reduction keeps entries nonnegative");
    trial(vec![("A", &a), ("B", &b)], || {
        let report = comparison_check(&a, &b, tol)?;
        let rel = report.margin / report.radius_a;
        Ok((
            verdict(report.holds && !report.identical, || {
                format!("r(A) = {}, r(B) = {}", report.radius_a, report.radius_b)
            }),
            Some(rel),
        ))
    })
}

fn commuting_margin(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, f64) {
    let residual = inf_norm(&commutator(a, b));
    let bound = 1e-7 * inf_norm(a) * inf_norm(b);
    (residual, 1.0 - residual / bound)
}

pub(crate) fn semi_commuting_partner_commutes(
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> TrialResult {
    let mut rng = rng_for(seed);
    let density = rng.random_range(0.0..0.6);
    let t = random_irreducible(n, density, rng.random());
    let side = random_side(&mut rng);
    let a = match partner(&t, side, &mut rng, tol) {
        Ok(a) => a,
        Err(e) => return trial(vec![("T", &t)], || Err(e)),
    };
    trial(vec![("T", &t), ("A", &a)], || {
        let (residual, margin) = commuting_margin(t.as_matrix(), a.as_matrix());
        Ok((
            verdict(margin >= 0.0, || format!("‖TA − AT‖∞ = {residual:e}")),
            Some(margin),
        ))
    })
}

pub(crate) fn positive_eigenpair_forces_commuting(
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> TrialResult {
    let mut rng = rng_for(seed);
    let density = rng.random_range(0.2..0.9);
    let u = random_irreducible(n, density, rng.random());
    let side = random_side(&mut rng);
    let v = match partner(&u, side, &mut rng, tol) {
        Ok(v) => v,
        Err(e) => return trial(vec![("U", &u)], || Err(e)),
    };
    trial(vec![("U", &u), ("V", &v)], || {
        // strictly positive x0 and x0* for the same eigenvalue
        perron_pair(&u, tol)?;
        let (residual, margin) = commuting_margin(u.as_matrix(), v.as_matrix());
        Ok((
            verdict(margin >= 0.0, || format!("‖UV − VU‖∞ = {residual:e}")),
            Some(margin),
        ))
    })
}

pub(crate) fn commutator_is_nilpotent(n: usize, seed: u64, tol: &Tolerances) -> TrialResult {
    let mut rng = rng_for(seed);
    let t = if rng.random_range(0..4) == 0 {
        random_irreducible(n, rng.random_range(0.0..0.6), rng.random())
    } else {
        random_reducible(n, rng.random())
    };
    let side = random_side(&mut rng);
    let a = match partner(&t, side, &mut rng, tol) {
        Ok(a) => a,
        Err(e) => return trial(vec![("T", &t)], || Err(e)),
    };
    trial(vec![("T", &a), ("K", &t)], || {
        let cert = commutator_nilpotency(&a, &t, tol)?;
        let bound = 1e-6 * inf_norm(&cert.commutator).max(1.0);
        let margin = 1.0 - cert.radius / bound;
        Ok((
            verdict(margin >= 0.0 && cert.index <= n, || {
                format!("radius {:e}, index {}", cert.radius, cert.index)
            }),
            Some(margin),
        ))
    })
}

pub(crate) fn peripheral_power_limit(n: usize, seed: u64, tol: &Tolerances) -> TrialResult {
    let mut rng = rng_for(seed);
    let inst = peripheral_instance(n, false, rng.random());
    let k = inst.k.clone();
    trial(vec![("K", &k)], || {
        let s = peripheral_cycle_structure(&k, tol)?;
        if s.period != inst.period || s.verified_power % inst.period as u64 != 0 {
            return Ok((
                Verdict::Fail(format!(
                    "period {} (expected {}), verified power {}",
                    s.period, inst.period, s.verified_power
                )),
                None,
            ));
        }
        let khat = k.as_matrix() / inst.radius;
        let power_gap = inf_norm(&(matrix_power(&khat, s.verified_power) - &inst.projection));
        let mut radius_gap: f64 = 0.0;
        for _ in 0..10 {
            let x = random_positive(n, &mut rng);
            let local = local_spectral_radius(k.as_matrix(), &x, tol)?;
            radius_gap = radius_gap.max((local.exact - inst.radius).abs());
        }
        let margin = (1.0 - power_gap / 1e-6).min(1.0 - radius_gap / 1e-9);
        Ok((
            verdict(margin >= 0.0, || {
                format!("‖K̂^N − P‖∞ = {power_gap:e}, local radius error {radius_gap:e}")
            }),
            Some(margin),
        ))
    })
}

pub(crate) fn single_cycle_for_irreducible(n: usize, seed: u64, tol: &Tolerances) -> TrialResult {
    let mut rng = rng_for(seed);
    let inst = peripheral_instance(n, true, rng.random());
    let k = inst.k.clone();
    trial(vec![("K", &k)], || {
        if !is_ideal_irreducible([&k], tol)?.irreducible {
            return Ok((
                Verdict::Fail("generated single-cycle instance is reducible".into()),
                None,
            ));
        }
        let s = peripheral_cycle_structure(&k, tol)?;
        let cycles = s.cycles();
        if cycles.len() != 1 || cycles[0].len() != s.rank {
            return Ok((
                Verdict::Fail(format!("permutation cycles {cycles:?}")),
                None,
            ));
        }
        let m = s.rank;
        let spec = Spectral::new(k.as_matrix())?;
        let peripheral = spec.peripheral(tol);
        if peripheral.len() != m {
            return Ok((
                Verdict::Fail(format!(
                    "{} peripheral eigenvalues, expected {m}",
                    peripheral.len()
                )),
                None,
            ));
        }
        let r = spec.radius();
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let root =
                num_complex::Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / m as f64);
            let nearest = peripheral
                .iter()
                .map(|e| (e - root).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
            if spec.geometric_multiplicity(root, tol) != 1 {
                return Ok((
                    Verdict::Fail(format!("eigenvalue {root} is not simple")),
                    None,
                ));
            }
        }
        let margin = 1.0 - worst / (1e-7 * r.max(1.0));
        Ok((
            verdict(margin >= 0.0, || format!("roots of unity off by {worst:e}")),
            Some(margin),
        ))
    })
}

pub(crate) fn local_radius_dominates_common_eigenvalue(
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> TrialResult {
    let mut rng = rng_for(seed);
    let t = random_irreducible(n, rng.random_range(0.0..0.6), rng.random());
    let side = random_side(&mut rng);
    let k = match partner(&t, side, &mut rng, tol) {
        Ok(k) => k,
        Err(e) => return trial(vec![("T", &t)], || Err(e)),
    };
    trial(vec![("T", &t), ("K", &k)], || {
        let pair = common_peripheral_eigenpair(&t, &k, tol)?;
        let mut worst = f64::INFINITY;
        for x in positive_probes(n, &mut rng) {
            let local = local_spectral_radius(t.as_matrix(), &x, tol)?;
            worst = worst.min(local.exact - (pair.lambda_t - 1e-9));
        }
        Ok((
            verdict(worst >= 0.0, || {
                format!("local radius short by {:e}", -worst)
            }),
            Some(worst),
        ))
    })
}

pub(crate) fn commutant_chain_shares_eigenvector(
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> TrialResult {
    let mut rng = rng_for(seed);
    let t = random_irreducible(n, rng.random_range(0.0..0.6), rng.random());
    let side = random_side(&mut rng);
    let k = match partner(&t, side, &mut rng, tol) {
        Ok(k) => k,
        Err(e) => return trial(vec![("T", &t)], || Err(e)),
    };
    let expanded = strongly_expanding_sum(&t, tol).map(|tt| tt.mul(&k).mul(&tt));
    let s = match expanded.and_then(|kt| partner(&kt, random_side(&mut rng), &mut rng, tol)) {
        Ok(s) => s,
        Err(e) => return trial(vec![("T", &t), ("K", &k)], || Err(e)),
    };
    trial(vec![("T", &t), ("K", &k), ("S", &s)], || {
        let pair = common_peripheral_eigenpair(&t, &k, tol)?;
        let sm = s.as_matrix();
        let lambda = pair.x0star.dot(&(sm * &pair.x0)) / pair.x0star.dot(&pair.x0);
        let right = vec_inf_norm(&(sm * &pair.x0 - &pair.x0 * lambda)) / vec_inf_norm(&pair.x0);
        let left = vec_inf_norm(&(sm.transpose() * &pair.x0star - &pair.x0star * lambda))
            / vec_inf_norm(&pair.x0star);
        let bound = 1e-7 * inf_norm(sm).max(f64::MIN_POSITIVE);
        let margin = 1.0 - right.max(left) / bound;
        if margin < 0.0 {
            return Ok((
                Verdict::Fail(format!("eigen-residuals {right:e}, {left:e}")),
                Some(margin),
            ));
        }
        let rs = Spectral::new(sm)?.radius();
        Ok((
            verdict(lambda > 0.0 && rs >= lambda * (1.0 - 1e-6), || {
                format!("λ_S = {lambda}, r(S) = {rs}")
            }),
            Some(margin),
        ))
    })
}

fn random_nilpotent(n: usize, rng: &mut impl Rng) -> PosMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), rng);
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            if rng.random::<f64>() < 0.5 {
                m[(perm[i], perm[j])] = rng.random_range(0.1..1.0);
            }
        }
    }
    if m.iter().all(|v| *v == 0.0) {
        m[(perm[1], perm[0])] = 1.0;
    }
    PosMatrix::from_dmatrix(m, &Tolerances::default()).expect("nonnegative entries")
}

pub(crate) fn local_radius_gap_forces_reducible_sides(
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> TrialResult {
    let mut rng = rng_for(seed);
    let k = if rng.random_range(0..3) == 0 {
        random_nilpotent(n, &mut rng)
    } else {
        random_reducible(n, rng.random())
    };
    trial(vec![("K", &k)], || {
        let km = k.as_matrix();
        let nilpotent = inf_norm(&matrix_power(km, n as u64)) == 0.0;
        let triggered = nilpotent || {
            let spec = Spectral::new(km)?;
            let dual = Spectral::new(&km.transpose())?;
            let cut = spec.radius() * (1.0 - 1e-6);
            let mut hit = false;
            for x in positive_probes(n, &mut rng) {
                if spec.local_radius_exact(&x, tol)? < cut
                    || dual.local_radius_exact(&x, tol)? < cut
                {
                    hit = true;
                    break;
                }
            }
            hit
        };
        if !triggered {
            return Ok((
                Verdict::Skip("hypothesis not met: no local radius gap".into()),
                None,
            ));
        }
        for side in [Side::Right, Side::Left] {
            let cert = is_super_commutant_irreducible(&k, side, tol)?;
            if cert.irreducible {
                return Ok((Verdict::Fail(format!("{side:?} side is irreducible")), None));
            }
        }
        Ok((Verdict::Pass, None))
    })
}

pub(crate) fn reducibility_criteria_certify(n: usize, seed: u64, tol: &Tolerances) -> TrialResult {
    let mut rng = rng_for(seed);
    let irreducible = rng.random::<bool>();
    let t = if irreducible {
        random_irreducible(n, rng.random_range(0.0..0.6), rng.random())
    } else {
        random_reducible(n, rng.random())
    };
    let side = random_side(&mut rng);
    let k = match partner(&t, side, &mut rng, tol) {
        Ok(k) => k,
        Err(e) => return trial(vec![("T", &t)], || Err(e)),
    };
    trial(vec![("T", &t), ("K", &k)], || {
        let hits = reducibility_detectors(&t, &k, tol)?;
        Ok((
            verdict(!irreducible || hits.is_empty(), || {
                format!(
                    "irreducible T triggered {:?}",
                    hits.iter().map(|h| h.criterion).collect::<Vec<_>>()
                )
            }),
            None,
        ))
    })
}
