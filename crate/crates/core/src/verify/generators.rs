//! Seeded random instances with known structure.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{PosMatrix, Tolerances, Vector};

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on `(0, 1]`.
fn positive_unit(rng: &mut impl Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn raw_irreducible(n: usize, density: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    if n == 1 {
        m[(0, 0)] = positive_unit(rng);
        return m;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for k in 0..n {
        let (from, to) = (order[k], order[(k + 1) % n]);
        m[(to, from)] = positive_unit(rng);
    }
    for j in 0..n {
        for i in 0..n {
            if m[(i, j)] == 0.0 && rng.random::<f64>() < density {
                m[(i, j)] = positive_unit(rng);
            }
        }
    }
    m
}

/// A Hamiltonian cycle of positive entries through a random ordering of the
/// coordinates, plus each remaining entry independently with probability
/// `density`. Magnitudes are uniform on `(0, 1]`.
pub fn random_irreducible(n: usize, density: f64, seed: u64) -> PosMatrix {
    assert!(n >= 2, "dimension must be at least 2");
    assert!((0.0..=1.0).contains(&density), "density must lie in [0, 1]");
    let mut rng = rng_for(seed);
    PosMatrix::from_dmatrix(
        raw_irreducible(n, density, &mut rng),
        &Tolerances::default(),
    )
    .expect("generated entries are positive and finite")
}

/// Each entry independently positive with probability `density`.
pub fn random_nonnegative(n: usize, density: f64, seed: u64) -> PosMatrix {
    let mut rng = rng_for(seed);
    let m = DMatrix::from_fn(n, n, |_, _| {
        if rng.random::<f64>() < density {
            positive_unit(&mut rng)
        } else {
            0.0
        }
    });
    PosMatrix::from_dmatrix(m, &Tolerances::default()).expect("generated entries are nonnegative")
}

fn random_composition(n: usize, parts: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(n)) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

fn conjugate_by_permutation(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            out[(perm[i], perm[j])] = m[(i, j)];
        }
    }
    out
}

/// Block triangular matrix with two or three irreducible diagonal blocks of
/// different scales, coupled in one direction only, then conjugated by a
/// random coordinate permutation.
pub fn random_reducible(n: usize, seed: u64) -> PosMatrix {
    assert!(n >= 2, "dimension must be at least 2");
    let mut rng = rng_for(seed);
    let parts = if n >= 3 { rng.random_range(2..=3) } else { 2 };
    let sizes = random_composition(n, parts, &mut rng);
    let mut m = DMatrix::zeros(n, n);
    let mut offsets = Vec::with_capacity(parts);
    let mut at = 0;
    for &s in &sizes {
        offsets.push(at);
        let density = rng.random::<f64>();
        let scale = rng.random_range(0.5..2.0);
        let block = raw_irreducible(s, density, &mut rng) * scale;
        m.view_mut((at, at), (s, s)).copy_from(&block);
        at += s;
    }
    for b in 1..parts {
        for a in 0..b {
            for i in offsets[b]..offsets[b] + sizes[b] {
                for j in offsets[a]..offsets[a] + sizes[a] {
                    if rng.random::<f64>() < 0.5 {
                        m[(i, j)] = positive_unit(&mut rng);
                    }
                }
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    PosMatrix::from_dmatrix(conjugate_by_permutation(&m, &perm), &Tolerances::default())
        .expect("generated entries are nonnegative")
}

/// Positive operator whose peripheral structure is known in closed form.
#[derive(Debug, Clone)]
pub struct PeripheralInstance {
    pub k: PosMatrix,
    pub radius: f64,
    /// `Σ x_i x_i*ᵀ`
    pub projection: DMatrix<f64>,
    /// Block permutation: `K x_i = r x_{π(i)}`.
    pub permutation: Vec<usize>,
    pub period: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `K = r Σ x_{π(i)} x_i*ᵀ + Q` over a random partition of the coordinates
/// into blocks, with positive `x_i`, `x_i*` supported on block `i`,
/// `x_i*·x_i = 1`, and a block-permutation perturbation `Q` annihilated by
/// every `x_i` on the right and `x_i*` on the left, with `‖Q‖∞ ≤ r/2`.
/// With `single_cycle` the block permutation is one cycle, making `K`
/// irreducible.
pub fn peripheral_instance(n: usize, single_cycle: bool, seed: u64) -> PeripheralInstance {
    assert!(n >= 2, "dimension must be at least 2");
    let mut rng = rng_for(seed);
    let blocks = rng.random_range(1..=n.min(4));
    let sizes = random_composition(n, blocks, &mut rng);
    let mut coords: Vec<usize> = (0..n).collect();
    coords.shuffle(&mut rng);
    let mut members = Vec::with_capacity(blocks);
    let mut at = 0;
    for &s in &sizes {
        let mut b = coords[at..at + s].to_vec();
        b.sort_unstable();
        members.push(b);
        at += s;
    }

    let permutation: Vec<usize> = if single_cycle {
        let mut order: Vec<usize> = (0..blocks).collect();
        order.shuffle(&mut rng);
        let mut p = vec![0; blocks];
        for k in 0..blocks {
            p[order[k]] = order[(k + 1) % blocks];
        }
        p
    } else {
        let mut p: Vec<usize> = (0..blocks).collect();
        p.shuffle(&mut rng);
        p
    };

    let radius = rng.random_range(0.5..2.0);
    let mut xs = Vec::with_capacity(blocks);
    let mut fs = Vec::with_capacity(blocks);
    for b in &members {
        let mut x = Vector::zeros(n);
        let mut f = Vector::zeros(n);
        for &i in b {
            x[i] = rng.random_range(0.5..1.5);
            f[i] = rng.random_range(0.5..1.5);
        }
        let s = f.dot(&x);
        xs.push(x);
        fs.push(f / s);
    }

    let mut projection = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    for i in 0..blocks {
        projection += &xs[i] * fs[i].transpose();
        k += &xs[permutation[i]] * fs[i].transpose() * radius;
    }
    for i in 0..blocks {
        let (src, dst) = (&members[i], &members[permutation[i]]);
        // a singleton block makes one projection factor vanish
        if src.len() < 2 || dst.len() < 2 {
            continue;
        }
        let g = DMatrix::from_fn(n, n, |r, c| {
            if dst.contains(&r) && src.contains(&c) {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        let left = DMatrix::identity(n, n) - &xs[permutation[i]] * fs[permutation[i]].transpose();
        let right = DMatrix::identity(n, n) - &xs[i] * fs[i].transpose();
        // Restricted to the block pair, both factors are projections.
        let q = restrict(&left, dst) * g * restrict(&right, src);
        let peak = q.amax();
        if peak == 0.0 {
            continue;
        }
        let floor = dst
            .iter()
            .flat_map(|&r| src.iter().map(move |&c| (r, c)))
            .map(|(r, c)| k[(r, c)])
            .fold(f64::INFINITY, f64::min);
        let scale = (0.5 * floor / peak).min(0.5 * radius / crate::lattice::inf_norm(&q));
        k += q * scale;
    }
    let k = PosMatrix::from_dmatrix(k, &Tolerances::default())
        .expect("perturbation keeps entries positive");
    let period = crate::perron::permutation_cycles(&permutation)
        .iter()
        .fold(1, |acc, c| acc / gcd(acc, c.len()) * c.len());
    PeripheralInstance {
        k,
        radius,
        projection,
        permutation,
        period,
    }
}

/// Zero outside the rows and columns of `idx`.
fn restrict(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        if idx.contains(&r) && idx.contains(&c) {
            m[(r, c)]
        } else {
            0.0
        }
    })
}
