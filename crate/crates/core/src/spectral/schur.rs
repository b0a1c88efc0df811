//! Complex Schur decomposition of a real matrix and spectral projections
//! read off from a reordered Schur form.
//!
//! Pipeline: balancing (permutation isolation + power-of-two scaling),
//! Householder reduction to Hessenberg form, single-shift complex QR with
//! Wilkinson shifts. Projections onto a selected part of the spectrum are
//! obtained by moving the selected eigenvalues to the leading block with
//! adjacent Givens swaps and solving the triangular Sylvester equation for the
//! coupling block.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `A = V T V⁻¹` with `T` upper triangular, `V = X Z`, `X` the balancing
/// similarity and `Z` unitary.
#[derive(Debug, Clone)]
pub struct SchurForm {
    t: DMatrix<Complex64>,
    z: DMatrix<Complex64>,
    x: DMatrix<f64>,
    xinv: DMatrix<f64>,
}

impl SchurForm {
    pub fn compute(a: &DMatrix<f64>) -> Result<Self> {
        assert!(a.is_square());
        let n = a.nrows();
        let mut b = a.clone();
        let mut x = DMatrix::<f64>::identity(n, n);
        let mut xinv = DMatrix::<f64>::identity(n, n);
        let (lo, hi) = balance(&mut b, &mut x, &mut xinv);
        let q = hessenberg(&mut b, lo, hi);

        let mut t = b.map(|v| Complex64::new(v, 0.0));
        let mut z = q.map(|v| Complex64::new(v, 0.0));
        complex_qr(&mut t, &mut z, lo, hi)?;
        for j in 0..n {
            for i in j + 1..n {
                t[(i, j)] = ZERO;
            }
        }
        Ok(SchurForm { t, z, x, xinv })
    }

    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    /// Diagonal of the triangular factor, in Schur order.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.n()).map(|i| self.t[(i, i)]).collect()
    }

    pub fn triangular(&self) -> &DMatrix<Complex64> {
        &self.t
    }

    /// `V` and `V⁻¹` for the current factorization.
    pub fn similarity(&self) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let x = self.x.map(|v| Complex64::new(v, 0.0));
        let xinv = self.xinv.map(|v| Complex64::new(v, 0.0));
        (&x * &self.z, self.z.adjoint() * xinv)
    }

    /// Spectral projection onto the generalized eigenspace of the eigenvalues
    /// for which `select` holds. Fails when a selected and an unselected
    /// eigenvalue are too close for the Sylvester solve.
    pub fn projection(&self, select: impl Fn(Complex64) -> bool) -> Result<DMatrix<Complex64>> {
        let n = self.n();
        let mut t = self.t.clone();
        let mut z = self.z.clone();
        let mut flags: Vec<bool> = (0..n).map(|i| select(t[(i, i)])).collect();
        let p = reorder(&mut t, &mut z, &mut flags);

        let mut pt = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..p {
            pt[(i, i)] = ONE;
        }
        if p > 0 && p < n {
            let y = solve_triangular_sylvester(&t, p)?;
            for i in 0..p {
                for j in 0..n - p {
                    pt[(i, p + j)] = y[(i, j)];
                }
            }
        }
        let x = self.x.map(|v| Complex64::new(v, 0.0));
        let xinv = self.xinv.map(|v| Complex64::new(v, 0.0));
        Ok(&x * &z * pt * z.adjoint() * xinv)
    }
}

/// Permutes isolated eigenvalues to the ends and scales the remaining window
/// by powers of two. Returns the active window `lo..=hi`; updates `x`, `xinv`
/// so that the balanced matrix equals `xinv · A · x`.
fn balance(b: &mut DMatrix<f64>, x: &mut DMatrix<f64>, xinv: &mut DMatrix<f64>) -> (usize, usize) {
    let n = b.nrows();
    let swap = |b: &mut DMatrix<f64>,
                x: &mut DMatrix<f64>,
                xinv: &mut DMatrix<f64>,
                i: usize,
                j: usize| {
        if i != j {
            b.swap_rows(i, j);
            b.swap_columns(i, j);
            x.swap_columns(i, j);
            xinv.swap_rows(i, j);
        }
    };

    let mut lo = 0usize;
    let mut hi = n - 1;

    // Rows with no off-diagonal entries inside the window isolate an eigenvalue
    // at the bottom.
    'rows: loop {
        for j in (0..=hi).rev() {
            if (0..=hi).all(|i| i == j || b[(j, i)] == 0.0) {
                swap(b, x, xinv, j, hi);
                if hi == 0 {
                    return (0, 0);
                }
                hi -= 1;
                continue 'rows;
            }
        }
        break;
    }
    // Columns likewise at the top.
    while let Some(j) = (lo..=hi).find(|&j| (lo..=hi).all(|i| i == j || b[(i, j)] == 0.0)) {
        swap(b, x, xinv, j, lo);
        lo += 1;
    }

    const RADIX: f64 = 2.0;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in lo..=hi {
            let mut c: f64 = (lo..=hi).filter(|&j| j != i).map(|j| b[(j, i)].abs()).sum();
            let r: f64 = (lo..=hi).filter(|&j| j != i).map(|j| b[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                // B <- D^-1 B D with D_ii = f
                for j in 0..n {
                    b[(i, j)] /= f;
                    xinv[(i, j)] /= f;
                }
                for j in 0..n {
                    b[(j, i)] *= f;
                    x[(j, i)] *= f;
                }
            }
        }
    }
    (lo, hi)
}

/// Householder reduction of the window `lo..=hi` to upper Hessenberg form.
/// Returns the accumulated orthogonal factor.
fn hessenberg(b: &mut DMatrix<f64>, lo: usize, hi: usize) -> DMatrix<f64> {
    let n = b.nrows();
    let mut q = DMatrix::<f64>::identity(n, n);
    if hi < lo + 2 {
        return q;
    }
    for k in lo..hi - 1 {
        let len = hi - k;
        let mut v: Vec<f64> = (0..len).map(|t| b[(k + 1 + t, k)]).collect();
        let tail: f64 = v[1..].iter().map(|x| x * x).sum();
        if tail == 0.0 {
            continue;
        }
        let alpha = v[0];
        let norm = (alpha * alpha + tail).sqrt();
        let sign = if alpha >= 0.0 { 1.0 } else { -1.0 };
        v[0] = alpha + sign * norm;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        let beta = 2.0 / vtv;

        for j in k..n {
            let dot: f64 = (0..len).map(|t| v[t] * b[(k + 1 + t, j)]).sum();
            let s = beta * dot;
            for t in 0..len {
                b[(k + 1 + t, j)] -= s * v[t];
            }
        }
        for i in 0..n {
            let dot: f64 = (0..len).map(|t| b[(i, k + 1 + t)] * v[t]).sum();
            let s = beta * dot;
            for t in 0..len {
                b[(i, k + 1 + t)] -= s * v[t];
            }
            let dq: f64 = (0..len).map(|t| q[(i, k + 1 + t)] * v[t]).sum();
            let sq = beta * dq;
            for t in 0..len {
                q[(i, k + 1 + t)] -= sq * v[t];
            }
        }
        b[(k + 1, k)] = -sign * norm;
        for t in 1..len {
            b[(k + 1 + t, k)] = 0.0;
        }
    }
    q
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with real `c` and
/// `G · [f; g] = [r; 0]`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, ZERO);
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let norm = fn_.hypot(gn);
    let c = fn_ / norm;
    let s = (f / fn_) * g.conj() / norm;
    (c, s)
}

fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Single-shift QR on the Hessenberg window, accumulating into `z`.
fn complex_qr(
    h: &mut DMatrix<Complex64>,
    z: &mut DMatrix<Complex64>,
    lo: usize,
    hi: usize,
) -> Result<()> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / eps);
    let cap = 100 * n.max(3);
    let mut total = 0usize;
    let mut its = 0usize;
    let mut ihi = hi;

    while ihi > lo {
        // Look for a negligible subdiagonal entry.
        let mut l = ihi;
        while l > lo {
            let sub = cabs1(h[(l, l - 1)]);
            if sub <= smlnum {
                break;
            }
            let mut tst = cabs1(h[(l - 1, l - 1)]) + cabs1(h[(l, l)]);
            if tst == 0.0 {
                if l >= lo + 2 {
                    tst += h[(l - 1, l - 2)].re.abs();
                }
                if l < ihi {
                    tst += h[(l + 1, l)].re.abs();
                }
            }
            if sub <= eps * tst {
                // Ahues & Tisseur refinement.
                let ab = sub.max(cabs1(h[(l - 1, l)]));
                let ba = sub.min(cabs1(h[(l - 1, l)]));
                let diff = h[(l - 1, l - 1)] - h[(l, l)];
                let aa = cabs1(h[(l, l)]).max(cabs1(diff));
                let bb = cabs1(h[(l, l)]).min(cabs1(diff));
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(eps * (bb * (aa / s))) {
                    break;
                }
            }
            l -= 1;
        }
        if l > lo {
            h[(l, l - 1)] = ZERO;
        }
        if l == ihi {
            ihi -= 1;
            its = 0;
            continue;
        }

        total += 1;
        its += 1;
        if total > cap {
            return Err(Error::NonConvergence {
                iterations: total,
                lo: l,
                hi: ihi,
            });
        }

        let shift = if its.is_multiple_of(10) {
            h[(ihi, ihi)] + Complex64::new(0.75 * h[(ihi, ihi - 1)].re.abs(), 0.0)
        } else if its % 10 == 5 {
            h[(l, l)] + Complex64::new(0.75 * h[(l + 1, l)].re.abs(), 0.0)
        } else {
            wilkinson_shift(
                h[(ihi - 1, ihi - 1)],
                h[(ihi - 1, ihi)],
                h[(ihi, ihi - 1)],
                h[(ihi, ihi)],
            )
        };

        for i in l..=ihi {
            h[(i, i)] -= shift;
        }
        let mut rots = Vec::with_capacity(ihi - l);
        for k in l..ihi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((c, s));
        }
        for (idx, k) in (l..ihi).enumerate() {
            let (c, s) = rots[idx];
            for i in 0..=(k + 1) {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
        for i in l..=ihi {
            h[(i, i)] += shift;
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Swaps the diagonal entries `k` and `k + 1` of the triangular `t` by a
/// unitary similarity, updating `z`.
fn swap_adjacent(t: &mut DMatrix<Complex64>, z: &mut DMatrix<Complex64>, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let (cs, sn) = givens(t[(k, k + 1)], t22 - t11);

    for j in k + 2..n {
        let a = t[(k, j)];
        let b = t[(k + 1, j)];
        t[(k, j)] = a * cs + sn * b;
        t[(k + 1, j)] = b * cs - sn.conj() * a;
    }
    let snc = sn.conj();
    for i in 0..k {
        let a = t[(i, k)];
        let b = t[(i, k + 1)];
        t[(i, k)] = a * cs + snc * b;
        t[(i, k + 1)] = b * cs - snc.conj() * a;
    }
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    for i in 0..n {
        let a = z[(i, k)];
        let b = z[(i, k + 1)];
        z[(i, k)] = a * cs + snc * b;
        z[(i, k + 1)] = b * cs - snc.conj() * a;
    }
}

/// Moves flagged diagonal entries to the leading block, preserving relative
/// order. Returns the number of flagged entries.
fn reorder(t: &mut DMatrix<Complex64>, z: &mut DMatrix<Complex64>, flags: &mut [bool]) -> usize {
    let mut placed = 0;
    for i in 0..flags.len() {
        if flags[i] {
            let mut k = i;
            while k > placed {
                swap_adjacent(t, z, k - 1);
                flags.swap(k - 1, k);
                k -= 1;
            }
            placed += 1;
        }
    }
    placed
}

/// Solves `T11 Y - Y T22 = T12` for the leading `p × p` block split of the
/// upper triangular `t`.
fn solve_triangular_sylvester(t: &DMatrix<Complex64>, p: usize) -> Result<DMatrix<Complex64>> {
    let n = t.nrows();
    let q = n - p;
    let scale = t
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut y = DMatrix::<Complex64>::zeros(p, q);
    for j in 0..q {
        let mu = t[(p + j, p + j)];
        let mut rhs: Vec<Complex64> = (0..p).map(|i| t[(i, p + j)]).collect();
        for k in 0..j {
            let tk = t[(p + k, p + j)];
            if tk != ZERO {
                for i in 0..p {
                    rhs[i] += y[(i, k)] * tk;
                }
            }
        }
        for i in (0..p).rev() {
            let mut acc = rhs[i];
            for l in i + 1..p {
                acc -= t[(i, l)] * y[(l, j)];
            }
            let den = t[(i, i)] - mu;
            if den.norm() <= 1e2 * f64::EPSILON * scale {
                return Err(Error::BandSeparationFailure {
                    grouped: t[(i, i)].norm(),
                    excluded: mu.norm(),
                });
            }
            y[(i, j)] = acc / den;
        }
    }
    Ok(y)
}
