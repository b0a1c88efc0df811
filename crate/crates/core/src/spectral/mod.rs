//! Spectrum, spectral radius, peripheral spectral projection, local spectral
//! radii and the behaviour of normalized powers.

pub mod schur;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{inf_norm, vec_inf_norm, PosMatrix, Tolerances, Vector};
use schur::SchurForm;

/// Eigenvalues closer than this (relative to the spectral radius) are treated
/// as one eigenvalue when counting multiplicities.
const CLUSTER_RADIUS: f64 = 1e-4;

/// Largest period searched for the peripheral rotation group.
pub const MAX_PERIOD: usize = 2520;

/// Power used for the empirical local radius estimate.
pub const EMPIRICAL_POWER: u32 = 64;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// All eigenvalues with multiplicity, modulus descending then argument ascending.
    pub eigenvalues: Vec<Complex64>,
    pub radius: f64,
    pub peripheral: Vec<Complex64>,
    pub peripheral_semisimple: bool,
}

/// Eigen-analysis of a real matrix, kept around so projections can be taken
/// without refactoring.
#[derive(Debug, Clone)]
pub struct Spectral {
    matrix: DMatrix<f64>,
    schur: SchurForm,
    eigenvalues: Vec<Complex64>,
    radius: f64,
}

impl Spectral {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let schur = SchurForm::compute(a)?;
        let scale = inf_norm(a);
        let eigenvalues = sorted_eigenvalues(&schur.eigenvalues(), scale);
        let radius = eigenvalues.first().map(|e| e.norm()).unwrap_or(0.0);
        Ok(Spectral {
            matrix: a.clone(),
            schur,
            eigenvalues,
            radius,
        })
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn schur(&self) -> &SchurForm {
        &self.schur
    }

    fn peripheral_threshold(&self, tol: &Tolerances) -> f64 {
        self.radius * (1.0 - tol.peripheral_band)
    }

    pub fn peripheral(&self, tol: &Tolerances) -> Vec<Complex64> {
        let cut = self.peripheral_threshold(tol);
        self.eigenvalues
            .iter()
            .copied()
            .filter(|e| e.norm() >= cut)
            .collect()
    }

    /// Groups peripheral eigenvalues that coincide up to roundoff.
    /// Returns `(centre, algebraic multiplicity)` pairs.
    pub fn peripheral_clusters(&self, tol: &Tolerances) -> Vec<(Complex64, usize)> {
        cluster(
            &self.peripheral(tol),
            CLUSTER_RADIUS * self.radius.max(f64::MIN_POSITIVE),
        )
    }

    /// Algebraic multiplicity equals geometric multiplicity for every
    /// peripheral eigenvalue; geometric multiplicity by an SVD rank test on
    /// `A - λI` at threshold `tol.zero · ‖A‖∞ · n`.
    pub fn peripheral_semisimple(&self, tol: &Tolerances) -> bool {
        self.peripheral_clusters(tol)
            .into_iter()
            .all(|(lambda, alg)| self.geometric_multiplicity(lambda, tol) == alg)
    }

    pub fn geometric_multiplicity(&self, lambda: Complex64, tol: &Tolerances) -> usize {
        let n = self.matrix.nrows();
        let shifted = DMatrix::from_fn(n, n, |i, j| {
            let v = Complex64::new(self.matrix[(i, j)], 0.0);
            if i == j {
                v - lambda
            } else {
                v
            }
        });
        let threshold = tol.zero * inf_norm(&self.matrix).max(1.0) * n as f64;
        let sv = shifted.singular_values();
        sv.iter().filter(|s| **s <= threshold).count()
    }

    /// Checks that the peripheral group is separated from the rest of the
    /// spectrum by at least `peripheral_band · r`.
    pub fn check_band(&self, tol: &Tolerances) -> Result<()> {
        let cut = self.peripheral_threshold(tol);
        let grouped = self
            .eigenvalues
            .iter()
            .map(|e| e.norm())
            .filter(|m| *m >= cut)
            .fold(f64::INFINITY, f64::min);
        let excluded = self
            .eigenvalues
            .iter()
            .map(|e| e.norm())
            .filter(|m| *m < cut)
            .fold(0.0, f64::max);
        if grouped.is_finite()
            && excluded > 0.0
            && grouped - excluded < tol.peripheral_band * self.radius
        {
            return Err(Error::BandSeparationFailure { grouped, excluded });
        }
        Ok(())
    }

    pub fn report(&self, tol: &Tolerances) -> SpectrumReport {
        SpectrumReport {
            eigenvalues: self.eigenvalues.clone(),
            radius: self.radius,
            peripheral: self.peripheral(tol),
            peripheral_semisimple: self.peripheral_semisimple(tol),
        }
    }

    /// Real spectral projection for a conjugation-closed selection.
    pub fn real_projection(&self, select: impl Fn(Complex64) -> bool) -> Result<DMatrix<f64>> {
        let p = self.schur.projection(select)?;
        let scale = p.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let imag = p.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if imag > 1e-8 * scale {
            return Err(Error::HypothesisViolated(format!(
                "selected spectral set is not closed under conjugation (imaginary part {imag:e})"
            )));
        }
        Ok(p.map(|v| v.re))
    }

    pub fn peripheral_projection(&self, tol: &Tolerances) -> Result<DMatrix<f64>> {
        if self.radius <= tol.zero {
            return Err(Error::QuasiNilpotentInput {
                radius: self.radius,
            });
        }
        self.check_band(tol)?;
        let cut = self.peripheral_threshold(tol);
        self.real_projection(|e| e.norm() >= cut)
    }

    /// Distinct modulus levels, descending. Moduli within
    /// `peripheral_band · r` of each other form one level.
    fn modulus_levels(&self, tol: &Tolerances) -> Vec<f64> {
        let merge = tol.peripheral_band * self.radius.max(f64::MIN_POSITIVE);
        let mut levels: Vec<f64> = Vec::new();
        for m in self.eigenvalues.iter().map(|e| e.norm()) {
            match levels.last() {
                Some(&last) if last - m <= merge => {}
                _ => levels.push(m),
            }
        }
        levels
    }

    /// Largest modulus among the spectral components of `x` that are
    /// nonzero.
    pub fn local_radius_exact(&self, x: &Vector, tol: &Tolerances) -> Result<f64> {
        let xn = vec_inf_norm(x);
        if xn == 0.0 {
            return Err(Error::PreconditionViolation(
                "local radius of the zero vector".into(),
            ));
        }
        let merge = tol.peripheral_band * self.radius.max(f64::MIN_POSITIVE);
        let levels = self.modulus_levels(tol);
        for (k, &level) in levels.iter().enumerate() {
            if k + 1 == levels.len() {
                return Ok(level);
            }
            let cut = level - merge;
            let p = self.real_projection(|e| e.norm() >= cut)?;
            let px = &p * x;
            if vec_inf_norm(&px) > 1e-8 * inf_norm(&p).max(1.0) * xn {
                return Ok(level);
            }
        }
        Ok(0.0)
    }
}

/// `‖A^N x‖^{1/N}` for `N = EMPIRICAL_POWER`, computed with renormalization.
pub fn empirical_local_radius(a: &DMatrix<f64>, x: &Vector, power: u32) -> f64 {
    let xn = vec_inf_norm(x);
    if xn == 0.0 {
        return 0.0;
    }
    let mut y: DVector<f64> = x / xn;
    let mut log_sum = xn.ln();
    for _ in 0..power {
        y = a * y;
        let s = vec_inf_norm(&y);
        if s == 0.0 {
            return 0.0;
        }
        log_sum += s.ln();
        y /= s;
    }
    (log_sum / power as f64).exp()
}

fn sorted_eigenvalues(raw: &[Complex64], scale: f64) -> Vec<Complex64> {
    let snap = 1e-13 * scale.max(f64::MIN_POSITIVE);
    let mut ev: Vec<Complex64> = raw
        .iter()
        .map(|e| {
            let im = if e.im.abs() <= snap { 0.0 } else { e.im };
            let re = if e.re == 0.0 { 0.0 } else { e.re };
            Complex64::new(re, im)
        })
        .collect();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    // Moduli equal up to roundoff are ordered by argument.
    let tie = 1e-9 * ev.first().map(|e| e.norm()).unwrap_or(0.0).max(snap);
    let mut start = 0;
    while start < ev.len() {
        let mut end = start + 1;
        while end < ev.len() && ev[end - 1].norm() - ev[end].norm() <= tie {
            end += 1;
        }
        ev[start..end].sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        start = end;
    }
    ev
}

/// Single-linkage clustering of complex points.
fn cluster(points: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let a = find(&mut label, i);
                let b = find(&mut label, j);
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        let root = find(&mut label, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(p),
            None => groups.push((root, vec![p])),
        }
    }
    groups
        .into_iter()
        .map(|(_, g)| {
            let sum: Complex64 = g.iter().sum();
            (sum / g.len() as f64, g.len())
        })
        .collect()
}

pub fn spectrum(a: &PosMatrix, tol: &Tolerances) -> Result<SpectrumReport> {
    spectrum_of(a.as_matrix(), tol)
}

/// Spectrum of an arbitrary real matrix (commutators are not positive).
pub fn spectrum_of(a: &DMatrix<f64>, tol: &Tolerances) -> Result<SpectrumReport> {
    Ok(Spectral::new(a)?.report(tol))
}

pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    Ok(Spectral::new(a)?.radius())
}

/// Spectral projection for the peripheral spectrum. Its complement `I - P`
/// projects onto the spectral subspace of the rest of the spectrum.
pub fn peripheral_projection(a: &PosMatrix, tol: &Tolerances) -> Result<DMatrix<f64>> {
    Spectral::new(a.as_matrix())?.peripheral_projection(tol)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalRadius {
    pub exact: f64,
    pub empirical: f64,
}

/// `lim ‖Aⁿx‖^{1/n}`, exactly via spectral components and empirically at
/// `N = 64`.
pub fn local_spectral_radius(
    a: &DMatrix<f64>,
    x: &Vector,
    tol: &Tolerances,
) -> Result<LocalRadius> {
    let spec = Spectral::new(a)?;
    Ok(LocalRadius {
        exact: spec.local_radius_exact(x, tol)?,
        empirical: empirical_local_radius(a, x, EMPIRICAL_POWER),
    })
}

/// Local radius of the adjoint at a functional.
pub fn dual_local_spectral_radius(
    a: &DMatrix<f64>,
    functional: &Vector,
    tol: &Tolerances,
) -> Result<LocalRadius> {
    local_spectral_radius(&a.transpose(), functional, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DichotomyKind {
    ProjectionLimit,
    NilpotentLimit,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyResult {
    pub kind: DichotomyKind,
    /// `P` for a projection limit, the normalized nilpotent direction otherwise.
    #[serde(serialize_with = "crate::lattice::ser::rows")]
    pub limit: DMatrix<f64>,
    /// Period `m` of the peripheral rotation group.
    pub subsequence_period: usize,
    /// Polynomial growth degree of `‖Âⁿ‖` (nilpotent case).
    pub scaling_exponent: Option<usize>,
    /// Power at which the limit was verified.
    pub verified_power: u64,
    /// Distance to the limit at `verified_power`.
    pub residual: f64,
}

/// Smallest `m ≤ MAX_PERIOD` with `|μ^m - 1| < tol` for every `μ`.
pub fn rotation_period(unit_peripheral: &[Complex64], tol: f64) -> Option<usize> {
    (1..=MAX_PERIOD).find(|&m| {
        unit_peripheral
            .iter()
            .all(|mu| (mu.powu(m as u32) - Complex64::new(1.0, 0.0)).norm() < tol)
    })
}

pub(crate) fn matrix_power(a: &DMatrix<f64>, mut e: u64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Picks the power `K` for which `‖Â^{Km} - P‖∞` has settled and checks it
/// at `K` and `2K`. Returns `(K·m, residual at K·m)`.
pub(crate) fn settle_projection_limit(
    scaled: &DMatrix<f64>,
    projection: &DMatrix<f64>,
    period: usize,
    subdominant: f64,
    threshold: f64,
) -> Option<(u64, f64)> {
    let n = scaled.nrows();
    let complement = DMatrix::<f64>::identity(n, n) - projection;
    let cond = inf_norm(projection).max(1.0) * inf_norm(&complement).max(1.0);
    let step = matrix_power(scaled, period as u64);
    let mut k: u64 = 1;
    if subdominant > 0.0 {
        while subdominant.powf((k * period as u64) as f64) * cond > 1e-8 && k < (1 << 40) {
            k += 1.max(k / 8);
        }
    }
    for _ in 0..24 {
        let pk = matrix_power(&step, k);
        let r1 = inf_norm(&(&pk - projection));
        let r2 = inf_norm(&(&pk * &pk - projection));
        if r1 <= threshold && r2 <= threshold {
            return Some((k * period as u64, r1));
        }
        k *= 2;
    }
    None
}

/// Behaviour of `Âⁿ = (A / r(A))ⁿ`: subsequences converge either to the
/// peripheral projection or, after normalization, to a nonzero nilpotent.
pub fn power_dichotomy(a: &PosMatrix, tol: &Tolerances) -> Result<DichotomyResult> {
    let base = Spectral::new(a.as_matrix())?;
    let r = base.radius();
    if r <= tol.zero {
        return Err(Error::QuasiNilpotentInput { radius: r });
    }
    let scaled = a.as_matrix() / r;
    let spec = Spectral::new(&scaled)?;
    let projection = spec.peripheral_projection(tol)?;
    let peripheral = spec.peripheral(tol);
    let period = rotation_period(&peripheral, tol.peripheral_band).ok_or_else(|| {
        Error::DichotomyUndetected(format!(
            "peripheral arguments are not roots of unity of order <= {MAX_PERIOD}"
        ))
    })?;

    if spec.peripheral_semisimple(tol) {
        let cut = 1.0 - tol.peripheral_band;
        let subdominant = spec
            .eigenvalues()
            .iter()
            .map(|e| e.norm())
            .filter(|m| *m < cut)
            .fold(0.0, f64::max);
        let (power, residual) =
            settle_projection_limit(&scaled, &projection, period, subdominant, 1e-6).ok_or_else(
                || {
                    Error::DichotomyUndetected(format!(
                        "powers of order {period} did not settle on the peripheral projection \
                     (subdominant modulus {subdominant})"
                    ))
                },
            )?;
        return Ok(DichotomyResult {
            kind: DichotomyKind::ProjectionLimit,
            limit: projection,
            subsequence_period: period,
            scaling_exponent: None,
            verified_power: power,
            residual,
        });
    }

    // Defective peripheral part: the leading term of Âⁿ along n = jm is the
    // top power of the peripheral nilpotent parts.
    let n = a.n();
    let scaled_c = scaled.map(|v| Complex64::new(v, 0.0));
    let radius = CLUSTER_RADIUS;
    let mut parts: Vec<(Complex64, DMatrix<Complex64>, usize)> = Vec::new();
    for (centre, _) in spec.peripheral_clusters(tol) {
        let p = spec
            .schur()
            .projection(|e| (e - centre).norm() <= 2.0 * radius)?;
        let shifted = &scaled_c - DMatrix::<Complex64>::identity(n, n) * centre;
        let nil = shifted * &p;
        let nscale = nil.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        let mut power = nil.clone();
        let mut index = 1;
        while index <= n {
            let mag = power.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if mag <= 1e-7 * nscale.powi(index as i32) {
                break;
            }
            power = &power * &nil;
            index += 1;
        }
        parts.push((centre, nil, index));
    }
    let depth = parts.iter().map(|(_, _, d)| *d).max().unwrap_or(1);
    if depth < 2 {
        return Err(Error::DichotomyUndetected(
            "rank test reports a defective peripheral part but no nilpotent component was found"
                .into(),
        ));
    }
    let mut lead = DMatrix::<Complex64>::zeros(n, n);
    for (centre, nil, d) in &parts {
        if *d == depth {
            let mut top = DMatrix::<Complex64>::identity(n, n);
            for _ in 0..depth - 1 {
                top = &top * nil;
            }
            lead += top * centre.powi(-(depth as i32 - 1));
        }
    }
    let imag = lead.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let mut limit = lead.map(|v| v.re);
    let norm = inf_norm(&limit);
    if norm == 0.0 || imag > 1e-6 * norm {
        return Err(Error::DichotomyUndetected(format!(
            "leading nilpotent term is degenerate (norm {norm:e}, imaginary part {imag:e})"
        )));
    }
    limit /= norm;
    let lim_pow = matrix_power(&limit, n as u64);
    if inf_norm(&lim_pow) > 1e-6 {
        return Err(Error::DichotomyUndetected(
            "limit direction is not nilpotent".into(),
        ));
    }

    // Empirical check along the subsequence: the normalized powers approach
    // the limit at rate O(1/j).
    let step = matrix_power(&scaled, period as u64);
    let distance = |j: u64| {
        let pj = matrix_power(&step, j);
        let s = inf_norm(&pj);
        inf_norm(&(pj / s - &limit))
    };
    let early = distance(1 << 8);
    let late = distance(1 << 12);
    if !(late <= early + 1e-12 && late <= 0.05) {
        return Err(Error::DichotomyUndetected(format!(
            "normalized powers do not approach the nilpotent direction \
             (distance {early:e} at 2^8 m, {late:e} at 2^12 m, growth degree {})",
            depth - 1
        )));
    }
    Ok(DichotomyResult {
        kind: DichotomyKind::NilpotentLimit,
        limit,
        subsequence_period: period,
        scaling_exponent: Some(depth - 1),
        verified_power: (1u64 << 12) * period as u64,
        residual: late,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn pm(rows: &[&[f64]]) -> PosMatrix {
        PosMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), &tol()).unwrap()
    }

    fn swap_plus_identity() -> PosMatrix {
        pm(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ])
    }

    fn cyclic3() -> PosMatrix {
        pm(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])
    }

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a - Complex64::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum(&swap_plus_identity(), &tol()).unwrap();
        assert!((s.radius - 1.0).abs() < 1e-12);
        assert_eq!(s.peripheral.len(), 4);
        assert!(close(s.eigenvalues[0], 1.0, 0.0));
        assert!(close(s.eigenvalues[1], 1.0, 0.0));
        assert!(close(s.eigenvalues[2], 1.0, 0.0));
        assert!(close(s.eigenvalues[3], -1.0, 0.0));
        assert!(s.peripheral_semisimple);

        let id = spectrum(&PosMatrix::identity(2), &tol()).unwrap();
        assert_eq!(id.eigenvalues.len(), 2);
        assert!(id.eigenvalues.iter().all(|e| close(*e, 1.0, 0.0)));

        // λ³ - 1 = 0
        let c = spectrum(&cyclic3(), &tol()).unwrap();
        assert!((c.radius - 1.0).abs() < 1e-12);
        let w = 2.0 * PI / 3.0;
        assert!(close(c.eigenvalues[0], w.cos(), -w.sin()));
        assert!(close(c.eigenvalues[1], 1.0, 0.0));
        assert!(close(c.eigenvalues[2], w.cos(), w.sin()));
    }

    #[test]
    fn spectral_radius_examples() {
        let ones = DMatrix::from_element(4, 4, 1.0);
        assert!((spectral_radius(&ones).unwrap() - 4.0).abs() < 1e-12);
        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(spectral_radius(&nil).unwrap(), 0.0);
        let r = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.5, 2.5, 1.0, 1.0, 2.5, 2.5,
            ],
        );
        let v = DVector::from_vec(vec![1.0, 1.0, 2.0, 2.0]);
        assert_eq!(&r * &v, &v * 6.0);
        assert!((spectral_radius(&r).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn peripheral_projection_examples() {
        let p = peripheral_projection(&swap_plus_identity(), &tol()).unwrap();
        assert!(inf_norm(&(p - DMatrix::identity(4, 4))) < 1e-12);

        let d = pm(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let p = peripheral_projection(&d, &tol()).unwrap();
        assert!(inf_norm(&(p - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]))) < 1e-12);

        let j = pm(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let p = peripheral_projection(&j, &tol()).unwrap();
        assert!(inf_norm(&(p - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn peripheral_projection_errors() {
        let nil = pm(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            peripheral_projection(&nil, &tol()),
            Err(Error::QuasiNilpotentInput { .. })
        ));
        // grouped 1 - 0.9e-6 and excluded 1 - 1.1e-6 are closer than the band
        let close_pair = pm(&[
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0 - 0.9e-6, 0.0],
            &[0.0, 0.0, 1.0 - 1.1e-6],
        ]);
        assert!(matches!(
            peripheral_projection(&close_pair, &tol()),
            Err(Error::BandSeparationFailure { .. })
        ));
    }

    #[test]
    fn local_radius_examples() {
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        let lr = local_spectral_radius(&d, &e2, &tol()).unwrap();
        assert!((lr.exact - 1.0).abs() < 1e-12);
        assert!((lr.empirical - 1.0).abs() < 1e-12);
        let both = DVector::from_vec(vec![1.0, 1.0]);
        let lr = local_spectral_radius(&d, &both, &tol()).unwrap();
        assert!((lr.exact - 2.0).abs() < 1e-12);
        assert!((lr.empirical - 2.0).abs() < 1e-9);

        let k = swap_plus_identity();
        let x = DVector::from_vec(vec![0.3, 1.0, 2.0, 0.1]);
        let lr = local_spectral_radius(k.as_matrix(), &x, &tol()).unwrap();
        assert!((lr.exact - 1.0).abs() < 1e-12);
        assert!((lr.empirical - 1.0).abs() < 0.05);

        let dual = dual_local_spectral_radius(&d, &e2, &tol()).unwrap();
        assert!((dual.exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_radius_rejects_zero() {
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(local_spectral_radius(&d, &DVector::zeros(2), &tol()).is_err());
    }

    #[test]
    fn dichotomy_examples() {
        let swap = pm(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let d = power_dichotomy(&swap, &tol()).unwrap();
        assert_eq!(d.kind, DichotomyKind::ProjectionLimit);
        assert_eq!(d.subsequence_period, 2);
        assert!(inf_norm(&(d.limit - DMatrix::identity(2, 2))) < 1e-12);

        // Aⁿ = [[1, n], [0, 1]], so Aⁿ/n tends to E₁₂.
        let j = pm(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let d = power_dichotomy(&j, &tol()).unwrap();
        assert_eq!(d.kind, DichotomyKind::NilpotentLimit);
        assert_eq!(d.scaling_exponent, Some(1));
        let e12 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(inf_norm(&(&d.limit - &e12)) < 1e-12);

        let d = power_dichotomy(&swap_plus_identity(), &tol()).unwrap();
        assert_eq!(d.kind, DichotomyKind::ProjectionLimit);
        assert_eq!(d.subsequence_period, 2);
        assert!(inf_norm(&(d.limit - DMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn dichotomy_with_subdominant_part() {
        // Perron value 3, second eigenvalue 1: powers of Â converge to the
        // rank-one projection.
        let a = pm(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let d = power_dichotomy(&a, &tol()).unwrap();
        assert_eq!(d.kind, DichotomyKind::ProjectionLimit);
        assert_eq!(d.subsequence_period, 1);
        assert!(inf_norm(&(d.limit - DMatrix::from_element(2, 2, 0.5))) < 1e-12);
        assert!(d.residual <= 1e-6);
    }

    #[test]
    fn three_by_three_jordan_growth() {
        let a = pm(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0]]);
        let d = power_dichotomy(&a, &tol()).unwrap();
        assert_eq!(d.kind, DichotomyKind::NilpotentLimit);
        assert_eq!(d.scaling_exponent, Some(2));
        let e13 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(inf_norm(&(&d.limit - &e13)) < 1e-9);
    }
}
