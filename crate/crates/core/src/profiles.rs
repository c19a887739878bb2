//! Trigonometric shear profiles, their critical points, and the overlap
//! order of a profile family.
//!
//! A profile is a real trigonometric polynomial
//! `u(y) = Σ_k a_k cos(ky) + Σ_k b_k sin(ky)` on the 2π torus, so every
//! derivative is again a profile with closed-form coefficients and no
//! numerical differentiation enters anywhere.
//!
//! A critical point of order m is a zero y* of u′ with
//! `u′(y*) = … = u^{(m)}(y*) = 0` and `u^{(m+1)}(y*) ≠ 0`; its leading
//! coefficient is `c = u^{(m+1)}(y*)/(m+1)!`, so `u(y) − u(y*) ≈ c (y−y*)^{m+1}`
//! locally. Vanishing is decided relatively: a derivative value counts as
//! zero when it is below `tol_root · max_y |u^{(k)}|`.
//!
//! The overlap order n₀ of a family {u_j} is the smallest n such that at
//! every point some profile has a nonvanishing derivative of order ≤ n+1;
//! equivalently the largest, over candidate locations, of the smallest
//! vanishing order among the profiles there. Locations are matched across
//! profiles within `tol_match` radians.
//!
//! Root finding treats `z^K u′(y)` as a complex polynomial in `z = e^{iy}`
//! and computes all its roots simultaneously, which also catches zeros of
//! even multiplicity where u′ does not change sign. Root clusters tighter
//! than [`CLUSTER_RADIUS`] are treated as one multiple zero; genuinely
//! distinct critical points closer than that are reported merged.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default relative tolerance under which a derivative value counts as
/// vanishing.
pub const TOL_ROOT: f64 = 1e-8;
/// Default relative tolerance a leading derivative must exceed to certify
/// the order of a critical point.
pub const TOL_ORDER: f64 = 1e-8;
/// Default radius (radians) within which critical points of different
/// profiles count as spatially overlapping.
pub const TOL_MATCH: f64 = 1e-6;
/// Radius (radians) within which companion eigenvalue angles are merged
/// into a single multiple-zero candidate, and within which every sign
/// change of u′ is matched to a reported critical point.
pub const CLUSTER_RADIUS: f64 = 3e-4;

const SCALE_SAMPLES: usize = 4096;
const COEFF_TRIM: f64 = 1e-14;

/// A real trigonometric polynomial `Σ a_k cos(ky) + Σ b_k sin(ky)`.
///
/// `a[k]` is the coefficient of `cos(ky)` starting at k = 0; `b[i]` is the
/// coefficient of `sin((i+1)y)`, so the sine index starts at k = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearProfile {
    #[serde(default)]
    a: Vec<f64>,
    #[serde(default)]
    b: Vec<f64>,
}

impl ShearProfile {
    /// Builds a profile from cosine and sine coefficient arrays, validating
    /// finiteness.
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.iter().chain(b.iter()).any(|c| !c.is_finite()) {
            return Err(Error::Config("profile coefficients must be finite".into()));
        }
        Ok(ShearProfile { a, b })
    }

    /// u(y) = sin y.
    pub fn sin() -> Self {
        ShearProfile { a: vec![], b: vec![1.0] }
    }

    /// u(y) = cos y.
    pub fn cos() -> Self {
        ShearProfile { a: vec![0.0, 1.0], b: vec![] }
    }

    /// u(y) = sin³y = (3 sin y − sin 3y)/4.
    pub fn sin_cubed() -> Self {
        ShearProfile { a: vec![], b: vec![0.75, 0.0, -0.25] }
    }

    pub fn cosine_coeffs(&self) -> &[f64] {
        &self.a
    }

    pub fn sine_coeffs(&self) -> &[f64] {
        &self.b
    }

    fn coeff_floor(&self) -> f64 {
        let max = self
            .a
            .iter()
            .chain(self.b.iter())
            .fold(0.0f64, |m, c| m.max(c.abs()));
        COEFF_TRIM * max.max(1.0)
    }

    /// Largest k with a nonnegligible coefficient.
    pub fn degree(&self) -> usize {
        let floor = self.coeff_floor();
        let ka = self
            .a
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| c.abs() > floor)
            .map_or(0, |(k, _)| k);
        let kb = self
            .b
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| c.abs() > floor)
            .map_or(0, |(i, _)| i + 1);
        ka.max(kb)
    }

    /// True when no oscillatory (k ≥ 1) coefficient survives.
    pub fn is_constant(&self) -> bool {
        let floor = self.coeff_floor();
        self.a.iter().skip(1).all(|c| c.abs() <= floor)
            && self.b.iter().all(|c| c.abs() <= floor)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let mut v = 0.0;
        for (k, &c) in self.a.iter().enumerate() {
            v += c * (k as f64 * y).cos();
        }
        for (i, &c) in self.b.iter().enumerate() {
            v += c * ((i + 1) as f64 * y).sin();
        }
        v
    }

    /// Exact derivative: `cos(ky) ↦ −k sin(ky)`, `sin(ky) ↦ k cos(ky)`.
    pub fn derivative(&self) -> ShearProfile {
        let deg = self.a.len().saturating_sub(1).max(self.b.len());
        let mut a = vec![0.0; deg + 1];
        let mut b = vec![0.0; deg.max(1)];
        for k in 1..=deg {
            let ak = self.a.get(k).copied().unwrap_or(0.0);
            let bk = self.b.get(k - 1).copied().unwrap_or(0.0);
            a[k] = k as f64 * bk;
            b[k - 1] = -(k as f64) * ak;
        }
        ShearProfile { a, b }
    }

    /// m-fold derivative.
    pub fn derivative_n(&self, m: usize) -> ShearProfile {
        let mut d = self.clone();
        for _ in 0..m {
            d = d.derivative();
        }
        d
    }

    /// Sampled sup norm, used as the scale for relative vanishing tests.
    pub fn max_abs(&self) -> f64 {
        let h = 2.0 * PI / SCALE_SAMPLES as f64;
        (0..SCALE_SAMPLES)
            .map(|i| self.eval(i as f64 * h).abs())
            .fold(0.0, f64::max)
    }

    /// Coefficients c_k of the representation `Σ_{k=−K}^{K} c_k e^{iky}`,
    /// returned as a vector indexed by k + K.
    fn exponential_coeffs(&self) -> Vec<Complex64> {
        let deg = self.a.len().saturating_sub(1).max(self.b.len());
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * deg + 1];
        c[deg] = Complex64::new(self.a.first().copied().unwrap_or(0.0), 0.0);
        for k in 1..=deg {
            let ak = self.a.get(k).copied().unwrap_or(0.0);
            let bk = self.b.get(k - 1).copied().unwrap_or(0.0);
            c[deg + k] = Complex64::new(ak / 2.0, -bk / 2.0);
            c[deg - k] = Complex64::new(ak / 2.0, bk / 2.0);
        }
        c
    }
}

/// A zero of u′ with its vanishing order and local leading coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// Location in [0, 2π).
    pub y: f64,
    /// Order m: u′, …, u^{(m)} vanish at y while u^{(m+1)} does not.
    pub order: usize,
    /// c = u^{(m+1)}(y) / (m+1)!.
    pub leading_coeff: f64,
}

/// All zeros of u′ on [0, 2π) with orders and leading coefficients,
/// sorted by location.
pub fn critical_points(
    profile: &ShearProfile,
    tol_root: f64,
    tol_order: f64,
) -> Result<Vec<CriticalPoint>> {
    if profile.is_constant() {
        return Err(Error::Degenerate(
            "constant profile: every point is critical at infinite order".into(),
        ));
    }
    let deg = profile.degree();
    let max_order = 2 * deg;
    let derivs: Vec<ShearProfile> =
        (0..=max_order + 2).map(|m| profile.derivative_n(m)).collect();
    let scales: Vec<f64> = derivs.iter().map(|d| d.max_abs().max(f64::MIN_POSITIVE)).collect();

    let angles = unit_circle_root_angles(&derivs[1])?;
    let clusters = cluster_angles(&angles, CLUSTER_RADIUS);

    let mut found: Vec<CriticalPoint> = Vec::new();
    for (center, multiplicity) in clusters {
        if let Some(cp) = classify_candidate(
            &derivs, &scales, center, multiplicity, max_order, tol_root, tol_order,
        )? {
            found.push(cp);
        }
    }
    found.sort_by(|p, q| p.y.partial_cmp(&q.y).unwrap());
    found.dedup_by(|p, q| circular_distance(p.y, q.y) < TOL_MATCH);
    Ok(found)
}

/// Angles of the near-unit-circle roots of `z^K u′` as a polynomial in
/// z = e^{iy}.
fn unit_circle_root_angles(uprime: &ShearProfile) -> Result<Vec<f64>> {
    let coeffs = uprime.exponential_coeffs();
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = COEFF_TRIM * max;
    let lo = coeffs.iter().position(|c| c.norm() > floor).unwrap();
    let hi = coeffs.iter().rposition(|c| c.norm() > floor).unwrap();
    let trimmed = &coeffs[lo..=hi];
    if trimmed.len() == 1 {
        return Ok(vec![]);
    }
    let roots = polynomial_roots(trimmed)?;
    let mut angles: Vec<f64> = roots
        .iter()
        .filter(|z| z.norm().ln().abs() < 0.05)
        .map(|z| z.arg().rem_euclid(2.0 * PI))
        .collect();
    angles.sort_by(|p, q| p.partial_cmp(q).unwrap());
    Ok(angles)
}

/// All complex roots of `Σ c_i z^i` by simultaneous (Weierstrass)
/// iteration. Simple roots converge quadratically; a root of multiplicity
/// m stagnates in a cluster of radius ~ ε^{1/m}, which the caller's
/// clustering absorbs. Acceptance is by polynomial residual, which ends up
/// at the noise floor in both cases.
fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| {
        let mut v = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            v = v * z + c;
        }
        v
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..d)
        .scan(Complex64::new(1.0, 0.0), |s, _| {
            *s *= seed;
            Some(*s)
        })
        .collect();
    for _ in 0..600 {
        let mut max_step = 0.0f64;
        for i in 0..d {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 {
            break;
        }
    }
    let coeff_scale: f64 = monic.iter().map(|c| c.norm()).sum();
    for zi in &z {
        let bound = coeff_scale * zi.norm().max(1.0).powi(d as i32);
        if eval(*zi).norm() > 1e-9 * bound {
            return Err(Error::FitFailure(format!(
                "root iteration did not converge for a degree-{d} polynomial"
            )));
        }
    }
    Ok(z)
}

/// Greedy circular clustering of sorted angles; returns (circular mean,
/// member count) per cluster.
fn cluster_angles(angles: &[f64], radius: f64) -> Vec<(f64, usize)> {
    if angles.is_empty() {
        return vec![];
    }
    let mut groups: Vec<Vec<f64>> = vec![vec![angles[0]]];
    for &a in &angles[1..] {
        let last = *groups.last().unwrap().last().unwrap();
        if a - last <= radius {
            groups.last_mut().unwrap().push(a);
        } else {
            groups.push(vec![a]);
        }
    }
    // Merge across the 0 / 2π seam.
    if groups.len() > 1 {
        let first_lo = groups[0][0];
        let last_hi = *groups.last().unwrap().last().unwrap();
        if first_lo + 2.0 * PI - last_hi <= radius {
            let tail = groups.pop().unwrap();
            groups[0].extend(tail.into_iter().map(|a| a - 2.0 * PI));
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let sum: Complex64 = g.iter().map(|&a| Complex64::from_polar(1.0, a)).sum();
            let count = g.len();
            (sum.arg().rem_euclid(2.0 * PI), count)
        })
        .collect()
}

/// Polishes a candidate location and determines its vanishing order.
///
/// The order hint is the eigenvalue cluster multiplicity; Newton runs on
/// u^{(m)} (a simple zero when the hint is right), the vanishing chain
/// u′ … u^{(m)} is verified relatively, and when the leading derivative is
/// too small to certify the order is escalated. Candidates whose chain
/// fails (off-circle eigenvalue artifacts) are dropped.
fn classify_candidate(
    derivs: &[ShearProfile],
    scales: &[f64],
    start: f64,
    hint: usize,
    max_order: usize,
    tol_root: f64,
    tol_order: f64,
) -> Result<Option<CriticalPoint>> {
    // Below this relative size the order is certified; between tol_root and
    // this the value is ambiguous, so escalation is tried first.
    let certify = tol_order.max(tol_root.sqrt());
    let mut m = hint.clamp(1, max_order);
    let mut y = start;
    let mut fallback: Option<CriticalPoint> = None;
    loop {
        y = newton_polish(&derivs[m], &derivs[m + 1], y, scales[m])?;
        let chain_ok =
            (1..=m).all(|k| derivs[k].eval(y).abs() <= tol_root * scales[k]);
        if !chain_ok {
            return Ok(fallback);
        }
        let yy = y.rem_euclid(2.0 * PI);
        let lead = derivs[m + 1].eval(y);
        let rel = lead.abs() / scales[m + 1];
        let cp = CriticalPoint {
            y: yy,
            order: m,
            leading_coeff: lead / factorial(m + 1),
        };
        if rel > certify {
            return Ok(Some(cp));
        }
        if rel > tol_root {
            fallback = Some(cp);
        }
        m += 1;
        if m > max_order {
            return match fallback {
                Some(cp) => Ok(Some(cp)),
                None => Err(Error::InvariantViolation(format!(
                    "vanishing order at y = {yy:.6} exceeds 2K = {max_order}, impossible \
                     for a degree-{} trigonometric polynomial",
                    max_order / 2
                ))),
            };
        }
    }
}

fn newton_polish(
    f: &ShearProfile,
    fprime: &ShearProfile,
    start: f64,
    scale: f64,
) -> Result<f64> {
    let mut y = start;
    let mut last_step = f64::INFINITY;
    for _ in 0..100 {
        let v = f.eval(y);
        if v.abs() <= 1e-14 * scale {
            return Ok(y);
        }
        let d = fprime.eval(y);
        if d == 0.0 {
            break;
        }
        let step = (-v / d).clamp(-0.1, 0.1);
        y += step;
        last_step = step.abs();
        if last_step < 1e-13 {
            return Ok(y);
        }
    }
    // Multiple zeros stagnate with small bouncing steps at the noise
    // floor; that still localizes the root well enough for escalation.
    if last_step < 1e-6 {
        return Ok(y);
    }
    Err(Error::NewtonNoConvergence {
        lo: start - CLUSTER_RADIUS,
        hi: start + CLUSTER_RADIUS,
        iters: 100,
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Distance on the circle of circumference 2π.
pub fn circular_distance(p: f64, q: f64) -> f64 {
    let d = (p - q).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// A family of shear profiles with precomputed critical points and
/// overlap order.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileFamily {
    profiles: Vec<ShearProfile>,
    critical_points: Vec<Vec<CriticalPoint>>,
    overlap_order: usize,
}

impl ProfileFamily {
    /// Builds a family with the default tolerances.
    pub fn new(profiles: Vec<ShearProfile>) -> Result<Self> {
        Self::with_tolerances(profiles, TOL_ROOT, TOL_ORDER, TOL_MATCH)
    }

    pub fn with_tolerances(
        profiles: Vec<ShearProfile>,
        tol_root: f64,
        tol_order: f64,
        tol_match: f64,
    ) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::Config("profile family is empty".into()));
        }
        if let Some(j) = profiles.iter().position(|p| p.is_constant()) {
            return Err(Error::Degenerate(format!(
                "profile {j} is constant and overlaps at infinite order everywhere"
            )));
        }
        let critical_points = profiles
            .iter()
            .map(|p| critical_points(p, tol_root, tol_order))
            .collect::<Result<Vec<_>>>()?;
        let overlap_order = overlap_order(&critical_points, tol_match);
        Ok(ProfileFamily { profiles, critical_points, overlap_order })
    }

    pub fn profiles(&self) -> &[ShearProfile] {
        &self.profiles
    }

    pub fn critical_points(&self) -> &[Vec<CriticalPoint>] {
        &self.critical_points
    }

    /// The overlap order n₀ of the family.
    pub fn overlap_order(&self) -> usize {
        self.overlap_order
    }

    /// Candidate locations where the family-wide minimum vanishing order is
    /// attained, i.e. the maximally overlapping critical points.
    pub fn overlap_locations(&self) -> Vec<f64> {
        if self.overlap_order == 0 {
            return vec![];
        }
        let clusters = cluster_union(&self.critical_points, TOL_MATCH);
        clusters
            .into_iter()
            .filter(|(_, min_order)| *min_order == self.overlap_order)
            .map(|(y, _)| y)
            .collect()
    }
}

/// The overlap order of a family given its per-profile critical points:
/// the largest, over candidate locations, of the smallest vanishing order
/// among all profiles there, where a profile without a critical point at
/// the location contributes order 0.
pub fn overlap_order(per_profile: &[Vec<CriticalPoint>], tol_match: f64) -> usize {
    cluster_union(per_profile, tol_match)
        .into_iter()
        .map(|(_, min_order)| min_order)
        .max()
        .unwrap_or(0)
}

/// Clusters the union of all critical locations and attaches to each
/// cluster the family-wide minimum vanishing order.
fn cluster_union(
    per_profile: &[Vec<CriticalPoint>],
    tol_match: f64,
) -> Vec<(f64, usize)> {
    let mut tagged: Vec<(f64, usize, usize)> = Vec::new();
    for (j, cps) in per_profile.iter().enumerate() {
        for cp in cps {
            tagged.push((cp.y, j, cp.order));
        }
    }
    if tagged.is_empty() {
        return vec![];
    }
    tagged.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut groups: Vec<Vec<(f64, usize, usize)>> = vec![vec![tagged[0]]];
    for &t in &tagged[1..] {
        let last = groups.last().unwrap().last().unwrap().0;
        if t.0 - last <= tol_match {
            groups.last_mut().unwrap().push(t);
        } else {
            groups.push(vec![t]);
        }
    }
    if groups.len() > 1 {
        let first_lo = groups[0][0].0;
        let last_hi = groups.last().unwrap().last().unwrap().0;
        if first_lo + 2.0 * PI - last_hi <= tol_match {
            let tail = groups.pop().unwrap();
            groups[0].extend(tail);
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let y = g[0].0;
            let min_order = (0..per_profile.len())
                .map(|j| {
                    g.iter()
                        .filter(|t| t.1 == j)
                        .map(|t| t.2)
                        .max()
                        .unwrap_or(0)
                })
                .min()
                .unwrap_or(0);
            (y, min_order)
        })
        .collect()
}
