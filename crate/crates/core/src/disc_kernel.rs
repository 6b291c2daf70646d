//! Far field of a sound-soft disc and the discretised far-field operator.
//!
//! Normalisation: the scattered field behaves like `e^{ikr}/sqrt(r) u_inf(x̂)`,
//! so the far field of a disc of radius `R` centred at the origin is
//!
//! ```text
//! u_inf(θ) = -e^{-iπ/4} sqrt(2/(πk)) [c_0 + 2 Σ_{n≥1} c_n cos(nθ)],  c_n = J_n(kR) / H_n(kR)
//! ```
//!
//! with `θ` the angle between observation and incidence directions.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::specfun::{self, SpecFunError};

/// Default tail tolerance for the disc series.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-14;

/// Largest series order the truncation rule may select.
pub const MAX_TRUNCATION_ORDER: usize = 200;

/// Distance of `kR` to a Bessel zero below which a disc is flagged.
pub const EIGENVALUE_WARN_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("disc radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("wavenumber must be positive and finite, got {0}")]
    BadWavenumber(f64),
    #[error("truncation tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("series truncation would exceed order {MAX_TRUNCATION_ORDER} (kR = {kr})")]
    TruncationOverflow { kr: f64 },
    #[error("direction grid: {0}")]
    BadGrid(String),
    #[error("right-hand side has {got} entries, observation grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Unit vector `(cos φ, sin φ)`.
    pub fn unit(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point { x: c, y: s }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Ordered set of directions on the unit circle, stored as angles in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid {
    angles: Vec<f64>,
}

impl DirectionGrid {
    /// `M` equally spaced directions `φ_j = 2π j / M`, starting at angle 0.
    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "uniform direction grid needs at least one direction");
        DirectionGrid {
            angles: (0..m).map(|j| TAU * j as f64 / m as f64).collect(),
        }
    }

    /// Grid from explicit angles; they must be finite, in `[0, 2π)` and strictly increasing.
    pub fn from_angles(angles: Vec<f64>) -> Result<Self, KernelError> {
        if angles.is_empty() {
            return Err(KernelError::BadGrid("no directions".into()));
        }
        for (i, &a) in angles.iter().enumerate() {
            if !a.is_finite() || !(0.0..TAU).contains(&a) {
                return Err(KernelError::BadGrid(format!(
                    "angle {a} at position {i} outside [0, 2π)"
                )));
            }
            if i > 0 && a <= angles[i - 1] {
                return Err(KernelError::BadGrid(format!(
                    "angles not strictly increasing at position {i}"
                )));
            }
        }
        Ok(DirectionGrid { angles })
    }

    /// A single direction, with the angle reduced into `[0, 2π)`.
    pub fn single(angle: f64) -> Result<Self, KernelError> {
        Self::from_angles(vec![reduce_angle(angle)])
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn direction(&self, i: usize) -> Point {
        Point::unit(self.angles[i])
    }

    pub fn directions(&self) -> impl Iterator<Item = Point> + '_ {
        self.angles.iter().map(|&a| Point::unit(a))
    }
}

/// Reduce an angle into `[0, 2π)`.
pub fn reduce_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Sound-soft sampling disc: radius and wavenumber, with the precomputed
/// series coefficients `c_n = J_n(kR)/H_n(kR)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscSpec {
    radius: f64,
    k: f64,
    coeffs: Vec<Complex64>,
    near_eigenvalue: Option<(usize, f64)>,
}

impl DiscSpec {
    /// Disc with the default truncation tolerance.
    pub fn new(radius: f64, k: f64) -> Result<Self, KernelError> {
        Self::with_tolerance(radius, k, DEFAULT_TRUNCATION_TOL)
    }

    pub fn with_tolerance(radius: f64, k: f64, tol: f64) -> Result<Self, KernelError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(KernelError::BadRadius(radius));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(KernelError::BadWavenumber(k));
        }
        let n = truncation_order(radius, k, tol)?;
        let kr = k * radius;
        let (j, h) = specfun::hankel1_upto(n + 1, kr)?;
        let coeffs = (0..=n).map(|i| series_ratio(j[i], h[i])).collect();
        let near_eigenvalue = nearest_bessel_zero(&j, kr, n);
        Ok(DiscSpec {
            radius,
            k,
            coeffs,
            near_eigenvalue,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Series truncation order `N`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `J_n(kR)/H_n(kR)` for `n = 0..=N`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `Some((n, distance))` when `kR` lies within [`EIGENVALUE_WARN_DISTANCE`]
    /// of a zero of `J_n`, i.e. `k²` is close to a Dirichlet eigenvalue of the disc.
    pub fn near_eigenvalue(&self) -> Option<(usize, f64)> {
        self.near_eigenvalue
    }

    /// Prefactor `-e^{-iπ/4} sqrt(2/(πk))`.
    pub fn prefactor(&self) -> Complex64 {
        -Complex64::from_polar((2.0 / (PI * self.k)).sqrt(), -FRAC_PI_4)
    }

    /// Eigenvalues of the continuous far-field operator on angular Fourier
    /// modes: `γ_n = prefactor · 2π · c_n`.
    pub fn fourier_eigenvalue(&self, n: usize) -> Complex64 {
        if n >= self.coeffs.len() {
            return Complex64::new(0.0, 0.0);
        }
        self.prefactor() * TAU * self.coeffs[n]
    }
}

fn series_ratio(j: f64, h: Complex64) -> Complex64 {
    if !h.im.is_finite() {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(j, 0.0) / h
}

/// Smallest `n ≤ order` (with `n ≤ kR + 1`, the only orders with zeros that
/// close) whose Newton distance `|J_n / J_n'|` to a zero is below the threshold.
fn nearest_bessel_zero(j: &[f64], kr: f64, order: usize) -> Option<(usize, f64)> {
    let last = order.min(kr.floor() as usize + 1).min(j.len() - 2);
    (0..=last)
        .filter_map(|n| {
            let deriv = if n == 0 { -j[1] } else { 0.5 * (j[n - 1] - j[n + 1]) };
            let dist = (j[n] / deriv).abs();
            (dist < EIGENVALUE_WARN_DISTANCE).then_some((n, dist))
        })
        .next()
}

/// Smallest `N ≥ ceil(kR) + 10` with `|J_m(kR)/H_m(kR)| < tol` for `m = N..N+3`.
pub fn truncation_order(radius: f64, k: f64, tol: f64) -> Result<usize, KernelError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(KernelError::BadTolerance(tol));
    }
    let kr = k * radius;
    if !(kr.is_finite() && kr > 0.0) {
        return Err(KernelError::BadRadius(radius));
    }
    let start = kr.ceil() as usize + 10;
    if start > MAX_TRUNCATION_ORDER {
        return Err(KernelError::TruncationOverflow { kr });
    }
    let (j, h) = specfun::hankel1_upto(MAX_TRUNCATION_ORDER + 3, kr)?;
    let small = |n: usize| series_ratio(j[n], h[n]).norm() < tol;
    (start..=MAX_TRUNCATION_ORDER)
        .find(|&n| (n..=n + 3).all(small))
        .ok_or(KernelError::TruncationOverflow { kr })
}

/// Far field of the disc centred at the origin at included angle `theta`.
pub fn disc_farfield(disc: &DiscSpec, theta: f64) -> Complex64 {
    disc.prefactor() * cosine_series(&disc.coeffs, theta.cos())
}

/// `c_0 + 2 Σ c_n cos(nθ)` via the Chebyshev recurrence on `cos θ`.
fn cosine_series(coeffs: &[Complex64], cos_theta: f64) -> Complex64 {
    let mut sum = coeffs[0];
    let (mut prev, mut cur) = (1.0, cos_theta);
    for c in &coeffs[1..] {
        sum += 2.0 * c * cur;
        let next = 2.0 * cos_theta * cur - prev;
        prev = cur;
        cur = next;
    }
    sum
}

/// Included angle between two unit vectors, in `[0, π]`.
pub fn included_angle(a: Point, b: Point) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    cross.abs().atan2(a.dot(b))
}

/// Far field of the disc translated to `z`: `e^{ikz·(d - x̂)} u_inf(∠(x̂, d))`.
pub fn shifted_farfield(disc: &DiscSpec, z: Point, xhat: Point, d: Point) -> Complex64 {
    let phase = disc.k * (z.dot(d) - z.dot(xhat));
    Complex64::from_polar(1.0, phase) * disc_farfield(disc, included_angle(xhat, d))
}

/// Discretised phase-modulated far-field operator
/// `A^z[l, j] = e^{ikz·d_j} u_inf(x̂_l, d_j)`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub entries: DMatrix<Complex64>,
    pub center: Point,
    pub disc: DiscSpec,
}

/// Assemble `A^z` for observation grid `obs` (rows) and incidence grid `inc` (columns).
pub fn assemble_kernel(disc: &DiscSpec, z: Point, obs: &DirectionGrid, inc: &DirectionGrid) -> KernelMatrix {
    let cosines: Vec<Complex64> = inc
        .directions()
        .map(|d| Complex64::from_polar(1.0, disc.k * z.dot(d)))
        .collect();
    let obs_dirs: Vec<Point> = obs.directions().collect();
    let inc_dirs: Vec<Point> = inc.directions().collect();
    let entries = DMatrix::from_fn(obs.len(), inc.len(), |l, j| {
        cosines[j] * disc_farfield(disc, included_angle(obs_dirs[l], inc_dirs[j]))
    });
    KernelMatrix {
        entries,
        center: z,
        disc: disc.clone(),
    }
}

/// `e^{ikz·x̂_l} U_l`.
pub fn modulate_rhs(
    k: f64,
    z: Point,
    obs: &DirectionGrid,
    u: &DVector<Complex64>,
) -> Result<DVector<Complex64>, KernelError> {
    if u.len() != obs.len() {
        return Err(KernelError::LengthMismatch {
            expected: obs.len(),
            got: u.len(),
        });
    }
    Ok(DVector::from_iterator(
        u.len(),
        obs.directions()
            .zip(u.iter())
            .map(|(x, &v)| Complex64::from_polar(1.0, k * z.dot(x)) * v),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn truncation_rule() {
        let n1 = truncation_order(1.0, 1.0, 1e-14).unwrap();
        assert!(n1 <= 25);
        assert!(truncation_order(1.0, 1.0, 1e-2).unwrap() <= n1);
        assert!(truncation_order(2.4, 1.0, 1e-14).unwrap() > n1);
        assert!(truncation_order(1.0, 1.0, 0.0).is_err());
        assert!(matches!(
            truncation_order(500.0, 1.0, 1e-14),
            Err(KernelError::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn tail_below_tolerance() {
        let disc = DiscSpec::new(1.0, 1.0).unwrap();
        let n = disc.order();
        let (j, h) = specfun::hankel1_upto(n + 1, 1.0).unwrap();
        let next = 2.0 * series_ratio(j[n + 1], h[n + 1]).norm();
        let partial = cosine_series(disc.coefficients(), 1.0).norm();
        assert!(next / partial < 1e-14);
    }

    #[test]
    fn even_in_angle() {
        let disc = DiscSpec::new(1.3, 2.0).unwrap();
        for &t in &[0.1, 0.9, 2.0, 3.1] {
            assert_eq!(disc_farfield(&disc, t), disc_farfield(&disc, -t));
        }
    }

    #[test]
    fn translation_examples() {
        let disc = DiscSpec::new(1.0, 1.0).unwrap();
        let d = Point::unit(0.7);
        let x = Point::unit(2.1);
        assert_eq!(
            shifted_farfield(&disc, Point::ORIGIN, x, d),
            disc_farfield(&disc, included_angle(x, d))
        );
        let z = Point::new(-4.0, 9.5);
        assert!(close(
            shifted_farfield(&disc, z, d, d),
            disc_farfield(&disc, 0.0),
            1e-15
        ));

        let got = shifted_farfield(&disc, Point::new(3.0, 5.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0));
        let want = Complex64::from_polar(1.0, 2.0) * disc_farfield(&disc, std::f64::consts::FRAC_PI_2);
        assert!((got.re - want.re).abs() <= 1e-14 && (got.im - want.im).abs() <= 1e-14);
    }

    #[test]
    fn kernel_is_circulant_at_origin() {
        let disc = DiscSpec::new(1.0, 1.0).unwrap();
        let g = DirectionGrid::uniform(52);
        let a = assemble_kernel(&disc, Point::ORIGIN, &g, &g).entries;
        for l in 0..52 {
            for j in 0..52 {
                let first = a[((l + 52 - j) % 52, 0)];
                assert!(close(a[(l, j)], first, 1e-13));
                assert!(close(a[(l, j)], a[(j, l)], 1e-13));
            }
        }
    }

    #[test]
    fn kernel_factorises() {
        let disc = DiscSpec::new(0.6, 1.0).unwrap();
        let g = DirectionGrid::uniform(20);
        let z = Point::new(2.5, -1.0);
        let a0 = assemble_kernel(&disc, Point::ORIGIN, &g, &g).entries;
        let az = assemble_kernel(&disc, z, &g, &g).entries;
        for l in 0..20 {
            for j in 0..20 {
                let phase = Complex64::from_polar(1.0, z.dot(g.direction(j)));
                assert_eq!(az[(l, j)], phase * a0[(l, j)]);
            }
        }
    }

    #[test]
    fn modulation() {
        let g = DirectionGrid::uniform(8);
        let u = DVector::from_fn(8, |i, _| Complex64::new(i as f64, 1.0 - i as f64));
        assert_eq!(modulate_rhs(1.0, Point::ORIGIN, &g, &u).unwrap(), u);
        let m = modulate_rhs(1.3, Point::new(2.0, -7.0), &g, &u).unwrap();
        assert!((m.norm() - u.norm()).abs() <= 1e-13);
        let one = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let r = modulate_rhs(1.0, Point::new(1.0, 0.0), &DirectionGrid::single(0.0).unwrap(), &one).unwrap();
        assert!(close(r[0], Complex64::from_polar(1.0, 1.0), 1e-16));
        assert!(modulate_rhs(1.0, Point::ORIGIN, &g, &one).is_err());
    }

    #[test]
    fn eigenvalue_flag() {
        // kR at the first zero of J_0
        let disc = DiscSpec::new(2.404_825_557_695_773, 1.0).unwrap();
        assert_eq!(disc.near_eigenvalue().map(|(n, _)| n), Some(0));
        assert!(DiscSpec::new(1.0, 1.0).unwrap().near_eigenvalue().is_none());
        // J_1 first zero
        let disc = DiscSpec::new(3.831_705_970_207_512, 1.0).unwrap();
        assert_eq!(disc.near_eigenvalue().map(|(n, _)| n), Some(1));
    }

    #[test]
    fn grid_validation() {
        assert!(DirectionGrid::from_angles(vec![]).is_err());
        assert!(DirectionGrid::from_angles(vec![0.5, 0.5]).is_err());
        assert!(DirectionGrid::from_angles(vec![-0.1]).is_err());
        assert!(DirectionGrid::from_angles(vec![TAU]).is_err());
        assert_eq!(
            DirectionGrid::single(-std::f64::consts::FRAC_PI_2).unwrap().angles()[0],
            1.5 * PI
        );
        assert_eq!(DirectionGrid::uniform(4).angles()[1], std::f64::consts::FRAC_PI_2);
    }
}
