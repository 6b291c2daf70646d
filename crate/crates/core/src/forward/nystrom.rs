//! Nyström discretisation of the combined-field integral equation for the
//! exterior sound-soft problem on a smooth closed curve.
//!
//! The scattered field is sought as
//! `u^s(x) = ∫ (∂Φ(x,y)/∂ν(y) − iη Φ(x,y)) φ(y) ds(y)`, `Φ = (i/4) H_0(k|x−y|)`,
//! which leads to `(I + K − iηS) φ = −2 u^i` on the boundary. The logarithmic
//! parts of both kernels are split off and integrated with the trigonometric
//! product rule on `2n` equispaced nodes, the smooth remainders with the
//! trapezoidal rule, giving spectral convergence for analytic curves.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::disc_kernel::{DirectionGrid, Point};
use crate::specfun::{self, EULER_GAMMA};

use super::shapes::{CurvePoint, ScattererSpec};
use super::ForwardError;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Assembled and factorised boundary system for one obstacle and wavenumber.
pub struct NystromSolver {
    k: f64,
    eta: f64,
    nodes: Vec<CurvePoint>,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

/// Weights `R_j` of `∫ ln(4 sin²((t−τ)/2)) f(τ) dτ ≈ Σ R_{|i−j|} f(t_j)`.
fn log_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..2 * n)
        .map(|d| {
            let s: f64 = (1..n).map(|m| ((m * d) as f64 * PI / nf).cos() / m as f64).sum();
            let alt = if d % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 * PI / nf * s - PI / (nf * nf) * alt
        })
        .collect()
}

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

impl NystromSolver {
    /// Assemble and factor the system with `m` quadrature nodes and coupling `η = k`.
    pub fn new(spec: &ScattererSpec, k: f64, m: usize) -> Result<Self, ForwardError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(ForwardError::BadWavenumber(k));
        }
        if m < 32 || !m.is_multiple_of(2) {
            return Err(ForwardError::BadQuadrature(m));
        }
        let n = m / 2;
        let h = PI / n as f64;
        let eta = k;
        let nodes: Vec<CurvePoint> = (0..m).map(|j| spec.eval(j as f64 * h)).collect();
        let weights = log_weights(n);

        let mut a = DMatrix::<Complex64>::identity(m, m);
        for i in 0..m {
            let xi = nodes[i];
            for j in 0..m {
                let yj = nodes[j];
                let speed = yj.dx.norm();
                // unnormalised outward normal at y_j
                let normal = Point::new(yj.dx.y, -yj.dx.x);
                let (l1, l2, m1, m2) = if i == j {
                    let l2 = cross(xi.ddx, xi.dx) / (2.0 * PI * speed * speed);
                    let m1 = -speed / (2.0 * PI);
                    let m2 = (0.5 * I - EULER_GAMMA / PI - (k * speed / 2.0).ln() / PI) * speed;
                    (
                        Complex64::new(0.0, 0.0),
                        Complex64::new(l2, 0.0),
                        Complex64::new(m1, 0.0),
                        m2,
                    )
                } else {
                    let diff = Point::new(xi.x.x - yj.x.x, xi.x.y - yj.x.y);
                    let r = diff.norm();
                    let (jv, hv) = specfun::hankel1_upto(1, k * r)?;
                    let nd = normal.dot(diff);
                    let log_s = (4.0 * (0.5 * (i as f64 - j as f64) * h).sin().powi(2)).ln();
                    let l = 0.5 * I * k * hv[1] / r * nd;
                    let l1 = -k / (2.0 * PI) * nd * jv[1] / r;
                    let mm = 0.5 * I * hv[0] * speed;
                    let m1 = -jv[0] * speed / (2.0 * PI);
                    (
                        Complex64::new(l1, 0.0),
                        l - l1 * log_s,
                        Complex64::new(m1, 0.0),
                        mm - m1 * log_s,
                    )
                };
                let r_w = weights[i.abs_diff(j)];
                a[(i, j)] += r_w * (l1 - I * eta * m1) + h * (l2 - I * eta * m2);
            }
        }
        let lu = a.clone().lu();
        if !lu.is_invertible() || lu.u().diagonal().iter().any(|d| d.norm() < 1e-14 * a.camax()) {
            let sv = a.singular_values();
            let cond = sv.max() / sv.min();
            return Err(ForwardError::SingularSystem { condition: cond });
        }
        Ok(NystromSolver { k, eta, nodes, lu })
    }

    /// Far field `u_inf(x̂)` on `obs` for incidence direction `d`.
    pub fn far_field(&self, d: Point, obs: &DirectionGrid) -> Result<DVector<Complex64>, ForwardError> {
        let k = self.k;
        let rhs = DVector::from_iterator(
            self.nodes.len(),
            self.nodes
                .iter()
                .map(|p| -2.0 * Complex64::from_polar(1.0, k * p.x.dot(d))),
        );
        let density = self.lu.solve(&rhs).ok_or(ForwardError::SingularSystem {
            condition: f64::INFINITY,
        })?;
        let h = PI / (self.nodes.len() / 2) as f64;
        let pref = Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), -FRAC_PI_4) * h;
        Ok(DVector::from_iterator(
            obs.len(),
            obs.directions().map(|xhat| {
                let sum: Complex64 = self
                    .nodes
                    .iter()
                    .zip(density.iter())
                    .map(|(p, &phi)| {
                        let normal = Point::new(p.dx.y, -p.dx.x);
                        let weight = k * normal.dot(xhat) + self.eta * p.dx.norm();
                        Complex64::from_polar(weight, -k * xhat.dot(p.x)) * phi
                    })
                    .sum();
                pref * sum
            }),
        ))
    }
}

/// Far field of the sound-soft obstacle `spec` for one incident direction.
pub fn nystrom_dirichlet(
    spec: &ScattererSpec,
    k: f64,
    d: Point,
    m: usize,
    obs: &DirectionGrid,
) -> Result<DVector<Complex64>, ForwardError> {
    NystromSolver::new(spec, k, m)?.far_field(d, obs)
}
