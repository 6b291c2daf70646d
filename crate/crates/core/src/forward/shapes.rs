//! Parametric boundary curves for the forward solver.

use std::f64::consts::TAU;

use crate::disc_kernel::Point;

use super::ForwardError;

/// Position and first two derivatives of a boundary parametrisation at `t`.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub x: Point,
    pub dx: Point,
    pub ddx: Point,
}

/// Obstacle boundary shapes. Every curve is 2π-periodic, C² and traversed
/// counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disc {
        center: Point,
        radius: f64,
    },
    /// `(1 + 0.15 cos 3t)(cos t, sin t) + (3, 5)`.
    Triangle,
    /// `(1.5 sin t, cos t + 0.65 cos 2t − 0.65) + (3, 5)`, traversed with
    /// `t ↦ −t` so the orientation is counterclockwise.
    Kite,
    /// Star-shaped curve `r(t)(cos t, sin t) + center` with
    /// `r(t) = a_0 + Σ_n (a_n cos nt + b_n sin nt)`.
    Star {
        center: Point,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    },
}

/// Boundary condition tag; only the sound-soft case has a native solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryCondition {
    #[default]
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScattererSpec {
    pub shape: Shape,
    pub bc: BoundaryCondition,
}

const SHAPE_CENTER: Point = Point::new(3.0, 5.0);

impl ScattererSpec {
    pub fn new(shape: Shape) -> Result<Self, ForwardError> {
        let spec = ScattererSpec {
            shape,
            bc: BoundaryCondition::Dirichlet,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn disc(center: Point, radius: f64) -> Result<Self, ForwardError> {
        Self::new(Shape::Disc { center, radius })
    }

    pub fn triangle() -> Self {
        ScattererSpec {
            shape: Shape::Triangle,
            bc: BoundaryCondition::Dirichlet,
        }
    }

    pub fn kite() -> Self {
        ScattererSpec {
            shape: Shape::Kite,
            bc: BoundaryCondition::Dirichlet,
        }
    }

    fn validate(&self) -> Result<(), ForwardError> {
        match &self.shape {
            Shape::Disc { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.x.is_finite() || !center.y.is_finite() {
                    return Err(ForwardError::BadShape(format!(
                        "disc radius {radius} / center {center:?}"
                    )));
                }
            }
            Shape::Star {
                cos_coeffs, sin_coeffs, ..
            } => {
                if cos_coeffs.is_empty() {
                    return Err(ForwardError::BadShape("star curve needs a constant term".into()));
                }
                if cos_coeffs.iter().chain(sin_coeffs).any(|c| !c.is_finite()) {
                    return Err(ForwardError::BadShape("non-finite star coefficient".into()));
                }
                // r > 0 everywhere keeps the curve simple.
                let min_r = (0..2048)
                    .map(|i| star_radius(cos_coeffs, sin_coeffs, TAU * i as f64 / 2048.0).0)
                    .fold(f64::INFINITY, f64::min);
                if min_r.is_nan() || min_r <= 0.0 {
                    return Err(ForwardError::BadShape("star radius must stay positive".into()));
                }
            }
            Shape::Triangle | Shape::Kite => {}
        }
        Ok(())
    }

    /// Boundary point and derivatives at parameter `t`.
    pub fn eval(&self, t: f64) -> CurvePoint {
        match &self.shape {
            Shape::Disc { center, radius } => star_point(*center, &[*radius], &[], t),
            Shape::Triangle => star_point(SHAPE_CENTER, &[1.0, 0.0, 0.0, 0.15], &[], t),
            Shape::Kite => {
                let s = -t;
                let (sin, cos) = s.sin_cos();
                let (sin2, cos2) = (2.0 * s).sin_cos();
                CurvePoint {
                    x: Point::new(1.5 * sin + SHAPE_CENTER.x, cos + 0.65 * cos2 - 0.65 + SHAPE_CENTER.y),
                    dx: Point::new(-1.5 * cos, sin + 1.3 * sin2),
                    ddx: Point::new(-1.5 * sin, -cos - 2.6 * cos2),
                }
            }
            Shape::Star {
                center,
                cos_coeffs,
                sin_coeffs,
            } => star_point(*center, cos_coeffs, sin_coeffs, t),
        }
    }

    /// Radius of a disc about `center` containing the whole boundary.
    pub fn circumradius_about(&self, center: Point) -> f64 {
        (0..4096)
            .map(|i| self.eval(TAU * i as f64 / 4096.0).x.dist(center))
            .fold(0.0, f64::max)
    }

    /// Signed enclosed area (positive for counterclockwise curves).
    pub fn signed_area(&self) -> f64 {
        let n = 4096;
        let sum: f64 = (0..n)
            .map(|i| {
                let p = self.eval(TAU * i as f64 / n as f64);
                p.x.x * p.dx.y - p.x.y * p.dx.x
            })
            .sum();
        0.5 * sum * TAU / n as f64
    }
}

/// `(r, r', r'')` of a trigonometric radius function.
fn star_radius(a: &[f64], b: &[f64], t: f64) -> (f64, f64, f64) {
    let mut r = a[0];
    let (mut dr, mut ddr) = (0.0, 0.0);
    for n in 1..a.len().max(b.len() + 1) {
        let nf = n as f64;
        let (s, c) = (nf * t).sin_cos();
        let an = a.get(n).copied().unwrap_or(0.0);
        let bn = b.get(n - 1).copied().unwrap_or(0.0);
        r += an * c + bn * s;
        dr += nf * (-an * s + bn * c);
        ddr += -nf * nf * (an * c + bn * s);
    }
    (r, dr, ddr)
}

fn star_point(center: Point, a: &[f64], b: &[f64], t: f64) -> CurvePoint {
    let (r, dr, ddr) = star_radius(a, b, t);
    let (s, c) = t.sin_cos();
    CurvePoint {
        x: Point::new(center.x + r * c, center.y + r * s),
        dx: Point::new(dr * c - r * s, dr * s + r * c),
        ddx: Point::new(ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s),
    }
}
