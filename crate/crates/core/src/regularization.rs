//! Dense complex SVD and Tikhonov-regularised least squares.
//!
//! For `A = U diag(σ) V*` and data `b`, the Tikhonov solution
//! `argmin ‖Ag - b‖² + α‖g‖²` is `g_α = V diag(σ/(σ²+α)) U* b`. Everything
//! the sampling method needs (solution norm, residual norm, discrepancy
//! parameter) is a cheap function of the projection `β = U* b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Regularisation parameter used throughout the numerical examples.
pub const DEFAULT_ALPHA: f64 = 1e-5;

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("SVD did not converge within {SVD_MAX_ITER} iterations")]
    NoConvergence,
    #[error("right-hand side has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("regularisation parameter must be positive and finite, got {0}")]
    BadAlpha(f64),
    #[error("relative discrepancy must lie in (0, 1), got {0}")]
    BadDiscrepancy(f64),
    #[error("discrepancy {delta:e} outside the attainable range ({lower:e}, {upper:e})")]
    BracketInfeasible { delta: f64, lower: f64, upper: f64 },
}

/// Thin SVD `A = U diag(σ) V*`, σ descending.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<Complex64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<Complex64>,
}

/// Compute the thin SVD of `a`.
///
/// Singular triplets are sorted by decreasing σ. The phase of each pair
/// `(u_i, v_i)` is fixed so that the largest-magnitude entry of `v_i`
/// (first one on ties) is real and positive.
pub fn svd(a: &DMatrix<Complex64>) -> Result<SvdFactors, RegError> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(RegError::NonFinite);
    }
    let dec = a
        .clone()
        .try_svd(true, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or(RegError::NoConvergence)?;
    let u_raw = dec.u.ok_or(RegError::NoConvergence)?;
    let v_raw = dec.v_t.ok_or(RegError::NoConvergence)?.adjoint();
    let sv = dec.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));

    let mut u = DMatrix::zeros(u_raw.nrows(), order.len());
    let mut v = DMatrix::zeros(v_raw.nrows(), order.len());
    let mut sigma = Vec::with_capacity(order.len());
    for (dst, &src) in order.iter().enumerate() {
        let mut ucol = u_raw.column(src).into_owned();
        let mut vcol = v_raw.column(src).into_owned();
        let mut pivot = 0;
        for (i, z) in vcol.iter().enumerate() {
            if z.norm() > vcol[pivot].norm() {
                pivot = i;
            }
        }
        let p = vcol[pivot];
        if p.norm() > 0.0 {
            let phase = p.conj() / p.norm();
            ucol *= phase;
            vcol *= phase;
        }
        u.set_column(dst, &ucol);
        v.set_column(dst, &vcol);
        sigma.push(sv[src].max(0.0));
    }
    Ok(SvdFactors { u, sigma, v })
}

impl SvdFactors {
    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// `U* b`.
    pub fn project(&self, b: &DVector<Complex64>) -> Result<DVector<Complex64>, RegError> {
        if b.len() != self.nrows() {
            return Err(RegError::LengthMismatch {
                expected: self.nrows(),
                got: b.len(),
            });
        }
        Ok(self.u.ad_mul(b))
    }

    /// `U diag(σ) V*`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

fn check_alpha(alpha: f64) -> Result<(), RegError> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(RegError::BadAlpha(alpha))
    }
}

/// Tikhonov solution `g = V diag(σ/(σ²+α)) U* b`.
pub fn tikhonov_solve(f: &SvdFactors, b: &DVector<Complex64>, alpha: f64) -> Result<DVector<Complex64>, RegError> {
    check_alpha(alpha)?;
    let mut beta = f.project(b)?;
    for (c, &s) in beta.iter_mut().zip(&f.sigma) {
        *c *= s / (s * s + alpha);
    }
    Ok(&f.v * beta)
}

/// `‖g_α‖` from the projection `β = U* b`.
pub fn solution_norm(sigma: &[f64], beta: &DVector<Complex64>, alpha: f64) -> f64 {
    sigma
        .iter()
        .zip(beta.iter())
        .map(|(&s, c)| {
            let w = s / (s * s + alpha);
            w * w * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Squared norm of the part of `b` outside the range of `U`.
fn orthogonal_part_sqr(f: &SvdFactors, b: &DVector<Complex64>, beta: &DVector<Complex64>) -> f64 {
    (b - &f.u * beta).norm_squared()
}

/// `‖A g_α − b‖`.
pub fn discrepancy(f: &SvdFactors, b: &DVector<Complex64>, alpha: f64) -> Result<f64, RegError> {
    check_alpha(alpha)?;
    let beta = f.project(b)?;
    let perp = orthogonal_part_sqr(f, b, &beta);
    Ok(discrepancy_from_projection(&f.sigma, &beta, perp, alpha))
}

fn discrepancy_from_projection(sigma: &[f64], beta: &DVector<Complex64>, perp_sqr: f64, alpha: f64) -> f64 {
    let inside: f64 = sigma
        .iter()
        .zip(beta.iter())
        .map(|(&s, c)| {
            let w = alpha / (s * s + alpha);
            w * w * c.norm_sqr()
        })
        .sum();
    (inside + perp_sqr).sqrt()
}

/// Morozov discrepancy principle: the `α` with `‖A g_α − b‖ = delta`.
///
/// The discrepancy increases monotonically from `‖(I − UU*) b‖` (α → 0,
/// counting exactly-zero singular values as part of the null component) to
/// `‖b‖` (α → ∞); `delta` must lie strictly inside that range.
pub fn morozov_alpha(f: &SvdFactors, b: &DVector<Complex64>, delta: f64) -> Result<f64, RegError> {
    let beta = f.project(b)?;
    let perp = orthogonal_part_sqr(f, b, &beta);
    let null: f64 = f
        .sigma
        .iter()
        .zip(beta.iter())
        .filter(|(&s, _)| s == 0.0)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    let lower = (perp + null).sqrt();
    let upper = b.norm();
    if !(delta > lower && delta < upper) {
        return Err(RegError::BracketInfeasible { delta, lower, upper });
    }
    let disc = |a: f64| discrepancy_from_projection(&f.sigma, &beta, perp, a);

    let smax2 = f.sigma_max().powi(2);
    let infeasible = RegError::BracketInfeasible { delta, lower, upper };
    let mut lo = smax2 * 1e-20;
    while disc(lo) >= delta {
        lo *= 1e-4;
        if lo < 1e-300 {
            return Err(infeasible);
        }
    }
    let mut hi = smax2.max(f64::MIN_POSITIVE) * 1e4;
    while disc(hi) <= delta {
        hi *= 1e4;
        if hi > 1e300 {
            return Err(infeasible);
        }
    }
    let (mut llo, mut lhi) = (lo.ln(), hi.ln());
    for _ in 0..400 {
        let mid = 0.5 * (llo + lhi);
        if mid <= llo || mid >= lhi {
            break;
        }
        if disc(mid.exp()) < delta {
            llo = mid;
        } else {
            lhi = mid;
        }
    }
    let (a, b_) = (llo.exp(), lhi.exp());
    Ok(if (disc(a) - delta).abs() <= (disc(b_) - delta).abs() {
        a
    } else {
        b_
    })
}

/// How the regularisation parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegConfig {
    /// A fixed `α` for every sampling point.
    Fixed { alpha: f64 },
    /// Morozov's principle with `δ = delta_rel·‖b‖`; `fallback_alpha` is used
    /// where no `α` attains the discrepancy.
    Morozov { delta_rel: f64, fallback_alpha: f64 },
}

impl Default for RegConfig {
    fn default() -> Self {
        RegConfig::Fixed { alpha: DEFAULT_ALPHA }
    }
}

/// Parameter selected for one right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub fell_back: bool,
}

impl RegConfig {
    pub fn fixed(alpha: f64) -> Result<Self, RegError> {
        check_alpha(alpha)?;
        Ok(RegConfig::Fixed { alpha })
    }

    pub fn morozov(delta_rel: f64) -> Result<Self, RegError> {
        if !(delta_rel > 0.0 && delta_rel < 1.0) {
            return Err(RegError::BadDiscrepancy(delta_rel));
        }
        Ok(RegConfig::Morozov {
            delta_rel,
            fallback_alpha: DEFAULT_ALPHA,
        })
    }

    pub fn choose(&self, f: &SvdFactors, b: &DVector<Complex64>) -> Result<AlphaChoice, RegError> {
        match *self {
            RegConfig::Fixed { alpha } => Ok(AlphaChoice {
                alpha,
                fell_back: false,
            }),
            RegConfig::Morozov {
                delta_rel,
                fallback_alpha,
            } => match morozov_alpha(f, b, delta_rel * b.norm()) {
                Ok(alpha) => Ok(AlphaChoice {
                    alpha,
                    fell_back: false,
                }),
                Err(RegError::BracketInfeasible { .. }) => Ok(AlphaChoice {
                    alpha: fallback_alpha,
                    fell_back: true,
                }),
                Err(e) => Err(e),
            },
        }
    }
}
