//! Cylinder functions of integer order and real positive argument.
//!
//! `J_n` comes from its power series for small arguments and from Miller's
//! backward recurrence (normalised by `J_0 + 2 sum J_2k = 1`) otherwise.
//! `Y_0` and `Y_1` are built from the same `J` sequence through their Neumann
//! series, or from the logarithmic power series when `x < 2`; higher orders
//! use the upward recurrence, which is stable for `Y_n`.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument the power series are used directly.
const SERIES_LIMIT: f64 = 2.0;

const RESCALE_AT: f64 = 1e250;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpecFunError {
    #[error("{func}: argument {x} is outside the domain")]
    Domain { func: &'static str, x: f64 },
}

fn check_j_arg(x: f64) -> Result<(), SpecFunError> {
    if !x.is_finite() || x < 0.0 {
        return Err(SpecFunError::Domain { func: "bessel_j", x });
    }
    Ok(())
}

fn check_y_arg(x: f64) -> Result<(), SpecFunError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SpecFunError::Domain { func: "bessel_y", x });
    }
    Ok(())
}

/// Bessel function of the first kind `J_n(x)`, `x >= 0`.
pub fn bessel_j(n: u32, x: f64) -> Result<f64, SpecFunError> {
    check_j_arg(x)?;
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if x < SERIES_LIMIT {
        return Ok(j_series(n, x));
    }
    Ok(miller_sequence(n as usize, x)[n as usize])
}

/// Bessel function of the second kind `Y_n(x)`, `x > 0`.
///
/// Returns `-inf` once the value leaves the `f64` range (large `n`, small
/// `x`); never `NaN`.
pub fn bessel_y(n: u32, x: f64) -> Result<f64, SpecFunError> {
    Ok(*bessel_y_upto(n as usize, x)?.last().unwrap())
}

/// Hankel function of the first kind `H_n^(1)(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1(n: u32, x: f64) -> Result<Complex64, SpecFunError> {
    check_y_arg(x)?;
    Ok(Complex64::new(bessel_j(n, x)?, bessel_y(n, x)?))
}

/// `J_0(x), ..., J_nmax(x)`.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Result<Vec<f64>, SpecFunError> {
    check_j_arg(x)?;
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    if x < SERIES_LIMIT {
        return Ok((0..=nmax as u32).map(|n| j_series(n, x)).collect());
    }
    let mut seq = miller_sequence(nmax, x);
    seq.truncate(nmax + 1);
    Ok(seq)
}

/// `Y_0(x), ..., Y_nmax(x)`.
pub fn bessel_y_upto(nmax: usize, x: f64) -> Result<Vec<f64>, SpecFunError> {
    check_y_arg(x)?;
    let (y0, y1) = if x < SERIES_LIMIT {
        y01_series(x)
    } else {
        y01_neumann(&miller_sequence(1, x), x)
    };
    Ok(upward_y(nmax, x, y0, y1))
}

/// `H_0^(1)(x), ..., H_nmax^(1)(x)` together with the `J` values used.
pub fn hankel1_upto(nmax: usize, x: f64) -> Result<(Vec<f64>, Vec<Complex64>), SpecFunError> {
    check_y_arg(x)?;
    let (j, y0, y1) = if x < SERIES_LIMIT {
        let j: Vec<f64> = (0..=nmax as u32).map(|n| j_series(n, x)).collect();
        let (y0, y1) = y01_series(x);
        (j, y0, y1)
    } else {
        let seq = miller_sequence(nmax, x);
        let (y0, y1) = y01_neumann(&seq, x);
        (seq[..=nmax].to_vec(), y0, y1)
    };
    let y = upward_y(nmax, x, y0, y1);
    let h = j.iter().zip(&y).map(|(&a, &b)| Complex64::new(a, b)).collect();
    Ok((j, h))
}

/// Power series of `J_n(x)`; accurate to a few ulps for `x < 2`.
fn j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= half / i as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    loop {
        term *= q / (m * (m + n as f64));
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
            break;
        }
        m += 1.0;
    }
    lead * sum
}

/// Backward-recurrence start order for accurate `J_0..J_top`.
fn miller_start(top: f64) -> usize {
    let top = top.max(1.0);
    let m = top + (160.0 * top).sqrt() + 20.0;
    2 * (m as usize / 2 + 1)
}

/// `J_0(x) .. J_M(x)` by Miller's algorithm, `M >= nmax` the start order.
fn miller_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let start = miller_start((nmax as f64).max(x));
    let mut f = vec![0.0; start + 2];
    f[start] = 1e-30;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        f[k - 1] = k as f64 * two_over_x * f[k] - f[k + 1];
        if f[k - 1].abs() > RESCALE_AT {
            for v in &mut f[k - 1..] {
                *v /= RESCALE_AT;
            }
        }
    }
    let norm = f[0] + 2.0 * f.iter().skip(2).step_by(2).sum::<f64>();
    f.truncate(start + 1);
    for v in &mut f {
        *v /= norm;
    }
    f
}

fn y01_series(x: f64) -> (f64, f64) {
    let half = 0.5 * x;
    let q = half * half;
    let log_term = half.ln() + EULER_GAMMA;

    // J_0, J_1 and the harmonic-weighted companions in one pass.
    let (mut j0, mut j1) = (1.0, half);
    let (mut s0, mut s1) = (0.0, half); // k = 0 weights: H_0 = 0 for Y_0; H_0 + H_1 = 1 for Y_1
    let mut t0 = 1.0; // (-q)^k / (k!)^2
    let mut t1 = half; // (-1)^k half^{2k+1} / (k! (k+1)!)
    let mut h = 0.0; // H_k
    let mut k = 1.0;
    loop {
        h += 1.0 / k;
        t0 *= -q / (k * k);
        t1 *= -q / (k * (k + 1.0));
        j0 += t0;
        j1 += t1;
        s0 -= h * t0;
        s1 += (2.0 * h + 1.0 / (k + 1.0)) * t1;
        if t0.abs().max(t1.abs()) * (1.0 + h) < 1e-19 {
            break;
        }
        k += 1.0;
    }
    let y0 = FRAC_2_PI * (log_term * j0 + s0);
    let y1 = -FRAC_2_PI / x + FRAC_2_PI * log_term * j1 - s1 / PI;
    (y0, y1)
}

fn y01_neumann(j: &[f64], x: f64) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut sign = -1.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        sign = -sign;
        k += 1;
    }
    let y0 = FRAC_2_PI * log_term * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = -FRAC_2_PI * j[0] / x + FRAC_2_PI * log_term * j[1] + FRAC_2_PI * s1;
    (y0, y1)
}

fn upward_y(nmax: usize, x: f64, y0: f64, y1: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    if nmax == 0 {
        return y;
    }
    y.push(y1);
    for n in 1..nmax {
        let next = 2.0 * n as f64 / x * y[n] - y[n - 1];
        if !next.is_finite() {
            y.resize(nmax + 1, f64::NEG_INFINITY);
            break;
        }
        y.push(next);
    }
    y
}
