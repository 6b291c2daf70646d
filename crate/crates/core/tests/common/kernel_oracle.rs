//! Reference values for the disc far field built from the fixed-point Bessel
//! oracle and plain O(n²) discrete Fourier sums.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;

use super::oracle;

/// `J_n(x)/H_n(x)` for `n = 0..=nmax` from oracle values.
pub fn series_coefficients(x: f64, nmax: u32) -> Vec<Complex64> {
    (0..=nmax)
        .map(|n| {
            let j = oracle::bessel_j(n, x);
            let y = oracle::bessel_y(n, x);
            // J/(J + iY) = J (J − iY)/(J² + Y²), arranged to avoid overflow of Y²
            let t = j / y;
            Complex64::new(t * t, -t) / (1.0 + t * t)
        })
        .collect()
}

pub fn prefactor(k: f64) -> Complex64 {
    -Complex64::from_polar((2.0 / (PI * k)).sqrt(), -FRAC_PI_4)
}

/// Disc far field at included angle `theta`, summing `cos(nθ)` directly.
pub fn farfield(coeffs: &[Complex64], k: f64, theta: f64) -> Complex64 {
    let mut s = coeffs[0];
    for (n, c) in coeffs.iter().enumerate().skip(1) {
        s += 2.0 * c * (n as f64 * theta).cos();
    }
    prefactor(k) * s
}

/// `|γ_n|` repeated with multiplicity 1, 2, 2, … and sorted descending.
pub fn fourier_moduli(coeffs: &[Complex64], k: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for (n, c) in coeffs.iter().enumerate() {
        let g = (prefactor(k) * TAU * c).norm();
        out.push(g);
        if n > 0 {
            out.push(g);
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Eigenvalues of a circulant matrix with first column `col`: `Σ_l col[l] e^{-2πi n l / M}`.
pub fn circulant_eigenvalues(col: &[Complex64]) -> Vec<Complex64> {
    let m = col.len();
    (0..m)
        .map(|n| {
            col.iter()
                .enumerate()
                .map(|(l, c)| c * Complex64::from_polar(1.0, -TAU * ((n * l) % m) as f64 / m as f64))
                .sum()
        })
        .collect()
}
