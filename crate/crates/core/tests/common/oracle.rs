//! Slow fixed-point Bessel evaluator used as an independent reference.
//!
//! Every quantity is carried as a `BigInt` scaled by `10^DIGITS`, and the
//! argument is the exact dyadic rational represented by the `f64` input, so
//! the only rounding happens when the result is converted back to `f64`.
//! Power series are summed to completion; no recurrences or asymptotics are
//! shared with the production code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

const DIGITS: u32 = 110;

const PI: &str = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899862803482534211706798214808651328230664709";
const EULER: &str = "0.57721566490153286060651209008240243104215933593992359880576723488486772677766467093694706329174674951463144724980708248096";
const LN2: &str = "0.69314718055994530941723212145817656807550013436025525412068000949339362196969471560586332699641868754200148102057068573368";

fn scale() -> BigInt {
    BigInt::from(10u32).pow(DIGITS)
}

fn parse_const(s: &str) -> BigInt {
    let (int, frac) = s.split_once('.').unwrap();
    let mut digits = String::from(int);
    digits.push_str(&frac[..DIGITS as usize]);
    digits.parse().unwrap()
}

/// Exact rational `num / den` (den > 0) for a finite f64.
fn exact_rational(x: f64) -> (BigInt, BigInt) {
    assert!(x.is_finite());
    if x == 0.0 {
        return (BigInt::zero(), BigInt::one());
    }
    let bits = x.to_bits();
    let sign: i64 = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let mant = BigInt::from(mant) * sign;
    if e >= 0 {
        (mant << e as usize, BigInt::one())
    } else {
        let den = BigInt::one() << (-e) as usize;
        let g = mant.gcd(&den);
        (mant / &g, den / g)
    }
}

fn to_f64(v: &BigInt) -> f64 {
    // Split to keep both parts in f64 range.
    let s = scale();
    let (q, r) = v.div_rem(&s);
    let qf = q.to_f64().unwrap();
    let rf = r.to_f64().unwrap() / s.to_f64().unwrap();
    qf + rf
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Series terms t_m = (-1)^m (x/2)^{2m+n} / (m! (m+n)!) in fixed point.
fn j_terms(n: u32, p: &BigInt, q: &BigInt) -> Vec<BigInt> {
    let n = n as u64;
    let num0 = p.pow(n as u32) * scale();
    let den0 = (q * 2u32).pow(n as u32) * factorial(n);
    let mut t = num0 / den0;
    let p2 = p * p;
    let q2x4 = q * q * 4u32;
    let mut out = Vec::new();
    let mut m: u64 = 0;
    loop {
        out.push(t.clone());
        let next = -(&t * &p2) / (&q2x4 * (m + 1) * (m + n + 1));
        m += 1;
        // The series is alternating with eventually decreasing terms; stop
        // once the tail is below the fixed-point resolution.
        if next.is_zero() && BigInt::from(m) * q > *p {
            break;
        }
        t = next;
    }
    out
}

fn j_fixed(n: u32, p: &BigInt, q: &BigInt) -> BigInt {
    j_terms(n, p, q).into_iter().sum()
}

/// ln(a / b) for positive rationals, fixed point.
fn ln_fixed(a: &BigInt, b: &BigInt) -> BigInt {
    let s = scale();
    // Reduce a/b into [2/3, 4/3] by powers of two.
    let mut a = a.clone();
    let mut b = b.clone();
    let mut e: i64 = 0;
    while &a * 3u32 > &b * 4u32 {
        b *= 2u32;
        e += 1;
    }
    while &a * 3u32 < &b * 2u32 {
        a *= 2u32;
        e -= 1;
    }
    // ln r = 2 atanh(u), u = (a - b) / (a + b)
    let un = &a - &b;
    let ud = &a + &b;
    let u = &un * &s / &ud;
    let u2 = &u * &u / &s;
    let mut pow = u.clone();
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !pow.is_zero() {
        sum += &pow / (2 * k + 1);
        pow = &pow * &u2 / &s;
        k += 1;
    }
    sum * 2u32 + parse_const(LN2) * e
}

/// Fixed-point J_n(x).
pub fn bessel_j(n: u32, x: f64) -> f64 {
    assert!(x >= 0.0);
    let (p, q) = exact_rational(x);
    to_f64(&j_fixed(n, &p, &q))
}

/// Fixed-point Y_n(x), x > 0, from the Neumann-type series with harmonic numbers.
pub fn bessel_y(n: u32, x: f64) -> f64 {
    assert!(x > 0.0);
    let s = scale();
    let (p, q) = exact_rational(x);
    let pi = parse_const(PI);
    let gamma = parse_const(EULER);

    let terms = j_terms(n, &p, &q);
    let jn: BigInt = terms.iter().sum();

    // Finite sum: sum_{k<n} (n-k-1)!/k! (x/2)^{2k-n}
    let mut finite = BigInt::zero();
    for k in 0..n {
        let e = 2 * k as i64 - n as i64;
        let coef_num = factorial((n - k - 1) as u64);
        let coef_den = factorial(k as u64);
        let (num, den) = if e >= 0 {
            (coef_num * p.pow(e as u32), coef_den * (&q * 2u32).pow(e as u32))
        } else {
            (coef_num * (&q * 2u32).pow((-e) as u32), coef_den * p.pow((-e) as u32))
        };
        finite += num * &s / den;
    }

    // Harmonic-weighted series: sum_k (H_k + H_{n+k}) t_k
    let mut h_k = BigInt::zero();
    let mut h_nk: BigInt = (1..=n as u64).map(|j| &s / j).sum();
    let mut weighted = BigInt::zero();
    for (k, t) in terms.iter().enumerate() {
        if k > 0 {
            h_k += &s / k as u64;
            h_nk += &s / (n as u64 + k as u64);
        }
        weighted += (&h_k + &h_nk) * t / &s;
    }

    let log_term = ln_fixed(&p, &(&q * 2u32)) + &gamma;
    // Y_n = [ -finite + 2 (ln(x/2) + gamma) J_n - weighted ] / pi
    let numer = -finite + (log_term * &jn / &s) * 2u32 - weighted;
    to_f64(&(numer * &s / pi))
}

/// First positive zero of J_0 by bisection on the oracle's sign.
pub fn first_zero_j0() -> f64 {
    let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
    assert!(bessel_j_sign(0, lo) > 0 && bessel_j_sign(0, hi) < 0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bessel_j_sign(0, mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn bessel_j_sign(n: u32, x: f64) -> i32 {
    let (p, q) = exact_rational(x);
    let v = j_fixed(n, &p, &q);
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}
