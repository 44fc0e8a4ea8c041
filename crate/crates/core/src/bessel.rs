//! Bessel functions of order zero, `J₀` and `Y₀`, for real positive argument.
//!
//! Ascending power series up to [`SERIES_LIMIT`], Miller's backward
//! recurrence with the Neumann series for `Y₀` up to [`ASYMPTOTIC_LIMIT`], and
//! Hankel's asymptotic expansion beyond. Absolute accuracy is about 1e-13.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

/// Upper end of the ascending series.
pub const SERIES_LIMIT: f64 = 8.0;

/// Start of the asymptotic expansion; its smallest term is below 1e-17 here.
pub const ASYMPTOTIC_LIMIT: f64 = 20.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `(J₀(x), Y₀(x))` for `x > 0`.
pub fn j0_y0(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= SERIES_LIMIT {
        series(x)
    } else if x <= ASYMPTOTIC_LIMIT {
        recurrence(x)
    } else {
        asymptotic(x)
    }
}

pub fn j0(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    j0_y0(x.abs()).0
}

pub fn y0(x: f64) -> f64 {
    j0_y0(x).1
}

// J₀ = Σ (-1)^k q^k/(k!)², Y₀ = (2/π)[(ln(x/2)+γ) J₀ + Σ (-1)^{k+1} H_k q^k/(k!)²],
// with q = x²/4 and H_k the k-th harmonic number.
fn series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut j = 1.0;
    let mut harmonic = 0.0;
    let mut s = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        j += term;
        s -= harmonic * term;
        if term.abs() < 1e-17 * j.abs().max(1e-3) && k > 3 {
            break;
        }
    }
    let y = FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j + s);
    (j, y)
}

// Backward recurrence J_{n−1} = (2n/x)J_n − J_{n+1} from far above the
// turning point, normalized by J₀ + 2ΣJ_{2k} = 1. Then
// Y₀ = (2/π)[(ln(x/2)+γ) J₀ − 2Σ(−1)^k J_{2k}/k].
fn recurrence(x: f64) -> (f64, f64) {
    let top = 2 * (x as usize / 2 + 30);
    let (mut next, mut cur) = (0.0, 1e-30);
    let (mut norm, mut neumann) = (0.0, 0.0);
    for n in (1..=top).rev() {
        let prev = 2.0 * n as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let m = n - 1;
        if m > 0 && m % 2 == 0 {
            norm += 2.0 * cur;
            let k = m / 2;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            neumann += sign * cur / k as f64;
        }
    }
    norm += cur;
    let j = cur / norm;
    let y = FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j - 2.0 * neumann / norm);
    (j, y)
}

// J₀ = √(2/πx)(P cos χ − Q sin χ), Y₀ = √(2/πx)(P sin χ + Q cos χ), χ = x − π/4.
fn asymptotic(x: f64) -> (f64, f64) {
    let (p, q) = hankel_pq(x);
    let (s, c) = (x - FRAC_PI_4).sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// Hankel's `P₀(x)` and `Q₀(x)`, summed until the terms stop decreasing.
pub(crate) fn hankel_pq(x: f64) -> (f64, f64) {
    // a_k = Π_{j≤k} (2j−1)² / (k! 8^k); P = Σ (−1)^m a_{2m}/x^{2m}, Q = Σ (−1)^{m+1} a_{2m+1}/x^{2m+1}.
    let inv8x = 1.0 / (8.0 * x);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut prev = f64::INFINITY;
    for k in 1..40 {
        let odd = (2 * k - 1) as f64;
        term *= odd * odd * inv8x / k as f64;
        if term >= prev {
            break;
        }
        prev = term;
        // k odd contributes to Q, k even to P; signs alternate within each.
        match k % 4 {
            1 => q -= term,
            2 => p -= term,
            3 => q += term,
            _ => p += term,
        }
        if term < 1e-17 {
            break;
        }
    }
    (p, q)
}
