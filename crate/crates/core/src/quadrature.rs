//! Globally adaptive Gauss–Kronrod (7/15) quadrature in one and two dimensions.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Estimate { value: kron * h, error: ((kron - gauss) * h).abs() }
}

struct Interval {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Interval {
    fn eq(&self, o: &Self) -> bool {
        self.est.error == o.est.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Interval {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.est.error.total_cmp(&o.est.error)
    }
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol` (with a tiny
/// absolute floor), bisecting the worst interval until converged.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<Estimate> {
    integrate_with_breaks(&mut f, &[a, b], rel_tol, 2000)
}

/// Like [`integrate`] but starting from the partition given by `breaks`,
/// which should include points where `f` is sharply peaked.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    f: &mut F,
    breaks: &[f64],
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let est = gk15(f, w[0], w[1]);
        total += est.value;
        err += est.error;
        heap.push(Interval { a: w[0], b: w[1], est });
    }
    let target = |total: f64| (rel_tol * total.abs()).max(1e-300);
    while err > target(total) {
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureNonConvergence { error: err, tolerance: target(total) });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.est.value;
        err += left.error + right.error - worst.est.error;
        heap.push(Interval { a: worst.a, b: mid, est: left });
        heap.push(Interval { a: mid, b: worst.b, est: right });
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureNonConvergence { error: err, tolerance: target(total) });
        }
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let value = heap.iter().map(|i| i.est.value).sum();
    let error = heap.iter().map(|i| i.est.error).sum();
    Ok(Estimate { value, error })
}

/// `∫_{a}^{b} ∫_{c(x)}^{d(x)} f(x, y) dy dx` by nested adaptive quadrature.
/// `inner_breaks(x)` may add interior break points for the inner integral.
pub fn integrate_2d<F, B>(f: F, a: f64, b: f64, inner_breaks: B, rel_tol: f64) -> Result<Estimate>
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> Vec<f64>,
{
    let mut inner_failure = None;
    let mut outer = |x: f64| {
        let breaks = inner_breaks(x);
        let mut g = |y: f64| f(x, y);
        match integrate_with_breaks(&mut g, &breaks, rel_tol * 0.1, 2000) {
            Ok(e) => e.value,
            Err(e) => {
                inner_failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let est = integrate_with_breaks(&mut outer, &[a, b], rel_tol, 2000)?;
    if let Some(e) = inner_failure {
        return Err(e);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x.powi(6) - 3.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((e.value - (128.0 / 7.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn peaked_integrand() {
        // ∫_{-1}^{1} ε/(x²+ε²) dx = 2 atan(1/ε)
        let eps = 1e-3;
        let e = integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0, 1e-10).unwrap();
        assert!((e.value - 2.0 * (1.0 / eps).atan()).abs() < 1e-8);
    }

    #[test]
    fn double_integral_over_square() {
        // ∫₀¹∫₀¹ 1/((x−y)²+1) dy dx = 2·atan(1) − ln 2
        let e = integrate_2d(|x, y| 1.0 / ((x - y).powi(2) + 1.0), 0.0, 1.0, |_| vec![0.0, 1.0], 1e-10).unwrap();
        let exact = std::f64::consts::FRAC_PI_2 - 2f64.ln();
        assert!((e.value - exact).abs() < 1e-9);
    }
}
