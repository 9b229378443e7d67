//! Monotone piecewise-cubic interpolation (Fritsch–Carlson slope limiting).
//!
//! Used for the cumulative-area function s_q(r), which is strictly increasing
//! but may develop steep boundary layers when the recentering pole approaches
//! the unit circle. The limited Hermite slopes guarantee the interpolant is
//! monotone whenever the data are, so inversion by bisection is safe.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    /// Fits strictly increasing data. `x` must be strictly increasing as well.
    pub fn fit(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 3, "need at least three samples");
        let n = x.len();
        for i in 0..n - 1 {
            assert!(x[i + 1] > x[i], "abscissae must increase");
            if y[i + 1] <= y[i] {
                return Err(Error::MonotoneInversion { r: x[i] });
            }
        }
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut slope = vec![0.0; n];
        slope[0] = endpoint_slope(
            x[1] - x[0],
            x[2] - x[1],
            secant[0],
            secant[1],
        );
        slope[n - 1] = endpoint_slope(
            x[n - 1] - x[n - 2],
            x[n - 2] - x[n - 3],
            secant[n - 2],
            secant[n - 3],
        );
        for i in 1..n - 1 {
            // Weighted harmonic mean of neighboring secants; this is the
            // Fritsch–Butland variant, which lands inside the monotonicity
            // region without a projection step.
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let w0 = 2.0 * h1 + h0;
            let w1 = h1 + 2.0 * h0;
            slope[i] = (w0 + w1) / (w0 / secant[i - 1] + w1 / secant[i]);
        }
        Ok(Self { x, y, slope })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.y[0], *self.y.last().unwrap())
    }

    pub fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        let xq = xq.clamp(self.x[0], self.x[n - 1]);
        let k = match self.x.binary_search_by(|v| v.partial_cmp(&xq).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let h = self.x[k + 1] - self.x[k];
        let t = (xq - self.x[k]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.y[k] + h10 * h * self.slope[k] + h01 * self.y[k + 1] + h11 * h * self.slope[k + 1]
    }

    /// Solves eval(x) = yq by bisection. `yq` is clamped to the data range.
    pub fn invert(&self, yq: f64) -> f64 {
        let (mut lo, mut hi) = self.domain();
        let yq = yq.clamp(self.y[0], *self.y.last().unwrap());
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < yq {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * (1.0 + hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Three-point one-sided slope (exact for parabolas — the cumulative-area
/// data start quadratically at r = 0), clamped into the monotone region.
fn endpoint_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s0 * s1 <= 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}
