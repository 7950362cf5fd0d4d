//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).
//!
//! Used for tabulated depth profiles and tabulated Abel seeds. Monotone data
//! yields a monotone interpolant; the derivative is taken from the same cubic
//! pieces.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParams(
                "tabulated data needs at least two samples".into(),
            ));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidParams("tabulated data must be finite".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParams(
                "tabulated abscissae must be strictly increasing".into(),
            ));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();

        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = secants[0];
            slopes[1] = secants[0];
        } else {
            for i in 1..n - 1 {
                let (s0, s1) = (secants[i - 1], secants[i]);
                if s0 * s1 <= 0.0 {
                    slopes[i] = 0.0;
                } else {
                    // weighted harmonic mean
                    let h0 = xs[i] - xs[i - 1];
                    let h1 = xs[i + 1] - xs[i];
                    let w0 = 2.0 * h1 + h0;
                    let w1 = h1 + 2.0 * h0;
                    slopes[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
                }
            }
            slopes[0] = end_slope(xs[1] - xs[0], xs[2] - xs[1], secants[0], secants[1]);
            slopes[n - 1] = end_slope(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                secants[n - 2],
                secants[n - 3],
            );
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&xi| xi <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Evaluates the interpolant; outside the table the end cubics extend.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.ys[i] + d10 * self.slopes[i] + d01 * self.ys[i + 1] + d11 * self.slopes[i + 1]
    }
}

// Three-point end formula, limited so the end piece stays monotone.
fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s0 * s1 <= 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}
