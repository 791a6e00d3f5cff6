//! Monotone piecewise-cubic interpolation (Fritsch–Carlson).
//!
//! Knot derivatives are the weighted harmonic means of adjacent secants,
//! zeroed at local extrema, which guarantees the interpolant preserves the
//! monotonicity of the data. Evaluation outside the knot range clamps to the
//! end values.

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2, "need at least two knots");
        assert!(
            x.windows(2).all(|w| w[1] > w[0]),
            "knots must be strictly increasing"
        );
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = edge_derivative(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], *delta.get(1).unwrap_or(&delta[0]));
        d[n - 1] = edge_derivative(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        Self { x, y, d }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Index of the segment containing `q` (clamped to the valid range).
    pub fn segment_index(&self, q: f64) -> usize {
        if q <= self.x[0] {
            return 0;
        }
        let n = self.x.len();
        if q >= self.x[n - 1] {
            return n - 2;
        }
        self.x.partition_point(|&v| v <= q) - 1
    }

    /// Cubic Hermite evaluation on segment `i` (no clamping of `q`).
    pub fn eval_on_segment(&self, i: usize, q: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let t = (q - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        self.y[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * self.d[i] * (t3 - 2.0 * t2 + t)
            + self.y[i + 1] * (-2.0 * t3 + 3.0 * t2)
            + h * self.d[i + 1] * (t3 - t2)
    }

    /// Interpolated value at `q`, clamped to the end values outside the range.
    pub fn eval(&self, q: f64) -> f64 {
        if q <= self.x[0] {
            return self.y[0];
        }
        let n = self.x.len();
        if q >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.segment_index(q);
        self.eval_on_segment(i, q)
    }
}

/// Three-point one-sided edge derivative with the usual shape limiters.
fn edge_derivative(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        d = 0.0;
    } else if d0 * d1 < 0.0 && d.abs() > 3.0 * d0.abs() {
        d = 3.0 * d0;
    }
    d
}
