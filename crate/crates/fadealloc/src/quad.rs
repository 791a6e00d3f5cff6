//! Gaussian quadrature rules.
//!
//! Two fixed rules are used throughout the crate:
//!
//! * Gauss–Hermite (physicists' weight `e^{-x^2}`) for expectations over
//!   Gaussian noise. A circularly symmetric complex Gaussian `Z ~ N_C(0,1)`
//!   has density `(1/pi) e^{-|z|^2}`, so
//!   `E[f(Z)] = (1/pi) sum_{k,l} w_k w_l f(t_k + i t_l)`
//!   with the tensor product of a 1-D rule over each axis.
//! * Gauss–Legendre on `[-1,1]` as the panel rule inside the adaptive
//!   integrator used for expectations over the fading gain.
//!
//! Nodes and weights are computed by Newton iteration on the orthogonal
//! polynomial recurrences, so no tables are embedded and any order is
//! available.

use num_complex::Complex64;

const NEWTON_EPS: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss–Hermite rule with weight function `e^{-x^2}` on the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Build an `n`-point rule. Exact for polynomials up to degree `2n-1`.
    ///
    /// Roots are located by scanning the sign changes of the scaled Hermite
    /// function from the largest root inward (root gaps shrink toward the
    /// center, so a quarter-gap scan step can never skip one), followed by
    /// bisection and a Newton polish. The scaled recurrence keeps values
    /// O(1), which is what limits the order to a few hundred before the
    /// `e^{-z^2/2}` prefactor denormalizes.
    pub fn new(n: usize) -> Self {
        assert!((2..=450).contains(&n), "supported order is 2..=450");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        let odd = n % 2 == 1;
        // Positive roots in decreasing order.
        let mut found: Vec<f64> = Vec::with_capacity(half);
        for i in 0..half {
            let z = if odd && i == half - 1 {
                0.0
            } else if i == 0 {
                let s = (2 * n + 1) as f64;
                let guess = s.sqrt() - 1.85575 * s.powf(-1.0 / 6.0);
                polish_root(n, guess)
            } else {
                let gap = if i == 1 {
                    1.14 * (n as f64).powf(0.426) / found[0]
                } else {
                    found[i - 2] - found[i - 1]
                };
                let z = scan_next_root(n, found[i - 1], gap);
                polish_root(n, z)
            };
            found.push(z);
            let (_, qn1) = hermite_scaled(n, z);
            // w = 2 e^{-z^2} / (2n q_{n-1}^2); underflows to 0 only where the
            // true weight is below f64 range.
            let w = 2.0 * (-z * z).exp() / (2.0 * n as f64 * qn1 * qn1);
            nodes[n - 1 - i] = z;
            nodes[i] = -z;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Expectation of `f` over a standard circularly symmetric complex
    /// Gaussian, using the tensor product of this rule over both axes.
    pub fn expect_complex<F: FnMut(Complex64) -> f64>(&self, mut f: F) -> f64 {
        let _ = &self.nodes;
        let mut acc = 0.0;
        for (k, &tr) in self.nodes.iter().enumerate() {
            let wr = self.weights[k];
            for (l, &ti) in self.nodes.iter().enumerate() {
                acc += wr * self.weights[l] * f(Complex64::new(tr, ti));
            }
        }
        acc / std::f64::consts::PI
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "need at least 2 quadrature nodes");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..NEWTON_MAX_ITER {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= NEWTON_EPS {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]` with this fixed rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + hw * x);
        }
        acc * hw
    }
}

/// Recursive adaptive Gauss–Legendre integration of `f` over `[a, b]`.
///
/// Each panel is accepted when the 15-point estimate agrees with the sum of
/// the two half-panel estimates to within the panel's share of `tol`.
/// Returns the integral and an error estimate; `Err` carries the residual of
/// the worst panel when the depth limit is hit before convergence.
pub fn adaptive_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64), f64> {
    let rule = GaussLegendre::new(15);
    let whole = rule.integrate(a, b, f);
    let mut err_acc = 0.0;
    let val = adaptive_step(f, &rule, a, b, whole, tol, 32, &mut err_acc)?;
    Ok((val, err_acc))
}

fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    err_acc: &mut f64,
) -> Result<f64, f64> {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, f);
    let right = rule.integrate(mid, b, f);
    let diff = (left + right - whole).abs();
    if diff <= tol || b - a < 1e-300 {
        *err_acc += diff;
        return Ok(left + right);
    }
    if depth == 0 {
        return Err(diff);
    }
    let l = adaptive_step(f, rule, a, mid, left, 0.5 * tol, depth - 1, err_acc)?;
    let r = adaptive_step(f, rule, mid, b, right, 0.5 * tol, depth - 1, err_acc)?;
    Ok(l + r)
}
