//! Nakagami-m power-gain model.
//!
//! The power gain of a unit-mean Nakagami-m fade is Gamma distributed with
//! shape `m` and scale `1/m`:
//!
//! ```text
//! f(g) = m^m g^{m-1} e^{-m g} / Gamma(m),   g >= 0
//! F(g) = P(m, m g)                           (regularized lower gamma)
//! ```
//!
//! `m = 1` is Rayleigh; `m = (K+1)^2 / (2K+1)` approximates Ricean-K.
//!
//! Sampling uses one counter-based RNG stream per block column, so the draw
//! count can grow without perturbing earlier draws, and Monte Carlo shards
//! can use disjoint stream ids for reproducible merges.

use crate::error::{Error, Result};
use crate::special;
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

/// Nakagami-m block-fading description.
///
/// `channel_uses` (the block length L) is carried as metadata only: outage
/// and capacity depend on the power gains alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    m: f64,
    blocks: usize,
    channel_uses: Option<u64>,
}

impl FadingSpec {
    pub fn new(m: f64, blocks: usize) -> Result<Self> {
        if !(m >= 0.5) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Nakagami shape m must be >= 0.5, got {m}"
            )));
        }
        if blocks == 0 {
            return Err(Error::InvalidParameter("block count must be >= 1".into()));
        }
        Ok(Self {
            m,
            blocks,
            channel_uses: None,
        })
    }

    pub fn with_channel_uses(mut self, l: u64) -> Self {
        self.channel_uses = Some(l);
        self
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn channel_uses(&self) -> Option<u64> {
        self.channel_uses
    }

    /// Density of the power gain.
    pub fn power_gain_pdf(&self, g: f64) -> f64 {
        if g < 0.0 {
            return 0.0;
        }
        let m = self.m;
        if g == 0.0 {
            // m^m g^{m-1} / Gamma(m) at the origin.
            return match m.partial_cmp(&1.0).unwrap() {
                std::cmp::Ordering::Less => f64::INFINITY,
                std::cmp::Ordering::Equal => 1.0,
                std::cmp::Ordering::Greater => 0.0,
            };
        }
        (m * m.ln() + (m - 1.0) * g.ln() - m * g - special::gamma(m).ln()).exp()
    }

    /// Distribution function of the power gain, `P(m, m g)`.
    pub fn power_gain_cdf(&self, g: f64) -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        special::reg_lower_gamma(self.m, self.m * g)
    }

    /// Upper quantile: the gain `g` with `1 - F(g) = tail`.
    pub fn gain_for_tail_mass(&self, tail: f64) -> f64 {
        debug_assert!(tail > 0.0 && tail < 1.0);
        let mut lo = 0.0;
        let mut hi = 1.0;
        while 1.0 - self.power_gain_cdf(hi) > tail {
            hi *= 2.0;
            if hi > 1e9 {
                break;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - self.power_gain_cdf(mid) > tail {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Draw an `n x blocks` matrix of i.i.d. power gains.
    ///
    /// Column `b` comes from RNG stream `b` of the seeded generator, so
    /// growing `n` extends each column without changing earlier rows.
    pub fn sample_power_gains(&self, n: usize, seed: u64) -> GainMatrix {
        assert!(n >= 1, "need at least one draw");
        let mut data = vec![0.0; n * self.blocks];
        let dist = Gamma::new(self.m, self.m.recip()).expect("valid shape/scale");
        for b in 0..self.blocks {
            let mut rng = column_rng(seed, b as u64);
            for row in 0..n {
                data[row * self.blocks + b] = dist.sample(&mut rng);
            }
        }
        GainMatrix {
            n,
            blocks: self.blocks,
            data,
        }
    }
}

/// RNG for one named stream of a run. Streams are independent for distinct
/// ids under the same seed.
pub fn column_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Row-major matrix of power gains: `n` draws of `blocks` gains each.
#[derive(Debug, Clone)]
pub struct GainMatrix {
    n: usize,
    blocks: usize,
    data: Vec<f64>,
}

impl GainMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.blocks..(i + 1) * self.blocks]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.blocks)
    }
}

/// Nakagami shape approximating a Ricean fade with factor `K >= 0`.
pub fn ricean_to_nakagami_m(k: f64) -> Result<f64> {
    if k < 0.0 || !k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Rice factor must be >= 0, got {k}"
        )));
    }
    Ok((k + 1.0) * (k + 1.0) / (2.0 * k + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_gl;
    use approx::assert_relative_eq;

    #[test]
    fn rayleigh_pdf_values() {
        let s = FadingSpec::new(1.0, 1).unwrap();
        assert_relative_eq!(s.power_gain_pdf(0.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.power_gain_pdf(1.0), (-1.0f64).exp(), epsilon = 1e-12);
        assert_eq!(s.power_gain_pdf(-0.5), 0.0);
    }

    #[test]
    fn pdf_integrates_to_one() {
        for m in [0.5, 1.0, 2.0, 4.0] {
            let s = FadingSpec::new(m, 1).unwrap();
            let hi = s.gain_for_tail_mass(1e-14);
            let f = |g: f64| s.power_gain_pdf(g);
            // Split near the origin where the m < 1 density is singular.
            let (head, _) = adaptive_gl(&f, 1e-12, 1.0, 1e-10).unwrap();
            let (tail, _) = adaptive_gl(&f, 1.0, hi, 1e-10).unwrap();
            let total = head + tail;
            let tol = if m < 1.0 { 2e-6 } else { 1e-8 };
            assert!((total - 1.0).abs() < tol, "m={m}: integral {total}");
        }
    }

    #[test]
    fn cdf_matches_pdf_integral() {
        let s = FadingSpec::new(2.0, 1).unwrap();
        let f = |g: f64| s.power_gain_pdf(g);
        let (v, _) = adaptive_gl(&f, 0.0, 1.0, 1e-13).unwrap();
        assert_relative_eq!(s.power_gain_cdf(1.0), v, epsilon = 1e-10);
        assert_eq!(s.power_gain_cdf(0.0), 0.0);
        assert_relative_eq!(
            FadingSpec::new(1.0, 1).unwrap().power_gain_cdf(1.0),
            1.0 - (-1.0f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn cdf_monotone_with_limits() {
        let s = FadingSpec::new(3.5, 1).unwrap();
        let mut prev = 0.0;
        for i in 0..100 {
            let g = i as f64 * 0.2;
            let c = s.power_gain_cdf(g);
            assert!((0.0..=1.0).contains(&c));
            assert!(c >= prev);
            prev = c;
        }
        assert!(s.power_gain_cdf(200.0) > 1.0 - 1e-12);
    }

    #[test]
    fn sampler_is_deterministic_and_unit_mean() {
        let s = FadingSpec::new(1.0, 2).unwrap();
        let a = s.sample_power_gains(1000, 42);
        let b = s.sample_power_gains(1000, 42);
        assert_eq!(a.row(999), b.row(999));
        // Growing n keeps the prefix.
        let c = s.sample_power_gains(2000, 42);
        assert_eq!(a.row(123), c.row(123));

        let n = 1_000_000;
        let g = FadingSpec::new(1.0, 1).unwrap().sample_power_gains(n, 7);
        let mean: f64 = g.rows().map(|r| r[0]).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn sample_variance_matches_gamma() {
        // Var = 1/m for the unit-mean Gamma(m, 1/m).
        let m = 4.0;
        let n = 1_000_000;
        let g = FadingSpec::new(m, 1).unwrap().sample_power_gains(n, 11);
        let mean: f64 = g.rows().map(|r| r[0]).sum::<f64>() / n as f64;
        let var: f64 = g.rows().map(|r| (r[0] - mean) * (r[0] - mean)).sum::<f64>() / n as f64;
        // 3 sigma of the variance estimator, roughly sqrt((k4-like)/n).
        let tol = 3.0 * (2.0 / (m * m) / n as f64).sqrt() * 3.0;
        assert!((var - 1.0 / m).abs() < tol, "var {var} vs {}", 1.0 / m);
    }

    #[test]
    fn empirical_cdf_close_to_analytic() {
        // Kolmogorov–Smirnov statistic below 0.002 at n = 1e6.
        for m in [1.0, 2.0] {
            let s = FadingSpec::new(m, 1).unwrap();
            let n = 1_000_000usize;
            let g = s.sample_power_gains(n, 5);
            let mut v: Vec<f64> = g.rows().map(|r| r[0]).collect();
            v.sort_by(f64::total_cmp);
            let mut ks: f64 = 0.0;
            for (i, x) in v.iter().enumerate() {
                let f = s.power_gain_cdf(*x);
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                ks = ks.max((f - lo).abs()).max((f - hi).abs());
            }
            assert!(ks < 0.002, "m={m}: KS statistic {ks}");
        }
    }

    #[test]
    fn ricean_mapping() {
        assert_relative_eq!(ricean_to_nakagami_m(0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(ricean_to_nakagami_m(1.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert!(ricean_to_nakagami_m(100.0).unwrap() > 50.0);
        assert!(ricean_to_nakagami_m(-0.1).is_err());
    }

    #[test]
    fn rejects_bad_shape() {
        assert!(FadingSpec::new(0.49, 1).is_err());
        assert!(FadingSpec::new(f64::NAN, 1).is_err());
        assert!(FadingSpec::new(1.0, 0).is_err());
    }
}
