//! Scalar-AWGN mutual information and MMSE.
//!
//! The channel is `y = sqrt(rho) x + Z` with `Z ~ N_C(0,1)` and a
//! unit-average-energy input. For a uniformly distributed discrete set `X`
//! of size `2^M`,
//!
//! ```text
//! I_X(rho)  = M - 2^-M sum_x E_Z[ log2 sum_{x'} exp(-|sqrt(rho)(x-x')+Z|^2 + |Z|^2) ]
//! MMSE(rho) = 2^-M sum_x E_Z[ |x - xhat(sqrt(rho) x + Z)|^2 ]
//! ```
//!
//! where `xhat(y)` is the posterior mean. The Gaussian expectation is a
//! tensor-product Gauss–Hermite sum; the MMSE integral reuses the same node
//! set recentred at each conditioning symbol. Every `log sum exp` is
//! max-stabilized, so the engine stays finite at any SNR.
//!
//! BICM quantities for a labeled constellation reduce to full- and
//! sub-constellation terms over the bit subsets `X_c^j` (which keep their
//! original, unnormalized coordinates):
//!
//! ```text
//! I^bicm    = sum_j [ I_X - (I_{X_0^j} + I_{X_1^j}) / 2 ]
//! MMSE^bicm = sum_j sum_c (MMSE_X - MMSE_{X_c^j}) / 2      (= dI^bicm/drho * ln 2)
//! ```

use crate::constellation::LabeledConstellation;
use crate::quad::GaussHermite;
use num_complex::Complex64;

/// Input distribution the information curves are computed for.
#[derive(Debug, Clone)]
pub enum InputModel {
    /// Circularly symmetric complex Gaussian input.
    Gaussian,
    /// Coded modulation: uniform input over a fixed constellation.
    Cm(LabeledConstellation),
    /// Bit-interleaved coded modulation with a non-iterative decoder.
    Bicm(LabeledConstellation),
}

impl InputModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            InputModel::Gaussian => "gaussian",
            InputModel::Cm(_) => "cm",
            InputModel::Bicm(_) => "bicm",
        }
    }

    pub fn constellation(&self) -> Option<&LabeledConstellation> {
        match self {
            InputModel::Gaussian => None,
            InputModel::Cm(k) | InputModel::Bicm(k) => Some(k),
        }
    }

    /// Supremum of the mutual information: `M` bits for discrete inputs,
    /// infinite for Gaussian.
    pub fn max_info(&self) -> f64 {
        match self {
            InputModel::Gaussian => f64::INFINITY,
            InputModel::Cm(k) | InputModel::Bicm(k) => k.bits_per_symbol() as f64,
        }
    }
}

/// Mutual information of the complex Gaussian input, `log2(1 + rho)` bits.
pub fn gaussian_info(rho: f64) -> f64 {
    assert!(rho >= 0.0, "SNR must be nonnegative");
    rho.ln_1p() / std::f64::consts::LN_2
}

/// MMSE of the complex Gaussian input, `1 / (1 + rho)`.
pub fn gaussian_mmse(rho: f64) -> f64 {
    assert!(rho >= 0.0, "SNR must be nonnegative");
    1.0 / (1.0 + rho)
}

/// Fixed-order quadrature engine for discrete-input information measures.
#[derive(Debug, Clone)]
pub struct InfoEngine {
    gh: GaussHermite,
}

/// Default Gauss–Hermite order per axis. 64 keeps the derivative identity
/// below 1e-4 over the whole operating range for the builtin constellations.
pub const DEFAULT_QUAD_NODES: usize = 64;

impl Default for InfoEngine {
    fn default() -> Self {
        Self::new(DEFAULT_QUAD_NODES)
    }
}

impl InfoEngine {
    pub fn new(nodes_per_axis: usize) -> Self {
        Self {
            gh: GaussHermite::new(nodes_per_axis),
        }
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.gh.len()
    }

    /// Mutual information and MMSE of a uniform input over `points`, in one
    /// pass. Points keep whatever energy they have; no normalization is
    /// applied here.
    pub fn uniform_stats(&self, points: &[Complex64], rho: f64) -> (f64, f64) {
        assert!(rho >= 0.0, "SNR must be nonnegative");
        let n = points.len();
        assert!(n >= 1, "empty point set");
        let sq = rho.sqrt();
        let nodes = self.gh.nodes();
        let weights = self.gh.weights();
        let mut diffs = vec![Complex64::new(0.0, 0.0); n];
        let mut acc_info = 0.0;
        let mut acc_mmse = 0.0;
        for x in points {
            for (d, xp) in diffs.iter_mut().zip(points) {
                *d = (x - xp) * sq;
            }
            let mut ex = 0.0;
            let mut em = 0.0;
            for (zr, wr) in nodes.iter().zip(weights) {
                for (zi, wi) in nodes.iter().zip(weights) {
                    let w = wr * wi;
                    // Exponents -|d_j + z|^2, max-stabilized; the x'=x term
                    // contributes exactly -|z|^2.
                    let mut emax = f64::NEG_INFINITY;
                    for d in &diffs {
                        let tr = d.re + zr;
                        let ti = d.im + zi;
                        let e = -(tr * tr + ti * ti);
                        if e > emax {
                            emax = e;
                        }
                    }
                    let mut sum = 0.0;
                    let mut num = Complex64::new(0.0, 0.0);
                    for (d, xp) in diffs.iter().zip(points) {
                        let tr = d.re + zr;
                        let ti = d.im + zi;
                        let e = (-(tr * tr + ti * ti) - emax).exp();
                        sum += e;
                        num += xp * e;
                    }
                    let z2 = zr * zr + zi * zi;
                    ex += w * (z2 + emax + sum.ln());
                    let err = x - num / sum;
                    em += w * err.norm_sqr();
                }
            }
            acc_info += ex;
            acc_mmse += em;
        }
        let pi = std::f64::consts::PI;
        let info = (n as f64).log2()
            - acc_info / (pi * n as f64 * std::f64::consts::LN_2);
        let mmse = acc_mmse / (pi * n as f64);
        (info, mmse)
    }

    pub fn info_uniform(&self, points: &[Complex64], rho: f64) -> f64 {
        self.uniform_stats(points, rho).0
    }

    pub fn mmse_uniform(&self, points: &[Complex64], rho: f64) -> f64 {
        self.uniform_stats(points, rho).1
    }

    /// Coded-modulation mutual information of `k` at SNR `rho`, in bits.
    pub fn mutual_info_cm(&self, k: &LabeledConstellation, rho: f64) -> f64 {
        self.info_uniform(k.points(), rho)
    }

    /// Symbol-estimation MMSE of `k` at SNR `rho`.
    pub fn mmse_cm(&self, k: &LabeledConstellation, rho: f64) -> f64 {
        self.mmse_uniform(k.points(), rho)
    }

    /// BICM mutual information of `k` under its own labeling, in bits.
    pub fn mutual_info_bicm(&self, k: &LabeledConstellation, rho: f64) -> f64 {
        let m = k.bits_per_symbol();
        let mut acc = m as f64 * self.info_uniform(k.points(), rho);
        for j in 1..=m {
            for c in [0u8, 1] {
                let pts = k.subset_points(j, c).expect("position in range");
                acc -= 0.5 * self.info_uniform(&pts, rho);
            }
        }
        acc
    }

    /// First derivative of the BICM mutual information with respect to SNR,
    /// times `ln 2` (the BICM analogue of the MMSE; not an estimation error).
    pub fn mmse_bicm(&self, k: &LabeledConstellation, rho: f64) -> f64 {
        let m = k.bits_per_symbol();
        let mut acc = m as f64 * self.mmse_uniform(k.points(), rho);
        for j in 1..=m {
            for c in [0u8, 1] {
                let pts = k.subset_points(j, c).expect("position in range");
                acc -= 0.5 * self.mmse_uniform(&pts, rho);
            }
        }
        acc
    }

    /// `(info, mmse)` for any input model.
    pub fn model_stats(&self, model: &InputModel, rho: f64) -> (f64, f64) {
        match model {
            InputModel::Gaussian => (gaussian_info(rho), gaussian_mmse(rho)),
            InputModel::Cm(k) => self.uniform_stats(k.points(), rho),
            InputModel::Bicm(k) => (self.mutual_info_bicm(k, rho), self.mmse_bicm(k, rho)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// 1-D closed-form BPSK oracles, independent of the 2-D engine.
    ///
    /// With points {+1, -1} and complex noise, only the real noise component
    /// A ~ N(0, 1/2) matters:
    ///   I(rho)    = 1 - E_A[ log2(1 + exp(-4 rho - 4 sqrt(rho) A)) ]
    ///   MMSE(rho) = 1 - E_A[ tanh(2 rho + 2 sqrt(rho) A) ]
    /// and E_A[f(A)] = pi^{-1/2} sum_k w_k f(t_k) for the e^{-t^2} rule.
    mod bpsk_oracle {
        use crate::quad::GaussHermite;

        fn expect_1d<F: Fn(f64) -> f64>(f: F) -> f64 {
            let gh = GaussHermite::new(400);
            let s: f64 = gh
                .nodes()
                .iter()
                .zip(gh.weights())
                .map(|(t, w)| w * f(*t))
                .sum();
            s / std::f64::consts::PI.sqrt()
        }

        fn log2_1p_exp(u: f64) -> f64 {
            // log2(1 + e^u), stable for large |u|.
            if u > 0.0 {
                (u + (-u).exp().ln_1p()) / std::f64::consts::LN_2
            } else {
                u.exp().ln_1p() / std::f64::consts::LN_2
            }
        }

        pub fn info(rho: f64) -> f64 {
            1.0 - expect_1d(|t| log2_1p_exp(-4.0 * rho - 4.0 * rho.sqrt() * t))
        }

        pub fn mmse(rho: f64) -> f64 {
            1.0 - expect_1d(|t| (2.0 * rho + 2.0 * rho.sqrt() * t).tanh())
        }
    }

    fn bpsk() -> LabeledConstellation {
        LabeledConstellation::make_psk(1).unwrap()
    }

    fn qam16() -> LabeledConstellation {
        LabeledConstellation::make_qam(4).unwrap()
    }

    #[test]
    fn bpsk_oracle_matches_reference_values() {
        // Anchors computed with adaptive quadrature on the defining
        // integrals (scipy.integrate.quad, rtol << 1e-10).
        assert_relative_eq!(bpsk_oracle::info(1.0), 0.721_451_590_790_388, epsilon = 1e-9);
        assert_relative_eq!(bpsk_oracle::mmse(0.5), 0.449_599_509_206_673, epsilon = 1e-9);
        assert_relative_eq!(bpsk_oracle::mmse(1.0), 0.231_018_221_929_296, epsilon = 1e-9);
        assert_relative_eq!(bpsk_oracle::mmse(2.0), 0.068_597_408_790_739, epsilon = 1e-9);
    }

    #[test]
    fn engine_matches_bpsk_oracle() {
        let engine = InfoEngine::new(160);
        let k = bpsk();
        for rho in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let (i2, m2) = engine.uniform_stats(k.points(), rho);
            assert_relative_eq!(i2, bpsk_oracle::info(rho), epsilon = 1e-6);
            assert_relative_eq!(m2, bpsk_oracle::mmse(rho), epsilon = 1e-6);
        }
    }

    #[test]
    fn zero_snr_is_exact() {
        let engine = InfoEngine::default();
        for k in [bpsk(), qam16()] {
            let (i, m) = engine.uniform_stats(k.points(), 0.0);
            assert_eq!(i, 0.0);
            assert_relative_eq!(m, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn saturation_at_high_snr() {
        let engine = InfoEngine::default();
        let k = qam16();
        let (i, m) = engine.uniform_stats(k.points(), 1e6);
        assert_relative_eq!(i, 4.0, epsilon = 1e-3);
        assert!(m < 1e-4, "mmse={m}");
        assert!(engine.mmse_bicm(&k, 1e6) < 1e-4);
    }

    #[test]
    fn qpsk_decomposes_into_two_bpsk() {
        // Two quadrature BPSK components, each at half the symbol SNR.
        let engine = InfoEngine::default();
        let qpsk = LabeledConstellation::make_psk(2).unwrap();
        for rho in [0.3, 1.0, 4.0] {
            let i = engine.mutual_info_cm(&qpsk, rho);
            let b = engine.mutual_info_cm(&bpsk(), rho / 2.0);
            assert_relative_eq!(i, 2.0 * b, epsilon = 1e-9);
        }
    }

    #[test]
    fn bicm_equals_cm_for_bpsk() {
        let engine = InfoEngine::default();
        let k = bpsk();
        for rho in [0.0, 0.5, 1.0, 3.0] {
            assert_relative_eq!(
                engine.mutual_info_bicm(&k, rho),
                engine.mutual_info_cm(&k, rho),
                epsilon = 1e-12
            );
            assert_relative_eq!(
                engine.mmse_bicm(&k, rho),
                engine.mmse_cm(&k, rho),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn bicm_below_cm_for_qam16() {
        let engine = InfoEngine::default();
        let k = qam16();
        assert_eq!(engine.mutual_info_bicm(&k, 0.0), 0.0);
        for rho in [0.5, 1.0, 2.0, 5.0] {
            let cm = engine.mutual_info_cm(&k, rho);
            let bicm = engine.mutual_info_bicm(&k, rho);
            assert!(
                bicm < cm && cm - bicm > 1e-4,
                "rho={rho}: bicm={bicm} cm={cm}"
            );
        }
    }

    #[test]
    fn bicm_derivative_matches_finite_difference() {
        let engine = InfoEngine::default();
        let k = qam16();
        let rho = 2.0;
        let h = 1e-3 * (1.0 + rho);
        let fd = (engine.mutual_info_bicm(&k, rho + h) - engine.mutual_info_bicm(&k, rho - h))
            / (2.0 * h);
        let want = engine.mmse_bicm(&k, rho) / std::f64::consts::LN_2;
        assert_relative_eq!(fd, want, epsilon = 1e-4);
    }

    #[test]
    fn gaussian_closed_forms() {
        assert_eq!(gaussian_info(0.0), 0.0);
        assert_eq!(gaussian_mmse(0.0), 1.0);
        assert_relative_eq!(gaussian_info(1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(gaussian_info(3.0), 2.0, epsilon = 1e-15);
        assert_relative_eq!(gaussian_mmse(1.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(gaussian_mmse(3.0), 0.25, epsilon = 1e-15);
    }
}
