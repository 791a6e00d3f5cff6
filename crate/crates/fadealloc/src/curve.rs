//! Tabulated, invertible `rho -> I` and `rho -> MMSE` maps.
//!
//! Discrete-input curves are built once by quadrature on a log-spaced SNR
//! grid and then evaluated through monotone piecewise-cubic interpolation;
//! the Gaussian model bypasses tabulation entirely and uses its closed forms,
//! so Gaussian inversions are exact. Curves are immutable after construction
//! and safe to share across threads.

use crate::awgn::{gaussian_info, gaussian_mmse, InfoEngine, InputModel};
use crate::constellation::Fnv64;
use crate::error::{Error, Result};
use crate::interp::Pchip;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Relative tolerance on the rate residual of `inverse_info`.
const INV_INFO_TOL: f64 = 1e-9;
/// Absolute tolerance on the MMSE residual of `inverse_mmse`.
const INV_MMSE_TOL: f64 = 1e-9;
/// The auto-sized grid extends until `I(rho_max) >= M - SATURATION_GAP`.
const SATURATION_GAP: f64 = 1e-5;

/// SNR grid specification for curve tabulation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridSpec {
    /// Number of log-spaced knots (rho = 0 is always added in front).
    pub knots: usize,
    pub rho_min: f64,
    /// Fixed upper end, or `None` to grow until the input saturates.
    pub rho_max: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            knots: 200,
            rho_min: 1e-3,
            rho_max: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
enum CurveKind {
    Gaussian,
    Discrete {
        kind: String, // "cm" | "bicm"
        constellation: String,
        bits_per_symbol: u32,
        constellation_hash: String,
    },
}

/// Result of an MMSE inversion. `saturated` marks targets below the numeric
/// MMSE floor of the grid: the returned SNR is the top of the grid and the
/// constellation is effectively saturated there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseInverse {
    pub rho: f64,
    pub saturated: bool,
}

/// Tabulated mutual-information / MMSE curve for one input model.
#[derive(Debug, Clone)]
pub struct InfoCurve {
    kind: CurveKind,
    quad_nodes: usize,
    grid: Vec<f64>,
    info: Vec<f64>,
    mmse: Vec<f64>,
    info_interp: Pchip,
    mmse_interp: Pchip,
    max_info: f64,
}

impl InfoCurve {
    /// Tabulate `model` on the grid described by `spec`.
    ///
    /// Knot evaluation runs in parallel; each knot is an independent fixed
    /// quadrature sum, so results are bit-identical to a sequential build.
    pub fn build(model: &InputModel, spec: &GridSpec, engine: &InfoEngine) -> Result<Self> {
        if spec.knots < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 16 knots, got {}",
                spec.knots
            )));
        }
        if !(spec.rho_min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rho_min must be positive, got {}",
                spec.rho_min
            )));
        }
        let max_info = model.max_info();
        let rho_max = match spec.rho_max {
            Some(r) => {
                if r <= spec.rho_min {
                    return Err(Error::InvalidParameter(format!(
                        "rho_max {r} must exceed rho_min {}",
                        spec.rho_min
                    )));
                }
                r
            }
            None => match model {
                InputModel::Gaussian => 1e6,
                _ => {
                    let mut cand = 64.0;
                    loop {
                        let (info, _) = engine.model_stats(model, cand);
                        if info >= max_info - SATURATION_GAP {
                            break cand;
                        }
                        cand *= 2.0;
                        if cand > 1e9 {
                            return Err(Error::QuadratureNonConvergence {
                                context: "saturation search for rho_max".into(),
                                achieved: max_info - info,
                                wanted: SATURATION_GAP,
                            });
                        }
                    }
                }
            },
        };
        let mut grid = Vec::with_capacity(spec.knots + 1);
        grid.push(0.0);
        let ln_lo = spec.rho_min.ln();
        let ln_hi = rho_max.ln();
        for i in 0..spec.knots {
            let t = i as f64 / (spec.knots - 1) as f64;
            grid.push((ln_lo + t * (ln_hi - ln_lo)).exp());
        }
        let stats: Vec<(f64, f64)> = grid
            .par_iter()
            .map(|&rho| engine.model_stats(model, rho))
            .collect();
        let mut info: Vec<f64> = stats.iter().map(|s| s.0).collect();
        let mut mmse: Vec<f64> = stats.iter().map(|s| s.1.max(0.0)).collect();
        enforce_monotone(&mut info, true)?;
        enforce_monotone(&mut mmse, false)?;
        let kind = match model {
            InputModel::Gaussian => CurveKind::Gaussian,
            InputModel::Cm(k) => CurveKind::Discrete {
                kind: "cm".into(),
                constellation: k.name().to_string(),
                bits_per_symbol: k.bits_per_symbol(),
                constellation_hash: format!("{:016x}", k.content_hash()),
            },
            InputModel::Bicm(k) => CurveKind::Discrete {
                kind: "bicm".into(),
                constellation: k.name().to_string(),
                bits_per_symbol: k.bits_per_symbol(),
                constellation_hash: format!("{:016x}", k.content_hash()),
            },
        };
        let curve = Self {
            kind,
            quad_nodes: engine.nodes_per_axis(),
            info_interp: Pchip::new(grid.clone(), info.clone()),
            mmse_interp: Pchip::new(grid.clone(), mmse.clone()),
            grid,
            info,
            mmse,
            max_info,
        };
        curve.check_secant_consistency()?;
        Ok(curve)
    }

    /// each grid secant of `I` must agree with the trapezoid of `MMSE/ln 2`
    /// to grid resolution, which catches quadrature breakdowns at build time.
    fn check_secant_consistency(&self) -> Result<()> {
        if matches!(self.kind, CurveKind::Gaussian) {
            return Ok(());
        }
        let ln2 = std::f64::consts::LN_2;
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() - 1 {
            let drho = self.grid[i + 1] - self.grid[i];
            let secant = (self.info[i + 1] - self.info[i]) / drho;
            let trapezoid = 0.5 * (self.mmse[i] + self.mmse[i + 1]) / ln2;
            let scale = trapezoid.abs().max(1e-6);
            worst = worst.max((secant - trapezoid).abs() / scale);
        }
        if worst > 0.08 {
            return Err(Error::QuadratureNonConvergence {
                context: "info/mmse secant consistency".into(),
                achieved: worst,
                wanted: 0.08,
            });
        }
        Ok(())
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.kind, CurveKind::Gaussian)
    }

    /// `"gaussian"`, `"cm"` or `"bicm"`.
    pub fn model_kind(&self) -> &str {
        match &self.kind {
            CurveKind::Gaussian => "gaussian",
            CurveKind::Discrete { kind, .. } => kind,
        }
    }

    pub fn constellation_name(&self) -> Option<&str> {
        match &self.kind {
            CurveKind::Gaussian => None,
            CurveKind::Discrete { constellation, .. } => Some(constellation),
        }
    }

    pub fn max_info(&self) -> f64 {
        self.max_info
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn info_values(&self) -> &[f64] {
        &self.info
    }

    pub fn mmse_values(&self) -> &[f64] {
        &self.mmse
    }

    pub fn rho_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Smallest tabulated MMSE value (0 for the Gaussian closed form).
    pub fn mmse_floor(&self) -> f64 {
        if self.is_gaussian() {
            0.0
        } else {
            *self.mmse.last().unwrap()
        }
    }

    /// Largest tabulated mutual information.
    pub fn info_ceiling(&self) -> f64 {
        if self.is_gaussian() {
            f64::INFINITY
        } else {
            *self.info.last().unwrap()
        }
    }

    pub fn quad_nodes(&self) -> usize {
        self.quad_nodes
    }

    /// Mutual information at SNR `rho`, in bits.
    pub fn info(&self, rho: f64) -> f64 {
        assert!(rho >= 0.0, "SNR must be nonnegative");
        if self.is_gaussian() {
            gaussian_info(rho)
        } else {
            self.info_interp.eval(rho)
        }
    }

    /// MMSE at SNR `rho`.
    pub fn mmse(&self, rho: f64) -> f64 {
        assert!(rho >= 0.0, "SNR must be nonnegative");
        if self.is_gaussian() {
            gaussian_mmse(rho)
        } else {
            self.mmse_interp.eval(rho)
        }
    }

    /// SNR at which the curve reaches `rate` bits.
    pub fn inverse_info(&self, rate: f64) -> Result<f64> {
        if rate < 0.0 {
            return Err(Error::InvalidParameter(format!("rate {rate} < 0")));
        }
        if rate >= self.max_info {
            return Err(Error::UnachievableRate {
                rate,
                max_info: self.max_info,
            });
        }
        if self.is_gaussian() {
            return Ok((rate * std::f64::consts::LN_2).exp_m1());
        }
        if rate == 0.0 {
            return Ok(0.0);
        }
        let ceiling = self.info_ceiling();
        if rate > ceiling {
            return Err(Error::RateBeyondGrid {
                rate,
                grid_max: ceiling,
            });
        }
        let tol = INV_INFO_TOL * rate.max(1.0);
        Ok(invert_monotone(&self.info_interp, rate, true, tol))
    }

    /// SNR at which the MMSE comes down to `target`.
    ///
    /// Targets at or above `MMSE(0) = 1` clamp to `rho = 0`; targets below
    /// the tabulated floor return the top of the grid with `saturated` set.
    pub fn inverse_mmse(&self, target: f64) -> Result<MmseInverse> {
        if target <= 0.0 {
            return Err(Error::MmseTargetNonpositive(target));
        }
        if target >= 1.0 {
            return Ok(MmseInverse {
                rho: 0.0,
                saturated: false,
            });
        }
        if self.is_gaussian() {
            return Ok(MmseInverse {
                rho: target.recip() - 1.0,
                saturated: false,
            });
        }
        if target < self.mmse_floor() {
            return Ok(MmseInverse {
                rho: self.rho_max(),
                saturated: true,
            });
        }
        let rho = invert_monotone(&self.mmse_interp, target, false, INV_MMSE_TOL);
        Ok(MmseInverse {
            rho,
            saturated: false,
        })
    }

    /// Deterministic hash of the curve contents, used in run metadata.
    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv64::new();
        match &self.kind {
            CurveKind::Gaussian => h.write_u64(0),
            CurveKind::Discrete {
                kind,
                constellation_hash,
                bits_per_symbol,
                ..
            } => {
                h.write_u64(if kind == "cm" { 1 } else { 2 });
                h.write_u64(*bits_per_symbol as u64);
                h.write_u64(u64::from_str_radix(constellation_hash, 16).unwrap_or(0));
            }
        }
        h.write_u64(self.quad_nodes as u64);
        for v in self.grid.iter().chain(&self.info).chain(&self.mmse) {
            h.write_u64(v.to_bits());
        }
        h.finish()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CurveFile {
            version: CURVE_FILE_VERSION,
            kind: self.kind.clone(),
            quad_nodes: self.quad_nodes,
            grid: self.grid.clone(),
            info: self.info.clone(),
            mmse: self.mmse.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CurveFile = serde_json::from_str(text)?;
        if file.version != CURVE_FILE_VERSION {
            return Err(Error::InvalidCache(format!(
                "curve file version {} (expected {CURVE_FILE_VERSION})",
                file.version
            )));
        }
        let n = file.grid.len();
        if n < 2 || file.info.len() != n || file.mmse.len() != n {
            return Err(Error::InvalidCache("array length mismatch".into()));
        }
        if !file.grid.windows(2).all(|w| w[1] > w[0]) || file.grid[0] != 0.0 {
            return Err(Error::InvalidCache(
                "grid must start at 0 and increase strictly".into(),
            ));
        }
        let mut info = file.info;
        let mut mmse = file.mmse;
        enforce_monotone(&mut info, true)
            .map_err(|_| Error::InvalidCache("info values not nondecreasing".into()))?;
        enforce_monotone(&mut mmse, false)
            .map_err(|_| Error::InvalidCache("mmse values not nonincreasing".into()))?;
        let max_info = match &file.kind {
            CurveKind::Gaussian => f64::INFINITY,
            CurveKind::Discrete {
                bits_per_symbol, ..
            } => *bits_per_symbol as f64,
        };
        Ok(Self {
            kind: file.kind,
            quad_nodes: file.quad_nodes,
            info_interp: Pchip::new(file.grid.clone(), info.clone()),
            mmse_interp: Pchip::new(file.grid.clone(), mmse.clone()),
            grid: file.grid,
            info,
            mmse,
            max_info,
        })
    }
}

const CURVE_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CurveFile {
    version: u32,
    kind: CurveKind,
    quad_nodes: usize,
    grid: Vec<f64>,
    info: Vec<f64>,
    mmse: Vec<f64>,
}

/// Clamp sub-epsilon monotonicity violations (quadrature noise near
/// saturation); report anything larger as a build failure.
fn enforce_monotone(values: &mut [f64], increasing: bool) -> Result<()> {
    for i in 1..values.len() {
        let prev = values[i - 1];
        let cur = values[i];
        let slack = 1e-12 * prev.abs().max(1.0);
        if increasing {
            if cur < prev - slack {
                return Err(Error::QuadratureNonConvergence {
                    context: format!("monotonicity at knot {i}"),
                    achieved: prev - cur,
                    wanted: slack,
                });
            }
            values[i] = cur.max(prev);
        } else {
            if cur > prev + slack {
                return Err(Error::QuadratureNonConvergence {
                    context: format!("monotonicity at knot {i}"),
                    achieved: cur - prev,
                    wanted: slack,
                });
            }
            values[i] = cur.min(prev);
        }
    }
    Ok(())
}

/// Bisection for `interp(x) = target` on a monotone interpolant. The bracket
/// is a single knot segment located by binary search on the knot values, so
/// the iteration only ever evaluates one cubic.
fn invert_monotone(interp: &Pchip, target: f64, increasing: bool, tol: f64) -> f64 {
    let ys = interp.y();
    let n = ys.len();
    // Locate the first segment whose right endpoint reaches the target.
    let seg = if increasing {
        ys.partition_point(|&v| v < target).clamp(1, n - 1) - 1
    } else {
        ys.partition_point(|&v| v > target).clamp(1, n - 1) - 1
    };
    let mut lo = interp.x()[seg];
    let mut hi = interp.x()[seg + 1];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = interp.eval_on_segment(seg, mid);
        if (v - target).abs() <= tol {
            return mid;
        }
        let low_side = if increasing { v < target } else { v > target };
        if low_side {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Disk cache of curve tabulations keyed by model, quadrature order and grid.
#[derive(Debug, Clone)]
pub struct CurveCache {
    dir: Option<PathBuf>,
}

/// Environment variable naming the curve-cache directory.
pub const CACHE_DIR_ENV: &str = "FADEALLOC_CACHE_DIR";

impl CurveCache {
    /// Cache rooted at `$FADEALLOC_CACHE_DIR`, or a pass-through builder when
    /// the variable is unset.
    pub fn from_env() -> Self {
        Self {
            dir: std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from),
        }
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
        }
    }

    pub fn disabled() -> Self {
        Self { dir: None }
    }

    fn key_path(&self, model: &InputModel, spec: &GridSpec, engine: &InfoEngine) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        let mut h = Fnv64::new();
        h.write_u64(match model {
            InputModel::Gaussian => 0,
            InputModel::Cm(_) => 1,
            InputModel::Bicm(_) => 2,
        });
        if let Some(k) = model.constellation() {
            h.write_u64(k.content_hash());
        }
        h.write_u64(engine.nodes_per_axis() as u64);
        h.write_u64(spec.knots as u64);
        h.write_u64(spec.rho_min.to_bits());
        h.write_u64(spec.rho_max.unwrap_or(f64::NAN).to_bits());
        let base = model
            .constellation()
            .map(|k| k.name().to_string())
            .unwrap_or_else(|| "gaussian".into());
        Some(dir.join(format!(
            "{base}-{}-n{}-{:016x}.json",
            model.kind_name(),
            engine.nodes_per_axis(),
            h.finish()
        )))
    }

    /// Load a cached tabulation if one validates, otherwise build and store.
    pub fn get_or_build(
        &self,
        model: &InputModel,
        spec: &GridSpec,
        engine: &InfoEngine,
    ) -> Result<InfoCurve> {
        let path = self.key_path(model, spec, engine);
        if let Some(p) = &path {
            if let Ok(text) = std::fs::read_to_string(p) {
                if let Ok(curve) = InfoCurve::from_json(&text) {
                    return Ok(curve);
                }
                // fall through and rebuild on any validation failure
            }
        }
        let curve = InfoCurve::build(model, spec, engine)?;
        if let Some(p) = &path {
            if let Some(parent) = p.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, curve.to_json()?)?;
        }
        Ok(curve)
    }
}

pub fn cache_file_exists(path: &Path) -> bool {
    path.exists()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::LabeledConstellation;
    use approx::assert_relative_eq;

    fn engine() -> InfoEngine {
        InfoEngine::default()
    }

    fn qam16_cm_curve() -> InfoCurve {
        let model = InputModel::Cm(LabeledConstellation::make_qam(4).unwrap());
        InfoCurve::build(&model, &GridSpec::default(), &engine()).unwrap()
    }

    #[test]
    fn gaussian_curve_exact_at_knots_and_inverses() {
        let curve = InfoCurve::build(&InputModel::Gaussian, &GridSpec::default(), &engine()).unwrap();
        for &rho in curve.grid() {
            assert_eq!(curve.info(rho), gaussian_info(rho));
            assert_eq!(curve.mmse(rho), gaussian_mmse(rho));
        }
        assert_relative_eq!(curve.inverse_info(1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(curve.inverse_info(0.0).unwrap(), 0.0, epsilon = 1e-15);
        let inv = curve.inverse_mmse(0.25).unwrap();
        assert!(!inv.saturated);
        assert_relative_eq!(inv.rho, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn qam16_curve_monotone_and_saturates() {
        let curve = qam16_cm_curve();
        assert_eq!(curve.max_info(), 4.0);
        let info = curve.info_values();
        let mmse = curve.mmse_values();
        for i in 1..info.len() {
            assert!(info[i] >= info[i - 1]);
            assert!(mmse[i] <= mmse[i - 1]);
        }
        assert!(curve.info_ceiling() >= 4.0 - 1e-4);
        assert!(curve.mmse(curve.rho_max()) < 1e-4);
        assert_relative_eq!(curve.mmse(0.0), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn grid_secants_match_mmse_trapezoids() {
        // Discrete consistency between the two tabulated maps.
        let curve = qam16_cm_curve();
        let ln2 = std::f64::consts::LN_2;
        let g = curve.grid();
        for i in 1..g.len() - 1 {
            let secant = (curve.info_values()[i + 1] - curve.info_values()[i]) / (g[i + 1] - g[i]);
            let trap = 0.5 * (curve.mmse_values()[i] + curve.mmse_values()[i + 1]) / ln2;
            let tol = 0.05 * trap.abs().max(1e-6);
            assert!(
                (secant - trap).abs() <= tol,
                "knot {i}: secant {secant} vs trapezoid {trap}"
            );
        }
    }

    #[test]
    fn inverse_info_round_trip() {
        let curve = qam16_cm_curve();
        for rho0 in [0.1, 1.0, 10.0] {
            let r = curve.info(rho0);
            let rho = curve.inverse_info(r).unwrap();
            assert_relative_eq!(rho, rho0, max_relative = 1e-6);
        }
        assert!(matches!(
            curve.inverse_info(4.0),
            Err(Error::UnachievableRate { .. })
        ));
        assert!(matches!(
            curve.inverse_info(5.0),
            Err(Error::UnachievableRate { .. })
        ));
    }

    #[test]
    fn inverse_mmse_round_trip_and_clamps() {
        let curve = qam16_cm_curve();
        for rho0 in [0.5, 5.0] {
            let v = curve.mmse(rho0);
            let inv = curve.inverse_mmse(v).unwrap();
            assert!(!inv.saturated);
            assert_relative_eq!(inv.rho, rho0, max_relative = 1e-6);
        }
        // Clamp at and above MMSE(0).
        assert_eq!(curve.inverse_mmse(1.0).unwrap().rho, 0.0);
        assert_eq!(curve.inverse_mmse(7.0).unwrap().rho, 0.0);
        // Below the numeric floor: saturation flag.
        let floor = curve.mmse_floor();
        if floor > 0.0 {
            let inv = curve.inverse_mmse(floor * 0.5).unwrap();
            assert!(inv.saturated);
            assert_eq!(inv.rho, curve.rho_max());
        }
        assert!(curve.inverse_mmse(0.0).is_err());
        assert!(curve.inverse_mmse(-0.1).is_err());
    }

    #[test]
    fn bicm_curve_below_cm() {
        let k = LabeledConstellation::make_qam(4).unwrap();
        let spec = GridSpec {
            knots: 60,
            ..GridSpec::default()
        };
        let cm = InfoCurve::build(&InputModel::Cm(k.clone()), &spec, &engine()).unwrap();
        let bicm = InfoCurve::build(&InputModel::Bicm(k), &spec, &engine()).unwrap();
        for (i, &rho) in cm.grid().iter().enumerate() {
            assert!(
                bicm.info(rho) <= cm.info_values()[i] + 1e-9,
                "rho={rho}: bicm {} > cm {}",
                bicm.info(rho),
                cm.info_values()[i]
            );
        }
    }

    #[test]
    fn serialization_round_trip_and_cache() {
        let curve = qam16_cm_curve();
        let text = curve.to_json().unwrap();
        let back = InfoCurve::from_json(&text).unwrap();
        assert_eq!(back.content_hash(), curve.content_hash());
        assert_eq!(back.grid(), curve.grid());

        // Corrupt the info values: loader must reject.
        let mut file: serde_json::Value = serde_json::from_str(&text).unwrap();
        let arr = file["info"].as_array_mut().unwrap();
        let n = arr.len();
        arr[n / 2] = serde_json::json!(5.0);
        assert!(InfoCurve::from_json(&file.to_string()).is_err());

        let dir = tempfile::tempdir().unwrap();
        let cache = CurveCache::with_dir(dir.path());
        let model = InputModel::Cm(LabeledConstellation::make_qam(4).unwrap());
        let spec = GridSpec::default();
        let eng = engine();
        let first = cache.get_or_build(&model, &spec, &eng).unwrap();
        // Second call must hit the cache and reproduce the same contents.
        let second = cache.get_or_build(&model, &spec, &eng).unwrap();
        assert_eq!(first.content_hash(), second.content_hash());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
