//! Labeled signal constellations and the bit-subset structure used by BICM.
//!
//! A constellation is a value object: points are scaled to unit average
//! energy at construction time and never mutated afterwards, so instances are
//! safe to share across threads.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Complex signal set with an M-bit label attached to each point.
///
/// Invariants enforced at construction:
/// * `points.len() == 2^M` and the labels are a bijection onto `{0,1}^M`;
/// * unit average energy, `mean |x|^2 = 1`, within `1e-12`;
/// * no two points coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledConstellation {
    name: String,
    bits_per_symbol: u32,
    points: Vec<Complex64>,
    labels: Vec<u16>,
}

/// The set of constellation points whose label carries bit `value` at
/// `position` (1-based, most significant bit first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSubset {
    pub position: u32,
    pub value: u8,
    pub members: Vec<usize>,
}

impl LabeledConstellation {
    /// Validate and normalize a labeled point set.
    pub fn new(
        name: impl Into<String>,
        bits_per_symbol: u32,
        points: Vec<Complex64>,
        labels: Vec<u16>,
    ) -> Result<Self> {
        let name = name.into();
        let m = bits_per_symbol;
        if !(1..=12).contains(&m) {
            return Err(Error::Constellation(format!(
                "bits per symbol must be in 1..=12, got {m}"
            )));
        }
        let size = 1usize << m;
        if points.len() != size {
            return Err(Error::Constellation(format!(
                "expected {size} points for M={m}, got {}",
                points.len()
            )));
        }
        if labels.len() != size {
            return Err(Error::Constellation(format!(
                "expected {size} labels for M={m}, got {}",
                labels.len()
            )));
        }
        let mut seen = vec![false; size];
        for &l in &labels {
            if (l as usize) >= size {
                return Err(Error::Constellation(format!(
                    "label {l:0width$b} does not fit in {m} bits",
                    width = m as usize
                )));
            }
            if seen[l as usize] {
                return Err(Error::Constellation(format!(
                    "duplicate label {l:0width$b}",
                    width = m as usize
                )));
            }
            seen[l as usize] = true;
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::Constellation("non-finite point".into()));
        }
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / size as f64;
        if energy <= 0.0 {
            return Err(Error::Constellation(
                "constellation has zero average energy".into(),
            ));
        }
        let scale = energy.sqrt().recip();
        let points: Vec<Complex64> = points.iter().map(|p| p * scale).collect();
        for i in 0..size {
            for j in (i + 1)..size {
                if points[i] == points[j] {
                    return Err(Error::Constellation(format!(
                        "points {i} and {j} coincide at {}",
                        points[i]
                    )));
                }
            }
        }
        Ok(Self {
            name,
            bits_per_symbol: m,
            points,
            labels,
        })
    }

    /// Gray-labeled PSK ring with `2^m` unit-circle points, `1 <= m <= 8`.
    pub fn make_psk(m: u32) -> Result<Self> {
        if !(1..=8).contains(&m) {
            return Err(Error::Constellation(format!(
                "PSK supports 1..=8 bits per symbol, got {m}"
            )));
        }
        let size = 1usize << m;
        let mut points = Vec::with_capacity(size);
        let mut labels = Vec::with_capacity(size);
        for k in 0..size {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / size as f64;
            points.push(Complex64::new(phi.cos(), phi.sin()));
            labels.push(binary_gray(k as u16));
        }
        Self::new(format!("psk{size}"), m, points, labels)
    }

    /// Square QAM grid with per-axis Gray labeling, scaled to unit average
    /// energy. `m` must be even, `2 <= m <= 8`.
    pub fn make_qam(m: u32) -> Result<Self> {
        if !(2..=8).contains(&m) || m % 2 != 0 {
            return Err(Error::Constellation(format!(
                "QAM needs an even number of bits in 2..=8, got {m}"
            )));
        }
        let half = m / 2;
        let levels = 1usize << half;
        let size = 1usize << m;
        let mut points = Vec::with_capacity(size);
        let mut labels = Vec::with_capacity(size);
        for ti in 0..levels {
            let re = (2 * ti) as f64 - (levels - 1) as f64;
            for tq in 0..levels {
                let im = (2 * tq) as f64 - (levels - 1) as f64;
                points.push(Complex64::new(re, im));
                labels.push((binary_gray(ti as u16) << half) | binary_gray(tq as u16));
            }
        }
        Self::new(format!("qam{size}"), m, points, labels)
    }

    /// Look up a builtin by name (`bpsk`, `qpsk`, `pskN`, `qamN`).
    pub fn builtin(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bpsk" => Self::make_psk(1),
            "qpsk" => Self::make_psk(2),
            other => {
                if let Some(sz) = other.strip_prefix("psk") {
                    let size: usize = sz
                        .parse()
                        .map_err(|_| Error::Constellation(format!("unknown builtin '{other}'")))?;
                    if !size.is_power_of_two() {
                        return Err(Error::Constellation(format!(
                            "psk size {size} is not a power of two"
                        )));
                    }
                    Self::make_psk(size.trailing_zeros())
                } else if let Some(sz) = other.strip_prefix("qam") {
                    let size: usize = sz
                        .parse()
                        .map_err(|_| Error::Constellation(format!("unknown builtin '{other}'")))?;
                    if !size.is_power_of_two() {
                        return Err(Error::Constellation(format!(
                            "qam size {size} is not a power of two"
                        )));
                    }
                    Self::make_qam(size.trailing_zeros())
                } else {
                    Err(Error::Constellation(format!(
                        "unknown builtin constellation '{other}'"
                    )))
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// M, the number of bits per symbol.
    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    /// Label of point `idx` as an MSB-first bit string.
    pub fn label_string(&self, idx: usize) -> String {
        format!(
            "{:0width$b}",
            self.labels[idx],
            width = self.bits_per_symbol as usize
        )
    }

    /// Bit `position` (1-based, MSB first) of the label of point `idx`.
    pub fn label_bit(&self, idx: usize, position: u32) -> u8 {
        ((self.labels[idx] >> (self.bits_per_symbol - position)) & 1) as u8
    }

    /// Indices of the points whose label has bit `value` at `position`.
    pub fn bit_subset(&self, position: u32, value: u8) -> Result<BitSubset> {
        if position == 0 || position > self.bits_per_symbol {
            return Err(Error::InvalidParameter(format!(
                "bit position {position} out of range 1..={}",
                self.bits_per_symbol
            )));
        }
        if value > 1 {
            return Err(Error::InvalidParameter(format!("bit value {value} not in {{0,1}}")));
        }
        let members: Vec<usize> = (0..self.len())
            .filter(|&i| self.label_bit(i, position) == value)
            .collect();
        Ok(BitSubset {
            position,
            value,
            members,
        })
    }

    /// Points of a bit subset, keeping their original (full-constellation)
    /// coordinates. Subsets are deliberately not re-normalized.
    pub fn subset_points(&self, position: u32, value: u8) -> Result<Vec<Complex64>> {
        let sub = self.bit_subset(position, value)?;
        Ok(sub.members.iter().map(|&i| self.points[i]).collect())
    }

    /// Mean symbol energy (1 by construction; exposed for tests/diagnostics).
    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Deterministic content hash over points and labels, used to key curve
    /// cache entries.
    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_u64(self.bits_per_symbol as u64);
        for p in &self.points {
            h.write_u64(p.re.to_bits());
            h.write_u64(p.im.to_bits());
        }
        for &l in &self.labels {
            h.write_u64(l as u64);
        }
        h.finish()
    }

    /// Load from a JSON file of the form
    /// `{"name": ..., "M": ..., "points": [[re, im], ...], "labels": ["0101", ...]}`.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ConstellationFile = serde_json::from_str(text)?;
        let m = file.m;
        let points = file
            .points
            .iter()
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        let labels = file
            .labels
            .iter()
            .map(|s| parse_label(s, m))
            .collect::<Result<Vec<u16>>>()?;
        Self::new(file.name, m, points, labels)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = ConstellationFile {
            name: self.name.clone(),
            m: self.bits_per_symbol,
            points: self.points.iter().map(|p| [p.re, p.im]).collect(),
            labels: (0..self.len()).map(|i| self.label_string(i)).collect(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }
}

fn parse_label(s: &str, m: u32) -> Result<u16> {
    if s.len() != m as usize || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::Constellation(format!(
            "label '{s}' is not an {m}-bit binary string"
        )));
    }
    Ok(u16::from_str_radix(s, 2).expect("validated binary string"))
}

/// Binary-reflected Gray code.
fn binary_gray(k: u16) -> u16 {
    k ^ (k >> 1)
}

#[derive(Serialize, Deserialize)]
struct ConstellationFile {
    name: String,
    #[serde(rename = "M")]
    m: u32,
    points: Vec<[f64; 2]>,
    labels: Vec<String>,
}

/// Minimal FNV-1a hasher; deterministic across platforms and releases.
pub(crate) struct Fnv64(u64);

impl Fnv64 {
    pub(crate) fn new() -> Self {
        Self(0xcbf29ce484222325)
    }

    pub(crate) fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}
