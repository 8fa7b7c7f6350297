//! Tabulated electromagnetic material properties.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of a material table: frequency in GHz, refractive index, and
/// absorption coefficient in 1/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct MaterialSample {
    pub f_ghz: f64,
    pub n: f64,
    pub alpha_per_m: f64,
}

impl From<[f64; 3]> for MaterialSample {
    fn from(a: [f64; 3]) -> Self {
        Self {
            f_ghz: a[0],
            n: a[1],
            alpha_per_m: a[2],
        }
    }
}

impl From<MaterialSample> for [f64; 3] {
    fn from(s: MaterialSample) -> Self {
        [s.f_ghz, s.n, s.alpha_per_m]
    }
}

/// A surface material. Properties are linearly interpolated in frequency
/// between table rows; extrapolation is a coverage error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub name: String,
    pub table: Vec<MaterialSample>,
    /// RMS surface height deviation in meters (0 = smooth).
    #[serde(default)]
    pub roughness_m: f64,
    /// Whether faces made of this material produce specular reflections.
    #[serde(default = "default_reflective")]
    pub reflective: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub source: String,
}

fn default_reflective() -> bool {
    true
}

impl Material {
    /// A material with frequency-flat properties over `[f_min_ghz, f_max_ghz]`.
    pub fn constant(name: &str, n: f64, alpha_per_m: f64, f_min_ghz: f64, f_max_ghz: f64) -> Self {
        Self {
            name: name.to_string(),
            table: vec![
                MaterialSample { f_ghz: f_min_ghz, n, alpha_per_m },
                MaterialSample { f_ghz: f_max_ghz, n, alpha_per_m },
            ],
            roughness_m: 0.0,
            reflective: true,
            source: String::new(),
        }
    }

    /// Checks the table: at least one row, strictly increasing frequencies,
    /// `n ≥ 1`, `α ≥ 0`, `σ_h ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("material '{}': {msg}", self.name)));
        if self.table.is_empty() {
            return bad("empty frequency table");
        }
        for (i, s) in self.table.iter().enumerate() {
            if !(s.f_ghz.is_finite() && s.f_ghz > 0.0) {
                return bad("frequencies must be positive");
            }
            if !(s.n.is_finite() && s.n >= 1.0) {
                return bad("refractive index must be >= 1");
            }
            if !(s.alpha_per_m.is_finite() && s.alpha_per_m >= 0.0) {
                return bad("absorption coefficient must be >= 0");
            }
            if i > 0 && s.f_ghz <= self.table[i - 1].f_ghz {
                return bad("frequencies must be strictly increasing");
            }
        }
        if !(self.roughness_m.is_finite() && self.roughness_m >= 0.0) {
            return bad("roughness must be >= 0");
        }
        Ok(())
    }

    /// Refractive index and absorption coefficient (1/m) at `f_hz`.
    pub fn properties(&self, f_hz: f64) -> Result<(f64, f64)> {
        let f = f_hz / 1e9;
        let first = self.table.first().ok_or_else(|| {
            Error::InvalidArgument(format!("material '{}' has an empty table", self.name))
        })?;
        let last = self.table[self.table.len() - 1];
        let tol = 1e-9 * f.abs();
        if !(f >= first.f_ghz - tol && f <= last.f_ghz + tol) {
            return Err(Error::coverage(
                format!("frequency (GHz) for material '{}'", self.name),
                f,
                first.f_ghz,
                last.f_ghz,
            ));
        }
        if self.table.len() == 1 || f <= first.f_ghz {
            return Ok((first.n, first.alpha_per_m));
        }
        if f >= last.f_ghz {
            return Ok((last.n, last.alpha_per_m));
        }
        let k = self.table.partition_point(|s| s.f_ghz <= f);
        let (a, b) = (self.table[k - 1], self.table[k]);
        let t = (f - a.f_ghz) / (b.f_ghz - a.f_ghz);
        Ok((a.n + t * (b.n - a.n), a.alpha_per_m + t * (b.alpha_per_m - a.alpha_per_m)))
    }

    pub fn refractive_index(&self, f_hz: f64) -> Result<f64> {
        self.properties(f_hz).map(|p| p.0)
    }

    pub fn absorption_coefficient(&self, f_hz: f64) -> Result<f64> {
        self.properties(f_hz).map(|p| p.1)
    }
}
