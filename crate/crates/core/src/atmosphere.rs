//! Specific attenuation of the air column: gases, rain, fog and dry snow.
//!
//! Gaseous absorption is a line-by-line sum over the oxygen and water-vapour
//! spectral lines (ITU-R P.676 Annex 1) plus the dry-air continuum. Fog uses
//! the double-Debye permittivity of liquid water (ITU-R P.840), rain the
//! power law `kR^α` with tabulated coefficients (ITU-R P.838). All results
//! are in dB/km.

use serde::{Deserialize, Serialize};

use crate::data::{self, DataSet};
use crate::error::{Error, Result};

/// Lowest frequency covered by the gaseous model (GHz).
pub const GAS_F_MIN_GHZ: f64 = 1.0;
/// Highest frequency covered by the gaseous model (GHz).
pub const GAS_F_MAX_GHZ: f64 = 1000.0;

/// Ambient conditions. Humidity is given either as relative humidity or as
/// water-vapour density; exactly one must be present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtmosphericConditions {
    pub temperature_k: f64,
    /// Total barometric pressure.
    pub pressure_kpa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_humidity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vapour_density_g_m3: Option<f64>,
    #[serde(default)]
    pub rain_rate_mm_h: f64,
    /// Liquid water content of fog or cloud.
    #[serde(default)]
    pub fog_density_g_m3: f64,
    /// Dry-snow precipitation rate.
    #[serde(default)]
    pub snow_rate_mm_h: f64,
}

impl Default for AtmosphericConditions {
    fn default() -> Self {
        Self {
            temperature_k: 293.15,
            pressure_kpa: 101.325,
            relative_humidity: Some(0.43),
            vapour_density_g_m3: None,
            rain_rate_mm_h: 0.0,
            fog_density_g_m3: 0.0,
            snow_rate_mm_h: 0.0,
        }
    }
}

impl AtmosphericConditions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("atmosphere: {m}")));
        if !(self.temperature_k.is_finite() && self.temperature_k > 0.0) {
            return bad("temperature must be positive");
        }
        if !(self.pressure_kpa.is_finite() && self.pressure_kpa > 0.0) {
            return bad("pressure must be positive");
        }
        match (self.relative_humidity, self.vapour_density_g_m3) {
            (Some(h), None) if (0.0..=1.0).contains(&h) => {}
            (Some(_), None) => return bad("relative humidity must be in [0, 1]"),
            (None, Some(rho)) if rho.is_finite() && rho >= 0.0 => {}
            (None, Some(_)) => return bad("vapour density must be >= 0"),
            _ => return bad("give exactly one of relative_humidity and vapour_density_g_m3"),
        }
        for (v, name) in [
            (self.rain_rate_mm_h, "rain rate"),
            (self.fog_density_g_m3, "fog density"),
            (self.snow_rate_mm_h, "snow rate"),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(&format!("{name} must be >= 0"));
            }
        }
        if self.vapour_pressure_hpa() >= self.pressure_kpa * 10.0 {
            return bad("vapour pressure exceeds total pressure");
        }
        Ok(())
    }

    /// Partial water-vapour pressure `e` in hPa.
    pub fn vapour_pressure_hpa(&self) -> f64 {
        match (self.relative_humidity, self.vapour_density_g_m3) {
            (_, Some(rho)) => rho * self.temperature_k / 216.7,
            (Some(h), None) => {
                h * saturation_vapour_pressure_hpa(self.temperature_k, self.pressure_kpa * 10.0)
            }
            (None, None) => 0.0,
        }
    }

    /// Water-vapour density in g/m³.
    pub fn vapour_density(&self) -> f64 {
        self.vapour_density_g_m3
            .unwrap_or_else(|| 216.7 * self.vapour_pressure_hpa() / self.temperature_k)
    }

    /// Dry-air pressure `p = P − e` in hPa.
    pub fn dry_pressure_hpa(&self) -> f64 {
        self.pressure_kpa * 10.0 - self.vapour_pressure_hpa()
    }
}

/// Saturation vapour pressure over liquid water (ITU-R P.453), hPa, with
/// the enhancement factor for moist air at total pressure `p_hpa`.
pub fn saturation_vapour_pressure_hpa(t_k: f64, p_hpa: f64) -> f64 {
    let t = t_k - 273.15;
    let ef = 1.0 + 1e-4 * (7.2 + p_hpa * (0.0320 + 5.9e-6 * t * t));
    ef * 6.1121 * ((18.678 - t / 234.5) * t / (t + 257.14)).exp()
}

/// Oxygen and water-vapour parts of the gaseous specific attenuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaseousAttenuation {
    pub oxygen_db_km: f64,
    pub water_vapour_db_km: f64,
}

impl GaseousAttenuation {
    pub fn total(&self) -> f64 {
        self.oxygen_db_km + self.water_vapour_db_km
    }
}

fn check_gas_frequency(f_ghz: f64) -> Result<()> {
    if (GAS_F_MIN_GHZ..=GAS_F_MAX_GHZ).contains(&f_ghz) {
        Ok(())
    } else {
        Err(Error::coverage("frequency (GHz)", f_ghz, GAS_F_MIN_GHZ, GAS_F_MAX_GHZ))
    }
}

/// Line-by-line gaseous attenuation for frequency `f_ghz`, dry pressure
/// `p_hpa`, vapour density `rho` (g/m³) and temperature `t_k`.
pub fn gaseous_components(
    tables: &DataSet,
    f_ghz: f64,
    p_hpa: f64,
    rho: f64,
    t_k: f64,
) -> Result<GaseousAttenuation> {
    check_gas_frequency(f_ghz)?;
    let f = f_ghz;
    let theta = 300.0 / t_k;
    let e = rho * t_k / 216.7;

    let mut n_ox = 0.0;
    for l in &tables.oxygen {
        let df = l.a3 * 1e-4 * (p_hpa * theta.powf(0.8 - l.a4) + 1.1 * e * theta);
        let df = (df * df + 2.25e-6).sqrt();
        let delta = (l.a5 + l.a6 * theta) * 1e-4 * (p_hpa + e) * theta.powf(0.8);
        let shape = f / l.f0_ghz
            * ((df - delta * (l.f0_ghz - f)) / ((l.f0_ghz - f).powi(2) + df * df)
                + (df - delta * (l.f0_ghz + f)) / ((l.f0_ghz + f).powi(2) + df * df));
        let strength = l.a1 * 1e-7 * p_hpa * theta.powi(3) * (l.a2 * (1.0 - theta)).exp();
        n_ox += strength * shape;
    }
    let d = 5.6e-4 * (p_hpa + e) * theta.powf(0.8);
    let n_dry = f
        * p_hpa
        * theta
        * theta
        * (6.14e-5 / (d * (1.0 + (f / d).powi(2)))
            + 1.4e-12 * p_hpa * theta.powf(1.5) / (1.0 + 1.9e-5 * f.powf(1.5)));

    let mut n_wv = 0.0;
    for l in &tables.water_vapour {
        let df = l.b3 * 1e-4 * (p_hpa * theta.powf(l.b4) + l.b5 * e * theta.powf(l.b6));
        let df = 0.535 * df + (0.217 * df * df + 2.1316e-12 * l.f0_ghz * l.f0_ghz / theta).sqrt();
        let shape = f / l.f0_ghz
            * (df / ((l.f0_ghz - f).powi(2) + df * df) + df / ((l.f0_ghz + f).powi(2) + df * df));
        let strength = l.b1 * 1e-1 * e * theta.powf(3.5) * (l.b2 * (1.0 - theta)).exp();
        n_wv += strength * shape;
    }

    Ok(GaseousAttenuation {
        oxygen_db_km: (0.1820 * f * (n_ox + n_dry)).max(0.0),
        water_vapour_db_km: (0.1820 * f * n_wv).max(0.0),
    })
}

/// Gaseous specific attenuation at `f_hz` under `cond`.
pub fn gaseous_attenuation(f_hz: f64, cond: &AtmosphericConditions) -> Result<GaseousAttenuation> {
    cond.validate()?;
    gaseous_components(
        data::tables()?,
        f_hz / 1e9,
        cond.dry_pressure_hpa(),
        cond.vapour_density(),
        cond.temperature_k,
    )
}

/// Polarization used to select rain coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RainPolarization {
    Horizontal,
    Vertical,
    /// Circular polarization, also used for the unpolarized average.
    Circular,
}

impl From<crate::propagation::Polarization> for RainPolarization {
    fn from(p: crate::propagation::Polarization) -> Self {
        use crate::propagation::Polarization as P;
        match p {
            P::Avg => RainPolarization::Circular,
            P::Te => RainPolarization::Horizontal,
            P::Tm => RainPolarization::Vertical,
        }
    }
}

/// Coefficients of `γ_R = k R^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RainCoefficients {
    pub k: f64,
    pub alpha: f64,
}

/// Rain coefficients at `f_hz`: `log k` and `α` are interpolated linearly
/// in `log f` between table rows.
pub fn rain_coefficients(f_hz: f64, pol: RainPolarization) -> Result<RainCoefficients> {
    rain_coefficients_from(&data::tables()?.rain, f_hz, pol)
}

pub fn rain_coefficients_from(
    rows: &[data::RainRow],
    f_hz: f64,
    pol: RainPolarization,
) -> Result<RainCoefficients> {
    let f = f_hz / 1e9;
    let (lo, hi) = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => (a.f_ghz, b.f_ghz),
        _ => return Err(Error::Data("empty rain table".into())),
    };
    if !(f >= lo && f <= hi) {
        return Err(Error::coverage("frequency (GHz)", f, lo, hi));
    }
    let k = rows.partition_point(|r| r.f_ghz <= f).clamp(1, rows.len() - 1);
    let (a, b) = (rows[k - 1], rows[k]);
    let t = if b.f_ghz > a.f_ghz {
        (f.ln() - a.f_ghz.ln()) / (b.f_ghz.ln() - a.f_ghz.ln())
    } else {
        0.0
    };
    let lerp_log = |x: f64, y: f64| (x.ln() + t * (y.ln() - x.ln())).exp();
    let lerp = |x: f64, y: f64| x + t * (y - x);
    let (kh, ah) = (lerp_log(a.k_h, b.k_h), lerp(a.alpha_h, b.alpha_h));
    let (kv, av) = (lerp_log(a.k_v, b.k_v), lerp(a.alpha_v, b.alpha_v));
    Ok(match pol {
        RainPolarization::Horizontal => RainCoefficients { k: kh, alpha: ah },
        RainPolarization::Vertical => RainCoefficients { k: kv, alpha: av },
        RainPolarization::Circular => {
            let k = 0.5 * (kh + kv);
            RainCoefficients {
                k,
                alpha: (kh * ah + kv * av) / (2.0 * k),
            }
        }
    })
}

/// Rain specific attenuation `k R^α` for rain rate `rate_mm_h`.
pub fn rain_attenuation(_f_hz: f64, rate_mm_h: f64, coeffs: RainCoefficients) -> f64 {
    if rate_mm_h <= 0.0 {
        return 0.0;
    }
    coeffs.k * rate_mm_h.powf(coeffs.alpha)
}

/// Specific attenuation coefficient `K_l` of fog/cloud liquid water,
/// (dB/km)/(g/m³).
pub fn fog_coefficient(f_hz: f64, t_k: f64) -> Result<f64> {
    fog_coefficient_from(&data::tables()?.debye, f_hz, t_k)
}

pub fn fog_coefficient_from(p: &data::DebyeParams, f_hz: f64, t_k: f64) -> Result<f64> {
    if !(t_k >= p.t_min_k && t_k <= p.t_max_k) {
        return Err(Error::coverage("temperature (K)", t_k, p.t_min_k, p.t_max_k));
    }
    let f = f_hz / 1e9;
    if !(f > 0.0 && f <= GAS_F_MAX_GHZ) {
        return Err(Error::coverage("frequency (GHz)", f, 0.0, GAS_F_MAX_GHZ));
    }
    let theta = 300.0 / t_k;
    let eps0 = p.eps0_a + p.eps0_b * (theta - 1.0);
    let eps1 = p.eps1_ratio * eps0;
    let eps2 = p.eps2;
    let fp = p.fp_a + p.fp_b * (theta - 1.0) + p.fp_c * (theta - 1.0).powi(2);
    let fs = p.fs_ratio * fp;
    let eps_re = (eps0 - eps1) / (1.0 + (f / fp).powi(2)) + (eps1 - eps2) / (1.0 + (f / fs).powi(2)) + eps2;
    let eps_im = f * (eps0 - eps1) / (fp * (1.0 + (f / fp).powi(2)))
        + f * (eps1 - eps2) / (fs * (1.0 + (f / fs).powi(2)));
    let eta = (2.0 + eps_re) / eps_im;
    Ok(0.819 * f / (eps_im * (1.0 + eta * eta)))
}

/// Fog specific attenuation for liquid water content `m_g_m3`.
pub fn fog_attenuation(f_hz: f64, t_k: f64, m_g_m3: f64) -> Result<f64> {
    Ok(fog_coefficient(f_hz, t_k)? * m_g_m3)
}

/// Dry-snow specific attenuation for wavelength `lambda_cm` (cm) and
/// precipitation rate `rate_mm_h`.
pub fn snow_attenuation(lambda_cm: f64, rate_mm_h: f64) -> f64 {
    0.00349 * rate_mm_h.powf(1.6) / lambda_cm.powi(4) + 0.00224 * rate_mm_h / lambda_cm
}

/// Loss in dB over `d` meters at specific attenuation `gamma_db_km`.
pub fn path_attenuation(gamma_db_km: f64, d: f64) -> f64 {
    gamma_db_km * d / 1000.0
}

/// All specific attenuation components for one frequency and condition set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecificAttenuation {
    pub f_ghz: f64,
    pub gamma_o: f64,
    pub gamma_w: f64,
    pub gamma_rain: f64,
    pub gamma_fog: f64,
    pub gamma_snow: f64,
}

impl SpecificAttenuation {
    pub fn gas(&self) -> f64 {
        self.gamma_o + self.gamma_w
    }

    pub fn total(&self) -> f64 {
        self.gas() + self.gamma_rain + self.gamma_fog + self.gamma_snow
    }
}

/// Evaluates every component; weather terms are zero unless their rates are
/// positive in `cond`.
pub fn specific_attenuation(
    f_hz: f64,
    cond: &AtmosphericConditions,
    rain_pol: RainPolarization,
) -> Result<SpecificAttenuation> {
    let gas = gaseous_attenuation(f_hz, cond)?;
    let gamma_rain = if cond.rain_rate_mm_h > 0.0 {
        rain_attenuation(f_hz, cond.rain_rate_mm_h, rain_coefficients(f_hz, rain_pol)?)
    } else {
        0.0
    };
    let gamma_fog = if cond.fog_density_g_m3 > 0.0 {
        fog_attenuation(f_hz, cond.temperature_k, cond.fog_density_g_m3)?
    } else {
        0.0
    };
    let gamma_snow = if cond.snow_rate_mm_h > 0.0 {
        snow_attenuation(crate::wavelength(f_hz) * 100.0, cond.snow_rate_mm_h)
    } else {
        0.0
    };
    Ok(SpecificAttenuation {
        f_ghz: f_hz / 1e9,
        gamma_o: gas.oxygen_db_km,
        gamma_w: gas.water_vapour_db_km,
        gamma_rain,
        gamma_fog,
        gamma_snow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_conditions_humidity_conversion() {
        let c = AtmosphericConditions::default();
        let rho = c.vapour_density();
        assert!((rho - 7.45).abs() < 0.1, "{rho}");
        assert!((c.dry_pressure_hpa() - 1003.2).abs() < 0.5);
    }

    #[test]
    fn dry_air_oxygen_peak() {
        let c = AtmosphericConditions {
            temperature_k: 288.15,
            relative_humidity: Some(0.0),
            ..Default::default()
        };
        let g = gaseous_attenuation(60e9, &c).unwrap();
        assert!(g.total() > 14.0 && g.total() < 16.0, "{}", g.total());
        assert_eq!(g.water_vapour_db_km, 0.0);
    }

    #[test]
    fn gas_frequency_outside_tables_is_coverage_error() {
        let c = AtmosphericConditions::default();
        assert!(matches!(gaseous_attenuation(1.2e12, &c), Err(Error::Coverage { .. })));
        assert!(matches!(gaseous_attenuation(0.5e9, &c), Err(Error::Coverage { .. })));
    }

    #[test]
    fn rain_examples() {
        let unit = RainCoefficients { k: 1.0, alpha: 1.0 };
        assert_eq!(rain_attenuation(300e9, 25.0, unit), 25.0);
        let c = rain_coefficients(300e9, RainPolarization::Circular).unwrap();
        assert_eq!(rain_attenuation(300e9, 0.0, c), 0.0);
        assert!(rain_attenuation(300e9, 10.0, c) < rain_attenuation(300e9, 20.0, c));
    }

    #[test]
    fn fog_is_linear_in_density() {
        let medium = fog_attenuation(300e9, 293.15, 0.05).unwrap();
        let dense = fog_attenuation(300e9, 293.15, 0.5).unwrap();
        assert!((dense / medium - 10.0).abs() < 1e-12);
        assert_eq!(fog_attenuation(300e9, 293.15, 0.0).unwrap(), 0.0);
        assert!(fog_coefficient(300e9, 200.0).is_err());
    }

    #[test]
    fn snow_examples() {
        assert_eq!(snow_attenuation(1.0, 0.0), 0.0);
        assert!((snow_attenuation(1.0, 1.0) - 0.00573).abs() < 1e-15);
        assert!(snow_attenuation(0.5, 2.0) > snow_attenuation(1.0, 2.0));
    }

    #[test]
    fn path_attenuation_examples() {
        assert_eq!(path_attenuation(10.0, 0.0), 0.0);
        assert!((path_attenuation(10.0, 100.0) - 1.0).abs() < 1e-15);
        let whole = path_attenuation(7.3, 3.5);
        let parts = path_attenuation(7.3, 1.25) + path_attenuation(7.3, 2.25);
        assert!((whole - parts).abs() < 1e-15);
    }
}
