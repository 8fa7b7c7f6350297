//! Surface electromagnetics and free-space loss.
//!
//! Reflection off a wall is modeled with the Fresnel coefficients of a
//! lossy dielectric half-space, whose wave impedance follows from the
//! complex refractive index `n − jκ` with extinction `κ = αc/(4πf)`. Surface
//! roughness scales the coefficient magnitude by the Rayleigh factor.

mod material;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use material::{Material, MaterialSample};

use crate::error::{Error, Result};
use crate::{EPSILON_0, MU_0, SPEED_OF_LIGHT};

/// Impedance of free space, `sqrt(μ0/ε0)` (ohms).
pub fn free_space_impedance() -> f64 {
    (MU_0 / EPSILON_0).sqrt()
}

/// Polarization used to turn the two Fresnel coefficients into one loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// Power mean of TE and TM (unpolarized).
    #[default]
    Avg,
    Te,
    Tm,
}

impl std::str::FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg" => Ok(Self::Avg),
            "te" => Ok(Self::Te),
            "tm" => Ok(Self::Tm),
            _ => Err(Error::InvalidArgument(format!(
                "unknown polarization '{s}' (expected avg, te or tm)"
            ))),
        }
    }
}

/// Wave impedance of a medium with refractive index `n` and absorption
/// coefficient `alpha_per_m` at `f_hz`. Principal square root.
pub fn impedance_from_index(n: f64, alpha_per_m: f64, f_hz: f64) -> Complex64 {
    let kappa = alpha_per_m * SPEED_OF_LIGHT / (4.0 * PI * f_hz);
    let eps_r = Complex64::new(n * n - kappa * kappa, -2.0 * n * kappa);
    (Complex64::new(MU_0, 0.0) / (eps_r * EPSILON_0)).sqrt()
}

/// Wave impedance of `material` at `f_hz`.
pub fn wave_impedance(material: &Material, f_hz: f64) -> Result<Complex64> {
    let (n, alpha) = material.properties(f_hz)?;
    Ok(impedance_from_index(n, alpha, f_hz))
}

fn check_incidence(theta_i: f64) -> Result<()> {
    if (0.0..FRAC_PI_2).contains(&theta_i) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "incidence angle {theta_i} rad outside [0, pi/2)"
        )))
    }
}

fn ratio(num: Complex64, den: Complex64) -> Result<Complex64> {
    if den.norm() == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateGeometry(
            "Fresnel coefficient has a zero denominator".into(),
        ));
    }
    Ok(num / den)
}

/// TE (perpendicular) reflection coefficient from medium 1 into medium 2.
pub fn fresnel_te(z1: Complex64, z2: Complex64, theta_i: f64, theta_t: f64) -> Result<Complex64> {
    check_incidence(theta_i)?;
    let (ci, ct) = (theta_i.cos(), theta_t.cos());
    ratio(z2 * ci - z1 * ct, z2 * ci + z1 * ct)
}

/// TM (parallel) reflection coefficient from medium 1 into medium 2.
pub fn fresnel_tm(z1: Complex64, z2: Complex64, theta_i: f64, theta_t: f64) -> Result<Complex64> {
    check_incidence(theta_i)?;
    let (ci, ct) = (theta_i.cos(), theta_t.cos());
    ratio(z2 * ct - z1 * ci, z2 * ct + z1 * ci)
}

/// Snell's law. Total internal reflection is an error.
pub fn refraction_angle(n1: f64, n2: f64, theta_i: f64) -> Result<f64> {
    if !(n1 > 0.0 && n2 > 0.0) {
        return Err(Error::InvalidArgument("refractive indices must be positive".into()));
    }
    let s = n1 / n2 * theta_i.sin();
    if s.abs() > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "total internal reflection (sin theta_t = {s})"
        )));
    }
    Ok(s.asin())
}

/// Rayleigh roughness factor `exp(−8(πσ_h cosθ_i/λ)²)`.
pub fn roughness_factor(sigma_h: f64, theta_i: f64, wavelength: f64) -> f64 {
    let g = PI * sigma_h * theta_i.cos() / wavelength;
    (-8.0 * g * g).exp()
}

/// Free-space path loss in dB for a distance `d` and wavelength `wavelength`
/// (both meters). With `include_gains` the antenna gains are subtracted.
pub fn friis_path_loss(d: f64, wavelength: f64, gt_db: f64, gr_db: f64, include_gains: bool) -> f64 {
    let raw = 20.0 * (4.0 * PI * d / wavelength).log10();
    if include_gains {
        raw - gt_db - gr_db
    } else {
        raw
    }
}

/// Fresnel coefficients of an air-to-material interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub te: Complex64,
    pub tm: Complex64,
    /// Rayleigh roughness factor applied to both magnitudes.
    pub roughness: f64,
}

impl Reflection {
    /// Effective power reflectance `|γ|²ρ²` for the chosen polarization.
    pub fn power(&self, pol: Polarization) -> f64 {
        let r2 = self.roughness * self.roughness;
        match pol {
            Polarization::Avg => 0.5 * (self.te.norm_sqr() + self.tm.norm_sqr()) * r2,
            Polarization::Te => self.te.norm_sqr() * r2,
            Polarization::Tm => self.tm.norm_sqr() * r2,
        }
    }

    /// Reflection loss in dB (non-negative for passive media).
    pub fn loss_db(&self, pol: Polarization) -> f64 {
        -10.0 * self.power(pol).log10()
    }
}

/// Fresnel reflection of a wave arriving from air at incidence `theta_i`.
pub fn reflect(material: &Material, f_hz: f64, theta_i: f64) -> Result<Reflection> {
    let (n, alpha) = material.properties(f_hz)?;
    let z1 = Complex64::new(free_space_impedance(), 0.0);
    let z2 = impedance_from_index(n, alpha, f_hz);
    let theta_t = refraction_angle(1.0, n, theta_i)?;
    Ok(Reflection {
        te: fresnel_te(z1, z2, theta_i, theta_t)?,
        tm: fresnel_tm(z1, z2, theta_i, theta_t)?,
        roughness: roughness_factor(material.roughness_m, theta_i, SPEED_OF_LIGHT / f_hz),
    })
}

/// Reflection loss in dB off `material` for the given polarization.
pub fn reflection_loss_db(material: &Material, f_hz: f64, theta_i: f64, pol: Polarization) -> Result<f64> {
    reflect(material, f_hz, theta_i).map(|r| r.loss_db(pol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_and_lossless_impedance() {
        let z0 = impedance_from_index(1.0, 0.0, 300e9);
        assert!((z0.re - 376.730_313_67).abs() < 1e-6);
        assert_eq!(z0.im, 0.0);
        let z2 = impedance_from_index(2.0, 0.0, 300e9);
        assert!((z2.re - 188.365_156_83).abs() < 1e-6);
    }

    #[test]
    fn matched_media_do_not_reflect() {
        let z = Complex64::new(200.0, 3.0);
        assert_eq!(fresnel_te(z, z, 0.3, 0.3).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(fresnel_tm(z, z, 0.3, 0.3).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn perfect_conductor_reflects_everything() {
        let z1 = Complex64::new(free_space_impedance(), 0.0);
        let g = fresnel_te(z1, Complex64::new(0.0, 0.0), 0.4, 0.2).unwrap();
        assert!((g - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn normal_incidence_magnitudes_agree() {
        let z1 = Complex64::new(376.73, 0.0);
        let z2 = Complex64::new(183.0, 2.0);
        let te = fresnel_te(z1, z2, 0.0, 0.0).unwrap();
        let tm = fresnel_tm(z1, z2, 0.0, 0.0).unwrap();
        assert!((te.norm() - tm.norm()).abs() < 1e-15);
    }

    #[test]
    fn grazing_incidence_is_rejected() {
        let z = Complex64::new(1.0, 0.0);
        assert!(fresnel_te(z, z, FRAC_PI_2, 0.0).is_err());
        assert!(fresnel_tm(z, z, -0.1, 0.0).is_err());
    }

    #[test]
    fn snell_examples() {
        assert_eq!(refraction_angle(1.0, 2.0, 0.0).unwrap(), 0.0);
        assert!((refraction_angle(1.5, 1.5, 0.7).unwrap() - 0.7).abs() < 1e-15);
        let t = refraction_angle(1.0, 2.0, 60f64.to_radians()).unwrap();
        assert!((t.to_degrees() - 25.658_906_273_256_7).abs() < 1e-9);
        assert!(refraction_angle(2.0, 1.0, 60f64.to_radians()).is_err());
    }

    #[test]
    fn roughness_examples() {
        assert_eq!(roughness_factor(0.0, 0.3, 1e-3), 1.0);
        let (theta, lambda) = (0.4_f64, 1e-3);
        let sigma = lambda / (4.0 * PI * theta.cos());
        assert!((roughness_factor(sigma, theta, lambda) - (-0.5f64).exp()).abs() < 1e-15);
        assert!(roughness_factor(2e-4, theta, lambda) < roughness_factor(1e-4, theta, lambda));
    }

    #[test]
    fn friis_examples() {
        assert!((friis_path_loss(1.0, 1.0, 0.0, 0.0, false) - 21.984_197_280_441_926).abs() < 1e-12);
        let l1 = friis_path_loss(1.3, 1e-3, 0.0, 0.0, false);
        let l2 = friis_path_loss(2.6, 1e-3, 0.0, 0.0, false);
        assert!((l2 - l1 - 20.0 * 2f64.log10()).abs() < 1e-12);
        let pl = friis_path_loss(2.9, crate::wavelength(300e9), 0.0, 0.0, false);
        assert!((pl - 91.22).abs() < 0.1, "{pl}");
        assert_eq!(friis_path_loss(2.0, 1e-3, 20.0, 10.0, true), friis_path_loss(2.0, 1e-3, 0.0, 0.0, false) - 30.0);
    }

    #[test]
    fn average_polarization_is_the_power_mean() {
        let m = Material::constant("pb", 2.05, 250.0, 100.0, 1000.0);
        let r = reflect(&m, 300e9, 0.5).unwrap();
        let avg = r.power(Polarization::Avg);
        assert!((avg - 0.5 * (r.power(Polarization::Te) + r.power(Polarization::Tm))).abs() < 1e-15);
        assert!(r.loss_db(Polarization::Tm) > r.loss_db(Polarization::Te));
    }
}
