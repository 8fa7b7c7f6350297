//! RIS path-loss models. All functions return dB including the antenna
//! gains `G_t`, `G_r`; add `G_t + G_r` (dB) back for the gain-free value.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{element_pattern, FieldRegion, LinkGeometry, Pattern, RisPanel};
use crate::error::{Error, Result};
use crate::from_db;
use crate::numeric::{CompensatedComplexSum, CompensatedSum};

const SIXTEEN_PI_SQ: f64 = 16.0 * PI * PI;

fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `16π² / (G_t G_r (d_x d_y)² P)` in dB, where `P` is the squared
/// magnitude of the element sum.
fn from_sum_power(gt_db: f64, gr_db: f64, d_x: f64, d_y: f64, power: f64) -> f64 {
    if !(power > 0.0) {
        return f64::INFINITY;
    }
    let area = d_x * d_y;
    to_db(SIXTEEN_PI_SQ / (from_db(gt_db) * from_db(gr_db) * area * area * power))
}

/// Squared magnitude of a single-element term `sqrt(F)|Γ|/(r_t r_r)`.
fn single_term_power(f: f64, gamma_sq: f64, r_t: f64, r_r: f64) -> f64 {
    let rr = r_t * r_r;
    f * gamma_sq / (rr * rr)
}

/// General model with arbitrary per-element reflection coefficients
/// (row-major, one per element). A perfectly destructive sum gives
/// `+∞`.
pub fn pl_general(
    geom: &LinkGeometry,
    gamma: &[Complex64],
    gt_db: f64,
    gr_db: f64,
) -> Result<f64> {
    if gamma.len() != geom.elements.len() {
        return Err(Error::InvalidArgument(format!(
            "{} reflection coefficients for {} elements",
            gamma.len(),
            geom.elements.len()
        )));
    }
    let (pt, pr) = (Pattern::Gain(gt_db), Pattern::Gain(gr_db));
    let power = if geom.elements.len() == 1 {
        let e = &geom.elements[0];
        single_term_power(element_pattern(e, pt, pr), gamma[0].norm_sqr(), e.r_t, e.r_r)
    } else {
        let k = 2.0 * PI / geom.wavelength;
        let mut sum = CompensatedComplexSum::new();
        for (e, g) in geom.elements.iter().zip(gamma) {
            let f = element_pattern(e, pt, pr);
            if f == 0.0 {
                continue;
            }
            let prop = Complex64::from_polar(1.0, -k * (e.r_t + e.r_r));
            sum.add(*g * prop * (f.sqrt() / (e.r_t * e.r_r)));
        }
        sum.value().norm_sqr()
    };
    Ok(from_sum_power(gt_db, gr_db, geom.d_x, geom.d_y, power))
}

/// Far-field beamforming model.
#[allow(clippy::too_many_arguments)]
pub fn pl_far_beam(
    panel: &RisPanel,
    d1: f64,
    d2: f64,
    theta_t: f64,
    theta_r: f64,
    wavelength: f64,
    gt_db: f64,
    gr_db: f64,
    amplitude: f64,
) -> f64 {
    let (dx, dy) = panel.pitch(wavelength);
    let (ct, cr) = (theta_t.cos(), theta_r.cos());
    if ct <= 0.0 || cr <= 0.0 {
        return f64::INFINITY;
    }
    let aperture = panel.m as f64 * panel.n as f64 * dx * dy;
    let dd = d1 * d2;
    to_db(
        SIXTEEN_PI_SQ * dd * dd
            / (from_db(gt_db) * from_db(gr_db) * aperture * aperture * ct * cr * amplitude * amplitude),
    )
}

/// Near-field beamforming model (all elements co-phased).
pub fn pl_near_beam(geom: &LinkGeometry, gt_db: f64, gr_db: f64, amplitude: f64) -> f64 {
    let (pt, pr) = (Pattern::Gain(gt_db), Pattern::Gain(gr_db));
    let power = if geom.elements.len() == 1 {
        let e = &geom.elements[0];
        single_term_power(element_pattern(e, pt, pr), amplitude * amplitude, e.r_t, e.r_r)
    } else {
        let s: CompensatedSum = geom
            .elements
            .iter()
            .map(|e| element_pattern(e, pt, pr).sqrt() / (e.r_t * e.r_r))
            .collect();
        let a = amplitude * s.value();
        a * a
    };
    from_sum_power(gt_db, gr_db, geom.d_x, geom.d_y, power)
}

/// Near-field broadcasting (mirror-like) model.
pub fn pl_broadcast(d1: f64, d2: f64, wavelength: f64, gt_db: f64, gr_db: f64, amplitude: f64) -> f64 {
    let d = d1 + d2;
    to_db(SIXTEEN_PI_SQ * d * d / (from_db(gt_db) * from_db(gr_db) * wavelength * wavelength * amplitude * amplitude))
}

/// Loss through the single element at (`row`, `col`).
pub fn pl_single_cell(
    geom: &LinkGeometry,
    row: usize,
    col: usize,
    gamma: Complex64,
    gt_db: f64,
    gr_db: f64,
) -> f64 {
    let e = geom.element(row, col);
    let f = element_pattern(e, Pattern::Gain(gt_db), Pattern::Gain(gr_db));
    from_sum_power(gt_db, gr_db, geom.d_x, geom.d_y, single_term_power(f, gamma.norm_sqr(), e.r_t, e.r_r))
}

/// Evaluated TX → RIS → RX link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisLink {
    pub region: FieldRegion,
    pub d1: f64,
    pub d2: f64,
    pub theta_t: f64,
    pub theta_r: f64,
    pub fraunhofer_distance: f64,
    /// Path loss including antenna gains, without atmospheric loss (dB).
    pub pl_budget: f64,
}

#[cfg(test)]
mod tests {
    use super::super::tests::panel;
    use super::super::{synthesize_phase_profile, LinkGeometry};
    use super::*;
    use crate::scene::Vec3;

    #[test]
    fn single_cell_matches_general_exactly() {
        let p = panel(1, 1);
        let g = LinkGeometry::new(&p, Vec3::new(0.3, 0.1, 1.5), Vec3::new(-0.4, 0.2, 2.0), 1e-3).unwrap();
        let gamma = Complex64::from_polar(0.8, 1.1);
        let a = pl_general(&g, &[gamma], 20.0, 10.0).unwrap();
        let b = pl_single_cell(&g, 0, 0, gamma, 20.0, 10.0);
        assert_eq!(a, b);
        let c = pl_near_beam(&g, 20.0, 10.0, 0.8);
        assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn single_cell_unit_case() {
        let p = RisPanel { normal: Vec3::Z, ..panel(1, 1) };
        let g = LinkGeometry::new(&p, Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 2.0), 1e-3).unwrap();
        // On-axis with isotropic antennas: F = 1.
        let pl = pl_single_cell(&g, 0, 0, Complex64::new(1.0, 0.0), 0.0, 0.0);
        let area = g.d_x * g.d_y;
        let expected = 10.0 * (SIXTEEN_PI_SQ * 4.0 / (area * area)).log10();
        assert!((pl - expected).abs() < 1e-10);
        let half = pl_single_cell(&g, 0, 0, Complex64::new(0.5, 0.0), 0.0, 0.0);
        assert!((half - pl - 20.0 * 2f64.log10()).abs() < 1e-10);
    }

    #[test]
    fn co_phased_general_equals_near_beam() {
        let lambda = crate::wavelength(300e9);
        let p = panel(40, 30);
        let g = LinkGeometry::new(&p, Vec3::new(1.0, 0.5, 2.0), Vec3::new(-0.7, 0.3, 1.4), lambda).unwrap();
        let prof = synthesize_phase_profile(&p, Vec3::new(1.0, 0.5, 2.0), Vec3::new(-0.7, 0.3, 1.4), lambda, 0).unwrap();
        let gamma = prof.reflection(0.9);
        let a = pl_general(&g, &gamma, 20.0, 10.0).unwrap();
        let b = pl_near_beam(&g, 20.0, 10.0, 0.9);
        let rel = (crate::from_db(a) - crate::from_db(b)).abs() / crate::from_db(b);
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn far_beam_properties() {
        let lambda = 1e-3;
        let a = pl_far_beam(&panel(100, 100), 3.0, 4.0, 0.2, 0.3, lambda, 20.0, 10.0, 1.0);
        let b = pl_far_beam(&panel(200, 100), 3.0, 4.0, 0.2, 0.3, lambda, 20.0, 10.0, 1.0);
        assert!((a - b - 20.0 * 2f64.log10()).abs() < 1e-10);
        let s = pl_far_beam(&panel(100, 100), 4.0, 3.0, 0.2, 0.3, lambda, 20.0, 10.0, 1.0);
        assert!((a - s).abs() < 1e-12);
        let boresight = pl_far_beam(&panel(100, 100), 3.0, 4.0, 0.0, 0.0, lambda, 20.0, 10.0, 1.0);
        assert!(boresight < a);
        // Fixed d1 + d2: maximum at d1 = d2.
        let mid = pl_far_beam(&panel(100, 100), 3.5, 3.5, 0.2, 0.3, lambda, 20.0, 10.0, 1.0);
        assert!(mid > a);
    }

    #[test]
    fn broadcast_is_friis_over_unfolded_path() {
        let lambda = 1e-3;
        let b = pl_broadcast(1.2, 2.3, lambda, 0.0, 0.0, 1.0);
        let f = crate::propagation::friis_path_loss(3.5, lambda, 0.0, 0.0, false);
        assert!((b - f).abs() < 1e-12);
    }

    #[test]
    fn near_beam_decreases_with_aperture() {
        let lambda = 1e-3;
        let tx = Vec3::new(0.5, 0.2, 2.0);
        let rx = Vec3::new(-0.3, 0.1, 1.0);
        let mut last = f64::INFINITY;
        for m in [1, 2, 5, 10, 20] {
            let p = panel(m, m);
            let g = LinkGeometry::new(&p, tx, rx, lambda).unwrap();
            let pl = pl_near_beam(&g, 20.0, 10.0, 1.0);
            assert!(pl < last);
            last = pl;
        }
    }

    #[test]
    fn destructive_sum_is_infinite() {
        let p = panel(2, 1);
        let g = LinkGeometry::new(&p, Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 1.0), 1e-3).unwrap();
        // Symmetric elements: equal magnitudes and phases, opposite Γ.
        let pl = pl_general(&g, &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)], 0.0, 0.0).unwrap();
        assert!(pl.is_infinite());
    }
}
