//! Reconfigurable intelligent surfaces.
//!
//! A panel is an `N × M` lattice of unit cells (rows × columns) centered on
//! a wall point. Each cell reflects with a complex coefficient Γ that can be
//! programmed to co-phase all element contributions at a receiver. This
//! module holds the panel and link geometry, the cell and radiation-pattern
//! models, the five path-loss models and phase-profile synthesis.

mod pathloss;
mod phase;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use pathloss::{
    pl_broadcast, pl_far_beam, pl_general, pl_near_beam, pl_single_cell, RisLink,
};
pub use phase::{quantize_phase, synthesize_phase_profile, PhaseProfile};

use crate::error::{Error, Result};
use crate::scene::Vec3;

/// Element pitch, either absolute or in carrier wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pitch {
    Meters(f64),
    Wavelengths(f64),
}

impl Pitch {
    pub fn meters(&self, wavelength: f64) -> f64 {
        match *self {
            Pitch::Meters(v) => v,
            Pitch::Wavelengths(v) => v * wavelength,
        }
    }

    fn raw(&self) -> f64 {
        match *self {
            Pitch::Meters(v) | Pitch::Wavelengths(v) => v,
        }
    }
}

/// One wall-mounted RIS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisPanel {
    pub id: String,
    pub center: Vec3,
    /// Unit normal pointing into the room (the reflecting side).
    pub normal: Vec3,
    /// Reference for the in-plane row axis; `+z` when absent.
    pub up: Option<Vec3>,
    /// Columns.
    pub m: usize,
    /// Rows.
    pub n: usize,
    pub d_x: Pitch,
    pub d_y: Pitch,
    /// Cell reflection amplitude `A ∈ (0, 1]`.
    pub amplitude: f64,
    /// Phase-shifter resolution; 0 means continuous.
    pub phase_bits: u32,
}

/// Orthonormal panel frame: `u` along columns, `v` along rows, `n` normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelFrame {
    pub u: Vec3,
    pub v: Vec3,
    pub n: Vec3,
}

impl RisPanel {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("ris '{}': {m}", self.id)));
        if self.m == 0 || self.n == 0 {
            return bad("M and N must be >= 1".into());
        }
        for (p, name) in [(self.d_x, "d_x"), (self.d_y, "d_y")] {
            if !(p.raw().is_finite() && p.raw() > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return bad("amplitude must be in (0, 1]".into());
        }
        if !self.center.is_finite() {
            return bad("center must be finite".into());
        }
        if self.phase_bits > 16 {
            return bad("phase_bits must be <= 16".into());
        }
        self.frame().map(|_| ())
    }

    pub fn frame(&self) -> Result<PanelFrame> {
        let n = self.normal.normalized().ok_or_else(|| {
            Error::DegenerateGeometry(format!("ris '{}' has a zero normal", self.id))
        })?;
        let project = |up: Vec3| (up - n * up.dot(n)).normalized();
        let v = match self.up {
            Some(up) => project(up).ok_or_else(|| {
                Error::DegenerateGeometry(format!("ris '{}': up vector is parallel to the normal", self.id))
            })?,
            None => project(Vec3::Z)
                .or_else(|| project(Vec3::Y))
                .ok_or_else(|| Error::DegenerateGeometry("panel frame".into()))?,
        };
        Ok(PanelFrame { u: v.cross(n), v, n })
    }

    /// Element pitch `(d_x, d_y)` in meters at `wavelength`.
    pub fn pitch(&self, wavelength: f64) -> (f64, f64) {
        (self.d_x.meters(wavelength), self.d_y.meters(wavelength))
    }

    /// Far-field boundary `L = 2 M N d_x d_y / λ`.
    pub fn fraunhofer_distance(&self, wavelength: f64) -> f64 {
        let (dx, dy) = self.pitch(wavelength);
        2.0 * self.m as f64 * self.n as f64 * dx * dy / wavelength
    }

    /// Centers of all elements in row-major order (row `n`, column `m`).
    pub fn element_centers(&self, wavelength: f64) -> Result<Vec<Vec3>> {
        let f = self.frame()?;
        let (dx, dy) = self.pitch(wavelength);
        let (cm, cn) = ((self.m as f64 - 1.0) / 2.0, (self.n as f64 - 1.0) / 2.0);
        let mut out = Vec::with_capacity(self.m * self.n);
        for row in 0..self.n {
            let ov = f.v * ((row as f64 - cn) * dy);
            for col in 0..self.m {
                out.push(self.center + f.u * ((col as f64 - cm) * dx) + ov);
            }
        }
        Ok(out)
    }

    /// Copy with a different lattice size.
    pub fn with_size(&self, m: usize, n: usize) -> RisPanel {
        RisPanel { m, n, ..self.clone() }
    }
}

/// Per-element link geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub r_t: f64,
    pub r_r: f64,
    pub d_nm: f64,
    /// Cosine of the angle at the TX between the panel center and the element.
    pub cos_tx: f64,
    /// Cosine of the angle between the element normal and the TX direction.
    pub cos_t: f64,
    /// Cosine of the angle between the element normal and the RX direction.
    pub cos_r: f64,
    /// Cosine of the angle at the RX between the panel center and the element.
    pub cos_rx: f64,
}

/// TX → panel → RX geometry, with per-element quantities in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry {
    pub m: usize,
    pub n: usize,
    pub d_x: f64,
    pub d_y: f64,
    pub wavelength: f64,
    pub d1: f64,
    pub d2: f64,
    /// Signed heights of TX and RX above the panel plane.
    pub z_t: f64,
    pub z_r: f64,
    /// Elevation angles of TX and RX from the panel normal.
    pub theta_t: f64,
    pub theta_r: f64,
    pub elements: Vec<ElementGeometry>,
}

impl LinkGeometry {
    pub fn new(panel: &RisPanel, tx: Vec3, rx: Vec3, wavelength: f64) -> Result<Self> {
        let frame = panel.frame()?;
        let (dx, dy) = panel.pitch(wavelength);
        let c = panel.center;
        let (d1, d2) = (tx.distance(c), rx.distance(c));
        if d1 <= 0.0 || d2 <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "ris '{}': TX or RX coincides with the panel center",
                panel.id
            )));
        }
        let z_t = (tx - c).dot(frame.n);
        let z_r = (rx - c).dot(frame.n);
        let elements = panel
            .element_centers(wavelength)?
            .into_iter()
            .map(|p| {
                let r_t = tx.distance(p);
                let r_r = rx.distance(p);
                let d_nm = p.distance(c);
                let law = |d: f64, r: f64| ((d * d + r * r - d_nm * d_nm) / (2.0 * d * r)).clamp(-1.0, 1.0);
                ElementGeometry {
                    r_t,
                    r_r,
                    d_nm,
                    cos_tx: law(d1, r_t),
                    cos_t: z_t / r_t,
                    cos_r: z_r / r_r,
                    cos_rx: law(d2, r_r),
                }
            })
            .collect::<Vec<_>>();
        if elements.iter().any(|e| e.r_t <= 0.0 || e.r_r <= 0.0) {
            return Err(Error::DegenerateGeometry(format!(
                "ris '{}': TX or RX lies on an element",
                panel.id
            )));
        }
        Ok(Self {
            m: panel.m,
            n: panel.n,
            d_x: dx,
            d_y: dy,
            wavelength,
            d1,
            d2,
            z_t,
            z_r,
            theta_t: (z_t / d1).clamp(-1.0, 1.0).acos(),
            theta_r: (z_r / d2).clamp(-1.0, 1.0).acos(),
            elements,
        })
    }

    /// Both TX and RX are strictly in front of the panel.
    pub fn front_side(&self) -> bool {
        self.z_t > 0.0 && self.z_r > 0.0
    }

    pub fn element(&self, row: usize, col: usize) -> &ElementGeometry {
        &self.elements[row * self.m + col]
    }
}

/// Unit-cell reflection coefficient `Γ = (Z_L − Z_0)/(Z_L + Z_0)`.
pub fn cell_reflection(z_load: Complex64, z0: f64) -> Result<Complex64> {
    let den = z_load + z0;
    if den.norm() == 0.0 {
        return Err(Error::DegenerateGeometry("Z_L = -Z_0".into()));
    }
    Ok((z_load - z0) / den)
}

/// Reflection phase of Γ wrapped to `[0, 2π)`.
pub fn cell_phase(gamma: Complex64) -> Result<f64> {
    if gamma.norm() == 0.0 {
        return Err(Error::InvalidArgument("phase of a zero reflection coefficient is undefined".into()));
    }
    Ok(wrap_phase(gamma.im.atan2(gamma.re)))
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let w = phi.rem_euclid(tau);
    if w >= tau {
        0.0
    } else {
        w
    }
}

/// Normalized power radiation pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pattern {
    /// Antenna of the given gain in dB: `cos^(G/2 − 1)`. Gains under 3 dB
    /// would give a negative exponent and are treated as isotropic.
    Gain(f64),
    /// `cos^α`.
    Exponent(f64),
    /// Unit cell: `cos θ`.
    UnitCell,
}

impl Pattern {
    pub fn exponent(&self) -> f64 {
        match *self {
            Pattern::Gain(db) => (crate::from_db(db) / 2.0 - 1.0).max(0.0),
            Pattern::Exponent(a) => a,
            Pattern::UnitCell => 1.0,
        }
    }

    /// Pattern value for a direction whose angle from boresight has cosine `c`.
    pub fn eval_cos(&self, c: f64) -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        let e = self.exponent();
        if e == 0.0 {
            1.0
        } else {
            c.min(1.0).powf(e)
        }
    }
}

/// NPRP at angle `theta` from boresight.
pub fn nprp(theta: f64, pattern: Pattern) -> f64 {
    if theta.abs() >= std::f64::consts::FRAC_PI_2 {
        return 0.0;
    }
    pattern.eval_cos(theta.cos())
}

/// Joint pattern of TX, element (incident and reflected) and RX for every
/// element, row-major.
pub fn combined_pattern(geom: &LinkGeometry, gt_db: f64, gr_db: f64) -> Vec<f64> {
    let (pt, pr) = (Pattern::Gain(gt_db), Pattern::Gain(gr_db));
    geom.elements
        .iter()
        .map(|e| element_pattern(e, pt, pr))
        .collect()
}

pub(crate) fn element_pattern(e: &ElementGeometry, pt: Pattern, pr: Pattern) -> f64 {
    pt.eval_cos(e.cos_tx)
        * Pattern::UnitCell.eval_cos(e.cos_t)
        * Pattern::UnitCell.eval_cos(e.cos_r)
        * pr.eval_cos(e.cos_rx)
}

/// Near/far-field classification of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldRegion {
    Near,
    Far,
}

/// How the two hop distances are compared with the Fraunhofer distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldRule {
    /// Far when either hop exceeds `L`.
    #[default]
    Either,
    /// Far only when both hops exceed `L`.
    Both,
}

pub fn classify_field_region(panel: &RisPanel, d1: f64, d2: f64, wavelength: f64) -> FieldRegion {
    classify_field_region_with(panel, d1, d2, wavelength, FieldRule::Either)
}

pub fn classify_field_region_with(
    panel: &RisPanel,
    d1: f64,
    d2: f64,
    wavelength: f64,
    rule: FieldRule,
) -> FieldRegion {
    let l = panel.fraunhofer_distance(wavelength);
    let far = match rule {
        FieldRule::Either => d1 > l || d2 > l,
        FieldRule::Both => d1 > l && d2 > l,
    };
    if far {
        FieldRegion::Far
    } else {
        FieldRegion::Near
    }
}
