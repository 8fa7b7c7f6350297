//! Phase-profile synthesis and quantization.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{wrap_phase, RisPanel};
use crate::error::Result;
use crate::scene::Vec3;

/// Per-element reflection phases, row-major, radians in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseProfile {
    pub rows: usize,
    pub cols: usize,
    pub phases: Vec<f64>,
    pub quantized: bool,
    pub bits: u32,
}

impl PhaseProfile {
    pub fn phase(&self, row: usize, col: usize) -> f64 {
        self.phases[row * self.cols + col]
    }

    /// Reflection coefficients `A·e^{jφ}`.
    pub fn reflection(&self, amplitude: f64) -> Vec<Complex64> {
        self.phases
            .iter()
            .map(|&p| Complex64::from_polar(amplitude, p))
            .collect()
    }

    /// CSV with columns `n,m,phi_deg` (row, column, phase in degrees).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m,phi_deg\n");
        for row in 0..self.rows {
            for col in 0..self.cols {
                out.push_str(&format!("{row},{col},{}\n", self.phase(row, col).to_degrees()));
            }
        }
        out
    }

    /// Number of distinct phase values.
    pub fn distinct_levels(&self) -> usize {
        let mut v: Vec<u64> = self.phases.iter().map(|p| p.to_bits()).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    }
}

/// Rounds `phi` (in `[0, 2π)`) to the nearest of `2^bits` uniform levels;
/// exact ties go to the lower level. `bits = 0` leaves `phi` unchanged.
pub fn quantize_phase(phi: f64, bits: u32) -> f64 {
    if bits == 0 {
        return phi;
    }
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let x = phi / step;
    let lower = x.floor();
    let k = if x - lower > 0.5 { lower + 1.0 } else { lower };
    (k as u64 % levels) as f64 * step
}

/// Co-phasing profile `φ = mod(2π(r_t + r_r)/λ, 2π)` for a TX/RX pair,
/// optionally quantized.
pub fn synthesize_phase_profile(
    panel: &RisPanel,
    tx: Vec3,
    rx: Vec3,
    wavelength: f64,
    bits: u32,
) -> Result<PhaseProfile> {
    let k = TAU / wavelength;
    let phases = panel
        .element_centers(wavelength)?
        .into_iter()
        .map(|p| quantize_phase(wrap_phase(k * (tx.distance(p) + rx.distance(p))), bits))
        .collect();
    Ok(PhaseProfile {
        rows: panel.n,
        cols: panel.m,
        phases,
        quantized: bits > 0,
        bits,
    })
}
