//! Floor heatmaps of per-position results.
//!
//! One value per free cell, laid out on the report's grid. Occupied cells
//! are masked; free cells without a value (outage, unreachable panel) get
//! their own color.

use std::fmt::Write as _;
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use terasim_core::drf::{select, GridShape, HbpRecord, RxReport, StrategyOption};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Loss of the branch chosen by a strategy.
    Pl,
    /// Best-panel gain over the geometric LOS.
    GainLos,
    /// Best-panel gain over the strongest reflection.
    GainNlos,
    LosGeometric,
}

impl FromStr for Metric {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pl" => Metric::Pl,
            "gain-los" => Metric::GainLos,
            "gain-nlos" => Metric::GainNlos,
            "los-geometric" => Metric::LosGeometric,
            _ => bail!("unknown metric '{s}' (expected pl, gain-los, gain-nlos or los-geometric)"),
        })
    }
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Pl => "pl",
            Metric::GainLos => "gain-los",
            Metric::GainNlos => "gain-nlos",
            Metric::LosGeometric => "los-geometric",
        }
    }

    fn value(&self, r: &HbpRecord, option: StrategyOption) -> Option<f64> {
        match self {
            Metric::Pl => select(r, option).pl,
            Metric::GainLos => r.best_ris.and_then(|j| r.snr_gain_los[j]),
            Metric::GainNlos => r.best_ris.and_then(|j| r.snr_gain_nlos[j]),
            Metric::LosGeometric => Some(r.pl_los_geometric),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapCell {
    pub hbp: usize,
    pub cell: usize,
    pub x: f64,
    pub y: f64,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapData {
    pub grid: GridShape,
    pub metric: Metric,
    pub cells: Vec<HeatmapCell>,
    /// `(min, max)` over defined values; `None` when no cell has a value.
    pub bounds: Option<(f64, f64)>,
    /// Row-major, true where no blocker position exists.
    pub occupied: Vec<bool>,
}

impl HeatmapData {
    pub fn from_records(grid: GridShape, rx: &RxReport, metric: Metric, option: StrategyOption) -> Result<Self> {
        let total = grid.nx * grid.ny;
        let mut occupied = vec![true; total];
        let mut cells = Vec::with_capacity(rx.records.len());
        for r in &rx.records {
            if r.cell >= total {
                return Err(anyhow!("record cell {} outside a {}x{} grid", r.cell, grid.nx, grid.ny));
            }
            occupied[r.cell] = false;
            cells.push(HeatmapCell {
                hbp: r.hbp,
                cell: r.cell,
                x: r.x,
                y: r.y,
                value: metric.value(r, option),
            });
        }
        let bounds = cells.iter().filter_map(|c| c.value).fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((f64::min(lo, v), f64::max(hi, v))),
        });
        Ok(Self { grid, metric, cells, bounds, occupied })
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["i", "cell", "ix", "iy", "x", "y", self.metric.name()])?;
        for c in &self.cells {
            w.write_record([
                c.hbp.to_string(),
                c.cell.to_string(),
                (c.cell % self.grid.nx).to_string(),
                (c.cell / self.grid.nx).to_string(),
                c.x.to_string(),
                c.y.to_string(),
                c.value.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(w.into_inner()?)
    }

    /// Fill color of a free cell.
    pub fn color(&self, value: Option<f64>) -> String {
        const NO_VALUE: &str = "#ffffff";
        let (Some(v), Some((lo, hi))) = (value, self.bounds) else {
            return NO_VALUE.into();
        };
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        viridis(t.clamp(0.0, 1.0))
    }

    /// Static SVG, +y pointing up. Occupied cells are drawn grey.
    pub fn to_svg(&self, title: &str) -> String {
        const PX: f64 = 100.0;
        const MASK: &str = "#7f7f7f";
        let g = self.grid;
        let w = g.nx as f64 * g.cell_dx * PX;
        let h = g.ny as f64 * g.cell_dy * PX;
        let bar = 60.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            w + bar + 80.0,
            h + 40.0,
            w + bar + 80.0,
            h + 40.0
        );
        let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
        let _ = writeln!(s, r#"<g transform="translate(0,30)">"#);
        let values: std::collections::HashMap<usize, Option<f64>> =
            self.cells.iter().map(|c| (c.cell, c.value)).collect();
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let idx = iy * g.nx + ix;
                let fill = if self.occupied[idx] {
                    MASK.to_string()
                } else {
                    self.color(values.get(&idx).copied().flatten())
                };
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{fill}"/>"#,
                    ix as f64 * g.cell_dx * PX,
                    h - (iy + 1) as f64 * g.cell_dy * PX,
                    g.cell_dx * PX,
                    g.cell_dy * PX,
                );
            }
        }
        if let Some((lo, hi)) = self.bounds {
            let steps = 32;
            for k in 0..steps {
                let t = k as f64 / (steps - 1) as f64;
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.1}" y="{:.1}" width="20" height="{:.1}" fill="{}"/>"#,
                    w + 20.0,
                    h - (k + 1) as f64 * h / steps as f64,
                    h / steps as f64 + 0.5,
                    self.color(Some(lo + t * (hi - lo)))
                );
            }
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="12">{hi:.2}</text>"#, w + 45.0, 10.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="12">{lo:.2}</text>"#, w + 45.0, h);
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, r#"<text x="4" y="18" font-size="14">{}</text>"#, escape(title));
        s.push_str("</svg>\n");
        s
    }
}

/// Viridis sampled at nine stops, interpolated linearly in RGB.
const VIRIDIS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

fn viridis(t: f64) -> String {
    let x = t * (VIRIDIS.len() - 1) as f64;
    let k = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let f = x - k as f64;
    let (a, b) = (VIRIDIS[k], VIRIDIS[k + 1]);
    let c = |i: usize| (a[i] as f64 + f * (b[i] as f64 - a[i] as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(0), c(1), c(2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
