//! Blockage sweep and RIS selection.
//!
//! For every free grid cell the blocker is placed, the direct, reflected and
//! RIS-relayed paths to one receiver are traced, and the per-RIS SNR gains
//! and best panel are recorded. Strategies then pick one branch per cell and
//! the statistics compare each strategy with the no-RIS baseline.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{mean_std, CompensatedSum};
use crate::raytrace::{TraceOptions, Tracer};
use crate::ris::FieldRegion;
use crate::scene::{BlockageGrid, HumanBlocker, Scene, SceneView};

/// Whether reported losses include the antenna gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Gain-free.
    #[default]
    Raw,
    /// Gain-inclusive.
    Budget,
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "budget" => Ok(Self::Budget),
            _ => Err(Error::InvalidArgument(format!("unknown convention '{s}' (expected raw or budget)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DrfOptions {
    pub trace: TraceOptions,
    pub convention: Convention,
}

/// Per-panel outcome at one blocker position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisEntry {
    pub reachable: bool,
    pub region: Option<FieldRegion>,
    pub pl_ris: Option<f64>,
}

/// Result for one blocker position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbpRecord {
    /// Blockage-position number (ordinal among free cells).
    pub hbp: usize,
    /// Grid cell index.
    pub cell: usize,
    pub x: f64,
    pub y: f64,
    pub los_present: bool,
    /// LOS loss from geometry, recorded even when blocked.
    pub pl_los_geometric: f64,
    /// LOS loss when present (includes any penetration loss).
    pub pl_los: Option<f64>,
    /// Surviving reflected-path losses, ascending.
    pub nlos_paths: Vec<f64>,
    pub ris: Vec<RisEntry>,
    pub snr_gain_los: Vec<Option<f64>>,
    pub snr_gain_nlos: Vec<Option<f64>>,
    /// Index of the reachable panel with the lowest loss.
    pub best_ris: Option<usize>,
}

impl HbpRecord {
    pub fn min_nlos(&self) -> Option<f64> {
        self.nlos_paths.first().copied()
    }

    pub fn best_ris_pl(&self) -> Option<f64> {
        self.best_ris.and_then(|j| self.ris[j].pl_ris)
    }
}

/// Index of the smallest value, lowest index on ties.
fn argmin(values: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((j, v));
            }
        }
    }
    best.map(|(j, _)| j)
}

fn build_record(
    hbp: usize,
    cell: usize,
    center: (f64, f64),
    result: &crate::raytrace::TraceResult,
    offset: f64,
) -> HbpRecord {
    let conv = |raw: f64| raw - offset;
    let pl_los_geometric = conv(result.los_geometric_raw);
    let pl_los = result.los.as_ref().map(|p| conv(p.total_pl_raw));
    let nlos_paths: Vec<f64> = result.reflections.iter().map(|p| conv(p.total_pl_raw)).collect();
    let ris: Vec<RisEntry> = result
        .ris
        .iter()
        .map(|p| match p {
            Some(p) => RisEntry {
                reachable: true,
                region: p.ris_link.map(|l| l.region),
                pl_ris: Some(conv(p.total_pl_raw)),
            },
            None => RisEntry {
                reachable: false,
                region: None,
                pl_ris: None,
            },
        })
        .collect();
    let min_nlos = nlos_paths.first().copied();
    let snr_gain_los = ris.iter().map(|e| e.pl_ris.map(|r| pl_los_geometric - r)).collect();
    let snr_gain_nlos = ris
        .iter()
        .map(|e| e.pl_ris.zip(min_nlos).map(|(r, n)| n - r))
        .collect();
    let pls: Vec<Option<f64>> = ris.iter().map(|e| e.pl_ris).collect();
    HbpRecord {
        hbp,
        cell,
        x: center.0,
        y: center.1,
        los_present: pl_los.is_some(),
        pl_los_geometric,
        pl_los,
        nlos_paths,
        ris,
        snr_gain_los,
        snr_gain_nlos,
        best_ris: argmin(&pls),
    }
}

/// Sweeps the blocker over every free cell of `grid` for receiver `rx_id`.
/// Records are ordered by blockage-position number. Runs on the current
/// rayon pool; the output does not depend on the number of workers.
pub fn run_drf(scene: &Scene, rx_id: &str, grid: &BlockageGrid, options: &DrfOptions) -> Result<Vec<HbpRecord>> {
    let tx = scene.tx()?;
    let rx = scene.rx(rx_id)?;
    let tracer = Tracer::new(scene, options.trace)?;
    let candidates = tracer.candidates(tx, rx)?;
    let offset = match options.convention {
        Convention::Raw => 0.0,
        Convention::Budget => tx.antenna_gain_db + rx.antenna_gain_db,
    };
    let t = scene.blocker;
    Ok(grid
        .free
        .par_iter()
        .enumerate()
        .map(|(hbp, &index)| {
            let cell = &grid.cells[index];
            let view = SceneView {
                scene,
                blocker: Some(HumanBlocker {
                    footprint_center: cell.center,
                    width: t.width,
                    depth: t.depth,
                    height: t.height,
                }),
                hbp: Some(hbp),
            };
            let result = candidates.resolve(&view);
            build_record(hbp, index, (cell.center.x, cell.center.y), &result, offset)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyOption {
    Baseline,
    Opt1,
    Opt2,
    Opt3,
}

impl StrategyOption {
    pub const ALL: [StrategyOption; 4] = [Self::Baseline, Self::Opt1, Self::Opt2, Self::Opt3];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Baseline => "Without RISs",
            Self::Opt1 => "Option-1",
            Self::Opt2 => "Option-2",
            Self::Opt3 => "Option-3",
        }
    }
}

impl FromStr for StrategyOption {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" | "0" => Ok(Self::Baseline),
            "1" | "opt1" => Ok(Self::Opt1),
            "2" | "opt2" => Ok(Self::Opt2),
            "3" | "opt3" => Ok(Self::Opt3),
            _ => Err(Error::InvalidArgument(format!("unknown option '{s}'"))),
        }
    }
}

/// Link chosen at one blocker position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "ris", rename_all = "lowercase")]
pub enum Branch {
    Los,
    Ris(usize),
    Nlos,
    Outage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub branch: Branch,
    pub pl: Option<f64>,
}

fn baseline(r: &HbpRecord) -> Selection {
    if let Some(pl) = r.pl_los {
        Selection { branch: Branch::Los, pl: Some(pl) }
    } else if let Some(pl) = r.min_nlos() {
        Selection { branch: Branch::Nlos, pl: Some(pl) }
    } else {
        Selection { branch: Branch::Outage, pl: None }
    }
}

fn best_ris(r: &HbpRecord) -> Option<Selection> {
    r.best_ris.map(|j| Selection {
        branch: Branch::Ris(j),
        pl: r.ris[j].pl_ris,
    })
}

/// Branch selected at one position under `option`.
pub fn select(r: &HbpRecord, option: StrategyOption) -> Selection {
    let los = r.pl_los.map(|pl| Selection { branch: Branch::Los, pl: Some(pl) });
    let nlos = r.min_nlos().map(|pl| Selection { branch: Branch::Nlos, pl: Some(pl) });
    let outage = Selection { branch: Branch::Outage, pl: None };
    match option {
        StrategyOption::Baseline => baseline(r),
        StrategyOption::Opt1 => best_ris(r).unwrap_or_else(|| baseline(r)),
        StrategyOption::Opt2 => los.or_else(|| best_ris(r)).or(nlos).unwrap_or(outage),
        StrategyOption::Opt3 => best_ris(r).or(los).or(nlos).unwrap_or(outage),
    }
}

pub fn apply_strategy(records: &[HbpRecord], option: StrategyOption) -> Vec<Selection> {
    records.iter().map(|r| select(r, option)).collect()
}

/// Statistics of one branch under a strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStats {
    pub branch: Branch,
    pub count: usize,
    /// Share of non-outage positions.
    pub occurrence: f64,
    pub mean_pl: f64,
    /// Population standard deviation.
    pub std_pl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyStats {
    pub option: StrategyOption,
    pub branches: Vec<BranchStats>,
    pub mean_pl: Option<f64>,
    pub std_pl: Option<f64>,
    pub outages: usize,
    /// Mean baseline loss minus mean option loss, over positions where
    /// both have a branch.
    pub delta_snr_all: Option<f64>,
    /// Same difference restricted to positions where the baseline uses a
    /// reflected path.
    pub delta_snr_nlos: Option<f64>,
    pub former_nlos: usize,
    pub improved: usize,
    pub improved_fraction: Option<f64>,
}

fn mean(values: &[f64]) -> Option<f64> {
    mean_std(values).map(|(m, _)| m)
}

/// Per-branch statistics and SNR improvements of `option` over the baseline.
pub fn summarize(records: &[HbpRecord], option: StrategyOption) -> StrategyStats {
    let base = apply_strategy(records, StrategyOption::Baseline);
    let sel = apply_strategy(records, option);
    let served: Vec<&Selection> = sel.iter().filter(|s| s.pl.is_some()).collect();
    let outages = sel.len() - served.len();

    let mut keys: Vec<Branch> = served.iter().map(|s| s.branch).collect();
    keys.sort();
    keys.dedup();
    let branches = keys
        .into_iter()
        .map(|b| {
            let pls: Vec<f64> = served.iter().filter(|s| s.branch == b).filter_map(|s| s.pl).collect();
            let (m, sd) = mean_std(&pls).unwrap_or((f64::NAN, 0.0));
            BranchStats {
                branch: b,
                count: pls.len(),
                occurrence: pls.len() as f64 / served.len() as f64,
                mean_pl: m,
                std_pl: sd,
            }
        })
        .collect();
    let all: Vec<f64> = served.iter().filter_map(|s| s.pl).collect();
    let (mean_pl, std_pl) = match mean_std(&all) {
        Some((m, s)) => (Some(m), Some(s)),
        None => (None, None),
    };

    let mut base_both = Vec::new();
    let mut opt_both = Vec::new();
    let mut diffs_nlos = Vec::new();
    let (mut former_nlos, mut improved) = (0usize, 0usize);
    for (b, s) in base.iter().zip(&sel) {
        if let (Some(pb), Some(ps)) = (b.pl, s.pl) {
            base_both.push(pb);
            opt_both.push(ps);
        }
        if b.branch == Branch::Nlos {
            former_nlos += 1;
            if let (Some(pb), Some(ps)) = (b.pl, s.pl) {
                diffs_nlos.push(pb - ps);
                if ps < pb {
                    improved += 1;
                }
            }
        }
    }
    let delta_snr_all = mean(&base_both).zip(mean(&opt_both)).map(|(a, b)| a - b);
    StrategyStats {
        option,
        branches,
        mean_pl,
        std_pl,
        outages,
        delta_snr_all,
        delta_snr_nlos: mean(&diffs_nlos),
        former_nlos,
        improved,
        improved_fraction: (former_nlos > 0).then(|| improved as f64 / former_nlos as f64),
    }
}

/// Option with the largest overall improvement; ties go to the larger NLOS
/// improvement, then to the lower option number.
pub fn recommend(stats: &[StrategyStats]) -> Option<StrategyOption> {
    let key = |s: &StrategyStats| {
        (
            s.delta_snr_all.unwrap_or(f64::NEG_INFINITY),
            s.delta_snr_nlos.unwrap_or(f64::NEG_INFINITY),
        )
    };
    let mut best: Option<&StrategyStats> = None;
    for s in stats.iter().filter(|s| s.option != StrategyOption::Baseline) {
        match best {
            Some(b) if key(s) <= key(b) => {}
            _ => best = Some(s),
        }
    }
    best.map(|s| s.option)
}

/// Everything computed for one receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RxReport {
    pub rx_id: String,
    pub ris_ids: Vec<String>,
    pub records: Vec<HbpRecord>,
    pub strategies: Vec<StrategyStats>,
    pub recommended: Option<StrategyOption>,
}

/// Floor tiling used by a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    pub nx: usize,
    pub ny: usize,
    pub cell_dx: f64,
    pub cell_dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrfReport {
    pub scene_digest: String,
    pub options: DrfOptions,
    pub grid: GridShape,
    pub grid_free_cells: usize,
    pub receivers: Vec<RxReport>,
}

pub fn rx_report(scene: &Scene, rx_id: &str, grid: &BlockageGrid, options: &DrfOptions) -> Result<RxReport> {
    let records = run_drf(scene, rx_id, grid, options)?;
    let strategies: Vec<StrategyStats> = StrategyOption::ALL.iter().map(|&o| summarize(&records, o)).collect();
    Ok(RxReport {
        rx_id: rx_id.to_string(),
        ris_ids: scene.ris.iter().map(|p| p.id.clone()).collect(),
        recommended: recommend(&strategies),
        records,
        strategies,
    })
}

/// Runs the sweep for each receiver in `rx_ids`.
pub fn run_report(scene: &Scene, rx_ids: &[String], grid: &BlockageGrid, options: &DrfOptions) -> Result<DrfReport> {
    let receivers = rx_ids
        .iter()
        .map(|id| rx_report(scene, id, grid, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(DrfReport {
        scene_digest: crate::scenariofmt::scene_digest(scene)?,
        options: *options,
        grid: GridShape {
            nx: grid.nx,
            ny: grid.ny,
            cell_dx: grid.cell_dx,
            cell_dy: grid.cell_dy,
        },
        grid_free_cells: grid.free_count(),
        receivers,
    })
}

fn branch_cell(b: &BranchStats, ris_ids: &[String]) -> String {
    let occ = 100.0 * b.occurrence;
    let stats = format!("({:.2}, {:.2})", b.mean_pl, b.std_pl);
    match b.branch {
        Branch::Los => format!("Occ.LOS {occ:.2}% {stats}"),
        Branch::Nlos => format!("Occ.NLOS-min {occ:.2}% {stats}"),
        Branch::Ris(j) => {
            let id = ris_ids.get(j).map(String::as_str).unwrap_or("?");
            format!("({id}, {occ:.2}%) {stats}")
        }
        Branch::Outage => format!("outage {occ:.2}%"),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("N.A.".into(), |x| format!("{x:.2}"))
}

fn strategy_title(o: StrategyOption) -> String {
    match o {
        StrategyOption::Baseline => o.label().to_string(),
        _ => format!("With RISs {}", o.label()),
    }
}

/// Plain-text summary using the statistics-table column names. Means and
/// standard deviations are in dB.
pub fn format_summary(rx: &RxReport, options: &[StrategyOption]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Application Scenarios: {} (N_bloc = {})", rx.rx_id, rx.records.len());
    for s in rx.strategies.iter().filter(|s| options.contains(&s.option)) {
        let _ = writeln!(out, "  {}", strategy_title(s.option));
        for b in &s.branches {
            let _ = writeln!(out, "    {}", branch_cell(b, &rx.ris_ids));
        }
        if s.outages > 0 {
            let _ = writeln!(out, "    outage {} positions", s.outages);
        }
        if s.option != StrategyOption::Baseline {
            let frac = s
                .improved_fraction
                .map_or("N.A.".to_string(), |f| format!("{:.2}%", 100.0 * f));
            let _ = writeln!(
                out,
                "    Delta SNR_all, Delta SNR_NLOS (dB): {}, {}",
                fmt_opt(s.delta_snr_all),
                fmt_opt(s.delta_snr_nlos),
            );
            let _ = writeln!(
                out,
                "    Prob. of former NLOS cases improved: {}/{}, {frac}",
                s.improved, s.former_nlos
            );
        }
    }
    if let Some(best) = rx.recommended {
        let s = rx.strategies.iter().find(|s| s.option == best);
        let _ = writeln!(
            out,
            "  Strategy, Delta SNR_all, Delta SNR_NLOS (dB): {}, {}, {}",
            best.label(),
            fmt_opt(s.and_then(|s| s.delta_snr_all)),
            fmt_opt(s.and_then(|s| s.delta_snr_nlos)),
        );
    }
    out
}

/// One sweep configuration: carrier and RIS lattice size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub f_ghz: f64,
    pub m: usize,
    pub n: usize,
}

impl FromStr for SweepConfig {
    type Err = Error;
    /// `F:MxN`, e.g. `300:200x200`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad sweep config '{s}' (expected F_GHZ:MxN)"));
        let (f, size) = s.split_once(':').ok_or_else(bad)?;
        let (m, n) = size.split_once(['x', 'X']).ok_or_else(bad)?;
        let cfg = SweepConfig {
            f_ghz: f.trim().parse().map_err(|_| bad())?,
            m: m.trim().parse().map_err(|_| bad())?,
            n: n.trim().parse().map_err(|_| bad())?,
        };
        if !(cfg.f_ghz > 0.0) || cfg.m == 0 || cfg.n == 0 {
            return Err(bad());
        }
        Ok(cfg)
    }
}

impl std::fmt::Display for SweepConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}x{}", self.f_ghz, self.m, self.n)
    }
}

/// Mean improvements of one receiver under one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub config: SweepConfig,
    pub rx_id: String,
    /// Mean of `min NLOS − best RIS` over positions without LOS that have
    /// both a reflected path and a reachable RIS.
    pub mean_snr_gain_nlos: Option<f64>,
    /// Mean of `LOS (geometric) − best RIS` over positions with a reachable RIS.
    pub mean_snr_gain_los: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDelta {
    pub rx_id: String,
    pub from: SweepConfig,
    pub to: SweepConfig,
    pub delta_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub entries: Vec<SweepEntry>,
    pub deltas: Vec<SweepDelta>,
}

fn compensated_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let s: CompensatedSum = values.iter().copied().collect();
    Some(s.value() / values.len() as f64)
}

/// Mean SNR improvements of `records` as reported by the sweep.
pub fn sweep_metrics(records: &[HbpRecord]) -> (Option<f64>, Option<f64>, usize) {
    let mut nlos = Vec::new();
    let mut los = Vec::new();
    for r in records {
        let Some(j) = r.best_ris else { continue };
        if let Some(g) = r.snr_gain_los[j] {
            los.push(g);
        }
        if !r.los_present {
            if let Some(g) = r.snr_gain_nlos[j] {
                nlos.push(g);
            }
        }
    }
    (compensated_mean(&nlos), compensated_mean(&los), nlos.len())
}

/// Scene with every panel resized and the carrier changed. Pitches given in
/// wavelengths follow the new carrier.
pub fn configure(scene: &Scene, cfg: SweepConfig) -> Scene {
    let mut s = scene.with_frequency(cfg.f_ghz * 1e9);
    for p in &mut s.ris {
        *p = p.with_size(cfg.m, cfg.n);
    }
    s
}

/// Runs the sweep for every configuration and receiver, then reports all
/// pairwise deltas (later configuration minus earlier).
pub fn sweep_configs(
    scene: &Scene,
    rx_ids: &[String],
    configs: &[SweepConfig],
    grid: &BlockageGrid,
    options: &DrfOptions,
) -> Result<SweepTable> {
    let mut entries = Vec::new();
    for &cfg in configs {
        let s = configure(scene, cfg);
        s.validate()?;
        for rx in rx_ids {
            let records = run_drf(&s, rx, grid, options)?;
            let (gn, gl, samples) = sweep_metrics(&records);
            entries.push(SweepEntry {
                config: cfg,
                rx_id: rx.clone(),
                mean_snr_gain_nlos: gn,
                mean_snr_gain_los: gl,
                samples,
            });
        }
    }
    let mut deltas = Vec::new();
    for rx in rx_ids {
        let mine: Vec<&SweepEntry> = entries.iter().filter(|e| &e.rx_id == rx).collect();
        for i in 0..mine.len() {
            for j in i + 1..mine.len() {
                deltas.push(SweepDelta {
                    rx_id: rx.clone(),
                    from: mine[i].config,
                    to: mine[j].config,
                    delta_db: mine[j]
                        .mean_snr_gain_nlos
                        .zip(mine[i].mean_snr_gain_nlos)
                        .map(|(b, a)| b - a),
                });
            }
        }
    }
    Ok(SweepTable { entries, deltas })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(los: Option<f64>, nlos: &[f64], ris: &[Option<f64>]) -> HbpRecord {
        let entries: Vec<RisEntry> = ris
            .iter()
            .map(|p| RisEntry { reachable: p.is_some(), region: p.map(|_| FieldRegion::Near), pl_ris: *p })
            .collect();
        HbpRecord {
            hbp: 0,
            cell: 0,
            x: 0.0,
            y: 0.0,
            los_present: los.is_some(),
            pl_los_geometric: los.unwrap_or(91.0),
            pl_los: los,
            nlos_paths: nlos.to_vec(),
            snr_gain_los: ris.iter().map(|p| p.map(|r| 91.0 - r)).collect(),
            snr_gain_nlos: ris.iter().map(|p| p.zip(nlos.first().copied()).map(|(r, n)| n - r)).collect(),
            best_ris: argmin(ris),
            ris: entries,
        }
    }

    #[test]
    fn argmin_breaks_ties_by_lowest_index() {
        assert_eq!(argmin(&[None, Some(3.0), Some(3.0), Some(4.0)]), Some(1));
        assert_eq!(argmin(&[None, None]), None);
    }

    #[test]
    fn option_definitions() {
        let r = rec(Some(91.0), &[105.0], &[Some(89.0)]);
        assert_eq!(select(&r, StrategyOption::Opt2).branch, Branch::Los);
        assert_eq!(select(&r, StrategyOption::Opt3).branch, Branch::Ris(0));
        assert_eq!(select(&r, StrategyOption::Opt1).branch, Branch::Ris(0));
        assert_eq!(select(&r, StrategyOption::Baseline).branch, Branch::Los);
        let only_nlos = rec(None, &[107.0], &[None]);
        for o in StrategyOption::ALL {
            assert_eq!(select(&only_nlos, o), Selection { branch: Branch::Nlos, pl: Some(107.0) });
        }
        let nothing = rec(None, &[], &[None]);
        assert_eq!(select(&nothing, StrategyOption::Opt3).branch, Branch::Outage);
    }

    #[test]
    fn baseline_has_zero_improvement() {
        let rs = vec![rec(Some(91.0), &[105.0], &[Some(89.0)]), rec(None, &[104.0], &[Some(90.0)])];
        let s = summarize(&rs, StrategyOption::Baseline);
        assert_eq!(s.delta_snr_all, Some(0.0));
        assert_eq!(s.delta_snr_nlos, Some(0.0));
    }

    #[test]
    fn statistics_identities() {
        let rs = vec![
            rec(Some(91.0), &[105.0], &[Some(89.0), None]),
            rec(None, &[104.0, 108.0], &[Some(90.0), Some(95.0)]),
            rec(None, &[106.0], &[None, Some(93.0)]),
            rec(Some(91.0), &[], &[None, None]),
            rec(None, &[], &[None, None]),
        ];
        for o in StrategyOption::ALL {
            let s = summarize(&rs, o);
            let occ: f64 = s.branches.iter().map(|b| b.occurrence).sum();
            assert!((occ - 1.0).abs() < 1e-12);
            let count: usize = s.branches.iter().map(|b| b.count).sum();
            assert_eq!(count + s.outages, rs.len());
            let weighted: f64 = s.branches.iter().map(|b| b.occurrence * b.mean_pl).sum();
            assert!((weighted - s.mean_pl.unwrap()).abs() < 1e-9);
            assert!(s.branches.iter().all(|b| b.std_pl >= 0.0));
        }
        let s3 = summarize(&rs, StrategyOption::Opt3);
        assert_eq!(s3.former_nlos, 2);
        assert_eq!(s3.improved, 2);
        assert!((s3.delta_snr_nlos.unwrap() - ((104.0 - 90.0) + (106.0 - 93.0)) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn all_los_constant_distance_has_zero_spread() {
        let rs: Vec<_> = (0..5).map(|_| rec(Some(91.5), &[103.0], &[])).collect();
        let s = summarize(&rs, StrategyOption::Opt1);
        assert_eq!(s.delta_snr_all, Some(0.0));
        assert_eq!(s.branches.len(), 1);
        assert_eq!(s.branches[0].std_pl, 0.0);
    }

    #[test]
    fn sweep_config_parsing() {
        let c: SweepConfig = "700:306x306".parse().unwrap();
        assert_eq!(c, SweepConfig { f_ghz: 700.0, m: 306, n: 306 });
        assert!("700-306".parse::<SweepConfig>().is_err());
        assert!("0:1x1".parse::<SweepConfig>().is_err());
    }

    #[test]
    fn recommendation_prefers_overall_then_nlos_gain() {
        let mk = |o, a, n| StrategyStats {
            option: o,
            branches: vec![],
            mean_pl: None,
            std_pl: None,
            outages: 0,
            delta_snr_all: a,
            delta_snr_nlos: n,
            former_nlos: 0,
            improved: 0,
            improved_fraction: None,
        };
        let stats = vec![
            mk(StrategyOption::Baseline, Some(0.0), Some(0.0)),
            mk(StrategyOption::Opt1, Some(2.0), Some(10.0)),
            mk(StrategyOption::Opt2, Some(1.0), Some(14.0)),
            mk(StrategyOption::Opt3, Some(2.0), Some(12.0)),
        ];
        assert_eq!(recommend(&stats), Some(StrategyOption::Opt3));
    }
}
