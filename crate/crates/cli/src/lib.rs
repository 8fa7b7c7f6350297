//! Command-line front end.
//!
//! Every subcommand writes its primary output to the supplied writer and,
//! with `--out`, files into a directory. Output bytes never depend on
//! `--threads`. `--seed` is accepted for future stochastic models and is
//! currently unused.

pub mod heatmap;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use terasim_core::atmosphere::{specific_attenuation, AtmosphericConditions, RainPolarization};
use terasim_core::drf::{format_summary, run_report, sweep_configs, Convention, StrategyOption, SweepConfig};
use terasim_core::propagation::Polarization;
use terasim_core::raytrace::{azimuth_elevation_deg, PropagationPath, Tracer};
use terasim_core::ris::synthesize_phase_profile;
use terasim_core::scenariofmt::{
    load_report, load_scenario, save_report, summary_csv, FormatError, ReportDocument, ReportFormat,
    SimulationConfig,
};
use terasim_core::scene::{build_grid, place_blocker_at_hbp, BlockageGrid, Scene};

pub use heatmap::{HeatmapData, Metric};

/// Default sweep: the aperture-doubling, invariance and equal-aperture cases.
pub const DEFAULT_SWEEP: &str = "300:200x200,300:283x283,700:306x306,700:466x466";

#[derive(Debug, Parser)]
#[command(name = "terasim", version, about = "Indoor THz propagation and distributed RIS selection")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved; no model is stochastic yet.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the propagation paths for one blocker position.
    Trace(TraceArgs),
    /// Blockage sweep, strategy statistics and report files.
    Drf(DrfArgs),
    /// Mean SNR improvement across carrier / panel-size configurations.
    Sweep(SweepArgs),
    /// SVG and CSV heatmap from a saved report.
    Heatmap(HeatmapArgs),
    /// Specific attenuation components.
    Attenuation(AttenuationArgs),
    /// Phase profile of one panel for one receiver.
    Phase(PhaseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolarizationArg {
    Avg,
    Te,
    Tm,
}

impl From<PolarizationArg> for Polarization {
    fn from(p: PolarizationArg) -> Self {
        match p {
            PolarizationArg::Avg => Polarization::Avg,
            PolarizationArg::Te => Polarization::Te,
            PolarizationArg::Tm => Polarization::Tm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Raw,
    Budget,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Raw => Convention::Raw,
            ConventionArg::Budget => Convention::Budget,
        }
    }
}

/// Scene file plus overrides of its simulation block.
#[derive(Debug, Clone, Args)]
pub struct SceneArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, value_enum)]
    pub polarization: Option<PolarizationArg>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: Option<u8>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    /// Phase-shifter bits for every panel (0 = continuous).
    #[arg(long)]
    pub bits: Option<u32>,
}

impl SceneArgs {
    pub fn load(&self) -> Result<(Scene, SimulationConfig)> {
        let (mut scene, mut sim) = load_scenario(&self.scene)?;
        if let Some(p) = self.polarization {
            sim.polarization = p.into();
        }
        if let Some(o) = self.order {
            sim.reflection_order = o;
        }
        if let Some(c) = self.convention {
            sim.convention = c.into();
        }
        if let Some(b) = self.bits {
            sim.phase_bits = b;
            for p in &mut scene.ris {
                p.phase_bits = b;
            }
        }
        Ok((scene, sim))
    }
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Receiver id; the first receiver when absent.
    #[arg(long)]
    pub rx: Option<String>,
    /// Blockage-position number, e.g. `010`; no blocker when absent.
    #[arg(long)]
    pub cell: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptionArg {
    Baseline,
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

impl OptionArg {
    pub fn options(&self) -> Vec<StrategyOption> {
        match self {
            OptionArg::Baseline => vec![StrategyOption::Baseline],
            OptionArg::One => vec![StrategyOption::Baseline, StrategyOption::Opt1],
            OptionArg::Two => vec![StrategyOption::Baseline, StrategyOption::Opt2],
            OptionArg::Three => vec![StrategyOption::Baseline, StrategyOption::Opt3],
            OptionArg::All => StrategyOption::ALL.to_vec(),
        }
    }

    fn single(&self) -> Option<StrategyOption> {
        match self {
            OptionArg::Baseline => Some(StrategyOption::Baseline),
            OptionArg::One => Some(StrategyOption::Opt1),
            OptionArg::Two => Some(StrategyOption::Opt2),
            OptionArg::Three => Some(StrategyOption::Opt3),
            OptionArg::All => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct DrfArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Receiver ids; every receiver when absent.
    #[arg(long)]
    pub rx: Vec<String>,
    #[arg(long, value_enum, default_value = "all")]
    pub option: OptionArg,
    /// Report file format written to `--out`.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long)]
    pub rx: Vec<String>,
    /// Comma-separated `F_GHZ:MxN` list.
    #[arg(long, default_value = DEFAULT_SWEEP)]
    pub configs: String,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub rx: String,
    /// pl, gain-los, gain-nlos or los-geometric.
    #[arg(long, default_value = "pl")]
    pub metric: Metric,
    /// Strategy for `pl`; the recommended one when absent.
    #[arg(long, value_enum)]
    pub option: Option<OptionArg>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AttenuationArgs {
    /// Frequencies in GHz, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub freq: Vec<f64>,
    #[arg(long, default_value_t = 293.15)]
    pub temperature: f64,
    /// Total pressure, kPa.
    #[arg(long, default_value_t = 101.325)]
    pub pressure: f64,
    /// Relative humidity as a fraction.
    #[arg(long, conflicts_with = "vapour_density")]
    pub rh: Option<f64>,
    /// Water-vapour density, g/m^3.
    #[arg(long)]
    pub vapour_density: Option<f64>,
    /// Rain rate, mm/h.
    #[arg(long, default_value_t = 0.0)]
    pub rain: f64,
    /// Fog liquid water content, g/m^3.
    #[arg(long, default_value_t = 0.0)]
    pub fog: f64,
    /// Dry-snow rate, mm/h.
    #[arg(long, default_value_t = 0.0)]
    pub snow: f64,
    #[arg(long, value_enum, default_value = "avg")]
    pub polarization: PolarizationArg,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long)]
    pub rx: String,
    #[arg(long)]
    pub ris: String,
}

/// Process exit code for an error: 2 for validation failures, 3 for physics
/// coverage and data-table failures.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<FormatError>() {
            return e.exit_code();
        }
        if let Some(e) = cause.downcast_ref::<terasim_core::Error>() {
            return e.exit_code();
        }
    }
    2
}

/// Parses a blockage-position number such as `010`.
pub fn parse_hbp(s: &str) -> Result<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(terasim_core::Error::InvalidArgument(format!("bad cell '{s}' (expected a number like 010)")).into());
    }
    Ok(s.parse().map_err(|_| terasim_core::Error::InvalidArgument(format!("bad cell '{s}'")))?)
}

/// Runs `cli` on a pool sized by `--threads`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(terasim_core::Error::InvalidArgument("--threads must be at least 1".into()).into());
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building worker pool")?;
    let mut buf = Vec::new();
    let result = pool.install(|| {
        let w = &mut buf;
        match &cli.command {
            Command::Trace(a) => cmd_trace(a, w),
            Command::Drf(a) => cmd_drf(a, w),
            Command::Sweep(a) => cmd_sweep(a, w),
            Command::Heatmap(a) => cmd_heatmap(a, w),
            Command::Attenuation(a) => cmd_attenuation(a, w),
            Command::Phase(a) => cmd_phase(a, w),
        }
    });
    out.write_all(&buf)?;
    result
}

fn grid_for(scene: &Scene, sim: &SimulationConfig) -> Result<BlockageGrid> {
    Ok(build_grid(scene, sim.grid.dx, sim.grid.dy)?)
}

fn rx_ids(scene: &Scene, requested: &[String]) -> Result<Vec<String>> {
    if requested.is_empty() {
        return Ok(scene.receivers().map(|n| n.id.clone()).collect());
    }
    for id in requested {
        scene.rx(id)?;
    }
    Ok(requested.to_vec())
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// One row of the trace listing.
#[derive(Debug, Clone, Serialize)]
pub struct PathRow {
    pub kind: &'static str,
    pub id: String,
    pub length_m: f64,
    pub delay_ns: f64,
    pub spreading_db: f64,
    pub reflection_db: f64,
    pub atmospheric_db: f64,
    pub penetration_db: f64,
    pub pl_raw_db: f64,
    pub pl_budget_db: f64,
    pub aod_az_deg: f64,
    pub aod_el_deg: f64,
    pub aoa_az_deg: f64,
    pub aoa_el_deg: f64,
    pub incidence_deg: Vec<f64>,
    pub vertices: Vec<[f64; 3]>,
}

impl PathRow {
    pub const CSV_HEADER: [&'static str; 16] = [
        "kind", "id", "length_m", "delay_ns", "spreading_db", "reflection_db", "atmospheric_db", "penetration_db",
        "pl_raw_db", "pl_budget_db", "aod_az_deg", "aod_el_deg", "aoa_az_deg", "aoa_el_deg", "incidence_deg",
        "vertices",
    ];

    fn new(p: &PropagationPath) -> Self {
        let id = match (&p.ris_id, p.surface_ids.is_empty()) {
            (Some(r), _) => r.clone(),
            (None, false) => p.surface_ids.join("+"),
            (None, true) => "direct".into(),
        };
        let (aod_az, aod_el) = azimuth_elevation_deg(p.departure());
        let (aoa_az, aoa_el) = azimuth_elevation_deg(p.arrival());
        Self {
            kind: p.kind.as_str(),
            id,
            length_m: p.total_length,
            delay_ns: p.delay_s * 1e9,
            spreading_db: p.loss.spreading_db,
            reflection_db: p.loss.reflection_db,
            atmospheric_db: p.loss.atmospheric_db,
            penetration_db: p.loss.penetration_db,
            pl_raw_db: p.total_pl_raw,
            pl_budget_db: p.total_pl_budget,
            aod_az_deg: aod_az,
            aod_el_deg: aod_el,
            aoa_az_deg: aoa_az,
            aoa_el_deg: aoa_el,
            incidence_deg: p.incidence_angles.iter().map(|a| a.to_degrees()).collect(),
            vertices: p.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
        }
    }

    fn csv_record(&self) -> Vec<String> {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        vec![
            self.kind.into(),
            self.id.clone(),
            self.length_m.to_string(),
            self.delay_ns.to_string(),
            self.spreading_db.to_string(),
            self.reflection_db.to_string(),
            self.atmospheric_db.to_string(),
            self.penetration_db.to_string(),
            self.pl_raw_db.to_string(),
            self.pl_budget_db.to_string(),
            self.aod_az_deg.to_string(),
            self.aod_el_deg.to_string(),
            self.aoa_az_deg.to_string(),
            self.aoa_el_deg.to_string(),
            join(&self.incidence_deg),
            self.vertices.iter().map(|v| join(v)).collect::<Vec<_>>().join("|"),
        ]
    }
}

/// Paths for one receiver and optional blocker position.
pub fn trace_rows(scene: &Scene, sim: &SimulationConfig, rx: Option<&str>, cell: Option<&str>) -> Result<Vec<PathRow>> {
    let rx_id = match rx {
        Some(id) => id.to_string(),
        None => match scene.receivers().next() {
            Some(n) => n.id.clone(),
            None => bail!(terasim_core::Error::Configuration("scene has no receiver".into())),
        },
    };
    let hbp = cell.map(parse_hbp).transpose()?;
    let tx = scene.tx()?;
    let rx = scene.rx(&rx_id)?;
    let tracer = Tracer::new(scene, sim.drf_options().trace)?;
    let result = match hbp {
        Some(h) => {
            let grid = grid_for(scene, sim)?;
            let view = place_blocker_at_hbp(scene, &grid, h)?;
            tracer.trace(&view, tx, rx)?
        }
        None => tracer.trace(&scene.view(), tx, rx)?,
    };
    Ok(result.all_paths().into_iter().map(PathRow::new).collect())
}

pub fn cmd_trace(a: &TraceArgs, out: &mut dyn Write) -> Result<()> {
    let (scene, sim) = a.scene.load()?;
    let rows = trace_rows(&scene, &sim, a.rx.as_deref(), a.cell.as_deref())?;
    match a.format {
        Some(Format::Json) => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(PathRow::CSV_HEADER)?;
            for r in &rows {
                w.write_record(r.csv_record())?;
            }
            w.flush()?;
        }
        None => {
            writeln!(out, "{:<10} {:<28} {:>9} {:>10} {:>10}", "kind", "id", "length_m", "pl_raw_db", "pl_budget")?;
            for r in &rows {
                writeln!(
                    out,
                    "{:<10} {:<28} {:>9.3} {:>10.3} {:>10.3}",
                    r.kind, r.id, r.length_m, r.pl_raw_db, r.pl_budget_db
                )?;
            }
        }
    }
    Ok(())
}

/// Runs the sweep and returns the report document.
pub fn drf_document(scene: &Scene, sim: &SimulationConfig, rx: &[String]) -> Result<ReportDocument> {
    let ids = rx_ids(scene, rx)?;
    let grid = grid_for(scene, sim)?;
    let report = run_report(scene, &ids, &grid, &sim.drf_options())?;
    Ok(ReportDocument::new(report, *sim))
}

pub fn cmd_drf(a: &DrfArgs, out: &mut dyn Write) -> Result<()> {
    let (scene, sim) = a.scene.load()?;
    let doc = drf_document(&scene, &sim, &a.rx)?;
    let options = a.option.options();
    for rx in &doc.report.receivers {
        write!(out, "{}", format_summary(rx, &options))?;
    }
    if let Some(dir) = &a.out {
        match a.format {
            Format::Json => write_file(dir, "report.json", &save_report(&doc, ReportFormat::Json)?)?,
            Format::Csv => write_file(dir, "cells.csv", &save_report(&doc, ReportFormat::Csv)?)?,
        }
        write_file(dir, "summary.csv", &summary_csv(&doc.report)?)?;
    }
    Ok(())
}

pub fn parse_configs(s: &str) -> Result<Vec<SweepConfig>> {
    let configs = s
        .split(',')
        .filter(|c| !c.trim().is_empty())
        .map(|c| c.trim().parse::<SweepConfig>())
        .collect::<terasim_core::Result<Vec<_>>>()?;
    if configs.is_empty() {
        bail!(terasim_core::Error::InvalidArgument("no sweep configurations".into()));
    }
    Ok(configs)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn sweep_csv(table: &terasim_core::drf::SweepTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "rx", "config", "to", "mean_snr_gain_nlos", "mean_snr_gain_los", "samples", "delta_db"])?;
    for e in &table.entries {
        w.write_record([
            "entry".into(),
            e.rx_id.clone(),
            e.config.to_string(),
            String::new(),
            opt_cell(e.mean_snr_gain_nlos),
            opt_cell(e.mean_snr_gain_los),
            e.samples.to_string(),
            String::new(),
        ])?;
    }
    for d in &table.deltas {
        w.write_record([
            "delta".into(),
            d.rx_id.clone(),
            d.from.to_string(),
            d.to.to_string(),
            String::new(),
            String::new(),
            String::new(),
            opt_cell(d.delta_db),
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let (scene, sim) = a.scene.load()?;
    let configs = parse_configs(&a.configs)?;
    let ids = rx_ids(&scene, &a.rx)?;
    let grid = grid_for(&scene, &sim)?;
    let table = sweep_configs(&scene, &ids, &configs, &grid, &sim.drf_options())?;
    let csv_bytes = sweep_csv(&table)?;
    match a.format {
        Some(Format::Json) => {
            serde_json::to_writer_pretty(&mut *out, &table)?;
            writeln!(out)?;
        }
        Some(Format::Csv) => out.write_all(&csv_bytes)?,
        None => {
            let f = |v: Option<f64>| v.map_or("N.A.".to_string(), |x| format!("{x:.3}"));
            writeln!(out, "{:<8} {:<16} {:>12} {:>12} {:>8}", "rx", "config", "gain_nlos", "gain_los", "samples")?;
            for e in &table.entries {
                writeln!(
                    out,
                    "{:<8} {:<16} {:>12} {:>12} {:>8}",
                    e.rx_id,
                    e.config.to_string(),
                    f(e.mean_snr_gain_nlos),
                    f(e.mean_snr_gain_los),
                    e.samples
                )?;
            }
            writeln!(out)?;
            writeln!(out, "{:<8} {:<16} {:<16} {:>10}", "rx", "from", "to", "delta_db")?;
            for d in &table.deltas {
                writeln!(
                    out,
                    "{:<8} {:<16} {:<16} {:>10}",
                    d.rx_id,
                    d.from.to_string(),
                    d.to.to_string(),
                    f(d.delta_db)
                )?;
            }
        }
    }
    if let Some(dir) = &a.out {
        write_file(dir, "sweep.csv", &csv_bytes)?;
    }
    Ok(())
}

/// Heatmap of one receiver in a saved report.
pub fn heatmap_data(doc: &ReportDocument, rx: &str, metric: Metric, option: Option<OptionArg>) -> Result<HeatmapData> {
    let Some(r) = doc.report.receivers.iter().find(|r| r.rx_id == rx) else {
        bail!(terasim_core::Error::InvalidArgument(format!("receiver '{rx}' not in report")));
    };
    let option = match option {
        Some(OptionArg::All) => {
            bail!(terasim_core::Error::InvalidArgument("heatmap takes a single option".into()))
        }
        Some(o) => o.single().unwrap_or(StrategyOption::Baseline),
        None => r.recommended.unwrap_or(StrategyOption::Baseline),
    };
    HeatmapData::from_records(doc.report.grid, r, metric, option)
}

pub fn cmd_heatmap(a: &HeatmapArgs, out: &mut dyn Write) -> Result<()> {
    let bytes = fs::read(&a.report).map_err(|e| FormatError::Io {
        path: a.report.display().to_string(),
        message: e.to_string(),
    })?;
    let doc = load_report(&bytes)?;
    let data = heatmap_data(&doc, &a.rx, a.metric, a.option)?;
    let stem = format!("heatmap_{}_{}", a.rx, a.metric.name());
    let title = format!("{} {} (dB)", a.rx, a.metric.name());
    write_file(&a.out, &format!("{stem}.svg"), data.to_svg(&title).as_bytes())?;
    write_file(&a.out, &format!("{stem}.csv"), &data.to_csv()?)?;
    match data.bounds {
        Some((lo, hi)) => writeln!(out, "{stem}: {} cells, range [{lo:.3}, {hi:.3}] dB", data.cells.len())?,
        None => writeln!(out, "{stem}: {} cells, no values", data.cells.len())?,
    }
    Ok(())
}

pub fn cmd_attenuation(a: &AttenuationArgs, out: &mut dyn Write) -> Result<()> {
    let cond = AtmosphericConditions {
        temperature_k: a.temperature,
        pressure_kpa: a.pressure,
        relative_humidity: match (a.rh, a.vapour_density) {
            (None, None) => AtmosphericConditions::default().relative_humidity,
            (rh, _) => rh,
        },
        vapour_density_g_m3: a.vapour_density,
        rain_rate_mm_h: a.rain,
        fog_density_g_m3: a.fog,
        snow_rate_mm_h: a.snow,
    };
    cond.validate()?;
    let pol = RainPolarization::from(Polarization::from(a.polarization));
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(["f_GHz", "gamma_o", "gamma_w", "gamma_rain", "gamma_fog", "gamma_snow", "gamma_total"])?;
    for &f in &a.freq {
        let g = specific_attenuation(f * 1e9, &cond, pol)?;
        w.write_record([
            f.to_string(),
            g.gamma_o.to_string(),
            g.gamma_w.to_string(),
            g.gamma_rain.to_string(),
            g.gamma_fog.to_string(),
            g.gamma_snow.to_string(),
            g.total().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_phase(a: &PhaseArgs, out: &mut dyn Write) -> Result<()> {
    let (scene, _) = a.scene.load()?;
    let tx = scene.tx()?;
    let rx = scene.rx(&a.rx)?;
    let Some(panel) = scene.ris.iter().find(|p| p.id == a.ris) else {
        bail!(terasim_core::Error::InvalidArgument(format!("unknown panel '{}'", a.ris)));
    };
    let profile = synthesize_phase_profile(panel, tx.position, rx.position, scene.wavelength(), panel.phase_bits)?;
    out.write_all(profile.to_csv().as_bytes())?;
    Ok(())
}
