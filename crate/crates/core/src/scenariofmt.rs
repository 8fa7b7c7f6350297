//! Scene files and report documents.
//!
//! Scene files are JSON with `"schema": "thz-scene/1"`. Units at the file
//! boundary: meters, GHz, dB. Unknown fields are rejected. Errors carry a
//! line/column for syntax problems and a field path (`ris[0].d_x`) for
//! schema violations.
//!
//! Reports are written as JSON (round-trip exact) or as CSV tables with a
//! fixed column order:
//!
//! - per-cell: `rx,i,cell,x,y,los,pl_los_geometric,pl_los,min_nlos,n_nlos,`
//!   then `pl_ris_<k>` for each panel, `j_star`, then `gain_los_<k>` and
//!   `gain_nlos_<k>` for each panel (`k` is 1-based, `j_star` too; empty
//!   means not available)
//! - summary: `rx,option,branch,count,occurrence,mu_pl,sigma_pl,outages,`
//!   `delta_snr_all,delta_snr_nlos,improved,former_nlos,recommended`

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atmosphere::AtmosphericConditions;
use crate::data;
use crate::drf::{Branch, Convention, DrfOptions, DrfReport};
use crate::propagation::{Material, Polarization};
use crate::raytrace::TraceOptions;
use crate::ris::{FieldRule, Pitch, RisPanel};
use crate::scene::{
    shell_surfaces, Aabb, BlockerTemplate, Node, Obstacle, Rect, Role, Scene, Surface, SurfaceKind, Vec3,
};

pub const SCHEMA: &str = "thz-scene/1";
pub const TOOL_VERSION: &str = concat!("terasim ", env!("CARGO_PKG_VERSION"));

/// Scene-file and report errors.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema violation at '{path}': {message}")]
    Schema { path: String, message: String },
    #[error("dangling reference: {what} '{id}' is not defined")]
    DanglingReference { what: String, id: String },
    #[error("unsupported schema '{0}' (expected '{SCHEMA}')")]
    UnsupportedSchema(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
}

impl FormatError {
    /// 3 for physics-coverage and data-table errors, otherwise 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            FormatError::Model(e) => e.exit_code(),
            _ => 2,
        }
    }

    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSection {
    pub size: Vec3,
    /// When set, the six shell faces are generated with this material.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shell_material: Option<String>,
    /// Overrides the shell material for the floor face.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor_material: Option<String>,
}

/// A material: either a name from the shipped database or a full entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialRef {
    Name(String),
    Inline(Material),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub id: String,
    pub origin: Vec3,
    pub edge_u: Vec3,
    pub edge_v: Vec3,
    pub material: String,
    pub kind: SurfaceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSection {
    pub label: String,
    pub min: Vec3,
    pub max: Vec3,
    pub material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penetration_loss_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockerSection {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penetration_loss_db: Option<f64>,
}

impl Default for BlockerSection {
    fn default() -> Self {
        let b = BlockerTemplate::default();
        Self {
            width: b.width,
            depth: b.depth,
            height: b.height,
            penetration_loss_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    pub id: String,
    pub role: Role,
    pub position: Vec3,
    pub gain_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PitchUnit {
    #[default]
    M,
    Wavelength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisSection {
    pub id: String,
    pub center: Vec3,
    pub normal: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up: Option<Vec3>,
    pub m: usize,
    pub n: usize,
    pub d_x: f64,
    pub d_y: f64,
    #[serde(default)]
    pub pitch_unit: PitchUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_bits: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dx: f64,
    pub dy: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { dx: 0.1, dy: 0.2 }
    }
}

/// Simulation settings, with defaults filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub polarization: Polarization,
    pub reflection_order: u8,
    pub convention: Convention,
    pub field_rule: FieldRule,
    /// Phase resolution for panels that do not set their own.
    pub phase_bits: u32,
    pub grid: GridSpec,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            polarization: Polarization::Avg,
            reflection_order: 1,
            convention: Convention::Raw,
            field_rule: FieldRule::Either,
            phase_bits: 0,
            grid: GridSpec::default(),
        }
    }
}

impl SimulationConfig {
    pub fn drf_options(&self) -> DrfOptions {
        DrfOptions {
            trace: TraceOptions {
                polarization: self.polarization,
                max_order: self.reflection_order,
                field_rule: self.field_rule,
            },
            convention: self.convention,
        }
    }
}

/// The on-disk scene document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub schema: String,
    #[serde(default)]
    pub name: String,
    pub frequency_ghz: f64,
    pub room: RoomSection,
    #[serde(default)]
    pub materials: Vec<MaterialRef>,
    #[serde(default)]
    pub surfaces: Vec<SurfaceSection>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSection>,
    #[serde(default)]
    pub blocker: BlockerSection,
    pub nodes: Vec<NodeSection>,
    #[serde(default)]
    pub ris: Vec<RisSection>,
    #[serde(default)]
    pub atmosphere: AtmosphericConditions,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

fn positive(v: f64, path: String) -> FormatResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(FormatError::schema(path, format!("must be a positive number, got {v}")))
    }
}

impl ScenarioDocument {
    /// Field-level checks that produce a path for each violation.
    fn check_fields(&self) -> FormatResult<()> {
        positive(self.frequency_ghz, "frequency_ghz".into())?;
        for (k, c) in ["x", "y", "z"].iter().enumerate() {
            positive(self.room.size.component(k), format!("room.size.{c}"))?;
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            for (k, c) in ["x", "y", "z"].iter().enumerate() {
                if !(o.min.component(k) < o.max.component(k)) {
                    return Err(FormatError::schema(format!("obstacles[{i}].max.{c}"), "max must exceed min"));
                }
            }
            if let Some(db) = o.penetration_loss_db {
                if !(db.is_finite() && db >= 0.0) {
                    return Err(FormatError::schema(format!("obstacles[{i}].penetration_loss_db"), "must be >= 0"));
                }
            }
        }
        positive(self.blocker.width, "blocker.width".into())?;
        positive(self.blocker.depth, "blocker.depth".into())?;
        positive(self.blocker.height, "blocker.height".into())?;
        for (i, p) in self.ris.iter().enumerate() {
            positive(p.d_x, format!("ris[{i}].d_x"))?;
            positive(p.d_y, format!("ris[{i}].d_y"))?;
            if p.m == 0 {
                return Err(FormatError::schema(format!("ris[{i}].m"), "must be >= 1"));
            }
            if p.n == 0 {
                return Err(FormatError::schema(format!("ris[{i}].n"), "must be >= 1"));
            }
            if let Some(a) = p.amplitude {
                if !(a > 0.0 && a <= 1.0) {
                    return Err(FormatError::schema(format!("ris[{i}].amplitude"), "must be in (0, 1]"));
                }
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !n.gain_db.is_finite() {
                return Err(FormatError::schema(format!("nodes[{i}].gain_db"), "must be finite"));
            }
        }
        let s = &self.simulation;
        if !(1..=2).contains(&s.reflection_order) {
            return Err(FormatError::schema("simulation.reflection_order", "must be 1 or 2"));
        }
        positive(s.grid.dx, "simulation.grid.dx".into())?;
        positive(s.grid.dy, "simulation.grid.dy".into())?;
        Ok(())
    }

    /// Resolves references and defaults into a validated scene.
    pub fn resolve(&self) -> FormatResult<(Scene, SimulationConfig)> {
        if self.schema != SCHEMA {
            return Err(FormatError::UnsupportedSchema(self.schema.clone()));
        }
        self.check_fields()?;
        let mut materials = BTreeMap::new();
        for (i, m) in self.materials.iter().enumerate() {
            let mat = match m {
                MaterialRef::Name(name) => data::material(name)
                    .map_err(|_| FormatError::DanglingReference {
                        what: "material".into(),
                        id: name.clone(),
                    })?
                    .clone(),
                MaterialRef::Inline(mat) => {
                    mat.validate()
                        .map_err(|e| FormatError::schema(format!("materials[{i}]"), e.to_string()))?;
                    mat.clone()
                }
            };
            materials.insert(mat.name.clone(), mat);
        }
        let need = |id: &str| -> FormatResult<()> {
            if materials.contains_key(id) {
                Ok(())
            } else {
                Err(FormatError::DanglingReference {
                    what: "material".into(),
                    id: id.to_string(),
                })
            }
        };
        let mut surfaces = Vec::new();
        if let Some(m) = &self.room.shell_material {
            need(m)?;
            let mut shell = shell_surfaces(self.room.size, m);
            if let Some(f) = &self.room.floor_material {
                need(f)?;
                for s in shell.iter_mut().filter(|s| s.kind == SurfaceKind::Floor) {
                    s.material = f.clone();
                }
            }
            surfaces.extend(shell);
        } else if self.room.floor_material.is_some() {
            return Err(FormatError::schema("room.floor_material", "requires room.shell_material"));
        }
        for s in &self.surfaces {
            need(&s.material)?;
            surfaces.push(Surface {
                id: s.id.clone(),
                rect: Rect::new(s.origin, s.edge_u, s.edge_v),
                material: s.material.clone(),
                kind: s.kind,
            });
        }
        let mut obstacles = Vec::new();
        for o in &self.obstacles {
            need(&o.material)?;
            obstacles.push(Obstacle {
                label: o.label.clone(),
                bbox: Aabb::new(o.min, o.max),
                material: o.material.clone(),
                penetration_loss_db: o.penetration_loss_db,
            });
        }
        let pitch = |v: f64, unit: PitchUnit| match unit {
            PitchUnit::M => Pitch::Meters(v),
            PitchUnit::Wavelength => Pitch::Wavelengths(v),
        };
        let ris = self
            .ris
            .iter()
            .map(|p| RisPanel {
                id: p.id.clone(),
                center: p.center,
                normal: p.normal,
                up: p.up,
                m: p.m,
                n: p.n,
                d_x: pitch(p.d_x, p.pitch_unit),
                d_y: pitch(p.d_y, p.pitch_unit),
                amplitude: p.amplitude.unwrap_or(1.0),
                phase_bits: p.phase_bits.unwrap_or(self.simulation.phase_bits),
            })
            .collect();
        let scene = Scene {
            name: self.name.clone(),
            room: self.room.size,
            materials,
            surfaces,
            obstacles,
            blocker: BlockerTemplate {
                width: self.blocker.width,
                depth: self.blocker.depth,
                height: self.blocker.height,
                penetration_loss_db: self.blocker.penetration_loss_db,
            },
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    id: n.id.clone(),
                    position: n.position,
                    antenna_gain_db: n.gain_db,
                    role: n.role,
                })
                .collect(),
            ris,
            atmosphere: self.atmosphere,
            frequency_hz: self.frequency_ghz * 1e9,
        };
        scene.validate()?;
        Ok((scene, self.simulation))
    }

    /// Document that resolves back to `scene` (all materials inline, all
    /// surfaces explicit).
    pub fn from_scene(scene: &Scene, sim: &SimulationConfig) -> Self {
        let lambda = scene.wavelength();
        let ris = scene
            .ris
            .iter()
            .map(|p| {
                let (unit, dx, dy) = match (p.d_x, p.d_y) {
                    (Pitch::Meters(a), Pitch::Meters(b)) => (PitchUnit::M, a, b),
                    (Pitch::Wavelengths(a), Pitch::Wavelengths(b)) => (PitchUnit::Wavelength, a, b),
                    (a, b) => (PitchUnit::M, a.meters(lambda), b.meters(lambda)),
                };
                RisSection {
                    id: p.id.clone(),
                    center: p.center,
                    normal: p.normal,
                    up: p.up,
                    m: p.m,
                    n: p.n,
                    d_x: dx,
                    d_y: dy,
                    pitch_unit: unit,
                    amplitude: Some(p.amplitude),
                    phase_bits: Some(p.phase_bits),
                }
            })
            .collect();
        ScenarioDocument {
            schema: SCHEMA.into(),
            name: scene.name.clone(),
            frequency_ghz: scene.frequency_hz / 1e9,
            room: RoomSection {
                size: scene.room,
                shell_material: None,
                floor_material: None,
            },
            materials: scene.materials.values().cloned().map(MaterialRef::Inline).collect(),
            surfaces: scene
                .surfaces
                .iter()
                .map(|s| SurfaceSection {
                    id: s.id.clone(),
                    origin: s.rect.origin,
                    edge_u: s.rect.edge_u,
                    edge_v: s.rect.edge_v,
                    material: s.material.clone(),
                    kind: s.kind,
                })
                .collect(),
            obstacles: scene
                .obstacles
                .iter()
                .map(|o| ObstacleSection {
                    label: o.label.clone(),
                    min: o.bbox.min,
                    max: o.bbox.max,
                    material: o.material.clone(),
                    penetration_loss_db: o.penetration_loss_db,
                })
                .collect(),
            blocker: BlockerSection {
                width: scene.blocker.width,
                depth: scene.blocker.depth,
                height: scene.blocker.height,
                penetration_loss_db: scene.blocker.penetration_loss_db,
            },
            nodes: scene
                .nodes
                .iter()
                .map(|n| NodeSection {
                    id: n.id.clone(),
                    role: n.role,
                    position: n.position,
                    gain_db: n.antenna_gain_db,
                })
                .collect(),
            ris,
            atmosphere: scene.atmosphere,
            simulation: *sim,
        }
    }
}

/// Parses a scene document from JSON text.
pub fn parse_scenario(text: &str) -> FormatResult<(Scene, SimulationConfig)> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match value.get("schema") {
        Some(serde_json::Value::String(s)) if s == SCHEMA => {}
        Some(serde_json::Value::String(s)) => return Err(FormatError::UnsupportedSchema(s.clone())),
        _ => return Err(FormatError::schema("schema", "missing or not a string")),
    }
    let doc: ScenarioDocument = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        FormatError::schema(path, e.into_inner().to_string())
    })?;
    doc.resolve()
}

pub fn load_scenario(path: &Path) -> FormatResult<(Scene, SimulationConfig)> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text)
}

/// Pretty JSON for a scene document.
pub fn save_scenario(scene: &Scene, sim: &SimulationConfig) -> FormatResult<String> {
    serde_json::to_string_pretty(&ScenarioDocument::from_scene(scene, sim))
        .map_err(|e| FormatError::schema("", e.to_string()))
}

/// `sha256:` digest of the canonical serialized scene, excluding its name.
pub fn scene_digest(scene: &Scene) -> crate::Result<String> {
    let canonical = Scene {
        name: String::new(),
        ..scene.clone()
    };
    let bytes = serde_json::to_vec(&canonical).map_err(|e| crate::Error::Data(e.to_string()))?;
    let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    Ok(format!("sha256:{hex}"))
}

/// Self-describing report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub tool_version: String,
    pub scene_digest: String,
    pub config: SimulationConfig,
    pub report: DrfReport,
}

impl ReportDocument {
    pub fn new(report: DrfReport, config: SimulationConfig) -> Self {
        Self {
            tool_version: TOOL_VERSION.into(),
            scene_digest: report.scene_digest.clone(),
            config,
            report,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

fn csv_err(e: impl std::fmt::Display) -> FormatError {
    FormatError::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn max_panels(report: &DrfReport) -> usize {
    report.receivers.iter().map(|r| r.ris_ids.len()).max().unwrap_or(0)
}

/// Per-cell CSV (see module docs for the columns).
pub fn cells_csv(report: &DrfReport) -> FormatResult<Vec<u8>> {
    let j = max_panels(report);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "rx", "i", "cell", "x", "y", "los", "pl_los_geometric", "pl_los", "min_nlos", "n_nlos",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=j).map(|k| format!("pl_ris_{k}")));
    header.push("j_star".into());
    header.extend((1..=j).map(|k| format!("gain_los_{k}")));
    header.extend((1..=j).map(|k| format!("gain_nlos_{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for rx in &report.receivers {
        for r in &rx.records {
            let mut row = vec![
                rx.rx_id.clone(),
                r.hbp.to_string(),
                r.cell.to_string(),
                r.x.to_string(),
                r.y.to_string(),
                u8::from(r.los_present).to_string(),
                r.pl_los_geometric.to_string(),
                cell(r.pl_los),
                cell(r.min_nlos()),
                r.nlos_paths.len().to_string(),
            ];
            row.extend((0..j).map(|k| cell(r.ris.get(k).and_then(|e| e.pl_ris))));
            row.push(r.best_ris.map(|b| (b + 1).to_string()).unwrap_or_default());
            row.extend((0..j).map(|k| cell(r.snr_gain_los.get(k).copied().flatten())));
            row.extend((0..j).map(|k| cell(r.snr_gain_nlos.get(k).copied().flatten())));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(csv_err)
}

fn branch_name(b: Branch, ris_ids: &[String]) -> String {
    match b {
        Branch::Los => "LOS".into(),
        Branch::Nlos => "NLOS-min".into(),
        Branch::Ris(j) => format!("RIS:{}", ris_ids.get(j).cloned().unwrap_or_default()),
        Branch::Outage => "outage".into(),
    }
}

/// Per-strategy summary CSV (see module docs for the columns).
pub fn summary_csv(report: &DrfReport) -> FormatResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "rx", "option", "branch", "count", "occurrence", "mu_pl", "sigma_pl", "outages", "delta_snr_all",
        "delta_snr_nlos", "improved", "former_nlos", "recommended",
    ])
    .map_err(csv_err)?;
    for rx in &report.receivers {
        for s in &rx.strategies {
            let option = serde_json::to_value(s.option)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            let recommended = u8::from(rx.recommended == Some(s.option)).to_string();
            for b in &s.branches {
                w.write_record([
                    rx.rx_id.clone(),
                    option.clone(),
                    branch_name(b.branch, &rx.ris_ids),
                    b.count.to_string(),
                    b.occurrence.to_string(),
                    b.mean_pl.to_string(),
                    b.std_pl.to_string(),
                    s.outages.to_string(),
                    cell(s.delta_snr_all),
                    cell(s.delta_snr_nlos),
                    s.improved.to_string(),
                    s.former_nlos.to_string(),
                    recommended.clone(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.into_inner().map_err(csv_err)
}

/// Serializes a report. CSV output is the per-cell table.
pub fn save_report(doc: &ReportDocument, format: ReportFormat) -> FormatResult<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut v = serde_json::to_vec_pretty(doc).map_err(|e| FormatError::schema("", e.to_string()))?;
            v.push(b'\n');
            Ok(v)
        }
        ReportFormat::Csv => cells_csv(&doc.report),
    }
}

pub fn load_report(bytes: &[u8]) -> FormatResult<ReportDocument> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            FormatError::Parse {
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        } else {
            FormatError::schema(path, inner.to_string())
        }
    })
}
