//! Room geometry: shell surfaces, furniture boxes, antennas, RIS panels,
//! the mobile human blocker and the floor grid it is swept over.
//!
//! A [`Scene`] is immutable once validated. Placing the blocker produces a
//! lightweight [`SceneView`] that borrows the scene and adds one box.

mod geometry;
mod grid;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use geometry::{Aabb, Rect, Vec3, ENDPOINT_EPS};
pub use grid::{build_grid, BlockageGrid, GridCell};

use crate::atmosphere::AtmosphericConditions;
use crate::error::{Error, Result};
use crate::propagation::Material;
use crate::ris::RisPanel;

/// Tolerance for "inside the room" checks (m).
const ROOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Wall,
    Ceiling,
    Floor,
    FurnitureFace,
}

/// A planar reflecting or blocking rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub id: String,
    pub rect: Rect,
    pub material: String,
    pub kind: SurfaceKind,
}

/// Axis-aligned furniture or appliance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub label: String,
    pub bbox: Aabb,
    pub material: String,
    /// Loss added to a ray crossing the box; `None` blocks the ray.
    pub penetration_loss_db: Option<f64>,
}

/// Blocker dimensions; the position comes from the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockerTemplate {
    /// Extent along x (m).
    pub width: f64,
    /// Extent along y (m).
    pub depth: f64,
    pub height: f64,
    pub penetration_loss_db: Option<f64>,
}

impl Default for BlockerTemplate {
    fn default() -> Self {
        Self {
            width: 0.4,
            depth: 0.2,
            height: 1.7,
            penetration_loss_db: None,
        }
    }
}

/// A placed blocker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanBlocker {
    pub footprint_center: Vec3,
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

impl HumanBlocker {
    /// The blocker box, clipped to the room footprint so that a blocker
    /// standing against a wall never extends through it.
    pub fn bbox(&self, room: Vec3) -> Aabb {
        let c = self.footprint_center;
        let (hw, hd) = (self.width / 2.0, self.depth / 2.0);
        Aabb::new(
            Vec3::new((c.x - hw).max(0.0), (c.y - hd).max(0.0), 0.0),
            Vec3::new((c.x + hw).min(room.x), (c.y + hd).min(room.y), self.height.min(room.z)),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Tx,
    Rx,
}

/// Transmitter or receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub position: Vec3,
    pub antenna_gain_db: f64,
    pub role: Role,
}

/// The resolved, validated world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub name: String,
    /// Room extent; the room spans `[0, x] × [0, y] × [0, z]`.
    pub room: Vec3,
    pub materials: BTreeMap<String, Material>,
    pub surfaces: Vec<Surface>,
    pub obstacles: Vec<Obstacle>,
    pub blocker: BlockerTemplate,
    pub nodes: Vec<Node>,
    pub ris: Vec<RisPanel>,
    pub atmosphere: AtmosphericConditions,
    pub frequency_hz: f64,
}

/// The six inner faces of a `room` box, each made of `material`.
pub fn shell_surfaces(room: Vec3, material: &str) -> Vec<Surface> {
    let (x, y, z) = (room.x, room.y, room.z);
    let s = |id: &str, o: Vec3, u: Vec3, v: Vec3, kind| Surface {
        id: id.to_string(),
        rect: Rect::new(o, u, v),
        material: material.to_string(),
        kind,
    };
    vec![
        s("floor", Vec3::ZERO, Vec3::new(x, 0.0, 0.0), Vec3::new(0.0, y, 0.0), SurfaceKind::Floor),
        s("ceiling", Vec3::new(0.0, 0.0, z), Vec3::new(x, 0.0, 0.0), Vec3::new(0.0, y, 0.0), SurfaceKind::Ceiling),
        s("wall-y0", Vec3::ZERO, Vec3::new(x, 0.0, 0.0), Vec3::new(0.0, 0.0, z), SurfaceKind::Wall),
        s("wall-y1", Vec3::new(0.0, y, 0.0), Vec3::new(x, 0.0, 0.0), Vec3::new(0.0, 0.0, z), SurfaceKind::Wall),
        s("wall-x0", Vec3::ZERO, Vec3::new(0.0, y, 0.0), Vec3::new(0.0, 0.0, z), SurfaceKind::Wall),
        s("wall-x1", Vec3::new(x, 0.0, 0.0), Vec3::new(0.0, y, 0.0), Vec3::new(0.0, 0.0, z), SurfaceKind::Wall),
    ]
}

/// The object that stops or attenuates a ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum BlockingObject {
    Obstacle(usize),
    Surface(usize),
    Blocker,
}

/// Outcome of an occlusion query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Occlusion {
    Clear,
    /// Crossed only objects with a finite penetration loss (total dB).
    Attenuated(f64),
    Blocked(BlockingObject),
}

impl Occlusion {
    pub fn is_blocked(&self) -> bool {
        matches!(self, Occlusion::Blocked(_))
    }

    /// Penetration loss in dB; infinite when blocked.
    pub fn loss_db(&self) -> f64 {
        match *self {
            Occlusion::Clear => 0.0,
            Occlusion::Attenuated(db) => db,
            Occlusion::Blocked(_) => f64::INFINITY,
        }
    }

    /// Combines the outcomes of two disjoint object sets.
    pub fn and(self, other: Occlusion) -> Occlusion {
        match (self, other) {
            (Occlusion::Blocked(b), _) | (_, Occlusion::Blocked(b)) => Occlusion::Blocked(b),
            (Occlusion::Clear, o) | (o, Occlusion::Clear) => o,
            (Occlusion::Attenuated(a), Occlusion::Attenuated(b)) => Occlusion::Attenuated(a + b),
        }
    }
}

fn crossing(loss: Option<f64>, what: BlockingObject) -> Occlusion {
    match loss {
        Some(db) => Occlusion::Attenuated(db),
        None => Occlusion::Blocked(what),
    }
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let r = self.room;
        if !(r.is_finite() && r.x > 0.0 && r.y > 0.0 && r.z > 0.0) {
            return bad("room dimensions must be positive".into());
        }
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return bad("carrier frequency must be positive".into());
        }
        let room_box = self.room_box();
        let inside = |p: Vec3| {
            p.is_finite()
                && p.x >= -ROOM_TOL
                && p.y >= -ROOM_TOL
                && p.z >= -ROOM_TOL
                && p.x <= r.x + ROOM_TOL
                && p.y <= r.y + ROOM_TOL
                && p.z <= r.z + ROOM_TOL
        };
        for (name, m) in &self.materials {
            m.validate()?;
            if name != &m.name {
                return bad(format!("material key '{name}' does not match its name '{}'", m.name));
            }
        }
        let material = |id: &str, owner: &str| -> Result<&Material> {
            self.materials.get(id).ok_or_else(|| {
                Error::Configuration(format!("{owner} references unknown material '{id}'"))
            })
        };
        let mut ids = BTreeSet::new();
        for s in &self.surfaces {
            if !ids.insert(s.id.as_str()) {
                return bad(format!("duplicate surface id '{}'", s.id));
            }
            if !s.rect.is_valid() {
                return bad(format!("surface '{}': edges must be non-zero and orthogonal", s.id));
            }
            if !s.rect.corners().iter().all(|&c| inside(c)) {
                return bad(format!("surface '{}' extends outside the room", s.id));
            }
            material(&s.material, &format!("surface '{}'", s.id))?.properties(self.frequency_hz)?;
        }
        for o in &self.obstacles {
            if !o.bbox.is_valid() {
                return bad(format!("obstacle '{}': box min must be < max", o.label));
            }
            let grown = Aabb::new(
                room_box.min - Vec3::new(ROOM_TOL, ROOM_TOL, ROOM_TOL),
                room_box.max + Vec3::new(ROOM_TOL, ROOM_TOL, ROOM_TOL),
            );
            if !grown.contains_box(&o.bbox) {
                return bad(format!("obstacle '{}' extends outside the room", o.label));
            }
            let m = material(&o.material, &format!("obstacle '{}'", o.label))?;
            if m.reflective {
                m.properties(self.frequency_hz)?;
            }
            check_penetration(o.penetration_loss_db, &o.label)?;
        }
        let b = &self.blocker;
        if !(b.width > 0.0 && b.depth > 0.0 && b.height > 0.0)
            || !(b.width <= r.x && b.depth <= r.y && b.height <= r.z)
        {
            return bad("blocker dimensions must be positive and fit in the room".into());
        }
        check_penetration(b.penetration_loss_db, "blocker")?;
        let mut node_ids = BTreeSet::new();
        for n in &self.nodes {
            if !node_ids.insert(n.id.as_str()) {
                return bad(format!("duplicate node id '{}'", n.id));
            }
            if !inside(n.position) {
                return bad(format!("node '{}' is outside the room", n.id));
            }
            if !n.antenna_gain_db.is_finite() {
                return bad(format!("node '{}' has a non-finite gain", n.id));
            }
        }
        let tx_count = self.nodes.iter().filter(|n| n.role == Role::Tx).count();
        if tx_count != 1 {
            return Err(Error::Configuration(format!("scene needs exactly one TX, found {tx_count}")));
        }
        if !self.nodes.iter().any(|n| n.role == Role::Rx) {
            return Err(Error::Configuration("scene needs at least one RX".into()));
        }
        let mut ris_ids = BTreeSet::new();
        for p in &self.ris {
            if !ris_ids.insert(p.id.as_str()) {
                return bad(format!("duplicate ris id '{}'", p.id));
            }
            p.validate()?;
            if !inside(p.center) {
                return bad(format!("ris '{}' is outside the room", p.id));
            }
        }
        self.atmosphere.validate()
    }

    pub fn room_box(&self) -> Aabb {
        Aabb::new(Vec3::ZERO, self.room)
    }

    pub fn tx(&self) -> Result<&Node> {
        self.nodes
            .iter()
            .find(|n| n.role == Role::Tx)
            .ok_or_else(|| Error::Configuration("scene has no TX".into()))
    }

    pub fn rx(&self, id: &str) -> Result<&Node> {
        self.nodes
            .iter()
            .find(|n| n.role == Role::Rx && n.id == id)
            .ok_or_else(|| Error::Configuration(format!("scene has no RX '{id}'")))
    }

    pub fn receivers(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.role == Role::Rx)
    }

    pub fn wavelength(&self) -> f64 {
        crate::wavelength(self.frequency_hz)
    }

    pub fn material(&self, id: &str) -> Result<&Material> {
        self.materials
            .get(id)
            .ok_or_else(|| Error::Configuration(format!("unknown material '{id}'")))
    }

    /// Human-readable id of a blocking object.
    pub fn object_id(&self, obj: BlockingObject) -> String {
        match obj {
            BlockingObject::Obstacle(i) => self.obstacles[i].label.clone(),
            BlockingObject::Surface(i) => self.surfaces[i].id.clone(),
            BlockingObject::Blocker => "blocker".into(),
        }
    }

    /// A view with no blocker placed.
    pub fn view(&self) -> SceneView<'_> {
        SceneView {
            scene: self,
            blocker: None,
            hbp: None,
        }
    }

    /// Occlusion by the static geometry (obstacles and surfaces) only.
    pub fn static_occlusion(&self, a: Vec3, b: Vec3) -> Occlusion {
        let mut acc = Occlusion::Clear;
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.bbox.segment_crosses(a, b) {
                acc = acc.and(crossing(o.penetration_loss_db, BlockingObject::Obstacle(i)));
                if acc.is_blocked() {
                    return acc;
                }
            }
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            if s.rect.segment_crosses(a, b) {
                return Occlusion::Blocked(BlockingObject::Surface(i));
            }
        }
        acc
    }

    /// Copy of the scene at another carrier frequency.
    pub fn with_frequency(&self, frequency_hz: f64) -> Scene {
        Scene {
            frequency_hz,
            ..self.clone()
        }
    }
}

fn check_penetration(loss: Option<f64>, owner: &str) -> Result<()> {
    match loss {
        Some(db) if !(db.is_finite() && db >= 0.0) => Err(Error::InvalidArgument(format!(
            "{owner}: penetration loss must be a non-negative number"
        ))),
        _ => Ok(()),
    }
}

/// A scene plus at most one placed blocker.
#[derive(Debug, Clone, Copy)]
pub struct SceneView<'a> {
    pub scene: &'a Scene,
    pub blocker: Option<HumanBlocker>,
    /// Blockage-position number the blocker stands on.
    pub hbp: Option<usize>,
}

impl<'a> SceneView<'a> {
    pub fn blocker_box(&self) -> Option<Aabb> {
        self.blocker.map(|b| b.bbox(self.scene.room))
    }

    /// Occlusion by the placed blocker only.
    pub fn blocker_occlusion(&self, a: Vec3, b: Vec3) -> Occlusion {
        match self.blocker_box() {
            Some(bb) if bb.segment_crosses(a, b) => {
                crossing(self.scene.blocker.penetration_loss_db, BlockingObject::Blocker)
            }
            _ => Occlusion::Clear,
        }
    }

    /// Full occlusion query for the segment `a`–`b`.
    pub fn occlusion(&self, a: Vec3, b: Vec3) -> Occlusion {
        let s = self.scene.static_occlusion(a, b);
        if s.is_blocked() {
            return s;
        }
        self.blocker_occlusion(a, b).and(s)
    }

    /// First object whose interior the open segment crosses, if any.
    pub fn segment_blocked(&self, a: Vec3, b: Vec3) -> Option<BlockingObject> {
        segment_blocked(self, a, b)
    }
}

/// Blocker centered on grid cell `index`. The scene is not modified.
pub fn place_blocker<'a>(scene: &'a Scene, grid: &BlockageGrid, index: usize) -> Result<SceneView<'a>> {
    let cell = grid.cells.get(index).ok_or_else(|| {
        Error::InvalidArgument(format!("grid cell {index} out of range (0..{})", grid.cells.len()))
    })?;
    if cell.occupied {
        return Err(Error::InvalidArgument(format!("grid cell {index} is occupied")));
    }
    let t = scene.blocker;
    Ok(SceneView {
        scene,
        blocker: Some(HumanBlocker {
            footprint_center: cell.center,
            width: t.width,
            depth: t.depth,
            height: t.height,
        }),
        hbp: grid.hbp_of(index),
    })
}

/// Blocker on blockage position `hbp` (the `hbp`-th free cell).
pub fn place_blocker_at_hbp<'a>(scene: &'a Scene, grid: &BlockageGrid, hbp: usize) -> Result<SceneView<'a>> {
    let index = grid.free_cell(hbp)?.index;
    place_blocker(scene, grid, index)
}

/// Whether the open segment `a`–`b` crosses any obstacle, the blocker, or
/// a surface. Touching at an endpoint or grazing a face does not count.
/// Objects with a finite penetration loss also count as crossings here.
pub fn segment_blocked(view: &SceneView<'_>, a: Vec3, b: Vec3) -> Option<BlockingObject> {
    let scene = view.scene;
    if let Some(i) = scene.obstacles.iter().position(|o| o.bbox.segment_crosses(a, b)) {
        return Some(BlockingObject::Obstacle(i));
    }
    if view.blocker_box().is_some_and(|bb| bb.segment_crosses(a, b)) {
        return Some(BlockingObject::Blocker);
    }
    scene
        .surfaces
        .iter()
        .position(|s| s.rect.segment_crosses(a, b))
        .map(BlockingObject::Surface)
}
