//! Image-method ray tracer.
//!
//! Paths are built in two stages. [`Tracer::candidates`] finds every
//! geometrically valid LOS, specular and RIS-relayed path against the static
//! scene (obstacles and surfaces). [`Candidates::resolve`] then drops or
//! attenuates the candidates that cross the blocker of a particular
//! [`SceneView`]. Since occlusion is a union over objects, this gives the
//! same result as tracing each blocker position from scratch.

use serde::{Deserialize, Serialize};

use crate::atmosphere::{self, path_attenuation, RainPolarization};
use crate::error::{Error, Result};
use crate::propagation::{friis_path_loss, reflect, Material, Polarization};
use crate::ris::{
    classify_field_region_with, pl_far_beam, pl_general, pl_near_beam, synthesize_phase_profile,
    FieldRegion, FieldRule, LinkGeometry, RisLink, RisPanel,
};
use crate::scene::{Aabb, Node, Occlusion, Rect, Scene, SceneView, Vec3, ENDPOINT_EPS};
use crate::SPEED_OF_LIGHT;

/// Tracer settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub polarization: Polarization,
    /// Highest reflection order, 1 or 2.
    pub max_order: u8,
    pub field_rule: FieldRule,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            polarization: Polarization::Avg,
            max_order: 1,
            field_rule: FieldRule::Either,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Los,
    Reflected,
    RisRelay,
}

impl PathKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathKind::Los => "los",
            PathKind::Reflected => "reflected",
            PathKind::RisRelay => "ris_relay",
        }
    }
}

/// Loss components in dB. Their sum is the gain-free path loss.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Free-space spreading, or the RIS model loss for relayed paths.
    pub spreading_db: f64,
    pub reflection_db: f64,
    pub atmospheric_db: f64,
    /// Loss through objects with a finite penetration loss.
    pub penetration_db: f64,
}

impl LossBreakdown {
    pub fn total(&self) -> f64 {
        self.spreading_db + self.reflection_db + self.atmospheric_db + self.penetration_db
    }
}

/// One traced path from TX to RX.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationPath {
    pub kind: PathKind,
    /// TX, interaction points, RX.
    pub vertices: Vec<Vec3>,
    pub segment_lengths: Vec<f64>,
    pub total_length: f64,
    /// Incidence angle at each reflection (rad).
    pub incidence_angles: Vec<f64>,
    /// Reflecting surface ids, one per bounce.
    pub surface_ids: Vec<String>,
    pub ris_id: Option<String>,
    pub ris_link: Option<RisLink>,
    pub loss: LossBreakdown,
    pub total_pl_raw: f64,
    pub total_pl_budget: f64,
    pub delay_s: f64,
    /// Sum of `G_t + G_r` in dB.
    #[serde(skip)]
    gains_db: f64,
}

impl PropagationPath {
    fn new(kind: PathKind, vertices: Vec<Vec3>, loss: LossBreakdown, gains_db: f64) -> Self {
        let segment_lengths: Vec<f64> = vertices.windows(2).map(|w| w[0].distance(w[1])).collect();
        let total_length = segment_lengths.iter().sum();
        let raw = loss.total();
        Self {
            kind,
            vertices,
            segment_lengths,
            total_length,
            incidence_angles: vec![],
            surface_ids: vec![],
            ris_id: None,
            ris_link: None,
            loss,
            total_pl_raw: raw,
            total_pl_budget: raw - gains_db,
            delay_s: total_length / SPEED_OF_LIGHT,
            gains_db,
        }
    }

    fn add_penetration(&mut self, db: f64) {
        self.loss.penetration_db += db;
        self.total_pl_raw = self.loss.total();
        self.total_pl_budget = self.total_pl_raw - self.gains_db;
    }

    /// Unit vector of departure at the TX.
    pub fn departure(&self) -> Vec3 {
        (self.vertices[1] - self.vertices[0]).normalized().unwrap_or(Vec3::ZERO)
    }

    /// Unit vector from the RX toward the last interaction point.
    pub fn arrival(&self) -> Vec3 {
        let k = self.vertices.len();
        (self.vertices[k - 2] - self.vertices[k - 1]).normalized().unwrap_or(Vec3::ZERO)
    }

    /// Segments as endpoint pairs.
    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Azimuth and elevation (degrees) of a direction.
pub fn azimuth_elevation_deg(d: Vec3) -> (f64, f64) {
    let az = d.y.atan2(d.x).to_degrees();
    let el = d.z.atan2((d.x * d.x + d.y * d.y).sqrt()).to_degrees();
    (az, el)
}

/// A surface that produces specular reflections.
#[derive(Debug, Clone)]
struct Reflector {
    id: String,
    rect: Rect,
    normal: Vec3,
    material: Material,
}

/// Per-scene tracing context.
#[derive(Debug, Clone)]
pub struct Tracer<'a> {
    pub scene: &'a Scene,
    pub options: TraceOptions,
    wavelength: f64,
    gamma_db_km: f64,
    reflectors: Vec<Reflector>,
}

/// Static-scene candidates for one TX/RX pair.
#[derive(Debug, Clone)]
pub struct Candidates {
    /// Direct path, or `None` when statically blocked.
    pub los: Option<PropagationPath>,
    /// Gain-free LOS loss from geometry alone.
    pub los_geometric_raw: f64,
    /// Reflected paths that survive the static scene.
    pub reflections: Vec<PropagationPath>,
    /// One entry per RIS panel; `None` when unreachable.
    pub ris: Vec<Option<PropagationPath>>,
}

/// Paths available for one scene view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub los: Option<PropagationPath>,
    pub los_geometric_raw: f64,
    /// Sorted by ascending raw loss.
    pub reflections: Vec<PropagationPath>,
    pub ris: Vec<Option<PropagationPath>>,
}

impl TraceResult {
    pub fn all_paths(&self) -> Vec<&PropagationPath> {
        self.los
            .iter()
            .chain(self.reflections.iter())
            .chain(self.ris.iter().flatten())
            .collect()
    }
}

fn survive(path: &PropagationPath, view: &SceneView<'_>) -> Option<PropagationPath> {
    let mut occ = Occlusion::Clear;
    for (a, b) in path.segments() {
        occ = occ.and(view.blocker_occlusion(a, b));
        if occ.is_blocked() {
            return None;
        }
    }
    let mut p = path.clone();
    if let Occlusion::Attenuated(db) = occ {
        p.add_penetration(db);
    }
    Some(p)
}

fn static_occlusion(scene: &Scene, vertices: &[Vec3]) -> Occlusion {
    let mut occ = Occlusion::Clear;
    for w in vertices.windows(2) {
        occ = occ.and(scene.static_occlusion(w[0], w[1]));
        if occ.is_blocked() {
            break;
        }
    }
    occ
}

fn sort_by_loss(paths: &mut [PropagationPath]) {
    paths.sort_by(|a, b| a.total_pl_raw.total_cmp(&b.total_pl_raw));
}

impl Candidates {
    /// Applies the blocker of `view` to the candidates.
    pub fn resolve(&self, view: &SceneView<'_>) -> TraceResult {
        let mut reflections: Vec<PropagationPath> =
            self.reflections.iter().filter_map(|p| survive(p, view)).collect();
        sort_by_loss(&mut reflections);
        TraceResult {
            los: self.los.as_ref().and_then(|p| survive(p, view)),
            los_geometric_raw: self.los_geometric_raw,
            reflections,
            ris: self.ris.iter().map(|c| c.as_ref().and_then(|p| survive(p, view))).collect(),
        }
    }
}

fn box_faces(b: &Aabb) -> [(&'static str, Rect); 6] {
    let (lo, hi) = (b.min, b.max);
    let d = hi - lo;
    [
        ("x0", Rect::new(lo, Vec3::new(0.0, d.y, 0.0), Vec3::new(0.0, 0.0, d.z))),
        ("x1", Rect::new(Vec3::new(hi.x, lo.y, lo.z), Vec3::new(0.0, d.y, 0.0), Vec3::new(0.0, 0.0, d.z))),
        ("y0", Rect::new(lo, Vec3::new(d.x, 0.0, 0.0), Vec3::new(0.0, 0.0, d.z))),
        ("y1", Rect::new(Vec3::new(lo.x, hi.y, lo.z), Vec3::new(d.x, 0.0, 0.0), Vec3::new(0.0, 0.0, d.z))),
        ("z0", Rect::new(lo, Vec3::new(d.x, 0.0, 0.0), Vec3::new(0.0, d.y, 0.0))),
        ("z1", Rect::new(Vec3::new(lo.x, lo.y, hi.z), Vec3::new(d.x, 0.0, 0.0), Vec3::new(0.0, d.y, 0.0))),
    ]
}

/// Incidence angle at `p` on a plane with unit normal `n` for a ray from `from`.
fn incidence(from: Vec3, p: Vec3, n: Vec3) -> f64 {
    let d = from - p;
    (d.dot(n).abs() / d.norm()).clamp(0.0, 1.0).acos()
}

impl<'a> Tracer<'a> {
    pub fn new(scene: &'a Scene, options: TraceOptions) -> Result<Self> {
        if !(1..=2).contains(&options.max_order) {
            return Err(Error::InvalidArgument(format!(
                "reflection order must be 1 or 2, got {}",
                options.max_order
            )));
        }
        let f = scene.frequency_hz;
        let gamma = atmosphere::specific_attenuation(f, &scene.atmosphere, RainPolarization::from(options.polarization))?;
        let mut reflectors = Vec::new();
        for s in &scene.surfaces {
            let m = scene.material(&s.material)?;
            if m.reflective {
                reflectors.push(Reflector {
                    id: s.id.clone(),
                    rect: s.rect,
                    normal: s.rect.normal(),
                    material: m.clone(),
                });
            }
        }
        for o in &scene.obstacles {
            let m = scene.material(&o.material)?;
            if m.reflective {
                for (face, rect) in box_faces(&o.bbox) {
                    reflectors.push(Reflector {
                        id: format!("{}:{face}", o.label),
                        rect,
                        normal: rect.normal(),
                        material: m.clone(),
                    });
                }
            }
        }
        Ok(Self {
            scene,
            options,
            wavelength: scene.wavelength(),
            gamma_db_km: gamma.total(),
            reflectors,
        })
    }

    /// Total specific attenuation applied along every path (dB/km).
    pub fn specific_attenuation_db_km(&self) -> f64 {
        self.gamma_db_km
    }

    fn atm(&self, d: f64) -> f64 {
        path_attenuation(self.gamma_db_km, d)
    }

    fn friis(&self, d: f64) -> f64 {
        friis_path_loss(d, self.wavelength, 0.0, 0.0, false)
    }

    fn los_candidate(&self, tx: &Node, rx: &Node) -> (Option<PropagationPath>, f64) {
        let d = tx.position.distance(rx.position);
        let loss = LossBreakdown {
            spreading_db: self.friis(d),
            atmospheric_db: self.atm(d),
            ..Default::default()
        };
        let geometric = loss.total();
        let verts = vec![tx.position, rx.position];
        let occ = static_occlusion(self.scene, &verts);
        if occ.is_blocked() {
            return (None, geometric);
        }
        let mut p = PropagationPath::new(PathKind::Los, verts, loss, tx.antenna_gain_db + rx.antenna_gain_db);
        p.add_penetration(occ.loss_db());
        (Some(p), geometric)
    }

    fn specular_point(r: &Reflector, src: Vec3, dst: Vec3) -> Option<Vec3> {
        let sa = r.rect.signed_distance(src);
        let sb = r.rect.signed_distance(dst);
        if !(sa.abs() > ENDPOINT_EPS && sb.abs() > ENDPOINT_EPS && sa.signum() == sb.signum()) {
            return None;
        }
        let image = src.reflect_across(r.rect.origin, r.normal);
        let p = r.rect.line_intersection(image, dst)?;
        r.rect.contains_projection(p, 0.0).then_some(p)
    }

    fn reflected_path(&self, tx: &Node, rx: &Node, chain: &[&Reflector]) -> Result<Option<PropagationPath>> {
        // Images of the TX through the chain, then back-propagate from the RX.
        let mut images = vec![tx.position];
        for r in chain {
            let last = images[images.len() - 1];
            images.push(last.reflect_across(r.rect.origin, r.normal));
        }
        let mut points = vec![Vec3::ZERO; chain.len()];
        let mut target = rx.position;
        for k in (0..chain.len()).rev() {
            let r = chain[k];
            let p = match r.rect.line_intersection(images[k + 1], target) {
                Some(p) if r.rect.contains_projection(p, 0.0) => p,
                _ => return Ok(None),
            };
            points[k] = p;
            target = p;
        }
        let mut verts = Vec::with_capacity(chain.len() + 2);
        verts.push(tx.position);
        verts.extend_from_slice(&points);
        verts.push(rx.position);
        // Each bounce must have both neighbours strictly on its front side.
        for (k, r) in chain.iter().enumerate() {
            let (prev, next) = (verts[k], verts[k + 2]);
            if Self::specular_point(r, prev, next).is_none() {
                return Ok(None);
            }
            if verts[k].distance(verts[k + 1]) <= ENDPOINT_EPS {
                return Ok(None);
            }
        }
        let occ = static_occlusion(self.scene, &verts);
        if occ.is_blocked() {
            return Ok(None);
        }
        let f = self.scene.frequency_hz;
        let mut reflection_db = 0.0;
        let mut angles = Vec::with_capacity(chain.len());
        for (k, r) in chain.iter().enumerate() {
            let theta = incidence(verts[k], verts[k + 1], r.normal);
            reflection_db += reflect(&r.material, f, theta)?.loss_db(self.options.polarization);
            angles.push(theta);
        }
        let length: f64 = verts.windows(2).map(|w| w[0].distance(w[1])).sum();
        let loss = LossBreakdown {
            spreading_db: self.friis(length),
            reflection_db,
            atmospheric_db: self.atm(length),
            penetration_db: occ.loss_db(),
        };
        let mut p = PropagationPath::new(PathKind::Reflected, verts, loss, tx.antenna_gain_db + rx.antenna_gain_db);
        p.incidence_angles = angles;
        p.surface_ids = chain.iter().map(|r| r.id.clone()).collect();
        Ok(Some(p))
    }

    fn reflection_candidates(&self, tx: &Node, rx: &Node) -> Result<Vec<PropagationPath>> {
        let mut out = Vec::new();
        for r in &self.reflectors {
            if let Some(p) = self.reflected_path(tx, rx, &[r])? {
                out.push(p);
            }
        }
        if self.options.max_order >= 2 {
            for (i, r1) in self.reflectors.iter().enumerate() {
                for (j, r2) in self.reflectors.iter().enumerate() {
                    if i != j {
                        if let Some(p) = self.reflected_path(tx, rx, &[r1, r2])? {
                            out.push(p);
                        }
                    }
                }
            }
        }
        sort_by_loss(&mut out);
        Ok(out)
    }

    /// RIS link loss (gain-inclusive, no atmosphere) and geometry, ignoring
    /// occlusion. `None` when TX or RX is behind the panel.
    pub fn ris_link(&self, tx: &Node, rx: &Node, panel: &RisPanel) -> Result<Option<(LinkGeometry, RisLink)>> {
        let frame = panel.frame()?;
        let (zt, zr) = ((tx.position - panel.center).dot(frame.n), (rx.position - panel.center).dot(frame.n));
        if !(zt > ENDPOINT_EPS && zr > ENDPOINT_EPS) {
            return Ok(None);
        }
        let lambda = self.wavelength;
        let geom = LinkGeometry::new(panel, tx.position, rx.position, lambda)?;
        let region = classify_field_region_with(panel, geom.d1, geom.d2, lambda, self.options.field_rule);
        let (gt, gr) = (tx.antenna_gain_db, rx.antenna_gain_db);
        let pl_budget = match region {
            FieldRegion::Far => pl_far_beam(panel, geom.d1, geom.d2, geom.theta_t, geom.theta_r, lambda, gt, gr, panel.amplitude),
            FieldRegion::Near if panel.phase_bits > 0 => {
                let prof = synthesize_phase_profile(panel, tx.position, rx.position, lambda, panel.phase_bits)?;
                pl_general(&geom, &prof.reflection(panel.amplitude), gt, gr)?
            }
            FieldRegion::Near => pl_near_beam(&geom, gt, gr, panel.amplitude),
        };
        let link = RisLink {
            region,
            d1: geom.d1,
            d2: geom.d2,
            theta_t: geom.theta_t,
            theta_r: geom.theta_r,
            fraunhofer_distance: panel.fraunhofer_distance(lambda),
            pl_budget,
        };
        Ok(Some((geom, link)))
    }

    fn ris_path(&self, tx: &Node, rx: &Node, panel: &RisPanel, link: RisLink) -> PropagationPath {
        let gains = tx.antenna_gain_db + rx.antenna_gain_db;
        let loss = LossBreakdown {
            spreading_db: link.pl_budget + gains,
            atmospheric_db: self.atm(link.d1 + link.d2),
            ..Default::default()
        };
        let mut p = PropagationPath::new(PathKind::RisRelay, vec![tx.position, panel.center, rx.position], loss, gains);
        p.ris_id = Some(panel.id.clone());
        p.ris_link = Some(link);
        p
    }

    fn ris_candidate(&self, tx: &Node, rx: &Node, panel: &RisPanel) -> Result<Option<PropagationPath>> {
        let verts = [tx.position, panel.center, rx.position];
        let occ = static_occlusion(self.scene, &verts);
        if occ.is_blocked() {
            return Ok(None);
        }
        let Some((_, link)) = self.ris_link(tx, rx, panel)? else {
            return Ok(None);
        };
        if !link.pl_budget.is_finite() {
            return Ok(None);
        }
        let mut p = self.ris_path(tx, rx, panel, link);
        p.add_penetration(occ.loss_db());
        Ok(Some(p))
    }

    /// All static-scene candidates between `tx` and `rx`.
    pub fn candidates(&self, tx: &Node, rx: &Node) -> Result<Candidates> {
        let (los, los_geometric_raw) = self.los_candidate(tx, rx);
        let reflections = self.reflection_candidates(tx, rx)?;
        let ris = self
            .scene
            .ris
            .iter()
            .map(|p| self.ris_candidate(tx, rx, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Candidates {
            los,
            los_geometric_raw,
            reflections,
            ris,
        })
    }

    /// Traces every path for one view.
    pub fn trace(&self, view: &SceneView<'_>, tx: &Node, rx: &Node) -> Result<TraceResult> {
        Ok(self.candidates(tx, rx)?.resolve(view))
    }

    pub fn trace_los(&self, view: &SceneView<'_>, tx: &Node, rx: &Node) -> Option<PropagationPath> {
        self.los_candidate(tx, rx).0.and_then(|p| survive(&p, view))
    }

    pub fn trace_reflections(&self, view: &SceneView<'_>, tx: &Node, rx: &Node) -> Result<Vec<PropagationPath>> {
        let mut v: Vec<_> = self
            .reflection_candidates(tx, rx)?
            .iter()
            .filter_map(|p| survive(p, view))
            .collect();
        sort_by_loss(&mut v);
        Ok(v)
    }

    pub fn trace_ris_link(
        &self,
        view: &SceneView<'_>,
        tx: &Node,
        rx: &Node,
        panel: &RisPanel,
    ) -> Result<Option<(LinkGeometry, PropagationPath)>> {
        let verts = [tx.position, panel.center, rx.position];
        let occ = static_occlusion(self.scene, &verts);
        if occ.is_blocked() {
            return Ok(None);
        }
        let Some((geom, link)) = self.ris_link(tx, rx, panel)? else {
            return Ok(None);
        };
        let mut p = self.ris_path(tx, rx, panel, link);
        p.add_penetration(occ.loss_db());
        Ok(survive(&p, view).map(|p| (geom, p)))
    }
}

/// Convenience wrappers with default options.
pub fn trace_los(view: &SceneView<'_>, tx: &Node, rx: &Node) -> Result<Option<PropagationPath>> {
    Ok(Tracer::new(view.scene, TraceOptions::default())?.trace_los(view, tx, rx))
}

pub fn trace_reflections(view: &SceneView<'_>, tx: &Node, rx: &Node, max_order: u8) -> Result<Vec<PropagationPath>> {
    let opts = TraceOptions {
        max_order,
        ..Default::default()
    };
    Tracer::new(view.scene, opts)?.trace_reflections(view, tx, rx)
}

pub fn trace_ris_link(
    view: &SceneView<'_>,
    tx: &Node,
    rx: &Node,
    panel: &RisPanel,
) -> Result<Option<(LinkGeometry, PropagationPath)>> {
    Tracer::new(view.scene, TraceOptions::default())?.trace_ris_link(view, tx, rx, panel)
}
