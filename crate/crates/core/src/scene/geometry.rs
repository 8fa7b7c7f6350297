//! Vectors, boxes and rectangles, plus the strict-interior occlusion tests.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Intersections closer than this to a segment endpoint are ignored (m).
pub const ENDPOINT_EPS: f64 = 1e-9;

/// Cartesian point or direction in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 1e-15 && n.is_finite()).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    /// Mirror image of `self` across the plane through `origin` with unit `normal`.
    pub fn reflect_across(self, origin: Vec3, normal: Vec3) -> Vec3 {
        self - normal * (2.0 * (self - origin).dot(normal))
    }

    fn lexicographic_gt(self, o: Vec3) -> bool {
        (self.x, self.y, self.z) > (o.x, o.y, o.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite()
            && self.max.is_finite()
            && self.min.x < self.max.x
            && self.min.y < self.max.y
            && self.min.z < self.max.z
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// `other` lies inside `self` (boundaries may touch).
    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|k| {
            other.min.component(k) >= self.min.component(k)
                && other.max.component(k) <= self.max.component(k)
        })
    }

    pub fn contains_point(&self, p: Vec3) -> bool {
        (0..3).all(|k| p.component(k) >= self.min.component(k) && p.component(k) <= self.max.component(k))
    }

    /// Intersection with another box, `None` when the overlap has no volume.
    pub fn intersection(&self, o: &Aabb) -> Option<Aabb> {
        let b = Aabb::new(
            Vec3::new(self.min.x.max(o.min.x), self.min.y.max(o.min.y), self.min.z.max(o.min.z)),
            Vec3::new(self.max.x.min(o.max.x), self.max.y.min(o.max.y), self.max.z.min(o.max.z)),
        );
        b.is_valid().then_some(b)
    }

    pub fn translated(&self, by: Vec3) -> Aabb {
        Aabb::new(self.min + by, self.max + by)
    }

    /// True iff the segment `a`–`b` passes through the open interior of the
    /// box over a positive length, ignoring the parts within
    /// [`ENDPOINT_EPS`] of either endpoint. Grazing a face, edge or corner
    /// does not count.
    pub fn segment_crosses(&self, a: Vec3, b: Vec3) -> bool {
        let (a, b) = canonical(a, b);
        let d = b - a;
        let len = d.norm();
        if len <= 2.0 * ENDPOINT_EPS {
            return false;
        }
        let eps_t = ENDPOINT_EPS / len;
        let mut t0 = eps_t;
        let mut t1 = 1.0 - eps_t;
        for k in 0..3 {
            let o = a.component(k);
            let dir = d.component(k);
            let lo = self.min.component(k);
            let hi = self.max.component(k);
            if dir == 0.0 {
                if !(o > lo && o < hi) {
                    return false;
                }
            } else {
                let (mut ta, mut tb) = ((lo - o) / dir, (hi - o) / dir);
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
                if t0 >= t1 {
                    return false;
                }
            }
        }
        t0 < t1
    }
}

/// Planar rectangle `origin + s·edge_u + t·edge_v`, `s, t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub origin: Vec3,
    pub edge_u: Vec3,
    pub edge_v: Vec3,
}

impl Rect {
    pub fn new(origin: Vec3, edge_u: Vec3, edge_v: Vec3) -> Self {
        Self {
            origin,
            edge_u,
            edge_v,
        }
    }

    /// Edges are non-zero and orthogonal (relative tolerance 1e-9).
    pub fn is_valid(&self) -> bool {
        let (lu, lv) = (self.edge_u.norm(), self.edge_v.norm());
        self.origin.is_finite()
            && lu > 0.0
            && lv > 0.0
            && lu.is_finite()
            && lv.is_finite()
            && self.edge_u.dot(self.edge_v).abs() <= 1e-9 * lu * lv
    }

    /// Unit normal `edge_u × edge_v`.
    pub fn normal(&self) -> Vec3 {
        self.edge_u
            .cross(self.edge_v)
            .normalized()
            .unwrap_or(Vec3::Z)
    }

    pub fn center(&self) -> Vec3 {
        self.origin + (self.edge_u + self.edge_v) * 0.5
    }

    pub fn corners(&self) -> [Vec3; 4] {
        [
            self.origin,
            self.origin + self.edge_u,
            self.origin + self.edge_u + self.edge_v,
            self.origin + self.edge_v,
        ]
    }

    /// In-plane coordinates `(s, t)` of the projection of `p`.
    pub fn local(&self, p: Vec3) -> (f64, f64) {
        let r = p - self.origin;
        (
            r.dot(self.edge_u) / self.edge_u.dot(self.edge_u),
            r.dot(self.edge_v) / self.edge_v.dot(self.edge_v),
        )
    }

    /// Projection of `p` falls inside the rectangle, boundary included
    /// within `tol` (fraction of the edge length).
    pub fn contains_projection(&self, p: Vec3, tol: f64) -> bool {
        let (s, t) = self.local(p);
        s >= -tol && s <= 1.0 + tol && t >= -tol && t <= 1.0 + tol
    }

    /// Signed distance of `p` from the rectangle's plane.
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        (p - self.origin).dot(self.normal())
    }

    /// True iff the segment strictly crosses the plane (both endpoints more
    /// than [`ENDPOINT_EPS`] away, on opposite sides) at a point strictly
    /// inside the rectangle.
    pub fn segment_crosses(&self, a: Vec3, b: Vec3) -> bool {
        let (a, b) = canonical(a, b);
        let sa = self.signed_distance(a);
        let sb = self.signed_distance(b);
        let opposite = (sa > ENDPOINT_EPS && sb < -ENDPOINT_EPS) || (sa < -ENDPOINT_EPS && sb > ENDPOINT_EPS);
        if !opposite {
            return false;
        }
        let p = a + (b - a) * (sa / (sa - sb));
        let (s, t) = self.local(p);
        s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0
    }

    /// Intersection of the line through `a` and `b` with the rectangle's plane.
    pub fn line_intersection(&self, a: Vec3, b: Vec3) -> Option<Vec3> {
        let n = self.normal();
        let denom = (b - a).dot(n);
        if denom.abs() < 1e-15 {
            return None;
        }
        let t = (self.origin - a).dot(n) / denom;
        Some(a + (b - a) * t)
    }
}

/// Order-independent endpoint pair, so that every occlusion test is exactly
/// symmetric in its arguments.
fn canonical(a: Vec3, b: Vec3) -> (Vec3, Vec3) {
    if a.lexicographic_gt(b) {
        (b, a)
    } else {
        (a, b)
    }
}
