//! Plane primitives: disks, arcs, segments, polygons, rhombs, and the
//! distance queries the walk-on-spheres engine relies on.
//!
//! Points are plain [`Complex64`] values; every constructor rejects
//! non-finite input.

mod contour;
mod rhomb;

pub use contour::{contour_integral, gauss_legendre, Contour, ContourIntegral, Piece, QuadratureOptions};
pub use rhomb::{radial_graph_decompose, rhombs_from_arcs, ArcRhomb, LipschitzBounds, RadialGraphs, Rhomb};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{domain, geometry, Error, Result};

/// A point of the complex plane.
pub type CPoint = Complex64;

pub(crate) fn finite(z: CPoint) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub(crate) fn check_finite(z: CPoint, what: &str) -> Result<()> {
    if finite(z) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{what} is not finite: {z}")))
    }
}

/// Normalizes an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Open disk `D(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: CPoint,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: CPoint, radius: f64) -> Result<Self> {
        check_finite(center, "disk center")?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    /// Open-disk membership.
    pub fn contains(&self, z: CPoint) -> bool {
        (z - self.center).norm() < self.radius
    }

    pub fn contains_closed(&self, z: CPoint) -> bool {
        (z - self.center).norm() <= self.radius
    }

    /// `|z - c| - r`; negative inside.
    pub fn signed_distance(&self, z: CPoint) -> f64 {
        (z - self.center).norm() - self.radius
    }

    pub fn boundary_distance(&self, z: CPoint) -> f64 {
        self.signed_distance(z).abs()
    }

    pub fn point_at(&self, angle: f64) -> CPoint {
        self.center + Complex64::from_polar(self.radius, angle)
    }

    /// True when the closed disks do not meet.
    pub fn is_disjoint(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() > self.radius + other.radius
    }

    /// True when `other` (closed) lies inside this open disk.
    pub fn contains_disk(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() + other.radius < self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

/// Counterclockwise circular arc stored as `(start, sweep)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircArc {
    pub center: CPoint,
    pub radius: f64,
    pub start: f64,
    pub sweep: f64,
}

impl CircArc {
    /// Arc from `start_angle` to `end_angle`, counterclockwise.
    pub fn new(center: CPoint, radius: f64, start_angle: f64, end_angle: f64) -> Result<Self> {
        Self::from_start_sweep(center, radius, start_angle, end_angle - start_angle)
    }

    pub fn from_start_sweep(center: CPoint, radius: f64, start: f64, sweep: f64) -> Result<Self> {
        check_finite(center, "arc center")?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!("arc radius must be positive, got {radius}")));
        }
        if !(sweep > 0.0 && sweep <= TAU) || !start.is_finite() {
            return Err(Error::Parameter(format!("arc sweep must lie in (0, 2π], got {sweep}")));
        }
        Ok(Self { center, radius, start, sweep })
    }

    /// Arc of the given sweep centered on the direction `mid_angle`.
    pub fn centered(center: CPoint, radius: f64, mid_angle: f64, sweep: f64) -> Result<Self> {
        Self::from_start_sweep(center, radius, mid_angle - sweep / 2.0, sweep)
    }

    pub fn end_angle(&self) -> f64 {
        self.start + self.sweep
    }

    pub fn mid_angle(&self) -> f64 {
        self.start + self.sweep / 2.0
    }

    pub fn length(&self) -> f64 {
        self.radius * self.sweep
    }

    pub fn is_full_circle(&self) -> bool {
        self.sweep >= TAU
    }

    pub fn start_point(&self) -> CPoint {
        self.point_at(0.0)
    }

    pub fn end_point(&self) -> CPoint {
        self.point_at(1.0)
    }

    /// Point at parameter `t ∈ [0, 1]`.
    pub fn point_at(&self, t: f64) -> CPoint {
        self.center + Complex64::from_polar(self.radius, self.start + t * self.sweep)
    }

    /// Counterclockwise offset of `theta` from the start, in `[0, 2π)`.
    pub fn offset_of(&self, theta: f64) -> f64 {
        wrap_angle(theta - self.start)
    }

    /// Strict angular containment; the endpoints are excluded.
    pub fn contains_angle(&self, theta: f64) -> bool {
        if self.is_full_circle() {
            return true;
        }
        let off = self.offset_of(theta);
        off > 0.0 && off < self.sweep
    }

    /// Angular containment including the endpoints.
    pub fn contains_angle_closed(&self, theta: f64) -> bool {
        if self.is_full_circle() {
            return true;
        }
        let off = self.offset_of(theta);
        off <= self.sweep || off >= TAU - 1e-15
    }

    /// Distance from `z` to the arc as a point set.
    pub fn distance(&self, z: CPoint) -> f64 {
        let w = z - self.center;
        if w.norm() > 0.0 && self.contains_angle_closed(w.arg()) {
            (w.norm() - self.radius).abs()
        } else if w.norm() == 0.0 {
            self.radius
        } else {
            (z - self.start_point()).norm().min((z - self.end_point()).norm())
        }
    }
}

/// Closed segment `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: CPoint,
    pub b: CPoint,
}

impl Segment {
    pub fn new(a: CPoint, b: CPoint) -> Result<Self> {
        check_finite(a, "segment endpoint")?;
        check_finite(b, "segment endpoint")?;
        if a == b {
            return geometry("segment endpoints coincide");
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn nearest_point(&self, z: CPoint) -> CPoint {
        nearest_on_segment(self.a, self.b, z)
    }

    pub fn distance(&self, z: CPoint) -> f64 {
        (z - self.nearest_point(z)).norm()
    }
}

pub(crate) fn nearest_on_segment(a: CPoint, b: CPoint, z: CPoint) -> CPoint {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = ((z - a) * d.conj()).re / len2;
    a + d * t.clamp(0.0, 1.0)
}

pub(crate) fn segment_distance(a: CPoint, b: CPoint, z: CPoint) -> f64 {
    (z - nearest_on_segment(a, b, z)).norm()
}

fn cross(u: CPoint, v: CPoint) -> f64 {
    u.re * v.im - u.im * v.re
}

/// Distance between two closed segments (zero when they meet).
pub(crate) fn segment_segment_distance(a: CPoint, b: CPoint, c: CPoint, d: CPoint) -> f64 {
    let o1 = cross(b - a, c - a);
    let o2 = cross(b - a, d - a);
    let o3 = cross(d - c, a - c);
    let o4 = cross(d - c, b - c);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return 0.0;
    }
    segment_distance(a, b, c)
        .min(segment_distance(a, b, d))
        .min(segment_distance(c, d, a))
        .min(segment_distance(c, d, b))
}

/// Closed simple polygon given by its vertices (either orientation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<CPoint>,
}

impl Polygon {
    pub fn new(vertices: Vec<CPoint>) -> Result<Self> {
        if vertices.len() < 3 {
            return geometry("polygon needs at least three vertices");
        }
        for v in &vertices {
            check_finite(*v, "polygon vertex")?;
        }
        let poly = Self { vertices };
        if poly.signed_area().abs() == 0.0 {
            return geometry("polygon is degenerate");
        }
        Ok(poly)
    }

    /// Rectangle of half-width `half_width` around the segment `[a, b]`.
    pub fn fattened_segment(a: CPoint, b: CPoint, half_width: f64) -> Result<Self> {
        let seg = Segment::new(a, b)?;
        if !(half_width > 0.0) {
            return Err(Error::Parameter("fattened segment needs positive width".into()));
        }
        let n = (seg.b - seg.a) / seg.length() * Complex64::i() * half_width;
        Self::new(vec![a - n, b - n, b + n, a + n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (CPoint, CPoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area, positive for counterclockwise order.
    pub fn signed_area(&self) -> f64 {
        self.edges().map(|(p, q)| cross(p, q)).sum::<f64>() / 2.0
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(p, q)| (q - p).norm()).sum()
    }

    /// Closed membership (boundary counts as inside).
    pub fn contains(&self, z: CPoint) -> bool {
        if self.boundary_distance(z) == 0.0 {
            return true;
        }
        let mut inside = false;
        for (p, q) in self.edges() {
            if (p.im > z.im) != (q.im > z.im) {
                let x = p.re + (z.im - p.im) / (q.im - p.im) * (q.re - p.re);
                if z.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn boundary_distance(&self, z: CPoint) -> f64 {
        self.edges()
            .map(|(p, q)| segment_distance(p, q, z))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn nearest_boundary_point(&self, z: CPoint) -> CPoint {
        let mut best = self.vertices[0];
        let mut best_d = f64::INFINITY;
        for (p, q) in self.edges() {
            let c = nearest_on_segment(p, q, z);
            let d = (c - z).norm();
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        best
    }

    pub fn bounding_circle(&self) -> (CPoint, f64) {
        let n = self.vertices.len() as f64;
        let c = self.vertices.iter().sum::<CPoint>() / n;
        let r = self.vertices.iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
        (c, r)
    }
}

/// A compact obstacle removed from a disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstacle {
    Disk(Disk),
    Rhomb(Rhomb),
    Polygon(Polygon),
    Segment(Segment),
}

impl Obstacle {
    fn polygon_view(&self) -> Option<Polygon> {
        match self {
            Obstacle::Rhomb(r) => Some(r.to_polygon()),
            Obstacle::Polygon(p) => Some(p.clone()),
            _ => None,
        }
    }

    /// Closed membership.
    pub fn contains(&self, z: CPoint) -> bool {
        match self {
            Obstacle::Disk(d) => d.contains_closed(z),
            Obstacle::Rhomb(r) => r.to_polygon().contains(z),
            Obstacle::Polygon(p) => p.contains(z),
            Obstacle::Segment(s) => s.distance(z) == 0.0,
        }
    }

    pub fn boundary_distance(&self, z: CPoint) -> f64 {
        match self {
            Obstacle::Disk(d) => d.boundary_distance(z),
            Obstacle::Rhomb(r) => r.to_polygon().boundary_distance(z),
            Obstacle::Polygon(p) => p.boundary_distance(z),
            Obstacle::Segment(s) => s.distance(z),
        }
    }

    pub fn nearest_boundary_point(&self, z: CPoint) -> CPoint {
        match self {
            Obstacle::Disk(d) => {
                let w = z - d.center;
                if w.norm() == 0.0 {
                    d.point_at(0.0)
                } else {
                    d.center + w / w.norm() * d.radius
                }
            }
            Obstacle::Rhomb(r) => r.to_polygon().nearest_boundary_point(z),
            Obstacle::Polygon(p) => p.nearest_boundary_point(z),
            Obstacle::Segment(s) => s.nearest_point(z),
        }
    }

    /// Distance from `z` to the filled obstacle (zero inside).
    pub fn distance_to_filled(&self, z: CPoint) -> f64 {
        if self.contains(z) {
            0.0
        } else {
            self.boundary_distance(z)
        }
    }

    pub fn bounding_circle(&self) -> (CPoint, f64) {
        match self {
            Obstacle::Disk(d) => (d.center, d.radius),
            Obstacle::Segment(s) => ((s.a + s.b) / 2.0, s.length() / 2.0),
            other => other.polygon_view().expect("polygonal").bounding_circle(),
        }
    }

    fn edge_list(&self) -> Vec<(CPoint, CPoint)> {
        match self {
            Obstacle::Segment(s) => vec![(s.a, s.b)],
            other => other.polygon_view().map(|p| p.edges().collect()).unwrap_or_default(),
        }
    }

    fn vertex_list(&self) -> Vec<CPoint> {
        match self {
            Obstacle::Segment(s) => vec![s.a, s.b],
            other => other.polygon_view().map(|p| p.vertices).unwrap_or_default(),
        }
    }

    /// True when the two closed obstacles do not meet.
    pub fn is_disjoint(&self, other: &Obstacle) -> bool {
        match (self, other) {
            (Obstacle::Disk(a), Obstacle::Disk(b)) => a.is_disjoint(b),
            (Obstacle::Disk(d), o) | (o, Obstacle::Disk(d)) => o.distance_to_filled(d.center) > d.radius,
            (a, b) => {
                let ea = a.edge_list();
                let eb = b.edge_list();
                let edges_apart = ea.iter().all(|&(p, q)| {
                    eb.iter().all(|&(r, s)| segment_segment_distance(p, q, r, s) > 0.0)
                });
                edges_apart
                    && a.vertex_list().iter().all(|&v| !b.contains(v))
                    && b.vertex_list().iter().all(|&v| !a.contains(v))
            }
        }
    }

    /// True when the closed obstacle lies inside the open disk.
    pub fn inside_disk(&self, outer: &Disk) -> bool {
        match self {
            Obstacle::Disk(d) => outer.contains_disk(d),
            other => other.vertex_list().iter().all(|&v| outer.contains(v)),
        }
    }
}

/// Finite union of open disks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiskUnion {
    pub disks: Vec<Disk>,
}

impl DiskUnion {
    pub fn new(disks: Vec<Disk>) -> Self {
        Self { disks }
    }

    /// Builds the union and checks that the closed disks are pairwise disjoint.
    pub fn disjoint(disks: Vec<Disk>) -> Result<Self> {
        for i in 0..disks.len() {
            for j in i + 1..disks.len() {
                if !disks[i].is_disjoint(&disks[j]) {
                    return geometry(format!("disks {i} and {j} overlap"));
                }
            }
        }
        Ok(Self { disks })
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.disks.len()
    }

    pub fn contains(&self, z: CPoint) -> bool {
        self.disks.iter().any(|d| d.contains(z))
    }

    pub fn contains_closed(&self, z: CPoint) -> bool {
        self.disks.iter().any(|d| d.contains_closed(z))
    }

    /// True when the circle `∂D(center, radius)` meets no closed disk of the union.
    pub fn circle_avoids(&self, center: CPoint, radius: f64) -> bool {
        self.disks
            .iter()
            .all(|d| ((d.center - center).norm() - radius).abs() > d.radius)
    }

    /// Distance from `z` to the union (zero inside).
    pub fn distance(&self, z: CPoint) -> f64 {
        self.disks
            .iter()
            .map(|d| d.signed_distance(z).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Distance from `z` to the nearest boundary among the outer circle and the obstacles.
pub fn distance_to_set(z: CPoint, obstacles: &[Obstacle], outer: &Disk) -> Result<f64> {
    check_finite(z, "query point")?;
    if !outer.contains(z) {
        return domain(format!("{z} is not inside the outer disk"));
    }
    let mut best = outer.radius - (z - outer.center).norm();
    for (i, ob) in obstacles.iter().enumerate() {
        if ob.contains(z) {
            return domain(format!("{z} lies inside obstacle {i}"));
        }
        best = best.min(ob.boundary_distance(z));
    }
    Ok(best)
}
