//! Rhombs over circle arcs and their radial-graph description.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{check_finite, wrap_angle, CPoint, CircArc, Polygon};
use crate::error::{geometry, Error, Result};

/// Rhomb with two opposite corners `corner_a`, `corner_b`; `aspect` is the
/// ratio of the second diagonal to the first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rhomb {
    pub corner_a: CPoint,
    pub corner_b: CPoint,
    pub aspect: f64,
}

impl Rhomb {
    /// Aspect giving a 45° half-angle at the diagonal corners (a square).
    pub const DEFAULT_ASPECT: f64 = 1.0;

    pub fn new(corner_a: CPoint, corner_b: CPoint, aspect: f64) -> Result<Self> {
        check_finite(corner_a, "rhomb corner")?;
        check_finite(corner_b, "rhomb corner")?;
        if corner_a == corner_b {
            return geometry("rhomb corners coincide");
        }
        if !(aspect > 0.0 && aspect.is_finite()) {
            return Err(Error::Parameter(format!("rhomb aspect must be positive, got {aspect}")));
        }
        Ok(Self { corner_a, corner_b, aspect })
    }

    pub fn first_diagonal(&self) -> f64 {
        (self.corner_b - self.corner_a).norm()
    }

    pub fn second_diagonal(&self) -> f64 {
        self.aspect * self.first_diagonal()
    }

    /// The two side corners: `(left, right)` of the directed diagonal `a → b`.
    pub fn side_corners(&self) -> (CPoint, CPoint) {
        let m = (self.corner_a + self.corner_b) / 2.0;
        let n = (self.corner_b - self.corner_a) * Complex64::i() * (self.aspect / 2.0);
        (m + n, m - n)
    }

    /// Vertices in counterclockwise order starting at `corner_a`.
    pub fn vertices(&self) -> [CPoint; 4] {
        let (left, right) = self.side_corners();
        [self.corner_a, right, self.corner_b, left]
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon { vertices: self.vertices().to_vec() }
    }

    pub fn contains(&self, z: CPoint) -> bool {
        self.to_polygon().contains(z)
    }

    pub fn side_length(&self) -> f64 {
        let d1 = self.first_diagonal() / 2.0;
        let d2 = self.second_diagonal() / 2.0;
        d1.hypot(d2)
    }
}

/// A rhomb built over a unit-circle arc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcRhomb {
    pub arc: CircArc,
    pub rhomb: Rhomb,
    /// Whether the closed rhomb contains its arc (sampled check).
    pub contains_arc: bool,
}

impl ArcRhomb {
    /// Corner outside the unit disk.
    pub fn outer_corner(&self) -> CPoint {
        self.rhomb.side_corners().1
    }

    /// Corner inside the unit disk.
    pub fn inner_corner(&self) -> CPoint {
        self.rhomb.side_corners().0
    }
}

fn on_unit_circle(arc: &CircArc) -> bool {
    arc.center.norm() < 1e-12 && (arc.radius - 1.0).abs() < 1e-12
}

/// One rhomb per unit-circle arc, with the first diagonal joining the arc's endpoints.
pub fn rhombs_from_arcs(arcs: &[CircArc], aspect: f64) -> Result<Vec<ArcRhomb>> {
    for (i, arc) in arcs.iter().enumerate() {
        if !on_unit_circle(arc) {
            return geometry(format!("arc {i} is not on the unit circle"));
        }
        if arc.sweep >= PI {
            return geometry(format!("arc {i} has angular length ≥ π"));
        }
    }
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            if arcs_overlap(&arcs[i], &arcs[j]) {
                return geometry(format!("arcs {i} and {j} overlap"));
            }
        }
    }
    arcs.iter()
        .map(|arc| {
            let rhomb = Rhomb::new(arc.start_point(), arc.end_point(), aspect)?;
            let poly = rhomb.to_polygon();
            let contains_arc = (0..=256).all(|k| poly.contains(arc.point_at(k as f64 / 256.0)));
            Ok(ArcRhomb { arc: *arc, rhomb, contains_arc })
        })
        .collect()
}

fn arcs_overlap(a: &CircArc, b: &CircArc) -> bool {
    let ob = wrap_angle(b.start - a.start);
    let oa = wrap_angle(a.start - b.start);
    ob < a.sweep || oa < b.sweep
}

/// Lipschitz data of a radial map `e^{iφ} ↦ r(φ) e^{iφ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBounds {
    /// Upper constant `C`: `|Tu - Tv| ≤ C |u - v|`.
    pub upper: f64,
    /// Lower constant `c`: `|Tu - Tv| ≥ c |u - v|`.
    pub lower: f64,
}

impl LipschitzBounds {
    fn merge(self, other: LipschitzBounds) -> LipschitzBounds {
        LipschitzBounds { upper: self.upper.max(other.upper), lower: self.lower.min(other.lower) }
    }
}

/// Split of the rhomb boundaries into the parts outside (`plus`) and inside
/// (`minus`) the closed unit disk, each a radial graph over the arcs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGraphs {
    pub plus: Vec<[CPoint; 3]>,
    pub minus: Vec<[CPoint; 3]>,
    pub per_rhomb: Vec<LipschitzBounds>,
    pub bounds: LipschitzBounds,
}

impl RadialGraphs {
    /// Radius `r₊(φ)` of the outer graph of rhomb `l`, or `None` off its arc.
    pub fn r_plus(&self, l: usize, phi: f64) -> Option<f64> {
        radial_hit(&self.plus[l], phi)
    }

    pub fn r_minus(&self, l: usize, phi: f64) -> Option<f64> {
        radial_hit(&self.minus[l], phi)
    }
}

/// Radius at which the ray of angle `phi` meets the two-edge polyline.
fn radial_hit(poly: &[CPoint; 3], phi: f64) -> Option<f64> {
    let dir = Complex64::from_polar(1.0, phi);
    for k in 0..2 {
        let (p, q) = (poly[k], poly[k + 1]);
        let e = q - p;
        let den = dir.re * e.im - dir.im * e.re;
        if den.abs() < 1e-300 {
            continue;
        }
        // solve r·dir = p + s·e
        let r = (p.re * e.im - p.im * e.re) / den;
        let s = (p.re * dir.im - p.im * dir.re) / den;
        if r > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
            return Some(r);
        }
    }
    None
}

const SAMPLES_PER_EDGE: usize = 1000;

fn map_bounds(arc: &CircArc, poly: &[CPoint; 3]) -> Result<(LipschitzBounds, Vec<(CPoint, CPoint)>)> {
    let n = 2 * SAMPLES_PER_EDGE;
    let mut pairs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let phi = arc.start + t * arc.sweep;
        let u = Complex64::from_polar(1.0, phi);
        let r = radial_hit(poly, phi)
            .ok_or_else(|| Error::Geometry(format!("ray at angle {phi} misses the rhomb boundary")))?;
        pairs.push((u, u * r));
    }
    let mut upper: f64 = 0.0;
    let mut lower = f64::INFINITY;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let du = (pairs[i].0 - pairs[j].0).norm();
            let dt = (pairs[i].1 - pairs[j].1).norm();
            let q = dt / du;
            upper = upper.max(q);
            lower = lower.min(q);
        }
    }
    Ok((LipschitzBounds { upper, lower }, pairs))
}

/// Decomposes the boundaries of rhombs over unit-circle arcs into radial
/// graphs and measures the Lipschitz constants of the radial maps by
/// exhaustive pairwise sampling.
pub fn radial_graph_decompose(rhombs: &[ArcRhomb]) -> Result<RadialGraphs> {
    let mut plus = Vec::with_capacity(rhombs.len());
    let mut minus = Vec::with_capacity(rhombs.len());
    let mut per_rhomb = Vec::with_capacity(rhombs.len());
    let mut samples = Vec::new();
    for (i, ar) in rhombs.iter().enumerate() {
        let a = ar.rhomb.corner_a;
        let b = ar.rhomb.corner_b;
        if (a.norm() - 1.0).abs() > 1e-12 || (b.norm() - 1.0).abs() > 1e-12 || !on_unit_circle(&ar.arc) {
            return geometry(format!("rhomb {i} is not built over a unit-circle arc"));
        }
        if ar.arc.sweep <= 0.0 || a == b {
            return geometry(format!("rhomb {i} sits over a degenerate arc"));
        }
        let outer = ar.outer_corner();
        let inner = ar.inner_corner();
        let mid = Complex64::from_polar(1.0, ar.arc.mid_angle());
        if (outer * mid.conj()).re <= 1.0 || (inner * mid.conj()).re <= 0.0 {
            return geometry(format!("rhomb {i} is not a radial graph over its arc"));
        }
        let p = [a, outer, b];
        let m = [a, inner, b];
        let (bp, sp) = map_bounds(&ar.arc, &p)?;
        let (bm, sm) = map_bounds(&ar.arc, &m)?;
        per_rhomb.push(bp.merge(bm));
        samples.push((sp, sm));
        plus.push(p);
        minus.push(m);
    }
    let mut bounds = per_rhomb
        .iter()
        .copied()
        .reduce(LipschitzBounds::merge)
        .unwrap_or(LipschitzBounds { upper: 1.0, lower: 1.0 });
    // cross-rhomb pairs at a coarser stride
    let stride = 50;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            for side in 0..2 {
                let (si, sj) = if side == 0 { (&samples[i].0, &samples[j].0) } else { (&samples[i].1, &samples[j].1) };
                for u in si.iter().step_by(stride) {
                    for v in sj.iter().step_by(stride) {
                        let q = (u.1 - v.1).norm() / (u.0 - v.0).norm();
                        bounds.upper = bounds.upper.max(q);
                        bounds.lower = bounds.lower.min(q);
                    }
                }
            }
        }
    }
    Ok(RadialGraphs { plus, minus, per_rhomb, bounds })
}
