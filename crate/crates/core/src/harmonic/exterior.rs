//! Harmonic measure of `∂K` in `Ĉ ∖ (K ∪ Kₙ)` through the inversion `w = 1/(z − z₀)`.

use serde::{Deserialize, Serialize};

use super::wos::{Component, WalkDomain};
use super::{hm_wos_in, Exhaustion, HMEstimate, Target, WoSConfig};
use crate::error::{domain, Error, Result};
use crate::geometry::{check_finite, segment_distance, CPoint, CircArc, Disk, Obstacle};

#[derive(Clone, Debug, PartialEq)]
enum EdgeImage {
    Arc(CircArc),
    Segment(CPoint, CPoint),
}

impl EdgeImage {
    fn distance(&self, w: CPoint) -> f64 {
        match self {
            EdgeImage::Arc(a) => a.distance(w),
            EdgeImage::Segment(a, b) => segment_distance(*a, *b, w),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Image {
    Disk(Disk),
    Edges(Vec<EdgeImage>),
}

fn cross(a: CPoint, b: CPoint) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Image of the segment `[u, v]` (coordinates relative to the pole) under `w = 1/z`.
fn edge_image(u: CPoint, v: CPoint) -> EdgeImage {
    let a = 1.0 / u;
    let c = 1.0 / v;
    if cross(u, v).abs() <= 1e-14 * u.norm() * v.norm() {
        return EdgeImage::Segment(a, c);
    }
    let b = 1.0 / ((u + v) / 2.0);
    // circumcenter of a, b, c
    let (ab, ac) = (b - a, c - a);
    let d = 2.0 * cross(ab, ac);
    let center = a + CPoint::new(
        ac.im * ab.norm_sqr() - ab.im * ac.norm_sqr(),
        ab.re * ac.norm_sqr() - ac.re * ab.norm_sqr(),
    ) / d;
    let radius = (a - center).norm();
    let ang = |z: CPoint| (z - center).arg();
    let (ta, tb, tc) = (ang(a), ang(b), ang(c));
    let wrap = crate::geometry::wrap_angle;
    let arc = if wrap(tb - ta) < wrap(tc - ta) {
        CircArc { center, radius, start: ta, sweep: wrap(tc - ta) }
    } else {
        CircArc { center, radius, start: tc, sweep: wrap(ta - tc) }
    };
    EdgeImage::Arc(arc)
}

/// The exterior of a disk `K` minus obstacles, seen through `w = 1/(z − z₀)`
/// with `z₀` the center of `K`: a bounded domain inside `|w| < 1/R` whose
/// outer circle is the image of `∂K`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvertedDomain {
    pub k: Disk,
    pub obstacles: Vec<Obstacle>,
    images: Vec<Image>,
}

impl InvertedDomain {
    pub fn new(k: Disk, obstacles: Vec<Obstacle>) -> Result<Self> {
        let kob = Obstacle::Disk(k);
        for (i, ob) in obstacles.iter().enumerate() {
            if !ob.is_disjoint(&kob) {
                return domain(format!("obstacle {i} meets K"));
            }
            for (j, other) in obstacles[..i].iter().enumerate() {
                if !ob.is_disjoint(other) {
                    return domain(format!("obstacles {j} and {i} meet"));
                }
            }
        }
        let z0 = k.center;
        let images = obstacles
            .iter()
            .map(|ob| match ob {
                Obstacle::Disk(d) => {
                    let cp = d.center - z0;
                    let den = cp.norm_sqr() - d.radius * d.radius;
                    Image::Disk(Disk { center: cp.conj() / den, radius: d.radius / den })
                }
                Obstacle::Segment(s) => Image::Edges(vec![edge_image(s.a - z0, s.b - z0)]),
                Obstacle::Rhomb(r) => Image::Edges(r.to_polygon().edges().map(|(a, b)| edge_image(a - z0, b - z0)).collect()),
                Obstacle::Polygon(p) => Image::Edges(p.edges().map(|(a, b)| edge_image(a - z0, b - z0)).collect()),
            })
            .collect();
        Ok(Self { k, obstacles, images })
    }

    pub fn to_w(&self, z: CPoint) -> CPoint {
        1.0 / (z - self.k.center)
    }

    pub fn to_z(&self, w: CPoint) -> CPoint {
        self.k.center + 1.0 / w
    }
}

impl WalkDomain for InvertedDomain {
    fn outer(&self) -> Disk {
        Disk { center: CPoint::new(0.0, 0.0), radius: 1.0 / self.k.radius }
    }

    fn obstacle_count(&self) -> usize {
        self.images.len()
    }

    fn contains(&self, w: CPoint) -> bool {
        if w.norm() >= 1.0 / self.k.radius {
            return false;
        }
        if w.norm() == 0.0 {
            return true;
        }
        let z = self.to_z(w);
        !self.obstacles.iter().any(|o| o.contains(z))
    }

    fn nearest(&self, w: CPoint) -> (f64, Component) {
        let mut best = 1.0 / self.k.radius - w.norm();
        let mut comp = Component::Outer;
        for (i, im) in self.images.iter().enumerate() {
            let d = match im {
                Image::Disk(d) => d.boundary_distance(w),
                Image::Edges(e) => e.iter().map(|x| x.distance(w)).fold(f64::INFINITY, f64::min),
            };
            if d < best {
                best = d;
                comp = Component::Obstacle(i);
            }
        }
        (best, comp)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub stage: usize,
    pub estimate: HMEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// `hₙ₊₁ ≤ hₙ + 3·√(σₙ² + σₙ₊₁²)` for every `n`.
    pub monotone_pass: bool,
    /// Final value below the threshold.
    pub decay_pass: bool,
    pub threshold: f64,
}

/// `hₙ(p) = ω(p, ∂K, Ĉ ∖ (K ∪ Kₙ))` for each stage, by walk-on-spheres in
/// the inverted domain. Without stages the single value is for `Ĉ ∖ K`.
pub fn exterior_hm_decay(k: &Disk, stages: &Exhaustion, p: CPoint, cfg: &WoSConfig, threshold: f64) -> Result<DecayReport> {
    check_finite(p, "evaluation point")?;
    if k.contains_closed(p) {
        return domain("p lies in K");
    }
    let list: Vec<Vec<Obstacle>> = if stages.is_empty() { vec![Vec::new()] } else { stages.stages.clone() };
    let mut rows = Vec::with_capacity(list.len());
    for (n, obs) in list.into_iter().enumerate() {
        if obs.iter().any(|o| o.contains(p)) {
            return domain(format!("p lies in an obstacle of stage {}", n + 1));
        }
        let dom = InvertedDomain::new(*k, obs)?;
        let seed = cfg.seed.wrapping_add(n as u64);
        let est = hm_wos_in(&dom, &Target::Outer, dom.to_w(p), &WoSConfig { seed, ..*cfg })
            .map_err(|e| match e {
                Error::Precondition(m) => Error::Domain(m),
                other => other,
            })?;
        rows.push(DecayRow { stage: n + 1, estimate: est });
    }
    let monotone_pass = rows.windows(2).all(|w| {
        let (a, b) = (&w[0].estimate, &w[1].estimate);
        b.value <= a.value + 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
    });
    let last = rows.last().expect("at least one row").estimate.value;
    Ok(DecayReport { rows, monotone_pass, decay_pass: last < threshold, threshold })
}

/// Exact `ω(z, ∂K, Ĉ ∖ (K̄ ∪ D̄))` for two disjoint closed disks.
///
/// A Möbius map sending the common symmetric points to `0` and `∞` makes
/// the circles concentric, where the measure is a normalized `log|·|`.
pub fn two_circle_exterior_measure(k: &Disk, other: &Disk, z: CPoint) -> Result<f64> {
    if !k.is_disjoint(other) {
        return domain("disks meet");
    }
    let off = other.center - k.center;
    let rot = CPoint::from_polar(1.0, -off.arg());
    let c = off.norm() / k.radius;
    let r = other.radius / k.radius;
    let s = (1.0 + c * c - r * r) / c;
    let x1 = (s - (s * s - 4.0).sqrt()) / 2.0;
    let x2 = 1.0 / x1;
    let m = |zeta: CPoint| ((zeta - x1) / (zeta - x2)).norm().ln();
    let m1 = m(CPoint::new(1.0, 0.0));
    let m2 = m(CPoint::new(c + r, 0.0));
    let lz = if z.is_finite() {
        let zeta = (z - k.center) / k.radius * rot;
        if zeta.norm() <= 1.0 || (zeta - c).norm() <= r {
            return domain("z is not in the exterior domain");
        }
        m(zeta)
    } else {
        0.0
    };
    Ok((lz - m2) / (m1 - m2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;
    use crate::harmonic::{hm_wos, SlitDomain};

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    #[test]
    fn disk_image_is_exact() {
        let k = Disk::new(c(0.5, 0.5), 0.5).unwrap();
        let d = Disk::new(c(2.0, -1.0), 0.4).unwrap();
        let dom = InvertedDomain::new(k, vec![Obstacle::Disk(d)]).unwrap();
        for t in 0..16 {
            let z = d.point_at(t as f64 * 0.4);
            let (dist, comp) = dom.nearest(dom.to_w(z));
            assert!(dist < 1e-12, "{dist}");
            assert_eq!(comp, Component::Obstacle(0));
        }
        let (dist, comp) = dom.nearest(dom.to_w(k.point_at(1.0)));
        assert!(dist < 1e-12);
        assert_eq!(comp, Component::Outer);
    }

    #[test]
    fn polygon_edges_map_to_arcs_through_images() {
        let k = Disk::new(c(0.0, 0.0), 1.0).unwrap();
        let poly = Polygon::fattened_segment(c(1.5, 0.2), c(3.0, 1.0), 0.1).unwrap();
        let dom = InvertedDomain::new(k, vec![Obstacle::Polygon(poly.clone())]).unwrap();
        for (a, b) in poly.edges() {
            for t in [0.0, 0.1, 0.37, 0.5, 0.8, 1.0] {
                let z = a + (b - a) * t;
                assert!(dom.nearest(dom.to_w(z)).0 < 1e-12);
            }
        }
        // a point near but off the polygon maps off the image boundary
        assert!(dom.nearest(dom.to_w(c(2.0, 1.0))).0 > 1e-3);
        assert!(!dom.contains(dom.to_w(c(2.25, 0.6))));
        assert!(dom.contains(dom.to_w(c(2.0, 1.0))));
    }

    #[test]
    fn closed_form_two_circle_measure() {
        let k = Disk::new(c(0.0, 0.0), 1.0).unwrap();
        let d = Disk::new(c(0.0, 3.0), 1.0).unwrap();
        assert!((two_circle_exterior_measure(&k, &d, c(1.0, 0.0) * (1.0 + 1e-12)).unwrap() - 1.0).abs() < 1e-9);
        assert!(two_circle_exterior_measure(&k, &d, c(0.0, 4.0 + 1e-12)).unwrap().abs() < 1e-9);
        // symmetric configuration: the midpoint of the two circles sees equal measure
        let mid = two_circle_exterior_measure(&k, &d, c(0.0, 1.5)).unwrap();
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_stages_give_one() {
        let k = Disk::new(c(0.0, 0.0), 0.5).unwrap();
        let rep = exterior_hm_decay(&k, &Exhaustion::default(), c(1.0, 0.0), &WoSConfig::new(2000, 5), 0.1).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].estimate.value, 1.0);
    }

    #[test]
    fn overlap_is_a_domain_error() {
        let k = Disk::new(c(0.0, 0.0), 0.5).unwrap();
        let stages = Exhaustion::new(vec![vec![Obstacle::Disk(Disk::new(c(0.6, 0.0), 0.2).unwrap())]]).unwrap();
        let e = exterior_hm_decay(&k, &stages, c(2.0, 0.0), &WoSConfig::new(1000, 5), 0.1);
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn inversion_agrees_with_closed_form_and_bounded_run() {
        let k = Disk::new(c(0.0, 0.0), 1.0).unwrap();
        let d = Disk::new(c(2.5, 0.5), 0.8).unwrap();
        let p = c(1.0, 2.0);
        let exact = two_circle_exterior_measure(&k, &d, p).unwrap();
        let stages = Exhaustion::new(vec![vec![Obstacle::Disk(d)]]).unwrap();
        let cfg = WoSConfig::new(40_000, 77);
        let rep = exterior_hm_decay(&k, &stages, p, &cfg, 0.1).unwrap();
        let est = &rep.rows[0].estimate;
        assert!((est.value - exact).abs() <= 3.0 * est.std_error, "{} vs {exact}", est.value);
        // the same inverted geometry as an ordinary slit disk
        let inv = InvertedDomain::new(k, vec![Obstacle::Disk(d)]).unwrap();
        let Image::Disk(img) = inv.images[0].clone() else { unreachable!() };
        let slit = SlitDomain::new(inv.outer(), vec![Obstacle::Disk(img)], "inverted").unwrap();
        let direct = hm_wos(&slit, &Target::Outer, inv.to_w(p), &WoSConfig::new(40_000, 78)).unwrap();
        assert!((direct.value - exact).abs() <= 3.0 * direct.std_error);
    }
}
