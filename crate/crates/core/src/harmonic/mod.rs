//! Harmonic measure in disks and slit disks.
//!
//! Closed forms for arcs of a disk, a walk-on-spheres estimator for general
//! domains, the lower-bound chain for slit disks, and the exterior measure
//! of a compact set under growing obstacle stages.

mod chain;
mod exterior;
mod wos;

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{domain, geometry, Result};
use crate::geometry::{check_finite, CPoint, CircArc, Disk, Obstacle};
use crate::sampling::sunflower;

pub use chain::{
    fine_quarter_bound, hm_lower_bound_check, LowerBoundReport, MarginRow, QuarterBound, QuarterOptions,
    StageMinimum,
};
pub use exterior::{exterior_hm_decay, two_circle_exterior_measure, DecayReport, DecayRow, InvertedDomain};
pub use wos::{hm_wos, hm_wos_in, Component, HMEstimate, Target, WalkDomain, WoSConfig};

/// `D(outer) ∖ ∪ obstacles`, the arena for walk-on-spheres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlitDomain {
    pub outer: Disk,
    pub obstacles: Vec<Obstacle>,
    pub label: String,
}

const FLOOD_RESOLUTION: usize = 128;

impl SlitDomain {
    /// Checks containment, pairwise disjointness and connectivity of the complement.
    pub fn new(outer: Disk, obstacles: Vec<Obstacle>, label: impl Into<String>) -> Result<Self> {
        for (i, ob) in obstacles.iter().enumerate() {
            if !ob.inside_disk(&outer) {
                return geometry(format!("obstacle {i} is not inside the outer disk"));
            }
            for (j, other) in obstacles[..i].iter().enumerate() {
                if !ob.is_disjoint(other) {
                    return geometry(format!("obstacles {j} and {i} meet"));
                }
            }
        }
        let dom = Self { outer, obstacles, label: label.into() };
        if dom.free_components(FLOOD_RESOLUTION) > 1 {
            return geometry("complement of the obstacles is not connected");
        }
        Ok(dom)
    }

    /// Components of free grid cells under 8-connectivity; a cell is blocked
    /// only when it lies entirely inside an obstacle.
    fn free_components(&self, n: usize) -> usize {
        let h = 2.0 * self.outer.radius / n as f64;
        let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
        let lo = self.outer.center - CPoint::new(self.outer.radius, self.outer.radius);
        let center = |i: usize, j: usize| lo + CPoint::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
        let free: Vec<bool> = (0..n * n)
            .map(|k| {
                let z = center(k % n, k / n);
                self.outer.contains(z)
                    && !self
                        .obstacles
                        .iter()
                        .any(|ob| ob.contains(z) && ob.boundary_distance(z) > half_diag)
            })
            .collect();
        let mut seen = vec![false; n * n];
        let mut comps = 0;
        for start in 0..n * n {
            if !free[start] || seen[start] {
                continue;
            }
            comps += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                let (i, j) = ((k % n) as isize, (k / n) as isize);
                for di in -1..=1 {
                    for dj in -1..=1 {
                        let (a, b) = (i + di, j + dj);
                        if a < 0 || b < 0 || a >= n as isize || b >= n as isize {
                            continue;
                        }
                        let m = b as usize * n + a as usize;
                        if free[m] && !seen[m] {
                            seen[m] = true;
                            stack.push(m);
                        }
                    }
                }
            }
        }
        comps
    }
}

/// Nested obstacle stages `K₁ ⊂ K₂ ⊂ …`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Exhaustion {
    pub stages: Vec<Vec<Obstacle>>,
}

/// Sample points covering an obstacle, used for containment checks.
pub(crate) fn obstacle_samples(ob: &Obstacle, n: usize) -> Vec<CPoint> {
    match ob {
        Obstacle::Disk(d) => {
            let mut pts = sunflower(d, n);
            pts.extend((0..n).map(|k| d.point_at(TAU * k as f64 / n as f64)));
            pts
        }
        Obstacle::Segment(s) => (0..=n).map(|k| s.a + (s.b - s.a) * (k as f64 / n as f64)).collect(),
        other => {
            let (c, r) = other.bounding_circle();
            let mut pts: Vec<CPoint> = sunflower(&Disk { center: c, radius: r }, 4 * n)
                .into_iter()
                .filter(|z| other.contains(*z))
                .collect();
            let poly = match other {
                Obstacle::Rhomb(rh) => rh.to_polygon(),
                Obstacle::Polygon(p) => p.clone(),
                _ => unreachable!(),
            };
            for (a, b) in poly.edges() {
                pts.extend((0..8).map(|k| a + (b - a) * (k as f64 / 8.0)));
            }
            pts
        }
    }
}

impl Exhaustion {
    /// Validates that each stage covers the previous one on sample clouds.
    pub fn new(stages: Vec<Vec<Obstacle>>) -> Result<Self> {
        for k in 1..stages.len() {
            for (i, ob) in stages[k - 1].iter().enumerate() {
                for z in obstacle_samples(ob, 64) {
                    if !stages[k].iter().any(|o| o.contains(z)) {
                        return geometry(format!(
                            "stage {} does not cover obstacle {i} of stage {} at {z}",
                            k,
                            k - 1
                        ));
                    }
                }
            }
        }
        Ok(Self { stages })
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }
}

/// Exact harmonic measure of an arc of `∂disk` at `z`.
///
/// With `e₁, e₂` the arc endpoints and `ψ ∈ (0, 2π)` the counterclockwise
/// angle from `e₁ − z` to `e₂ − z`, the measure is `ψ/π − sweep/2π`; this is
/// the arc length fraction after the disk automorphism moving `z` to the center.
pub fn hm_disk_arc_exact(disk: &Disk, arc: &CircArc, z: CPoint) -> Result<f64> {
    check_finite(z, "evaluation point")?;
    let scale = disk.radius.max(disk.center.norm());
    if (arc.center - disk.center).norm() > 1e-12 * scale || (arc.radius - disk.radius).abs() > 1e-12 * disk.radius {
        return geometry("arc does not lie on the disk boundary");
    }
    if !disk.contains(z) {
        return domain(format!("{z} is not strictly inside the disk"));
    }
    if arc.is_full_circle() {
        return Ok(1.0);
    }
    if z == disk.center {
        return Ok(arc.sweep / TAU);
    }
    let e1 = arc.start_point();
    let e2 = arc.end_point();
    let arg = ((e2 - z) / (e1 - z)).arg();
    let psi = if arg > 0.0 { arg } else { arg + TAU };
    Ok((psi / PI - arc.sweep / TAU).clamp(0.0, 1.0))
}

/// `ω·log ε + (1 − ω)·log C`, the two-constant bound for `log|F|`.
pub fn two_constant_bound(eps_n: f64, c: f64, omega_lb: f64) -> f64 {
    omega_lb * eps_n.ln() + (1.0 - omega_lb) * c.ln()
}

/// `−N·ω`, the value carried to the graph by the propagation step.
pub fn propagation_bound(n: f64, omega_lb: f64) -> f64 {
    -n * omega_lb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    #[test]
    fn center_value_is_arc_fraction() {
        let rho = 0.37;
        let d = Disk::new(c(1.0, 0.0), rho).unwrap();
        let j = CircArc::centered(d.center, rho, PI, 5.0 * PI / 6.0).unwrap();
        assert_eq!(hm_disk_arc_exact(&d, &j, d.center).unwrap(), 5.0 / 12.0);
        let full = CircArc::from_start_sweep(d.center, rho, 0.3, TAU).unwrap();
        assert_eq!(hm_disk_arc_exact(&d, &full, c(1.1, 0.1)).unwrap(), 1.0);
    }

    #[test]
    fn half_disk_values() {
        let d = Disk::new(c(0.0, 0.0), 1.0).unwrap();
        let right = CircArc::centered(d.center, 1.0, 0.0, PI).unwrap();
        let v = hm_disk_arc_exact(&d, &right, c(0.5, 0.0)).unwrap();
        // z ↦ (z − 1/2)/(1 − z/2) sends ±i to −0.8 ± 0.6i
        let exact = 1.0 - 0.75f64.atan() / PI;
        assert!((v - exact).abs() < 1e-14, "{v} {exact}");
        assert!(v > 0.5 && v < 1.0);
        let left = CircArc::centered(d.center, 1.0, PI, PI).unwrap();
        assert!((hm_disk_arc_exact(&d, &left, c(0.5, 0.0)).unwrap() + v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_formula_errors() {
        let d = Disk::new(c(0.0, 0.0), 1.0).unwrap();
        let a = CircArc::centered(d.center, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(hm_disk_arc_exact(&d, &a, c(1.0, 0.0)), Err(Error::Domain(_))));
        let off = CircArc::centered(c(0.5, 0.0), 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(hm_disk_arc_exact(&d, &off, c(0.0, 0.0)), Err(Error::Geometry(_))));
    }

    #[test]
    fn closed_form_bounds() {
        let v = two_constant_bound((-8.0f64).exp(), 1.0f64.exp(), 0.25);
        assert_eq!(v, 0.25 * -8.0 + 0.75 * 1.0);
        assert!(v <= -8.0 / 4.0 + 1.0);
        assert_eq!(two_constant_bound(1.0, 5.0, 0.3), 0.7 * 5.0f64.ln());
        assert_eq!(two_constant_bound(0.2, 5.0, 1.0), 0.2f64.ln());
        assert_eq!(propagation_bound(100.0, 0.25), -25.0);
        assert_eq!(propagation_bound(0.0, 0.25), 0.0);
        assert!((propagation_bound(4.0, 0.3) + 1.2).abs() < 1e-15);
        assert_eq!(propagation_bound(4.0, 0.3), -(4.0 * 0.3));
    }

    #[test]
    fn slit_domain_validation() {
        let outer = Disk::new(c(0.0, 0.0), 1.0).unwrap();
        let d1 = Obstacle::Disk(Disk::new(c(0.3, 0.0), 0.2).unwrap());
        let d2 = Obstacle::Disk(Disk::new(c(0.4, 0.0), 0.2).unwrap());
        assert!(SlitDomain::new(outer, vec![d1.clone()], "one").is_ok());
        assert!(SlitDomain::new(outer, vec![d1, d2], "overlap").is_err());
        let outside = Obstacle::Disk(Disk::new(c(0.95, 0.0), 0.2).unwrap());
        assert!(SlitDomain::new(outer, vec![outside], "out").is_err());
    }

    #[test]
    fn exhaustion_must_increase() {
        let small = Obstacle::Disk(Disk::new(c(0.3, 0.0), 0.1).unwrap());
        let big = Obstacle::Disk(Disk::new(c(0.3, 0.0), 0.2).unwrap());
        assert!(Exhaustion::new(vec![vec![small.clone()], vec![big.clone()]]).is_ok());
        assert!(Exhaustion::new(vec![vec![big], vec![small]]).is_err());
    }
}
