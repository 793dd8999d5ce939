//! Saw-shaped domains near a boundary point: rhombs over unit-circle arcs
//! inside a disk `D(p, r)`, and the Cauchy-integral split over their boundaries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{domain, geometry, Error, Result};
use crate::geometry::{
    contour_integral, gauss_legendre, radial_graph_decompose, rhombs_from_arcs, ArcRhomb, CPoint, CircArc, Contour,
    Disk, LipschitzBounds, Obstacle,
};
use crate::sampling::sunflower;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SawGeometry {
    pub p: CPoint,
    pub ring_radius: f64,
    pub aspect: f64,
    /// Interior angle of each rhomb at its corners on the circle.
    pub cone_angle: f64,
    pub rhombs: Vec<ArcRhomb>,
    /// Lipschitz constants of the radial maps from the arcs onto the rhomb boundaries.
    pub radial: LipschitzBounds,
    /// Measured `min |ξ − z| / |ξ′ − z′|` over boundary points `ξ` and points
    /// `z` of the ring disk outside that rhomb; primes are radial projections.
    pub kappa: f64,
}

const KAPPA_RING_SAMPLES: usize = 3000;
const KAPPA_EDGE_SAMPLES: usize = 64;

impl SawGeometry {
    /// Rhombs over the given arcs; arcs must be ordered by non-increasing length.
    pub fn new(p: CPoint, arcs: &[CircArc], aspect: f64, ring_radius: f64) -> Result<Self> {
        if (p.norm() - 1.0).abs() > 1e-12 {
            return geometry("the saw point must lie on the unit circle");
        }
        if !(ring_radius > 0.0 && ring_radius < 1.0) {
            return Err(Error::Parameter("ring radius must lie in (0, 1)".into()));
        }
        if arcs.windows(2).any(|w| w[1].sweep > w[0].sweep) {
            return Err(Error::Parameter("arcs must be ordered by decreasing length".into()));
        }
        let rhombs = rhombs_from_arcs(arcs, aspect)?;
        let ring = Disk { center: p, radius: ring_radius };
        let obs: Vec<Obstacle> = rhombs.iter().map(|r| Obstacle::Rhomb(r.rhomb)).collect();
        for (i, o) in obs.iter().enumerate() {
            if !o.inside_disk(&ring) {
                return geometry(format!("rhomb {i} leaves the ring disk"));
            }
            for (j, q) in obs[..i].iter().enumerate() {
                if !o.is_disjoint(q) {
                    return geometry(format!("rhombs {j} and {i} meet"));
                }
            }
        }
        let radial = if rhombs.is_empty() {
            LipschitzBounds { upper: 1.0, lower: 1.0 }
        } else {
            radial_graph_decompose(&rhombs)?.bounds
        };
        let mut geom = Self { p, ring_radius, aspect, cone_angle: 2.0 * aspect.atan(), rhombs, radial, kappa: 1.0 };
        geom.kappa = geom.measure_kappa();
        Ok(geom)
    }

    /// `count` arcs alternating on both sides of `p` with lengths
    /// `first·ratioˡ`, smaller ones nearer to `p`, separated by `gap` times
    /// their own length.
    pub fn alternating(
        p_angle: f64,
        count: usize,
        first: f64,
        ratio: f64,
        gap: f64,
        aspect: f64,
        ring_radius: f64,
    ) -> Result<Self> {
        if !(first > 0.0 && ratio > 0.0 && ratio <= 1.0 && gap > 0.0) {
            return Err(Error::Parameter("arc lengths and gaps must be positive with ratio in (0, 1]".into()));
        }
        let sweeps: Vec<f64> = (0..count).map(|l| first * ratio.powi(l as i32)).collect();
        let arcs = (0..count)
            .map(|l| {
                // lengths of this arc and all smaller arcs on the same side, nearer to p
                let nearer: f64 = (l..count).step_by(2).map(|k| sweeps[k] * (1.0 + gap)).sum();
                let offset = nearer - sweeps[l] / 2.0;
                let side = if l % 2 == 0 { 1.0 } else { -1.0 };
                CircArc::centered(CPoint::new(0.0, 0.0), 1.0, p_angle + side * offset, sweeps[l])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(Complex64::from_polar(1.0, p_angle), &arcs, aspect, ring_radius)
    }

    pub fn len(&self) -> usize {
        self.rhombs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhombs.is_empty()
    }

    fn boundary_samples(&self, l: usize) -> Vec<CPoint> {
        let v = self.rhombs[l].rhomb.vertices();
        (0..4)
            .flat_map(|e| {
                let (a, b) = (v[e], v[(e + 1) % 4]);
                (0..KAPPA_EDGE_SAMPLES).map(move |k| a + (b - a) * (k as f64 / KAPPA_EDGE_SAMPLES as f64))
            })
            .collect()
    }

    fn measure_kappa(&self) -> f64 {
        let ring = Disk { center: self.p, radius: self.ring_radius };
        let mut zs = sunflower(&ring, KAPPA_RING_SAMPLES);
        // points hugging each rhomb from outside
        for (l, ar) in self.rhombs.iter().enumerate() {
            let c = (ar.rhomb.corner_a + ar.rhomb.corner_b) / 2.0;
            for xi in self.boundary_samples(l) {
                let d = xi - c;
                zs.push(xi + d / d.norm() * (1e-3 * ar.rhomb.side_length()));
            }
        }
        let mut kappa = f64::INFINITY;
        for (l, ar) in self.rhombs.iter().enumerate() {
            let xs = self.boundary_samples(l);
            for &z in zs.iter().filter(|&&z| !ar.rhomb.contains(z)) {
                let zp = z / z.norm();
                for &xi in &xs {
                    let den = (xi / xi.norm() - zp).norm();
                    if den > 0.0 {
                        kappa = kappa.min((xi - z).norm() / den);
                    }
                }
            }
        }
        if kappa.is_finite() {
            kappa
        } else {
            1.0
        }
    }

    /// Total arc length of the rhombs with index `≥ n`.
    pub fn tail_arc_length(&self, n: usize) -> f64 {
        self.rhombs.iter().skip(n).map(|r| r.arc.sweep).sum()
    }

    fn check_point(&self, z: CPoint) -> Result<()> {
        crate::geometry::check_finite(z, "evaluation point")?;
        if (z - self.p).norm() >= self.ring_radius {
            return domain(format!("{z} lies outside the ring disk"));
        }
        if let Some(l) = self.rhombs.iter().position(|r| r.rhomb.contains(z)) {
            return domain(format!("{z} lies in rhomb {l}"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SawDecomposition {
    /// `(1/2πi)∮_{∂D(p,r)} f(ξ)/(ξ − z) dξ`.
    pub j: Complex64,
    /// The same integral over each rhomb boundary, counterclockwise.
    pub parts: Vec<Complex64>,
    /// `j − Σ parts`.
    pub reconstruction: Complex64,
    /// Sum of the quadrature error estimates, scaled like the values.
    pub error: f64,
}

fn cauchy_integral<F: Fn(CPoint) -> Complex64>(contour: &Contour, f: &F, z: CPoint) -> Result<(Complex64, f64)> {
    let r = contour_integral(contour, |xi| f(xi) / (xi - z))?;
    Ok((r.value / Complex64::new(0.0, TAU), r.error / TAU))
}

pub fn saw_cauchy_decomposition<F>(geom: &SawGeometry, f: F, z: CPoint) -> Result<SawDecomposition>
where
    F: Fn(CPoint) -> Complex64,
{
    geom.check_point(z)?;
    let (j, mut error) = cauchy_integral(&Contour::circle(geom.p, geom.ring_radius)?, &f, z)?;
    let mut parts = Vec::with_capacity(geom.rhombs.len());
    for ar in &geom.rhombs {
        let (v, e) = cauchy_integral(&Contour::rhomb(&ar.rhomb)?, &f, z)?;
        parts.push(v);
        error += e;
    }
    let reconstruction = j - parts.iter().sum::<Complex64>();
    Ok(SawDecomposition { j, parts, reconstruction, error })
}

/// `∫_γ |e^{iφ} − 1|^{α−1} |de^{iφ}|` over the arc of length `len` symmetric about 1.
pub fn symmetric_arc_integral(alpha: f64, len: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("exponent must lie in (0, 1], got {alpha}")));
    }
    let x = len.clamp(0.0, TAU) / 2.0;
    if x == 0.0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(2.0 * x);
    }
    // φ = t^{1/α} removes the endpoint singularity of φ^{α−1}
    let h = |phi: f64| if phi == 0.0 { 1.0 } else { (2.0 * (phi / 2.0).sin() / phi).powf(alpha - 1.0) };
    let top = x.powf(alpha);
    let (nodes, weights) = gauss_legendre(64);
    let mut s = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        let u = 0.5 * top * (t + 1.0);
        s += w * h(u.powf(1.0 / alpha));
    }
    Ok(2.0 * s * 0.5 * top / alpha)
}

/// `C′ = (C_h/π)·κ^{α−1}·L` with `κ` the measured projection constant and
/// `L` the radial Lipschitz constant; both boundary halves project onto the
/// same arcs, hence the factor 2 over `1/(2π)`.
pub fn hoelder_constant(geom: &SawGeometry, alpha: f64, c_h: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("exponent must lie in (0, 1], got {alpha}")));
    }
    if !(c_h > 0.0) {
        return Err(Error::Parameter("Hölder constant must be positive".into()));
    }
    Ok(c_h / PI * geom.kappa.powf(alpha - 1.0) * geom.radial.upper)
}

/// Bound on `Σ_{l≥n} |J_l(z)|` for an `α`-Hölder `f` with constant `C_h`.
pub fn hoelder_tail_estimate(geom: &SawGeometry, alpha: f64, c_h: f64, n: usize) -> Result<f64> {
    let c = hoelder_constant(geom, alpha, c_h)?;
    if n >= geom.rhombs.len() {
        return Ok(0.0);
    }
    Ok(c * symmetric_arc_integral(alpha, geom.tail_arc_length(n))?)
}

/// `Σ_{l≥n} |(1/2πi)∮_{∂◊_l} (f(ξ) − f(z))/(ξ − z) dξ|` at a point of the
/// ring disk outside those rhombs.
pub fn hoelder_tail_measured<F>(geom: &SawGeometry, f: F, n: usize, z: CPoint) -> Result<f64>
where
    F: Fn(CPoint) -> Complex64,
{
    if (z - geom.p).norm() > geom.ring_radius {
        return domain(format!("{z} lies outside the ring disk"));
    }
    let fz = f(z);
    let mut total = 0.0;
    for (l, ar) in geom.rhombs.iter().enumerate().skip(n) {
        if ar.rhomb.contains(z) {
            return domain(format!("{z} lies in rhomb {l}"));
        }
        let (v, _) = cauchy_integral(&Contour::rhomb(&ar.rhomb)?, &|xi| f(xi) - fz, z)?;
        total += v.norm();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    fn saw() -> SawGeometry {
        SawGeometry::alternating(0.0, 8, 0.2, 0.7, 0.5, 1.0, 0.7).unwrap()
    }

    fn test_points(g: &SawGeometry, n: usize) -> Vec<CPoint> {
        sunflower(&Disk { center: g.p, radius: g.ring_radius * 0.98 }, 4 * n)
            .into_iter()
            .filter(|&z| g.rhombs.iter().all(|r| r.rhomb.to_polygon().boundary_distance(z) > 1e-3 && !r.rhomb.contains(z)))
            .take(n)
            .collect()
    }

    #[test]
    fn geometry_is_valid() {
        let g = saw();
        assert_eq!(g.len(), 8);
        assert!((g.cone_angle - PI / 2.0).abs() < 1e-15);
        assert!(g.kappa > 0.1 && g.kappa <= 1.5, "{}", g.kappa);
        assert!(g.radial.upper >= 1.0);
        assert!(SawGeometry::alternating(0.0, 8, 0.2, 0.7, 0.5, 1.0, 0.3).is_err());
    }

    #[test]
    fn constant_and_entire() {
        let g = saw();
        let z = test_points(&g, 3)[1];
        let d = saw_cauchy_decomposition(&g, |_| c(1.0, 0.0), z).unwrap();
        assert!((d.j - 1.0).norm() < 1e-12);
        assert!(d.parts.iter().all(|v| v.norm() < 1e-12));
        for z in test_points(&g, 10) {
            let d = saw_cauchy_decomposition(&g, |x| x, z).unwrap();
            assert!((d.reconstruction - z).norm() < 1e-9);
        }
    }

    #[test]
    fn pole_inside_a_rhomb() {
        let g = saw();
        let q = (g.rhombs[1].rhomb.corner_a + g.rhombs[1].rhomb.corner_b) / 2.0;
        for z in test_points(&g, 10) {
            let d = saw_cauchy_decomposition(&g, |x| 1.0 / (x - q), z).unwrap();
            assert!((d.parts[1] - 1.0 / (q - z)).norm() < 1e-8);
            assert!((d.reconstruction - 1.0 / (z - q)).norm() < 1e-7);
        }
    }

    #[test]
    fn rejected_points() {
        let g = saw();
        let inside = (g.rhombs[0].rhomb.corner_a + g.rhombs[0].rhomb.corner_b) / 2.0;
        assert!(matches!(saw_cauchy_decomposition(&g, |x| x, inside), Err(Error::Domain(_))));
        assert!(matches!(saw_cauchy_decomposition(&g, |x| x, c(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn arc_integral_closed_forms() {
        assert_eq!(symmetric_arc_integral(1.0, 0.7).unwrap(), 0.7);
        assert_eq!(symmetric_arc_integral(0.5, 0.0).unwrap(), 0.0);
        assert!(symmetric_arc_integral(0.0, 1.0).is_err());
        // φ = u² oracle with composite Simpson
        for len in [0.01, 0.3, 1.0, 4.0] {
            let x: f64 = len / 2.0;
            let n = 20000;
            let hs = x.sqrt() / n as f64;
            let g = |u: f64| if u == 0.0 { 2.0 } else { 2.0 * u / (2.0 * (u * u / 2.0).sin()).sqrt() };
            let mut s = g(0.0) + g(x.sqrt());
            for k in 1..n {
                s += g(k as f64 * hs) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            let oracle = 2.0 * s * hs / 3.0;
            let v = symmetric_arc_integral(0.5, len).unwrap();
            assert!((v - oracle).abs() < 1e-9 * oracle, "{len}: {v} {oracle}");
        }
    }

    #[test]
    fn tail_estimate_shape() {
        let g = saw();
        for alpha in [0.5, 1.0] {
            let t: Vec<f64> = (0..=8).map(|n| hoelder_tail_estimate(&g, alpha, 1.0, n).unwrap()).collect();
            assert!(t.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0));
            assert_eq!(t[8], 0.0);
        }
        let c1 = hoelder_constant(&g, 1.0, 1.0).unwrap();
        let t = hoelder_tail_estimate(&g, 1.0, 1.0, 3).unwrap();
        assert!((t - c1 * g.tail_arc_length(3)).abs() < 1e-15);
        assert!(hoelder_tail_estimate(&g, -0.5, 1.0, 0).is_err());
    }

    #[test]
    fn tail_estimate_dominates_measured_tails() {
        let g = saw();
        let zs = test_points(&g, 20);
        let root = |x: CPoint| Complex64::new((x - g.p).norm().sqrt(), 0.0);
        for n in 0..8 {
            let half = hoelder_tail_estimate(&g, 0.5, 1.0, n).unwrap();
            let one = hoelder_tail_estimate(&g, 1.0, 1.0, n).unwrap();
            for &z in &zs {
                assert!(hoelder_tail_measured(&g, root, n, z).unwrap() <= half);
                assert!(hoelder_tail_measured(&g, |x: CPoint| x.conj(), n, z).unwrap() <= one);
            }
        }
    }
}
