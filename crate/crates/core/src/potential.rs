//! Logarithmic-potential certificates of thinness.
//!
//! A certificate is a finite atom sum `𝒰(z) = s·Σ aₙ log(|z−pₙ|/ρₙ) + b`,
//! subharmonic for `s > 0`. Interval bounds over disks drive both the
//! sublevel-set covers and the circle maxima used in normalization.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::geometry::{check_finite, CPoint, Disk, DiskUnion, LipschitzBounds};
use crate::par;
use crate::sampling::{circle_points, sunflower};

/// One term `a·log(|z − point|/scale)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: CPoint,
    pub weight: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPotentialCertificate {
    pub atoms: Vec<Atom>,
    pub additive_offset: f64,
    pub positive_scale: f64,
}

impl LogPotentialCertificate {
    pub fn new(atoms: Vec<Atom>, additive_offset: f64, positive_scale: f64) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            check_finite(a.point, "atom location")?;
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(Error::Parameter(format!("atom {i} weight must be positive")));
            }
            if !(a.scale > 0.0 && a.scale.is_finite()) {
                return Err(Error::Parameter(format!("atom {i} scale must be positive")));
            }
        }
        if !additive_offset.is_finite() {
            return Err(Error::Parameter("offset must be finite".into()));
        }
        if !(positive_scale > 0.0 && positive_scale.is_finite()) {
            return Err(Error::Parameter("scale factor must be positive".into()));
        }
        Ok(Self { atoms, additive_offset, positive_scale })
    }

    /// The constant function `value`.
    pub fn constant(value: f64) -> Self {
        Self { atoms: Vec::new(), additive_offset: value, positive_scale: 1.0 }
    }

    pub fn single(point: CPoint, weight: f64, scale: f64) -> Result<Self> {
        Self::new(vec![Atom { point, weight, scale }], 0.0, 1.0)
    }

    pub fn eval(&self, z: CPoint) -> f64 {
        let s: f64 = self.atoms.iter().map(|a| a.weight * ((z - a.point).norm() / a.scale).ln()).sum();
        self.positive_scale * s + self.additive_offset
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `factor·(𝒰 − shift)`.
    pub fn shift_scale(&self, shift: f64, factor: f64) -> Result<Self> {
        Self::new(
            self.atoms.clone(),
            factor * (self.additive_offset - shift),
            factor * self.positive_scale,
        )
    }

    fn assemble(&self, sum: f64) -> f64 {
        self.positive_scale * sum + self.additive_offset
    }

    /// Upper bound of `𝒰` over the closed disk `D̄(center, radius)`.
    pub fn upper_bound_disk(&self, center: CPoint, radius: f64) -> f64 {
        let s: f64 = self
            .atoms
            .iter()
            .map(|a| a.weight * (((center - a.point).norm() + radius) / a.scale).ln())
            .sum();
        self.assemble(s)
    }

    /// Lower bound of `𝒰` over the closed disk `D̄(center, radius)`.
    pub fn lower_bound_disk(&self, center: CPoint, radius: f64) -> f64 {
        let s: f64 = self
            .atoms
            .iter()
            .map(|a| a.weight * (((center - a.point).norm() - radius).max(0.0) / a.scale).ln())
            .sum();
        self.assemble(s)
    }

    /// Rigorous upper bound of `𝒰` on the circle `∂D(center, radius)`.
    ///
    /// Each of `n` arcs lies within arc distance `πr/n` of its midpoint.
    /// Atoms at the circle's center contribute their exact constant value.
    pub fn circle_upper_bound(&self, center: CPoint, radius: f64, n: usize) -> f64 {
        let h = PI * radius / n as f64;
        let mids = (0..n).map(|j| center + CPoint::from_polar(radius, (2 * j + 1) as f64 * PI / n as f64));
        let mut best = f64::NEG_INFINITY;
        for m in mids {
            let s: f64 = self
                .atoms
                .iter()
                .map(|a| {
                    let d = if a.point == center { radius } else { (m - a.point).norm() + h };
                    a.weight * (d / a.scale).ln()
                })
                .sum();
            best = best.max(self.assemble(s));
        }
        best
    }
}

/// Evaluates the certificate; `−∞` exactly at atom locations.
pub fn eval_log_potential(cert: &LogPotentialCertificate, z: CPoint) -> f64 {
    cert.eval(z)
}

/// A disk union witnessed thin at `target` by `certificate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinSetSpec {
    pub target: CPoint,
    pub union: DiskUnion,
    pub certificate: LogPotentialCertificate,
    pub ambient_radius: f64,
    /// Number of dyadic annuli sampled by [`thinness_report`].
    pub depth: usize,
}

impl ThinSetSpec {
    pub fn new(
        target: CPoint,
        union: DiskUnion,
        certificate: LogPotentialCertificate,
        ambient_radius: f64,
        depth: usize,
    ) -> Result<Self> {
        check_finite(target, "target point")?;
        if union.contains_closed(target) {
            return domain("target point lies in the union");
        }
        if !(ambient_radius > 0.0) {
            return Err(Error::Parameter("ambient radius must be positive".into()));
        }
        if certificate.eval(target) == f64::NEG_INFINITY {
            return domain("certificate is −∞ at the target point");
        }
        Ok(Self { target, union, certificate, ambient_radius, depth })
    }
}

/// Finite positive point masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<(CPoint, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(CPoint, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Parameter("measure needs at least one atom".into()));
        }
        for &(z, m) in &atoms {
            check_finite(z, "atom location")?;
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Parameter(format!("atom mass must be positive, got {m}")));
            }
        }
        Ok(Self { atoms })
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `∫ log|ξ − z| dμ(ξ)`.
    pub fn potential(&self, z: CPoint) -> f64 {
        self.atoms.iter().map(|&(x, m)| m * (x - z).norm().ln()).sum()
    }

    pub fn pushforward(&self, t: &dyn Fn(CPoint) -> CPoint) -> Self {
        Self { atoms: self.atoms.iter().map(|&(x, m)| (t(x), m)).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinUnionOptions {
    /// `Σ aₙ·max(1, log(R/ρₙ))`, split equally among the atoms.
    pub total_weight: f64,
    /// The certificate is pushed below `−level` on the union.
    pub level: f64,
    pub ambient_radius: f64,
    pub depth: usize,
}

impl Default for ThinUnionOptions {
    fn default() -> Self {
        Self { total_weight: 1.0, level: 1.0, ambient_radius: 0.5, depth: 12 }
    }
}

pub fn build_thin_union(points: &[CPoint], p: CPoint, depth: usize) -> Result<ThinSetSpec> {
    build_thin_union_with(points, p, &ThinUnionOptions { depth, ..Default::default() })
}

/// Atoms at the accumulation points, weighted so each term is at most its
/// share of the total weight on the ambient disk, then radii small enough
/// that the sum drops below `−level` on every disk of the union.
pub fn build_thin_union_with(points: &[CPoint], p: CPoint, opts: &ThinUnionOptions) -> Result<ThinSetSpec> {
    check_finite(p, "target point")?;
    if (p.norm() - 1.0).abs() > 1e-12 {
        return domain(format!("target {p} is not on the unit circle"));
    }
    for (i, &q) in points.iter().enumerate() {
        check_finite(q, "accumulation point")?;
        if q.norm() <= 1.0 {
            return domain(format!("accumulation point {i} lies in the closed unit disk"));
        }
        if points[..i].contains(&q) {
            return domain(format!("accumulation point {i} is repeated"));
        }
    }
    let n = points.len();
    if n == 0 {
        let cert = LogPotentialCertificate::constant(0.0);
        return ThinSetSpec::new(p, DiskUnion::default(), cert, opts.ambient_radius, opts.depth);
    }
    let rho: Vec<f64> = (0..n)
        .map(|i| {
            let sep = (0..n)
                .filter(|&l| l != i)
                .map(|l| (points[i] - points[l]).norm() / 3.0)
                .fold(f64::INFINITY, f64::min);
            ((points[i].norm() - 1.0) / 2.0).min(sep)
        })
        .collect();
    let big_r = 2.0 + 2.0 * points.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let share = opts.total_weight / n as f64;
    let a: Vec<f64> = rho.iter().map(|r| share / (big_r / r).ln().max(1.0)).collect();
    let mut disks = Vec::with_capacity(n);
    for i in 0..n {
        let m: f64 = (0..n)
            .filter(|&l| l != i)
            .map(|l| a[l] * (((points[i] - points[l]).norm() + rho[i]) / rho[l]).ln().max(0.0))
            .sum();
        let r = rho[i] * (-(opts.level + m) / a[i]).exp();
        if !(r > 0.0) {
            return Err(Error::Construction(format!(
                "radius underflow at atom {i} (weight {:.3e}, exponent {:.1})",
                a[i],
                (opts.level + m) / a[i]
            )));
        }
        disks.push(Disk { center: points[i], radius: r });
    }
    let atoms = (0..n).map(|i| Atom { point: points[i], weight: a[i], scale: rho[i] }).collect();
    let cert = LogPotentialCertificate::new(atoms, 0.0, 1.0)?;
    for (i, d) in disks.iter().enumerate() {
        let worst = cert.circle_upper_bound(d.center, d.radius, 64);
        // the open disk sits strictly below the level; its circle may touch it
        if !(worst <= -opts.level + 1e-12 * opts.level.abs().max(1.0)) {
            return Err(Error::Construction(format!(
                "certificate reaches {worst:.4} on the boundary of disk {i}, above −{}",
                opts.level
            )));
        }
    }
    let at_p = cert.eval(p);
    if !(at_p >= 0.0) {
        return Err(Error::Construction(format!("certificate is {at_p} at the target")));
    }
    ThinSetSpec::new(p, DiskUnion::new(disks), cert, opts.ambient_radius, opts.depth)
}

/// Geometric radius schedule `start·factorᵏ`, `k < count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSchedule {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        Self { start: 0.25, factor: 0.85, count: 40 }
    }
}

impl RadiusSchedule {
    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.start * self.factor.powi(k as i32))
    }
}

/// Result of [`normalize_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub certificate: LogPotentialCertificate,
    pub rho: f64,
    /// Certified upper bound of the normalized certificate on `D̄(p, ρ)`.
    pub max_on_disk: f64,
    pub value_at_p: f64,
    /// Certified upper bound on the union inside `D̄(p, ρ)`, `−∞` if none.
    #[serde(with = "crate::serde_float::extended")]
    pub max_on_union: f64,
}

const CIRCLE_SAMPLES: usize = 2048;
const SHIFT_GAP: f64 = 1e-6;

fn normalized_bounds(cert: &LogPotentialCertificate, p: CPoint, rho: f64, inside: &[Disk]) -> (f64, f64, f64) {
    let top = cert.circle_upper_bound(p, rho, CIRCLE_SAMPLES);
    let at_p = cert.eval(p);
    let m_u = inside
        .iter()
        .map(|d| cert.circle_upper_bound(d.center, d.radius, 256))
        .fold(f64::NEG_INFINITY, f64::max);
    (top, at_p, m_u)
}

fn satisfies(top: f64, at_p: f64, m_u: f64) -> bool {
    top < 0.0 && at_p > -1.0 / 12.0 && m_u < -1.0
}

/// Adds a constant and multiplies by a positive constant so that on the
/// first admissible `D̄(p, ρ)` of the schedule the certificate is negative,
/// exceeds `−1/12` at `p`, and is below `−1` on the union.
///
/// Maxima over disks come from the maximum principle on boundary circles.
pub fn normalize_certificate(
    cert: &LogPotentialCertificate,
    p: CPoint,
    union: &DiskUnion,
    schedule: &RadiusSchedule,
) -> Result<Normalized> {
    let at_p = cert.eval(p);
    if !at_p.is_finite() {
        return Err(Error::Precondition("certificate is not finite at p".into()));
    }
    let mut any_circle = false;
    let mut last_gap = String::new();
    for rho in schedule.radii() {
        if !union.circle_avoids(p, rho) {
            continue;
        }
        any_circle = true;
        let inside: Vec<Disk> = union
            .disks
            .iter()
            .filter(|d| (d.center - p).norm() < rho)
            .copied()
            .collect();
        let (top, at_p, m_u) = normalized_bounds(cert, p, rho, &inside);
        if satisfies(top, at_p, m_u) {
            return Ok(Normalized { certificate: cert.clone(), rho, max_on_disk: top, value_at_p: at_p, max_on_union: m_u });
        }
        let c = top + SHIFT_GAP * (1.0 + top.abs());
        let lo = if m_u.is_finite() { 1.0 / (c - m_u) } else { 0.0 };
        let hi = 1.0 / (12.0 * (c - at_p));
        if !(lo < hi) {
            last_gap = format!("ρ = {rho:.4e}: scale window ({lo:.4e}, {hi:.4e}) is empty");
            continue;
        }
        let s = if lo < 1.0 && 1.0 < hi { 1.0 } else if m_u.is_finite() { (lo * hi).sqrt() } else { hi / 2.0 };
        let out = cert.shift_scale(c, s)?;
        let (top2, at_p2, m_u2) = normalized_bounds(&out, p, rho, &inside);
        if satisfies(top2, at_p2, m_u2) {
            return Ok(Normalized { certificate: out, rho, max_on_disk: top2, value_at_p: at_p2, max_on_union: m_u2 });
        }
        last_gap = format!("ρ = {rho:.4e}: rounding defeated the scale choice");
    }
    if !any_circle {
        return Err(Error::CircleSelection(format!(
            "all {} radii from {} meet the union",
            schedule.count, schedule.start
        )));
    }
    Err(Error::Normalization(last_gap))
}

/// Conservative disk cover of `{𝒰 < threshold} ∩ region` by quadtree refinement.
///
/// A cell's circumscribed disk is emitted once the certificate's upper bound
/// over it is below the threshold; cells whose lower bound reaches the
/// threshold are dropped; undecided cells at `max_depth` are emitted.
pub fn sublevel_set(cert: &LogPotentialCertificate, threshold: f64, region: &Disk, max_depth: u32) -> DiskUnion {
    if threshold == f64::NEG_INFINITY || threshold.is_nan() {
        return DiskUnion::default();
    }
    // split the bounding square into 4^k top cells for parallel refinement
    let top = max_depth.min(3);
    let k = 1usize << top;
    let side = 2.0 * region.radius / k as f64;
    let origin = region.center - CPoint::new(region.radius, region.radius);
    let parts = par::map_indexed(k * k, |idx| {
        let (i, j) = (idx % k, idx / k);
        let lo = origin + CPoint::new(i as f64 * side, j as f64 * side);
        let mut out = Vec::new();
        refine(cert, threshold, region, lo, side, top, max_depth, &mut out);
        out
    });
    DiskUnion::new(parts.into_iter().flatten().collect())
}

#[allow(clippy::too_many_arguments)]
fn refine(
    cert: &LogPotentialCertificate,
    threshold: f64,
    region: &Disk,
    lo: CPoint,
    side: f64,
    depth: u32,
    max_depth: u32,
    out: &mut Vec<Disk>,
) {
    let c = lo + CPoint::new(side / 2.0, side / 2.0);
    let r = side * std::f64::consts::FRAC_1_SQRT_2;
    if (c - region.center).norm() >= region.radius + r {
        return;
    }
    if cert.lower_bound_disk(c, r) >= threshold {
        return;
    }
    if cert.upper_bound_disk(c, r) < threshold || depth >= max_depth {
        out.push(Disk { center: c, radius: r });
        return;
    }
    let h = side / 2.0;
    for (di, dj) in [(0.0, 0.0), (h, 0.0), (0.0, h), (h, h)] {
        refine(cert, threshold, region, lo + CPoint::new(di, dj), h, depth + 1, max_depth, out);
    }
}

/// Per-point margins of the two pushforward inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushReport {
    /// `𝒱(z) + log C·‖μ‖ − 𝒱₁(Tz)` at each test point.
    pub upper_margins: Vec<f64>,
    /// `𝒱₁(T o) − 𝒱(o) − log c·‖μ‖` at the origin `o`.
    pub origin_margin: f64,
    pub min_margin: f64,
    pub pass: bool,
}

/// Measures `C = max |Tz−Tw|/|z−w|` over pairs and `c = min |Tz−To|/|z−o|`.
pub fn measure_map_constants(t: &dyn Fn(CPoint) -> CPoint, points: &[CPoint], origin: CPoint) -> LipschitzBounds {
    let to = t(origin);
    let img: Vec<CPoint> = points.iter().map(|&z| t(z)).collect();
    let mut upper: f64 = 0.0;
    let mut lower = f64::INFINITY;
    for i in 0..points.len() {
        let d0 = (points[i] - origin).norm();
        if d0 > 0.0 {
            lower = lower.min((img[i] - to).norm() / d0);
        }
        for j in i + 1..points.len() {
            let d = (points[i] - points[j]).norm();
            if d > 0.0 {
                upper = upper.max((img[i] - img[j]).norm() / d);
            }
        }
    }
    LipschitzBounds { upper, lower }
}

const PUSH_SLACK: f64 = 1e-12;

/// Checks `𝒱₁(Tz) ≤ 𝒱(z) + log C·‖μ‖` and `𝒱₁(T o) ≥ 𝒱(o) + log c·‖μ‖`
/// for the pushforward `μ₁ = T_*μ`.
pub fn lipschitz_push(
    mu: &DiscreteMeasure,
    t: &dyn Fn(CPoint) -> CPoint,
    constants: LipschitzBounds,
    test_points: &[CPoint],
    origin: CPoint,
) -> Result<PushReport> {
    let LipschitzBounds { upper: big_c, lower: small_c } = constants;
    if !(big_c > 0.0 && small_c > 0.0) {
        return Err(Error::Parameter("map constants must be positive".into()));
    }
    let to = t(origin);
    if (to - origin).norm() > 1e-12 * (1.0 + origin.norm()) {
        return Err(Error::Precondition(format!("map moves the origin to {to}")));
    }
    for &(x, _) in &mu.atoms {
        let tx = t(x);
        if (tx - to).norm() < small_c * (x - origin).norm() * (1.0 - PUSH_SLACK) {
            return Err(Error::Precondition(format!("expansion bound fails at atom {x}")));
        }
        for &z in test_points {
            if (tx - t(z)).norm() > big_c * (x - z).norm() * (1.0 + PUSH_SLACK) {
                return Err(Error::Precondition(format!("Lipschitz bound fails on the pair ({x}, {z})")));
            }
        }
    }
    let mass = mu.total_mass();
    let mu1 = mu.pushforward(t);
    let upper_margins: Vec<f64> = test_points
        .iter()
        .map(|&z| mu.potential(z) + big_c.ln() * mass - mu1.potential(t(z)))
        .collect();
    let origin_margin = mu1.potential(to) - mu.potential(origin) - small_c.ln() * mass;
    let min_margin = upper_margins.iter().copied().fold(origin_margin, f64::min);
    // coincident points give −∞ − (−∞); treat as satisfied
    let min_margin = if min_margin.is_nan() { 0.0 } else { min_margin };
    Ok(PushReport { upper_margins, origin_margin, min_margin, pass: min_margin >= -1e-10 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum ThinVerdict {
    ThinCertified,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinnessReport {
    pub verdict: ThinVerdict,
    #[serde(with = "crate::serde_float::extended")]
    pub value_at_p: f64,
    /// Largest certificate value over the union samples; `None` without samples.
    pub max_on_union: Option<f64>,
    pub samples: usize,
    /// `(k, samples, max)` per dyadic annulus `2⁻ᵏρ ≤ |z−p| ≤ 2⁻ᵏ⁺¹ρ`.
    pub annuli: Vec<(usize, usize, Option<f64>)>,
}

/// Evaluates the certificate at `p` and on sample clouds of the union
/// disks near `p`. A failed check is reported as inconclusive, never as
/// evidence against thinness.
pub fn thinness_report(ts: &ThinSetSpec) -> ThinnessReport {
    let p = ts.target;
    let cert = &ts.certificate;
    let value_at_p = cert.eval(p);
    let near: Vec<&Disk> = ts
        .union
        .disks
        .iter()
        .filter(|d| (d.center - p).norm() - d.radius < 2.0 * ts.ambient_radius)
        .collect();
    let mut pts = Vec::new();
    for d in &near {
        pts.extend(sunflower(d, 24));
        pts.extend(circle_points(d.center, d.radius * (1.0 - 1e-9), 24));
    }
    let values: Vec<(f64, f64)> = pts.iter().map(|&z| ((z - p).norm(), cert.eval(z))).collect();
    let max_on_union = values.iter().map(|v| v.1).reduce(f64::max);
    let annuli = (1..=ts.depth)
        .map(|k| {
            let hi = ts.ambient_radius * 0.5f64.powi(k as i32 - 1);
            let lo = hi / 2.0;
            let inside: Vec<f64> = values.iter().filter(|v| v.0 >= lo && v.0 <= hi).map(|v| v.1).collect();
            (k, inside.len(), inside.iter().copied().reduce(f64::max))
        })
        .collect();
    let ok = value_at_p > -1.0 / 12.0 && max_on_union.is_none_or(|m| m < -1.0);
    ThinnessReport {
        verdict: if ok { ThinVerdict::ThinCertified } else { ThinVerdict::Inconclusive },
        value_at_p,
        max_on_union,
        samples: values.len(),
        annuli,
    }
}
