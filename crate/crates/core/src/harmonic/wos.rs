//! Walk-on-spheres estimation of harmonic measure.

use serde::{Deserialize, Serialize};

use super::SlitDomain;
use crate::error::{Error, Result};
use crate::geometry::{CPoint, CircArc, Disk, Obstacle};
use crate::par;
use crate::sampling::StreamRng;

/// Boundary component reached by a walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Outer,
    Obstacle(usize),
}

/// A bounded domain whose boundary is the outer circle plus finitely many
/// obstacle boundaries.
pub trait WalkDomain: Sync {
    fn outer(&self) -> Disk;
    fn obstacle_count(&self) -> usize;
    /// True when `z` is in the open domain.
    fn contains(&self, z: CPoint) -> bool;
    /// Distance from an interior point to the boundary, with the nearest component.
    fn nearest(&self, z: CPoint) -> (f64, Component);
    /// Length scale of a boundary component; its absorption shell is `shell_eps` times this.
    fn scale(&self, _comp: Component) -> f64 {
        self.outer().radius
    }
}

/// Absorption shell per component, index 0 for the outer circle. The shell
/// never drops below a few ulps of the coordinates, where distances stop
/// being resolvable.
fn shells<D: WalkDomain + ?Sized>(dom: &D, shell_eps: f64) -> Vec<f64> {
    let outer = dom.outer();
    let floor = 64.0 * f64::EPSILON * (outer.center.norm() + outer.radius);
    std::iter::once(Component::Outer)
        .chain((0..dom.obstacle_count()).map(Component::Obstacle))
        .map(|c| (shell_eps * dom.scale(c).min(outer.radius)).max(floor))
        .collect()
}

fn shell_index(comp: Component) -> usize {
    match comp {
        Component::Outer => 0,
        Component::Obstacle(i) => i + 1,
    }
}

/// Boundary subset whose harmonic measure is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// Open arc of the outer circle.
    Arc { arc: CircArc },
    /// Outer circle minus the closed arc.
    OuterRemainder { arc: CircArc },
    Outer,
    Obstacle { index: usize },
    AnyObstacle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WoSConfig {
    /// Absorption shell width relative to the outer radius.
    pub shell_eps: f64,
    pub max_steps: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for WoSConfig {
    fn default() -> Self {
        Self { shell_eps: 1e-4, max_steps: 10_000, samples: 100_000, seed: 0x5eed }
    }
}

impl WoSConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shell_eps > 0.0 && self.shell_eps <= 1e-2) {
            return Err(Error::Parameter(format!("shell_eps must lie in (0, 0.01], got {}", self.shell_eps)));
        }
        if self.samples < 1000 {
            return Err(Error::Parameter(format!(
                "at least 1000 samples are needed for a confidence interval, got {}",
                self.samples
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Parameter("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HMEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples_used: usize,
    pub hits: u64,
    /// Absorption counts: index 0 is the outer circle, `i + 1` obstacle `i`.
    pub killed_on: Vec<u64>,
    /// Walks that exceeded `max_steps`.
    pub lost: u64,
    /// More than 1% of walks were lost.
    pub unreliable: bool,
    pub seed: u64,
}

impl HMEstimate {
    pub fn killed_fractions(&self) -> Vec<f64> {
        self.killed_on.iter().map(|&k| k as f64 / self.samples_used as f64).collect()
    }
}

#[derive(Clone, Copy, Debug)]
enum Outcome {
    Hit(Component, CPoint),
    Lost,
}

fn walk<D: WalkDomain + ?Sized>(dom: &D, z0: CPoint, eps: &[f64], max_steps: usize, rng: &mut StreamRng) -> Outcome {
    let mut z = z0;
    for _ in 0..max_steps {
        let (d, comp) = dom.nearest(z);
        if d <= eps[shell_index(comp)] {
            return Outcome::Hit(comp, z);
        }
        z += CPoint::from_polar(d, rng.angle());
    }
    Outcome::Lost
}

fn scores(target: &Target, outer: &Disk, comp: Component, z: CPoint) -> bool {
    let angle = || (z - outer.center).arg();
    match (target, comp) {
        (Target::Arc { arc }, Component::Outer) => arc.contains_angle(angle()),
        (Target::OuterRemainder { arc }, Component::Outer) => !arc.contains_angle_closed(angle()),
        (Target::Outer, Component::Outer) => true,
        (Target::Obstacle { index }, Component::Obstacle(i)) => *index == i,
        (Target::AnyObstacle, Component::Obstacle(_)) => true,
        _ => false,
    }
}

fn check_target<D: WalkDomain + ?Sized>(dom: &D, target: &Target) -> Result<()> {
    let outer = dom.outer();
    match target {
        Target::Arc { arc } | Target::OuterRemainder { arc } => {
            let on = (arc.center - outer.center).norm() <= 1e-12 * outer.radius.max(outer.center.norm())
                && (arc.radius - outer.radius).abs() <= 1e-12 * outer.radius;
            if !on {
                return Err(Error::Geometry("target arc is not on the outer circle".into()));
            }
        }
        Target::Obstacle { index } if *index >= dom.obstacle_count() => {
            return Err(Error::Parameter(format!("no obstacle with index {index}")));
        }
        _ => {}
    }
    Ok(())
}

/// Walk-on-spheres estimate in any [`WalkDomain`].
///
/// Walk `i` draws from the stream `(seed, i)` and hit counts are integers,
/// so the estimate is bitwise independent of the worker count.
pub fn hm_wos_in<D: WalkDomain + ?Sized>(dom: &D, target: &Target, z: CPoint, cfg: &WoSConfig) -> Result<HMEstimate> {
    cfg.validate()?;
    check_target(dom, target)?;
    let outer = dom.outer();
    let eps = shells(dom, cfg.shell_eps);
    if !dom.contains(z) {
        return Err(Error::Precondition(format!("{z} is not inside the domain")));
    }
    let (d0, c0) = dom.nearest(z);
    if d0 <= eps[shell_index(c0)] {
        return Err(Error::Precondition(format!("{z} is within the absorption shell ({d0:.3e})")));
    }
    let outcomes = par::map_indexed(cfg.samples, |i| {
        let mut rng = StreamRng::new(cfg.seed, i as u64);
        walk(dom, z, &eps, cfg.max_steps, &mut rng)
    });
    let mut killed_on = vec![0u64; dom.obstacle_count() + 1];
    let mut hits = 0u64;
    let mut lost = 0u64;
    for o in &outcomes {
        match *o {
            Outcome::Hit(comp, w) => {
                killed_on[shell_index(comp)] += 1;
                if scores(target, &outer, comp, w) {
                    hits += 1;
                }
            }
            Outcome::Lost => lost += 1,
        }
    }
    let n = cfg.samples as f64;
    let value = hits as f64 / n;
    let std_error = (value * (1.0 - value) / (n - 1.0)).sqrt();
    Ok(HMEstimate {
        value,
        std_error,
        samples_used: cfg.samples,
        hits,
        killed_on,
        lost,
        unreliable: lost as f64 > 0.01 * n,
        seed: cfg.seed,
    })
}

#[derive(Clone, Debug)]
enum Shape {
    Disk(Disk),
    Edges(Vec<(CPoint, CPoint)>),
}

/// Slit domain with obstacle boundaries flattened for fast distance queries.
pub(crate) struct CompiledSlit<'a> {
    source: &'a SlitDomain,
    shapes: Vec<Shape>,
}

impl<'a> CompiledSlit<'a> {
    pub(crate) fn new(source: &'a SlitDomain) -> Self {
        let shapes = source
            .obstacles
            .iter()
            .map(|ob| match ob {
                Obstacle::Disk(d) => Shape::Disk(*d),
                Obstacle::Segment(s) => Shape::Edges(vec![(s.a, s.b)]),
                Obstacle::Rhomb(r) => Shape::Edges(r.to_polygon().edges().collect()),
                Obstacle::Polygon(p) => Shape::Edges(p.edges().collect()),
            })
            .collect();
        Self { source, shapes }
    }
}

impl WalkDomain for CompiledSlit<'_> {
    fn outer(&self) -> Disk {
        self.source.outer
    }

    fn obstacle_count(&self) -> usize {
        self.shapes.len()
    }

    fn contains(&self, z: CPoint) -> bool {
        self.source.outer.contains(z) && !self.source.obstacles.iter().any(|o| o.contains(z))
    }

    fn nearest(&self, z: CPoint) -> (f64, Component) {
        let outer = &self.source.outer;
        let mut best = outer.radius - (z - outer.center).norm();
        let mut comp = Component::Outer;
        for (i, s) in self.shapes.iter().enumerate() {
            let d = match s {
                Shape::Disk(d) => d.boundary_distance(z),
                Shape::Edges(e) => e
                    .iter()
                    .map(|&(a, b)| crate::geometry::segment_distance(a, b, z))
                    .fold(f64::INFINITY, f64::min),
            };
            if d < best {
                best = d;
                comp = Component::Obstacle(i);
            }
        }
        (best, comp)
    }

    fn scale(&self, comp: Component) -> f64 {
        match comp {
            Component::Outer => self.source.outer.radius,
            Component::Obstacle(i) => match &self.source.obstacles[i] {
                Obstacle::Disk(d) => d.radius,
                other => other.bounding_circle().1,
            },
        }
    }
}

/// Walk-on-spheres estimate of `ω(z, target, domain)`.
pub fn hm_wos(domain: &SlitDomain, target: &Target, z: CPoint, cfg: &WoSConfig) -> Result<HMEstimate> {
    hm_wos_in(&CompiledSlit::new(domain), target, z, cfg)
}
