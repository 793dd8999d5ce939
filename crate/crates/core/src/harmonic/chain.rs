//! The lower-bound chain for harmonic measure of an arc in a slit disk.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::wos::CompiledSlit;
use super::{hm_disk_arc_exact, hm_wos_in, Exhaustion, HMEstimate, SlitDomain, Target, WoSConfig};
use crate::error::{Error, Result};
use crate::geometry::{CPoint, CircArc, Disk, DiskUnion, Obstacle};
use crate::harmonic::WalkDomain;
use crate::potential::{sublevel_set, LogPotentialCertificate, Normalized};
use crate::sampling::{circle_points, sunflower};

/// One sample point of the inequality `ω_slit ≥ ω_disk + 𝒰`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginRow {
    pub z: CPoint,
    pub omega_slit: f64,
    pub std_error: f64,
    pub omega_disk: f64,
    pub cert_value: f64,
    pub margin: f64,
    pub pass: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub rows: Vec<MarginRow>,
    pub pass: bool,
    pub unreliable: bool,
}

/// Upper bound of the certificate over a closed obstacle, from its boundary.
fn obstacle_upper_bound(cert: &LogPotentialCertificate, ob: &Obstacle) -> f64 {
    let edges: Vec<(CPoint, CPoint)> = match ob {
        Obstacle::Disk(d) => return cert.circle_upper_bound(d.center, d.radius, 256),
        Obstacle::Segment(s) => vec![(s.a, s.b)],
        Obstacle::Rhomb(r) => r.to_polygon().edges().collect(),
        Obstacle::Polygon(p) => p.edges().collect(),
    };
    let mut best = f64::NEG_INFINITY;
    for (a, b) in edges {
        let n = 128;
        let h = (b - a).norm() / (2 * n) as f64;
        for k in 0..n {
            let m = a + (b - a) * ((2 * k + 1) as f64 / (2 * n) as f64);
            best = best.max(cert.upper_bound_disk(m, h));
        }
    }
    best
}

fn point_seed(base: u64, stage: usize, index: usize) -> u64 {
    base.wrapping_add((stage as u64) << 32).wrapping_add(index as u64)
}

/// Checks `ω(z, J, D∖K) ≥ ω(z, J, D) + 𝒰(z)` at each sample point.
///
/// The certificate must be negative on the closed outer disk and below
/// `−1` on every obstacle, which is what makes the inequality hold.
pub fn hm_lower_bound_check(
    stage: &SlitDomain,
    j: &CircArc,
    cert: &LogPotentialCertificate,
    sample_points: &[CPoint],
    cfg: &WoSConfig,
) -> Result<LowerBoundReport> {
    let outer = stage.outer;
    let top = cert.circle_upper_bound(outer.center, outer.radius, 2048);
    if !(top < 0.0) {
        return Err(Error::Precondition(format!("certificate reaches {top:.4e} on the outer disk")));
    }
    for (i, ob) in stage.obstacles.iter().enumerate() {
        let m = obstacle_upper_bound(cert, ob);
        if !(m < -1.0) {
            return Err(Error::Precondition(format!("certificate reaches {m:.4} on obstacle {i}")));
        }
    }
    let compiled = CompiledSlit::new(stage);
    let mut rows = Vec::with_capacity(sample_points.len());
    let mut unreliable = false;
    for (i, &z) in sample_points.iter().enumerate() {
        let seed = point_seed(cfg.seed, 0, i);
        let est = hm_wos_in(&compiled, &Target::Arc { arc: *j }, z, &WoSConfig { seed, ..*cfg })?;
        let omega_disk = hm_disk_arc_exact(&outer, j, z)?;
        let cert_value = cert.eval(z);
        let margin = est.value - (omega_disk + cert_value);
        unreliable |= est.unreliable;
        rows.push(MarginRow {
            z,
            omega_slit: est.value,
            std_error: est.std_error,
            omega_disk,
            cert_value,
            margin,
            pass: margin >= -3.0 * est.std_error,
            seed,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(LowerBoundReport { rows, pass, unreliable })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarterOptions {
    pub v1_samples: usize,
    /// Ratio between consecutive radii in the `r₁` search.
    pub r1_factor: f64,
    pub r1_steps: usize,
    pub circle_samples: usize,
    pub sublevel_depth: u32,
}

impl Default for QuarterOptions {
    fn default() -> Self {
        Self { v1_samples: 10, r1_factor: 0.95, r1_steps: 200, circle_samples: 720, sublevel_depth: 9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageMinimum {
    pub stage: usize,
    pub min_value: f64,
    pub std_error: f64,
    pub argmin: CPoint,
    pub pass: bool,
    pub unreliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarterBound {
    pub r1: f64,
    /// Smallest exact `ω(·, J, D(p, ρ))` on `∂D(p, r₁)`.
    pub r1_min_exact: f64,
    pub u1: DiskUnion,
    pub samples: Vec<CPoint>,
    pub stage_minima: Vec<StageMinimum>,
    /// `estimates[k][i]`: stage `k`, sample `i`.
    pub estimates: Vec<Vec<HMEstimate>>,
    pub pass: bool,
}

pub(crate) const FOUR_TWELFTHS_GAP: f64 = 1e-6;

fn check_arc(p: CPoint, rho: f64, j: &CircArc) -> Result<()> {
    if (j.center - p).norm() > 1e-12 * (1.0 + p.norm()) || (j.radius - rho).abs() > 1e-12 * rho {
        return Err(Error::Precondition("J is not an arc of ∂D(p, ρ)".into()));
    }
    if j.length() < 5.0 * PI * rho / 6.0 * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "J has length {:.6e}, below 5πρ/6 = {:.6e}",
            j.length(),
            5.0 * PI * rho / 6.0
        )));
    }
    if (0..=256).any(|k| j.point_at(k as f64 / 256.0).norm() >= 1.0) {
        return Err(Error::Precondition("J leaves the open unit disk".into()));
    }
    Ok(())
}

/// Largest radius of the schedule on whose circle the exact measure of `J`
/// is at least `4/12 + 10⁻⁶`, with that minimum.
pub(crate) fn find_r1(p: CPoint, rho: f64, j: &CircArc, opts: &QuarterOptions) -> Result<(f64, f64)> {
    let disk = Disk::new(p, rho)?;
    let need = 4.0 / 12.0 + FOUR_TWELFTHS_GAP;
    for k in 1..=opts.r1_steps {
        let r = rho * opts.r1_factor.powi(k as i32);
        let mut lo = f64::INFINITY;
        for z in circle_points(p, r, opts.circle_samples) {
            lo = lo.min(hm_disk_arc_exact(&disk, j, z)?);
        }
        if lo >= need {
            return Ok((r, lo));
        }
    }
    Err(Error::Bound(format!("no radius in the schedule keeps ω(·, J) above 4/12 (ρ = {rho})")))
}

/// Verifies `ω(z, J, D(p,ρ) ∖ Kₙ) ≥ 1/4` on samples of `V₁ = D(p, r₁) ∖ U₁`
/// for every stage, with `U₁` the sublevel cover `{𝒰′ < −1/12}`.
pub fn fine_quarter_bound(
    p: CPoint,
    normalized: &Normalized,
    exhaustion: &Exhaustion,
    j: &CircArc,
    cfg: &WoSConfig,
    opts: &QuarterOptions,
) -> Result<QuarterBound> {
    let rho = normalized.rho;
    check_arc(p, rho, j)?;
    cfg.validate()?;
    let (r1, r1_min_exact) = find_r1(p, rho, j, opts)?;
    let outer = Disk::new(p, rho)?;
    let u1 = sublevel_set(&normalized.certificate, -1.0 / 12.0, &outer, opts.sublevel_depth);
    let stages: Vec<Vec<Obstacle>> =
        if exhaustion.is_empty() { vec![Vec::new()] } else { exhaustion.stages.clone() };
    let domains = stages
        .iter()
        .enumerate()
        .map(|(k, obs)| SlitDomain::new(outer, obs.clone(), format!("stage {}", k + 1)))
        .collect::<Result<Vec<_>>>()?;
    let compiled: Vec<CompiledSlit> = domains.iter().map(CompiledSlit::new).collect();
    let eps = cfg.shell_eps * rho;
    let usable = |z: &CPoint| {
        !u1.contains_closed(*z) && compiled.iter().all(|d| d.contains(*z) && d.nearest(*z).0 > 2.0 * eps)
    };
    let mut m = opts.v1_samples.max(1);
    let candidates = loop {
        let c: Vec<CPoint> = sunflower(&Disk::new(p, r1)?, m).into_iter().filter(usable).collect();
        if c.len() >= opts.v1_samples || m > 64 * opts.v1_samples.max(1) {
            break c;
        }
        m *= 2;
    };
    if candidates.is_empty() {
        return Err(Error::Bound("no sample point of V₁ avoids U₁".into()));
    }
    let take = opts.v1_samples.min(candidates.len());
    let samples: Vec<CPoint> = (0..take).map(|k| candidates[k * candidates.len() / take]).collect();
    let mut stage_minima = Vec::new();
    let mut estimates = Vec::new();
    for (k, dom) in compiled.iter().enumerate() {
        let mut row = Vec::with_capacity(samples.len());
        for (i, &z) in samples.iter().enumerate() {
            let seed = point_seed(cfg.seed, k + 1, i);
            row.push(hm_wos_in(dom, &Target::Arc { arc: *j }, z, &WoSConfig { seed, ..*cfg })?);
        }
        let (imin, best) = row
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
            .expect("nonempty samples");
        stage_minima.push(StageMinimum {
            stage: k + 1,
            min_value: best.value,
            std_error: best.std_error,
            argmin: samples[imin],
            pass: row.iter().all(|e| e.value >= 0.25 - 3.0 * e.std_error),
            unreliable: row.iter().any(|e| e.unreliable),
        });
        estimates.push(row);
    }
    let pass = stage_minima.iter().all(|s| s.pass && !s.unreliable);
    Ok(QuarterBound { r1, r1_min_exact, u1, samples, stage_minima, estimates, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::LogPotentialCertificate;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    fn inward_arc(p: CPoint, rho: f64, sweep: f64) -> CircArc {
        CircArc::centered(p, rho, (-p).arg(), sweep).unwrap()
    }

    #[test]
    fn obstacle_free_quarter_bound() {
        let p = c(0.0, 1.0);
        let rho = 0.3;
        let norm = Normalized {
            certificate: LogPotentialCertificate::constant(-0.01),
            rho,
            max_on_disk: -0.01,
            value_at_p: -0.01,
            max_on_union: f64::NEG_INFINITY,
        };
        let j = inward_arc(p, rho, 5.0 * PI / 6.0);
        let cfg = WoSConfig::new(4000, 9);
        let q = fine_quarter_bound(p, &norm, &Exhaustion::default(), &j, &cfg, &QuarterOptions::default()).unwrap();
        assert!(q.r1 < rho && q.r1_min_exact >= 4.0 / 12.0);
        assert!(q.u1.is_empty());
        assert_eq!(q.stage_minima.len(), 1);
        assert!(q.stage_minima[0].min_value >= 4.0 / 12.0 - 3.0 * q.stage_minima[0].std_error);
        assert!(q.pass);
    }

    #[test]
    fn short_arc_is_rejected() {
        let p = c(1.0, 0.0);
        let norm = Normalized {
            certificate: LogPotentialCertificate::constant(-0.01),
            rho: 0.2,
            max_on_disk: -0.01,
            value_at_p: -0.01,
            max_on_union: f64::NEG_INFINITY,
        };
        let j = inward_arc(p, 0.2, PI / 6.0);
        let e = fine_quarter_bound(p, &norm, &Exhaustion::default(), &j, &WoSConfig::new(1000, 1), &QuarterOptions::default());
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_shift_margin() {
        let d = Disk::new(c(1.0, 0.0), 0.3).unwrap();
        let dom = SlitDomain::new(d, vec![], "plain").unwrap();
        let j = inward_arc(d.center, 0.3, 5.0 * PI / 6.0);
        let cert = LogPotentialCertificate::constant(-0.01);
        let pts = [c(1.0, 0.0), c(0.9, 0.05)];
        let rep = hm_lower_bound_check(&dom, &j, &cert, &pts, &WoSConfig::new(20_000, 3)).unwrap();
        for r in &rep.rows {
            assert!((r.margin - 0.01).abs() <= 3.0 * r.std_error + 1e-12, "{r:?}");
        }
        assert!(rep.pass);
    }

    #[test]
    fn lower_bound_check_requires_normalized_certificate() {
        let d = Disk::new(c(1.0, 0.0), 0.3).unwrap();
        let dom = SlitDomain::new(d, vec![], "plain").unwrap();
        let j = inward_arc(d.center, 0.3, 5.0 * PI / 6.0);
        let e = hm_lower_bound_check(&dom, &j, &LogPotentialCertificate::constant(0.5), &[d.center], &WoSConfig::new(1000, 1));
        assert!(matches!(e, Err(Error::Precondition(_))));
    }
}
