//! The certification pipeline and its self-contained certificate.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::{Scenario, Tolerances};
use crate::error::{Error, Result};
use crate::finefun::{
    uniform_convergence_check, ApproximantSeq, BorelPartials, CauchyPartials, ConvergenceTable, FineFunction,
    SqrtPartials,
};
use crate::geometry::{CPoint, CircArc, Disk, DiskUnion, Obstacle};
use crate::harmonic::{
    fine_quarter_bound, hm_disk_arc_exact, hm_lower_bound_check, hm_wos, propagation_bound, HMEstimate,
    LowerBoundReport, QuarterOptions, SlitDomain, StageMinimum, Target, WoSConfig,
};
use crate::potential::{normalize_certificate, thinness_report, Normalized, ThinVerdict};
use crate::sampling::sunflower;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Certified,
    Failed { step: String, reason: String },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified => write!(f, "CERTIFIED"),
            Verdict::Failed { step, reason } => write!(f, "FAILED({step}): {reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinnessSummary {
    pub verdict: ThinVerdict,
    #[serde(with = "crate::serde_float::extended")]
    pub value_at_p: f64,
    pub max_on_union: Option<f64>,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationRow {
    pub n: usize,
    pub bound: f64,
}

/// Everything needed to re-check a run: the normalized certificate, the
/// stage obstacles, sample points and seeded Monte Carlo estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullCertificate {
    pub name: String,
    pub p: CPoint,
    pub ring_radius: f64,
    pub thinness: Option<ThinnessSummary>,
    pub normalized: Option<Normalized>,
    pub rho: Option<f64>,
    pub j: Option<CircArc>,
    pub r1: Option<f64>,
    pub r1_min_exact: Option<f64>,
    pub u1: Option<DiskUnion>,
    /// Obstacles of each stage inside `D(p, ρ)`.
    pub stages: Vec<Vec<Obstacle>>,
    pub samples: Vec<CPoint>,
    pub omega_minima: Vec<StageMinimum>,
    /// `estimates[k][i]`: stage `k`, sample `i`.
    pub estimates: Vec<Vec<HMEstimate>>,
    pub margins: Vec<LowerBoundReport>,
    pub convergence_table: Option<ConvergenceTable>,
    pub propagation: Vec<PropagationRow>,
    pub wos: WoSConfig,
    pub tolerances: Tolerances,
    pub unreliable: bool,
    pub conclusion: String,
    pub verdict: Verdict,
}

const CONCLUSION: &str = "The function continues finely analytically across p, and the graph of the \
continuation over V1 = D(p, r1) minus U1 lies in the pluripolar hull of its graph over the unit disk.";

fn fail(cert: &mut HullCertificate, step: &str, reason: impl fmt::Display) {
    cert.verdict = Verdict::Failed { step: step.into(), reason: reason.to_string() };
}

fn margin_seed(base: u64, stage: usize) -> u64 {
    base ^ ((stage as u64 + 1) << 40)
}

/// Runs thinness, normalization, the choice of `J`, the quarter bound, the
/// slit-disk margin check, the convergence table and the propagation table,
/// stopping at the first failing step.
pub fn certify_fine_continuation(s: &Scenario) -> HullCertificate {
    let mut cert = HullCertificate {
        name: s.name().to_string(),
        p: s.p,
        ring_radius: s.fine_nbhd.r,
        thinness: None,
        normalized: None,
        rho: None,
        j: None,
        r1: None,
        r1_min_exact: None,
        u1: None,
        stages: Vec::new(),
        samples: Vec::new(),
        omega_minima: Vec::new(),
        estimates: Vec::new(),
        margins: Vec::new(),
        convergence_table: None,
        propagation: Vec::new(),
        wos: s.wos,
        tolerances: s.tolerances,
        unreliable: false,
        conclusion: String::new(),
        verdict: Verdict::Certified,
    };
    if let Err((step, e)) = run_steps(s, &mut cert) {
        fail(&mut cert, step, e);
    } else if cert.verdict == Verdict::Certified {
        cert.conclusion = CONCLUSION.into();
    }
    cert
}

type StepResult = std::result::Result<(), (&'static str, Error)>;

fn run_steps(s: &Scenario, cert: &mut HullCertificate) -> StepResult {
    let tol = s.tolerances;
    let sigma = tol.sigma;

    let thin = thinness_report(&s.fine_nbhd.thin);
    cert.thinness = Some(ThinnessSummary {
        verdict: thin.verdict,
        value_at_p: thin.value_at_p,
        max_on_union: thin.max_on_union,
        samples: thin.samples,
    });
    if thin.verdict != ThinVerdict::ThinCertified {
        fail(cert, "thinness", "the certificate does not witness thinness at p");
        return Ok(());
    }
    if s.fine_nbhd.union.disks.len() != s.fine_nbhd.thin.union.disks.len() {
        // extra disks are not covered by the certificate
        let extra = &s.fine_nbhd.union.disks[s.fine_nbhd.thin.union.disks.len()..];
        let cert_u = &s.fine_nbhd.thin.certificate;
        if extra.iter().any(|d| !(cert_u.circle_upper_bound(d.center, d.radius, 256) < -1.0)) {
            fail(cert, "thinness", "extra union disks are not below −1 under the certificate");
            return Ok(());
        }
    }

    let schedule = s.file.geometry.schedule;
    let norm = normalize_certificate(&s.fine_nbhd.thin.certificate, s.p, &s.fine_nbhd.union, &schedule).map_err(
        |e| match e {
            Error::CircleSelection(_) => ("circle-selection", e),
            other => ("normalization", other),
        },
    )?;
    let rho = norm.rho;
    cert.rho = Some(rho);
    cert.normalized = Some(norm.clone());

    let j = CircArc::centered(s.p, rho, (-s.p).arg(), s.file.geometry.j_sweep).map_err(|e| ("arc", e))?;
    cert.j = Some(j);
    if j.length() < 5.0 * std::f64::consts::PI * rho / 6.0 * (1.0 - 1e-12) {
        fail(cert, "arc", "J is shorter than 5πρ/6");
        return Ok(());
    }
    if (0..=256).any(|k| j.point_at(k as f64 / 256.0).norm() >= 1.0) {
        fail(cert, "arc", "J leaves the open unit disk");
        return Ok(());
    }

    let outer = Disk::new(s.p, rho).map_err(|e| ("quarter-bound", e))?;
    let stages: Vec<Vec<Obstacle>> = s
        .exhaustion
        .stages
        .iter()
        .map(|st| st.iter().filter(|o| o.inside_disk(&outer)).cloned().collect())
        .collect();
    let exh = crate::harmonic::Exhaustion::new(stages.clone()).map_err(|e| ("quarter-bound", e))?;
    let opts = QuarterOptions {
        v1_samples: tol.v1_samples,
        circle_samples: tol.circle_samples,
        sublevel_depth: tol.sublevel_depth,
        ..QuarterOptions::default()
    };
    let q = fine_quarter_bound(s.p, &norm, &exh, &j, &s.wos, &opts).map_err(|e| ("quarter-bound", e))?;
    cert.r1 = Some(q.r1);
    cert.r1_min_exact = Some(q.r1_min_exact);
    cert.u1 = Some(q.u1.clone());
    cert.stages = if stages.is_empty() { vec![Vec::new()] } else { stages };
    cert.samples = q.samples.clone();
    cert.estimates = q.estimates.clone();
    cert.omega_minima = q
        .stage_minima
        .iter()
        .zip(&q.estimates)
        .map(|(m, row)| StageMinimum { pass: row.iter().all(|e| e.value >= 0.25 - sigma * e.std_error), ..m.clone() })
        .collect();
    cert.unreliable |= q.estimates.iter().flatten().any(|e| e.unreliable);
    if let Some(m) = cert.omega_minima.iter().find(|m| !m.pass) {
        let reason = format!("stage {} minimum {:.4} ± {:.4} is below 1/4", m.stage, m.min_value, m.std_error);
        fail(cert, "quarter-bound", reason);
        return Ok(());
    }

    let pts: Vec<CPoint> = q.samples.iter().take(tol.margin_points).copied().collect();
    for (k, obs) in cert.stages.clone().into_iter().enumerate() {
        let dom = SlitDomain::new(outer, obs, format!("stage {}", k + 1)).map_err(|e| ("hm-margins", e))?;
        let cfg = WoSConfig { seed: margin_seed(s.wos.seed, k), ..s.wos };
        let mut rep = hm_lower_bound_check(&dom, &j, &norm.certificate, &pts, &cfg).map_err(|e| ("hm-margins", e))?;
        for r in &mut rep.rows {
            r.pass = r.margin >= -sigma * r.std_error;
        }
        rep.pass = rep.rows.iter().all(|r| r.pass);
        cert.unreliable |= rep.unreliable;
        cert.margins.push(rep);
    }
    if let Some(k) = cert.margins.iter().position(|m| !m.pass) {
        fail(cert, "hm-margins", format!("a margin of stage {} is below −{sigma}σ", k + 1));
        return Ok(());
    }

    let table = convergence(s, &tol).map_err(|e| ("convergence", e))?;
    let ok = table.pass;
    cert.convergence_table = Some(table);
    if !ok {
        fail(cert, "convergence", "approximants do not converge within tolerance or exceed their bound");
        return Ok(());
    }

    cert.propagation = (1..=tol.propagation_depth)
        .map(|n| PropagationRow { n, bound: propagation_bound(n as f64, 0.25) })
        .collect();
    if cert.propagation.iter().any(|r| r.bound != -(r.n as f64) / 4.0) {
        fail(cert, "propagation", "propagated bound differs from −N/4");
    }
    Ok(())
}

struct Fixed<'a>(&'a FineFunction, f64);

impl ApproximantSeq for Fixed<'_> {
    fn stages(&self) -> usize {
        1
    }
    fn eval_stage(&self, _n: usize, z: CPoint) -> Result<num_complex::Complex64> {
        self.0.eval(z)
    }
    fn eval_limit(&self, z: CPoint) -> Result<num_complex::Complex64> {
        self.0.eval(z)
    }
    fn uniform_bound(&self) -> f64 {
        self.1
    }
}

/// Sample points of `D̄(p, r) ∖ Ū` off every cut.
fn v_samples(s: &Scenario, n: usize) -> Vec<CPoint> {
    let ring = Disk { center: s.p, radius: s.fine_nbhd.r };
    sunflower(&ring, n)
        .into_iter()
        .filter(|z| !s.fine_nbhd.union.contains_closed(*z))
        .filter(|z| match &s.function {
            FineFunction::SqrtSum(f) => f.cut_distance(*z) > 1e-9,
            FineFunction::Cauchy(f) => f.support.distance(*z) > 0.0,
            FineFunction::Borel(f) => !f.disks().contains_closed(*z),
            FineFunction::Polynomial { .. } => true,
        })
        .collect()
}

fn convergence(s: &Scenario, tol: &Tolerances) -> Result<ConvergenceTable> {
    let v = v_samples(s, tol.convergence_samples);
    if v.is_empty() {
        return Err(Error::Bound("no sample point of V avoids U".into()));
    }
    match &s.function {
        FineFunction::Borel(f) => uniform_convergence_check(&BorelPartials(f), &v, f.len(), tol.convergence),
        FineFunction::Cauchy(f) => {
            let separation = v.iter().map(|&z| f.support.distance(z)).fold(f64::INFINITY, f64::min);
            let stages = s
                .file
                .geometry
                .exhaustion
                .iter()
                .map(|fac| DiskUnion::new(f.support.disks.iter().map(|d| Disk { center: d.center, radius: fac * d.radius }).collect()))
                .chain(std::iter::once(f.support.clone()))
                .collect::<Vec<_>>();
            let n = stages.len();
            uniform_convergence_check(&CauchyPartials { f, stages, separation }, &v, n, tol.convergence)
        }
        FineFunction::SqrtSum(f) => {
            let radius = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            uniform_convergence_check(&SqrtPartials { f, radius }, &v, f.segments.len(), tol.convergence)
        }
        FineFunction::Polynomial { .. } => {
            let top = v.iter().map(|&z| s.function.eval(z).map(|w| w.norm())).collect::<Result<Vec<_>>>()?;
            let c = top.into_iter().fold(0.0, f64::max);
            uniform_convergence_check(&Fixed(&s.function, c), &v, 1, tol.convergence)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverifyReport {
    pub replayed: usize,
    pub mismatches: Vec<String>,
    pub pass: bool,
}

fn same(a: &HMEstimate, b: &HMEstimate) -> bool {
    a.value.to_bits() == b.value.to_bits() && a.hits == b.hits && a.killed_on == b.killed_on && a.lost == b.lost
}

/// Replays every stored Monte Carlo estimate from its seed, recomputes the
/// exact measures and re-derives every pass flag from the stored data.
pub fn reverify_certificate(cert: &HullCertificate) -> Result<ReverifyReport> {
    let mut mismatches = Vec::new();
    let mut replayed = 0;
    if cert.verdict != Verdict::Certified {
        return Ok(ReverifyReport { replayed, mismatches: vec!["certificate is not CERTIFIED".into()], pass: false });
    }
    let missing = || Error::Precondition("certified record lacks a field".into());
    let rho = cert.rho.ok_or_else(missing)?;
    let j = cert.j.ok_or_else(missing)?;
    let norm = cert.normalized.as_ref().ok_or_else(missing)?;
    let outer = Disk::new(cert.p, rho)?;
    let sigma = cert.tolerances.sigma;
    let target = Target::Arc { arc: j };
    for (k, obs) in cert.stages.iter().enumerate() {
        let dom = SlitDomain::new(outer, obs.clone(), format!("stage {}", k + 1))?;
        for (i, stored) in cert.estimates.get(k).into_iter().flatten().enumerate() {
            let again = hm_wos(&dom, &target, cert.samples[i], &WoSConfig { seed: stored.seed, ..cert.wos })?;
            replayed += 1;
            if !same(stored, &again) {
                mismatches.push(format!("stage {} sample {i}: estimate differs on replay", k + 1));
            }
            if stored.value < 0.25 - sigma * stored.std_error {
                mismatches.push(format!("stage {} sample {i}: below 1/4", k + 1));
            }
        }
        if let Some(rep) = cert.margins.get(k) {
            for (i, row) in rep.rows.iter().enumerate() {
                let again = hm_wos(&dom, &target, row.z, &WoSConfig { seed: row.seed, ..cert.wos })?;
                replayed += 1;
                let exact = hm_disk_arc_exact(&outer, &j, row.z)?;
                let u = norm.certificate.eval(row.z);
                if again.value.to_bits() != row.omega_slit.to_bits() || exact != row.omega_disk || u != row.cert_value {
                    mismatches.push(format!("stage {} margin {i}: differs on replay", k + 1));
                }
                if row.margin < -sigma * row.std_error {
                    mismatches.push(format!("stage {} margin {i}: below tolerance", k + 1));
                }
            }
        }
    }
    if let Some(t) = &cert.convergence_table {
        if !t.pass {
            mismatches.push("convergence table does not pass".into());
        }
    }
    let pass = mismatches.is_empty();
    Ok(ReverifyReport { replayed, mismatches, pass })
}
