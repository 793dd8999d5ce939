//! Scenario files, certification pipelines and report emission.
//!
//! A scenario is a TOML file with the sections `[function]`, `[geometry]`,
//! `[wos]` and `[tolerances]`, plus optional `[decay]` and `[study]` tables
//! for the two harmonic-measure studies. Every run writes its effective
//! configuration into the emitted report.

mod certify;
mod components;
mod report;
mod sheets;
mod studies;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

pub use certify::{
    certify_fine_continuation, reverify_certificate, HullCertificate, PropagationRow, ReverifyReport, ThinnessSummary,
    Verdict,
};
pub use components::{first_clear_radius, unique_component_finder, ComponentInfo, ComponentReport};
pub use report::{write_csv, write_json};
pub use sheets::{
    branched_cover_enumerate, monodromy_check, sheet_identity_residual, sheet_points, sheet_study, MonodromyCheck, Sheet, SheetAtlas,
    SheetRow, SheetStudy,
};
pub use studies::{decay_exhaustion, decay_study, hm_study, DecayStudy, HmStudy, HmStudyRow};

use crate::error::{Error, Result};
use crate::finefun::{BorelSeriesFn, CauchyTransformFn, Density, FineFunction, SqrtBranchSumFn};
use crate::geometry::{CPoint, Disk, DiskUnion, Obstacle};
use crate::harmonic::{Exhaustion, WoSConfig};
use crate::potential::{build_thin_union_with, RadiusSchedule, ThinSetSpec, ThinUnionOptions};

/// Smallest sample count accepted in a scenario file.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Certify,
    Components,
    Sheets,
    HmStudy,
    DecayStudy,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Certify => "certify",
            Pipeline::Components => "components",
            Pipeline::Sheets => "sheets",
            Pipeline::HmStudy => "hm-study",
            Pipeline::DecayStudy => "decay-study",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Four times the configured samples.
    Strict,
    #[default]
    Default,
    /// A tenth of the configured samples (never below the minimum) and fewer sample points.
    Fast,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Profile::Strict),
            "default" => Ok(Profile::Default),
            "fast" => Ok(Profile::Fast),
            other => Err(Error::Parameter(format!("unknown tolerance profile {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSection {
    /// Terms `(ρₙ/n²)/(z − aₙ)` on the disks of the thin union.
    Borel,
    Cauchy {
        density: Density,
        /// Support disks `[cx, cy, r]`.
        support: Vec<[f64; 3]>,
        #[serde(default = "default_cauchy_resolution")]
        resolution: usize,
    },
    Sqrt {
        segments: Vec<[[f64; 2]; 2]>,
        coeffs: Vec<[f64; 2]>,
        #[serde(default = "default_max_flips")]
        max_flips: usize,
    },
    Polynomial {
        coeffs: Vec<[f64; 2]>,
    },
}

fn default_cauchy_resolution() -> usize {
    128
}

fn default_max_flips() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub target: [f64; 2],
    /// Radius `r` of the disk `D̄(p, r)` whose trace on the unit disk lies in the fine neighborhood.
    pub ring_radius: f64,
    /// Accumulation points of the thin union.
    #[serde(default)]
    pub accumulation: Vec<[f64; 2]>,
    /// Extra disks `[cx, cy, r]` added to `U` without a certificate.
    #[serde(default)]
    pub union: Vec<[f64; 3]>,
    /// Total atom weight of the thin-union certificate; larger weights give larger disks.
    #[serde(default = "default_total_weight")]
    pub total_weight: f64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_ambient")]
    pub ambient_radius: f64,
    /// Stage `k` of the exhaustion is the closed disks `D̄(c, fₖ·r)` over `U`.
    #[serde(default = "default_exhaustion")]
    pub exhaustion: Vec<f64>,
    #[serde(default = "default_j_sweep")]
    pub j_sweep: f64,
    #[serde(default)]
    pub schedule: RadiusSchedule,
}

fn default_total_weight() -> f64 {
    1.0
}

fn default_depth() -> usize {
    12
}

fn default_ambient() -> f64 {
    0.5
}

fn default_exhaustion() -> Vec<f64> {
    vec![0.9, 0.95, 0.99]
}

fn default_j_sweep() -> f64 {
    5.0 * PI / 6.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WosSection {
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_shell")]
    pub shell_eps: f64,
    #[serde(default = "default_steps")]
    pub max_steps: usize,
}

fn default_shell() -> f64 {
    1e-4
}

fn default_steps() -> usize {
    10_000
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub profile: Profile,
    /// Monte Carlo checks pass within `sigma` standard errors.
    pub sigma: f64,
    /// Final sup-norm gap allowed in the convergence table.
    pub convergence: f64,
    pub v1_samples: usize,
    pub margin_points: usize,
    pub sublevel_depth: u32,
    pub circle_samples: usize,
    /// Grid cells across the diameter of `D(p, r)` for component labelling.
    pub resolution: usize,
    pub propagation_depth: usize,
    pub convergence_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            profile: Profile::Default,
            sigma: 3.0,
            convergence: 1e-9,
            v1_samples: 10,
            margin_points: 10,
            sublevel_depth: 9,
            circle_samples: 720,
            resolution: 256,
            propagation_depth: 8,
            convergence_samples: 256,
        }
    }
}

/// Fattened segments marching toward `p` from several directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    /// The compact `K` as `[cx, cy, r]`.
    pub k: [f64; 3],
    pub p: [f64; 2],
    #[serde(default = "default_decay_stages")]
    pub stages: usize,
    #[serde(default = "default_arms")]
    pub arms: usize,
    /// Distance from `p` of the far end of each arm.
    pub reach: f64,
    /// Distance from `p` of the near end at stage 1; halved by `ratio` per stage.
    pub start_gap: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    pub half_width: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_decay_stages() -> usize {
    6
}

fn default_arms() -> usize {
    4
}

fn default_ratio() -> f64 {
    0.5
}

fn default_threshold() -> f64 {
    0.1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub cases: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub pipeline: Pipeline,
    pub function: FunctionSection,
    pub geometry: GeometrySection,
    pub wos: WosSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecaySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudySection>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Command-line replacements for file values.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
    pub profile: Option<Profile>,
}

/// The region `D̄(p, r) ∖ U` and the thin-set data behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FineNeighborhood {
    pub r: f64,
    pub union: DiskUnion,
    pub thin: ThinSetSpec,
}

/// A validated scenario with every derived object built.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub function: FineFunction,
    pub p: CPoint,
    pub fine_nbhd: FineNeighborhood,
    pub exhaustion: Exhaustion,
    pub wos: WoSConfig,
    pub tolerances: Tolerances,
}

fn point(v: [f64; 2]) -> CPoint {
    Complex64::new(v[0], v[1])
}

fn disk(v: [f64; 3]) -> Result<Disk> {
    Disk::new(Complex64::new(v[0], v[1]), v[2])
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parameter(format!("{field}: {msg}"))
}

impl Scenario {
    /// Applies overrides and the tolerance profile, validates, and builds.
    pub fn build(mut file: ScenarioFile, ov: &Overrides) -> Result<Self> {
        if let Some(s) = ov.samples {
            file.wos.samples = s;
        }
        if let Some(s) = ov.seed {
            file.wos.seed = s;
        }
        if let Some(r) = ov.resolution {
            file.tolerances.resolution = r;
            if let FunctionSection::Cauchy { resolution, .. } = &mut file.function {
                *resolution = r;
            }
        }
        if let Some(p) = ov.profile {
            file.tolerances.profile = p;
        }
        if file.wos.samples < MIN_SAMPLES {
            return Err(field_error("wos.samples", format!("{} is below the minimum of {MIN_SAMPLES}", file.wos.samples)));
        }
        match file.tolerances.profile {
            Profile::Strict => file.wos.samples *= 4,
            Profile::Default => {}
            Profile::Fast => {
                file.wos.samples = (file.wos.samples / 10).max(MIN_SAMPLES);
                let t = &mut file.tolerances;
                t.v1_samples = t.v1_samples.min(5);
                t.margin_points = t.margin_points.min(5);
            }
        }
        let wos = WoSConfig {
            shell_eps: file.wos.shell_eps,
            max_steps: file.wos.max_steps,
            samples: file.wos.samples,
            seed: file.wos.seed,
        };
        wos.validate().map_err(|e| field_error("wos", e))?;
        let t = file.tolerances;
        if !(t.sigma > 0.0) {
            return Err(field_error("tolerances.sigma", "must be positive"));
        }
        if !(t.convergence >= 0.0) {
            return Err(field_error("tolerances.convergence", "must be nonnegative"));
        }
        if t.v1_samples == 0 || t.resolution < 8 || t.convergence_samples == 0 {
            return Err(field_error("tolerances", "sample counts must be positive and resolution at least 8"));
        }
        let g = &file.geometry;
        let p = point(g.target);
        if (p.norm() - 1.0).abs() > 1e-12 {
            return Err(field_error("geometry.target", "must lie on the unit circle"));
        }
        if !(g.ring_radius > 0.0 && g.ring_radius < 1.0) {
            return Err(field_error("geometry.ring_radius", "must lie in (0, 1)"));
        }
        if !(g.j_sweep > 0.0 && g.j_sweep < TAU) {
            return Err(field_error("geometry.j_sweep", "must lie in (0, 2π)"));
        }
        if g.exhaustion.windows(2).any(|w| w[1] <= w[0]) || g.exhaustion.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(field_error("geometry.exhaustion", "factors must increase strictly within (0, 1)"));
        }
        let s = g.schedule;
        if !(s.start > 0.0 && s.factor > 0.0 && s.factor < 1.0 && s.count > 0) {
            return Err(field_error("geometry.schedule", "needs start > 0, factor in (0, 1) and count > 0"));
        }
        let pts: Vec<CPoint> = g.accumulation.iter().map(|&v| point(v)).collect();
        if !(g.total_weight > 0.0 && g.total_weight.is_finite()) {
            return Err(field_error("geometry.total_weight", "must be positive"));
        }
        let opts = ThinUnionOptions {
            total_weight: g.total_weight,
            ambient_radius: g.ambient_radius,
            depth: g.depth,
            ..Default::default()
        };
        let thin = build_thin_union_with(&pts, p, &opts).map_err(|e| field_error("geometry.accumulation", e))?;
        let mut disks = thin.union.disks.clone();
        for (i, &v) in g.union.iter().enumerate() {
            disks.push(disk(v).map_err(|e| field_error(&format!("geometry.union[{i}]"), e))?);
        }
        let union = DiskUnion::disjoint(disks).map_err(|e| field_error("geometry.union", e))?;
        if let Some(i) = union.disks.iter().position(|d| d.center.norm() - d.radius <= 1.0) {
            return Err(field_error("geometry.union", format!("disk {i} meets the closed unit disk")));
        }
        let stages = g
            .exhaustion
            .iter()
            .map(|f| union.disks.iter().map(|d| Obstacle::Disk(Disk { center: d.center, radius: f * d.radius })).collect())
            .collect();
        let exhaustion = Exhaustion::new(stages).map_err(|e| field_error("geometry.exhaustion", e))?;
        let function = build_function(&file.function, &union)?;
        if let Some(d) = &file.decay {
            if d.stages == 0 || d.arms == 0 || !(d.ratio > 0.0 && d.ratio < 1.0) {
                return Err(field_error("decay", "needs positive stages and arms and ratio in (0, 1)"));
            }
        }
        let tolerances = file.tolerances;
        Ok(Self {
            function,
            p,
            fine_nbhd: FineNeighborhood { r: g.ring_radius, union, thin },
            exhaustion,
            wos,
            tolerances,
            file,
        })
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn pipeline(&self) -> Pipeline {
        self.file.pipeline
    }
}

fn build_function(f: &FunctionSection, union: &DiskUnion) -> Result<FineFunction> {
    Ok(match f {
        FunctionSection::Borel => {
            FineFunction::Borel(BorelSeriesFn::on_disks(&union.disks).map_err(|e| field_error("function", e))?)
        }
        FunctionSection::Cauchy { density, support, resolution } => {
            let disks = support
                .iter()
                .enumerate()
                .map(|(i, &v)| disk(v).map_err(|e| field_error(&format!("function.support[{i}]"), e)))
                .collect::<Result<Vec<_>>>()?;
            if disks.iter().any(|d| d.center.norm() - d.radius <= 1.0) {
                return Err(field_error("function.support", "disks must avoid the closed unit disk"));
            }
            FineFunction::Cauchy(
                CauchyTransformFn::new(DiskUnion::new(disks), *density, *resolution)
                    .map_err(|e| field_error("function", e))?,
            )
        }
        FunctionSection::Sqrt { segments, coeffs, max_flips } => {
            if *max_flips > segments.len() {
                return Err(field_error("function.max_flips", "exceeds the number of segments"));
            }
            FineFunction::SqrtSum(
                SqrtBranchSumFn::new(
                    segments.iter().map(|s| (point(s[0]), point(s[1]))).collect(),
                    coeffs.iter().map(|&c| point(c)).collect(),
                )
                .map_err(|e| field_error("function", e))?,
            )
        }
        FunctionSection::Polynomial { coeffs } => {
            FineFunction::Polynomial { coeffs: coeffs.iter().map(|&c| point(c)).collect() }
        }
    })
}

/// How a run ended; maps onto process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pass,
    CheckFailed,
    Unreliable,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::CheckFailed => 1,
            RunStatus::Unreliable => 3,
        }
    }

    fn from_flags(pass: bool, unreliable: bool) -> Self {
        if unreliable {
            RunStatus::Unreliable
        } else if pass {
            RunStatus::Pass
        } else {
            RunStatus::CheckFailed
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

/// Input errors exit with 2.
pub const INPUT_ERROR_EXIT: i32 = 2;

/// Runs the pipeline named in the file (or `pipeline` when given) and writes
/// the report, tables and plot data into `out`.
pub fn run_scenario_file(path: &Path, pipeline: Option<Pipeline>, ov: &Overrides, out: &Path) -> Result<RunOutcome> {
    let mut file = ScenarioFile::load(path)?;
    if let Some(p) = pipeline {
        file.pipeline = p;
    }
    let scenario = Scenario::build(file, ov)?;
    run_scenario(&scenario, out)
}

pub fn run_scenario(s: &Scenario, out: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    match s.pipeline() {
        Pipeline::Certify => {
            let cert = certify_fine_continuation(s);
            let artifacts = report::emit_certificate(&cert, out)?;
            let status = RunStatus::from_flags(cert.verdict == Verdict::Certified, cert.unreliable);
            Ok(RunOutcome { status, summary: cert.verdict.to_string(), artifacts })
        }
        Pipeline::Components => {
            let rho = first_clear_radius(s)?;
            let rep = unique_component_finder(s, rho)?;
            let artifacts = report::emit_components(&rep, out)?;
            let status = RunStatus::from_flags(rep.unique_nonthin.is_some(), false);
            let summary = match rep.unique_nonthin {
                Some(id) => format!("component {id} of {} holds the half-circle", rep.components.len()),
                None => format!("NONE: {}", rep.diagnostics),
            };
            Ok(RunOutcome { status, summary, artifacts })
        }
        Pipeline::Sheets => {
            let FineFunction::SqrtSum(f) = &s.function else {
                return Err(field_error("function.kind", "the sheets pipeline needs kind = \"sqrt\""));
            };
            let flips = match s.file.function {
                FunctionSection::Sqrt { max_flips, .. } => max_flips,
                _ => 0,
            };
            let atlas = branched_cover_enumerate(f, flips)?;
            let study = sheet_study(&atlas, s.wos.seed)?;
            let artifacts = report::emit_sheets(&study, out)?;
            let status = RunStatus::from_flags(study.pass, false);
            Ok(RunOutcome { status, summary: format!("{} sheets, pass = {}", atlas.sheets.len(), study.pass), artifacts })
        }
        Pipeline::HmStudy => {
            let cases = s.file.study.map_or(20, |st| st.cases);
            let st = hm_study(cases, &s.wos, s.tolerances.sigma)?;
            let artifacts = report::emit_hm_study(&st, out)?;
            let status = RunStatus::from_flags(st.pass, st.unreliable);
            Ok(RunOutcome { status, summary: format!("{} cases, pass = {}", st.rows.len(), st.pass), artifacts })
        }
        Pipeline::DecayStudy => {
            let d = s.file.decay.ok_or_else(|| field_error("decay", "the decay-study pipeline needs a [decay] table"))?;
            let st = decay_study(&d, &s.wos)?;
            let artifacts = report::emit_decay(&st, out)?;
            let unreliable = st.report.rows.iter().any(|r| r.estimate.unreliable);
            let status = RunStatus::from_flags(st.report.monotone_pass && st.report.decay_pass, unreliable);
            let last = st.report.rows.last().map_or(f64::NAN, |r| r.estimate.value);
            Ok(RunOutcome { status, summary: format!("final h = {last:.4}"), artifacts })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "tiny"
pipeline = "certify"

[function]
kind = "polynomial"
coeffs = [[0.0, 0.0], [1.0, 0.0]]

[geometry]
target = [0.0, 1.0]
ring_radius = 0.5

[wos]
samples = 2000
seed = 7
"#;

    #[test]
    fn minimal_file_parses_with_defaults() {
        let f = ScenarioFile::parse(MINIMAL).unwrap();
        assert_eq!(f.geometry.exhaustion, vec![0.9, 0.95, 0.99]);
        assert_eq!(f.tolerances, Tolerances::default());
        let s = Scenario::build(f.clone(), &Overrides::default()).unwrap();
        assert!(s.fine_nbhd.union.is_empty());
        assert_eq!(s.wos.samples, 2000);
        // emitted configuration parses back to the same record
        assert_eq!(ScenarioFile::parse(&f.to_toml().unwrap()).unwrap(), f);
    }

    #[test]
    fn malformed_field_is_named() {
        let bad = MINIMAL.replace("ring_radius = 0.5", "ring_radius = \"wide\"");
        let e = ScenarioFile::parse(&bad).unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("ring_radius")), "{e}");
        let unknown = MINIMAL.replace("seed = 7", "seed = 7\nsead = 8");
        assert!(matches!(ScenarioFile::parse(&unknown), Err(Error::Parse(m)) if m.contains("sead")));
        let missing = MINIMAL.replace("seed = 7", "");
        assert!(matches!(ScenarioFile::parse(&missing), Err(Error::Parse(m)) if m.contains("seed")));
    }

    #[test]
    fn too_few_samples_is_rejected_before_computation() {
        let f = ScenarioFile::parse(&MINIMAL.replace("samples = 2000", "samples = 10")).unwrap();
        assert!(matches!(Scenario::build(f, &Overrides::default()), Err(Error::Parameter(m)) if m.contains("wos.samples")));
    }

    #[test]
    fn overrides_and_profiles() {
        let f = ScenarioFile::parse(MINIMAL).unwrap();
        let ov = Overrides { samples: Some(5000), seed: Some(99), profile: Some(Profile::Strict), ..Default::default() };
        let s = Scenario::build(f.clone(), &ov).unwrap();
        assert_eq!((s.wos.samples, s.wos.seed), (20_000, 99));
        let fast = Scenario::build(f, &Overrides { profile: Some(Profile::Fast), ..Default::default() }).unwrap();
        assert_eq!(fast.wos.samples, MIN_SAMPLES);
        assert_eq!(fast.tolerances.v1_samples, 5);
    }

    #[test]
    fn union_touching_the_disk_is_rejected() {
        let f = ScenarioFile::parse(&MINIMAL.replace("ring_radius = 0.5", "ring_radius = 0.5\nunion = [[0.0, 1.1, 0.2]]")).unwrap();
        assert!(matches!(Scenario::build(f, &Overrides::default()), Err(Error::Parameter(m)) if m.contains("geometry.union")));
    }
}
