use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use finehull::finefun::SqrtBranchSumFn;
use finehull::geometry::{CircArc, Disk};
use finehull::harmonic::{hm_disk_arc_exact, propagation_bound, two_constant_bound, WoSConfig};
use finehull::scenario::{
    branched_cover_enumerate, hm_study, run_scenario_file, sheet_study, Overrides, Pipeline, Profile, INPUT_ERROR_EXIT,
};
use finehull::{CPoint, Error};

/// Certificates and studies for fine analytic continuation.
#[derive(Parser)]
#[command(name = "finehull", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full certification chain and write certificate.json.
    Certify(RunArgs),
    /// Label the components of the punctured neighborhood.
    Components(RunArgs),
    /// Enumerate square-root sheets and check their identities.
    Sheets(RunArgs),
    /// Compare walk-on-spheres with the exact disk measure.
    HmStudy(RunArgs),
    /// Exterior harmonic measure along an exhaustion.
    DecayStudy(RunArgs),
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    file: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long = "tolerance-profile", value_parser = clap::value_parser!(Profile))]
    tolerance_profile: Option<Profile>,
}

fn error_exit(e: &Error) -> u8 {
    match e {
        Error::CircleSelection(_) | Error::Normalization(_) | Error::Bound(_) => 1,
        Error::SingularNode { .. } | Error::BranchCut(_) => 3,
        _ => INPUT_ERROR_EXIT as u8,
    }
}

fn run(pipeline: Pipeline, a: RunArgs) -> ExitCode {
    let ov = Overrides { samples: a.samples, seed: a.seed, resolution: a.resolution, profile: a.tolerance_profile };
    match run_scenario_file(&a.file, Some(pipeline), &ov, &a.out) {
        Ok(outcome) => {
            println!("{}: {}", pipeline.name(), outcome.summary);
            for f in &outcome.artifacts {
                println!("  wrote {}", f.display());
            }
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit(&e))
        }
    }
}

fn selftest() -> ExitCode {
    let mut ok = true;
    let mut report = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };

    let disk = Disk { center: CPoint::new(1.0, 0.0), radius: 0.3 };
    let sweep = 5.0 * std::f64::consts::PI / 6.0;
    let exact = CircArc::from_start_sweep(disk.center, disk.radius, 2.0, sweep)
        .and_then(|arc| hm_disk_arc_exact(&disk, &arc, disk.center));
    match exact {
        Ok(v) => report("arc fraction at the center", v == 5.0 / 12.0, format!("{v}")),
        Err(e) => report("arc fraction at the center", false, e.to_string()),
    }

    let identities = (1..=16).all(|n| propagation_bound(n as f64, 0.25) == -(n as f64) / 4.0)
        && two_constant_bound(0.5, 1.0, 0.25) == 0.25 * 0.5f64.ln();
    report("two-constant and propagation identities", identities, "16 depths".into());

    match hm_study(2, &WoSConfig::new(20_000, 7), 3.0) {
        Ok(st) => {
            let worst = st.rows.iter().map(|r| r.z_score).fold(0.0, f64::max);
            report("walk-on-spheres against exact measure", st.pass, format!("worst z-score {worst:.2}"));
        }
        Err(e) => report("walk-on-spheres against exact measure", false, e.to_string()),
    }

    let sheets = SqrtBranchSumFn::new(
        vec![
            (CPoint::new(1.5, 0.0), CPoint::new(2.0, 0.3)),
            (CPoint::new(-1.4, 0.5), CPoint::new(-1.8, 0.9)),
            (CPoint::new(0.2, -1.6), CPoint::new(0.1, -2.2)),
        ],
        vec![CPoint::new(1.0, 0.0), CPoint::new(0.5, 0.0), CPoint::new(0.25, 0.1)],
    )
    .and_then(|f| branched_cover_enumerate(&f, 1))
    .and_then(|atlas| sheet_study(&atlas, 3));
    match sheets {
        Ok(st) => report("square-root sheets and monodromy", st.pass, format!("{} sheets", st.rows.len())),
        Err(e) => report("square-root sheets and monodromy", false, e.to_string()),
    }

    ExitCode::from(if ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Certify(a) => run(Pipeline::Certify, a),
        Command::Components(a) => run(Pipeline::Components, a),
        Command::Sheets(a) => run(Pipeline::Sheets, a),
        Command::HmStudy(a) => run(Pipeline::HmStudy, a),
        Command::DecayStudy(a) => run(Pipeline::DecayStudy, a),
        Command::Selftest => selftest(),
    }
}
