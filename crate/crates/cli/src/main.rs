//! `circlepose`: plane pose from the image of one circle.
//!
//! Exit codes: 0 success, 1 error, 2 pose is geometrically undecidable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use circlepose::disambiguate::DisambiguationRule;
use circlepose::intrinsics::{default_intrinsics, CameraIntrinsics, FocalModel};
use circlepose::io;
use circlepose::pipeline::{estimate_pose, SidePrior};
use circlepose::simulator::experiment::{run_experiment, ExperimentConfig};
use circlepose::simulator::observations::evaluate_observations;
use circlepose::simulator::prop2::{verify_prop2, write_prop2_csv, Prop2Config};
use circlepose::{fit_ellipse, Conic, Error, Signature};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const UNDECIDED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "circlepose",
    version,
    about = "Plane pose from the image of a single circle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the plane pose from an ellipse. Exit 2 if the twofold ambiguity cannot be resolved.
    Pose(PoseArgs),
    /// Fit an ellipse to contour points and print its six coefficients.
    Fit(FitArgs),
    /// Run the error-vs-distance simulation and write its CSV.
    Simulate(SimulateArgs),
    /// Fit the default focal model (35 mm-equivalent focal, mm) on a device list.
    CalibModel(CalibArgs),
    /// Check the vanishing-line selection rule against ground truth and write the table.
    VerifyProp2(Prop2Args),
}

#[derive(Args)]
struct CameraArgs {
    /// Intrinsics JSON: {"f_px": focal in pixels, "width_px": .., "height_px": ..}.
    #[arg(long, value_name = "FILE", conflicts_with = "default_model")]
    intrinsics: Option<PathBuf>,
    /// Use the default focal model (mean 35 mm-equivalent focal) instead of exact intrinsics.
    #[arg(long)]
    default_model: bool,
    /// Focal model JSON written by `calib-model`; defaults to the built-in device list.
    #[arg(long, value_name = "FILE", requires = "default_model")]
    model: Option<PathBuf>,
    /// Image size in pixels, WIDTHxHEIGHT (needed with --default-model).
    #[arg(long, value_name = "WxH", value_parser = parse_image_size)]
    image_size: Option<(u32, u32)>,
    /// Multiply the focal length (pixels) by this factor before use.
    #[arg(long, value_name = "F", default_value_t = 1.0)]
    focal_modifier: f64,
}

#[derive(Args)]
struct PoseArgs {
    /// Ellipse JSON in pixels: [a,b,c,d,e,f], {"coeffs": [..]} or {"m": 3x3}.
    #[arg(long, value_name = "FILE")]
    ellipse: PathBuf,
    #[command(flatten)]
    camera: CameraArgs,
    /// Marker diameter; distances and centres are reported in this unit.
    #[arg(long, value_name = "D", default_value_t = 1.0)]
    marker_diameter: f64,
    /// Assume the optical axis passes through the marker centre (resolves the ambiguity).
    #[arg(long)]
    assume_centered: bool,
    /// Include base points and degenerate pencil members in the report.
    #[arg(long)]
    dump_pencil: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with header x,y (pixels).
    #[arg(long, value_name = "FILE")]
    contours: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config JSON; flags below override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Trials per (angle, distance, modifier) cell.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    #[arg(long, value_name = "N", env = "CIRCLEPOSE_SEED")]
    seed: Option<u64>,
    /// Contour points sampled per ellipse.
    #[arg(long, value_name = "N")]
    contour_points: Option<usize>,
    /// Contour noise standard deviation, pixels per coordinate.
    #[arg(long, value_name = "PX")]
    noise_sigma: Option<f64>,
    /// Focal modifiers to sweep (unitless, repeatable); replaces the config list.
    #[arg(long = "focal-modifier", value_name = "F")]
    focal_modifiers: Vec<f64>,
    /// Evaluate externally detected ellipses (JSON) instead of running the sweep.
    #[arg(long, value_name = "FILE", conflicts_with = "config")]
    observations: Option<PathBuf>,
    /// Output (CSV for the sweep, JSON for observations); stdout when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibArgs {
    /// Device list JSON of {"device", "f35_mm"} (mm); the built-in list when absent.
    #[arg(long, value_name = "FILE")]
    devices: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Prop2Args {
    /// Noise-free scenes per set.
    #[arg(long, value_name = "N", default_value_t = Prop2Config::default().trials)]
    trials: usize,
    /// Noisy scenes (σ in pixels set by --noise-sigma) at 15 marker diameters, 30°.
    #[arg(long, value_name = "N", default_value_t = Prop2Config::default().noisy_trials)]
    noisy_trials: usize,
    #[arg(long, value_name = "PX", default_value_t = Prop2Config::default().noise_sigma)]
    noise_sigma: f64,
    #[arg(long, value_name = "N", env = "CIRCLEPOSE_SEED", default_value_t = 0)]
    seed: u64,
    /// Per-scene CSV table.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Summary JSON; stdout when absent.
    #[arg(long, value_name = "FILE")]
    summary: Option<PathBuf>,
}

fn parse_image_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: u32 = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let h: u32 = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    if w == 0 || h == 0 {
        return Err("image size must be positive".into());
    }
    Ok((w, h))
}

type CliResult<T> = Result<T, Error>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

fn load_model(path: Option<&Path>) -> CliResult<FocalModel> {
    match path {
        Some(p) => io::parse_focal_model_json(&read(p)?),
        None => Ok(FocalModel::builtin()),
    }
}

fn resolve_camera(args: &CameraArgs) -> CliResult<CameraIntrinsics> {
    let k = match (&args.intrinsics, args.default_model) {
        (Some(p), _) => io::parse_intrinsics_json(&read(p)?)?,
        (None, true) => {
            let (w, h) = args.image_size.ok_or_else(|| {
                Error::InvalidArgument("--default-model needs --image-size WxH".into())
            })?;
            default_intrinsics(w, h, &load_model(args.model.as_deref())?)?
        }
        (None, false) => {
            return Err(Error::InvalidArgument(
                "give --intrinsics FILE or --default-model".into(),
            ))
        }
    };
    k.focal_modifier(args.focal_modifier)
}

#[derive(Clone, Serialize)]
struct CandidateReport {
    vanishing_line: [f64; 3],
    normal: [f64; 3],
    distance: f64,
    center: [f64; 3],
    homography: [[f64; 3]; 3],
}

#[derive(Serialize)]
struct PencilDump {
    base_points: Vec<[f64; 3]>,
    degenerate_members: Vec<[[f64; 3]; 3]>,
    conic_unit_det: [[f64; 3]; 3],
    iac_unit_det: [[f64; 3]; 3],
}

#[derive(Serialize)]
struct PoseReport {
    intrinsics: CameraIntrinsics,
    marker_diameter: f64,
    lambdas: [f64; 3],
    signatures: [Signature; 3],
    degenerate: bool,
    candidates: Vec<CandidateReport>,
    separation_products: Vec<f64>,
    /// Index into `candidates`, null when undecided.
    selected: Option<usize>,
    rule_fired: DisambiguationRule,
    selected_pose: Option<CandidateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pencil: Option<PencilDump>,
}

fn rows(m: &nalgebra::Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn cmd_pose(a: &PoseArgs) -> CliResult<u8> {
    let c: Conic = io::parse_conic_json(&read(&a.ellipse)?)?;
    let k = resolve_camera(&a.camera)?;
    let side = if a.assume_centered {
        SidePrior::AssumeCentered
    } else {
        SidePrior::Unknown
    };
    let est = estimate_pose(&c, &k, a.marker_diameter, side)?;
    let candidates: Vec<CandidateReport> = est
        .candidates
        .candidates
        .iter()
        .zip(&est.poses)
        .map(|(cand, p)| CandidateReport {
            vanishing_line: (*cand.line.coords()).into(),
            normal: p.normal.into(),
            distance: p.distance,
            center: p.center.into(),
            homography: rows(&p.homography),
        })
        .collect();
    let selected = est.disambiguation.selected.map(|c| c.index());
    let selected_pose = selected.map(|i| candidates[i].clone());
    let pencil = a.dump_pencil.then(|| PencilDump {
        base_points: est
            .pencil
            .base_points
            .iter()
            .map(|z| (*z.coords()).into())
            .collect(),
        degenerate_members: est
            .pencil
            .degenerates
            .iter()
            .map(|d| rows(d.matrix()))
            .collect(),
        conic_unit_det: rows(est.pencil.conic.matrix()),
        iac_unit_det: rows(est.pencil.iac.matrix()),
    });
    let report = PoseReport {
        intrinsics: k,
        marker_diameter: a.marker_diameter,
        lambdas: est.pencil.lambdas,
        signatures: est.pencil.signatures,
        degenerate: est.pencil.degenerate,
        candidates,
        separation_products: est.disambiguation.separation_products.clone(),
        selected,
        rule_fired: est.disambiguation.rule_fired,
        selected_pose,
        pencil,
    };
    emit(a.out.as_deref(), &to_json(&report)?)?;
    Ok(if selected.is_some() { 0 } else { UNDECIDED })
}

#[derive(Serialize)]
struct FitReport {
    coeffs: [f64; 6],
}

fn cmd_fit(a: &FitArgs) -> CliResult<u8> {
    let pts = io::parse_contour_csv(&read(&a.contours)?)?;
    let c = fit_ellipse(&pts)?;
    let m = c.canonical_matrix();
    let coeffs = [
        m[(0, 0)],
        2.0 * m[(0, 1)],
        m[(1, 1)],
        2.0 * m[(0, 2)],
        2.0 * m[(1, 2)],
        m[(2, 2)],
    ];
    emit(a.out.as_deref(), &to_json(&FitReport { coeffs })?)?;
    Ok(0)
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<u8> {
    if let Some(path) = &a.observations {
        let set = io::parse_observations_json(&read(path)?)?;
        let k = set.resolve_intrinsics(&FocalModel::builtin())?;
        let results = evaluate_observations(&set, &k)?;
        emit(a.out.as_deref(), &to_json(&results)?)?;
        return Ok(0);
    }
    let mut cfg = match &a.config {
        Some(p) => io::parse_experiment_config(&read(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.contour_points {
        cfg.contour_points = n;
    }
    if let Some(s) = a.noise_sigma {
        cfg.noise_sigma = s;
    }
    if !a.focal_modifiers.is_empty() {
        cfg.focal_modifiers = a.focal_modifiers.clone();
    }
    let rows = run_experiment(&cfg)?;
    let mut buf = Vec::new();
    io::write_trial_csv(&rows, &mut buf)?;
    emit(a.out.as_deref(), &buf)?;
    Ok(0)
}

/// Readable back through `--model`.
#[derive(Serialize)]
struct ModelReport {
    #[serde(flatten)]
    model: FocalModel,
    std_f35: f64,
}

fn cmd_calib(a: &CalibArgs) -> CliResult<u8> {
    let model = match &a.devices {
        Some(p) => FocalModel::from_devices(io::parse_devices_json(&read(p)?)?)?,
        None => FocalModel::builtin(),
    };
    let report = ModelReport {
        std_f35: model.std_f35(),
        model,
    };
    emit(a.out.as_deref(), &to_json(&report)?)?;
    Ok(0)
}

fn cmd_prop2(a: &Prop2Args) -> CliResult<u8> {
    let cfg = Prop2Config {
        trials: a.trials,
        noisy_trials: a.noisy_trials,
        noise_sigma: a.noise_sigma,
        seed: a.seed,
    };
    let (rows, summary) = verify_prop2(&cfg)?;
    if let Some(p) = &a.out {
        write_prop2_csv(&rows, fs::File::create(p)?)?;
    }
    emit(a.summary.as_deref(), &to_json(&summary)?)?;
    Ok(0)
}

fn main() -> ExitCode {
    // Usage errors exit 1; 2 is reserved for an undecided pose.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::FAILURE;
        }
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Pose(a) => cmd_pose(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::CalibModel(a) => cmd_calib(a),
        Command::VerifyProp2(a) => cmd_prop2(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("circlepose: {e}");
            ExitCode::FAILURE
        }
    }
}
