//! Command-line front end for the path-phase discrimination library.
//!
//! Emits figure-ready CSV/JSON data (frontier traces, information
//! trade-offs, bound comparisons), simulates the guessing game, and runs the
//! self-verification battery. All outputs are byte-deterministic given the
//! flags and seed.
//!
//! Exit codes: 0 on success, 1 on check or runtime failure, 2 on usage
//! errors.

mod verify;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pathphase::{
    binary_entropy, closed_form_probabilities, frontier_lhs, holevo_bound, info_report,
    joint_distribution, monte_carlo_game, EnsembleGeometry, GuessProbabilities, Mode, Povm, Sign,
};

#[derive(Parser)]
#[command(
    name = "pathphase",
    version,
    about = "Path-phase discrimination games: frontier data, information trade-offs, verification, and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the Pareto frontier of guessing probabilities.
    Frontier(FrontierArgs),
    /// Sweep the detector efficiency and emit the information decomposition.
    Tradeoff(TradeoffArgs),
    /// Run the verification battery; exit 0 only if every check passes.
    Verify(verify::VerifyArgs),
    /// Simulate the guessing game round by round for a scheme or POVM file.
    Simulate(SimulateArgs),
    /// Compare the exact information frontier with the Holevo-style bound.
    HolevoGap(HolevoGapArgs),
}

/// Input ensemble selection, either by distances or by preparation angles.
#[derive(Args)]
struct GeometryArgs {
    /// Which-way distance d_ww (z axis).
    #[arg(long, value_name = "D")]
    dww: Option<f64>,
    /// Which-phase distance d_wp (y axis).
    #[arg(long, value_name = "D")]
    dwp: Option<f64>,
    /// Which-mixedness distance d_wm (x axis); selects mixed mode.
    #[arg(long, value_name = "D")]
    dwm: Option<f64>,
    /// Preparation angle alpha in radians (pure mode); requires --phi.
    #[arg(long, value_name = "RAD", requires = "phi", conflicts_with_all = ["dww", "dwp", "dwm"])]
    alpha: Option<f64>,
    /// Preparation angle phi in radians (pure mode); requires --alpha.
    #[arg(long, value_name = "RAD", requires = "alpha", conflicts_with_all = ["dww", "dwp", "dwm"])]
    phi: Option<f64>,
}

impl GeometryArgs {
    fn resolve(&self) -> Result<EnsembleGeometry, CliError> {
        if let (Some(alpha), Some(phi)) = (self.alpha, self.phi) {
            return EnsembleGeometry::from_angles(alpha, phi)
                .map_err(|e| CliError::Usage(e.to_string()));
        }
        let (dww, dwp) = match (self.dww, self.dwp) {
            (Some(dww), Some(dwp)) => (dww, dwp),
            _ => {
                return Err(CliError::Usage(
                    "specify the geometry with --dww and --dwp (plus --dwm for mixed mode) \
                     or with --alpha and --phi"
                        .into(),
                ))
            }
        };
        match self.dwm {
            None => EnsembleGeometry::pure(dww, dwp),
            Some(dwm) => EnsembleGeometry::mixed(dww, dwp, dwm),
        }
        .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeKind {
    /// Unbalanced which-way detectors, parameter --E.
    Ww,
    /// Tilted two-outcome von Neumann analyser, parameters --Tout and --orientation.
    Vn,
    /// Two cascaded detectors splitting all three axes, parameters --E1 and --E2.
    TwoDetector,
    /// A member of the frontier-saturating family, parameters --mu and --z0.
    Optimal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrientationArg {
    Plus,
    Minus,
}

impl From<OrientationArg> for Sign {
    fn from(o: OrientationArg) -> Sign {
        match o {
            OrientationArg::Plus => Sign::Plus,
            OrientationArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Args)]
struct FrontierArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Family weight reported in the mu column.
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    /// Number of grid points per sweep direction (at least 2).
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TradeoffArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Number of efficiency grid points (at least 2).
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HolevoGapArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Number of z0 grid points (at least 2).
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Measurement scheme; alternative to --povm.
    #[arg(long, value_enum)]
    scheme: Option<SchemeKind>,
    /// Detector efficiency for --scheme ww.
    #[arg(long = "E", value_name = "E")]
    e: Option<f64>,
    /// First detector efficiency for --scheme two-detector.
    #[arg(long = "E1", value_name = "E1")]
    e1: Option<f64>,
    /// Second detector efficiency for --scheme two-detector.
    #[arg(long = "E2", value_name = "E2")]
    e2: Option<f64>,
    /// Analyser transmission for --scheme vn (in [1/2, 1]).
    #[arg(long = "Tout", value_name = "T")]
    t_out: Option<f64>,
    /// Diagonal pairing for --scheme vn.
    #[arg(long, value_enum, default_value_t = OrientationArg::Plus)]
    orientation: OrientationArg,
    /// Family weight for --scheme optimal.
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    /// Family tilt for --scheme optimal.
    #[arg(long)]
    z0: Option<f64>,
    /// JSON file holding a serialized POVM; alternative to --scheme.
    #[arg(long, value_name = "FILE", conflicts_with = "scheme")]
    povm: Option<PathBuf>,
    /// Number of game rounds (must be positive).
    #[arg(long, default_value_t = 1_000_000)]
    rounds: u64,
    /// RNG seed; also read from PATHPHASE_SEED.
    #[arg(long, env = "PATHPHASE_SEED", default_value_t = 42)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// CLI-level failures, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or invalid input values: exit 2.
    Usage(String),
    /// I/O or internal failures during an otherwise valid run: exit 1.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Frontier(args) => cmd_frontier(args)?,
        Command::Tradeoff(args) => cmd_tradeoff(args)?,
        Command::Simulate(args) => cmd_simulate(args)?,
        Command::HolevoGap(args) => cmd_holevo_gap(args)?,
        Command::Verify(args) => return verify::cmd_verify(args),
    }
    Ok(ExitCode::SUCCESS)
}

/// Writes `content` to the named file, or to stdout when no file is given.
fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn check_grid(grid: usize) -> Result<(), CliError> {
    if grid < 2 {
        return Err(CliError::Usage(format!(
            "--grid must be at least 2, got {grid}"
        )));
    }
    Ok(())
}

/// Evenly spaced values covering `[0, hi]` inclusive.
fn linspace(hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let scale = hi / (n - 1) as f64;
    (0..n).map(move |i| i as f64 * scale)
}

// ---------------------------------------------------------------------------
// frontier

#[derive(Serialize)]
struct FrontierRow {
    mu: f64,
    z0: f64,
    y0: f64,
    #[serde(rename = "P_ww")]
    p_ww: f64,
    #[serde(rename = "P_wp")]
    p_wp: f64,
    #[serde(rename = "P_wm", skip_serializing_if = "Option::is_none")]
    p_wm: Option<f64>,
    lhs: f64,
}

fn cmd_frontier(args: FrontierArgs) -> Result<(), CliError> {
    check_grid(args.grid)?;
    if !(0.0..=1.0).contains(&args.mu) {
        return Err(CliError::Usage(format!(
            "--mu must lie in [0, 1], got {}",
            args.mu
        )));
    }
    let rows = if args.geometry.dwm.is_some() {
        mixed_frontier_rows(&args)?
    } else {
        pure_frontier_rows(&args)?
    };
    let content = match args.format {
        OutputFormat::Json => to_pretty_json(&rows),
        OutputFormat::Csv => {
            let mixed = rows.first().is_some_and(|r| r.p_wm.is_some());
            let mut csv = String::from(if mixed {
                "mu,z0,y0,P_ww,P_wp,P_wm,lhs\n"
            } else {
                "mu,z0,y0,P_ww,P_wp,lhs\n"
            });
            for r in &rows {
                csv.push_str(&format!("{},{},{},{},{}", r.mu, r.z0, r.y0, r.p_ww, r.p_wp));
                if let Some(p_wm) = r.p_wm {
                    csv.push_str(&format!(",{p_wm}"));
                }
                csv.push_str(&format!(",{}\n", r.lhs));
            }
            csv
        }
    };
    write_output(&args.out, &content)
}

/// Pure mode: realise each grid point as an actual family POVM and read the
/// probabilities off its joint table.
fn pure_frontier_rows(args: &FrontierArgs) -> Result<Vec<FrontierRow>, CliError> {
    let geometry = args.geometry.resolve()?;
    let z0s: Vec<f64> = if geometry.d_ww() > 0.0 && geometry.d_wp() > 0.0 {
        linspace(1.0, args.grid).collect()
    } else if geometry.d_ww() > 0.0 {
        vec![1.0] // only the z axis is encoded: the frontier is one point
    } else if geometry.d_wp() > 0.0 {
        vec![0.0]
    } else {
        return Err(CliError::Usage(
            "the frontier needs at least one positive distance".into(),
        ));
    };
    let mut rows = Vec::with_capacity(z0s.len());
    for z0 in z0s {
        let povm =
            Povm::optimal_family(args.mu, z0).map_err(|e| CliError::Runtime(e.to_string()))?;
        let gp = joint_distribution(&geometry, &povm)
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .guess_probabilities();
        rows.push(FrontierRow {
            mu: args.mu,
            z0,
            y0: (1.0 - z0 * z0).max(0.0).sqrt(),
            p_ww: gp.p_ww,
            p_wp: gp.p_wp,
            p_wm: None,
            lhs: frontier_lhs(&geometry, &gp),
        });
    }
    Ok(rows)
}

/// Mixed mode: trace the ellipsoid surface directly from the closed-form
/// family expressions `P = (1 + d * component) / 2` over exactly unit
/// measurement directions.
///
/// The distances act as ellipsoid semi-axes here and are only range-checked,
/// not checked against the Bloch-ball budget: the surface is well-defined
/// (and saturates `lhs = 1`) even for semi-axes no single state family could
/// realise, which is exactly how the reference figure parameters are drawn.
fn mixed_frontier_rows(args: &FrontierArgs) -> Result<Vec<FrontierRow>, CliError> {
    let (dww, dwp) = match (args.geometry.dww, args.geometry.dwp) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CliError::Usage(
                "mixed-mode frontier needs --dww, --dwp and --dwm".into(),
            ))
        }
    };
    let dwm = args.geometry.dwm.expect("mixed path requires --dwm");
    for (name, value) in [("--dww", dww), ("--dwp", dwp), ("--dwm", dwm)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(CliError::Usage(format!(
                "{name} must lie in [0, 1], got {value}"
            )));
        }
    }
    let geometry = EnsembleGeometry::from_distances(Mode::Mixed, dww, dwp, dwm);
    let directions = ellipsoid_directions(dww, dwp, dwm, args.grid)?;
    let rows = directions
        .into_iter()
        .map(|(z0, y0, x0)| {
            let gp = GuessProbabilities {
                p_ww: (1.0 + dww * z0) / 2.0,
                p_wp: (1.0 + dwp * y0) / 2.0,
                p_wm: Some((1.0 + dwm * x0) / 2.0),
                p_c: f64::NAN, // not meaningful without a realisable state family
            };
            FrontierRow {
                mu: args.mu,
                z0,
                y0,
                p_ww: gp.p_ww,
                p_wp: gp.p_wp,
                p_wm: gp.p_wm,
                lhs: frontier_lhs(&geometry, &gp),
            }
        })
        .collect();
    Ok(rows)
}

/// Unit directions `(z0, y0, x0)` gridding the positive octant of the sphere,
/// restricted to the axes with positive distance.
fn ellipsoid_directions(
    dww: f64,
    dwp: f64,
    dwm: f64,
    grid: usize,
) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut out = Vec::new();
    match (dww > 0.0, dwp > 0.0, dwm > 0.0) {
        (true, true, true) => {
            for z0 in linspace(1.0, grid) {
                let r = (1.0 - z0 * z0).max(0.0).sqrt();
                if r == 0.0 {
                    out.push((z0, 0.0, 0.0)); // pole: the whole angular ring collapses
                    continue;
                }
                for (j, t) in linspace(half_pi, grid).enumerate() {
                    // Pin the ring endpoints to the exact axis points.
                    let (c, s) = if j == 0 {
                        (1.0, 0.0)
                    } else if j == grid - 1 {
                        (0.0, 1.0)
                    } else {
                        (t.cos(), t.sin())
                    };
                    out.push((z0, r * c, r * s));
                }
            }
        }
        (true, true, false) => {
            for z0 in linspace(1.0, grid) {
                out.push((z0, (1.0 - z0 * z0).max(0.0).sqrt(), 0.0));
            }
        }
        (true, false, true) => {
            for z0 in linspace(1.0, grid) {
                out.push((z0, 0.0, (1.0 - z0 * z0).max(0.0).sqrt()));
            }
        }
        (false, true, true) => {
            for (j, t) in linspace(half_pi, grid).enumerate() {
                let (c, s) = if j == 0 {
                    (1.0, 0.0)
                } else if j == grid - 1 {
                    (0.0, 1.0)
                } else {
                    (t.cos(), t.sin())
                };
                out.push((0.0, c, s));
            }
        }
        (true, false, false) => out.push((1.0, 0.0, 0.0)),
        (false, true, false) => out.push((0.0, 1.0, 0.0)),
        (false, false, true) => out.push((0.0, 0.0, 1.0)),
        (false, false, false) => {
            return Err(CliError::Usage(
                "the frontier needs at least one positive distance".into(),
            ))
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// tradeoff

#[derive(Serialize)]
struct TradeoffRow {
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "I_ww")]
    i_ww: f64,
    #[serde(rename = "I_wp")]
    i_wp: f64,
    #[serde(rename = "I_cross")]
    i_cross: f64,
    #[serde(rename = "I_in_out")]
    i_in_out: f64,
    holevo: f64,
}

fn cmd_tradeoff(args: TradeoffArgs) -> Result<(), CliError> {
    check_grid(args.grid)?;
    let geometry = resolve_pure(&args.geometry, "tradeoff")?;
    let mut rows = Vec::with_capacity(args.grid);
    for e in linspace(1.0, args.grid) {
        let povm = Povm::ww_detector_scheme(e).map_err(|err| CliError::Runtime(err.to_string()))?;
        let report =
            info_report(&geometry, &povm).map_err(|err| CliError::Runtime(err.to_string()))?;
        rows.push(TradeoffRow {
            e,
            i_ww: report.i_ww,
            i_wp: report.i_wp,
            i_cross: report.i_cross,
            i_in_out: report.i_in_out,
            holevo: report.holevo,
        });
    }
    let content = match args.format {
        OutputFormat::Json => to_pretty_json(&rows),
        OutputFormat::Csv => {
            let mut csv = String::from("E,I_ww,I_wp,I_cross,I_in_out,holevo\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.e, r.i_ww, r.i_wp, r.i_cross, r.i_in_out, r.holevo
                ));
            }
            csv
        }
    };
    write_output(&args.out, &content)
}

fn resolve_pure(geometry: &GeometryArgs, command: &str) -> Result<EnsembleGeometry, CliError> {
    if geometry.dwm.is_some() {
        return Err(CliError::Usage(format!(
            "{command} sweeps a planar scheme and needs a pure geometry; drop --dwm"
        )));
    }
    geometry.resolve()
}

// ---------------------------------------------------------------------------
// holevo-gap

#[derive(Serialize)]
struct HolevoGapRow {
    z0: f64,
    #[serde(rename = "I_ww")]
    i_ww: f64,
    #[serde(rename = "I_wp_max_exact")]
    i_wp_max_exact: f64,
    #[serde(rename = "I_wp_bound")]
    i_wp_bound: f64,
}

fn cmd_holevo_gap(args: HolevoGapArgs) -> Result<(), CliError> {
    check_grid(args.grid)?;
    let geometry = resolve_pure(&args.geometry, "holevo-gap")?;
    let holevo = holevo_bound(&geometry);
    let entropy = |p: f64| binary_entropy(p).expect("guessing probabilities stay within [1/2, 1]");
    let rows: Vec<HolevoGapRow> = linspace(1.0, args.grid)
        .map(|z0| {
            let y0 = (1.0 - z0 * z0).max(0.0).sqrt();
            let i_ww = 1.0 - entropy((1.0 + geometry.d_ww() * z0) / 2.0);
            HolevoGapRow {
                z0,
                i_ww,
                i_wp_max_exact: 1.0 - entropy((1.0 + geometry.d_wp() * y0) / 2.0),
                i_wp_bound: holevo - i_ww,
            }
        })
        .collect();
    let content = match args.format {
        OutputFormat::Json => to_pretty_json(&rows),
        OutputFormat::Csv => {
            let mut csv = String::from("z0,I_ww,I_wp_max_exact,I_wp_bound\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    r.z0, r.i_ww, r.i_wp_max_exact, r.i_wp_bound
                ));
            }
            csv
        }
    };
    write_output(&args.out, &content)
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct DeviationSigmas {
    ww: f64,
    wp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    wm: Option<f64>,
    c: f64,
}

#[derive(Serialize)]
struct SimulationReport {
    game: pathphase::GameResult,
    analytic: GuessProbabilities,
    deviation_sigmas: DeviationSigmas,
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.rounds == 0 {
        return Err(CliError::Usage(
            "--rounds must be positive; an empty run estimates nothing".into(),
        ));
    }
    let geometry = args.geometry.resolve()?;
    let povm = resolve_measurement(&args)?;
    povm.validate()
        .map_err(|e| CliError::Usage(format!("invalid POVM: {e}")))?;
    let analytic =
        closed_form_probabilities(&geometry, &povm).map_err(|e| CliError::Usage(e.to_string()))?;
    let game = monte_carlo_game(&geometry, &povm, args.rounds, args.seed)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let sigmas = |estimate: f64, exact: f64, se: f64| -> f64 {
        let diff = (estimate - exact).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / se.max(f64::MIN_POSITIVE)
        }
    };
    let deviation_sigmas = DeviationSigmas {
        ww: sigmas(game.p_ww, analytic.p_ww, game.se_ww),
        wp: sigmas(game.p_wp, analytic.p_wp, game.se_wp),
        wm: match (game.p_wm, analytic.p_wm, game.se_wm) {
            (Some(est), Some(exact), Some(se)) => Some(sigmas(est, exact, se)),
            _ => None,
        },
        c: sigmas(game.p_c, analytic.p_c, game.se_c),
    };
    let report = SimulationReport {
        game,
        analytic,
        deviation_sigmas,
    };
    write_output(&args.out, &to_pretty_json(&report))
}

fn resolve_measurement(args: &SimulateArgs) -> Result<Povm, CliError> {
    if let Some(path) = &args.povm {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        return Povm::from_json(&text)
            .map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", path.display())));
    }
    let scheme = args
        .scheme
        .ok_or_else(|| CliError::Usage("specify a measurement with --scheme or --povm".into()))?;
    let need = |name: &str, value: Option<f64>| {
        value.ok_or_else(|| CliError::Usage(format!("--scheme needs {name}")))
    };
    let built = match scheme {
        SchemeKind::Ww => Povm::ww_detector_scheme(need("--E", args.e)?),
        SchemeKind::Vn => Povm::vn_scheme(need("--Tout", args.t_out)?, args.orientation.into()),
        SchemeKind::TwoDetector => {
            Povm::two_detector_scheme(need("--E1", args.e1)?, need("--E2", args.e2)?)
        }
        SchemeKind::Optimal => Povm::optimal_family(args.mu, need("--z0", args.z0)?),
    };
    built.map_err(|e| CliError::Usage(e.to_string()))
}
