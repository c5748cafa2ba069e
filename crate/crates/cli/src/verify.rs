//! The self-verification battery behind `pathphase verify`.
//!
//! Each check exercises one analytic claim end to end — exact frontier
//! saturation, random-POVM frontier dominance, closed-form/table agreement,
//! the information decomposition, bound ordering, and Monte Carlo
//! concentration — and contributes one entry to a JSON report. The command
//! exits 0 only when every check passes.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use pathphase::{
    binary_entropy, closed_form_probabilities, conditional_total_correlation, frontier_lhs,
    holevo_bound, identity_sweep, indicator_joint, info_report, joint_distribution,
    maximize_joint_correct, monte_carlo_game, pareto_sweep, EnsembleGeometry, Povm,
};

use crate::{to_pretty_json, write_output, CliError};

/// Tolerance for identities that hold exactly in real arithmetic.
const EQUALITY_TOL: f64 = 1e-12;
/// Safety margin on the frontier inequality for sampled POVMs.
const FRONTIER_SLACK: f64 = 1e-9;
/// Accuracy demanded of the numerical joint-success maximiser.
const MAXIMIZER_TOL: f64 = 1e-6;
/// How close the maximising POVM must sit to the frontier surface.
const SEARCH_FRONTIER_TOL: f64 = 1e-3;
/// Margin by which the Holevo-style bound must clear the exact frontier.
const GAP_MARGIN: f64 = 1e-3;
/// Width of the Monte Carlo acceptance band, in standard errors.
const SIGMA_BAND: f64 = 4.0;
/// Number of independently seeded Monte Carlo runs.
const MC_RUNS: u64 = 20;
/// Excursions beyond the band tolerated per estimated probability.
const MAX_EXCURSIONS: u64 = 1;
/// Grid points per direction for the exact-saturation sweep.
const GRID_POINTS: usize = 21;

#[derive(Args)]
pub struct VerifyArgs {
    /// Which-way distance of the reference geometries.
    #[arg(long, default_value_t = 0.65)]
    dww: f64,
    /// Which-phase distance of the reference geometries.
    #[arg(long, default_value_t = 0.6)]
    dwp: f64,
    /// Which-mixedness distance of the mixed reference geometry.
    #[arg(long, default_value_t = 0.3)]
    dwm: f64,
    /// Random POVMs per sweep check.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Rounds per Monte Carlo run.
    #[arg(long, default_value_t = 1_000_000)]
    rounds: u64,
    /// Base RNG seed; also read from PATHPHASE_SEED.
    #[arg(long, env = "PATHPHASE_SEED", default_value_t = 42)]
    seed: u64,
    /// Optional POVM JSON file to validate and cross-check.
    #[arg(long, value_name = "FILE")]
    povm: Option<PathBuf>,
    /// Output file for the JSON report; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    details: serde_json::Value,
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    seed: u64,
    samples: u64,
    rounds: u64,
    checks: Vec<Check>,
}

fn record(checks: &mut Vec<Check>, name: &'static str, passed: bool, details: serde_json::Value) {
    eprintln!("{name}: {}", if passed { "PASS" } else { "FAIL" });
    checks.push(Check {
        name,
        passed,
        details,
    });
}

pub fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    if args.rounds == 0 {
        return Err(CliError::Usage("--rounds must be positive".into()));
    }
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let pure =
        EnsembleGeometry::pure(args.dww, args.dwp).map_err(|e| CliError::Usage(e.to_string()))?;
    let mixed = EnsembleGeometry::mixed(args.dww, args.dwp, args.dwm)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let run = |e: pathphase::DiscriminationError| CliError::Runtime(e.to_string());

    let mut checks = Vec::new();

    // 1. Every member of the measurement family sits exactly on the frontier.
    {
        let mut max_dev = 0.0f64;
        for i in 0..GRID_POINTS {
            let mu = i as f64 / (GRID_POINTS - 1) as f64;
            for j in 0..GRID_POINTS {
                let z0 = j as f64 / (GRID_POINTS - 1) as f64;
                let povm = Povm::optimal_family(mu, z0).expect("grid parameters are in range");
                let gp = joint_distribution(&pure, &povm)
                    .map_err(run)?
                    .guess_probabilities();
                max_dev = max_dev.max((frontier_lhs(&pure, &gp) - 1.0).abs());
            }
        }
        record(
            &mut checks,
            "frontier_equality_grid",
            max_dev <= EQUALITY_TOL,
            json!({ "grid": GRID_POINTS, "max_dev": max_dev, "tol": EQUALITY_TOL }),
        );
    }

    // 2-3. No random POVM beats the frontier, while the saturating control
    // grid stays on it to machine precision.
    for (name, geometry, seed) in [
        ("frontier_inequality_pure", &pure, args.seed),
        (
            "frontier_inequality_mixed",
            &mixed,
            args.seed.wrapping_add(1),
        ),
    ] {
        let sweep = pareto_sweep(geometry, args.samples, seed).map_err(run)?;
        let passed = sweep.violations == 0
            && sweep.max_lhs <= 1.0 + FRONTIER_SLACK
            && sweep.control_max_dev <= EQUALITY_TOL;
        record(
            &mut checks,
            name,
            passed,
            json!({
                "samples": sweep.n_samples,
                "violations": sweep.violations,
                "max_lhs": sweep.max_lhs,
                "control_max_dev": sweep.control_max_dev,
            }),
        );
    }

    // 4-5. Table-level guessing probabilities match their closed forms and
    // the information decomposition balances, for every sampled POVM.
    let mut worst_holevo_excess = f64::NEG_INFINITY;
    for (name, geometry, seed) in [
        (
            "closed_form_identities_pure",
            &pure,
            args.seed.wrapping_add(2),
        ),
        (
            "closed_form_identities_mixed",
            &mixed,
            args.seed.wrapping_add(3),
        ),
    ] {
        let report = identity_sweep(geometry, args.samples, seed).map_err(run)?;
        worst_holevo_excess = worst_holevo_excess.max(report.max_holevo_excess);
        let passed = report.max_prob_dev <= EQUALITY_TOL
            && report.max_pc_dev <= EQUALITY_TOL
            && report.max_residual <= EQUALITY_TOL;
        record(
            &mut checks,
            name,
            passed,
            json!({
                "samples": report.n_samples,
                "max_prob_dev": report.max_prob_dev,
                "max_pc_dev": report.max_pc_dev,
                "max_residual": report.max_residual,
            }),
        );
    }

    // 6. The random search plus family grid finds the analytic joint-success
    // maximum (1 + D)/4 with D the encoded-plane distance, on the frontier.
    {
        let (argmax, p_c) =
            maximize_joint_correct(&pure, args.samples, args.seed.wrapping_add(4)).map_err(run)?;
        let analytic = (1.0 + pure.d_ww().hypot(pure.d_wp())) / 4.0;
        let gp = joint_distribution(&pure, &argmax)
            .map_err(run)?
            .guess_probabilities();
        let lhs = frontier_lhs(&pure, &gp);
        let passed = (p_c - analytic).abs() <= MAXIMIZER_TOL && lhs >= 1.0 - SEARCH_FRONTIER_TOL;
        record(
            &mut checks,
            "joint_success_maximum",
            passed,
            json!({ "p_c": p_c, "analytic": analytic, "lhs_at_argmax": lhs }),
        );
    }

    // 7. Planar detector scheme: the decomposition balances, the guess
    // conditionals are flat, and each per-bit term collapses to its
    // binary-entropy closed form.
    {
        let mut max_residual = 0.0f64;
        let mut max_bit_dev = 0.0f64;
        let mut all_flat = true;
        for i in 0..=10 {
            let e = i as f64 / 10.0;
            let povm = Povm::ww_detector_scheme(e).expect("efficiency grid is in range");
            let report = info_report(&pure, &povm).map_err(run)?;
            let gp = closed_form_probabilities(&pure, &povm).map_err(run)?;
            max_residual = max_residual.max(report.residual);
            all_flat &= report.flat_guesses;
            let h = |p: f64| binary_entropy(p).expect("probability in range");
            max_bit_dev = max_bit_dev
                .max((report.i_ww - (1.0 - h(gp.p_ww))).abs())
                .max((report.i_wp - (1.0 - h(gp.p_wp))).abs());
        }
        record(
            &mut checks,
            "decomposition_pure_scheme",
            max_residual <= EQUALITY_TOL && max_bit_dev <= EQUALITY_TOL && all_flat,
            json!({
                "max_residual": max_residual,
                "max_per_bit_dev": max_bit_dev,
                "flat_guesses": all_flat,
            }),
        );
    }

    // 8. Two-detector scheme on the mixed geometry: the decomposition
    // balances; on the zero-centre geometry the cross term additionally
    // equals the indicator-tuple total correlation.
    {
        let mut max_residual = 0.0f64;
        let mut max_indicator_dev = 0.0f64;
        let box_dwm = (1.0 - args.dww * args.dww - args.dwp * args.dwp)
            .max(0.0)
            .sqrt();
        let zero_centre = EnsembleGeometry::mixed(args.dww, args.dwp, box_dwm)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        for i in 0..=4 {
            for j in 0..=4 {
                let povm = Povm::two_detector_scheme(i as f64 / 4.0, j as f64 / 4.0)
                    .expect("efficiency grid is in range");
                let report = info_report(&mixed, &povm).map_err(run)?;
                max_residual = max_residual.max(report.residual);
                let jd = joint_distribution(&zero_centre, &povm).map_err(run)?;
                let dev = (conditional_total_correlation(&jd)
                    - indicator_joint(&jd).total_correlation())
                .abs();
                max_indicator_dev = max_indicator_dev.max(dev);
            }
        }
        record(
            &mut checks,
            "decomposition_mixed_scheme",
            max_residual <= EQUALITY_TOL && max_indicator_dev <= EQUALITY_TOL,
            json!({
                "max_residual": max_residual,
                "max_indicator_dev": max_indicator_dev,
                "zero_centre_dwm": box_dwm,
            }),
        );
    }

    // 9. The Holevo quantity dominates the extracted information for every
    // sampled POVM, and beats the sharp which-way point by a clear gap.
    {
        let holevo = holevo_bound(&pure);
        let i_ww_sharp =
            1.0 - binary_entropy((1.0 + pure.d_ww()) / 2.0).expect("probability in range");
        let gap = holevo - i_ww_sharp;
        let passed = worst_holevo_excess <= EQUALITY_TOL && gap > GAP_MARGIN;
        record(
            &mut checks,
            "holevo_dominance",
            passed,
            json!({
                "max_excess": worst_holevo_excess,
                "holevo": holevo,
                "sharp_ww_gap": gap,
            }),
        );
    }

    // 10. Monte Carlo estimates concentrate: across independently seeded
    // runs, at most one excursion beyond the sigma band per probability.
    {
        let povm = Povm::ww_detector_scheme(0.6).expect("efficiency in range");
        let analytic = closed_form_probabilities(&pure, &povm).map_err(run)?;
        let mut excursions = [0u64; 3];
        for k in 0..MC_RUNS {
            let game = monte_carlo_game(&pure, &povm, args.rounds, args.seed.wrapping_add(100 + k))
                .map_err(run)?;
            let trials = [
                (game.p_ww, analytic.p_ww, game.se_ww),
                (game.p_wp, analytic.p_wp, game.se_wp),
                (game.p_c, analytic.p_c, game.se_c),
            ];
            for (slot, (estimate, exact, se)) in excursions.iter_mut().zip(trials) {
                if (estimate - exact).abs() > SIGMA_BAND * se {
                    *slot += 1;
                }
            }
        }
        let passed = excursions.iter().all(|&n| n <= MAX_EXCURSIONS);
        record(
            &mut checks,
            "monte_carlo_concentration",
            passed,
            json!({
                "runs": MC_RUNS,
                "rounds": args.rounds,
                "sigma_band": SIGMA_BAND,
                "excursions_ww": excursions[0],
                "excursions_wp": excursions[1],
                "excursions_c": excursions[2],
            }),
        );
    }

    // 11. Optional user-supplied POVM: parse, validate, and cross-check the
    // closed forms against its joint table. Any failure is reported as a
    // failed check rather than a usage error.
    if let Some(path) = &args.povm {
        let (passed, details) = match povm_fixture_check(&pure, path) {
            Ok(details) => (true, details),
            Err(message) => (false, json!({ "error": message })),
        };
        record(&mut checks, "povm_fixture", passed, details);
    }

    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        passed,
        seed: args.seed,
        samples: args.samples,
        rounds: args.rounds,
        checks,
    };
    write_output(&args.out, &to_pretty_json(&report))?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn povm_fixture_check(
    geometry: &EnsembleGeometry,
    path: &std::path::Path,
) -> Result<serde_json::Value, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let povm =
        Povm::from_json(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))?;
    povm.validate().map_err(|e| e.to_string())?;
    let table = joint_distribution(geometry, &povm)
        .map_err(|e| e.to_string())?
        .guess_probabilities();
    let closed = closed_form_probabilities(geometry, &povm).map_err(|e| e.to_string())?;
    let report = info_report(geometry, &povm).map_err(|e| e.to_string())?;
    let max_prob_dev = (table.p_ww - closed.p_ww)
        .abs()
        .max((table.p_wp - closed.p_wp).abs())
        .max((table.p_c - closed.p_c).abs());
    if max_prob_dev > EQUALITY_TOL {
        return Err(format!(
            "closed forms deviate from the joint table by {max_prob_dev:e}"
        ));
    }
    if report.residual > EQUALITY_TOL {
        return Err(format!(
            "decomposition residual {:e} exceeds {EQUALITY_TOL:e}",
            report.residual
        ));
    }
    Ok(json!({
        "n_outcomes": povm.n_outcomes(),
        "max_prob_dev": max_prob_dev,
        "residual": report.residual,
    }))
}
