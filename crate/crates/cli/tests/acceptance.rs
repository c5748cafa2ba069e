//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture` or on failure). Tolerances are
//! pinned here on purpose — loosening one is a release decision, not a test
//! fix.

use std::process::Command;
use std::time::{Duration, Instant};

use pathphase::{
    binary_entropy, closed_form_probabilities, frontier_lhs, holevo_bound, identity_sweep,
    info_report, joint_distribution, maximize_joint_correct, monte_carlo_game, pareto_sweep, Bit,
    EnsembleGeometry, Povm,
};

/// Tolerance for identities that are exact in real arithmetic.
const EXACT_TOL: f64 = 1e-12;
/// Slack allowed on the frontier inequality for sampled POVMs.
const FRONTIER_SLACK: f64 = 1e-9;
/// Random POVMs per brute-force sweep.
const SWEEP_SAMPLES: u64 = 100_000;
/// Accuracy demanded of the joint-success maximiser.
const MAXIMIZER_TOL: f64 = 1e-6;
/// How close the maximising POVM must sit to the frontier.
const SEARCH_FRONTIER_TOL: f64 = 1e-3;
/// Monte Carlo budget and acceptance band.
const MC_ROUNDS: u64 = 1_000_000;
const MC_SEEDS: u64 = 20;
const SIGMA_BAND: f64 = 4.0;
/// Base seed for every randomised criterion.
const SEED: u64 = 42;

fn reference_pure() -> EnsembleGeometry {
    EnsembleGeometry::pure(0.65, 0.6).expect("reference geometry is valid")
}

fn reference_mixed() -> EnsembleGeometry {
    EnsembleGeometry::mixed(0.65, 0.6, 0.3).expect("reference geometry is valid")
}

fn report(criterion: u32, name: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion:2} {name}: {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} ({name}) failed: {detail}");
}

/// Criterion 1: Every member of the measurement family saturates the frontier.
#[test]
fn criterion_01_frontier_equality() {
    let start = Instant::now();
    let geometry = reference_pure();
    let mut max_dev = 0.0f64;
    for i in 0..21 {
        for j in 0..21 {
            let povm = Povm::optimal_family(i as f64 / 20.0, j as f64 / 20.0)
                .expect("grid parameters are in range");
            let gp = joint_distribution(&geometry, &povm)
                .expect("valid inputs")
                .guess_probabilities();
            max_dev = max_dev.max((frontier_lhs(&geometry, &gp) - 1.0).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "frontier_equality",
        max_dev <= EXACT_TOL && elapsed < Duration::from_secs(1),
        &format!("max |lhs - 1| = {max_dev:.3e} over 21x21 in {elapsed:.2?}"),
    );
}

/// Criterion 2: Brute force: no random POVM beats the frontier, in either mode.
#[test]
fn criterion_02_frontier_inequality() {
    let start = Instant::now();
    let pure = pareto_sweep(&reference_pure(), SWEEP_SAMPLES, SEED).expect("valid geometry");
    let mixed = pareto_sweep(&reference_mixed(), SWEEP_SAMPLES, SEED + 1).expect("valid geometry");
    let elapsed = start.elapsed();
    let passed = pure.violations == 0
        && mixed.violations == 0
        && pure.max_lhs <= 1.0 + FRONTIER_SLACK
        && mixed.max_lhs <= 1.0 + FRONTIER_SLACK
        && elapsed < Duration::from_secs(60);
    report(
        2,
        "frontier_inequality",
        passed,
        &format!(
            "0 violations required; got {}/{} (pure/mixed), max lhs {:.12}/{:.12}, {} samples each in {elapsed:.2?}",
            pure.violations, mixed.violations, pure.max_lhs, mixed.max_lhs, SWEEP_SAMPLES
        ),
    );
}

/// Criterion 3: Closed-form guessing probabilities equal the joint-table values on
/// every sampled POVM.
#[test]
fn criterion_03_closed_forms_match_tables() {
    let pure = identity_sweep(&reference_pure(), SWEEP_SAMPLES, SEED + 2).expect("valid geometry");
    let mixed =
        identity_sweep(&reference_mixed(), SWEEP_SAMPLES, SEED + 3).expect("valid geometry");
    let max_dev = pure.max_prob_dev.max(mixed.max_prob_dev);
    report(
        3,
        "closed_forms_match_tables",
        max_dev <= EXACT_TOL,
        &format!("max |table - closed| = {max_dev:.3e} over {SWEEP_SAMPLES} POVMs per mode"),
    );
}

/// Criterion 4: The joint-success identity holds on every sampled POVM, and the
/// searched maximum lands on the frontier at the analytic value (1 + D)/4.
#[test]
fn criterion_04_joint_success() {
    let geometry = reference_pure();
    let pure = identity_sweep(&geometry, SWEEP_SAMPLES, SEED + 4).expect("valid geometry");
    let mixed =
        identity_sweep(&reference_mixed(), SWEEP_SAMPLES, SEED + 5).expect("valid geometry");
    let max_pc_dev = pure.max_pc_dev.max(mixed.max_pc_dev);
    let (argmax, p_c) =
        maximize_joint_correct(&geometry, SWEEP_SAMPLES / 5, SEED + 6).expect("valid geometry");
    let analytic = (1.0 + geometry.d_ww().hypot(geometry.d_wp())) / 4.0;
    let gp = joint_distribution(&geometry, &argmax)
        .expect("valid inputs")
        .guess_probabilities();
    let lhs = frontier_lhs(&geometry, &gp);
    let passed = max_pc_dev <= EXACT_TOL
        && (p_c - analytic).abs() <= MAXIMIZER_TOL
        && lhs >= 1.0 - SEARCH_FRONTIER_TOL;
    report(
        4,
        "joint_success",
        passed,
        &format!(
            "max P_c identity dev = {max_pc_dev:.3e}; search max {p_c:.9} vs analytic {analytic:.9}, lhs at argmax {lhs:.6}"
        ),
    );
}

/// Criterion 5: The information decomposition balances exactly: for every sampled
/// POVM, the detector-scheme sweep, and the mixed two-detector grid.
#[test]
fn criterion_05_decomposition() {
    let pure_geom = reference_pure();
    let mixed_geom = reference_mixed();
    let pure = identity_sweep(&pure_geom, SWEEP_SAMPLES, SEED + 7).expect("valid geometry");
    let mixed = identity_sweep(&mixed_geom, SWEEP_SAMPLES, SEED + 8).expect("valid geometry");
    let mut max_residual = pure.max_residual.max(mixed.max_residual);
    for i in 0..=10 {
        let povm = Povm::ww_detector_scheme(i as f64 / 10.0).expect("efficiency in range");
        max_residual = max_residual.max(
            info_report(&pure_geom, &povm)
                .expect("valid inputs")
                .residual,
        );
    }
    for i in 0..=4 {
        for j in 0..=4 {
            let povm = Povm::two_detector_scheme(i as f64 / 4.0, j as f64 / 4.0)
                .expect("efficiencies in range");
            max_residual = max_residual.max(
                info_report(&mixed_geom, &povm)
                    .expect("valid inputs")
                    .residual,
            );
        }
    }
    report(
        5,
        "decomposition",
        max_residual <= EXACT_TOL,
        &format!(
            "max |I_in_out - (sum of bit terms + I_cross)| = {max_residual:.3e} over sampled POVMs and scheme grids"
        ),
    );
}

/// Criterion 6: On the optimal family the which-way term collapses to its
/// binary-entropy closed form, because the guess conditionals are flat.
#[test]
fn criterion_06_per_bit_closed_form() {
    let geometry = reference_pure();
    let mut max_info_dev = 0.0f64;
    let mut max_flatness = 0.0f64;
    for i in 0..21 {
        for j in 0..21 {
            let povm = Povm::optimal_family(i as f64 / 20.0, j as f64 / 20.0)
                .expect("grid parameters are in range");
            let jd = joint_distribution(&geometry, &povm).expect("valid inputs");
            let report = info_report(&geometry, &povm).expect("valid inputs");
            let p_ww = jd.guess_probabilities().p_ww;
            let closed = 1.0 - binary_entropy(p_ww).expect("probability in range");
            max_info_dev = max_info_dev.max((report.i_ww - closed).abs());
            max_flatness = max_flatness.max(
                jd.guess_flatness(Bit::Ww)
                    .expect("which-way bit always present"),
            );
        }
    }
    report(
        6,
        "per_bit_closed_form",
        max_info_dev <= EXACT_TOL && max_flatness <= EXACT_TOL,
        &format!(
            "max |I_ww - (1 - H2(P_ww))| = {max_info_dev:.3e}, max conditional flatness = {max_flatness:.3e}"
        ),
    );
}

/// Criterion 7: Named schemes reproduce their closed-form parameter ratios, and the
/// two-detector scheme saturates the ellipsoid.
#[test]
fn criterion_07_scheme_formulas() {
    let pure = reference_pure();
    let mixed = reference_mixed();
    let mut max_dev = 0.0f64;
    for i in 0..=10 {
        let e = i as f64 / 10.0;
        let povm = Povm::ww_detector_scheme(e).expect("efficiency in range");
        let gp = closed_form_probabilities(&pure, &povm).expect("valid inputs");
        max_dev = max_dev.max(((2.0 * gp.p_ww - 1.0) / pure.d_ww() - e).abs());
        max_dev = max_dev.max(((2.0 * gp.p_wp - 1.0) / pure.d_wp() - (1.0 - e * e).sqrt()).abs());
    }
    for i in 0..=10 {
        let t_out = 0.5 + i as f64 / 20.0;
        for orientation in pathphase::Sign::BOTH {
            let povm = Povm::vn_scheme(t_out, orientation).expect("transmission in range");
            let gp = closed_form_probabilities(&pure, &povm).expect("valid inputs");
            let z0 = (1.0 - 2.0 * t_out).abs();
            max_dev = max_dev.max(((2.0 * gp.p_ww - 1.0) / pure.d_ww() - z0).abs());
        }
    }
    let mut max_ellipsoid_dev = 0.0f64;
    for i in 0..=4 {
        for j in 0..=4 {
            let (e1, e2) = (i as f64 / 4.0, j as f64 / 4.0);
            let povm = Povm::two_detector_scheme(e1, e2).expect("efficiencies in range");
            let gp = closed_form_probabilities(&mixed, &povm).expect("valid inputs");
            let c1 = (1.0 - e1 * e1).sqrt();
            max_dev = max_dev.max(((2.0 * gp.p_ww - 1.0) / mixed.d_ww() - e1).abs());
            max_dev = max_dev.max(((2.0 * gp.p_wp - 1.0) / mixed.d_wp() - c1 * e2).abs());
            let p_wm = gp.p_wm.expect("mixed mode carries the third bit");
            max_dev = max_dev
                .max(((2.0 * p_wm - 1.0) / mixed.d_wm() - c1 * (1.0 - e2 * e2).sqrt()).abs());
            max_ellipsoid_dev = max_ellipsoid_dev.max((frontier_lhs(&mixed, &gp) - 1.0).abs());
        }
    }
    report(
        7,
        "scheme_formulas",
        max_dev <= EXACT_TOL && max_ellipsoid_dev <= EXACT_TOL,
        &format!(
            "max parameter-ratio dev = {max_dev:.3e}, max |ellipsoid lhs - 1| = {max_ellipsoid_dev:.3e}"
        ),
    );
}

/// Criterion 8: Monte Carlo concentration: the empirical which-way rate lands within
/// four standard errors of 0.695, and across twenty seeds at most one
/// excursion per probability.
#[test]
fn criterion_08_monte_carlo() {
    let start = Instant::now();
    let geometry = reference_pure();
    let povm = Povm::optimal_family(0.5, 0.6).expect("parameters in range");
    let analytic = closed_form_probabilities(&geometry, &povm).expect("valid inputs");
    assert!(
        (analytic.p_ww - 0.695).abs() < 1e-15,
        "derived reference value"
    );
    let band = |p: f64| SIGMA_BAND * (p * (1.0 - p) / MC_ROUNDS as f64).sqrt();
    let main_run = monte_carlo_game(&geometry, &povm, MC_ROUNDS, SEED).expect("valid inputs");
    let main_dev = (main_run.p_ww - analytic.p_ww).abs();
    let mut excursions = [0u64; 3];
    for k in 0..MC_SEEDS {
        let game =
            monte_carlo_game(&geometry, &povm, MC_ROUNDS, SEED + 100 + k).expect("valid inputs");
        let trials = [
            (game.p_ww, analytic.p_ww),
            (game.p_wp, analytic.p_wp),
            (game.p_c, analytic.p_c),
        ];
        for (slot, (estimate, exact)) in excursions.iter_mut().zip(trials) {
            if (estimate - exact).abs() > band(exact) {
                *slot += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = main_dev <= band(analytic.p_ww)
        && excursions.iter().all(|&n| n <= 1)
        && elapsed < Duration::from_secs(30);
    report(
        8,
        "monte_carlo",
        passed,
        &format!(
            "|P_ww - 0.695| = {main_dev:.2e} (band {:.2e}); excursions {excursions:?} over {MC_SEEDS} seeds in {elapsed:.2?}",
            band(analytic.p_ww)
        ),
    );
}

/// Criterion 9: The Holevo quantity dominates the extracted information on every
/// sampled POVM, and is visibly loose at the sharp which-way point.
#[test]
fn criterion_09_holevo_dominance() {
    let geometry = reference_pure();
    let sweep = identity_sweep(&geometry, SWEEP_SAMPLES, SEED + 9).expect("valid geometry");
    let holevo = holevo_bound(&geometry);
    let expected = binary_entropy((1.0 + geometry.d0()) / 2.0).expect("probability in range");
    let sharp = info_report(
        &geometry,
        &Povm::optimal_family(0.5, 1.0).expect("parameters in range"),
    )
    .expect("valid inputs");
    let gap = holevo - sharp.i_ww;
    let passed = sweep.max_holevo_excess <= EXACT_TOL
        && (holevo - expected).abs() <= EXACT_TOL
        && (holevo - 0.83689).abs() < 1e-3
        && gap > 0.4;
    report(
        9,
        "holevo_dominance",
        passed,
        &format!(
            "max (I_in_out - bound) = {:.3e}, bound = {holevo:.5}, gap at sharp point = {gap:.4} bits",
            sweep.max_holevo_excess
        ),
    );
}

/// Criterion 10: Figure-data regression: the trade-off sweep is byte-stable and stacks
/// per row; the mixed frontier grid emits only frontier points.
#[test]
fn criterion_10_figure_data() {
    let bin = env!("CARGO_BIN_EXE_pathphase");
    let tradeoff = |label: &str| {
        let output = Command::new(bin)
            .args(["tradeoff", "--dww", "0.65", "--dwp", "0.6", "--grid", "101"])
            .env_remove("PATHPHASE_SEED")
            .output()
            .unwrap_or_else(|e| panic!("running tradeoff ({label}): {e}"));
        assert!(
            output.status.success(),
            "tradeoff exited with {:?}",
            output.status
        );
        output.stdout
    };
    let first = tradeoff("first run");
    let second = tradeoff("second run");
    let byte_stable = first == second;

    let text = String::from_utf8(first).expect("CSV output is UTF-8");
    let mut max_stacking_dev = 0.0f64;
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let fields: Vec<f64> = line
            .split(',')
            .map(|v| v.parse().expect("numeric CSV field"))
            .collect();
        let [_, i_ww, i_wp, i_cross, i_in_out, _] = fields[..] else {
            panic!("unexpected trade-off row shape: {line}");
        };
        max_stacking_dev = max_stacking_dev.max((i_ww + i_wp + i_cross - i_in_out).abs());
        rows += 1;
    }

    let frontier = Command::new(bin)
        .args([
            "frontier", "--dww", "0.65", "--dwp", "0.6", "--dwm", "0.5", "--grid", "21",
        ])
        .env_remove("PATHPHASE_SEED")
        .output()
        .expect("running mixed frontier");
    assert!(
        frontier.status.success(),
        "frontier exited with {:?}",
        frontier.status
    );
    let frontier_text = String::from_utf8(frontier.stdout).expect("CSV output is UTF-8");
    let mut max_lhs_dev = 0.0f64;
    let mut frontier_rows = 0;
    for line in frontier_text.lines().skip(1) {
        let lhs: f64 = line
            .rsplit(',')
            .next()
            .expect("non-empty row")
            .parse()
            .expect("numeric lhs field");
        max_lhs_dev = max_lhs_dev.max((lhs - 1.0).abs());
        frontier_rows += 1;
    }

    let passed = byte_stable
        && rows == 101
        && max_stacking_dev <= EXACT_TOL
        && frontier_rows > 0
        && max_lhs_dev <= EXACT_TOL;
    report(
        10,
        "figure_data",
        passed,
        &format!(
            "byte-stable: {byte_stable}; stacking dev {max_stacking_dev:.3e} over {rows} rows; mixed-grid |lhs - 1| max {max_lhs_dev:.3e} over {frontier_rows} rows"
        ),
    );
}
