//! Property tests for the invariants the closed forms rely on: geometry
//! normalisation, sampled-POVM validity, refinement behaviour, frontier
//! dominance, and the information decomposition.

use proptest::prelude::*;

use pathphase::bloch::GEOMETRY_TOL;
use pathphase::oracle::FRONTIER_SLACK;
use pathphase::{
    closed_form_probabilities, frontier_lhs, info_report, joint_distribution, random_povm,
    shard_rng, BlochVector, EnsembleGeometry, Povm, PovmElement,
};

const EXACT_TOL: f64 = 1e-12;

fn arb_pure_geometry() -> impl Strategy<Value = EnsembleGeometry> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    (0.0..=half_pi, 0.0..=half_pi).prop_map(|(alpha, phi)| {
        EnsembleGeometry::from_angles(alpha, phi).expect("angles within the quarter turn")
    })
}

fn arb_mixed_geometry() -> impl Strategy<Value = EnsembleGeometry> {
    (arb_pure_geometry(), 0.0..=1.0f64).prop_map(|(planar, fraction)| {
        // Spend a fraction of the remaining center budget on the third axis;
        // the extreme states then stay inside the closed ball by construction.
        let budget = (1.0 - planar.d_ww() * planar.d_ww() - planar.d_wp() * planar.d_wp())
            .max(0.0)
            .sqrt();
        EnsembleGeometry::mixed(planar.d_ww(), planar.d_wp(), fraction * budget)
            .expect("distances fit the ball by construction")
    })
}

fn arb_geometry() -> impl Strategy<Value = EnsembleGeometry> {
    prop_oneof![arb_pure_geometry(), arb_mixed_geometry()]
}

/// A sampled POVM, driven by a seed so shrinking stays meaningful.
fn arb_povm() -> impl Strategy<Value = Povm> {
    (any::<u64>(), 2usize..=8).prop_map(|(seed, n_outcomes)| {
        let mut rng = shard_rng(seed, 0);
        random_povm(&mut rng, n_outcomes)
    })
}

proptest! {
    /// Angle-parametrised pure geometries sit exactly on the unit sphere.
    #[test]
    fn pure_geometry_is_spherical(geometry in arb_pure_geometry()) {
        let norm_sq = geometry.d0() * geometry.d0()
            + geometry.d_ww() * geometry.d_ww()
            + geometry.d_wp() * geometry.d_wp();
        prop_assert!((norm_sq - 1.0).abs() <= EXACT_TOL);
        prop_assert!(geometry.validate().is_ok());
    }

    /// Gram renormalisation always produces a complete, in-ball POVM.
    #[test]
    fn sampled_povms_are_valid(povm in arb_povm()) {
        prop_assert!(povm.validate().is_ok());
    }

    /// Refinement keeps the POVM valid and is idempotent.
    #[test]
    fn refinement_is_idempotent(povm in arb_povm()) {
        let refined = povm.refine();
        prop_assert!(refined.validate().is_ok());
        prop_assert_eq!(refined.refine(), refined);
    }

    /// Summing a refined element pair reproduces the parent's joint-table
    /// column exactly, for every input state: refinement loses nothing.
    #[test]
    fn refinement_preserves_joint_rows(
        geometry in arb_geometry(),
        povm in arb_povm(),
    ) {
        let refined = povm.refine();
        let coarse = joint_distribution(&geometry, &povm).expect("valid inputs");
        let fine = joint_distribution(&geometry, &refined).expect("refined POVM stays valid");
        let mut cursor = 0;
        for (j, el) in povm.elements().iter().enumerate() {
            let children = if el.weight == 0.0 {
                0
            } else if el.direction.norm() >= 1.0 - GEOMETRY_TOL {
                1
            } else {
                2
            };
            for i in 0..coarse.labels().len() {
                let merged: f64 = (cursor..cursor + children).map(|k| fine.p(i, k)).sum();
                prop_assert!((merged - coarse.p(i, j)).abs() <= EXACT_TOL);
            }
            cursor += children;
        }
        prop_assert_eq!(cursor, refined.n_outcomes());
    }

    /// No sampled POVM crosses the frontier surface.
    #[test]
    fn frontier_dominates_sampled_povms(
        geometry in arb_geometry(),
        povm in arb_povm(),
    ) {
        let gp = joint_distribution(&geometry, &povm).expect("valid inputs").guess_probabilities();
        prop_assert!(frontier_lhs(&geometry, &gp) <= 1.0 + FRONTIER_SLACK);
    }

    /// The closed-form guessing probabilities match the joint table.
    #[test]
    fn closed_forms_match_table(
        geometry in arb_geometry(),
        povm in arb_povm(),
    ) {
        let table = joint_distribution(&geometry, &povm).expect("valid inputs").guess_probabilities();
        let closed = closed_form_probabilities(&geometry, &povm).expect("valid inputs");
        prop_assert!((table.p_ww - closed.p_ww).abs() <= EXACT_TOL);
        prop_assert!((table.p_wp - closed.p_wp).abs() <= EXACT_TOL);
        prop_assert!((table.p_c - closed.p_c).abs() <= EXACT_TOL);
        match (table.p_wm, closed.p_wm) {
            (None, None) => {}
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= EXACT_TOL),
            (a, b) => prop_assert!(false, "mode mismatch: {a:?} vs {b:?}"),
        }
    }

    /// The extracted information decomposes exactly into per-bit terms plus
    /// the cross term, and each per-bit term is bounded by the total.
    #[test]
    fn decomposition_balances(
        geometry in arb_geometry(),
        povm in arb_povm(),
    ) {
        let report = info_report(&geometry, &povm).expect("valid inputs");
        prop_assert!(report.residual <= EXACT_TOL);
        prop_assert!(report.i_in_out + EXACT_TOL >= report.i_ww);
        prop_assert!(report.i_in_out + EXACT_TOL >= report.i_wp);
        if let Some(i_wm) = report.i_wm {
            prop_assert!(report.i_in_out + EXACT_TOL >= i_wm);
        }
    }
}

/// Refinement walk on a hand-built POVM covering all three element kinds:
/// a zero-weight element (dropped), a rank-one element (kept), an interior
/// element and a centred element (each split into a pair).
#[test]
fn refinement_walk_covers_all_element_kinds() {
    let interior = BlochVector::new(0.3, -0.2, 0.4);
    let sphere = BlochVector::new(0.0, 0.6, 0.8);
    // Balance the first two elements with a third so the POVM is complete.
    let balance = interior.scaled(0.4).add(&sphere.scaled(0.3)).negated();
    let remaining = 2.0 - 0.4 - 0.3 - 0.3;
    let povm = Povm::from_elements(vec![
        PovmElement::new(0.0, BlochVector::new(1.0, 0.0, 0.0)),
        PovmElement::new(0.4, interior),
        PovmElement::new(0.3, sphere),
        PovmElement::new(0.3, BlochVector::ZERO),
        PovmElement::new(remaining, balance.scaled(1.0 / remaining)),
    ]);
    povm.validate().expect("hand-built POVM is complete");
    let refined = povm.refine();
    // zero-weight: 0 children; interior: 2; sphere: 1; centred: 2; balance: 2.
    assert_eq!(refined.n_outcomes(), 7);
    let geometry = EnsembleGeometry::mixed(0.65, 0.6, 0.3).expect("reference geometry");
    let coarse = joint_distribution(&geometry, &povm).expect("valid inputs");
    let fine = joint_distribution(&geometry, &refined).expect("valid inputs");
    let children = [0usize, 2, 1, 2, 2];
    let mut cursor = 0;
    for (j, n) in children.into_iter().enumerate() {
        for i in 0..coarse.labels().len() {
            let merged: f64 = (cursor..cursor + n).map(|k| fine.p(i, k)).sum();
            assert!(
                (merged - coarse.p(i, j)).abs() <= EXACT_TOL,
                "row {i}, element {j}: merged {merged} vs parent {}",
                coarse.p(i, j)
            );
        }
        cursor += n;
    }
    assert_eq!(cursor, refined.n_outcomes());
}
