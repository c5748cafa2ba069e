//! Joint input–outcome statistics and optimal guessing probabilities.
//!
//! An input label is drawn uniformly, the matching Bloch state is prepared,
//! and one POVM outcome fires. The full record of the experiment is the joint
//! table `p(i, j) = prior * mu_j (1 + r_i . R_j) / 2`, from which everything
//! else follows: per-bit and joint maximum-likelihood guessing probabilities,
//! their closed forms in the weighted direction components, and the quadratic
//! frontier expression whose level set `<= 1` bounds every POVM.

use serde::Serialize;
use thiserror::Error;

use crate::bloch::{Bit, BlochVector, EnsembleGeometry, GeometryError, InputLabel, Mode, Sign};
use crate::povm::{Povm, PovmError};

/// Errors raised while assembling or checking joint statistics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscriminationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Povm(#[from] PovmError),
    /// The table entries must sum to one.
    #[error("joint distribution sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    /// Probabilities cannot be negative.
    #[error("joint entry ({label_index}, {outcome}) is negative: {value}")]
    NegativeEntry {
        label_index: usize,
        outcome: usize,
        value: f64,
    },
    /// The input marginal must stay uniform for any POVM.
    #[error("input marginal for label {label_index} is {value}, expected {expected}")]
    NonUniformInput {
        label_index: usize,
        value: f64,
        expected: f64,
    },
}

/// The joint distribution of input labels and measurement outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    geometry: EnsembleGeometry,
    labels: Vec<InputLabel>,
    n_outcomes: usize,
    /// Row-major `labels.len() x n_outcomes`.
    table: Vec<f64>,
}

/// Outcome rows marginalised down to one bit: `(plus row, minus row)`.
pub type BitRows = (Vec<f64>, Vec<f64>);

/// Builds the joint table for a uniformly drawn input and the given POVM.
///
/// Both the geometry and the POVM are validated first. Entries that round to
/// tiny negatives (antipodal unit vectors) are clamped to zero.
pub fn joint_distribution(
    geometry: &EnsembleGeometry,
    povm: &Povm,
) -> Result<JointDistribution, DiscriminationError> {
    geometry.validate()?;
    povm.validate()?;
    let labels = geometry.labels();
    let prior = geometry.prior();
    let n_outcomes = povm.n_outcomes();
    let mut table = Vec::with_capacity(labels.len() * n_outcomes);
    for label in &labels {
        let r = geometry.input_bloch(label)?;
        for el in povm.elements() {
            let p = prior * el.weight * (1.0 + r.dot(&el.direction)) / 2.0;
            table.push(p.max(0.0));
        }
    }
    Ok(JointDistribution {
        geometry: *geometry,
        labels,
        n_outcomes,
        table,
    })
}

impl JointDistribution {
    pub fn geometry(&self) -> &EnsembleGeometry {
        &self.geometry
    }

    pub fn mode(&self) -> Mode {
        self.geometry.mode()
    }

    /// Input labels in canonical order; row `i` of the table belongs to `labels()[i]`.
    pub fn labels(&self) -> &[InputLabel] {
        &self.labels
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    pub fn p(&self, label_index: usize, outcome: usize) -> f64 {
        self.table[label_index * self.n_outcomes + outcome]
    }

    pub fn row(&self, label_index: usize) -> &[f64] {
        let start = label_index * self.n_outcomes;
        &self.table[start..start + self.n_outcomes]
    }

    /// All table entries, row-major.
    pub fn entries(&self) -> &[f64] {
        &self.table
    }

    /// `p(j) = mu_j (1 + d0 x_j) / 2` — outcome probabilities.
    pub fn outcome_marginals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_outcomes];
        for i in 0..self.labels.len() {
            for (j, m) in out.iter_mut().enumerate() {
                *m += self.p(i, j);
            }
        }
        out
    }

    /// Row sums; uniform at `prior()` for every valid POVM.
    pub fn input_marginals(&self) -> Vec<f64> {
        (0..self.labels.len())
            .map(|i| self.row(i).iter().sum())
            .collect()
    }

    /// The two outcome rows obtained by marginalising all bits except `bit`:
    /// `(row for bit = +1, row for bit = -1)`.
    pub fn bit_outcome_rows(&self, bit: Bit) -> Option<BitRows> {
        let mut plus = vec![0.0; self.n_outcomes];
        let mut minus = vec![0.0; self.n_outcomes];
        for (i, label) in self.labels.iter().enumerate() {
            let acc = match label.bit(bit)? {
                Sign::Plus => &mut plus,
                Sign::Minus => &mut minus,
            };
            for (j, a) in acc.iter_mut().enumerate() {
                *a += self.p(i, j);
            }
        }
        Some((plus, minus))
    }

    /// Checks non-negativity, normalisation, and the uniform input marginal
    /// within `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), DiscriminationError> {
        for i in 0..self.labels.len() {
            for j in 0..self.n_outcomes {
                let value = self.p(i, j);
                if value < -tol {
                    return Err(DiscriminationError::NegativeEntry {
                        label_index: i,
                        outcome: j,
                        value,
                    });
                }
            }
        }
        let sum: f64 = self.table.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(DiscriminationError::NotNormalized { sum });
        }
        let expected = self.geometry.prior();
        for (i, value) in self.input_marginals().into_iter().enumerate() {
            if (value - expected).abs() > tol {
                return Err(DiscriminationError::NonUniformInput {
                    label_index: i,
                    value,
                    expected,
                });
            }
        }
        Ok(())
    }

    /// The maximum-likelihood guessing rule read off the table: per-bit sign
    /// guesses and the jointly most likely label for each outcome. Ties break
    /// towards `+1` and towards the lowest label index.
    pub fn ml_rule(&self) -> MlRule {
        let mut ww = Vec::with_capacity(self.n_outcomes);
        let mut wp = Vec::with_capacity(self.n_outcomes);
        let mut wm = match self.mode() {
            Mode::Pure => None,
            Mode::Mixed => Some(Vec::with_capacity(self.n_outcomes)),
        };
        let mut joint = Vec::with_capacity(self.n_outcomes);
        let bit_rows: Vec<(Bit, BitRows)> = self
            .geometry
            .bits()
            .iter()
            .map(|&bit| (bit, self.bit_outcome_rows(bit).expect("bit present")))
            .collect();
        for j in 0..self.n_outcomes {
            for (bit, (plus, minus)) in &bit_rows {
                let guess = Sign::of(plus[j] - minus[j]);
                match bit {
                    Bit::Ww => ww.push(guess),
                    Bit::Wp => wp.push(guess),
                    Bit::Wm => wm.as_mut().expect("mixed mode").push(guess),
                }
            }
            let mut best = 0;
            for i in 1..self.labels.len() {
                if self.p(i, j) > self.p(best, j) {
                    best = i;
                }
            }
            joint.push(best);
        }
        MlRule { ww, wp, wm, joint }
    }

    /// Optimal (maximum-likelihood) guessing probabilities for each bit and
    /// for the whole label, straight from the table.
    pub fn guess_probabilities(&self) -> GuessProbabilities {
        let p_ww = self
            .bit_guess_probability(Bit::Ww)
            .expect("ww always present");
        let p_wp = self
            .bit_guess_probability(Bit::Wp)
            .expect("wp always present");
        let p_wm = match self.mode() {
            Mode::Pure => None,
            Mode::Mixed => Some(
                self.bit_guess_probability(Bit::Wm)
                    .expect("wm in mixed mode"),
            ),
        };
        GuessProbabilities {
            p_ww,
            p_wp,
            p_wm,
            p_c: self.joint_correct_probability(),
        }
    }

    fn bit_guess_probability(&self, bit: Bit) -> Option<f64> {
        let (plus, minus) = self.bit_outcome_rows(bit)?;
        Some((0..self.n_outcomes).map(|j| plus[j].max(minus[j])).sum())
    }

    /// `P_c = sum_j max_i p(i, j)` — the probability of guessing the entire
    /// label right under maximum-likelihood guessing.
    pub fn joint_correct_probability(&self) -> f64 {
        (0..self.n_outcomes)
            .map(|j| {
                (0..self.labels.len())
                    .map(|i| self.p(i, j))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum()
    }

    /// `P(bit guessed right | outcome j)` for each outcome; `1/2` for outcomes
    /// that never fire.
    pub fn correct_guess_conditionals(&self, bit: Bit) -> Option<Vec<f64>> {
        let (plus, minus) = self.bit_outcome_rows(bit)?;
        Some(
            (0..self.n_outcomes)
                .map(|j| {
                    let p_j = plus[j] + minus[j];
                    if p_j > 0.0 {
                        plus[j].max(minus[j]) / p_j
                    } else {
                        0.5
                    }
                })
                .collect(),
        )
    }

    /// Spread (max minus min) of the correct-guess conditionals over outcomes
    /// that fire with non-zero probability. Zero means the outcome reveals
    /// nothing about how *reliable* the guess is — the hallmark of the
    /// frontier-saturating family.
    pub fn guess_flatness(&self, bit: Bit) -> Option<f64> {
        let (plus, minus) = self.bit_outcome_rows(bit)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..self.n_outcomes {
            let p_j = plus[j] + minus[j];
            if p_j > 0.0 {
                let c = plus[j].max(minus[j]) / p_j;
                lo = lo.min(c);
                hi = hi.max(c);
            }
        }
        if lo.is_finite() {
            Some(hi - lo)
        } else {
            Some(0.0)
        }
    }

    /// Serialises the table as CSV with header
    /// `b_ww,b_wp[,b_wm],outcome,probability`, rows in canonical label order,
    /// outcomes innermost.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.mode() {
            Mode::Pure => out.push_str("b_ww,b_wp,outcome,probability\n"),
            Mode::Mixed => out.push_str("b_ww,b_wp,b_wm,outcome,probability\n"),
        }
        for (i, label) in self.labels.iter().enumerate() {
            for j in 0..self.n_outcomes {
                out.push_str(sign_str(label.b_ww));
                out.push(',');
                out.push_str(sign_str(label.b_wp));
                out.push(',');
                if let Some(b_wm) = label.b_wm {
                    out.push_str(sign_str(b_wm));
                    out.push(',');
                }
                out.push_str(&format!("{},{}\n", j, self.p(i, j)));
            }
        }
        out
    }
}

fn sign_str(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "+1",
        Sign::Minus => "-1",
    }
}

/// Per-outcome maximum-likelihood guesses.
#[derive(Debug, Clone, PartialEq)]
pub struct MlRule {
    /// Which-way guess per outcome.
    pub ww: Vec<Sign>,
    /// Which-phase guess per outcome.
    pub wp: Vec<Sign>,
    /// Which-mixedness guess per outcome (mixed mode only).
    pub wm: Option<Vec<Sign>>,
    /// Index of the jointly most likely label per outcome.
    pub joint: Vec<usize>,
}

/// Optimal guessing probabilities for one geometry–POVM pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuessProbabilities {
    #[serde(rename = "P_ww")]
    pub p_ww: f64,
    #[serde(rename = "P_wp")]
    pub p_wp: f64,
    #[serde(rename = "P_wm", skip_serializing_if = "Option::is_none")]
    pub p_wm: Option<f64>,
    #[serde(rename = "P_c")]
    pub p_c: f64,
}

/// Guessing probabilities in closed form, without building the joint table.
///
/// Completeness makes the cross terms cancel for *every* valid POVM, leaving
/// `P_bit = (1 + d_bit * s_axis) / 2` with `s_axis = sum_j (mu_j / 2) |axis
/// component of R_j|`, and the joint success collapses onto the per-bit
/// probabilities:
/// `P_c = (P_ww + P_wp - 1/2) / 2` (pure),
/// `P_c = 1/8 + (P_ww + P_wp + P_wm - 3/2) / 4` (mixed).
pub fn closed_form_probabilities(
    geometry: &EnsembleGeometry,
    povm: &Povm,
) -> Result<GuessProbabilities, DiscriminationError> {
    geometry.validate()?;
    povm.validate()?;
    let half_weighted = |component: fn(&BlochVector) -> f64| -> f64 {
        povm.elements()
            .iter()
            .map(|el| el.weight / 2.0 * component(&el.direction).abs())
            .sum()
    };
    let p_ww = (1.0 + geometry.d_ww() * half_weighted(|r| r.z)) / 2.0;
    let p_wp = (1.0 + geometry.d_wp() * half_weighted(|r| r.y)) / 2.0;
    let (p_wm, p_c) = match geometry.mode() {
        Mode::Pure => (None, (p_ww + p_wp - 0.5) / 2.0),
        Mode::Mixed => {
            let p_wm = (1.0 + geometry.d_wm() * half_weighted(|r| r.x)) / 2.0;
            (Some(p_wm), 0.125 + (p_ww + p_wp + p_wm - 1.5) / 4.0)
        }
    };
    Ok(GuessProbabilities {
        p_ww,
        p_wp,
        p_wm,
        p_c,
    })
}

/// The quadratic frontier expression
/// `sum over encoded axes with d > 0 of ((2 P - 1) / d)^2`.
///
/// Bounded by 1 for every valid POVM; axes with zero distance contribute
/// nothing (their numerator vanishes identically) and are skipped to avoid
/// `0/0`.
pub fn frontier_lhs(geometry: &EnsembleGeometry, probs: &GuessProbabilities) -> f64 {
    let mut lhs = 0.0;
    let mut add_term = |p: f64, d: f64| {
        if d > 0.0 {
            let ratio = (2.0 * p - 1.0) / d;
            lhs += ratio * ratio;
        }
    };
    add_term(probs.p_ww, geometry.d_ww());
    add_term(probs.p_wp, geometry.d_wp());
    if let Some(p_wm) = probs.p_wm {
        add_term(p_wm, geometry.d_wm());
    }
    lhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::PovmElement;

    const TOL: f64 = 1e-12;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (diff {})", (a - b).abs());
    }

    fn reference_pure() -> EnsembleGeometry {
        EnsembleGeometry::pure(0.65, 0.6).unwrap()
    }

    fn reference_mixed() -> EnsembleGeometry {
        EnsembleGeometry::mixed(0.65, 0.6, 0.3).unwrap()
    }

    #[test]
    fn trivial_povm_reveals_nothing() {
        let jd = joint_distribution(&reference_pure(), &Povm::trivial()).unwrap();
        assert_eq!(jd.n_outcomes(), 1);
        for i in 0..4 {
            assert_close(jd.p(i, 0), 0.25, TOL);
        }
        let gp = jd.guess_probabilities();
        assert_close(gp.p_ww, 0.5, TOL);
        assert_close(gp.p_wp, 0.5, TOL);
        assert_close(gp.p_c, 0.25, TOL);
        assert_eq!(gp.p_wm, None);
        assert_close(frontier_lhs(&reference_pure(), &gp), 0.0, TOL);

        let jd = joint_distribution(&reference_mixed(), &Povm::trivial()).unwrap();
        let gp = jd.guess_probabilities();
        assert_close(gp.p_c, 0.125, TOL);
        assert_close(gp.p_wm.unwrap(), 0.5, TOL);
    }

    #[test]
    fn sharp_z_measurement_reads_the_which_way_bit() {
        let povm = Povm::optimal_family(1.0, 1.0).unwrap();
        let jd = joint_distribution(&reference_pure(), &povm).unwrap();
        // Rows: (1 ± d_ww) / 8 depending on whether the outcome matches b_ww.
        for (i, label) in jd.labels().iter().enumerate() {
            let (matching, other) = match label.b_ww {
                Sign::Plus => (0, 1),
                Sign::Minus => (1, 0),
            };
            assert_close(jd.p(i, matching), (1.0 + 0.65) / 8.0, TOL); // 0.20625
            assert_close(jd.p(i, other), (1.0 - 0.65) / 8.0, TOL); // 0.04375
        }
        let gp = jd.guess_probabilities();
        assert_close(gp.p_ww, 0.825, TOL);
        assert_close(gp.p_wp, 0.5, TOL);
        assert_close(gp.p_c, 0.4125, TOL);
    }

    #[test]
    fn balanced_family_member_matches_reference_probabilities() {
        let povm = Povm::optimal_family(0.5, 0.6).unwrap();
        let jd = joint_distribution(&reference_pure(), &povm).unwrap();
        let gp = jd.guess_probabilities();
        assert_close(gp.p_ww, 0.695, TOL); // (1 + 0.65 * 0.6) / 2
        assert_close(gp.p_wp, 0.74, TOL); // (1 + 0.6 * 0.8) / 2
        assert_close(gp.p_c, 0.4675, TOL); // (0.695 + 0.74 - 0.5) / 2
        assert_close(frontier_lhs(&reference_pure(), &gp), 1.0, TOL);
    }

    #[test]
    fn closed_forms_match_the_table_on_measurement_families() {
        let geometries = [reference_pure(), EnsembleGeometry::pure(0.3, 0.9).unwrap()];
        for geometry in &geometries {
            for i in 0..=10 {
                for j in 0..=10 {
                    let povm = Povm::optimal_family(i as f64 / 10.0, j as f64 / 10.0).unwrap();
                    let table = joint_distribution(geometry, &povm)
                        .unwrap()
                        .guess_probabilities();
                    let closed = closed_form_probabilities(geometry, &povm).unwrap();
                    assert_close(table.p_ww, closed.p_ww, TOL);
                    assert_close(table.p_wp, closed.p_wp, TOL);
                    assert_close(table.p_c, closed.p_c, TOL);
                }
            }
        }
        let geometry = reference_mixed();
        for i in 0..=10 {
            for j in 0..=10 {
                let povm = Povm::two_detector_scheme(i as f64 / 10.0, j as f64 / 10.0).unwrap();
                let table = joint_distribution(&geometry, &povm)
                    .unwrap()
                    .guess_probabilities();
                let closed = closed_form_probabilities(&geometry, &povm).unwrap();
                assert_close(table.p_ww, closed.p_ww, TOL);
                assert_close(table.p_wp, closed.p_wp, TOL);
                assert_close(table.p_wm.unwrap(), closed.p_wm.unwrap(), TOL);
                assert_close(table.p_c, closed.p_c, TOL);
            }
        }
    }

    #[test]
    fn interior_elements_need_no_refinement_for_closed_forms() {
        // A deliberately unrefined POVM: interior directions, uneven weights.
        let povm = Povm::from_elements(vec![
            PovmElement::new(0.8, BlochVector::new(0.1, 0.2, 0.5)),
            PovmElement::new(
                1.2,
                BlochVector::new(-0.1 * 0.8 / 1.2, -0.2 * 0.8 / 1.2, -0.5 * 0.8 / 1.2),
            ),
        ]);
        povm.validate().unwrap();
        let geometry = reference_pure();
        let table = joint_distribution(&geometry, &povm)
            .unwrap()
            .guess_probabilities();
        let closed = closed_form_probabilities(&geometry, &povm).unwrap();
        assert_close(table.p_ww, closed.p_ww, TOL);
        assert_close(table.p_wp, closed.p_wp, TOL);
        assert_close(table.p_c, closed.p_c, TOL);
    }

    #[test]
    fn uniform_input_marginal_for_any_povm() {
        let povm = Povm::two_detector_scheme(0.7, 0.3).unwrap();
        let jd = joint_distribution(&reference_mixed(), &povm).unwrap();
        jd.validate(TOL).unwrap();
        for m in jd.input_marginals() {
            assert_close(m, 0.125, TOL);
        }
        let marginals = jd.outcome_marginals();
        let total: f64 = marginals.iter().sum();
        assert_close(total, 1.0, TOL);
    }

    #[test]
    fn oversized_geometry_is_rejected_before_building_the_table() {
        let bad = EnsembleGeometry::from_distances(Mode::Mixed, 0.65, 0.6, 0.5);
        assert!(matches!(
            joint_distribution(&bad, &Povm::trivial()),
            Err(DiscriminationError::Geometry(
                GeometryError::BoxTooLarge { .. }
            ))
        ));
    }

    #[test]
    fn ml_rule_breaks_ties_upwards() {
        let jd = joint_distribution(&reference_pure(), &Povm::trivial()).unwrap();
        let rule = jd.ml_rule();
        assert_eq!(rule.ww, vec![Sign::Plus]);
        assert_eq!(rule.wp, vec![Sign::Plus]);
        assert_eq!(rule.wm, None);
        assert_eq!(rule.joint, vec![0]);
    }

    #[test]
    fn family_members_have_flat_guess_conditionals() {
        let geometry = reference_pure();
        let povm = Povm::optimal_family(0.3, 0.6).unwrap();
        let jd = joint_distribution(&geometry, &povm).unwrap();
        assert!(jd.guess_flatness(Bit::Ww).unwrap() <= TOL);
        assert!(jd.guess_flatness(Bit::Wp).unwrap() <= TOL);
        for c in jd.correct_guess_conditionals(Bit::Ww).unwrap() {
            assert_close(c, 0.695, TOL);
        }

        // An asymmetric z-axis POVM is *not* flat: one outcome is much more
        // reliable than the other.
        let skewed = Povm::from_elements(vec![
            PovmElement::new(0.5, BlochVector::new(0.0, 0.0, 1.0)),
            PovmElement::new(1.5, BlochVector::new(0.0, 0.0, -1.0 / 3.0)),
        ]);
        skewed.validate().unwrap();
        let jd = joint_distribution(&geometry, &skewed).unwrap();
        assert!(jd.guess_flatness(Bit::Ww).unwrap() > 0.2);
    }

    #[test]
    fn frontier_skips_zero_distance_axes() {
        let geometry = EnsembleGeometry::pure(1.0, 0.0).unwrap();
        let povm = Povm::optimal_family(1.0, 1.0).unwrap();
        let gp = joint_distribution(&geometry, &povm)
            .unwrap()
            .guess_probabilities();
        assert_close(gp.p_ww, 1.0, TOL);
        assert_close(gp.p_wp, 0.5, TOL); // numerator of the skipped term is 0 anyway
        assert_close(frontier_lhs(&geometry, &gp), 1.0, TOL);
    }

    #[test]
    fn csv_export_is_byte_stable_and_carries_the_documented_header() {
        let jd = joint_distribution(&reference_pure(), &Povm::optimal_family(1.0, 1.0).unwrap())
            .unwrap();
        let csv = jd.to_csv();
        assert_eq!(csv, jd.to_csv());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("b_ww,b_wp,outcome,probability"));
        assert_eq!(lines.next(), Some("+1,+1,0,0.20625"));
        assert_eq!(csv.lines().count(), 1 + 4 * 2);

        let jd = joint_distribution(&reference_mixed(), &Povm::trivial()).unwrap();
        let csv = jd.to_csv();
        assert_eq!(
            csv.lines().next(),
            Some("b_ww,b_wp,b_wm,outcome,probability")
        );
        assert_eq!(csv.lines().count(), 1 + 8);
        assert!(csv.contains("-1,-1,-1,0,0.125"));
    }
}
