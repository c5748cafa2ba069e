//! Entropies and the mutual-information decomposition of the guessing game.
//!
//! The outcome `J` of a measurement carries information about each encoded
//! bit separately (`I(b_ww : J)`, `I(b_wp : J)`, ...) and about the whole
//! label (`I_in_out = I(b : J)`). Because the input bits are independent and
//! uniform, the two bookkeepings differ by exactly the correlation the
//! measurement *creates* between the bits once its outcome is known:
//!
//! `I_in_out = sum_bits I(bit : J) + I_cross`,
//!
//! where `I_cross` is the conditional total correlation of the bits given
//! `J`. The identity holds term-by-term for every valid POVM, which makes the
//! residual a sharp self-test. The Holevo quantity of the input ensemble caps
//! `I_in_out` for any measurement.

use serde::Serialize;
use thiserror::Error;

use crate::bloch::{Bit, BlochVector, EnsembleGeometry, Mode, Sign};
use crate::discrimination::{joint_distribution, DiscriminationError, JointDistribution};
use crate::povm::Povm;

/// Tolerance on distribution normalisation checks.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Guess conditionals flatter than this count as outcome-independent.
pub const FLATNESS_TOL: f64 = 1e-9;

/// Errors raised by entropy and mutual-information computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfoError {
    /// `binary_entropy` needs an argument in `[0, 1]`.
    #[error("probability {value} lies outside [0, 1]")]
    ProbabilityRange { value: f64 },
    /// Distributions cannot carry negative mass.
    #[error("negative probability {value} at position {index}")]
    NegativeProbability { index: usize, value: f64 },
    /// Distributions must sum to one.
    #[error("distribution sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    /// A mutual-information grouping selected no bits.
    #[error("select at least one input bit")]
    EmptyGrouping,
    /// A selected bit is not carried by the distribution's geometry.
    #[error("bit {bit:?} is not carried by this distribution")]
    MissingBit { bit: Bit },
}

/// `-p log2 p`, with the `p = 0` limit taken as 0.
fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn entropy_unchecked(dist: impl IntoIterator<Item = f64>) -> f64 {
    dist.into_iter().map(entropy_term).sum()
}

/// The binary entropy `H2(p) = -p log2 p - (1-p) log2 (1-p)` in bits.
///
/// Arguments a hair outside `[0, 1]` (within `1e-12`, from rounding) are
/// clamped; anything further out is an error.
pub fn binary_entropy(p: f64) -> Result<f64, InfoError> {
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(InfoError::ProbabilityRange { value: p });
    }
    let p = p.clamp(0.0, 1.0);
    Ok(entropy_term(p) + entropy_term(1.0 - p))
}

/// Shannon entropy of a normalised distribution, in bits.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64, InfoError> {
    for (index, &value) in dist.iter().enumerate() {
        if value < -1e-12 || value.is_nan() {
            return Err(InfoError::NegativeProbability { index, value });
        }
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(InfoError::NotNormalized { sum });
    }
    Ok(entropy_unchecked(dist.iter().map(|&p| p.max(0.0))))
}

/// Mutual information `I(X : J)` in bits, where `X` groups the selected input
/// bits of the joint table and `J` is the outcome.
///
/// Duplicate bits in the grouping are ignored; selecting a bit the geometry
/// does not carry is an error.
pub fn mutual_information(jd: &JointDistribution, bits: &[Bit]) -> Result<f64, InfoError> {
    if bits.is_empty() {
        return Err(InfoError::EmptyGrouping);
    }
    let carried = jd.geometry().bits();
    let mut selected: Vec<Bit> = Vec::with_capacity(3);
    for &bit in bits {
        if !carried.contains(&bit) {
            return Err(InfoError::MissingBit { bit });
        }
        if !selected.contains(&bit) {
            selected.push(bit);
        }
    }
    let n_outcomes = jd.n_outcomes();
    let n_groups = 1usize << selected.len();
    // Marginalise the unselected bits away: group index packs the selected
    // bit values, first selected bit least significant, Minus -> 1.
    let mut grouped = vec![0.0; n_groups * n_outcomes];
    for (i, label) in jd.labels().iter().enumerate() {
        let mut g = 0usize;
        for (k, &bit) in selected.iter().enumerate() {
            if label.bit(bit) == Some(Sign::Minus) {
                g |= 1 << k;
            }
        }
        for j in 0..n_outcomes {
            grouped[g * n_outcomes + j] += jd.p(i, j);
        }
    }
    let group_marginals: Vec<f64> = (0..n_groups)
        .map(|g| grouped[g * n_outcomes..(g + 1) * n_outcomes].iter().sum())
        .collect();
    let h_x = entropy_unchecked(group_marginals);
    let h_j = entropy_unchecked(jd.outcome_marginals());
    let h_xj = entropy_unchecked(grouped);
    Ok((h_x + h_j - h_xj).max(0.0))
}

/// The conditional total correlation of the input bits given the outcome:
/// `C(bits | J) = sum_bits H(bit | J) - H(bits | J)`.
///
/// Zero exactly when the bits stay independent once the outcome is known; for
/// two bits it reduces to the conditional mutual information
/// `I(b_ww : b_wp | J)`.
pub fn conditional_total_correlation(jd: &JointDistribution) -> f64 {
    let bits = jd.geometry().bits();
    let h_j = entropy_unchecked(jd.outcome_marginals());
    let mut sum_h_bit_j = 0.0;
    for &bit in bits {
        let (plus, minus) = jd
            .bit_outcome_rows(bit)
            .expect("geometry carries its own bits");
        sum_h_bit_j += entropy_unchecked(plus.into_iter().chain(minus));
    }
    let h_all_j = entropy_unchecked(jd.entries().iter().copied());
    let k = bits.len() as f64;
    (sum_h_bit_j - (k - 1.0) * h_j - h_all_j).max(0.0)
}

/// Joint distribution of one success indicator and the outcome.
///
/// The indicator is 1 when the maximum-likelihood guess for `bit` at the
/// realised outcome matches the encoded bit.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorDistribution {
    pub bit: Bit,
    /// `P(indicator = 1, J = j)` per outcome.
    pub hit: Vec<f64>,
    /// `P(indicator = 0, J = j)` per outcome.
    pub miss: Vec<f64>,
}

impl IndicatorDistribution {
    /// The marginal success probability; equals the optimal guessing
    /// probability for the bit.
    pub fn hit_probability(&self) -> f64 {
        self.hit.iter().sum()
    }

    pub fn outcome_marginals(&self) -> Vec<f64> {
        self.hit
            .iter()
            .zip(&self.miss)
            .map(|(h, m)| h + m)
            .collect()
    }
}

/// Builds the (indicator, outcome) joint for one bit.
pub fn indicator_distribution(
    jd: &JointDistribution,
    bit: Bit,
) -> Result<IndicatorDistribution, InfoError> {
    let (plus, minus) = jd
        .bit_outcome_rows(bit)
        .ok_or(InfoError::MissingBit { bit })?;
    let hit: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| p.max(*m)).collect();
    let miss: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| p.min(*m)).collect();
    Ok(IndicatorDistribution { bit, hit, miss })
}

/// Joint distribution of the full success-indicator tuple and the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorJoint {
    n_bits: usize,
    n_outcomes: usize,
    /// Row-major `2^n_bits x n_outcomes`; in row indices, bit `k` of the
    /// tuple (in canonical bit order) is set when indicator `k` is 1.
    table: Vec<f64>,
}

/// Builds the joint table of all success indicators and the outcome.
pub fn indicator_joint(jd: &JointDistribution) -> IndicatorJoint {
    let bits = jd.geometry().bits();
    let rule = jd.ml_rule();
    let n_outcomes = jd.n_outcomes();
    let n_rows = 1usize << bits.len();
    let mut table = vec![0.0; n_rows * n_outcomes];
    for (i, label) in jd.labels().iter().enumerate() {
        for j in 0..n_outcomes {
            let mut row = 0usize;
            for (k, &bit) in bits.iter().enumerate() {
                let guess = match bit {
                    Bit::Ww => rule.ww[j],
                    Bit::Wp => rule.wp[j],
                    Bit::Wm => rule.wm.as_ref().expect("mixed mode")[j],
                };
                if label.bit(bit) == Some(guess) {
                    row |= 1 << k;
                }
            }
            table[row * n_outcomes + j] += jd.p(i, j);
        }
    }
    IndicatorJoint {
        n_bits: bits.len(),
        n_outcomes,
        table,
    }
}

impl IndicatorJoint {
    /// Marginal over outcomes: the distribution of the indicator tuple.
    pub fn tuple_marginals(&self) -> Vec<f64> {
        (0..1usize << self.n_bits)
            .map(|row| {
                self.table[row * self.n_outcomes..(row + 1) * self.n_outcomes]
                    .iter()
                    .sum()
            })
            .collect()
    }

    /// Total correlation of the indicator tuple (outcome marginalised out):
    /// `sum_k H(indicator_k) - H(tuple)`. For two bits this is the mutual
    /// information between the two success indicators.
    pub fn total_correlation(&self) -> f64 {
        let tuple = self.tuple_marginals();
        let mut sum_h = 0.0;
        for k in 0..self.n_bits {
            let p_one: f64 = tuple
                .iter()
                .enumerate()
                .filter(|(row, _)| row & (1 << k) != 0)
                .map(|(_, p)| p)
                .sum();
            sum_h += entropy_unchecked([p_one, 1.0 - p_one]);
        }
        (sum_h - entropy_unchecked(tuple.iter().copied())).max(0.0)
    }
}

/// The full information bookkeeping of one geometry–POVM pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoReport {
    /// `I(b_ww : J)` in bits.
    #[serde(rename = "I_ww")]
    pub i_ww: f64,
    /// `I(b_wp : J)` in bits.
    #[serde(rename = "I_wp")]
    pub i_wp: f64,
    /// `I(b_wm : J)` in bits; mixed mode only.
    #[serde(rename = "I_wm", skip_serializing_if = "Option::is_none")]
    pub i_wm: Option<f64>,
    /// Conditional total correlation of the bits given the outcome.
    #[serde(rename = "I_cross")]
    pub i_cross: f64,
    /// `I(all bits : J)` in bits.
    #[serde(rename = "I_in_out")]
    pub i_in_out: f64,
    /// Holevo quantity of the input ensemble — an outcome-independent cap on
    /// `I_in_out`.
    pub holevo: f64,
    /// `I_in_out - (sum of per-bit terms + I_cross)`; zero up to rounding for
    /// every valid POVM.
    pub residual: f64,
    /// True when every bit's correct-guess conditional is outcome-independent
    /// (within [`FLATNESS_TOL`]), so the per-bit terms take the closed form
    /// `1 - H2(P_bit)`.
    #[serde(skip)]
    pub flat_guesses: bool,
}

impl InfoReport {
    /// Computes the report from a prebuilt joint table.
    pub fn from_joint(jd: &JointDistribution) -> InfoReport {
        let bits = jd.geometry().bits();
        let i_ww = mutual_information(jd, &[Bit::Ww]).expect("ww bit always present");
        let i_wp = mutual_information(jd, &[Bit::Wp]).expect("wp bit always present");
        let i_wm = match jd.mode() {
            Mode::Pure => None,
            Mode::Mixed => {
                Some(mutual_information(jd, &[Bit::Wm]).expect("wm bit present in mixed mode"))
            }
        };
        let i_in_out = mutual_information(jd, bits).expect("all carried bits");
        let i_cross = conditional_total_correlation(jd);
        let residual = i_in_out - (i_ww + i_wp + i_wm.unwrap_or(0.0) + i_cross);
        let flat_guesses = bits
            .iter()
            .all(|&bit| jd.guess_flatness(bit).expect("carried bit") <= FLATNESS_TOL);
        InfoReport {
            i_ww,
            i_wp,
            i_wm,
            i_cross,
            i_in_out,
            holevo: holevo_bound(jd.geometry()),
            residual,
            flat_guesses,
        }
    }
}

/// Builds the joint table for the pair and computes its [`InfoReport`].
pub fn info_report(
    geometry: &EnsembleGeometry,
    povm: &Povm,
) -> Result<InfoReport, DiscriminationError> {
    Ok(InfoReport::from_joint(&joint_distribution(geometry, povm)?))
}

/// The Holevo quantity of the uniformly weighted input ensemble:
/// `S(mean state) - mean of S(state)` in bits, with
/// `S(r) = H2((1 + |r|) / 2)`.
///
/// Pure inputs have zero entropy, so the pure-mode value is
/// `H2((1 + d0) / 2)`; in mixed mode the inner box corners contribute their
/// own entropy and the mean-state norm replaces `d0`.
pub fn holevo_bound(geometry: &EnsembleGeometry) -> f64 {
    let labels = geometry.labels();
    let mut mean = BlochVector::ZERO;
    let mut avg_entropy = 0.0;
    for label in &labels {
        let r = geometry
            .input_bloch(label)
            .expect("label drawn from this geometry");
        mean = mean.add(&r);
        avg_entropy += state_entropy(&r);
    }
    let n = labels.len() as f64;
    state_entropy(&mean.scaled(1.0 / n)) - avg_entropy / n
}

/// Von Neumann entropy of a qubit state in bits, `H2((1 + |r|) / 2)`.
fn state_entropy(r: &BlochVector) -> f64 {
    let p = (1.0 + r.norm().min(1.0)) / 2.0;
    entropy_term(p) + entropy_term(1.0 - p)
}
