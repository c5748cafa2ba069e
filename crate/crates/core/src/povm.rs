//! Measurements as weighted points in the Bloch ball.
//!
//! A qubit POVM element is `A_j = mu_j (1 + R_j . sigma) / 2` with weight
//! `mu_j >= 0` and direction `|R_j| <= 1`. Completeness (`sum_j A_j = 1`)
//! becomes two linear constraints on the coefficients:
//!
//! * `sum_j mu_j = 2`,
//! * `sum_j mu_j R_j = 0`.
//!
//! Elements with `|R_j| = 1` are rank-one; interior elements are noisy
//! mixtures and can always be *refined* into rank-one pairs without touching
//! the constraints (see [`Povm::refine`]). All measurement families used by
//! the guessing games live here, together with validation and a canonical
//! ordering that makes serialised POVMs byte-stable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::{BlochVector, Sign, GEOMETRY_TOL};

/// Errors raised when a POVM or a measurement-scheme parameter is invalid.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PovmError {
    /// A POVM needs at least one element.
    #[error("POVM has no elements")]
    Empty,
    /// Weights are probabilities times 2 and cannot be negative.
    #[error("element {index}: negative weight {weight}")]
    NegativeWeight { index: usize, weight: f64 },
    /// Directions must stay in the Bloch ball.
    #[error("element {index}: direction norm {norm} exceeds 1")]
    DirectionNorm { index: usize, norm: f64 },
    /// Completeness requires the weights to sum to 2.
    #[error("weights sum to {sum}, expected 2")]
    WeightSum { sum: f64 },
    /// Completeness requires the weighted directions to cancel.
    #[error("weighted directions sum to ({x}, {y}, {z}), expected zero")]
    Unbalanced { x: f64, y: f64, z: f64 },
    /// A scheme parameter left its admissible interval.
    #[error("parameter {name} = {value} lies outside [{lo}, {hi}]")]
    ParameterRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

/// One POVM element `mu (1 + R . sigma) / 2`.
///
/// Serialises as `{"mu": weight, "R": [x, y, z]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmElement {
    #[serde(rename = "mu")]
    pub weight: f64,
    #[serde(rename = "R")]
    pub direction: BlochVector,
}

impl PovmElement {
    pub fn new(weight: f64, direction: BlochVector) -> Self {
        PovmElement { weight, direction }
    }
}

/// A qubit POVM as a list of weighted Bloch points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    elements: Vec<PovmElement>,
}

impl Povm {
    /// Wraps raw elements without validation or reordering.
    pub fn from_elements(elements: Vec<PovmElement>) -> Self {
        Povm { elements }
    }

    /// The single-element POVM `{2 * (1/2)}`: measure nothing, output one symbol.
    pub fn trivial() -> Self {
        Povm::from_elements(vec![PovmElement::new(2.0, BlochVector::ZERO)])
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn n_outcomes(&self) -> usize {
        self.elements.len()
    }

    /// Validates with the default tolerance [`GEOMETRY_TOL`].
    pub fn validate(&self) -> Result<(), PovmError> {
        self.validate_with(GEOMETRY_TOL)
    }

    /// Checks non-negative weights, in-ball directions, and both completeness
    /// constraints within `tol`.
    // Negated comparisons so NaN weights and norms fail validation too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate_with(&self, tol: f64) -> Result<(), PovmError> {
        if self.elements.is_empty() {
            return Err(PovmError::Empty);
        }
        for (index, el) in self.elements.iter().enumerate() {
            if !(el.weight >= -tol) {
                return Err(PovmError::NegativeWeight {
                    index,
                    weight: el.weight,
                });
            }
            let norm = el.direction.norm();
            if !(norm <= 1.0 + tol) {
                return Err(PovmError::DirectionNorm { index, norm });
            }
        }
        let sum: f64 = self.elements.iter().map(|el| el.weight).sum();
        if !((sum - 2.0).abs() <= tol) {
            return Err(PovmError::WeightSum { sum });
        }
        let mut balance = BlochVector::ZERO;
        for el in &self.elements {
            balance = balance.add(&el.direction.scaled(el.weight));
        }
        if !(balance.norm() <= tol) {
            return Err(PovmError::Unbalanced {
                x: balance.x,
                y: balance.y,
                z: balance.z,
            });
        }
        Ok(())
    }

    /// Splits every interior element into a rank-one pair.
    ///
    /// An element `(mu, R)` with `0 < |R| < 1` becomes
    /// `(mu (1 + |R|) / 2, R/|R|)` and `(mu (1 - |R|) / 2, -R/|R|)`; the pair
    /// reproduces the parent exactly (`sum = mu`, weighted directions
    /// `mu R`), so completeness is untouched and any outcome statistics of
    /// the parent are recovered by summing the two children. A centred
    /// element (`R = 0`) splits along the z axis by convention. Rank-one
    /// elements pass through unchanged and zero-weight elements are dropped,
    /// which makes the operation idempotent. Children appear in place of
    /// their parent, `+` branch first.
    pub fn refine(&self) -> Povm {
        let mut out = Vec::with_capacity(2 * self.elements.len());
        for el in &self.elements {
            if el.weight == 0.0 {
                continue;
            }
            let norm = el.direction.norm();
            if norm >= 1.0 - GEOMETRY_TOL {
                out.push(*el);
            } else if norm == 0.0 {
                let axis = BlochVector::new(0.0, 0.0, 1.0);
                out.push(PovmElement::new(el.weight / 2.0, axis));
                out.push(PovmElement::new(el.weight / 2.0, axis.negated()));
            } else {
                let axis = el.direction.scaled(1.0 / norm);
                out.push(PovmElement::new(el.weight * (1.0 + norm) / 2.0, axis));
                out.push(PovmElement::new(
                    el.weight * (1.0 - norm) / 2.0,
                    axis.negated(),
                ));
            }
        }
        Povm::from_elements(out)
    }

    /// Rewrites the POVM in canonical form: negative zeros normalised,
    /// zero-weight elements dropped, exact duplicate directions merged, and
    /// elements sorted by direction `(z, y, x)` then weight, descending.
    ///
    /// Two canonically equal POVMs serialise to identical bytes.
    pub fn canonicalized(mut self) -> Povm {
        for el in &mut self.elements {
            el.weight = scrub_zero(el.weight);
            el.direction.x = scrub_zero(el.direction.x);
            el.direction.y = scrub_zero(el.direction.y);
            el.direction.z = scrub_zero(el.direction.z);
        }
        self.elements.retain(|el| el.weight != 0.0);
        self.elements.sort_by(|a, b| {
            b.direction
                .z
                .total_cmp(&a.direction.z)
                .then(b.direction.y.total_cmp(&a.direction.y))
                .then(b.direction.x.total_cmp(&a.direction.x))
                .then(b.weight.total_cmp(&a.weight))
        });
        let mut merged: Vec<PovmElement> = Vec::with_capacity(self.elements.len());
        for el in self.elements {
            match merged.last_mut() {
                Some(last)
                    if last.direction.x == el.direction.x
                        && last.direction.y == el.direction.y
                        && last.direction.z == el.direction.z =>
                {
                    last.weight += el.weight;
                }
                _ => merged.push(el),
            }
        }
        Povm::from_elements(merged)
    }

    /// The frontier-saturating four-outcome family in the y-z plane.
    ///
    /// Rank-one directions `(0, ±y0, ±z0)` with `y0 = sqrt(1 - z0^2)`; the
    /// aligned pair `(+y0, +z0), (-y0, -z0)` carries weight `mu`, the
    /// anti-aligned pair weight `1 - mu`. Every member yields which-way and
    /// which-phase guessing probabilities `(1 + d z0)/2` and `(1 + d y0)/2`
    /// independent of `mu`, which traces out the entire Pareto frontier as
    /// `z0` runs over `[0, 1]`.
    pub fn optimal_family(mu: f64, z0: f64) -> Result<Povm, PovmError> {
        check_range("mu", mu, 0.0, 1.0)?;
        check_range("z0", z0, 0.0, 1.0)?;
        let y0 = (1.0 - z0 * z0).max(0.0).sqrt();
        let povm = Povm::from_elements(vec![
            PovmElement::new(mu, BlochVector::new(0.0, y0, z0)),
            PovmElement::new(mu, BlochVector::new(0.0, -y0, -z0)),
            PovmElement::new(1.0 - mu, BlochVector::new(0.0, y0, -z0)),
            PovmElement::new(1.0 - mu, BlochVector::new(0.0, -y0, z0)),
        ]);
        Ok(povm.canonicalized())
    }

    /// An unbalanced pair of which-way detectors with erasure parameter `e`.
    ///
    /// Realised as the balanced (`mu = 1/2`) member of the optimal family at
    /// `z0 = e`: `e = 1` is a sharp z measurement, `e = 0` reads only the
    /// phase.
    pub fn ww_detector_scheme(e: f64) -> Result<Povm, PovmError> {
        check_range("e", e, 0.0, 1.0)?;
        Povm::optimal_family(0.5, e)
    }

    /// A two-outcome von Neumann measurement tilted between the y and z axes.
    ///
    /// `t_out in [1/2, 1]` is the transmission of the analyser towards the
    /// which-way port, so the tilt is `z0 = 2 t_out - 1`. The `orientation`
    /// sign selects which diagonal pairing of the optimal family survives:
    /// `Plus` keeps the aligned pair `±(0, y0, z0)` (`mu = 1`), `Minus` the
    /// anti-aligned pair `±(0, y0, -z0)` (`mu = 0`).
    pub fn vn_scheme(t_out: f64, orientation: Sign) -> Result<Povm, PovmError> {
        check_range("t_out", t_out, 0.5, 1.0)?;
        let z0 = 2.0 * t_out - 1.0;
        let mu = match orientation {
            Sign::Plus => 1.0,
            Sign::Minus => 0.0,
        };
        Povm::optimal_family(mu, z0)
    }

    /// Two cascaded detectors splitting all three axes: eight rank-one
    /// corners `(±x0, ±y0, ±z0)` of equal weight `1/4`, with
    /// `z0 = e1`, `y0 = sqrt(1 - e1^2) e2`, `x0 = sqrt(1 - e1^2) sqrt(1 - e2^2)`.
    ///
    /// The corner direction is exactly unit norm, so the scheme saturates the
    /// three-distance frontier ellipsoid for every `(e1, e2)`.
    pub fn two_detector_scheme(e1: f64, e2: f64) -> Result<Povm, PovmError> {
        check_range("e1", e1, 0.0, 1.0)?;
        check_range("e2", e2, 0.0, 1.0)?;
        let c1 = (1.0 - e1 * e1).max(0.0).sqrt();
        let z0 = e1;
        let y0 = c1 * e2;
        let x0 = c1 * (1.0 - e2 * e2).max(0.0).sqrt();
        let mut elements = Vec::with_capacity(8);
        for sx in Sign::BOTH {
            for sy in Sign::BOTH {
                for sz in Sign::BOTH {
                    elements.push(PovmElement::new(
                        0.25,
                        BlochVector::new(sx.value() * x0, sy.value() * y0, sz.value() * z0),
                    ));
                }
            }
        }
        Ok(Povm::from_elements(elements).canonicalized())
    }

    /// Serialises to the canonical JSON form `{"elements": [{"mu": .., "R": [..]}]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("POVM serialises to JSON")
    }

    /// Parses the JSON form. The result is not validated; call
    /// [`Povm::validate`] before trusting it.
    pub fn from_json(s: &str) -> Result<Povm, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Maps `-0.0` to `0.0` and leaves everything else alone.
fn scrub_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), PovmError> {
    if !(lo..=hi).contains(&value) {
        return Err(PovmError::ParameterRange {
            name,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}
