//! Brute-force verification machinery.
//!
//! Everything here exists to *check* the closed-form claims rather than to
//! compute anything new: a uniform-ish random POVM sampler, a parallel sweep
//! that hunts for frontier violations, a joint-success maximiser, an identity
//! sweep that tracks the worst-case deviation of every closed-form identity,
//! and a round-by-round Monte Carlo realisation of the guessing game.
//!
//! All sampling is deterministic given a seed: work is cut into fixed-size
//! shards, shard `k` draws from stream `k` of a counter-based generator, and
//! the partial results are reduced in shard order (or with order-insensitive
//! operations), so thread scheduling cannot change any output bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bloch::{BlochVector, EnsembleGeometry, Mode};
use crate::discrimination::{
    closed_form_probabilities, frontier_lhs, joint_distribution, DiscriminationError,
};
use crate::information::{holevo_bound, InfoReport};
use crate::povm::{Povm, PovmElement};

/// Frontier values above `1 + FRONTIER_SLACK` count as violations.
pub const FRONTIER_SLACK: f64 = 1e-9;
/// Number of histogram bins of width 0.01 covering `[0, 1.05)`.
pub const HISTOGRAM_BINS: usize = 105;
/// Sampled POVMs have between 2 and 8 outcomes.
pub const OUTCOME_RANGE: (usize, usize) = (2, 8);

/// Samples per parallel shard in the sweeps.
const SWEEP_SHARD: u64 = 1024;
/// Rounds per parallel shard in the Monte Carlo game.
const GAME_SHARD: u64 = 1 << 16;
/// Gram matrices with eigenvalue ratio below this are resampled.
const GRAM_EIGENVALUE_RATIO_FLOOR: f64 = 1e-12;

/// A seeded generator for shard `shard` of a run keyed by `seed`.
///
/// Streams of the underlying cipher are statistically independent, so shards
/// can be processed on any thread in any order.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// A point drawn uniformly from the closed unit ball, by rejection.
fn random_unit_ball<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm_squared() <= 1.0 {
            return v;
        }
    }
}

/// Draws a random `n_outcomes`-element POVM.
///
/// Raw elements `B_k = nu_k (1 + S_k . sigma) / 2` with `nu_k` uniform in
/// `(0, 1]` and `S_k` uniform in the ball are renormalised through their Gram
/// sum `G = sum_k B_k` as `A_k = G^{-1/2} B_k G^{-1/2}`, which enforces
/// completeness exactly while keeping every element positive. The congruence
/// is carried out directly on Pauli coefficients. Nearly singular Gram sums
/// (all raw directions crammed against one side of the sphere) are resampled.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, n_outcomes: usize) -> Povm {
    assert!(
        n_outcomes >= 2,
        "need at least two outcomes, got {n_outcomes}"
    );
    const MAX_ATTEMPTS: usize = 64;
    for _ in 0..MAX_ATTEMPTS {
        let raw: Vec<(f64, BlochVector)> = (0..n_outcomes)
            .map(|_| (1.0 - rng.random::<f64>(), random_unit_ball(rng)))
            .collect();
        if let Some(povm) = gram_renormalize(&raw) {
            debug_assert!(povm.validate().is_ok());
            return povm;
        }
    }
    unreachable!("Gram renormalisation kept failing; the RNG stream is degenerate");
}

/// `A_k = G^{-1/2} B_k G^{-1/2}` on Pauli coefficients, or `None` when `G` is
/// too close to singular.
fn gram_renormalize(raw: &[(f64, BlochVector)]) -> Option<Povm> {
    // G = g0 + g . sigma, accumulated from B_k = nu_k/2 + (nu_k/2) S_k . sigma.
    let mut g0 = 0.0;
    let mut g = BlochVector::ZERO;
    for (nu, s) in raw {
        g0 += nu / 2.0;
        g = g.add(&s.scaled(nu / 2.0));
    }
    let g_norm = g.norm();
    let lambda_plus = g0 + g_norm;
    let lambda_minus = g0 - g_norm;
    if lambda_minus <= GRAM_EIGENVALUE_RATIO_FLOOR * lambda_plus {
        return None;
    }
    // G^{-1/2} = a + b ghat . sigma with a ± b = lambda_±^{-1/2}.
    let inv_sqrt_plus = 1.0 / lambda_plus.sqrt();
    let inv_sqrt_minus = 1.0 / lambda_minus.sqrt();
    let a = (inv_sqrt_plus + inv_sqrt_minus) / 2.0;
    let b = (inv_sqrt_plus - inv_sqrt_minus) / 2.0;
    let s_vec = if g_norm > 0.0 {
        g.scaled(b / g_norm)
    } else {
        BlochVector::ZERO
    };
    let s_sq = s_vec.norm_squared();

    // S B S for B = b0 + v . sigma and S = a + s . sigma:
    //   scalar part  a^2 b0 + 2 a (s . v) + b0 |s|^2
    //   vector part  2 a b0 s + 2 (s . v) s + (a^2 - |s|^2) v
    let elements = raw
        .iter()
        .map(|(nu, s)| {
            let b0 = nu / 2.0;
            let v = s.scaled(nu / 2.0);
            let sv = s_vec.dot(&v);
            let m0 = a * a * b0 + 2.0 * a * sv + b0 * s_sq;
            let m = s_vec
                .scaled(2.0 * a * b0 + 2.0 * sv)
                .add(&v.scaled(a * a - s_sq));
            PovmElement::new(2.0 * m0, m.scaled(1.0 / m0))
        })
        .collect();
    Some(Povm::from_elements(elements))
}

/// Result of a random-POVM frontier sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub n_samples: u64,
    pub seed: u64,
    /// Violation threshold: `lhs > 1 + slack` counts.
    pub slack: f64,
    /// Largest frontier expression seen.
    pub max_lhs: f64,
    /// The POVM attaining `max_lhs`.
    pub argmax: Povm,
    /// Number of sampled POVMs beyond the frontier (expected: 0).
    pub violations: u64,
    /// Counts of `lhs` in [`HISTOGRAM_BINS`] bins of width 0.01 from 0.
    pub histogram: Vec<u64>,
    /// Worst `|lhs - 1|` over the frontier-saturating control grid — a
    /// sanity check that the sweep instrumentation can actually see the
    /// frontier.
    pub control_max_dev: f64,
}

fn histogram_bin(lhs: f64) -> usize {
    ((lhs * 100.0).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1)
}

struct SweepPartial {
    max_lhs: f64,
    argmax: Option<Povm>,
    violations: u64,
    histogram: Vec<u64>,
}

impl SweepPartial {
    fn new() -> Self {
        SweepPartial {
            max_lhs: f64::NEG_INFINITY,
            argmax: None,
            violations: 0,
            histogram: vec![0; HISTOGRAM_BINS],
        }
    }

    fn record(&mut self, lhs: f64, povm: &Povm) {
        self.histogram[histogram_bin(lhs)] += 1;
        if lhs > 1.0 + FRONTIER_SLACK {
            self.violations += 1;
        }
        if lhs > self.max_lhs {
            self.max_lhs = lhs;
            self.argmax = Some(povm.clone());
        }
    }

    /// Folds `other` (from a later shard) into `self`; strict comparison
    /// keeps the earliest argmax on exact ties.
    fn merge(mut self, other: SweepPartial) -> SweepPartial {
        if other.max_lhs > self.max_lhs {
            self.max_lhs = other.max_lhs;
            self.argmax = other.argmax;
        }
        self.violations += other.violations;
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self
    }
}

/// Cuts `n` items into `(shard_index, count)` pieces of at most `shard` each.
fn shards(n: u64, shard: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(shard))
        .map(|k| (k, shard.min(n - k * shard)))
        .collect()
}

/// Sweeps `n_samples` random POVMs (2–8 outcomes each) against the frontier.
///
/// Each sample is validated, its guessing probabilities are taken from the
/// joint table (not the closed forms), and the frontier expression is binned.
/// The returned report is identical for identical `(geometry, n_samples,
/// seed)` regardless of thread count.
pub fn pareto_sweep(
    geometry: &EnsembleGeometry,
    n_samples: u64,
    seed: u64,
) -> Result<SweepReport, DiscriminationError> {
    geometry.validate()?;
    let partial = shards(n_samples, SWEEP_SHARD)
        .into_par_iter()
        .map(|(shard_idx, count)| {
            let mut rng = shard_rng(seed, shard_idx);
            let mut partial = SweepPartial::new();
            for _ in 0..count {
                let n_outcomes = rng.random_range(OUTCOME_RANGE.0..=OUTCOME_RANGE.1);
                let povm = random_povm(&mut rng, n_outcomes);
                povm.validate()
                    .expect("sampled POVM satisfies completeness");
                let gp = joint_distribution(geometry, &povm)
                    .expect("validated inputs")
                    .guess_probabilities();
                partial.record(frontier_lhs(geometry, &gp), &povm);
            }
            partial
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(SweepPartial::new(), SweepPartial::merge);
    Ok(SweepReport {
        n_samples,
        seed,
        slack: FRONTIER_SLACK,
        max_lhs: if n_samples > 0 { partial.max_lhs } else { 0.0 },
        argmax: partial.argmax.unwrap_or_else(Povm::trivial),
        violations: partial.violations,
        histogram: partial.histogram,
        control_max_dev: control_grid_deviation(geometry),
    })
}

/// Worst `|frontier_lhs - 1|` over grids of frontier-saturating measurements.
fn control_grid_deviation(geometry: &EnsembleGeometry) -> f64 {
    let mut dev = 0.0f64;
    let mut check = |povm: &Povm| {
        let gp = joint_distribution(geometry, povm)
            .expect("control POVM is valid")
            .guess_probabilities();
        dev = dev.max((frontier_lhs(geometry, &gp) - 1.0).abs());
    };
    // The y-z family saturates whenever both planar distances are encoded;
    // with one distance missing only the matching projective member does.
    let z0s: Vec<f64> = if geometry.d_ww() > 0.0 && geometry.d_wp() > 0.0 {
        (0..=10).map(|i| i as f64 / 10.0).collect()
    } else if geometry.d_wp() == 0.0 && geometry.d_ww() > 0.0 {
        vec![1.0]
    } else if geometry.d_ww() == 0.0 && geometry.d_wp() > 0.0 {
        vec![0.0]
    } else {
        return 0.0; // no encoded planar axis: the frontier degenerates
    };
    for i in 0..=4 {
        for &z0 in &z0s {
            check(&Povm::optimal_family(i as f64 / 4.0, z0).expect("grid in range"));
        }
    }
    if geometry.mode() == Mode::Mixed
        && geometry.d_wm() > 0.0
        && geometry.d_ww() > 0.0
        && geometry.d_wp() > 0.0
    {
        for i in 0..=6 {
            for j in 0..=6 {
                check(
                    &Povm::two_detector_scheme(i as f64 / 6.0, j as f64 / 6.0)
                        .expect("grid in range"),
                );
            }
        }
    }
    dev
}

/// Worst-case deviations of the closed-form identities over random POVMs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n_samples: u64,
    pub seed: u64,
    /// max |table P_bit - closed-form P_bit| over all bits and samples.
    pub max_prob_dev: f64,
    /// max |table P_c - closed-form P_c|.
    pub max_pc_dev: f64,
    /// max |I_in_out - (sum of per-bit terms + I_cross)|.
    pub max_residual: f64,
    /// max (I_in_out - holevo); negative when the bound dominates everywhere.
    pub max_holevo_excess: f64,
}

/// Checks, per sampled POVM, that the table-level guessing probabilities
/// match their closed forms, that the information decomposition residual
/// vanishes, and that the Holevo quantity dominates `I_in_out`.
pub fn identity_sweep(
    geometry: &EnsembleGeometry,
    n_samples: u64,
    seed: u64,
) -> Result<IdentityReport, DiscriminationError> {
    geometry.validate()?;
    let holevo = holevo_bound(geometry);
    let zero = (0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY);
    let (max_prob_dev, max_pc_dev, max_residual, max_holevo_excess) =
        shards(n_samples, SWEEP_SHARD)
            .into_par_iter()
            .map(|(shard_idx, count)| {
                let mut rng = shard_rng(seed, shard_idx);
                let mut acc = zero;
                for _ in 0..count {
                    let n_outcomes = rng.random_range(OUTCOME_RANGE.0..=OUTCOME_RANGE.1);
                    let povm = random_povm(&mut rng, n_outcomes);
                    let jd = joint_distribution(geometry, &povm).expect("validated inputs");
                    let table = jd.guess_probabilities();
                    let closed =
                        closed_form_probabilities(geometry, &povm).expect("validated inputs");
                    let mut prob_dev = (table.p_ww - closed.p_ww)
                        .abs()
                        .max((table.p_wp - closed.p_wp).abs());
                    if let (Some(t), Some(c)) = (table.p_wm, closed.p_wm) {
                        prob_dev = prob_dev.max((t - c).abs());
                    }
                    let report = InfoReport::from_joint(&jd);
                    acc.0 = acc.0.max(prob_dev);
                    acc.1 = acc.1.max((table.p_c - closed.p_c).abs());
                    acc.2 = acc.2.max(report.residual.abs());
                    acc.3 = acc.3.max(report.i_in_out - holevo);
                }
                acc
            })
            .reduce(
                || zero,
                |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2), a.3.max(b.3)),
            );
    Ok(IdentityReport {
        n_samples,
        seed,
        max_prob_dev,
        max_pc_dev,
        max_residual,
        max_holevo_excess: if n_samples > 0 {
            max_holevo_excess
        } else {
            0.0
        },
    })
}

/// Finds the measurement maximising the joint success probability `P_c`.
///
/// A random sweep seeds the search; a grid over the known closed-form
/// families (the y-z family in pure mode, the eight-corner scheme in mixed
/// mode) refines it. Returns the best POVM and its `P_c`.
pub fn maximize_joint_correct(
    geometry: &EnsembleGeometry,
    n_samples: u64,
    seed: u64,
) -> Result<(Povm, f64), DiscriminationError> {
    geometry.validate()?;
    let p_c_of = |povm: &Povm| -> f64 {
        joint_distribution(geometry, povm)
            .expect("validated inputs")
            .joint_correct_probability()
    };
    let random_best = shards(n_samples, SWEEP_SHARD)
        .into_par_iter()
        .map(|(shard_idx, count)| {
            let mut rng = shard_rng(seed, shard_idx);
            let mut best: Option<(Povm, f64)> = None;
            for _ in 0..count {
                let n_outcomes = rng.random_range(OUTCOME_RANGE.0..=OUTCOME_RANGE.1);
                let povm = random_povm(&mut rng, n_outcomes);
                let p_c = p_c_of(&povm);
                if best.as_ref().is_none_or(|(_, b)| p_c > *b) {
                    best = Some((povm, p_c));
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(Povm, f64)>, |acc, cand| match acc {
            Some((_, b)) if b >= cand.1 => acc,
            _ => Some(cand),
        });

    let mut best = random_best.unwrap_or_else(|| {
        let povm = Povm::trivial();
        let p_c = p_c_of(&povm);
        (povm, p_c)
    });
    match geometry.mode() {
        Mode::Pure => {
            for i in 0..=2000 {
                let povm = Povm::optimal_family(0.5, i as f64 / 2000.0).expect("grid in range");
                let p_c = p_c_of(&povm);
                if p_c > best.1 {
                    best = (povm, p_c);
                }
            }
        }
        Mode::Mixed => {
            for i in 0..=200 {
                for j in 0..=200 {
                    let povm = Povm::two_detector_scheme(i as f64 / 200.0, j as f64 / 200.0)
                        .expect("grid in range");
                    let p_c = p_c_of(&povm);
                    if p_c > best.1 {
                        best = (povm, p_c);
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Empirical guessing probabilities from a simulated game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameResult {
    pub n_rounds: u64,
    pub seed: u64,
    /// Empirical per-bit and joint success frequencies.
    #[serde(rename = "P_ww")]
    pub p_ww: f64,
    #[serde(rename = "P_wp")]
    pub p_wp: f64,
    #[serde(rename = "P_wm", skip_serializing_if = "Option::is_none")]
    pub p_wm: Option<f64>,
    #[serde(rename = "P_c")]
    pub p_c: f64,
    /// Binomial standard errors `sqrt(p (1-p) / n)` of the estimates above.
    pub se_ww: f64,
    pub se_wp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_wm: Option<f64>,
    pub se_c: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct GameTally {
    ww: u64,
    wp: u64,
    wm: u64,
    joint: u64,
}

/// Plays `n_rounds` of the guessing game: draw a uniform label, sample an
/// outcome from the exact conditional distribution, guess by maximum
/// likelihood, and tally the hits.
///
/// Deterministic for fixed `(geometry, povm, n_rounds, seed)` regardless of
/// thread count. `n_rounds` must be positive.
pub fn monte_carlo_game(
    geometry: &EnsembleGeometry,
    povm: &Povm,
    n_rounds: u64,
    seed: u64,
) -> Result<GameResult, DiscriminationError> {
    assert!(n_rounds > 0, "simulating zero rounds estimates nothing");
    let jd = joint_distribution(geometry, povm)?;
    let rule = jd.ml_rule();
    let labels = jd.labels().to_vec();
    let n_outcomes = jd.n_outcomes();
    // Outcome CDF per label, normalised by the row sum so each row is an
    // exact conditional distribution.
    let cdfs: Vec<Vec<f64>> = (0..labels.len())
        .map(|i| {
            let row = jd.row(i);
            let total: f64 = row.iter().sum();
            let mut acc = 0.0;
            row.iter()
                .map(|p| {
                    acc += p / total;
                    acc
                })
                .collect()
        })
        .collect();

    let tally = shards(n_rounds, GAME_SHARD)
        .into_par_iter()
        .map(|(shard_idx, count)| {
            let mut rng = shard_rng(seed, shard_idx);
            let mut t = GameTally::default();
            for _ in 0..count {
                let i = rng.random_range(0..labels.len());
                let u: f64 = rng.random();
                let cdf = &cdfs[i];
                let j = cdf.iter().position(|&c| u < c).unwrap_or(n_outcomes - 1);
                let label = &labels[i];
                if rule.ww[j] == label.b_ww {
                    t.ww += 1;
                }
                if rule.wp[j] == label.b_wp {
                    t.wp += 1;
                }
                if let (Some(wm_rule), Some(b_wm)) = (&rule.wm, label.b_wm) {
                    if wm_rule[j] == b_wm {
                        t.wm += 1;
                    }
                }
                if rule.joint[j] == i {
                    t.joint += 1;
                }
            }
            t
        })
        .reduce(GameTally::default, |a, b| GameTally {
            ww: a.ww + b.ww,
            wp: a.wp + b.wp,
            wm: a.wm + b.wm,
            joint: a.joint + b.joint,
        });

    let n = n_rounds as f64;
    let estimate = |hits: u64| -> (f64, f64) {
        let p = hits as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    };
    let (p_ww, se_ww) = estimate(tally.ww);
    let (p_wp, se_wp) = estimate(tally.wp);
    let (p_c, se_c) = estimate(tally.joint);
    let (p_wm, se_wm) = match geometry.mode() {
        Mode::Pure => (None, None),
        Mode::Mixed => {
            let (p, se) = estimate(tally.wm);
            (Some(p), Some(se))
        }
    };
    Ok(GameResult {
        n_rounds,
        seed,
        p_ww,
        p_wp,
        p_wm,
        p_c,
        se_ww,
        se_wp,
        se_wm,
        se_c,
    })
}
