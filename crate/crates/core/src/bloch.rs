//! Bloch-ball geometry of the input ensemble.
//!
//! Every qubit state is a point in the unit ball: `rho = (1 + r . sigma) / 2`
//! with `|r| <= 1`. The ensembles studied here are small families of such
//! points parametrised by three *distances* — pairwise trace distances along
//! orthogonal Bloch axes:
//!
//! * `d_ww` — which-way distance, encoded on the z axis,
//! * `d_wp` — which-phase distance, encoded on the y axis,
//! * `d_wm` — which-mixedness distance, encoded on the x axis (mixed mode only).
//!
//! In pure mode the four states `(d0, ±d_wp, ±d_ww)` sit on a rectangle
//! inscribed in the Bloch sphere, so `d0^2 + d_ww^2 + d_wp^2 = 1`. In mixed
//! mode eight states `(d0 ± d_wm, ±d_wp, ±d_ww)` form a box whose outer face
//! touches the sphere; `d0 = sqrt(1 - d_ww^2 - d_wp^2) - d_wm` must stay
//! non-negative so the whole box fits inside the ball.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for geometric validation (norms, distance budgets).
pub const GEOMETRY_TOL: f64 = 1e-9;

/// Errors raised when an ensemble geometry or Bloch vector is inconsistent.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// A distance parameter left the interval `[0, 1]`.
    #[error("distance {name} = {value} lies outside [0, 1]")]
    DistanceRange { name: &'static str, value: f64 },
    /// An angle parameter left the interval `[0, pi/2]`.
    #[error("angle {name} = {value} lies outside [0, pi/2]")]
    AngleRange { name: &'static str, value: f64 },
    /// Pure mode requires `d_ww^2 + d_wp^2 <= 1`.
    #[error("d_ww^2 + d_wp^2 = {sum_sq} exceeds 1; no pure-state rectangle fits the sphere")]
    RectangleTooLarge { sum_sq: f64 },
    /// Mixed mode requires `d_ww^2 + d_wp^2 + d_wm^2 <= 1`, i.e. `d0 >= 0`.
    #[error("state box leaves the Bloch ball: offset d0 = {d0} is negative")]
    BoxTooLarge { d0: f64 },
    /// A Bloch vector left the unit ball.
    #[error("Bloch vector norm {norm} exceeds 1")]
    NormOverflow { norm: f64 },
    /// A label carried a which-mixedness bit in pure mode, or lacked one in mixed mode.
    #[error("input label does not match the geometry mode: {0}")]
    LabelMode(&'static str),
}

/// A vector in the Bloch ball, `|r| <= 1`.
///
/// Serialises as a plain 3-array `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", from = "[f64; 3]")]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// The maximally mixed state.
    pub const ZERO: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> BlochVector {
        BlochVector::new(factor * self.x, factor * self.y, factor * self.z)
    }

    pub fn add(&self, other: &BlochVector) -> BlochVector {
        BlochVector::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn negated(&self) -> BlochVector {
        BlochVector::new(-self.x, -self.y, -self.z)
    }

    /// The unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<BlochVector> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self.scaled(1.0 / n))
        }
    }

    /// Checks that the vector stays inside the unit ball within `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), GeometryError> {
        let norm = self.norm();
        if norm > 1.0 + tol {
            return Err(GeometryError::NormOverflow { norm });
        }
        Ok(())
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(r: BlochVector) -> [f64; 3] {
        [r.x, r.y, r.z]
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(a: [f64; 3]) -> BlochVector {
        BlochVector::new(a[0], a[1], a[2])
    }
}

/// Trace distance between two qubit states, `|r1 - r2| / 2` in Bloch coordinates.
pub fn trace_distance(r1: &BlochVector, r2: &BlochVector) -> f64 {
    r1.add(&r2.negated()).norm() / 2.0
}

/// A classical bit encoded as a sign, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Both signs, `Plus` first — the canonical enumeration order.
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    /// `+1.0` or `-1.0`.
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// The sign of `x`, mapping ties (`x == 0`) to `Plus`.
    pub fn of(x: f64) -> Sign {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// One of the encoded input bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    /// Which-way bit (z axis).
    Ww,
    /// Which-phase bit (y axis).
    Wp,
    /// Which-mixedness bit (x axis, mixed mode only).
    Wm,
}

impl Bit {
    /// Canonical bit order: which-way, which-phase, which-mixedness.
    pub const ALL: [Bit; 3] = [Bit::Ww, Bit::Wp, Bit::Wm];
}

/// Whether the ensemble carries two bits on pure states or three on mixed states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pure,
    Mixed,
}

/// The bit string identifying one input state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputLabel {
    pub b_ww: Sign,
    pub b_wp: Sign,
    /// Present exactly when the geometry is mixed.
    pub b_wm: Option<Sign>,
}

impl InputLabel {
    pub fn pure(b_ww: Sign, b_wp: Sign) -> Self {
        InputLabel {
            b_ww,
            b_wp,
            b_wm: None,
        }
    }

    pub fn mixed(b_ww: Sign, b_wp: Sign, b_wm: Sign) -> Self {
        InputLabel {
            b_ww,
            b_wp,
            b_wm: Some(b_wm),
        }
    }

    /// The value of one bit, if the label carries it.
    pub fn bit(&self, which: Bit) -> Option<Sign> {
        match which {
            Bit::Ww => Some(self.b_ww),
            Bit::Wp => Some(self.b_wp),
            Bit::Wm => self.b_wm,
        }
    }
}

/// The distance parameters of one input ensemble.
///
/// Construct through [`EnsembleGeometry::pure`], [`EnsembleGeometry::mixed`]
/// or [`EnsembleGeometry::from_angles`], all of which validate; or through
/// [`EnsembleGeometry::from_distances`] plus an explicit [`validate`]
/// (`EnsembleGeometry::validate`) call when deliberately probing bad inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleGeometry {
    mode: Mode,
    d_ww: f64,
    d_wp: f64,
    /// Zero in pure mode.
    d_wm: f64,
}

impl EnsembleGeometry {
    /// A validated pure-mode geometry with the given which-way and which-phase distances.
    pub fn pure(d_ww: f64, d_wp: f64) -> Result<Self, GeometryError> {
        let g = Self::from_distances(Mode::Pure, d_ww, d_wp, 0.0);
        g.validate()?;
        Ok(g)
    }

    /// A validated mixed-mode geometry with all three distances.
    pub fn mixed(d_ww: f64, d_wp: f64, d_wm: f64) -> Result<Self, GeometryError> {
        let g = Self::from_distances(Mode::Mixed, d_ww, d_wp, d_wm);
        g.validate()?;
        Ok(g)
    }

    /// An unvalidated geometry straight from raw fields. `d_wm` is ignored in pure mode.
    pub fn from_distances(mode: Mode, d_ww: f64, d_wp: f64, d_wm: f64) -> Self {
        let d_wm = match mode {
            Mode::Pure => 0.0,
            Mode::Mixed => d_wm,
        };
        EnsembleGeometry {
            mode,
            d_ww,
            d_wp,
            d_wm,
        }
    }

    /// Pure-mode geometry from preparation angles:
    /// `d_ww = sin(alpha)`, `d_wp = cos(alpha) sin(phi)`, `d0 = cos(alpha) cos(phi)`.
    ///
    /// Both angles must lie in `[0, pi/2]`, which keeps all three quantities
    /// non-negative and makes the sphere constraint automatic.
    pub fn from_angles(alpha: f64, phi: f64) -> Result<Self, GeometryError> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(0.0..=half_pi).contains(&alpha) {
            return Err(GeometryError::AngleRange {
                name: "alpha",
                value: alpha,
            });
        }
        if !(0.0..=half_pi).contains(&phi) {
            return Err(GeometryError::AngleRange {
                name: "phi",
                value: phi,
            });
        }
        let g = Self::from_distances(Mode::Pure, alpha.sin(), alpha.cos() * phi.sin(), 0.0);
        g.validate()?;
        Ok(g)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn d_ww(&self) -> f64 {
        self.d_ww
    }

    pub fn d_wp(&self) -> f64 {
        self.d_wp
    }

    /// Which-mixedness distance; zero in pure mode.
    pub fn d_wm(&self) -> f64 {
        self.d_wm
    }

    /// Distance of a given bit, by axis.
    pub fn distance(&self, bit: Bit) -> f64 {
        match bit {
            Bit::Ww => self.d_ww,
            Bit::Wp => self.d_wp,
            Bit::Wm => self.d_wm,
        }
    }

    /// The common x offset of the input states.
    ///
    /// Pure mode: `sqrt(1 - d_ww^2 - d_wp^2)`, placing the rectangle on the
    /// sphere. Mixed mode: that same square root minus `d_wm`, placing the
    /// outer box face on the sphere.
    pub fn d0(&self) -> f64 {
        let s = (1.0 - self.d_ww * self.d_ww - self.d_wp * self.d_wp)
            .max(0.0)
            .sqrt();
        match self.mode {
            Mode::Pure => s,
            Mode::Mixed => s - self.d_wm,
        }
    }

    /// The bits carried by this geometry, in canonical order.
    pub fn bits(&self) -> &'static [Bit] {
        match self.mode {
            Mode::Pure => &[Bit::Ww, Bit::Wp],
            Mode::Mixed => &[Bit::Ww, Bit::Wp, Bit::Wm],
        }
    }

    /// Number of input states: 4 in pure mode, 8 in mixed mode.
    pub fn n_states(&self) -> usize {
        1 << self.bits().len()
    }

    /// Uniform prior over the input states.
    pub fn prior(&self) -> f64 {
        1.0 / self.n_states() as f64
    }

    /// All input labels in canonical order: the which-way bit varies slowest,
    /// the last bit fastest, `Plus` before `Minus` throughout.
    pub fn labels(&self) -> Vec<InputLabel> {
        let mut out = Vec::with_capacity(self.n_states());
        match self.mode {
            Mode::Pure => {
                for b_ww in Sign::BOTH {
                    for b_wp in Sign::BOTH {
                        out.push(InputLabel::pure(b_ww, b_wp));
                    }
                }
            }
            Mode::Mixed => {
                for b_ww in Sign::BOTH {
                    for b_wp in Sign::BOTH {
                        for b_wm in Sign::BOTH {
                            out.push(InputLabel::mixed(b_ww, b_wp, b_wm));
                        }
                    }
                }
            }
        }
        out
    }

    /// The Bloch vector of the input state carrying `label`:
    /// `(d0 [+ b_wm d_wm], b_wp d_wp, b_ww d_ww)`.
    pub fn input_bloch(&self, label: &InputLabel) -> Result<BlochVector, GeometryError> {
        let x = match (self.mode, label.b_wm) {
            (Mode::Pure, None) => self.d0(),
            (Mode::Mixed, Some(b_wm)) => self.d0() + b_wm.value() * self.d_wm,
            (Mode::Pure, Some(_)) => {
                return Err(GeometryError::LabelMode(
                    "which-mixedness bit supplied to a pure geometry",
                ))
            }
            (Mode::Mixed, None) => {
                return Err(GeometryError::LabelMode(
                    "which-mixedness bit missing for a mixed geometry",
                ))
            }
        };
        Ok(BlochVector::new(
            x,
            label.b_wp.value() * self.d_wp,
            label.b_ww.value() * self.d_ww,
        ))
    }

    /// Validates with the default tolerance [`GEOMETRY_TOL`].
    pub fn validate(&self) -> Result<(), GeometryError> {
        self.validate_with(GEOMETRY_TOL)
    }

    /// Checks all distance ranges and the ball constraint within `tol`.
    pub fn validate_with(&self, tol: f64) -> Result<(), GeometryError> {
        for (name, value) in [
            ("d_ww", self.d_ww),
            ("d_wp", self.d_wp),
            ("d_wm", self.d_wm),
        ] {
            if !(-tol..=1.0 + tol).contains(&value) || value.is_nan() {
                return Err(GeometryError::DistanceRange { name, value });
            }
        }
        let planar_sq = self.d_ww * self.d_ww + self.d_wp * self.d_wp;
        match self.mode {
            Mode::Pure => {
                if planar_sq > 1.0 + tol {
                    return Err(GeometryError::RectangleTooLarge { sum_sq: planar_sq });
                }
            }
            Mode::Mixed => {
                // d_ww^2 + d_wp^2 + d_wm^2 <= 1 is equivalent to d0 >= 0 given
                // the range checks above; report the offset, which is the
                // quantity that actually enters the state coordinates.
                let d0 = self.d0();
                if d0 < -tol {
                    return Err(GeometryError::BoxTooLarge { d0 });
                }
            }
        }
        Ok(())
    }
}
