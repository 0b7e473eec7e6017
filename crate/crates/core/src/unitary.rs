//! Beam-splitter decomposition of 3x3 unitaries.
//!
//! A layer acting on modes `(i, j)` embeds the 2x2 block
//!
//! ```text
//! [ e^{i phi} cos(theta)   -sin(theta) ]
//! [ e^{i phi} sin(theta)    cos(theta) ]
//! ```
//!
//! into rows and columns `i, j` of the identity. A [`DecompositionPlan`]
//! lists layers in the order they act on a state, followed by a diagonal of
//! output phases:
//!
//! ```text
//! U = diag(e^{i a}, e^{i b}, e^{i c}) * L_k * ... * L_2 * L_1
//! ```
//!
//! [`decompose`] follows the rectangular nulling scheme: entries below the
//! diagonal are zeroed alternately by column operations (right
//! multiplication by an inverse layer) and row operations (left
//! multiplication by a layer), and the left layers are then commuted
//! through the remaining diagonal so the whole product is written in the
//! form above. For three modes this always yields exactly three layers.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{Operator, C64};

/// `decompose` refuses inputs whose `max |U^dagger U - I|` exceeds this.
pub const UNITARITY_TOL: f64 = 1e-10;

const MODES: usize = 3;

/// One two-mode transformation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayer", into = "RawLayer")]
pub struct BeamSplitterLayer {
    mode_pair: (usize, usize),
    pub theta: f64,
    pub phi: f64,
}

#[derive(Serialize, Deserialize)]
struct RawLayer {
    pair: [usize; 2],
    theta: f64,
    phi: f64,
}

impl TryFrom<RawLayer> for BeamSplitterLayer {
    type Error = Error;
    fn try_from(raw: RawLayer) -> Result<Self> {
        BeamSplitterLayer::new(raw.pair[0], raw.pair[1], raw.theta, raw.phi)
    }
}

impl From<BeamSplitterLayer> for RawLayer {
    fn from(layer: BeamSplitterLayer) -> Self {
        RawLayer {
            pair: [layer.mode_pair.0, layer.mode_pair.1],
            theta: layer.theta,
            phi: layer.phi,
        }
    }
}

impl BeamSplitterLayer {
    pub fn new(i: usize, j: usize, theta: f64, phi: f64) -> Result<Self> {
        if !(i < j && j < MODES) {
            return Err(Error::InvalidModePair(i, j));
        }
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite layer angles theta={theta} phi={phi}"
            )));
        }
        Ok(Self {
            mode_pair: (i, j),
            theta,
            phi,
        })
    }

    pub fn mode_pair(&self) -> (usize, usize) {
        self.mode_pair
    }

    pub fn matrix(&self) -> Operator {
        let (i, j) = self.mode_pair;
        let (s, c) = self.theta.sin_cos();
        let e = C64::from_polar(1.0, self.phi);
        let mut m = Matrix3::<C64>::identity();
        m[(i, i)] = e * c;
        m[(i, j)] = C64::new(-s, 0.0);
        m[(j, i)] = e * s;
        m[(j, j)] = C64::new(c, 0.0);
        Operator::from_matrix(m)
    }
}

/// Ordered layers plus output phases; see the module docs for the product
/// convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPlan {
    pub layers: Vec<BeamSplitterLayer>,
    #[serde(rename = "phases")]
    pub output_phases: [f64; 3],
}

impl DecompositionPlan {
    pub fn identity() -> Self {
        Self {
            layers: Vec::new(),
            output_phases: [0.0; 3],
        }
    }
}

/// The matrix taking a state to its S_x outcome amplitudes; its rows are the
/// S_x eigenvectors for eigenvalues `+1, 0, -1`.
pub fn build_ux() -> Operator {
    let h = std::f64::consts::SQRT_2;
    Operator::from_real_rows([[1.0, h, 1.0], [h, 0.0, -h], [1.0, -h, 1.0]]).scale(C64::new(0.5, 0.0))
}

/// Product of the plan's layers and phases.
pub fn reconstruct(plan: &DecompositionPlan) -> Operator {
    let product = plan
        .layers
        .iter()
        .fold(Operator::identity(), |acc, layer| layer.matrix() * acc);
    let phases = Operator::diagonal(plan.output_phases.map(|a| C64::from_polar(1.0, a)));
    phases * product
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.sin().atan2(a.cos());
    // keep the interval half-open at -pi
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Layer whose inverse, applied on the right, zeroes `w[row][col]` using
/// columns `col, col + 1`.
fn right_nulling_layer(w: &Matrix3<C64>, row: usize, col: usize) -> BeamSplitterLayer {
    let a = w[(row, col)];
    let b = w[(row, col + 1)];
    let (theta, phi) = if a.norm() == 0.0 {
        (0.0, 0.0)
    } else {
        (a.norm().atan2(b.norm()), wrap_angle(a.arg() - b.arg()))
    };
    BeamSplitterLayer {
        mode_pair: (col, col + 1),
        theta,
        phi,
    }
}

/// Layer that, applied on the left, zeroes `w[row][col]` using rows
/// `row - 1, row`.
fn left_nulling_layer(w: &Matrix3<C64>, row: usize, col: usize) -> BeamSplitterLayer {
    let a = w[(row - 1, col)];
    let b = w[(row, col)];
    let (theta, phi) = if b.norm() == 0.0 {
        (0.0, 0.0)
    } else {
        (b.norm().atan2(a.norm()), wrap_angle(b.arg() - a.arg() + PI))
    };
    BeamSplitterLayer {
        mode_pair: (row - 1, row),
        theta,
        phi,
    }
}

/// Rewrite `L^{-1} D` as `D' L'` with `L'` of the same layer form.
fn commute_through_phases(layer: &BeamSplitterLayer, phases: &mut [f64; 3]) -> BeamSplitterLayer {
    let (i, j) = layer.mode_pair;
    let (alpha, beta) = (phases[i], phases[j]);
    if layer.theta == 0.0 {
        // a pure phase on mode i folds into the diagonal
        phases[i] = wrap_angle(alpha - layer.phi);
        return BeamSplitterLayer {
            mode_pair: layer.mode_pair,
            theta: 0.0,
            phi: 0.0,
        };
    }
    phases[i] = wrap_angle(beta - layer.phi + PI);
    phases[j] = beta;
    BeamSplitterLayer {
        mode_pair: layer.mode_pair,
        theta: layer.theta,
        phi: wrap_angle(alpha - beta + PI),
    }
}

/// Factor a unitary into at most three beam-splitter layers and output
/// phases, so that `reconstruct(&decompose(u)?) == u` to rounding.
pub fn decompose(u: &Operator) -> Result<DecompositionPlan> {
    let deviation = u.unitarity_deviation();
    if !(deviation <= UNITARITY_TOL) {
        return Err(Error::NotUnitary { deviation });
    }
    let n = MODES;
    let mut w = *u.as_matrix();
    let mut right = Vec::new();
    let mut left = Vec::new();

    for i in 0..n - 1 {
        if i % 2 == 0 {
            for j in 0..=i {
                let layer = right_nulling_layer(&w, n - 1 - j, i - j);
                w *= layer.matrix().adjoint().as_matrix();
                right.push(layer);
            }
        } else {
            for j in 1..=i + 1 {
                let layer = left_nulling_layer(&w, n + j - i - 2, j - 1);
                w = layer.matrix().as_matrix() * w;
                left.push(layer);
            }
        }
    }

    // w = L_k..L_1 U R_1^dagger..R_p^dagger is now diagonal
    let mut phases = [0, 1, 2].map(|k| w[(k, k)].arg());
    let mut commuted: Vec<BeamSplitterLayer> = left
        .iter()
        .rev()
        .map(|layer| commute_through_phases(layer, &mut phases))
        .collect();
    // U = D T'_1 .. T'_k R_p .. R_1; the first layer to act comes first
    commuted.reverse();
    let mut layers = right;
    layers.extend(commuted.into_iter().rev());

    Ok(DecompositionPlan {
        layers,
        output_phases: phases,
    })
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(rng: &mut R) -> Operator {
    let mut sample = || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    };
    let z = Matrix3::<C64>::from_fn(|_, _| sample());
    let qr = z.qr();
    let q = qr.q();
    let rr = qr.r();
    let phases = Matrix3::from_diagonal(&nalgebra::Vector3::from_fn(|k, _| {
        let d = rr[(k, k)];
        if d.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            d / d.norm()
        }
    }));
    Operator::from_matrix(q * phases)
}
