//! Self-check of the spin algebra and the unitary decomposition, run by
//! `qrng verify-physics`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::measurement::{outcome_distribution, prepare, PreparationSpec};
use crate::spin::{
    born_probabilities, eigensystem_numeric, eigensystem_sx_analytic, make_spin_operators, projector,
    solve_preparation_states, spin_observable, Operator, StateVector, C64,
};
use crate::unitary::{build_ux, decompose, haar_random_unitary, reconstruct};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Largest deviation observed.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value.is_finite() && value < tolerance,
        }
    }
}

const RANDOM_UNITARIES: usize = 100;
const ANGLE_GRID: usize = 24;
const SEED: u64 = 0x5EED;

fn commutator(a: &Operator, b: &Operator) -> Operator {
    *a * *b - *b * *a
}

fn max_prob_diff(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn run_physics_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let s = make_spin_operators();
    let i = C64::new(0.0, 1.0);
    let ops = [&s.sigma_x, &s.sigma_y, &s.sigma_z];

    let herm = ops.iter().map(|o| o.hermitian_deviation()).fold(0.0, f64::max);
    out.push(CheckResult::new("spin operators hermitian", herm, 1e-14));
    let tr = ops.iter().map(|o| o.trace().norm()).fold(0.0, f64::max);
    out.push(CheckResult::new("spin operators traceless", tr, 1e-14));

    let comm = [
        commutator(&s.sigma_x, &s.sigma_y).max_abs_diff(&s.sigma_z.scale(i)),
        commutator(&s.sigma_y, &s.sigma_z).max_abs_diff(&s.sigma_x.scale(i)),
        commutator(&s.sigma_z, &s.sigma_x).max_abs_diff(&s.sigma_y.scale(i)),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    out.push(CheckResult::new("angular momentum commutators", comm, 1e-14));

    let casimir = ops.iter().fold(Operator::zero(), |acc, o| acc + **o * **o);
    let casimir_dev = casimir.max_abs_diff(&Operator::identity().scale(C64::new(2.0, 0.0)));
    out.push(CheckResult::new("total spin s(s+1) = 2", casimir_dev, 1e-14));

    let ladder = (s.sigma_x + s.sigma_y.scale(i))
        .max_abs_diff(&s.s_plus)
        .max((s.sigma_x - s.sigma_y.scale(i)).max_abs_diff(&s.s_minus));
    out.push(CheckResult::new("ladder operators", ladder, 1e-14));

    let mut spectrum = 0.0f64;
    let mut traceless = 0.0f64;
    for a in 0..=ANGLE_GRID {
        for b in 0..ANGLE_GRID {
            let theta = std::f64::consts::PI * a as f64 / ANGLE_GRID as f64;
            let phi = std::f64::consts::TAU * b as f64 / ANGLE_GRID as f64;
            let op = spin_observable(theta, phi);
            traceless = traceless.max(op.trace().norm()).max(op.hermitian_deviation());
            match eigensystem_numeric(&op) {
                Ok(es) => {
                    for (got, want) in es.eigenvalues.iter().zip([-1.0, 0.0, 1.0]) {
                        spectrum = spectrum.max((got - want).abs());
                    }
                }
                Err(_) => spectrum = f64::INFINITY,
            }
        }
    }
    out.push(CheckResult::new("S(theta, phi) hermitian and traceless", traceless, 1e-10));
    out.push(CheckResult::new("S(theta, phi) spectrum {-1, 0, 1}", spectrum, 1e-10));

    let analytic = eigensystem_sx_analytic();
    let agree = match eigensystem_numeric(&s.sigma_x) {
        Ok(num) => {
            let num = num.sorted_descending();
            num.eigenvectors
                .iter()
                .zip(&analytic.eigenvectors)
                .map(|(a, b)| (a.inner(b).norm() - 1.0).abs())
                .fold(0.0, f64::max)
        }
        Err(_) => f64::INFINITY,
    };
    out.push(CheckResult::new("numeric S_x eigenvectors match analytic", agree, 1e-8));
    out.push(CheckResult::new("analytic S_x residual", analytic.residual(&s.sigma_x), 1e-14));

    let quarter = [0.25, 0.5, 0.25];
    let born = [PreparationSpec::PlusOne, PreparationSpec::MinusOne, PreparationSpec::Superposition]
        .into_iter()
        .map(|p| max_prob_diff(outcome_distribution(p).probabilities(), quarter))
        .fold(0.0, f64::max);
    out.push(CheckResult::new("Born probabilities (1/4, 1/2, 1/4)", born, 1e-12));
    let legacy = max_prob_diff(outcome_distribution(PreparationSpec::LegacySzZero).probabilities(), [0.5, 0.0, 0.5]);
    out.push(CheckResult::new("legacy preparation (1/2, 0, 1/2)", legacy, 1e-12));

    let solved = solve_preparation_states()
        .iter()
        .map(|st| born_probabilities(st, &analytic).map_or(f64::INFINITY, |p| max_prob_diff(p, quarter)))
        .fold(0.0, f64::max);
    out.push(CheckResult::new("solved preparations reproduce (1/4, 1/2, 1/4)", solved, 1e-12));

    let mut proj = 0.0f64;
    for v in analytic.eigenvectors.iter().chain([prepare(PreparationSpec::Superposition)].iter()) {
        match projector(v) {
            Ok(p) => {
                let m = p.matrix();
                proj = proj
                    .max((*m * *m).max_abs_diff(m))
                    .max((m.trace() - C64::new(1.0, 0.0)).norm());
            }
            Err(_) => proj = f64::INFINITY,
        }
    }
    out.push(CheckResult::new("projectors idempotent with unit trace", proj, 1e-12));

    let ux = build_ux();
    out.push(CheckResult::new("U_x unitary", ux.unitarity_deviation(), 1e-14));
    let diag = ux * s.sigma_x * ux.adjoint();
    out.push(CheckResult::new(
        "U_x diagonalizes S_x",
        diag.max_abs_diff(&Operator::diagonal([C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)])),
        1e-14,
    ));

    match decompose(&ux) {
        Ok(plan) => {
            out.push(CheckResult::new("U_x decomposition round trip", reconstruct(&plan).max_abs_diff(&ux), 1e-10));
            let layer_dev = plan.layers.iter().map(|l| l.matrix().unitarity_deviation()).fold(0.0, f64::max);
            out.push(CheckResult::new("U_x layers unitary", layer_dev, 1e-14));
            let amps = reconstruct(&plan).apply(&StateVector::up()).components();
            let p = [amps[0].norm_sqr(), amps[1].norm_sqr(), amps[2].norm_sqr()];
            out.push(CheckResult::new("U_x plan applied to |+1>", max_prob_diff(p, quarter), 1e-10));
        }
        Err(_) => out.push(CheckResult::new("U_x decomposition round trip", f64::INFINITY, 1e-10)),
    }

    let mut rng = ChaCha20Rng::seed_from_u64(SEED);
    let mut round_trip = 0.0f64;
    let mut layers = 0.0f64;
    for _ in 0..RANDOM_UNITARIES {
        let u = haar_random_unitary(&mut rng);
        match decompose(&u) {
            Ok(plan) => {
                round_trip = round_trip.max(reconstruct(&plan).max_abs_diff(&u));
                layers = plan.layers.iter().map(|l| l.matrix().unitarity_deviation()).fold(layers, f64::max);
            }
            Err(_) => round_trip = f64::INFINITY,
        }
    }
    out.push(CheckResult::new("random unitary round trips", round_trip, 1e-9));
    out.push(CheckResult::new("random unitary layers unitary", layers, 1e-14));

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_physics_checks();
        for c in &checks {
            assert!(c.pass, "{} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance);
        }
        assert!(checks.len() >= 15);
    }

    #[test]
    fn nan_never_passes() {
        assert!(!CheckResult::new("x", f64::NAN, 1.0).pass);
    }
}
