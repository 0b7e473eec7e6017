//! Spin-1 observable algebra on C^3.
//!
//! Vectors and matrices are expressed in the S_z standard basis, ordered
//! `{|1>, |0>, |-1>}`, in units where hbar = 1. Everything here is a pure
//! function on small `Copy` values.
//!
//! Besides the operators themselves the module carries the bookkeeping for
//! rank-1 projection observables: contexts (maximal sets of mutually
//! orthogonal projectors), partial value assignments and the admissibility
//! check, and a query for which projectors are value definite once a state
//! has been prepared.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::ops::{Add, Mul, Sub};

use nalgebra::{Complex, Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Prepared states must have unit norm to within this.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Two directions with `|<psi|phi>|` below this are orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Symmetry tolerance for accepting an operator as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Born probabilities refuse states further than this from unit norm.
pub const BORN_NORM_TOL: f64 = 1e-9;
/// Two projectors are the same observable if their matrices agree to this.
pub const PROJECTOR_IDENTITY_TOL: f64 = 1e-10;

const ZERO_VECTOR_TOL: f64 = 1e-12;
const PHASE_PIVOT_TOL: f64 = 1e-10;

#[inline]
fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A ket in C^3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector(Vector3<C64>);

impl StateVector {
    pub fn new(components: [C64; 3]) -> Self {
        Self(Vector3::from(components))
    }

    pub fn from_real(components: [f64; 3]) -> Self {
        Self::new(components.map(r))
    }

    /// Standard basis vector; index 0 is `|1>`, 1 is `|0>`, 2 is `|-1>`.
    pub fn basis(index: usize) -> Self {
        let mut v = [r(0.0); 3];
        v[index] = r(1.0);
        Self::new(v)
    }

    /// `|1>`, the S_z = +1 eigenstate.
    pub fn up() -> Self {
        Self::basis(0)
    }

    /// `|0>`, the S_z = 0 eigenstate.
    pub fn zero() -> Self {
        Self::basis(1)
    }

    /// `|-1>`, the S_z = -1 eigenstate.
    pub fn down() -> Self {
        Self::basis(2)
    }

    pub fn from_vector(v: Vector3<C64>) -> Self {
        Self(v)
    }

    pub fn as_vector(&self) -> &Vector3<C64> {
        &self.0
    }

    pub fn components(&self) -> [C64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn component(&self, index: usize) -> C64 {
        self.0[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm < ZERO_VECTOR_TOL {
            return Err(Error::ZeroVector);
        }
        Ok(Self(self.0.unscale(norm)))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(self.0 * factor)
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.dotc(&other.0)
    }

    /// Rotate the global phase so the first component with modulus above
    /// `1e-10` is real and positive.
    pub fn with_phase_convention(&self) -> Self {
        match self.0.iter().find(|z| z.norm() > PHASE_PIVOT_TOL) {
            Some(pivot) => Self(self.0 * (pivot.conj() / pivot.norm())),
            None => *self,
        }
    }

    /// Largest componentwise modulus difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for StateVector {
    type Output = StateVector;
    fn add(self, rhs: StateVector) -> StateVector {
        StateVector(self.0 + rhs.0)
    }
}

impl Sub for StateVector {
    type Output = StateVector;
    fn sub(self, rhs: StateVector) -> StateVector {
        StateVector(self.0 - rhs.0)
    }
}

/// A 3x3 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator(Matrix3<C64>);

impl Operator {
    pub fn from_rows(rows: [[C64; 3]; 3]) -> Self {
        Self(Matrix3::from_fn(|i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: [[f64; 3]; 3]) -> Self {
        Self(Matrix3::from_fn(|i, j| r(rows[i][j])))
    }

    pub fn from_matrix(m: Matrix3<C64>) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn zero() -> Self {
        Self(Matrix3::zeros())
    }

    pub fn diagonal(d: [C64; 3]) -> Self {
        Self(Matrix3::from_diagonal(&Vector3::from(d)))
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &StateVector, b: &StateVector) -> Self {
        Self(a.0 * b.0.adjoint())
    }

    pub fn as_matrix(&self) -> &Matrix3<C64> {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn rows(&self) -> [[C64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.0[(i, j)]))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(self.0 * factor)
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        StateVector(self.0 * state.0)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max_ij |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Operator::identity())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

impl Mul<StateVector> for Operator {
    type Output = StateVector;
    fn mul(self, rhs: StateVector) -> StateVector {
        StateVector(self.0 * rhs.0)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator(self.0 + rhs.0)
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator(self.0 - rhs.0)
    }
}

/// The spin-1 generalized Pauli matrices and ladder operators.
#[derive(Clone, Copy, Debug)]
pub struct SpinOperators {
    pub sigma_x: Operator,
    pub sigma_y: Operator,
    pub sigma_z: Operator,
    pub s_plus: Operator,
    pub s_minus: Operator,
}

pub fn make_spin_operators() -> SpinOperators {
    let h = FRAC_1_SQRT_2;
    let z = r(0.0);
    let sigma_x = Operator::from_real_rows([[0.0, h, 0.0], [h, 0.0, h], [0.0, h, 0.0]]);
    let sigma_y = Operator::from_rows([
        [z, c(0.0, -h), z],
        [c(0.0, h), z, c(0.0, -h)],
        [z, c(0.0, h), z],
    ]);
    let sigma_z = Operator::from_real_rows([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
    // S+|m> = sqrt(2 - m(m+1)) |m+1>, S-|m> = sqrt(2 - m(m-1)) |m-1>
    let s_plus = Operator::from_real_rows([[0.0, SQRT_2, 0.0], [0.0, 0.0, SQRT_2], [0.0, 0.0, 0.0]]);
    let s_minus = Operator::from_real_rows([[0.0, 0.0, 0.0], [SQRT_2, 0.0, 0.0], [0.0, SQRT_2, 0.0]]);
    SpinOperators {
        sigma_x,
        sigma_y,
        sigma_z,
        s_plus,
        s_minus,
    }
}

/// `S(theta, phi) = u . S` for the unit vector
/// `u = (sin t cos p, sin t sin p, cos t)`.
pub fn spin_observable(theta: f64, phi: f64) -> Operator {
    let (st, ct) = theta.sin_cos();
    let off = C64::from_polar(st * FRAC_1_SQRT_2, phi);
    let z = r(0.0);
    Operator::from_rows([
        [r(ct), off.conj(), z],
        [off, z, off.conj()],
        [z, off, r(-ct)],
    ])
}

/// Eigenvalues with their eigenvectors, index-aligned.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: [f64; 3],
    pub eigenvectors: [StateVector; 3],
}

impl EigenSystem {
    pub fn pairs(&self) -> impl Iterator<Item = (f64, &StateVector)> {
        self.eigenvalues.iter().copied().zip(self.eigenvectors.iter())
    }

    /// `max_i |O v_i - lambda_i v_i|`, measured componentwise.
    pub fn residual(&self, op: &Operator) -> f64 {
        self.pairs()
            .map(|(lambda, v)| op.apply(v).max_abs_diff(&v.scale(r(lambda))))
            .fold(0.0, f64::max)
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.eigenvectors.iter().enumerate() {
            for (j, b) in self.eigenvectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - r(target)).norm());
            }
        }
        worst
    }

    fn sorted_by(&self, descending: bool) -> Self {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let ord = self.eigenvalues[a].total_cmp(&self.eigenvalues[b]);
            if descending {
                ord.reverse()
            } else {
                ord
            }
        });
        Self {
            eigenvalues: order.map(|i| self.eigenvalues[i]),
            eigenvectors: order.map(|i| self.eigenvectors[i]),
        }
    }

    pub fn sorted_ascending(&self) -> Self {
        self.sorted_by(false)
    }

    pub fn sorted_descending(&self) -> Self {
        self.sorted_by(true)
    }

    /// Operator whose rows are the bras `<v_i|`; it maps a state to its
    /// amplitudes in this basis.
    pub fn change_of_basis(&self) -> Operator {
        Operator::from_rows(self.eigenvectors.map(|v| v.components().map(|z| z.conj())))
    }
}

/// Closed-form eigenpairs of S_x, ordered by eigenvalue `(+1, 0, -1)`.
pub fn eigensystem_sx_analytic() -> EigenSystem {
    let h = FRAC_1_SQRT_2;
    EigenSystem {
        eigenvalues: [1.0, 0.0, -1.0],
        eigenvectors: [
            StateVector::from_real([0.5, h, 0.5]),
            StateVector::from_real([h, 0.0, -h]),
            StateVector::from_real([0.5, -h, 0.5]),
        ],
    }
}

/// Numeric eigendecomposition of a Hermitian operator.
///
/// Eigenvalues come back in ascending order and every eigenvector follows
/// the phase convention of [`StateVector::with_phase_convention`].
pub fn eigensystem_numeric(op: &Operator) -> Result<EigenSystem> {
    let deviation = op.hermitian_deviation();
    if !(deviation <= HERMITIAN_TOL) {
        return Err(Error::NonHermitianInput { deviation });
    }
    // Symmetrize so round-off in the input cannot leak into the solver.
    let sym = (op.0 + op.0.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(sym);
    let system = EigenSystem {
        eigenvalues: [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]],
        eigenvectors: std::array::from_fn(|k| {
            StateVector(eig.eigenvectors.column(k).into_owned()).with_phase_convention()
        }),
    };
    Ok(system.sorted_ascending())
}

/// `p_i = |<v_i|psi>|^2`, index-aligned with `basis`.
pub fn born_probabilities(state: &StateVector, basis: &EigenSystem) -> Result<[f64; 3]> {
    let norm = state.norm();
    if !((norm - 1.0).abs() <= BORN_NORM_TOL) {
        return Err(Error::UnnormalizedState { norm });
    }
    Ok(basis.eigenvectors.map(|v| v.inner(state).norm_sqr()))
}

/// Rank-1 projection observable `P_psi = |psi><psi| / <psi|psi>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionObservable {
    direction: StateVector,
    matrix: Operator,
}

impl ProjectionObservable {
    /// Unit vector spanning the projector's range.
    pub fn direction(&self) -> &StateVector {
        &self.direction
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    /// `|<psi|phi>|` between the two (unit) directions.
    pub fn overlap(&self, other: &ProjectionObservable) -> f64 {
        self.direction.inner(&other.direction).norm()
    }

    /// Same observable: the projectors agree entrywise, whatever phase the
    /// spanning vectors were given.
    pub fn same_observable(&self, other: &ProjectionObservable) -> bool {
        self.matrix.max_abs_diff(&other.matrix) <= PROJECTOR_IDENTITY_TOL
    }
}

pub fn projector(state: &StateVector) -> Result<ProjectionObservable> {
    let direction = state.normalized()?;
    Ok(ProjectionObservable {
        direction,
        matrix: Operator::outer(&direction, &direction),
    })
}

/// True iff `observables` has exactly `n` members and they are pairwise
/// orthogonal.
pub fn is_context(observables: &[ProjectionObservable], n: usize) -> bool {
    if observables.len() != n {
        return false;
    }
    observables.iter().enumerate().all(|(i, a)| {
        observables[i + 1..]
            .iter()
            .all(|b| a.overlap(b) < ORTHOGONALITY_TOL)
    })
}

/// A validated context: `dimension` mutually orthogonal projectors.
#[derive(Clone, Debug)]
pub struct ContextSet {
    members: Vec<ProjectionObservable>,
    dimension: usize,
}

impl ContextSet {
    pub fn new(members: Vec<ProjectionObservable>, dimension: usize) -> Result<Self> {
        if !is_context(&members, dimension) {
            return Err(Error::NotAContext { dimension });
        }
        Ok(Self { members, dimension })
    }

    /// The context of projectors onto the vectors of an orthonormal basis.
    pub fn from_basis(basis: &[StateVector]) -> Result<Self> {
        let members = basis.iter().map(projector).collect::<Result<Vec<_>>>()?;
        let dimension = members.len();
        Self::new(members, dimension)
    }

    pub fn members(&self) -> &[ProjectionObservable] {
        &self.members
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Partial map from projection observables to `{0, 1}`.
///
/// Observables are keyed by their projector, so the same ray reached from
/// two different contexts carries a single value.
#[derive(Clone, Debug, Default)]
pub struct ValueAssignment {
    entries: Vec<(ProjectionObservable, bool)>,
}

impl ValueAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set `v(observable)`, replacing any previous value.
    pub fn assign(&mut self, observable: ProjectionObservable, value: bool) -> &mut Self {
        match self
            .entries
            .iter_mut()
            .find(|(p, _)| p.same_observable(&observable))
        {
            Some(entry) => entry.1 = value,
            None => self.entries.push((observable, value)),
        }
        self
    }

    pub fn with(mut self, observable: ProjectionObservable, value: bool) -> Self {
        self.assign(observable, value);
        self
    }

    /// `None` when the observable is value indefinite under this assignment.
    pub fn value(&self, observable: &ProjectionObservable) -> Option<bool> {
        self.entries
            .iter()
            .find(|(p, _)| p.same_observable(observable))
            .map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Every context whose members are all value definite must hold exactly one
/// 1. Contexts with an indefinite member are skipped.
pub fn check_admissible(v: &ValueAssignment, contexts: &[ContextSet]) -> bool {
    contexts.iter().all(|ctx| {
        let values: Option<Vec<bool>> = ctx.members().iter().map(|p| v.value(p)).collect();
        match values {
            Some(values) => values.iter().filter(|&&b| b).count() == 1,
            None => true,
        }
    })
}

/// Status of a projection observable once a state has been prepared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    /// The observable has a predetermined outcome.
    Definite(bool),
    Indefinite,
}

/// Which projectors are value definite for a system prepared in `prepared`.
///
/// The prepared ray itself is definite with value 1; rays orthogonal to it
/// share a context with it and are forced to 0 by admissibility. Any ray
/// neither parallel nor orthogonal to the preparation is value indefinite.
pub fn definiteness(prepared: &StateVector, observable: &ProjectionObservable) -> Result<Definiteness> {
    let prepared = prepared.normalized()?;
    let overlap = prepared.inner(observable.direction()).norm();
    Ok(if overlap >= 1.0 - ORTHOGONALITY_TOL {
        Definiteness::Definite(true)
    } else if overlap < ORTHOGONALITY_TOL {
        Definiteness::Definite(false)
    } else {
        Definiteness::Indefinite
    })
}

/// Moduli of the three constraints a preparation must meet for outcome
/// probabilities `(1/4, 1/2, 1/4)` in the S_x basis, with `x = <1|psi>`,
/// `y = <0|psi>`, `z = <-1|psi>`:
/// `|x/2 + y/sqrt2 + z/2|`, `|x/sqrt2 - z/sqrt2|`, `|x/2 - y/sqrt2 + z/2|`.
pub fn preparation_constraint_values(state: &StateVector) -> [f64; 3] {
    let [x, y, z] = state.components();
    let h = FRAC_1_SQRT_2;
    [
        (x * 0.5 + y * h + z * 0.5).norm(),
        (x * h - z * h).norm(),
        (x * 0.5 - y * h + z * 0.5).norm(),
    ]
}

/// Targets for [`preparation_constraint_values`].
pub const PREPARATION_TARGETS: [f64; 3] = [0.5, FRAC_1_SQRT_2, 0.5];

/// `(|+> - |->)/sqrt2` with `|+-> = (|0> +- |1>)/sqrt2`.
pub fn superposition_state() -> StateVector {
    let h = r(FRAC_1_SQRT_2);
    let plus = StateVector::zero().scale(h) + StateVector::up().scale(h);
    let minus = StateVector::zero().scale(h) - StateVector::up().scale(h);
    (plus - minus).scale(h)
}

/// Preparation states yielding `(1/4, 1/2, 1/4)` on an S_x measurement.
///
/// Restricting to real `y = 0, z = 1 - x` reduces the middle constraint to
/// `|2x - 1| = 1`, whose roots `x = 1` and `x = 0` give `|1>` and `|-1>`;
/// the superposition candidate is appended. Only states meeting all three
/// constraints to 1e-12 are returned.
///
/// The superposition candidate expands to the same ray as `|1>`.
pub fn solve_preparation_states() -> Vec<StateVector> {
    let real_roots = [1.0, 0.0];
    real_roots
        .iter()
        .map(|&x| StateVector::from_real([x, 0.0, 1.0 - x]))
        .chain(std::iter::once(superposition_state()))
        .filter(|s| {
            preparation_constraint_values(s)
                .iter()
                .zip(PREPARATION_TARGETS)
                .all(|(v, t)| (v - t).abs() <= NORMALIZATION_TOL)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const EPS: f64 = 1e-12;

    #[test]
    fn spin_matrices_match_closed_forms() {
        let s = make_spin_operators();
        assert!((s.sigma_x.entry(0, 1).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s.sigma_x.entry(0, 2), r(0.0));
        assert_eq!(
            s.sigma_z,
            Operator::diagonal([r(1.0), r(0.0), r(-1.0)])
        );
        let half_sum = (s.s_plus + s.s_minus).scale(r(0.5));
        assert!(half_sum.max_abs_diff(&s.sigma_x) < 1e-15);
        // sigma_y = (S+ - S-) / 2i
        let y = (s.s_plus - s.s_minus).scale(c(0.0, -0.5));
        assert!(y.max_abs_diff(&s.sigma_y) < 1e-15);
    }

    #[test]
    fn hermiticity_tags() {
        let s = make_spin_operators();
        for op in [s.sigma_x, s.sigma_y, s.sigma_z] {
            assert!(op.is_hermitian(0.0));
        }
        assert!(!s.s_plus.is_hermitian(1e-3));
        assert_eq!(s.s_plus.adjoint(), s.s_minus);
    }

    #[test]
    fn spin_observable_special_directions() {
        let s = make_spin_operators();
        assert!(spin_observable(0.0, 0.0).max_abs_diff(&s.sigma_z) < EPS);
        assert!(spin_observable(PI / 2.0, 0.0).max_abs_diff(&s.sigma_x) < EPS);
        assert!(spin_observable(PI / 2.0, PI / 2.0).max_abs_diff(&s.sigma_y) < EPS);
    }

    #[test]
    fn spin_observable_spectrum_over_grid() {
        for i in 0..10 {
            for j in 0..10 {
                let theta = PI * i as f64 / 9.0;
                let phi = 2.0 * PI * j as f64 / 10.0 - 0.3;
                let op = spin_observable(theta, phi);
                assert!(op.is_hermitian(1e-15));
                assert!(op.trace().norm() < 1e-15);
                let eig = eigensystem_numeric(&op).unwrap();
                for (got, want) in eig.eigenvalues.iter().zip([-1.0, 0.0, 1.0]) {
                    assert!((got - want).abs() < 1e-10, "{theta} {phi}: {got}");
                }
                assert!(eig.residual(&op) < 1e-10);
                assert!(eig.orthonormality_deviation() < 1e-10);
            }
        }
    }

    #[test]
    fn analytic_sx_eigenpairs() {
        let sx = make_spin_operators().sigma_x;
        let eig = eigensystem_sx_analytic();
        assert_eq!(eig.eigenvalues, [1.0, 0.0, -1.0]);
        assert!(eig.residual(&sx) < EPS);
        assert!(eig.orthonormality_deviation() < EPS);
        let plus = StateVector::from_real([0.5, SQRT_2 / 2.0, 0.5]);
        assert!(eig.eigenvectors[0].max_abs_diff(&plus) < 1e-15);
        let zero = StateVector::from_real([1.0, 0.0, -1.0]).scale(r(FRAC_1_SQRT_2));
        assert!(eig.eigenvectors[1].max_abs_diff(&zero) < 1e-15);
    }

    #[test]
    fn numeric_eigensystem_of_sz_is_standard_basis() {
        let eig = eigensystem_numeric(&make_spin_operators().sigma_z).unwrap();
        assert_eq!(eig.eigenvalues, [-1.0, 0.0, 1.0]);
        for (v, k) in eig.eigenvectors.iter().zip([2, 1, 0]) {
            assert!((v.inner(&StateVector::basis(k)).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_matches_analytic_on_sx() {
        let num = eigensystem_numeric(&make_spin_operators().sigma_x)
            .unwrap()
            .sorted_descending();
        let ana = eigensystem_sx_analytic();
        for (a, b) in num.eigenvectors.iter().zip(ana.eigenvectors.iter()) {
            assert!((a.inner(b).norm() - 1.0).abs() < 1e-8);
            // with the shared phase convention the vectors agree outright
            assert!(a.max_abs_diff(b) < 1e-8);
        }
    }

    #[test]
    fn numeric_rejects_non_hermitian() {
        let s = make_spin_operators();
        assert!(matches!(
            eigensystem_numeric(&s.s_plus),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn born_probabilities_for_candidate_states() {
        let basis = eigensystem_sx_analytic();
        for state in [StateVector::up(), StateVector::down(), superposition_state()] {
            let p = born_probabilities(&state, &basis).unwrap();
            for (got, want) in p.iter().zip([0.25, 0.5, 0.25]) {
                assert!((got - want).abs() < EPS);
            }
        }
        let p = born_probabilities(&basis.eigenvectors[1], &basis).unwrap();
        assert!((p[1] - 1.0).abs() < EPS && p[0] < EPS && p[2] < EPS);

        let p = born_probabilities(&StateVector::zero(), &basis).unwrap();
        assert_eq!(p[1], 0.0);
        assert!((p[0] - 0.5).abs() < EPS && (p[2] - 0.5).abs() < EPS);
    }

    #[test]
    fn born_rejects_unnormalized() {
        let basis = eigensystem_sx_analytic();
        let s = StateVector::from_real([1.0, 1.0, 0.0]);
        assert!(matches!(
            born_probabilities(&s, &basis),
            Err(Error::UnnormalizedState { .. })
        ));
    }

    #[test]
    fn projector_examples() {
        let p = projector(&StateVector::up()).unwrap();
        assert_eq!(*p.matrix(), Operator::diagonal([r(1.0), r(0.0), r(0.0)]));

        let p0 = projector(&eigensystem_sx_analytic().eigenvectors[1]).unwrap();
        let want = Operator::from_real_rows([[0.5, 0.0, -0.5], [0.0, 0.0, 0.0], [-0.5, 0.0, 0.5]]);
        assert!(p0.matrix().max_abs_diff(&want) < 1e-15);

        let unnormalized = StateVector::new([c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)]);
        let p = projector(&unnormalized).unwrap();
        assert!((*p.matrix() * *p.matrix()).max_abs_diff(p.matrix()) < EPS);
        assert!((p.matrix().trace() - r(1.0)).norm() < EPS);
        assert!(p.matrix().is_hermitian(EPS));

        assert!(matches!(
            projector(&StateVector::from_real([0.0; 3])),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn context_detection() {
        let std_ctx: Vec<_> = (0..3)
            .map(|k| projector(&StateVector::basis(k)).unwrap())
            .collect();
        assert!(is_context(&std_ctx, 3));
        assert!(!is_context(&std_ctx[..2], 3));

        let sx = eigensystem_sx_analytic();
        let sx_ctx: Vec<_> = sx.eigenvectors.iter().map(|v| projector(v).unwrap()).collect();
        assert!(is_context(&sx_ctx, 3));

        let mixed = vec![std_ctx[0], sx_ctx[0], std_ctx[2]];
        assert!((std_ctx[0].overlap(&sx_ctx[0]) - 0.5).abs() < 1e-15);
        assert!(!is_context(&mixed, 3));
    }

    #[test]
    fn admissibility_examples() {
        let ctx = ContextSet::from_basis(&[StateVector::up(), StateVector::zero(), StateVector::down()])
            .unwrap();
        let [p1, p0, pm] = [ctx.members()[0], ctx.members()[1], ctx.members()[2]];
        let contexts = [ctx];

        let v = ValueAssignment::new().with(p1, true).with(p0, false).with(pm, false);
        assert!(check_admissible(&v, &contexts));

        let v = ValueAssignment::new().with(p1, true).with(p0, true).with(pm, false);
        assert!(!check_admissible(&v, &contexts));

        let v = ValueAssignment::new().with(p1, false).with(p0, false).with(pm, false);
        assert!(!check_admissible(&v, &contexts));

        let v = ValueAssignment::new().with(p1, true).with(p0, true);
        assert!(check_admissible(&v, &contexts));
    }

    #[test]
    fn assignment_identifies_rays_up_to_phase() {
        let a = projector(&StateVector::up()).unwrap();
        let b = projector(&StateVector::up().scale(c(0.0, -2.0))).unwrap();
        let mut v = ValueAssignment::new();
        v.assign(a, true);
        v.assign(b, false);
        assert_eq!(v.len(), 1);
        assert_eq!(v.value(&a), Some(false));
    }

    #[test]
    fn definiteness_after_preparation() {
        let prepared = StateVector::up();
        let sx = eigensystem_sx_analytic();
        let same = projector(&StateVector::up()).unwrap();
        let orth = projector(&StateVector::zero()).unwrap();
        assert_eq!(definiteness(&prepared, &same).unwrap(), Definiteness::Definite(true));
        assert_eq!(definiteness(&prepared, &orth).unwrap(), Definiteness::Definite(false));
        for v in sx.eigenvectors.iter() {
            let p = projector(v).unwrap();
            assert_eq!(definiteness(&prepared, &p).unwrap(), Definiteness::Indefinite);
        }
        // legacy preparation: the S_x = 0 outcome is orthogonal to |0>
        let p0 = projector(&sx.eigenvectors[1]).unwrap();
        assert_eq!(
            definiteness(&StateVector::zero(), &p0).unwrap(),
            Definiteness::Definite(false)
        );
    }

    #[test]
    fn preparation_states() {
        let states = solve_preparation_states();
        assert_eq!(states.len(), 3);
        assert!(states[0].max_abs_diff(&StateVector::up()) < EPS);
        assert!(states[1].max_abs_diff(&StateVector::down()) < EPS);
        assert!(states[2].max_abs_diff(&StateVector::up()) < EPS);
        let basis = eigensystem_sx_analytic();
        for s in &states {
            assert!(s.is_normalized());
            for (v, t) in preparation_constraint_values(s).iter().zip(PREPARATION_TARGETS) {
                assert!((v - t).abs() < EPS);
            }
            let p = born_probabilities(s, &basis).unwrap();
            assert!((p[0] - 0.25).abs() < EPS && (p[1] - 0.5).abs() < EPS && (p[2] - 0.25).abs() < EPS);
        }
        // |0> fails the middle constraint
        let v = preparation_constraint_values(&StateVector::zero());
        assert!(v[1].abs() < EPS);
    }

    #[test]
    fn phase_convention() {
        let v = StateVector::new([c(0.0, 0.0), c(0.0, -3.0), c(1.0, 1.0)]).with_phase_convention();
        assert_eq!(v.component(0), r(0.0));
        assert!(v.component(1).im.abs() < 1e-15 && v.component(1).re > 0.0);
    }
}
