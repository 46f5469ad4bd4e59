//! Reconstruction of the trace-form operator behind a black-box additive
//! complex assignment, and its split into a pair of genuine density
//! operators.
//!
//! The forward direction of the correspondence is immediate: an operator
//! with unit trace and reversal symmetry defines an additive assignment by
//! tracing against it. This module realizes the converse constructively at
//! desk scale: evaluate the assignment on a spanning frame of rank-1
//! projectors, solve the resulting linear system, and validate the result
//! on fresh projectors. The split `Y = (ρ¹/μ - r) + i (ρ²/ν - s)` follows
//! the shift-and-rescale construction with a fixed eigenvalue margin.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{
    distance, hermitian_eigenvalues, identity, ket_projector, random_projector_rng, CMatrix,
    CVector, SubsystemDims, ONE,
};
use crate::hpo::reversal_operator;
use crate::peg::{GleasonOperator, OPERATOR_CONDITION_TOL};

/// Eigenvalue margin added to the shifts so the recovered states stay
/// strictly positive under roundoff.
pub const SHIFT_MARGIN: f64 = 1e-6;

/// A black-box complex assignment on projectors of a fixed dimension.
pub trait AssignmentOracle {
    fn dim(&self) -> usize;
    fn evaluate(&self, projector: &CMatrix) -> Complex64;
}

/// The assignment `P ↦ tr(P · target)`.
pub struct TraceOracle {
    target: CMatrix,
}

impl TraceOracle {
    pub fn new(target: CMatrix) -> Self {
        Self { target }
    }
}

impl AssignmentOracle for TraceOracle {
    fn dim(&self) -> usize {
        self.target.nrows()
    }

    fn evaluate(&self, projector: &CMatrix) -> Complex64 {
        (projector * &self.target).trace()
    }
}

/// Wraps a closure as an oracle.
pub struct FnOracle<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&CMatrix) -> Complex64> FnOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&CMatrix) -> Complex64> AssignmentOracle for FnOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, projector: &CMatrix) -> Complex64 {
        (self.f)(projector)
    }
}

/// The spanning frame: basis projectors |i><i|, plus the rank-1 projectors
/// onto (e_i + e_j)/√2 and (e_i + i e_j)/√2 for i < j. Exactly d² members.
pub fn projector_frame(dim: usize) -> Vec<CMatrix> {
    let mut frame = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let mut v = CVector::zeros(dim);
        v[i] = ONE;
        frame.push(ket_projector(&v));
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut plus = CVector::zeros(dim);
            plus[i] = ONE;
            plus[j] = ONE;
            frame.push(ket_projector(&plus));
            let mut phase = CVector::zeros(dim);
            phase[i] = ONE;
            phase[j] = Complex64::new(0.0, 1.0);
            frame.push(ket_projector(&phase));
        }
    }
    frame
}

/// Result of a reconstruction: the recovered matrix plus the residual of
/// the frame solve and the worst validation residual on fresh projectors.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    matrix: CMatrix,
    dims: SubsystemDims,
    pub frame_residual: f64,
    pub validation_residual: f64,
    /// Set when the space dimension is 2 or less, where assignments defined
    /// only lattice-theoretically are not pinned down; the linear solve
    /// still recovers full trace-form oracles.
    pub low_dim_warning: bool,
}

impl Reconstruction {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    /// Wraps the recovered matrix as a structural operator, enforcing the
    /// unit-trace and reversal-symmetry conditions.
    pub fn into_operator(self) -> Result<GleasonOperator> {
        GleasonOperator::new(self.matrix, self.dims)
    }
}

/// Recovers the operator `Y` with `oracle(P) = tr(P Y)` by evaluating the
/// oracle on the d² projector frame and solving the linear system. The
/// result is validated against the oracle on 100 fresh seeded random
/// projectors.
pub fn reconstruct_y(
    oracle: &dyn AssignmentOracle,
    dims: &SubsystemDims,
    seed: u64,
) -> Result<Reconstruction> {
    let dim = dims.total();
    if oracle.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: oracle.dim(),
        });
    }
    let frame = projector_frame(dim);
    let n = dim * dim;
    // unknowns: vec(Y) column-major, Y[(r,c)] at index c*dim + r;
    // tr(P Y) = sum_{a,b} P[(a,b)] Y[(b,a)]
    let mut a = CMatrix::zeros(n, n);
    let mut b = DVector::<Complex64>::zeros(n);
    for (k, p) in frame.iter().enumerate() {
        for row in 0..dim {
            for col in 0..dim {
                a[(k, row * dim + col)] = p[(row, col)];
            }
        }
        b[k] = oracle.evaluate(p);
    }
    let lu = a.clone().lu();
    let x = lu.solve(&b).ok_or_else(|| Error::SingularSystem {
        detail: "frame system has no unique solution; the oracle is not \
                 consistent with any trace form"
            .into(),
    })?;
    let frame_residual = (&a * &x - &b).norm();
    let mut y = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            y[(row, col)] = x[col * dim + row];
        }
    }

    // fresh validation projectors, independent of the frame
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut validation_residual = 0.0f64;
    for _ in 0..100 {
        let rank = 1 + rng.random_range(0..dim.max(2) - 1);
        let p = random_projector_rng(dim, rank, &mut rng)?;
        let predicted = (&p * &y).trace();
        let actual = oracle.evaluate(&p);
        validation_residual = validation_residual.max((predicted - actual).norm());
    }

    Ok(Reconstruction {
        matrix: y,
        dims: dims.clone(),
        frame_residual,
        validation_residual,
        low_dim_warning: dim <= 2,
    })
}

/// Residuals of the two structural conditions on an operator, measured at
/// [`OPERATOR_CONDITION_TOL`].
#[derive(Debug, Clone, Copy)]
pub struct TheoremConditionReport {
    pub reversal_residual: f64,
    pub trace_residual: f64,
    pub tol: f64,
}

impl TheoremConditionReport {
    pub fn pass_reversal(&self) -> bool {
        self.reversal_residual <= self.tol
    }

    pub fn pass_trace(&self) -> bool {
        self.trace_residual <= self.tol
    }

    pub fn pass(&self) -> bool {
        self.pass_reversal() && self.pass_trace()
    }
}

/// Measures `‖Y† - MYM‖_F` and `|tr Y - 1|` for an arbitrary matrix.
pub fn verify_theorem_conditions(
    matrix: &CMatrix,
    dims: &SubsystemDims,
) -> Result<TheoremConditionReport> {
    if !dims.matches(matrix) {
        return Err(Error::DimensionMismatch {
            expected: dims.total(),
            got: matrix.nrows(),
        });
    }
    let m = reversal_operator(dims)?;
    Ok(TheoremConditionReport {
        reversal_residual: distance(&matrix.adjoint(), &(&m * matrix * &m)),
        trace_residual: (matrix.trace() - ONE).norm(),
        tol: OPERATOR_CONDITION_TOL,
    })
}

/// Assignment-level consequence of reversal symmetry: sampled check of
/// `conj(tr(P Y)) = tr((M P M) Y)`.
#[derive(Debug, Clone, Copy)]
pub struct ConjugationConsequenceReport {
    pub max_residual: f64,
    pub samples: usize,
    pub tol: f64,
}

impl ConjugationConsequenceReport {
    pub fn pass(&self) -> bool {
        self.max_residual <= self.tol
    }
}

pub fn check_conjugation_consequence(
    matrix: &CMatrix,
    dims: &SubsystemDims,
    seed: u64,
    samples: usize,
) -> Result<ConjugationConsequenceReport> {
    if !dims.matches(matrix) {
        return Err(Error::DimensionMismatch {
            expected: dims.total(),
            got: matrix.nrows(),
        });
    }
    let dim = dims.total();
    let m = reversal_operator(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0f64;
    for _ in 0..samples {
        let rank = 1 + rng.random_range(0..dim.max(2) - 1);
        let p = random_projector_rng(dim, rank, &mut rng)?;
        let forward = (&p * matrix).trace().conj();
        let reversed = ((&m * &p * &m) * matrix).trace();
        max_residual = max_residual.max((forward - reversed).norm());
    }
    Ok(ConjugationConsequenceReport {
        max_residual,
        samples,
        tol: OPERATOR_CONDITION_TOL,
    })
}

/// The split of an operator into two shifted, rescaled density operators:
/// `Y = (ρ¹/μ - r·1) + i (ρ²/ν - s·1)`.
#[derive(Debug, Clone)]
pub struct StateDecomposition {
    pub rho1: CMatrix,
    pub rho2: CMatrix,
    pub mu: f64,
    pub nu: f64,
    pub r: f64,
    pub s: f64,
    pub y1: CMatrix,
    pub y2: CMatrix,
}

impl StateDecomposition {
    /// Reassembles the original operator from the parts.
    pub fn reassemble(&self) -> CMatrix {
        let dim = self.rho1.nrows();
        let real_part = self.rho1.scale(1.0 / self.mu) - identity(dim).scale(self.r);
        let imag_part = self.rho2.scale(1.0 / self.nu) - identity(dim).scale(self.s);
        real_part + imag_part * Complex64::new(0.0, 1.0)
    }

    /// `tr(ρ¹ P)`, the rescaled-and-shifted real part of the assignment;
    /// lands in [0, 1] for projectors.
    pub fn rho1_expectation(&self, p: &CMatrix) -> f64 {
        (p * &self.rho1).trace().re
    }

    pub fn rho2_expectation(&self, p: &CMatrix) -> f64 {
        (p * &self.rho2).trace().re
    }

    /// Smallest eigenvalue across the two recovered states; should sit at
    /// or above zero up to roundoff.
    pub fn state_floor(&self) -> f64 {
        hermitian_eigenvalues(&self.rho1)[0].min(hermitian_eigenvalues(&self.rho2)[0])
    }
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn antihermitian_part_over_i(m: &CMatrix) -> CMatrix {
    // (Y - Y†)/(2i)
    (m - m.adjoint()) * Complex64::new(0.0, -0.5)
}

/// Splits `y` into Hermitian and anti-Hermitian parts, shifts each by its
/// most negative eigenvalue plus [`SHIFT_MARGIN`], and rescales to unit
/// trace, producing two genuine density operators.
pub fn decompose_states(y: &GleasonOperator) -> Result<StateDecomposition> {
    let dim = y.dim();
    let y1 = hermitian_part(y.matrix());
    let y2 = antihermitian_part_over_i(y.matrix());

    let shift = |m: &CMatrix| -> f64 {
        let min = hermitian_eigenvalues(m)[0];
        (-min).max(0.0) + SHIFT_MARGIN
    };
    let r = shift(&y1);
    let s = shift(&y2);
    let t1 = (&y1 + identity(dim).scale(r)).trace().re;
    let t2 = (&y2 + identity(dim).scale(s)).trace().re;
    if t1 <= 0.0 || t2 <= 0.0 {
        return Err(Error::Scenario {
            context: "state decomposition".into(),
            message: format!("shifted parts have non-positive traces {t1}, {t2}"),
        });
    }
    let mu = 1.0 / t1;
    let nu = 1.0 / t2;
    Ok(StateDecomposition {
        rho1: (&y1 + identity(dim).scale(r)).scale(mu),
        rho2: (&y2 + identity(dim).scale(s)).scale(nu),
        mu,
        nu,
        r,
        s,
        y1,
        y2,
    })
}

/// Draws an admissible operator: reversal-symmetric with unit trace but
/// otherwise random. Useful for plant-and-recover exercises.
pub fn random_admissible_operator(dims: &SubsystemDims, seed: u64) -> Result<GleasonOperator> {
    let dim = dims.total();
    let m = reversal_operator(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = crate::hilbert::random_gaussian_rng(dim, &mut rng);
    // (G + M G† M)/2 satisfies X† = M X M by construction
    let sym = (&g + &m * g.adjoint() * &m).scale(0.5);
    let tr = sym.trace();
    let y = if tr.norm() > 1e-6 {
        sym.map(|z| z / tr)
    } else {
        // near-traceless draw: add a normalized identity offset instead
        let dimc = Complex64::new(dim as f64, 0.0);
        sym + identity(dim).map(|z| (z - tr / dimc * z) / dimc)
    };
    GleasonOperator::new(y, dims.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random_density, zeros};
    use crate::hpo::Dynamics;
    use crate::peg::{build_y, peg_via_y, Scenario};
    use crate::HistoryProjector;
    use approx::assert_relative_eq;

    #[test]
    fn frame_has_d_squared_members() {
        for dim in 2..6 {
            let frame = projector_frame(dim);
            assert_eq!(frame.len(), dim * dim);
            for p in &frame {
                assert!(crate::hilbert::is_projector(p, 1e-12));
            }
        }
    }

    #[test]
    fn recovers_planted_density_single_slot() {
        let dims = SubsystemDims::uniform(1, 4).unwrap();
        let rho = random_density(4, 31);
        let oracle = TraceOracle::new(rho.clone());
        let rec = reconstruct_y(&oracle, &dims, 1).unwrap();
        assert!(distance(rec.matrix(), &rho) <= 1e-9);
        assert!(rec.validation_residual <= 1e-9);
        let op = rec.into_operator().unwrap();
        assert!(op.reversal_residual() <= 1e-9);
    }

    #[test]
    fn recovers_planted_admissible_operators() {
        for (n_slots, base) in [(2usize, 2usize), (3, 2), (2, 3)] {
            let dims = SubsystemDims::uniform(n_slots, base).unwrap();
            for seed in 0..10u64 {
                let planted = random_admissible_operator(&dims, seed).unwrap();
                let oracle = TraceOracle::new(planted.matrix().clone());
                let rec = reconstruct_y(&oracle, &dims, seed).unwrap();
                assert!(
                    distance(rec.matrix(), planted.matrix()) <= 1e-8,
                    "dims {:?} seed {seed}: {}",
                    dims.as_slice(),
                    distance(rec.matrix(), planted.matrix())
                );
            }
        }
    }

    #[test]
    fn reconstruction_matches_scenario_operator() {
        let rho = random_density(2, 5);
        let s = Scenario::new(
            2,
            vec![1.0, 2.0],
            Dynamics::new(vec![
                crate::hilbert::random_unitary(2, 6),
                crate::hilbert::random_unitary(2, 7),
            ])
            .unwrap(),
            rho,
            vec![],
            0,
        )
        .unwrap();
        let y = build_y(&s).unwrap();
        let dims = s.dims();
        let y_matrix = y.matrix().clone();
        let oracle = FnOracle::new(4, move |p: &CMatrix| (p * &y_matrix).trace());
        let rec = reconstruct_y(&oracle, &dims, 3).unwrap();
        assert!(distance(rec.matrix(), y.matrix()) <= 1e-8);
        // the recovered operator reproduces pegs on arbitrary propositions
        let op = rec.into_operator().unwrap();
        let p = HistoryProjector::new(
            crate::hilbert::random_projector(4, 2, 9).unwrap(),
            dims.clone(),
        )
        .unwrap();
        let lhs = peg_via_y(&p, &y).unwrap();
        let rhs = peg_via_y(&p, &op).unwrap();
        assert!((lhs - rhs).norm() <= 1e-9);
    }

    #[test]
    fn low_dim_warning_fires_below_three() {
        let dims = SubsystemDims::uniform(1, 2).unwrap();
        let rho = random_density(2, 1);
        let rec = reconstruct_y(&TraceOracle::new(rho), &dims, 0).unwrap();
        assert!(rec.low_dim_warning);
    }

    #[test]
    fn theorem_conditions_on_normalized_identity() {
        let dims = SubsystemDims::uniform(2, 2).unwrap();
        let y = identity(4).scale(0.25);
        let report = verify_theorem_conditions(&y, &dims).unwrap();
        assert_eq!(report.reversal_residual, 0.0);
        assert_eq!(report.trace_residual, 0.0);
        assert!(report.pass());
    }

    #[test]
    fn theorem_conditions_detect_planted_asymmetry() {
        let dims = SubsystemDims::uniform(2, 2).unwrap();
        let y = identity(4).scale(0.25);
        // planted defect: i*eps on a diagonal entry is Hermitian-violating
        // but M-invariant, so the residual is exactly 2*eps
        let eps = 1e-3;
        let mut bad = y.clone();
        bad[(0, 0)] += Complex64::new(0.0, eps);
        let report = verify_theorem_conditions(&bad, &dims).unwrap();
        assert!(!report.pass_reversal());
        assert_relative_eq!(report.reversal_residual, 2.0 * eps, epsilon = 1e-12);
    }

    #[test]
    fn conjugation_consequence_passes_for_admissible_and_fails_for_planted() {
        let dims = SubsystemDims::uniform(2, 2).unwrap();
        let y = random_admissible_operator(&dims, 3).unwrap();
        let ok = check_conjugation_consequence(y.matrix(), &dims, 11, 50).unwrap();
        assert!(ok.pass(), "residual {}", ok.max_residual);

        let mut bad = y.matrix().clone();
        bad[(0, 0)] += Complex64::new(0.0, 1e-3);
        let report = check_conjugation_consequence(&bad, &dims, 11, 50).unwrap();
        assert!(!report.pass());
    }

    #[test]
    fn decompose_hermitian_density_gives_uniform_imaginary_state() {
        // for Y = rho (Hermitian), the imaginary part is zero, so the
        // shifted state is the maximally mixed one with shift = margin
        let dims = SubsystemDims::uniform(1, 4).unwrap();
        let rho = random_density(4, 13);
        let y = GleasonOperator::new(rho.clone(), dims).unwrap();
        let dec = decompose_states(&y).unwrap();
        assert_relative_eq!(dec.s, SHIFT_MARGIN, epsilon = 1e-12);
        assert!(distance(&dec.rho2, &identity(4).scale(0.25)) <= 1e-9);
        assert!(distance(&dec.y2, &zeros(4)) <= 1e-12);
    }

    #[test]
    fn decomposition_round_trips_and_states_are_densities() {
        for (n_slots, base) in [(2usize, 2usize), (3, 2)] {
            let dims = SubsystemDims::uniform(n_slots, base).unwrap();
            for seed in 20..30u64 {
                let y = random_admissible_operator(&dims, seed).unwrap();
                let dec = decompose_states(&y).unwrap();
                assert!(distance(&dec.reassemble(), y.matrix()) <= 1e-9);
                assert!(dec.state_floor() >= -1e-10);
                assert_relative_eq!(dec.rho1.trace().re, 1.0, epsilon = 1e-10);
                assert_relative_eq!(dec.rho2.trace().re, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn shifted_real_part_bounds_hold_on_projectors() {
        let dims = SubsystemDims::uniform(2, 2).unwrap();
        let y = random_admissible_operator(&dims, 41).unwrap();
        let dec = decompose_states(&y).unwrap();
        for seed in 0..200u64 {
            let p = crate::hilbert::random_projector(4, 1 + (seed as usize % 3), seed).unwrap();
            let v = dec.rho1_expectation(&p);
            assert!((-1e-9..=1.0 + 1e-9).contains(&v), "bound violated: {v}");
            let w = dec.rho2_expectation(&p);
            assert!((-1e-9..=1.0 + 1e-9).contains(&w));
        }
    }
}
