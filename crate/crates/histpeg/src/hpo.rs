//! The history propositional algebra: homogeneous histories, lattice
//! connectives on history projectors, and the two structural permutation
//! operators (order reversal and cyclic shift) on the tensor-power space.
//!
//! Conventions, fixed once and used everywhere downstream:
//!
//! - A history's steps are stored earliest first, with strictly increasing
//!   time labels.
//! - In tensor products over the history space, slot 0 (the leftmost
//!   factor) carries the LATEST time. A two-step history with `P` at `t1`
//!   and `Q` at `t2` becomes `Q ⊗ P`.
//! - The dynamics supplies one step propagator per interval, including the
//!   interval from the initial-state time to the first step. Heisenberg
//!   projectors conjugate by the cumulated product of step propagators.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{
    distance, hermitian_eigen, identity, is_projector, is_unitary, tensor_all, zeros, CMatrix,
    SubsystemDims, DEFAULT_TOL,
};

/// One single-time entry of a homogeneous history.
#[derive(Debug, Clone)]
pub struct HistoryStep {
    pub time: f64,
    pub projector: CMatrix,
}

/// Whether a history is read in its recorded time order or reversed.
///
/// Reversal swaps the roles of earliest and latest everywhere a history is
/// turned into an operator: tensor slots flip and the class-operator
/// product runs the other way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Reversed,
}

/// A time-ordered list of single-time projectors on the base space; the
/// elementary multi-time proposition.
#[derive(Debug, Clone)]
pub struct HomogeneousHistory {
    steps: Vec<HistoryStep>,
    base_dim: usize,
    orientation: Orientation,
}

impl HomogeneousHistory {
    /// Validates every projector at tolerance `1e-10` and the strictly
    /// increasing time grid.
    pub fn new(base_dim: usize, steps: Vec<(f64, CMatrix)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::EmptyHistory);
        }
        for (i, (t, p)) in steps.iter().enumerate() {
            if p.nrows() != base_dim || p.ncols() != base_dim {
                return Err(Error::DimensionMismatch {
                    expected: base_dim,
                    got: p.nrows(),
                });
            }
            if !is_projector(p, DEFAULT_TOL) {
                let residual = distance(&(p * p), p).max(distance(&p.adjoint(), p));
                return Err(Error::NotAProjector {
                    residual,
                    tol: DEFAULT_TOL,
                });
            }
            if i > 0 && steps[i - 1].0 >= *t {
                return Err(Error::NonIncreasingTimes {
                    prev: steps[i - 1].0,
                    next: *t,
                });
            }
        }
        Ok(Self {
            steps: steps
                .into_iter()
                .map(|(time, projector)| HistoryStep { time, projector })
                .collect(),
            base_dim,
            orientation: Orientation::Forward,
        })
    }

    /// The always-true history: the identity projector at every time.
    pub fn all_identity(base_dim: usize, times: &[f64]) -> Result<Self> {
        Self::new(
            base_dim,
            times.iter().map(|&t| (t, identity(base_dim))).collect(),
        )
    }

    pub fn steps(&self) -> &[HistoryStep] {
        &self.steps
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.time).collect()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_reversed(&self) -> bool {
        self.orientation == Orientation::Reversed
    }

    /// Replaces the projector at step `index`, revalidating it.
    pub fn with_step_projector(&self, index: usize, projector: CMatrix) -> Result<Self> {
        let mut steps: Vec<(f64, CMatrix)> = self
            .steps
            .iter()
            .map(|s| (s.time, s.projector.clone()))
            .collect();
        if index >= steps.len() {
            return Err(Error::SlotOutOfRange {
                slot: index,
                n_slots: steps.len(),
            });
        }
        steps[index].1 = projector;
        let mut h = Self::new(self.base_dim, steps)?;
        h.orientation = self.orientation;
        Ok(h)
    }

    pub fn dims(&self) -> SubsystemDims {
        SubsystemDims::uniform(self.n_steps(), self.base_dim).expect("non-empty history")
    }
}

/// A projector on the history space together with its slot structure;
/// general (possibly inhomogeneous) history propositions live here.
#[derive(Debug, Clone)]
pub struct HistoryProjector {
    matrix: CMatrix,
    dims: SubsystemDims,
}

impl HistoryProjector {
    pub fn new(matrix: CMatrix, dims: SubsystemDims) -> Result<Self> {
        if !dims.matches(&matrix) {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                got: matrix.nrows(),
            });
        }
        if !is_projector(&matrix, DEFAULT_TOL) {
            let residual =
                distance(&(&matrix * &matrix), &matrix).max(distance(&matrix.adjoint(), &matrix));
            return Err(Error::NotAProjector {
                residual,
                tol: DEFAULT_TOL,
            });
        }
        Ok(Self { matrix, dims })
    }

    /// The always-false proposition on the given slots.
    pub fn zero(dims: SubsystemDims) -> Self {
        let d = dims.total();
        Self {
            matrix: zeros(d),
            dims,
        }
    }

    /// The always-true proposition on the given slots.
    pub fn one(dims: SubsystemDims) -> Self {
        let d = dims.total();
        Self {
            matrix: identity(d),
            dims,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    /// Rank read off the trace (exact for projectors up to roundoff).
    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

/// Step propagators, one per time interval (earliest interval first).
#[derive(Debug, Clone)]
pub struct Dynamics {
    unitaries: Vec<CMatrix>,
    base_dim: usize,
}

impl Dynamics {
    /// Each propagator must be unitary within `1e-12`.
    pub fn new(unitaries: Vec<CMatrix>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::StepCountMismatch {
                expected: 1,
                got: 0,
            });
        }
        let base_dim = unitaries[0].nrows();
        for u in &unitaries {
            if u.nrows() != base_dim || u.ncols() != base_dim {
                return Err(Error::DimensionMismatch {
                    expected: base_dim,
                    got: u.nrows(),
                });
            }
            if !is_unitary(u, 1e-12) {
                let residual = distance(&(u.adjoint() * u), &identity(base_dim));
                return Err(Error::NotUnitary {
                    residual,
                    tol: 1e-12,
                });
            }
        }
        Ok(Self {
            unitaries,
            base_dim,
        })
    }

    pub fn identity(base_dim: usize, n_steps: usize) -> Self {
        Self {
            unitaries: (0..n_steps.max(1)).map(|_| identity(base_dim)).collect(),
            base_dim,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.unitaries.len()
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn step(&self, m: usize) -> &CMatrix {
        &self.unitaries[m]
    }

    pub fn steps(&self) -> &[CMatrix] {
        &self.unitaries
    }

    /// Cumulated propagators `V_m = U_m · U_{m-1} · ... · U_1`, one per
    /// step time (earliest first).
    pub fn cumulative(&self) -> Vec<CMatrix> {
        let mut acc = identity(self.base_dim);
        self.unitaries
            .iter()
            .map(|u| {
                acc = u * &acc;
                acc.clone()
            })
            .collect()
    }
}

/// Heisenberg-picture projectors of a history: each stored projector
/// conjugated by the cumulated propagator up to its time. Earliest first.
pub fn heisenberg_projectors(h: &HomogeneousHistory, d: &Dynamics) -> Result<Vec<CMatrix>> {
    if d.n_steps() != h.n_steps() {
        return Err(Error::StepCountMismatch {
            expected: h.n_steps(),
            got: d.n_steps(),
        });
    }
    if d.base_dim() != h.base_dim() {
        return Err(Error::DimensionMismatch {
            expected: h.base_dim(),
            got: d.base_dim(),
        });
    }
    let cum = d.cumulative();
    Ok(h.steps()
        .iter()
        .zip(cum.iter())
        .map(|(s, v)| v.adjoint() * &s.projector * v)
        .collect())
}

fn tensor_latest_first(factors: &[CMatrix], reversed: bool) -> CMatrix {
    if reversed {
        tensor_all(factors.iter())
    } else {
        tensor_all(factors.iter().rev())
    }
}

/// The kinematical (Schrödinger-picture) tensor projector of a history,
/// slot 0 carrying the latest time.
pub fn history_projector(h: &HomogeneousHistory) -> HistoryProjector {
    let factors: Vec<CMatrix> = h.steps().iter().map(|s| s.projector.clone()).collect();
    HistoryProjector {
        matrix: tensor_latest_first(&factors, h.is_reversed()),
        dims: h.dims(),
    }
}

/// The Heisenberg-picture tensor projector of a history under the given
/// dynamics; this is the form that pairs with the absorbed-state operator.
pub fn heisenberg_history_projector(
    h: &HomogeneousHistory,
    d: &Dynamics,
) -> Result<HistoryProjector> {
    let factors = heisenberg_projectors(h, d)?;
    Ok(HistoryProjector {
        matrix: tensor_latest_first(&factors, h.is_reversed()),
        dims: h.dims(),
    })
}

/// Projector onto the range of a Hermitian positive semidefinite matrix.
/// Rank decisions use an eigenvalue threshold scaled by the dimension.
fn span_projector(sum: &CMatrix) -> CMatrix {
    let dim = sum.nrows();
    let tol = 1e-10 * dim as f64;
    let (vals, vecs) = hermitian_eigen(sum);
    let mut p = zeros(dim);
    for (k, &v) in vals.iter().enumerate() {
        if v > tol {
            let col = vecs.column(k);
            p += col * col.adjoint();
        }
    }
    // symmetrize roundoff so the result revalidates as a projector
    (&p + p.adjoint()).scale(0.5)
}

/// Projector onto the span of the union of the two ranges.
pub fn join(p: &HistoryProjector, q: &HistoryProjector) -> Result<HistoryProjector> {
    p.check_same_dims(q)?;
    Ok(HistoryProjector {
        matrix: span_projector(&(p.matrix() + q.matrix())),
        dims: p.dims.clone(),
    })
}

/// Projector onto the intersection of the two ranges, computed through the
/// complements: `meet(P, Q) = 1 - join(1 - P, 1 - Q)`.
pub fn meet(p: &HistoryProjector, q: &HistoryProjector) -> Result<HistoryProjector> {
    p.check_same_dims(q)?;
    let joined = join(&negation(p), &negation(q))?;
    Ok(negation(&joined))
}

/// The complement proposition `1 - P`.
pub fn negation(p: &HistoryProjector) -> HistoryProjector {
    HistoryProjector {
        matrix: identity(p.dim()) - p.matrix(),
        dims: p.dims.clone(),
    }
}

/// Range inclusion: `P ≤ Q` iff `PQ = P` (equivalently `QP = P`).
pub fn leq(p: &HistoryProjector, q: &HistoryProjector) -> Result<bool> {
    p.check_same_dims(q)?;
    Ok(distance(&(p.matrix() * q.matrix()), p.matrix()) <= DEFAULT_TOL * (1.0 + p.dim() as f64))
}

/// Lattice disjointness: the meet is the zero proposition.
pub fn disjoint(p: &HistoryProjector, q: &HistoryProjector) -> Result<bool> {
    let m = meet(p, q)?;
    Ok(m.matrix().norm() <= DEFAULT_TOL * (1.0 + p.dim() as f64))
}

/// Operator orthogonality: `PQ = 0`. Strictly stronger than disjointness.
pub fn orthogonal(p: &HistoryProjector, q: &HistoryProjector) -> Result<bool> {
    p.check_same_dims(q)?;
    Ok((p.matrix() * q.matrix()).norm() <= DEFAULT_TOL * (1.0 + p.dim() as f64))
}

fn decode_multi(index: usize, dims: &SubsystemDims) -> Vec<usize> {
    let n = dims.n_slots();
    let mut digits = vec![0usize; n];
    let mut rest = index;
    for i in (0..n).rev() {
        digits[i] = rest % dims.slot(i);
        rest /= dims.slot(i);
    }
    digits
}

fn encode_multi(digits: &[usize], dims: &SubsystemDims) -> usize {
    let mut out = 0usize;
    for (i, &d) in digits.iter().enumerate() {
        out = out * dims.slot(i) + d;
    }
    out
}

fn slot_permutation_matrix(
    dims: &SubsystemDims,
    perm: impl Fn(&[usize]) -> Vec<usize>,
) -> Result<CMatrix> {
    if !dims.all_equal() {
        return Err(Error::UnequalSlotDims {
            dims: dims.as_slice().to_vec(),
        });
    }
    let total = dims.total();
    let mut m = zeros(total);
    for col in 0..total {
        let digits = decode_multi(col, dims);
        let row = encode_multi(&perm(&digits), dims);
        m[(row, col)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// The involutive permutation reversing slot order:
/// `M (v_1 ⊗ ... ⊗ v_n) = v_n ⊗ ... ⊗ v_1`.
pub fn reversal_operator(dims: &SubsystemDims) -> Result<CMatrix> {
    slot_permutation_matrix(dims, |digits| digits.iter().rev().copied().collect())
}

/// The cyclic shift `S (v_1 ⊗ v_2 ⊗ ... ⊗ v_n) = v_2 ⊗ ... ⊗ v_n ⊗ v_1`,
/// the unitary that turns operator-product traces into tensor-product
/// traces.
pub fn shift_operator(dims: &SubsystemDims) -> Result<CMatrix> {
    slot_permutation_matrix(dims, |digits| {
        let mut out: Vec<usize> = digits[1..].to_vec();
        out.push(digits[0]);
        out
    })
}

/// Temporal reversal of a history. Single-step histories are fixed points;
/// otherwise the reading order flips. Applying it twice gives back the
/// original.
pub fn temporal_reverse(h: &HomogeneousHistory) -> HomogeneousHistory {
    let mut out = h.clone();
    if h.n_steps() > 1 {
        out.orientation = match h.orientation {
            Orientation::Forward => Orientation::Reversed,
            Orientation::Reversed => Orientation::Forward,
        };
    }
    out
}

/// Temporal reversal of a general history proposition: conjugation by the
/// slot-reversal operator, `M P M`.
pub fn temporal_reverse_projector(p: &HistoryProjector) -> Result<HistoryProjector> {
    let m = reversal_operator(p.dims())?;
    Ok(HistoryProjector {
        matrix: &m * p.matrix() * &m,
        dims: p.dims.clone(),
    })
}
