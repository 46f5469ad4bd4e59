//! Bridges to the consistent-histories and linearly-positive-histories
//! readings of pegs: the decoherence functional, linear positivity, weak
//! consistency, and the classical reduction of real parts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{distance, identity};
use crate::hpo::HomogeneousHistory;
use crate::peg::{class_operator, peg, Scenario};

/// A list of histories on a shared grid, with its completeness measured at
/// construction: the family is complete when the history projectors sum to
/// the identity on the history space within `1e-9`.
#[derive(Debug, Clone)]
pub struct HistoryFamily {
    members: Vec<HomogeneousHistory>,
    complete: bool,
    completeness_deficit: f64,
}

impl HistoryFamily {
    pub fn new(members: Vec<HomogeneousHistory>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyHistory);
        }
        let first = &members[0];
        for h in &members[1..] {
            if h.base_dim() != first.base_dim() || h.times() != first.times() {
                return Err(Error::GridMismatch);
            }
        }
        let dim = first.dims().total();
        let mut sum = crate::hilbert::zeros(dim);
        for h in &members {
            sum += crate::hpo::history_projector(h).matrix();
        }
        let completeness_deficit = distance(&sum, &identity(dim));
        Ok(Self {
            members,
            complete: completeness_deficit <= 1e-9,
            completeness_deficit,
        })
    }

    pub fn members(&self) -> &[HomogeneousHistory] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn complete(&self) -> bool {
        self.complete
    }

    /// `‖Σ member projectors − 1‖_F`.
    pub fn completeness_deficit(&self) -> f64 {
        self.completeness_deficit
    }

    pub fn require_complete(&self) -> Result<()> {
        if !self.complete {
            return Err(Error::IncompleteFamily {
                deficit: self.completeness_deficit,
            });
        }
        Ok(())
    }
}

/// The standard bilinear functional `d(α, β) = tr(C_α ρ C_β†)`. Diagonal
/// entries are real and nonnegative; the matrix of values is Hermitian.
pub fn decoherence_functional(
    a: &HomogeneousHistory,
    b: &HomogeneousHistory,
    s: &Scenario,
) -> Result<Complex64> {
    if !s.admits(a) || !s.admits(b) {
        return Err(Error::GridMismatch);
    }
    let ca = class_operator(a, s.dynamics())?;
    let cb = class_operator(b, s.dynamics())?;
    Ok((ca * s.rho() * cb.adjoint()).trace())
}

/// Linear positivity: every member's peg has real part at or above `-tol`.
pub fn is_linearly_positive(f: &HistoryFamily, s: &Scenario, tol: f64) -> Result<bool> {
    for h in f.members() {
        if peg(h, s)?.re < -tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Weak consistency: real parts of all off-diagonal decoherence-functional
/// entries vanish within `tol`.
pub fn is_consistent(f: &HistoryFamily, s: &Scenario, tol: f64) -> Result<bool> {
    for (i, a) in f.members().iter().enumerate() {
        for b in f.members().iter().skip(i + 1) {
            if decoherence_functional(a, b, s)?.re.abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Classical-reduction measurements for a complete family: how close real
/// parts of pegs are to the diagonal decoherence entries, and how close
/// their sum is to one. Asserted only when the family is consistent.
#[derive(Debug, Clone)]
pub struct ClassicalReductionReport {
    pub consistent: bool,
    /// Worst `|Re peg(α) − d(α, α)|` over the family.
    pub max_diagonal_deviation: f64,
    /// `|Σ Re peg − 1|`.
    pub sum_deviation: f64,
    /// Worst peg imaginary part (informational).
    pub max_imaginary_part: f64,
    pub tol: f64,
}

impl ClassicalReductionReport {
    /// Meaningful only when `consistent` is set; diagnostic otherwise.
    pub fn pass(&self) -> Option<bool> {
        self.consistent
            .then_some(self.max_diagonal_deviation <= self.tol && self.sum_deviation <= self.tol)
    }
}

/// Consistency tolerance used by the classical-reduction assertions. The
/// diagonal comparison inherits roundoff from one extra operator product,
/// so the consistency cut for asserting has to be tighter than the
/// reporting tolerance.
pub const CONSISTENCY_TOL: f64 = 1e-10;

pub fn classical_reduction_check(
    f: &HistoryFamily,
    s: &Scenario,
) -> Result<ClassicalReductionReport> {
    f.require_complete()?;
    let consistent = is_consistent(f, s, CONSISTENCY_TOL)?;
    let mut max_diagonal_deviation = 0.0f64;
    let mut sum = 0.0f64;
    let mut max_imaginary_part = 0.0f64;
    for h in f.members() {
        let v = peg(h, s)?;
        let diag = decoherence_functional(h, h, s)?;
        max_diagonal_deviation = max_diagonal_deviation.max((v.re - diag.re).abs());
        max_imaginary_part = max_imaginary_part.max(v.im.abs());
        sum += v.re;
    }
    Ok(ClassicalReductionReport {
        consistent,
        max_diagonal_deviation,
        sum_deviation: (sum - 1.0).abs(),
        max_imaginary_part,
        tol: 1e-9,
    })
}
