//! Complex Shannon entropy over peg distributions, with explicit tracking
//! of logarithm branches.
//!
//! The entropy of a peg set is `-K_S Σ p ln p` with the principal branch
//! of the logarithm and the convention `0 ln 0 = 0`. With complex pegs the
//! grouping identity picks up per-element corrections, because
//! `ln(p/q) = ln p - ln q + 2πi k` with `k ∈ {-1, 0, 1}` depending on how
//! the principal arguments straddle the cut. The checks here compute those
//! integers exactly and compare against the identity
//! `LHS - RHS = 2πi K_S Σ k_j p_j`, rather than waving the correction into
//! an unspecified integer multiple of `2πi`.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::compare::HistoryFamily;
use crate::error::{Error, Result};
use crate::hilbert::CMatrix;
use crate::order::{ComplexOrder, OrderOutcome};
use crate::peg::{build_y, peg_via_y, scenario_history_projector, Scenario};

/// Default entropy constant.
pub const DEFAULT_KS: f64 = 1.0;

/// Pegs below this magnitude are treated as exact zeros: they contribute
/// nothing to entropies and carry no branch count.
pub const ZERO_PEG_CUTOFF: f64 = 1e-12;

/// A list of pegs, optionally asserting completeness (a complete disjoint
/// exhaustive family's pegs sum to one).
#[derive(Debug, Clone)]
pub struct PegDistribution {
    pegs: Vec<Complex64>,
    labels: Vec<String>,
    complete: bool,
}

impl PegDistribution {
    pub fn new(pegs: Vec<Complex64>, labels: Vec<String>, complete: bool) -> Result<Self> {
        if labels.len() != pegs.len() {
            return Err(Error::GroupingLengthMismatch {
                expected: pegs.len(),
                got: labels.len(),
            });
        }
        if complete {
            let total: Complex64 = pegs.iter().sum();
            let deficit = (total - Complex64::new(1.0, 0.0)).norm();
            if deficit > 1e-9 {
                return Err(Error::IncompleteFamily { deficit });
            }
        }
        Ok(Self {
            pegs,
            labels,
            complete,
        })
    }

    /// A complete distribution with generated labels.
    pub fn complete(pegs: Vec<Complex64>) -> Result<Self> {
        let labels = (0..pegs.len()).map(|i| format!("p{i}")).collect();
        Self::new(pegs, labels, true)
    }

    /// A distribution with no completeness claim.
    pub fn incomplete(pegs: Vec<Complex64>) -> Self {
        let labels = (0..pegs.len()).map(|i| format!("p{i}")).collect();
        Self {
            pegs,
            labels,
            complete: false,
        }
    }

    pub fn pegs(&self) -> &[Complex64] {
        &self.pegs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn len(&self) -> usize {
        self.pegs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pegs.is_empty()
    }
}

/// Total assignment of distribution elements to groups `0..n_groups`.
#[derive(Debug, Clone)]
pub struct Grouping {
    assignment: Vec<usize>,
    n_groups: usize,
}

impl Grouping {
    /// Groups must be contiguous `0..=max` and each non-empty.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::EmptyGroup {
                n_groups: 0,
                missing: 0,
            });
        }
        let n_groups = assignment.iter().max().unwrap() + 1;
        for g in 0..n_groups {
            if !assignment.contains(&g) {
                return Err(Error::EmptyGroup {
                    n_groups,
                    missing: g,
                });
            }
        }
        Ok(Self {
            assignment,
            n_groups,
        })
    }

    /// From a list of groups, each a list of element indices.
    pub fn from_groups(groups: &[Vec<usize>], n_elements: usize) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n_elements];
        for (g, members) in groups.iter().enumerate() {
            for &i in members {
                if i >= n_elements || assignment[i] != usize::MAX {
                    return Err(Error::GroupingLengthMismatch {
                        expected: n_elements,
                        got: i,
                    });
                }
                assignment[i] = g;
            }
        }
        if assignment.contains(&usize::MAX) {
            return Err(Error::GroupingLengthMismatch {
                expected: n_elements,
                got: assignment.iter().filter(|&&g| g != usize::MAX).count(),
            });
        }
        Self::new(assignment)
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            n_groups: n,
        }
    }

    pub fn single_group(n: usize) -> Self {
        Self {
            assignment: vec![0; n],
            n_groups: 1,
        }
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn group_of(&self, element: usize) -> usize {
        self.assignment[element]
    }

    pub fn members(&self, group: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == group)
            .collect()
    }
}

/// An entropy together with the constant it was computed with and any
/// logarithm-branch integers encountered along the way.
#[derive(Debug, Clone)]
pub struct EntropyValue {
    pub value: Complex64,
    pub k_s: f64,
    pub branch_corrections: Vec<i32>,
}

fn xlnx(z: Complex64) -> Complex64 {
    if z.norm() <= ZERO_PEG_CUTOFF {
        Complex64::new(0.0, 0.0)
    } else {
        z * z.ln()
    }
}

/// The integer `k` in `ln(num/den) = ln num - ln den + 2πi k`.
fn branch_count(num: Complex64, den: Complex64) -> i32 {
    let diff = (num / den).ln() - (num.ln() - den.ln());
    (diff.im / TAU).round() as i32
}

/// `-K_S Σ p ln p` with the principal branch and `0 ln 0 = 0`. No branch
/// decisions arise here, so the correction list is empty.
pub fn peg_entropy(p: &PegDistribution, k_s: f64) -> EntropyValue {
    let total: Complex64 = p.pegs().iter().map(|&z| xlnx(z)).sum();
    EntropyValue {
        value: -k_s * total,
        k_s,
        branch_corrections: Vec::new(),
    }
}

/// Sums pegs group by group.
pub fn group_pegs(p: &PegDistribution, g: &Grouping) -> Result<PegDistribution> {
    if g.assignment().len() != p.len() {
        return Err(Error::GroupingLengthMismatch {
            expected: p.len(),
            got: g.assignment().len(),
        });
    }
    let mut sums = vec![Complex64::new(0.0, 0.0); g.n_groups()];
    for (i, &z) in p.pegs().iter().enumerate() {
        sums[g.group_of(i)] += z;
    }
    let labels = (0..g.n_groups()).map(|k| format!("g{k}")).collect();
    PegDistribution::new(sums, labels, p.is_complete())
}

/// Outcome of the grouping identity with branch corrections.
#[derive(Debug, Clone)]
pub struct GroupingReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|LHS - RHS|` before any branch correction.
    pub raw_residual: f64,
    /// `|LHS - RHS - 2πi K_S Σ k_j p_j|`; this is the asserted quantity.
    pub residual: f64,
    pub branch_counts: Vec<i32>,
    pub predicted_correction: Complex64,
    /// `Σ k_j p_j`.
    pub correction_weight: Complex64,
    /// Whether the total correction happens to be an integer multiple of
    /// `2πi K_S` (it need not be: the weights are complex pegs).
    pub correction_is_integer_multiple: bool,
    pub all_branches_zero: bool,
    pub tol: f64,
}

impl GroupingReport {
    pub fn pass(&self) -> bool {
        self.residual <= self.tol
    }
}

/// Checks the grouping identity: entropy of the full set against entropy
/// of the group pegs plus peg-weighted within-group entropies, with
/// conditional pegs `p_j / p_g` and exact branch bookkeeping.
pub fn grouping_check(p: &PegDistribution, g: &Grouping, k_s: f64) -> Result<GroupingReport> {
    if g.assignment().len() != p.len() {
        return Err(Error::GroupingLengthMismatch {
            expected: p.len(),
            got: g.assignment().len(),
        });
    }
    let groups = group_pegs(p, g)?;
    for (gi, &pg) in groups.pegs().iter().enumerate() {
        if pg.norm() <= ZERO_PEG_CUTOFF {
            return Err(Error::ZeroGroupPeg {
                group: gi,
                magnitude: pg.norm(),
            });
        }
    }

    let lhs = peg_entropy(p, k_s).value;
    let group_entropy = peg_entropy(&groups, k_s).value;

    let mut within = Complex64::new(0.0, 0.0);
    let mut branch_counts = vec![0i32; p.len()];
    let mut correction_weight = Complex64::new(0.0, 0.0);
    for (gi, &pg) in groups.pegs().iter().enumerate() {
        let mut s_g = Complex64::new(0.0, 0.0);
        for i in g.members(gi) {
            let pj = p.pegs()[i];
            if pj.norm() <= ZERO_PEG_CUTOFF {
                continue;
            }
            let q = pj / pg;
            s_g -= q * q.ln();
            let k = branch_count(pj, pg);
            branch_counts[i] = k;
            correction_weight += Complex64::new(k as f64, 0.0) * pj;
        }
        within += pg * (k_s * s_g);
    }
    let rhs = group_entropy + within;

    let predicted_correction = Complex64::new(0.0, TAU * k_s) * correction_weight;
    let raw_residual = (lhs - rhs).norm();
    let residual = (lhs - rhs - predicted_correction).norm();
    let rounded = correction_weight.re.round();
    let correction_is_integer_multiple = correction_weight.im.abs() <= 1e-9
        && (correction_weight.re - rounded).abs() <= 1e-9;
    Ok(GroupingReport {
        lhs,
        rhs,
        raw_residual,
        residual,
        all_branches_zero: branch_counts.iter().all(|&k| k == 0),
        branch_counts,
        predicted_correction,
        correction_weight,
        correction_is_integer_multiple,
        tol: 1e-9,
    })
}

/// Conditional entropy from a joint table `joint[(i, j)] = p(αⁱ ∧ βʲ)` and
/// the conditioning marginals `p(βʲ)`:
/// `-K_S Σ_j p(βʲ) Σ_i q_ij ln q_ij` with `q_ij = joint[(i,j)] / p(βʲ)`.
pub fn conditional_entropy(
    joint: &CMatrix,
    beta_marginals: &[Complex64],
    k_s: f64,
) -> Result<EntropyValue> {
    if joint.ncols() != beta_marginals.len() {
        return Err(Error::GroupingLengthMismatch {
            expected: joint.ncols(),
            got: beta_marginals.len(),
        });
    }
    for (j, &pb) in beta_marginals.iter().enumerate() {
        if pb.norm() <= ZERO_PEG_CUTOFF {
            return Err(Error::ZeroGroupPeg {
                group: j,
                magnitude: pb.norm(),
            });
        }
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut branch_corrections = Vec::new();
    for (j, &pb) in beta_marginals.iter().enumerate() {
        let mut inner = Complex64::new(0.0, 0.0);
        for i in 0..joint.nrows() {
            let pij = joint[(i, j)];
            if pij.norm() <= ZERO_PEG_CUTOFF {
                branch_corrections.push(0);
                continue;
            }
            let q = pij / pb;
            inner += xlnx(q);
            branch_corrections.push(branch_count(pij, pb));
        }
        value -= k_s * pb * inner;
    }
    Ok(EntropyValue {
        value,
        k_s,
        branch_corrections,
    })
}

/// Everything measured by the strong-additivity comparison of a pair of
/// complete families.
#[derive(Debug, Clone)]
pub struct StrongAdditivityReport {
    /// Entropy of the joint peg table.
    pub joint_entropy: Complex64,
    /// Entropy of the conditioning marginals plus conditional entropy.
    pub split_entropy: Complex64,
    pub raw_residual: f64,
    /// Residual after subtracting the predicted branch correction.
    pub residual: f64,
    pub predicted_correction: Complex64,
    pub branch_counts: Vec<i32>,
    /// Whether every member of one family commutes with every member of
    /// the other (as Heisenberg tensors).
    pub commuting: bool,
    /// Worst `|Σ_i p_ij − p_j|`; vanishes for commuting families.
    pub marginal_consistency: f64,
    pub tol: f64,
}

impl StrongAdditivityReport {
    /// The identity is asserted only for commuting families.
    pub fn pass(&self) -> Option<bool> {
        self.commuting.then_some(self.residual <= self.tol)
    }
}

/// Joint peg table of two families within a scenario: entries are pegs of
/// the lattice meets of the Heisenberg tensors, evaluated against the
/// absorbed-state operator.
pub fn joint_peg_table(
    alpha: &HistoryFamily,
    beta: &HistoryFamily,
    s: &Scenario,
) -> Result<(CMatrix, Vec<Complex64>, Vec<Complex64>, bool)> {
    let y = build_y(s)?;
    let alpha_proj: Vec<_> = alpha
        .members()
        .iter()
        .map(|h| scenario_history_projector(s, h))
        .collect::<Result<_>>()?;
    let beta_proj: Vec<_> = beta
        .members()
        .iter()
        .map(|h| scenario_history_projector(s, h))
        .collect::<Result<_>>()?;

    let dim = s.dims().total() as f64;
    let mut commuting = true;
    for a in &alpha_proj {
        for b in &beta_proj {
            let comm = a.matrix() * b.matrix() - b.matrix() * a.matrix();
            if comm.norm() > 1e-9 * (1.0 + dim) {
                commuting = false;
            }
        }
    }

    let mut joint = CMatrix::zeros(alpha_proj.len(), beta_proj.len());
    for (i, a) in alpha_proj.iter().enumerate() {
        for (j, b) in beta_proj.iter().enumerate() {
            let meet = if commuting {
                // for commuting projectors the meet is the plain product
                crate::hpo::HistoryProjector::new(a.matrix() * b.matrix(), s.dims())?
            } else {
                crate::hpo::meet(a, b)?
            };
            joint[(i, j)] = peg_via_y(&meet, &y)?;
        }
    }
    let alpha_marginals: Vec<Complex64> = alpha_proj
        .iter()
        .map(|p| peg_via_y(p, &y))
        .collect::<Result<_>>()?;
    let beta_marginals: Vec<Complex64> = beta_proj
        .iter()
        .map(|p| peg_via_y(p, &y))
        .collect::<Result<_>>()?;
    Ok((joint, alpha_marginals, beta_marginals, commuting))
}

/// Compares the entropy of the joint table with the split through the
/// conditioning family. The identity (after exact branch corrections) is
/// asserted for commuting families and reported otherwise.
pub fn strong_additivity_check(
    alpha: &HistoryFamily,
    beta: &HistoryFamily,
    s: &Scenario,
    k_s: f64,
) -> Result<StrongAdditivityReport> {
    alpha.require_complete()?;
    beta.require_complete()?;
    let (joint, _alpha_marginals, beta_marginals, commuting) = joint_peg_table(alpha, beta, s)?;

    for (j, &pb) in beta_marginals.iter().enumerate() {
        if pb.norm() <= ZERO_PEG_CUTOFF {
            return Err(Error::ZeroGroupPeg {
                group: j,
                magnitude: pb.norm(),
            });
        }
    }

    let joint_dist = PegDistribution::incomplete(joint.iter().copied().collect());
    let joint_entropy = peg_entropy(&joint_dist, k_s).value;

    let beta_dist = PegDistribution::incomplete(beta_marginals.clone());
    let beta_entropy = peg_entropy(&beta_dist, k_s).value;
    let conditional = conditional_entropy(&joint, &beta_marginals, k_s)?;
    let split_entropy = beta_entropy + conditional.value;

    // branch corrections and marginal consistency
    let mut branch_counts = Vec::new();
    let mut correction_weight = Complex64::new(0.0, 0.0);
    let mut marginal_consistency = 0.0f64;
    for (j, &pb) in beta_marginals.iter().enumerate() {
        let mut col_sum = Complex64::new(0.0, 0.0);
        for i in 0..joint.nrows() {
            let pij = joint[(i, j)];
            col_sum += pij;
            if pij.norm() <= ZERO_PEG_CUTOFF {
                branch_counts.push(0);
                continue;
            }
            let k = branch_count(pij, pb);
            branch_counts.push(k);
            correction_weight += Complex64::new(k as f64, 0.0) * pij;
        }
        marginal_consistency = marginal_consistency.max((col_sum - pb).norm());
    }
    let predicted_correction = Complex64::new(0.0, TAU * k_s) * correction_weight;
    let raw_residual = (joint_entropy - split_entropy).norm();
    let residual = (joint_entropy - split_entropy - predicted_correction).norm();

    Ok(StrongAdditivityReport {
        joint_entropy,
        split_entropy,
        raw_residual,
        residual,
        predicted_correction,
        branch_counts,
        commuting,
        marginal_consistency,
        tol: 1e-9,
    })
}

/// Concavity comparison `S[unconditional] ⊒ S[conditional]` under a
/// partial order on the complex plane. Purely diagnostic: the outcome may
/// be `Incomparable` and nothing is asserted here.
#[derive(Debug, Clone)]
pub struct ConcavityReport {
    pub unconditional: Complex64,
    pub conditional: Complex64,
    pub outcome: OrderOutcome,
    /// All pegs real within 1e-9 (conditioning reduces to the classical
    /// statement, where concavity must hold under the numeric order).
    pub classical: bool,
}

pub fn concavity_check(
    alpha: &HistoryFamily,
    beta: &HistoryFamily,
    s: &Scenario,
    k_s: f64,
    order: &dyn ComplexOrder,
) -> Result<ConcavityReport> {
    alpha.require_complete()?;
    beta.require_complete()?;
    let (joint, alpha_marginals, beta_marginals, _commuting) = joint_peg_table(alpha, beta, s)?;
    for (j, &pb) in beta_marginals.iter().enumerate() {
        if pb.norm() <= ZERO_PEG_CUTOFF {
            return Err(Error::ZeroGroupPeg {
                group: j,
                magnitude: pb.norm(),
            });
        }
    }
    let classical = joint
        .iter()
        .chain(alpha_marginals.iter())
        .chain(beta_marginals.iter())
        .all(|z| z.im.abs() <= 1e-9);
    let unconditional = peg_entropy(&PegDistribution::incomplete(alpha_marginals), k_s).value;
    let conditional = conditional_entropy(&joint, &beta_marginals, k_s)?.value;
    let outcome = if order.leq(conditional, unconditional) {
        OrderOutcome::Holds
    } else if order.leq(unconditional, conditional) {
        OrderOutcome::Fails
    } else {
        OrderOutcome::Incomparable
    };
    Ok(ConcavityReport {
        unconditional,
        conditional,
        outcome,
        classical,
    })
}
