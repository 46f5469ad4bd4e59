//! The scenario file format: a JSON description of an experiment that
//! builds into a validated [`Scenario`].
//!
//! Matrices are nested arrays of `[re, im]` pairs. Dynamics, initial
//! states and history steps can be given either explicitly or through
//! named generators; every named generator draws from its own 64-bit seed
//! so files reproduce bit-for-bit.
//!
//! ```json
//! {
//!   "base_dim": 2,
//!   "times": [1.0, 2.0],
//!   "dynamics": { "kind": "qubit-rotation", "angle": 0.7 },
//!   "rho": { "kind": "pure-basis", "index": 0 },
//!   "histories": [
//!     { "label": "up-then-plus",
//!       "steps": [ { "kind": "basis", "index": 0 },
//!                  { "kind": "explicit",
//!                    "matrix": [[[0.5,0.0],[0.5,0.0]],
//!                               [[0.5,0.0],[0.5,0.0]]] } ] }
//!   ],
//!   "groupings": [[0]],
//!   "k_s": 1.0,
//!   "order": "flux",
//!   "seed": 7
//! }
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entropy::Grouping;
use crate::error::{Error, Result};
use crate::hilbert::{
    basis_projector, identity, random_density, random_projector, random_unitary_rng, CMatrix,
};
use crate::hpo::{Dynamics, HomogeneousHistory};
use crate::peg::Scenario;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn default_k_s() -> f64 {
    1.0
}

fn default_order() -> String {
    "flux".to_string()
}

/// Matrix as nested arrays of `[re, im]` pairs, row major.
pub type JsonMatrix = Vec<Vec<Complex64>>;

pub fn to_cmatrix(rows: &JsonMatrix, context: &str) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Scenario {
            context: context.to_string(),
            message: "matrix must be square and non-empty".into(),
        });
    }
    Ok(CMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

pub fn from_cmatrix(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DynamicsSpec {
    /// No evolution: every step propagator is the identity.
    Identity,
    /// A fixed rotation of a qubit per step (requires `base_dim = 2`).
    QubitRotation { angle: f64 },
    /// Independent Haar-like unitaries per step, drawn from `seed`.
    Random { seed: u64 },
    /// Explicit step propagators, earliest interval first.
    Explicit { matrices: Vec<JsonMatrix> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RhoSpec {
    /// `|k><k|`.
    PureBasis { index: usize },
    /// `1/d`.
    MaximallyMixed,
    /// Random density operator from `seed`.
    Random { seed: u64 },
    Explicit { matrix: JsonMatrix },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StepSpec {
    /// No constraint at this time.
    Identity,
    /// `|k><k|`.
    Basis { index: usize },
    /// Random rank-`rank` projector from `seed`.
    Rank { rank: usize, seed: u64 },
    Explicit { matrix: JsonMatrix },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistorySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub steps: Vec<StepSpec>,
}

/// On-disk experiment description. `build` turns it into a validated
/// [`Scenario`]; every invariant violation names the offending field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub base_dim: usize,
    pub times: Vec<f64>,
    pub dynamics: DynamicsSpec,
    pub rho: RhoSpec,
    #[serde(default)]
    pub histories: Vec<HistorySpec>,
    /// Groups of history indices for the entropy grouping checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groupings: Option<Vec<Vec<usize>>>,
    #[serde(default = "default_k_s")]
    pub k_s: f64,
    #[serde(default = "default_order")]
    pub order: String,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioFile {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ScenarioParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Compact canonical form used for digests.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serialization cannot fail")
    }

    fn build_dynamics(&self) -> Result<Dynamics> {
        let n = self.times.len();
        let d = self.base_dim;
        match &self.dynamics {
            DynamicsSpec::Identity => Ok(Dynamics::identity(d, n)),
            DynamicsSpec::QubitRotation { angle } => {
                if d != 2 {
                    return Err(Error::Scenario {
                        context: "dynamics".into(),
                        message: format!("qubit-rotation needs base_dim 2, got {d}"),
                    });
                }
                let half = angle / 2.0;
                let u = CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex64::new(half.cos(), 0.0),
                        Complex64::new(0.0, -half.sin()),
                        Complex64::new(0.0, -half.sin()),
                        Complex64::new(half.cos(), 0.0),
                    ],
                );
                Dynamics::new(vec![u; n])
            }
            DynamicsSpec::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Dynamics::new((0..n).map(|_| random_unitary_rng(d, &mut rng)).collect())
            }
            DynamicsSpec::Explicit { matrices } => {
                if matrices.len() != n {
                    return Err(Error::Scenario {
                        context: "dynamics.matrices".into(),
                        message: format!("expected {n} propagators, got {}", matrices.len()),
                    });
                }
                let mut out = Vec::with_capacity(n);
                for (i, rows) in matrices.iter().enumerate() {
                    out.push(to_cmatrix(rows, &format!("dynamics.matrices[{i}]"))?);
                }
                Dynamics::new(out)
            }
        }
    }

    fn build_rho(&self) -> Result<CMatrix> {
        let d = self.base_dim;
        match &self.rho {
            RhoSpec::PureBasis { index } => {
                basis_projector(d, *index).map_err(|_| Error::Scenario {
                    context: "rho".into(),
                    message: format!("pure-basis index {index} out of range for dim {d}"),
                })
            }
            RhoSpec::MaximallyMixed => Ok(identity(d).scale(1.0 / d as f64)),
            RhoSpec::Random { seed } => Ok(random_density(d, *seed)),
            RhoSpec::Explicit { matrix } => to_cmatrix(matrix, "rho.matrix"),
        }
    }

    fn build_step(&self, spec: &StepSpec, context: &str) -> Result<CMatrix> {
        let d = self.base_dim;
        match spec {
            StepSpec::Identity => Ok(identity(d)),
            StepSpec::Basis { index } => {
                basis_projector(d, *index).map_err(|_| Error::Scenario {
                    context: context.to_string(),
                    message: format!("basis index {index} out of range for dim {d}"),
                })
            }
            StepSpec::Rank { rank, seed } => {
                random_projector(d, *rank, *seed).map_err(|_| Error::Scenario {
                    context: context.to_string(),
                    message: format!("rank {rank} out of range for dim {d}"),
                })
            }
            StepSpec::Explicit { matrix } => to_cmatrix(matrix, context),
        }
    }

    /// Builds and validates the scenario, with field-level error contexts.
    pub fn build(&self) -> Result<Scenario> {
        if self.base_dim < 2 {
            return Err(Error::Scenario {
                context: "base_dim".into(),
                message: format!("base dimension must be at least 2, got {}", self.base_dim),
            });
        }
        let dynamics = self.build_dynamics()?;
        let rho = self.build_rho()?;
        let mut histories = Vec::with_capacity(self.histories.len());
        for (i, hs) in self.histories.iter().enumerate() {
            if hs.steps.len() != self.times.len() {
                return Err(Error::Scenario {
                    context: format!("histories[{i}].steps"),
                    message: format!(
                        "history has {} steps but the grid has {} times",
                        hs.steps.len(),
                        self.times.len()
                    ),
                });
            }
            let mut steps = Vec::with_capacity(hs.steps.len());
            for (j, spec) in hs.steps.iter().enumerate() {
                let p = self.build_step(spec, &format!("histories[{i}].steps[{j}]"))?;
                steps.push((self.times[j], p));
            }
            histories.push(HomogeneousHistory::new(self.base_dim, steps).map_err(|e| {
                Error::Scenario {
                    context: format!("histories[{i}]"),
                    message: e.to_string(),
                }
            })?);
        }
        Scenario::new(
            self.base_dim,
            self.times.clone(),
            dynamics,
            rho,
            histories,
            self.seed,
        )
    }

    /// History labels, generated where absent.
    pub fn labels(&self) -> Vec<String> {
        self.histories
            .iter()
            .enumerate()
            .map(|(i, h)| h.label.clone().unwrap_or_else(|| format!("h{i}")))
            .collect()
    }

    /// The grouping over history indices, when present.
    pub fn grouping(&self) -> Result<Option<Grouping>> {
        match &self.groupings {
            None => Ok(None),
            Some(groups) => Ok(Some(Grouping::from_groups(groups, self.histories.len())?)),
        }
    }
}
