//! Synthetic instance generators, regularization rules and dataset loaders.

mod libsvm;
mod presets;
mod synth;
mod tabular;

pub use libsvm::{load_libsvm, parse_libsvm, write_libsvm};
pub use presets::{preset, Preset, PresetData, PRESET_NAMES};
pub use synth::{gen_group_lasso, gen_lasso, gen_sparse_logistic, GROUP_NOISE_SD};
pub use tabular::{load_csv, parse_csv};

use crate::error::{Error, Result};
use crate::numkit::{norm2, norm_inf, Matrix};
use crate::problem::{ConsensusInstance, InstanceKind, SeparableProblem};

/// Which of the three model families a dataset feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Lasso,
    GroupLasso,
    Logistic,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Lasso => "lasso",
            Task::GroupLasso => "group-lasso",
            Task::Logistic => "logistic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lasso" => Ok(Task::Lasso),
            "group-lasso" | "grouplasso" | "group_lasso" => Ok(Task::GroupLasso),
            "logistic" | "sparse-logistic" => Ok(Task::Logistic),
            other => Err(Error::invalid(format!("unknown task `{other}`"))),
        }
    }
}

/// Planted coefficients of a synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub z: Vec<f64>,
    /// Sorted, 0-based.
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// Contiguous block sizes summing to `p`.
    pub groups: Option<Vec<usize>>,
    pub truth: Option<Truth>,
    pub task: Task,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>, task: Task, name: impl Into<String>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch { what: "labels", expected: x.nrows(), got: y.len() });
        }
        let meta = DatasetMeta { name: name.into(), n: x.nrows(), p: x.ncols(), seed: None };
        Ok(Self { x, y, groups: None, truth: None, task, meta })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Consensus instance with the given penalty. Group lasso without a partition is rejected.
    pub fn instance(&self, zeta: f64) -> Result<ConsensusInstance> {
        let kind = match self.task {
            Task::Lasso => InstanceKind::Lasso,
            Task::Logistic => InstanceKind::SparseLogistic,
            Task::GroupLasso => InstanceKind::GroupLasso {
                groups: self.groups.clone().ok_or_else(|| Error::invalid("group lasso needs a group partition"))?,
            },
        };
        Ok(ConsensusInstance { x: self.x.clone(), y: self.y.clone(), zeta, kind })
    }

    pub fn to_problem(&self, zeta: f64) -> Result<SeparableProblem> {
        self.instance(zeta)?.into_problem()
    }
}

/// Penalty chosen by the family's rule:
/// lasso `0.1 ||X z||_inf`, group lasso `0.1 max_i ||X_{G_i} z_{G_i}||_2`,
/// logistic `(0.1 / n) ||sum_{y_i = 1} x_i||_inf`.
/// Regression rules need the planted truth; without it `fallback` is returned.
pub fn regularization_zeta(d: &Dataset, fallback: Option<f64>) -> Result<f64> {
    match (d.task, &d.truth) {
        (Task::Logistic, _) => {
            let mut acc = vec![0.0; d.p()];
            for (i, yi) in d.y.iter().enumerate() {
                if *yi == 1.0 {
                    d.x.row(i).axpy(1.0, &mut acc);
                }
            }
            Ok(0.1 / d.n() as f64 * norm_inf(&acc))
        }
        (Task::Lasso, Some(t)) => Ok(0.1 * norm_inf(&d.x.matvec(&t.z)?)),
        (Task::GroupLasso, Some(t)) => {
            let groups = d.groups.as_ref().ok_or_else(|| Error::invalid("group rule needs field `groups`"))?;
            let mut best = 0.0f64;
            let mut start = 0;
            for &g in groups {
                let mut zg = vec![0.0; d.p()];
                zg[start..start + g].copy_from_slice(&t.z[start..start + g]);
                best = best.max(norm2(&d.x.matvec(&zg)?));
                start += g;
            }
            Ok(0.1 * best)
        }
        (_, None) => fallback.ok_or_else(|| {
            Error::invalid(format!("{} rule needs field `truth`; supply zeta explicitly", d.task.name()))
        }),
    }
}
