use super::{gen_group_lasso, gen_lasso, gen_sparse_logistic, Dataset, Task};
use crate::error::{Error, Result};
use crate::numkit::Psd;
use crate::splitters::SolverConfig;

/// Where a preset's data comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetData {
    Lasso { n: usize, p: usize, s: usize, noise_sd: f64 },
    GroupLasso { n: usize, n_groups: usize, max_group: usize },
    Logistic { n: usize, p: usize, s: usize, row_nnz: usize },
    /// Real data read from disk; `p` fixes the LIBSVM width.
    External { n: usize, p: usize },
}

/// Named experiment setting: data design plus solver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub task: Task,
    pub data: PresetData,
    /// Fixed penalty; `None` means the family's rule.
    pub zeta: Option<f64>,
    pub config: SolverConfig,
}

pub const PRESET_NAMES: [&str; 9] = [
    "lasso5.1",
    "lasso5.1-s5",
    "grouplasso5.2",
    "logistic5.3",
    "crime",
    "e2006",
    "sido",
    "nslkdd",
    "tiny-lasso",
];

#[allow(clippy::too_many_arguments)]
fn cfg(eps: f64, beta: f64, alpha: f64, gamma: f64, s: f64, a: f64) -> SolverConfig {
    SolverConfig { eps, beta, alpha, gamma, s: Psd::ScaledIdentity(s), a, ..SolverConfig::default() }
}

pub fn preset(name: &str) -> Result<Preset> {
    let p = |name, task, data, zeta, config| Ok(Preset { name, task, data, zeta, config });
    match name {
        "lasso5.1" => p(
            "lasso5.1",
            Task::Lasso,
            PresetData::Lasso { n: 2000, p: 5000, s: 200, noise_sd: 0.1 },
            None,
            cfg(1e-11, 1.0, 0.9, 0.1, 1.0, 1.0),
        ),
        "lasso5.1-s5" => p(
            "lasso5.1-s5",
            Task::Lasso,
            PresetData::Lasso { n: 2000, p: 5000, s: 200, noise_sd: 0.1 },
            None,
            cfg(1e-11, 1.0, 0.9, 0.1, 5.0, 1.0),
        ),
        "grouplasso5.2" => p(
            "grouplasso5.2",
            Task::GroupLasso,
            PresetData::GroupLasso { n: 3000, n_groups: 300, max_group: 30 },
            None,
            cfg(1e-11, 1.0, 0.9, 0.1, 1.0, 1.0),
        ),
        "logistic5.3" => p(
            "logistic5.3",
            Task::Logistic,
            PresetData::Logistic { n: 100, p: 400, s: 100, row_nnz: 20 },
            None,
            cfg(1e-8, 1.0, 0.5, 0.3, 3.0, 3.0),
        ),
        "crime" => p(
            "crime",
            Task::Lasso,
            PresetData::External { n: 1994, p: 122 },
            Some(0.02),
            cfg(1e-11, 5.0, 0.8, 0.3, 2.0, 2.5),
        ),
        "e2006" => p(
            "e2006",
            Task::Lasso,
            PresetData::External { n: 16_087, p: 150_360 },
            Some(1e-4),
            cfg(1e-11, 0.8, 0.9, 0.1, 1.0, 1.8),
        ),
        "sido" => p(
            "sido",
            Task::Logistic,
            PresetData::External { n: 12_678, p: 4_932 },
            Some(0.01),
            cfg(1e-8, 1.0, 0.5, 0.3, 1.0, 1.0),
        ),
        "nslkdd" => p(
            "nslkdd",
            Task::Logistic,
            PresetData::External { n: 125_973, p: 115 },
            Some(0.01),
            cfg(1e-11, 1.0, 0.9, 0.3, 1.0, 2.0),
        ),
        // desk-scale lasso used by the quick checks
        "tiny-lasso" => p(
            "tiny-lasso",
            Task::Lasso,
            PresetData::Lasso { n: 30, p: 10, s: 3, noise_sd: 0.1 },
            None,
            cfg(1e-11, 1.0, 0.9, 0.1, 1.0, 1.0),
        ),
        other => Err(Error::invalid(format!(
            "unknown preset `{other}`; known: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

impl Preset {
    pub fn is_synthetic(&self) -> bool {
        !matches!(self.data, PresetData::External { .. })
    }

    pub fn generate(&self, seed: u64) -> Result<Dataset> {
        let mut d = match self.data {
            PresetData::Lasso { n, p, s, noise_sd } => gen_lasso(n, p, s, noise_sd, seed)?,
            PresetData::GroupLasso { n, n_groups, max_group } => gen_group_lasso(n, n_groups, max_group, seed)?,
            PresetData::Logistic { n, p, s, row_nnz } => gen_sparse_logistic(n, p, s, row_nnz, seed)?,
            PresetData::External { .. } => {
                return Err(Error::Unsupported(format!("preset `{}` is real data; load it from a file", self.name)));
            }
        };
        d.meta.name = self.name.to_string();
        Ok(d)
    }

    /// Declared column count for real-data presets.
    pub fn width(&self) -> Option<usize> {
        match self.data {
            PresetData::External { p, .. } => Some(p),
            _ => None,
        }
    }
}
