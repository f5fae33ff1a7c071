use std::fs;
use std::path::{Path, PathBuf};

use crate::baselines::{BaselineConfig, Sampling, X1Step};
use crate::datagen::{load_csv, load_libsvm, preset, Dataset, PresetData, Task};
use crate::error::{Error, Result};
use crate::numkit::Psd;
use crate::splitters::{InitX2, InnerSchedule, MCap};
use crate::trace::Algorithm;

/// One `[name]` block of a key=value file; keys before any header land in a section named "".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    pub name: String,
    pub line: usize,
    /// `(key, value, line)`
    pub entries: Vec<(String, String, usize)>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _, _)| k == key).map(|(_, v, _)| v.as_str())
    }
}

pub fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections = vec![Section::default()];
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line, message: format!("unterminated section header `{content}`") })?;
            sections.push(Section { name: name.trim().to_string(), line, entries: Vec::new() });
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, message: format!("expected key = value, got `{content}`") })?;
        let key = k.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(Error::Parse { line, message: "empty key".into() });
        }
        sections.last_mut().expect("always one section").entries.push((key, v.trim().to_string(), line));
    }
    Ok(sections)
}

fn bad(line: usize, key: &str, value: &str) -> Error {
    Error::Parse { line, message: format!("invalid value `{value}` for `{key}`") }
}

fn num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| bad(line, key, value))
}

fn boolean(key: &str, value: &str, line: usize) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(bad(line, key, value)),
    }
}

/// `0`, `I`, `c`, `cI` or `diag:d1,d2,...`.
pub fn parse_psd(value: &str) -> Result<Psd> {
    let v = value.trim();
    let psd = if let Some(list) = v.strip_prefix("diag:") {
        let d = list
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad diagonal entry `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Psd::diagonal(d)?
    } else {
        let c = match v.strip_suffix(['I', 'i']) {
            Some("") => 1.0,
            Some(c) => c.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad matrix `{value}`")))?,
            None => v.parse::<f64>().map_err(|_| Error::invalid(format!("bad matrix `{value}`")))?,
        };
        if c == 0.0 {
            Psd::Zero
        } else {
            Psd::scaled(c)?
        }
    };
    Ok(psd)
}

fn scalar_t(value: &str) -> Result<f64> {
    match parse_psd(value)? {
        Psd::Zero => Ok(0.0),
        Psd::ScaledIdentity(c) => Ok(c),
        Psd::Diagonal(_) => Err(Error::invalid("T must be a multiple of the identity")),
    }
}

/// Applies one solver key; returns `false` when the key is not a solver key.
fn apply_solver_key(cfg: &mut BaselineConfig, key: &str, value: &str, line: usize) -> Result<bool> {
    let b = &mut cfg.base;
    let wrap = |r: Result<Psd>| r.map_err(|e| Error::Parse { line, message: e.to_string() });
    match key {
        "beta" => b.beta = num(key, value, line)?,
        "alpha" => b.alpha = num(key, value, line)?,
        "gamma" => b.gamma = num(key, value, line)?,
        "s" => b.s = wrap(parse_psd(value))?,
        "a" => b.a = num(key, value, line)?,
        "t" => b.a = scalar_t(value).map_err(|e| Error::Parse { line, message: e.to_string() })?,
        "eps" => b.eps = num(key, value, line)?,
        "max_outer" => b.max_outer = num(key, value, line)?,
        "c_override" => b.c_override = Some(num(key, value, line)?),
        "diameter" => b.diameter = Some(num(key, value, line)?),
        "m_cap" => {
            b.m_cap = match value {
                "auto" | "2n" => MCap::TwiceSamples,
                "none" | "unbounded" => MCap::Unbounded,
                v => MCap::Fixed(num(key, v, line)?),
            }
        }
        "seed" => b.seed = num(key, value, line)?,
        "init_x2" => {
            b.init_x2 = match value {
                "ones" => InitX2::Ones,
                "zeros" => InitX2::Zeros,
                _ => return Err(bad(line, key, value)),
            }
        }
        "schedule" => {
            b.schedule = match value {
                "decaying" => InnerSchedule::Decaying,
                "constant" => InnerSchedule::ConstantStep { scale: 0.25 },
                _ => return Err(bad(line, key, value)),
            }
        }
        "step_scale" => match &mut b.schedule {
            InnerSchedule::ConstantStep { scale } => *scale = num(key, value, line)?,
            InnerSchedule::Decaying => {
                return Err(Error::Parse { line, message: "step_scale needs schedule = constant first".into() });
            }
        },
        "max_data_passes" => b.max_data_passes = Some(num(key, value, line)?),
        "eta0" => cfg.eta0 = Some(num(key, value, line)?),
        "eta_decay" => cfg.eta_decay = num(key, value, line)?,
        "x1_step" => {
            cfg.x1_step = match value {
                "linearized" => X1Step::Linearized,
                "exact" => X1Step::Exact,
                _ => return Err(bad(line, key, value)),
            }
        }
        "sampling" => {
            cfg.sampling = match value {
                "uniform" => Sampling::Uniform,
                "cyclic" => Sampling::Cyclic,
                _ => return Err(bad(line, key, value)),
            }
        }
        _ => return Ok(false),
    }
    Ok(true)
}

/// Applies every entry of `section` as a solver key; unknown keys are errors,
/// except those listed in `skip`.
pub fn apply_solver_keys(cfg: &mut BaselineConfig, section: &Section, skip: &[&str]) -> Result<()> {
    for (k, v, line) in &section.entries {
        if skip.contains(&k.as_str()) {
            continue;
        }
        if !apply_solver_key(cfg, k, v, *line)? {
            return Err(Error::Parse { line: *line, message: format!("unknown key `{k}`") });
        }
    }
    Ok(())
}

/// Where benchmark data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Synthetic preset or family, with optional dimension overrides.
    Synthetic { preset: String, data: PresetData },
    /// A LIBSVM or CSV file.
    File { path: PathBuf, task: Option<Task>, label_column: String, normalize: bool, width: Option<usize> },
}

impl DataSource {
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            DataSource::Synthetic { preset: name, data } => {
                let mut p = preset(name)?;
                p.data = *data;
                p.generate(seed)
            }
            DataSource::File { path, task, label_column, normalize, width } => {
                load_dataset(path, *task, label_column, *normalize, *width)
            }
        }
    }
}

/// Loads a `.csv` or LIBSVM file. A `<path>.meta` sidecar written by `generate`
/// supplies the task, width and group partition when present.
pub fn load_dataset(
    path: &Path,
    task: Option<Task>,
    label_column: &str,
    normalize: bool,
    width: Option<usize>,
) -> Result<Dataset> {
    let meta_path = sidecar_path(path);
    let sidecar = if meta_path.exists() { Some(parse_sections(&fs::read_to_string(&meta_path)?)?) } else { None };
    let side = sidecar.as_ref().map(|s| &s[0]);
    let task = match (task, side.and_then(|s| s.get("task"))) {
        (Some(t), _) => t,
        (None, Some(t)) => Task::parse(t)?,
        (None, None) => Task::Lasso,
    };
    let width = match (width, side.and_then(|s| s.get("p"))) {
        (Some(w), _) => Some(w),
        (None, Some(p)) => Some(p.parse().map_err(|_| Error::invalid(format!("bad width `{p}` in sidecar")))?),
        (None, None) => None,
    };
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let mut d = if is_csv {
        load_csv(path, label_column, task, normalize)?
    } else {
        let mut d = load_libsvm(path, task, width)?;
        if normalize {
            d.x.normalize_rows();
        }
        d
    };
    if let Some(g) = side.and_then(|s| s.get("groups")) {
        let groups = g
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::invalid(format!("bad group size `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        d.groups = Some(groups);
    }
    if let Some(name) = side.and_then(|s| s.get("name")) {
        d.meta.name = name.to_string();
    }
    d.meta.seed = side.and_then(|s| s.get("seed")).and_then(|s| s.parse().ok());
    Ok(d)
}

pub(crate) fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes the `.meta` sidecar next to a generated dataset.
pub fn write_sidecar(d: &Dataset, zeta: Option<f64>, path: &Path) -> Result<()> {
    let mut text = format!("name = {}\ntask = {}\nn = {}\np = {}\n", d.meta.name, d.task.name(), d.n(), d.p());
    if let Some(seed) = d.meta.seed {
        text.push_str(&format!("seed = {seed}\n"));
    }
    if let Some(g) = &d.groups {
        let list: Vec<String> = g.iter().map(|v| v.to_string()).collect();
        text.push_str(&format!("groups = {}\n", list.join(",")));
    }
    if let Some(z) = zeta {
        text.push_str(&format!("zeta = {z}\n"));
    }
    fs::write(sidecar_path(path), text)?;
    Ok(())
}

/// Penalty stored in a sidecar, if any.
pub fn sidecar_zeta(path: &Path) -> Result<Option<f64>> {
    let meta = sidecar_path(path);
    if !meta.exists() {
        return Ok(None);
    }
    let sections = parse_sections(&fs::read_to_string(meta)?)?;
    sections[0]
        .get("zeta")
        .map(|z| z.parse().map_err(|_| Error::invalid(format!("bad zeta `{z}` in sidecar"))))
        .transpose()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgSpec {
    pub label: String,
    pub algorithm: Algorithm,
    pub config: BaselineConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub data: DataSource,
    pub data_seed: u64,
    /// Fixed penalty; otherwise the preset's value or the family rule.
    pub zeta: Option<f64>,
    pub algorithms: Vec<AlgSpec>,
    pub replicates: usize,
    /// Replicate `r` runs with solver seed `seed + r`.
    pub seed: u64,
    pub rho: f64,
    pub output: PathBuf,
    pub serial: bool,
    pub wall_clock: bool,
    pub trace_every: usize,
    /// Compute a reference solution and the criterion column.
    pub reference: bool,
}

const PLAN_KEYS: [&str; 22] = [
    "dataset", "task", "n", "p", "s", "noise_sd", "row_nnz", "groups", "max_group", "label_column", "normalize",
    "width", "data_seed", "zeta", "replicates", "seed", "rho", "output", "serial", "wall_clock", "trace_every",
    "reference",
];

impl BenchPlan {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&fs::read_to_string(path)?, base)
    }

    /// Parses a plan; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let sections = parse_sections(text)?;
        let mut top = Section::default();
        let mut algs = Vec::new();
        for s in sections {
            match s.name.as_str() {
                "" | "plan" => top.entries.extend(s.entries),
                name if name.starts_with("alg") => algs.push(s),
                other => return Err(Error::Parse { line: s.line, message: format!("unknown section `[{other}]`") }),
            }
        }
        let get = |k: &str| top.entries.iter().rev().find(|(key, _, _)| key == k).map(|(_, v, l)| (v.as_str(), *l));
        let parse_num = |k: &str| -> Result<Option<f64>> { get(k).map(|(v, l)| num::<f64>(k, v, l)).transpose() };
        let parse_usize = |k: &str| -> Result<Option<usize>> { get(k).map(|(v, l)| num::<usize>(k, v, l)).transpose() };
        let parse_bool = |k: &str| -> Result<Option<bool>> { get(k).map(|(v, l)| boolean(k, v, l)).transpose() };

        let (dataset, dline) = get("dataset").ok_or_else(|| Error::invalid("plan needs a `dataset` key"))?;
        let task = get("task").map(|(v, _)| Task::parse(v)).transpose()?;
        let family = match dataset {
            "lasso" => Some("tiny-lasso"),
            "group-lasso" | "grouplasso" => Some("grouplasso5.2"),
            "logistic" => Some("logistic5.3"),
            _ => None,
        };
        let preset_name = family.unwrap_or(dataset);
        let known = preset(preset_name).ok();
        let mut base_cfg = BaselineConfig::default();
        let mut preset_zeta = None;
        let data = match known {
            Some(p) if p.is_synthetic() => {
                base_cfg.base = p.config.clone();
                preset_zeta = p.zeta;
                let mut data = p.data;
                match &mut data {
                    PresetData::Lasso { n, p, s, noise_sd } => {
                        *n = parse_usize("n")?.unwrap_or(*n);
                        *p = parse_usize("p")?.unwrap_or(*p);
                        *s = parse_usize("s")?.unwrap_or(*s);
                        *noise_sd = parse_num("noise_sd")?.unwrap_or(*noise_sd);
                    }
                    PresetData::GroupLasso { n, n_groups, max_group } => {
                        *n = parse_usize("n")?.unwrap_or(*n);
                        *n_groups = parse_usize("groups")?.unwrap_or(*n_groups);
                        *max_group = parse_usize("max_group")?.unwrap_or(*max_group);
                    }
                    PresetData::Logistic { n, p, s, row_nnz } => {
                        *n = parse_usize("n")?.unwrap_or(*n);
                        *p = parse_usize("p")?.unwrap_or(*p);
                        *s = parse_usize("s")?.unwrap_or(*s);
                        *row_nnz = parse_usize("row_nnz")?.unwrap_or(*row_nnz);
                    }
                    PresetData::External { .. } => unreachable!("synthetic preset"),
                }
                DataSource::Synthetic { preset: preset_name.to_string(), data }
            }
            Some(p) => {
                // real-data preset: needs a file
                base_cfg.base = p.config.clone();
                preset_zeta = p.zeta;
                let (path, _) = get("path").ok_or_else(|| Error::Parse {
                    line: dline,
                    message: format!("preset `{}` is real data; add `path = <file>`", p.name),
                })?;
                DataSource::File {
                    path: base_dir.join(path),
                    task: Some(task.unwrap_or(p.task)),
                    label_column: get("label_column").map_or("label", |(v, _)| v).to_string(),
                    normalize: parse_bool("normalize")?.unwrap_or(false),
                    width: parse_usize("width")?.or(p.width()),
                }
            }
            None => DataSource::File {
                path: base_dir.join(dataset),
                task,
                label_column: get("label_column").map_or("label", |(v, _)| v).to_string(),
                normalize: parse_bool("normalize")?.unwrap_or(false),
                width: parse_usize("width")?,
            },
        };

        // top-level solver keys act as defaults for every algorithm
        let skip: Vec<&str> = PLAN_KEYS.iter().copied().chain(["path", "seed"]).collect();
        apply_solver_keys(&mut base_cfg, &top, &skip)?;

        let task_of_data = match &data {
            DataSource::Synthetic { data, .. } => match data {
                PresetData::Logistic { .. } => Task::Logistic,
                PresetData::GroupLasso { .. } => Task::GroupLasso,
                _ => Task::Lasso,
            },
            DataSource::File { task, .. } => task.unwrap_or(Task::Lasso),
        };
        let mut algorithms = Vec::new();
        for s in &algs {
            let label = s.name.strip_prefix("alg").unwrap_or("").trim_start_matches(':').trim().to_string();
            let alg_name = s.get("algorithm").map(str::to_string).unwrap_or_else(|| label.clone());
            let algorithm: Algorithm = alg_name.parse().map_err(|e: Error| Error::Parse { line: s.line, message: e.to_string() })?;
            let mut cfg = base_cfg.clone();
            apply_solver_keys(&mut cfg, s, &["algorithm"])?;
            let label = if label.is_empty() { algorithm.name().to_string() } else { label };
            algorithms.push(AlgSpec { label, algorithm, config: cfg });
        }
        if algorithms.is_empty() {
            for a in Algorithm::ALL {
                if a.is_batch() && task_of_data == Task::Logistic {
                    continue;
                }
                algorithms.push(AlgSpec { label: a.name().to_string(), algorithm: a, config: base_cfg.clone() });
            }
        }

        let seed = parse_num("seed")?.map(|v| v as u64).unwrap_or(0);
        let plan = BenchPlan {
            data,
            data_seed: parse_usize("data_seed")?.map(|v| v as u64).unwrap_or(seed),
            zeta: parse_num("zeta")?.or(preset_zeta),
            algorithms,
            replicates: parse_usize("replicates")?.unwrap_or(20),
            seed,
            rho: parse_num("rho")?.unwrap_or(1.0),
            output: base_dir.join(get("output").map_or("bench-out", |(v, _)| v)),
            serial: parse_bool("serial")?.unwrap_or(false),
            wall_clock: false,
            trace_every: parse_usize("trace_every")?.unwrap_or(1),
            reference: parse_bool("reference")?.unwrap_or(true),
        };
        let wall_clock = parse_bool("wall_clock")?.unwrap_or(!plan.serial);
        let plan = BenchPlan { wall_clock, ..plan };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::invalid(format!("rho must be nonnegative, got {}", self.rho)));
        }
        if let Some(z) = self.zeta {
            if !(z > 0.0) {
                return Err(Error::invalid(format!("zeta must be positive, got {z}")));
            }
        }
        let mut labels = std::collections::HashSet::new();
        for a in &self.algorithms {
            if !labels.insert(a.label.as_str()) {
                return Err(Error::invalid(format!("duplicate algorithm label `{}`", a.label)));
            }
            match a.algorithm {
                Algorithm::SsPrsm => a.config.base.validate()?,
                Algorithm::SspbScprsm => crate::splitters::check_relaxation(a.config.base.alpha, a.config.base.gamma)?,
                _ => {}
            }
        }
        Ok(())
    }
}
