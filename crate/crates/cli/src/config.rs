//! Harness configuration.
//!
//! Settings come from defaults, then an optional `key = value` file, then
//! command-line flags. The file accepts these keys (blank lines and `#`
//! comments are ignored):
//!
//! ```text
//! seed = 42
//! runs = 30
//! budget = 10000          # omit for 1000 * D
//! algos = fcpo,pso,shade
//! cases = F1-D10,F10      # a bare id selects both dimensions
//! no_zoom = false
//! no_eigen = false
//! no_lpsr = false
//! p_init = 30
//! parallel = 4
//! sequential = false
//! out = results
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use fcpo::benchmarks::{FunctionId, SUPPORTED_DIMS};
use fcpo::fcpo::Ablation;

use crate::error::{CliError, CliResult};

/// FCPO population used by the benchmark harness unless overridden.
pub const HARNESS_P_INIT: usize = 30;

pub const ALGORITHMS: [&str; 8] = [
    "fcpo",
    "fcpo_nozoom",
    "fcpo_noeigen",
    "fcpo_nolpsr",
    "pso",
    "shade",
    "lshade",
    "cmaes",
];

/// One benchmark case: function and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CaseSpec {
    pub function: FunctionId,
    pub dim: usize,
}

impl std::fmt::Display for CaseSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-D{}", self.function, self.dim)
    }
}

/// Parses `F1-D10`, `F1:10` or a bare `F1` (both dimensions).
pub fn parse_cases(text: &str) -> CliResult<Vec<CaseSpec>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, dim) = match item.split_once(['-', ':']) {
            Some((n, d)) => (n, Some(d.trim_start_matches(['D', 'd']))),
            None => (item, None),
        };
        let function = FunctionId::from_str(name).map_err(|_| CliError::Config(format!("unknown function '{name}'")))?;
        let dims = match dim {
            Some(d) => {
                let d: usize = d.parse().map_err(|_| CliError::Config(format!("bad dimension in '{item}'")))?;
                if !SUPPORTED_DIMS.contains(&d) {
                    return Err(CliError::Config(format!("dimension {d} not supported (use 10 or 20)")));
                }
                vec![d]
            }
            None => SUPPORTED_DIMS.to_vec(),
        };
        for dim in dims {
            let spec = CaseSpec { function, dim };
            if !out.contains(&spec) {
                out.push(spec);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("no cases selected".into()));
    }
    out.sort();
    Ok(out)
}

pub fn all_cases() -> Vec<CaseSpec> {
    FunctionId::ALL
        .iter()
        .flat_map(|&function| SUPPORTED_DIMS.iter().map(move |&dim| CaseSpec { function, dim }))
        .collect()
}

/// Splits an FCPO id such as `fcpo_nozoom_nolpsr` into its ablation flags.
pub fn fcpo_ablation(id: &str) -> Option<Ablation> {
    let rest = id.strip_prefix("fcpo")?;
    let mut ablation = Ablation::default();
    for part in rest.split('_').skip(1) {
        match part {
            "nozoom" => ablation.no_zoom = true,
            "noeigen" => ablation.no_eigen = true,
            "nolpsr" => ablation.no_lpsr = true,
            _ => return None,
        }
    }
    (rest.is_empty() || rest.starts_with('_')).then_some(ablation)
}

pub fn parse_algorithms(text: &str) -> CliResult<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for id in text.split(',').map(|s| s.trim().to_ascii_lowercase()).filter(|s| !s.is_empty()) {
        let known = ALGORITHMS.contains(&id.as_str()) || fcpo_ablation(&id).is_some();
        if !known {
            return Err(CliError::Config(format!("unknown algorithm '{id}'")));
        }
        if !out.contains(&id) {
            out.push(id);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("no algorithms selected".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub master_seed: u64,
    pub runs: usize,
    /// Evaluations per run; `None` means `1000 * D`.
    pub budget: Option<u64>,
    pub algorithms: Vec<String>,
    pub cases: Vec<CaseSpec>,
    /// Ablations applied on top of every FCPO variant.
    pub ablation: Ablation,
    pub p_init: usize,
    /// Worker threads; 1 is the determinism reference.
    pub parallel: usize,
    /// Writes a timing-free results file (see [`crate::harness`]).
    pub sequential: bool,
    pub out: PathBuf,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            runs: 30,
            budget: None,
            algorithms: vec!["fcpo".into(), "pso".into()],
            cases: all_cases(),
            ablation: Ablation::default(),
            p_init: HARNESS_P_INIT,
            parallel: 1,
            sequential: false,
            out: PathBuf::from("results"),
        }
    }
}

impl HarnessConfig {
    pub fn budget_for(&self, dim: usize) -> u64 {
        self.budget.unwrap_or(1000 * dim as u64)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        if matches!(self.budget, Some(b) if b < 100) {
            return Err(CliError::Config("budget must be at least 100".into()));
        }
        if self.parallel == 0 {
            return Err(CliError::Config("parallel must be at least 1".into()));
        }
        if self.p_init < 4 {
            return Err(CliError::Config("p_init must be at least 4".into()));
        }
        Ok(())
    }

    /// Algorithm ids as they appear in the output, with the global ablation
    /// flags folded into the FCPO variants.
    pub fn resolved_algorithms(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for id in &self.algorithms {
            let resolved = match fcpo_ablation(id) {
                Some(a) => {
                    let merged = Ablation {
                        no_zoom: a.no_zoom || self.ablation.no_zoom,
                        no_eigen: a.no_eigen || self.ablation.no_eigen,
                        no_lpsr: a.no_lpsr || self.ablation.no_lpsr,
                    };
                    format!("fcpo{}", merged.suffix())
                }
                None => id.clone(),
            };
            if !out.contains(&resolved) {
                out.push(resolved);
            }
        }
        out
    }

    /// Applies `key = value` lines.
    pub fn apply_file(&mut self, text: &str) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Parse { line: i + 1, message: "expected key = value".into() })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Parse { line: i + 1, message: e.to_string() })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
            v.parse().map_err(|_| CliError::Config(format!("bad value '{v}' for {key}")))
        }
        fn flag(key: &str, v: &str) -> CliResult<bool> {
            match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(CliError::Config(format!("bad boolean '{v}' for {key}"))),
            }
        }
        match key {
            "seed" => self.master_seed = num(key, value)?,
            "runs" => self.runs = num(key, value)?,
            "budget" => self.budget = Some(num(key, value)?),
            "algos" => self.algorithms = parse_algorithms(value)?,
            "cases" => self.cases = parse_cases(value)?,
            "no_zoom" => self.ablation.no_zoom = flag(key, value)?,
            "no_eigen" => self.ablation.no_eigen = flag(key, value)?,
            "no_lpsr" => self.ablation.no_lpsr = flag(key, value)?,
            "p_init" => self.p_init = num(key, value)?,
            "parallel" => self.parallel = num(key, value)?,
            "sequential" => self.sequential = flag(key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}
