//! `key = value` experiment files. The first non-comment line is the
//! scenario header (`[static]`, `[dynamic]`, `[two_file]` or `[motivating]`),
//! which also selects the defaults.
//!
//! ```text
//! [static]
//! receivers = 4
//! files = 8
//! cluster_size = 2
//! delta = 0.1
//! memory = 0:8:1        # start:stop:step, or a comma list
//! schemes = ca-ggc, unaware-ggc
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::coloring::DEFAULT_ORACLE_LIMIT;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Static,
    Dynamic,
    TwoFile,
    Motivating,
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "static" => Ok(Self::Static),
            "dynamic" => Ok(Self::Dynamic),
            "two_file" => Ok(Self::TwoFile),
            "motivating" => Ok(Self::Motivating),
            other => Err(format!("unknown scenario `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    CaGgc,
    Naive,
    Oracle,
    UnawareGgc,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::CaGgc => "ca-ggc",
            Self::Naive => "naive",
            Self::Oracle => "oracle",
            Self::UnawareGgc => "unaware-ggc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ca-ggc" | "ca" => Ok(Self::CaGgc),
            "unaware-ggc" | "unaware" => Ok(Self::UnawareGgc),
            "naive" => Ok(Self::Naive),
            "oracle" => Ok(Self::Oracle),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementMode {
    Random,
    Cross,
    Straight,
    Motivating,
}

impl FromStr for PlacementMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random" => Ok(Self::Random),
            "cross" => Ok(Self::Cross),
            "straight" => Ok(Self::Straight),
            "motivating" => Ok(Self::Motivating),
            other => Err(format!("unknown placement `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DemandMode {
    /// Uniform i.i.d. requests (all demand vectors for the two-file scenario).
    Uniform,
    /// Receivers request distinct files `1, 2, …`.
    Worst,
    /// Zero-based file per receiver.
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub receivers: usize,
    pub files: usize,
    pub packets: usize,
    pub delta: f64,
    pub cluster_size: usize,
    pub update_prob: f64,
    pub update_delta: f64,
    pub file_entropy: f64,
    pub memory: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub output: Option<PathBuf>,
    pub placement: PlacementMode,
    pub demand: DemandMode,
    pub oracle_limit: usize,
    pub parallel: Option<usize>,
    pub dump_graphs: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        let base = Self {
            scenario,
            receivers: 4,
            files: 8,
            packets: 64,
            delta: 0.1,
            cluster_size: 1,
            update_prob: 0.0,
            update_delta: 0.1,
            file_entropy: 1.0,
            memory: vec![0.0, 1.0, 2.0, 4.0, 6.0, 8.0],
            trials: 200,
            seed: 0,
            schemes: vec![Scheme::CaGgc, Scheme::UnawareGgc],
            output: None,
            placement: PlacementMode::Random,
            demand: DemandMode::Uniform,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
            parallel: None,
            dump_graphs: None,
        };
        match scenario {
            Scenario::Static => Self { cluster_size: 2, ..base },
            Scenario::Dynamic => Self {
                receivers: 6,
                files: 50,
                delta: 0.3,
                update_prob: 0.4,
                update_delta: 0.3,
                memory: vec![5.0, 15.0, 25.0, 40.0],
                ..base
            },
            Scenario::TwoFile => Self {
                receivers: 2,
                files: 2,
                packets: 2,
                delta: 0.25,
                cluster_size: 2,
                memory: (0..=8).map(|i| i as f64 * 0.25).collect(),
                trials: 1,
                schemes: vec![Scheme::Oracle, Scheme::CaGgc, Scheme::UnawareGgc],
                placement: PlacementMode::Cross,
                ..base
            },
            Scenario::Motivating => Self {
                receivers: 2,
                files: 2,
                packets: 2,
                delta: 0.5,
                update_prob: 1.0,
                update_delta: 0.5,
                memory: vec![1.0],
                trials: 1,
                placement: PlacementMode::Motivating,
                demand: DemandMode::Fixed(vec![0, 1]),
                ..base
            },
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self.scenario, Scenario::Dynamic | Scenario::Motivating)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Experiment(msg));
        if self.trials == 0 {
            return err("trials must be >= 1".into());
        }
        if self.receivers == 0 || self.files == 0 || self.packets == 0 {
            return err("receivers, files and packets must be positive".into());
        }
        if self.receivers > crate::graph::MAX_RECEIVERS {
            return err(format!("at most {} receivers", crate::graph::MAX_RECEIVERS));
        }
        if self.memory.is_empty() {
            return err("empty memory grid".into());
        }
        if self.schemes.is_empty() {
            return err("no schemes selected".into());
        }
        let max_memory = self.files as f64 * self.file_entropy;
        if let Some(m) = self.memory.iter().find(|&&m| !(m >= 0.0 && m <= max_memory + 1e-9)) {
            return err(format!("memory {m} outside [0, {max_memory}]"));
        }
        if self.parallel == Some(0) {
            return err("parallel must be >= 1".into());
        }
        if self.is_dynamic() && self.cluster_size != 1 {
            return err("the dynamic setting needs independent files (cluster_size = 1)".into());
        }
        match self.scenario {
            Scenario::TwoFile | Scenario::Motivating => {
                if (self.receivers, self.files, self.packets) != (2, 2, 2) {
                    return err("this scenario needs receivers = files = packets = 2".into());
                }
            }
            Scenario::Static | Scenario::Dynamic => {
                if self.placement != PlacementMode::Random && self.placement != PlacementMode::Motivating {
                    return err("cross and straight placements belong to the two_file scenario".into());
                }
            }
        }
        if self.placement == PlacementMode::Motivating && (self.receivers, self.files, self.packets) != (2, 2, 2) {
            return err("motivating placement needs receivers = files = packets = 2".into());
        }
        if let DemandMode::Fixed(d) = &self.demand {
            if d.len() != self.receivers || d.iter().any(|&f| f >= self.files) {
                return err(format!("demand {d:?} does not fit {} receivers over {} files", self.receivers, self.files));
            }
        }
        if self.scenario != Scenario::TwoFile && self.schemes.contains(&Scheme::Oracle) {
            let ensemble = if self.is_dynamic() { 2 } else { self.cluster_size };
            for &m in &self.memory {
                let expected = self.receivers as f64
                    * self.packets as f64
                    * (1.0 - m / max_memory)
                    * ensemble as f64;
                if expected > self.oracle_limit as f64 {
                    return err(format!(
                        "oracle needs about {expected:.1} vertices at M = {m}, limit is {}",
                        self.oracle_limit
                    ));
                }
            }
        }
        Ok(())
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg: Option<Self> = None;
        let mut update_delta_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail = |msg: String| Error::Config { line: line_no, msg };
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if cfg.is_some() {
                    return Err(fail("only one scenario header is allowed".into()));
                }
                cfg = Some(Self::defaults(header.trim().parse().map_err(fail)?));
                continue;
            }
            let cfg = cfg
                .as_mut()
                .ok_or_else(|| fail("expected a [scenario] header first".into()))?;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "receivers" => cfg.receivers = parse(value).map_err(fail)?,
                "files" => cfg.files = parse(value).map_err(fail)?,
                "packets" => cfg.packets = parse(value).map_err(fail)?,
                "delta" => cfg.delta = parse(value).map_err(fail)?,
                "cluster_size" => cfg.cluster_size = parse(value).map_err(fail)?,
                "update_prob" => cfg.update_prob = parse(value).map_err(fail)?,
                "update_delta" => {
                    cfg.update_delta = parse(value).map_err(fail)?;
                    update_delta_set = true;
                }
                "file_entropy" => cfg.file_entropy = parse(value).map_err(fail)?,
                "memory" => cfg.memory = parse_grid(value).map_err(fail)?,
                "trials" => cfg.trials = parse(value).map_err(fail)?,
                "seed" => cfg.seed = parse(value).map_err(fail)?,
                "schemes" => {
                    cfg.schemes = value
                        .split(',')
                        .map(|s| s.trim().parse())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(fail)?;
                    cfg.schemes.sort();
                    cfg.schemes.dedup();
                }
                "output" => cfg.output = Some(PathBuf::from(value)),
                "placement" => cfg.placement = value.parse().map_err(fail)?,
                "demand" => cfg.demand = parse_demand(value).map_err(fail)?,
                "oracle_limit" => cfg.oracle_limit = parse(value).map_err(fail)?,
                "parallel" => cfg.parallel = Some(parse(value).map_err(fail)?),
                "dump_graphs" => cfg.dump_graphs = Some(PathBuf::from(value)),
                other => return Err(fail(format!("unknown key `{other}`"))),
            }
        }
        let mut cfg = cfg.ok_or(Error::Config {
            line: 0,
            msg: "missing [scenario] header".into(),
        })?;
        if cfg.scenario == Scenario::Dynamic && !update_delta_set {
            cfg.update_delta = cfg.delta;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse<T: FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse `{value}`"))
}

/// `a:b:s` (inclusive of `b` up to rounding) or `a, b, c`.
fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (f64, f64, f64) = (parse(start)?, parse(stop)?, parse(step)?);
            if !(step > 0.0) || stop < start {
                return Err(format!("bad range `{value}`"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [_] => value.split(',').map(|s| parse(s.trim())).collect(),
        _ => Err(format!("bad memory grid `{value}`")),
    }
}

fn parse_demand(value: &str) -> std::result::Result<DemandMode, String> {
    match value {
        "uniform" => Ok(DemandMode::Uniform),
        "worst" => Ok(DemandMode::Worst),
        _ => {
            let files: Vec<usize> = value.split(',').map(|s| parse(s.trim())).collect::<std::result::Result<_, _>>()?;
            if files.contains(&0) {
                return Err("demand entries are one-based".into());
            }
            Ok(DemandMode::Fixed(files.into_iter().map(|f| f - 1).collect()))
        }
    }
}
