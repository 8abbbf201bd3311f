//! Experiment configuration files.
//!
//! Line-oriented `key = value` pairs grouped under `[section]` headers; `#`
//! starts a comment. Lists are comma-separated. Every physics parameter must
//! be given explicitly; only output paths have defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use granot_core::collision::{CrossSection, KacParams, ModelParams};
use granot_core::dynamics::{Equation, Physics, SimConfig};
use granot_core::ensemble::InitialRecipe;

use crate::error::{HarnessError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GRANOT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "out";

const SECTIONS: [&str; 7] = ["experiment", "physics", "cross_section", "initial", "initial_b", "output", "verify"];

/// Angular kernel named by a config.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossSectionRef {
    /// `b = 1/(4π)`.
    Constant,
    /// `b(c) = (1 + c)/(4π)`.
    Linear,
    /// Two-column `cos θ, b` table, renormalized on load.
    Table(PathBuf),
}

impl CrossSectionRef {
    pub fn build(&self) -> granot_core::Result<CrossSection> {
        match self {
            CrossSectionRef::Constant => Ok(CrossSection::constant()),
            CrossSectionRef::Linear => CrossSection::from_density("linear", |c| (1.0 + c) / (4.0 * PI)),
            CrossSectionRef::Table(path) => CrossSection::load_table(path),
        }
    }
}

/// Statistical scale of the verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Particle counts and trial numbers of the acceptance criteria.
    Desk,
    /// Small smoke-test sizes with the same code paths.
    Quick,
}

impl Scale {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "desk" => Some(Scale::Desk),
            "quick" => Some(Scale::Quick),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Quick => "quick",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub dir: PathBuf,
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub snapshot_b: Option<PathBuf>,
}

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub equation: Equation,
    pub physics: Physics,
    pub cross_section: CrossSectionRef,
    pub initial: InitialRecipe,
    /// Second datum; present for paired runs.
    pub initial_b: Option<InitialRecipe>,
    pub n: usize,
    pub seed: u64,
    pub dtau: f64,
    pub schedule: Vec<f64>,
    pub outputs: Outputs,
    pub scale: Scale,
}

impl ExperimentConfig {
    pub fn dimension(&self) -> usize {
        self.equation.dimension()
    }

    pub fn sim_config(&self) -> granot_core::Result<SimConfig> {
        SimConfig::new(self.equation, self.physics, self.cross_section.build()?, self.dtau, self.seed, self.n)
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Raw {
    path: PathBuf,
    base: PathBuf,
    entries: BTreeMap<(String, String), Entry>,
    sections: BTreeMap<String, usize>,
}

impl Raw {
    fn err(&self, line: usize, key: &str, message: impl Into<String>) -> HarnessError {
        HarnessError::Config { path: self.path.clone(), line, key: key.to_string(), message: message.into() }
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }

    fn require(&mut self, section: &str, key: &str) -> Result<Entry> {
        self.take(section, key).ok_or_else(|| {
            let line = self.sections.get(section).copied().unwrap_or(0);
            self.err(line, key, format!("missing required key `{key}` in [{section}]"))
        })
    }

    fn parse_num<T: std::str::FromStr>(&self, key: &str, e: &Entry) -> Result<T> {
        e.value.parse().map_err(|_| self.err(e.line, key, format!("key `{key}`: cannot parse {:?}", e.value)))
    }

    fn f64_in(&mut self, section: &str, key: &str, ok: impl Fn(f64) -> bool, range: &str) -> Result<f64> {
        let e = self.require(section, key)?;
        let x: f64 = self.parse_num(key, &e)?;
        if !x.is_finite() || !ok(x) {
            return Err(self.err(e.line, key, format!("key `{key}` = {x} is out of range; expected {range}")));
        }
        Ok(x)
    }

    fn list(&self, key: &str, e: &Entry) -> Result<Vec<f64>> {
        let v = e.value.trim();
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.err(e.line, key, format!("key `{key}`: bad list element {s:?}")))
            })
            .collect()
    }

    fn input_path(&self, value: &str) -> PathBuf {
        let p = Path::new(value);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

fn tokenize(text: &str, path: &Path) -> Result<Raw> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut raw = Raw { path: path.to_path_buf(), base, entries: BTreeMap::new(), sections: BTreeMap::new() };
    let mut section: Option<String> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .ok_or_else(|| raw.err(lineno, "", format!("malformed section header {line:?}")))?;
            if !SECTIONS.contains(&name) {
                return Err(raw.err(lineno, name, format!("unknown section [{name}]")));
            }
            if raw.sections.insert(name.to_string(), lineno).is_some() {
                return Err(raw.err(lineno, name, format!("section [{name}] appears twice")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| raw.err(lineno, "", format!("expected `key = value`, got {line:?}")))?;
        let key = key.trim();
        let sec = section.clone().ok_or_else(|| raw.err(lineno, key, format!("key `{key}` outside any section")))?;
        let slot = (sec.clone(), key.to_string());
        if raw.entries.contains_key(&slot) {
            return Err(raw.err(lineno, key, format!("key `{key}` repeated in [{sec}]")));
        }
        raw.entries.insert(slot, Entry { value: value.trim().to_string(), line: lineno });
    }
    Ok(raw)
}

fn parse_initial(raw: &mut Raw, section: &str, dim: usize) -> Result<InitialRecipe> {
    let kind = raw.require(section, "kind")?;
    let mean = |raw: &mut Raw| -> Result<Vec<f64>> {
        let e = raw.require(section, "mean")?;
        let m = raw.list("mean", &e)?;
        if m.len() != dim {
            return Err(raw.err(e.line, "mean", format!("key `mean` has {} components, dimension is {dim}", m.len())));
        }
        Ok(m)
    };
    let theta = |raw: &mut Raw| raw.f64_in(section, "theta", |x| x > 0.0, "theta > 0");
    Ok(match kind.value.as_str() {
        "gaussian" => InitialRecipe::Gaussian { mean: mean(raw)?, theta: theta(raw)? },
        "uniform-cube" => InitialRecipe::UniformCube { mean: mean(raw)?, theta: theta(raw)? },
        "two-point" => InitialRecipe::TwoPoint { mean: mean(raw)?, theta: theta(raw)? },
        "dirac" => InitialRecipe::Dirac { mean: mean(raw)? },
        "file" => {
            let p = raw.require(section, "path")?;
            InitialRecipe::File(raw.input_path(&p.value))
        }
        other => {
            return Err(raw.err(
                kind.line,
                "kind",
                format!("key `kind`: unknown initial recipe {other:?} (gaussian, uniform-cube, two-point, dirac, file)"),
            ))
        }
    })
}

/// Parses configuration text; `path` is used for diagnostics and to resolve
/// relative input paths.
pub fn parse_config_str(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let mut raw = tokenize(text, path)?;

    let name = raw.require("experiment", "name")?.value;
    let fam = raw.require("experiment", "family")?;
    let equation = Equation::parse(&fam.value).map_err(|_| {
        raw.err(
            fam.line,
            "family",
            format!(
                "key `family`: unknown family {:?} (homogeneous, diffusive, selfsimilar, cross-section, kac)",
                fam.value
            ),
        )
    })?;
    if let Some(d) = raw.take("experiment", "dimension") {
        let dim: usize = raw.parse_num("dimension", &d)?;
        if dim != equation.dimension() {
            return Err(raw.err(
                d.line,
                "dimension",
                format!(
                    "key `dimension` = {dim} is inconsistent with family {} (dimension {})",
                    equation.name(),
                    equation.dimension()
                ),
            ));
        }
    }
    let n_entry = raw.require("experiment", "n")?;
    let n: usize = raw.parse_num("n", &n_entry)?;
    if n < 2 {
        return Err(raw.err(n_entry.line, "n", format!("key `n` = {n} is out of range; expected n >= 2")));
    }
    let seed_entry = raw.require("experiment", "seed")?;
    let seed: u64 = raw.parse_num("seed", &seed_entry)?;
    let dtau_line = raw.entries.get(&("experiment".to_string(), "dtau".to_string())).map_or(0, |e| e.line);
    let dtau = raw.f64_in("experiment", "dtau", |x| x > 0.0, "dtau > 0")?;
    let sched = raw.require("experiment", "schedule")?;
    let schedule = raw.list("schedule", &sched)?;
    if schedule.iter().any(|&t| t < 0.0) || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(raw.err(sched.line, "schedule", "key `schedule` must be nonnegative and strictly increasing"));
    }

    let physics = if equation == Equation::Kac {
        let p = raw.f64_in("physics", "p_inel", |x| x >= 0.0, "p_inel >= 0")?;
        Physics::Kac(KacParams::new(p)?)
    } else {
        // the time scaling needs E = 8/(1 - e²) finite except for the unit-rate kernel equation
        let (ok, range): (fn(f64) -> bool, &str) = if equation == Equation::CrossSection {
            (|x| x > 0.0 && x <= 1.0, "0 < e <= 1")
        } else {
            (|x| x > 0.0 && x < 1.0, "0 < e < 1")
        };
        let e = raw.f64_in("physics", "e", ok, range)?;
        let b = raw.f64_in("physics", "b", |x| x > 0.0, "b > 0")?;
        let (a, p_diff) = if equation == Equation::Diffusive {
            (
                raw.f64_in("physics", "a", |x| x >= 0.0, "a >= 0")?,
                raw.f64_in("physics", "p_diff", |x| (0.0..=1.0).contains(&x), "0 <= p_diff <= 1")?,
            )
        } else {
            (0.0, 0.0)
        };
        Physics::Boltzmann(ModelParams::new(e, b, a, p_diff)?)
    };

    let mut xs_line = 0;
    let cross_section = if equation == Equation::CrossSection {
        let kind = raw.require("cross_section", "kind")?;
        match kind.value.as_str() {
            "constant" => CrossSectionRef::Constant,
            "linear" => CrossSectionRef::Linear,
            "table" => {
                let p = raw.require("cross_section", "path")?;
                xs_line = p.line;
                CrossSectionRef::Table(raw.input_path(&p.value))
            }
            other => {
                return Err(raw.err(
                    kind.line,
                    "kind",
                    format!("key `kind`: unknown cross-section {other:?} (constant, linear, table)"),
                ))
            }
        }
    } else {
        CrossSectionRef::Constant
    };

    let dim = equation.dimension();
    let initial = parse_initial(&mut raw, "initial", dim)?;
    let initial_b = if raw.has_section("initial_b") { Some(parse_initial(&mut raw, "initial_b", dim)?) } else { None };

    let dir = match raw.take("output", "dir") {
        Some(e) => PathBuf::from(e.value),
        None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    };
    let csv = raw.take("output", "csv").map(|e| PathBuf::from(e.value)).unwrap_or_else(|| dir.join(format!("{name}.csv")));
    let svg = raw.take("output", "svg").map(|e| PathBuf::from(e.value));
    let snapshot = raw.take("output", "snapshot").map(|e| PathBuf::from(e.value));
    let snapshot_b = raw.take("output", "snapshot_b").map(|e| PathBuf::from(e.value));
    if svg.is_some() && initial_b.is_none() {
        return Err(raw.err(raw.sections["output"], "svg", "key `svg` plots a paired run and needs an [initial_b] section"));
    }
    if snapshot_b.is_some() && initial_b.is_none() {
        return Err(raw.err(raw.sections["output"], "snapshot_b", "key `snapshot_b` needs an [initial_b] section"));
    }

    let scale = match raw.take("verify", "scale") {
        Some(e) => Scale::parse(&e.value)
            .ok_or_else(|| raw.err(e.line, "scale", format!("key `scale`: expected desk or quick, got {:?}", e.value)))?,
        None => Scale::Desk,
    };

    if let Some(((section, key), entry)) = raw.entries.iter().min_by_key(|(_, e)| e.line) {
        return Err(raw.err(
            entry.line,
            key,
            format!("unknown key `{key}` in [{section}] for family {}", equation.name()),
        ));
    }

    let job = ExperimentConfig {
        name,
        equation,
        physics,
        cross_section,
        initial,
        initial_b,
        n,
        seed,
        dtau,
        schedule,
        outputs: Outputs { dir, csv, svg, snapshot, snapshot_b },
        scale,
    };
    let xs = job.cross_section.build().map_err(|e| raw.err(xs_line, "path", e.to_string()))?;
    SimConfig::new(job.equation, job.physics, xs, job.dtau, job.seed, job.n)
        .map_err(|e| raw.err(dtau_line, "dtau", format!("key `dtau`: {e}")))?;
    Ok(job)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config_str(&text, path)
}
