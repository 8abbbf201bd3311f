//! Equal-weight velocity ensembles, initial-condition recipes and snapshot I/O.
//!
//! Snapshot layout (all little-endian):
//!
//! ```text
//! magic    8 bytes  "GRANOTSN"
//! version  u32      currently 1
//! dim      u32
//! n        u64
//! time     f64
//! seed     u64
//! data     n * dim f64, particle-major
//! ```

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::moments::{mean_of, temperature};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"GRANOTSN";
pub const SNAPSHOT_VERSION: u32 = 1;

/// `N` velocities in `R^d` with the current (scaled) time and a step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityEnsemble {
    velocities: Vec<f64>,
    dim: usize,
    pub time: f64,
    pub generation: u64,
    pub seed: u64,
}

impl VelocityEnsemble {
    pub fn new(velocities: Vec<f64>, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::arg(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if velocities.is_empty() || !velocities.len().is_multiple_of(dim) {
            return Err(Error::arg(format!(
                "velocity buffer of length {} does not hold whole {dim}-vectors",
                velocities.len()
            )));
        }
        if velocities.iter().any(|x| !x.is_finite()) {
            return Err(Error::arg("velocities must be finite"));
        }
        Ok(Self { velocities, dim, time: 0.0, generation: 0, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.velocities.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub(crate) fn velocities_mut(&mut self) -> &mut [f64] {
        &mut self.velocities
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mean(&self) -> Vec<f64> {
        mean_of(&self.velocities, self.dim)
    }

    pub fn theta(&self) -> f64 {
        temperature(&self.velocities, self.dim)
    }

    /// Shifts to zero mean and rescales to temperature `theta`. Fails on a
    /// collapsed ensemble.
    pub fn normalize(&mut self, mean: &[f64], theta: f64) -> Result<()> {
        if mean.len() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, mean.len()));
        }
        let m = self.mean();
        let current = self.theta();
        if !(current > 0.0) {
            return Err(Error::arg("cannot rescale an ensemble with zero temperature"));
        }
        let s = (theta / current).sqrt();
        for v in self.velocities.chunks_exact_mut(self.dim) {
            for c in 0..v.len() {
                v[c] = mean[c] + s * (v[c] - m[c]);
            }
        }
        Ok(())
    }

    /// Writes the binary snapshot.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(SNAPSHOT_MAGIC)?;
        out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        out.write_all(&self.time.to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.velocities.len());
        for x in &self.velocities {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&buf)
    }

    pub fn read_snapshot<R: Read>(mut input: R) -> Result<Self> {
        let bad = |what: &str| Error::config(format!("malformed snapshot: {what}"));
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(bad("wrong magic"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b4).map_err(|_| bad("truncated header"))?;
        let version = u32::from_le_bytes(b4);
        if version != SNAPSHOT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        input.read_exact(&mut b4).map_err(|_| bad("truncated header"))?;
        let dim = u32::from_le_bytes(b4) as usize;
        input.read_exact(&mut b8).map_err(|_| bad("truncated header"))?;
        let n = u64::from_le_bytes(b8) as usize;
        input.read_exact(&mut b8).map_err(|_| bad("truncated header"))?;
        let time = f64::from_le_bytes(b8);
        input.read_exact(&mut b8).map_err(|_| bad("truncated header"))?;
        let seed = u64::from_le_bytes(b8);
        let len = n.checked_mul(dim).ok_or_else(|| bad("size overflow"))?;
        let mut raw = Vec::new();
        input.read_to_end(&mut raw).map_err(|e| bad(&e.to_string()))?;
        if raw.len() != 8 * len {
            return Err(bad(&format!("expected {} data bytes, found {}", 8 * len, raw.len())));
        }
        let velocities = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let mut ens = Self::new(velocities, dim)?;
        ens.time = time;
        ens.seed = seed;
        Ok(ens)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_snapshot(&mut buf).expect("writing to memory");
        write_atomic(path, &buf)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| io_error(path, e))?;
        Self::read_snapshot(std::io::BufReader::new(file))
    }

    /// One row per particle, header `vx,vy,vz` (or `v` in 1D).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<&str> = match self.dim {
            1 => vec!["v"],
            2 => vec!["vx", "vy"],
            _ => vec!["vx", "vy", "vz"],
        };
        writeln!(out, "{}", header.join(","))?;
        for v in self.velocities.chunks_exact(self.dim) {
            let row: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| io_error(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

/// Initial-condition recipe. Sampled recipes are shifted and rescaled so the
/// empirical mean and temperature equal the requested values exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialRecipe {
    Gaussian { mean: Vec<f64>, theta: f64 },
    /// Uniform on the cube of half-width `sqrt(3 theta)` around `mean`.
    UniformCube { mean: Vec<f64>, theta: f64 },
    /// `mean ± sqrt(theta) (1, …, 1)` with fair random signs.
    TwoPoint { mean: Vec<f64>, theta: f64 },
    Dirac { mean: Vec<f64> },
    File(std::path::PathBuf),
}

impl InitialRecipe {
    pub fn build<R: Rng + ?Sized>(&self, n: usize, dim: usize, rng: &mut R) -> Result<VelocityEnsemble> {
        let (mean, theta) = match self {
            InitialRecipe::File(path) => {
                let ens = VelocityEnsemble::load(path)?;
                if ens.dim() != dim || ens.len() != n {
                    return Err(Error::config(format!(
                        "snapshot {} holds {} particles in dimension {}, expected {n} in dimension {dim}",
                        path.display(),
                        ens.len(),
                        ens.dim()
                    )));
                }
                return Ok(ens);
            }
            InitialRecipe::Gaussian { mean, theta }
            | InitialRecipe::UniformCube { mean, theta }
            | InitialRecipe::TwoPoint { mean, theta } => (mean, *theta),
            InitialRecipe::Dirac { mean } => (mean, 0.0),
        };
        if mean.len() != dim {
            return Err(Error::DimensionMismatch(dim, mean.len()));
        }
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::config(format!("initial temperature must be nonnegative, got {theta}")));
        }
        if n == 0 {
            return Err(Error::config("ensemble size must be positive"));
        }
        let mut v = Vec::with_capacity(n * dim);
        if theta == 0.0 {
            v.extend((0..n).flat_map(|_| mean.iter().copied()));
            return VelocityEnsemble::new(v, dim);
        }
        match self {
            InitialRecipe::Gaussian { .. } => {
                v.extend((0..n * dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
            }
            InitialRecipe::UniformCube { .. } => {
                v.extend((0..n * dim).map(|_| 2.0 * rng.random::<f64>() - 1.0));
            }
            InitialRecipe::TwoPoint { .. } => {
                for _ in 0..n {
                    let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    v.extend(std::iter::repeat_n(s, dim));
                }
            }
            InitialRecipe::Dirac { .. } | InitialRecipe::File(_) => unreachable!(),
        }
        let mut ens = VelocityEnsemble::new(v, dim)?;
        if ens.theta() == 0.0 {
            // every two-point sign came out equal
            return Err(Error::config("sampled ensemble has zero spread; increase N"));
        }
        ens.normalize(mean, theta)?;
        Ok(ens)
    }
}
