//! Exact quadratic Wasserstein distances between discrete measures.
//!
//! | Routine | Inputs | Method |
//! |---------|--------|--------|
//! | [`w2_exact_1d`] | equal-size 1D samples | sorted order statistics |
//! | [`w2_exact_assignment`] | equal-size point clouds | Jonker-Volgenant assignment |
//! | [`w2_discrete_lp`] | small weighted measures | min-cost flow |
//! | [`w2_to_dirac`] | point cloud vs a point | closed form |
//!
//! Point clouds are flat row-major `&[f64]` slices with an explicit dimension,
//! which is how [`crate::ensemble::VelocityEnsemble`] stores velocities.

pub mod assignment;
pub mod lp;
pub mod sphere;

use std::io::Write;

use crate::error::{Error, Result};
use crate::numeric::{ksum, KahanSum};

pub use sphere::{circle_cost_bound, sphere_transport_map, CircleSpec, SphereMap, SphereSpec};

/// Largest point-cloud size accepted by [`w2_exact_assignment`]. Memory is
/// `O(N)`; time is cubic in the worst case. On one core, `N = 5000` takes
/// about 3 s for two samples of one law and about 35 s for a Gaussian
/// against a uniform cube.
pub const MAX_ASSIGNMENT_SIZE: usize = 10_000;

/// Largest atom count per side accepted by [`w2_discrete_lp`].
pub const MAX_LP_ATOMS: usize = 64;

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Equal-weight or weighted empirical measure on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

impl DiscreteMeasure {
    /// Builds a measure from flat atoms and weights. Zero-weight atoms are
    /// dropped; the remaining weights must be positive and sum to one.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::arg(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if atoms.len() != weights.len() * dim {
            return Err(Error::SizeMismatch(atoms.len(), weights.len() * dim));
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return Err(Error::arg("atoms must be finite"));
        }
        let mut kept_atoms = Vec::with_capacity(atoms.len());
        let mut kept_weights = Vec::with_capacity(weights.len());
        for (k, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::arg(format!("weight {k} is negative or not finite: {w}")));
            }
            if w > 0.0 {
                kept_atoms.extend_from_slice(&atoms[k * dim..(k + 1) * dim]);
                kept_weights.push(w);
            }
        }
        if kept_weights.is_empty() {
            return Err(Error::arg("measure has no atom with positive weight"));
        }
        let total = ksum(kept_weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::arg(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { atoms: kept_atoms, weights: kept_weights, dim })
    }

    /// Equal weights `1/N` on the given points.
    pub fn uniform(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(Error::arg("point list must be a nonempty multiple of the dimension"));
        }
        let n = points.len() / dim;
        Self::new(points, vec![1.0 / n as f64; n], dim)
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.to_vec(), vec![1.0], point.len())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, k: usize) -> &[f64] {
        &self.atoms[k * self.dim..(k + 1) * self.dim]
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|c| ksum((0..self.len()).map(|k| self.weights[k] * self.atom(k)[c])))
            .collect()
    }

    /// `alpha * self + (1 - alpha) * other` as a mixture of atoms.
    pub fn mix(&self, other: &Self, alpha: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::arg(format!("mixing weight {alpha} outside [0, 1]")));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let mut weights: Vec<f64> = self.weights.iter().map(|w| alpha * w).collect();
        weights.extend(other.weights.iter().map(|w| (1.0 - alpha) * w));
        let total = ksum(weights.iter().copied());
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(atoms, weights, self.dim)
    }

    /// Convolution `self * other`: atoms at all pairwise sums.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for a in 0..self.len() {
            for b in 0..other.len() {
                atoms.extend(self.atom(a).iter().zip(other.atom(b)).map(|(x, y)| x + y));
                weights.push(self.weights[a] * other.weights[b]);
            }
        }
        let total = ksum(weights.iter().copied());
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(atoms, weights, self.dim)
    }

    /// One-dimensional marginal along coordinate `axis`.
    pub fn marginal(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::arg(format!("axis {axis} out of range for dimension {}", self.dim)));
        }
        let atoms = (0..self.len()).map(|k| self.atom(k)[axis]).collect();
        Self::new(atoms, self.weights.clone(), 1)
    }
}

/// One pairing entry of a transport plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
    pub sq_dist: f64,
}

/// Coupling between two discrete measures and its quadratic cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    entries: Vec<PlanEntry>,
    permutation: Option<Vec<usize>>,
    cost: f64,
}

impl TransportPlan {
    fn from_permutation(perm: Vec<usize>, x: &[f64], y: &[f64], dim: usize) -> Self {
        let n = perm.len();
        let mass = 1.0 / n as f64;
        let entries: Vec<PlanEntry> = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| PlanEntry {
                source: i,
                target: j,
                mass,
                sq_dist: sq_dist(&x[i * dim..(i + 1) * dim], &y[j * dim..(j + 1) * dim]),
            })
            .collect();
        let cost = ksum(entries.iter().map(|e| e.sq_dist)) / n as f64;
        Self { entries, permutation: Some(perm), cost }
    }

    /// Squared transport cost `Σ mass · |x - y|²`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn distance(&self) -> f64 {
        self.cost.max(0.0).sqrt()
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    /// `σ` with source `i` sent to target `σ(i)`, for equal-weight plans.
    pub fn permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    /// Row and column sums of the flow matrix.
    pub fn marginals(&self, sources: usize, targets: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rows = vec![KahanSum::new(); sources];
        let mut cols = vec![KahanSum::new(); targets];
        for e in &self.entries {
            rows[e.source].add(e.mass);
            cols[e.target].add(e.mass);
        }
        (
            rows.iter().map(KahanSum::value).collect(),
            cols.iter().map(KahanSum::value).collect(),
        )
    }

    /// CSV with header `source,target,mass,sq_cost`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "source,target,mass,sq_cost")?;
        for e in &self.entries {
            writeln!(out, "{},{},{:e},{:e}", e.source, e.target, e.mass, e.sq_dist)?;
        }
        Ok(())
    }
}

/// Exact `W2` between two equal-size 1D samples via order statistics.
pub fn w2_exact_1d(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch(xs.len(), ys.len()));
    }
    if xs.is_empty() {
        return Err(Error::arg("empty sample"));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let cost = ksum(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y))) / a.len() as f64;
    Ok(cost.sqrt())
}

fn check_cloud(points: &[f64], dim: usize) -> Result<usize> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(Error::arg(format!(
            "point buffer of length {} is not a multiple of dimension {dim}",
            points.len()
        )));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg("points must be finite"));
    }
    Ok(points.len() / dim)
}

/// Exact `W2` between two equal-weight clouds of the same size, with the
/// optimal permutation plan.
pub fn w2_exact_assignment(x: &[f64], y: &[f64], dim: usize) -> Result<(f64, TransportPlan)> {
    let n = check_cloud(x, dim)?;
    let m = check_cloud(y, dim)?;
    if n != m {
        return Err(Error::SizeMismatch(n, m));
    }
    if n == 0 {
        return Err(Error::arg("empty point cloud"));
    }
    if n > MAX_ASSIGNMENT_SIZE {
        return Err(Error::arg(format!(
            "assignment size {n} exceeds the cap of {MAX_ASSIGNMENT_SIZE}"
        )));
    }
    let perm = match dim {
        1 => assignment::solve(n, |i, j| {
            let d = x[i] - y[j];
            d * d
        }),
        3 => assignment::solve(n, |i, j| {
            let (a, b) = (&x[3 * i..3 * i + 3], &y[3 * j..3 * j + 3]);
            let (d0, d1, d2) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
            d0 * d0 + d1 * d1 + d2 * d2
        }),
        _ => assignment::solve(n, |i, j| {
            sq_dist(&x[dim * i..dim * (i + 1)], &y[dim * j..dim * (j + 1)])
        }),
    };
    let plan = TransportPlan::from_permutation(perm, x, y, dim);
    Ok((plan.distance(), plan))
}

/// Exact `W2` between two small weighted measures as a transportation LP.
pub fn w2_discrete_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(f64, TransportPlan)> {
    if mu.dim != nu.dim {
        return Err(Error::DimensionMismatch(mu.dim, nu.dim));
    }
    if mu.len() > MAX_LP_ATOMS || nu.len() > MAX_LP_ATOMS {
        return Err(Error::arg(format!(
            "LP backend limited to {MAX_LP_ATOMS} atoms per side ({} x {})",
            mu.len(),
            nu.len()
        )));
    }
    let (m, n) = (mu.len(), nu.len());
    let flow = lp::solve_transport(&mu.weights, &nu.weights, |i, j| sq_dist(mu.atom(i), nu.atom(j)))?;
    let mut entries = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let f = flow[i * n + j];
            if f > 0.0 {
                entries.push(PlanEntry { source: i, target: j, mass: f, sq_dist: sq_dist(mu.atom(i), nu.atom(j)) });
            }
        }
    }
    let cost = ksum(entries.iter().map(|e| e.mass * e.sq_dist));
    let plan = TransportPlan { entries, permutation: None, cost };
    let (rows, cols) = plan.marginals(m, n);
    let worst = rows
        .iter()
        .zip(&mu.weights)
        .chain(cols.iter().zip(&nu.weights))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if worst > 1e-10 {
        return Err(Error::Internal(format!("plan marginals off by {worst:e}")));
    }
    Ok((plan.distance(), plan))
}

/// Maps every atom `v` to `theta^{-1/2} v`.
pub fn scale_measure(mu: &DiscreteMeasure, theta: f64) -> Result<DiscreteMeasure> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::arg(format!("scaling temperature must be positive, got {theta}")));
    }
    Ok(DiscreteMeasure {
        atoms: scale_points(&mu.atoms, theta)?,
        weights: mu.weights.clone(),
        dim: mu.dim,
    })
}

/// Same map as [`scale_measure`] on a raw point buffer.
pub fn scale_points(points: &[f64], theta: f64) -> Result<Vec<f64>> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::arg(format!("scaling temperature must be positive, got {theta}")));
    }
    let s = theta.sqrt();
    Ok(points.iter().map(|x| x / s).collect())
}

/// `W2` between an equal-weight cloud and the Dirac mass at `a`.
pub fn w2_to_dirac(points: &[f64], dim: usize, a: &[f64]) -> Result<f64> {
    let n = check_cloud(points, dim)?;
    if n == 0 {
        return Err(Error::arg("empty ensemble"));
    }
    if a.len() != dim {
        return Err(Error::DimensionMismatch(dim, a.len()));
    }
    let cost = ksum(points.chunks_exact(dim).map(|v| sq_dist(v, a))) / n as f64;
    Ok(cost.sqrt())
}
