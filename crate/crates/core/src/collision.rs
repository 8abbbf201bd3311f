//! Binary collision rules for the inelastic Maxwell model in 3D and the
//! inelastic Kac model in 1D, angular sampling of the scattering direction,
//! and the analytic contraction constants attached to them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::integrate;
use crate::transport::sphere::uniform_direction;
use crate::vec3::{self, Vec3};

/// Number of cells in the inverse-CDF table for non-constant cross-sections.
pub const CDF_TABLE_SIZE: usize = 4096;

/// Tolerance on the unit-mass cutoff condition for closed-form kernels.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Physical parameters of the 3D model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Restitution coefficient in `(0, 1]`.
    pub e: f64,
    /// Collision-frequency prefactor `B > 0`.
    pub b: f64,
    /// Thermostat amplitude `A ≥ 0`.
    pub a: f64,
    /// Thermostat exponent in `[0, 3/2)`.
    pub p_diff: f64,
}

impl ModelParams {
    pub fn new(e: f64, b: f64, a: f64, p_diff: f64) -> Result<Self> {
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::config(format!("restitution e must lie in (0, 1], got {e}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::config(format!("collision prefactor B must be positive, got {b}")));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::config(format!("thermostat amplitude A must be nonnegative, got {a}")));
        }
        if !(0.0..1.5).contains(&p_diff) {
            return Err(Error::config(format!("thermostat exponent must lie in [0, 3/2), got {p_diff}")));
        }
        Ok(Self { e, b, a, p_diff })
    }

    /// Pure cooling model (`A = 0`).
    pub fn cooling(e: f64, b: f64) -> Result<Self> {
        Self::new(e, b, 0.0, 0.0)
    }

    /// `ε = (1 - e) / 2`.
    pub fn eps(&self) -> f64 {
        0.5 * (1.0 - self.e)
    }

    /// Time-scaling constant `E = 8 / (1 - e²)`; undefined in the elastic case.
    pub fn big_e(&self) -> Result<f64> {
        big_e(self.e)
    }

    pub fn is_elastic(&self) -> bool {
        self.e == 1.0
    }
}

/// `E = 8 / (1 - e²)` for `0 < e < 1`.
pub fn big_e(e: f64) -> Result<f64> {
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::config(format!(
            "E = 8/(1-e^2) needs 0 < e < 1 (got e = {e}); the time scaling is undefined for elastic collisions"
        )));
    }
    Ok(8.0 / (1.0 - e * e))
}

/// Parameters of the inelastic Kac model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KacParams {
    pub p_inel: f64,
    beta: f64,
}

impl KacParams {
    pub fn new(p_inel: f64) -> Result<Self> {
        let beta = kac_rate(p_inel)?;
        Ok(Self { p_inel, beta })
    }

    /// Contraction rate `β`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_elastic(&self) -> bool {
        self.p_inel == 0.0
    }
}

#[derive(Clone)]
enum Kernel {
    Constant,
    Density { label: String, density: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
    Table { cos: Vec<f64>, value: Vec<f64> },
}

/// Angular collision kernel `b(cos θ)` satisfying the unit-mass cutoff
/// condition `2π ∫_0^π b(cos θ) sin θ dθ = 1`.
#[derive(Clone)]
pub struct CrossSection {
    kernel: Kernel,
    scale: f64,
    residual: f64,
    // inverse CDF of cos θ on a uniform grid of u in [0, 1]
    inverse_cdf: Vec<f64>,
    mean_cosine: f64,
}

impl fmt::Debug for CrossSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kernel {
            Kernel::Constant => "constant".to_string(),
            Kernel::Density { label, .. } => format!("density({label})"),
            Kernel::Table { cos, .. } => format!("table({} rows)", cos.len()),
        };
        f.debug_struct("CrossSection")
            .field("kind", &kind)
            .field("residual", &self.residual)
            .field("mean_cosine", &self.mean_cosine)
            .finish()
    }
}

impl CrossSection {
    /// `b ≡ 1/(4π)`: isotropic scattering.
    pub fn constant() -> Self {
        Self {
            kernel: Kernel::Constant,
            scale: 1.0,
            residual: 0.0,
            inverse_cdf: Vec::new(),
            mean_cosine: 0.0,
        }
    }

    /// Closed-form kernel `b(c)`, `c ∈ [-1, 1]`. Rejected unless nonnegative
    /// and normalized to within [`NORMALIZATION_TOL`].
    pub fn from_density<F>(label: &str, density: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let kernel = Kernel::Density { label: label.to_string(), density: Arc::new(density) };
        let mass = 2.0 * PI * integrate(|c| kernel_eval(&kernel, c), -1.0, 1.0, 1e-13);
        let residual = (mass - 1.0).abs();
        if residual > NORMALIZATION_TOL {
            return Err(Error::config(format!(
                "cross-section {label} is not normalized: 2π∫b = {mass} (residual {residual:e})"
            )));
        }
        Self::build(kernel, 1.0, residual)
    }

    /// Piecewise-linear kernel through `(cos θ, b)` rows. The table is
    /// renormalized to unit mass; the pre-normalization deviation is kept as
    /// [`CrossSection::normalization_residual`].
    pub fn from_table(rows: &[(f64, f64)]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::config("cross-section table needs at least two rows"));
        }
        let mut rows = rows.to_vec();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::config(format!("duplicate cos θ = {} in table", w[0].0)));
            }
        }
        if rows.iter().any(|&(c, b)| !(-1.0..=1.0).contains(&c) || !(b >= 0.0 && b.is_finite())) {
            return Err(Error::config("table rows need cos θ in [-1, 1] and finite b ≥ 0"));
        }
        if rows[0].0 != -1.0 || rows[rows.len() - 1].0 != 1.0 {
            return Err(Error::config("table must span cos θ from -1 to 1"));
        }
        let cos: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let value: Vec<f64> = rows.iter().map(|r| r.1).collect();
        // exact trapezoid mass of the piecewise-linear interpolant
        let raw: f64 = 2.0
            * PI
            * cos.windows(2).zip(value.windows(2)).map(|(c, v)| 0.5 * (v[0] + v[1]) * (c[1] - c[0])).sum::<f64>();
        if raw <= 0.0 {
            return Err(Error::config("cross-section table has zero mass"));
        }
        Self::build(Kernel::Table { cos, value }, 1.0 / raw, (raw - 1.0).abs())
    }

    /// Parses a two-column text table (`cos θ  b` per line, `#` comments).
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::config(format!("table line {}: expected two columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::config(format!("table line {}: bad number {s:?}", lineno + 1)))
            };
            rows.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::from_table(&rows)
    }

    pub fn load_table(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_table(&text)
    }

    fn build(kernel: Kernel, scale: f64, residual: f64) -> Result<Self> {
        let mut xs = Self { kernel, scale, residual, inverse_cdf: Vec::new(), mean_cosine: 0.0 };
        if (0..=256).map(|k| -1.0 + k as f64 / 128.0).any(|c| xs.density(c) < 0.0) {
            return Err(Error::config("cross-section takes negative values"));
        }
        xs.mean_cosine = 2.0 * PI * integrate(|c| c * xs.density(c), -1.0, 1.0, 1e-13);

        // CDF of cos θ on a uniform grid, cell masses by quadrature
        let h = 2.0 / CDF_TABLE_SIZE as f64;
        let mut cdf = Vec::with_capacity(CDF_TABLE_SIZE + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for k in 0..CDF_TABLE_SIZE {
            let lo = -1.0 + k as f64 * h;
            acc += integrate(|c| xs.density(c), lo, lo + h, 1e-15);
            cdf.push(acc);
        }
        // fold the residual into the table
        let total = acc;
        cdf.iter_mut().for_each(|v| *v /= total);
        xs.inverse_cdf = invert_cdf(&cdf, h);
        Ok(xs)
    }

    /// Normalized kernel value `b(c)`.
    pub fn density(&self, c: f64) -> f64 {
        self.scale * kernel_eval(&self.kernel, c)
    }

    /// `|2π ∫ b - 1|` measured before any renormalization.
    pub fn normalization_residual(&self) -> f64 {
        self.residual
    }

    /// `E[σ·k] = 2π ∫_{-1}^{1} b(c) c dc`.
    pub fn mean_cosine(&self) -> f64 {
        self.mean_cosine
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kernel, Kernel::Constant)
    }

    /// Draws `cos θ` with density `2π b(c)` on `[-1, 1]`.
    pub fn sample_cos<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if self.is_constant() {
            return 2.0 * u - 1.0;
        }
        let n = self.inverse_cdf.len() - 1;
        let x = u * n as f64;
        let k = (x as usize).min(n - 1);
        let t = x - k as f64;
        (self.inverse_cdf[k] * (1.0 - t) + self.inverse_cdf[k + 1] * t).clamp(-1.0, 1.0)
    }
}

fn kernel_eval(kernel: &Kernel, c: f64) -> f64 {
    match kernel {
        Kernel::Constant => 1.0 / (4.0 * PI),
        Kernel::Density { density, .. } => density(c),
        Kernel::Table { cos, value } => {
            let c = c.clamp(-1.0, 1.0);
            let k = cos.partition_point(|&x| x <= c).clamp(1, cos.len() - 1);
            let t = (c - cos[k - 1]) / (cos[k] - cos[k - 1]);
            value[k - 1] + t * (value[k] - value[k - 1])
        }
    }
}

/// Inverse of a monotone CDF tabulated on `-1 + k h`, sampled at
/// `CDF_TABLE_SIZE + 1` equally spaced probabilities.
fn invert_cdf(cdf: &[f64], h: f64) -> Vec<f64> {
    let n = CDF_TABLE_SIZE;
    let mut out = Vec::with_capacity(n + 1);
    let mut cell = 0;
    for q in 0..=n {
        let u = q as f64 / n as f64;
        while cell + 1 < cdf.len() - 1 && cdf[cell + 1] < u {
            cell += 1;
        }
        let (lo, hi) = (cdf[cell], cdf[cell + 1]);
        let t = if hi > lo { ((u - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        out.push(-1.0 + (cell as f64 + t) * h);
    }
    out[0] = -1.0;
    out[n] = out[n].min(1.0);
    out
}

/// Right-handed orthonormal frame `(t1, t2, k)` around a unit axis.
///
/// Uses the Frisvad construction followed by one Gram-Schmidt pass; the
/// frame varies continuously in `k` except on the branch axis `k = -e_z`,
/// where a fixed frame is returned.
pub fn frame_from_axis(k: &Vec3) -> Result<(Vec3, Vec3, Vec3)> {
    let n = vec3::norm(k);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::arg("frame axis must be a nonzero finite vector"));
    }
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::arg(format!("frame axis must be a unit vector (norm {n})")));
    }
    let [x, y, z] = *k;
    let t1 = if z < -1.0 + 1e-12 {
        [0.0, -1.0, 0.0]
    } else {
        let a = 1.0 / (1.0 + z);
        let b = -x * y * a;
        [1.0 - x * x * a, b, -x]
    };
    let t1 = vec3::sub(&t1, &vec3::scale(k, vec3::dot(&t1, k)));
    let t1 = vec3::scale(&t1, 1.0 / vec3::norm(&t1));
    let t2 = vec3::cross(k, &t1);
    Ok((t1, t2, *k))
}

/// Post-collision velocities `(v', w')` for restitution `e` and scattering
/// direction `sigma`.
pub fn post_collision_pair(v: &Vec3, w: &Vec3, sigma: &Vec3, e: f64) -> Result<(Vec3, Vec3)> {
    if (vec3::norm(sigma) - 1.0).abs() > 1e-12 {
        return Err(Error::arg(format!("scattering direction must be a unit vector, got {sigma:?}")));
    }
    if !(e > 0.0 && e <= 1.0) {
        return Err(Error::arg(format!("restitution e must lie in (0, 1], got {e}")));
    }
    Ok(collide(v, w, sigma, e))
}

/// Unchecked core of [`post_collision_pair`]; `w'` is formed as total
/// momentum minus `v'`.
#[inline]
pub(crate) fn collide(v: &Vec3, w: &Vec3, sigma: &Vec3, e: f64) -> (Vec3, Vec3) {
    let u = vec3::sub(v, w);
    let speed = vec3::norm(&u);
    if speed == 0.0 {
        return (*v, *w);
    }
    let total = vec3::add(v, w);
    let a = 0.25 * (1.0 - e);
    let r = 0.25 * (1.0 + e) * speed;
    let vp = [
        0.5 * total[0] + a * u[0] + r * sigma[0],
        0.5 * total[1] + a * u[1] + r * sigma[1],
        0.5 * total[2] + a * u[2] + r * sigma[2],
    ];
    (vp, vec3::sub(&total, &vp))
}

/// Draws a scattering direction with polar axis `k` and angular kernel `xs`.
pub fn sample_sigma<R: Rng + ?Sized>(k: &Vec3, xs: &CrossSection, rng: &mut R) -> Result<Vec3> {
    if xs.is_constant() {
        if (vec3::norm(k) - 1.0).abs() > 1e-12 {
            return Err(Error::arg("polar axis must be a unit vector"));
        }
        return Ok(uniform_direction(rng));
    }
    let frame = frame_from_axis(k)?;
    Ok(sigma_in_frame(&frame, xs, rng))
}

#[inline]
pub(crate) fn sigma_in_frame<R: Rng + ?Sized>(
    frame: &(Vec3, Vec3, Vec3),
    xs: &CrossSection,
    rng: &mut R,
) -> Vec3 {
    let c = xs.sample_cos(rng);
    let s = (1.0 - c * c).max(0.0).sqrt();
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    let (sp, cp) = phi.sin_cos();
    let (t1, t2, k) = frame;
    [
        s * (cp * t1[0] + sp * t2[0]) + c * k[0],
        s * (cp * t1[1] + sp * t2[1]) + c * k[1],
        s * (cp * t1[2] + sp * t2[2]) + c * k[2],
    ]
}

/// Empirical gain operator: `m` post-collision velocities `v'` from pairs
/// `(v, w)` drawn independently with replacement from `points`.
pub fn sample_gain<R: Rng + ?Sized>(
    points: &[f64],
    e: f64,
    xs: &CrossSection,
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if points.is_empty() || !points.len().is_multiple_of(3) {
        return Err(Error::arg("gain sampling needs a nonempty 3D point buffer"));
    }
    if !(e > 0.0 && e <= 1.0) {
        return Err(Error::arg(format!("restitution e must lie in (0, 1], got {e}")));
    }
    let n = points.len() / 3;
    let mut out = Vec::with_capacity(3 * m);
    for _ in 0..m {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let v = [points[3 * i], points[3 * i + 1], points[3 * i + 2]];
        let w = [points[3 * j], points[3 * j + 1], points[3 * j + 2]];
        let u = vec3::sub(&v, &w);
        let speed = vec3::norm(&u);
        let sigma = if xs.is_constant() || speed == 0.0 {
            uniform_direction(rng)
        } else {
            sigma_in_frame(&frame_from_axis(&vec3::scale(&u, 1.0 / speed))?, xs, rng)
        };
        out.extend_from_slice(&collide(&v, &w, &sigma, e).0);
    }
    Ok(out)
}

/// Inelastic Kac collision at angle `theta` with inelasticity exponent `p`.
#[inline]
pub fn kac_post_collision(v: f64, w: f64, theta: f64, p_inel: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let (cp, sp) = if p_inel == 0.0 {
        (c, s)
    } else {
        (c * c.abs().powf(p_inel), s * s.abs().powf(p_inel))
    };
    (v * cp - w * sp, v * sp + w * cp)
}

/// `sqrt((3 + e²)/4)`, the gain-operator contraction factor.
pub fn contraction_factor_gain(e: f64) -> Result<f64> {
    check_unit_interval(e)?;
    Ok(((3.0 + e * e) / 4.0).sqrt())
}

/// `γ_b = (3 + e²)/4 + (1 - e²)/2 · π ∫_0^π b(cos θ) cos θ sin θ dθ`.
pub fn contraction_factor_cross_section(e: f64, xs: &CrossSection) -> Result<f64> {
    check_unit_interval(e)?;
    if xs.normalization_residual() > NORMALIZATION_TOL && !matches!(xs.kernel, Kernel::Table { .. }) {
        return Err(Error::config("cross-section is not normalized"));
    }
    // π ∫ b c dc = mean_cosine / 2
    Ok((3.0 + e * e) / 4.0 + (1.0 - e * e) / 2.0 * (0.5 * xs.mean_cosine()))
}

/// Kac contraction rate `β` with
/// `2β = 1 - (1/2π) ∫_0^{2π} (|cos θ|^{2(p+1)} + |sin θ|^{2(p+1)}) dθ`.
pub fn kac_rate(p_inel: f64) -> Result<f64> {
    if !(p_inel >= 0.0 && p_inel.is_finite()) {
        return Err(Error::arg(format!("Kac exponent must be nonnegative, got {p_inel}")));
    }
    if p_inel == 0.0 {
        return Ok(0.0);
    }
    let q = 2.0 * (p_inel + 1.0);
    let avg = integrate(
        |t: f64| t.cos().abs().powf(q) + t.sin().abs().powf(q),
        0.0,
        2.0 * PI,
        1e-13,
    ) / (2.0 * PI);
    Ok(0.5 * (1.0 - avg))
}

fn check_unit_interval(e: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::arg(format!("restitution e must lie in [0, 1], got {e}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn linear_kernel() -> CrossSection {
        CrossSection::from_density("(1+c)/(4π)", |c| (1.0 + c) / (4.0 * PI)).unwrap()
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.2, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, -1.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, 1.0, 1.5).is_err());
        let p = ModelParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.eps(), 0.25);
        assert!((p.big_e().unwrap() - 32.0 / 3.0).abs() < 1e-14);
        let elastic = ModelParams::cooling(1.0, 1.0).unwrap();
        assert!(matches!(elastic.big_e(), Err(Error::Config(_))));
    }

    #[test]
    fn collision_examples() {
        let v = [0.3, -1.0, 2.0];
        assert_eq!(post_collision_pair(&v, &v, &[0.0, 0.0, 1.0], 0.4).unwrap(), (v, v));

        let v = [1.0, 0.0, 0.0];
        let w = [-1.0, 0.0, 0.0];
        let (vp, wp) = post_collision_pair(&v, &w, &[0.0, 1.0, 0.0], 0.5).unwrap();
        assert_eq!(vp, [0.25, 0.75, 0.0]);
        assert_eq!(wp, [-0.25, -0.75, 0.0]);

        // elastic, sigma along v - w: nothing moves
        let v = [1.0, 2.0, 3.0];
        let w = [-1.0, 0.5, 2.0];
        let u = vec3::sub(&v, &w);
        let sigma = vec3::scale(&u, 1.0 / vec3::norm(&u));
        let (vp, wp) = post_collision_pair(&v, &w, &sigma, 1.0).unwrap();
        for c in 0..3 {
            assert!((vp[c] - v[c]).abs() < 1e-14 && (wp[c] - w[c]).abs() < 1e-14);
        }

        assert!(post_collision_pair(&v, &w, &[1.0, 1.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn frame_examples() {
        let (t1, t2, k) = frame_from_axis(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(vec3::dot(&t1, &k), 0.0);
        assert_eq!(vec3::dot(&t2, &k), 0.0);
        assert!((vec3::norm(&t1) - 1.0).abs() < 1e-15);
        let (t1, t2, k) = frame_from_axis(&[0.0, 0.0, -1.0]).unwrap();
        assert_eq!(vec3::cross(&t1, &t2), k);
        assert!(frame_from_axis(&[0.0; 3]).is_err());
        assert!(frame_from_axis(&[0.0, 2.0, 0.0]).is_err());
    }

    #[test]
    fn kac_examples() {
        assert_eq!(kac_post_collision(1.5, -0.5, 0.0, 1.0), (1.5, -0.5));
        let (a, b) = kac_post_collision(1.5, -0.5, 0.7, 0.0);
        assert!((a * a + b * b - 2.5).abs() < 1e-14);
        let (a, b) = kac_post_collision(2.0, 3.0, PI / 2.0, 1.0);
        assert!((a + 3.0).abs() < 1e-15 && (b - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gain_factor_values() {
        assert_eq!(contraction_factor_gain(1.0).unwrap(), 1.0);
        assert!((contraction_factor_gain(0.0).unwrap() - 0.866_025_403_784_438_6).abs() < 1e-15);
        assert!((contraction_factor_gain(0.5).unwrap() - 0.8125f64.sqrt()).abs() < 1e-15);
        assert!(contraction_factor_gain(1.1).is_err());
        assert!(contraction_factor_gain(-0.1).is_err());
    }

    #[test]
    fn cross_section_factor_values() {
        let c = CrossSection::constant();
        for &e in &[0.0, 0.3, 0.5, 1.0] {
            let g = contraction_factor_cross_section(e, &c).unwrap();
            assert!((g - (3.0 + e * e) / 4.0).abs() < 1e-10);
        }
        let lin = linear_kernel();
        for &e in &[0.0, 0.25, 0.5, 0.9, 1.0] {
            let g = contraction_factor_cross_section(e, &lin).unwrap();
            assert!((g - ((3.0 + e * e) / 4.0 + (1.0 - e * e) / 12.0)).abs() < 1e-10);
        }
        assert!((contraction_factor_cross_section(1.0, &lin).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_kernel_rejected() {
        let err = CrossSection::from_density("half", |c| (1.0 + c) / (8.0 * PI)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn table_is_renormalized() {
        // b = 1 everywhere has mass 4π; the loader scales it down
        let xs = CrossSection::parse_table("# cos b\n-1 1\n0 1\n1 1\n").unwrap();
        assert!((xs.normalization_residual() - (4.0 * PI - 1.0)).abs() < 1e-12);
        assert!((xs.density(0.3) - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(xs.mean_cosine().abs() < 1e-12);
        assert!(CrossSection::parse_table("-1 1\n0.5 1\n").is_err());
        assert!(CrossSection::parse_table("-1 1\n1 x\n").is_err());
    }

    #[test]
    fn kac_rate_values() {
        assert_eq!(kac_rate(0.0).unwrap(), 0.0);
        assert!((kac_rate(1.0).unwrap() - 0.125).abs() < 1e-10);
        let big = kac_rate(200.0).unwrap();
        assert!(big < 0.5 && big > 0.45);
        assert!(kac_rate(-0.5).is_err());
        let kp = KacParams::new(0.0).unwrap();
        assert!(kp.is_elastic());
    }

    #[test]
    fn sampled_sigma_is_unit() {
        let mut rng = stream_rng(11, 0);
        let lin = linear_kernel();
        let k = vec3::scale(&[1.0, -2.0, 0.5], 1.0 / (5.25f64).sqrt());
        for _ in 0..1000 {
            let s = sample_sigma(&k, &lin, &mut rng).unwrap();
            assert!((vec3::norm(&s) - 1.0).abs() < 1e-12);
        }
    }
}
