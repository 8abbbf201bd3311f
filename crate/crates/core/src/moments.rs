//! Moment observables, Haff's cooling law, and the fourth-moment calculus for
//! the energy-conserving self-similar equation.

use std::io::Write;

use crate::collision::{big_e, ModelParams};
use crate::error::{Error, Result};
use crate::numeric::{ksum, KahanSum};

/// Componentwise compensated mean of a flat point buffer.
pub fn mean_of(points: &[f64], dim: usize) -> Vec<f64> {
    let n = (points.len() / dim).max(1) as f64;
    (0..dim).map(|c| ksum(points.iter().skip(c).step_by(dim).copied()) / n).collect()
}

/// Temperature: centered second moment divided by the dimension.
pub fn temperature(points: &[f64], dim: usize) -> f64 {
    let n = points.len() / dim;
    if n == 0 {
        return 0.0;
    }
    let m = mean_of(points, dim);
    let mut acc = KahanSum::new();
    for v in points.chunks_exact(dim) {
        for c in 0..dim {
            let d = v[c] - m[c];
            acc.add(d * d);
        }
    }
    acc.value() / (n * dim) as f64
}

/// Moments of an equal-weight ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub mean: Vec<f64>,
    pub theta: f64,
    /// Centered second-moment matrix, row-major `d × d`.
    pub p: Vec<f64>,
    pub m2: f64,
    /// Centered `E|v - <v>|⁴`.
    pub m4: f64,
    /// `Σ_ij P_ij²`.
    pub m2bar: f64,
}

impl MomentState {
    /// Zero-mean isotropic state with `P = (m2/3) I` in 3D.
    pub fn isotropic(m2: f64, m4: f64) -> Self {
        let q = m2 / 3.0;
        Self {
            mean: vec![0.0; 3],
            theta: q,
            p: vec![q, 0.0, 0.0, 0.0, q, 0.0, 0.0, 0.0, q],
            m2,
            m4,
            m2bar: m2 * m2 / 3.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub const CSV_HEADER: &'static str = "theta,m2,m4,m2bar,mean";

    /// One CSV row matching [`MomentState::CSV_HEADER`]; the mean vector is
    /// space-separated inside its column.
    pub fn csv_row(&self) -> String {
        let mean: Vec<String> = self.mean.iter().map(|x| format!("{x:e}")).collect();
        format!("{:e},{:e},{:e},{:e},{}", self.theta, self.m2, self.m4, self.m2bar, mean.join(" "))
    }
}

pub fn moments_of(points: &[f64], dim: usize) -> Result<MomentState> {
    if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
        return Err(Error::arg("moments need a nonempty ensemble"));
    }
    let n = (points.len() / dim) as f64;
    let mean = mean_of(points, dim);
    let mut p_acc = vec![KahanSum::new(); dim * dim];
    let mut m4_acc = KahanSum::new();
    let mut d = [0.0f64; 3];
    for v in points.chunks_exact(dim) {
        let mut r2 = 0.0;
        for c in 0..dim {
            d[c] = v[c] - mean[c];
            r2 += d[c] * d[c];
        }
        for a in 0..dim {
            for b in a..dim {
                p_acc[a * dim + b].add(d[a] * d[b]);
            }
        }
        m4_acc.add(r2 * r2);
    }
    let mut p = vec![0.0; dim * dim];
    for a in 0..dim {
        for b in a..dim {
            let x = p_acc[a * dim + b].value() / n;
            p[a * dim + b] = x;
            p[b * dim + a] = x;
        }
    }
    let m2 = (0..dim).map(|a| p[a * dim + a]).sum::<f64>();
    let m2bar = ksum(p.iter().map(|x| x * x));
    Ok(MomentState { mean, theta: m2 / dim as f64, p, m2, m4: m4_acc.value() / n, m2bar })
}

/// Haff's law value; `elastic` flags `e = 1`, where nothing cools.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaffTheta {
    pub theta: f64,
    pub elastic: bool,
}

/// `θ(t) = (θ0^{-1/2} + (1 - e²) B t / 8)^{-2}`.
pub fn haff_theta(t: f64, theta0: f64, params: &ModelParams) -> Result<HaffTheta> {
    if !(t >= 0.0) {
        return Err(Error::arg(format!("time must be nonnegative, got {t}")));
    }
    if !(theta0 > 0.0) {
        return Err(Error::arg(format!("initial temperature must be positive, got {theta0}")));
    }
    if params.is_elastic() {
        return Ok(HaffTheta { theta: theta0, elastic: true });
    }
    let c = (1.0 - params.e * params.e) * params.b / 8.0;
    let x = 1.0 + c * t * theta0.sqrt();
    Ok(HaffTheta { theta: theta0 / (x * x), elastic: false })
}

/// Coefficients of the quartic collision moment, all functions of
/// `ε = (1 - e)/2` (with `ε' = 1 - ε`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixCoefficients {
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub mu1: f64,
    pub mu2: f64,
}

pub fn appendix_coefficients(e: f64) -> Result<AppendixCoefficients> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::arg(format!("restitution e must lie in [0, 1], got {e}")));
    }
    let eps = 0.5 * (1.0 - e);
    let epsp = 1.0 - eps;
    let (e2, ep2) = (eps * eps, epsp * epsp);
    let s = e2 + ep2;
    let alpha = s * s - 1.0 + 4.0 / 3.0 * e2 * ep2;
    let beta = 2.0 * (s - 1.0 + 2.0 / 3.0 * ep2);
    let gamma = 4.0 * (e2 - 1.0);
    Ok(AppendixCoefficients {
        eps,
        alpha,
        beta,
        gamma,
        lambda: -(alpha + beta + gamma) / 8.0,
        mu1: (alpha + beta - gamma) / 8.0,
        mu2: (alpha - beta) / 4.0,
    })
}

/// `λ = (1 + 4ε - 7ε² + 4ε³ - 2ε⁴) / 3`.
pub fn lambda_quartic(eps: f64) -> f64 {
    (1.0 + eps * (4.0 + eps * (-7.0 + eps * (4.0 - 2.0 * eps)))) / 3.0
}

/// `4 - Eλ = 2 (-1 + 2ε + ε² - 4ε³ + 2ε⁴) / (3 ε (1 - ε))`, for `0 < e < 1`.
pub fn growth_rate_m4(e: f64) -> Result<f64> {
    big_e(e)?;
    let eps = 0.5 * (1.0 - e);
    let poly = -1.0 + eps * (2.0 + eps * (1.0 + eps * (-4.0 + 2.0 * eps)));
    Ok(2.0 * poly / (3.0 * eps * (1.0 - eps)))
}

/// `dm4/dτ = (4 - Eλ) m4 + E (μ1 m2² + μ2 m̄2²)`.
pub fn m4_rhs(ms: &MomentState, params: &ModelParams) -> Result<f64> {
    let e_big = params.big_e()?;
    let c = appendix_coefficients(params.e)?;
    Ok((4.0 - e_big * c.lambda) * ms.m4 + e_big * (c.mu1 * ms.m2 * ms.m2 + c.mu2 * ms.m2bar))
}

/// Fixed point of the fourth-moment equation for fixed `m2`, `m̄2²`.
pub fn m4_fixed_point(ms: &MomentState, params: &ModelParams) -> Result<f64> {
    let e_big = params.big_e()?;
    let c = appendix_coefficients(params.e)?;
    Ok(e_big * (c.mu1 * ms.m2 * ms.m2 + c.mu2 * ms.m2bar) / (e_big * c.lambda - 4.0))
}

/// Closed-form solution `m4* + (m4(0) - m4*) exp((4 - Eλ) τ)`.
pub fn m4_closed_form(ms0: &MomentState, params: &ModelParams, tau: f64) -> Result<f64> {
    let star = m4_fixed_point(ms0, params)?;
    let rate = growth_rate_m4(params.e)?;
    Ok(star + (ms0.m4 - star) * (rate * tau).exp())
}

/// One point of an `m4` trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M4Point {
    pub tau: f64,
    pub m4: f64,
    pub m2: f64,
    pub m2bar: f64,
}

/// Classical fourth-order Runge-Kutta integration of the `m4` equation with
/// `m2` and `m̄2²` frozen at their initial values.
pub fn integrate_m4(ms0: &MomentState, params: &ModelParams, tau_end: f64, dtau: f64) -> Result<Vec<M4Point>> {
    if !(dtau > 0.0 && dtau <= 0.01) {
        return Err(Error::arg(format!("m4 integration step must lie in (0, 0.01], got {dtau}")));
    }
    if !(tau_end >= 0.0 && tau_end.is_finite()) {
        return Err(Error::arg(format!("end time must be nonnegative, got {tau_end}")));
    }
    let e_big = params.big_e()?;
    let c = appendix_coefficients(params.e)?;
    let a = 4.0 - e_big * c.lambda;
    let src = e_big * (c.mu1 * ms0.m2 * ms0.m2 + c.mu2 * ms0.m2bar);
    let f = |m: f64| a * m + src;
    let steps = (tau_end / dtau).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { tau_end / steps as f64 };
    let mut m = ms0.m4;
    let point = |k: usize, m: f64| M4Point { tau: k as f64 * h, m4: m, m2: ms0.m2, m2bar: ms0.m2bar };
    let mut out = vec![point(0, m)];
    for k in 1..=steps {
        let k1 = f(m);
        let k2 = f(m + 0.5 * h * k1);
        let k3 = f(m + 0.5 * h * k2);
        let k4 = f(m + h * k3);
        m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(point(k, m));
    }
    Ok(out)
}

/// Trajectory CSV with header `tau,m4,m2,m2bar`.
pub fn write_m4_csv<W: Write>(traj: &[M4Point], mut out: W) -> std::io::Result<()> {
    writeln!(out, "tau,m4,m2,m2bar")?;
    for p in traj {
        writeln!(out, "{:e},{:e},{:e},{:e}", p.tau, p.m4, p.m2, p.m2bar)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monokinetic_moments_vanish() {
        let pts = [1.0, 2.0, 3.0].repeat(5);
        let ms = moments_of(&pts, 3).unwrap();
        assert_eq!(ms.mean, vec![1.0, 2.0, 3.0]);
        assert_eq!((ms.theta, ms.m4, ms.m2bar), (0.0, 0.0, 0.0));
        assert!(ms.p.iter().all(|&x| x == 0.0));
        assert!(moments_of(&[], 3).is_err());
    }

    #[test]
    fn moment_invariants_on_small_cloud() {
        let pts = [1.0, 0.0, 0.0, -1.0, 2.0, 0.5, 0.0, -2.0, 0.5, 3.0, 1.0, -1.0];
        let ms = moments_of(&pts, 3).unwrap();
        assert!((ms.m2 - 3.0 * ms.theta).abs() < 1e-12);
        assert!(ms.m4 >= ms.m2 * ms.m2 / 3.0);
        assert!(ms.m2bar >= ms.m2 * ms.m2 / 3.0 - 1e-12);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(ms.p[a * 3 + b], ms.p[b * 3 + a]);
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let c = appendix_coefficients(1.0).unwrap();
        assert_eq!(c.alpha, 0.0);
        assert!((c.beta - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.gamma, -4.0);
        assert!((c.lambda - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.mu1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.mu2 + 1.0 / 3.0).abs() < 1e-15);
        let c = appendix_coefficients(0.0).unwrap();
        assert!((c.lambda - 13.0 / 24.0).abs() < 1e-15);
        assert!((lambda_quartic(0.5) - 13.0 / 24.0).abs() < 1e-15);
        assert!(appendix_coefficients(1.5).is_err());
    }

    #[test]
    fn growth_rate_matches_coefficients() {
        for &e in &[0.1, 0.5, 0.9, 0.999] {
            let c = appendix_coefficients(e).unwrap();
            let direct = 4.0 - big_e(e).unwrap() * c.lambda;
            assert!((growth_rate_m4(e).unwrap() - direct).abs() < 1e-9 * direct.abs().max(1.0));
            assert!(direct < 0.0);
        }
        assert!(growth_rate_m4(1.0).is_err());
    }

    #[test]
    fn rhs_vanishes_at_fixed_point() {
        let p = ModelParams::cooling(0.5, 1.0).unwrap();
        let star = m4_fixed_point(&MomentState::isotropic(3.0, 0.0), &p).unwrap();
        assert!((star - 19.285714285714285).abs() < 1e-9);
        let ms = MomentState::isotropic(3.0, star);
        assert!(m4_rhs(&ms, &p).unwrap().abs() < 1e-12);
        assert_eq!(m4_rhs(&MomentState::isotropic(0.0, 0.0), &p).unwrap(), 0.0);
    }

    #[test]
    fn haff_examples() {
        let e = 0.5;
        let p = ModelParams::cooling(e, 8.0 / (1.0 - e * e)).unwrap();
        assert_eq!(haff_theta(0.0, 2.0, &p).unwrap().theta, 2.0);
        assert!((haff_theta(1.0, 1.0, &p).unwrap().theta - 0.25).abs() < 1e-15);
        let elastic = ModelParams::cooling(1.0, 1.0).unwrap();
        assert!(haff_theta(5.0, 2.0, &elastic).unwrap().elastic);
        assert!(haff_theta(-1.0, 1.0, &p).is_err());
    }

    #[test]
    fn csv_formats() {
        let ms = MomentState::isotropic(3.0, 15.0);
        assert_eq!(ms.csv_row(), "1e0,3e0,1.5e1,3e0,0e0 0e0 0e0");
        let mut buf = Vec::new();
        write_m4_csv(&[M4Point { tau: 0.0, m4: 15.0, m2: 3.0, m2bar: 3.0 }], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "tau,m4,m2,m2bar\n0e0,1.5e1,3e0,3e0\n");
    }
}
