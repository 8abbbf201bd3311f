//! Stochastic particle integration of the homogeneous, diffusive,
//! self-similar, unit-rate cross-section and Kac equations.
//!
//! Every step draws `Poisson(N · rate · dτ / 2)` collision events. Each event
//! picks `i` and `j` independently and uniformly (so `i == j` happens with
//! probability `1/N` and is a no-op, exactly as in the product measure
//! `f̂ ⊗ f̂`) and replaces both partners by their post-collision velocities.
//! Every particle therefore collides at rate `rate`, and total momentum is
//! conserved event by event in the 3D models.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::collision::{
    collide, frame_from_axis, kac_post_collision, sigma_in_frame, CrossSection, KacParams, ModelParams,
};
use crate::ensemble::{InitialRecipe, VelocityEnsemble};
use crate::error::{Error, Result};
use crate::moments::moments_of;
use crate::rng::{stream_rng, SimRng};
use crate::transport::{sphere::uniform_direction, w2_exact_1d, w2_exact_assignment, w2_to_dirac};
use crate::vec3;

/// Upper bound on `dτ · (per-particle collision rate)`.
pub const MAX_EVENTS_PER_STEP: f64 = 0.1;

/// Lower clamp on the temperature inside the thermostat coefficient.
pub const THETA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Equation {
    /// `∂f/∂τ = E Q(f, f)`.
    Homogeneous,
    /// Homogeneous collisions plus velocity diffusion.
    Diffusive,
    /// Homogeneous step followed by renormalization to zero mean and unit temperature.
    SelfSimilar,
    /// `∂f/∂τ = Q⁺(f, f) - f` with a general angular kernel.
    CrossSection,
    /// Inelastic Kac model in 1D.
    Kac,
}

impl Equation {
    pub fn name(&self) -> &'static str {
        match self {
            Equation::Homogeneous => "homogeneous",
            Equation::Diffusive => "diffusive",
            Equation::SelfSimilar => "selfsimilar",
            Equation::CrossSection => "cross-section",
            Equation::Kac => "kac",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "homogeneous" => Equation::Homogeneous,
            "diffusive" => Equation::Diffusive,
            "selfsimilar" | "self-similar" => Equation::SelfSimilar,
            "cross-section" | "cross_section" => Equation::CrossSection,
            "kac" => Equation::Kac,
            other => return Err(Error::config(format!("unknown equation family {other:?}"))),
        })
    }

    pub fn dimension(&self) -> usize {
        if *self == Equation::Kac {
            1
        } else {
            3
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Physics {
    Boltzmann(ModelParams),
    Kac(KacParams),
}

/// A validated simulation setup.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub equation: Equation,
    pub physics: Physics,
    pub cross_section: CrossSection,
    pub dtau: f64,
    pub seed: u64,
    pub n: usize,
}

impl SimConfig {
    pub fn new(
        equation: Equation,
        physics: Physics,
        cross_section: CrossSection,
        dtau: f64,
        seed: u64,
        n: usize,
    ) -> Result<Self> {
        match (&equation, &physics) {
            (Equation::Kac, Physics::Kac(_)) => {}
            (Equation::Kac, _) => return Err(Error::config("kac family needs Kac parameters")),
            (_, Physics::Kac(_)) => {
                return Err(Error::config(format!("{} family needs 3D model parameters", equation.name())))
            }
            _ => {}
        }
        if n < 2 {
            return Err(Error::config(format!("collisional stepping needs N >= 2, got {n}")));
        }
        if !(dtau > 0.0 && dtau.is_finite()) {
            return Err(Error::config(format!("dtau must be positive, got {dtau}")));
        }
        let cfg = Self { equation, physics, cross_section, dtau, seed, n };
        let rate = cfg.collision_rate()?;
        if dtau * rate > MAX_EVENTS_PER_STEP * (1.0 + 1e-12) {
            return Err(Error::config(format!(
                "dtau * rate = {} exceeds the stability bound {MAX_EVENTS_PER_STEP}",
                dtau * rate
            )));
        }
        Ok(cfg)
    }

    /// Per-particle collision rate in scaled time.
    pub fn collision_rate(&self) -> Result<f64> {
        match (&self.equation, &self.physics) {
            (Equation::Kac, _) | (Equation::CrossSection, _) => Ok(1.0),
            (_, Physics::Boltzmann(p)) => p.big_e(),
            (_, Physics::Kac(_)) => unreachable!("checked at construction"),
        }
    }

    pub fn dimension(&self) -> usize {
        self.equation.dimension()
    }

    pub fn model(&self) -> Option<&ModelParams> {
        match &self.physics {
            Physics::Boltzmann(p) => Some(p),
            Physics::Kac(_) => None,
        }
    }
}

fn event_count<R: Rng + ?Sized>(n: usize, rate: f64, dtau: f64, rng: &mut R) -> u64 {
    let lambda = 0.5 * n as f64 * rate * dtau;
    if lambda <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(lambda).expect("positive finite intensity");
    let k: f64 = dist.sample(rng);
    k as u64
}

/// Runs the 3D collision events of one step at the given per-particle rate.
fn collide_3d<R: Rng + ?Sized>(
    ens: &mut VelocityEnsemble,
    e: f64,
    xs: &CrossSection,
    rate: f64,
    dtau: f64,
    rng: &mut R,
) -> Result<()> {
    if ens.dim() != 3 {
        return Err(Error::DimensionMismatch(3, ens.dim()));
    }
    let n = ens.len();
    if n < 2 {
        return Err(Error::config("collisional stepping needs N >= 2"));
    }
    let events = event_count(n, rate, dtau, rng);
    let vel = ens.velocities_mut();
    for _ in 0..events {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let v = [vel[3 * i], vel[3 * i + 1], vel[3 * i + 2]];
        let w = [vel[3 * j], vel[3 * j + 1], vel[3 * j + 2]];
        let sigma = if xs.is_constant() {
            uniform_direction(rng)
        } else {
            let u = vec3::sub(&v, &w);
            let speed = vec3::norm(&u);
            if speed == 0.0 {
                continue;
            }
            let k = vec3::scale(&u, 1.0 / speed);
            sigma_in_frame(&frame_from_axis(&k)?, xs, rng)
        };
        let (vp, wp) = collide(&v, &w, &sigma, e);
        vel[3 * i..3 * i + 3].copy_from_slice(&vp);
        vel[3 * j..3 * j + 3].copy_from_slice(&wp);
    }
    Ok(())
}

fn finish_step(ens: &mut VelocityEnsemble, dtau: f64) {
    ens.time += dtau;
    ens.generation += 1;
}

/// One step of `∂f/∂τ = E Q(f, f)`.
pub fn step_homogeneous<R: Rng + ?Sized>(
    ens: &mut VelocityEnsemble,
    params: &ModelParams,
    xs: &CrossSection,
    dtau: f64,
    rng: &mut R,
) -> Result<()> {
    let rate = params.big_e()?;
    collide_3d(ens, params.e, xs, rate, dtau, rng)?;
    finish_step(ens, dtau);
    Ok(())
}

/// One step of the thermostatted equation: homogeneous collisions, then
/// Gaussian kicks of per-component variance `2 Θ² dτ` with
/// `Θ² = (E A / B) max(θ, θ_floor)^{p - 1/2}` measured after the collisions.
pub fn step_diffusive<R: Rng + ?Sized>(
    ens: &mut VelocityEnsemble,
    params: &ModelParams,
    xs: &CrossSection,
    dtau: f64,
    rng: &mut R,
) -> Result<()> {
    let e_big = params.big_e()?;
    collide_3d(ens, params.e, xs, e_big, dtau, rng)?;
    if params.a > 0.0 {
        let theta = ens.theta().max(THETA_FLOOR);
        let big_theta2 = e_big * params.a / params.b * theta.powf(params.p_diff - 0.5);
        let sd = (2.0 * big_theta2 * dtau).sqrt();
        let noise = Normal::new(0.0, sd).map_err(|e| Error::Internal(e.to_string()))?;
        for x in ens.velocities_mut() {
            *x += noise.sample(rng);
        }
    }
    finish_step(ens, dtau);
    Ok(())
}

/// One step of the self-similar equation: a homogeneous step followed by
/// recentering and rescaling to unit temperature.
pub fn step_selfsimilar<R: Rng + ?Sized>(
    ens: &mut VelocityEnsemble,
    params: &ModelParams,
    xs: &CrossSection,
    dtau: f64,
    rng: &mut R,
) -> Result<()> {
    step_homogeneous(ens, params, xs, dtau, rng)?;
    renormalize(ens)
}

fn renormalize(ens: &mut VelocityEnsemble) -> Result<()> {
    let zero = vec![0.0; ens.dim()];
    ens.normalize(&zero, 1.0)
        .map_err(|_| Error::config("self-similar rescaling impossible: the ensemble has collapsed"))
}

/// One step of `∂f/∂τ = Q⁺(f, f) - f` (unit collision rate, no `E` scaling).
pub fn step_cross_section<R: Rng + ?Sized>(
    ens: &mut VelocityEnsemble,
    params: &ModelParams,
    xs: &CrossSection,
    dtau: f64,
    rng: &mut R,
) -> Result<()> {
    collide_3d(ens, params.e, xs, 1.0, dtau, rng)?;
    finish_step(ens, dtau);
    Ok(())
}

/// One step of the inelastic Kac equation at unit rate.
pub fn step_kac<R: Rng + ?Sized>(
    ens: &mut VelocityEnsemble,
    kacp: &KacParams,
    dtau: f64,
    rng: &mut R,
) -> Result<()> {
    if ens.dim() != 1 {
        return Err(Error::DimensionMismatch(1, ens.dim()));
    }
    let n = ens.len();
    if n < 2 {
        return Err(Error::config("collisional stepping needs N >= 2"));
    }
    let events = event_count(n, 1.0, dtau, rng);
    let vel = ens.velocities_mut();
    for _ in 0..events {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        if i == j {
            continue;
        }
        let (a, b) = kac_post_collision(vel[i], vel[j], theta, kacp.p_inel);
        vel[i] = a;
        vel[j] = b;
    }
    finish_step(ens, dtau);
    Ok(())
}

/// Advances `ens` by `dtau` under the configured equation.
pub fn step<R: Rng + ?Sized>(ens: &mut VelocityEnsemble, cfg: &SimConfig, dtau: f64, rng: &mut R) -> Result<()> {
    let xs = &cfg.cross_section;
    match (&cfg.equation, &cfg.physics) {
        (Equation::Kac, Physics::Kac(k)) => step_kac(ens, k, dtau, rng),
        (Equation::Homogeneous, Physics::Boltzmann(p)) => step_homogeneous(ens, p, xs, dtau, rng),
        (Equation::Diffusive, Physics::Boltzmann(p)) => step_diffusive(ens, p, xs, dtau, rng),
        (Equation::SelfSimilar, Physics::Boltzmann(p)) => step_selfsimilar(ens, p, xs, dtau, rng),
        (Equation::CrossSection, Physics::Boltzmann(p)) => step_cross_section(ens, p, xs, dtau, rng),
        _ => Err(Error::config("equation family and parameters disagree")),
    }
}

/// Scaled time `τ(t) = ln(1 + (1 - e²) B sqrt(θ0) t / 8)` along Haff's law.
pub fn tau_of_t(t: f64, theta0: f64, params: &ModelParams) -> Result<f64> {
    let c = time_change_rate(theta0, params)?;
    if !(t >= 0.0) {
        return Err(Error::arg(format!("time must be nonnegative, got {t}")));
    }
    Ok((c * t).ln_1p())
}

/// Inverse of [`tau_of_t`].
pub fn t_of_tau(tau: f64, theta0: f64, params: &ModelParams) -> Result<f64> {
    let c = time_change_rate(theta0, params)?;
    if !(tau >= 0.0) {
        return Err(Error::arg(format!("scaled time must be nonnegative, got {tau}")));
    }
    Ok(tau.exp_m1() / c)
}

fn time_change_rate(theta0: f64, params: &ModelParams) -> Result<f64> {
    params.big_e()?;
    if !(theta0 > 0.0 && theta0.is_finite()) {
        return Err(Error::arg(format!("initial temperature must be positive, got {theta0}")));
    }
    Ok((1.0 - params.e * params.e) * params.b * theta0.sqrt() / 8.0)
}

/// An ensemble together with its configuration and private RNG stream.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: SimConfig,
    pub ensemble: VelocityEnsemble,
    rng: SimRng,
}

impl Simulation {
    /// Builds the initial ensemble from `recipe` on stream `stream` of the
    /// configuration's seed. The same stream continues into the dynamics.
    pub fn from_recipe(config: SimConfig, recipe: &InitialRecipe, stream: u64) -> Result<Self> {
        let mut rng = stream_rng(config.seed, stream);
        let ensemble = recipe.build(config.n, config.dimension(), &mut rng)?;
        Self::with_rng(config, ensemble, rng)
    }

    pub fn new(config: SimConfig, ensemble: VelocityEnsemble, stream: u64) -> Result<Self> {
        let rng = stream_rng(config.seed, stream);
        Self::with_rng(config, ensemble, rng)
    }

    fn with_rng(config: SimConfig, mut ensemble: VelocityEnsemble, rng: SimRng) -> Result<Self> {
        if ensemble.dim() != config.dimension() {
            return Err(Error::config(format!(
                "{} family is {}-dimensional but the ensemble has dimension {}",
                config.equation.name(),
                config.dimension(),
                ensemble.dim()
            )));
        }
        if ensemble.len() != config.n {
            return Err(Error::config(format!("ensemble has {} particles, config says {}", ensemble.len(), config.n)));
        }
        ensemble.seed = config.seed;
        if config.equation == Equation::SelfSimilar {
            renormalize(&mut ensemble)?;
        }
        Ok(Self { config, ensemble, rng })
    }

    /// Steps until the ensemble time reaches `target`; the last step is
    /// shortened to land on it.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let slop = 1e-12 * target.abs().max(1.0);
        while self.ensemble.time < target - slop {
            let h = self.config.dtau.min(target - self.ensemble.time);
            step(&mut self.ensemble, &self.config, h, &mut self.rng)?;
        }
        self.ensemble.time = self.ensemble.time.max(target);
        Ok(())
    }
}

/// One row of a paired run.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedRecord {
    pub tau: f64,
    pub w2: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub m4_a: f64,
    pub m4_b: f64,
    pub mean_a: Vec<f64>,
    pub mean_b: Vec<f64>,
}

/// Exact empirical `W2` between two same-size ensembles.
pub fn ensemble_distance(a: &VelocityEnsemble, b: &VelocityEnsemble) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    if let Some(p) = point_mass(b) {
        return w2_to_dirac(a.velocities(), a.dim(), p);
    }
    if let Some(p) = point_mass(a) {
        return w2_to_dirac(b.velocities(), b.dim(), p);
    }
    if a.dim() == 1 {
        w2_exact_1d(a.velocities(), b.velocities())
    } else {
        Ok(w2_exact_assignment(a.velocities(), b.velocities(), a.dim())?.0)
    }
}

fn point_mass(ens: &VelocityEnsemble) -> Option<&[f64]> {
    let first = ens.velocity(0);
    ens.velocities().chunks_exact(ens.dim()).all(|v| v == first).then_some(first)
}

/// Evolves two simulations side by side and records distance and moments at
/// each scheduled time.
pub fn run_paired(a: &mut Simulation, b: &mut Simulation, schedule: &[f64]) -> Result<Vec<PairedRecord>> {
    if a.config.equation != b.config.equation {
        return Err(Error::config(format!(
            "paired runs need one family, got {} and {}",
            a.config.equation.name(),
            b.config.equation.name()
        )));
    }
    if a.ensemble.dim() != b.ensemble.dim() || a.ensemble.len() != b.ensemble.len() {
        return Err(Error::config("paired ensembles must share dimension and size"));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("schedule must be strictly increasing"));
    }
    let mut out = Vec::with_capacity(schedule.len());
    for &tau in schedule {
        a.advance_to(tau)?;
        b.advance_to(tau)?;
        let ma = moments_of(a.ensemble.velocities(), a.ensemble.dim())?;
        let mb = moments_of(b.ensemble.velocities(), b.ensemble.dim())?;
        out.push(PairedRecord {
            tau,
            w2: ensemble_distance(&a.ensemble, &b.ensemble)?,
            theta_a: ma.theta,
            theta_b: mb.theta,
            m4_a: ma.m4,
            m4_b: mb.m4,
            mean_a: ma.mean,
            mean_b: mb.mean,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::cooling(0.5, 1.0).unwrap()
    }

    #[test]
    fn config_validation() {
        let xs = CrossSection::constant();
        let p = Physics::Boltzmann(params());
        assert!(SimConfig::new(Equation::Homogeneous, p, xs.clone(), 0.005, 1, 10).is_ok());
        // E = 32/3, so dtau = 0.01 breaks the 0.1 bound
        assert!(SimConfig::new(Equation::Homogeneous, p, xs.clone(), 0.01, 1, 10).is_err());
        assert!(SimConfig::new(Equation::Homogeneous, p, xs.clone(), 0.005, 1, 1).is_err());
        assert!(SimConfig::new(Equation::Kac, p, xs.clone(), 0.05, 1, 10).is_err());
        let elastic = Physics::Boltzmann(ModelParams::cooling(1.0, 1.0).unwrap());
        assert!(SimConfig::new(Equation::Homogeneous, elastic, xs.clone(), 0.005, 1, 10).is_err());
        assert!(SimConfig::new(Equation::CrossSection, elastic, xs, 0.05, 1, 10).is_ok());
    }

    #[test]
    fn monokinetic_is_fixed() {
        let mut ens = VelocityEnsemble::new([0.5, -1.0, 2.0].repeat(50), 3).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..20 {
            step_homogeneous(&mut ens, &params(), &CrossSection::constant(), 0.005, &mut rng).unwrap();
        }
        assert_eq!(ens.velocities(), [0.5, -1.0, 2.0].repeat(50).as_slice());
        assert_eq!(ens.generation, 20);
    }

    #[test]
    fn selfsimilar_renormalizes() {
        let cfg = SimConfig::new(
            Equation::SelfSimilar,
            Physics::Boltzmann(params()),
            CrossSection::constant(),
            0.005,
            3,
            500,
        )
        .unwrap();
        let recipe = InitialRecipe::UniformCube { mean: vec![1.0, 0.0, 0.0], theta: 2.0 };
        let mut sim = Simulation::from_recipe(cfg, &recipe, 0).unwrap();
        sim.advance_to(0.2).unwrap();
        assert!((sim.ensemble.theta() - 1.0).abs() < 1e-12);
        assert!(sim.ensemble.mean().iter().all(|m| m.abs() < 1e-12));
        assert!((sim.ensemble.time - 0.2).abs() < 1e-12);
    }

    #[test]
    fn time_change_examples() {
        let e = 0.5;
        let p = ModelParams::cooling(e, 8.0 / (1.0 - e * e)).unwrap();
        assert_eq!(tau_of_t(0.0, 1.0, &p).unwrap(), 0.0);
        let tau = tau_of_t(std::f64::consts::E - 1.0, 1.0, &p).unwrap();
        assert!((tau - 1.0).abs() < 1e-15);
        assert!(tau_of_t(-1.0, 1.0, &p).is_err());
        let elastic = ModelParams::cooling(1.0, 1.0).unwrap();
        assert!(tau_of_t(1.0, 1.0, &elastic).is_err());
    }

    #[test]
    fn paired_identical_runs_have_zero_distance() {
        let cfg = SimConfig::new(
            Equation::Homogeneous,
            Physics::Boltzmann(params()),
            CrossSection::constant(),
            0.005,
            9,
            100,
        )
        .unwrap();
        let recipe = InitialRecipe::Gaussian { mean: vec![0.0; 3], theta: 1.0 };
        let mut a = Simulation::from_recipe(cfg.clone(), &recipe, 0).unwrap();
        let mut b = Simulation::from_recipe(cfg, &recipe, 0).unwrap();
        let rec = run_paired(&mut a, &mut b, &[0.0, 0.1, 0.2]).unwrap();
        assert!(rec.iter().all(|r| r.w2 == 0.0));
        assert!(run_paired(&mut a, &mut b, &[0.3, 0.3]).is_err());
    }
}
