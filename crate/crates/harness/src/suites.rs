//! Verification suites.
//!
//! Each experiment function appends checks (and optionally time series) to a
//! report. Statistical checks carry a slack of three times the empirical
//! self-distance, i.e. the exact `W2` between two independent replicas of the
//! same law at the same `N` and `τ`, measured inside the same run.

use std::f64::consts::PI;

use granot_core::collision::{
    contraction_factor_cross_section, contraction_factor_gain, kac_rate, sample_gain, CrossSection, KacParams,
    ModelParams,
};
use granot_core::dynamics::{ensemble_distance, t_of_tau, tau_of_t, Equation, Physics, SimConfig, Simulation};
use granot_core::ensemble::{InitialRecipe, VelocityEnsemble};
use granot_core::moments::{
    appendix_coefficients, growth_rate_m4, haff_theta, lambda_quartic, m4_closed_form, m4_fixed_point, moments_of,
};
use granot_core::numeric::{fitted_slope, integrate};
use granot_core::rng::{stream_id, stream_rng, SimRng};
use granot_core::transport::sphere::{circle_cost_bound, sphere_transport_map, uniform_direction, CircleSpec, SphereMap, SphereSpec};
use granot_core::transport::{scale_points, w2_discrete_lp, w2_exact_1d, w2_exact_assignment, DiscreteMeasure};
use granot_core::vec3::{self, Vec3};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Scale};
use crate::error::{HarnessError, Result};
use crate::report::{Check, Series, SeriesRow, VerificationReport};

pub const SUITES: [&str; 8] = ["gain", "flow", "diffusive", "cross-section", "kac", "moments", "lemmas", "all"];

/// Multiplier applied to the measured self-distance.
pub const SLACK_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Settings {
    pub seed: u64,
    pub scale: Scale,
}

impl Settings {
    fn pick<T>(&self, desk: T, quick: T) -> T {
        match self.scale {
            Scale::Desk => desk,
            Scale::Quick => quick,
        }
    }

    fn rng(&self, trial: u64, role: u16) -> SimRng {
        stream_rng(self.seed, stream_id(trial, role))
    }
}

// role tags: high byte per experiment, low byte per ensemble
const ROLE_TRANSPORT: u16 = 0x100;
const ROLE_SPHERE: u16 = 0x200;
const ROLE_GAIN: u16 = 0x300;
const ROLE_TEMPERATURE: u16 = 0x400;
const ROLE_FLOW: u16 = 0x500;
const ROLE_DIFFUSIVE: u16 = 0x600;
const ROLE_KAC: u16 = 0x700;
const ROLE_MOMENTS: u16 = 0x800;
const ROLE_COOLING: u16 = 0x900;
const ROLE_CROSS: u16 = 0xa00;

fn gaussian(mean: &[f64], theta: f64) -> InitialRecipe {
    InitialRecipe::Gaussian { mean: mean.to_vec(), theta }
}

fn cube(mean: &[f64], theta: f64) -> InitialRecipe {
    InitialRecipe::UniformCube { mean: mean.to_vec(), theta }
}

/// Time step at a fixed fraction of the stability bound.
fn dtau_for(rate: f64, fraction: f64) -> f64 {
    fraction * granot_core::dynamics::MAX_EVENTS_PER_STEP / rate
}

fn boltzmann(equation: Equation, params: ModelParams, xs: CrossSection, dtau: f64, seed: u64, n: usize) -> Result<SimConfig> {
    Ok(SimConfig::new(equation, Physics::Boltzmann(params), xs, dtau, seed, n)?)
}

fn max_rel_dev(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs.into_iter().map(|(m, e)| (m / e - 1.0).abs()).fold(0.0, f64::max)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared cost of the best permutation, by exhaustive search.
fn brute_force_cost(x: &[f64], y: &[f64], dim: usize) -> f64 {
    fn go(i: usize, n: usize, used: &mut [bool], acc: f64, best: &mut f64, cost: &dyn Fn(usize, usize) -> f64) {
        if i == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                go(i + 1, n, used, acc + cost(i, j), best, cost);
                used[j] = false;
            }
        }
    }
    let n = x.len() / dim;
    let cost = |i: usize, j: usize| sq_dist(&x[i * dim..(i + 1) * dim], &y[j * dim..(j + 1) * dim]);
    let mut best = f64::INFINITY;
    go(0, n, &mut vec![false; n], 0.0, &mut best, &cost);
    best / n as f64
}

fn random_points(rng: &mut SimRng, n: usize, dim: usize) -> Vec<f64> {
    (0..n * dim).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn random_vec3(rng: &mut SimRng, half: f64) -> Vec3 {
    [rng.random_range(-half..half), rng.random_range(-half..half), rng.random_range(-half..half)]
}

fn w2(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(w2_exact_assignment(x, y, 3)?.0)
}

/// Analytic constants: contraction factors, Kac rate and the quartic moment
/// coefficients. No statistical slack.
pub fn constants(_s: &Settings, report: &mut VerificationReport) -> Result<()> {
    report.checks.push(Check::equal("gain factor at e=1", contraction_factor_gain(1.0)?, 1.0, 0.0));
    let flat = CrossSection::from_density("flat", |_| 1.0 / (4.0 * PI))?;
    let mut worst: f64 = 0.0;
    for k in 0..=20 {
        let e = k as f64 / 20.0;
        worst = worst.max((contraction_factor_cross_section(e, &flat)? - (3.0 + e * e) / 4.0).abs());
    }
    report.checks.push(Check::at_most("gamma_b for constant b by quadrature", worst, 0.0, 1e-10));
    report.checks.push(Check::equal("kac rate at p=1", kac_rate(1.0)?, 0.125, 1e-10));
    report.checks.push(Check::equal("lambda at e=1", appendix_coefficients(1.0)?.lambda, 1.0 / 3.0, 1e-12));

    let mut rng = stream_rng(0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let e: f64 = rng.random_range(0.0..1.0);
        let c = appendix_coefficients(e)?;
        worst = worst.max((lambda_quartic(c.eps) + (c.alpha + c.beta + c.gamma) / 8.0).abs());
    }
    report.checks.push(Check::at_most("lambda polynomial vs -(alpha+beta+gamma)/8", worst, 0.0, 1e-12));

    let mut top = f64::NEG_INFINITY;
    for k in 1..=1000 {
        top = top.max(growth_rate_m4(k as f64 / 1001.0)?);
    }
    let mut c = Check::at_most("4 - E lambda < 0 on 1000 points", top, 0.0, 0.0);
    c.pass = top < 0.0;
    report.checks.push(c);
    Ok(())
}

/// Exactness of the transport engine against independent oracles.
pub fn transport(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let per_dim = s.pick(100, 20);
    for dim in 1..=3usize {
        let mut rng = s.rng(dim as u64, ROLE_TRANSPORT);
        let mut worst: f64 = 0.0;
        for k in 0..per_dim {
            let n = 2 + k % 5;
            let x = random_points(&mut rng, n, dim);
            let y = random_points(&mut rng, n, dim);
            let got = w2_exact_assignment(&x, &y, dim)?.0.powi(2);
            let best = brute_force_cost(&x, &y, dim);
            worst = worst.max((got - best).abs() / best.max(1e-300));
        }
        report.checks.push(Check::at_most(format!("assignment vs brute force d={dim}"), worst, 0.0, 1e-12));
    }

    let mut rng = s.rng(0, ROLE_TRANSPORT | 0x10);
    let n1 = s.pick(500, 100);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let x = random_points(&mut rng, n1, 1);
        let y: Vec<f64> = random_points(&mut rng, n1, 1).iter().map(|v| v * v * v + 0.5).collect();
        let a = w2_exact_1d(&x, &y)?;
        let b = w2_exact_assignment(&x, &y, 1)?.0;
        worst = worst.max((a - b).abs() / b.max(1e-300));
    }
    report.checks.push(Check::at_most("1D sorted vs assignment", worst, 0.0, 1e-12));

    let mut rng = s.rng(0, ROLE_TRANSPORT | 0x20);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let x = random_points(&mut rng, 200, 3);
        let y = random_points(&mut rng, 200, 3);
        let theta = rng.random_range(0.1..10.0);
        let d = w2(&x, &y)?;
        let ds = w2(&scale_points(&x, theta)?, &scale_points(&y, theta)?)?;
        worst = worst.max((ds * theta.sqrt() / d - 1.0).abs());
    }
    report.checks.push(Check::at_most("scaling W2(S x, S y) = W2(x, y)/sqrt(theta)", worst, 0.0, 1e-12));

    let mut rng = s.rng(0, ROLE_TRANSPORT | 0x30);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..100 {
        let dim = 2 + k % 2;
        let measure = |rng: &mut SimRng| -> Result<DiscreteMeasure> {
            let m = rng.random_range(1..=8);
            let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            Ok(DiscreteMeasure::new(random_points(rng, m, dim), w.iter().map(|x| x / total).collect(), dim)?)
        };
        let mu = measure(&mut rng)?;
        let nu = measure(&mut rng)?;
        let full = w2_discrete_lp(&mu, &nu)?.0.powi(2);
        let mut parts = 0.0;
        for axis in 0..dim {
            parts += w2_discrete_lp(&mu.marginal(axis)?, &nu.marginal(axis)?)?.0.powi(2);
        }
        worst = worst.max(parts - full);
    }
    report.checks.push(Check::at_most("sum of marginal W2^2 <= W2^2 (100 LPs)", worst, 0.0, 1e-12));
    Ok(())
}

/// Cost of a sphere coupling computed from its descriptor alone.
fn coupling_cost(map: &SphereMap, s: &SphereSpec) -> f64 {
    match *map {
        SphereMap::Translation { shift } => vec3::dot(&shift, &shift),
        SphereMap::Dilation { center, factor } => {
            let d = vec3::sub(&s.center, &center);
            (factor - 1.0).powi(2) * (vec3::dot(&d, &d) + s.radius * s.radius)
        }
        SphereMap::Collapse { target } => {
            let d = vec3::sub(&target, &s.center);
            vec3::dot(&d, &d) + s.radius * s.radius
        }
        SphereMap::Spread { target } => {
            let d = vec3::sub(&target.center, &s.center);
            vec3::dot(&d, &d) + target.radius * target.radius
        }
    }
}

/// Sphere and circle transport: analytic cost identity and empirical bounds.
pub fn spheres(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let mut rng = s.rng(0, ROLE_SPHERE);
    let (mut cost_dev, mut landing): (f64, f64) = (0.0, 0.0);
    for k in 0..100 {
        let r1 = if k % 10 == 0 { 0.0 } else { rng.random_range(0.1..3.0) };
        let r2 = match k % 10 {
            1 => 0.0,
            2 => r1,
            _ => rng.random_range(0.1..3.0),
        };
        let c2 = if k % 10 == 3 { [0.0; 3] } else { random_vec3(&mut rng, 2.0) };
        let src = SphereSpec::new([0.0; 3], r1)?;
        let dst = SphereSpec::new(c2, r2)?;
        let (map, cost) = sphere_transport_map(&src, &dst);
        let formula = vec3::dot(&c2, &c2) + (r2 - r1).powi(2);
        cost_dev = cost_dev.max((cost - formula).abs() / formula.max(1.0));
        cost_dev = cost_dev.max((coupling_cost(&map, &src) - formula).abs() / formula.max(1.0));
        for p in src.sample(10, &mut rng).chunks_exact(3) {
            if let Some(img) = map.apply(&[p[0], p[1], p[2]]) {
                let off = (vec3::norm(&vec3::sub(&img, &dst.center)) - dst.radius).abs();
                landing = landing.max(off / (1.0 + dst.radius));
            }
        }
    }
    report.checks.push(Check::at_most("sphere map cost = |dO|^2 + (dr)^2", cost_dev, 0.0, 1e-10));
    report.checks.push(Check::at_most("sphere map lands on target", landing, 0.0, 1e-10));

    let m = s.pick(2000, 200);
    let trials = s.pick(20u64, 3);
    let rows: Vec<Result<[Check; 2]>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = s.rng(t, ROLE_SPHERE | 1);
            let a = SphereSpec::new(random_vec3(&mut rng, 1.0), rng.random_range(0.5..2.0))?;
            let b = SphereSpec::new(random_vec3(&mut rng, 1.0), rng.random_range(0.5..2.0))?;
            let (_, cost) = sphere_transport_map(&a, &b);
            let (xa, xb, xa2) = (a.sample(m, &mut rng), b.sample(m, &mut rng), a.sample(m, &mut rng));
            let sphere = Check::at_most(
                format!("sphere W2 <= bound, trial {t}"),
                w2(&xa, &xb)?,
                cost.sqrt(),
                SLACK_FACTOR * w2(&xa, &xa2)?,
            );
            let ca = CircleSpec::new(random_vec3(&mut rng, 1.0), rng.random_range(0.5..2.0), uniform_direction(&mut rng))?;
            let cb = CircleSpec::new(random_vec3(&mut rng, 1.0), rng.random_range(0.5..2.0), uniform_direction(&mut rng))?;
            let (ya, yb, ya2) = (ca.sample(m, &mut rng), cb.sample(m, &mut rng), ca.sample(m, &mut rng));
            let circle = Check::at_most(
                format!("circle W2 <= bound, trial {t}"),
                w2(&ya, &yb)?,
                circle_cost_bound(&ca, &cb).sqrt(),
                SLACK_FACTOR * w2(&ya, &ya2)?,
            );
            Ok([sphere, circle])
        })
        .collect();
    for r in rows {
        report.checks.extend(r?);
    }
    Ok(())
}

/// Gain-operator contraction on Gaussian vs uniform-cube samples.
pub fn gain(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let n = s.pick(2000, 200);
    let trials = s.pick(5u64, 2);
    let restitutions = [0.2, 0.5, 0.9, 1.0];
    let zero = [0.0; 3];
    let xs = CrossSection::constant();
    let rows: Vec<Result<Vec<Check>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = s.rng(t, ROLE_GAIN);
            let f = gaussian(&zero, 1.0).build(n, 3, &mut rng)?;
            let g = cube(&zero, 3.0).build(n, 3, &mut rng)?;
            let d0 = w2(f.velocities(), g.velocities())?;
            let mut out = Vec::new();
            for &e in &restitutions {
                let qf = sample_gain(f.velocities(), e, &xs, n, &mut rng)?;
                let qg = sample_gain(g.velocities(), e, &xs, n, &mut rng)?;
                let qf2 = sample_gain(f.velocities(), e, &xs, n, &mut rng)?;
                out.push(Check::at_most(
                    format!("W2(Q+f, Q+g) <= sqrt((3+e^2)/4) W2(f, g), e={e}, trial {t}"),
                    w2(&qf, &qg)?,
                    contraction_factor_gain(e)? * d0,
                    SLACK_FACTOR * w2(&qf, &qf2)?,
                ));
            }
            Ok(out)
        })
        .collect();
    for r in rows {
        report.checks.extend(r?);
    }
    Ok(())
}

/// Temperature decay in scaled time, Haff's law in physical time, and the
/// time change itself.
pub fn temperature(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let n = s.pick(100_000, 5000);
    let params = ModelParams::cooling(0.5, 1.0)?;
    let dtau = dtau_for(params.big_e()?, 0.5);
    let cfg = boltzmann(Equation::Homogeneous, params, CrossSection::constant(), dtau, s.seed, n)?;
    let mut sim = Simulation::from_recipe(cfg, &gaussian(&[0.0; 3], 1.0), stream_id(0, ROLE_TEMPERATURE))?;
    let mut pairs = Vec::new();
    for k in 1..=12 {
        let tau = 0.25 * k as f64;
        sim.advance_to(tau)?;
        pairs.push((sim.ensemble.theta(), (-2.0 * tau).exp()));
    }
    report.checks.push(Check::at_most("theta(tau) = theta0 exp(-2 tau) up to tau=3", max_rel_dev(pairs), 0.0, 0.02));

    let params = ModelParams::cooling(0.5, 2.0)?;
    let theta0 = 1.5;
    let cfg = boltzmann(Equation::Homogeneous, params, CrossSection::constant(), dtau, s.seed, n)?;
    let mut sim = Simulation::from_recipe(cfg, &gaussian(&[0.0; 3], theta0), stream_id(1, ROLE_TEMPERATURE))?;
    let mut pairs = Vec::new();
    for t in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        sim.advance_to(tau_of_t(t, theta0, &params)?)?;
        pairs.push((sim.ensemble.theta(), haff_theta(t, theta0, &params)?.theta));
    }
    report.checks.push(Check::at_most("Haff's law in physical time", max_rel_dev(pairs), 0.0, 0.02));

    let mut rng = s.rng(2, ROLE_TEMPERATURE);
    let (mut trip, mut quad): (f64, f64) = (0.0, 0.0);
    for k in 0..100 {
        let p = ModelParams::cooling(rng.random_range(0.05..0.95), rng.random_range(0.2..5.0))?;
        let th0 = rng.random_range(0.1..10.0);
        let t = rng.random_range(0.0..100.0);
        let back = t_of_tau(tau_of_t(t, th0, &p)?, th0, &p)?;
        trip = trip.max((back - t).abs() / t.max(1.0));
        if k % 10 == 0 {
            let q = p.b / p.big_e()? * integrate(|x| haff_theta(x, th0, &p).unwrap().theta.sqrt(), 0.0, t, 1e-13);
            quad = quad.max((q - tau_of_t(t, th0, &p)?).abs());
        }
    }
    report.checks.push(Check::at_most("time change round trip", trip, 0.0, 1e-12));
    report.checks.push(Check::at_most("time change vs quadrature", quad, 0.0, 1e-10));
    Ok(())
}

/// Runs `a`, `b` and an independent replica of `a` over `schedule`, checking
/// `Ŵ2(a, b) <= bound(τ, Ŵ2(0)) + 3 Ŵ2(a, a')` at every record.
fn paired_with_replica(
    cfg: &SimConfig,
    recipe_a: &InitialRecipe,
    recipe_b: &InitialRecipe,
    roles: (u64, u16),
    schedule: &[f64],
    label: &str,
    bound: &dyn Fn(f64, f64) -> f64,
) -> Result<(Vec<Check>, Series)> {
    let (trial, role) = roles;
    let mut a = Simulation::from_recipe(cfg.clone(), recipe_a, stream_id(trial, role))?;
    let mut b = Simulation::from_recipe(cfg.clone(), recipe_b, stream_id(trial, role | 1))?;
    let mut r = Simulation::from_recipe(cfg.clone(), recipe_a, stream_id(trial, role | 2))?;
    let mut w0 = None;
    let mut checks = Vec::new();
    let mut series = Series { name: label.to_string(), rows: Vec::new() };
    for &tau in schedule {
        a.advance_to(tau)?;
        b.advance_to(tau)?;
        r.advance_to(tau)?;
        let d = ensemble_distance(&a.ensemble, &b.ensemble)?;
        let w0 = *w0.get_or_insert(d);
        let self_d = ensemble_distance(&a.ensemble, &r.ensemble)?;
        let bnd = bound(tau, w0);
        checks.push(Check::at_most(format!("{label} tau={tau}"), d, bnd, SLACK_FACTOR * self_d));
        let (ma, mb) = (moments_of(a.ensemble.velocities(), a.ensemble.dim())?, moments_of(b.ensemble.velocities(), b.ensemble.dim())?);
        series.rows.push(SeriesRow { tau, w2: d, bound: bnd, theta_a: ma.theta, theta_b: mb.theta, m4_a: ma.m4, m4_b: mb.m4 });
    }
    Ok((checks, series))
}

/// `sqrt(e^{-2τ} W0² + (1 - e^{-2τ}) |Δm|²)`.
pub fn flow_bound(tau: f64, w0: f64, dmean_sq: f64) -> f64 {
    let k = (-2.0 * tau).exp();
    (k * w0 * w0 + (1.0 - k) * dmean_sq).sqrt()
}

/// Flow contraction for the homogeneous equation: the Dirac equality case
/// and the general two-datum bound.
pub fn flow(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let n = s.pick(100_000, 5000);
    let params = ModelParams::cooling(0.5, 1.0)?;
    let mean = [0.3, 0.0, -0.2];
    let cfg = boltzmann(Equation::Homogeneous, params, CrossSection::constant(), dtau_for(params.big_e()?, 0.5), s.seed, n)?;
    let mut a = Simulation::from_recipe(cfg.clone(), &gaussian(&mean, 1.0), stream_id(0, ROLE_FLOW))?;
    let mut b = Simulation::from_recipe(cfg, &InitialRecipe::Dirac { mean: mean.to_vec() }, stream_id(0, ROLE_FLOW | 1))?;
    let schedule: Vec<f64> = (0..=12).map(|k| 0.25 * k as f64).collect();
    let recs = granot_core::dynamics::run_paired(&mut a, &mut b, &schedule)?;
    let identity = recs.iter().map(|r| (r.w2 * r.w2 - 3.0 * r.theta_a).abs() / (3.0 * r.theta_a)).fold(0.0, f64::max);
    report.checks.push(Check::at_most("Dirac case W2^2 = 3 theta (same ensemble)", identity, 0.0, 1e-12));
    let track = max_rel_dev(recs.iter().map(|r| (r.w2 * r.w2, 3.0 * (-2.0 * r.tau).exp())));
    report.checks.push(Check::at_most("Dirac case W2^2 tracks 3 theta0 exp(-2 tau)", track, 0.0, 0.03));
    report.series.push(Series {
        name: "flow-dirac".into(),
        rows: recs
            .iter()
            .map(|r| SeriesRow {
                tau: r.tau,
                w2: r.w2,
                bound: (3.0 * (-2.0 * r.tau).exp()).sqrt(),
                theta_a: r.theta_a,
                theta_b: r.theta_b,
                m4_a: r.m4_a,
                m4_b: r.m4_b,
            })
            .collect(),
    });

    let n = s.pick(1000, 150);
    let trials = s.pick(2u64, 1);
    let schedule = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
    let (ma, mb) = ([0.0; 3], [0.5, 0.0, 0.0]);
    let dmean_sq = sq_dist(&ma, &mb);
    let jobs: Vec<(f64, u64)> = [0.3, 0.7].iter().flat_map(|&e| (0..trials).map(move |t| (e, t))).collect();
    let results: Vec<Result<(Vec<Check>, Series)>> = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(e, t))| {
            let params = ModelParams::cooling(e, 1.0)?;
            let cfg = boltzmann(Equation::Homogeneous, params, CrossSection::constant(), dtau_for(params.big_e()?, 0.5), s.seed, n)?;
            paired_with_replica(
                &cfg,
                &gaussian(&ma, 1.0),
                &cube(&mb, 2.0),
                (k as u64 + 1, ROLE_FLOW | 0x10),
                &schedule,
                &format!("flow-e{e}-trial{t}"),
                &|tau, w0| flow_bound(tau, w0, dmean_sq),
            )
        })
        .collect();
    for r in results {
        let (checks, series) = r?;
        report.checks.extend(checks);
        report.series.push(series);
    }
    Ok(())
}

/// Time-averaged temperature over `(from, to]` sampled every `every`.
fn averaged_theta(sim: &mut Simulation, from: f64, to: f64, every: f64) -> Result<f64> {
    sim.advance_to(from)?;
    let steps = ((to - from) / every).round() as usize;
    let mut acc = 0.0;
    for k in 1..=steps {
        sim.advance_to(from + every * k as f64)?;
        acc += sim.ensemble.theta();
    }
    Ok(acc / steps as f64)
}

/// Diffusive equation: same-energy contraction and the steady temperature.
pub fn diffusive(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let n = s.pick(1000, 150);
    let params = ModelParams::new(0.5, 1.0, 1.0, 0.0)?;
    let cfg = SimConfig::new(
        Equation::Diffusive,
        Physics::Boltzmann(params),
        CrossSection::constant(),
        dtau_for(params.big_e()?, 0.5),
        s.seed,
        n,
    )?;
    let zero = [0.0; 3];
    let (checks, series) = paired_with_replica(
        &cfg,
        &gaussian(&zero, 1.0),
        &cube(&zero, 1.0),
        (0, ROLE_DIFFUSIVE),
        &[0.0, 0.25, 0.5, 1.0, 2.0, 3.0],
        "diffusive-same-energy",
        &|tau, w0| flow_bound(tau, w0, 0.0),
    )?;
    report.checks.extend(checks);
    report.series.push(series);

    let n = s.pick(20_000, 1000);
    let cases = [(0.0, 0.5, 4.0), (1.0, 0.5, 8.0)];
    let results: Vec<Result<Check>> = cases
        .par_iter()
        .enumerate()
        .map(|(k, &(p, e, settle))| {
            let (a, b) = (1.0, 1.0);
            let params = ModelParams::new(e, b, a, p)?;
            let theta_inf = (8.0 * a / (b * (1.0 - e * e))).powf(2.0 / (3.0 - 2.0 * p));
            // splitting bias on the steady state is O(dtau); keep it well under the tolerance
            let cfg = SimConfig::new(Equation::Diffusive, Physics::Boltzmann(params), CrossSection::constant(), 0.002, s.seed, n)?;
            let mut sim = Simulation::from_recipe(cfg, &gaussian(&zero, 1.0), stream_id(k as u64 + 1, ROLE_DIFFUSIVE))?;
            let theta = averaged_theta(&mut sim, settle, settle + 2.0, 0.1)?;
            Ok(Check::relative(format!("steady temperature p={p} e={e}"), theta, theta_inf, 0.03))
        })
        .collect();
    for r in results {
        report.checks.push(r?);
    }
    Ok(())
}

/// Cross-section equation with the linear kernel `(1 + c)/(4π)`.
pub fn cross_section(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let n = s.pick(1000, 150);
    let e = 0.5;
    let xs = CrossSection::from_density("linear", |c| (1.0 + c) / (4.0 * PI))?;
    let gamma_b = contraction_factor_cross_section(e, &xs)?;
    let cfg = boltzmann(Equation::CrossSection, ModelParams::cooling(e, 1.0)?, xs, 0.05, s.seed, n)?;
    let zero = [0.0; 3];
    let rate = (1.0 - gamma_b) / 2.0;
    let (checks, series) = paired_with_replica(
        &cfg,
        &gaussian(&zero, 1.0),
        &gaussian(&zero, 9.0),
        (0, ROLE_CROSS),
        &[0.0, 1.0, 2.0, 4.0, 6.0, 8.0],
        "cross-section-linear",
        &|tau, w0| (-rate * tau).exp() * w0,
    )?;
    report.checks.extend(checks);
    report.series.push(series);
    Ok(())
}

/// Inelastic Kac model at `p = 1`.
pub fn kac(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let n = s.pick(100_000, 5000);
    let kp = KacParams::new(1.0)?;
    let beta = kp.beta();
    let cfg = SimConfig::new(Equation::Kac, Physics::Kac(kp), CrossSection::constant(), 0.05, s.seed, n)?;
    let mut f = Simulation::from_recipe(cfg.clone(), &gaussian(&[0.0], 1.0), stream_id(0, ROLE_KAC))?;
    let dirac = VelocityEnsemble::new(vec![0.0; n], 1)?;
    let (mut taus, mut log_w, mut log_m2) = (Vec::new(), Vec::new(), Vec::new());
    let mut series = Series { name: "kac-dirac".into(), rows: Vec::new() };
    let w_start = ensemble_distance(&f.ensemble, &dirac)?;
    for k in 0..=16 {
        let tau = 0.25 * k as f64;
        f.advance_to(tau)?;
        let d = ensemble_distance(&f.ensemble, &dirac)?;
        let v = f.ensemble.velocities();
        let m2 = v.iter().map(|x| x * x).sum::<f64>() / n as f64;
        taus.push(tau);
        log_w.push(d.ln());
        log_m2.push(m2.ln());
        let ms = moments_of(v, 1)?;
        series.rows.push(SeriesRow {
            tau,
            w2: d,
            bound: (-beta * tau).exp() * w_start,
            theta_a: ms.theta,
            theta_b: 0.0,
            m4_a: ms.m4,
            m4_b: 0.0,
        });
    }
    report.series.push(series);
    let rate_w = -fitted_slope(&taus, &log_w);
    let rate_m2 = -fitted_slope(&taus, &log_m2);
    report.checks.push(Check::relative("fitted W2 decay rate vs beta", rate_w, beta, 0.05));
    report.checks.push(Check::relative("fitted m2 decay rate vs 2 beta", rate_m2, 2.0 * beta, 0.02));

    let (checks, series) = paired_with_replica(
        &cfg,
        &gaussian(&[0.0], 1.0),
        &cube(&[0.5], 2.0),
        (1, ROLE_KAC),
        &[0.0, 0.5, 1.0, 2.0, 3.0, 4.0],
        "kac-pair",
        &|tau, w0| (-beta * tau).exp() * w0,
    )?;
    report.checks.extend(checks);
    report.series.push(series);
    Ok(())
}

/// Fourth moment under the energy-conserving self-similar dynamics.
pub fn fourth_moment(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let n = s.pick(100_000, 5000);
    let params = ModelParams::cooling(0.5, 1.0)?;
    let cfg = boltzmann(Equation::SelfSimilar, params, CrossSection::constant(), dtau_for(params.big_e()?, 0.5), s.seed, n)?;
    let mut sim = Simulation::from_recipe(cfg, &gaussian(&[0.0; 3], 1.0), stream_id(0, ROLE_MOMENTS))?;
    let ms0 = moments_of(sim.ensemble.velocities(), 3)?;
    let star = m4_fixed_point(&ms0, &params)?;
    let (mut pairs, mut sup) = (Vec::new(), ms0.m4);
    for k in 0..=20 {
        let tau = 0.25 * k as f64;
        sim.advance_to(tau)?;
        let m4 = moments_of(sim.ensemble.velocities(), 3)?.m4;
        sup = sup.max(m4);
        pairs.push((m4, m4_closed_form(&ms0, &params, tau)?));
    }
    report.checks.push(Check::at_most("m4 vs closed-form solution on [0, 5]", max_rel_dev(pairs), 0.0, 0.05));
    let cap = ms0.m4.max(star);
    report.checks.push(Check::at_most("sup m4 <= max(m4(0), m4*)", sup, cap, 0.05 * cap));
    Ok(())
}

/// Self-similar profiles: `Ŵ2(g(τ), g(τ+1))` decreases and reaches the
/// sampling floor by `τ = 10`.
pub fn cooling_state(s: &Settings, report: &mut VerificationReport) -> Result<()> {
    let n = s.pick(2000, 200);
    let params = ModelParams::cooling(0.5, 1.0)?;
    let cfg = boltzmann(Equation::SelfSimilar, params, CrossSection::constant(), dtau_for(params.big_e()?, 0.5), s.seed, n)?;
    let zero = [0.0; 3];
    let shapes = [("uniform-cube", cube(&zero, 1.0)), ("two-point", InitialRecipe::TwoPoint { mean: zero.to_vec(), theta: 1.0 })];
    let results: Vec<Result<Vec<Check>>> = shapes
        .par_iter()
        .enumerate()
        .map(|(k, (label, recipe))| {
            let mut sim = Simulation::from_recipe(cfg.clone(), recipe, stream_id(k as u64, ROLE_COOLING))?;
            let mut replica = Simulation::from_recipe(cfg.clone(), recipe, stream_id(k as u64, ROLE_COOLING | 1))?;
            let mut prev = sim.ensemble.clone();
            let mut gaps = Vec::new();
            let mut floor = 0.0;
            for tau in 1..=11 {
                sim.advance_to(tau as f64)?;
                gaps.push(ensemble_distance(&prev, &sim.ensemble)?);
                if tau == 10 {
                    replica.advance_to(10.0)?;
                    floor = ensemble_distance(&sim.ensemble, &replica.ensemble)?;
                }
                prev = sim.ensemble.clone();
            }
            let slack = SLACK_FACTOR * floor;
            let mut out: Vec<Check> = gaps
                .windows(2)
                .enumerate()
                .map(|(t, w)| Check::at_most(format!("{label}: gap at tau={} <= gap at tau={t}", t + 1), w[1], w[0], slack))
                .collect();
            out.push(Check::at_most(format!("{label}: gap at tau=10 below sampling floor"), gaps[10], 0.0, slack));
            Ok(out)
        })
        .collect();
    for r in results {
        report.checks.extend(r?);
    }
    Ok(())
}

type Experiment = fn(&Settings, &mut VerificationReport) -> Result<()>;

fn experiments(suite: &str) -> Option<Vec<Experiment>> {
    Some(match suite {
        "gain" => vec![gain],
        "flow" => vec![temperature, flow],
        "diffusive" => vec![diffusive],
        "cross-section" => vec![cross_section],
        "kac" => vec![kac],
        "moments" => vec![fourth_moment, cooling_state],
        "lemmas" => vec![constants, transport, spheres],
        "all" => vec![
            constants,
            transport,
            spheres,
            gain,
            temperature,
            flow,
            diffusive,
            cross_section,
            kac,
            fourth_moment,
            cooling_state,
        ],
        _ => return None,
    })
}

pub fn run_suite(suite: &str, settings: &Settings) -> Result<VerificationReport> {
    let list = experiments(suite)
        .ok_or_else(|| HarnessError::Usage(format!("unknown suite {suite:?}; expected one of {}", SUITES.join(", "))))?;
    let mut report = VerificationReport::new(suite, settings.scale.name(), settings.seed);
    for run in list {
        run(settings, &mut report)?;
    }
    Ok(report)
}

/// Runs a suite with the seed and scale of `job`.
pub fn verify(suite: &str, job: &ExperimentConfig) -> Result<VerificationReport> {
    run_suite(suite, &Settings { seed: job.seed, scale: job.scale })
}
