//! `simulate` and `verify` orchestration with file output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use granot_core::collision::contraction_factor_cross_section;
use granot_core::dynamics::{ensemble_distance, run_paired, Equation, Physics, Simulation};
use granot_core::moments::{moments_of, MomentState};
use granot_core::rng::stream_id;

use crate::config::ExperimentConfig;
use crate::emit::{emit_timeseries, write_text};
use crate::error::Result;
use crate::report::{SeriesRow, VerificationReport};
use crate::suites::{self, flow_bound};

/// Stream roles of the two data of a `simulate` run.
pub const ROLE_A: u16 = 0;
pub const ROLE_B: u16 = 1;

/// What a `simulate` run produced.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    /// Paired run: one series row per scheduled time.
    Paired(Vec<SeriesRow>),
    /// Single run: moments per scheduled time.
    Single(Vec<(f64, MomentState)>),
}

pub const MOMENTS_CSV_PREFIX: &str = "tau,";

fn moments_csv(rows: &[(f64, MomentState)]) -> String {
    let mut s = format!("{MOMENTS_CSV_PREFIX}{}\n", MomentState::CSV_HEADER);
    for (tau, ms) in rows {
        let _ = writeln!(s, "{tau:e},{}", ms.csv_row());
    }
    s
}

/// Right-hand side of the contraction estimate for the family of `job`,
/// as a function of elapsed scaled time and the initial distance.
fn bound_fn(job: &ExperimentConfig, dmean_sq: f64) -> Result<Box<dyn Fn(f64, f64) -> f64>> {
    Ok(match (job.equation, job.physics) {
        (Equation::Homogeneous | Equation::Diffusive, _) => Box::new(move |tau, w0| flow_bound(tau, w0, dmean_sq)),
        (Equation::SelfSimilar, _) => Box::new(|_, w0| w0),
        (Equation::CrossSection, Physics::Boltzmann(p)) => {
            let gamma = contraction_factor_cross_section(p.e, &job.cross_section.build()?)?;
            // the estimate needs equal means
            let equal = dmean_sq <= 1e-24;
            Box::new(move |tau, w0| if equal { (-(1.0 - gamma) * tau / 2.0).exp() * w0 } else { f64::NAN })
        }
        (Equation::Kac, Physics::Kac(k)) => {
            let beta = k.beta();
            Box::new(move |tau, w0| (-beta * tau).exp() * w0)
        }
        _ => unreachable!("family and physics are validated together"),
    })
}

/// Runs the experiment of `job` and writes its CSV, SVG and snapshots.
pub fn simulate(job: &ExperimentConfig) -> Result<RunOutput> {
    let cfg = job.sim_config()?;
    let mut a = Simulation::from_recipe(cfg.clone(), &job.initial, stream_id(0, ROLE_A))?;
    let out = match &job.initial_b {
        Some(recipe_b) => {
            let mut b = Simulation::from_recipe(cfg, recipe_b, stream_id(0, ROLE_B))?;
            let t0 = a.ensemble.time.max(b.ensemble.time);
            let w0 = ensemble_distance(&a.ensemble, &b.ensemble)?;
            let dmean_sq: f64 = a.ensemble.mean().iter().zip(b.ensemble.mean()).map(|(x, y)| (x - y) * (x - y)).sum();
            let bound = bound_fn(job, dmean_sq)?;
            let recs = run_paired(&mut a, &mut b, &job.schedule)?;
            let rows: Vec<SeriesRow> = recs
                .iter()
                .map(|r| SeriesRow {
                    tau: r.tau,
                    w2: r.w2,
                    bound: bound((r.tau - t0).max(0.0), w0),
                    theta_a: r.theta_a,
                    theta_b: r.theta_b,
                    m4_a: r.m4_a,
                    m4_b: r.m4_b,
                })
                .collect();
            emit_timeseries(&rows, &job.outputs.csv, job.outputs.svg.as_deref(), &job.name)?;
            if let Some(path) = &job.outputs.snapshot_b {
                b.ensemble.save(path)?;
            }
            RunOutput::Paired(rows)
        }
        None => {
            let mut rows = Vec::with_capacity(job.schedule.len());
            for &tau in &job.schedule {
                a.advance_to(tau)?;
                rows.push((tau, moments_of(a.ensemble.velocities(), a.ensemble.dim())?));
            }
            write_text(&job.outputs.csv, &moments_csv(&rows))?;
            RunOutput::Single(rows)
        }
    };
    if let Some(path) = &job.outputs.snapshot {
        a.ensemble.save(path)?;
    }
    Ok(out)
}

/// Runs `suite` with the seed and scale of `job`, then writes the report
/// CSV and one CSV per recorded series into the output directory. Returns
/// the report and the written paths.
pub fn verify_and_write(suite: &str, job: &ExperimentConfig) -> Result<(VerificationReport, Vec<PathBuf>)> {
    let report = suites::verify(suite, job)?;
    let paths = write_report(&report, &job.outputs.dir, &job.name)?;
    Ok((report, paths))
}

pub fn write_report(report: &VerificationReport, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    let main = dir.join(format!("{prefix}-{}-report.csv", report.suite));
    write_text(&main, &report.to_csv())?;
    paths.push(main);
    for series in &report.series {
        let path = dir.join(format!("{prefix}-{}.csv", series.name));
        emit_timeseries(&series.rows, &path, None, &series.name)?;
        paths.push(path);
    }
    Ok(paths)
}
