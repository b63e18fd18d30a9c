//! Command implementations: thin orchestration over the core library with
//! deterministic artifact emission.

use std::path::Path;

use anyhow::{anyhow, Result};
use parastab::criterion::{
    self, ClassifyMethod, StabilizationReport, Verdict,
};
use parastab::envelope::{self, EnvelopeParams};
use parastab::funcs::{ScalarFunction, StructureTriple};
use parastab::pde::{self, FieldState, RadialGrid, SimulateOptions};
use parastab::stationary::{self, Classification};
use parastab::Error;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{
    CheckConfig, EnvelopeConfig, InitialData, PowerFamilyParams, SimulateConfig,
    StationaryConfig, SweepConfig,
};
use crate::output::{self, Manifest};
use crate::{EXIT_BLOWUP, EXIT_CONFIG, EXIT_DIVERGENT, EXIT_OK, EXIT_UNKNOWN};

pub struct Overrides {
    pub theta: Option<f64>,
    pub calibration_c: Option<f64>,
    pub jobs: Option<usize>,
}

type F = ScalarFunction<f64>;

/// Triple induced by the power-law family: `g = \u{3b6}^\u{3c3}`,
/// `h = \u{3b6}^{(\u{3c3}-\u{3bc})/\u{3b1}}`, `p = (1+r)^{min{(l-k)/\u{3b1}-1, l}}`.
fn induced_triple(p: &PowerFamilyParams, theta: f64) -> Result<StructureTriple<f64>> {
    let check = criterion::example_power_check(p.alpha, p.mu, p.sigma, p.k, p.l)?;
    Ok(StructureTriple::new(
        F::power(1.0, p.sigma),
        F::power(1.0, (p.sigma - p.mu) / p.alpha),
        F::spatial_power(1.0, check.p_exponent),
        theta,
    )?)
}

fn build_report(config: &CheckConfig, theta: f64) -> Result<StabilizationReport<f64>> {
    match config {
        CheckConfig::Triple(triple) => {
            let mut triple = triple.clone();
            triple.theta = theta;
            Ok(criterion::theorem_verdict(&triple)?)
        }
        CheckConfig::PowerFamily(p) => {
            Ok(criterion::theorem_verdict(&induced_triple(p, theta)?)?)
        }
        CheckConfig::CriticalSpatial(p) => {
            let check = criterion::example_critical_spatial_check(
                p.alpha, p.k, p.s, p.l, p.m, p.sigma, p.mu,
            )?;
            let triple = StructureTriple::new(
                F::power(1.0, p.sigma),
                F::power(1.0, (p.sigma - p.mu) / p.alpha),
                F::spatial_power_log(1.0, -2.0, check.gamma),
                theta,
            )?;
            Ok(criterion::theorem_verdict(&triple)?)
        }
        CheckConfig::CriticalAbsorption(p) => {
            let sigma = 1.0f64.max(p.alpha + p.mu);
            let p_exponent = ((p.l - p.k) / p.alpha - 1.0).min(p.l);
            let triple = StructureTriple::new(
                F::power_log(1.0, sigma, p.nu, 1.0),
                F::power_log(1.0, (sigma - p.mu) / p.alpha, p.nu / p.alpha, 1.0),
                F::spatial_power(1.0, p_exponent),
                theta,
            )?;
            Ok(criterion::theorem_verdict(&triple)?)
        }
        CheckConfig::GradientAbsorption(p) => Ok(criterion::example_gradient_absorption_check(
            &p.phi, &p.psi, p.epsilon, theta,
        )?),
    }
}

pub fn check(config: CheckConfig, out: &Path, overrides: &Overrides) -> Result<u8> {
    let theta = overrides.theta.unwrap_or(match &config {
        CheckConfig::Triple(t) => t.theta,
        CheckConfig::GradientAbsorption(p) => p.theta,
        _ => 2.0,
    });
    let report = match build_report(&config, theta) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("error: {err:#}");
            return Ok(EXIT_CONFIG);
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    output::ensure_dir(out)?;
    output::write_manifest(
        out,
        &Manifest {
            command: "check",
            config: &config,
            outputs: vec![],
            extra: json!({ "report": report, "theta": theta }),
        },
    )?;
    Ok(if report.verdict == Verdict::Stabilizes {
        EXIT_OK
    } else {
        EXIT_UNKNOWN
    })
}

pub fn sweep(config: SweepConfig, out: &Path, overrides: &Overrides) -> Result<u8> {
    let theta = overrides.theta.unwrap_or(2.0);
    if config.axes.is_empty() {
        eprintln!("error: sweep needs at least one axis");
        return Ok(EXIT_CONFIG);
    }
    for axis in &config.axes {
        if axis.values.is_empty() {
            eprintln!("error: sweep axis '{}' has no values", axis.name);
            return Ok(EXIT_CONFIG);
        }
        if !["alpha", "mu", "sigma", "k", "l"].contains(&axis.name.as_str()) {
            eprintln!("error: unknown sweep axis '{}'", axis.name);
            return Ok(EXIT_CONFIG);
        }
    }

    // lexicographic cartesian product by axis order
    let mut points: Vec<PowerFamilyParams> = vec![config.base];
    for axis in &config.axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for base in &points {
            for &v in &axis.values {
                let mut p = *base;
                match axis.name.as_str() {
                    "alpha" => p.alpha = v,
                    "mu" => p.mu = v,
                    "sigma" => p.sigma = v,
                    "k" => p.k = v,
                    "l" => p.l = v,
                    _ => unreachable!(),
                }
                next.push(p);
            }
        }
        points = next;
    }

    let eval_point = |p: &PowerFamilyParams| -> Result<Vec<f64>> {
        let closed = criterion::example_power_check(p.alpha, p.mu, p.sigma, p.k, p.l)?;
        let numeric =
            criterion::theorem_verdict_with(&induced_triple(p, theta)?, ClassifyMethod::Numeric)?;
        Ok(vec![
            p.alpha,
            p.mu,
            p.sigma,
            p.k,
            p.l,
            if closed.passes { 1.0 } else { 0.0 },
            if numeric.stabilizes() { 1.0 } else { 0.0 },
        ])
    };

    // collect preserves input order regardless of worker scheduling
    let rows: Result<Vec<Vec<f64>>> = match overrides.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| points.par_iter().map(eval_point).collect()),
        None => points.par_iter().map(eval_point).collect(),
    };
    let rows = rows?;

    output::ensure_dir(out)?;
    let csv = output::write_csv(
        out,
        "sweep.csv",
        "alpha,mu,sigma,k,l,closed_passes,numeric_stabilizes",
        &rows,
    )?;
    output::write_manifest(
        out,
        &Manifest {
            command: "sweep",
            config: &config,
            outputs: vec![csv],
            extra: json!({ "theta": theta, "rows": rows.len() }),
        },
    )?;
    Ok(EXIT_OK)
}

pub fn envelope(config: EnvelopeConfig, out: &Path, overrides: &Overrides) -> Result<u8> {
    let params = EnvelopeParams {
        theta: overrides.theta.unwrap_or(config.theta),
        calibration_c: overrides.calibration_c.unwrap_or(config.calibration_c),
        probe_radius: config.probe_radius,
    };
    if config.t_grid.is_empty() {
        eprintln!("error: envelope needs a non-empty t grid");
        return Ok(EXIT_CONFIG);
    }

    let mut rows = Vec::with_capacity(config.t_grid.len());
    for &t in &config.t_grid {
        let k = envelope::dyadic_depth(params.probe_radius, t);
        let budget = envelope::dyadic_budget(&config.p, &params, t)?;
        let bound = match envelope::decay_bound(&config.g, &config.h, &config.p, &params, t) {
            Ok(b) => b.as_value(),
            Err(Error::DivergentTail(msg)) => {
                eprintln!("error: {msg}");
                return Ok(EXIT_DIVERGENT);
            }
            Err(err) => return Err(anyhow!(err)),
        };
        rows.push(vec![t, k as f64, budget, bound]);
    }

    output::ensure_dir(out)?;
    let csv = output::write_csv(out, "envelope.csv", "t,k,budget,bound", &rows)?;
    output::write_manifest(
        out,
        &Manifest {
            command: "envelope",
            config: &config,
            outputs: vec![csv],
            extra: json!({
                "theta": params.theta,
                "calibration_c": params.calibration_c,
            }),
        },
    )?;
    Ok(EXIT_OK)
}

pub fn simulate(config: SimulateConfig, out: &Path, _overrides: &Overrides) -> Result<u8> {
    let grid = match RadialGrid::new(config.grid.r_max, config.grid.cells) {
        Ok(g) => g,
        Err(err) => {
            eprintln!("error: {err:#}");
            return Ok(EXIT_CONFIG);
        }
    };
    let initial = match config.initial {
        InitialData::Zero => FieldState::constant(&grid, 0.0),
        InitialData::Constant { amplitude } => FieldState::constant(&grid, amplitude),
        InitialData::Gaussian { amplitude, width } => {
            FieldState::gaussian(&grid, amplitude, width)
        }
    };
    let opts = SimulateOptions {
        dt: config.dt,
        t_final: config.t_final,
        probe_radius: config.probe_radius,
        sample_every: config.sample_every,
        snapshot_times: config.snapshot_times.clone(),
    };
    let sim = match pde::simulate(&config.equation, &grid, &initial, &opts) {
        Ok(sim) => sim,
        Err(Error::BlowupDetected { time }) => {
            eprintln!("{}", json!({ "error": "blowup_detected", "time": time }));
            return Ok(EXIT_BLOWUP);
        }
        Err(Error::Precondition(msg)) => {
            eprintln!("error: {msg}");
            return Ok(EXIT_CONFIG);
        }
        Err(err) => return Err(anyhow!(err)),
    };

    output::ensure_dir(out)?;
    let mut outputs = Vec::new();
    let decay_rows: Vec<Vec<f64>> = sim
        .curve
        .samples
        .iter()
        .map(|s| vec![s.t, s.sup_abs, s.sup_pos])
        .collect();
    outputs.push(output::write_csv(out, "decay.csv", "t,sup_abs,sup_pos", &decay_rows)?);
    for (i, snap) in sim.snapshots.iter().enumerate() {
        let rows: Vec<Vec<f64>> = snap
            .values
            .iter()
            .enumerate()
            .map(|(j, &u)| vec![grid.node(j), u])
            .collect();
        outputs.push(output::write_csv(out, &format!("snapshot_{i}.csv"), "r,u", &rows)?);
    }
    output::write_manifest(
        out,
        &Manifest {
            command: "simulate",
            config: &config,
            outputs,
            extra: json!({
                "final_time": sim.final_state.time,
                "final_sup_abs": sim.final_state.sup_abs(&grid, config.probe_radius),
            }),
        },
    )?;
    Ok(EXIT_OK)
}

pub fn stationary(config: StationaryConfig, out: &Path, _overrides: &Overrides) -> Result<u8> {
    let opts = config.options.unwrap_or_default();
    let witness = stationary::find_witness_with(
        &config.equation,
        config.a_lo,
        config.a_hi,
        config.r_max,
        &opts,
    );

    output::ensure_dir(out)?;
    let mut outputs = Vec::new();
    let extra = match &witness {
        Some(result) => {
            let rows: Vec<Vec<f64>> = result
                .profile
                .iter()
                .map(|p| vec![p.r, p.u, p.du_dr])
                .collect();
            outputs.push(output::write_csv(out, "witness.csv", "r,u,du_dr", &rows)?);
            // stationarity cross-check on a fine truncated grid
            let r_grid = 20.0f64.min(config.r_max);
            let cells = ((r_grid / 0.01) as usize).max(64);
            let grid = RadialGrid::new(r_grid, cells)?;
            let field = stationary::profile_to_field(&result.profile, &grid);
            let residual = pde::residual(&field, &config.equation, &grid);
            let terminal = match result.classification {
                Classification::BoundedPositive { terminal } => terminal,
                _ => f64::NAN,
            };
            json!({
                "found": true,
                "classification": result.classification,
                "terminal": terminal,
                "residual": residual,
                "options": opts,
            })
        }
        None => json!({ "found": false, "options": opts }),
    };
    output::write_manifest(
        out,
        &Manifest {
            command: "stationary",
            config: &config,
            outputs,
            extra,
        },
    )?;
    Ok(EXIT_OK)
}
