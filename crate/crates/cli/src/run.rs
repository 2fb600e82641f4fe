//! The `select` command: load matrices, optionally sketch, run the
//! configured selector, evaluate exactly, and write the report.

use crate::report::{to_json, tool_version, write_atomic, Outcome, RunConfig, RunReport, Timing};
use crate::AppError;
use colsel::dist::{dist_greedy_epochs, DistConfig};
use colsel::sketch::{gaussian_rows, pcps_cols, SketchKind, SketchSpec};
use colsel::{
    detect_format, greedy, lazier_greedy, load_matrix, random_baseline, ColumnMatrix, LazierParams,
    Method,
};
use std::time::Instant;

const DEFAULT_EPSILON: f64 = 0.25;
const DEFAULT_DELTA: f64 = 0.1;

fn load(path: &std::path::Path) -> Result<ColumnMatrix, AppError> {
    let format = detect_format(path)?;
    Ok(load_matrix(path, format)?)
}

fn require<T: Copy>(value: Option<T>, what: &str) -> Result<T, AppError> {
    value.ok_or_else(|| AppError::User(format!("{what} is required for this method")))
}

pub fn cmd_select(config: &RunConfig) -> Result<RunReport, AppError> {
    let t_load = Instant::now();
    let a_exact = load(&config.matrix)?;
    let b_exact = match &config.candidates {
        Some(path) => load(path)?,
        None => a_exact.clone(),
    };
    if a_exact.rows() != b_exact.rows() {
        return Err(AppError::User(format!(
            "target has {} rows but candidates have {}",
            a_exact.rows(),
            b_exact.rows()
        )));
    }
    let load_s = t_load.elapsed().as_secs_f64();

    let epsilon = config.epsilon.unwrap_or(DEFAULT_EPSILON);
    let delta = config.delta.unwrap_or(DEFAULT_DELTA);

    // sketch phase: an optional row projection of both matrices, then for
    // single-machine methods an optional column sketch of the target
    let t_sketch = Instant::now();
    let mut a_select = a_exact.clone();
    let mut b_select = b_exact.clone();
    let mut sketched = false;
    if let Some(d) = config.sketch_rows {
        if config.method == Method::Dist {
            return Err(AppError::User(
                "--sketch-rows applies to single-machine methods; use --pcps-cols with dist".into(),
            ));
        }
        let spec = SketchSpec {
            kind: SketchKind::GaussianRows,
            target_dim: d,
            epsilon,
            delta,
            seed: config.seed,
        };
        let pair = gaussian_rows(&a_select, &b_select, &spec)?;
        a_select = pair.a_sketched;
        b_select = pair.b_sketched.expect("row sketch keeps candidates");
        sketched = true;
    }
    let pcps_spec = config.pcps_cols.map(|n_prime| SketchSpec {
        kind: SketchKind::PcpsCols,
        target_dim: n_prime,
        epsilon,
        delta,
        seed: config.seed,
    });
    if config.method != Method::Dist {
        if let Some(spec) = &pcps_spec {
            a_select = pcps_cols(&a_select, spec)?.a_sketched;
            sketched = true;
        }
    }
    let sketch_s = t_sketch.elapsed().as_secs_f64();

    let t_select = Instant::now();
    let outcome = match config.method {
        Method::Greedy => {
            let r = require(config.r.or(config.k), "--r (or --k)")?;
            Outcome::Selection(greedy(&a_select, &b_select, r)?)
        }
        Method::Lazier => {
            let r = require(config.r.or(config.k), "--r (or --k)")?;
            let k = config.k.unwrap_or(r);
            let params = LazierParams {
                delta,
                sample_size_override: None,
            };
            Outcome::Selection(lazier_greedy(&a_select, &b_select, r, k, &params, config.seed)?)
        }
        Method::Random => {
            let r = require(config.r.or(config.k), "--r (or --k)")?;
            Outcome::Selection(random_baseline(&a_select, &b_select, r, config.seed)?)
        }
        Method::Dist => {
            let cfg = DistConfig {
                k: require(config.k, "--k")?,
                k_prime: require(config.k_prime, "--k-prime")?,
                k_dprime: require(config.k_dprime, "--k-dprime")?,
                machines: config.machines.unwrap_or(1),
                epochs: config.epochs.unwrap_or(1),
                seed: config.seed,
                sketch: pcps_spec,
            };
            Outcome::Dist(dist_greedy_epochs(&a_exact, &b_exact, &cfg)?)
        }
    };
    let select_s = t_select.elapsed().as_secs_f64();

    // exact evaluation on the unsketched target
    let t_eval = Instant::now();
    let frobenius_sq_a = a_exact.frobenius_sq();
    let (outcome, coverage_ratio) = match outcome {
        Outcome::Selection(res) => {
            let res = if sketched {
                res.rescore_exact(&a_exact, &b_exact)?
            } else {
                res
            };
            let ratio = res.coverage_ratio;
            (Outcome::Selection(res), ratio)
        }
        Outcome::Dist(res) => {
            let final_coverage = *res.epoch_trace.last().unwrap_or(&0.0);
            let ratio = if frobenius_sq_a > 0.0 {
                final_coverage / frobenius_sq_a
            } else {
                0.0
            };
            (Outcome::Dist(res), ratio)
        }
    };
    let evaluate_s = t_eval.elapsed().as_secs_f64();

    Ok(RunReport {
        version: tool_version(),
        config: config.clone(),
        frobenius_sq_a,
        coverage_ratio,
        outcome,
        timing: Timing {
            load_s,
            sketch_s,
            select_s,
            evaluate_s,
        },
    })
}

/// Writes the report and prints the one-line summary.
pub fn run_select(config: &RunConfig) -> Result<(), AppError> {
    let report = cmd_select(config)?;
    let json = to_json(&report)?;
    write_atomic(&config.out, &json)?;
    let (method, picked, coverage) = match &report.outcome {
        Outcome::Selection(res) => (res.method, res.chosen.len(), res.final_coverage),
        Outcome::Dist(res) => (
            Method::Dist,
            res.epoch_union.len(),
            *res.epoch_trace.last().unwrap_or(&0.0),
        ),
    };
    println!(
        "{}: {} columns, coverage {:.6} (ratio {:.4}) -> {}",
        method,
        picked,
        coverage,
        report.coverage_ratio,
        config.out.display()
    );
    Ok(())
}
