//! Single-machine selectors: exhaustive greedy, sampled greedy with a
//! per-iteration candidate subsample, and a uniform-random baseline.
//!
//! All selectors break gain ties toward the lowest column index, so runs are
//! deterministic given their seed and reproducible across machines.

use crate::error::{Error, Result};
use crate::matrix::{ColumnMatrix, ColumnSet};
use crate::objective::{coverage_naive_set, init_state, SelectionState};
use crate::rng::substream;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Greedy,
    Lazier,
    Random,
    Dist,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Greedy => "greedy",
            Method::Lazier => "lazier",
            Method::Random => "random",
            Method::Dist => "dist",
        };
        f.write_str(s)
    }
}

/// Outcome of one selector run. `coverage_trace[t]` is the coverage after
/// the `t+1`-th pick; `gain_evaluations` counts full marginal-gain
/// computations (cheap dead-candidate detections are not counted).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub chosen: ColumnSet,
    pub coverage_trace: Vec<f64>,
    pub final_coverage: f64,
    pub coverage_ratio: f64,
    pub gain_evaluations: usize,
    pub wall_time_s: f64,
    pub seed: Option<u64>,
}

impl SelectionResult {
    pub(crate) fn empty(method: Method, seed: Option<u64>) -> Self {
        SelectionResult {
            method,
            chosen: ColumnSet::new(),
            coverage_trace: Vec::new(),
            final_coverage: 0.0,
            coverage_ratio: 0.0,
            gain_evaluations: 0,
            wall_time_s: 0.0,
            seed,
        }
    }

    fn finish(
        method: Method,
        chosen: ColumnSet,
        trace: Vec<f64>,
        fro_sq_a: f64,
        evals: usize,
        started: Instant,
        seed: Option<u64>,
    ) -> Self {
        let final_coverage = trace.last().copied().unwrap_or(0.0);
        let coverage_ratio = if fro_sq_a > 0.0 {
            final_coverage / fro_sq_a
        } else {
            0.0
        };
        SelectionResult {
            method,
            chosen,
            coverage_trace: trace,
            final_coverage,
            coverage_ratio,
            gain_evaluations: evals,
            wall_time_s: started.elapsed().as_secs_f64(),
            seed,
        }
    }

    /// Replaces the coverage trace (and derived fields) with exact values
    /// against `a`, used after selecting on a sketched target.
    pub fn rescore_exact(mut self, a: &ColumnMatrix, b: &ColumnMatrix) -> Result<Self> {
        let mut trace = Vec::with_capacity(self.chosen.len());
        let mut prefix = Vec::new();
        for j in self.chosen.iter() {
            prefix.push(j);
            let set = ColumnSet::from_indices(prefix.clone())?;
            trace.push(coverage_naive_set(a, b, &set)?);
        }
        self.final_coverage = trace.last().copied().unwrap_or(0.0);
        let fro = a.frobenius_sq();
        self.coverage_ratio = if fro > 0.0 {
            self.final_coverage / fro
        } else {
            0.0
        };
        self.coverage_trace = trace;
        Ok(self)
    }
}

/// Budget from the quality bound: `ceil(16 k / (epsilon * sigma_min))`,
/// with `sigma_min` the smallest squared singular value of the benchmark
/// set after column normalization. Saturates for degenerate inputs.
pub fn selection_budget(k: usize, epsilon: f64, sigma_min: f64) -> usize {
    if !(epsilon > 0.0) || !(sigma_min > 0.0) {
        return usize::MAX;
    }
    (16.0 * k as f64 / (epsilon * sigma_min)).ceil() as usize
}

/// Parameters for the sampled greedy selector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LazierParams {
    pub delta: f64,
    pub sample_size_override: Option<usize>,
}

impl LazierParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(LazierParams {
            delta,
            sample_size_override: None,
        })
    }

    /// Per-iteration sample size: `ceil(n_b * ln(1/delta) / k)`, at least 1,
    /// unless overridden.
    pub fn sample_size(&self, n_b: usize, k: usize) -> usize {
        if let Some(s) = self.sample_size_override {
            return s.max(1);
        }
        let k = k.max(1);
        ((n_b as f64) * (1.0 / self.delta).ln() / k as f64).ceil() as usize
    }
}

fn validate_budget(r: usize) -> Result<()> {
    if r < 1 {
        return Err(Error::InvalidParam("selection budget must be >= 1".into()));
    }
    Ok(())
}

fn best_gain_of(
    state: &mut SelectionState,
    candidates: &[usize],
    evals: &mut usize,
) -> Result<Option<usize>> {
    let mut best: Option<(usize, f64)> = None;
    for &j in candidates {
        if state.is_selected(j) || state.is_dead(j) {
            continue;
        }
        let rep = state.marginal_gain(j)?;
        if state.is_dead(j) {
            continue;
        }
        *evals += 1;
        match best {
            None => best = Some((j, rep.gain)),
            Some((_, g)) if rep.gain > g => best = Some((j, rep.gain)),
            _ => {}
        }
    }
    Ok(best.map(|(j, _)| j))
}

/// Exhaustive greedy: each iteration commits the candidate of maximum
/// marginal gain, ties broken toward the lowest index. Stops early once
/// every remaining candidate is dead.
pub fn greedy(a: &ColumnMatrix, b: &ColumnMatrix, r: usize) -> Result<SelectionResult> {
    validate_budget(r)?;
    let started = Instant::now();
    let mut state = init_state(a, b)?;
    let mut trace = Vec::new();
    let mut evals = 0usize;
    let all: Vec<usize> = (0..b.cols()).collect();
    for _ in 0..r {
        let Some(j) = best_gain_of(&mut state, &all, &mut evals)? else {
            break;
        };
        state.commit(j)?;
        trace.push(state.coverage());
    }
    Ok(SelectionResult::finish(
        Method::Greedy,
        state.selected().clone(),
        trace,
        state.frobenius_sq_a(),
        evals,
        started,
        None,
    ))
}

/// Sampled greedy: each iteration draws a uniform subsample of the live
/// candidates (all of them if fewer remain) and commits the best member.
/// `k` is the benchmark selection size the default sample size is derived
/// from; `r` is the number of picks.
pub fn lazier_greedy(
    a: &ColumnMatrix,
    b: &ColumnMatrix,
    r: usize,
    k: usize,
    params: &LazierParams,
    seed: u64,
) -> Result<SelectionResult> {
    validate_budget(r)?;
    if !(params.delta > 0.0 && params.delta < 1.0) {
        return Err(Error::InvalidParam(format!(
            "delta must lie in (0, 1), got {}",
            params.delta
        )));
    }
    let started = Instant::now();
    let mut state = init_state(a, b)?;
    let s = params.sample_size(b.cols(), k);
    let mut rng = substream(seed, "lazier-greedy");
    let mut trace = Vec::new();
    let mut evals = 0usize;
    while state.selected().len() < r {
        let mut alive = state.alive_candidates();
        if alive.is_empty() {
            break;
        }
        let sample = if alive.len() <= s {
            alive
        } else {
            // partial Fisher-Yates, then ascending order for the tie rule
            for i in 0..s {
                let pick = i + rng.gen_range(0..alive.len() - i);
                alive.swap(i, pick);
            }
            let mut sample = alive[..s].to_vec();
            sample.sort_unstable();
            sample
        };
        let Some(j) = best_gain_of(&mut state, &sample, &mut evals)? else {
            continue; // whole sample turned out dead; redraw from the rest
        };
        state.commit(j)?;
        trace.push(state.coverage());
    }
    Ok(SelectionResult::finish(
        Method::Lazier,
        state.selected().clone(),
        trace,
        state.frobenius_sq_a(),
        evals,
        started,
        Some(seed),
    ))
}

/// Uniform-random baseline: `r` distinct columns, coverage reported by
/// prefix so the trace is comparable with the greedy selectors.
pub fn random_baseline(
    a: &ColumnMatrix,
    b: &ColumnMatrix,
    r: usize,
    seed: u64,
) -> Result<SelectionResult> {
    validate_budget(r)?;
    if r > b.cols() {
        return Err(Error::InvalidParam(format!(
            "cannot sample {} distinct columns from {}",
            r,
            b.cols()
        )));
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            what: "candidate row count",
            expected: a.rows(),
            found: b.rows(),
        });
    }
    let started = Instant::now();
    let mut rng = substream(seed, "random-baseline");
    let mut pool: Vec<usize> = (0..b.cols()).collect();
    for i in 0..r {
        let pick = i + rng.gen_range(0..pool.len() - i);
        pool.swap(i, pick);
    }
    let chosen_indices = pool[..r].to_vec();
    let mut trace = Vec::with_capacity(r);
    for end in 1..=r {
        let set = ColumnSet::from_indices(chosen_indices[..end].to_vec())?;
        trace.push(coverage_naive_set(a, b, &set)?);
    }
    let chosen = ColumnSet::from_indices(chosen_indices)?;
    Ok(SelectionResult::finish(
        Method::Random,
        chosen,
        trace,
        a.frobenius_sq(),
        0,
        started,
        Some(seed),
    ))
}
