//! Randomized-partition distributed selection: candidates are split
//! uniformly across machines, each machine runs greedy against the shared
//! target (or its column sketch), one machine re-runs greedy over the union
//! of the per-machine picks, and the best set under the exact objective
//! wins. A multi-epoch variant repeats the round against the residual of
//! the accumulated selection.
//!
//! Machines are independent in-process workers over disjoint column sets;
//! results are bit-deterministic given the seed regardless of scheduling.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm_sq, ColumnMatrix, ColumnSet};
use crate::rng::{substream, substream_indexed};
use crate::select::{greedy, Method, SelectionResult};
use crate::sketch::{pcps_cols, SketchKind, SketchSpec};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Assignment of every candidate column to one machine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub machines: usize,
    pub assignment: Vec<usize>,
    pub seed: u64,
}

/// Each column goes to a machine drawn independently and uniformly from the
/// seeded substream.
pub fn random_partition(n_b: usize, machines: usize, seed: u64) -> Result<PartitionPlan> {
    if machines < 1 {
        return Err(Error::InvalidParam("machine count must be >= 1".into()));
    }
    let mut rng = substream(seed, "partition");
    let assignment = (0..n_b).map(|_| rng.gen_range(0..machines)).collect();
    Ok(PartitionPlan {
        machines,
        assignment,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistConfig {
    /// Benchmark selection size the budgets are derived from.
    pub k: usize,
    /// Per-machine output size.
    pub k_prime: usize,
    /// Aggregation output size.
    pub k_dprime: usize,
    pub machines: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Optional column sketch of the shared target sent to the machines.
    pub sketch: Option<SketchSpec>,
}

impl DistConfig {
    fn validate(&self) -> Result<()> {
        if self.k_prime < 1 || self.k_dprime < 1 {
            return Err(Error::InvalidParam(
                "per-machine and aggregation budgets must be >= 1".into(),
            ));
        }
        if self.machines < 1 {
            return Err(Error::InvalidParam("machine count must be >= 1".into()));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidParam("epoch count must be >= 1".into()));
        }
        if let Some(spec) = &self.sketch {
            spec.validate()?;
            if spec.kind != SketchKind::PcpsCols {
                return Err(Error::InvalidParam(
                    "distributed selection shares a pcps-cols sketch of the target".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Outcome of a distributed run. For the multi-epoch variant the
/// per-machine, aggregated and winner fields describe the final epoch
/// (whose target is the residual left by earlier epochs), while
/// `epoch_union` and `epoch_trace` track the accumulated selection against
/// the original target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistResult {
    pub per_machine: Vec<SelectionResult>,
    pub aggregated: SelectionResult,
    pub winner: SelectionResult,
    pub epoch_union: ColumnSet,
    pub epoch_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Derived budgets `(k', k'') = (ceil(32 k / sigma_min), ceil(12 k /
/// sigma_min))` for a benchmark set with smallest squared singular value
/// `sigma_min`. Saturates for degenerate inputs.
pub fn machine_budgets(k: usize, sigma_min: f64) -> (usize, usize) {
    if !(sigma_min > 0.0) {
        return (usize::MAX, usize::MAX);
    }
    let kp = (32.0 * k as f64 / sigma_min).ceil() as usize;
    let kd = (12.0 * k as f64 / sigma_min).ceil() as usize;
    (kp.max(1), kd.max(1))
}

fn map_to_global(mut res: SelectionResult, global: &[usize]) -> Result<SelectionResult> {
    let mapped: Vec<usize> = res.chosen.iter().map(|local| global[local]).collect();
    res.chosen = ColumnSet::from_indices(mapped)?;
    Ok(res)
}

fn run_group(
    a_shared: &ColumnMatrix,
    b: &ColumnMatrix,
    group: &[usize],
    budget: usize,
) -> Result<SelectionResult> {
    if group.is_empty() || budget == 0 {
        return Ok(SelectionResult::empty(Method::Greedy, None));
    }
    let sub = b.select_columns(group)?;
    let res = greedy(a_shared, &sub, budget.min(group.len()))?;
    map_to_global(res, group)
}

/// One partition/aggregate round. The winner is chosen by the exact
/// objective on the unsketched target, and when a sketch was used every
/// reported coverage is re-evaluated exactly.
pub fn dist_greedy_round(
    a: &ColumnMatrix,
    b: &ColumnMatrix,
    cfg: &DistConfig,
    plan: &PartitionPlan,
) -> Result<DistResult> {
    cfg.validate()?;
    if plan.assignment.len() != b.cols() {
        return Err(Error::DimensionMismatch {
            what: "partition assignment length",
            expected: b.cols(),
            found: plan.assignment.len(),
        });
    }
    if plan.machines != cfg.machines {
        return Err(Error::InvalidParam(format!(
            "plan has {} machines, config expects {}",
            plan.machines, cfg.machines
        )));
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            what: "candidate row count",
            expected: a.rows(),
            found: b.rows(),
        });
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); cfg.machines];
    for (col, &machine) in plan.assignment.iter().enumerate() {
        if machine >= cfg.machines {
            return Err(Error::InvalidParam(format!(
                "column {} assigned to machine {} of {}",
                col, machine, cfg.machines
            )));
        }
        groups[machine].push(col);
    }

    let a_shared = match &cfg.sketch {
        Some(spec) => pcps_cols(a, spec)?.a_sketched,
        None => a.clone(),
    };
    let sketched = cfg.sketch.is_some();

    let mut warnings = Vec::new();
    for (i, group) in groups.iter().enumerate() {
        if cfg.k_prime > group.len() {
            warnings.push(format!(
                "machine {}: budget {} truncated to {} available columns",
                i,
                cfg.k_prime,
                group.len()
            ));
        }
    }

    let per_machine_raw: Vec<SelectionResult> = groups
        .par_iter()
        .map(|group| run_group(&a_shared, b, group, cfg.k_prime))
        .collect::<Result<Vec<_>>>()?;

    let union: Vec<usize> = per_machine_raw
        .iter()
        .flat_map(|res| res.chosen.iter())
        .collect();
    if cfg.k_dprime > union.len() {
        warnings.push(format!(
            "aggregation: budget {} truncated to {} pooled columns",
            cfg.k_dprime,
            union.len()
        ));
    }
    let aggregated_raw = run_group(&a_shared, b, &union, cfg.k_dprime)?;

    let rescore = |res: SelectionResult| -> Result<SelectionResult> {
        if sketched {
            res.rescore_exact(a, b)
        } else {
            Ok(res)
        }
    };
    let aggregated = rescore(aggregated_raw)?;
    let per_machine: Vec<SelectionResult> = per_machine_raw
        .into_iter()
        .map(rescore)
        .collect::<Result<Vec<_>>>()?;

    // winner by exact coverage; strict comparison prefers the aggregated
    // set and then the lowest machine index on ties
    let mut winner = aggregated.clone();
    for res in &per_machine {
        if res.final_coverage > winner.final_coverage {
            winner = res.clone();
        }
    }
    let epoch_union = winner.chosen.clone();
    let epoch_trace = vec![winner.final_coverage];
    Ok(DistResult {
        per_machine,
        aggregated,
        winner,
        epoch_union,
        epoch_trace,
        warnings,
    })
}

/// Multi-epoch variant: epoch `t` runs a round against the residual of the
/// target after removing the span of everything accumulated so far, with a
/// fresh partition drawn from the `(seed, epoch)` substream.
pub fn dist_greedy_epochs(a: &ColumnMatrix, b: &ColumnMatrix, cfg: &DistConfig) -> Result<DistResult> {
    cfg.validate()?;
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            what: "candidate row count",
            expected: a.rows(),
            found: b.rows(),
        });
    }
    let fro_a = a.frobenius_sq();
    let mut residual_cols = a.to_columns();
    let mut accumulated_basis: Vec<Vec<f64>> = Vec::new();
    let mut union = ColumnSet::new();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut warnings = Vec::new();
    let mut last_round: Option<DistResult> = None;

    for epoch in 0..cfg.epochs {
        let partition_seed = substream_indexed(cfg.seed, "epoch-partition", epoch as u64).gen();
        let plan = random_partition(b.cols(), cfg.machines, partition_seed)?;
        let epoch_cfg = DistConfig {
            epochs: 1,
            sketch: cfg.sketch.map(|spec| SketchSpec {
                seed: substream_indexed(spec.seed, "epoch-sketch", epoch as u64).gen(),
                ..spec
            }),
            ..cfg.clone()
        };
        let target = ColumnMatrix::from_columns(&residual_cols)?;
        let round = dist_greedy_round(&target, b, &epoch_cfg, &plan)?;

        for j in round.winner.chosen.iter() {
            if union.contains(j) {
                continue;
            }
            union.push(j)?;
            let mut v = b.col_dense(j);
            let orig = norm_sq(&v);
            if orig == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for q in &accumulated_basis {
                    let c = dot(&v, q);
                    axpy(&mut v, -c, q);
                }
            }
            let n2 = norm_sq(&v);
            if n2 > 1e-12 * orig {
                let inv = 1.0 / n2.sqrt();
                for x in &mut v {
                    *x *= inv;
                }
                for col in &mut residual_cols {
                    let c = dot(col, &v);
                    axpy(col, -c, &v);
                }
                accumulated_basis.push(v);
            }
        }
        let residual_mass: f64 = residual_cols.iter().map(|c| norm_sq(c)).sum();
        trace.push((fro_a - residual_mass).max(0.0));
        warnings.extend(round.warnings.iter().cloned());
        last_round = Some(round);
    }

    let mut result = last_round.expect("epochs >= 1");
    result.epoch_union = union;
    result.epoch_trace = trace;
    result.warnings = warnings;
    Ok(result)
}

/// Classifies each benchmark column by whether greedy would keep it when it
/// is offered alongside one machine's columns. Test-scale operation, guarded
/// on the candidate pool size.
pub fn opt_split(
    a: &ColumnMatrix,
    b: &ColumnMatrix,
    opt: &ColumnSet,
    t_i: &ColumnSet,
    k_prime: usize,
) -> Result<(ColumnSet, ColumnSet)> {
    if b.cols() > 64 {
        return Err(Error::Guard {
            what: "opt_split candidate pool",
            limit: 64,
            requested: b.cols() as u64,
        });
    }
    if k_prime < 1 {
        return Err(Error::InvalidParam("k_prime must be >= 1".into()));
    }
    let mut selected = Vec::new();
    let mut not_selected = Vec::new();
    for x in opt.iter() {
        let mut cand: Vec<usize> = t_i.indices().to_vec();
        if !cand.contains(&x) {
            cand.push(x);
        }
        cand.sort_unstable();
        let sub = b.select_columns(&cand)?;
        let res = greedy(a, &sub, k_prime.min(cand.len()))?;
        let local_x = cand.iter().position(|&c| c == x).expect("x is in cand");
        if res.chosen.contains(local_x) {
            selected.push(x);
        } else {
            not_selected.push(x);
        }
    }
    Ok((
        ColumnSet::from_indices(selected)?,
        ColumnSet::from_indices(not_selected)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::make_random_instance;

    fn sample_3x3() -> ColumnMatrix {
        ColumnMatrix::from_columns(&[
            vec![1.0, 1.0, 0.0],
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    fn cfg(k_prime: usize, k_dprime: usize, machines: usize, seed: u64) -> DistConfig {
        DistConfig {
            k: 2,
            k_prime,
            k_dprime,
            machines,
            epochs: 1,
            seed,
            sketch: None,
        }
    }

    #[test]
    fn partition_is_seeded_and_covers_single_machine() {
        let p1 = random_partition(10, 4, 7).unwrap();
        let p2 = random_partition(10, 4, 7).unwrap();
        assert_eq!(p1, p2);
        assert!(p1.assignment.iter().all(|&m| m < 4));

        let single = random_partition(5, 1, 3).unwrap();
        assert!(single.assignment.iter().all(|&m| m == 0));
    }

    #[test]
    fn partition_is_roughly_balanced() {
        let mut ok = 0;
        for seed in 0..100 {
            let plan = random_partition(10_000, 4, seed).unwrap();
            let mut counts = [0usize; 4];
            for &m in &plan.assignment {
                counts[m] += 1;
            }
            if counts.iter().all(|&c| (c as i64 - 2500).abs() <= 300) {
                ok += 1;
            }
        }
        assert!(ok >= 99, "balanced in only {ok}/100 seeds");
    }

    #[test]
    fn single_machine_round_equals_greedy() {
        let (a, b) = make_random_instance(6, 8, 8, 3, 0.2, 5).unwrap();
        let plan = random_partition(b.cols(), 1, 1).unwrap();
        let round = dist_greedy_round(&a, &b, &cfg(3, 4, 1, 1), &plan).unwrap();
        let direct = greedy(&a, &b, 3).unwrap();
        assert_eq!(round.winner.chosen, direct.chosen);
        assert!((round.winner.final_coverage - direct.final_coverage).abs() < 1e-12);
    }

    #[test]
    fn spanning_pool_reaches_full_coverage() {
        let (a, _) = make_random_instance(5, 6, 6, 5, 0.3, 8).unwrap();
        // pool = identity basis plus the target's own columns
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for i in 0..5 {
            let mut e = vec![0.0; 5];
            e[i] = 1.0;
            cols.push(e);
        }
        cols.extend(a.to_columns());
        let b = ColumnMatrix::from_columns(&cols).unwrap();
        let plan = random_partition(b.cols(), 2, 3).unwrap();
        let round = dist_greedy_round(&a, &b, &cfg(5, 5, 2, 3), &plan).unwrap();
        assert!(
            (round.winner.final_coverage - a.frobenius_sq()).abs() <= 1e-8 * a.frobenius_sq()
        );
    }

    #[test]
    fn budget_truncation_is_warned_not_fatal() {
        let a = sample_3x3();
        let plan = random_partition(3, 2, 1).unwrap();
        let round = dist_greedy_round(&a, &a, &cfg(50, 50, 2, 1), &plan).unwrap();
        assert!(!round.warnings.is_empty());
    }

    #[test]
    fn winner_dominates_all_candidates() {
        let (a, b) = make_random_instance(8, 10, 10, 4, 0.25, 21).unwrap();
        let plan = random_partition(b.cols(), 3, 2).unwrap();
        let round = dist_greedy_round(&a, &b, &cfg(3, 4, 3, 2), &plan).unwrap();
        for res in round.per_machine.iter().chain([&round.aggregated]) {
            assert!(round.winner.final_coverage >= res.final_coverage);
        }
    }

    #[test]
    fn round_is_schedule_independent() {
        let (a, b) = make_random_instance(8, 12, 12, 4, 0.25, 33).unwrap();
        let plan = random_partition(b.cols(), 4, 9).unwrap();
        let config = cfg(3, 5, 4, 9);
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| dist_greedy_round(&a, &b, &config, &plan))
            .unwrap();
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| dist_greedy_round(&a, &b, &config, &plan))
            .unwrap();
        let strip = |mut r: DistResult| {
            r.winner.wall_time_s = 0.0;
            r.aggregated.wall_time_s = 0.0;
            for m in &mut r.per_machine {
                m.wall_time_s = 0.0;
            }
            r
        };
        assert_eq!(strip(serial), strip(parallel));
    }

    #[test]
    fn one_epoch_equals_one_round() {
        let (a, b) = make_random_instance(6, 9, 9, 3, 0.2, 13).unwrap();
        let config = cfg(3, 4, 2, 13);
        let epochs = dist_greedy_epochs(&a, &b, &config).unwrap();
        let partition_seed = substream_indexed(13, "epoch-partition", 0).gen();
        let plan = random_partition(b.cols(), 2, partition_seed).unwrap();
        let round = dist_greedy_round(&a, &b, &config, &plan).unwrap();
        assert_eq!(epochs.winner.chosen, round.winner.chosen);
        assert_eq!(epochs.epoch_trace.len(), 1);
        assert!((epochs.epoch_trace[0] - round.winner.final_coverage).abs() < 1e-9);
    }

    #[test]
    fn enough_epochs_exhaust_the_residual() {
        let (a, b) = make_random_instance(5, 8, 8, 5, 0.3, 17).unwrap();
        let mut config = cfg(2, 2, 2, 17);
        config.epochs = 8;
        let res = dist_greedy_epochs(&a, &b, &config).unwrap();
        let last = *res.epoch_trace.last().unwrap();
        assert!(
            (last - a.frobenius_sq()).abs() <= 1e-8 * a.frobenius_sq(),
            "final coverage {} vs {}",
            last,
            a.frobenius_sq()
        );
        for w in res.epoch_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn opt_split_partitions_the_benchmark() {
        let (a, b) = make_random_instance(6, 8, 8, 3, 0.2, 29).unwrap();
        let opt = ColumnSet::from_indices(vec![0, 3]).unwrap();
        let t_i = ColumnSet::from_indices(vec![1, 2, 3]).unwrap();
        let (s, ns) = opt_split(&a, &b, &opt, &t_i, 4).unwrap();
        let mut all: Vec<usize> = s.iter().chain(ns.iter()).collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 3]);
        assert!(s.iter().all(|x| !ns.contains(x)));
    }

    #[test]
    fn opt_split_empty_benchmark() {
        let a = sample_3x3();
        let opt = ColumnSet::new();
        let t_i = ColumnSet::from_indices(vec![0]).unwrap();
        let (s, ns) = opt_split(&a, &a, &opt, &t_i, 2).unwrap();
        assert!(s.is_empty() && ns.is_empty());
    }

    #[test]
    fn opt_split_guard() {
        let (a, b) = make_random_instance(3, 3, 70, 2, 0.1, 2).unwrap();
        let opt = ColumnSet::from_indices(vec![0]).unwrap();
        let t_i = ColumnSet::from_indices(vec![1]).unwrap();
        assert!(matches!(
            opt_split(&a, &b, &opt, &t_i, 2),
            Err(Error::Guard { .. })
        ));
    }

    #[test]
    fn budgets_helper() {
        let (kp, kd) = machine_budgets(2, 0.5);
        assert_eq!((kp, kd), (128, 48));
        assert_eq!(machine_budgets(2, 0.0), (usize::MAX, usize::MAX));
    }
}
