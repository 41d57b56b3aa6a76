//! Algorithm-driven runs: a single target map stands in for the designer's
//! first level, and the GA runs without any human feedback.

use dungeon_core::evolution::{run_optimisation, EvolutionError, OptimisationHistory};
use dungeon_core::{compute_metrics, GaParams, GridMap, TargetSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub seed: u64,
    /// Copeland-best map of the final generation; infeasible only when the run
    /// never produced a feasible map.
    pub best_map: GridMap,
    pub best_is_feasible: bool,
    /// Lowest feasible fitness sum in the final generation (last history row).
    pub final_best_fitness_sum: Option<f64>,
    /// Lowest feasible fitness sum after initialisation.
    pub initial_best_fitness_sum: Option<f64>,
    pub history: OptimisationHistory,
    pub evaluations: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("target map is not feasible")]
    InfeasibleTarget,
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

pub fn run_bench(target: &GridMap, seed: u64, params: &GaParams) -> Result<BenchResult, BenchError> {
    let metrics = compute_metrics(target).map_err(|_| BenchError::InfeasibleTarget)?;
    let targets = TargetSet::single(metrics);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = run_optimisation(&targets, params, &mut rng)?;
    let (best_map, best_is_feasible) = match outcome.best_feasible() {
        Some(best) => (best.map, true),
        None => (outcome.best_infeasible().expect("population is never empty").map, false),
    };
    Ok(BenchResult {
        seed,
        best_map,
        best_is_feasible,
        final_best_fitness_sum: outcome.history.final_best(),
        initial_best_fitness_sum: outcome.history.records.first().and_then(|r| r.best_fitness_sum),
        history: outcome.history,
        evaluations: outcome.evaluations,
    })
}

/// One parameter combination of a tuning sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneCase {
    pub params: GaParams,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GridSpecError {
    #[error("grid spec is empty")]
    Empty,
    #[error("malformed grid entry {0:?}; expected key=v1,v2,...")]
    Malformed(String),
    #[error("unknown grid key {0:?}; use mutation, tournament, elite, pop or generations")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}")]
    BadValue { key: String, value: String },
}

fn parse_list<T: std::str::FromStr>(key: &str, values: &str) -> Result<Vec<T>, GridSpecError> {
    values
        .split(',')
        .map(|v| {
            v.trim().parse().map_err(|_| GridSpecError::BadValue { key: key.into(), value: v.trim().into() })
        })
        .collect()
}

/// Expands `mutation=0.3,0.5;tournament=2,3;elite=1;pop=20` into every
/// combination. Keys left out take the default parameters. Unless
/// `generations` is given, each case runs until `evals` evaluations are spent.
pub fn parse_grid(spec: &str, evals: usize) -> Result<Vec<TuneCase>, GridSpecError> {
    let defaults = GaParams::default();
    let mut mutation = vec![defaults.mutation_rate];
    let mut tournament = vec![defaults.tournament_size];
    let mut elite = vec![defaults.elite_count];
    let mut pop = vec![defaults.population_size];
    let mut generations: Option<Vec<usize>> = None;
    let mut seen = false;
    for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        seen = true;
        let (key, values) = entry.split_once('=').ok_or_else(|| GridSpecError::Malformed(entry.into()))?;
        let key = key.trim();
        match key {
            "mutation" => mutation = parse_list(key, values)?,
            "tournament" => tournament = parse_list(key, values)?,
            "elite" => elite = parse_list(key, values)?,
            "pop" => pop = parse_list(key, values)?,
            "generations" => generations = Some(parse_list(key, values)?),
            other => return Err(GridSpecError::UnknownKey(other.into())),
        }
    }
    if !seen {
        return Err(GridSpecError::Empty);
    }
    let mut cases = Vec::new();
    for &m in &mutation {
        for &t in &tournament {
            for &e in &elite {
                for &p in &pop {
                    let gens = generations.clone().unwrap_or_else(|| vec![evals.div_ceil(p.max(1))]);
                    for &g in &gens {
                        cases.push(TuneCase {
                            params: GaParams {
                                mutation_rate: m,
                                tournament_size: t,
                                elite_count: e,
                                population_size: p,
                                generations: g,
                                evaluation_budget: evals,
                            },
                        });
                    }
                }
            }
        }
    }
    Ok(cases)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneRow {
    pub params: GaParams,
    pub runs: usize,
    pub mean_best: f64,
    pub sd_best: f64,
    /// Runs that never produced a feasible map and are left out of the mean.
    pub failed_runs: usize,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every case over seeds `0..seeds`; rows come back best mean first.
pub fn run_tune(target: &GridMap, cases: &[TuneCase], seeds: u64) -> Result<Vec<TuneRow>, BenchError> {
    let jobs: Vec<(usize, u64)> = (0..cases.len()).flat_map(|c| (0..seeds).map(move |s| (c, s))).collect();
    let results: Vec<(usize, u64, Option<f64>)> = jobs
        .par_iter()
        .map(|&(c, s)| run_bench(target, s, &cases[c].params).map(|r| (c, s, r.final_best_fitness_sum)))
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<TuneRow> = cases
        .iter()
        .enumerate()
        .map(|(c, case)| {
            let mut finals: Vec<(u64, Option<f64>)> =
                results.iter().filter(|r| r.0 == c).map(|r| (r.1, r.2)).collect();
            finals.sort_by_key(|r| r.0);
            let values: Vec<f64> = finals.iter().filter_map(|r| r.1).collect();
            let (mean_best, sd_best) = mean_sd(&values);
            TuneRow {
                params: case.params,
                runs: finals.len(),
                mean_best,
                sd_best,
                failed_runs: finals.len() - values.len(),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.mean_best.total_cmp(&b.mean_best));
    Ok(rows)
}

pub fn tune_table(rows: &[TuneRow]) -> String {
    let mut out = String::from("mutation,tournament,elite,pop,generations,runs,mean_best,sd_best,failed_runs\n");
    for r in rows {
        let p = &r.params;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.mutation_rate,
            p.tournament_size,
            p.elite_count,
            p.population_size,
            p.generations,
            r.runs,
            crate::formats::sig9(r.mean_best),
            crate::formats::sig9(r.sd_best),
            r.failed_runs
        ));
    }
    out
}
