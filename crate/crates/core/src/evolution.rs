//! Feasible–infeasible two-population genetic algorithm.
//!
//! Maps with an entrance-to-exit path evolve in one sub-population and maps
//! without one in the other. Each generation breeds children inside a
//! sub-population (tournament selection, uniform crossover, one adjacent swap),
//! routes every child by feasibility, and truncates each merged pool back by
//! Copeland rank while protecting the elites.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{GridMap, Position, StructureError, TileKind, N_TOTAL};
use crate::metrics::{measure, MetricVector};
use crate::ranking::{copeland_rank, fitness, FitnessVector, RankingError, TargetSet};

/// Attempts allowed per map when rejection-sampling feasible random maps.
pub const PADDING_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EvolutionError {
    #[error("target set is empty")]
    EmptyTargetSet,
    #[error("evaluation budget exhausted")]
    BudgetExhausted,
    #[error("cannot select from an empty sub-population")]
    EmptySubpopulation,
    #[error("parent map is structurally invalid: {0}")]
    StructurallyInvalidParent(StructureError),
    #[error("no feasible random map found in {PADDING_ATTEMPTS} attempts")]
    PaddingExhausted,
    #[error("invalid GA parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Ranking(#[from] RankingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    /// Probability that a child receives one adjacent-tile swap.
    pub mutation_rate: f64,
    pub tournament_size: usize,
    /// Elites protected in each sub-population.
    pub elite_count: usize,
    pub population_size: usize,
    pub generations: usize,
    /// Metric evaluations per run, initial population included.
    pub evaluation_budget: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            mutation_rate: 0.5,
            tournament_size: 2,
            elite_count: 1,
            population_size: 20,
            generations: 500,
            evaluation_budget: 10_000,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(EvolutionError::InvalidParams("mutation_rate must lie in [0, 1]"));
        }
        if self.tournament_size == 0 {
            return Err(EvolutionError::InvalidParams("tournament_size must be at least 1"));
        }
        if self.population_size < 2 * (self.elite_count + 1) {
            return Err(EvolutionError::InvalidParams(
                "population_size must be at least twice elite_count + 1",
            ));
        }
        if self.generations == 0 {
            return Err(EvolutionError::InvalidParams("generations must be at least 1"));
        }
        if self.evaluation_budget < self.population_size {
            return Err(EvolutionError::InvalidParams(
                "evaluation_budget must cover the initial population",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub map: GridMap,
    pub metrics: MetricVector,
    pub feasible: bool,
    pub fitness: FitnessVector,
}

impl Individual {
    pub fn evaluate(map: GridMap, targets: &TargetSet) -> Result<Individual, EvolutionError> {
        let measured = measure(&map).map_err(EvolutionError::StructurallyInvalidParent)?;
        let fitness = fitness(&measured.metrics, targets, measured.feasible)?;
        Ok(Individual { map, metrics: measured.metrics, feasible: measured.feasible, fitness })
    }
}

/// Scores maps against a target set and enforces the evaluation budget.
#[derive(Debug)]
pub struct Evaluator<'a> {
    targets: &'a TargetSet,
    budget: usize,
    used: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(targets: &'a TargetSet, budget: usize) -> Result<Evaluator<'a>, EvolutionError> {
        if targets.is_empty() {
            return Err(EvolutionError::EmptyTargetSet);
        }
        Ok(Evaluator { targets, budget, used: 0 })
    }

    pub fn evaluate(&mut self, map: GridMap) -> Result<Individual, EvolutionError> {
        if self.used >= self.budget {
            return Err(EvolutionError::BudgetExhausted);
        }
        let individual = Individual::evaluate(map, self.targets)?;
        self.used += 1;
        Ok(individual)
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.used
    }

    pub fn targets(&self) -> &TargetSet {
        self.targets
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    pub feasible: Vec<Individual>,
    pub infeasible: Vec<Individual>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.feasible.len() + self.infeasible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Routes an individual to the sub-population matching its feasibility.
    pub fn insert(&mut self, individual: Individual) {
        if individual.feasible {
            self.feasible.push(individual);
        } else {
            self.infeasible.push(individual);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Individual> {
        self.feasible.iter().chain(&self.infeasible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Lowest fitness sum in the feasible sub-population.
    pub best_fitness_sum: Option<f64>,
    /// Mean fitness sum over the feasible sub-population.
    pub mean_fitness_sum: Option<f64>,
    pub feasible_count: usize,
}

impl GenerationRecord {
    pub fn of(generation: usize, pop: &Population) -> GenerationRecord {
        let sums: Vec<f64> = pop.feasible.iter().map(|i| i.fitness.sum()).collect();
        let best = sums.iter().copied().reduce(f64::min);
        let mean = (!sums.is_empty()).then(|| sums.iter().sum::<f64>() / sums.len() as f64);
        GenerationRecord { generation, best_fitness_sum: best, mean_fitness_sum: mean, feasible_count: sums.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OptimisationHistory {
    pub records: Vec<GenerationRecord>,
}

impl OptimisationHistory {
    pub fn final_best(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.best_fitness_sum)
    }

    /// True when no feasible best ever rises once one exists.
    pub fn is_monotone(&self) -> bool {
        let mut best = f64::INFINITY;
        for r in &self.records {
            let current = r.best_fitness_sum.unwrap_or(f64::INFINITY);
            if current > best {
                return false;
            }
            best = current;
        }
        true
    }
}

pub fn init_population<R: Rng + ?Sized>(
    evaluator: &mut Evaluator<'_>,
    params: &GaParams,
    rng: &mut R,
) -> Result<Population, EvolutionError> {
    params.validate()?;
    let mut pop = Population::default();
    for _ in 0..params.population_size {
        pop.insert(evaluator.evaluate(GridMap::random(rng))?);
    }
    Ok(pop)
}

/// Draws `k` contestants with replacement and returns the majority-vote winner.
pub fn tournament_select<'p, R: Rng + ?Sized>(
    subpop: &'p [Individual],
    k: usize,
    rng: &mut R,
) -> Result<&'p Individual, EvolutionError> {
    if subpop.is_empty() {
        return Err(EvolutionError::EmptySubpopulation);
    }
    if k == 0 {
        return Err(EvolutionError::InvalidParams("tournament_size must be at least 1"));
    }
    let contestants: Vec<&Individual> = (0..k).map(|_| &subpop[rng.random_range(0..subpop.len())]).collect();
    let fitnesses: Vec<&FitnessVector> = contestants.iter().map(|c| &c.fitness).collect();
    let order = copeland_rank(&fitnesses)?;
    Ok(contestants[order[0]])
}

fn random_cell_except<R: Rng + ?Sized>(rng: &mut R, taken: Position) -> Position {
    let mut i = rng.random_range(0..N_TOTAL - 1);
    if i >= taken.row * crate::grid::SIZE + taken.col {
        i += 1;
    }
    Position::from_index(i)
}

/// Uniform crossover that keeps exactly one entrance and one exit.
pub fn crossover<R: Rng + ?Sized>(a: &GridMap, b: &GridMap, rng: &mut R) -> Result<GridMap, EvolutionError> {
    a.validate_structure().map_err(EvolutionError::StructurallyInvalidParent)?;
    b.validate_structure().map_err(EvolutionError::StructurallyInvalidParent)?;
    let (ea, eb) = (a.entrance().expect("validated"), b.entrance().expect("validated"));
    let (xa, xb) = (a.exit().expect("validated"), b.exit().expect("validated"));

    let entrance = if rng.random_bool(0.5) { ea } else { eb };
    let (first, second) = if rng.random_bool(0.5) { (xa, xb) } else { (xb, xa) };
    let exit = if first != entrance {
        first
    } else if second != entrance {
        second
    } else {
        random_cell_except(rng, entrance)
    };

    let mut child = GridMap::filled(TileKind::Floor);
    for p in GridMap::positions() {
        let kind = if p == entrance {
            TileKind::Entrance
        } else if p == exit {
            TileKind::Exit
        } else {
            let donor = if rng.random_bool(0.5) { a } else { b };
            match donor.get(p) {
                TileKind::Entrance | TileKind::Exit => TileKind::Floor,
                kind => kind,
            }
        };
        child.set(p, kind);
    }
    Ok(child)
}

/// With probability `mutation_rate`, swaps a random tile with a random 4-neighbour.
pub fn mutate<R: Rng + ?Sized>(map: &GridMap, params: &GaParams, rng: &mut R) -> GridMap {
    let mut out = *map;
    if !rng.random_bool(params.mutation_rate) {
        return out;
    }
    let cell = Position::from_index(rng.random_range(0..N_TOTAL));
    let neighbours: Vec<Position> = cell.neighbours().collect();
    let other = neighbours[rng.random_range(0..neighbours.len())];
    let (x, y) = (out.get(cell), out.get(other));
    out.set(cell, y);
    out.set(other, x);
    out
}

fn breed<R: Rng + ?Sized>(
    subpop: &[Individual],
    params: &GaParams,
    rng: &mut R,
) -> Result<GridMap, EvolutionError> {
    let a = tournament_select(subpop, params.tournament_size, rng)?;
    let b = tournament_select(subpop, params.tournament_size, rng)?;
    let child = crossover(&a.map, &b.map, rng)?;
    Ok(mutate(&child, params, rng))
}

/// Positions (into `old`) of the members that survive unconditionally: the
/// Copeland top `elite_count`, plus the lowest fitness sum so the recorded
/// best never regresses.
fn protected(old: &[Individual], elite_count: usize) -> Result<Vec<usize>, EvolutionError> {
    if old.is_empty() {
        return Ok(Vec::new());
    }
    let fitnesses: Vec<&FitnessVector> = old.iter().map(|i| &i.fitness).collect();
    let mut keep: Vec<usize> = copeland_rank(&fitnesses)?.into_iter().take(elite_count).collect();
    let lowest = (0..old.len())
        .min_by(|&x, &y| old[x].fitness.sum().total_cmp(&old[y].fitness.sum()).then(x.cmp(&y)))
        .expect("non-empty");
    if !keep.contains(&lowest) {
        keep.push(lowest);
    }
    Ok(keep)
}

fn truncate_pool(
    old: Vec<Individual>,
    children: Vec<Individual>,
    keep: &[usize],
    quota: usize,
) -> Result<Vec<Individual>, EvolutionError> {
    let mut pool = old;
    pool.extend(children);
    let fitnesses: Vec<&FitnessVector> = pool.iter().map(|i| &i.fitness).collect();
    let order = copeland_rank(&fitnesses)?;
    let mut chosen = alloc::vec![false; pool.len()];
    for &k in keep {
        chosen[k] = true;
    }
    let mut remaining = quota - keep.len();
    // First pass skips copies of maps already retained; the second fills any
    // slots left over.
    for distinct in [true, false] {
        for &i in &order {
            if remaining == 0 {
                break;
            }
            if chosen[i] {
                continue;
            }
            if distinct && (0..pool.len()).any(|j| chosen[j] && pool[j].map == pool[i].map) {
                continue;
            }
            chosen[i] = true;
            remaining -= 1;
        }
    }
    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    Ok(order.into_iter().filter(|&i| chosen[i]).map(|i| slots[i].take().expect("taken once")).collect())
}

/// One generation: breed, evaluate, route, then rank-guarded truncation.
///
/// Children come from the sub-populations in proportion to their sizes (a
/// sub-population with fewer than two members breeds none). Each merged pool
/// keeps its protected members and then its best-ranked members, skipping
/// copies of maps it already holds while other candidates remain. Slots are
/// shared out in proportion to the pool sizes.
pub fn step_generation<R: Rng + ?Sized>(
    pop: Population,
    evaluator: &mut Evaluator<'_>,
    params: &GaParams,
    rng: &mut R,
) -> Result<Population, EvolutionError> {
    params.validate()?;
    let n_children = params.population_size.min(evaluator.remaining());
    if n_children == 0 {
        return Err(EvolutionError::BudgetExhausted);
    }

    let nf = if pop.feasible.len() >= 2 { pop.feasible.len() } else { 0 };
    let ni = if pop.infeasible.len() >= 2 { pop.infeasible.len() } else { 0 };
    let mut children = Population::default();
    for _ in 0..n_children {
        let map = if nf + ni == 0 {
            GridMap::random(rng)
        } else if rng.random_range(0..nf + ni) < nf {
            breed(&pop.feasible, params, rng)?
        } else {
            breed(&pop.infeasible, params, rng)?
        };
        children.insert(evaluator.evaluate(map)?);
    }

    let keep_f = protected(&pop.feasible, params.elite_count)?;
    let keep_i = protected(&pop.infeasible, params.elite_count)?;
    let pool_f = pop.feasible.len() + children.feasible.len();
    let pool_i = pop.infeasible.len() + children.infeasible.len();
    let total = params.population_size;
    let share = (2 * total * pool_f + (pool_f + pool_i)) / (2 * (pool_f + pool_i));
    let lo = keep_f.len().max(total.saturating_sub(pool_i));
    let hi = pool_f.min(total - keep_i.len());
    let quota_f = share.clamp(lo, hi);

    Ok(Population {
        feasible: truncate_pool(pop.feasible, children.feasible, &keep_f, quota_f)?,
        infeasible: truncate_pool(pop.infeasible, children.infeasible, &keep_i, total - quota_f)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub population: Population,
    pub history: OptimisationHistory,
    pub evaluations: usize,
}

impl RunOutcome {
    /// Copeland-best feasible individual of the final generation.
    pub fn best_feasible(&self) -> Option<&Individual> {
        let fitnesses: Vec<&FitnessVector> = self.population.feasible.iter().map(|i| &i.fitness).collect();
        let order = copeland_rank(&fitnesses).ok()?;
        order.first().map(|&i| &self.population.feasible[i])
    }

    /// Copeland-best infeasible individual, for runs that never found a path.
    pub fn best_infeasible(&self) -> Option<&Individual> {
        let fitnesses: Vec<&FitnessVector> = self.population.infeasible.iter().map(|i| &i.fitness).collect();
        let order = copeland_rank(&fitnesses).ok()?;
        order.first().map(|&i| &self.population.infeasible[i])
    }
}

/// A fresh run from random initialisation against `targets`.
///
/// Stops after `generations` history rows or when the budget runs out,
/// whichever comes first.
pub fn run_optimisation<R: Rng + ?Sized>(
    targets: &TargetSet,
    params: &GaParams,
    rng: &mut R,
) -> Result<RunOutcome, EvolutionError> {
    params.validate()?;
    let mut evaluator = Evaluator::new(targets, params.evaluation_budget)?;
    let mut pop = init_population(&mut evaluator, params, rng)?;
    let mut history = OptimisationHistory { records: alloc::vec![GenerationRecord::of(0, &pop)] };
    for generation in 1..params.generations {
        if evaluator.remaining() == 0 {
            break;
        }
        pop = step_generation(pop, &mut evaluator, params, rng)?;
        history.records.push(GenerationRecord::of(generation, &pop));
    }
    Ok(RunOutcome { population: pop, history, evaluations: evaluator.used() })
}

/// The `n` Copeland-best feasible maps, padded with feasible random maps.
pub fn select_suggestions<R: Rng + ?Sized>(
    final_feasible: &[Individual],
    n: usize,
    rng: &mut R,
) -> Result<Vec<GridMap>, EvolutionError> {
    let fitnesses: Vec<&FitnessVector> = final_feasible.iter().map(|i| &i.fitness).collect();
    let mut out: Vec<GridMap> = copeland_rank(&fitnesses)?
        .into_iter()
        .take(n)
        .map(|i| final_feasible[i].map)
        .collect();
    while out.len() < n {
        out.push(GridMap::random_feasible(rng, PADDING_ATTEMPTS).ok_or(EvolutionError::PaddingExhausted)?);
    }
    Ok(out)
}

/// `n` feasible random maps with no optimisation.
pub fn random_suggestions<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<GridMap>, EvolutionError> {
    (0..n)
        .map(|_| GridMap::random_feasible(rng, PADDING_ATTEMPTS).ok_or(EvolutionError::PaddingExhausted))
        .collect()
}
