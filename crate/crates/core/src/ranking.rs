//! Goal-programming fitness, Pareto dominance and majority-vote ranking.
//!
//! Every objective is a distance to the nearest liked exemplar, so all
//! objectives are minimised. Feasible maps carry 31 objectives; infeasible maps
//! drop path length and carry 30. The two kinds are never compared.

use alloc::vec::Vec;
use core::borrow::Borrow;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::metrics::{MetricVector, METRIC_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RankingError {
    #[error("target set is empty")]
    EmptyTargetSet,
    #[error("cannot compare a feasible fitness vector with an infeasible one")]
    IndexSetMismatch,
}

/// Metric profiles of every map the designer liked or kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    exemplars: Vec<MetricVector>,
}

impl TargetSet {
    pub fn new(exemplars: Vec<MetricVector>) -> Result<TargetSet, RankingError> {
        if exemplars.is_empty() {
            return Err(RankingError::EmptyTargetSet);
        }
        Ok(TargetSet { exemplars })
    }

    pub fn single(exemplar: MetricVector) -> TargetSet {
        TargetSet { exemplars: alloc::vec![exemplar] }
    }

    pub fn push(&mut self, exemplar: MetricVector) {
        self.exemplars.push(exemplar);
    }

    pub fn exemplars(&self) -> &[MetricVector] {
        &self.exemplars
    }

    pub fn len(&self) -> usize {
        self.exemplars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exemplars.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    values: Vec<f64>,
    feasible: bool,
}

impl FitnessVector {
    /// Wraps raw objective values. Feasible vectors hold 31 values, infeasible 30.
    pub fn new(values: Vec<f64>, feasible: bool) -> FitnessVector {
        let expected = if feasible { METRIC_COUNT } else { METRIC_COUNT - 1 };
        assert_eq!(values.len(), expected, "objective count does not match feasibility");
        FitnessVector { values, feasible }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn feasible(&self) -> bool {
        self.feasible
    }

    /// 1-based metric index of each stored objective.
    pub fn metric_indices(&self) -> core::ops::RangeInclusive<usize> {
        let first = if self.feasible { 1 } else { 2 };
        first..=METRIC_COUNT
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    fn check(&self, other: &FitnessVector) -> Result<(), RankingError> {
        if self.feasible != other.feasible {
            return Err(RankingError::IndexSetMismatch);
        }
        Ok(())
    }
}

/// `f_i = min_t |M_i(x) - M_i(x_t)|` over the objective index set.
pub fn fitness(metrics: &MetricVector, targets: &TargetSet, feasible: bool) -> Result<FitnessVector, RankingError> {
    if targets.is_empty() {
        return Err(RankingError::EmptyTargetSet);
    }
    let skip = usize::from(!feasible);
    let values = (skip..METRIC_COUNT)
        .map(|i| {
            targets
                .exemplars
                .iter()
                .map(|t| (metrics.0[i] - t.0[i]).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(FitnessVector { values, feasible })
}

/// Pareto dominance under minimisation.
pub fn dominates(a: &FitnessVector, b: &FitnessVector) -> Result<bool, RankingError> {
    a.check(b)?;
    let mut strictly = false;
    for (x, y) in a.values.iter().zip(&b.values) {
        if x > y {
            return Ok(false);
        }
        strictly |= x < y;
    }
    Ok(strictly)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preference {
    Better,
    Worse,
    Tie,
}

/// Objective counts where `a` is lower, equal and higher than `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoteCounts {
    pub less: usize,
    pub equal: usize,
    pub greater: usize,
}

pub fn vote_counts(a: &FitnessVector, b: &FitnessVector) -> Result<VoteCounts, RankingError> {
    a.check(b)?;
    let mut counts = VoteCounts { less: 0, equal: 0, greater: 0 };
    for (x, y) in a.values.iter().zip(&b.values) {
        match x.partial_cmp(y) {
            Some(Ordering::Less) => counts.less += 1,
            Some(Ordering::Greater) => counts.greater += 1,
            _ => counts.equal += 1,
        }
    }
    Ok(counts)
}

/// `a` is preferred when it is lower in more objectives than it is higher.
///
/// A dominating vector has no higher objective and at least one lower one,
/// so it is always `Better` than what it dominates.
pub fn majority_prefers(a: &FitnessVector, b: &FitnessVector) -> Result<Preference, RankingError> {
    let v = vote_counts(a, b)?;
    Ok(match v.less.cmp(&v.greater) {
        Ordering::Greater => Preference::Better,
        Ordering::Less => Preference::Worse,
        Ordering::Equal => Preference::Tie,
    })
}

/// Pairwise majority wins minus losses for every member.
pub fn copeland_scores<F: Borrow<FitnessVector>>(pop: &[F]) -> Result<Vec<i64>, RankingError> {
    let mut scores = alloc::vec![0i64; pop.len()];
    for i in 0..pop.len() {
        for j in i + 1..pop.len() {
            match majority_prefers(pop[i].borrow(), pop[j].borrow())? {
                Preference::Better => {
                    scores[i] += 1;
                    scores[j] -= 1;
                }
                Preference::Worse => {
                    scores[i] -= 1;
                    scores[j] += 1;
                }
                Preference::Tie => {}
            }
        }
    }
    Ok(scores)
}

/// Indices of `pop`, best first: Copeland score descending, then fitness sum
/// ascending, then input position.
pub fn copeland_rank<F: Borrow<FitnessVector>>(pop: &[F]) -> Result<Vec<usize>, RankingError> {
    let scores = copeland_scores(pop)?;
    let sums: Vec<f64> = pop.iter().map(|f| f.borrow().sum()).collect();
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .cmp(&scores[a])
            .then_with(|| sums[a].total_cmp(&sums[b]))
            .then_with(|| a.cmp(&b))
    });
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn fv(values: &[f64]) -> FitnessVector {
        let mut v = values.to_vec();
        v.resize(METRIC_COUNT, 0.0);
        FitnessVector::new(v, true)
    }

    fn metrics_with(i: usize, value: f64) -> MetricVector {
        let mut m = [0.0; METRIC_COUNT];
        m[i - 1] = value;
        MetricVector(m)
    }

    #[test]
    fn exemplar_has_zero_fitness() {
        let m = metrics_with(5, 3.0);
        let f = fitness(&m, &TargetSet::single(m), true).unwrap();
        assert!(f.values().iter().all(|&x| x == 0.0));
        assert_eq!(f.values().len(), 31);
    }

    #[test]
    fn nearest_exemplar_wins_per_objective() {
        let targets = TargetSet::new(vec![metrics_with(2, 0.2), metrics_with(2, 0.6)]).unwrap();
        let f = fitness(&metrics_with(2, 0.5), &targets, true).unwrap();
        assert!((f.values()[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn infeasible_drops_path_length() {
        let targets = TargetSet::single(metrics_with(1, 0.5));
        let f = fitness(&metrics_with(2, 1.0), &targets, false).unwrap();
        assert_eq!(f.values().len(), 30);
        assert_eq!(f.metric_indices(), 2..=31);
        // First stored objective is M2.
        assert_eq!(f.values()[0], 1.0);
        assert_eq!(TargetSet::new(vec![]), Err(RankingError::EmptyTargetSet));
    }

    #[test]
    fn dominance_cases() {
        let zero = fv(&[]);
        let pos = fv(&[0.0, 0.5]);
        assert_eq!(dominates(&zero, &pos), Ok(true));
        assert_eq!(dominates(&pos, &pos), Ok(false));
        let a = fv(&[1.0, 0.0]);
        let b = fv(&[0.0, 1.0]);
        assert_eq!(dominates(&a, &b), Ok(false));
        assert_eq!(dominates(&b, &a), Ok(false));
        let inf = FitnessVector::new(vec![0.0; 30], false);
        assert_eq!(dominates(&zero, &inf), Err(RankingError::IndexSetMismatch));
        assert_eq!(majority_prefers(&zero, &inf), Err(RankingError::IndexSetMismatch));
    }

    #[test]
    fn majority_counts() {
        let zero = fv(&[]);
        assert_eq!(majority_prefers(&zero, &fv(&[0.3])), Ok(Preference::Better));
        assert_eq!(majority_prefers(&fv(&[0.3]), &zero), Ok(Preference::Worse));

        let a: Vec<f64> = (0..31).map(|i| if i < 16 { 0.0 } else { 1.0 }).collect();
        let b: Vec<f64> = (0..31).map(|i| if i < 16 { 1.0 } else { 0.0 }).collect();
        let (a, b) = (FitnessVector::new(a, true), FitnessVector::new(b, true));
        assert_eq!(majority_prefers(&a, &b), Ok(Preference::Better));

        let c = fv(&[1.0, 0.0]);
        let d = fv(&[0.0, 1.0]);
        assert_eq!(majority_prefers(&c, &d), Ok(Preference::Tie));
        assert_eq!(majority_prefers(&c, &c), Ok(Preference::Tie));
    }

    #[test]
    fn copeland_dominator_first_and_stable_ties() {
        let pop = vec![fv(&[0.5, 0.5]), fv(&[0.1, 0.1]), fv(&[0.4, 0.7]), fv(&[0.5, 0.5])];
        let order = copeland_rank(&pop).unwrap();
        assert_eq!(order[0], 1);
        let p0 = order.iter().position(|&i| i == 0).unwrap();
        let p3 = order.iter().position(|&i| i == 3).unwrap();
        assert_eq!(p3, p0 + 1);
    }

    #[test]
    fn copeland_sum_tiebreak() {
        // Mutual ties, differing sums.
        let pop = vec![fv(&[2.0, 0.0]), fv(&[0.0, 1.0])];
        assert_eq!(copeland_rank(&pop).unwrap(), vec![1, 0]);
    }
}
