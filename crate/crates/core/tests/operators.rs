use dungeon_core::evolution::{crossover, mutate, run_optimisation, tournament_select, Individual};
use dungeon_core::ranking::FitnessVector;
use dungeon_core::session::assign_mode;
use dungeon_core::{compute_metrics, GaParams, GridMap, MetricVector, SessionMode, TargetSet, TileKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ten_thousand_crossovers_keep_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let a = GridMap::random(&mut rng);
        let b = GridMap::random(&mut rng);
        let child = crossover(&a, &b, &mut rng).unwrap();
        assert_eq!(child.count(TileKind::Entrance), 1);
        assert_eq!(child.count(TileKind::Exit), 1);
    }
}

#[test]
fn crossover_of_identical_parents_is_a_copy() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let a = GridMap::random(&mut rng);
        assert_eq!(crossover(&a, &a, &mut rng).unwrap(), a);
    }
}

#[test]
fn ten_thousand_mutations_swap_at_most_two_cells() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = GaParams::default();
    let mut changed = 0;
    for _ in 0..10_000 {
        let map = GridMap::random(&mut rng);
        let out = mutate(&map, &params, &mut rng);
        assert_eq!(out.tile_counts(), map.tile_counts());
        let d = out.edit_distance(&map);
        assert!(d <= 2);
        changed += usize::from(d > 0);
    }
    // Half the children are mutated; some swaps exchange equal tiles.
    assert!((2_500..5_200).contains(&changed), "{changed}");
}

fn member(values: Vec<f64>) -> Individual {
    let map = GridMap::filled(TileKind::Floor).with(0, 0, TileKind::Entrance).with(0, 1, TileKind::Exit);
    Individual { map, metrics: MetricVector([0.0; 31]), feasible: true, fitness: FitnessVector::new(values, true) }
}

#[test]
fn binary_tournament_win_rates() {
    // Four strictly ordered members: the i-th best wins when it is drawn and
    // nothing better is, so P(i) = ((4 - i)^2 - (3 - i)^2) / 16.
    let pop: Vec<Individual> = (0..4).map(|i| member(vec![i as f64; 31])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trials = 40_000;
    let mut wins = [0usize; 4];
    for _ in 0..trials {
        let w = tournament_select(&pop, 2, &mut rng).unwrap();
        wins[w.fitness.values()[0] as usize] += 1;
    }
    for (i, &w) in wins.iter().enumerate() {
        let expected = (((4 - i) * (4 - i) - (3 - i) * (3 - i)) as f64) / 16.0;
        let observed = w as f64 / trials as f64;
        assert!((observed - expected).abs() < 0.01, "rank {i}: {observed} vs {expected}");
    }
}

#[test]
fn mode_assignment_is_balanced_and_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ids: Vec<String> = (0..10_000)
        .map(|_| (0..rng.random_range(4..16)).map(|_| rng.random_range(b'a'..=b'z') as char).collect())
        .collect();
    let ga = ids.iter().filter(|id| assign_mode(id).unwrap() == SessionMode::Ga).count();
    let fraction = ga as f64 / ids.len() as f64;
    assert!((0.48..=0.52).contains(&fraction), "{fraction}");
    for id in ids.iter().take(100) {
        assert_eq!(assign_mode(id).unwrap(), assign_mode(id).unwrap());
    }
}

#[test]
fn small_run_contract() {
    let target = GridMap::filled(TileKind::Floor).with(0, 0, TileKind::Entrance).with(11, 11, TileKind::Exit);
    let targets = TargetSet::single(compute_metrics(&target).unwrap());
    let params = GaParams { evaluation_budget: 1_000, ..GaParams::default() };
    let a = run_optimisation(&targets, &params, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = run_optimisation(&targets, &params, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.evaluations, 1_000);
    assert_eq!(a.history.records.len(), 50);
    assert!(a.history.is_monotone());
    assert_eq!(a.population.len(), params.population_size);
    for ind in a.population.iter() {
        assert!(ind.map.validate_structure().is_ok());
        assert_eq!(ind.feasible, ind.map.is_feasible());
    }
}
