//! Deliberately naive re-implementations used as test oracles. Nothing here
//! calls into the metric, ranking or evolution modules.

#![allow(dead_code, clippy::needless_range_loop)]

use dungeon_core::grid::Position;
use dungeon_core::{GridMap, TileKind};

pub const N: usize = 12;
pub const TOTAL: f64 = 144.0;

pub fn tile(map: &GridMap, r: usize, c: usize) -> TileKind {
    map.get(Position::new(r, c).unwrap())
}

fn open(map: &GridMap, r: i64, c: i64) -> bool {
    (0..N as i64).contains(&r) && (0..N as i64).contains(&c) && tile(map, r as usize, c as usize) != TileKind::Wall
}

fn count(map: &GridMap, kind: TileKind) -> usize {
    let mut n = 0;
    for r in 0..N {
        for c in 0..N {
            if tile(map, r, c) == kind {
                n += 1;
            }
        }
    }
    n
}

fn locate(map: &GridMap, kind: TileKind) -> (usize, usize) {
    for r in 0..N {
        for c in 0..N {
            if tile(map, r, c) == kind {
                return (r, c);
            }
        }
    }
    panic!("{kind:?} missing")
}

/// Step distances from `start` by repeated relaxation until nothing changes.
pub fn distances(map: &GridMap, start: (usize, usize)) -> Vec<Vec<Option<usize>>> {
    let mut d = vec![vec![None; N]; N];
    d[start.0][start.1] = Some(0);
    loop {
        let mut changed = false;
        for r in 0..N {
            for c in 0..N {
                if !open(map, r as i64, c as i64) {
                    continue;
                }
                for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if !open(map, nr, nc) {
                        continue;
                    }
                    if let Some(v) = d[nr as usize][nc as usize] {
                        if d[r][c].is_none_or(|cur| v + 1 < cur) {
                            d[r][c] = Some(v + 1);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

pub fn m1(map: &GridMap) -> Option<f64> {
    let s = locate(map, TileKind::Entrance);
    let x = locate(map, TileKind::Exit);
    distances(map, s)[x.0][x.1].map(|steps| (steps + 1) as f64 / TOTAL)
}

pub fn m2(map: &GridMap) -> f64 {
    let walls = count(map, TileKind::Wall) as f64;
    walls / (TOTAL - walls)
}

/// Dead tiles: passable, in neither corridor orientation, and in a leftover
/// component without any fully passable 2x2 block.
pub fn m14(map: &GridMap) -> f64 {
    let mut leftover = [[false; N]; N];
    for r in 0..N {
        for c in 0..N {
            let (ri, ci) = (r as i64, c as i64);
            if !open(map, ri, ci) {
                continue;
            }
            let horizontal = !open(map, ri - 1, ci) && !open(map, ri + 1, ci);
            let vertical = !open(map, ri, ci - 1) && !open(map, ri, ci + 1);
            leftover[r][c] = !horizontal && !vertical;
        }
    }
    // Connected components by repeated minimum-label propagation.
    let mut label = [[usize::MAX; N]; N];
    for r in 0..N {
        for c in 0..N {
            if leftover[r][c] {
                label[r][c] = r * N + c;
            }
        }
    }
    loop {
        let mut changed = false;
        for r in 0..N {
            for c in 0..N {
                if !leftover[r][c] {
                    continue;
                }
                for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if (0..N as i64).contains(&nr) && (0..N as i64).contains(&nc) {
                        let other = label[nr as usize][nc as usize];
                        if leftover[nr as usize][nc as usize] && other < label[r][c] {
                            label[r][c] = other;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut chamber_labels = Vec::new();
    for r in 0..N - 1 {
        for c in 0..N - 1 {
            let cells = [(r, c), (r + 1, c), (r, c + 1), (r + 1, c + 1)];
            if cells.iter().all(|&(a, b)| leftover[a][b]) {
                chamber_labels.push(label[r][c]);
            }
        }
    }
    let mut dead = 0;
    for r in 0..N {
        for c in 0..N {
            if leftover[r][c] && !chamber_labels.contains(&label[r][c]) {
                dead += 1;
            }
        }
    }
    dead as f64 / TOTAL
}

pub fn m17(map: &GridMap) -> f64 {
    count(map, TileKind::Enemy) as f64 / TOTAL
}

pub fn m18(map: &GridMap) -> f64 {
    count(map, TileKind::Treasure) as f64 / TOTAL
}

fn halves(map: &GridMap, kind: TileKind) -> (f64, f64, f64, f64) {
    let (mut left, mut right, mut top, mut bottom) = (0.0, 0.0, 0.0, 0.0);
    for r in 0..N {
        for c in 0..N {
            if tile(map, r, c) != kind {
                continue;
            }
            if c < N / 2 {
                left += 1.0;
            } else {
                right += 1.0;
            }
            if r < N / 2 {
                top += 1.0;
            } else {
                bottom += 1.0;
            }
        }
    }
    (left, right, top, bottom)
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// M21 to M28 in index order.
pub fn visual_symmetry(map: &GridMap) -> [f64; 8] {
    let (wl, wr, wt, wb) = halves(map, TileKind::Wall);
    let (el, er, et, eb) = halves(map, TileKind::Enemy);
    let (tl, tr, tt, tb) = halves(map, TileKind::Treasure);
    let (w, e, t) = (wl + wr, el + er, tl + tr);
    [
        safe_div((wl - wr).abs(), w),
        safe_div((wt - wb).abs(), w),
        safe_div((el - er).abs(), e),
        safe_div((et - eb).abs(), e),
        safe_div((tl - tr).abs(), t),
        safe_div((tt - tb).abs(), t),
        safe_div((tl - er).abs(), t + e),
        safe_div((tt - eb).abs(), t + e),
    ]
}

/// M29 to M31: left-right, top-bottom and transpose match fractions.
pub fn exact_symmetry(map: &GridMap) -> [f64; 3] {
    let (mut lr, mut tb, mut tr) = (0.0, 0.0, 0.0);
    for r in 0..N {
        for c in 0..N {
            let here = tile(map, r, c);
            if here == tile(map, r, N - 1 - c) {
                lr += 1.0;
            }
            if here == tile(map, N - 1 - r, c) {
                tb += 1.0;
            }
            if here == tile(map, c, r) {
                tr += 1.0;
            }
        }
    }
    [lr / TOTAL, tb / TOTAL, tr / TOTAL]
}

/// `(metric number, value)` for every metric the oracle covers.
pub fn covered_metrics(map: &GridMap) -> Vec<(usize, f64)> {
    let mut out = vec![
        (1, m1(map).expect("oracle needs a feasible map")),
        (2, m2(map)),
        (14, m14(map)),
        (17, m17(map)),
        (18, m18(map)),
    ];
    out.extend(visual_symmetry(map).iter().enumerate().map(|(i, &v)| (21 + i, v)));
    out.extend(exact_symmetry(map).iter().enumerate().map(|(i, &v)| (29 + i, v)));
    out
}

/// Goal-programming fitness over 1-based metric numbers `first..=31`.
pub fn fitness(metrics: &[f64; 31], exemplars: &[[f64; 31]], feasible: bool) -> Vec<f64> {
    let first = if feasible { 1 } else { 2 };
    let mut out = Vec::new();
    for i in first..=31 {
        let mut best = f64::INFINITY;
        for t in exemplars {
            let d = (metrics[i - 1] - t[i - 1]).abs();
            if d < best {
                best = d;
            }
        }
        out.push(best);
    }
    out
}

fn copeland_scores(pop: &[Vec<f64>]) -> Vec<i64> {
    let n = pop.len();
    let mut score = vec![0i64; n];
    for i in 0..n {
        for j in i + 1..n {
            let lower = pop[i].iter().zip(&pop[j]).filter(|(a, b)| a < b).count();
            let higher = pop[i].iter().zip(&pop[j]).filter(|(a, b)| a > b).count();
            if lower > higher {
                score[i] += 1;
                score[j] -= 1;
            } else if higher > lower {
                score[i] -= 1;
                score[j] += 1;
            }
        }
    }
    score
}

/// Position of the best member: highest Copeland score, then lowest sum,
/// then earliest.
pub fn copeland_best(pop: &[Vec<f64>]) -> Option<usize> {
    let score = copeland_scores(pop);
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in pop.iter().enumerate() {
        let sum: f64 = v.iter().sum();
        best = match best {
            Some((b, b_sum)) if score[b] > score[i] || (score[b] == score[i] && b_sum <= sum) => Some((b, b_sum)),
            _ => Some((i, sum)),
        };
    }
    best.map(|b| b.0)
}

/// Best-first order: Copeland score, then fitness sum, then position.
pub fn copeland_order(pop: &[Vec<f64>]) -> Vec<usize> {
    let n = pop.len();
    let score = copeland_scores(pop);
    let sums: Vec<f64> = pop.iter().map(|v| v.iter().sum()).collect();
    let mut order: Vec<usize> = Vec::new();
    for i in 0..n {
        let mut at = order.len();
        for (k, &j) in order.iter().enumerate() {
            let before = score[i] > score[j] || (score[i] == score[j] && sums[i] < sums[j]);
            if before {
                at = k;
                break;
            }
        }
        order.insert(at, i);
    }
    order
}
