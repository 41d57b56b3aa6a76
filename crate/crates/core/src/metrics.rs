//! Level characterisation metrics M1–M31.
//!
//! Level design patterns (path length, wall ratio, corridors, chambers, dead
//! tiles, entrance surroundings, treasure and enemy placement) followed by
//! visual and exact symmetry measures.
//!
//! Conventions that the raw definitions leave open:
//! * corridor enclosure treats the grid border as impassable;
//! * empty sets (no corridors, no chambers, no treasures) yield zeros;
//! * zero-denominator symmetry ratios are zero.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::grid::{GridMap, Position, StructureError, TileKind, N_TOTAL, SIZE};

pub const METRIC_COUNT: usize = 31;

/// The 31 metric values; component `i` (1-based) is `M_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector(pub [f64; METRIC_COUNT]);

impl MetricVector {
    /// `M_i` for `i` in `1..=31`.
    pub fn m(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error(transparent)]
    StructurallyInvalid(#[from] StructureError),
    #[error("map has no entrance-to-exit path, so path length (M1) is undefined")]
    InfeasibleForM1,
    #[error("entrance window metric is only defined for Enemy and Treasure, not {0:?}")]
    InvalidKind(TileKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corridor {
    pub tiles: Vec<Position>,
}

impl Corridor {
    pub fn length(&self) -> usize {
        self.tiles.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chamber {
    pub tiles: Vec<Position>,
    /// Bounding-box height.
    pub height: usize,
    /// Bounding-box width.
    pub width: usize,
}

impl Chamber {
    pub fn area(&self) -> usize {
        self.height * self.width
    }

    /// Area over the squared shorter side; 1 for a square bounding box.
    pub fn squareness(&self) -> f64 {
        let short = self.height.min(self.width) as f64;
        self.area() as f64 / (short * short)
    }
}

/// Corridors, chambers and dead tiles; together they partition the passable tiles.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Segmentation {
    pub corridors: Vec<Corridor>,
    pub chambers: Vec<Chamber>,
    pub dead: Vec<Position>,
}

fn blocked(map: &GridMap, row: isize, col: isize) -> bool {
    if row < 0 || col < 0 || row >= SIZE as isize || col >= SIZE as isize {
        return true;
    }
    !map.at(row as usize, col as usize).is_passable()
}

/// Passable tile walled in above and below.
fn enclosed_vertically(map: &GridMap, r: usize, c: usize) -> bool {
    let (r, c) = (r as isize, c as isize);
    blocked(map, r - 1, c) && blocked(map, r + 1, c)
}

/// Passable tile walled in left and right.
fn enclosed_horizontally(map: &GridMap, r: usize, c: usize) -> bool {
    let (r, c) = (r as isize, c as isize);
    blocked(map, r, c - 1) && blocked(map, r, c + 1)
}

pub fn segment(map: &GridMap) -> Result<Segmentation, StructureError> {
    map.validate_structure()?;
    let mut seg = Segmentation::default();
    let mut claimed = [false; N_TOTAL];

    // Horizontal corridors run along a row and are walled above and below.
    // A tile walled on all four sides lands here, so it is counted once.
    let h_tile = |r: usize, c: usize| map.at(r, c).is_passable() && enclosed_vertically(map, r, c);
    for r in 0..SIZE {
        let mut c = 0;
        while c < SIZE {
            if !h_tile(r, c) {
                c += 1;
                continue;
            }
            let mut tiles = Vec::new();
            while c < SIZE && h_tile(r, c) {
                tiles.push(Position { row: r, col: c });
                c += 1;
            }
            seg.corridors.push(Corridor { tiles });
        }
    }
    for corridor in &seg.corridors {
        for p in &corridor.tiles {
            claimed[p.row * SIZE + p.col] = true;
        }
    }

    let v_tile = |r: usize, c: usize| {
        map.at(r, c).is_passable() && enclosed_horizontally(map, r, c) && !enclosed_vertically(map, r, c)
    };
    for c in 0..SIZE {
        let mut r = 0;
        while r < SIZE {
            if !v_tile(r, c) {
                r += 1;
                continue;
            }
            let mut tiles = Vec::new();
            while r < SIZE && v_tile(r, c) {
                tiles.push(Position { row: r, col: c });
                claimed[r * SIZE + c] = true;
                r += 1;
            }
            seg.corridors.push(Corridor { tiles });
        }
    }

    // Whatever is left splits into 4-connected components; those holding a
    // 2x2 passable block are chambers, the rest are dead tiles.
    let free = |p: Position| map.get(p).is_passable() && !claimed[p.row * SIZE + p.col];
    let mut seen = [false; N_TOTAL];
    for start in GridMap::positions() {
        if seen[start.row * SIZE + start.col] || !free(start) {
            continue;
        }
        let mut component = Vec::new();
        let mut stack = alloc::vec![start];
        seen[start.row * SIZE + start.col] = true;
        while let Some(p) = stack.pop() {
            component.push(p);
            for n in p.neighbours() {
                let i = n.row * SIZE + n.col;
                if !seen[i] && free(n) {
                    seen[i] = true;
                    stack.push(n);
                }
            }
        }
        component.sort();
        let mut member = [false; N_TOTAL];
        for p in &component {
            member[p.row * SIZE + p.col] = true;
        }
        let has_block = component.iter().any(|p| {
            p.row + 1 < SIZE
                && p.col + 1 < SIZE
                && member[p.row * SIZE + p.col + 1]
                && member[(p.row + 1) * SIZE + p.col]
                && member[(p.row + 1) * SIZE + p.col + 1]
        });
        if has_block {
            let rows = component.iter().map(|p| p.row);
            let cols = component.iter().map(|p| p.col);
            let height = rows.clone().max().unwrap() - rows.min().unwrap() + 1;
            let width = cols.clone().max().unwrap() - cols.min().unwrap() + 1;
            seg.chambers.push(Chamber { tiles: component, height, width });
        } else {
            seg.dead.extend(component);
        }
    }
    seg.dead.sort();
    Ok(seg)
}

/// Largest entrance-centred square window clear of `kind`, as a fraction of
/// the map. The window is clipped to the grid; 1 when `kind` is absent.
pub fn entrance_clear_fraction(map: &GridMap, kind: TileKind) -> Result<f64, MetricsError> {
    if !matches!(kind, TileKind::Enemy | TileKind::Treasure) {
        return Err(MetricsError::InvalidKind(kind));
    }
    map.validate_structure()?;
    let e = map.entrance().expect("validated");
    let nearest = GridMap::positions()
        .filter(|&p| map.get(p) == kind)
        .map(|p| p.row.abs_diff(e.row).max(p.col.abs_diff(e.col)))
        .min();
    let Some(nearest) = nearest else {
        return Ok(1.0);
    };
    // The entrance itself is never `kind`, so nearest >= 1.
    let radius = nearest - 1;
    let span = |centre: usize| {
        let lo = centre.saturating_sub(radius);
        let hi = (centre + radius).min(SIZE - 1);
        hi - lo + 1
    };
    Ok((span(e.row) * span(e.col)) as f64 / N_TOTAL as f64)
}

fn safety_scores(map: &GridMap) -> Vec<f64> {
    let entrance = map.entrance().expect("validated");
    let from_entrance = map.step_distances(entrance);
    let enemies: Vec<Position> = GridMap::positions().filter(|&p| map.get(p) == TileKind::Enemy).collect();
    GridMap::positions()
        .filter(|&p| map.get(p) == TileKind::Treasure)
        .map(|t| {
            let Some(d_e) = from_entrance[t.row * SIZE + t.col] else {
                return 0.0;
            };
            if enemies.is_empty() {
                return 1.0;
            }
            let from_treasure = map.step_distances(t);
            let d_n = enemies.iter().filter_map(|e| from_treasure[e.row * SIZE + e.col]).min();
            match d_n {
                // No enemy can reach this treasure: as safe as an enemy-free map.
                None => 1.0,
                Some(d_n) => {
                    let (d_n, d_e) = (d_n as f64, d_e as f64);
                    ((d_n - d_e) / (d_n + d_e)).clamp(-1.0, 1.0)
                }
            }
        })
        .collect()
}

/// Mean and population standard deviation of per-treasure safety.
///
/// Safety of a treasure is `(d_n - d_e) / (d_n + d_e)`, where `d_e` is the
/// step distance from the entrance and `d_n` the step distance to the nearest
/// enemy. Unreachable treasures score 0; treasures no enemy can reach score 1.
pub fn treasure_safety(map: &GridMap) -> Result<(f64, f64), StructureError> {
    map.validate_structure()?;
    Ok(mean_and_sd(&safety_scores(map)))
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

fn max_min_mean(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    (max, min, values.iter().sum::<f64>() / values.len() as f64)
}

/// Per-kind tile counts in each half of the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HalfCounts {
    pub left: usize,
    pub right: usize,
    pub top: usize,
    pub bottom: usize,
}

impl HalfCounts {
    pub fn of(map: &GridMap, kind: TileKind) -> HalfCounts {
        let mut h = HalfCounts::default();
        for p in GridMap::positions().filter(|&p| map.get(p) == kind) {
            if p.col < SIZE / 2 {
                h.left += 1;
            } else {
                h.right += 1;
            }
            if p.row < SIZE / 2 {
                h.top += 1;
            } else {
                h.bottom += 1;
            }
        }
        h
    }

    pub fn total(&self) -> usize {
        self.left + self.right
    }
}

fn ratio(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

fn fraction_matching(map: &GridMap, mirror: impl Fn(usize, usize) -> (usize, usize)) -> f64 {
    let matches = GridMap::positions()
        .filter(|p| {
            let (r, c) = mirror(p.row, p.col);
            map.at(p.row, p.col) == map.at(r, c)
        })
        .count();
    matches as f64 / N_TOTAL as f64
}

/// A map's metric vector together with its feasibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// For infeasible maps `M1` is 0 and must not be used.
    pub metrics: MetricVector,
    pub feasible: bool,
}

/// Computes every metric; on infeasible maps M1 is left at 0 and flagged.
pub fn measure(map: &GridMap) -> Result<Measurement, StructureError> {
    let report = map.feasibility()?;
    let seg = segment(map)?;
    let mut m = [0.0; METRIC_COUNT];
    let total = N_TOTAL as f64;

    m[0] = report.path_tiles.map_or(0.0, |t| t as f64 / total);

    let walls = map.count(TileKind::Wall);
    m[1] = walls as f64 / (N_TOTAL - walls) as f64;

    let lengths: Vec<f64> = seg.corridors.iter().map(|c| c.length() as f64).collect();
    m[2] = lengths.len() as f64;
    (m[3], m[4], m[5]) = max_min_mean(&lengths);

    let areas: Vec<f64> = seg.chambers.iter().map(|c| c.area() as f64).collect();
    let squareness: Vec<f64> = seg.chambers.iter().map(Chamber::squareness).collect();
    m[6] = areas.len() as f64;
    (m[7], m[8], m[9]) = max_min_mean(&areas);
    (m[10], m[11], m[12]) = max_min_mean(&squareness);

    m[13] = seg.dead.len() as f64 / total;

    m[14] = entrance_clear_fraction(map, TileKind::Enemy).expect("valid kind and structure");
    m[15] = entrance_clear_fraction(map, TileKind::Treasure).expect("valid kind and structure");

    let enemy = HalfCounts::of(map, TileKind::Enemy);
    let treasure = HalfCounts::of(map, TileKind::Treasure);
    let wall = HalfCounts::of(map, TileKind::Wall);
    m[16] = enemy.total() as f64 / total;
    m[17] = treasure.total() as f64 / total;

    (m[18], m[19]) = mean_and_sd(&safety_scores(map));

    m[20] = ratio(wall.left.abs_diff(wall.right), wall.total());
    m[21] = ratio(wall.top.abs_diff(wall.bottom), wall.total());
    m[22] = ratio(enemy.left.abs_diff(enemy.right), enemy.total());
    m[23] = ratio(enemy.top.abs_diff(enemy.bottom), enemy.total());
    m[24] = ratio(treasure.left.abs_diff(treasure.right), treasure.total());
    m[25] = ratio(treasure.top.abs_diff(treasure.bottom), treasure.total());
    let items = treasure.total() + enemy.total();
    m[26] = ratio(treasure.left.abs_diff(enemy.right), items);
    m[27] = ratio(treasure.top.abs_diff(enemy.bottom), items);

    m[28] = fraction_matching(map, |r, c| (r, SIZE - 1 - c));
    m[29] = fraction_matching(map, |r, c| (SIZE - 1 - r, c));
    m[30] = fraction_matching(map, |r, c| (c, r));

    Ok(Measurement { metrics: MetricVector(m), feasible: report.feasible() })
}

/// All 31 metrics of a feasible map.
pub fn compute_metrics(map: &GridMap) -> Result<MetricVector, MetricsError> {
    let measured = measure(map)?;
    if !measured.feasible {
        return Err(MetricsError::InfeasibleForM1);
    }
    Ok(measured.metrics)
}
