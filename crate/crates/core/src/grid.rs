//! The 12×12 tile map: parsing, structural checks, path queries, editing and
//! seeded random generation.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Side length of every map.
pub const SIZE: usize = 12;
/// Number of tiles in a map (`N_total`).
pub const N_TOTAL: usize = SIZE * SIZE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TileKind {
    Wall,
    Floor,
    Treasure,
    Enemy,
    Entrance,
    Exit,
}

impl TileKind {
    pub const ALL: [TileKind; 6] = [
        TileKind::Wall,
        TileKind::Floor,
        TileKind::Treasure,
        TileKind::Enemy,
        TileKind::Entrance,
        TileKind::Exit,
    ];

    pub fn is_passable(self) -> bool {
        self != TileKind::Wall
    }

    pub fn glyph(self) -> char {
        match self {
            TileKind::Wall => '#',
            TileKind::Floor => '.',
            TileKind::Treasure => 'T',
            TileKind::Enemy => 'E',
            TileKind::Entrance => 'S',
            TileKind::Exit => 'X',
        }
    }

    pub fn from_glyph(c: char) -> Option<TileKind> {
        Some(match c {
            '#' => TileKind::Wall,
            '.' => TileKind::Floor,
            'T' => TileKind::Treasure,
            'E' => TileKind::Enemy,
            'S' => TileKind::Entrance,
            'X' => TileKind::Exit,
            _ => return None,
        })
    }

    /// Next kind in the editor's click cycle.
    pub fn next(self) -> TileKind {
        match self {
            TileKind::Wall => TileKind::Floor,
            TileKind::Floor => TileKind::Treasure,
            TileKind::Treasure => TileKind::Enemy,
            TileKind::Enemy => TileKind::Entrance,
            TileKind::Entrance => TileKind::Exit,
            TileKind::Exit => TileKind::Wall,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    /// Returns `None` when either coordinate is off the grid.
    pub fn new(row: usize, col: usize) -> Option<Position> {
        (row < SIZE && col < SIZE).then_some(Position { row, col })
    }

    pub(crate) fn from_index(i: usize) -> Position {
        Position { row: i / SIZE, col: i % SIZE }
    }

    pub(crate) fn index(self) -> usize {
        self.row * SIZE + self.col
    }

    /// 4-connected neighbours that lie on the grid.
    pub fn neighbours(self) -> impl Iterator<Item = Position> {
        const STEPS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
        STEPS.into_iter().filter_map(move |(dr, dc)| {
            let r = self.row.checked_add_signed(dr)?;
            let c = self.col.checked_add_signed(dc)?;
            Position::new(r, c)
        })
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("expected 12 lines of 12 glyphs, got {0}")]
    WrongDimensions(String),
    #[error("unknown glyph {glyph:?} at line {line}, column {col}")]
    UnknownGlyph { glyph: char, line: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("map has {0} entrance tiles, expected exactly one")]
    EntranceCount(usize),
    #[error("map has {0} exit tiles, expected exactly one")]
    ExitCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("position ({row}, {col}) is outside the 12x12 grid")]
pub struct OutOfBounds {
    pub row: usize,
    pub col: usize,
}

/// Outcome of the Entrance→Exit path query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityReport {
    /// Tiles on a shortest path, both endpoints included.
    pub path_tiles: Option<usize>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.path_tiles.is_some()
    }
}

/// A 12×12 dungeon map, row-major.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridMap {
    tiles: [[TileKind; SIZE]; SIZE],
}

impl fmt::Debug for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GridMap\n")?;
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl GridMap {
    pub fn filled(kind: TileKind) -> GridMap {
        GridMap { tiles: [[kind; SIZE]; SIZE] }
    }

    pub fn get(&self, pos: Position) -> TileKind {
        self.tiles[pos.row][pos.col]
    }

    pub fn set(&mut self, pos: Position, kind: TileKind) {
        self.tiles[pos.row][pos.col] = kind;
    }

    /// Builder-style `set` for fixtures. Panics on out-of-range coordinates.
    pub fn with(mut self, row: usize, col: usize, kind: TileKind) -> GridMap {
        self.tiles[row][col] = kind;
        self
    }

    pub fn at(&self, row: usize, col: usize) -> TileKind {
        self.tiles[row][col]
    }

    pub fn rows(&self) -> &[[TileKind; SIZE]; SIZE] {
        &self.tiles
    }

    pub fn positions() -> impl Iterator<Item = Position> {
        (0..N_TOTAL).map(Position::from_index)
    }

    pub fn count(&self, kind: TileKind) -> usize {
        self.tiles.iter().flatten().filter(|&&t| t == kind).count()
    }

    /// Tile counts indexed in `TileKind::ALL` order.
    pub fn tile_counts(&self) -> [usize; 6] {
        let mut counts = [0; 6];
        for t in self.tiles.iter().flatten() {
            counts[t.index()] += 1;
        }
        counts
    }

    pub fn find(&self, kind: TileKind) -> Option<Position> {
        Self::positions().find(|&p| self.get(p) == kind)
    }

    pub fn entrance(&self) -> Option<Position> {
        self.find(TileKind::Entrance)
    }

    pub fn exit(&self) -> Option<Position> {
        self.find(TileKind::Exit)
    }

    pub fn parse(text: &str) -> Result<GridMap, ParseError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let body = body.strip_suffix('\r').unwrap_or(body);
        let lines: Vec<&str> = body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
        if lines.len() != SIZE {
            return Err(ParseError::WrongDimensions(alloc::format!("{} lines", lines.len())));
        }
        let mut map = GridMap::filled(TileKind::Wall);
        for (r, line) in lines.iter().enumerate() {
            let width = line.chars().count();
            if width != SIZE {
                return Err(ParseError::WrongDimensions(alloc::format!(
                    "{width} glyphs on line {r}"
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                let kind = TileKind::from_glyph(ch)
                    .ok_or(ParseError::UnknownGlyph { glyph: ch, line: r, col: c })?;
                map.tiles[r][c] = kind;
            }
        }
        Ok(map)
    }

    /// Twelve newline-terminated lines of glyphs.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(N_TOTAL + SIZE);
        for row in &self.tiles {
            out.extend(row.iter().map(|t| t.glyph()));
            out.push('\n');
        }
        out
    }

    /// The map as twelve glyph strings, one per row.
    pub fn to_rows(&self) -> Vec<String> {
        self.tiles.iter().map(|row| row.iter().map(|t| t.glyph()).collect()).collect()
    }

    /// Inverse of [`GridMap::to_rows`].
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<GridMap, ParseError> {
        if rows.len() != SIZE {
            return Err(ParseError::WrongDimensions(alloc::format!("{} lines", rows.len())));
        }
        let mut text = String::with_capacity(N_TOTAL + SIZE);
        for row in rows {
            let row = row.as_ref();
            if row.contains(['\n', '\r']) {
                return Err(ParseError::WrongDimensions("line break inside a row".into()));
            }
            text.push_str(row);
            text.push('\n');
        }
        GridMap::parse(&text)
    }

    pub fn validate_structure(&self) -> Result<(), StructureError> {
        let counts = self.tile_counts();
        let entrances = counts[TileKind::Entrance.index()];
        let exits = counts[TileKind::Exit.index()];
        if entrances != 1 {
            return Err(StructureError::EntranceCount(entrances));
        }
        if exits != 1 {
            return Err(StructureError::ExitCount(exits));
        }
        Ok(())
    }

    pub fn feasibility(&self) -> Result<FeasibilityReport, StructureError> {
        self.validate_structure()?;
        let start = self.entrance().expect("validated");
        let goal = self.exit().expect("validated");
        let dist = self.step_distances(start);
        Ok(FeasibilityReport { path_tiles: dist[goal.index()].map(|d| d + 1) })
    }

    pub fn is_feasible(&self) -> bool {
        self.feasibility().map(|r| r.feasible()).unwrap_or(false)
    }

    /// BFS step counts from `source` over 4-connected passable tiles.
    /// `None` marks unreachable or impassable cells.
    pub fn step_distances(&self, source: Position) -> [Option<usize>; N_TOTAL] {
        let mut dist = [None; N_TOTAL];
        if !self.get(source).is_passable() {
            return dist;
        }
        dist[source.index()] = Some(0);
        let mut queue = VecDeque::with_capacity(N_TOTAL);
        queue.push_back(source);
        while let Some(p) = queue.pop_front() {
            let d = dist[p.index()].expect("queued cells are labelled");
            for n in p.neighbours() {
                if dist[n.index()].is_none() && self.get(n).is_passable() {
                    dist[n.index()] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Advances the tile at `pos` one step through the editor cycle.
    pub fn cycle_tile(&self, pos: Position) -> Result<GridMap, OutOfBounds> {
        if pos.row >= SIZE || pos.col >= SIZE {
            return Err(OutOfBounds { row: pos.row, col: pos.col });
        }
        let mut out = *self;
        out.set(pos, self.get(pos).next());
        Ok(out)
    }

    /// Number of cells at which the two maps differ.
    pub fn edit_distance(&self, other: &GridMap) -> usize {
        self.tiles
            .iter()
            .flatten()
            .zip(other.tiles.iter().flatten())
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Distinct random Entrance/Exit cells; every other tile drawn
    /// Wall 0.35, Floor 0.45, Treasure 0.10, Enemy 0.10.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> GridMap {
        let mut map = GridMap::filled(TileKind::Floor);
        let entrance = rng.random_range(0..N_TOTAL);
        let mut exit = rng.random_range(0..N_TOTAL - 1);
        if exit >= entrance {
            exit += 1;
        }
        for i in 0..N_TOTAL {
            let kind = if i == entrance {
                TileKind::Entrance
            } else if i == exit {
                TileKind::Exit
            } else {
                match rng.random_range(0..20u32) {
                    0..=6 => TileKind::Wall,
                    7..=15 => TileKind::Floor,
                    16..=17 => TileKind::Treasure,
                    _ => TileKind::Enemy,
                }
            };
            map.set(Position::from_index(i), kind);
        }
        map
    }

    /// Draws random maps until one is feasible, giving up after `max_attempts`.
    pub fn random_feasible<R: Rng + ?Sized>(rng: &mut R, max_attempts: usize) -> Option<GridMap> {
        (0..max_attempts).map(|_| GridMap::random(rng)).find(|m| m.is_feasible())
    }
}

impl core::str::FromStr for GridMap {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GridMap::parse(s)
    }
}
