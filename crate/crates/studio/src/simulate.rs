//! Scripted designers that drive whole sessions headlessly.

use std::path::Path;

use dungeon_core::grid::Position;
use dungeon_core::ranking::fitness;
use dungeon_core::session::{assign_mode, LogDocument, SessionError};
use dungeon_core::stats::{welch_t, WelchResult};
use dungeon_core::{compute_metrics, GridMap, Session, SessionConfig, SessionMode, TileKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::journal::{self, Applied, ApplyError, DecisionRecord, Event, Journal, JournalError};

/// Sessions that have not finished after this many suggestion rounds are
/// abandoned and reported incomplete.
pub const MAX_ROUNDS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    /// Likes and keeps every suggestion unedited.
    KeepEverything,
    /// Keeps the `k` suggestions closest to the current targets by fitness sum.
    KeepBestK(usize),
    /// Tags suggestions at random and edits some of them.
    RandomTagger,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown policy {0:?}; use keep-everything, keep-best-k, keep-best-<k> or random-tagger")]
pub struct UnknownPolicy(pub String);

impl std::str::FromStr for Policy {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Policy, UnknownPolicy> {
        match s {
            "keep-everything" => Ok(Policy::KeepEverything),
            "keep-best-k" => Ok(Policy::KeepBestK(1)),
            "random-tagger" => Ok(Policy::RandomTagger),
            _ => s
                .strip_prefix("keep-best-")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k > 0)
                .map(Policy::KeepBestK)
                .ok_or_else(|| UnknownPolicy(s.into())),
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Policy::KeepEverything => f.write_str("keep-everything"),
            Policy::KeepBestK(k) => write!(f, "keep-best-{k}"),
            Policy::RandomTagger => f.write_str("random-tagger"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Ga,
    Control,
    /// Derived from the simulated user ID, as in the study.
    Auto,
}

impl std::str::FromStr for ModeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<ModeChoice, String> {
        match s {
            "ga" => Ok(ModeChoice::Ga),
            "control" => Ok(ModeChoice::Control),
            "auto" => Ok(ModeChoice::Auto),
            _ => Err(format!("unknown mode {s:?}; use ga, control or auto")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub policy: Policy,
    pub sessions: usize,
    pub seed: u64,
    pub mode: ModeChoice,
    pub session: SessionConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Apply(#[from] ApplyError),
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("could not draw a feasible map")]
    NoFeasibleMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub user_id: String,
    pub log: LogDocument,
    /// The initial submission plus one per suggestion round.
    pub iterations_to_complete: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAggregate {
    pub sessions: usize,
    pub completed: usize,
    pub mean_likes_per_iteration: Option<f64>,
    pub mean_keeps_per_iteration: Option<f64>,
    /// Mean tile edits over every liked or kept map.
    pub mean_edits: Option<f64>,
    pub mean_iterations_to_complete: Option<f64>,
    pub blank_creations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub policy: String,
    pub seed: u64,
    pub sessions: Vec<SessionSummary>,
    pub ga: GroupAggregate,
    pub control: GroupAggregate,
    /// Welch's t on per-session mean edits, GA against control; absent when
    /// either group is too small or both have zero variance.
    pub edits_welch: Option<WelchResult>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn session_edits(log: &LogDocument) -> Vec<usize> {
    log.iterations.iter().flat_map(|r| r.edits_of_liked.iter().chain(&r.edits_of_kept).copied()).collect()
}

fn aggregate(summaries: &[&SessionSummary]) -> GroupAggregate {
    let records = || summaries.iter().flat_map(|s| &s.log.iterations);
    GroupAggregate {
        sessions: summaries.len(),
        completed: summaries.iter().filter(|s| s.log.complete).count(),
        mean_likes_per_iteration: mean(records().map(|r| r.likes as f64)),
        mean_keeps_per_iteration: mean(records().map(|r| r.keeps as f64)),
        mean_edits: mean(summaries.iter().flat_map(|s| session_edits(&s.log)).map(|e| e as f64)),
        mean_iterations_to_complete: mean(summaries.iter().filter_map(|s| s.iterations_to_complete).map(|n| n as f64)),
        blank_creations: summaries.iter().map(|s| s.log.blank_creations).sum(),
    }
}

/// Cycles a few random tiles, keeping the map feasible.
fn random_edits<R: Rng + ?Sized>(map: &GridMap, rng: &mut R) -> GridMap {
    let mut out = *map;
    let wanted = rng.random_range(0..=4);
    for _ in 0..wanted {
        for _ in 0..20 {
            let pos = Position::new(rng.random_range(0..12), rng.random_range(0..12)).expect("in range");
            if !matches!(out.get(pos), TileKind::Wall | TileKind::Floor | TileKind::Treasure) {
                continue;
            }
            let candidate = out.cycle_tile(pos).expect("in range");
            if candidate.is_feasible() {
                out = candidate;
                break;
            }
        }
    }
    out
}

fn decide<R: Rng + ?Sized>(
    policy: Policy,
    session: &Session,
    rng: &mut R,
) -> Result<(Vec<DecisionRecord>, Option<GridMap>), SimError> {
    let shown = session.suggestions();
    let record = |index: usize, map: GridMap, liked: bool, kept: bool| DecisionRecord { index, map: map.into(), liked, kept };
    Ok(match policy {
        Policy::KeepEverything => {
            (shown.iter().enumerate().map(|(i, s)| record(i, s.current, true, true)).collect(), None)
        }
        Policy::KeepBestK(k) => {
            let targets = session.targets().expect("a started session has targets");
            let mut scored: Vec<(f64, usize)> = shown
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let m = compute_metrics(&s.current).expect("suggestions are feasible");
                    (fitness(&m, &targets, true).expect("targets are non-empty").sum(), i)
                })
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut picks: Vec<usize> = scored.iter().take(k).map(|s| s.1).collect();
            picks.sort_unstable();
            (picks.into_iter().map(|i| record(i, shown[i].current, false, true)).collect(), None)
        }
        Policy::RandomTagger => {
            let mut decisions = Vec::new();
            for (i, s) in shown.iter().enumerate() {
                let liked = rng.random_bool(0.3);
                let kept = rng.random_bool(0.15);
                if liked || kept {
                    let edited = if rng.random_bool(0.5) { random_edits(&s.current, rng) } else { s.current };
                    decisions.push(record(i, edited, liked, kept));
                }
            }
            let blank = if rng.random_bool(0.05) {
                Some(GridMap::random_feasible(rng, 10_000).ok_or(SimError::NoFeasibleMap)?)
            } else {
                None
            };
            (decisions, blank)
        }
    })
}

struct Runner {
    session: Session,
    journal: Option<Journal>,
}

impl Runner {
    fn run(&mut self, event: Event) -> Result<Applied, SimError> {
        let applied = journal::apply(&mut self.session, &event)?;
        if let Some(j) = self.journal.as_mut() {
            j.record(&event, &applied)?;
        }
        Ok(applied)
    }
}

/// Runs one scripted session; `index` selects its user ID and random streams.
pub fn run_session(config: &SimConfig, index: usize, journal_dir: Option<&Path>) -> Result<SessionSummary, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let user_id = format!("sim-{}-{index}", config.seed);
    let session_id = format!("sim-{}-{index:05}", config.seed);
    let mode = match config.mode {
        ModeChoice::Ga => SessionMode::Ga,
        ModeChoice::Control => SessionMode::Control,
        ModeChoice::Auto => assign_mode(&user_id)?,
    };
    let created = Event::SessionCreated {
        session_id: session_id.clone(),
        user_id: user_id.clone(),
        seed: rng.random(),
        config: config.session,
        mode: Some(mode),
    };
    let (session, journal) = match journal_dir {
        Some(dir) => {
            let (j, s) = Journal::create(dir, &created)?;
            (s, Some(j))
        }
        None => (journal::create_session(&created)?, None),
    };
    let mut runner = Runner { session, journal };

    let initial = GridMap::random_feasible(&mut rng, 10_000).ok_or(SimError::NoFeasibleMap)?;
    let mut applied = runner.run(Event::InitialSubmitted { map: initial.into() })?;
    let mut rounds = 0;
    while applied != Applied::Complete && rounds < MAX_ROUNDS {
        rounds += 1;
        let (decisions, blank) = decide(config.policy, &runner.session, &mut rng)?;
        if let Some(map) = blank {
            if runner.run(Event::BlankSubmitted { map: map.into() })? == Applied::Complete {
                break;
            }
        }
        applied = runner.run(Event::Iterated { decisions })?;
    }
    let log = runner.session.export_log();
    let iterations_to_complete = log.complete.then(|| 1 + log.iterations.len());
    Ok(SessionSummary { session_id, user_id, log, iterations_to_complete })
}

pub fn simulate(config: &SimConfig, journal_dir: Option<&Path>) -> Result<SimReport, SimError> {
    let mut sessions: Vec<(usize, SessionSummary)> = (0..config.sessions)
        .into_par_iter()
        .map(|i| run_session(config, i, journal_dir).map(|s| (i, s)))
        .collect::<Result<_, _>>()?;
    sessions.sort_by_key(|s| s.0);
    let sessions: Vec<SessionSummary> = sessions.into_iter().map(|s| s.1).collect();

    let ga: Vec<&SessionSummary> = sessions.iter().filter(|s| s.log.group == SessionMode::Ga).collect();
    let control: Vec<&SessionSummary> = sessions.iter().filter(|s| s.log.group == SessionMode::Control).collect();
    let per_session = |group: &[&SessionSummary]| -> Vec<f64> {
        group.iter().filter_map(|s| mean(session_edits(&s.log).into_iter().map(|e| e as f64))).collect()
    };
    let edits_welch = welch_t(&per_session(&ga), &per_session(&control)).ok();
    Ok(SimReport {
        policy: config.policy.to_string(),
        seed: config.seed,
        ga: aggregate(&ga),
        control: aggregate(&control),
        sessions,
        edits_welch,
    })
}
