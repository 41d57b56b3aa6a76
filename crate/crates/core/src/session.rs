//! The interactive design loop as a state machine.
//!
//! The designer submits a first level, then repeatedly receives suggestions,
//! edits them and tags them like and/or keep. Liked or kept maps join the
//! target set for the next optimisation run; kept maps fill the level list.
//! The session completes when five levels are held.
//!
//! Every operation either succeeds or leaves the session untouched.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::evolution::{random_suggestions, run_optimisation, select_suggestions, EvolutionError, GaParams};
use crate::grid::{GridMap, StructureError};
use crate::metrics::{compute_metrics, MetricVector, MetricsError};
use crate::ranking::TargetSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionMode {
    Ga,
    Control,
}

impl SessionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionMode::Ga => "ga",
            SessionMode::Control => "control",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MapRejection {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("map has no passable path from entrance to exit")]
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("user id must not be empty")]
    EmptyUserId,
    #[error("the initial level has already been submitted")]
    NotAtStart,
    #[error("the initial level has not been submitted yet")]
    NotStarted,
    #[error("session is complete")]
    SessionComplete,
    #[error("session is not complete")]
    SessionIncomplete,
    #[error("invalid map: {0}")]
    InvalidMap(MapRejection),
    #[error("no suggestion with index {0}")]
    UnknownSuggestionIndex(usize),
    #[error("suggestion {0} appears in more than one decision")]
    DuplicateSuggestionIndex(usize),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// GA when the low bit of the ID's FNV-1a hash is clear.
pub fn assign_mode(user_id: &str) -> Result<SessionMode, SessionError> {
    if user_id.is_empty() {
        return Err(SessionError::EmptyUserId);
    }
    Ok(if fnv1a(user_id.as_bytes()) & 1 == 0 { SessionMode::Ga } else { SessionMode::Control })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub params: GaParams,
    pub suggestion_count: usize,
    pub level_goal: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { params: GaParams::default(), suggestion_count: 8, level_goal: 5 }
    }
}

impl SessionConfig {
    pub fn with_budget(budget: usize) -> SessionConfig {
        let mut config = SessionConfig::default();
        config.params.evaluation_budget = budget;
        config
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Suggestion {
    pub original: GridMap,
    pub current: GridMap,
}

/// The designer's verdict on one suggestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub index: usize,
    pub edited: GridMap,
    pub liked: bool,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub likes: usize,
    pub keeps: usize,
    pub edits_of_liked: Vec<usize>,
    pub edits_of_kept: Vec<usize>,
    pub blank_used: bool,
}

/// The exported quantitative log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogDocument {
    pub group: SessionMode,
    pub blank_creations: usize,
    pub iterations: Vec<IterationRecord>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IterateOutcome {
    Suggestions(Vec<GridMap>),
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterateReport {
    pub outcome: IterateOutcome,
    /// Keep tags dropped because the level list was already full.
    pub ignored_keeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    id: String,
    user_id: String,
    mode: SessionMode,
    seed: u64,
    config: SessionConfig,
    liked: Vec<GridMap>,
    liked_metrics: Vec<MetricVector>,
    levels: Vec<GridMap>,
    suggestions: Vec<Suggestion>,
    iteration: usize,
    records: Vec<IterationRecord>,
    blank_creations: usize,
    blank_pending: bool,
    complete: bool,
}

fn admit(map: &GridMap) -> Result<MetricVector, SessionError> {
    compute_metrics(map).map_err(|e| {
        SessionError::InvalidMap(match e {
            MetricsError::StructurallyInvalid(s) => MapRejection::Structure(s),
            _ => MapRejection::Infeasible,
        })
    })
}

impl Session {
    /// A session whose mode follows from the user ID.
    pub fn new(id: impl Into<String>, user_id: &str, seed: u64, config: SessionConfig) -> Result<Session, SessionError> {
        let mode = assign_mode(user_id)?;
        Session::with_mode(id, user_id, seed, config, mode)
    }

    /// A session with an explicit mode, for simulations.
    pub fn with_mode(
        id: impl Into<String>,
        user_id: &str,
        seed: u64,
        config: SessionConfig,
        mode: SessionMode,
    ) -> Result<Session, SessionError> {
        if user_id.is_empty() {
            return Err(SessionError::EmptyUserId);
        }
        config.params.validate()?;
        Ok(Session {
            id: id.into(),
            user_id: user_id.into(),
            mode,
            seed,
            config,
            liked: Vec::new(),
            liked_metrics: Vec::new(),
            levels: Vec::new(),
            suggestions: Vec::new(),
            iteration: 0,
            records: Vec::new(),
            blank_creations: 0,
            blank_pending: false,
            complete: false,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    /// The experimental condition. Only log export should disclose it.
    pub fn mode(&self) -> SessionMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn liked(&self) -> &[GridMap] {
        &self.liked
    }

    pub fn levels(&self) -> &[GridMap] {
        &self.levels
    }

    pub fn suggestions(&self) -> &[Suggestion] {
        &self.suggestions
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn blank_creations(&self) -> usize {
        self.blank_creations
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn targets(&self) -> Option<TargetSet> {
        TargetSet::new(self.liked_metrics.clone()).ok()
    }

    fn generate(&self, iteration: usize) -> Result<Vec<GridMap>, SessionError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(iteration as u64);
        let n = self.config.suggestion_count;
        let maps = match self.mode {
            SessionMode::Control => random_suggestions(n, &mut rng)?,
            SessionMode::Ga => {
                let targets = TargetSet::new(self.liked_metrics.clone()).map_err(EvolutionError::from)?;
                let outcome = run_optimisation(&targets, &self.config.params, &mut rng)?;
                select_suggestions(&outcome.population.feasible, n, &mut rng)?
            }
        };
        Ok(maps)
    }

    fn show(&mut self, maps: &[GridMap]) {
        self.suggestions = maps.iter().map(|&m| Suggestion { original: m, current: m }).collect();
    }

    fn ensure_active(&self) -> Result<(), SessionError> {
        if self.complete {
            return Err(SessionError::SessionComplete);
        }
        if self.iteration == 0 {
            return Err(SessionError::NotStarted);
        }
        Ok(())
    }

    /// Stores the first level and produces the first suggestions.
    pub fn submit_initial(&mut self, map: GridMap) -> Result<Vec<GridMap>, SessionError> {
        if self.iteration != 0 || self.complete {
            return Err(SessionError::NotAtStart);
        }
        let metrics = admit(&map)?;
        let mut next = self.clone();
        next.liked.push(map);
        next.liked_metrics.push(metrics);
        next.levels.push(map);
        next.iteration = 1;
        if next.levels.len() >= next.config.level_goal {
            next.complete = true;
            *self = next;
            return Ok(Vec::new());
        }
        let maps = next.generate(1)?;
        next.show(&maps);
        *self = next;
        Ok(maps)
    }

    /// Applies the designer's tags, then either completes or suggests more.
    pub fn iterate(&mut self, decisions: &[Decision]) -> Result<IterateReport, SessionError> {
        self.ensure_active()?;
        let mut seen = alloc::vec![false; self.suggestions.len()];
        for d in decisions {
            let slot = seen.get_mut(d.index).ok_or(SessionError::UnknownSuggestionIndex(d.index))?;
            if *slot {
                return Err(SessionError::DuplicateSuggestionIndex(d.index));
            }
            *slot = true;
        }
        let mut admitted = Vec::with_capacity(decisions.len());
        for d in decisions {
            admitted.push(if d.liked || d.kept { Some(admit(&d.edited)?) } else { None });
        }

        let mut next = self.clone();
        let mut record = IterationRecord {
            iteration: self.iteration,
            likes: 0,
            keeps: 0,
            edits_of_liked: Vec::new(),
            edits_of_kept: Vec::new(),
            blank_used: next.blank_pending,
        };
        let mut ignored_keeps = 0;
        for (d, metrics) in decisions.iter().zip(admitted) {
            next.suggestions[d.index].current = d.edited;
            let Some(metrics) = metrics else { continue };
            let edits = next.suggestions[d.index].original.edit_distance(&d.edited);
            next.liked.push(d.edited);
            next.liked_metrics.push(metrics);
            if d.liked {
                record.likes += 1;
                record.edits_of_liked.push(edits);
            }
            if d.kept {
                if next.levels.len() < next.config.level_goal {
                    next.levels.push(d.edited);
                    record.keeps += 1;
                    record.edits_of_kept.push(edits);
                } else {
                    ignored_keeps += 1;
                }
            }
        }
        next.records.push(record);
        next.blank_pending = false;

        if next.levels.len() >= next.config.level_goal {
            next.complete = true;
            *self = next;
            return Ok(IterateReport { outcome: IterateOutcome::Complete, ignored_keeps });
        }
        let maps = next.generate(next.iteration + 1)?;
        next.iteration += 1;
        next.show(&maps);
        *self = next;
        Ok(IterateReport { outcome: IterateOutcome::Suggestions(maps), ignored_keeps })
    }

    /// A map drawn on the blank canvas; it counts as liked and kept.
    pub fn submit_blank(&mut self, map: GridMap) -> Result<(), SessionError> {
        self.ensure_active()?;
        let metrics = admit(&map)?;
        let mut next = self.clone();
        next.liked.push(map);
        next.liked_metrics.push(metrics);
        next.levels.push(map);
        next.blank_creations += 1;
        next.blank_pending = true;
        if next.levels.len() >= next.config.level_goal {
            next.records.push(IterationRecord {
                iteration: next.iteration,
                likes: 0,
                keeps: 0,
                edits_of_liked: Vec::new(),
                edits_of_kept: Vec::new(),
                blank_used: true,
            });
            next.blank_pending = false;
            next.complete = true;
        }
        *self = next;
        Ok(())
    }

    pub fn export_log(&self) -> LogDocument {
        LogDocument {
            group: self.mode,
            blank_creations: self.blank_creations,
            iterations: self.records.clone(),
            complete: self.complete,
        }
    }

    /// The kept levels followed by the last suggestion set, each as a headed
    /// block of map text.
    pub fn export_final_screen(&self) -> Result<String, SessionError> {
        if !self.complete {
            return Err(SessionError::SessionIncomplete);
        }
        let mut out = String::new();
        for (i, level) in self.levels.iter().enumerate() {
            out.push_str(&format!("# level {}\n{}\n", i + 1, level.to_text()));
        }
        for (i, s) in self.suggestions.iter().enumerate() {
            out.push_str(&format!("# suggestion {}\n{}\n", i + 1, s.current.to_text()));
        }
        Ok(out)
    }
}
