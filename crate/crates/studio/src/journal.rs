//! Append-only session journals, one JSON event per line.
//!
//! Events are written only after the operation they describe has succeeded, so
//! replaying a journal through the same code path rebuilds the session exactly.
//! A torn final line left by a crash is dropped on reopen.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use dungeon_core::grid::ParseError;
use dungeon_core::session::{Decision, IterateOutcome, SessionError};
use dungeon_core::{GridMap, Session, SessionConfig, SessionMode};
use serde::{Deserialize, Serialize};

use crate::formats::ApiMap;

pub const JOURNAL_EXTENSION: &str = "jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub index: usize,
    pub map: ApiMap,
    pub liked: bool,
    pub kept: bool,
}

impl DecisionRecord {
    pub fn to_decision(&self) -> Result<Decision, ParseError> {
        Ok(Decision { index: self.index, edited: GridMap::try_from(&self.map)?, liked: self.liked, kept: self.kept })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        user_id: String,
        seed: u64,
        config: SessionConfig,
        /// Set only when the mode was forced instead of derived from the user ID.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<SessionMode>,
    },
    InitialSubmitted {
        map: ApiMap,
    },
    Iterated {
        decisions: Vec<DecisionRecord>,
    },
    BlankSubmitted {
        map: ApiMap,
    },
    Completed,
}

#[derive(Debug, thiserror::Error)]
pub enum ApplyError {
    #[error("invalid map: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("event {0} cannot be applied to an existing session")]
    Unexpected(&'static str),
    #[error("completed event recorded for an incomplete session")]
    NotComplete,
}

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path} line {line}: {source}")]
    Corrupt { path: String, line: usize, source: serde_json::Error },
    #[error("{path}: journal does not start with session-created")]
    MissingHeader { path: String },
    #[error("{path} line {line}: {source}")]
    Replay { path: String, line: usize, source: ApplyError },
    #[error("session id {0:?} is not usable as a file name")]
    BadSessionId(String),
    #[error("journal for session {0} already exists")]
    Exists(String),
}

/// What applying an event produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applied {
    Suggestions(Vec<GridMap>),
    Complete,
    Recorded,
}

/// Builds the session a `session-created` event describes.
pub fn create_session(event: &Event) -> Result<Session, ApplyError> {
    match event {
        Event::SessionCreated { session_id, user_id, seed, config, mode } => Ok(match mode {
            Some(mode) => Session::with_mode(session_id.clone(), user_id, *seed, *config, *mode)?,
            None => Session::new(session_id.clone(), user_id, *seed, *config)?,
        }),
        _ => Err(ApplyError::Unexpected("other than session-created")),
    }
}

/// Runs the session operation an event describes. Failed operations leave the
/// session untouched.
pub fn apply(session: &mut Session, event: &Event) -> Result<Applied, ApplyError> {
    match event {
        Event::SessionCreated { .. } => Err(ApplyError::Unexpected("session-created")),
        Event::InitialSubmitted { map } => {
            let maps = session.submit_initial(GridMap::try_from(map)?)?;
            Ok(if session.is_complete() { Applied::Complete } else { Applied::Suggestions(maps) })
        }
        Event::Iterated { decisions } => {
            let decisions = decisions.iter().map(DecisionRecord::to_decision).collect::<Result<Vec<_>, _>>()?;
            Ok(match session.iterate(&decisions)?.outcome {
                IterateOutcome::Suggestions(maps) => Applied::Suggestions(maps),
                IterateOutcome::Complete => Applied::Complete,
            })
        }
        Event::BlankSubmitted { map } => {
            session.submit_blank(GridMap::try_from(map)?)?;
            Ok(if session.is_complete() { Applied::Complete } else { Applied::Recorded })
        }
        Event::Completed => {
            if !session.is_complete() {
                return Err(ApplyError::NotComplete);
            }
            Ok(Applied::Complete)
        }
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> JournalError + '_ {
    move |source| JournalError::Io { path: path.display().to_string(), source }
}

pub fn journal_path(dir: &Path, session_id: &str) -> Result<PathBuf, JournalError> {
    if !valid_id(session_id) {
        return Err(JournalError::BadSessionId(session_id.into()));
    }
    Ok(dir.join(format!("{session_id}.{JOURNAL_EXTENSION}")))
}

/// Parses a journal. Returns the events and the byte length of the intact
/// prefix; an unterminated final line that does not parse counts as torn.
pub fn read_events(path: &Path) -> Result<(Vec<Event>, usize), JournalError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut events = Vec::new();
    let mut intact = 0;
    let mut rest = text.as_str();
    let mut line_no = 0;
    while !rest.is_empty() {
        line_no += 1;
        let (line, terminated) = match rest.find('\n') {
            Some(i) => (&rest[..i], true),
            None => (rest, false),
        };
        rest = if terminated { &rest[line.len() + 1..] } else { "" };
        if line.trim().is_empty() {
            intact += line.len() + usize::from(terminated);
            continue;
        }
        match serde_json::from_str::<Event>(line) {
            Ok(event) if terminated => {
                events.push(event);
                intact += line.len() + 1;
            }
            Ok(_) => break,
            Err(_) if !terminated => break,
            Err(source) => return Err(JournalError::Corrupt { path: path.display().to_string(), line: line_no, source }),
        }
    }
    Ok((events, intact))
}

/// Rebuilds a session from its events.
pub fn replay(path: &Path, events: &[Event]) -> Result<Session, JournalError> {
    let display = || path.display().to_string();
    let (first, rest) = events.split_first().ok_or_else(|| JournalError::MissingHeader { path: display() })?;
    let mut session =
        create_session(first).map_err(|_| JournalError::MissingHeader { path: display() })?;
    for (i, event) in rest.iter().enumerate() {
        apply(&mut session, event).map_err(|source| JournalError::Replay { path: display(), line: i + 2, source })?;
    }
    Ok(session)
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    /// Starts a journal for a new session; the file must not exist yet.
    pub fn create(dir: &Path, created: &Event) -> Result<(Journal, Session), JournalError> {
        let Event::SessionCreated { session_id, .. } = created else {
            return Err(JournalError::MissingHeader { path: dir.display().to_string() });
        };
        let path = journal_path(dir, session_id)?;
        let session = create_session(created)
            .map_err(|source| JournalError::Replay { path: path.display().to_string(), line: 1, source })?;
        let file = OpenOptions::new().create_new(true).append(true).open(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                JournalError::Exists(session_id.clone())
            } else {
                io_err(&path)(e)
            }
        })?;
        let mut journal = Journal { path, file };
        journal.append(created)?;
        Ok((journal, session))
    }

    /// Replays an existing journal and reopens it for appending, cutting off a
    /// torn final line.
    pub fn open(path: &Path) -> Result<(Journal, Session), JournalError> {
        let (events, intact) = read_events(path)?;
        let session = replay(path, &events)?;
        let file = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
        file.set_len(intact as u64).map_err(io_err(path))?;
        drop(file);
        let file = OpenOptions::new().append(true).open(path).map_err(io_err(path))?;
        Ok((Journal { path: path.to_path_buf(), file }, session))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one event line and syncs it to disk.
    pub fn append(&mut self, event: &Event) -> Result<(), JournalError> {
        let mut line = serde_json::to_string(event).expect("events always serialize");
        line.push('\n');
        self.file.write_all(line.as_bytes()).map_err(io_err(&self.path))?;
        self.file.sync_data().map_err(io_err(&self.path))
    }

    /// Appends `event`, followed by `completed` when it finished the session.
    pub fn record(&mut self, event: &Event, applied: &Applied) -> Result<(), JournalError> {
        self.append(event)?;
        if *applied == Applied::Complete && !matches!(event, Event::Completed) {
            self.append(&Event::Completed)?;
        }
        Ok(())
    }
}

/// Opens every journal in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<(Journal, Session)>, JournalError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == JOURNAL_EXTENSION))
        .collect();
    paths.sort();
    paths.iter().map(|p| Journal::open(p)).collect()
}
