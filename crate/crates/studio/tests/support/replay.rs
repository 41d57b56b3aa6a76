#![allow(dead_code)]

use std::path::Path;

use dungeon_core::SessionConfig;
use dungeon_studio::journal::{read_events, replay, Journal, JOURNAL_EXTENSION};
use dungeon_studio::simulate::{simulate, ModeChoice, Policy, SimConfig};

pub fn config(policy: Policy, sessions: usize, seed: u64) -> SimConfig {
    SimConfig { policy, sessions, seed, mode: ModeChoice::Auto, session: SessionConfig::with_budget(200) }
}

fn journals(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == JOURNAL_EXTENSION))
        .collect();
    out.sort();
    out
}

/// Simulates twice with journals, then checks that reruns and replays give
/// byte-identical logs.
pub fn check_simulated_replay(config: &SimConfig) -> Result<(), String> {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = simulate(config, Some(a.path())).map_err(|e| e.to_string())?;
    let second = simulate(config, Some(b.path())).map_err(|e| e.to_string())?;
    if serde_json::to_string(&first).unwrap() != serde_json::to_string(&second).unwrap() {
        return Err("reruns differ".into());
    }
    let paths = journals(a.path());
    if paths.len() != config.sessions {
        return Err(format!("{} journals for {} sessions", paths.len(), config.sessions));
    }
    for (path, summary) in paths.iter().zip(&first.sessions) {
        let twin = b.path().join(path.file_name().unwrap());
        if std::fs::read(path).unwrap() != std::fs::read(&twin).unwrap() {
            return Err(format!("{} differs between runs", path.display()));
        }
        let (events, _) = read_events(path).map_err(|e| e.to_string())?;
        let session = replay(path, &events).map_err(|e| e.to_string())?;
        if session.id() != summary.session_id {
            return Err(format!("{} holds {}", path.display(), session.id()));
        }
        let replayed = serde_json::to_vec(&session.export_log()).unwrap();
        if replayed != serde_json::to_vec(&summary.log).unwrap() {
            return Err(format!("{} replays to a different log", summary.session_id));
        }
        if session.is_complete() && session.export_final_screen().is_err() {
            return Err("complete session cannot export".into());
        }
    }
    Ok(())
}

/// Cuts `path` at every line boundary and inside every line, reopens each
/// copy, and checks it matches a replay of the intact events.
pub fn check_crash_recovery(path: &Path) -> Result<usize, String> {
    let bytes = std::fs::read(path).unwrap();
    let (events, _) = read_events(path).map_err(|e| e.to_string())?;
    let ends: Vec<usize> = bytes.iter().enumerate().filter(|(_, b)| **b == b'\n').map(|(i, _)| i + 1).collect();
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("cut.jsonl");
    let mut checked = 0;
    for (k, &end) in ends.iter().enumerate() {
        let start = if k == 0 { 0 } else { ends[k - 1] };
        for cut in [start + (end - start) / 2, end - 1, end] {
            std::fs::write(&copy, &bytes[..cut]).unwrap();
            let intact = if cut == end { k + 1 } else { k };
            let opened = Journal::open(&copy);
            if intact == 0 {
                if opened.is_ok() {
                    return Err("opened a journal without its header".into());
                }
                continue;
            }
            let (_, recovered) = opened.map_err(|e| format!("cut at {cut}: {e}"))?;
            let expected = replay(path, &events[..intact]).map_err(|e| e.to_string())?;
            if recovered != expected {
                return Err(format!("cut at {cut}: state differs from replay of {intact} events"));
            }
            let kept = if intact == 0 { 0 } else { ends[intact - 1] };
            if std::fs::read(&copy).unwrap() != bytes[..kept] {
                return Err(format!("cut at {cut}: torn tail not removed"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Simulates with journals and runs the crash check on every journal.
pub fn check_simulated_crashes(config: &SimConfig) -> Result<usize, String> {
    let dir = tempfile::tempdir().unwrap();
    simulate(config, Some(dir.path())).map_err(|e| e.to_string())?;
    let mut total = 0;
    for path in journals(dir.path()) {
        total += check_crash_recovery(&path)?;
    }
    Ok(total)
}
