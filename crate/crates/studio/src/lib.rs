pub mod bench;
pub mod formats;
pub mod journal;
pub mod simulate;
pub mod service;
