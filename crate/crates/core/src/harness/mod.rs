//! Configuration, persistence and orchestration for the command-line front end.

mod commands;
mod config;
mod output;
mod snapshot;

pub use commands::{curve_family, run, Command, Contract, Outcome};
pub use config::{Config, FamilyKind, DEFAULT_CONFIG, REQUIRED_KEYS};
pub use output::{csv_string, write_csv, write_json, DiagnosticsCsvRow, DissipationCsvRow, ForcingCsvRow, Provenance};
pub use snapshot::{Snapshot, SnapshotKind, HEADER_LEN, MAGIC, VERSION};
