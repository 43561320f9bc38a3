//! Location of the shipped data files.
//!
//! The directory defaults to the `data/` folder of this crate and can be
//! overridden with the `BRESTRICT_DATA` environment variable.

use std::path::{Path, PathBuf};

/// Environment variable overriding the data directory.
pub const DATA_ENV: &str = "BRESTRICT_DATA";

pub fn data_dir() -> PathBuf {
    match std::env::var_os(DATA_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")),
    }
}

/// Resolves a file argument: an existing path is used as given, anything
/// else is looked up in [`data_dir`].
pub fn resolve(name: &str) -> PathBuf {
    let direct = Path::new(name);
    if direct.exists() {
        return direct.to_path_buf();
    }
    data_dir().join(name)
}

/// Sorted names of the data files with the given extension (without dot).
pub fn list(extension: &str) -> std::io::Result<Vec<String>> {
    let mut names: Vec<String> = std::fs::read_dir(data_dir())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| Path::new(n).extension().is_some_and(|x| x == extension))
        .collect();
    names.sort();
    Ok(names)
}
