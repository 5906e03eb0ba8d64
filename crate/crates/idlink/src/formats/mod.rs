//! On-disk formats and path-aware helpers around them.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub mod checkpoint;
pub mod logs;
pub mod metrics;
pub mod text;

/// Opens `path` and runs `read`, attaching the path to any error.
pub fn read_file<T>(path: &Path, read: impl FnOnce(BufReader<File>) -> Result<T>) -> Result<T> {
    let f = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    read(BufReader::new(f)).map_err(|e| e.in_file(path))
}

/// Creates (or truncates) `path` and runs `write`, attaching the path to any
/// error.
pub fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::from(e).in_file(path))?;
    let mut w = BufWriter::new(f);
    write(&mut w).and_then(|()| w.flush().map_err(Error::from)).map_err(|e| e.in_file(path))
}
