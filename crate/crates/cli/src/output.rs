//! CSV and JSON rendering. Floats in CSV use a fixed `{:.16e}` layout so that
//! files are byte-identical across runs, platforms and locales.

use std::fs;
use std::path::{Path, PathBuf};

use fieldctl_core::C64;
use serde::Serialize;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `[re, im]` pair for JSON output.
pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// JSON has no NaN; undefined values become `null`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// In-memory CSV table with a fixed header.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record(header)
            .expect("writing to memory cannot fail");
        Self { writer }
    }

    /// One row of labelled integers followed by floats.
    pub fn row(&mut self, ints: &[usize], floats: &[f64]) {
        let record = ints
            .iter()
            .map(|i| i.to_string())
            .chain(floats.iter().map(|&x| float(x)));
        self.writer
            .write_record(record)
            .expect("writing to memory cannot fail");
    }

    pub fn into_string(self) -> String {
        let bytes = self
            .writer
            .into_inner()
            .expect("writing to memory cannot fail");
        String::from_utf8(bytes).expect("CSV content is ASCII")
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output documents serialise");
    text.push('\n');
    text
}

#[derive(Debug, thiserror::Error)]
pub enum WriteError {
    #[error("{0} already exists (pass --overwrite to replace it)")]
    Exists(PathBuf),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// An output directory that refuses to clobber files unless told to.
#[derive(Clone, Debug)]
pub struct OutputDir {
    root: PathBuf,
    overwrite: bool,
}

impl OutputDir {
    pub fn new(root: impl Into<PathBuf>, overwrite: bool) -> Self {
        Self {
            root: root.into(),
            overwrite,
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Fails on the first of `names` that exists, unless overwriting.
    pub fn check(&self, names: &[&str]) -> Result<(), WriteError> {
        if self.overwrite {
            return Ok(());
        }
        match names.iter().map(|n| self.path(n)).find(|p| p.exists()) {
            Some(p) => Err(WriteError::Exists(p)),
            None => Ok(()),
        }
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, WriteError> {
        let path = self.path(name);
        self.check(&[name])?;
        let io = |source| WriteError::Io {
            path: path.clone(),
            source,
        };
        fs::create_dir_all(&self.root).map_err(io)?;
        fs::write(&path, contents).map_err(io)?;
        Ok(path)
    }
}
