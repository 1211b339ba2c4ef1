use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use commitvec::eval::EvalError;
use commitvec::models::ModelError;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;

/// Marks an error caused by bad input rather than a runtime failure.
#[derive(Debug)]
pub struct DataError(pub String);

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub trait DataContext<T> {
    fn data(self, what: impl Into<String>) -> Result<T>;
}

impl<T, E> DataContext<T> for std::result::Result<T, E>
where
    E: Into<anyhow::Error>,
{
    fn data(self, what: impl Into<String>) -> Result<T> {
        self.map_err(|e| e.into().context(DataError(what.into())))
    }
}

pub fn data_error(message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::msg(message.into()).context(DataError("invalid input".into()))
}

/// Bad labels, sizes or vocabularies are data errors; numeric failures
/// during training are runtime errors.
pub fn model_error(e: ModelError, what: &str) -> anyhow::Error {
    let data = matches!(
        e,
        ModelError::DegenerateLabels
            | ModelError::TooFewExamples { .. }
            | ModelError::VocabMismatch { .. }
            | ModelError::Config(_)
            | ModelError::LengthMismatch { .. }
    );
    let e = anyhow::Error::new(e).context(what.to_string());
    if data {
        e.context(DataError("invalid input".into()))
    } else {
        e
    }
}

pub fn eval_error(e: EvalError, what: &str) -> anyhow::Error {
    match e {
        EvalError::Model(m) => model_error(m, what),
        EvalError::TooFewExamples { .. } | EvalError::BadFoldCount(_) => {
            anyhow::Error::new(e).context(DataError(what.to_string()))
        }
        other => anyhow::Error::new(other).context(what.to_string()),
    }
}

pub fn is_data_error(e: &anyhow::Error) -> bool {
    e.downcast_ref::<DataError>().is_some()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = BufReader::new(File::open(path)?);
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Output directory of one invocation plus what goes into its manifest.
pub struct Run {
    out: PathBuf,
    command: &'static str,
    args: serde_json::Value,
    pub seed: u64,
    pub config: Config,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    args: &'a serde_json::Value,
    seed: u64,
    config: &'a Config,
    inputs: &'a BTreeMap<String, String>,
    outputs: BTreeMap<&'a str, String>,
}

impl Run {
    pub fn new(
        out: PathBuf,
        command: &'static str,
        args: serde_json::Value,
        seed: u64,
        config: Config,
    ) -> Result<Self> {
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self { out, command, args, seed, config, inputs: BTreeMap::new(), outputs: Vec::new() })
    }

    /// Records the hash of an input file, keyed by the path as given.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path).data(format!("reading {}", path.display()))?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn input_value(&mut self, name: &str, digest: String) {
        self.inputs.insert(name.to_string(), digest);
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.path(name);
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_with<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Writes `manifest.json` listing every output with its hash.
    pub fn finish(self) -> Result<()> {
        let mut outputs = BTreeMap::new();
        for name in &self.outputs {
            outputs.insert(name.as_str(), sha256_file(&self.out.join(name))?);
        }
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            args: &self.args,
            seed: self.seed,
            config: &self.config,
            inputs: &self.inputs,
            outputs,
        };
        let mut w = BufWriter::new(File::create(self.out.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut w, &m)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_marker_survives_more_context() {
        let e: Result<()> = Err(std::io::Error::other("boom")).data("reading corpus");
        let e = e.context("outer").unwrap_err();
        assert!(is_data_error(&e));
        let plain = anyhow::anyhow!("boom");
        assert!(!is_data_error(&plain));
        assert!(is_data_error(&data_error("bad")));
    }
}
