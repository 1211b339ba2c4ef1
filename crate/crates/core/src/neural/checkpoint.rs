//! `CVEC1` parameter checkpoints.
//!
//! Layout: the line `CVEC1`, one line of JSON header (tensor manifest plus
//! free-form metadata), then the raw little-endian payload. Tensor offsets in
//! the header are relative to the first payload byte.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{NeuralError, Parameter, Tensor};
use crate::scalar::{Dtype, Scalar};

pub const MAGIC: &str = "CVEC1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a CVEC1 checkpoint (found {0:?})")]
    BadMagic(String),
    #[error("checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("checkpoint has no tensor named {0:?}")]
    MissingTensor(String),
    #[error("tensor {name:?}: payload range {offset}+{nbytes} exceeds {len} bytes")]
    Truncated { name: String, offset: usize, nbytes: usize, len: usize },
    #[error(transparent)]
    Tensor(#[from] NeuralError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: Dtype,
    pub offset: usize,
    pub nbytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tensors: Vec<TensorEntry>,
    #[serde(default)]
    pub meta: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub header: Header,
    payload: Vec<u8>,
}

pub fn write_checkpoint<S: Scalar, W: Write>(
    mut out: W,
    params: &[&Parameter<S>],
    dtype: Dtype,
    meta: serde_json::Value,
) -> Result<(), CheckpointError> {
    let mut payload = Vec::new();
    let mut tensors = Vec::with_capacity(params.len());
    for p in params {
        let offset = payload.len();
        for &v in p.value.data() {
            match dtype {
                Dtype::F32 => payload.extend_from_slice(&(v.f64() as f32).to_le_bytes()),
                Dtype::F64 => payload.extend_from_slice(&v.f64().to_le_bytes()),
            }
        }
        tensors.push(TensorEntry {
            name: p.name.clone(),
            shape: p.shape().to_vec(),
            dtype,
            offset,
            nbytes: payload.len() - offset,
        });
    }
    let header = serde_json::to_string(&Header { tensors, meta })?;
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "{header}")?;
    out.write_all(&payload)?;
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(mut input: R) -> Result<Checkpoint, CheckpointError> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    if line.trim_end_matches('\n') != MAGIC {
        return Err(CheckpointError::BadMagic(line.trim_end().to_string()));
    }
    line.clear();
    input.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim_end())?;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    Ok(Checkpoint { header, payload })
}

impl Checkpoint {
    pub fn meta(&self) -> &serde_json::Value {
        &self.header.meta
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.header.tensors.iter().map(|t| t.name.as_str())
    }

    pub fn tensor<S: Scalar>(&self, name: &str) -> Result<Tensor<S>, CheckpointError> {
        let entry = self
            .header
            .tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| CheckpointError::MissingTensor(name.to_string()))?;
        let end = entry.offset + entry.nbytes;
        if end > self.payload.len() {
            return Err(CheckpointError::Truncated {
                name: name.to_string(),
                offset: entry.offset,
                nbytes: entry.nbytes,
                len: self.payload.len(),
            });
        }
        let bytes = &self.payload[entry.offset..end];
        let data: Vec<S> = match entry.dtype {
            Dtype::F32 => {
                bytes.chunks_exact(4).map(|c| S::of(f32::from_le_bytes(c.try_into().unwrap()) as f64)).collect()
            }
            Dtype::F64 => bytes.chunks_exact(8).map(|c| S::of(f64::from_le_bytes(c.try_into().unwrap()))).collect(),
        };
        Ok(Tensor::new(entry.shape.clone(), data)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Parameter<f64>> {
        vec![
            Parameter::new("a/w", Tensor::new(vec![2, 2], vec![1.5, -0.25, 1e-300, 3.0]).unwrap()),
            Parameter::new("a/b", Tensor::from_vec(vec![0.1, 0.2]).unwrap()),
        ]
    }

    #[test]
    fn f64_roundtrip_is_exact() {
        let params = sample();
        let refs: Vec<_> = params.iter().collect();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &refs, Dtype::F64, serde_json::json!({"k": 6})).unwrap();
        assert!(buf.starts_with(b"CVEC1\n"));
        let ckpt = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(ckpt.meta()["k"], 6);
        for p in &params {
            assert!(ckpt.tensor::<f64>(&p.name).unwrap().bitwise_eq(&p.value));
        }
    }

    #[test]
    fn f32_storage_rounds() {
        let params = sample();
        let refs: Vec<_> = params.iter().collect();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &refs, Dtype::F32, serde_json::Value::Null).unwrap();
        let ckpt = read_checkpoint(buf.as_slice()).unwrap();
        let b = ckpt.tensor::<f64>("a/b").unwrap();
        assert_eq!(b.data(), &[0.1f32 as f64, 0.2f32 as f64]);
        assert_eq!(ckpt.header.tensors[0].nbytes, 16);
    }

    #[test]
    fn bad_magic_and_missing_tensor() {
        assert!(matches!(read_checkpoint(&b"NOPE\n{}\n"[..]), Err(CheckpointError::BadMagic(_))));
        let mut buf = Vec::new();
        write_checkpoint::<f64, _>(&mut buf, &[], Dtype::F64, serde_json::Value::Null).unwrap();
        let ckpt = read_checkpoint(buf.as_slice()).unwrap();
        assert!(matches!(ckpt.tensor::<f64>("x"), Err(CheckpointError::MissingTensor(_))));
    }
}
