//! On-disk model layout:
//!
//! ```text
//! <dir>/manifest.json   spec, vocabulary hash, labels, preprocessing, tensor shapes
//! <dir>/tensors.bin     per tensor: u32 name length, name bytes, u32 rank,
//!                       u64 dims, then little-endian f64 values
//! <dir>/vocab.txt       one token per line in index order
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};
use serde::{Deserialize, Serialize};

use super::model::Model;
use super::params::Parameters;
use super::spec::ModelSpec;
use crate::error::{read_to_string, Error, Result};
use crate::preprocess::PipelineConfig;
use crate::representation::Vocabulary;

pub const FORMAT_VERSION: u32 = 1;
const MANIFEST: &str = "manifest.json";
const TENSORS: &str = "tensors.bin";
const VOCAB: &str = "vocab.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
    pub trainable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub spec: ModelSpec,
    pub vocab_hash: String,
    pub max_len: usize,
    pub class_names: Vec<String>,
    pub preprocess: PipelineConfig,
    pub tensors: Vec<TensorInfo>,
}

/// A trained model together with everything needed to score new text.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: Model,
    pub vocab: Vocabulary,
    pub max_len: usize,
    pub class_names: Vec<String>,
    pub preprocess: PipelineConfig,
}

impl Checkpoint {
    pub fn manifest(&self) -> Manifest {
        Manifest {
            format_version: FORMAT_VERSION,
            spec: self.model.spec().clone(),
            vocab_hash: self.vocab.hash(),
            max_len: self.max_len,
            class_names: self.class_names.clone(),
            preprocess: self.preprocess.clone(),
            tensors: self
                .model
                .parameters()
                .iter()
                .map(|t| TensorInfo {
                    name: t.name.clone(),
                    shape: t.value.shape().to_vec(),
                    trainable: t.trainable,
                })
                .collect(),
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = serde_json::to_string_pretty(&self.manifest())
            .map_err(|e| Error::Data(format!("cannot serialize manifest: {e}")))?;
        write(&dir.join(MANIFEST), manifest.as_bytes())?;
        write(&dir.join(TENSORS), &encode_tensors(self.model.parameters()))?;
        write(&dir.join(VOCAB), self.vocab.to_text().as_bytes())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST);
        let manifest: Manifest = serde_json::from_str(&read_to_string(&manifest_path)?)
            .map_err(|e| Error::Data(format!("{}: {e}", manifest_path.display())))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::Data(format!(
                "checkpoint format {} is not supported (expected {FORMAT_VERSION})",
                manifest.format_version
            )));
        }
        let vocab = Vocabulary::load(&dir.join(VOCAB))?;
        let hash = vocab.hash();
        if hash != manifest.vocab_hash {
            return Err(Error::Data(format!(
                "vocabulary hash mismatch: manifest records {}, vocab.txt hashes to {hash}",
                manifest.vocab_hash
            )));
        }
        if manifest.class_names.len() != manifest.spec.num_classes {
            return Err(Error::Data("class names do not match the model's class count".into()));
        }
        let tensor_path = dir.join(TENSORS);
        let mut bytes = Vec::new();
        fs::File::open(&tensor_path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(&tensor_path, e))?;
        let params = decode_tensors(&bytes, &manifest.tensors)?;
        let emb_rows = params.by_name("embedding").map(|t| t.value.shape()[0]);
        if emb_rows != Some(vocab.len()) {
            return Err(Error::Data(format!(
                "embedding has {emb_rows:?} rows but the vocabulary has {} tokens",
                vocab.len()
            )));
        }
        let model = Model::from_parameters(manifest.spec, params)?;
        Ok(Self {
            model,
            vocab,
            max_len: manifest.max_len,
            class_names: manifest.class_names,
            preprocess: manifest.preprocess,
        })
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn encode_tensors(params: &Parameters) -> Vec<u8> {
    let mut out = Vec::new();
    for t in params.iter() {
        out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
        out.extend_from_slice(t.name.as_bytes());
        out.extend_from_slice(&(t.value.ndim() as u32).to_le_bytes());
        for &d in t.value.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &v in t.value.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Data("tensor file is truncated".into()))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub(crate) fn decode_tensors(bytes: &[u8], expected: &[TensorInfo]) -> Result<Parameters> {
    let mut cur = Cursor { bytes, pos: 0 };
    let mut params = Parameters::new();
    for info in expected {
        let name_len = cur.u32()? as usize;
        let name =
            std::str::from_utf8(cur.take(name_len)?).map_err(|_| Error::Data("tensor name is not UTF-8".into()))?;
        if name != info.name {
            return Err(Error::Data(format!("expected tensor `{}`, found `{name}`", info.name)));
        }
        let rank = cur.u32()? as usize;
        let shape = (0..rank)
            .map(|_| cur.u64().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        if shape != info.shape {
            return Err(Error::Data(format!(
                "tensor `{name}` has shape {shape:?}, manifest says {:?}",
                info.shape
            )));
        }
        let n: usize = shape.iter().product();
        let raw = cur.take(n.checked_mul(8).ok_or_else(|| Error::Data("tensor too large".into()))?)?;
        let values: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("tensor `{name}` holds non-finite values")));
        }
        let value = ArrayD::from_shape_vec(IxDyn(&shape), values).expect("length matches shape");
        params.push(name, value, info.trainable);
    }
    if cur.pos != bytes.len() {
        return Err(Error::Data("tensor file has trailing bytes".into()));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::Variant;
    use crate::representation::EmbeddingMatrix;

    fn checkpoint() -> Checkpoint {
        let vocab = Vocabulary::from_tokens(["good", "bad", "day"].map(String::from));
        let emb = EmbeddingMatrix::random(&vocab, 4, 2).unwrap();
        let mut spec = ModelSpec::new(Variant::BiGruCnn, 4, 2);
        spec.rnn_units = 3;
        spec.conv_filters = 2;
        spec.dense_units = 3;
        Checkpoint {
            model: Model::new(spec, &emb).unwrap(),
            vocab,
            max_len: 8,
            class_names: vec!["NOT".into(), "OFF".into()],
            preprocess: PipelineConfig::default(),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let ck = checkpoint();
        ck.save(dir.path()).unwrap();
        let back = Checkpoint::load(dir.path()).unwrap();
        assert_eq!(back.model.parameters(), ck.model.parameters());
        assert_eq!(back.vocab, ck.vocab);
        assert_eq!(back.class_names, ck.class_names);
        assert_eq!(back.manifest(), ck.manifest());
    }

    #[test]
    fn edited_vocabulary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        checkpoint().save(dir.path()).unwrap();
        let path = dir.path().join(VOCAB);
        let text = fs::read_to_string(&path).unwrap().replace("bad", "sad");
        fs::write(&path, text).unwrap();
        let err = Checkpoint::load(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("hash")), "{err}");
    }

    #[test]
    fn truncated_tensors_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        checkpoint().save(dir.path()).unwrap();
        let path = dir.path().join(TENSORS);
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(Checkpoint::load(dir.path()), Err(Error::Data(_))));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        checkpoint().save(dir.path()).unwrap();
        let path = dir.path().join(MANIFEST);
        let mut m: Manifest = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        m.spec.rnn_units = 4;
        fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
        assert!(matches!(Checkpoint::load(dir.path()), Err(Error::Data(_))));
    }
}
