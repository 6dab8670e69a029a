//! Model snapshots: a JSON header (config, vocabulary, log, tensor table)
//! followed by raw little-endian `f32` tensor data.
//!
//! Layout: magic `MWPS`, `u32` little-endian header length, UTF-8 JSON
//! header, then each tensor's values in table order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{build_model, EpochLog, Model, ModelConfig, Vocab};

const MAGIC: &[u8; 4] = b"MWPS";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize, Deserialize)]
struct TensorMeta {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    vocab: Vocab,
    log: Vec<EpochLog>,
    tensors: Vec<TensorMeta>,
}

/// Write a model snapshot. Values are stored as `f32`.
pub fn save(model: &Model, path: &Path) -> Result<(), SnapshotError> {
    let header = Header {
        config: model.config.clone(),
        vocab: model.vocab.clone(),
        log: model.log.clone(),
        tensors: model
            .params
            .entries
            .iter()
            .map(|(name, t)| TensorMeta {
                name: name.clone(),
                rows: t.rows,
                cols: t.cols,
            })
            .collect(),
    };
    let header_bytes = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    for (_, t) in &model.params.entries {
        for v in &t.data {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a snapshot back into a model. Parameters are matched by name and
/// shape against a freshly built model of the stored configuration.
pub fn load(path: &Path) -> Result<Model, SnapshotError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::Header("wrong magic bytes".into()));
    }
    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)?;
    let header_len = u32::from_le_bytes(len_bytes) as usize;
    let mut header_bytes = vec![0u8; header_len];
    r.read_exact(&mut header_bytes)?;
    let header: Header = serde_json::from_slice(&header_bytes)?;
    let mut vocab = header.vocab;
    vocab.reindex();
    let mut model = build_model(header.config, vocab).map_err(SnapshotError::Header)?;
    model.log = header.log;
    if header.tensors.len() != model.params.entries.len() {
        return Err(SnapshotError::Header(format!(
            "tensor table has {} entries, expected {}",
            header.tensors.len(),
            model.params.entries.len()
        )));
    }
    for (meta, (name, t)) in header.tensors.iter().zip(model.params.entries.iter_mut()) {
        if meta.name != *name || meta.rows != t.rows || meta.cols != t.cols {
            return Err(SnapshotError::Header(format!(
                "tensor {} ({}x{}) does not match expected {} ({}x{})",
                meta.name, meta.rows, meta.cols, name, t.rows, t.cols
            )));
        }
        let mut buf = vec![0u8; t.len() * 4];
        r.read_exact(&mut buf)?;
        for (i, chunk) in buf.chunks_exact(4).enumerate() {
            t.data[i] = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
        }
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(SnapshotError::Header("trailing bytes after tensors".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest_str, Corpus, SourceFormat};
    use crate::neural::model::Variant;

    fn tiny_corpus() -> Corpus {
        let lines = [
            r#"{"id": "a", "body": "jack had 8 pens . he gave 3 pens away .", "question": "how many pens does jack have now ?", "equation": "N0 - N1", "answer": "5"}"#,
            r#"{"id": "b", "body": "tom bought 2 bags of 6 apples .", "question": "how many apples in all ?", "equation": "N0 * N1", "answer": "12"}"#,
        ]
        .join("\n");
        ingest_str(&lines, SourceFormat::NativeJson, "tiny").unwrap()
    }

    fn tiny_model() -> Model {
        let corpus = tiny_corpus();
        let vocab = Vocab::build(&corpus, None);
        let config = ModelConfig {
            variant: Variant::Seq2Seq,
            embedding_size: 6,
            hidden_size: 8,
            layers: 2,
            dropout: 0.1,
            learning_rate: 1e-3,
            batch_size: 2,
            epochs: 1,
            seed: 19,
            max_decode_len: 7,
        };
        build_model(config, vocab).unwrap()
    }

    #[test]
    fn snapshot_round_trips_within_f32_precision() {
        let mut model = tiny_model();
        model.log.push(EpochLog {
            epoch: 0,
            loss: 1.25,
            val_accuracy: 0.5,
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.mwps");
        save(&model, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded.config, model.config);
        assert_eq!(loaded.vocab, model.vocab);
        assert_eq!(loaded.log, model.log);
        for ((an, a), (bn, b)) in model.params.entries.iter().zip(&loaded.params.entries) {
            assert_eq!(an, bn);
            for (x, y) in a.data.iter().zip(&b.data) {
                assert!((x - y).abs() <= (*x as f32).abs() as f64 * 1e-6 + 1e-9);
            }
        }
    }

    #[test]
    fn loaded_model_predicts_identically() {
        // f32 rounding is applied to both sides by saving twice
        let model = tiny_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.mwps");
        save(&model, &path).unwrap();
        let loaded = load(&path).unwrap();
        let path2 = dir.path().join("model2.mwps");
        save(&loaded, &path2).unwrap();
        let loaded2 = load(&path2).unwrap();
        assert_eq!(loaded.params, loaded2.params);
        let corpus = tiny_corpus();
        for p in &corpus.problems {
            assert_eq!(loaded.predict(p), loaded2.predict(p));
        }
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let model = tiny_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.mwps");
        save(&model, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load(&path), Err(SnapshotError::Header(_))));
    }
}
