//! Checkpoint files: magic string, version, structured text header, then
//! raw little-endian 32-bit float payloads in manifest order.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::savepoint::{HeldoutScores, Savepoint};
use super::vocab::{VocabLevel, Vocabulary};
use super::ModelConfig;
use crate::error::{Error, Result};
use crate::tensor::{Element, Parameters, Tensor};

const MAGIC: &str = "HNMTCKPT";
const VERSION: u32 = 1;
const INIT_NOTE: &str = "xavier-uniform matrices, zero biases, forget-gate bias +1";

#[derive(Serialize, Deserialize)]
struct VocabData {
    level: VocabLevel,
    tokens: Vec<String>,
}

impl From<&Vocabulary> for VocabData {
    fn from(v: &Vocabulary) -> Self {
        VocabData { level: v.level(), tokens: v.tokens().to_vec() }
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    name: String,
    shape: Vec<usize>,
    /// Byte offset into the payload region.
    offset: u64,
}

#[derive(Serialize, Deserialize)]
struct Header {
    label: String,
    batches: u64,
    config: ModelConfig,
    initialization: String,
    source_vocab: VocabData,
    char_vocab: VocabData,
    target_vocab: VocabData,
    scores: Option<HeldoutScores>,
    manifest: Vec<ManifestEntry>,
}

/// Serializes a savepoint. The payload is always 32-bit floats, so the
/// round-trip is bitwise lossless for `f32` models.
pub fn save_checkpoint<T: Element>(sp: &Savepoint<T>, path: &Path) -> Result<()> {
    let mut manifest = Vec::with_capacity(sp.params.len());
    let mut offset: u64 = 0;
    for p in sp.params.iter() {
        manifest.push(ManifestEntry {
            name: p.name().to_string(),
            shape: p.value().shape().to_vec(),
            offset,
        });
        offset += 4 * p.value().numel() as u64;
    }
    let header = Header {
        label: sp.label.clone(),
        batches: sp.batches,
        config: sp.config.clone(),
        initialization: INIT_NOTE.to_string(),
        source_vocab: (&sp.source_vocab).into(),
        char_vocab: (&sp.char_vocab).into(),
        target_vocab: (&sp.target_vocab).into(),
        scores: sp.scores,
        manifest,
    };
    let header_bytes = serde_json::to_vec(&header)
        .map_err(|e| Error::format(None, format!("header serialization failed: {e}")))?;

    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "{}", header_bytes.len())?;
    out.write_all(&header_bytes)?;
    out.write_all(b"\n")?;
    for p in sp.params.iter() {
        for &v in p.value().data() {
            out.write_all(&v.as_f32().to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn split_line(bytes: &[u8], from: usize) -> Result<(&str, usize)> {
    let rel = bytes[from..]
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format(None, "unexpected end of checkpoint header"))?;
    let line = std::str::from_utf8(&bytes[from..from + rel])
        .map_err(|_| Error::format(None, "checkpoint header is not UTF-8"))?;
    Ok((line, from + rel + 1))
}

/// Loads a checkpoint, validating magic, version, header consistency, and
/// payload length.
pub fn load_checkpoint<T: Element>(path: &Path) -> Result<Savepoint<T>> {
    let bytes = std::fs::read(path)?;
    let (magic_line, at) = split_line(&bytes, 0)?;
    let mut fields = magic_line.split_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(Error::format(None, format!("bad magic: {magic_line:?} is not a checkpoint")));
    }
    let version: u32 = fields
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::format(None, "missing checkpoint format version"))?;
    if version != VERSION {
        return Err(Error::format(
            None,
            format!("unsupported checkpoint version {version} (expected {VERSION})"),
        ));
    }

    let (len_line, at) = split_line(&bytes, at)?;
    let header_len: usize = len_line
        .trim()
        .parse()
        .map_err(|_| Error::format(None, format!("bad header length {len_line:?}")))?;
    if at + header_len + 1 > bytes.len() {
        return Err(Error::format(None, "truncated checkpoint header"));
    }
    let header: Header = serde_json::from_slice(&bytes[at..at + header_len])
        .map_err(|e| Error::format(None, format!("malformed checkpoint header: {e}")))?;
    let payload = &bytes[at + header_len + 1..];

    let mut params = Parameters::new();
    let mut expected_offset: u64 = 0;
    for entry in &header.manifest {
        if entry.offset != expected_offset {
            return Err(Error::format(
                None,
                format!(
                    "manifest offset for {:?} is {} but payload position is {expected_offset}",
                    entry.name, entry.offset
                ),
            ));
        }
        let numel: usize = entry.shape.iter().product();
        let byte_len = 4 * numel;
        let start = entry.offset as usize;
        if start + byte_len > payload.len() {
            return Err(Error::format(
                None,
                format!("truncated checkpoint payload while reading {:?}", entry.name),
            ));
        }
        let data: Vec<T> = payload[start..start + byte_len]
            .chunks_exact(4)
            .map(|c| T::from_f32(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect();
        params.register(entry.name.clone(), Tensor::from_vec(entry.shape.clone(), data)?)?;
        expected_offset += byte_len as u64;
    }
    if payload.len() as u64 != expected_offset {
        return Err(Error::format(
            None,
            format!(
                "checkpoint payload has {} bytes but the manifest accounts for {expected_offset}",
                payload.len()
            ),
        ));
    }

    Ok(Savepoint {
        label: header.label,
        batches: header.batches,
        config: header.config,
        source_vocab: Vocabulary::from_tokens(header.source_vocab.level, header.source_vocab.tokens)?,
        char_vocab: Vocabulary::from_tokens(header.char_vocab.level, header.char_vocab.tokens)?,
        target_vocab: Vocabulary::from_tokens(header.target_vocab.level, header.target_vocab.tokens)?,
        params,
        scores: header.scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_support::tiny_model;
    use crate::model::Savepoint;

    fn sample_savepoint(seed: u64) -> Savepoint<f32> {
        let model = tiny_model::<f32>(seed);
        Savepoint::from_model(
            &model,
            "m1",
            5000,
            Some(HeldoutScores { cross_entropy: 1.25, bleu: 0.125, chrf3: 0.5 }),
        )
    }

    #[test]
    fn round_trip_is_bitwise_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let sp = sample_savepoint(31);
        save_checkpoint(&sp, &path).unwrap();
        let loaded: Savepoint<f32> = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.label, sp.label);
        assert_eq!(loaded.batches, sp.batches);
        assert_eq!(loaded.config, sp.config);
        assert_eq!(loaded.scores, sp.scores);
        assert_eq!(loaded.source_vocab, sp.source_vocab);
        assert_eq!(loaded.char_vocab, sp.char_vocab);
        assert_eq!(loaded.target_vocab, sp.target_vocab);
        assert_eq!(loaded.params.len(), sp.params.len());
        for (a, b) in loaded.params.iter().zip(sp.params.iter()) {
            assert_eq!(a.name(), b.name());
            assert_eq!(a.value().shape(), b.value().shape());
            // Bitwise equality on the payload.
            for (x, y) in a.value().data().iter().zip(b.value().data()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&sample_savepoint(32), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        let err = load_checkpoint::<f32>(&path).unwrap_err();
        assert!(err.to_string().contains("magic"), "{err}");
    }

    #[test]
    fn unsupported_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&sample_savepoint(33), &path).unwrap();
        let text = std::fs::read(&path).unwrap();
        let mut bytes = b"HNMTCKPT 9".to_vec();
        bytes.extend_from_slice(&text[10..]);
        std::fs::write(&path, &bytes).unwrap();
        let err = load_checkpoint::<f32>(&path).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&sample_savepoint(34), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 17]).unwrap();
        let err = load_checkpoint::<f32>(&path).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
    }
}
