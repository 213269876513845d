//! Versioned serialization for harness artifacts.
//!
//! Two shapes cover everything:
//! - record streams (trajectories, episode reports, dataset records):
//!   line-delimited JSON with a mandatory header line carrying format name
//!   and version;
//! - single documents (cognitive maps, global knowledge): one JSON envelope
//!   with the payload under `data`.
//!
//! Field names are pinned by `docs/formats.md`. Round-trips are exact; a
//! truncated or malformed stream yields a parse error with a byte offset and
//! never a partial value.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version stamped into every artifact written by this crate.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    data: T,
}

fn check_header(header: &Header, format: &str, offset: usize) -> Result<()> {
    if header.format != format {
        return Err(Error::Parse {
            offset,
            line: 1,
            message: format!("expected format {:?}, found {:?}", format, header.format),
        });
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::Parse {
            offset,
            line: 1,
            message: format!(
                "unsupported version {} for format {:?} (supported: {FORMAT_VERSION})",
                header.version, header.format
            ),
        });
    }
    Ok(())
}

/// Serialize a record stream to a string: header line, then one record per line.
pub fn to_jsonl<T: Serialize>(format: &str, records: &[T]) -> Result<String> {
    let mut out = String::new();
    let header = Header {
        format: format.to_string(),
        version: FORMAT_VERSION,
    };
    out.push_str(&serde_json::to_string(&header).map_err(|e| Error::Parse {
        offset: 0,
        line: 1,
        message: e.to_string(),
    })?);
    out.push('\n');
    for record in records {
        out.push_str(&serde_json::to_string(record).map_err(|e| Error::Parse {
            offset: out.len(),
            line: 0,
            message: e.to_string(),
        })?);
        out.push('\n');
    }
    Ok(out)
}

/// Parse a record stream produced by [`to_jsonl`]. Any malformed line fails
/// the whole parse with the byte offset of the offending line.
pub fn from_jsonl<T: DeserializeOwned>(format: &str, text: &str) -> Result<Vec<T>> {
    let mut records = Vec::new();
    let mut offset = 0usize;
    let mut saw_header = false;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let trimmed = line.trim_end_matches('\n').trim_end_matches('\r');
        if trimmed.is_empty() {
            offset += line.len();
            continue;
        }
        if !saw_header {
            let header: Header = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
                offset: offset + e.column().saturating_sub(1),
                line: lineno + 1,
                message: format!("bad header: {e}"),
            })?;
            check_header(&header, format, offset)?;
            saw_header = true;
        } else {
            let record: T = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
                offset: offset + e.column().saturating_sub(1),
                line: lineno + 1,
                message: e.to_string(),
            })?;
            records.push(record);
        }
        offset += line.len();
    }
    if !saw_header {
        return Err(Error::Parse {
            offset: 0,
            line: 1,
            message: format!("empty stream: missing {format:?} header"),
        });
    }
    Ok(records)
}

/// Serialize a single document with the versioned envelope.
pub fn to_document<T: Serialize>(format: &str, value: &T) -> Result<String> {
    let envelope = Envelope {
        format: format.to_string(),
        version: FORMAT_VERSION,
        data: value,
    };
    serde_json::to_string_pretty(&envelope).map_err(|e| Error::Parse {
        offset: 0,
        line: 1,
        message: e.to_string(),
    })
}

/// Parse a single document produced by [`to_document`].
pub fn from_document<T: DeserializeOwned>(format: &str, text: &str) -> Result<T> {
    let envelope: Envelope<T> =
        serde_json::from_str(text).map_err(|e| Error::from_json(&e, text))?;
    check_header(
        &Header {
            format: envelope.format.clone(),
            version: envelope.version,
        },
        format,
        0,
    )?;
    Ok(envelope.data)
}

/// Write a record stream to disk.
pub fn write_jsonl<T: Serialize>(path: &Path, format: &str, records: &[T]) -> Result<()> {
    let text = to_jsonl(format, records)?;
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Read a record stream from disk.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path, format: &str) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)?;
    from_jsonl(format, &text)
}

/// Write a single document to disk.
pub fn write_document<T: Serialize>(path: &Path, format: &str, value: &T) -> Result<()> {
    let text = to_document(format, value)?;
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Read a single document from disk.
pub fn read_document<T: DeserializeOwned>(path: &Path, format: &str) -> Result<T> {
    let text = fs::read_to_string(path)?;
    from_document(format, &text)
}

/// Format names used across the harness.
pub mod formats {
    pub const TRAJECTORIES: &str = "trajectories";
    pub const REPORTS: &str = "episode_reports";
    pub const COGNITIVE_MAP: &str = "cognitive_map";
    pub const GLOBAL_KNOWLEDGE: &str = "global_knowledge";
    pub const DATASET: &str = "dataset_records";
    pub const REPLAY: &str = "replay";
    pub const TRANSCRIPT: &str = "transcript";
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::*;

    #[test]
    fn jsonl_round_trip() {
        let reports = vec![EpisodeReport {
            instruction: Instruction::new("x", EnvId::House, "pick_place", 3),
            success: true,
            mapping_steps: 4,
            acting_steps: 6,
            tokens_map: 10,
            tokens_act: 20,
            tokens_total: 30,
            t_perturb: None,
            rollout_length: 6,
            reexplored: None,
            max_level: None,
        }];
        let text = to_jsonl(formats::REPORTS, &reports).unwrap();
        let back: Vec<EpisodeReport> = from_jsonl(formats::REPORTS, &text).unwrap();
        assert_eq!(reports, back);
    }

    #[test]
    fn empty_map_document_round_trip() {
        let map = CognitiveMap::new(EnvId::Craft, "nothing");
        let text = to_document(formats::COGNITIVE_MAP, &map).unwrap();
        let back: CognitiveMap = from_document(formats::COGNITIVE_MAP, &text).unwrap();
        assert_eq!(map, back);
        assert_eq!(back.entry_count(), 0);
    }

    #[test]
    fn truncated_stream_is_a_parse_error() {
        let reports: Vec<EpisodeReport> = Vec::new();
        let mut text = to_jsonl(formats::REPORTS, &reports).unwrap();
        text.push_str("{\"instruction\": {\"text\": \"oops\"");
        let err = from_jsonl::<EpisodeReport>(formats::REPORTS, &text).unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert!(offset > 0),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_format_name_rejected() {
        let map = CognitiveMap::new(EnvId::House, "t");
        let text = to_document(formats::COGNITIVE_MAP, &map).unwrap();
        assert!(from_document::<CognitiveMap>(formats::GLOBAL_KNOWLEDGE, &text).is_err());
    }
}
