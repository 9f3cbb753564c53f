//! One JSON object per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::DatasetError;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.display().to_string(), source }
}

/// Write `items` as JSONL to any writer.
pub fn write_jsonl_to<T: Serialize, W: Write>(items: &[T], mut out: W) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(io_err(path))?;
    write_jsonl_to(items, BufWriter::new(file)).map_err(io_err(path))
}

/// Read JSONL, skipping blank lines. Errors carry 1-based line numbers.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| DatasetError::Parse { line: i + 1, message: e.to_string() })?;
        out.push(item);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, GenConfig, QuestionRecord};

    #[test]
    fn round_trip_is_identity() {
        let records = generate(&GenConfig { size: 60, seed: 11, ..GenConfig::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_jsonl(&records, &path).unwrap();
        let back: Vec<QuestionRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn truncated_line_reports_its_number() {
        let records = generate(&GenConfig { size: 3, seed: 2, ..GenConfig::default() }).unwrap();
        let mut buf = Vec::new();
        write_jsonl_to(&records, &mut buf).unwrap();
        buf.truncate(buf.len() - 20);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        std::fs::write(&path, buf).unwrap();
        match read_jsonl::<QuestionRecord>(&path) {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(read_jsonl::<QuestionRecord>(&path).unwrap().is_empty());
    }
}
