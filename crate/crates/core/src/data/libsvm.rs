//! LIBSVM text format: one example per line, `label idx:val idx:val ...`,
//! with 1-based indices and an optional trailing `# comment`.
//!
//! ```text
//! +1 1:0.5 3:0.5
//! 0 2:1 # labels 0/1 are read as -1/+1
//! ```
//!
//! Indices are shifted to 0-based on read and back on write. Gzip input is
//! recognised by its magic bytes.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use crate::error::{Error, Result};
use crate::example::Example;
use crate::sparse::SparseVector;

use super::Dataset;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

pub fn load_libsvm(path: &Path) -> Result<Dataset> {
    let file = File::open(path)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().trim_end_matches(".gz").to_string())
        .unwrap_or_default();
    let mut ds = parse_libsvm(file)?;
    ds.metadata.name = name;
    Ok(ds.with_source(path))
}

/// Parse plain or gzip-compressed LIBSVM text.
pub fn parse_libsvm<R: Read>(reader: R) -> Result<Dataset> {
    let mut buffered = BufReader::new(reader);
    let head = buffered.fill_buf()?;
    if head.starts_with(&GZIP_MAGIC) {
        parse_lines(BufReader::new(MultiGzDecoder::new(buffered)))
    } else {
        parse_lines(buffered)
    }
}

pub fn parse_libsvm_str(text: &str) -> Result<Dataset> {
    parse_lines(text.as_bytes())
}

fn parse_lines<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut examples = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some(example) = parse_line(&line, k + 1)? {
            examples.push(example);
        }
    }
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset::new("", examples))
}

fn parse_line(line: &str, number: usize) -> Result<Option<Example>> {
    let err = |message: String| Error::Parse {
        line: number,
        message,
    };
    let body = line.split_once('#').map_or(line, |(b, _)| b);
    let mut tokens = body.split_whitespace();
    let Some(label_token) = tokens.next() else {
        return Ok(None);
    };
    let label = match label_token.parse::<f64>() {
        Ok(v) if v == 1.0 => 1.0,
        Ok(v) if v == 0.0 || v == -1.0 => -1.0,
        _ => return Err(err(format!("label `{label_token}` is not one of -1, 0, +1"))),
    };

    let mut pairs = Vec::new();
    for token in tokens {
        let (idx, val) = token
            .split_once(':')
            .ok_or_else(|| err(format!("token `{token}` is not idx:value")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| err(format!("index `{idx}` is not a non-negative integer")))?;
        if idx == 0 {
            return Err(err("indices are 1-based; found 0".into()));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| err(format!("value `{val}` is not a number")))?;
        if !val.is_finite() {
            return Err(err(format!("value `{val}` is not finite")));
        }
        pairs.push((idx - 1, val));
    }
    pairs.sort_by_key(|p| p.0);
    if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(err(format!("duplicate index {}", w[0].0 + 1)));
    }
    Ok(Some(Example::new(SparseVector::from_pairs(pairs), label)))
}

/// Serialise with shortest round-trip float formatting, so that parsing the
/// output reproduces the dataset exactly.
pub fn to_libsvm_string(dataset: &Dataset) -> String {
    let mut out = String::new();
    for e in &dataset.examples {
        out.push_str(if e.label > 0.0 { "+1" } else { "-1" });
        for (i, v) in e.features.iter() {
            let _ = write!(out, " {}:", i + 1);
            write_float(&mut out, v);
        }
        out.push('\n');
    }
    out
}

// Both `{}` and `{:e}` print the shortest string that parses back exactly.
fn write_float(out: &mut String, v: f64) {
    let a = v.abs();
    let _ = if a != 0.0 && !(1e-4..1e16).contains(&a) {
        write!(out, "{v:e}")
    } else {
        write!(out, "{v}")
    };
}

/// Write LIBSVM text to `path`, gzip-compressed when the name ends in `.gz`.
pub fn write_libsvm(dataset: &Dataset, path: &Path) -> Result<()> {
    use std::io::Write;
    let text = to_libsvm_string(dataset);
    let file = File::create(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        let mut gz = flate2::write::GzEncoder::new(file, flate2::Compression::best());
        gz.write_all(text.as_bytes())?;
        gz.finish()?;
    } else {
        let mut file = file;
        file.write_all(text.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_err(text: &str) -> (usize, String) {
        match parse_libsvm_str(text) {
            Err(Error::Parse { line, message }) => (line, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn spec_lines() {
        let ds = parse_libsvm_str("+1 1:0.5 3:0.5\n0 2:1\n").unwrap();
        assert_eq!(ds.examples[0].label, 1.0);
        assert_eq!(ds.examples[0].features, SparseVector::from_pairs([(0, 0.5), (2, 0.5)]));
        assert_eq!(ds.examples[1].label, -1.0);
        assert_eq!(ds.examples[1].features, SparseVector::singleton(1, 1.0));
        assert_eq!(ds.dim, 3);
    }

    #[test]
    fn duplicate_index_reports_line() {
        let (line, msg) = parse_err("1 1:1 1:2");
        assert_eq!(line, 1);
        assert!(msg.contains("duplicate"), "{msg}");
    }

    #[test]
    fn malformed_tokens() {
        assert_eq!(parse_err("1 1:1\n-1 2\n").0, 2);
        assert_eq!(parse_err("1 1:x").0, 1);
        assert_eq!(parse_err("1 a:1").0, 1);
        assert_eq!(parse_err("1 0:1").0, 1);
        assert_eq!(parse_err("2 1:1").0, 1);
        assert_eq!(parse_err("\n\n1 1:inf").0, 3);
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse_libsvm_str(""), Err(Error::EmptyDataset)));
        assert!(matches!(parse_libsvm_str("\n  \n# only a comment\n"), Err(Error::EmptyDataset)));
    }

    #[test]
    fn comments_and_blank_lines() {
        let ds = parse_libsvm_str("# header\n\n-1 4:2.5 # note\n1\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.examples[0].features.get(3), 2.5);
        assert!(ds.examples[1].features.is_empty());
    }

    #[test]
    fn unordered_indices_are_sorted() {
        let ds = parse_libsvm_str("1 5:1 2:3").unwrap();
        assert_eq!(ds.examples[0].features.indices().collect::<Vec<_>>(), vec![1, 4]);
    }

    #[test]
    fn round_trip() {
        let text = "+1 1:0.1 7:-3.25e-12\n-1 2:0.30000000000000004\n-1\n";
        let ds = parse_libsvm_str(text).unwrap();
        let out = to_libsvm_string(&ds);
        assert_eq!(out, text);
        assert_eq!(parse_libsvm_str(&out).unwrap(), ds);
    }

    #[test]
    fn gzip_detected() {
        use std::io::Write;
        let mut gz = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        gz.write_all(b"1 1:2\n0 3:1\n").unwrap();
        let bytes = gz.finish().unwrap();
        let ds = parse_libsvm(&bytes[..]).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.examples[1].label, -1.0);
    }
}
