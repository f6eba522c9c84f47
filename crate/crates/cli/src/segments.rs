//! Plain-text segment lists. Each non-comment line is
//! `<id> <start_s> <end_s> [speaker]`; `#` starts a comment and blank lines
//! are skipped. Loaded spans are sorted by start time and validated for
//! duplicate ids and overlaps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;
use vqbic_core::audio::{validate_spans, AudioError, SegmentSpan};

#[derive(Debug, Error)]
pub enum SegmentFileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {detail}")]
    Parse { path: PathBuf, line: usize, detail: String },
    #[error("invalid segment list: {0}")]
    Invalid(#[from] AudioError),
}

pub fn load_segments(path: &Path) -> Result<Vec<SegmentSpan>, SegmentFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SegmentFileError::Io { path: path.into(), source })?;
    let mut spans = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse = |detail: String| SegmentFileError::Parse {
            path: path.into(),
            line: idx + 1,
            detail,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(parse(format!(
                "expected `<id> <start_s> <end_s> [speaker]`, got {} fields",
                fields.len()
            )));
        }
        let id: u64 = fields[0]
            .parse()
            .map_err(|_| parse(format!("bad segment id `{}`", fields[0])))?;
        let start: f64 = fields[1]
            .parse()
            .map_err(|_| parse(format!("bad start time `{}`", fields[1])))?;
        let end: f64 = fields[2]
            .parse()
            .map_err(|_| parse(format!("bad end time `{}`", fields[2])))?;
        let speaker = fields.get(3).map(|s| s.to_string());
        spans.push(SegmentSpan::new(id, start, end, speaker));
    }
    spans.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.id.cmp(&b.id)));
    validate_spans(&spans)?;
    Ok(spans)
}

pub fn write_segments(path: &Path, spans: &[SegmentSpan]) -> Result<(), SegmentFileError> {
    let mut out = String::new();
    out.push_str("# <id> <start_s> <end_s> [speaker]\n");
    for s in spans {
        let _ = write!(out, "{} {:.6} {:.6}", s.id, s.start, s.end);
        if let Some(spk) = &s.speaker {
            let _ = write!(out, " {spk}");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| SegmentFileError::Io { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(contents: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("segments.txt");
        std::fs::write(&path, contents).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_comments_blanks_and_labels() {
        let (_dir, path) = write_temp(
            "# header comment\n\
             0 0.0 1.5 alice\n\
             \n\
             1 1.5 2.0   # trailing comment\n\
             2 2.25 3.0 bob\n",
        );
        let spans = load_segments(&path).unwrap();
        assert_eq!(spans.len(), 3);
        assert_eq!(spans[0].speaker.as_deref(), Some("alice"));
        assert_eq!(spans[1].speaker, None);
        assert_eq!(spans[2].id, 2);
    }

    #[test]
    fn sorts_by_start_time() {
        let (_dir, path) = write_temp("5 4.0 5.0\n1 0.0 1.0\n3 2.0 3.0\n");
        let spans = load_segments(&path).unwrap();
        let ids: Vec<u64> = spans.iter().map(|s| s.id).collect();
        assert_eq!(ids, vec![1, 3, 5]);
    }

    #[test]
    fn rejects_field_count_and_bad_numbers() {
        let (_dir, path) = write_temp("0 1.0\n");
        assert!(matches!(
            load_segments(&path),
            Err(SegmentFileError::Parse { line: 1, .. })
        ));
        let (_dir, path) = write_temp("0 0.0 1.0\nx 1.0 2.0\n");
        assert!(matches!(
            load_segments(&path),
            Err(SegmentFileError::Parse { line: 2, .. })
        ));
        let (_dir, path) = write_temp("0 0.0 oops\n");
        assert!(matches!(load_segments(&path), Err(SegmentFileError::Parse { .. })));
        let (_dir, path) = write_temp("0 0.0 1.0 alice extra\n");
        assert!(matches!(load_segments(&path), Err(SegmentFileError::Parse { .. })));
    }

    #[test]
    fn rejects_overlap_and_duplicate_ids() {
        let (_dir, path) = write_temp("0 0.0 2.0\n1 1.0 3.0\n");
        assert!(matches!(load_segments(&path), Err(SegmentFileError::Invalid(_))));
        let (_dir, path) = write_temp("0 0.0 1.0\n0 2.0 3.0\n");
        assert!(matches!(load_segments(&path), Err(SegmentFileError::Invalid(_))));
    }

    #[test]
    fn round_trips_through_writer() {
        let spans = vec![
            SegmentSpan::new(0, 0.0, 1.25, Some("a".into())),
            SegmentSpan::new(1, 1.25, 2.0, None),
            SegmentSpan::new(7, 2.5, 4.0, Some("b".into())),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_segments(&path, &spans).unwrap();
        assert_eq!(load_segments(&path).unwrap(), spans);
    }

    #[test]
    fn missing_file_is_io() {
        assert!(matches!(
            load_segments(Path::new("/nonexistent/spans.txt")),
            Err(SegmentFileError::Io { .. })
        ));
    }
}
