//! Cluster assignment files. Each non-comment line is
//! `<segment_id> <cluster_id>`; lines are written sorted by segment id so
//! identical clusterings produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssignmentError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {detail}")]
    Parse { path: PathBuf, line: usize, detail: String },
    #[error("{path}: duplicate segment id {id}")]
    Duplicate { path: PathBuf, id: u64 },
}

pub fn write_assignment(
    path: &Path,
    assignment: &BTreeMap<u64, u64>,
) -> Result<(), AssignmentError> {
    let mut out = String::new();
    out.push_str("# <segment_id> <cluster_id>\n");
    for (seg, cluster) in assignment {
        let _ = writeln!(out, "{seg} {cluster}");
    }
    std::fs::write(path, out).map_err(|source| AssignmentError::Io { path: path.into(), source })
}

pub fn read_assignment(path: &Path) -> Result<BTreeMap<u64, u64>, AssignmentError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| AssignmentError::Io { path: path.into(), source })?;
    let mut assignment = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse = |detail: String| AssignmentError::Parse {
            path: path.into(),
            line: idx + 1,
            detail,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse(format!(
                "expected `<segment_id> <cluster_id>`, got {} fields",
                fields.len()
            )));
        }
        let seg: u64 = fields[0]
            .parse()
            .map_err(|_| parse(format!("bad segment id `{}`", fields[0])))?;
        let cluster: u64 = fields[1]
            .parse()
            .map_err(|_| parse(format!("bad cluster id `{}`", fields[1])))?;
        if assignment.insert(seg, cluster).is_some() {
            return Err(AssignmentError::Duplicate { path: path.into(), id: seg });
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("assignment.txt");
        let map: BTreeMap<u64, u64> = [(4, 1), (0, 0), (2, 0), (9, 1)].into_iter().collect();
        write_assignment(&path, &map).unwrap();
        assert_eq!(read_assignment(&path).unwrap(), map);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "# <segment_id> <cluster_id>\n0 0\n2 0\n4 1\n9 1\n");
    }

    #[test]
    fn identical_maps_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        let b = dir.path().join("b.txt");
        let map: BTreeMap<u64, u64> = (0..50).map(|i| (i * 3, i % 7)).collect();
        write_assignment(&a, &map).unwrap();
        write_assignment(&b, &map).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn rejects_duplicates_and_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.txt");
        std::fs::write(&path, "0 0\n1 0\n0 1\n").unwrap();
        assert!(matches!(
            read_assignment(&path),
            Err(AssignmentError::Duplicate { id: 0, .. })
        ));
        std::fs::write(&path, "0\n").unwrap();
        assert!(matches!(read_assignment(&path), Err(AssignmentError::Parse { .. })));
        std::fs::write(&path, "0 x\n").unwrap();
        assert!(matches!(read_assignment(&path), Err(AssignmentError::Parse { .. })));
    }

    #[test]
    fn skips_comments_and_blanks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        std::fs::write(&path, "# header\n\n3 1 # tail\n").unwrap();
        let map = read_assignment(&path).unwrap();
        assert_eq!(map.len(), 1);
        assert_eq!(map[&3], 1);
    }
}
