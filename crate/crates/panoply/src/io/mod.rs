//! File formats: PLY clouds and meshes, OBJ meshes, PNG rasters, and the
//! line-oriented text manifests (poses, pairs, class table, inventory,
//! ground truth, face manifest, transform record, evaluation report).
//!
//! Every emitted text manifest starts with a `# panoply/<kind> v1` header
//! line; readers skip `#` comments and blank lines, so externally produced
//! files without the header also parse.

pub mod inventory;
pub mod manifest;
pub mod masks;
pub mod mesh;
pub mod pairs;
pub mod ply;
pub mod poses;
pub mod report;
pub mod transform;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes a file atomically: the bytes land in a same-directory temp file
/// that is renamed over the destination, so re-runs and crashes never leave
/// a half-written artifact behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid_input(format!("{} has no file name", path.display())))?;
    let tmp = parent.join(format!(".{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-comment, non-blank lines with their 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        // No temp file left behind.
        let leftovers: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn data_lines_skip_comments_and_blanks() {
        let text = "# header\n\nalpha\n  # note\nbeta\n";
        let lines: Vec<(usize, &str)> = data_lines(text).collect();
        assert_eq!(lines, vec![(3, "alpha"), (5, "beta")]);
    }
}
