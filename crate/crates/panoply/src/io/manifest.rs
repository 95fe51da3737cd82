//! Face manifest: the contract between conversion and segmentation.
//!
//! Face files follow `<frame_id>_<ring>_<index>.png`. The manifest lists
//! every emitted face, tab-separated:
//! `file<TAB>frame_id<TAB>ring<TAB>index<TAB>resolution`.
//! A segmentation backend receives the manifest path plus an output
//! directory and must write one same-named mask per listed face.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{data_lines, read_text, write_atomic};
use crate::panorama::{FaceSpec, Ring};

/// One face image on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceEntry {
    pub file: String,
    pub frame_id: u64,
    pub ring: Ring,
    pub index: u32,
    pub resolution: u32,
}

impl FaceEntry {
    pub fn spec(&self, nb_splits: u32) -> Result<FaceSpec> {
        FaceSpec::new(self.ring, self.index, nb_splits, self.resolution)
    }
}

/// The face file naming contract.
pub fn face_file_name(frame_id: u64, ring: Ring, index: u32) -> String {
    format!("{frame_id}_{ring}_{index}.png")
}

pub fn write_manifest(path: &Path, entries: &[FaceEntry]) -> Result<()> {
    let mut out = String::from("# panoply/faces v1\n# file\tframe_id\tring\tindex\tresolution\n");
    for e in entries {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            e.file, e.frame_id, e.ring, e.index, e.resolution
        ));
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<Vec<FaceEntry>> {
    let text = read_text(path)?;
    let mut entries = Vec::new();
    for (lineno, line) in data_lines(&text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 5 tab-separated fields, got {}", fields.len()),
            ));
        }
        entries.push(FaceEntry {
            file: fields[0].to_string(),
            frame_id: fields[1]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad frame id"))?,
            ring: Ring::parse(fields[2]).map_err(|e| Error::parse(path, lineno, e.to_string()))?,
            index: fields[3]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad face index"))?,
            resolution: fields[4]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad resolution"))?,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naming_contract() {
        assert_eq!(face_file_name(12, Ring::Top, 4), "12_top_4.png");
    }

    #[test]
    fn manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.txt");
        let entries = vec![
            FaceEntry {
                file: face_file_name(0, Ring::Horizontal, 0),
                frame_id: 0,
                ring: Ring::Horizontal,
                index: 0,
                resolution: 640,
            },
            FaceEntry {
                file: face_file_name(0, Ring::Bottom, 5),
                frame_id: 0,
                ring: Ring::Bottom,
                index: 5,
                resolution: 640,
            },
        ];
        write_manifest(&path, &entries).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), entries);
    }
}
