//! Camera pose manifest.
//!
//! One record per line:
//! `frame_id image_name cx cy cz r00 r01 r02 r10 r11 r12 r20 r21 r22`
//! with the rotation row-major and camera-to-world. Image names must not
//! contain whitespace. Converting from an SfM export therefore means:
//! take the camera center in world coordinates and the rotation that maps
//! camera-frame directions (x-right, y-down, z-forward) into the world.

use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::RotationMatrix;
use crate::io::{data_lines, read_text, write_atomic};
use crate::labeling::CameraPose;

/// A pose plus the panorama file it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseRecord {
    pub pose: CameraPose,
    pub image: String,
}

pub fn read_poses(path: &Path) -> Result<Vec<PoseRecord>> {
    let text = read_text(path)?;
    let mut records = Vec::new();
    for (lineno, line) in data_lines(&text) {
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        if tokens.len() != 14 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 14 fields, got {}", tokens.len()),
            ));
        }
        let frame_id: u64 = tokens[0]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad frame id"))?;
        let image = tokens[1].to_string();
        let mut reals = [0.0f64; 12];
        for (slot, token) in reals.iter_mut().zip(&tokens[2..]) {
            *slot = token
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad number '{token}'")))?;
        }
        let position = Vector3::new(reals[0], reals[1], reals[2]);
        let mut rot = [0.0f64; 9];
        rot.copy_from_slice(&reals[3..12]);
        let orientation = RotationMatrix::from_row_major(&rot)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        records.push(PoseRecord {
            pose: CameraPose {
                frame_id,
                position,
                orientation,
            },
            image,
        });
    }
    Ok(records)
}

pub fn write_poses(path: &Path, records: &[PoseRecord]) -> Result<()> {
    let mut out = String::from(
        "# panoply/poses v1\n# frame_id image cx cy cz r00..r22 (row-major, camera-to-world)\n",
    );
    for r in records {
        let c = r.pose.position;
        out.push_str(&format!("{} {} {} {} {}", r.pose.frame_id, r.image, c.x, c.y, c.z));
        for v in r.pose.orientation.row_major() {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poses_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("poses.txt");
        let records = vec![
            PoseRecord {
                pose: CameraPose {
                    frame_id: 0,
                    position: Vector3::new(0.5, -1.0, 2.25),
                    orientation: RotationMatrix::about_y(0.7),
                },
                image: "000000.png".into(),
            },
            PoseRecord {
                pose: CameraPose {
                    frame_id: 1,
                    position: Vector3::new(1.5, -1.0, 2.25),
                    orientation: RotationMatrix::identity(),
                },
                image: "000001.png".into(),
            },
        ];
        write_poses(&path, &records).unwrap();
        assert_eq!(read_poses(&path).unwrap(), records);
    }

    #[test]
    fn rejects_improper_rotation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("poses.txt");
        std::fs::write(
            &path,
            "0 a.png 0 0 0 1 0 0 0 1 0 0 0 2\n",
        )
        .unwrap();
        assert!(read_poses(&path).is_err());
    }

    #[test]
    fn rejects_short_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("poses.txt");
        std::fs::write(&path, "0 a.png 0 0 0\n").unwrap();
        assert!(read_poses(&path).is_err());
    }
}
