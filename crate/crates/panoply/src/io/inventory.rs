//! Asset inventory and ground-truth manifests.
//!
//! Tab-separated, one instance per line:
//! `class_id name x y z support min_x min_y min_z max_x max_y max_z`.
//! Ground-truth files use the same schema; the support and bounding-box
//! columns may be omitted there since only class and location matter.

use std::path::Path;

use nalgebra::Vector3;

use crate::classes::ClassTable;
use crate::error::{Error, Result};
use crate::evaluation::GroundTruthAsset;
use crate::instances::{Aabb, AssetInstance};
use crate::io::{data_lines, read_text, write_atomic};

pub fn write_inventory(path: &Path, instances: &[AssetInstance], table: &ClassTable) -> Result<()> {
    let mut out = String::from(
        "# panoply/inventory v1\n# class_id\tname\tx\ty\tz\tsupport\tmin_x\tmin_y\tmin_z\tmax_x\tmax_y\tmax_z\n",
    );
    for inst in instances {
        let c = inst.centroid;
        let e = inst.extent;
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            inst.class_id,
            table.name(inst.class_id),
            c.x,
            c.y,
            c.z,
            inst.support,
            e.min.x,
            e.min.y,
            e.min.z,
            e.max.x,
            e.max.y,
            e.max.z
        ));
    }
    write_atomic(path, out.as_bytes())
}

fn parse_fields<'a>(
    path: &Path,
    lineno: usize,
    line: &'a str,
    minimum: usize,
) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < minimum {
        return Err(Error::parse(
            path,
            lineno,
            format!("expected at least {minimum} tab-separated fields, got {}", fields.len()),
        ));
    }
    Ok(fields)
}

fn parse_f64(path: &Path, lineno: usize, token: &str, what: &str) -> Result<f64> {
    token
        .parse()
        .map_err(|_| Error::parse(path, lineno, format!("bad {what} '{token}'")))
}

pub fn read_inventory(path: &Path) -> Result<Vec<AssetInstance>> {
    let text = read_text(path)?;
    let mut instances = Vec::new();
    for (lineno, line) in data_lines(&text) {
        let fields = parse_fields(path, lineno, line, 12)?;
        let class_id: u8 = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad class id"))?;
        let centroid = Vector3::new(
            parse_f64(path, lineno, fields[2], "x")?,
            parse_f64(path, lineno, fields[3], "y")?,
            parse_f64(path, lineno, fields[4], "z")?,
        );
        let support: usize = fields[5]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad support count"))?;
        let min = Vector3::new(
            parse_f64(path, lineno, fields[6], "min_x")?,
            parse_f64(path, lineno, fields[7], "min_y")?,
            parse_f64(path, lineno, fields[8], "min_z")?,
        );
        let max = Vector3::new(
            parse_f64(path, lineno, fields[9], "max_x")?,
            parse_f64(path, lineno, fields[10], "max_y")?,
            parse_f64(path, lineno, fields[11], "max_z")?,
        );
        instances.push(AssetInstance {
            class_id,
            centroid,
            support,
            extent: Aabb { min, max },
        });
    }
    Ok(instances)
}

/// Reads ground truth: only class id and location are required per line.
pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruthAsset>> {
    let text = read_text(path)?;
    let mut assets = Vec::new();
    for (lineno, line) in data_lines(&text) {
        let fields = parse_fields(path, lineno, line, 5)?;
        let class_id: u8 = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad class id"))?;
        let location = Vector3::new(
            parse_f64(path, lineno, fields[2], "x")?,
            parse_f64(path, lineno, fields[3], "y")?,
            parse_f64(path, lineno, fields[4], "z")?,
        );
        if !(location.x.is_finite() && location.y.is_finite() && location.z.is_finite()) {
            return Err(Error::parse(path, lineno, "non-finite location"));
        }
        assets.push(GroundTruthAsset { class_id, location });
    }
    Ok(assets)
}

/// Writes ground truth in the inventory schema (support 0, point extent).
pub fn write_ground_truth(
    path: &Path,
    assets: &[GroundTruthAsset],
    table: &ClassTable,
) -> Result<()> {
    let instances: Vec<AssetInstance> = assets
        .iter()
        .map(|a| AssetInstance {
            class_id: a.class_id,
            centroid: a.location,
            support: 0,
            extent: Aabb {
                min: a.location,
                max: a.location,
            },
        })
        .collect();
    write_inventory(path, &instances, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inventory.tsv");
        let table = ClassTable::default();
        let instances = vec![AssetInstance {
            class_id: 9,
            centroid: Vector3::new(1.5, -0.25, 3.0),
            support: 123,
            extent: Aabb {
                min: Vector3::new(1.4, -0.3, 2.9),
                max: Vector3::new(1.6, -0.2, 3.1),
            },
        }];
        write_inventory(&path, &instances, &table).unwrap();
        assert_eq!(read_inventory(&path).unwrap(), instances);
    }

    #[test]
    fn ground_truth_accepts_short_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.tsv");
        std::fs::write(&path, "1\tfire extinguisher\t0.5\t1.0\t-2.0\n").unwrap();
        let assets = read_ground_truth(&path).unwrap();
        assert_eq!(assets.len(), 1);
        assert_eq!(assets[0].class_id, 1);
        assert_eq!(assets[0].location, Vector3::new(0.5, 1.0, -2.0));
    }

    #[test]
    fn ground_truth_round_trips_through_inventory_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.tsv");
        let table = ClassTable::default();
        let assets = vec![
            GroundTruthAsset {
                class_id: 6,
                location: Vector3::new(2.0, -1.3, 5.5),
            },
            GroundTruthAsset {
                class_id: 1,
                location: Vector3::new(0.0, 0.0, 1.0),
            },
        ];
        write_ground_truth(&path, &assets, &table).unwrap();
        assert_eq!(read_ground_truth(&path).unwrap(), assets);
    }

    #[test]
    fn class_names_with_spaces_survive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.tsv");
        let table = ClassTable::default();
        write_ground_truth(
            &path,
            &[GroundTruthAsset {
                class_id: 11,
                location: Vector3::zeros(),
            }],
            &table,
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("emergency door release"));
        assert_eq!(read_ground_truth(&path).unwrap().len(), 1);
    }
}
