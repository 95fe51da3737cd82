//! Asset class catalog: ids, vote weights, and clustering parameters.
//!
//! Class id 0 is implicitly the background and carries a fixed vote weight
//! of 1.0; asset classes are numbered contiguously from 1.

use std::path::Path;

use crate::error::{Error, Result};

/// Background class id.
pub const BACKGROUND_ID: u8 = 0;

/// Fixed vote weight of the background class.
pub const BACKGROUND_WEIGHT: f64 = 1.0;

const DEFAULT_VOTE_WEIGHT: f64 = 2.0;
const DEFAULT_CLUSTER_EPS: f64 = 0.3;
const DEFAULT_CLUSTER_MIN_PTS: usize = 10;

/// The default asset classes, in id order starting at 1.
pub const DEFAULT_CLASS_NAMES: [&str; 15] = [
    "fire extinguisher",
    "fire exit sign",
    "fire door sign",
    "fire alarm",
    "emergency light",
    "smoke detector",
    "fire hose reel",
    "piping system",
    "sprinkler",
    "fire call point",
    "emergency door release",
    "fire blanket",
    "fire equipment sign",
    "firefighting lift switch",
    "hidden fire equipment",
];

/// One asset class with its fusion and clustering parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEntry {
    pub id: u8,
    pub name: String,
    /// Multiplier applied to this class's vote counts during point labeling.
    pub vote_weight: f64,
    /// Neighborhood radius (meters) for instance clustering.
    pub cluster_eps: f64,
    /// Density threshold for instance clustering.
    pub cluster_min_pts: usize,
}

/// The set of asset classes, ids contiguous from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTable {
    entries: Vec<ClassEntry>,
}

impl Default for ClassTable {
    fn default() -> Self {
        let entries = DEFAULT_CLASS_NAMES
            .iter()
            .enumerate()
            .map(|(i, name)| ClassEntry {
                id: (i + 1) as u8,
                name: (*name).to_string(),
                vote_weight: DEFAULT_VOTE_WEIGHT,
                cluster_eps: DEFAULT_CLUSTER_EPS,
                cluster_min_pts: DEFAULT_CLUSTER_MIN_PTS,
            })
            .collect();
        ClassTable { entries }
    }
}

impl ClassTable {
    pub fn new(entries: Vec<ClassEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid_input("class table must not be empty"));
        }
        for (i, entry) in entries.iter().enumerate() {
            if entry.id as usize != i + 1 {
                return Err(Error::invalid_input(format!(
                    "class ids must be contiguous from 1; entry {} has id {}",
                    i, entry.id
                )));
            }
            if !entry.vote_weight.is_finite() || entry.vote_weight <= 0.0 {
                return Err(Error::invalid_input(format!(
                    "class '{}': vote weight must be positive",
                    entry.name
                )));
            }
            if !entry.cluster_eps.is_finite() || entry.cluster_eps <= 0.0 {
                return Err(Error::invalid_input(format!(
                    "class '{}': cluster eps must be positive",
                    entry.name
                )));
            }
            if entry.cluster_min_pts == 0 {
                return Err(Error::invalid_input(format!(
                    "class '{}': cluster min_pts must be at least 1",
                    entry.name
                )));
            }
        }
        Ok(ClassTable { entries })
    }

    /// Number of asset classes (excluding the background).
    pub fn num_classes(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }

    pub fn get(&self, id: u8) -> Option<&ClassEntry> {
        if id == BACKGROUND_ID {
            return None;
        }
        self.entries.get(id as usize - 1)
    }

    pub fn name(&self, id: u8) -> &str {
        if id == BACKGROUND_ID {
            return "background";
        }
        self.get(id).map(|e| e.name.as_str()).unwrap_or("unknown")
    }

    /// Vote weight for a class id; the background weight is fixed at 1.0.
    pub fn weight(&self, id: u8) -> f64 {
        if id == BACKGROUND_ID {
            BACKGROUND_WEIGHT
        } else {
            self.get(id).map(|e| e.vote_weight).unwrap_or(BACKGROUND_WEIGHT)
        }
    }

    /// Whether a raster label is representable in this table (background included).
    pub fn is_valid_label(&self, id: u8) -> bool {
        (id as usize) <= self.num_classes()
    }

    /// Display color for a class id, used when colorizing labeled clouds.
    pub fn color(id: u8) -> [u8; 3] {
        if id == BACKGROUND_ID {
            return [128, 128, 128];
        }
        // Evenly spread hues, full saturation; stable across runs.
        let hue = (id as u32 * 360 / 16) % 360;
        hsv_to_rgb(hue as f64, 0.9, 0.95)
    }

    /// Parses the tab-separated class manifest:
    /// `id<TAB>name<TAB>vote_weight<TAB>cluster_eps<TAB>cluster_min_pts`.
    /// Lines starting with `#` and blank lines are ignored.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("expected 5 tab-separated fields, got {}", fields.len()),
                ));
            }
            let parse_err =
                |what: &str| Error::parse(path, lineno + 1, format!("invalid {what}"));
            entries.push(ClassEntry {
                id: fields[0].parse().map_err(|_| parse_err("class id"))?,
                name: fields[1].to_string(),
                vote_weight: fields[2].parse().map_err(|_| parse_err("vote weight"))?,
                cluster_eps: fields[3].parse().map_err(|_| parse_err("cluster eps"))?,
                cluster_min_pts: fields[4].parse().map_err(|_| parse_err("cluster min_pts"))?,
            });
        }
        ClassTable::new(entries)
    }

    /// Emits the manifest accepted by [`ClassTable::parse`].
    pub fn emit(&self) -> String {
        let mut out = String::from("# panoply/classes v1\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                e.id, e.name, e.vote_weight, e.cluster_eps, e.cluster_min_pts
            ));
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [
        ((r + m) * 255.0).round() as u8,
        ((g + m) * 255.0).round() as u8,
        ((b + m) * 255.0).round() as u8,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_has_fifteen_classes() {
        let table = ClassTable::default();
        assert_eq!(table.num_classes(), 15);
        assert_eq!(table.name(1), "fire extinguisher");
        assert_eq!(table.name(9), "sprinkler");
        assert_eq!(table.name(15), "hidden fire equipment");
        assert_eq!(table.name(0), "background");
    }

    #[test]
    fn rejects_gapped_ids() {
        let mut entries: Vec<ClassEntry> = ClassTable::default().entries().to_vec();
        entries[1].id = 5;
        assert!(ClassTable::new(entries).is_err());
    }

    #[test]
    fn background_weight_is_fixed() {
        let table = ClassTable::default();
        assert_eq!(table.weight(0), 1.0);
        assert_eq!(table.weight(3), 2.0);
    }

    #[test]
    fn manifest_round_trips() {
        let table = ClassTable::default();
        let text = table.emit();
        let parsed = ClassTable::parse(&text, Path::new("classes.tsv")).unwrap();
        assert_eq!(table, parsed);
    }

    #[test]
    fn label_range() {
        let table = ClassTable::default();
        assert!(table.is_valid_label(0));
        assert!(table.is_valid_label(15));
        assert!(!table.is_valid_label(16));
    }
}
