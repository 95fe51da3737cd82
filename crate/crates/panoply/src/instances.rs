//! Instance separation of the labeled cloud and inventory extraction.
//!
//! Points of each asset class are clustered with DBSCAN using the class's
//! (eps, min_pts); every non-noise cluster becomes one inventory instance
//! whose location is the mean of its member points. Purely geometric:
//! two assets of the same class closer than eps merge into one instance.

use std::collections::HashMap;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::classes::ClassTable;
use crate::error::{Error, Result};
use crate::labeling::LabeledCloud;

/// Cluster label for points that belong to no cluster.
pub const NOISE: i32 = -1;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vector3<f64>>) -> Option<Aabb> {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        let mut aabb = Aabb {
            min: first,
            max: first,
        };
        for p in iter {
            aabb.min = aabb.min.inf(p);
            aabb.max = aabb.max.sup(p);
        }
        Some(aabb)
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }
}

/// One extracted asset: class, location, and the points that support it.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetInstance {
    pub class_id: u8,
    pub centroid: Vector3<f64>,
    pub support: usize,
    pub extent: Aabb,
}

/// Uniform grid over points with cell size eps; neighbor queries scan the
/// 27 surrounding cells and are exact (no approximation).
struct GridIndex {
    inv_cell: f64,
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl GridIndex {
    fn build(points: &[Vector3<f64>], eps: f64) -> GridIndex {
        let inv_cell = 1.0 / eps;
        let mut cells: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells
                .entry(Self::cell_of(p, inv_cell))
                .or_default()
                .push(i as u32);
        }
        GridIndex { inv_cell, cells }
    }

    #[inline]
    fn cell_of(p: &Vector3<f64>, inv_cell: f64) -> (i64, i64, i64) {
        (
            (p.x * inv_cell).floor() as i64,
            (p.y * inv_cell).floor() as i64,
            (p.z * inv_cell).floor() as i64,
        )
    }

    /// Visits every point within eps of `p` (including `p` itself) in
    /// ascending index order per cell.
    fn visit_neighbors(
        &self,
        points: &[Vector3<f64>],
        p: &Vector3<f64>,
        eps2: f64,
        mut visit: impl FnMut(u32),
    ) {
        let (cx, cy, cz) = Self::cell_of(p, self.inv_cell);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &j in bucket {
                            if (points[j as usize] - p).norm_squared() <= eps2 {
                                visit(j);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Density-based clustering: a point is a core point when at least
/// `min_pts` points (itself included) lie within `eps`; clusters are the
/// maximal sets of density-connected core points plus any border points
/// within eps of them. Returns a cluster id per point, [`NOISE`] for none.
///
/// Deterministic for a fixed point order: cluster ids are issued in order
/// of each cluster's lowest core-point index, and a border point in reach
/// of several clusters joins the one of its lowest-index core neighbor.
pub fn dbscan(points: &[Vector3<f64>], eps: f64, min_pts: usize) -> Result<Vec<i32>> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::invalid_input("dbscan eps must be positive"));
    }
    if min_pts == 0 {
        return Err(Error::invalid_input("dbscan min_pts must be at least 1"));
    }
    let n = points.len();
    let mut labels = vec![NOISE; n];
    if n == 0 {
        return Ok(labels);
    }
    let grid = GridIndex::build(points, eps);
    let eps2 = eps * eps;

    let mut core = vec![false; n];
    for i in 0..n {
        let mut count = 0usize;
        grid.visit_neighbors(points, &points[i], eps2, |_| count += 1);
        core[i] = count >= min_pts;
    }

    // Flood-fill the core graph, seeding from the lowest unlabeled core
    // index so cluster ids do not depend on traversal order.
    let mut next_cluster = 0i32;
    let mut queue: Vec<u32> = Vec::new();
    for seed in 0..n {
        if !core[seed] || labels[seed] != NOISE {
            continue;
        }
        let id = next_cluster;
        next_cluster += 1;
        labels[seed] = id;
        queue.push(seed as u32);
        while let Some(p) = queue.pop() {
            grid.visit_neighbors(points, &points[p as usize], eps2, |j| {
                let j = j as usize;
                if core[j] && labels[j] == NOISE {
                    labels[j] = id;
                    queue.push(j as u32);
                }
            });
        }
    }

    // Border points join the cluster of their lowest-index core neighbor.
    for i in 0..n {
        if core[i] {
            continue;
        }
        let mut nearest_core: Option<u32> = None;
        grid.visit_neighbors(points, &points[i], eps2, |j| {
            if core[j as usize] && nearest_core.is_none_or(|k| j < k) {
                nearest_core = Some(j);
            }
        });
        if let Some(j) = nearest_core {
            labels[i] = labels[j as usize];
        }
    }
    Ok(labels)
}

/// Runs per-class DBSCAN over a labeled cloud and emits one instance per
/// non-noise cluster. Background points are ignored and noise is dropped.
/// Output is ordered by class id, then by cluster id.
pub fn extract_instances(
    labeled: &LabeledCloud,
    table: &ClassTable,
) -> Result<Vec<AssetInstance>> {
    let mut per_class: Vec<Vec<Vector3<f64>>> = vec![Vec::new(); table.num_classes() + 1];
    for (point, &class) in labeled.cloud.points.iter().zip(&labeled.classes) {
        if class == 0 {
            continue;
        }
        if !table.is_valid_label(class) {
            return Err(Error::invalid_input(format!(
                "labeled cloud contains class id {class} beyond the class table"
            )));
        }
        per_class[class as usize].push(*point);
    }

    let groups: Vec<Result<Vec<AssetInstance>>> = (1..=table.num_classes())
        .into_par_iter()
        .map(|class| {
            let points = &per_class[class];
            if points.is_empty() {
                return Ok(Vec::new());
            }
            let entry = table.get(class as u8).expect("validated class id");
            let labels = dbscan(points, entry.cluster_eps, entry.cluster_min_pts)?;
            let cluster_count = labels.iter().copied().max().unwrap_or(NOISE) + 1;
            let mut instances = Vec::with_capacity(cluster_count as usize);
            for cluster in 0..cluster_count {
                let members: Vec<&Vector3<f64>> = points
                    .iter()
                    .zip(&labels)
                    .filter(|(_, &l)| l == cluster)
                    .map(|(p, _)| p)
                    .collect();
                let support = members.len();
                let mut centroid = Vector3::zeros();
                for p in &members {
                    centroid += **p;
                }
                centroid /= support as f64;
                let extent = Aabb::from_points(members).expect("non-empty cluster");
                instances.push(AssetInstance {
                    class_id: class as u8,
                    centroid,
                    support,
                    extent,
                });
            }
            Ok(instances)
        })
        .collect();

    let mut out = Vec::new();
    for group in groups {
        out.extend(group?);
    }
    Ok(out)
}
