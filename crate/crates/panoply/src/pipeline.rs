//! Stage orchestration over the filesystem.
//!
//! Each stage reads its inputs, writes its outputs atomically under the
//! configured output directory, and is idempotent: re-running a stage with
//! unchanged inputs reproduces its outputs byte for byte, at any worker
//! count. Stage layout:
//!
//! ```text
//! <output_dir>/
//!   faces/                  convert: face PNGs + manifest.txt
//!   face_masks/             segment: one mask per face (external backend)
//!   equirect_masks/         fuse:    merged per-frame masks
//!   labeled.ply             project: classified point cloud
//!   inventory.tsv           cluster: asset instances
//!   synthetic_cloud.ply     sample:  model cloud for pair picking
//!   transform.txt           register: capture -> model similarity
//!   inventory_registered.tsv
//!   report.txt, report.tsv  evaluate
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;

use log::{info, warn};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evaluation::{compute_metrics, match_instances, EvalReport};
use crate::fusion::{merge_face_masks, suppress_regions, FaceMask};
use crate::instances::extract_instances;
use crate::io::inventory::{read_ground_truth, read_inventory, write_inventory};
use crate::io::manifest::{face_file_name, read_manifest, write_manifest, FaceEntry};
use crate::io::masks::{load_image, load_mask, save_image, save_mask};
use crate::io::mesh::read_mesh;
use crate::io::ply::{read_labeled_cloud, read_point_cloud, write_labeled_cloud, write_point_cloud};
use crate::io::pairs::read_pairs;
use crate::io::poses::read_poses;
use crate::io::report::write_report;
use crate::io::transform::write_transform;
use crate::labeling::{
    accumulate_frame_votes, finalize_weighted_majority, LabeledCloud, VoteTable,
};
use crate::panorama::{render_face_image, FaceSpec, Sampling};
use crate::raster::Equirect;
use crate::registration::{estimate_similarity, sample_surface};

/// Locations of every stage artifact beneath the output directory.
#[derive(Debug, Clone)]
pub struct OutputLayout {
    pub faces_dir: PathBuf,
    pub faces_manifest: PathBuf,
    pub face_masks_dir: PathBuf,
    pub equirect_masks_dir: PathBuf,
    pub labeled_cloud: PathBuf,
    pub inventory: PathBuf,
    pub synthetic_cloud: PathBuf,
    pub transform: PathBuf,
    pub inventory_registered: PathBuf,
    pub report_table: PathBuf,
    pub report_tsv: PathBuf,
}

impl OutputLayout {
    pub fn new(config: &PipelineConfig) -> OutputLayout {
        let out = &config.paths.output_dir;
        OutputLayout {
            faces_dir: out.join("faces"),
            faces_manifest: out.join("faces").join("manifest.txt"),
            face_masks_dir: config.face_masks_dir(),
            equirect_masks_dir: out.join("equirect_masks"),
            labeled_cloud: out.join("labeled.ply"),
            inventory: out.join("inventory.tsv"),
            synthetic_cloud: out.join("synthetic_cloud.ply"),
            transform: out.join("transform.txt"),
            inventory_registered: out.join("inventory_registered.tsv"),
            report_table: out.join("report.txt"),
            report_tsv: out.join("report.tsv"),
        }
    }

    pub fn equirect_mask_path(&self, frame_id: u64) -> PathBuf {
        self.equirect_masks_dir.join(format!("{frame_id}.png"))
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = default pool).
/// Stage results do not depend on the worker count.
pub fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid_input(format!("cannot build worker pool: {e}")))?;
    pool.install(f)
}

#[derive(Debug, Clone)]
pub struct ConvertSummary {
    pub frames: usize,
    pub faces: usize,
    /// (file name, reason) for every skipped frame.
    pub skipped: Vec<(String, String)>,
}

/// Splits every capture frame into its rectilinear face views and writes
/// the face manifest. Frames are ordered by file name; the n-th readable
/// file becomes frame id n. Unreadable or non-2:1 frames are skipped with a
/// diagnostic.
pub fn convert(config: &PipelineConfig) -> Result<ConvertSummary> {
    let frames_dir = config
        .paths
        .frames_dir
        .as_ref()
        .ok_or_else(|| Error::invalid_input("convert needs paths.frames_dir"))?;
    let layout = OutputLayout::new(config);

    let mut files: Vec<PathBuf> = std::fs::read_dir(frames_dir)
        .map_err(|e| Error::io(frames_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
                Some("png") | Some("jpg") | Some("jpeg")
            )
        })
        .collect();
    files.sort();

    let specs = FaceSpec::all_faces(config.panorama.nb_splits, config.panorama.face_resolution)?;

    let results: Vec<std::result::Result<Vec<FaceEntry>, (String, String)>> =
        with_pool(config.run.workers, || {
            Ok(files
                .par_iter()
                .enumerate()
                .map(|(frame_id, path)| {
                    let name = path
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    let image = load_image(path).map_err(|e| (name.clone(), e.to_string()))?;
                    let frame = Equirect::new(frame_id as u64, image)
                        .map_err(|e| (name.clone(), e.to_string()))?;
                    let mut entries = Vec::with_capacity(specs.len());
                    for spec in &specs {
                        let face = render_face_image(&frame, spec, Sampling::Bilinear)
                            .map_err(|e| (name.clone(), e.to_string()))?;
                        let file = face_file_name(frame.frame_id, spec.ring, spec.index);
                        save_image(&layout.faces_dir.join(&file), &face)
                            .map_err(|e| (name.clone(), e.to_string()))?;
                        entries.push(FaceEntry {
                            file,
                            frame_id: frame.frame_id,
                            ring: spec.ring,
                            index: spec.index,
                            resolution: spec.resolution,
                        });
                    }
                    Ok(entries)
                })
                .collect())
        })?;

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for result in results {
        match result {
            Ok(faces) => entries.extend(faces),
            Err((file, reason)) => {
                warn!("convert: skipping {file}: {reason}");
                skipped.push((file, reason));
            }
        }
    }
    write_manifest(&layout.faces_manifest, &entries)?;

    if files.is_empty() {
        return Err(Error::invalid_input(format!(
            "no frames found in {}",
            frames_dir.display()
        )));
    }
    if entries.is_empty() {
        return Err(Error::invalid_input(format!(
            "all {} frames failed to convert",
            files.len()
        )));
    }
    let summary = ConvertSummary {
        frames: files.len() - skipped.len(),
        faces: entries.len(),
        skipped,
    };
    info!(
        "convert: {} frames -> {} faces ({} skipped)",
        summary.frames,
        summary.faces,
        summary.skipped.len()
    );
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct SegmentSummary {
    pub masks: usize,
}

/// Invokes the configured segmentation backend on the face manifest, then
/// validates that every listed face received a mask of the right size with
/// class ids inside the table.
pub fn segment(config: &PipelineConfig) -> Result<SegmentSummary> {
    let layout = OutputLayout::new(config);
    let command = config
        .run
        .segmenter
        .as_ref()
        .ok_or_else(|| Error::invalid_input("segment needs run.segmenter"))?;
    if !layout.faces_manifest.exists() {
        return Err(Error::invalid_input(format!(
            "face manifest {} not found; run convert first",
            layout.faces_manifest.display()
        )));
    }
    let entries = read_manifest(&layout.faces_manifest)?;
    let table = config.class_table()?;

    std::fs::create_dir_all(&layout.face_masks_dir)
        .map_err(|e| Error::io(&layout.face_masks_dir, e))?;
    let rendered = command
        .replace("{manifest}", &layout.faces_manifest.to_string_lossy())
        .replace("{output}", &layout.face_masks_dir.to_string_lossy());
    info!("segment: running: {rendered}");
    let output = Command::new("sh")
        .arg("-c")
        .arg(&rendered)
        .output()
        .map_err(|e| Error::invalid_input(format!("cannot run segmenter: {e}")))?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        return Err(Error::validation(format!(
            "segmenter exited with {}: {}",
            output.status,
            stderr.trim()
        )));
    }

    let mut problems = Vec::new();
    for entry in &entries {
        let path = layout.face_masks_dir.join(&entry.file);
        if !path.exists() {
            problems.push(format!("{}: mask missing", entry.file));
            continue;
        }
        match load_mask(&path) {
            Err(e) => problems.push(format!("{}: {e}", entry.file)),
            Ok(mask) => {
                if mask.width() != entry.resolution || mask.height() != entry.resolution {
                    problems.push(format!(
                        "{}: mask is {}x{}, expected {res}x{res}",
                        entry.file,
                        mask.width(),
                        mask.height(),
                        res = entry.resolution
                    ));
                    continue;
                }
                if let Some(&bad) = mask.data().iter().find(|&&v| !table.is_valid_label(v)) {
                    problems.push(format!(
                        "{}: class id {bad} outside the {}-class table",
                        entry.file,
                        table.num_classes()
                    ));
                }
            }
        }
    }
    if !problems.is_empty() {
        let shown = problems.iter().take(20).cloned().collect::<Vec<_>>().join("; ");
        let more = problems.len().saturating_sub(20);
        let suffix = if more > 0 { format!(" (and {more} more)") } else { String::new() };
        return Err(Error::validation(format!(
            "segmentation output failed validation: {shown}{suffix}"
        )));
    }
    info!("segment: validated {} masks", entries.len());
    Ok(SegmentSummary {
        masks: entries.len(),
    })
}

#[derive(Debug, Clone)]
pub struct FuseSummary {
    pub frames: usize,
}

/// Merges each frame's face masks (rectified by any suppression rasters)
/// into one equirectangular mask per frame.
pub fn fuse(config: &PipelineConfig) -> Result<FuseSummary> {
    let layout = OutputLayout::new(config);
    if !layout.faces_manifest.exists() {
        return Err(Error::invalid_input(format!(
            "face manifest {} not found; run convert first",
            layout.faces_manifest.display()
        )));
    }
    let entries = read_manifest(&layout.faces_manifest)?;
    let table = config.class_table()?;
    let (width, height) = (config.panorama.width, config.pano_height());
    let nb_splits = config.panorama.nb_splits;

    let mut frames: BTreeMap<u64, Vec<FaceEntry>> = BTreeMap::new();
    for entry in entries {
        frames.entry(entry.frame_id).or_default().push(entry);
    }
    if frames.is_empty() {
        return Err(Error::invalid_input("face manifest lists no faces"));
    }

    let work: Vec<(u64, Vec<FaceEntry>)> = frames.into_iter().collect();
    with_pool(config.run.workers, || {
        work.par_iter().try_for_each(|(frame_id, faces)| {
            let mut masks = Vec::with_capacity(faces.len());
            for entry in faces {
                let path = layout.face_masks_dir.join(&entry.file);
                if !path.exists() {
                    warn!("fuse: frame {frame_id}: {} has no mask, face skipped", entry.file);
                    continue;
                }
                let mut labels = load_mask(&path)?;
                if let Some(suppression_dir) = &config.paths.suppression_dir {
                    let suppression_path = suppression_dir.join(&entry.file);
                    if suppression_path.exists() {
                        let suppression = load_mask(&suppression_path)?;
                        let face = FaceMask::new(entry.spec(nb_splits)?, labels)?;
                        labels = suppress_regions(&face, &suppression)
                            .map_err(|e| {
                                Error::validation(format!("{}: {e}", suppression_path.display()))
                            })?
                            .labels;
                    }
                }
                masks.push(FaceMask::new(entry.spec(nb_splits)?, labels)?);
            }
            let merged = merge_face_masks(*frame_id, &masks, table.num_classes(), width, height)
                .map_err(|e| Error::validation(format!("frame {frame_id}: {e}")))?;
            save_mask(&layout.equirect_mask_path(*frame_id), merged.raster())
        })?;
        Ok(())
    })?;
    info!("fuse: merged {} frames", work.len());
    Ok(FuseSummary { frames: work.len() })
}

#[derive(Debug, Clone)]
pub struct ProjectSummary {
    pub points: usize,
    pub frames: usize,
    /// Points that ended up with a non-background class.
    pub labeled_points: usize,
}

/// Projects the cloud into every posed frame's merged mask, accumulates
/// per-point votes, finalizes classes, and writes the labeled cloud.
pub fn project(config: &PipelineConfig) -> Result<ProjectSummary> {
    let layout = OutputLayout::new(config);
    let cloud_path = config
        .paths
        .cloud
        .as_ref()
        .ok_or_else(|| Error::invalid_input("project needs paths.cloud"))?;
    let poses_path = config
        .paths
        .poses
        .as_ref()
        .ok_or_else(|| Error::invalid_input("project needs paths.poses"))?;
    let table = config.class_table()?;
    let radius = config.projection.radius;

    let cloud = read_point_cloud(cloud_path)?;
    if cloud.is_empty() {
        return Err(Error::invalid_input(format!(
            "{}: point cloud is empty",
            cloud_path.display()
        )));
    }
    let poses = read_poses(poses_path)?;

    // Keep only poses whose frame produced a merged mask.
    let mut jobs = Vec::new();
    for record in &poses {
        let mask_path = layout.equirect_mask_path(record.pose.frame_id);
        if mask_path.exists() {
            jobs.push((record.pose.clone(), mask_path));
        } else {
            warn!(
                "project: frame {} has no merged mask at {}, skipped",
                record.pose.frame_id,
                mask_path.display()
            );
        }
    }
    if jobs.is_empty() {
        return Err(Error::invalid_input(
            "no posed frame has a merged mask; run fuse first",
        ));
    }

    let num_classes = table.num_classes();
    let votes = with_pool(config.run.workers, || {
        // Bounded number of partial tables: one per chunk, merged by
        // elementwise addition, so totals match any processing order.
        let chunk = jobs.len().div_ceil(rayon::current_num_threads().max(1));
        let partials: Vec<Result<VoteTable>> = jobs
            .par_chunks(chunk.max(1))
            .map(|chunk_jobs| {
                let mut partial = VoteTable::new(cloud.len(), num_classes);
                for (pose, mask_path) in chunk_jobs {
                    let raster = load_mask(mask_path)?;
                    let mask = Equirect::new(pose.frame_id, raster)?;
                    accumulate_frame_votes(&cloud, pose, &mask, radius, &mut partial)?;
                }
                Ok(partial)
            })
            .collect();
        let mut votes = VoteTable::new(cloud.len(), num_classes);
        for partial in partials {
            votes.merge_from(&partial?)?;
        }
        Ok(votes)
    })?;

    let classes = finalize_weighted_majority(&votes, &table)?;
    let labeled_points = classes.iter().filter(|&&c| c != 0).count();
    let points = cloud.len();
    let frames = jobs.len();
    let labeled = LabeledCloud::new(cloud, classes)?;
    write_labeled_cloud(&layout.labeled_cloud, &labeled)?;
    info!(
        "project: {points} points x {frames} frames -> {labeled_points} labeled"
    );
    Ok(ProjectSummary {
        points,
        frames,
        labeled_points,
    })
}

#[derive(Debug, Clone)]
pub struct ClusterSummary {
    pub instances: usize,
}

/// Clusters the labeled cloud per class and writes the asset inventory.
pub fn cluster(config: &PipelineConfig) -> Result<ClusterSummary> {
    let layout = OutputLayout::new(config);
    if !layout.labeled_cloud.exists() {
        return Err(Error::invalid_input(format!(
            "labeled cloud {} not found; run project first",
            layout.labeled_cloud.display()
        )));
    }
    let table = config.class_table()?;
    let labeled = read_labeled_cloud(&layout.labeled_cloud)?;
    let instances = with_pool(config.run.workers, || extract_instances(&labeled, &table))?;
    write_inventory(&layout.inventory, &instances, &table)?;
    info!("cluster: {} instances", instances.len());
    Ok(ClusterSummary {
        instances: instances.len(),
    })
}

#[derive(Debug, Clone)]
pub struct SampleSummary {
    pub points: usize,
}

/// Samples the building-model mesh into the synthetic registration cloud.
pub fn sample(config: &PipelineConfig) -> Result<SampleSummary> {
    let layout = OutputLayout::new(config);
    let mesh_path = config
        .paths
        .mesh
        .as_ref()
        .ok_or_else(|| Error::invalid_input("sample needs paths.mesh"))?;
    let mesh = read_mesh(mesh_path)?;
    let cloud = with_pool(config.run.workers, || {
        sample_surface(&mesh, config.sampling.total_points, config.run.seed)
    })?;
    write_point_cloud(&layout.synthetic_cloud, &cloud)?;
    info!("sample: {} points onto {}", cloud.len(), layout.synthetic_cloud.display());
    Ok(SampleSummary {
        points: cloud.len(),
    })
}

#[derive(Debug, Clone)]
pub struct RegisterSummary {
    pub scale: f64,
    pub rms_residual: f64,
    pub registered_inventory: bool,
}

/// Fits the capture-to-model similarity from the picked pairs, records it,
/// and registers the inventory into the model frame when one exists.
pub fn register(config: &PipelineConfig) -> Result<RegisterSummary> {
    let layout = OutputLayout::new(config);
    let pairs_path = config
        .paths
        .pairs
        .as_ref()
        .ok_or_else(|| Error::invalid_input("register needs paths.pairs"))?;
    let point_pairs = read_pairs(pairs_path)?;
    let estimated = estimate_similarity(&point_pairs)?;
    write_transform(&layout.transform, &estimated)?;
    info!(
        "register: scale {:.6}, rms residual {:.6} m over {} pairs",
        estimated.transform.scale,
        estimated.rms_residual,
        point_pairs.len()
    );

    let mut registered_inventory = false;
    if layout.inventory.exists() {
        let table = config.class_table()?;
        let instances = read_inventory(&layout.inventory)?;
        let moved = estimated.transform.apply_instances(&instances);
        write_inventory(&layout.inventory_registered, &moved, &table)?;
        registered_inventory = true;
    }
    Ok(RegisterSummary {
        scale: estimated.transform.scale,
        rms_residual: estimated.rms_residual,
        registered_inventory,
    })
}

/// Compares the inventory (registered when available) against the surveyed
/// ground truth and writes the report pair.
pub fn evaluate(config: &PipelineConfig) -> Result<EvalReport> {
    let layout = OutputLayout::new(config);
    let gt_path = config
        .paths
        .ground_truth
        .as_ref()
        .ok_or_else(|| Error::invalid_input("evaluate needs paths.ground_truth"))?;
    let inventory_path = if layout.inventory_registered.exists() {
        &layout.inventory_registered
    } else {
        &layout.inventory
    };
    if !inventory_path.exists() {
        return Err(Error::invalid_input(format!(
            "inventory {} not found; run cluster first",
            inventory_path.display()
        )));
    }
    let table = config.class_table()?;
    let predictions = read_inventory(inventory_path)?;
    let truths = read_ground_truth(gt_path)?;
    let matching = match_instances(&predictions, &truths, config.evaluation.max_dist)?;
    let report = compute_metrics(&predictions, &truths, &matching, &table);
    write_report(&layout.report_table, &layout.report_tsv, &report)?;
    info!(
        "evaluate: precision {:.1}%, recall {:.1}%, F1 {:.1}% over {} classes",
        report.average.precision * 100.0,
        report.average.recall * 100.0,
        report.average.f1 * 100.0,
        report.average.classes
    );
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct PipelineSummary {
    pub stages: Vec<&'static str>,
}

/// Chains every stage whose inputs are configured: convert, segment, fuse,
/// project, cluster, sample, register, evaluate.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineSummary> {
    let layout = OutputLayout::new(config);
    let mut summary = PipelineSummary::default();

    if config.paths.frames_dir.is_some() {
        convert(config)?;
        summary.stages.push("convert");
    }
    if config.run.segmenter.is_some() {
        segment(config)?;
        summary.stages.push("segment");
    }
    if layout.faces_manifest.exists() {
        fuse(config)?;
        summary.stages.push("fuse");
    }
    if config.paths.cloud.is_some() && config.paths.poses.is_some() {
        project(config)?;
        summary.stages.push("project");
        cluster(config)?;
        summary.stages.push("cluster");
    }
    if config.paths.mesh.is_some() {
        sample(config)?;
        summary.stages.push("sample");
    }
    if config.paths.pairs.is_some() {
        register(config)?;
        summary.stages.push("register");
    }
    if config.paths.ground_truth.is_some() {
        evaluate(config)?;
        summary.stages.push("evaluate");
    }
    if summary.stages.is_empty() {
        return Err(Error::invalid_input(
            "config names no runnable stage inputs",
        ));
    }
    info!("pipeline: ran {}", summary.stages.join(" -> "));
    Ok(summary)
}
