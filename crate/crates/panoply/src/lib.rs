//! panoply — panoramic scan-to-model toolkit.
//!
//! Turns 360° capture frames, their camera poses, per-view segmentation
//! masks, and a photogrammetric point cloud into a semantically labeled
//! cloud, a located equipment inventory registered into a building-model
//! frame, and an evaluation report against surveyed ground truth.
//!
//! The stages, each usable on its own:
//!
//! 1. [`panorama`] — split each equirectangular frame into 18 rectilinear
//!    views (three rings of six, tilted ±30°) that ordinary image models
//!    can segment, and map pixels back again.
//! 2. [`fusion`] — rectify per-view masks with suppression rasters and
//!    merge each frame's views into one panoramic mask by per-pixel voting
//!    with asset-over-background priority.
//! 3. [`labeling`] — project cloud points into every posed frame within a
//!    radius threshold, accumulate class votes, and finalize by weighted
//!    majority.
//! 4. [`instances`] — split each class into instances with DBSCAN and emit
//!    centroids as the inventory.
//! 5. [`registration`] — sample the building model into a synthetic cloud
//!    and fit a similarity transform from picked point pairs.
//! 6. [`evaluation`] — match the inventory against ground truth and compute
//!    precision/recall/F1 and localization error.
//! 7. [`pipeline`] — run the stages over the filesystem; the `panoply`
//!    binary exposes them as subcommands.
//!
//! The `examples/` directory holds one runnable example per capability;
//! start with `convert_panorama` and `run_pipeline`.

pub mod classes;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod geometry;
pub mod instances;
pub mod io;
pub mod labeling;
pub mod panorama;
pub mod pipeline;
pub mod raster;
pub mod registration;

pub use classes::{ClassEntry, ClassTable};
pub use config::{Overrides, PipelineConfig};
pub use error::{Error, Result};
pub use evaluation::{EvalReport, GroundTruthAsset};
pub use fusion::FaceMask;
pub use geometry::RotationMatrix;
pub use instances::AssetInstance;
pub use labeling::{CameraPose, LabeledCloud, PointCloud, VoteTable};
pub use panorama::{FaceSpec, Ring, Sampling};
pub use raster::{Equirect, Pixel, Raster};
pub use registration::{PointPair, SimilarityTransform, SurfaceMesh};
