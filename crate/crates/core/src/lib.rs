//! Geometric median and mean shapes of discretized closed planar contours.
//!
//! Each input contour is turned into an exact Euclidean distance transform, the
//! transforms are summed into one cost field, and a marker-based watershed over
//! the inverted field extracts the closed path of minimal accumulated distance.
//! The same machinery with squared distances gives the mean shape, and an
//! augmented mode with edge pruning fuses frame-touching segmentations.
//!
//! ```
//! use gems_core::raster::{draw_closed_polyline, ContourImage, GridDims};
//! use gems_core::gems::{gems_median, GemsConfig};
//!
//! let dims = GridDims::new(48, 48).unwrap();
//! let mut square = ContourImage::empty(dims);
//! draw_closed_polyline(&mut square, &[(10, 10), (10, 37), (37, 37), (37, 10)]);
//! let result = gems_median(&[square.clone(), square.clone()], &GemsConfig::median(5.0)).unwrap();
//! assert!(result.per_input_distance[0].symmetric <= 1.0);
//! ```

pub mod edt;
pub mod error;
pub mod exact;
pub mod gems;
pub mod harness;
pub mod metrics;
pub mod morphology;
pub mod raster;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
