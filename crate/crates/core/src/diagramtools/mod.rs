//! Diagram comparison and persistence landscapes.

mod distance;
mod landscape;
pub mod matching;

pub use distance::{
    bottleneck, bottleneck_finite, table_distance, wasserstein, wasserstein_finite, DiagramDistance,
    DistanceError,
};
pub use landscape::{eval_landscape, landscape, mean_landscape, Landscape, LandscapeError};
