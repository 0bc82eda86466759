//! Seeded augmentation and drift transforms with box propagation.
//!
//! Geometric transforms ([`mirror_h`], [`rotate`]) move boxes along with the
//! pixels; photometric ones (blur, illumination, fog, rain, seasonal shift,
//! sensor noise) leave boxes untouched. Every transform is a pure function of
//! its inputs, parameters and seed, and each reduces to the identity at its
//! neutral parameters.

mod geometric;
mod photometric;
mod raster;
mod spec;

pub use geometric::{mirror_h, rotate, DEFAULT_FILL, DEFAULT_MIN_VISIBLE};
pub use photometric::{
    blur, fog, illumination, rain, seasonal, sensor_noise, Glare, RainParams, FOG_AIRLIGHT,
    RAIN_BLUR_SIGMA, RAIN_LEVEL, SEASONAL_SLOPE,
};
pub use raster::RasterImage;
pub use spec::{parse_spec_file, DriftKind, DriftOp, DriftSpec};

use crate::annotation::NormBox;
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// Output of a transform: the new image, surviving boxes and how many boxes
/// were dropped for leaving the canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformResult<T> {
    pub image: RasterImage,
    pub boxes: Vec<NormBox<T>>,
    pub dropped: usize,
}

impl<T: Scalar> TransformResult<T> {
    pub fn identity(image: &RasterImage, boxes: &[NormBox<T>]) -> Self {
        TransformResult {
            image: image.clone(),
            boxes: boxes.to_vec(),
            dropped: 0,
        }
    }
}

/// Applies `specs` left to right.
///
/// The seed handed to spec `i` is `derive_seed(spec.seed, stem, i)`, so the
/// output for an image depends only on its stem and the pipeline, never on
/// the order in which a batch is processed.
pub fn apply_pipeline<T: Scalar>(
    image: &RasterImage,
    boxes: &[NormBox<T>],
    specs: &[DriftSpec],
    stem: &str,
) -> TransformResult<T> {
    let mut state = TransformResult::identity(image, boxes);
    for (i, spec) in specs.iter().enumerate() {
        let seed = derive_seed(spec.seed(), stem, i as u64);
        let step = spec.op().apply(&state.image, &state.boxes, seed);
        state = TransformResult {
            image: step.image,
            boxes: step.boxes,
            dropped: state.dropped + step.dropped,
        };
    }
    state
}
