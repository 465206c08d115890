//! Pothole detection from inertial streams and image masks.
//!
//! - [`ingest`]: sensor log CSV parsing/writing.
//! - [`features`]: windowing and the six magnitude statistics.
//! - [`svm`]: linear soft-margin SVM training, prediction and model files.
//! - [`detectors`]: streaming SVM detector, acceleration-threshold baselines
//!   and evaluation.
//! - [`vision`]: mask and grayscale image analytics.
//! - [`simulator`]: seeded synthetic road traces with ground truth.
//! - [`registry`]: deduplicating pothole store.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! pin the common `f64` instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detectors;
pub mod error;
pub mod features;
pub mod ingest;
pub mod registry;
pub mod scalar;
pub mod simulator;
pub mod svm;
pub mod vision;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ImuSampleF64 = ingest::ImuSample<f64>;
pub type ImuSampleF32 = ingest::ImuSample<f32>;
pub type SampleStreamF64 = ingest::SampleStream<f64>;
pub type SampleStreamF32 = ingest::SampleStream<f32>;
pub type FeatureVectorF64 = features::FeatureVector<f64>;
pub type FeatureVectorF32 = features::FeatureVector<f32>;
pub type ScalerF64 = features::Scaler<f64>;
pub type LinearSvmF64 = svm::LinearSvmModel<f64>;
pub type LinearSvmF32 = svm::LinearSvmModel<f32>;
pub type HomographyF64 = vision::Homography<f64>;
pub type ImagePlaneF64 = vision::ImagePlane<f64>;
