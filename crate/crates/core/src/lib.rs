pub mod cr;
pub mod error;
pub mod feature;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod procedural;
pub mod raster;
pub mod scalar;
pub mod swin;
pub mod synthesis;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type RasterF32 = raster::Raster<f32>;
pub type RasterF64 = raster::Raster<f64>;
pub type FeatureMapF32 = feature::FeatureMap<f32>;
pub type FeatureMapF64 = feature::FeatureMap<f64>;
pub type MatrixF32 = linalg::Matrix<f32>;
pub type MatrixF64 = linalg::Matrix<f64>;
pub type CrConfigF32 = cr::CrConfig<f32>;
pub type CrConfigF64 = cr::CrConfig<f64>;
