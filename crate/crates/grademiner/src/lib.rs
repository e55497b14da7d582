//! Band students by GPA, cluster them with k-means, induce a decision
//! tree over their assessment attributes, and emit instructor-facing
//! distribution tables and effort recommendations.
//!
//! The numeric kernels ([`kmeans`], the entropy/gain math in [`dtree`],
//! the grade blending in [`advisor`]) are generic over the scalar type
//! via [`scalar::Real`]; the pipeline itself runs in `f64`, pinned by the
//! aliases at the crate root.

pub mod advisor;
pub mod dtree;
pub mod kmeans;
pub mod records;
pub mod report;
pub mod scalar;

pub use records::{Band, BandCounts, CategoricalRecord, Dataset, LabPerformance, StudentRecord};

/// Scalar type used by the concrete pipeline.
pub type Scalar = f64;

pub type Point = kmeans::Point<Scalar>;
pub type KMeansConfig = kmeans::KMeansConfig<Scalar>;
pub type ClusterModel = kmeans::ClusterModel<Scalar>;
pub type BandSpec = records::BandSpec<Scalar>;
pub type InternalWeights = advisor::InternalWeights<Scalar>;
pub type GradeMap = advisor::GradeMap<Scalar>;
pub type DistributionTable = advisor::DistributionTable<Scalar>;
