//! Randomization within neighborhoods (RWN): a statistical disclosure
//! control method that releases each cell either unchanged or replaced by the
//! same variable's value from a random record in the cell owner's
//! neighborhood, plus the tooling to build neighborhoods at scale and to
//! measure what the perturbation does to utility and privacy.

pub mod dataset;
pub mod distance;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod neighborhoods;
pub mod rng;
pub mod synth;

pub use dataset::{
    load_csv, read_csv, standardize, write_csv, Cell, ColumnKind, ColumnSchema, CsvOptions, Dataset, SchemaSource,
    StandardizedView,
};
pub use distance::{DistanceSpec, Metric};
pub use engine::{perturb, provenance_check, run, PerturbationReport, PerturbedDataset, RwnConfig};
pub use error::{Result, RwnError};
pub use neighborhoods::{Backend, BackendKind, NeighborhoodSet};
