//! Multiple infection source estimation for SI epidemics on networks.
//!
//! The library covers graph handling, SI spread simulation, exact counting
//! of infection sequences on trees, single- and two-source estimators, the
//! iterative partition-and-estimate procedure for an unknown number of
//! sources, and an evaluation harness.

pub mod counting;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod fixtures;
pub mod generators;
pub mod graph;
pub mod logmath;
pub mod metrics;
pub mod msep;
pub mod oracle;
pub mod partition;
pub mod seeding;
pub mod spread;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId, NodeSet};
pub use logmath::LogCount;
pub use partition::{voronoi_partition, Partition};
