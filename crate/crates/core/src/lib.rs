//! Exact simulation of Hawkes process clusters.
//!
//! A cluster is the initial event at time zero together with all of its
//! self-excited descendants. Given the cluster size, the compensator-transformed
//! epochs are uniform on a polytope whose Dyck-path regions are weighted
//! exactly like sorted uniform parking functions. That gives an exact
//! simulator that draws the size first, so sizes can also be fixed for
//! rare-event studies, plus a closed-form description of the duration when
//! the kernel is exponential.
//!
//! ```
//! use hawkes_cluster::{simulate_cluster, Kernel, replication_rng};
//!
//! let kernel = Kernel::exponential(3.0, 4.0).unwrap();
//! let mut rng = replication_rng(42, 0);
//! let cluster = simulate_cluster(&kernel, &mut rng, Some(10)).unwrap();
//! assert_eq!(cluster.size(), 10);
//! ```

// `!(x > y)` is used on purpose so that NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod combinat;
mod error;
pub mod kernel;
pub mod markov;
pub mod polytope;
pub mod seeding;
pub mod stats;

pub use cluster::{
    branching_cluster, dassios_zhao_cluster, invert_compensator, invert_exponential, poisson_race_cluster,
    sample_compensator_poisson_race, simulate_cluster, Cluster, InversionReport,
};
pub use combinat::{DyckPath, ParkingFunction};
pub use error::{Error, Result};
pub use kernel::{compensator_at_epochs, ExcitationKernel, Kernel};
pub use polytope::{classify_region, sample_compensator_points, CompensatorVector};
pub use seeding::replication_rng;
