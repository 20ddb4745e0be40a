//! Complete isometry invariants of finite point clouds and metrics between
//! them.
//!
//! Two invariant families are provided:
//!
//! * the principal coordinates matrix ([`Pcm`]) for clouds whose covariance
//!   has distinct eigenvalues, compared by the symmetrized bottleneck
//!   distance [`sm_clouds`];
//! * the weighted matrices invariant ([`WmiDistribution`]) for every cloud,
//!   compared by linear assignment ([`lac`]) or nested Earth Mover's
//!   Distance ([`emd_wmi`]).
//!
//! ```
//! use isoclouds::{fixtures, sm_clouds, DEFAULT_REL_TOL};
//!
//! let d = sm_clouds(&fixtures::trapezium(), &fixtures::kite(), DEFAULT_REL_TOL).unwrap();
//! assert_eq!(d, 1.5);
//! ```

pub mod assignment;
pub mod bottleneck;
pub mod cli;
pub mod cloud;
pub mod emd;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod pci;
pub mod wmi;

pub use assignment::{solve_assignment, CostMatrix};
pub use bottleneck::{bottleneck, bottleneck_match};
pub use cloud::{center, covariance, minkowski_dist, CenteredCloud, PointCloud};
pub use emd::{emd, FlowMatrix};
pub use error::{Error, Result};
pub use linalg::{eigen_sym, CovarianceSpectrum, Matrix, SymMatrix};
pub use metrics::{
    assignment_min_cost, emd_columns, emd_oriented, emd_oriented_report, emd_wmi, lac,
    lac_isometry, lac_oriented, lac_oriented_report, MetricReport, Mirrored, Orientation,
    OrientedReport, Witness,
};
pub use pci::{
    cov_perturbation_bound, is_principally_generic, pcm, pcm_of, sm_clouds, sm_matrices,
    GenericityReport, Pcm, SignString, DEFAULT_REL_TOL,
};
pub use wmi::{
    mirror_wmi, wmi_of, Weight, WeightedMatrix, WmiDistribution, WmiParams, DEFAULT_QUANTUM,
    DEFAULT_TAU_DEP,
};
