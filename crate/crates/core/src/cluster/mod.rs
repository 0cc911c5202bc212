//! Cluster experiments around one Landau level.

pub mod assemble;
pub mod birman;
pub mod extremal;
pub mod projnorm;
pub mod scaling;
pub mod sharpness;
pub mod spectrum;

pub use assemble::{assemble_projected_potential, galerkin_matrix, level_channels, AngularModes, Channel};
pub use birman::{birman_schwinger_norm, BirmanSchwinger};
pub use extremal::{extremal_potential_search, ExtremalOptions, ExtremalResult};
pub use projnorm::{lowest_level_norm, projection_norm_estimate, ring_norm_closed_form, ProjNormEstimate, ProjNormOptions};
pub use sharpness::{sharpness_certificate, SharpnessCertificate};
pub use spectrum::{cluster_spectrum, ClusterReport};
pub use scaling::{sharp_sweep, upper_sweep, width_scaling_experiment, GridPolicy, SharpSweep, UpperSweep, WidthMode};
