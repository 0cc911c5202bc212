//! Three-dimensional layered free resolvent: Landau levels in the plane times the
//! free line along x_d.

pub mod kernel;
pub mod lap;
pub mod layered;
pub mod mixed;
pub mod sumbound;

pub use kernel::{halfline_resolvent_kernel, sqrt_upper};
pub use lap::{lap_bilinear_scan, LapPotential, LapRow, LapScan};
pub use layered::{layered_resolvent_apply, AxialGrid, LayeredFunction};
pub use mixed::{mixed_norm, mixed_norm_layered, MixedNormSpec, MixedSpace};
pub use sumbound::{kernel_sum_check, kernel_sum_lhs, kernel_sum_rhs, KernelSum, SumLattice, SumCheck};

/// Landau threshold 2k + 1 of the transverse plane (n = 1).
pub(crate) fn threshold(k: u32) -> f64 {
    (2 * k + 1) as f64
}
