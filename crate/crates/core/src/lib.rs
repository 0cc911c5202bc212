pub mod basis;
pub mod carleman;
pub mod cluster;
pub mod fit;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod laguerre;
pub mod level;
pub mod linalg;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod resolvent3d;
pub mod scalar;

pub use basis::{eigenfunction_eval, projection_kernel, RadialTable};
pub use error::{LandauError, Result};
pub use exponent::{nu_exponent, rho_exponent, Exponent, ExponentTable};
pub use grid::{build_grid, PolarGrid};
pub use level::{landau_eigenvalue, BasisTruncation, LevelIndex};

pub type Grid = PolarGrid<f64>;
pub type GridF32 = PolarGrid<f32>;
pub type ExactExponent = Exponent<num_rational::Ratio<i64>>;
pub type FloatExponent = Exponent<f64>;
