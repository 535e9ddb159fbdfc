//! Relative Fisher information of normalized sums `Z_n = (X_1 + … + X_n)/√n`:
//! exact expansion coefficients `c_j` from cumulants, Edgeworth
//! corrections, grid densities by Fourier inversion, information
//! functionals, explicit Fisher bounds, and the experiment harness.

pub mod bounds;
pub mod coefficients;
pub mod cumulants;
pub mod decompose;
pub mod density;
pub mod edgeworth;
pub mod error;
pub mod family;
pub mod functionals;
pub mod gauss_poly;
pub mod harness;
pub mod scalar;

pub use coefficients::{compute_cj, predict_distance, CoefficientRecord, ExpansionCoefficients};
pub use cumulants::{analytic_cumulants, empirical_cumulants, CumulantVector, MomentVector};
pub use decompose::{decompose_step_density, StepDensity, UniformComponent, UniformMixture};
pub use density::{CharFunctionGrid, GridDensity, GridSpec};
pub use error::{Error, Result};
pub use family::Family;
pub use functionals::FunctionalReport;
pub use harness::{OutputFormat, StudyConfig};
pub use scalar::{Rational, Scalar};
