//! Polarization Bell tests on bright squeezed light, evaluated sector by sector
//! in the photon-number basis.

pub mod bell;
pub mod channels;
pub mod error;
pub mod fock;
pub mod observables;
mod ode;
pub mod reports;
pub mod states;

pub use bell::{
    chsh_lhs, ch_lhs, mermin_lhs, Inequality, InequalityReport, SettingsQuad,
};
pub use channels::{lossy_value_table, noise_mixture_lhs, thinning_pmf, LossySplitValueTable};
pub use error::{Error, Result};
pub use fock::{build_transform, transform_coefficient, ModeSplit, PolarizationSetting, TransformMatrix};
pub use observables::{expectation, outcome_value, stokes_vector_norm, ObservableKind};
pub use states::{
    bell_family_sector, bghz_coefficients, bghz_sector, bsv_ensemble, bsv_sector, bsv_weights,
    fock_product_state, BellKind, BghzCoefficients, SectorAmplitudes, SectorEnsemble,
};
