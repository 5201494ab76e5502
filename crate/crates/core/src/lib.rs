//! Free-fermion simulator for the periodically driven XY chain and the
//! finite-size-scaling analysis built on it.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ed;
pub mod error;
pub mod floquet;
pub mod lattice;
pub mod linalg;
pub mod observables;
pub mod scalar;
pub mod scaling;
pub mod sweep;

pub use error::{Error, Result};
pub use floquet::{
    floquet_spectrum, max_group_velocity, monodromy, monodromy_with_steps, recurrence_time,
    resolve_steps, stroboscopic_state, FloquetSpectrum, GroupVelocity, Monodromy, DEFAULT_TOL,
};
pub use lattice::{
    dispersion, ground_energy, ground_state, mode_grid, ModeGrid, ModeState, ModelParams,
};
pub use observables::{MajoranaCorr, ObservableKind, ObservableRecord, Pipeline, TwoSiteRdm};
pub use scalar::{Cplx, Real};
pub use scaling::{Ansatz, CollapseResult, ScalingDataset};
pub use sweep::{Drive, SweepSettings, SweepSpec};

pub type ModelParams64 = ModelParams<f64>;
pub type ModeGrid64 = ModeGrid<f64>;
pub type ModeState64 = ModeState<f64>;
pub type Monodromy64 = Monodromy<f64>;
pub type FloquetSpectrum64 = FloquetSpectrum<f64>;
pub type MajoranaCorr64 = MajoranaCorr<f64>;
pub type TwoSiteRdm64 = TwoSiteRdm<f64>;
pub type ObservableRecord64 = ObservableRecord<f64>;
pub type Pipeline64 = Pipeline<f64>;
pub type ScalingDataset64 = ScalingDataset<f64>;
pub type CollapseResult64 = CollapseResult<f64>;
pub type SweepSpec64 = SweepSpec<f64>;
