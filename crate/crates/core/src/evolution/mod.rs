//! Linear flows, nonlinearities, exponential time stepping and evolution
//! through the scattering transform.

mod integrate;
mod ist;
mod model;

pub use integrate::{
    default_dt, dt_max, evolve_direct, BlowUp, EvolveParams, Scheme, Stepper, Trajectory,
    TrajectoryMeta, BLOWUP_NORM, DEFAULT_DT_FACTOR, STABILITY_CONSTANT,
};
pub use ist::*;
pub use model::{
    linear_flow, nonlinearity_dsii, nonlinearity_mnv, nonlinearity_nv,
    nonlinearity_nv_undifferentiated, Model, ModelKind, NonlinearOps, NvForm,
};
