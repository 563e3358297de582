//! Large deviations of the magnetization per spin in the Curie-Weiss model with
//! i.i.d. (or ergodic) random external fields: the rate function, the phase
//! diagram of its minimizers, and exact finite-n checks.

pub mod closed_forms;
pub mod error;
pub mod exec;
pub mod ext_real;
pub mod field_models;
pub mod gibbs_exact;
pub mod legendre;
pub mod numerics;
pub mod output;
pub mod phase_diagram;
pub mod rate_function;

pub use error::{Error, Result};
pub use exec::Execution;
pub use ext_real::ExtReal;
pub use field_models::{sample_fields, FieldModel, FieldRealization, FreeEnergy};
pub use legendre::Conjugate;
pub use phase_diagram::{MinimumReport, ModelFamily, PhaseLabel};
pub use rate_function::RateFunction;
