pub mod channels;
pub mod circuits;
pub mod entangle;
pub mod error;
pub mod procmap;
pub mod qstate;
mod register;
pub mod seqsim;
pub mod tomo;

pub use error::{Error, Result};
pub use qstate::{CMatrix, ComplexOperator, DensityMatrix, SubsystemLayout, C64};
