//! Factor-augmented VARs with sign-restricted shock identification.

pub mod config;
pub mod crossreg;
pub mod diagnostics;
pub mod factors;
pub mod identify;
pub mod irf;
pub mod linalg;
pub mod metrics;
pub mod optim;
pub mod panel;
pub mod pipeline;
pub mod reference;
pub mod stats;
pub mod synth;
pub mod var;
