//! Forward models and bounded least-squares estimation for photon-echo
//! spectroscopy of erbium-doped silica fiber.
//!
//! The crate covers two- and three-pulse echo decays, the field and
//! temperature dependence of the effective homogeneous linewidth, spectral
//! diffusion, seeded synthetic data, batch fitting across experimental
//! conditions, and plot-ready report tables.
//!
//! ```
//! use echofit::models::{field_linewidth_minimum, FieldModelParams};
//!
//! let p = FieldModelParams::new(7.42, 32.60, 17.62, 0.3507, 0.0064);
//! let min = field_linewidth_minimum(&p, 0.007, 2.0).unwrap();
//! assert!((min.field - 0.1398).abs() < 1e-3);
//! ```
//!
//! Runnable walkthroughs for each capability live in `examples/`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod demo;
pub mod fitting;
pub mod gradcheck;
pub mod models;
pub mod pipeline;
pub mod presets;
pub mod synth;
pub mod units;

pub use catalog::{Bound, CatalogModel, Input, Model, ModelId, ModelParams};
pub use units::Time;
