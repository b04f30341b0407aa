//! Closest separable and closest PPT states under the Hilbert-Schmidt
//! distance, with the entanglement quantities that fall out of them.
//!
//! The main entry point is [`css::closest_separable`]. Around it sit
//! negativity and the spectral lower bound ([`metrics`]), optimal witnesses,
//! a Gilbert-style upper-bound oracle ([`gilbert`]) and a small laboratory of
//! quantum channels for probing monotonicity ([`channel`]).

pub mod channel;
pub mod config;
pub mod css;
pub mod error;
pub mod gilbert;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod optimize;
pub mod rng;
pub mod states;

pub use css::{closest_separable, min_hsd, CssLabel, CssResult};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use states::{Bipartition, DensityMatrix, NamedState};
