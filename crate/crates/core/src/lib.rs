//! Universal discrete denoising from several independently corrupted copies
//! of one discrete sequence.
//!
//! The pipeline estimates the hidden source distribution and every copy's
//! noise channel from the joint empirical distribution of the copies, then
//! decodes position by position with the minimal clairvoyant ambiguous
//! (MCA) decoder built from the estimate. Reconstruction is only defined up
//! to a relabeling of the symbols, so every quality metric minimizes over
//! symbol permutations.
//!
//! * [`model`]: distributions, channels, distortion measures, systems.
//! * [`empirical`]: observation matrices and joint empirical distributions.
//! * [`dca`]: general fit of a dependent component system to a joint law.
//! * [`budda`]: closed-form estimators for binary symmetric channels.
//! * [`mca`]: decoder construction, decoding and baselines.
//! * [`sim`]: seeded synthetic sources and memoryless corruption.
//! * [`io`]: PBM/PGM images, channel files, reports.

pub mod budda;
#[cfg(feature = "cli")]
pub mod cli;
pub mod dca;
pub mod empirical;
pub mod error;
pub mod io;
pub mod mca;
pub mod model;
pub mod sim;
mod simplex;

pub use error::{Error, Result};
