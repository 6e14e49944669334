//! Numerical toolkit for Dirichlet-space potential theory on the unit circle.
//!
//! The crate builds closed boundary sets (including generation-truncated
//! generalized Cantor sets), outer "distance functions" whose boundary modulus
//! depends only on the distance to the set, and computes Dirichlet energies by
//! three independent routes (coefficient series, the boundary double integral,
//! and the counting-function surrogate). On top of that sit the rising-sun
//! regularization of weight profiles and the end-to-end cyclicity certificate
//! for concrete sets.
//!
//! Modules follow the pipeline:
//!
//! * [`circle`] — arcs, gaps, Cantor generators, arclength distance;
//! * [`step`] — exact step functions `N_E` and piecewise-linear `|E_t|`;
//! * [`diagnostics`] — decay exponent fits, capacity-condition and
//!   Carleson-set diagnostics;
//! * [`weights`] — weight profiles on `(0, π]`, the cut-off profile
//!   `min{|E_t|, t^β}`, the certificate family `w_δ`;
//! * [`regularize`] — increasing (rising-sun) regularization and the
//!   construction of `ψ` from `φ`;
//! * [`outer`] — outer functions from prescribed boundary modulus;
//! * [`energy`] — the three energy routes, power-law criteria and the fusion
//!   inequality checker;
//! * [`cyclicity`] — hypothesis checks and the certificate pipeline;
//! * [`descriptor`] — JSON set descriptors and CSV sweeps.
//!
//! All types are immutable after construction and every operation is a pure
//! function, so values can be shared freely across threads. Parallel
//! accumulations use deterministic pairwise summation: results do not depend
//! on the number of threads.

pub mod circle;
pub mod cyclicity;
pub mod descriptor;
pub mod diagnostics;
pub mod energy;
pub mod outer;
pub mod quad;
pub mod regularize;
pub mod step;
pub mod util;
pub mod weights;

mod error;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Version string embedded in every serialized report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
