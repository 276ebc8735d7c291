//! Quantization of continuous latent vectors onto a dense dyadic quantile
//! grid, driven by per-dimension Gaussian posterior uncertainty, plus
//! lossless entropy coding of the chosen code points.
//!
//! The pipeline mirrors a sender/receiver protocol: the sender holds a
//! mean-field Gaussian posterior `(mu_i, sigma_i^2)` per latent dimension,
//! maps each coordinate through the prior CDF into quantile space, picks a
//! binary-fraction code point that trades squared reconstruction error
//! against code length, and entropy-codes the resulting symbol sequence.
//! The receiver decodes the symbols and maps them back through the inverse
//! CDF.
//!
//! Modules:
//! - [`prior`]: prior distribution models (CDF / quantile function pairs),
//! - [`dyadic`]: exact arithmetic on binary-fraction code points,
//! - [`quantizer`]: the per-dimension rate-distortion search and vector
//!   quantization,
//! - [`codec`]: static arithmetic coding, the concatenation codec, and the
//!   compressed container format,
//! - [`baselines`]: uniform-grid, k-means, and entropy-constrained Lloyd
//!   quantizers for comparison studies.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! go through `libm` so results are bit-identical across platforms.

#![no_std]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod baselines;
pub mod codec;
pub mod dyadic;
pub mod normal;
pub mod prior;
pub mod quantizer;

pub use dyadic::CodePoint;
pub use prior::PriorModel;
pub use quantizer::{GaussianPosterior, QuantizedVector, RdConfig, RdPoint};
