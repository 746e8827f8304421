//! Blind hyperspectral unmixing by hyperplane-based Craig simplex identification.
//!
//! Pixels are modelled as convex combinations of `N` unknown endmember spectra.
//! After reducing the data to an `(N-1)`-dimensional affine subspace, the
//! minimum-volume simplex enclosing the data is estimated facet by facet: each
//! facet hyperplane is fitted from a handful of active pixels, so no simplex
//! volume is ever optimized. Abundances then follow in closed form.
//!
//! ```
//! use hypercsi::synth::{generate_scene, SceneSpec, SpectraSource};
//! use hypercsi::{metrics, unmix, SpectralDataset, UnmixOptions};
//!
//! let spec = SceneSpec::new(40, 2000, 3, 7);
//! let truth = generate_scene(&spec, &SpectraSource::RandomSmooth).unwrap();
//! let data = SpectralDataset::new(truth.observed.clone());
//! let result = unmix(&data, 3, UnmixOptions { no_shift: true, ..Default::default() }).unwrap();
//! let err = metrics::phi_en(&truth.spectra, &result.endmembers.spectra).unwrap();
//! assert!(err < 1.0);
//! ```

pub mod dataset;
pub mod dimred;
pub mod error;
pub mod geometry;
pub mod estimator;
pub mod metrics;
pub mod oracle;
pub mod spa;
pub mod synth;

pub use dataset::SpectralDataset;
pub use error::{Error, Result};
pub use estimator::{unmix, Diagnostics, PipelineError, UnmixOptions, Unmixing};
