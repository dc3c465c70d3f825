//! Single-image super-resolution with learned directionlet coefficients.
//!
//! The pipeline decimates a high-resolution corpus, describes every 4×4
//! low-resolution patch by the detail bands of a one-level AWT(2,1) along
//! its best direction pair, and stores them next to the detail bands of the
//! matching 8×8 high-resolution patch. A new low-resolution image is
//! cubic-spline interpolated for the approximation bands while its detail
//! bands are looked up by minimum absolute difference.

pub mod corpus;
pub mod degrade;
pub mod directionlet;
pub mod error;
pub mod filterbank;
pub mod image;
pub mod lattice;
pub mod pgm;
pub mod spline;
pub mod superres;
pub mod trainset;

pub use directionlet::{
    best_direction, detail_energy, forward_awt21, forward_separable, inverse_awt21, inverse_separable, Band, Plane,
    SeparableBands, SubbandSet,
};
pub use error::{Error, LoadError, Result};
pub use filterbank::{daub4, FilterPair, Mode};
pub use image::{Dims, Image, Patch, PatchGrid};
pub use lattice::{canonical_pairs, Direction, DirectionPair};
pub use pgm::{read_pgm, write_pgm, PgmMode};
pub use spline::cubic_spline_upsample;
pub use superres::{
    mse, super_resolve, wm2_build, wm2_super_resolve, Fallback, MatchInfo, PatchDiagnostic, SrConfig, SrReport,
    WaveletTrainingSet,
};
pub use trainset::{build_training_set, query_mad, BuildConfig, RecordSource, TrainingMeta, TrainingRecord, TrainingSet};
