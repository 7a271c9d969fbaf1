//! Classical preprocessing: PCA clutter suppression, empirical mode
//! decomposition, correlation, smoothing and fusion-window construction.

mod correlate;
mod eigen;
mod emd;
mod pca;
mod smooth;
mod window;

pub use correlate::{cross_correlate, CorrelationSeries};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use emd::{
    count_zero_crossings, emd_decompose, envelope, is_imf, is_monotone, local_maxima, local_minima, EmdConfig,
    EmdResult, EnvelopeKind, EnvelopeSide,
};
pub use pca::{pca_clutter_suppress, principal_components, PcaBasis};
pub use smooth::moving_average;
pub use window::{make_windows, FusionSample, BRANCHES, CHANNELS};
