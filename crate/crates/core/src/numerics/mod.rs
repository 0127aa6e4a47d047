//! Special functions, series and root-finding machinery.

pub mod expsum;
pub mod gamma;
pub mod linalg;
pub mod root;

pub use expsum::{exp_sum_cdf, ExponentialMixture, SeriesControl};
pub use gamma::{ln_gamma, reg_lower_gamma, reg_upper_gamma};
pub use linalg::{perron_root, Matrix};
pub use root::bisect_root;
