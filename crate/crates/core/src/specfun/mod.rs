//! Gamma and Mittag-Leffler functions.

pub mod gamma;
pub mod mittag_leffler;
pub mod table;

pub use gamma::{gamma_fn, ln_gamma_abs, rgamma};
pub use mittag_leffler::{
    ml, ml_integral, ml_integral_with, ml_series, ml_with, series_radius, MLContour, MLParams,
    MlMethod,
};
pub use table::{shared_table, MlTable};
