//! Comparison unit-root tests and Dickey-Fuller critical values.

pub mod adf;
pub mod cbb;
pub mod critical;
mod ols;
pub mod pp;
pub mod sieve;

pub use adf::{adf_fit, adf_statistic, adf_test, default_k_max, maic_select, AdfFit};
pub use cbb::{
    block_length, cbb_block_length, cbb_pp_test, cbb_pp_test_with, cbb_resample,
    cbb_resample_from_starts, BlockLengthRule,
};
pub use critical::{df_critical_value, CriticalValueTable};
pub use pp::{flat_top_lrv, fpp_test, pp_z_stat};
pub use sieve::{ar_sieve_fit, arb_adf_test, default_p_max, sieve_noise, SieveFit};
