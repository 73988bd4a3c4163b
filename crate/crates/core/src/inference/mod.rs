//! Choi extraction from two-time PDMs and causal classification.
//!
//! Writing the PDM as `R = (rho M + M rho)/2` with `rho = rho_1 (x) I`,
//! extraction inverts `B = (rho (x) I + I (x) rho^T)/2` on vectorized
//! operators. In the eigenbasis of `rho_1` this map is diagonal with entries
//! `(lambda_i + lambda_j)/2`, so it is inverted entrywise; when `rho_1` is
//! singular the kernel-by-kernel block of `M` is free up to `Tr_out M = I`.

mod classify;
mod extract;
mod sdp;

pub use classify::{classify, classify_batch, CausalStructure, CausalVerdict, Thresholds, PRODUCT_TOL};
pub use extract::{
    build_b, extract_choi, extract_choi_with, extract_reverse_choi, extract_reverse_choi_with,
    ExtractionResult, RANK_TOL, RESIDUAL_TOL,
};
pub use sdp::{negative_part_trace, sdp_least_negative, sdp_least_negative_with, Direction, SdpConfig, SdpOutcome};
