//! Shared fixtures for the criterion benches.

use shadow_core::{cut_and_project, ModelSet, Region, Scheme, Window};

/// The √2-chain with window `[−1, 1]`, cut out over `[−t − margin, t + margin]`.
pub fn sqrt2_chain_sample(t: f64, margin: f64) -> ModelSet {
    cut_and_project(&Scheme::sqrt2_chain(), &Window::interval(-1.0, 1.0), &Region::interval(-t - margin, t + margin)).expect("valid chain")
}
