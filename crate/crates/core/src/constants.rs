//! Constants hidden inside asymptotic size bounds.
//!
//! Calibration: `C_RANDOM_CORESET = 8` was chosen so that at `eps = 0.2`,
//! `delta = 0.1`, `d = 2` (861 samples from 1000 points) the kernel
//! discrepancy stays below `eps` in every one of 100 seeded trials, which the
//! acceptance suite re-checks. `C_FEATURE_CORESET = 16` gives a feature
//! certificate below `eps W^2` with a wide margin at the sizes exercised by
//! the acceptance suite (see `coreset::coreset_size_feature`).

/// Constant in `ceil(C / eps^2 * (d + ln(1/delta)))`.
pub const C_RANDOM_CORESET: f64 = 8.0;

/// Constant in `ceil(C / eps^3 * ln(n/delta) * ln(ln(n) / (eps delta)))`.
pub const C_FEATURE_CORESET: f64 = 16.0;

/// Constant in the random Fourier feature count `2 ceil(C / eps^2 ln(2 n^2 / delta))`.
pub const C_RFF: f64 = 32.0;

/// Largest feature dimension we are willing to allocate.
pub const MAX_FEATURE_DIM: u64 = 10_000_000;
