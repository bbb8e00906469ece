//! Reference data sets used throughout the tests and examples.

use crate::records::{RecordSample, Scheme};

/// Times in minutes between 48 consecutive calls to a switchboard, in
/// arrival order (Castillo et al., 2005).
pub const CALL_TIMES: [f64; 48] = [
    1.34, 0.14, 0.33, 1.68, 1.86, 1.31, 0.83, 0.33, 2.20, 0.62, 3.20, 1.38, 0.96, 0.28, 0.44, 0.59,
    0.25, 0.51, 1.61, 1.85, 0.47, 0.41, 1.46, 0.09, 2.18, 0.07, 0.02, 0.64, 0.28, 0.68, 1.07, 3.25,
    0.59, 2.39, 0.27, 0.34, 2.18, 0.41, 1.08, 0.57, 0.35, 0.69, 0.25, 0.57, 1.90, 0.56, 0.09, 0.28,
];

/// Lower records of [`CALL_TIMES`].
pub fn call_time_records() -> RecordSample {
    RecordSample::from_parts(&[1.34, 0.14, 0.09, 0.07, 0.02], &[1, 22, 2, 1, 22], Scheme::Random)
        .expect("valid records")
}

/// Successive minima of air-conditioning failure times, Boeing plane 7914
/// (Samaniego and Whitaker, 1986), n = 24.
pub fn aircraft_7914_records() -> RecordSample {
    RecordSample::from_parts(&[50.0, 44.0, 22.0, 3.0], &[1, 3, 2, 18], Scheme::Random)
        .expect("valid records")
}

/// Records of a simulated W(4, 1) sample of size 30 (Samaniego and
/// Whitaker, 1988).
pub fn simulated_weibull_records() -> RecordSample {
    RecordSample::from_parts(&[0.879, 0.765, 0.735, 0.220], &[3, 2, 2, 23], Scheme::Random)
        .expect("valid records")
}
