//! Frequency-domain analysis of fractional-order loops.

mod margins;
mod response;
mod stability;

pub use margins::{margins, MarginReport};
pub use response::{frequency_response, FrequencyGrid, FrequencyResponse};
pub use stability::{
    internal_stability, matignon_poly, matignon_stable, InternalStabilityReport, LoopMap, RootVerdict,
    StabilityReport, Verdict, BOUNDARY_BAND_RAD,
};
