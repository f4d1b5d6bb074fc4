//! Bistatic wireless sensing primitives: a two-antenna channel simulator,
//! cross-antenna ratio geometry, and amplitude-based recovery of the ideal
//! rotation angle from the distorted ratio angle.
//!
//! The crate is organized around the processing chain of a bistatic
//! displacement sensor:
//!
//! * [`channel`] synthesizes ideal and clock-asynchronous channel traces
//!   from a parametric multipath scene,
//! * [`ratio`] computes the cross-antenna channel ratio, fits its circular
//!   trace, and extracts the unwrapped rotation angle,
//! * [`recovery`] maps the distorted ratio rotation back to the ideal
//!   channel rotation using the denominator amplitude, and integrates the
//!   result to a displacement series,
//! * [`envelope`] fits the amplitude envelope model used by the recovery
//!   stage and calibrates its scale constant,
//! * [`smoothing`] and [`window`] hold the shared series utilities.
//!
//! All types are immutable after construction and all operations are pure
//! functions of their inputs, so values can be shared freely across threads.

// negated comparisons like `!(x > 0.0)` are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod envelope;
pub mod ratio;
pub mod recovery;
pub mod smoothing;
pub mod window;

pub use num_complex::Complex64;

pub use channel::{
    add_awgn, apply_clock_offsets, synthesize_ideal, ChannelError, ChannelTrace, ClockOffsetModel,
    MultipathScene, Trajectory,
};
pub use envelope::{calibrate_k_scale, fit_envelope, EnvelopeError, ScaleCalibration};
pub use ratio::{
    compute_ratio, compute_ratio_with_floor, extract_rotation, fit_circle, refine_circle,
    wrap_angle, AngleSeries, RatioCircle, RatioError, RatioTrace, DEFAULT_MAGNITUDE_FLOOR,
};
pub use recovery::{
    accumulate_displacement, correct_increments, differential_mapping_oracle, exact_ratio_circle,
    hampel_filter, integral_k_oracle, AmplitudeEnvelope, AmplitudeSeries, DisplacementSeries,
    MethodTag, RecoveryError,
};
pub use window::WindowGrid;
