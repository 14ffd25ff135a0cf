//! Error and warning types shared across the crate.

use alloc::string::String;

/// Errors produced by panel construction, estimation, and analysis.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("panel is empty")]
    EmptyPanel,
    #[error("panel shape mismatch: {years} years x {locations} locations but {values} values")]
    ShapeMismatch {
        years: usize,
        locations: usize,
        values: usize,
    },
    #[error("years must increase by one: {prev} followed by {next}")]
    NonContiguousYears { prev: i32, next: i32 },
    #[error("non-finite value at year {year}, location {location}")]
    NonFiniteValue { year: i32, location: String },
    #[error("winsorize fraction {0} outside (0, 0.5)")]
    WinsorizeFraction(f64),
    #[error("need at least {needed} rows, have {have}")]
    TooFewRows { needed: usize, have: usize },
    #[error("location {0} has zero variance")]
    ZeroVariance(String),
    #[error("series too short for lag order {lag}: length {len}")]
    LagTooLarge { lag: usize, len: usize },
    #[error("lag order must be at least 1")]
    ZeroLagOrder,
    #[error(
        "rank-deficient regression ({rows} usable rows for {cols} regressors over {vars} variables): \
         curse of dimensionality, not enough observations for the number of locations"
    )]
    RankDeficient {
        rows: usize,
        cols: usize,
        vars: usize,
    },
    #[error("regressor matrix is numerically rank-deficient (column {col})")]
    CollinearDesign { col: usize },
    #[error("horizon must be at least 1")]
    InvalidHorizon,
    #[error("residual covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("generalized shares must be normalized before aggregation")]
    UnnormalizedShares,
    #[error("incoming shares for target {0} sum to zero; cannot normalize")]
    ZeroTargetSum(String),
    #[error("window of {window} is infeasible for {vars} variables at order {order}; need at least {needed}")]
    InfeasibleWindow {
        window: usize,
        vars: usize,
        order: usize,
        needed: usize,
    },
    #[error("window set is empty")]
    EmptyWindowSet,
    #[error("pairwise spillover requires two distinct locations")]
    SamePair,
    #[error("event {id}: end year {end} precedes start year {start}")]
    InvalidSpan { id: String, start: i32, end: i32 },
    #[error("no events supplied")]
    NoEvents,
    #[error("design is empty after filtering")]
    EmptyDesign,
    #[error("series do not share any years")]
    DisjointYears,
    #[error("quantile level {0} outside (0, 1)")]
    InvalidQuantileLevel(f64),
    #[error("bootstrap replicate count must be at least 1")]
    ZeroBootstrap,
    #[error("HAC lag {lag} must be smaller than the sample size {n}")]
    HacLagTooLarge { lag: usize, n: usize },
    #[error("need at least {needed} points, have {have}")]
    TooFewPoints { needed: usize, have: usize },
    #[error("LP solver failed to converge")]
    LpDidNotConverge,
    #[error("no usable epochs: every event window falls outside the series")]
    NoUsableEpochs,
    #[error("bootstrap resamples must be at least 100 (have {0})")]
    TooFewResamples(usize),
    #[error("series domain too small for {events} pseudo-events with half-width {half_width}")]
    DomainTooSmall { events: usize, half_width: usize },
}

/// Non-fatal conditions surfaced alongside results.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Warning {
    /// A winsorized column has fewer observations than `ceil(1/p)`.
    ShortColumn { location: String, have: usize, recommended: usize },
    /// An epoch window crossed the series boundary and was dropped.
    ClippedEvent { year: i32 },
    /// An epoch had zero variance; its deviations were taken as zero.
    DegenerateEpoch { year: i32 },
    /// A node label had no entry in the coordinate map.
    MissingCoordinates { label: String },
    /// A rolling window could not be fitted; recorded as a gap.
    WindowFailed { end_year: i32, reason: String },
}

impl core::fmt::Display for Warning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Warning::ShortColumn { location, have, recommended } => write!(
                f,
                "location {location} has {have} observations; winsorization level recommends at least {recommended}"
            ),
            Warning::ClippedEvent { year } => {
                write!(f, "event {year} too close to the series boundary; dropped")
            }
            Warning::DegenerateEpoch { year } => {
                write!(f, "epoch at {year} has zero variance; contributes zero deviations")
            }
            Warning::MissingCoordinates { label } => {
                write!(f, "no coordinates for {label}; node emitted without geography")
            }
            Warning::WindowFailed { end_year, reason } => {
                write!(f, "window ending {end_year} failed: {reason}")
            }
        }
    }
}
