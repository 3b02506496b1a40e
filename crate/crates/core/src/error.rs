use crate::optimize::Regime;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("facility locations must satisfy a <= b (got a = {a}, b = {b})")]
    Unordered { a: f64, b: f64 },

    #[error("welfare gradient undefined: {0}")]
    GradientUndefined(&'static str),

    #[error("no analytic stationary candidates for gamma = {0}")]
    NoAnalyticCandidates(f64),

    #[error("theta = {theta} is outside the range ({lo}, {hi}) covered by the claim")]
    ThetaOutOfRange { theta: f64, lo: f64, hi: f64 },

    #[error("bracket endpoints share regime {0}; no regime change to locate")]
    NoRegimeChange(Regime),

    #[error("{0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "[0, 1]",
        })
    }
}
