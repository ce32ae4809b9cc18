use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KpError {
    #[error("leading term is not a unit: {0}")]
    NonUnitLeadingTerm(String),
    #[error("window underflow in variable {var}: exponent {exp} below {lo}")]
    WindowUnderflow { var: usize, exp: i64, lo: i64 },
    #[error("resonant hypergeometric case not handled for (a, b) = ({a}, {b})")]
    ResonanceUnhandled { a: i64, b: i64 },
    #[error("power of 2^(1/3) does not fold: exponent {0}")]
    ExponentNotDivisible(i64),
    #[error("monomial {exps:?} survived cancellation")]
    CancellationFailure { exps: Vec<i64> },
    #[error("not computed: {0}")]
    NotComputed(String),
    #[error("fixture missing: {0}")]
    FixtureMissing(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNoConverge(String),
    #[error("result is not real: im/re = {0:e}")]
    NonRealResult(f64),
}

pub type Result<T> = std::result::Result<T, KpError>;
