use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the chart domain (coordinate `{coordinate}`)")]
    OutsideDomain { point: Vec<f64>, coordinate: String },

    #[error("point {point:?} is within {distance:.3e} of the singular locus `{locus}`; increase the margin")]
    SingularLocus {
        point: Vec<f64>,
        locus: String,
        distance: f64,
    },

    #[error("metric is degenerate at {point:?}")]
    DegenerateMetric { point: Vec<f64> },

    #[error("frame is degenerate at {point:?} (Gram residual {residual:.3e})")]
    DegenerateFrame { point: Vec<f64>, residual: f64 },

    #[error("finite-difference stencil at {point:?} leaves the domain (step {step:.3e})")]
    Boundary { point: Vec<f64>, step: f64 },

    #[error("ODE integration failed at t = {t} near {point:?}: {reason}")]
    Integration {
        t: f64,
        point: Vec<f64>,
        reason: String,
    },

    #[error("direction field is space-like at {point:?}: g(v,v) = {norm:.3e}")]
    CausalityViolation { point: Vec<f64>, norm: f64 },

    #[error("scenario violates `{clause}`")]
    Spec { clause: String },

    #[error("derivative data unavailable: {0}")]
    DerivativeUnavailable(String),

    #[error("element is not in the stabilizer of the null line (residual {residual:.3e})")]
    NotInStabilizer { residual: f64 },

    #[error("Lie closure did not stabilise (dimensions {history:?}); try a looser tolerance than {tol:.1e}")]
    Tolerance { history: Vec<usize>, tol: f64 },

    #[error("loop transport stays too far from the identity (|W - I| = {distance:.3}) after shrinking")]
    LoopTooLarge { distance: f64 },

    #[error("no holonomy template fits: {0}")]
    Unclassified(String),

    #[error("metric is not Lorentzian at {point:?}: {reason}")]
    Signature { point: Vec<f64>, reason: String },

    #[error("integration window too short: {0}")]
    Window(String),

    #[error("Rayleigh-quotient estimate diverges near the boundary; raise the margin above {margin}")]
    Divergent { margin: f64 },

    #[error("too many degenerate sample points: {skipped} of {total} skipped")]
    TooManySkipped { skipped: usize, total: usize },
}
