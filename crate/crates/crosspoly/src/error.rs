use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("brute-force enumeration capped at d, m <= {cap}; got d={d}, m={m}")]
    BruteForceCap { d: u32, m: u32, cap: u32 },

    #[error("evaluation did not stabilize under precision escalation")]
    EvalUnstable,

    #[error("gamma pole at nonpositive integer {at}")]
    GammaPole { at: String },

    #[error("principal power of zero base")]
    ZeroBase,

    #[error("argument tracker fed a zero value")]
    ZeroArgument,

    #[error("argument jump {jump} reached pi; halve the grid step")]
    GridTooCoarse { jump: String },

    #[error("tau={tau} outside the validated range (0, {max}] for d={d}")]
    TauRange { d: u32, tau: String, max: String },

    #[error("Re x = {sigma} outside [{eps}, {}]", 1.0 - eps)]
    SigmaRange { sigma: String, eps: f64 },

    #[error("coefficient {index} kept a nonzero imaginary part after the critical-line reduction")]
    NonRealCoefficient { index: usize },

    #[error("polynomial shares a nontrivial factor with its derivative; a multiple root contradicts the distinct-roots guarantee")]
    MultipleRoot,

    #[error("root refinement failed to certify the target radius after {retries} precision escalations")]
    RefinementFailed { retries: u32 },

    #[error("quadrature did not converge within {evals} integrand evaluations")]
    QuadratureBudget { evals: usize },

    #[error("no sign change on [{lo}, {hi}]: residuals {f_lo}, {f_hi}")]
    BracketFailure {
        lo: String,
        hi: String,
        f_lo: String,
        f_hi: String,
    },

    #[error("d={d} is below the minimum dimension {min} for this operation")]
    DimensionTooSmall { d: u32, min: u32 },
}
