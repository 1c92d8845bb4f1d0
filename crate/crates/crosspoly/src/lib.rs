//! High-precision analysis of the Ehrhart polynomial of the d-dimensional
//! cross-polytope: exact construction over the rationals, certified root
//! isolation on the critical line Re z = -1/2, a steepest-descent asymptotic
//! evaluator, and root counting by variation of argument.
//!
//! The crate is organized bottom-up:
//!
//! * [`ehrhart`] — exact rational construction of the polynomial, plus two
//!   independent oracles (lattice enumeration and generating-series
//!   coefficients).
//! * [`critline`] — reduction to a real polynomial in the ordinate along
//!   Re z = -1/2, Sturm-certified isolation, Newton refinement.
//! * [`specfun`] — arbitrary-precision complex Γ, principal powers, sin πx,
//!   and continuous argument tracking.
//! * [`saddle`] — the saddle point, descent-profile functions, truncated
//!   contour quadrature, and the two-regime asymptotic evaluator.
//! * [`counting`] — argument-variation root counting and the largest-root
//!   predictor.

pub mod counting;
pub mod critline;
pub mod ehrhart;
pub mod saddle;
pub mod specfun;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 128;

/// Lowest precision the library accepts.
pub const MIN_PRECISION: u32 = 64;

/// Default margin keeping Re x inside (0, 1) for the asymptotic evaluator.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Decimal digits that a given binary precision supports in printed output,
/// with a four-digit guard.
pub fn decimal_digits(precision: u32) -> usize {
    let digits = (f64::from(precision) * std::f64::consts::LOG10_2).floor() as i64 - 4;
    digits.max(6) as usize
}

/// Fixed-point decimal rendering with the stated number of digits after the
/// point, rounded half to even. Exact: the float is converted to a rational
/// and scaled, so output is byte-identical across runs and platforms.
pub fn format_fixed(value: &rug::Float, decimals: usize) -> String {
    use rug::ops::Pow;
    use rug::{Integer, Rational};
    if value.is_zero() {
        return if decimals == 0 {
            "0".into()
        } else {
            format!("0.{}", "0".repeat(decimals))
        };
    }
    let q = value
        .to_rational()
        .expect("finite value required for decimal output");
    let negative = q < 0;
    let mut scaled = q.abs() * Rational::from(Integer::from(10).pow(decimals as u32));
    let floor = scaled.clone().floor();
    scaled -= &floor;
    let mut units = floor.numer().clone();
    let twice = scaled * 2u32;
    if twice > 1 || (twice == 1 && units.is_odd()) {
        units += 1;
    }
    let digits = units.to_string();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if decimals == 0 {
        out.push_str(&digits);
        return out;
    }
    if digits.len() > decimals {
        let split = digits.len() - decimals;
        out.push_str(&digits[..split]);
        out.push('.');
        out.push_str(&digits[split..]);
    } else {
        out.push_str("0.");
        out.push_str(&"0".repeat(decimals - digits.len()));
        out.push_str(&digits);
    }
    out
}
