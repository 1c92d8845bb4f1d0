//! Arbitrary-precision complex special-function kernel: Γ through a shifted
//! Stirling series with a rigorous truncation bound, the principal power and
//! sin πx, and a continuous argument tracker for phase unwrapping.

use std::sync::Mutex;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Complex, Float, Integer, Rational};

use crate::{Error, Result};

/// Largest raw principal-argument jump the tracker accepts per update.
/// Anything at or beyond pi is ambiguous and reported as a too-coarse grid.
const MAX_ARG_JUMP_FRACTION: f64 = 1.0 - 1.0 / 65536.0;

// ---------------------------------------------------------------------------
// Bernoulli numbers
// ---------------------------------------------------------------------------

static BERNOULLI: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// B_m by the defining recurrence, cached across calls.
fn bernoulli(m: usize) -> Rational {
    let mut cache = BERNOULLI.lock().expect("bernoulli cache poisoned");
    if cache.is_empty() {
        cache.push(Rational::from(1));
        cache.push(Rational::from((-1, 2)));
    }
    while cache.len() <= m {
        let n = cache.len(); // computing B_n
        let mut acc = Rational::new();
        for (k, b) in cache.iter().enumerate() {
            let c = Integer::from(n + 1).binomial(k as u32);
            acc += b.clone() * c;
        }
        acc /= -Integer::from(n + 1);
        cache.push(acc);
    }
    cache[m].clone()
}

// ---------------------------------------------------------------------------
// gamma
// ---------------------------------------------------------------------------

/// Γ(z) with relative error below 2^(16-prec), via the Stirling series after
/// shifting z right until the series' rigorous tail bound reaches the target.
pub fn gamma(z: &Complex) -> Result<Complex> {
    let prec = z.prec().0.max(z.prec().1);
    let lg = log_gamma(z)?;
    let mut out = lg.exp();
    out.set_prec(prec);
    Ok(out)
}

/// log Γ(z) as the Stirling value at the shifted point minus the principal
/// logs of the shift factors. The imaginary part is a particular continuous
/// branch, not necessarily the principal one.
pub fn log_gamma(z: &Complex) -> Result<Complex> {
    if z.imag().is_zero() && z.real().is_integer() && z.real().is_sign_negative()
        || z.real().is_zero() && z.imag().is_zero()
    {
        return Err(Error::GammaPole {
            at: z.real().to_f64().to_string(),
        });
    }

    let prec = z.prec().0.max(z.prec().1);
    let work = prec + 48;
    let zw = Complex::with_val(work, z);

    // shift until |y| clears the threshold where the Stirling tail can reach
    // 2^-(work+8), with Re y >= 1 keeping |arg y| < pi/2
    let threshold = 0.17 * f64::from(work + 16) + 6.0;
    let im_abs = zw.imag().to_f64().abs();
    let re = zw.real().to_f64();
    let need_re = if im_abs >= threshold {
        1.0
    } else {
        (threshold * threshold - im_abs * im_abs).sqrt().max(1.0)
    };
    let shift = if re < need_re {
        (need_re - re).ceil() as u32
    } else {
        0
    };

    let y = Complex::with_val(work, &zw + Complex::with_val(work, shift));
    let mut lg = stirling_log_gamma(&y, work)?;

    // log Γ(z) = log Γ(z + k) - sum_{j=0..k-1} Log(z + j)
    for j in 0..shift {
        let factor = Complex::with_val(work, &zw + Complex::with_val(work, j));
        lg -= factor.ln();
    }
    let mut out = lg;
    out.set_prec(prec);
    Ok(out)
}

/// Stirling series at a point y with Re y >= 1 and |y| above the caller's
/// threshold: (y - 1/2) ln y - y + ln(2 pi)/2 + sum B_2n / ((2n-1)(2n) y^(2n-1)).
///
/// Terms are added while the rigorous remainder bound
/// |B_{2n+2}/((2n+1)(2n+2) y^{2n+1})| * sec^{2n+4}(arg(y)/2) stays above the
/// target; with Re y >= 1 the secant factor is at most sqrt(2) per power.
fn stirling_log_gamma(y: &Complex, work: u32) -> Result<Complex> {
    let ln_y = y.clone().ln();
    let half = Float::with_val(work, 0.5);
    let two_pi = Float::with_val(work, Constant::Pi) * 2u32;

    let mut acc = Complex::with_val(work, y - &half) * &ln_y;
    acc -= y;
    acc += two_pi.ln() / 2u32;

    let y2 = Complex::with_val(work, y * y);
    let mut ypow = Complex::with_val(work, y).recip(); // y^{1-2n} for n = 1
    let target = Float::with_val(work, 2f64).pow(-(work as i32) - 8);

    let mut n = 1usize;
    loop {
        let b = bernoulli(2 * n);
        let coeff = Rational::from((
            b.numer().clone(),
            b.denom() * Integer::from((2 * n - 1) * (2 * n)),
        ));
        let term = Complex::with_val(work, &ypow * Float::with_val(work, &coeff));
        acc += &term;
        ypow /= &y2;

        // bound the next term, inflated by the secant factor 2^(n+2)
        let nb = bernoulli(2 * n + 2);
        let next_mag = Float::with_val(64, &nb).abs()
            / Float::with_val(64, (2 * n + 1) * (2 * n + 2))
            * Complex::with_val(64, &ypow).abs().real().clone()
            * Float::with_val(64, 2f64).pow(n as i32 + 2);
        let scale = Complex::with_val(64, &acc).abs().real().clone().max(&Float::with_val(64, 1));
        if next_mag < Float::with_val(64, &target) * scale {
            return Ok(acc);
        }
        n += 1;
        if n > work as usize {
            return Err(Error::EvalUnstable);
        }
    }
}

// ---------------------------------------------------------------------------
// principal power, sin pi x
// ---------------------------------------------------------------------------

/// base^expo through exp(expo * Log base) with the principal logarithm.
pub fn pow_principal(base: &Complex, expo: &Complex) -> Result<Complex> {
    if base.real().is_zero() && base.imag().is_zero() {
        return Err(Error::ZeroBase);
    }
    let prec = base
        .prec()
        .0
        .max(base.prec().1)
        .max(expo.prec().0.max(expo.prec().1));
    let b = Complex::with_val(prec + 16, base);
    let e = Complex::with_val(prec + 16, expo);
    let mut out = (e * b.ln()).exp();
    out.set_prec(prec);
    Ok(out)
}

/// sin(pi x) with the argument reduced by the nearest integer to Re x before
/// multiplication by pi, so large real parts do not wash out precision.
pub fn sin_pi(x: &Complex) -> Complex {
    let prec = x.prec().0.max(x.prec().1);
    let work = prec + 16;
    let n = Float::with_val(work, x.real())
        .round()
        .to_integer()
        .expect("finite real part");
    let r = Complex::with_val(work, x - Complex::with_val(work, &n));
    let pi = Float::with_val(work, Constant::Pi);
    let mut s = (r * &pi).sin();
    if n.is_odd() {
        s = -s;
    }
    s.set_prec(prec);
    s
}

// ---------------------------------------------------------------------------
// continuous argument tracking
// ---------------------------------------------------------------------------

/// Accumulates a continuous argument along a sequence of nonzero values.
/// Each update adds the principal argument of (new/old); the caller must
/// keep consecutive jumps below pi or gets a grid-too-coarse error.
#[derive(Debug, Clone)]
pub struct ArgTracker {
    last: Complex,
    acc: Float,
}

impl ArgTracker {
    /// Starts at accumulated argument 0.
    pub fn new(start: Complex) -> Result<Self> {
        if start.real().is_zero() && start.imag().is_zero() {
            return Err(Error::ZeroArgument);
        }
        let prec = start.prec().0.max(start.prec().1);
        Ok(ArgTracker {
            last: start,
            acc: Float::new(prec),
        })
    }

    /// Starts at the principal argument of `start`.
    pub fn with_principal_seed(start: Complex) -> Result<Self> {
        let mut t = Self::new(start)?;
        t.acc = t.last.clone().arg().real().clone();
        Ok(t)
    }

    pub fn accumulated(&self) -> &Float {
        &self.acc
    }

    pub fn last_value(&self) -> &Complex {
        &self.last
    }

    /// Feeds the next value; returns the updated accumulated argument.
    pub fn update(&mut self, v: &Complex) -> Result<Float> {
        if v.real().is_zero() && v.imag().is_zero() {
            return Err(Error::ZeroArgument);
        }
        let prec = self.acc.prec();
        let ratio = Complex::with_val(prec, v / &self.last);
        let jump = ratio.arg().real().clone();
        let limit = Float::with_val(prec, Constant::Pi) * Float::with_val(prec, MAX_ARG_JUMP_FRACTION);
        if jump.clone().abs() >= limit {
            return Err(Error::GridTooCoarse {
                jump: jump.to_f64().to_string(),
            });
        }
        self.acc += &jump;
        self.last.assign(v);
        Ok(self.acc.clone())
    }
}
