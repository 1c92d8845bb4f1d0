//! Root counting from the asymptotics: the number of critical-line roots
//! with ordinate in [a, b] is read off the continuous argument variation of
//! the one-sided asymptotic term, and the largest root is predicted by
//! solving the phase equation. Exact counts from the certified root set
//! anchor the comparisons.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::critline::RootSet;
use crate::saddle::{asymptotic_f, integral_i, saddle_point};
use crate::specfun::ArgTracker;
use crate::{decimal_digits, format_fixed, Error, Result};

/// Re-x used throughout the counting surface: the critical line maps to 1/2.
const SIGMA: f64 = 0.5;
/// Strip margin handed to the asymptotic evaluator; sigma = 1/2 sits well
/// inside any reasonable choice.
const EPSILON: f64 = 0.05;

/// Walks tau upward, feeding F(d, 1/2 + i tau) to one shared argument
/// tracker across the regime junction, halving the step wherever the
/// principal jump gets too close to pi.
struct ArgWalk {
    d: u32,
    prec: u32,
    tracker: ArgTracker,
    tau: Float,
}

impl ArgWalk {
    fn start(d: u32, tau0: &Float) -> Result<Self> {
        let prec = tau0.prec();
        let v = f_term(d, tau0, prec)?;
        let tracker = ArgTracker::with_principal_seed(v)?;
        Ok(ArgWalk {
            d,
            prec,
            tracker,
            tau: tau0.clone(),
        })
    }

    /// Advances to `target`, returning the unwrapped argument there.
    fn advance_to(&mut self, target: &Float, step_hint: &Float) -> Result<Float> {
        let mut h = step_hint.clone();
        let mut halvings = 0u32;
        while self.tau < *target {
            let mut next = Float::with_val(self.prec, &self.tau + &h);
            if next > *target {
                next = target.clone();
            }
            let v = f_term(self.d, &next, self.prec)?;
            match self.tracker.update(&v) {
                Ok(_) => {
                    self.tau = next;
                    if halvings > 0 {
                        halvings -= 1;
                        h *= 2u32;
                    }
                }
                Err(Error::GridTooCoarse { .. }) => {
                    halvings += 1;
                    if halvings > 48 {
                        return Err(Error::GridTooCoarse {
                            jump: "step underflow while unwrapping".into(),
                        });
                    }
                    h /= 2u32;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(self.tracker.accumulated().clone())
    }
}

fn f_term(d: u32, tau: &Float, prec: u32) -> Result<Complex> {
    let x = Complex::with_val(prec, (Float::with_val(prec, SIGMA), tau.clone()));
    Ok(asymptotic_f(d, &x, EPSILON)?.value)
}

/// Asymptotic root count on [a, b] (a real, not rounded): the unwrapped
/// argument of F(d, 1/2 + i tau) decreases by pi per root, tracked
/// continuously from a to b with adaptive stepping started at `grid_step`.
pub fn count_roots_asymptotic(
    d: u32,
    a: &Float,
    b: &Float,
    grid_step: &Float,
) -> Result<Float> {
    let prec = a.prec().max(b.prec());
    if a == b {
        return Ok(Float::new(prec));
    }
    assert!(a < b, "interval must be ordered");
    let mut walk = ArgWalk::start(d, a)?;
    let start = walk.tracker.accumulated().clone();
    let end = walk.advance_to(b, grid_step)?;
    let pi = Float::with_val(prec, Constant::Pi);
    Ok((start - end) / pi)
}

/// Exact number of certified ordinates in the closed interval [a, b].
pub fn count_roots_exact(roots: &RootSet, a: &Float, b: &Float) -> usize {
    roots.count_in(a, b)
}

/// One comparison row: the grid ordinate, the exact count on [0, tau], the
/// offset-adjusted asymptotic count, and the raw unwrapped argument.
#[derive(Debug, Clone)]
pub struct CurveRow {
    pub tau: Float,
    pub exact: usize,
    pub asym: Float,
    pub unwrapped_arg: Float,
}

/// Exact-vs-asymptotic counting curve anchored at tau = 0, with the single
/// integer offset fitted per dimension already folded into the `asym`
/// column of the rows.
#[derive(Debug, Clone)]
pub struct CountingCurve {
    pub dim: u32,
    pub grid_step: f64,
    /// The fitted integer offset that was added to the raw asymptotic count.
    pub offset: i64,
    pub rows: Vec<CurveRow>,
}

impl CountingCurve {
    pub fn max_abs_err(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.exact as f64 - r.asym.to_f64()).abs())
            .fold(0.0, f64::max)
    }

    /// CSV rows `tau,exact,asym,err` with err = exact - asym.
    pub fn to_csv(&self, precision: u32) -> String {
        let digits = decimal_digits(precision).min(12);
        let mut out = String::from("tau,exact,asym,err\n");
        for r in &self.rows {
            let err = Float::with_val(64, r.exact as f64) - Float::with_val(64, &r.asym);
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_fixed(&r.tau, 6),
                r.exact,
                format_fixed(&r.asym, digits),
                format_fixed(&err, digits),
            ));
        }
        out
    }
}

/// Builds the counting curve for tau = 0, step, 2 step, ..., tau_max, using
/// one shared unwrapping walk and the certified exact roots.
pub fn build_counting_curve(
    d: u32,
    tau_max: f64,
    grid_step: f64,
    prec: u32,
    roots: &RootSet,
) -> Result<CountingCurve> {
    assert!(grid_step > 0.0 && tau_max >= 0.0);
    let steps = (tau_max / grid_step + 1e-9).floor() as usize;
    let zero = Float::new(prec);
    let mut walk = ArgWalk::start(d, &zero)?;
    let arg0 = walk.tracker.accumulated().clone();
    let pi = Float::with_val(prec, Constant::Pi);
    let hint = Float::with_val(prec, grid_step.min(0.25));

    let mut raw: Vec<(Float, usize, Float, Float)> = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let tau = Float::with_val(prec, grid_step * i as f64);
        let arg = if i == 0 {
            arg0.clone()
        } else {
            walk.advance_to(&tau, &hint)?
        };
        let asym_raw = Float::with_val(prec, &arg0 - &arg) / &pi;
        let exact = roots.count_in(&zero, &tau);
        raw.push((tau, exact, asym_raw, arg));
    }

    // single integer offset per dimension: round the median residual
    let mut residuals: Vec<f64> = raw
        .iter()
        .map(|(_, exact, asym, _)| *exact as f64 - asym.to_f64())
        .collect();
    residuals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let offset = residuals[residuals.len() / 2].round() as i64;

    let rows = raw
        .into_iter()
        .map(|(tau, exact, asym_raw, unwrapped_arg)| CurveRow {
            tau,
            exact,
            asym: asym_raw + Float::with_val(prec, offset),
            unwrapped_arg,
        })
        .collect();

    Ok(CountingCurve {
        dim: d,
        grid_step,
        offset,
        rows,
    })
}

/// Prediction of the largest root ordinate from the phase equation, with
/// the closed-form seed reported alongside.
#[derive(Debug, Clone)]
pub struct LargestRootEstimate {
    pub d: u32,
    pub tau_hat: Float,
    /// d - tau_hat.
    pub f_of_d: Float,
    /// (d - tau_hat) / cbrt(d).
    pub scaled: Float,
    /// Closed-form seed (d - tau)/cbrt(d) = (9/8)^(1/3) (pi - arg I)^(2/3).
    pub seed_scaled: Float,
}

/// Phase target constant: the equation solved is
/// -(2d+1) arctan|alpha| + tau ln|alpha| = -((2d-3)/4) pi - arg I_d(x),
/// calibrated against certified exact roots (see tests); the bracket is
/// [d - 3 cbrt(d), d - d^(1/6)] and the right side is re-evaluated at every
/// iterate.
const TARGET_QUARTER_UNITS: i64 = -3;

pub fn largest_root_estimate(d: u32, prec: u32) -> Result<LargestRootEstimate> {
    const MIN_D: u32 = 20;
    if d < MIN_D {
        return Err(Error::DimensionTooSmall { d, min: MIN_D });
    }
    let df = Float::with_val(prec, d);
    let cbrt = df.clone().root(3);
    let lo = Float::with_val(prec, &df - &(cbrt.clone() * 3u32));
    let hi = Float::with_val(prec, &df - &df.clone().root(6));

    let residual = |tau: &Float| -> Result<Float> {
        let pi = Float::with_val(prec, Constant::Pi);
        let sd = saddle_point(d, tau)?;
        let a = sd.alpha_abs();
        let i_val = integral_i(&sd)?;
        let arg_i = i_val.arg().real().clone();
        let lhs = -(Float::with_val(prec, 2 * u64::from(d) + 1) * a.clone().atan())
            + tau.clone() * a.ln();
        let target = Float::with_val(prec, 2 * i64::from(d) + TARGET_QUARTER_UNITS)
            * &pi
            / -4i32
            - arg_i;
        Ok(lhs - target)
    };

    let mut f_lo = residual(&lo)?;
    let f_hi = residual(&hi)?;
    if (f_lo.is_sign_positive() && f_hi.is_sign_positive())
        || (f_lo.is_sign_negative() && f_hi.is_sign_negative())
    {
        return Err(Error::BracketFailure {
            lo: lo.to_f64().to_string(),
            hi: hi.to_f64().to_string(),
            f_lo: f_lo.to_f64().to_string(),
            f_hi: f_hi.to_f64().to_string(),
        });
    }

    let mut a = lo;
    let mut b = hi;
    for _ in 0..(prec.min(100) + 20) {
        let mid = Float::with_val(prec, &a + &b) / 2u32;
        let f_mid = residual(&mid)?;
        if (f_mid.is_sign_positive() && f_lo.is_sign_positive())
            || (f_mid.is_sign_negative() && f_lo.is_sign_negative())
        {
            a = mid;
            f_lo = f_mid;
        } else {
            b = mid;
        }
    }
    let tau_hat = Float::with_val(prec, &a + &b) / 2u32;

    let f_of_d = Float::with_val(prec, &df - &tau_hat);
    let scaled = f_of_d.clone() / &cbrt;

    // closed-form seed at the solution's arg I
    let sd = saddle_point(d, &tau_hat)?;
    let arg_i = integral_i(&sd)?.arg().real().clone();
    let pi = Float::with_val(prec, Constant::Pi);
    let seed_scaled = (Float::with_val(prec, 1.125).pow(Float::with_val(prec, 1) / 3u32))
        * (pi - arg_i).pow(Float::with_val(prec, 2) / 3u32);

    Ok(LargestRootEstimate {
        d,
        tau_hat,
        f_of_d,
        scaled,
        seed_scaled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critline::{all_roots, largest_root};
    use crate::specfun::log_gamma;

    fn fl(prec: u32, v: f64) -> Float {
        Float::with_val(prec, v)
    }

    #[test]
    fn empty_interval_counts_zero() {
        let a = fl(96, 3.0);
        let v = count_roots_asymptotic(50, &a, &a, &fl(96, 0.25)).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn half_census_for_d50() {
        // [0, 50 - 1.8 cbrt(50)] should hold about half the roots
        let prec = 128u32;
        let b = 50.0 - 1.8 * 50f64.cbrt();
        let asym = count_roots_asymptotic(50, &fl(prec, 0.0), &fl(prec, b), &fl(prec, 0.25))
            .unwrap()
            .to_f64();
        let roots = all_roots(50, 96).unwrap();
        let exact = count_roots_exact(&roots, &fl(prec, 0.0), &fl(prec, b)) as f64;
        assert!((asym - exact).abs() <= 2.0, "asym {asym} vs exact {exact}");
        assert!((asym - 25.0).abs() <= 2.0);
    }

    #[test]
    fn near_zero_density_law() {
        // d = 1000: count on [0, 1] ~ ln(1000)/pi, all inside the near-zero
        // regime
        let prec = 128u32;
        let asym = count_roots_asymptotic(1000, &fl(prec, 0.0), &fl(prec, 1.0), &fl(prec, 0.1))
            .unwrap()
            .to_f64();
        let expect = 1000f64.ln() / std::f64::consts::PI;
        assert!((asym - expect).abs() <= 1.0, "asym {asym} vs {expect}");
    }

    #[test]
    fn exact_count_small_cases() {
        let r2 = all_roots(2, 96).unwrap();
        assert_eq!(count_roots_exact(&r2, &fl(96, 0.0), &fl(96, 1.0)), 1);
        let r1 = all_roots(1, 96).unwrap();
        assert_eq!(count_roots_exact(&r1, &fl(96, 0.0), &fl(96, 0.0)), 1);
    }

    #[test]
    fn exact_count_d100_below_92() {
        let r = all_roots(100, 96).unwrap();
        assert_eq!(count_roots_exact(&r, &fl(96, 0.0), &fl(96, 92.0)), 50);
    }

    #[test]
    fn curve_for_d2_matches_hand_counts() {
        let roots = all_roots(2, 96).unwrap();
        let curve = build_counting_curve(2, 1.0, 0.25, 96, &roots).unwrap();
        let exact: Vec<usize> = curve.rows.iter().map(|r| r.exact).collect();
        assert_eq!(exact, vec![0, 0, 1, 1, 1]);
        assert_eq!(curve.rows.len(), 5);
    }

    #[test]
    fn curve_asym_column_is_monotone() {
        let roots = all_roots(30, 96).unwrap();
        let curve = build_counting_curve(30, 25.0, 0.5, 96, &roots).unwrap();
        for w in curve.rows.windows(2) {
            assert!(
                w[1].asym >= w[0].asym,
                "asymptotic count must not decrease"
            );
        }
    }

    #[test]
    fn curve_d50_stays_within_two() {
        let roots = all_roots(50, 96).unwrap();
        let curve = build_counting_curve(50, 45.0, 0.5, 128, &roots).unwrap();
        assert_eq!(curve.rows.len(), 91);
        let err = curve.max_abs_err();
        assert!(err <= 2.0, "max |exact - asym| = {err}");
    }

    #[test]
    fn total_count_matches_dimension() {
        for d in [10u32, 20, 50] {
            let prec = 128u32;
            let limit = (f64::from(d) - f64::from(d).powf(1.0 / 6.0)) - 1e-9;
            let half =
                count_roots_asymptotic(d, &fl(prec, 0.0), &fl(prec, limit), &fl(prec, 0.25))
                    .unwrap()
                    .to_f64();
            let total = 2.0 * half + f64::from(d % 2);
            assert!(
                (total - f64::from(d)).abs() <= 2.0,
                "d = {d}: total {total}"
            );
        }
    }

    #[test]
    fn interlacing_roots_spend_pi_each() {
        let prec = 128u32;
        let roots = all_roots(50, 96).unwrap();
        let ords = roots.nonneg();
        // pick consecutive pairs comfortably inside the saddle regime
        let lo_cut = (50f64.ln()).sqrt() * 1.5;
        let hi_cut = 50.0 - 50f64.powf(1.0 / 6.0) - 1.0;
        let mut checked = 0;
        for w in ords.windows(2) {
            let t0 = w[0].value.to_f64();
            let t1 = w[1].value.to_f64();
            if t0 < lo_cut || t1 > hi_cut {
                continue;
            }
            let n = count_roots_asymptotic(
                50,
                &fl(prec, t0),
                &fl(prec, t1),
                &fl(prec, (t1 - t0) / 4.0),
            )
            .unwrap()
            .to_f64();
            assert!(
                (n - 1.0).abs() <= 0.25,
                "between {t0} and {t1}: {n} instead of ~1"
            );
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn near_zero_counting_formula_cross_check() {
        // generic walker against the closed near-zero expression
        // (1/pi)[arg{(2d+1)^(-1/2-ia) Gamma(1/2+ia)} - same at b], with the
        // continuous argument taken through the log route
        let prec = 160u32;
        let d = 10_000u32;
        let (a, b) = (0.5f64, 2.0f64);
        let walked = count_roots_asymptotic(d, &fl(prec, a), &fl(prec, b), &fl(prec, 0.1))
            .unwrap()
            .to_f64();
        let phase = |t: f64| -> f64 {
            let x = Complex::with_val(prec, (0.5, t));
            let base = Float::with_val(prec, 2 * u64::from(d) + 1);
            let lg = log_gamma(&x).unwrap();
            let im = Complex::with_val(prec, -x * Complex::with_val(prec, base.ln()))
                .imag()
                .clone()
                + lg.imag();
            im.to_f64()
        };
        let direct = (phase(a) - phase(b)) / std::f64::consts::PI;
        assert!(
            (walked - direct).abs() <= 1.5,
            "walker {walked} vs direct {direct}"
        );
    }

    #[test]
    fn largest_root_estimate_hits_certified_values() {
        let prec = 128u32;
        // even and odd dimensions against the certified exact largest roots
        for d in [100u32, 101, 150, 200] {
            let est = largest_root_estimate(d, prec).unwrap();
            let exact = largest_root(d, 128).unwrap();
            let miss = (est.tau_hat.to_f64() - exact.value.to_f64()).abs();
            assert!(
                miss <= 0.5,
                "d={d}: tau_hat {} vs exact {} (miss {miss})",
                est.tau_hat.to_f64(),
                exact.value.to_f64()
            );
            assert!(est.scaled.to_f64() > 1.0 && est.scaled.to_f64() < 3.0);
            assert!(est.f_of_d.to_f64() > 0.0);
        }
    }

    #[test]
    fn largest_root_estimate_rejects_small_d() {
        assert!(matches!(
            largest_root_estimate(5, 96),
            Err(Error::DimensionTooSmall { .. })
        ));
    }
}
