//! Steepest-descent evaluation of the Ehrhart polynomial on the critical
//! line: the saddle point and its local coefficients, the descent-profile
//! functions F and U, the truncated contour quadrature, and the two-regime
//! asymptotic evaluator with its mirror composition.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::specfun::{gamma, pow_principal, sin_pi};
use crate::{Error, Result};

/// Saddle point and local data for dimension d at ordinate tau.
#[derive(Debug, Clone)]
pub struct SaddleData {
    pub d: u32,
    pub tau: Float,
    /// The descent anchor: pure imaginary, inside the unit disk.
    pub alpha: Complex,
    pub k2: Float,
    pub k3: Float,
    pub k4: Float,
    /// Decay scale of the profile integral: (9/4) tau k2^3 / k3^2.
    pub lambda: Float,
}

impl SaddleData {
    pub fn precision(&self) -> u32 {
        self.tau.prec()
    }

    /// |alpha| as a positive real.
    pub fn alpha_abs(&self) -> Float {
        self.alpha.imag().clone().abs()
    }
}

/// Upper end of the validated ordinate range for dimension d.
pub fn tau_limit(d: u32, prec: u32) -> Float {
    let df = Float::with_val(prec, d);
    df.clone() - df.root(6)
}

/// Builds the saddle data; tau must lie in (0, d - d^(1/6)].
pub fn saddle_point(d: u32, tau: &Float) -> Result<SaddleData> {
    let prec = tau.prec();
    let limit = tau_limit(d, prec);
    if !(tau.is_sign_positive() && !tau.is_zero() && *tau <= limit) {
        return Err(Error::TauRange {
            d,
            tau: tau.to_f64().to_string(),
            max: limit.to_f64().to_string(),
        });
    }
    Ok(saddle_point_unchecked(d, tau))
}

/// The same construction without the range guard (boundary probes in tests).
pub(crate) fn saddle_point_unchecked(d: u32, tau: &Float) -> SaddleData {
    let prec = tau.prec();
    let df = Float::with_val(prec, d);

    // |alpha| = tau / (d + sqrt(d^2 - tau^2)), stable for tau << d
    let s = (df.clone() - tau).max(&Float::new(prec)) * (df.clone() + tau);
    let s = s.sqrt();
    let a = Float::with_val(prec, tau / (df.clone() + &s));
    let alpha = Complex::with_val(prec, (Float::new(prec), -a.clone()));

    // K2 = sqrt(1 - tau^2/d^2) = s/d
    let k2 = Float::with_val(prec, &s / &df);
    let k3 = k_coefficient(3, d, tau, &alpha);
    let k4 = k_coefficient(4, d, tau, &alpha);

    let lambda = Float::with_val(prec, 2.25) * tau * k2.clone().pow(3) / k3.clone().square();

    SaddleData {
        d,
        tau: tau.clone(),
        alpha,
        k2,
        k3,
        k4,
        lambda,
    }
}

/// K_m = 1 - (i tau/d)^(m-1) [ (-1)^(m+1) ((1-alpha)/2)^m + ((1+alpha)/2)^m ],
/// real by the structure of alpha; evaluated in complex arithmetic with the
/// imaginary part checked to vanish.
pub(crate) fn k_coefficient(m: u32, d: u32, tau: &Float, alpha: &Complex) -> Float {
    let prec = tau.prec();
    let one = Complex::with_val(prec, 1);
    let it_over_d = Complex::with_val(prec, (Float::new(prec), tau.clone() / d));
    let it_pow = pow_int(&it_over_d, m - 1);
    let half_minus = Complex::with_val(prec, &one - alpha) / 2u32;
    let half_plus = Complex::with_val(prec, &one + alpha) / 2u32;
    let mut bracket = pow_int(&half_plus, m);
    let minus_term = pow_int(&half_minus, m);
    if m % 2 == 1 {
        bracket += minus_term;
    } else {
        bracket -= minus_term;
    }
    let k = Complex::with_val(prec, 1) - it_pow * bracket;
    debug_assert!(
        k.imag().clone().abs()
            < Float::with_val(64, 2f64).pow(-(prec as i32) / 2),
        "K_{m} must be real"
    );
    k.real().clone()
}

fn pow_int(z: &Complex, n: u32) -> Complex {
    let prec = z.prec().0;
    let mut acc = Complex::with_val(prec, 1);
    for _ in 0..n {
        acc *= z;
    }
    acc
}

/// Direct Taylor coefficient C_m of the phase at alpha:
/// (-1)^(m+1) d/(1+alpha)^m + d/(1-alpha)^m + (-1)^(m+1) i tau / alpha^m.
/// Used as the independent route in consistency checks.
pub fn taylor_phase_coefficient(m: u32, d: u32, tau: &Float, alpha: &Complex) -> Complex {
    let prec = tau.prec();
    let one = Complex::with_val(prec, 1);
    let dplus = pow_int(&Complex::with_val(prec, &one + alpha), m).recip() * Float::with_val(prec, d);
    let dminus = pow_int(&Complex::with_val(prec, &one - alpha), m).recip() * Float::with_val(prec, d);
    let itau = Complex::with_val(prec, (Float::new(prec), tau.clone()));
    let apow = pow_int(alpha, m).recip() * itau;
    if m % 2 == 1 {
        dplus + dminus + apow
    } else {
        dminus - dplus - apow
    }
}

// ---------------------------------------------------------------------------
// descent profile
// ---------------------------------------------------------------------------

/// F(T) = 2 T^2 (2T+1)^2 sqrt(T+1) / (3T+1)^(3/2) on (-1/3, inf).
pub fn f_profile(t: &Float) -> Result<Float> {
    let prec = t.prec();
    let third = Float::with_val(prec, 1u32) / 3u32;
    if *t <= -third.clone() {
        return Err(Error::TauRange {
            d: 0,
            tau: t.to_f64().to_string(),
            max: "-1/3 (domain edge of the descent profile)".into(),
        });
    }
    let t2 = t.clone().square();
    let two_t1 = (t.clone() * 2u32 + 1u32).square();
    let sq = (t.clone() + 1u32).sqrt();
    let den = (t.clone() * 3u32 + 1u32).pow(3u32).sqrt();
    Ok(Float::with_val(prec, 2) * t2 * two_t1 * sq / den)
}

/// U(T) = T (sqrt((T+1)/(3T+1)) + i) and its derivative
/// U'(T) = i + s(T) (1 + T [1/(2(T+1)) - 3/(2(3T+1))]), Im U' = 1 exactly.
pub fn u_and_derivative(t: &Float) -> Result<(Complex, Complex)> {
    let prec = t.prec();
    let third = Float::with_val(prec, 1u32) / 3u32;
    if *t <= -third.clone() {
        return Err(Error::TauRange {
            d: 0,
            tau: t.to_f64().to_string(),
            max: "-1/3 (domain edge of the descent profile)".into(),
        });
    }
    let tp1 = Float::with_val(prec, t + 1u32);
    let tt1 = Float::with_val(prec, t.clone() * 3u32 + 1u32);
    let s = (tp1.clone() / &tt1).sqrt();
    let u = Complex::with_val(prec, (t.clone() * &s, t.clone()));
    let bracket = Float::with_val(prec, 1)
        + t.clone() * (tp1.recip() / 2u32 - Float::with_val(prec, 3) / (tt1 * 2u32));
    let du = Complex::with_val(prec, (s * bracket, Float::with_val(prec, 1)));
    Ok((u, du))
}

/// The w-parametrized left tail, w = (3T+1)^(-1/2) in [1, inf): values of
/// F, U' and the Jacobian dT = -(2/3) w^-3 dw, algebraically simplified so
/// no cancellation occurs near the endpoint.
fn left_tail_values(w: &Float) -> (Float, Complex, Float) {
    let prec = w.prec();
    let w2 = w.clone().square();
    // F = 2 (1-w^2)^2 (2+w^2)^2 sqrt(1+2w^2) / (81 sqrt(3) w^6)
    let a = (Float::with_val(prec, 1) - &w2).square();
    let b = (Float::with_val(prec, 2) + &w2).square();
    let c = (Float::with_val(prec, 1) + w2.clone() * 2u32).sqrt();
    let den = Float::with_val(prec, 81) * Float::with_val(prec, 3).sqrt() * w2.clone().pow(3);
    let f = Float::with_val(prec, 2) * a * b * c / den;
    // U' = i + s(w) (w^4 + w^2 + 1)/(1 + 2 w^2), s(w) = sqrt((1+2w^2)/3)
    let one_2w2 = Float::with_val(prec, 1) + w2.clone() * 2u32;
    let s = (one_2w2.clone() / 3u32).sqrt();
    let poly = w2.clone().square() + &w2 + 1u32;
    let du = Complex::with_val(prec, (s * poly / one_2w2, Float::with_val(prec, 1)));
    // |dT/dw| = (2/3) w^-3
    let jac = Float::with_val(prec, 2) / (Float::with_val(prec, 3) * w2 * w);
    (f, du, jac)
}

// ---------------------------------------------------------------------------
// quadrature
// ---------------------------------------------------------------------------

/// Knobs for the profile quadrature; `Default` matches the production path,
/// the other fields exist so self-consistency checks can double nodes and
/// truncation thresholds independently.
#[derive(Debug, Clone)]
pub struct QuadratureOptions {
    /// Relative tolerance as 2^-tol_bits; capped by the embedded node table's
    /// own precision.
    pub tol_bits: Option<u32>,
    /// Extra uniform halvings of every accepted panel (node doubling).
    pub refine: u32,
    /// Multiplier on the tail-truncation threshold prec*ln2 + 64.
    pub cutoff_scale: f64,
    /// Integrand evaluation budget before giving up.
    pub max_evals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tol_bits: None,
            refine: 0,
            cutoff_scale: 1.0,
            max_evals: 400_000,
        }
    }
}

/// 15-point Kronrod nodes with the embedded 7-point Gauss rule (QUADPACK
/// constants, 33 significant digits).
const GK15_NODES: [&str; 8] = [
    "0.991455371120812639206854697526329",
    "0.949107912342758524526189684047851",
    "0.864864423359769072789712788640926",
    "0.741531185599394439863864773280788",
    "0.586087235467691130294144838258730",
    "0.405845151377397166906606412076961",
    "0.207784955007898467600689403773245",
    "0.000000000000000000000000000000000",
];
const GK15_GAUSS_WEIGHTS: [&str; 4] = [
    "0.129484966168869693270611432679082",
    "0.279705391489276667901467771423780",
    "0.381830050505118944950369775488975",
    "0.417959183673469387755102040816327",
];
const GK15_KRONROD_WEIGHTS: [&str; 8] = [
    "0.022935322010529224963732008058970",
    "0.063092092629978553290700663189204",
    "0.104790010322250183839876322541518",
    "0.140653259715525918745189590510238",
    "0.169004726639267902826583426598550",
    "0.190350578064785409913256402421014",
    "0.204432940075298892414161999234649",
    "0.209482141084727828012999174891714",
];

struct Gk15 {
    nodes: Vec<Float>,
    wg: Vec<Float>,
    wgk: Vec<Float>,
}

impl Gk15 {
    fn new(prec: u32) -> Self {
        let parse = |s: &str| Float::with_val(prec, Float::parse(s).expect("valid constant"));
        Gk15 {
            nodes: GK15_NODES.iter().map(|s| parse(s)).collect(),
            wg: GK15_GAUSS_WEIGHTS.iter().map(|s| parse(s)).collect(),
            wgk: GK15_KRONROD_WEIGHTS.iter().map(|s| parse(s)).collect(),
        }
    }

    /// Kronrod value and |K15 - G7| error estimate over [a, b].
    fn panel<F: FnMut(&Float) -> Complex>(
        &self,
        f: &mut F,
        a: &Float,
        b: &Float,
    ) -> (Complex, Float) {
        let prec = a.prec();
        let center = Float::with_val(prec, a + b) / 2u32;
        let half = Float::with_val(prec, b - a) / 2u32;
        let mut kronrod = Complex::new(prec);
        let mut gauss = Complex::new(prec);
        for (i, x) in self.nodes.iter().enumerate() {
            let off = Float::with_val(prec, x * &half);
            if i == 7 {
                let v = f(&center);
                kronrod += Complex::with_val(prec, &v * &self.wgk[7]);
            } else {
                let lo = f(&Float::with_val(prec, &center - &off));
                let hi = f(&Float::with_val(prec, &center + &off));
                let sum = Complex::with_val(prec, &lo + &hi);
                kronrod += Complex::with_val(prec, &sum * &self.wgk[i]);
                if i % 2 == 1 {
                    gauss += Complex::with_val(prec, &sum * &self.wg[i / 2]);
                }
            }
        }
        // the center node belongs to the Gauss rule as well
        let center_v = f(&center);
        gauss += Complex::with_val(prec, &center_v * &self.wg[3]);
        let diff = Complex::with_val(prec, &kronrod - &gauss)
            .abs()
            .real()
            .clone();
        (
            kronrod * Complex::with_val(prec, &half),
            diff * half.abs(),
        )
    }
}

struct Panel {
    a: Float,
    b: Float,
    value: Complex,
    err: Float,
}

/// Adaptive Gauss-Kronrod over [seeds[0], seeds[last]] with the given
/// initial panel boundaries; panels split at the largest error estimate
/// until the summed estimate meets the relative tolerance. Each `refine`
/// level forces one uniform halving of every accepted panel afterwards
/// (node doubling for self-consistency checks).
fn adaptive_gk<F: FnMut(&Float) -> Complex>(
    f: &mut F,
    seeds: &[Float],
    tol_bits: u32,
    max_evals: usize,
    refine: u32,
) -> Result<Complex> {
    let prec = seeds[0].prec();
    let rule = Gk15::new(prec);
    let mut evals = 0usize;
    let mut panels: Vec<Panel> = Vec::new();
    for pair in seeds.windows(2) {
        let (v, e) = rule.panel(f, &pair[0], &pair[1]);
        evals += 16;
        panels.push(Panel {
            a: pair[0].clone(),
            b: pair[1].clone(),
            value: v,
            err: e,
        });
    }

    let tol = Float::with_val(prec, 2f64).pow(-(tol_bits as i32));
    let mut refinements_left = refine;
    loop {
        let mut total = Complex::new(prec);
        let mut total_err = Float::new(prec);
        for p in &panels {
            total += &p.value;
            total_err += &p.err;
        }
        let scale = total.clone().abs().real().clone();
        if total_err <= Float::with_val(prec, &scale * &tol) {
            if refinements_left == 0 {
                return Ok(total);
            }
            refinements_left -= 1;
            let mut refined: Vec<Panel> = Vec::with_capacity(panels.len() * 2);
            for p in &panels {
                let mid = Float::with_val(prec, &p.a + &p.b) / 2u32;
                for (a, b) in [(p.a.clone(), mid.clone()), (mid.clone(), p.b.clone())] {
                    let (v, e) = rule.panel(f, &a, &b);
                    evals += 16;
                    refined.push(Panel { a, b, value: v, err: e });
                }
            }
            panels = refined;
            continue;
        }
        if evals > max_evals {
            return Err(Error::QuadratureBudget { evals });
        }
        split_worst(f, &mut panels, &rule, &mut evals);
    }
}

fn split_worst<F: FnMut(&Float) -> Complex>(
    f: &mut F,
    panels: &mut Vec<Panel>,
    rule: &Gk15,
    evals: &mut usize,
) {
    let prec = panels[0].a.prec();
    let worst = panels
        .iter()
        .enumerate()
        .max_by(|(_, x), (_, y)| x.err.partial_cmp(&y.err).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let p = panels.remove(worst);
    let mid = Float::with_val(prec, &p.a + &p.b) / 2u32;
    for (a, b) in [(p.a, mid.clone()), (mid, p.b)] {
        let (v, e) = rule.panel(f, &a, &b);
        *evals += 16;
        panels.push(Panel { a, b, value: v, err: e });
    }
}

/// The profile integral of exp(-lambda F(T)) U'(T) over (-1/3, inf),
/// truncated where lambda F exceeds prec*ln2 + 64 on both sides; the left
/// tail runs in the w = (3T+1)^(-1/2) parametrization.
pub fn integral_profile(sd: &SaddleData, opts: &QuadratureOptions) -> Result<Complex> {
    let prec = sd.precision();
    let lambda = Float::with_val(prec, &sd.lambda);
    let cutoff =
        Float::with_val(prec, f64::from(prec) * std::f64::consts::LN_2 + 64.0) * opts.cutoff_scale;

    // truncation points: lambda F = cutoff
    let t_hi = solve_increasing(
        |t| Ok(Float::with_val(prec, &lambda * &f_profile(t)?)),
        Float::with_val(prec, 1e-6),
        &cutoff,
        prec,
    )?;
    let w_hi = solve_increasing(
        |w| {
            let (fv, _, _) = left_tail_values(w);
            Ok(Float::with_val(prec, &lambda * &fv))
        },
        Float::with_val(prec, 1) + Float::with_val(prec, 1e-6),
        &cutoff,
        prec,
    )?;

    let tol_bits = opts
        .tol_bits
        .unwrap_or_else(|| (prec.saturating_sub(24)).min(86));

    // geometric seed boundaries accumulate toward the peak end
    let right_seeds = geometric_seeds(&Float::new(prec), &t_hi, 10);
    let left_seeds = geometric_seeds(&Float::with_val(prec, 1), &w_hi, 10);

    let mut right_f = |t: &Float| {
        let f = f_profile(t).expect("inside domain");
        let (_, du) = u_and_derivative(t).expect("inside domain");
        let e = (-Float::with_val(prec, &lambda * &f)).exp();
        du * Complex::with_val(prec, e)
    };
    let right = adaptive_gk(
        &mut right_f,
        &right_seeds,
        tol_bits,
        opts.max_evals,
        opts.refine,
    )?;

    let mut left_f = |w: &Float| {
        let (f, du, jac) = left_tail_values(w);
        let e = (-Float::with_val(prec, &lambda * &f)).exp();
        du * Complex::with_val(prec, e * jac)
    };
    let left = adaptive_gk(
        &mut left_f,
        &left_seeds,
        tol_bits,
        opts.max_evals,
        opts.refine,
    )?;

    Ok(right + left)
}

/// Default-options profile integral.
pub fn integral_i(sd: &SaddleData) -> Result<Complex> {
    integral_profile(sd, &QuadratureOptions::default())
}

/// Boundaries from `from` to `to` whose widths double away from `from`,
/// so the seed panels concentrate at the integrand's peak end.
fn geometric_seeds(from: &Float, to: &Float, levels: u32) -> Vec<Float> {
    let prec = from.prec();
    let width = Float::with_val(prec, to - from);
    let mut seeds = vec![from.clone()];
    for k in (0..levels).rev() {
        let frac = Float::with_val(prec, 2f64).pow(-(k as i32 + 1));
        seeds.push(Float::with_val(prec, from + &(width.clone() * &frac)));
    }
    seeds.push(to.clone());
    seeds.dedup_by(|a, b| a == b);
    seeds
}

/// Smallest x >= start with g(x) >= target, for increasing g: doubling then
/// bisection at working precision.
fn solve_increasing<G: FnMut(&Float) -> Result<Float>>(
    mut g: G,
    start: Float,
    target: &Float,
    prec: u32,
) -> Result<Float> {
    let mut hi = start.clone();
    let mut lo = start;
    for _ in 0..200 {
        if g(&hi)? >= *target {
            break;
        }
        lo = hi.clone();
        hi *= 2u32;
    }
    for _ in 0..prec.min(120) {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if g(&mid)? >= *target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

// ---------------------------------------------------------------------------
// the asymptotic evaluator
// ---------------------------------------------------------------------------

/// Which formula produced an asymptotic value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NearZero,
    Saddle,
}

/// One-sided asymptotic value together with its regime and a heuristic
/// relative-error scale.
#[derive(Debug, Clone)]
pub struct AsymptoticValue {
    pub value: Complex,
    pub regime: Regime,
    pub error_indicator: Float,
}

/// 𝓔_d at the saddle point: (1+alpha)^d / (1-alpha)^(d+1), computed through
/// principal logs so large d neither overflows nor loses phase accuracy.
pub fn generating_at(d: u32, alpha: &Complex) -> Complex {
    let prec = alpha.prec().0;
    let one = Complex::with_val(prec, 1);
    let ln_p = Complex::with_val(prec, &one + alpha).ln();
    let ln_m = Complex::with_val(prec, &one - alpha).ln();
    let expo = ln_p * Float::with_val(prec, d) - ln_m * Float::with_val(prec, d + 1);
    expo.exp()
}

/// The one-sided asymptotic term F(d, x) for Im x >= 0, switching from the
/// near-zero product to the saddle form at Im x = sqrt(log d).
///
/// `epsilon` pins the allowed strip Re x in [epsilon, 1-epsilon].
pub fn asymptotic_f(d: u32, x: &Complex, epsilon: f64) -> Result<AsymptoticValue> {
    let prec = x.prec().0.max(x.prec().1);
    let sigma = x.real();
    if sigma.to_f64() < epsilon || sigma.to_f64() > 1.0 - epsilon {
        return Err(Error::SigmaRange {
            sigma: sigma.to_f64().to_string(),
            eps: epsilon,
        });
    }
    let tau = x.imag().clone();
    if tau.is_sign_negative() && !tau.is_zero() {
        return Err(Error::TauRange {
            d,
            tau: tau.to_f64().to_string(),
            max: "the canonical side Im x >= 0".into(),
        });
    }

    // below d = 5 the two regimes have no room to split (sqrt(log d) crowds
    // d - d^(1/6)); the near-zero product covers the whole line there
    let junction = Float::with_val(prec, d).ln().sqrt();
    if tau <= junction || d <= 4 {
        let value = near_zero_f(d, x)?;
        let indicator = Float::with_val(prec, 2 * u64::from(d) + 1).recip();
        return Ok(AsymptoticValue {
            value,
            regime: Regime::NearZero,
            error_indicator: indicator,
        });
    }

    let value = saddle_f(d, x)?;
    let indicator = tau.pow(Float::with_val(prec, -1f64 / 28f64));
    Ok(AsymptoticValue {
        value,
        regime: Regime::Saddle,
        error_indicator: indicator,
    })
}

/// Near-zero form: (sin pi x / pi) (2d+1)^(-x) Gamma(x).
pub fn near_zero_f(d: u32, x: &Complex) -> Result<Complex> {
    let prec = x.prec().0.max(x.prec().1);
    let pi = Float::with_val(prec, Constant::Pi);
    let base = Complex::with_val(prec, 2 * u64::from(d) + 1);
    let neg_x = Complex::with_val(prec, -x.clone());
    let p = pow_principal(&base, &neg_x)?;
    let g = gamma(x)?;
    Ok(sin_pi(x) / pi * p * g)
}

/// Saddle form: (3/(4 pi)) (K2/K3) 𝓔_d(alpha) alpha^x I_d(x).
pub fn saddle_f(d: u32, x: &Complex) -> Result<Complex> {
    let prec = x.prec().0.max(x.prec().1);
    let tau = x.imag().clone();
    let sd = saddle_point(d, &tau)?;
    let i_val = integral_i(&sd)?;
    let e_val = generating_at(d, &sd.alpha);
    let a_val = pow_principal(&sd.alpha, x)?;
    let pi = Float::with_val(prec, Constant::Pi);
    let prefactor = Float::with_val(prec, 0.75) / pi * &sd.k2 / &sd.k3;
    Ok(e_val * a_val * i_val * Complex::with_val(prec, prefactor))
}

/// Full asymptotic value of L_d(-x): F(d,x) + (-1)^d conj F(d, 1 - conj x),
/// with Im x < 0 handled by conjugation symmetry.
pub fn evaluate_l(d: u32, x: &Complex, epsilon: f64) -> Result<Complex> {
    let prec = x.prec().0.max(x.prec().1);
    if x.imag().is_sign_negative() && !x.imag().is_zero() {
        let conj_x = Complex::with_val(prec, x.clone().conj());
        let v = evaluate_l(d, &conj_x, epsilon)?;
        return Ok(v.conj());
    }
    let f1 = asymptotic_f(d, x, epsilon)?;
    let mirror = Complex::with_val(prec, 1) - Complex::with_val(prec, x.clone().conj());
    let f2 = asymptotic_f(d, &mirror, epsilon)?;
    let f2c = f2.value.conj();
    if d % 2 == 0 {
        Ok(f1.value + f2c)
    } else {
        Ok(f1.value - f2c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ehrhart::{build_ehrhart, eval_exact};
    use proptest::prelude::*;

    fn fl(prec: u32, v: f64) -> Float {
        Float::with_val(prec, v)
    }

    #[test]
    fn saddle_point_closed_forms() {
        let prec = 128u32;
        // d = 2 tau: alpha = -i(2 - sqrt 3)
        let sd = saddle_point(100, &fl(prec, 50.0)).unwrap();
        let expect = Float::with_val(prec, 3).sqrt() - 2u32;
        assert!((sd.alpha.imag().clone() - expect).abs() < 1e-30);
        // K2 = sqrt(3)/2 at tau = d/2
        let expect_k2 = Float::with_val(prec, 3).sqrt() / 2u32;
        assert!((sd.k2.clone() - expect_k2).abs() < 1e-30);
        // saddle residual: 2 d alpha + i tau (1 - alpha^2) = 0
        let two_da = Complex::with_val(prec, &sd.alpha * fl(prec, 200.0));
        let one_minus = Complex::with_val(prec, 1) - Complex::with_val(prec, sd.alpha.clone().square());
        let itau = Complex::with_val(prec, (Float::new(prec), fl(prec, 50.0)));
        let resid = (two_da + itau * one_minus).abs().real().clone();
        assert!(resid < 1e-28, "saddle residual {resid}");
    }

    #[test]
    fn boundary_probe_tau_equals_d() {
        let prec = 96u32;
        let sd = saddle_point_unchecked(40, &fl(prec, 40.0));
        assert!((sd.alpha.imag().clone() + 1u32).abs() < 1e-25);
        assert!(sd.k2.clone().abs() < 1e-25);
        // range guard rejects it through the public entry
        assert!(matches!(
            saddle_point(40, &fl(prec, 40.0)),
            Err(Error::TauRange { .. })
        ));
    }

    #[test]
    fn k_coefficients_stay_in_range() {
        let prec = 128u32;
        for d in [20u32, 57, 142, 999] {
            for frac in [0.05, 0.3, 0.62, 0.9, 0.985] {
                let tau = fl(prec, f64::from(d) * frac);
                let sd = saddle_point_unchecked(d, &tau);
                for (m, k) in [(2, &sd.k2), (3, &sd.k3), (4, &sd.k4)] {
                    assert!(k.clone() > 0u32 && k.clone() < 2u32, "K_{m} out of range");
                }
                let floor = Float::with_val(prec, 1)
                    - Float::with_val(prec, 2).sqrt().recip();
                assert!(sd.k3 >= floor && sd.k4 >= floor);
            }
        }
    }

    #[test]
    fn taylor_coefficient_consistency() {
        // closed-form K_m against the direct Taylor coefficient C_m through
        // C_m = -(-i)^(m-1) tau/|alpha|^m K_m
        let prec = 160u32;
        for (d, frac) in [(37u32, 0.4), (120, 0.77), (501, 0.2)] {
            let tau = fl(prec, f64::from(d) * frac);
            let sd = saddle_point_unchecked(d, &tau);
            let a = sd.alpha_abs();
            for m in 2..=4u32 {
                let c_direct = taylor_phase_coefficient(m, d, &tau, &sd.alpha);
                let k = match m {
                    2 => sd.k2.clone(),
                    3 => sd.k3.clone(),
                    _ => sd.k4.clone(),
                };
                let scale = Float::with_val(prec, &tau / &a.clone().pow(m)) * k;
                // -(-i)^(m-1): m=2 -> i, m=3 -> 1, m=4 -> -i... times -(1)
                let unit = match m % 4 {
                    2 => Complex::with_val(prec, (0, 1)),
                    3 => Complex::with_val(prec, (1, 0)),
                    _ => Complex::with_val(prec, (0, -1)),
                };
                let expect = unit * Complex::with_val(prec, scale);
                let diff = Complex::with_val(prec, &c_direct - &expect).abs().real().clone();
                let mag = c_direct.abs().real().clone();
                assert!(diff < mag * fl(64, 1e-30), "m={m}, d={d}");
            }
        }
    }

    #[test]
    fn profile_function_values() {
        let prec = 128u32;
        assert!(f_profile(&fl(prec, 0.0)).unwrap().is_zero());
        // F(1) = 9 sqrt(2)/4
        let f1 = f_profile(&fl(prec, 1.0)).unwrap();
        let expect = Float::with_val(prec, 2).sqrt() * Float::with_val(prec, 9) / 4u32;
        assert!((f1 - expect).abs() < 1e-30);
        // F(-1/4) = sqrt(3)/8
        let fq = f_profile(&Float::with_val(prec, -0.25)).unwrap();
        let expect = Float::with_val(prec, 3).sqrt() / 8u32;
        assert!((fq - expect).abs() < 1e-30);
        assert!(f_profile(&fl(prec, -0.34)).is_err());
    }

    #[test]
    fn profile_monotonicity() {
        let prec = 96u32;
        let mut prev_left = f_profile(&fl(prec, -0.33)).unwrap();
        for k in 1..=100 {
            let t = -0.33 + 0.0032 * f64::from(k);
            let v = f_profile(&fl(prec, t)).unwrap();
            if t < 0.0 {
                assert!(v < prev_left, "decreasing on the left at {t}");
            }
            if t > 0.0033 {
                assert!(v > prev_left, "increasing on the right at {t}");
            }
            prev_left = v;
        }
    }

    #[test]
    fn u_derivative_structure() {
        let prec = 128u32;
        let (u0, du0) = u_and_derivative(&fl(prec, 0.0)).unwrap();
        assert!(u0.abs().real().clone() < 1e-30);
        assert!((du0.real().clone() - 1u32).abs() < 1e-30);
        assert!((du0.imag().clone() - 1u32).abs() < 1e-30);

        let (u1, _) = u_and_derivative(&fl(prec, 1.0)).unwrap();
        let expect = Float::with_val(prec, 0.5).sqrt();
        assert!((u1.real().clone() - expect).abs() < 1e-30);
        assert!((u1.imag().clone() - 1u32).abs() < 1e-30);

        let third = Float::with_val(prec, 3).sqrt().recip();
        for t in [-0.3, -0.1, 0.5, 2.0, 10.0, 1e4] {
            let (u, du) = u_and_derivative(&fl(prec, t)).unwrap();
            assert!((du.imag().clone() - 1u32).abs() < 1e-30, "Im U' = 1 at {t}");
            assert!(du.real().clone() >= third.clone() * 0.999999, "Re U' at {t}");
            // |U|^2 = T^2 (s^2 + 1) = 2 T^2 (2T+1)/(3T+1)
            let tt = fl(prec, t);
            let expect = tt.clone().abs()
                * ((tt.clone() * 4u32 + 2u32) / (tt * 3u32 + 1u32)).sqrt();
            assert!((u.abs().real().clone() - expect).abs() < 1e-28, "modulus at {t}");
        }
    }

    #[test]
    fn left_tail_matches_direct_values() {
        let prec = 128u32;
        for w in [1.01f64, 1.3, 2.4, 7.0] {
            let wf = fl(prec, w);
            let (fw, duw, jac) = left_tail_values(&wf);
            let t = Float::with_val(prec, (wf.clone().square().recip() - 1u32) / 3u32);
            let ft = f_profile(&t).unwrap();
            let (_, dut) = u_and_derivative(&t).unwrap();
            assert!((fw - ft).abs() < 1e-25, "F at w={w}");
            let d = Complex::with_val(prec, &duw - &dut).abs().real().clone();
            assert!(d < 1e-25, "U' at w={w}");
            let expect_jac = Float::with_val(prec, 2) / 3u32 / wf.pow(3u32);
            assert!((jac - expect_jac).abs() < 1e-25);
        }
    }

    #[test]
    fn gaussian_limit_of_the_integral() {
        // lambda -> inf: I -> (1+i) sqrt(pi/(2 lambda))
        let prec = 128u32;
        let sd = saddle_point(1_000_000, &fl(prec, 4500.0)).unwrap();
        assert!(sd.lambda.to_f64() > 1e4);
        let i_val = integral_i(&sd).unwrap();
        let expect_mod = (Float::with_val(prec, Constant::Pi)
            / (Float::with_val(prec, 2) * &sd.lambda))
            .sqrt();
        let expect = Complex::with_val(prec, (expect_mod.clone(), expect_mod));
        let rel = Complex::with_val(prec, &i_val - &expect).abs().real().clone()
            / expect.abs().real().clone();
        assert!(rel < 0.05, "relative deviation {rel}");
    }

    #[test]
    fn integral_self_consistency_under_refinement() {
        let prec = 128u32;
        let sd = saddle_point(100, &fl(prec, 50.0)).unwrap();
        let base = integral_i(&sd).unwrap();
        let doubled = integral_profile(
            &sd,
            &QuadratureOptions {
                refine: 1,
                ..QuadratureOptions::default()
            },
        )
        .unwrap();
        let rel = Complex::with_val(prec, &base - &doubled).abs().real().clone()
            / base.clone().abs().real().clone();
        assert!(rel < 1e-12, "doubling changed the value by {rel}");

        let wider = integral_profile(
            &sd,
            &QuadratureOptions {
                cutoff_scale: 2.0,
                ..QuadratureOptions::default()
            },
        )
        .unwrap();
        let rel = Complex::with_val(prec, &base - &wider).abs().real().clone()
            / base.abs().real().clone();
        assert!(rel < 1e-12, "truncation doubling changed the value by {rel}");
    }

    #[test]
    fn integral_argument_bound() {
        let prec = 128u32;
        let third_pi = Float::with_val(prec, Constant::Pi) / 3u32;
        for tau in [20.0, 50.0, 90.0] {
            let sd = saddle_point(100, &fl(prec, tau)).unwrap();
            let v = integral_i(&sd).unwrap();
            let arg = v.arg().real().clone();
            assert!(arg > 0u32 && arg < third_pi, "arg {arg} at tau {tau}");
        }
    }

    #[test]
    fn near_zero_value_at_half() {
        let prec = 128u32;
        let d = 1_000_000u32;
        let x = Complex::with_val(prec, (0.5, 0.0));
        let v = asymptotic_f(d, &x, 0.05).unwrap();
        assert_eq!(v.regime, Regime::NearZero);
        let expect = Float::with_val(prec, 2_000_001u32)
            .sqrt()
            .recip()
            / Float::with_val(prec, Constant::Pi).sqrt();
        let rel = (v.value.real().clone() - &expect).abs() / expect;
        assert!(rel < 1e-6);
        assert!(v.value.imag().clone().abs() < 1e-30);
    }

    #[test]
    fn strip_and_range_guards() {
        let prec = 96u32;
        let x = Complex::with_val(prec, (0.01, 5.0));
        assert!(matches!(
            asymptotic_f(50, &x, 0.05),
            Err(Error::SigmaRange { .. })
        ));
        let x = Complex::with_val(prec, (0.5, 49.9));
        assert!(matches!(
            asymptotic_f(50, &x, 0.05),
            Err(Error::TauRange { .. })
        ));
    }

    #[test]
    fn parity_on_the_critical_line() {
        let prec = 160u32;
        // even d: purely real; odd d: purely imaginary
        for (d, tau) in [(40u32, 10.0), (41, 10.0)] {
            let x = Complex::with_val(prec, (0.5, tau));
            let v = evaluate_l(d, &x, 0.05).unwrap();
            let mag = v.clone().abs().real().clone();
            if d % 2 == 0 {
                let off = v.imag().clone().abs() / &mag;
                assert!(off < 1e-6, "even d: imaginary residue {off}");
            } else {
                let off = v.real().clone().abs() / &mag;
                assert!(off < 1e-6, "odd d: real residue {off}");
            }
        }
    }

    #[test]
    fn asymptotic_matches_exact_evaluation() {
        // the decisive oracle: exact polynomial evaluation at -x
        let prec = 256u32;
        for (d, tau) in [(50u32, 20.0), (60, 35.0)] {
            let x = Complex::with_val(prec, (0.5, tau));
            let approx = evaluate_l(d, &x, 0.05).unwrap();
            let p = build_ehrhart(d);
            let neg_x = Complex::with_val(prec, (-0.5, -tau));
            let exact = eval_exact(&p, &neg_x).unwrap();
            let rel = Complex::with_val(prec, &approx - &exact).abs().real().clone()
                / exact.abs().real().clone();
            assert!(rel.to_f64() <= 0.5, "d={d}, tau={tau}: rel {rel}");
        }
    }

    #[test]
    fn regime_agreement_at_the_junction() {
        let prec = 128u32;
        let d = 10_000u32;
        let tau = (f64::from(d)).ln().sqrt();
        let x = Complex::with_val(prec, (0.5, tau));
        let nz = near_zero_f(d, &x).unwrap();
        let sa = saddle_f(d, &x).unwrap();
        let rel = Complex::with_val(prec, &sa - &nz).abs().real().clone()
            / nz.abs().real().clone();
        assert!(rel.to_f64() <= 0.5, "junction mismatch {rel}");
    }

    #[test]
    fn conjugation_symmetry() {
        let prec = 128u32;
        let x = Complex::with_val(prec, (0.5, -25.0));
        let v_neg = evaluate_l(50, &x, 0.05).unwrap();
        let x_pos = Complex::with_val(prec, (0.5, 25.0));
        let v_pos = evaluate_l(50, &x_pos, 0.05).unwrap();
        let diff = Complex::with_val(prec, &v_neg - &v_pos.conj())
            .abs()
            .real()
            .clone();
        assert!(diff < v_neg.abs().real().clone() * fl(64, 1e-25));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn saddle_residual_vanishes(d in 10u32..2000, frac in 0.02f64..0.97) {
            let prec = 128u32;
            let tau = fl(prec, f64::from(d) * frac);
            let sd = saddle_point_unchecked(d, &tau);
            let two_da = Complex::with_val(prec, &sd.alpha * Float::with_val(prec, 2 * d));
            let one_minus = Complex::with_val(prec, 1)
                - Complex::with_val(prec, sd.alpha.clone().square());
            let itau = Complex::with_val(prec, (Float::new(prec), tau.clone()));
            let resid = (two_da + itau * one_minus).abs().real().clone();
            let bound = Float::with_val(64, 2f64).pow(-(prec as i32) + 32) * Float::with_val(64, d);
            prop_assert!(resid < bound, "residual {} vs bound {}", resid, bound);
        }

        #[test]
        fn alpha_product_is_minus_one(d in 2u32..500, frac in 0.05f64..0.95) {
            let prec = 96u32;
            let tau = fl(prec, f64::from(d) * frac);
            let sd = saddle_point_unchecked(d, &tau);
            // alpha_+ = -i (d/tau + sqrt(d^2/tau^2 - 1)); alpha * alpha_+ = -1
            let df = Float::with_val(prec, d);
            let ratio = df.clone() / &tau;
            let plus = -(ratio.clone() + (ratio.clone().square() - 1u32).sqrt());
            let alpha_plus = Complex::with_val(prec, (Float::new(prec), plus));
            let prod = Complex::with_val(prec, &sd.alpha * &alpha_plus);
            let diff = Complex::with_val(prec, &prod + 1u32).abs().real().clone();
            prop_assert!(diff < 1e-20);
        }
    }
}
