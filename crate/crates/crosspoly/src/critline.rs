//! Reduction of the Ehrhart polynomial to a real polynomial R in the
//! ordinate along the critical line Re z = -1/2, followed by certified
//! real-root isolation and refinement.
//!
//! Substituting x = -1/2 + i*tau gives L_d(-1/2 + i*tau) = i^(d mod 2) R(tau)
//! with R real; the reduction is carried out in exact Gaussian-integer
//! arithmetic so the vanishing of the discarded part is checked, not assumed.
//! Root isolation runs on exact Sturm sequences (signed pseudo-remainders
//! with content stripping); refinement is Newton with an exact sign-change
//! certificate at tau_hat +/- radius.

use rug::float::Round;
use rug::ops::{NegAssign, Pow};
use rug::{Complete, Float, Integer, Rational};

use crate::ehrhart::{build_ehrhart, ExactPolynomial};
use crate::{decimal_digits, Error, Result};

/// R(tau) with exact rational coefficients, plus a primitive integer form
/// sharing the same roots and signs.
#[derive(Debug, Clone)]
pub struct CriticalLinePoly {
    rcoeffs: Vec<Rational>,
    zcoeffs: Vec<Integer>,
    dim: u32,
}

impl CriticalLinePoly {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Power of i divided out of L_d on the critical line: d mod 2.
    pub fn parity_power(&self) -> u32 {
        self.dim % 2
    }

    /// Coefficients of R(tau), degree-ascending.
    pub fn rcoeffs(&self) -> &[Rational] {
        &self.rcoeffs
    }

    /// Primitive integer multiple of R: same roots, same signs.
    pub fn int_coeffs(&self) -> &[Integer] {
        &self.zcoeffs
    }

    pub fn eval_rational(&self, tau: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.rcoeffs.iter().rev() {
            acc *= tau;
            acc += c;
        }
        acc
    }

    /// Floating Horner on the primitive integer form.
    pub fn eval_float(&self, tau: &Float) -> Float {
        horner_int(&self.zcoeffs, tau)
    }
}

fn horner_int(coeffs: &[Integer], tau: &Float) -> Float {
    let prec = tau.prec();
    let mut acc = Float::new(prec);
    for c in coeffs.iter().rev() {
        acc *= tau;
        acc += Float::with_val(prec, c);
    }
    acc
}

/// Substitutes x = -1/2 + i*tau into L_d, collecting powers of tau in exact
/// Gaussian-integer arithmetic, and divides out i^(d mod 2).
///
/// Errors with [`Error::NonRealCoefficient`] if the part that must vanish
/// does not vanish identically (which would signal an expansion bug).
pub fn critical_line_polynomial(d: u32) -> Result<CriticalLinePoly> {
    assert!(d >= 1, "critical-line reduction needs d >= 1");
    critical_line_from(&build_ehrhart(d))
}

fn critical_line_from(p: &ExactPolynomial) -> Result<CriticalLinePoly> {
    let d = p.dim();
    let n = d as usize;

    // common denominator and integer numerators n_k with c_k = n_k / den
    let mut den = Integer::from(1);
    for c in p.coeffs() {
        den.lcm_mut(c.denom());
    }
    let numerators: Vec<Integer> = p
        .coeffs()
        .iter()
        .map(|c| (c.numer() * &den).complete() / c.denom())
        .collect();

    // accumulate sum_k n_k 2^{d-k} (-1 + 2 i tau)^k as a Gaussian-integer
    // polynomial in tau
    let mut acc_re: Vec<Integer> = vec![Integer::new(); n + 1];
    let mut acc_im: Vec<Integer> = vec![Integer::new(); n + 1];
    let mut pw_re: Vec<Integer> = vec![Integer::from(1)];
    let mut pw_im: Vec<Integer> = vec![Integer::new()];

    for (k, nk) in numerators.iter().enumerate() {
        let scale = nk * Integer::from(2).pow(d - k as u32);
        for (i, c) in pw_re.iter().enumerate() {
            acc_re[i] += (c * &scale).complete();
        }
        for (i, c) in pw_im.iter().enumerate() {
            acc_im[i] += (c * &scale).complete();
        }
        if k < n {
            // multiply (pw_re + i pw_im) by (-1 + 2 i tau)
            let len = pw_re.len() + 1;
            let mut new_re = vec![Integer::new(); len];
            let mut new_im = vec![Integer::new(); len];
            for i in 0..pw_re.len() {
                new_re[i] -= &pw_re[i];
                new_im[i] -= &pw_im[i];
                new_re[i + 1] -= &pw_im[i] * Integer::from(2);
                new_im[i + 1] += &pw_re[i] * Integer::from(2);
            }
            pw_re = new_re;
            pw_im = new_im;
        }
    }

    // i^(d mod 2) R(tau) = acc/(den 2^d): even d keeps the real part, odd d
    // the imaginary part; the discarded part must vanish identically
    let (kept, dropped) = if d % 2 == 0 {
        (acc_re, acc_im)
    } else {
        (acc_im, acc_re)
    };
    if let Some(idx) = dropped.iter().position(|c| *c != 0) {
        return Err(Error::NonRealCoefficient { index: idx });
    }

    let full_den = den * Integer::from(2).pow(d);
    let rcoeffs: Vec<Rational> = kept
        .iter()
        .map(|c| Rational::from((c.clone(), full_den.clone())))
        .collect();

    let mut zcoeffs = kept;
    strip_content(&mut zcoeffs);

    debug_assert!(*zcoeffs.last().unwrap() != 0, "deg R must equal d");
    Ok(CriticalLinePoly {
        rcoeffs,
        zcoeffs,
        dim: d,
    })
}

// ---------------------------------------------------------------------------
// integer polynomial helpers (ascending coefficients, empty = zero)
// ---------------------------------------------------------------------------

fn trim(p: &mut Vec<Integer>) {
    while p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
}

fn derivative(p: &[Integer]) -> Vec<Integer> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Integer::from(i))
        .collect()
}

/// Divides by the gcd of the coefficients (positive), keeping signs.
fn strip_content(p: &mut Vec<Integer>) {
    trim(p);
    if p.is_empty() {
        return;
    }
    let mut g = Integer::new();
    for c in p.iter() {
        g.gcd_mut(c);
        if g == 1 {
            return;
        }
    }
    for c in p.iter_mut() {
        c.div_exact_mut(&g);
    }
}

fn sign_of(v: &Integer) -> i32 {
    match v.cmp0() {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

/// Sign of p(num/den) for den > 0, via the homogeneous integer value
/// sum c_k num^k den^{n-k}.
fn sign_at_rational(p: &[Integer], point: &Rational) -> i32 {
    let num = point.numer();
    let den = point.denom();
    let n = p.len() - 1;
    let mut den_pows: Vec<Integer> = Vec::with_capacity(n + 1);
    let mut dp = Integer::from(1);
    for _ in 0..=n {
        den_pows.push(dp.clone());
        dp = (&dp * den).complete();
    }
    let mut acc = Integer::new();
    let mut num_pow = Integer::from(1);
    for (k, c) in p.iter().enumerate() {
        acc += (c * &num_pow).complete() * &den_pows[n - k];
        if k < n {
            num_pow = (&num_pow * num).complete();
        }
    }
    sign_of(&acc)
}

fn sign_at_infinity(p: &[Integer], positive: bool) -> i32 {
    let mut s = sign_of(p.last().expect("nonzero polynomial"));
    if !positive && (p.len() - 1) % 2 == 1 {
        s = -s;
    }
    s
}

/// Sign-true pseudo-remainder: returns r such that m*a = q*b + r for some
/// positive m (a positive multiple of the true remainder).
fn pseudo_rem_signed(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let db = b.len() - 1;
    let lb = b.last().unwrap().clone();
    let mut r: Vec<Integer> = a.to_vec();
    let mut negative_steps = 0usize;
    while r.len() > db {
        let lead = r.last().unwrap().clone();
        let shift = r.len() - 1 - db;
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, c) in b.iter().enumerate() {
            r[i + shift] -= (c * &lead).complete();
        }
        debug_assert!(*r.last().unwrap() == 0);
        r.pop();
        trim(&mut r);
        if lb.cmp0() == std::cmp::Ordering::Less {
            negative_steps += 1;
        }
        if r.is_empty() {
            return r;
        }
    }
    if negative_steps % 2 == 1 {
        for c in r.iter_mut() {
            c.neg_assign();
        }
    }
    r
}

/// Exact Sturm chain of an integer polynomial.
pub struct SturmChain {
    chain: Vec<Vec<Integer>>,
}

impl SturmChain {
    /// Builds the chain; errors with [`Error::MultipleRoot`] when
    /// gcd(p, p') is nonconstant.
    pub fn new(p: &[Integer]) -> Result<Self> {
        let mut p0 = p.to_vec();
        strip_content(&mut p0);
        assert!(!p0.is_empty(), "zero polynomial");
        let mut chain = vec![p0.clone()];
        if p0.len() > 1 {
            let mut p1 = derivative(&p0);
            strip_content(&mut p1);
            chain.push(p1);
            loop {
                let a = &chain[chain.len() - 2];
                let b = &chain[chain.len() - 1];
                if b.len() == 1 {
                    break;
                }
                let mut r = pseudo_rem_signed(a, b);
                if r.is_empty() {
                    // nontrivial gcd: the polynomial has a multiple root
                    return Err(Error::MultipleRoot);
                }
                for c in r.iter_mut() {
                    c.neg_assign();
                }
                strip_content(&mut r);
                chain.push(r);
            }
        }
        Ok(SturmChain { chain })
    }

    fn variations(signs: impl Iterator<Item = i32>) -> usize {
        let mut count = 0;
        let mut last = 0;
        for s in signs {
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub fn variations_at(&self, t: &Rational) -> usize {
        Self::variations(self.chain.iter().map(|p| sign_at_rational(p, t)))
    }

    pub fn variations_at_infinity(&self, positive: bool) -> usize {
        Self::variations(self.chain.iter().map(|p| sign_at_infinity(p, positive)))
    }

    /// Number of distinct real roots in the half-open interval (a, b].
    pub fn count_half_open(&self, a: &Rational, b: &Rational) -> usize {
        debug_assert!(a <= b);
        self.variations_at(a) - self.variations_at(b)
    }

    /// Number of distinct real roots on the whole line.
    pub fn count_all(&self) -> usize {
        self.variations_at_infinity(false) - self.variations_at_infinity(true)
    }
}

/// Total Sturm root count of R over (-inf, inf); also certifies R squarefree.
pub fn sturm_count_all(r: &CriticalLinePoly) -> Result<usize> {
    Ok(SturmChain::new(&r.zcoeffs)?.count_all())
}

/// Exact root count of R in the half-open interval (a, b].
pub fn sturm_count_in(r: &CriticalLinePoly, a: &Rational, b: &Rational) -> Result<usize> {
    Ok(SturmChain::new(&r.zcoeffs)?.count_half_open(a, b))
}

/// Exact count of positive ordinates in (a, b] for 0 <= a < b, through the
/// half-degree even part in u = tau^2 and Descartes bisection (no remainder
/// chain, so large dimensions stay cheap on memory).
pub fn count_positive_in(r: &CriticalLinePoly, a: &Rational, b: &Rational) -> Result<usize> {
    assert!(a.cmp0() != std::cmp::Ordering::Less && a < b);
    let odd = (r.dim % 2) as usize;
    let mut upoly: Vec<Integer> = r.zcoeffs.iter().skip(odd).step_by(2).cloned().collect();
    strip_content(&mut upoly);
    let ua = (a * a).complete();
    let ub = (b * b).complete();
    let mut n = count_roots_open(&upoly, &ua, &ub, 0);
    if sign_at_rational(&upoly, &ub) == 0 {
        n += 1;
    }
    Ok(n)
}

/// Exact number of roots of p in the open interval (a, b) by Descartes
/// bisection: the Moebius-transformed variation count is exact at 0 or 1,
/// anything larger splits the interval.
fn count_roots_open(p: &[Integer], a: &Rational, b: &Rational, depth: u32) -> usize {
    assert!(depth < 128, "interval bisection ran too deep; non-squarefree input?");
    let v = mobius_variations(p, a, b);
    if v <= 1 {
        return v;
    }
    let mid = Rational::from((a + b).complete() / 2u32);
    let at_mid = usize::from(sign_at_rational(p, &mid) == 0);
    count_roots_open(p, a, &mid, depth + 1) + at_mid + count_roots_open(p, &mid, b, depth + 1)
}

/// Sign variations of the Moebius transform (1+w)^n p((a + b w)/(1 + w)),
/// whose positive roots in w correspond to roots of p in (a, b). Computed
/// in three scaled-integer steps: shift to (0, b-a), rescale to (0, 1),
/// reverse and shift by one.
fn mobius_variations(p: &[Integer], a: &Rational, b: &Rational) -> usize {
    let shifted = shift_scaled(p, a);
    let width = (b - a).complete();
    let scaled = scale_var(&shifted, &width);
    let mut reversed: Vec<Integer> = scaled.into_iter().rev().collect();
    trim_leading_zeros(&mut reversed);
    let one = Rational::from(1);
    let m = shift_scaled(&reversed, &one);
    SturmChain::variations(m.iter().map(sign_of))
}

/// Positive-integer multiple of p(c + w) as integer coefficients in w.
fn shift_scaled(p: &[Integer], c: &Rational) -> Vec<Integer> {
    let num = c.numer();
    let den = c.denom();
    let n = p.len() - 1;
    let mut acc: Vec<Integer> = vec![p[n].clone()];
    for k in (0..n).rev() {
        let mut next = vec![Integer::new(); acc.len() + 1];
        for (i, aco) in acc.iter().enumerate() {
            next[i] += (aco * num).complete();
            next[i + 1] += (aco * den).complete();
        }
        let scale = den.clone().pow((n - k) as u32);
        next[0] += (&p[k] * &scale).complete();
        acc = next;
    }
    acc
}

/// Positive-integer multiple of p(w * width) as integer coefficients.
fn scale_var(p: &[Integer], width: &Rational) -> Vec<Integer> {
    let n = p.len() - 1;
    let r = width.numer();
    let s = width.denom();
    let mut rpow = Integer::from(1);
    let mut out: Vec<Integer> = Vec::with_capacity(p.len());
    for (k, c) in p.iter().enumerate() {
        let spow = s.clone().pow((n - k) as u32);
        out.push((c * &rpow).complete() * spow);
        if k < n {
            rpow *= r;
        }
    }
    out
}

fn trim_leading_zeros(p: &mut Vec<Integer>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

/// Exact count of ordinates in the closed interval [a, b], assembled from
/// half-degree positive-side counts, mirror symmetry, and endpoint checks.
pub fn count_ordinates_closed(r: &CriticalLinePoly, a: &Rational, b: &Rational) -> Result<usize> {
    assert!(a <= b);
    let zero = Rational::new();
    let mut total = 0usize;
    // positive side (max(a,0), b]
    if *b > zero {
        let lo = if *a > zero { a.clone() } else { zero.clone() };
        if lo < *b {
            total += count_positive_in(r, &lo, b)?;
        }
        if *a > zero && r.eval_rational(a).cmp0() == std::cmp::Ordering::Equal {
            total += 1; // closed left endpoint excluded by the half-open count
        }
    }
    // negative side [a, min(b,0)) mirrors to positives (-min(b,0), -a]
    if *a < zero {
        let hi = if *b < zero { -b.clone() } else { zero.clone() };
        let neg_a = -a.clone();
        if hi < neg_a {
            total += count_positive_in(r, &hi, &neg_a)?;
        }
        if *b < zero && r.eval_rational(b).cmp0() == std::cmp::Ordering::Equal {
            total += 1;
        }
    }
    // the zero ordinate (present iff d odd) for intervals straddling it
    if r.dim % 2 == 1 && *a <= zero && *b >= zero {
        total += 1;
    }
    Ok(total)
}

/// An isolating interval with rational endpoints: either `lo == hi` (the
/// point is an exact root) or the polynomial changes sign across [lo, hi]
/// and has exactly one root there.
#[derive(Debug, Clone)]
pub struct RootInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

/// Isolates all real roots of R: returns exactly `d` pairwise-disjoint
/// intervals in ascending order, using the tau -> -tau symmetry to isolate
/// only the nonnegative side by Sturm bisection and mirroring the rest.
pub fn isolate_roots(r: &CriticalLinePoly) -> Result<Vec<RootInterval>> {
    let nonneg = isolate_nonnegative(r)?;
    let mut all: Vec<RootInterval> = Vec::with_capacity(r.dim as usize);
    for iv in nonneg.iter().rev() {
        if iv.is_exact() && iv.lo.cmp0() == std::cmp::Ordering::Equal {
            continue;
        }
        all.push(RootInterval {
            lo: -iv.hi.clone(),
            hi: -iv.lo.clone(),
        });
    }
    all.extend(nonneg);
    debug_assert_eq!(all.len(), r.dim as usize);
    Ok(all)
}

/// Isolating intervals for the roots with tau >= 0, ascending; the zero root
/// (present iff d is odd) comes first as a degenerate interval. Nonzero
/// intervals carry a sign change of the full polynomial.
fn isolate_nonnegative(r: &CriticalLinePoly) -> Result<Vec<RootInterval>> {
    let odd = r.dim % 2 == 1;
    // for odd d divide out the simple root at tau = 0 so interval endpoints
    // near zero are never roots
    let zpos: Vec<Integer> = if odd {
        r.zcoeffs[1..].to_vec()
    } else {
        r.zcoeffs.clone()
    };
    debug_assert!(*zpos.first().unwrap() != 0, "tau = 0 fully divided out");

    let mut intervals: Vec<RootInterval> = Vec::new();
    if odd {
        intervals.push(RootInterval {
            lo: Rational::new(),
            hi: Rational::new(),
        });
    }

    if zpos.len() > 1 {
        let chain = SturmChain::new(&zpos)?;
        let bound = cauchy_bound(&zpos);
        let zero = Rational::new();
        let expect = chain.count_half_open(&zero, &bound);
        let mut found: Vec<RootInterval> = Vec::new();
        subdivide(&chain, &zpos, &zero, &bound, expect, &mut found);
        sort_intervals(&mut found);
        debug_assert_eq!(found.len(), expect);
        intervals.extend(found);
    }

    let expected_total = (r.dim as usize) / 2 + usize::from(odd);
    if intervals.len() != expected_total {
        // would contradict the all-roots-real-and-distinct guarantee
        return Err(Error::MultipleRoot);
    }
    Ok(intervals)
}

/// 1 + max |c_k| / |c_n|, rounded up to an integer.
fn cauchy_bound(p: &[Integer]) -> Rational {
    let lead = p.last().unwrap().clone().abs();
    let mut max = Integer::new();
    for c in &p[..p.len() - 1] {
        let a = c.clone().abs();
        if a > max {
            max = a;
        }
    }
    let q = Rational::from((max, lead)) + 1u32;
    Rational::from(q.ceil_ref().complete())
}

/// Recursive Sturm bisection of (lo, hi] known to contain `count` roots.
fn subdivide(
    chain: &SturmChain,
    p: &[Integer],
    lo: &Rational,
    hi: &Rational,
    count: usize,
    out: &mut Vec<RootInterval>,
) {
    if count == 0 {
        return;
    }
    if count == 1 {
        // shrink until the left endpoint is not a root, so refinement sees a
        // sign change
        let mut lo = lo.clone();
        while sign_at_rational(p, &lo) == 0 {
            lo = (&lo + hi).complete() / 2u32;
        }
        out.push(RootInterval {
            lo,
            hi: hi.clone(),
        });
        return;
    }
    // choose a split point that is not itself a root
    let width = (hi - lo).complete();
    for (num, den) in [(1u32, 2u32), (1, 3), (2, 5), (3, 7), (5, 11)] {
        let m = lo.clone() + width.clone() * Rational::from((num, den));
        let s = sign_at_rational(p, &m);
        if s != 0 {
            let left = chain.count_half_open(lo, &m);
            subdivide(chain, p, lo, &m, left, out);
            subdivide(chain, p, &m, hi, count - left, out);
            return;
        }
        // m is an exact root: emit it and recurse on both sides
        out.push(RootInterval {
            lo: m.clone(),
            hi: m.clone(),
        });
        let left = chain.count_half_open(lo, &m) - 1;
        subdivide(chain, p, lo, &m, left, out);
        subdivide(chain, p, &m, hi, count - left - 1, out);
        return;
    }
    unreachable!("five distinct split candidates cannot all be roots of a squarefree factor with {count} > 1 roots in the interval");
}

fn sort_intervals(v: &mut [RootInterval]) {
    v.sort_by(|a, b| a.lo.cmp(&b.lo));
}

/// A refined root with a certified error radius: the polynomial provably
/// changes sign inside [value - radius, value + radius].
#[derive(Debug, Clone)]
pub struct CertifiedRoot {
    pub value: Float,
    pub radius: Float,
}

/// Refines one isolating interval to `target_bits`: dyadic bisection to a
/// sign-stable bracket, Newton at precision target_bits + guard, then an
/// exact sign-change certificate at tau_hat +/- 2^(-target_bits)*|tau_hat|.
pub fn refine_root(
    r: &CriticalLinePoly,
    interval: &RootInterval,
    target_bits: u32,
) -> Result<CertifiedRoot> {
    refine_on(&r.zcoeffs, interval, target_bits)
}

fn refine_on(p: &[Integer], interval: &RootInterval, target_bits: u32) -> Result<CertifiedRoot> {
    if interval.is_exact() {
        let value = Float::with_val(target_bits + 32, &interval.lo);
        return Ok(CertifiedRoot {
            value,
            radius: Float::with_val(32, 0),
        });
    }

    let dp = derivative(p);
    let mut lo = interval.lo.clone();
    let mut hi = interval.hi.clone();
    let s_hi = sign_at_rational(p, &hi);
    if s_hi == 0 {
        // the half-open interval's single root is exactly hi
        return Ok(CertifiedRoot {
            value: Float::with_val(target_bits + 32, &hi),
            radius: Float::with_val(32, 0),
        });
    }
    let mut s_lo = sign_at_rational(p, &lo);
    if s_lo == 0 {
        // lo sits on an adjacent root (isolation ran on a cofactor); walk
        // inward until the sign of the single bracketed flip appears
        let width = (&hi - &lo).complete();
        let mut k = 1u32;
        loop {
            let t = lo.clone() + width.clone() / (Rational::from(2).pow(k));
            let s = sign_at_rational(p, &t);
            if s == -s_hi {
                lo = t;
                s_lo = s;
                break;
            }
            if s == 0 {
                return Ok(CertifiedRoot {
                    value: Float::with_val(target_bits + 32, &t),
                    radius: Float::with_val(32, 0),
                });
            }
            k += 1;
            assert!(k < 4096, "bracket degenerated while leaving endpoint root");
        }
    }
    debug_assert!(s_lo == -s_hi);

    // bisect to a comfortably small bracket first
    for _ in 0..24 {
        let mid = (&lo + &hi).complete() / 2u32;
        let s = sign_at_rational(p, &mid);
        if s == 0 {
            return Ok(CertifiedRoot {
                value: Float::with_val(target_bits + 32, &mid),
                radius: Float::with_val(32, 0),
            });
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut retries = 0u32;
    let mut guard = 64u32;
    loop {
        let prec = target_bits + guard;
        let lo_f = Float::with_val(prec, &lo);
        let hi_f = Float::with_val(prec, &hi);
        let mut x = (lo_f.clone() + &hi_f) / 2u32;
        let step_tol = Float::with_val(prec, 2f64).pow(-(target_bits as i32) - 10);

        for _ in 0..200 {
            let fx = horner_int(p, &x);
            let dfx = horner_int(&dp, &x);
            if dfx.is_zero() {
                break;
            }
            let step = fx / dfx;
            let mut next = x.clone() - &step;
            if next < lo_f || next > hi_f {
                next = (lo_f.clone() + &hi_f) / 2u32;
            }
            let rel = step.clone().abs() / (x.clone().abs() + 1u32);
            x = next;
            if rel < step_tol {
                break;
            }
        }

        // exact certificate at a power-of-two radius ~ 2^-target * |x|
        let radius_exp = x.get_exp().unwrap_or(0) - target_bits as i32;
        let eps = Float::with_val(prec, 2f64).pow(radius_exp);
        let q_lo = Float::with_val(prec, &x - &eps)
            .to_rational()
            .expect("finite");
        let q_hi = Float::with_val(prec, &x + &eps)
            .to_rational()
            .expect("finite");
        if sign_at_rational(p, &q_lo) * sign_at_rational(p, &q_hi) < 0 {
            let mut value = x;
            value.set_prec_round(target_bits + 32, Round::Nearest);
            return Ok(CertifiedRoot {
                value,
                radius: Float::with_val(32, 2f64).pow(radius_exp),
            });
        }

        retries += 1;
        guard *= 2;
        if retries > 4 {
            return Err(Error::RefinementFailed { retries });
        }
    }
}

/// The full certified root set of L_d on the critical line: stored for
/// tau >= 0, expanded through the mirror symmetry on demand.
#[derive(Debug, Clone)]
pub struct RootSet {
    dim: u32,
    precision: u32,
    nonneg: Vec<CertifiedRoot>,
}

impl RootSet {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Roots with tau >= 0, ascending; tau = 0 present iff d is odd.
    pub fn nonneg(&self) -> &[CertifiedRoot] {
        &self.nonneg
    }

    /// All d ordinates, ascending, negatives mirrored from the stored side.
    pub fn full_ordinates(&self) -> Vec<Float> {
        self.full_certified().into_iter().map(|r| r.value).collect()
    }

    fn full_certified(&self) -> Vec<CertifiedRoot> {
        let mut out: Vec<CertifiedRoot> = Vec::with_capacity(self.dim as usize);
        for r in self.nonneg.iter().rev() {
            if r.value.is_zero() {
                continue;
            }
            out.push(CertifiedRoot {
                value: -r.value.clone(),
                radius: r.radius.clone(),
            });
        }
        out.extend(self.nonneg.iter().cloned());
        out
    }

    pub fn max_ordinate(&self) -> &CertifiedRoot {
        self.nonneg.last().expect("d >= 1 has at least one root")
    }

    /// Number of ordinates (over the full line) inside the closed interval.
    pub fn count_in(&self, a: &Float, b: &Float) -> usize {
        self.full_ordinates()
            .iter()
            .filter(|t| *t >= a && *t <= b)
            .count()
    }

    /// CSV rows `tau,err_radius`, ascending, decimal digits driven by the
    /// stored precision.
    pub fn to_csv(&self) -> String {
        let digits = decimal_digits(self.precision);
        let mut out = String::from("tau,err_radius\n");
        for r in self.full_certified() {
            out.push_str(&format!(
                "{},{:.3e}\n",
                crate::format_fixed(&r.value, digits),
                r.radius
            ));
        }
        out
    }
}

/// Isolates and refines every root of L_d on the critical line.
///
/// Up to moderate dimension the nonnegative side is isolated by exact Sturm
/// bisection; above that the same work runs on the half-degree even part in
/// u = tau^2 with exact Descartes certificates, which keeps the remainder
/// chain (and its memory) out of the picture entirely.
pub fn all_roots(d: u32, target_bits: u32) -> Result<RootSet> {
    assert!(d >= 1);
    let r = critical_line_polynomial(d)?;
    let mut nonneg = if d <= 200 {
        let intervals = isolate_nonnegative(&r)?;
        let mut out: Vec<CertifiedRoot> = Vec::with_capacity(intervals.len());
        for iv in &intervals {
            out.push(refine_root(&r, iv, target_bits)?);
        }
        out
    } else {
        nonnegative_roots_via_even_part(&r, target_bits)?
    };
    nonneg.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());

    // distinctness after inflating by the error radii
    for w in nonneg.windows(2) {
        let gap = Float::with_val(64, &w[1].value - &w[0].value);
        let inflate = Float::with_val(64, &w[0].radius + &w[1].radius);
        debug_assert!(gap > inflate, "roots separated by their radii");
    }

    Ok(RootSet {
        dim: d,
        precision: target_bits,
        nonneg,
    })
}

/// Large-dimension path: isolate the roots of the even part A(u) by exact
/// Descartes bisection (each emitted interval certified to hold exactly one
/// root), refine in u, map through the square root.
fn nonnegative_roots_via_even_part(
    r: &CriticalLinePoly,
    target_bits: u32,
) -> Result<Vec<CertifiedRoot>> {
    let d = r.dim;
    let odd = (d % 2) as usize;
    let mut upoly: Vec<Integer> = r.zcoeffs.iter().skip(odd).step_by(2).cloned().collect();
    strip_content(&mut upoly);

    let bound = {
        let d2 = Rational::from(Integer::from(d).pow(2));
        if sign_at_rational(&upoly, &d2) == sign_at_infinity(&upoly, true) {
            d2
        } else {
            cauchy_bound(&upoly)
        }
    };
    let mut intervals: Vec<RootInterval> = Vec::new();
    isolate_descartes(&upoly, &Rational::new(), &bound, 0, &mut intervals);
    sort_intervals(&mut intervals);
    let expect = (d as usize) / 2;
    if intervals.len() != expect {
        return Err(Error::MultipleRoot);
    }

    let guard = 32 + (32 - d.leading_zeros());
    let mut out: Vec<CertifiedRoot> = Vec::with_capacity(expect + odd);
    if odd == 1 {
        out.push(CertifiedRoot {
            value: Float::with_val(target_bits + 32, 0),
            radius: Float::with_val(32, 0),
        });
    }
    for iv in &intervals {
        let u_root = refine_on(&upoly, iv, target_bits + guard)?;
        let prec = target_bits + guard + 32;
        let value = Float::with_val(prec, &u_root.value).sqrt();
        let radius = if u_root.radius.is_zero() {
            Float::with_val(32, 2f64).pow(-(target_bits as i32)) * Float::with_val(32, &value)
        } else {
            Float::with_val(64, &u_root.radius) / Float::with_val(64, &value)
        };
        out.push(CertifiedRoot { value, radius });
    }
    Ok(out)
}

/// Exact Descartes isolation of the roots of p in the open interval (a, b):
/// emits degenerate intervals for probe hits and variation-1 intervals
/// otherwise. Assumes no root sits exactly at a or b.
fn isolate_descartes(
    p: &[Integer],
    a: &Rational,
    b: &Rational,
    depth: u32,
    out: &mut Vec<RootInterval>,
) {
    assert!(depth < 128, "isolation bisection ran too deep");
    let v = mobius_variations(p, a, b);
    if v == 0 {
        return;
    }
    if v == 1 {
        out.push(RootInterval {
            lo: a.clone(),
            hi: b.clone(),
        });
        return;
    }
    let mid = Rational::from((a + b).complete() / 2u32);
    if sign_at_rational(p, &mid) == 0 {
        out.push(RootInterval {
            lo: mid.clone(),
            hi: mid.clone(),
        });
    }
    isolate_descartes(p, a, &mid, depth + 1, out);
    isolate_descartes(p, &mid, b, depth + 1, out);
}

/// The largest root ordinate, certified, computed on the half-degree
/// polynomial in u = tau^2 so that large dimensions stay affordable.
///
/// The "largest" claim is certified by a Descartes sign-variation count of
/// the shifted polynomial (exactly one root above the cutoff); if the probe
/// fails, a full Sturm isolation in u takes over.
pub fn largest_root(d: u32, target_bits: u32) -> Result<CertifiedRoot> {
    assert!(d >= 1);
    if d == 1 {
        return Ok(CertifiedRoot {
            value: Float::with_val(target_bits + 32, 0),
            radius: Float::with_val(32, 0),
        });
    }
    let r = critical_line_polynomial(d)?;
    let odd = (d % 2) as usize;
    let mut upoly: Vec<Integer> = r.zcoeffs.iter().skip(odd).step_by(2).cloned().collect();
    strip_content(&mut upoly);

    let bound = {
        // all ordinates satisfy |tau| < d, so u < d^2; fall back to the
        // Cauchy bound in case that sign test ever fails
        let d2 = Rational::from(Integer::from(d).pow(2));
        let cauchy = cauchy_bound(&upoly);
        if sign_at_rational(&upoly, &d2) == sign_at_infinity(&upoly, true) {
            d2.min(cauchy)
        } else {
            cauchy
        }
    };

    // cutoff below the expected largest root: u = (d - 3 cbrt(d))^2, floored
    // to quarters
    let cbrt = f64::from(d).cbrt();
    let lo_tau = (f64::from(d) - 3.0 * cbrt).max(0.0);
    let mut cutoff = Rational::from(((4.0 * lo_tau * lo_tau).floor() as i64, 4));

    let mut interval = None;
    for _ in 0..6 {
        if cutoff < bound && variations_shifted(&upoly, &cutoff) == 1 {
            interval = Some(RootInterval {
                lo: cutoff.clone(),
                hi: bound.clone(),
            });
            break;
        }
        cutoff -= (bound.clone() - &cutoff) / Rational::from(8);
        if cutoff.cmp0() == std::cmp::Ordering::Less {
            break;
        }
    }

    let interval = match interval {
        Some(iv) => iv,
        None => {
            // certified fallback: isolate everything in u and take the top
            let chain = SturmChain::new(&upoly)?;
            let zero = Rational::new();
            let cauchy = cauchy_bound(&upoly);
            let expect = chain.count_half_open(&zero, &cauchy);
            let mut found = Vec::new();
            subdivide(&chain, &upoly, &zero, &cauchy, expect, &mut found);
            sort_intervals(&mut found);
            found.pop().ok_or(Error::MultipleRoot)?
        }
    };

    let guard = 32 + (32 - d.leading_zeros());
    let u_root = refine_on(&upoly, &interval, target_bits + guard)?;
    let prec = target_bits + guard + 32;
    let value = Float::with_val(prec, &u_root.value).sqrt();

    // r_tau ~ r_u / (2 sqrt(u)), doubled to absorb the sqrt rounding
    let radius = if u_root.radius.is_zero() {
        Float::with_val(32, 2f64).pow(-(target_bits as i32)) * Float::with_val(32, &value)
    } else {
        Float::with_val(64, &u_root.radius) / Float::with_val(64, &value)
    };

    Ok(CertifiedRoot { value, radius })
}

/// Number of sign variations in the coefficients of p(c + w) for rational
/// c >= 0, computed division-free by scaling through the Horner shift. By
/// Descartes' rule a count of 1 certifies exactly one real root above c.
fn variations_shifted(p: &[Integer], c: &Rational) -> usize {
    let num = c.numer();
    let den = c.denom();
    // den^n p((num + den w)/den) is an integer polynomial in w
    let mut acc: Vec<Integer> = vec![p.last().unwrap().clone()];
    for k in (0..p.len() - 1).rev() {
        let mut next = vec![Integer::new(); acc.len() + 1];
        for (i, a) in acc.iter().enumerate() {
            next[i] += (a * num).complete();
            next[i + 1] += (a * den).complete();
        }
        let scale = den.clone().pow((p.len() - 1 - k) as u32);
        next[0] += (&p[k] * &scale).complete();
        acc = next;
    }
    SturmChain::variations(acc.iter().map(sign_of))
}
