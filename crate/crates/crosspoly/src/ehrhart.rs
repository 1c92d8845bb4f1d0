//! Exact construction and evaluation of the Ehrhart polynomial of the
//! d-dimensional cross-polytope, together with two independent oracles:
//! direct lattice enumeration and generating-series coefficients.
//!
//! The polynomial is built as the binomial sum
//! `sum_{j=0..d} C(d,j) * C(d-j+x, d)`, with every factor expanded in exact
//! integer arithmetic over the common denominator d!.

use rug::ops::Pow;
use rug::{Complete, Complex, Float, Integer, Rational};

use crate::{Error, Result};

/// Enumeration cap for [`lattice_count_oracle`]; the walk is O(points) but
/// the point count itself explodes past this.
pub const BRUTE_FORCE_CAP: u32 = 8;

/// The Ehrhart polynomial of the d-dimensional cross-polytope with exact
/// rational coefficients, stored degree-ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPolynomial {
    coeffs: Vec<Rational>,
    dim: u32,
}

impl ExactPolynomial {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients in degree-ascending order; index = degree.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn leading(&self) -> &Rational {
        self.coeffs.last().expect("nonempty by construction")
    }

    /// Exact Horner evaluation at a rational point.
    pub fn eval_rational(&self, z: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += c;
        }
        acc
    }

    /// Exact Horner evaluation at a Gaussian-rational point re + i*im.
    pub fn eval_gaussian(&self, re: &Rational, im: &Rational) -> (Rational, Rational) {
        let mut acc_re = Rational::new();
        let mut acc_im = Rational::new();
        for c in self.coeffs.iter().rev() {
            let new_re = (&acc_re * re).complete() - (&acc_im * im).complete() + c;
            let new_im = (&acc_re * im).complete() + (&acc_im * re).complete();
            acc_re = new_re;
            acc_im = new_im;
        }
        (acc_re, acc_im)
    }

    /// JSON form `{"dim": d, "coeffs": ["num/den", ...]}`, degree ascending,
    /// integers printed without a denominator.
    pub fn to_json(&self) -> String {
        let coeffs: Vec<String> = self.coeffs.iter().map(|c| format!("\"{}\"", c)).collect();
        format!(
            "{{\"dim\": {}, \"coeffs\": [{}]}}",
            self.dim,
            coeffs.join(", ")
        )
    }
}

/// Builds the Ehrhart polynomial of the d-dimensional cross-polytope.
///
/// Each binomial `C(d-j+x, d)` is a product of d linear factors over the
/// common denominator d!; the products are maintained incrementally (step
/// j -> j+1 swaps a single linear factor), so the whole construction costs
/// O(d^2) integer operations.
pub fn build_ehrhart(d: u32) -> ExactPolynomial {
    if d == 0 {
        return ExactPolynomial {
            coeffs: vec![Rational::from(1)],
            dim: 0,
        };
    }

    let n = d as usize;
    let factorial = Integer::factorial(d).complete();

    // p_j(x) = prod_{k=0}^{d-1} (x + d - j - k); start at j = 0.
    let mut p: Vec<Integer> = vec![Integer::from(1)];
    for k in 0..n {
        mul_linear(&mut p, &Integer::from(d - k as u32));
    }

    let mut total: Vec<Integer> = vec![Integer::new(); n + 1];
    add_scaled(&mut total, &p, &Integer::from(1));

    for j in 0..d {
        // p_{j+1} = p_j * (x - j) / (x + d - j)
        div_linear_exact(&mut p, &Integer::from(d - j));
        mul_linear(&mut p, &Integer::from(-i64::from(j)));
        let weight = Integer::from(d).binomial(j + 1);
        add_scaled(&mut total, &p, &weight);
    }

    let coeffs: Vec<Rational> = total
        .into_iter()
        .map(|num| Rational::from((num, factorial.clone())))
        .collect();

    debug_assert_eq!(coeffs[0], 1u32, "constant term 1 since L_d(0) = 1");
    ExactPolynomial { coeffs, dim: d }
}

/// p *= (x + c), in place.
fn mul_linear(p: &mut Vec<Integer>, c: &Integer) {
    p.push(Integer::new());
    for i in (1..p.len()).rev() {
        let t = (&p[i] * c).complete() + &p[i - 1];
        p[i] = t;
    }
    let t = (&p[0] * c).complete();
    p[0] = t;
}

/// p /= (x + c) by synthetic division; the division must be exact.
fn div_linear_exact(p: &mut Vec<Integer>, c: &Integer) {
    let n = p.len() - 1;
    let mut q: Vec<Integer> = vec![Integer::new(); n];
    q[n - 1] = p[n].clone();
    for i in (1..n).rev() {
        let t = (&q[i] * c).complete();
        q[i - 1] = &p[i] - t;
    }
    debug_assert_eq!((&q[0] * c).complete(), p[0], "inexact linear division");
    *p = q;
}

/// total += weight * p (aligned at degree 0).
fn add_scaled(total: &mut [Integer], p: &[Integer], weight: &Integer) {
    for (t, c) in total.iter_mut().zip(p.iter()) {
        *t += (c * weight).complete();
    }
}

/// Counts lattice points with |z_1| + ... + |z_d| <= m by a pruned
/// depth-first walk over the coordinates.
pub fn lattice_count_oracle(d: u32, m: u32) -> Result<Integer> {
    if d > BRUTE_FORCE_CAP || m > BRUTE_FORCE_CAP {
        return Err(Error::BruteForceCap {
            d,
            m,
            cap: BRUTE_FORCE_CAP,
        });
    }
    fn walk(dims_left: u32, budget: i64) -> Integer {
        if dims_left == 0 {
            return Integer::from(1);
        }
        let mut total = Integer::new();
        for k in -budget..=budget {
            total += walk(dims_left - 1, budget - k.abs());
        }
        total
    }
    Ok(walk(d, i64::from(m)))
}

/// First `m_max + 1` Taylor coefficients of (1+t)^d / (1-t)^{d+1} at t = 0,
/// by exact power-series long division.
pub fn gen_series_coeffs(d: u32, m_max: u32) -> Vec<Integer> {
    let m = m_max as usize;
    let num = pascal_row(d, 1);
    let den = pascal_row(d + 1, -1);
    let mut out: Vec<Integer> = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let mut v = if k < num.len() {
            num[k].clone()
        } else {
            Integer::new()
        };
        for j in 1..=k.min(den.len() - 1) {
            v -= (&den[j] * &out[k - j]).complete();
        }
        // den[0] == 1, so no division is needed
        out.push(v);
    }
    out
}

/// Coefficients of (1 + sign*t)^n built by Pascal's rule.
fn pascal_row(n: u32, sign: i32) -> Vec<Integer> {
    let mut row: Vec<Integer> = vec![Integer::from(1)];
    for _ in 0..n {
        let mut next = vec![Integer::new(); row.len() + 1];
        for (i, c) in row.iter().enumerate() {
            next[i] += c;
            if sign > 0 {
                next[i + 1] += c;
            } else {
                next[i + 1] -= c;
            }
        }
        row = next;
    }
    row
}

/// Evaluates `p` at a complex point with the coefficients rounded once to the
/// working precision, escalating that precision until two successive Horner
/// passes agree to the contract accuracy: relative 2^{8-prec}, or the same
/// bound against the term-magnitude majorant when the value sits near a zero.
pub fn eval_exact(p: &ExactPolynomial, z: &Complex) -> Result<Complex> {
    let target = z.prec().0.max(z.prec().1);
    let deg_bits = usize::BITS - p.coeffs.len().leading_zeros() + 2;
    let mut work = target + 64 + deg_bits;

    let majorant = term_majorant(p, z);
    let tol = Float::with_val(64, 2f64).pow(-(target as i32) + 6);

    let mut prev: Option<Complex> = None;
    for _ in 0..6 {
        let v = horner_complex(p, z, work);
        if let Some(pv) = &prev {
            let diff = Complex::with_val(work, &v - pv).abs().real().clone();
            let vmag = v.clone().abs().real().clone();
            let rel_ok = diff <= Float::with_val(64, &vmag) * &tol;
            let floor = Float::with_val(64, &majorant) * &tol;
            let near_zero_ok = vmag <= floor && diff <= floor;
            if rel_ok || near_zero_ok {
                let mut out = v;
                out.set_prec(target);
                return Ok(out);
            }
        }
        prev = Some(v);
        work += work / 2 + 64;
    }
    Err(Error::EvalUnstable)
}

/// sum |c_k| |z|^k at low precision; the natural magnitude scale of the
/// Horner evaluation at z.
fn term_majorant(p: &ExactPolynomial, z: &Complex) -> Float {
    let zabs = Complex::with_val(64, z).abs().real().clone();
    let mut m = Float::with_val(64, 0);
    let mut pw = Float::with_val(64, 1);
    for c in p.coeffs() {
        let mut term = Float::with_val(64, c);
        term.abs_mut();
        m += term * &pw;
        pw *= &zabs;
    }
    m
}

fn horner_complex(p: &ExactPolynomial, z: &Complex, prec: u32) -> Complex {
    let zw = Complex::with_val(prec, z);
    let mut acc = Complex::new(prec);
    for c in p.coeffs().iter().rev() {
        acc *= &zw;
        acc += Complex::with_val(prec, c);
    }
    acc
}
