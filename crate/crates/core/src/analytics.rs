//! Exact counts set against their asymptotic main terms, the certificate
//! behind the upper bound for dense representations, the Dickman function
//! and the Kloosterman pair count.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    self, factor, lcm_upto, mod_inverse, prime_powers_upto, totient_ratio, unit_fraction_sum, Rational,
};
use crate::error::{Error, Result};
use crate::identities::validate;
use crate::report::{CountReport, ExactValue};
use crate::search::{lj_member, LjDecision, SearchBounds};

/// Reciprocal sums over ranges reaching past this bound are reported in
/// floating point (compensated summation) instead of exactly.
pub const EXACT_SUM_LIMIT: u64 = 100_000;

/// Neumaier-compensated sum of `1/n`, smallest terms first.
fn float_reciprocal_sum(ns: &[u64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &n in ns.iter().rev() {
        let v = 1.0 / n as f64;
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn reciprocal_sum_value(ns: &[u64], top: u64) -> ExactValue {
    if top <= EXACT_SUM_LIMIT {
        ExactValue::Rational(unit_fraction_sum(ns))
    } else {
        ExactValue::Float(float_reciprocal_sum(ns))
    }
}

fn int_range(lo: f64, hi: f64) -> (u64, u64) {
    (arith::ceil_u64(lo).max(1), arith::floor_u64(hi))
}

/// `Σ_{y < p ≤ x} 1/p` (or over prime powers) against `log(log x/log y)`.
pub fn mertens_sum(y: f64, x: f64, prime_powers: bool) -> Result<CountReport> {
    if !(y >= 2.0 && y < x) {
        return Err(Error::PreconditionViolated(format!(
            "need 2 <= y < x (y = {y}, x = {x})"
        )));
    }
    let terms: Vec<u64> = prime_powers_upto(x)
        .into_iter()
        .filter(|q| (q.q as f64) > y && (prime_powers || q.nu == 1))
        .map(|q| q.q)
        .collect();
    let exact = reciprocal_sum_value(&terms, arith::floor_u64(x));
    let main = (x.ln() / y.ln()).ln();
    Ok(CountReport::new(
        if prime_powers {
            "mertens-prime-powers"
        } else {
            "mertens-primes"
        },
        exact,
        main,
    )
    .param("y", y)
    .param("x", x)
    .param("prime_powers", prime_powers)
    .param("terms", terms.len()))
}

/// Largest prime factor, or largest exactly-dividing prime power.
fn top_factor(n: u64, star: bool) -> u64 {
    if star {
        arith::p_star(n).q
    } else {
        arith::p_max(n)
    }
}

/// Count and reciprocal sum of `n ∈ [αx, x]` with `P(n) > y` (or
/// `P*(n) > y`), against `(1−α)x log(log x/log y)` and
/// `log α^{-1} log(log x/log y)`.
pub fn primesums_report(alpha: f64, x: f64, y: f64, star: bool) -> Result<(CountReport, CountReport)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    if !(y >= x.sqrt() - 1e-9 && y <= x) {
        return Err(Error::PreconditionViolated(format!(
            "need sqrt(x) <= y <= x (x = {x}, y = {y})"
        )));
    }
    let (lo, hi) = int_range(alpha * x, x);
    let flagged: Vec<u64> = (lo..=hi)
        .into_par_iter()
        .filter(|&n| top_factor(n, star) as f64 > y)
        .collect();
    let ratio = (x.ln() / y.ln()).ln();
    let mode = if star { "P*" } else { "P" };
    let count = CountReport::new(
        format!("primesums-count-{mode}"),
        ExactValue::Integer(flagged.len() as u64),
        (1.0 - alpha) * x * ratio,
    );
    let sum = CountReport::new(
        format!("primesums-sum-{mode}"),
        reciprocal_sum_value(&flagged, hi),
        (1.0 / alpha).ln() * ratio,
    );
    let echo = |r: CountReport| r.param("alpha", alpha).param("x", x).param("y", y).param("star", star);
    Ok((echo(count), echo(sum)))
}

/// `#{n ∈ [αx/2, αx] : P*(n) ≤ x^ε}` (or `P(n)`) against `α ρ(1/ε) x / 2`.
pub fn smooth_count(alpha: f64, x: f64, eps: f64, star: bool) -> Result<CountReport> {
    if !(alpha > 0.0 && alpha <= 1.0 && eps > 0.0 && eps <= 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "need 0 < alpha, eps <= 1 (alpha = {alpha}, eps = {eps})"
        )));
    }
    let bound = x.powf(eps);
    let (lo, hi) = int_range(alpha * x / 2.0, alpha * x);
    let count = (lo..=hi)
        .into_par_iter()
        .filter(|&n| top_factor(n, star) as f64 <= bound * (1.0 + 1e-12))
        .count();
    let main = alpha * dickman_rho(1.0 / eps) * x / 2.0;
    Ok(CountReport::new(
        if star { "smooth-count-P*" } else { "smooth-count-P" },
        ExactValue::Integer(count as u64),
        main,
    )
    .param("alpha", alpha)
    .param("x", x)
    .param("eps", eps)
    .param("star", star))
}

/// Grid values of `ρ` on `[0, top]` with spacing `1/n` (trapezoid rule on
/// `ρ(u) = ρ(u − h) − ∫ ρ(t−1)/t dt`).
fn rho_grid(n: usize, top: f64) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let len = (top * n as f64).ceil() as usize + 2;
    let mut g = vec![1.0; len.max(n + 1)];
    for i in n + 1..g.len() {
        let u0 = (i - 1) as f64 * h;
        let u1 = i as f64 * h;
        let f0 = g[i - 1 - n] / u0;
        let f1 = g[i - n] / u1;
        g[i] = g[i - 1] - 0.5 * h * (f0 + f1);
    }
    g
}

/// The Dickman function.
///
/// Trapezoid marching on grids of step `1/512` and `1/1024` combined by
/// Richardson extrapolation; the last fractional step uses two-point Gauss
/// quadrature with interpolated delayed values.
pub fn dickman_rho(u: f64) -> f64 {
    if u < 0.0 {
        return 0.0;
    }
    if u <= 1.0 {
        return 1.0;
    }
    if u <= 2.0 {
        return 1.0 - u.ln();
    }
    const N: usize = 512;
    let coarse = rho_grid(N, u);
    let fine = rho_grid(2 * N, u);
    let h = 1.0 / N as f64;
    let i = (u * N as f64).floor() as usize;
    let g = i as f64 * h;
    let at = |k: usize| (4.0 * fine[2 * k] - coarse[k]) / 3.0;
    let base = at(i);
    let len = u - g;
    if len <= 0.0 {
        return base;
    }
    // ρ(t − 1) for t ∈ [g, u] lies in one coarse cell [g − 1, g − 1 + h].
    let (a, b) = (at(i - N), at(i - N + 1));
    let delayed = |t: f64| a + (b - a) * ((t - g) / h);
    let c = 0.5 / 3f64.sqrt();
    let t1 = g + len * (0.5 - c);
    let t2 = g + len * (0.5 + c);
    base - 0.5 * len * (delayed(t1) / t1 + delayed(t2) / t2)
}

/// Certificate that `p` can divide a denominator of the representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestPossCertificate {
    pub p: u64,
    /// `w_i = x_i / p` over the denominators divisible by `p`.
    pub w: Vec<u64>,
    /// `λ = lcm(w_i)`.
    #[serde(with = "decimal")]
    pub lambda: BigUint,
    /// `N = λ Σ 1/w_i`.
    #[serde(with = "decimal")]
    pub n: BigUint,
    /// `p | N` and `N ≥ p`.
    pub verdict: bool,
    pub log_p: f64,
    /// `log L(x/p) + log(log(x/p) + 1)`.
    pub log_bound: f64,
}

/// Big integers as decimal strings.
mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// Builds the certificate for every prime dividing some denominator but not
/// the denominator of `r`.
pub fn bestposs_check(denominators: &[u64], x: f64, r: &Rational) -> Result<Vec<BestPossCertificate>> {
    validate(r, denominators).map_err(|v| Error::NotARepresentation(v.to_string()))?;
    if let Some(&d) = denominators.iter().find(|&&d| d as f64 > x) {
        return Err(Error::PreconditionViolated(format!("denominator {d} exceeds x = {x}")));
    }
    let mut primes: Vec<u64> = denominators
        .iter()
        .flat_map(|&d| factor(d).primes().collect::<Vec<_>>())
        .collect();
    primes.sort_unstable();
    primes.dedup();
    let rd = r.denom().clone();
    let mut out = Vec::new();
    for p in primes {
        if (&rd % BigInt::from(p)).is_zero() {
            continue;
        }
        let w: Vec<u64> = denominators.iter().filter(|&&d| d % p == 0).map(|&d| d / p).collect();
        let lambda = w.iter().fold(BigUint::one(), |acc, &v| acc.lcm(&BigUint::from(v)));
        let n: BigUint = w.iter().map(|&v| &lambda / v).sum();
        let verdict = (&n % p).is_zero() && n >= BigUint::from(p);
        let xp = x / p as f64;
        let log_l = prime_powers_upto(xp).iter().map(|q| (q.p as f64).ln()).sum::<f64>();
        out.push(BestPossCertificate {
            p,
            w,
            lambda,
            n,
            verdict,
            log_p: (p as f64).ln(),
            log_bound: log_l + (xp.ln() + 1.0).ln(),
        });
    }
    Ok(out)
}

/// Evaluation of the upper bound for `|E|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestPossBound {
    pub r: f64,
    pub x: f64,
    /// `(1−e^{−r})x − δ(r) x log log x/log x` with
    /// `δ(r) = (1 − e^{−r}(1+r))/2`.
    pub value: f64,
    pub delta: f64,
    /// The same with the full coefficient `1 − e^{−r}(1+r)`.
    pub full_coefficient_value: f64,
    /// `e^{−r}(1 − r log log x/log x)`.
    pub alpha_lower: f64,
}

pub fn bestposs_bound_detail(r: &Rational, x: f64) -> Result<BestPossBound> {
    if !(x >= 3.0) {
        return Err(Error::PreconditionViolated(format!("x = {x} must be at least 3")));
    }
    let rf = r.to_f64();
    let lx = x.ln();
    let ratio = lx.ln() / lx;
    let e = (-rf).exp();
    let coeff = 1.0 - e * (1.0 + rf);
    let delta = coeff / 2.0;
    Ok(BestPossBound {
        r: rf,
        x,
        value: (1.0 - e) * x - delta * x * ratio,
        delta,
        full_coefficient_value: (1.0 - e) * x - coeff * x * ratio,
        alpha_lower: e * (1.0 - rf * ratio),
    })
}

pub fn bestposs_bound(r: &Rational, x: f64) -> Result<f64> {
    Ok(bestposs_bound_detail(r, x)?.value)
}

/// `#{(m, n) : 0 < m, n < x, gcd(m, n) = 1, mn ≡ −1 (mod k)}` against
/// `6x²/(π²k) ∏_{p|k} p/(p+1)`.
pub fn kloosterman_pairs(k: u64, x: f64) -> Result<CountReport> {
    if k < 2 || !(x >= 2.0 && x <= k as f64) {
        return Err(Error::PreconditionViolated(format!(
            "need 2 <= x <= k (k = {k}, x = {x})"
        )));
    }
    let top = arith::ceil_u64(x) - 1; // m, n < x
    let count: u64 = (1..=top)
        .into_par_iter()
        .filter(|&m| {
            let Ok(inv) = mod_inverse(m as i64, k) else {
                return false;
            };
            // n ≡ −m̄ (mod k); since x ≤ k at most one n lies in (0, x)
            let n = (k - inv) % k;
            n >= 1 && n <= top && m.gcd(&n) == 1
        })
        .count() as u64;
    let main = 6.0 * x * x / (PI * PI * k as f64) * totient_ratio(k).to_f64();
    Ok(CountReport::new("kloosterman-pairs", ExactValue::Integer(count), main)
        .param("k", k)
        .param("x", x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KWitness {
    pub k: u64,
    pub smooth_bound: f64,
    pub witness: Option<u64>,
    /// Every `K ≤ searched_to` in the progression was examined.
    pub searched_to: u64,
    /// `true` when `None` is a proof: past `L(bound)` no integer has
    /// `P* ≤ bound`.
    pub exhaustive: bool,
}

/// Smallest `K ≡ −1 (mod k)` with `P*(K) ≤ smooth_bound`, scanning the
/// progression up to `ceiling` (or `L(bound)`, beyond which nothing
/// qualifies).
pub fn find_k_witness(k: u64, smooth_bound: f64, ceiling: u64) -> Result<KWitness> {
    if k < 2 {
        return Err(Error::PreconditionViolated(format!("k = {k} must be at least 2")));
    }
    if !(smooth_bound >= 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "smooth bound {smooth_bound} must be at least 1"
        )));
    }
    // Every K with P*(K) ≤ B divides L(B).
    let l = lcm_upto(smooth_bound);
    let cap = u64::try_from(&l).ok();
    let limit = cap.map_or(ceiling, |c| c.min(ceiling));
    let mut kk = k - 1;
    while kk <= limit {
        if kk >= 1 && arith::p_star(kk).q as f64 <= smooth_bound {
            return Ok(KWitness {
                k,
                smooth_bound,
                witness: Some(kk),
                searched_to: kk,
                exhaustive: true,
            });
        }
        match kk.checked_add(k) {
            Some(n) => kk = n,
            None => break,
        }
    }
    Ok(KWitness {
        k,
        smooth_bound,
        witness: None,
        searched_to: limit,
        exhaustive: cap.is_some_and(|c| c <= ceiling),
    })
}

/// `n ≤ x` with `P*(n) > C n / log n` whose prime does not divide the
/// denominator of `r`, against `x log log x / log x`.
pub fn l1_proxy_count(r: &Rational, x: f64, c: f64) -> Result<CountReport> {
    if !(x >= 3.0 && c > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "need x >= 3 and C > 0 (x = {x}, C = {c})"
        )));
    }
    let members = l1_proxy_members(r, x, c);
    let lx = x.ln();
    Ok(
        CountReport::new("l1-proxy", ExactValue::Integer(members.len() as u64), x * lx.ln() / lx)
            .param("r", r.to_string())
            .param("x", x)
            .param("C", c),
    )
}

/// The integers flagged by [`l1_proxy_count`].
pub fn l1_proxy_members(r: &Rational, x: f64, c: f64) -> Vec<u64> {
    let rd = r.denom().clone();
    let xn = arith::floor_u64(x);
    (2..=xn)
        .into_par_iter()
        .filter(|&n| {
            let q = arith::p_star(n);
            q.q as f64 > c * n as f64 / (n as f64).ln() && !(&rd % BigInt::from(q.p)).is_zero()
        })
        .collect()
}

/// Exact `L_1` membership: `x` is a member iff `r − 1/x` has no
/// representation with distinct denominators below `x`.
pub fn l1_member_exact(r: &Rational, x: u64, bounds: &SearchBounds) -> Result<LjDecision> {
    lj_member(r, 1, x, bounds)
}
