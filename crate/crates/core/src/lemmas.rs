//! Constructions that clear one prime power at a time from the denominator
//! of a residual, the subset-of-inverses solver behind them, and the
//! equidistribution check for inverses.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, big_mod, factor, lcm_upto, mod_inverse, p_star, PrimePower, Rational};
use crate::error::{Error, Result};
use crate::identities::DenominatorSet;

/// `c · (d/q)^{-1} mod p` for `c/d` whose denominator is exactly divisible
/// by `q = p^nu`; `None` when `q` does not divide `d`.
///
/// Errors when a higher power of `p` divides `d` (the residual's `P*`
/// would exceed `q`).
pub fn q_coefficient(cd: &Rational, q: PrimePower) -> Result<Option<u64>> {
    let d = cd.denom();
    let qb = BigInt::from(q.q);
    if !(d % &qb).is_zero() {
        return Ok(None);
    }
    let rest = d / &qb;
    let rest_mod = big_mod(&rest, q.p);
    if rest_mod == 0 {
        return Err(Error::PreconditionViolated(format!(
            "denominator of {cd} is divisible by a power of {} above {}",
            q.p, q.q
        )));
    }
    let inv = mod_inverse(rest_mod as i64, q.p)?;
    let c = big_mod(cd.numer(), q.p);
    Ok(Some(mulmod(c, inv, q.p)))
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn check_p_star_at_most(cd: &Rational, q: PrimePower) -> Result<()> {
    let star = arith::p_star_big(&cd.denom_unsigned());
    if star.q > q.q {
        return Err(Error::PreconditionViolated(format!(
            "P*(denominator of {cd}) = {} exceeds q = {}",
            star.q, q.q
        )));
    }
    Ok(())
}

/// Two integers `m1 < m2` in `[(q-3)/2, q)`, both prime to `p`, whose
/// inverses mod `p` sum to `a`.
///
/// For `p ≥ 5` the window is scanned and the lexicographically smallest
/// pair returned; for `p = 3` the three explicit pairs
/// `(q-2, q-1)`, `(q-4, q-1)`, `(q-5, q-2)` are used according to `a mod 3`.
pub fn inverse_pair(q: PrimePower, a: i64) -> Result<(u64, u64)> {
    if q.q < 5 || q.p == 2 {
        return Err(Error::PreconditionViolated(format!(
            "inverse_pair needs an odd prime power >= 5, got {}",
            q.q
        )));
    }
    let p = q.p;
    let a = (a as i128).rem_euclid(p as i128) as u64;
    if p == 3 {
        let qq = q.q;
        return Ok(match a {
            0 => (qq - 2, qq - 1),
            1 => (qq - 4, qq - 1),
            _ => (qq - 5, qq - 2),
        });
    }
    let lo = (q.q - 3).div_ceil(2);
    for m1 in lo..q.q {
        if m1 % p == 0 {
            continue;
        }
        let inv1 = mod_inverse(m1 as i64, p)?;
        let need = (a + p - inv1) % p;
        if need == 0 {
            continue;
        }
        // m2 must be ≡ need^{-1} (mod p) and exceed m1.
        let target = mod_inverse(need as i64, p)?;
        let mut m2 = m1 + (target + p - m1 % p) % p;
        if m2 == m1 {
            m2 += p;
        }
        if m2 < q.q {
            return Ok((m1, m2));
        }
    }
    unreachable!("the window always contains a pair (q = {}, a = {a})", q.q)
}

/// Removes the `q`-part of `cd` with at most two unit fractions whose
/// denominators lie in `[q²/5, q²]` and have `P* = q`.
pub fn clear_medium(q: PrimePower, cd: &Rational) -> Result<DenominatorSet> {
    if q.q < 4 {
        return Err(Error::PreconditionViolated(format!(
            "clear_medium needs q >= 4, got {}",
            q.q
        )));
    }
    check_p_star_at_most(cd, q)?;
    let coeff = q_coefficient(cd, q)?;
    if q.p == 2 {
        return match coeff {
            None => Ok(DenominatorSet::new()),
            Some(_) => DenominatorSet::from_vec(vec![q.q * (q.q - 1)]),
        };
    }
    let (m1, m2) = inverse_pair(q, coeff.unwrap_or(0) as i64)?;
    DenominatorSet::from_vec(vec![q.q * m1, q.q * m2])
}

/// Removes the `P*`-part of the denominator of `cd` with a single unit
/// fraction `1/n`, `n = L(q)/a`.
pub fn clear_small(cd: &Rational) -> Result<u64> {
    if cd.is_integer() {
        return Err(Error::IntegerResidual(cd.clone()));
    }
    let q = arith::p_star_big(&cd.denom_unsigned());
    let lq = lcm_upto(q.q as f64);
    let lq_over_q = big_mod(&BigInt::from(&lq / q.q), q.p);
    let c = q_coefficient(cd, q)?.expect("q divides the denominator by construction");
    let a = mulmod(c, lq_over_q, q.p);
    debug_assert!(a >= 1 && a < q.p);
    let n = &lq / a;
    n.to_u64()
        .ok_or_else(|| Error::Overflow(format!("L({})/{a} exceeds u64", q.q)))
}

/// Subset `K` of `M` whose inverses mod `n` sum to `a`, or `None`.
///
/// Exact reachability over residues with first-reachable predecessor links:
/// items are scanned in order, and a residue remembers the item through
/// which it first became reachable.
pub fn subset_inverse_sum(set: &[u64], n: u64, a: i64) -> Result<Option<Vec<u64>>> {
    let inv = inverses(set, n)?;
    let target = (a as i128).rem_euclid(n as i128) as usize;
    let n = n as usize;
    // parent[r] = (item index, previous residue)
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut reached = vec![false; n];
    reached[0] = true;
    let mut frontier = Vec::with_capacity(n);
    for (i, &w) in inv.iter().enumerate() {
        frontier.clear();
        frontier.extend((0..n).filter(|&r| reached[r]));
        for &r in &frontier {
            let s = (r + w as usize) % n;
            if !reached[s] {
                reached[s] = true;
                parent[s] = Some((i, r));
            }
        }
        if reached[target] {
            break;
        }
    }
    if !reached[target] {
        return Ok(None);
    }
    let mut out = Vec::new();
    let mut r = target;
    while let Some((i, prev)) = parent[r] {
        out.push(set[i]);
        r = prev;
    }
    out.reverse();
    Ok(Some(out))
}

/// Like [`subset_inverse_sum`] but returns a subset of minimum size
/// (ties resolved toward earlier items being left out).
pub fn min_subset_inverse_sum(set: &[u64], n: u64, a: i64) -> Result<Option<Vec<u64>>> {
    let inv = inverses(set, n)?;
    let target = (a as i128).rem_euclid(n as i128) as usize;
    let n = n as usize;
    const INF: u32 = u32::MAX;
    let mut best = vec![INF; n];
    best[0] = 0;
    let words = n.div_ceil(64);
    let mut took: Vec<Vec<u64>> = Vec::with_capacity(inv.len());
    for &w in &inv {
        let w = w as usize;
        let mut flags = vec![0u64; words];
        let prev = best.clone();
        for (r, &cost) in prev.iter().enumerate() {
            if cost == INF {
                continue;
            }
            let s = (r + w) % n;
            if cost + 1 < best[s] {
                best[s] = cost + 1;
                flags[s / 64] |= 1 << (s % 64);
            }
        }
        took.push(flags);
    }
    if best[target] == INF {
        return Ok(None);
    }
    let mut out = Vec::new();
    let mut r = target;
    for i in (0..inv.len()).rev() {
        if took[i][r / 64] >> (r % 64) & 1 == 1 {
            out.push(set[i]);
            r = (r + n - inv[i] as usize % n) % n;
        }
    }
    debug_assert_eq!(r, 0);
    out.reverse();
    Ok(Some(out))
}

fn inverses(set: &[u64], n: u64) -> Result<Vec<u64>> {
    set.iter()
        .map(|&m| mod_inverse(m as i64, n).map_err(|_| Error::NotCoprime { a: m as i64, n }))
        .collect()
}

/// Outcome of checking how many inverses stay away from 0 mod `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfBigReport {
    pub n: u64,
    pub h: u64,
    pub k: u32,
    pub b: f64,
    pub c: f64,
    pub set_size: usize,
    /// `C (log log n)^k / (200 B log^k n)`.
    pub threshold: f64,
    /// Elements with `‖h m̄ / n‖` above the threshold.
    pub count: usize,
    pub required: f64,
    /// Whether `200 (log n / log log n)^k < C < n` and `|M| > C` hold.
    pub hypotheses_met: bool,
    /// `Some(count ≥ C/2)` when the hypotheses hold.
    pub verdict: Option<bool>,
}

/// Counts `m ∈ M` with `‖h m̄ / n‖ > C (log log n)^k / (200 B log^k n)`.
pub fn halfbig_verify(set: &[u64], n: u64, h: u64, b: f64, c: f64, k: u32) -> Result<HalfBigReport> {
    if n < 3 || h == 0 || h >= n {
        return Err(Error::PreconditionViolated(format!(
            "need n >= 3 and 0 < h < n (n = {n}, h = {h})"
        )));
    }
    for &m in set {
        if (m as f64) >= b {
            return Err(Error::PreconditionViolated(format!("m = {m} is not below B = {b}")));
        }
        let f = factor(m);
        let ok = f.is_squarefree() && f.num_distinct_primes() == k as usize && f.primes().all(|p| !n.is_multiple_of(p));
        if !ok {
            return Err(Error::PreconditionViolated(format!(
                "m = {m} is not a product of {k} distinct primes prime to {n}"
            )));
        }
    }
    let ln = (n as f64).ln();
    let lln = ln.ln();
    let threshold = c * lln.powi(k as i32) / (200.0 * b * ln.powi(k as i32));
    let mut count = 0;
    for &m in set {
        let inv = mod_inverse(m as i64, n)?;
        let r = mulmod(h, inv, n);
        let dist = r.min(n - r) as f64 / n as f64;
        if dist > threshold {
            count += 1;
        }
    }
    let lower = 200.0 * (ln / lln).powi(k as i32);
    let hypotheses_met = lln > 0.0 && lower < c && c < n as f64 && set.len() as f64 > c;
    let required = c / 2.0;
    Ok(HalfBigReport {
        n,
        h,
        k,
        b,
        c,
        set_size: set.len(),
        threshold,
        count,
        required,
        hypotheses_met,
        verdict: hypotheses_met.then_some(count as f64 >= required),
    })
}

/// Knobs for [`clear_large`]. The lemma's own constants only bind for
/// astronomically large `x`; these expose the skeleton at desk scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiglemParams {
    /// Multipliers are products of exactly `k` distinct primes drawn from
    /// `((ξx/q)^{1/k}, (x/q)^{1/k})`. `None` admits every multiplier `m`
    /// with `qm ∈ [ξx, x]` and `P*(qm) = q`.
    pub k: Option<u32>,
    /// At most this many multipliers enter the subset solver.
    pub pool_cap: usize,
    /// Cap on `|U|`; `None` means `200 (x/q)^{2/3} log³x`.
    pub subset_cap: Option<usize>,
    /// Prefer the smallest clearing subset (keeps more of the ambient set).
    pub minimize: bool,
    /// `(lo, hi)` such that `x^lo ≤ q ≤ x log^{-hi} x` is required when
    /// `check_window` is set.
    pub q_window: (f64, f64),
    pub check_window: bool,
}

impl Default for BiglemParams {
    fn default() -> Self {
        BiglemParams {
            k: None,
            pool_cap: 4096,
            subset_cap: None,
            minimize: true,
            q_window: (0.2, 22.0),
            check_window: false,
        }
    }
}

impl BiglemParams {
    /// The lemma's literal shape: `k = 4` and the `[x^{1/5}, x log^{-22} x]`
    /// window enforced.
    pub fn literal() -> Self {
        BiglemParams {
            k: Some(4),
            check_window: true,
            ..Default::default()
        }
    }

    pub fn cap_for(&self, q: u64, x: f64) -> usize {
        self.subset_cap.unwrap_or_else(|| {
            let v = 200.0 * (x / q as f64).powf(2.0 / 3.0) * x.ln().powi(3);
            v.floor().min(usize::MAX as f64) as usize
        })
    }
}

/// Candidate multipliers `m` for `U = {qm}`, increasing.
pub fn large_pool(q: PrimePower, x: f64, xi: f64, params: &BiglemParams) -> Vec<u64> {
    let lo = xi * x / q.q as f64;
    let hi = x / q.q as f64;
    let lo_m = arith::ceil_u64(lo).max(1);
    let hi_m = arith::floor_u64(hi);
    let mut pool = Vec::new();
    match params.k {
        None => {
            for m in lo_m..=hi_m {
                if m % q.p == 0 {
                    continue;
                }
                if p_star(m).q < q.q {
                    pool.push(m);
                    if pool.len() >= params.pool_cap {
                        break;
                    }
                }
            }
        }
        Some(k) => {
            let k = k.max(1);
            let plo = lo.powf(1.0 / k as f64);
            let phi = hi.powf(1.0 / k as f64);
            let primes: Vec<u64> = arith::Sieve::global()
                .primes_upto(arith::floor_u64(phi))
                .iter()
                .copied()
                .filter(|&p| (p as f64) > plo && p != q.p && p < q.q)
                .collect();
            let mut stack = Vec::new();
            products_of_k(&primes, k as usize, 0, 1, &mut stack, &mut pool, lo, hi);
            pool.sort_unstable();
            pool.truncate(params.pool_cap);
        }
    }
    pool
}

#[allow(clippy::too_many_arguments)]
fn products_of_k(
    primes: &[u64],
    k: usize,
    start: usize,
    acc: u64,
    stack: &mut Vec<u64>,
    out: &mut Vec<u64>,
    lo: f64,
    hi: f64,
) {
    if stack.len() == k {
        let v = acc as f64;
        if v >= lo - 1e-9 && v <= hi + 1e-9 {
            out.push(acc);
        }
        return;
    }
    for i in start..primes.len() {
        let Some(next) = acc.checked_mul(primes[i]) else { break };
        if next as f64 > hi + 1e-9 {
            break;
        }
        stack.push(primes[i]);
        products_of_k(primes, k, i + 1, next, stack, out, lo, hi);
        stack.pop();
    }
}

/// Removes the `q`-part of `cd` (whose denominator has `P* = q`) with unit
/// fractions `1/(qm)` taken from `[ξx, x]`.
pub fn clear_large(q: PrimePower, cd: &Rational, x: f64, xi: f64, params: &BiglemParams) -> Result<DenominatorSet> {
    clear_large_within(q, cd, x, xi, params, |_| true)
}

/// [`clear_large`] restricted to denominators accepted by `admissible`.
pub fn clear_large_within(
    q: PrimePower,
    cd: &Rational,
    x: f64,
    xi: f64,
    params: &BiglemParams,
    admissible: impl Fn(u64) -> bool,
) -> Result<DenominatorSet> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::PreconditionViolated(format!("xi = {xi} must lie in (0, 1)")));
    }
    if params.check_window {
        let (lo, hi) = params.q_window;
        let qf = q.q as f64;
        if qf < x.powf(lo) || qf > x * x.ln().powf(-hi) {
            return Err(Error::PreconditionViolated(format!(
                "q = {} outside [x^{lo}, x log^-{hi} x] for x = {x}",
                q.q
            )));
        }
    }
    check_p_star_at_most(cd, q)?;
    let a = q_coefficient(cd, q)?
        .ok_or_else(|| Error::PreconditionViolated(format!("q = {} does not divide the denominator of {cd}", q.q)))?;
    let pool: Vec<u64> = large_pool(q, x, xi, params)
        .into_iter()
        .filter(|&m| admissible(q.q * m))
        .collect();
    if pool.is_empty() {
        return Err(Error::NoSubsetFound { q: q.q, pool: 0 });
    }
    // Only the residue mod p matters for removing the top power of p.
    let solve = if params.minimize && pool.len() as u128 * q.p as u128 <= 1 << 28 {
        min_subset_inverse_sum
    } else {
        subset_inverse_sum
    };
    let k = solve(&pool, q.p, a as i64)?.ok_or(Error::NoSubsetFound {
        q: q.q,
        pool: pool.len(),
    })?;
    if k.len() > params.cap_for(q.q, x) {
        return Err(Error::NoSubsetFound {
            q: q.q,
            pool: pool.len(),
        });
    }
    DenominatorSet::from_vec(k.into_iter().map(|m| q.q * m).collect())
}

/// `a/b - Σ 1/n`.
pub fn subtract_units(ab: &Rational, set: &DenominatorSet) -> Rational {
    ab - &set.reciprocal_sum()
}

/// Returns `true` when `cd` is zero or its denominator is 1.
pub fn is_integral(cd: &Rational) -> bool {
    cd.denom().is_one() || cd.numer().abs().is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn pp(n: u64) -> PrimePower {
        PrimePower::from_q(n).unwrap()
    }

    #[test]
    fn inverse_pair_examples() {
        let (m1, m2) = inverse_pair(pp(5), 0).unwrap();
        assert!(m1 < m2 && m2 < 5 && m1 >= 1);
        assert_eq!(
            (mod_inverse(m1 as i64, 5).unwrap() + mod_inverse(m2 as i64, 5).unwrap()) % 5,
            0
        );
        assert_eq!(inverse_pair(pp(9), 1).unwrap(), (5, 8));
        assert_eq!(inverse_pair(pp(9), 0).unwrap(), (7, 8));
        assert!(inverse_pair(pp(4), 0).is_err());
        assert!(inverse_pair(pp(3), 0).is_err());
    }

    #[test]
    fn clear_medium_examples() {
        assert_eq!(clear_medium(pp(4), &q("1/4")).unwrap().as_slice(), &[12]);
        assert!(clear_medium(pp(4), &q("1/3")).unwrap().is_empty());
        let u = clear_medium(pp(5), &q("1/5")).unwrap();
        assert_eq!(u.as_slice(), &[15, 20]);
        assert_eq!(subtract_units(&q("1/5"), &u), q("1/12"));
    }

    #[test]
    fn clear_medium_rejects_large_p_star() {
        assert!(clear_medium(pp(4), &q("1/8")).is_err());
        assert!(clear_medium(pp(5), &q("1/7")).is_err());
    }

    #[test]
    fn clear_small_examples() {
        assert_eq!(clear_small(&q("1/3")).unwrap(), 3);
        assert_eq!(clear_small(&q("1/4")).unwrap(), 12);
        assert_eq!(q("1/4") - Rational::unit(12), q("1/6"));
        assert_eq!(clear_small(&q("2/1")), Err(Error::IntegerResidual(q("2"))));
    }

    #[test]
    fn subset_examples() {
        assert_eq!(subset_inverse_sum(&[2, 3, 4], 5, 4).unwrap(), Some(vec![4]));
        assert_eq!(subset_inverse_sum(&[2, 3], 5, 0).unwrap(), Some(vec![]));
        assert_eq!(subset_inverse_sum(&[2], 5, 1).unwrap(), None);
        assert_eq!(subset_inverse_sum(&[2, 5], 5, 1), Err(Error::NotCoprime { a: 5, n: 5 }));
        assert_eq!(min_subset_inverse_sum(&[2, 3, 4], 5, 4).unwrap(), Some(vec![4]));
        assert_eq!(min_subset_inverse_sum(&[2], 5, 1).unwrap(), None);
    }

    #[test]
    fn halfbig_empty_and_degenerate() {
        let r = halfbig_verify(&[], 101, 1, 50.0, 1.0, 1).unwrap();
        assert_eq!(r.count, 0);
        assert!(!r.hypotheses_met);
        assert_eq!(r.verdict, None);
        assert!(halfbig_verify(&[6], 101, 1, 50.0, 1.0, 1).is_err());
    }

    #[test]
    fn clear_large_small_cases() {
        // Residual 1/7 at x = 200: U made of multiples of 7 in [100, 200].
        let cd = q("1/7");
        let u = clear_large(pp(7), &cd, 200.0, 0.5, &BiglemParams::default()).unwrap();
        assert!(u
            .as_slice()
            .iter()
            .all(|&n| (100..=200).contains(&n) && p_star(n).q == 7));
        let rest = subtract_units(&cd, &u);
        assert!(arith::p_star_big(&rest.denom_unsigned()).q < 7);
        // q does not divide the denominator
        assert!(matches!(
            clear_large(pp(7), &q("1/5"), 200.0, 0.5, &BiglemParams::default()),
            Err(Error::PreconditionViolated(_))
        ));
        // tiny x: no multiplier fits
        assert_eq!(
            clear_large(pp(7), &cd, 6.0, 0.5, &BiglemParams::default()),
            Err(Error::NoSubsetFound { q: 7, pool: 0 })
        );
    }

    #[test]
    fn k_distinct_prime_pool() {
        let params = BiglemParams {
            k: Some(2),
            ..Default::default()
        };
        let pool = large_pool(pp(97), 97.0 * 200.0, 0.5, &params);
        assert!(!pool.is_empty());
        for m in pool {
            let f = factor(m);
            assert!(f.is_squarefree() && f.num_distinct_primes() == 2);
            assert!((100..=200).contains(&m));
        }
    }
}
