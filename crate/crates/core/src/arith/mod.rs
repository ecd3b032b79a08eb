//! Exact integer and rational arithmetic, factorization and the elementary
//! number-theoretic functions used by every other module.

mod rational;
mod sieve;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use rational::{unit_fraction_sum, Rational};
pub use sieve::{Sieve, DEFAULT_SIEVE_LIMIT};

/// A prime power `q = p^nu`.
///
/// `(p, nu, q) = (1, 0, 1)` is the sentinel used for `P*(1)` and for the
/// conventional `q_0 = p_0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimePower {
    pub p: u64,
    pub nu: u32,
    pub q: u64,
}

impl PrimePower {
    pub const ONE: PrimePower = PrimePower { p: 1, nu: 0, q: 1 };

    /// Builds `p^nu`, checking primality of `p` and overflow.
    pub fn new(p: u64, nu: u32) -> Result<Self> {
        if nu == 0 {
            return Err(Error::InvalidInput("prime power exponent must be >= 1".into()));
        }
        if !Sieve::global().is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        let q = p.checked_pow(nu).ok_or_else(|| Error::Overflow(format!("{p}^{nu}")))?;
        Ok(PrimePower { p, nu, q })
    }

    /// Recognizes `q` as a prime power.
    pub fn from_q(q: u64) -> Option<Self> {
        if q == 1 {
            return Some(Self::ONE);
        }
        if q == 0 {
            return None;
        }
        match factor(q).0.as_slice() {
            [(p, e)] => Some(PrimePower { p: *p, nu: *e, q }),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.q == 1
    }
}

/// Prime factorization: strictly increasing primes with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Factorization(pub Vec<(u64, u32)>);

impl Factorization {
    pub fn product(&self) -> u128 {
        self.0.iter().map(|&(p, e)| (p as u128).pow(e)).product()
    }

    pub fn prime_powers(&self) -> impl Iterator<Item = PrimePower> + '_ {
        self.0.iter().map(|&(p, nu)| PrimePower { p, nu, q: p.pow(nu) })
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.0.iter().all(|&(_, e)| e == 1)
    }

    pub fn num_distinct_primes(&self) -> usize {
        self.0.len()
    }
}

pub fn factor(n: u64) -> Factorization {
    Factorization(Sieve::global().factor(n))
}

/// Largest prime power exactly dividing `n`; the sentinel for `n = 1`.
pub fn p_star(n: u64) -> PrimePower {
    factor(n)
        .prime_powers()
        .max_by_key(|pp| pp.q)
        .unwrap_or(PrimePower::ONE)
}

/// Largest prime factor of `n`, or 1 for `n = 1`.
pub fn p_max(n: u64) -> u64 {
    factor(n).0.last().map(|&(p, _)| p).unwrap_or(1)
}

/// `L(x) = lcm{1, ..., floor(x)}`, computed as the product of one `p` per
/// prime power `p^nu ≤ x`.
pub fn lcm_upto(x: f64) -> BigUint {
    let mut acc = BigUint::one();
    for pp in prime_powers_upto(x) {
        acc *= pp.p;
    }
    acc
}

/// Same as [`lcm_upto`] for an integer bound, as `u128` when it fits.
pub fn lcm_upto_u128(n: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for pp in prime_powers_upto(n as f64) {
        acc = acc.checked_mul(pp.p as u128)?;
    }
    Some(acc)
}

fn floor_bound(y: f64) -> u64 {
    if !(y >= 1.0) {
        return 0;
    }
    // Guard against representation error right at an integer.
    let f = y.floor();
    if (y - (f + 1.0)).abs() < 1e-9 {
        (f + 1.0) as u64
    } else {
        f as u64
    }
}

/// Increasing list of all prime powers `q ≤ y`.
pub fn prime_powers_upto(y: f64) -> Vec<PrimePower> {
    let n = floor_bound(y);
    if n < 2 {
        return Vec::new();
    }
    let sieve = Sieve::global();
    let mut out = Vec::new();
    let push_prime = |p: u64, out: &mut Vec<PrimePower>| {
        let mut q = p;
        let mut nu = 1;
        loop {
            out.push(PrimePower { p, nu, q });
            match q.checked_mul(p) {
                Some(nq) if nq <= n => {
                    q = nq;
                    nu += 1;
                }
                _ => break,
            }
        }
    };
    if n <= sieve.limit() {
        for &p in sieve.primes_upto(n) {
            push_prime(p, &mut out);
        }
    } else {
        for p in 2..=n {
            if sieve.is_prime(p) {
                push_prime(p, &mut out);
            }
        }
    }
    out.sort_by_key(|pp| pp.q);
    out
}

/// `π*(y)`: the number of prime powers `≤ y`.
pub fn prime_power_count(y: f64) -> usize {
    prime_powers_upto(y).len()
}

/// The inverse of `a` modulo `n`, normalized to `0 < b < n`.
pub fn mod_inverse(a: i64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("modulus {n} must be at least 2")));
    }
    let m = n as i128;
    let a_red = (a as i128).rem_euclid(m);
    let g = num_integer::Integer::extended_gcd(&a_red, &m);
    if g.gcd != 1 {
        return Err(Error::NotCoprime { a, n });
    }
    Ok(g.x.rem_euclid(m) as u64)
}

/// `(a mod n)` for a big integer, in `[0, n)`.
pub fn big_mod(a: &BigInt, n: u64) -> u64 {
    let r = a % BigInt::from(n);
    let r = if r < BigInt::zero() { r + BigInt::from(n) } else { r };
    r.to_u64().expect("residue fits u64")
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_nearest_int(x: &Rational) -> Rational {
    x.dist_to_nearest_int()
}

/// Floating-point version of [`dist_to_nearest_int`].
pub fn dist_to_nearest_int_f64(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// `∏_{p | k} p/(p+1)`, exactly.
pub fn totient_ratio(k: u64) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for p in factor(k).primes() {
        num *= p;
        den *= p + 1;
    }
    Rational::new(num, den).expect("nonzero denominator")
}

/// `p`-adic valuation of a big integer (`p ≥ 2`), and the cofactor.
pub fn valuation_big(n: &BigUint, p: u64) -> (u32, BigUint) {
    debug_assert!(p >= 2);
    let mut n = n.clone();
    let mut e = 0;
    if n.is_zero() {
        return (0, n);
    }
    let pb = BigUint::from(p);
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (e, n);
        }
        n = q;
        e += 1;
    }
}

/// `P*(n)` for an arbitrary-precision integer.
///
/// Trial division by increasing primes until the cofactor is 1 or prime, so
/// this is intended for smooth numbers such as residual denominators.
pub fn p_star_big(n: &BigUint) -> PrimePower {
    if let Some(small) = n.to_u64() {
        return p_star(small.max(1));
    }
    let sieve = Sieve::global();
    let mut rest = n.clone();
    let mut best = PrimePower::ONE;
    let check = |p: u64, rest: &mut BigUint, best: &mut PrimePower| {
        if (&*rest % p).is_zero() {
            let (e, cof) = valuation_big(rest, p);
            *rest = cof;
            let q = p.checked_pow(e).expect("prime power exceeds u64");
            if q > best.q {
                *best = PrimePower { p, nu: e, q };
            }
        }
    };
    for &p in sieve.primes() {
        if rest.is_one() {
            return best;
        }
        if let Some(r) = rest.to_u64() {
            let tail = p_star(r);
            return if tail.q > best.q { tail } else { best };
        }
        check(p, &mut rest, &mut best);
    }
    let mut d = sieve.limit() + 1 + (sieve.limit() % 2);
    while !rest.is_one() {
        if let Some(r) = rest.to_u64() {
            let tail = p_star(r);
            return if tail.q > best.q { tail } else { best };
        }
        check(d, &mut rest, &mut best);
        d += 2;
    }
    best
}

/// Smallest integer `≥ x` for nonnegative finite `x`, tolerant of
/// representation error right at an integer.
pub fn ceil_u64(x: f64) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    let c = x.ceil();
    if (x - (c - 1.0)).abs() < 1e-9 {
        (c - 1.0) as u64
    } else {
        c as u64
    }
}

/// Largest integer `≤ x` for nonnegative finite `x`.
pub fn floor_u64(x: f64) -> u64 {
    floor_bound(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_examples() {
        assert_eq!(factor(1).0, vec![]);
        assert_eq!(factor(12).0, vec![(2, 2), (3, 1)]);
        assert_eq!(factor(97).0, vec![(97, 1)]);
    }

    #[test]
    fn p_star_examples() {
        assert_eq!(p_star(1), PrimePower::ONE);
        assert_eq!(p_star(12), PrimePower { p: 2, nu: 2, q: 4 });
        assert_eq!(p_star(100), PrimePower { p: 5, nu: 2, q: 25 });
    }

    #[test]
    fn p_max_examples() {
        assert_eq!(p_max(1), 1);
        assert_eq!(p_max(12), 3);
        assert_eq!(p_max(97), 97);
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_upto(1.0), BigUint::one());
        assert_eq!(lcm_upto(10.0), BigUint::from(2520u32));
        assert_eq!(lcm_upto(10.5), BigUint::from(2520u32));
        assert!(2520.0 <= (20.0f64).exp());
        assert_eq!(lcm_upto_u128(10), Some(2520));
    }

    #[test]
    fn prime_power_lists() {
        assert_eq!(prime_power_count(1.0), 0);
        assert_eq!(prime_power_count(10.0), 7);
        assert_eq!(prime_power_count(30.0), 16);
        let qs = |y: f64| prime_powers_upto(y).iter().map(|pp| pp.q).collect::<Vec<_>>();
        assert_eq!(qs(5.0), vec![2, 3, 4, 5]);
        assert_eq!(qs(1.5), Vec::<u64>::new());
        assert_eq!(qs(11.0), vec![2, 3, 4, 5, 7, 8, 9, 11]);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(1, 5), Ok(1));
        assert_eq!(mod_inverse(3, 7), Ok(5));
        assert_eq!(mod_inverse(2, 4), Err(Error::NotCoprime { a: 2, n: 4 }));
        assert_eq!(mod_inverse(-1, 7), Ok(6));
        assert!(mod_inverse(1, 1).is_err());
    }

    #[test]
    fn distance_examples() {
        let q = |s: &str| s.parse::<Rational>().unwrap();
        assert_eq!(dist_to_nearest_int(&q("3")), Rational::zero());
        assert_eq!(dist_to_nearest_int(&q("7/2")), q("1/2"));
        assert_eq!(dist_to_nearest_int(&q("13/5")), q("2/5"));
        assert!((dist_to_nearest_int_f64(2.6) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn totient_ratio_examples() {
        let q = |s: &str| s.parse::<Rational>().unwrap();
        assert_eq!(totient_ratio(1), Rational::one());
        assert_eq!(totient_ratio(5), q("5/6"));
        assert_eq!(totient_ratio(12), q("1/2"));
    }

    #[test]
    fn p_star_of_big_smooth_number() {
        let n = lcm_upto(200.0);
        // largest prime power up to 200 is 199 (prime) vs 128: 199 wins
        assert_eq!(p_star_big(&n).q, 199);
        let n = BigUint::from(2u32).pow(40) * BigUint::from(3u32).pow(20) * 7u32;
        assert_eq!(p_star_big(&n).p, 2);
        assert_eq!(p_star_big(&n).nu, 40);
        assert_eq!(p_star_big(&BigUint::from(12u32)).q, 4);
    }

    #[test]
    fn prime_power_recognition() {
        assert_eq!(PrimePower::from_q(9), Some(PrimePower { p: 3, nu: 2, q: 9 }));
        assert_eq!(PrimePower::from_q(12), None);
        assert_eq!(PrimePower::from_q(1), Some(PrimePower::ONE));
        assert!(PrimePower::new(4, 2).is_err());
    }
}
