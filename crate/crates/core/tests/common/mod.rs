//! Independent oracles shared by the integration tests. None of these call
//! into the search or analytics code they are used to check.

#![allow(dead_code)]

use egyptian_core::Rational;

/// `lcm(1..=n)` for `n ≤ 40`.
pub fn lcm_small(n: u64) -> u128 {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    (1..=n as u128).fold(1u128, |acc, k| acc / gcd(acc, k) * k)
}

/// Trial-division factorization.
pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Largest prime power exactly dividing `n` (1 for `n = 1`).
pub fn trial_p_star(n: u64) -> u64 {
    trial_factor(n).into_iter().map(|(p, e)| p.pow(e)).max().unwrap_or(1)
}

pub fn trial_p_max(n: u64) -> u64 {
    trial_factor(n).last().map_or(1, |&(p, _)| p)
}

pub fn is_prime_power(n: u64) -> bool {
    n >= 2 && trial_factor(n).len() == 1
}

/// Every subset of `items` (as sorted vectors) whose reciprocal sum equals
/// `target`, found by brute force over integers scaled by `lcm(1..=max)`.
pub fn brute_subsets(items: &[u64], target: &Rational, size: Option<usize>) -> Vec<Vec<u64>> {
    let top = items.iter().copied().max().unwrap_or(1);
    let l = lcm_small(top);
    let scaled = target * &Rational::from_integer(l);
    if !scaled.is_integer() || scaled.is_negative() {
        return Vec::new();
    }
    let want: u128 = scaled.numer().try_into().unwrap();
    let weights: Vec<u128> = items.iter().map(|&n| l / n as u128).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << items.len()) {
        if size.is_some_and(|s| mask.count_ones() as usize != s) {
            continue;
        }
        let mut sum = 0u128;
        for (i, w) in weights.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sum += w;
            }
        }
        if sum == want {
            let mut v: Vec<u64> = (0..items.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| items[i])
                .collect();
            v.sort_unstable();
            out.push(v);
        }
    }
    out.sort();
    out
}

/// Brute-force `L_1`/`L_2` decision: `Some(witness)` when `x` is the
/// `j`-th largest denominator of some representation of `r`, for `j ∈ {1, 2}`.
/// Works over integers scaled by `λ = lcm(1..=x, den r)`.
pub fn brute_lj_witness(r: &Rational, j: usize, x: u64) -> Option<Vec<u64>> {
    assert!(j == 1 || j == 2);
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let rd: u128 = r.denom().try_into().unwrap();
    let rn: u128 = r.numer().try_into().unwrap();
    let l0 = lcm_small(x);
    let lambda = l0 / gcd(l0, rd) * rd;
    let target = (lambda / rd * rn) as i128 - (lambda / x as u128) as i128;
    let lo = (rd / rn + 1) as u64;
    let items: Vec<u64> = (lo..x).collect();
    let weights: Vec<i128> = items.iter().map(|&d| (lambda / d as u128) as i128).collect();
    for mask in 0u64..(1u64 << items.len()) {
        let s: i128 = (0..items.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| weights[i])
            .sum();
        let rest = target - s;
        let tail = match j {
            1 => (rest == 0).then(Vec::new),
            // rest/λ = 1/y with y > x
            _ => (rest > 0 && lambda.is_multiple_of(rest as u128))
                .then(|| (lambda / rest as u128) as u64)
                .filter(|&y| y > x)
                .map(|y| vec![y]),
        };
        if let Some(tail) = tail {
            let mut w: Vec<u64> = (0..items.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| items[i])
                .collect();
            w.push(x);
            w.extend(tail);
            return Some(w);
        }
    }
    None
}

/// Brute-force `M_t(r)` over denominators up to `max_den`: every
/// `t`-combination is summed over integers scaled by `lcm(1..=max_den)`.
pub fn brute_m_t(r: &Rational, t: usize, max_den: u64) -> Option<u64> {
    let l = lcm_small(max_den);
    let scaled = r * &Rational::from_integer(l);
    if !scaled.is_integer() {
        return None;
    }
    let want: u128 = scaled.numer().try_into().ok()?;
    #[allow(clippy::too_many_arguments)]
    fn walk(next: u64, max_den: u64, left: usize, sum: u128, want: u128, l: u128, top: u64, best: &mut Option<u64>) {
        if left == 0 {
            if sum == want && best.is_none_or(|b| top < b) {
                *best = Some(top);
            }
            return;
        }
        for d in next..=max_den {
            let s = sum + l / d as u128;
            if s > want {
                continue;
            }
            walk(d + 1, max_den, left - 1, s, want, l, d, best);
        }
    }
    let mut best = None;
    walk(1, max_den, t, 0, want, l, 0, &mut best);
    best
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Dickman's function from `ρ(u) = ρ(k) − ∫_k^u ρ(t−1)/t dt` on each unit
/// interval `[k, k+1]`, evaluated by nested Simpson quadrature.
pub fn rho_oracle(u: f64) -> f64 {
    if u <= 1.0 {
        return 1.0;
    }
    if u <= 2.0 {
        return 1.0 - u.ln();
    }
    let k = u.ceil() - 1.0;
    rho_oracle(k) - simpson(&|t| rho_oracle(t - 1.0) / t, k, u, 64)
}

/// Direct count of coprime `(m, n)` with `m, n < x` and `mn ≡ −1 (mod k)`.
pub fn brute_kloosterman(k: u64, x: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut count = 0;
    for m in 1..x {
        for n in 1..x {
            if gcd(m, n) == 1 && (m * n + 1) % k == 0 {
                count += 1;
            }
        }
    }
    count
}

/// `Σ 1/d = target`, checked with plain big-integer arithmetic: over the
/// lcm `λ` of the denominators, `Σ λ/d` must equal `λ·target`.
pub fn brute_sum_check(dens: &[u64], target: &Rational) -> bool {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let lambda = dens
        .iter()
        .fold(BigInt::from(1u32), |acc, &d| acc.lcm(&BigInt::from(d)));
    let sum: BigInt = dens.iter().map(|&d| &lambda / d).sum();
    // target = a/b, so the check is sum·b = λ·a
    sum * target.denom() == lambda * target.numer()
}
