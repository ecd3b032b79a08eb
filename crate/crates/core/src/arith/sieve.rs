use std::sync::OnceLock;

/// Smallest-prime-factor table up to a fixed bound.
///
/// Built once, read-only afterwards. Numbers past the bound are factored by
/// trial division against the table's primes (and then incrementally past
/// the square of the bound).
#[derive(Debug, Clone)]
pub struct Sieve {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u64>,
}

pub const DEFAULT_SIEVE_LIMIT: u64 = 1_000_000;

impl Sieve {
    pub fn new(limit: u64) -> Self {
        let limit = limit.max(2);
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u64);
            }
            let si = spf[i];
            for &p in &primes {
                let m = p as usize * i;
                if p as u32 > si || m > n {
                    break;
                }
                spf[m] = p as u32;
            }
        }
        Sieve { limit, spf, primes }
    }

    /// Shared sieve up to [`DEFAULT_SIEVE_LIMIT`].
    pub fn global() -> &'static Sieve {
        static SIEVE: OnceLock<Sieve> = OnceLock::new();
        SIEVE.get_or_init(|| Sieve::new(DEFAULT_SIEVE_LIMIT))
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `≤ n`, from the table.
    pub fn primes_upto(&self, n: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= n);
        &self.primes[..end]
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n < 2 {
            return false;
        }
        if n <= self.limit {
            return self.spf[n as usize] as u64 == n;
        }
        self.smallest_factor(n) == n
    }

    /// Smallest prime factor of `n ≥ 2`.
    pub fn smallest_factor(&self, n: u64) -> u64 {
        debug_assert!(n >= 2);
        if n <= self.limit {
            return self.spf[n as usize] as u64;
        }
        for &p in &self.primes {
            if p.saturating_mul(p) > n {
                return n;
            }
            if n.is_multiple_of(p) {
                return p;
            }
        }
        // Past the square of the table: plain odd trial division.
        let mut d = self.limit + 1 + (self.limit % 2);
        while d.saturating_mul(d) <= n {
            if n.is_multiple_of(d) {
                return d;
            }
            d += 2;
        }
        n
    }

    /// Prime factorization as (prime, exponent) pairs with increasing primes.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        assert!(n >= 1, "factor(0) is undefined");
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.smallest_factor(n);
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    /// Small helper table for counting scans: `P*(n)` for every `n ≤ bound`.
    pub fn p_star_table(&self, bound: u64) -> Vec<u64> {
        let n = bound as usize;
        let mut table = vec![1u64; n + 1];
        for &p in self.primes_upto(bound) {
            let mut q = p;
            loop {
                let mut m = q;
                while m <= bound {
                    if (m / q) % p != 0 && q > table[m as usize] {
                        table[m as usize] = q;
                    }
                    m += q;
                }
                match q.checked_mul(p) {
                    Some(nq) if nq <= bound => q = nq,
                    _ => break,
                }
            }
        }
        if n >= 1 {
            table[0] = 0;
        }
        table
    }

    /// `P(n)` for every `n ≤ bound` (with `P(1) = 1`).
    pub fn p_max_table(&self, bound: u64) -> Vec<u64> {
        let n = bound as usize;
        let mut table = vec![1u64; n + 1];
        for &p in self.primes_upto(bound) {
            let mut m = p;
            while m <= bound {
                table[m as usize] = p;
                m += p;
            }
        }
        if n >= 1 {
            table[0] = 0;
        }
        table
    }
}
