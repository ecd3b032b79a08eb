//! Exhaustive, budget-bounded searches over Egyptian fraction
//! representations.
//!
//! Every search visits candidates in increasing lexicographic order of the
//! (increasing) denominator sequence. A negative answer is only reported
//! when the bounded space was covered completely; running out of budget is
//! always its own outcome.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, lcm_upto_u128, mod_inverse, Rational, Sieve};
use crate::error::{Error, Result};
use crate::identities::Representation;

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub max_denominator: u64,
    pub max_terms: usize,
    pub node_budget: u64,
    /// Seconds.
    pub time_budget: f64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_denominator: 10_000,
            max_terms: 64,
            node_budget: 10_000_000,
            time_budget: 60.0,
        }
    }
}

impl SearchBounds {
    pub fn with_max_denominator(mut self, d: u64) -> Self {
        self.max_denominator = d;
        self
    }

    pub fn with_nodes(mut self, n: u64) -> Self {
        self.node_budget = n;
        self
    }

    fn check(&self) -> Result<()> {
        if self.max_denominator == 0 || self.max_terms == 0 || self.node_budget == 0 || !(self.time_budget > 0.0) {
            return Err(Error::InvalidInput("search bounds must all be positive".into()));
        }
        Ok(())
    }
}

/// Node and wall-clock budget shared by every worker of one search.
#[derive(Debug)]
pub struct Budget {
    nodes: AtomicU64,
    limit: u64,
    deadline: Instant,
    tripped: AtomicBool,
}

/// Why a search stopped early.
#[derive(Debug, Clone, PartialEq)]
enum Halt {
    Budget,
    Fail(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Fail(e)
    }
}

type Step<T> = std::result::Result<T, Halt>;

impl Budget {
    pub fn new(bounds: &SearchBounds) -> Self {
        Budget {
            nodes: AtomicU64::new(0),
            limit: bounds.node_budget,
            deadline: Instant::now() + Duration::from_secs_f64(bounds.time_budget.min(1e9)),
            tripped: AtomicBool::new(false),
        }
    }

    pub fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }

    pub fn exceeded(&self) -> bool {
        self.tripped.load(Ordering::Relaxed)
    }

    fn tick(&self) -> Step<()> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if self.tripped.load(Ordering::Relaxed)
            || n > self.limit
            || (n.is_multiple_of(1024) && Instant::now() > self.deadline)
        {
            self.tripped.store(true, Ordering::Relaxed);
            return Err(Halt::Budget);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Found,
    ExhaustedNoSolution,
    BudgetExceeded,
}

/// One checkpoint of a search, serialized as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub stage: String,
    pub param: serde_json::Value,
    pub nodes: u64,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    /// The optimized quantity (largest denominator, spread, integer).
    pub value: Option<u64>,
    pub witness: Option<Representation>,
    pub nodes: u64,
    pub log: Vec<LogEntry>,
}

impl SearchOutcome {
    pub fn log_jsonl(&self) -> String {
        self.log
            .iter()
            .map(|e| serde_json::to_string(e).expect("log entry serializes") + "\n")
            .collect()
    }
}

struct Logger(Vec<LogEntry>);

impl Logger {
    fn push(&mut self, stage: &str, param: impl Into<serde_json::Value>, nodes: u64, result: &str) {
        self.0.push(LogEntry {
            stage: stage.into(),
            param: param.into(),
            nodes,
            result: result.into(),
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
}

fn big_to_u64(v: &BigInt) -> Option<u64> {
    if v.is_negative() {
        None
    } else {
        v.to_u64()
    }
}

/// Visits every increasing `k`-tuple `d_1 < … < d_k` with
/// `min_d ≤ d_1`, `d_k ≤ max_d` and `Σ 1/d_i = rem`.
///
/// With `k` terms left the smallest denominator `d` obeys
/// `1/d ≤ rem` (strictly when `k ≥ 2`) and `1/d ≥ rem/k`.
fn dfs_fixed(
    rem: &Rational,
    k: usize,
    min_d: u64,
    max_d: Option<u64>,
    stack: &mut Vec<u64>,
    budget: &Budget,
    visit: &mut dyn FnMut(&[u64]) -> Flow,
) -> Step<Flow> {
    budget.tick()?;
    if k == 0 {
        return Ok(if rem.is_zero() { visit(stack) } else { Flow::Continue });
    }
    if !rem.is_positive() {
        return Ok(Flow::Continue);
    }
    if k == 1 {
        if rem.numer().is_one() {
            if let Some(d) = big_to_u64(rem.denom()) {
                if d >= min_d && max_d.is_none_or(|m| d <= m) {
                    stack.push(d);
                    let f = visit(stack);
                    stack.pop();
                    return Ok(f);
                }
            } else {
                return Err(Error::Overflow(format!("denominator {} exceeds u64", rem.denom())).into());
            }
        }
        return Ok(Flow::Continue);
    }
    let inv = rem.recip();
    let lo = big_to_u64(&(inv.floor() + 1u32)).unwrap_or(u64::MAX).max(min_d);
    let hi_big = (&inv * &Rational::from_integer(k as u64)).floor();
    let mut hi = big_to_u64(&hi_big).ok_or_else(|| Error::Overflow(format!("bound {hi_big} exceeds u64")))?;
    if let Some(m) = max_d {
        hi = hi.min(m);
        // k distinct terms no larger than m cannot exceed the top k reciprocals
        if (rem * &Rational::from_integer(m)) < Rational::from_integer(k as u64) {
            return Ok(Flow::Continue);
        }
    }
    let mut d = lo;
    while d <= hi {
        let next = rem - &Rational::unit(d);
        stack.push(d);
        let f = dfs_fixed(&next, k - 1, d + 1, max_d, stack, budget, visit)?;
        stack.pop();
        if f == Flow::Stop {
            return Ok(Flow::Stop);
        }
        d += 1;
    }
    Ok(Flow::Continue)
}

/// Any number of terms, denominators in `[min_d, max_d]`; `tails[i]` is
/// `Σ_{d ≥ min_d + i} 1/d` in floating point (used only with a safety
/// margin).
#[allow(clippy::too_many_arguments)]
fn dfs_free(
    rem: &Rational,
    min_d: u64,
    max_d: u64,
    base: u64,
    tails: &[f64],
    max_terms: usize,
    stack: &mut Vec<u64>,
    budget: &Budget,
    visit: &mut dyn FnMut(&[u64]) -> Flow,
) -> Step<Flow> {
    budget.tick()?;
    if stack.len() >= max_terms {
        return Ok(Flow::Continue);
    }
    let need = rem.to_f64();
    let lo = big_to_u64(&rem.recip().ceil()).unwrap_or(u64::MAX).max(min_d);
    let mut d = lo;
    while d <= max_d {
        if tails[(d - base) as usize] < need * (1.0 - 1e-9) - 1e-300 {
            break;
        }
        let next = rem - &Rational::unit(d);
        stack.push(d);
        let f = if next.is_zero() {
            visit(stack)
        } else {
            dfs_free(&next, d + 1, max_d, base, tails, max_terms, stack, budget, visit)?
        };
        stack.pop();
        if f == Flow::Stop {
            return Ok(Flow::Stop);
        }
        d += 1;
    }
    Ok(Flow::Continue)
}

/// Result of [`enumerate_reps`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub representations: Vec<Representation>,
    /// `false` when the budget cut the stream short.
    pub complete: bool,
    pub nodes: u64,
}

/// Calls `emit` on every representation of `r` with denominators at most
/// `bounds.max_denominator` (and exactly `t` terms when given), in
/// lexicographic order. Returns whether the enumeration completed.
pub fn enumerate_reps_with(
    r: &Rational,
    t: Option<usize>,
    bounds: &SearchBounds,
    mut emit: impl FnMut(Representation) -> bool,
) -> Result<(bool, u64)> {
    bounds.check()?;
    if !r.is_positive() {
        return Err(Error::PreconditionViolated(format!("r = {r} must be positive")));
    }
    let budget = Budget::new(bounds);
    let mut stack = Vec::new();
    let mut failure = None;
    let mut visit = |dens: &[u64]| match Representation::new(r.clone(), dens.to_vec()) {
        Ok(rep) => {
            if emit(rep) {
                Flow::Continue
            } else {
                Flow::Stop
            }
        }
        Err(e) => {
            failure = Some(e);
            Flow::Stop
        }
    };
    let max_d = bounds.max_denominator;
    let res = match t {
        Some(t) => dfs_fixed(r, t, 1, Some(max_d), &mut stack, &budget, &mut visit),
        None => {
            let tails = harmonic_tails(1, max_d);
            dfs_free(
                r,
                1,
                max_d,
                1,
                &tails,
                bounds.max_terms,
                &mut stack,
                &budget,
                &mut visit,
            )
        }
    };
    if let Some(e) = failure {
        return Err(e);
    }
    match res {
        Ok(_) => Ok((true, budget.nodes())),
        Err(Halt::Budget) => Ok((false, budget.nodes())),
        Err(Halt::Fail(e)) => Err(e),
    }
}

/// Collects [`enumerate_reps_with`].
pub fn enumerate_reps(r: &Rational, t: Option<usize>, bounds: &SearchBounds) -> Result<Enumeration> {
    let mut reps = Vec::new();
    let (complete, nodes) = enumerate_reps_with(r, t, bounds, |rep| {
        reps.push(rep);
        true
    })?;
    Ok(Enumeration {
        representations: reps,
        complete,
        nodes,
    })
}

fn harmonic_tails(lo: u64, hi: u64) -> Vec<f64> {
    let n = (hi - lo + 1) as usize;
    let mut tails = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tails[i] = tails[i + 1] + 1.0 / (lo + i as u64) as f64;
    }
    tails
}

/// First `t`-term representation of `r` in canonical order with no bound
/// on the denominators, skipping `{1}`.
fn first_unbounded(r: &Rational, t: usize, budget: &Budget) -> Step<Option<Representation>> {
    let mut stack = Vec::new();
    let mut found = None;
    dfs_fixed(r, t, 1, None, &mut stack, budget, &mut |dens| {
        if dens == [1] {
            return Flow::Continue;
        }
        found = Some(dens.to_vec());
        Flow::Stop
    })?;
    Ok(match found {
        Some(d) => Some(Representation::new(r.clone(), d)?),
        None => None,
    })
}

/// `t₀(r)` with a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TZero {
    pub t: usize,
    pub witness: Representation,
    pub nodes: u64,
}

/// Least `t` admitting a `t`-term representation whose largest denominator
/// is at least 2. Splitting then gives every larger `t`.
pub fn t_zero(r: &Rational, bounds: &SearchBounds) -> Result<TZero> {
    bounds.check()?;
    if !r.is_positive() {
        return Err(Error::PreconditionViolated(format!("r = {r} must be positive")));
    }
    let budget = Budget::new(bounds);
    t_zero_with(r, bounds.max_terms, &budget)?.map_or_else(
        || Err(Error::BudgetExceeded { nodes: budget.nodes() }),
        |(t, witness)| {
            Ok(TZero {
                t,
                witness,
                nodes: budget.nodes(),
            })
        },
    )
}

fn t_zero_with(r: &Rational, max_terms: usize, budget: &Budget) -> Result<Option<(usize, Representation)>> {
    for t in 1..=max_terms {
        match first_unbounded(r, t, budget) {
            Ok(Some(rep)) => return Ok(Some((t, rep))),
            Ok(None) => continue,
            Err(Halt::Budget) => return Err(Error::BudgetExceeded { nodes: budget.nodes() }),
            Err(Halt::Fail(e)) => return Err(e),
        }
    }
    Ok(None)
}

/// Infeasibility check shared by [`m_t`] and [`m_prime_t`]: `Some(outcome)`
/// when `t < t₀(r)` (no admissible `t`-term representation exists).
fn below_t_zero(r: &Rational, t: usize, budget: &Budget, log: &mut Logger) -> Result<Option<SearchOutcome>> {
    if t == 0 {
        return Err(Error::PreconditionViolated("t must be at least 1".into()));
    }
    match t_zero_with(r, t, budget) {
        Ok(Some((t0, _))) => {
            log.push("t_zero", t0, budget.nodes(), "found");
            Ok(None)
        }
        Ok(None) => {
            log.push("t_zero", format!("> {t}"), budget.nodes(), "exhausted");
            Ok(Some(SearchOutcome {
                status: SearchStatus::ExhaustedNoSolution,
                value: None,
                witness: None,
                nodes: budget.nodes(),
                log: std::mem::take(&mut log.0),
            }))
        }
        Err(Error::BudgetExceeded { .. }) => Ok(Some(budget_outcome(budget, log))),
        Err(e) => Err(e),
    }
}

fn budget_outcome(budget: &Budget, log: &mut Logger) -> SearchOutcome {
    log.push("halt", serde_json::Value::Null, budget.nodes(), "budget exceeded");
    SearchOutcome {
        status: SearchStatus::BudgetExceeded,
        value: None,
        witness: None,
        nodes: budget.nodes(),
        log: std::mem::take(&mut log.0),
    }
}

/// `M_t(r)`: the least largest denominator over `t`-term representations,
/// proved minimal by exhausting every smaller candidate.
pub fn m_t(r: &Rational, t: usize, bounds: &SearchBounds) -> Result<SearchOutcome> {
    bounds.check()?;
    if !r.is_positive() {
        return Err(Error::PreconditionViolated(format!("r = {r} must be positive")));
    }
    let budget = Budget::new(bounds);
    let mut log = Logger(Vec::new());
    if let Some(out) = below_t_zero(r, t, &budget, &mut log)? {
        return Ok(out);
    }
    // t terms each at least 1/X force X ≥ t/r.
    let start = big_to_u64(&(Rational::from_integer(t as u64) / r.clone()).ceil())
        .unwrap_or(1)
        .max(1);
    for x in start..=bounds.max_denominator {
        let before = budget.nodes();
        let rest = r - &Rational::unit(x);
        if rest.is_negative() {
            continue;
        }
        let mut stack = Vec::new();
        let mut found = None;
        let res = dfs_fixed(&rest, t - 1, 1, Some(x - 1), &mut stack, &budget, &mut |dens| {
            found = Some(dens.to_vec());
            Flow::Stop
        });
        match res {
            Err(Halt::Budget) => return Ok(budget_outcome(&budget, &mut log)),
            Err(Halt::Fail(e)) => return Err(e),
            Ok(_) => {}
        }
        if let Some(mut dens) = found {
            dens.push(x);
            log.push("largest", x, budget.nodes() - before, "found");
            return Ok(SearchOutcome {
                status: SearchStatus::Found,
                value: Some(x),
                witness: Some(Representation::new(r.clone(), dens)?),
                nodes: budget.nodes(),
                log: log.0,
            });
        }
        log.push("largest", x, budget.nodes() - before, "exhausted");
    }
    Ok(budget_outcome(&budget, &mut log))
}

/// Least spread `x_max − x_min` over `t`-term representations.
pub fn m_prime_t(r: &Rational, t: usize, bounds: &SearchBounds) -> Result<SearchOutcome> {
    bounds.check()?;
    if !r.is_positive() {
        return Err(Error::PreconditionViolated(format!("r = {r} must be positive")));
    }
    let budget = Budget::new(bounds);
    let mut log = Logger(Vec::new());
    if let Some(out) = below_t_zero(r, t, &budget, &mut log)? {
        return Ok(out);
    }
    if t == 1 {
        // t ≥ t₀ and t = 1: r is a unit fraction 1/a with a ≥ 2
        let a = big_to_u64(r.denom()).ok_or_else(|| Error::Overflow("denominator".into()))?;
        return Ok(SearchOutcome {
            status: SearchStatus::Found,
            value: Some(0),
            witness: Some(Representation::new(r.clone(), vec![a])?),
            nodes: budget.nodes(),
            log: log.0,
        });
    }
    // smallest denominator a: 1/a < r and 1/a ≥ r/t
    let lo = big_to_u64(&(r.recip().floor() + 1u32)).unwrap_or(1).max(1);
    let hi = big_to_u64(&(Rational::from_integer(t as u64) / r.clone()).floor())
        .ok_or_else(|| Error::Overflow("t/r".into()))?;
    for s in (t as u64 - 1)..=bounds.max_denominator {
        let before = budget.nodes();
        for a in lo..=hi {
            let b = a + s;
            let rest = r - &Rational::unit(a) - Rational::unit(b);
            if rest.is_negative() {
                continue;
            }
            let mut stack = vec![a];
            let mut found = None;
            let res = dfs_fixed(&rest, t - 2, a + 1, Some(b - 1), &mut stack, &budget, &mut |dens| {
                found = Some(dens.to_vec());
                Flow::Stop
            });
            match res {
                Err(Halt::Budget) => return Ok(budget_outcome(&budget, &mut log)),
                Err(Halt::Fail(e)) => return Err(e),
                Ok(_) => {}
            }
            if let Some(mut dens) = found {
                dens.push(b);
                log.push("spread", s, budget.nodes() - before, "found");
                return Ok(SearchOutcome {
                    status: SearchStatus::Found,
                    value: Some(s),
                    witness: Some(Representation::new(r.clone(), dens)?),
                    nodes: budget.nodes(),
                    log: log.0,
                });
            }
        }
        log.push("spread", s, budget.nodes() - before, "exhausted");
    }
    Ok(budget_outcome(&budget, &mut log))
}

// ---------------------------------------------------------------------------
// Subset searches over denominators below a bound, scaled by L = lcm(1..x).

/// One choice group: exactly one option is taken.
#[derive(Debug, Clone)]
struct Group {
    /// `(scaled weight, members)`, heaviest first.
    options: Vec<(u128, Vec<u64>)>,
}

fn scale(n: u64, l: u128) -> u128 {
    l / n as u128
}

fn lcm_scale(x: u64) -> Result<u128> {
    lcm_upto_u128(x).ok_or_else(|| Error::Overflow(format!("lcm(1..{x}) exceeds 128 bits")))
}

/// Groups for the exact target `T` (scaled by `l`): each prime `p` with
/// `p² > max(items)` forms one group whose options are the subsets `W` of
/// its cofactors with `Σ w̄ ≡ T·(l/p)^{-1} (mod p)`; all other items are
/// free.
fn exact_groups(items: &[u64], l: u128, target: u128) -> Result<Vec<Group>> {
    let top = items.iter().copied().max().unwrap_or(1);
    let mut groups = Vec::new();
    let mut used = vec![false; items.len()];
    let sieve = Sieve::global();
    for &p in sieve.primes_upto(top) {
        if p.saturating_mul(p) <= top {
            continue;
        }
        let members: Vec<(usize, u64)> = items
            .iter()
            .enumerate()
            .filter(|(_, &n)| n % p == 0)
            .map(|(i, &n)| (i, n))
            .collect();
        let lp = ((l / p as u128) % p as u128) as u64;
        // the residue argument needs p to divide l exactly once
        if members.is_empty() || lp == 0 {
            continue;
        }
        for &(i, _) in &members {
            used[i] = true;
        }
        let need = ((target % p as u128) as u64 * mod_inverse(lp as i64, p)? as u64) % p;
        let invs: Vec<u64> = members
            .iter()
            .map(|&(_, n)| mod_inverse((n / p) as i64, p))
            .collect::<Result<_>>()?;
        let mut options = Vec::new();
        for mask in 0u64..(1 << members.len()) {
            let mut res = 0;
            let mut weight = 0u128;
            let mut set = Vec::new();
            for (k, &(_, n)) in members.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    res = (res + invs[k]) % p;
                    weight += scale(n, l);
                    set.push(n);
                }
            }
            if res == need {
                options.push((weight, set));
            }
        }
        options.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        groups.push(Group { options });
    }
    for (i, &n) in items.iter().enumerate() {
        if !used[i] {
            groups.push(Group {
                options: vec![(scale(n, l), vec![n]), (0, vec![])],
            });
        }
    }
    // Heaviest groups first for pruning.
    groups.sort_by(|a, b| {
        let wa = a.options.first().map_or(0, |o| o.0);
        let wb = b.options.first().map_or(0, |o| o.0);
        wb.cmp(&wa)
    });
    Ok(groups)
}

fn free_groups(items: &[u64], l: u128) -> Vec<Group> {
    let mut groups: Vec<Group> = items
        .iter()
        .map(|&n| Group {
            options: vec![(scale(n, l), vec![n]), (0, vec![])],
        })
        .collect();
    groups.sort_by(|a, b| b.options[0].0.cmp(&a.options[0].0));
    groups
}

/// Visits every choice with total weight in `[lo, hi]`.
#[allow(clippy::too_many_arguments)]
fn group_dfs(
    groups: &[Group],
    suffix_max: &[u128],
    i: usize,
    sum: u128,
    lo: u128,
    hi: u128,
    chosen: &mut Vec<u64>,
    budget: &Budget,
    visit: &mut dyn FnMut(&[u64], u128) -> Step<Flow>,
) -> Step<Flow> {
    budget.tick()?;
    if sum > hi || sum + suffix_max[i] < lo {
        return Ok(Flow::Continue);
    }
    if i == groups.len() {
        return visit(chosen, sum);
    }
    for (w, members) in &groups[i].options {
        let len = chosen.len();
        chosen.extend_from_slice(members);
        let f = group_dfs(groups, suffix_max, i + 1, sum + w, lo, hi, chosen, budget, visit)?;
        chosen.truncate(len);
        if f == Flow::Stop {
            return Ok(Flow::Stop);
        }
    }
    Ok(Flow::Continue)
}

fn run_groups(
    groups: &[Group],
    lo: u128,
    hi: u128,
    budget: &Budget,
    visit: &mut dyn FnMut(&[u64], u128) -> Step<Flow>,
) -> Step<Flow> {
    let mut suffix_max = vec![0u128; groups.len() + 1];
    for i in (0..groups.len()).rev() {
        suffix_max[i] = suffix_max[i + 1] + groups[i].options.iter().map(|o| o.0).max().unwrap_or(0);
    }
    let mut chosen = Vec::new();
    group_dfs(groups, &suffix_max, 0, 0, lo, hi, &mut chosen, budget, visit)
}

/// Outcome of an `L_j` membership decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LjStatus {
    /// `x` can never be the `j`-th largest denominator (proved by
    /// exhaustion).
    Member,
    /// A representation with `x` in position `j` exists (witness attached).
    NonMember,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjDecision {
    pub x: u64,
    pub status: LjStatus,
    pub witness: Option<Representation>,
    pub nodes: u64,
}

/// Decides whether `x ∈ L_j(r)`.
///
/// The terms below `x` range over subsets of `(1/r, x)`; for each subset
/// the remainder must be a sum of exactly `j − 1` distinct unit fractions
/// with denominators above `x` (a single unit fraction when `j = 2`, the
/// classical bounded recursion when `j ≥ 3`, nothing when `j = 1`).
pub fn lj_member(r: &Rational, j: usize, x: u64, bounds: &SearchBounds) -> Result<LjDecision> {
    bounds.check()?;
    let budget = Budget::new(bounds);
    lj_member_with(r, j, x, &budget)
}

fn lj_member_with(r: &Rational, j: usize, x: u64, budget: &Budget) -> Result<LjDecision> {
    if j == 0 {
        return Err(Error::PreconditionViolated("j must be at least 1".into()));
    }
    if !r.is_positive() || Rational::from_integer(x) <= r.recip() {
        return Err(Error::PreconditionViolated(format!("need x > 1/r (x = {x}, r = {r})")));
    }
    let decided = |status, witness, budget: &Budget| LjDecision {
        x,
        status,
        witness,
        nodes: budget.nodes(),
    };
    let l = lcm_scale(x)?;
    let lo_d = big_to_u64(&(r.recip().floor() + 1u32)).unwrap_or(u64::MAX);
    let items: Vec<u64> = (lo_d..x).collect();
    let base = r - &Rational::unit(x);
    if base.is_negative() || (base.is_zero() && j > 1) {
        return Ok(decided(LjStatus::Member, None, budget));
    }
    let scaled = |v: &Rational| -> Rational { v * &Rational::from_integer(BigInt::from(l)) };
    let mut witness: Option<Vec<u64>> = None;
    let res = if j == 1 {
        let t = scaled(&base);
        if !t.is_integer() {
            // No sum of 1/d with d < x has this denominator.
            return Ok(decided(LjStatus::Member, None, budget));
        }
        let target = t
            .numer()
            .to_u128()
            .ok_or_else(|| Error::Overflow("scaled target".into()))?;
        let groups = exact_groups(&items, l, target)?;
        run_groups(&groups, target, target, budget, &mut |chosen, _| {
            let mut d = chosen.to_vec();
            d.push(x);
            witness = Some(d);
            Ok(Flow::Stop)
        })
    } else {
        // remainder s = base − S/l must lie in (0, Σ_{i<j} 1/(x+i)]
        let cap: Rational = (1..j as u64).map(|i| Rational::unit(x + i)).sum();
        let hi_r = scaled(&base);
        let hi = if hi_r.is_integer() {
            hi_r.floor() - 1
        } else {
            hi_r.floor()
        };
        let lo_r = scaled(&(&base - &cap));
        let lo = if lo_r.is_negative() {
            BigInt::zero()
        } else {
            lo_r.ceil()
        };
        if hi.is_negative() {
            return Ok(decided(LjStatus::Member, None, budget));
        }
        let lo = lo.to_u128().ok_or_else(|| Error::Overflow("window".into()))?;
        let hi = hi.to_u128().ok_or_else(|| Error::Overflow("window".into()))?;
        let groups = free_groups(&items, l);
        let lr = Rational::from_integer(BigInt::from(l));
        run_groups(&groups, lo, hi, budget, &mut |chosen, sum| {
            let s = &base - &(Rational::from_integer(BigInt::from(sum)) / lr.clone());
            let mut above = Vec::new();
            let f = dfs_fixed(&s, j - 1, x + 1, None, &mut above, budget, &mut |dens| {
                let mut d = chosen.to_vec();
                d.push(x);
                d.extend_from_slice(dens);
                witness = Some(d);
                Flow::Stop
            })?;
            Ok(f)
        })
    };
    match res {
        Ok(_) => match witness {
            Some(d) => {
                let rep = Representation::new(r.clone(), d)?;
                Ok(decided(LjStatus::NonMember, Some(rep), budget))
            }
            None => Ok(decided(LjStatus::Member, None, budget)),
        },
        Err(Halt::Budget) => Ok(decided(LjStatus::Unknown, None, budget)),
        Err(Halt::Fail(e)) => Err(e),
    }
}

/// Nesting comparison of two decided slices over the same range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestingCheck {
    pub outer_j: usize,
    pub inner_j: usize,
    /// `None` when some point is undecided in one of the slices.
    pub holds: Option<bool>,
    /// Members of the inner slice that the outer slice decided as
    /// non-members.
    pub violations: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjSlice {
    pub r: Rational,
    pub j: usize,
    pub lo: u64,
    pub hi: u64,
    pub decisions: Vec<LjDecision>,
    /// Against the `j − 1` slice when `j ≥ 2`.
    pub nesting: Option<NestingCheck>,
}

impl LjSlice {
    pub fn members(&self) -> Vec<u64> {
        self.decisions
            .iter()
            .filter(|d| d.status == LjStatus::Member)
            .map(|d| d.x)
            .collect()
    }

    pub fn unknown(&self) -> Vec<u64> {
        self.decisions
            .iter()
            .filter(|d| d.status == LjStatus::Unknown)
            .map(|d| d.x)
            .collect()
    }

    pub fn all_decided(&self) -> bool {
        self.decisions.iter().all(|d| d.status != LjStatus::Unknown)
    }
}

/// `inner ⊆ outer` on the points both slices decided.
pub fn check_nesting(outer: &LjSlice, inner: &LjSlice) -> NestingCheck {
    let mut violations = Vec::new();
    let mut undecided = false;
    for d in &inner.decisions {
        let o = outer.decisions.iter().find(|o| o.x == d.x);
        match (d.status, o.map(|o| o.status)) {
            (LjStatus::Unknown, _) | (_, Some(LjStatus::Unknown)) | (_, None) => undecided = true,
            (LjStatus::Member, Some(LjStatus::NonMember)) => violations.push(d.x),
            _ => {}
        }
    }
    NestingCheck {
        outer_j: outer.j,
        inner_j: inner.j,
        holds: if !violations.is_empty() {
            Some(false)
        } else if undecided {
            None
        } else {
            Some(true)
        },
        violations,
    }
}

fn slice_only(r: &Rational, j: usize, lo: u64, hi: u64, bounds: &SearchBounds) -> Result<Vec<LjDecision>> {
    (lo..=hi).into_par_iter().map(|x| lj_member(r, j, x, bounds)).collect()
}

/// [`lj_member`] over `[lo, hi]` (each point with its own budget), plus the
/// nesting check against the `j − 1` slice.
pub fn lj_slice(r: &Rational, j: usize, lo: u64, hi: u64, bounds: &SearchBounds) -> Result<LjSlice> {
    bounds.check()?;
    if lo > hi {
        return Err(Error::InvalidInput(format!("empty range [{lo}, {hi}]")));
    }
    let decisions = slice_only(r, j, lo, hi, bounds)?;
    let slice = LjSlice {
        r: r.clone(),
        j,
        lo,
        hi,
        decisions,
        nesting: None,
    };
    let nesting = if j >= 2 {
        let outer = LjSlice {
            r: r.clone(),
            j: j - 1,
            lo,
            hi,
            decisions: slice_only(r, j - 1, lo, hi, bounds)?,
            nesting: None,
        };
        Some(check_nesting(&outer, &slice))
    } else {
        None
    };
    Ok(LjSlice { nesting, ..slice })
}

/// Largest integer with a representation using distinct denominators
/// `≤ x`, with the comparison value `log x + γ − 4.5 (log log x)²/log x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxIntegerReport {
    pub x: u64,
    pub outcome: SearchOutcome,
    pub harmonic: f64,
    pub comparison: Option<f64>,
}

pub fn max_int_rep(x: u64, bounds: &SearchBounds) -> Result<MaxIntegerReport> {
    bounds.check()?;
    if x == 0 {
        return Err(Error::PreconditionViolated("x must be at least 1".into()));
    }
    let budget = Budget::new(bounds);
    let mut log = Logger(Vec::new());
    let l = lcm_scale(x)?;
    let items: Vec<u64> = (1..=x).collect();
    let total: u128 = items.iter().map(|&n| scale(n, l)).sum();
    let harmonic = (1..=x).map(|n| 1.0 / n as f64).sum();
    let lx = (x as f64).ln();
    let comparison = (x >= 3).then(|| lx + EULER_GAMMA - 4.5 * lx.ln().powi(2) / lx);
    let mut k = (total / l) as u64;
    let outcome = loop {
        if k == 0 {
            unreachable!("{{1}} always represents 1");
        }
        let before = budget.nodes();
        let target = k as u128 * l;
        let groups = exact_groups(&items, l, target)?;
        let mut found = None;
        let res = run_groups(&groups, target, target, &budget, &mut |chosen, _| {
            found = Some(chosen.to_vec());
            Ok(Flow::Stop)
        });
        match res {
            Err(Halt::Budget) => break budget_outcome(&budget, &mut log),
            Err(Halt::Fail(e)) => return Err(e),
            Ok(_) => {}
        }
        if let Some(dens) = found {
            log.push("integer", k, budget.nodes() - before, "found");
            break SearchOutcome {
                status: SearchStatus::Found,
                value: Some(k),
                witness: Some(Representation::new(Rational::from_integer(k), dens)?),
                nodes: budget.nodes(),
                log: std::mem::take(&mut log.0),
            };
        }
        log.push("integer", k, budget.nodes() - before, "exhausted");
        k -= 1;
    };
    Ok(MaxIntegerReport {
        x,
        outcome,
        harmonic,
        comparison,
    })
}

/// Applies the prime-power exclusion: `x` is a prime power, so it can
/// never be the largest denominator of a representation of 1.
pub fn is_prime_power(x: u64) -> bool {
    x >= 2 && arith::PrimePower::from_q(x).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn dens(e: &Enumeration) -> Vec<Vec<u64>> {
        e.representations.iter().map(|r| r.denominators.clone()).collect()
    }

    #[test]
    fn enumerate_examples() {
        let b = SearchBounds::default().with_max_denominator(10);
        assert_eq!(
            dens(&enumerate_reps(&q("1"), Some(3), &b).unwrap()),
            vec![vec![2, 3, 6]]
        );
        assert!(enumerate_reps(&q("1"), Some(2), &SearchBounds::default())
            .unwrap()
            .representations
            .is_empty());
        assert_eq!(dens(&enumerate_reps(&q("1/2"), Some(2), &b).unwrap()), vec![vec![3, 6]]);
        let b6 = SearchBounds::default().with_max_denominator(6);
        assert_eq!(
            dens(&enumerate_reps(&q("1"), None, &b6).unwrap()),
            vec![vec![1], vec![2, 3, 6]]
        );
    }

    #[test]
    fn t_zero_examples() {
        let b = SearchBounds::default();
        assert_eq!(t_zero(&q("1"), &b).unwrap().t, 3);
        assert_eq!(t_zero(&q("1/2"), &b).unwrap().t, 1);
        let t = t_zero(&q("2/3"), &b).unwrap();
        assert_eq!((t.t, t.witness.denominators), (2, vec![2, 6]));
    }

    #[test]
    fn m_t_examples() {
        let b = SearchBounds::default();
        let o = m_t(&q("1"), 3, &b).unwrap();
        assert_eq!((o.status, o.value), (SearchStatus::Found, Some(6)));
        let o = m_t(&q("1"), 4, &b).unwrap();
        assert_eq!(o.value, Some(12));
        assert_eq!(o.witness.unwrap().denominators, vec![2, 4, 6, 12]);
        assert_eq!(m_t(&q("1"), 2, &b).unwrap().status, SearchStatus::ExhaustedNoSolution);
    }

    #[test]
    fn spread_examples() {
        let b = SearchBounds::default();
        let o = m_prime_t(&q("1"), 3, &b).unwrap();
        assert_eq!((o.value, o.witness.unwrap().denominators), (Some(4), vec![2, 3, 6]));
        let o = m_prime_t(&q("1/2"), 2, &b).unwrap();
        assert_eq!((o.value, o.witness.unwrap().denominators), (Some(3), vec![3, 6]));
        assert_eq!(
            m_prime_t(&q("1"), 2, &b).unwrap().status,
            SearchStatus::ExhaustedNoSolution
        );
    }

    #[test]
    fn lj_examples() {
        let b = SearchBounds::default();
        assert_eq!(lj_member(&q("1"), 2, 2, &b).unwrap().status, LjStatus::Member);
        assert_eq!(lj_member(&q("1"), 2, 4, &b).unwrap().status, LjStatus::Member);
        let d = lj_member(&q("1"), 2, 3, &b).unwrap();
        assert_eq!(d.status, LjStatus::NonMember);
        assert_eq!(d.witness.unwrap().denominators, vec![2, 3, 6]);
        assert_eq!(lj_member(&q("7/12"), 3, 4, &b).unwrap().status, LjStatus::Member);
        assert!(lj_member(&q("1"), 1, 1, &b).is_err());
    }

    #[test]
    fn max_int_examples() {
        let b = SearchBounds::default();
        let m = max_int_rep(1, &b).unwrap();
        assert_eq!(m.outcome.value, Some(1));
        let m = max_int_rep(6, &b).unwrap();
        assert_eq!(m.outcome.value, Some(2));
        assert_eq!(m.outcome.witness.unwrap().denominators, vec![1, 2, 3, 6]);
    }

    #[test]
    fn budget_is_reported() {
        let b = SearchBounds::default().with_nodes(5);
        assert_eq!(m_t(&q("1"), 6, &b).unwrap().status, SearchStatus::BudgetExceeded);
        assert_eq!(lj_member(&q("1"), 1, 30, &b).unwrap().status, LjStatus::Unknown);
    }
}
