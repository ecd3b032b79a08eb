//! Recursive builders: the small-prime-power recursion, the descent over
//! large prime powers, and their composition into a dense representation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::arith::{self, lcm_upto, prime_powers_upto, unit_fraction_sum, PrimePower, Rational, Sieve};
use crate::error::{Error, Result};
use crate::identities::{multi_split, DenominatorSet, Representation};
use crate::lemmas::{clear_large_within, clear_medium, clear_small, q_coefficient, BiglemParams};

/// Which lemma produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Medium,
    Small,
    Large,
    Skip,
}

/// Whether a step's set is subtracted from or added to the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Subtract,
    Add,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub index: usize,
    pub q: PrimePower,
    pub kind: StepKind,
    pub set: DenominatorSet,
    pub residual_after: Rational,
}

/// The sequence `a_i/b_i` of a recursive construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub direction: Direction,
    pub initial: Rational,
    pub steps: Vec<TraceStep>,
    pub final_residual: Rational,
}

impl ConstructionTrace {
    fn new(direction: Direction, initial: Rational) -> Self {
        ConstructionTrace {
            direction,
            final_residual: initial.clone(),
            initial,
            steps: Vec::new(),
        }
    }

    fn push(&mut self, index: usize, q: PrimePower, kind: StepKind, set: DenominatorSet) {
        let sum = set.reciprocal_sum();
        let next = match self.direction {
            Direction::Subtract => &self.final_residual - &sum,
            Direction::Add => &self.final_residual + &sum,
        };
        self.final_residual = next.clone();
        self.steps.push(TraceStep {
            index,
            q,
            kind,
            set,
            residual_after: next,
        });
    }

    /// Steps that contributed at least one denominator.
    pub fn fired(&self) -> impl Iterator<Item = &TraceStep> {
        self.steps.iter().filter(|s| !s.set.is_empty())
    }

    /// Union of all step sets.
    pub fn used(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self
            .steps
            .iter()
            .flat_map(|s| s.set.as_slice().iter().copied())
            .collect();
        v.sort_unstable();
        v
    }

    /// Exact re-check of the telescoping identity, the `P*(n) = q_i` tags,
    /// pairwise disjointness and the strictly decreasing `P*` chain.
    pub fn verify(&self) -> std::result::Result<(), String> {
        let mut prev = self.initial.clone();
        let mut seen = BTreeSet::new();
        for s in &self.steps {
            let sum = s.set.reciprocal_sum();
            let expect = match self.direction {
                Direction::Subtract => &prev - &sum,
                Direction::Add => &prev + &sum,
            };
            if expect != s.residual_after {
                return Err(format!("telescoping fails at step {}", s.index));
            }
            for &n in &s.set {
                if arith::p_star(n).q != s.q.q {
                    return Err(format!("P*({n}) != {} at step {}", s.q.q, s.index));
                }
                if !seen.insert(n) {
                    return Err(format!("{n} appears in two steps"));
                }
            }
            if arith::p_star_big(&s.residual_after.denom_unsigned()).q >= s.q.q {
                return Err(format!("P* did not drop below {} at step {}", s.q.q, s.index));
            }
            prev = s.residual_after.clone();
        }
        if prev != self.final_residual {
            return Err("final residual disagrees with the last step".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionPolicy {
    /// Drop colliding elements from the ambient set and rebuild.
    RemoveFromAmbient,
    Fail,
}

/// Parameters of the descent and of the dense builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    /// Lower endpoint of the ambient interval as a fraction of `x`.
    /// `None`: `e^{-r}` in [`represent_big`], a scan in
    /// [`dense_representation`].
    pub alpha: Option<f64>,
    /// Lower endpoint for the clearing sets; `None` uses `alpha`.
    pub xi: Option<f64>,
    pub eta: f64,
    /// Padding elements satisfy `P*(n) ≤ x^epsilon`.
    pub epsilon: f64,
    /// Ambient elements satisfy `P*(n) ≤ x log^{-smooth_exp} x`.
    pub smooth_exp: f64,
    /// The descent stops at the largest prime power `≤` this bound;
    /// `None` uses `x^epsilon`.
    pub descent_floor: Option<f64>,
    /// Lower end of the window the residual must land in; `None` means
    /// `1/log x`.
    pub residual_floor: Option<f64>,
    pub biglem: BiglemParams,
    pub collision: CollisionPolicy,
    pub collision_iterations: usize,
    /// Most ambient lower endpoints tried when `alpha` is scanned.
    pub alpha_scan_limit: usize,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        ConstructionParams {
            alpha: None,
            xi: None,
            eta: 0.2,
            epsilon: 0.2,
            smooth_exp: 1.0,
            descent_floor: None,
            residual_floor: None,
            biglem: BiglemParams::default(),
            collision: CollisionPolicy::RemoveFromAmbient,
            collision_iterations: 10,
            alpha_scan_limit: 600,
        }
    }
}

impl ConstructionParams {
    /// The paper's exponent 22 and `x^{1/5}`; only meaningful for
    /// astronomically large `x`.
    pub fn literal() -> Self {
        ConstructionParams {
            smooth_exp: 22.0,
            biglem: BiglemParams::literal(),
            ..Default::default()
        }
    }

    pub fn smooth_bound(&self, x: f64) -> f64 {
        x * x.ln().powf(-self.smooth_exp)
    }
}

/// Output of [`represent_small`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallConstruction {
    pub representation: Representation,
    pub trace: ConstructionTrace,
    pub y: f64,
    pub z: usize,
    pub z_prime: usize,
    /// `m = 2z − |S'|` used in the telescoping fix-up.
    pub padded_by: u64,
    /// Whether `a/b > 1/log y` held (the asymptotic argument needs it;
    /// the builder verifies the outcome instead).
    pub above_log_bound: bool,
    pub max_bound_ok: bool,
    /// `(Σ_{i ≤ z'} (p_i − 1)/L(q_i), 1 − 1/L(q_{z'}))` when every small
    /// step fired.
    pub telescoping: Option<(Rational, Rational)>,
}

/// `Σ_{i ≤ k} (p_i − 1)/L(q_i)` and `1 − 1/L(q_k)` over the first `k`
/// prime powers.
pub fn small_telescoping_sum(k: usize) -> (Rational, Rational) {
    let mut qs = Vec::new();
    let mut bound = 4.0;
    while qs.len() < k {
        qs = prime_powers_upto(bound);
        bound *= 2.0;
    }
    qs.truncate(k);
    let mut sum = Rational::zero();
    for q in &qs {
        let l = Rational::from_integer(lcm_upto(q.q as f64));
        sum += &(Rational::from_integer(q.p - 1) / l);
    }
    let last = qs.last().map(|q| q.q).unwrap_or(1);
    let expected = Rational::one() - Rational::from_integer(lcm_upto(last as f64)).recip();
    (sum, expected)
}

/// `a/b` as a sum of exactly `2π*(y)` distinct unit fractions whose
/// denominators are at most about `2y⁴`.
pub fn represent_small(ab: &Rational, y: f64) -> Result<SmallConstruction> {
    if !(ab.is_positive() && ab < &Rational::one()) {
        return Err(Error::PreconditionViolated(format!("need 0 < a/b < 1, got {ab}")));
    }
    let star = arith::p_star_big(&ab.denom_unsigned());
    if (star.q as f64) > y {
        return Err(Error::PreconditionViolated(format!(
            "P*(b) = {} exceeds y = {y}",
            star.q
        )));
    }
    let qs = prime_powers_upto(y);
    let z = qs.len();
    // Lemma medlem needs q ≥ 4, so q = 2, 3 always go through clear_small.
    let z_prime = arith::prime_power_count(y.ln()).max(2).min(z);
    let mut trace = ConstructionTrace::new(Direction::Subtract, ab.clone());
    let mut all_small_fired = true;
    for i in (1..=z).rev() {
        let q = qs[i - 1];
        let current = trace.final_residual.clone();
        if i > z_prime {
            let u = clear_medium(q, &current)?;
            trace.push(i, q, StepKind::Medium, u);
        } else if q_coefficient(&current, q)?.is_some() {
            let n = clear_small(&current)?;
            trace.push(i, q, StepKind::Small, DenominatorSet::from_vec(vec![n])?);
        } else {
            all_small_fired = false;
            trace.push(i, q, StepKind::Skip, DenominatorSet::new());
        }
    }
    if !trace.final_residual.is_zero() {
        return Err(Error::ResidualNonzero(trace.final_residual.clone()));
    }
    let s_prime = trace.used();
    let m = (2 * z - s_prime.len()) as u64;
    let dens = if m > 0 {
        let n = *s_prime.last().expect("a positive target needs a denominator");
        let mut v: Vec<u64> = s_prime[..s_prime.len() - 1].to_vec();
        v.extend(multi_split(n, m)?.into_vec());
        v
    } else {
        s_prime
    };
    let representation = Representation::new(ab.clone(), dens)?;
    debug_assert_eq!(representation.len(), 2 * z);
    let max_bound_ok = representation.largest().is_none_or(|n| n as f64 <= 2.0 * y.powi(4));
    let telescoping = (all_small_fired && z_prime > 0).then(|| small_telescoping_sum(z_prime));
    Ok(SmallConstruction {
        representation,
        trace,
        y,
        z,
        z_prime,
        padded_by: m,
        above_log_bound: ab.to_f64() > 1.0 / y.ln(),
        max_bound_ok,
        telescoping,
    })
}

/// Output of [`represent_big`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigConstruction {
    /// `R = R' ∪ R''`.
    pub set: DenominatorSet,
    /// `r − Σ_{n ∈ R} 1/n`.
    pub residual: Rational,
    pub trace: ConstructionTrace,
    pub alpha: f64,
    pub smooth_bound: f64,
    /// `q_{z'}`, the last prime power visited by the descent.
    pub floor: u64,
    pub ambient_size: usize,
    pub removed: usize,
    pub padding: DenominatorSet,
}

/// How `R''` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Padding {
    Exact(usize),
    /// As many as keep the residual at or above the floor, largest first.
    Greedy,
}

/// `(lo, hi)` for the target cardinality, from `|R'| ≈ (1−α)x(1 − e·llx/lx)`
/// and an overshoot of at most `4α log(1/α) x llx/lx`.
pub fn cardinality_window(x: f64, alpha: f64, smooth_exp: f64) -> (f64, f64) {
    let lx = x.ln();
    let llx = lx.ln();
    let lo = (1.0 - alpha) * x - smooth_exp * (1.0 - alpha) * x * llx / lx;
    let hi = lo + 4.0 * alpha * (1.0 / alpha).ln() * x * llx / lx;
    (lo.max(0.0), hi)
}

/// `R ⊆ [αx/2, x]` of size `R` with `r − Σ 1/n` smooth and in
/// `(1/log x, 1)`. `target_size = None` pads greedily instead.
pub fn represent_big(
    r: &Rational,
    x: f64,
    target_size: Option<usize>,
    params: &ConstructionParams,
) -> Result<BigConstruction> {
    let alpha = params.alpha.unwrap_or_else(|| (-r.to_f64()).exp());
    if let Some(size) = target_size {
        let (lo, hi) = cardinality_window(x, alpha, params.smooth_exp);
        if (size as f64) < lo || (size as f64) > hi {
            return Err(Error::PreconditionViolated(format!(
                "R = {size} outside [{lo:.1}, {hi:.1}]"
            )));
        }
    }
    let padding = target_size.map_or(Padding::Greedy, Padding::Exact);
    let ctx = BigContext::new(x, params)?;
    let out = ctx.run(r, alpha, padding, &BTreeSet::new())?;
    let floor = params.residual_floor.unwrap_or(1.0 / x.ln());
    let v = out.residual.to_f64();
    if !(v > floor && v < 1.0) {
        return Err(Error::InfeasibleAtScale {
            stage: "residual".into(),
            diagnostic: format!("residual {} ≈ {v:.4} outside ({floor:.4}, 1)", out.residual),
        });
    }
    Ok(out)
}

/// Shared tables for repeated descents at one scale.
struct BigContext<'a> {
    x: f64,
    xn: u64,
    params: &'a ConstructionParams,
    p_star: Vec<u64>,
    smooth_bound: f64,
    /// Prime powers visited by the descent, decreasing.
    descent: Vec<PrimePower>,
    pad_bound: f64,
}

impl<'a> BigContext<'a> {
    fn new(x: f64, params: &'a ConstructionParams) -> Result<Self> {
        if !(x >= 2.0) {
            return Err(Error::PreconditionViolated(format!("x = {x} too small")));
        }
        let xn = arith::floor_u64(x);
        let smooth_bound = params.smooth_bound(x);
        let floor_value = params.descent_floor.unwrap_or_else(|| x.powf(params.epsilon));
        let floor_q = prime_powers_upto(floor_value).last().map_or(2, |q| q.q);
        let mut descent: Vec<PrimePower> = prime_powers_upto(smooth_bound)
            .into_iter()
            .filter(|q| q.q >= floor_q)
            .collect();
        descent.reverse();
        Ok(BigContext {
            x,
            xn,
            params,
            p_star: Sieve::global().p_star_table(xn),
            smooth_bound,
            descent,
            pad_bound: floor_value,
        })
    }

    fn floor_q(&self) -> u64 {
        self.descent.last().map_or(1, |q| q.q)
    }

    fn run(&self, r: &Rational, alpha: f64, padding: Padding, excluded: &BTreeSet<u64>) -> Result<BigConstruction> {
        if !r.is_positive() {
            return Err(Error::PreconditionViolated(format!("r = {r} must be positive")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::PreconditionViolated(format!(
                "alpha = {alpha} must lie in (0, 1)"
            )));
        }
        let rs = arith::p_star_big(&r.denom_unsigned());
        if rs.q as f64 > self.smooth_bound {
            return Err(Error::PreconditionViolated(format!(
                "P*(den r) = {} exceeds x log^-{} x = {:.2}",
                rs.q, self.params.smooth_exp, self.smooth_bound
            )));
        }
        let lo = arith::ceil_u64(alpha * self.x).max(1);
        let mut ambient: BTreeSet<u64> = (lo..=self.xn)
            .filter(|&n| self.p_star[n as usize] as f64 <= self.smooth_bound && !excluded.contains(&n))
            .collect();
        let ambient_size = ambient.len();
        let a_vec: Vec<u64> = ambient.iter().copied().collect();
        let start = r - &unit_fraction_sum(&a_vec);
        let mut trace = ConstructionTrace::new(Direction::Add, start);
        let xi = self.params.xi.unwrap_or(alpha);
        for (step, &q) in self.descent.iter().enumerate() {
            let index = self.descent.len() - step;
            let current = trace.final_residual.clone();
            if q_coefficient(&current, q)?.is_none() {
                continue;
            }
            let u = clear_large_within(q, &-current, self.x, xi, &self.params.biglem, |n| ambient.contains(&n))
                .map_err(|e| match e {
                    Error::NoSubsetFound { q, pool } => Error::InfeasibleAtScale {
                        stage: "large".into(),
                        diagnostic: format!("no clearing subset for q = {q} (pool {pool})"),
                    },
                    other => other,
                })?;
            for n in &u {
                ambient.remove(n);
            }
            trace.push(index, q, StepKind::Large, u);
        }
        let removed = ambient_size - ambient.len();
        let mut residual = trace.final_residual.clone();
        // R'' from [αx/2, αx), largest first.
        let pad_lo = arith::ceil_u64(alpha * self.x / 2.0).max(1);
        let candidates = (pad_lo..lo)
            .rev()
            .filter(|&n| self.p_star[n as usize] as f64 <= self.pad_bound && !excluded.contains(&n));
        let mut pad = Vec::new();
        match padding {
            Padding::Exact(size) => {
                if size < ambient.len() {
                    return Err(Error::InfeasibleAtScale {
                        stage: "pad".into(),
                        diagnostic: format!("R = {size} is below |R'| = {}", ambient.len()),
                    });
                }
                let need = size - ambient.len();
                pad.extend(candidates.take(need));
                if pad.len() < need {
                    return Err(Error::InfeasibleAtScale {
                        stage: "pad".into(),
                        diagnostic: format!("only {} of {need} padding integers available", pad.len()),
                    });
                }
                for &n in &pad {
                    residual -= &Rational::unit(n);
                }
            }
            Padding::Greedy => {
                let floor = self.params.residual_floor.unwrap_or(0.0);
                for n in candidates {
                    let next = &residual - &Rational::unit(n);
                    if next.to_f64() > floor || (floor == 0.0 && next.is_zero()) {
                        residual = next;
                        pad.push(n);
                    }
                }
            }
        }
        let mut all: Vec<u64> = ambient.into_iter().collect();
        all.extend(pad.iter().copied());
        Ok(BigConstruction {
            set: DenominatorSet::from_vec(all)?,
            residual,
            trace,
            alpha,
            smooth_bound: self.smooth_bound,
            floor: self.floor_q(),
            ambient_size,
            removed,
            padding: DenominatorSet::from_vec(pad)?,
        })
    }
}

/// Summary of a dense construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseReport {
    pub r: Rational,
    pub x: f64,
    pub size: usize,
    pub density: f64,
    /// `1 − e^{−r}`.
    pub main_term: f64,
    /// `(1 − e^{−r}) − |E|/x`.
    pub gap: f64,
    pub alpha: f64,
    pub y: f64,
    pub smooth_exp: f64,
    pub big_count: usize,
    pub removed: usize,
    pub padding: usize,
    pub small_count: usize,
    pub collisions: usize,
    pub attempts: usize,
    /// Constants used in place of the asymptotic ones.
    pub deviations: Vec<String>,
}

/// The big-stage/small-stage composition: a representation of `r` with
/// every denominator at most `x` and as many terms as the scan finds.
pub fn dense_representation(
    r: &Rational,
    x: f64,
    params: &ConstructionParams,
) -> Result<(Representation, DenseReport)> {
    if !r.is_positive() {
        return Err(Error::PreconditionViolated(format!("r = {r} must be positive")));
    }
    let y = (x / 2.0).powf(0.25);
    let mut stage_params = params.clone();
    stage_params.descent_floor = Some(params.descent_floor.unwrap_or(y));
    stage_params.residual_floor = Some(params.residual_floor.unwrap_or(0.0));
    let y = stage_params.descent_floor.unwrap().max(y);
    let ctx = BigContext::new(x, &stage_params)?;

    let alphas: Vec<f64> = match params.alpha {
        Some(a) => vec![a],
        None => {
            let top = arith::ceil_u64((-r.to_f64()).exp() * x).min(ctx.xn);
            (0..params.alpha_scan_limit as u64)
                .map_while(|k| top.checked_sub(k).filter(|&n| n >= 2))
                .map(|n| (n as f64 - 0.5) / x)
                .collect()
        }
    };

    let mut best: Option<(Representation, DenseReport)> = None;
    let mut last_err = None;
    let mut attempts = 0;
    for &alpha in &alphas {
        attempts += 1;
        match dense_once(r, x, y, alpha, &ctx, &stage_params) {
            Ok((rep, mut report)) => {
                report.attempts = attempts;
                if best.as_ref().is_none_or(|(b, _)| rep.len() > b.len()) {
                    best = Some((rep, report));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((rep, mut report)) => {
            report.attempts = attempts;
            Ok((rep, report))
        }
        None => Err(match last_err {
            Some(e @ Error::InfeasibleAtScale { .. }) => e,
            Some(e) => Error::InfeasibleAtScale {
                stage: "dense".into(),
                diagnostic: format!("no ambient endpoint succeeded; last error: {e}"),
            },
            None => Error::InfeasibleAtScale {
                stage: "dense".into(),
                diagnostic: "no ambient endpoint to try".into(),
            },
        }),
    }
}

fn dense_once(
    r: &Rational,
    x: f64,
    y: f64,
    alpha: f64,
    ctx: &BigContext<'_>,
    params: &ConstructionParams,
) -> Result<(Representation, DenseReport)> {
    let mut excluded = BTreeSet::new();
    let mut collisions = 0;
    for _ in 0..=params.collision_iterations {
        let big = ctx.run(r, alpha, Padding::Greedy, &excluded)?;
        if big.residual.is_negative() || big.residual >= Rational::one() {
            return Err(Error::InfeasibleAtScale {
                stage: "residual".into(),
                diagnostic: format!("residual {} outside [0, 1)", big.residual),
            });
        }
        let small = if big.residual.is_zero() {
            Vec::new()
        } else {
            represent_small(&big.residual, y)?.representation.denominators
        };
        let clash: Vec<u64> = small.iter().copied().filter(|n| big.set.contains(*n)).collect();
        if !clash.is_empty() {
            if params.collision == CollisionPolicy::Fail {
                return Err(Error::InfeasibleAtScale {
                    stage: "collision".into(),
                    diagnostic: format!("small-stage denominators {clash:?} already used"),
                });
            }
            collisions += clash.len();
            excluded.extend(clash);
            continue;
        }
        let small_count = small.len();
        let mut dens = big.set.clone().into_vec();
        dens.extend(small);
        let rep = Representation::new(r.clone(), dens)?;
        if rep.largest().is_some_and(|n| n as f64 > x) {
            return Err(Error::InfeasibleAtScale {
                stage: "small".into(),
                diagnostic: format!("denominator {} exceeds x", rep.largest().unwrap_or(0)),
            });
        }
        let main_term = 1.0 - (-r.to_f64()).exp();
        let density = rep.len() as f64 / x;
        let mut deviations = Vec::new();
        if params.smooth_exp != 22.0 {
            deviations.push(format!("ambient smoothness x log^-{} x (paper: 22)", params.smooth_exp));
        }
        deviations.push(format!("descent floor {} (paper: x^(1/5))", ctx.floor_q()));
        deviations.push(format!("ambient endpoint alpha = {alpha:.4} (paper: e^-r)"));
        let report = DenseReport {
            r: r.clone(),
            x,
            size: rep.len(),
            density,
            main_term,
            gap: main_term - density,
            alpha,
            y,
            smooth_exp: params.smooth_exp,
            big_count: big.set.len(),
            removed: big.removed,
            padding: big.padding.len(),
            small_count,
            collisions,
            attempts: 0,
            deviations,
        };
        return Ok((rep, report));
    }
    Err(Error::InfeasibleAtScale {
        stage: "collision".into(),
        diagnostic: format!("collisions persisted after {} rebuilds", params.collision_iterations),
    })
}
