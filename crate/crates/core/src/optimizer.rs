//! Depth-change selection for occlusion groups and independent pixels.
//!
//! [`dp_optimize`] is the forward dynamic program over the pixels of a
//! group. Each state keeps the backtracking pointer of its best predecessor
//! together with the running product of masses along that stored path, and
//! the cost-to-go of the next stage scales its distortion by that product.
//! When every mass table is uniform the stored products do not depend on the
//! path and the recursion is exact; otherwise it is greedy in the product and
//! [`brute_force`] measures the gap.

use std::str::FromStr;

use rayon::prelude::*;

use crate::cost::{group_cost, group_distortion, group_rate, PixelTables};
use crate::error::{Error, Result};
use crate::occlusion::DepthChangeVector;

pub const DEFAULT_BRUTE_FORCE_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub dv: DepthChangeVector,
    /// Value the optimizer itself reached.
    pub recursion_cost: f64,
    /// Group cost recomputed on `dv`.
    pub true_cost: f64,
    pub rate: f64,
    pub distortion: f64,
}

impl OptimizationResult {
    fn evaluate(tables: &[PixelTables], dv: Vec<i32>, recursion_cost: f64, lambda: f64) -> Self {
        let true_cost = group_cost(tables, &dv, lambda);
        OptimizationResult {
            rate: group_rate(tables, &dv),
            distortion: group_distortion(tables, &dv),
            dv: DepthChangeVector::new(dv),
            recursion_cost,
            true_cost,
        }
    }
}

/// Total bit budget `R_c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateBudget(pub f64);

/// `P(s) * d(s) + lambda * R(s)`.
pub fn stage_cost(t: &PixelTables, state: i32, lambda: f64) -> f64 {
    t.p(state) * t.d(state) + lambda * t.r(state)
}

#[derive(Clone, Copy, Debug)]
struct Node {
    cost: f64,
    rate: f64,
    /// Product of masses along the stored path, this state included.
    prefix: f64,
    back: usize,
}

/// Lower cost wins; exact ties go to the lower rate.
fn improves(cost: f64, rate: f64, best: &Node) -> bool {
    cost < best.cost || (cost == best.cost && rate < best.rate)
}

/// Forward dynamic program over the group pixels, first to winner.
///
/// Ties keep the first state (in increasing depth change) unless a later
/// one has exactly the same cost at a lower rate.
pub fn dp_optimize(tables: &[PixelTables], lambda: f64) -> Result<OptimizationResult> {
    let first = tables.first().ok_or(Error::EmptyGroup)?;
    let mut stages: Vec<Vec<Node>> = Vec::with_capacity(tables.len());
    stages.push(
        first
            .states()
            .map(|s| Node {
                cost: stage_cost(first, s, lambda),
                rate: first.r(s),
                prefix: first.p(s),
                back: usize::MAX,
            })
            .collect(),
    );

    for t in &tables[1..] {
        let prev = stages.last().expect("first stage pushed");
        let next: Vec<Node> = t
            .states()
            .map(|s| {
                let rate_term = lambda * t.r(s);
                // g_k(s) - lambda * R_k(s)
                let synthesis = t.p(s) * t.d(s);
                let mut best = Node {
                    cost: f64::INFINITY,
                    rate: f64::INFINITY,
                    prefix: 0.0,
                    back: 0,
                };
                for (j, from) in prev.iter().enumerate() {
                    let cost = from.cost + from.prefix * synthesis + rate_term;
                    let rate = from.rate + t.r(s);
                    if improves(cost, rate, &best) {
                        best = Node {
                            cost,
                            rate,
                            prefix: from.prefix * t.p(s),
                            back: j,
                        };
                    }
                }
                best
            })
            .collect();
        stages.push(next);
    }

    let last = stages.last().expect("at least one stage");
    let mut at = 0;
    for (i, node) in last.iter().enumerate().skip(1) {
        if improves(node.cost, node.rate, &last[at]) {
            at = i;
        }
    }
    let recursion_cost = last[at].cost;

    let mut dv = vec![0; tables.len()];
    for k in (0..tables.len()).rev() {
        dv[k] = tables[k].candidates.lo() + at as i32;
        at = stages[k][at].back;
    }
    Ok(OptimizationResult::evaluate(tables, dv, recursion_cost, lambda))
}

fn search_space(tables: &[PixelTables]) -> u128 {
    tables.iter().fold(1u128, |acc, t| acc.saturating_mul(t.len() as u128))
}

pub fn brute_force(tables: &[PixelTables], lambda: f64) -> Result<OptimizationResult> {
    brute_force_with_cap(tables, lambda, DEFAULT_BRUTE_FORCE_CAP)
}

/// Exhaustive minimization of the group cost in lexicographic order.
/// Ties keep the first vector found unless a later one has exactly the same
/// cost at a lower rate.
pub fn brute_force_with_cap(
    tables: &[PixelTables],
    lambda: f64,
    cap: u64,
) -> Result<OptimizationResult> {
    if tables.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let size = search_space(tables);
    if size > u128::from(cap) {
        return Err(Error::SearchSpaceTooLarge { size, cap });
    }
    let mut dv: Vec<i32> = tables.iter().map(|t| t.candidates.lo()).collect();
    let mut best = dv.clone();
    let mut best_cost = f64::INFINITY;
    let mut best_rate = f64::INFINITY;
    loop {
        let rate = group_rate(tables, &dv);
        let cost = group_distortion(tables, &dv) + lambda * rate;
        if cost < best_cost || (cost == best_cost && rate < best_rate) {
            best_cost = cost;
            best_rate = rate;
            best.copy_from_slice(&dv);
        }
        // Odometer step, last component fastest.
        let mut k = tables.len();
        loop {
            if k == 0 {
                return Ok(OptimizationResult::evaluate(tables, best, best_cost, lambda));
            }
            k -= 1;
            if dv[k] < tables[k].candidates.hi() {
                dv[k] += 1;
                break;
            }
            dv[k] = tables[k].candidates.lo();
        }
    }
}

/// Best change for one pixel on its own, `P * d + lambda * R`. Ties go to
/// the change closest to the initial error, then to the smaller change.
pub fn independent_optimize(t: &PixelTables, lambda: f64) -> (i32, f64) {
    let key = |s: i32| (s - t.dv_k).abs();
    let mut best = t.candidates.lo();
    let mut best_cost = stage_cost(t, best, lambda);
    for s in t.states().skip(1) {
        let cost = stage_cost(t, s, lambda);
        if cost < best_cost || (cost == best_cost && key(s) < key(best)) {
            best = s;
            best_cost = cost;
        }
    }
    (best, best_cost)
}

/// Each group pixel chosen on its own, then scored jointly.
pub fn independent_group(tables: &[PixelTables], lambda: f64) -> Result<OptimizationResult> {
    if tables.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let picks: Vec<(i32, f64)> = tables.iter().map(|t| independent_optimize(t, lambda)).collect();
    let recursion_cost = picks.iter().map(|p| p.1).sum();
    let dv = picks.into_iter().map(|p| p.0).collect();
    Ok(OptimizationResult::evaluate(tables, dv, recursion_cost, lambda))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Dp,
    Brute,
    Independent,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(Mode::Dp),
            "brute" => Ok(Mode::Brute),
            "independent" => Ok(Mode::Independent),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

pub fn optimize_group(tables: &[PixelTables], lambda: f64, mode: Mode) -> Result<OptimizationResult> {
    match mode {
        Mode::Dp => dp_optimize(tables, lambda),
        Mode::Brute => brute_force(tables, lambda),
        Mode::Independent => independent_group(tables, lambda),
    }
}

/// Occlusion groups plus pixels that are optimized on their own.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Problem {
    pub groups: Vec<Vec<PixelTables>>,
    pub singles: Vec<PixelTables>,
}

impl Problem {
    /// Lowest achievable total rate.
    pub fn min_rate(&self) -> f64 {
        let min = |t: &PixelTables| t.rate.iter().copied().fold(f64::INFINITY, f64::min);
        self.groups.iter().flatten().map(min).sum::<f64>() + self.singles.iter().map(min).sum::<f64>()
    }

    pub fn max_rate(&self) -> f64 {
        let max = |t: &PixelTables| t.rate.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.groups.iter().flatten().map(max).sum::<f64>() + self.singles.iter().map(max).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub lambda: f64,
    pub groups: Vec<OptimizationResult>,
    /// Chosen change and its stage cost, per single pixel.
    pub singles: Vec<(i32, f64)>,
    pub rate: f64,
    pub distortion: f64,
}

impl Solution {
    pub fn cost(&self) -> f64 {
        self.distortion + self.lambda * self.rate
    }
}

/// Solves every group and single pixel at one `lambda`. Groups run in
/// parallel; totals are summed in problem order.
pub fn solve(problem: &Problem, lambda: f64, mode: Mode) -> Result<Solution> {
    let groups = problem
        .groups
        .par_iter()
        .map(|g| optimize_group(g, lambda, mode))
        .collect::<Result<Vec<_>>>()?;
    let singles: Vec<(i32, f64)> =
        problem.singles.par_iter().map(|t| independent_optimize(t, lambda)).collect();
    let mut rate = 0.0;
    let mut distortion = 0.0;
    for g in &groups {
        rate += g.rate;
        distortion += g.distortion;
    }
    for (t, &(dv, _)) in problem.singles.iter().zip(&singles) {
        rate += t.r(dv);
        distortion += t.p(dv) * t.d(dv);
    }
    Ok(Solution {
        lambda,
        groups,
        singles,
        rate,
        distortion,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BisectionOptions {
    /// Stop once the feasible rate is within this many bits of the budget.
    pub tol: f64,
    pub max_iter: usize,
    pub max_doublings: usize,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        BisectionOptions {
            tol: 1e-3,
            max_iter: 60,
            max_doublings: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BisectionOutcome {
    pub lambda: f64,
    pub solution: Solution,
    /// Every `(lambda, rate)` evaluated, in evaluation order.
    pub trace: Vec<(f64, f64)>,
}

/// Smallest `lambda` found whose solution fits the budget.
///
/// Starts at `lambda = 0`, doubles from 1 until the rate fits, then bisects
/// the bracket. Returns the feasible end of the bracket.
pub fn bisect_lambda(
    problem: &Problem,
    budget: RateBudget,
    mode: Mode,
    opts: BisectionOptions,
) -> Result<BisectionOutcome> {
    let min_rate = problem.min_rate();
    let infeasible = || Error::InfeasibleBudget {
        budget: budget.0,
        min_rate,
    };
    if budget.0 < min_rate {
        return Err(infeasible());
    }
    let mut trace = Vec::new();
    let mut eval = |lambda: f64| -> Result<Solution> {
        let s = solve(problem, lambda, mode)?;
        trace.push((lambda, s.rate));
        Ok(s)
    };

    let unconstrained = eval(0.0)?;
    if unconstrained.rate <= budget.0 {
        return Ok(BisectionOutcome {
            lambda: 0.0,
            solution: unconstrained,
            trace,
        });
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut feasible = None;
    for _ in 0..=opts.max_doublings {
        let s = eval(hi)?;
        if s.rate <= budget.0 {
            feasible = Some(s);
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    let mut best = feasible.ok_or_else(infeasible)?;

    for _ in 0..opts.max_iter {
        if budget.0 - best.rate <= opts.tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = eval(mid)?;
        if s.rate <= budget.0 {
            hi = mid;
            best = s;
        } else {
            lo = mid;
        }
    }
    Ok(BisectionOutcome {
        lambda: hi,
        solution: best,
        trace,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub rate: f64,
    pub distortion: f64,
}

/// Totals for every `lambda`, sorted by `lambda`.
pub fn sweep_lambda(problem: &Problem, lambdas: &[f64], mode: Mode) -> Result<Vec<SweepPoint>> {
    if let Some(&bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::Parse(format!("lambda must be finite and non-negative, got {bad}")));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_iter()
        .map(|lambda| {
            let s = solve(problem, lambda, mode)?;
            Ok(SweepPoint {
                lambda,
                rate: s.rate,
                distortion: s.distortion,
            })
        })
        .collect()
}
