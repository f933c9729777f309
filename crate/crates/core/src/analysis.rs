//! Finite-n probability formulas for clones, Hamming-distance-3 offspring
//! and the biased λ-walk, together with independent oracles (dense linear
//! solve, Monte Carlo) that check them.

use serde::Serialize;

use crate::algorithms::GenerationRecord;
use crate::bitstring::{BitMutation, RandomStream};
use crate::error::{Error, Result};

/// Lower bound `(1 - 1/e)^λ` on the probability that none of λ offspring
/// is a clone.
pub fn clone_absence_lower_bound(lambda: u64) -> Result<f64> {
    if lambda < 1 {
        return Err(Error::arg("lambda must be >= 1"));
    }
    Ok((1.0 - (-1.0f64).exp()).powf(lambda as f64))
}

/// Lower bound `exp(-e·n / (λ(n-1)))` on the probability that at least one
/// of λ offspring is a clone.
pub fn clone_presence_lower_bound(lambda: u64, n: usize) -> Result<f64> {
    if lambda < 1 {
        return Err(Error::arg("lambda must be >= 1"));
    }
    if n < 2 {
        return Err(Error::arg("n must be >= 2"));
    }
    let n = n as f64;
    Ok((-std::f64::consts::E * n / (lambda as f64 * (n - 1.0))).exp())
}

/// Probability `(1 - 1/n)^n` that a single offspring is a clone.
pub fn clone_probability(n: usize) -> f64 {
    let n = n as f64;
    (1.0 - 1.0 / n).powf(n)
}

/// Exact probability that none of λ offspring is a clone.
pub fn exact_no_clone_probability(n: usize, lambda: u64) -> f64 {
    (1.0 - clone_probability(n)).powf(lambda as f64)
}

/// `C(n,3) n^-3 (1 - 1/n)^(n-3)`: an offspring lies at Hamming distance
/// exactly 3 from its parent.
pub fn prob_hamming_three(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::arg("n must be >= 3"));
    }
    let nf = n as f64;
    let choose_over_cube = (nf - 1.0) * (nf - 2.0) / (6.0 * nf * nf);
    Ok(choose_over_cube * (1.0 - 1.0 / nf).powf(nf - 3.0))
}

/// `1/(27e)`, the dimension-free lower bound on [`prob_hamming_three`].
pub fn hamming_three_floor() -> f64 {
    1.0 / (27.0 * std::f64::consts::E)
}

/// Band walk: down-step probability `q`, `beta` bands, state `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GamblersRuinParams {
    pub q: f64,
    pub beta: u32,
    pub i: u32,
    /// Base of the λ-bands `[αF^(i-1), αF^i)`; does not enter the formulas.
    pub alpha: f64,
}

impl GamblersRuinParams {
    pub fn new(q: f64, beta: u32, i: u32) -> Result<Self> {
        check_q(q)?;
        if beta < 1 {
            return Err(Error::arg("beta must be >= 1"));
        }
        if i > beta + 1 {
            return Err(Error::arg(format!("state i = {i} outside [0, beta + 1]")));
        }
        Ok(Self {
            q,
            beta,
            i,
            alpha: 1.0,
        })
    }

    pub fn exact(&self) -> f64 {
        ruin_closed_form(self.q, self.beta, self.i)
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::arg(format!("q must lie in (0, 1/2], got {q}")));
    }
    Ok(())
}

/// `1 - r^k` via `expm1`, accurate when `r` is near 1.
#[inline]
fn one_minus_pow(ln_r: f64, k: f64) -> f64 {
    -(k * ln_r).exp_m1()
}

fn ruin_closed_form(q: f64, beta: u32, i: u32) -> f64 {
    let top = (beta + 1) as f64;
    let remaining = top - i as f64;
    if q == 0.5 {
        return remaining / top;
    }
    let ln_r = ((1.0 - q) / q).ln();
    one_minus_pow(ln_r, remaining) / one_minus_pow(ln_r, top)
}

/// Probability that the walk started at `i` hits 0 before `beta + 1`.
///
/// Closed form `(1 - r^(β+1-i)) / (1 - r^(β+1))` with `r = (1-q)/q`; at
/// `q = 1/2` the continuous limit `(β+1-i)/(β+1)`.
pub fn gamblers_ruin_exact(q: f64, beta: u32, i: u32) -> Result<f64> {
    check_q(q)?;
    if i > beta + 1 {
        return Err(Error::arg(format!("state i = {i} outside [0, beta + 1]")));
    }
    Ok(ruin_closed_form(q, beta, i))
}

/// `(1/q - 2) / ((1/q - 1)^(β+1) - 1)`, or `1/(β+1)` at `q = 1/2`.
pub fn gamblers_ruin_bound(q: f64, beta: u32) -> Result<f64> {
    check_q(q)?;
    if beta < 1 {
        return Err(Error::arg("beta must be >= 1"));
    }
    let top = (beta + 1) as f64;
    if q == 0.5 {
        return Ok(1.0 / top);
    }
    let numerator = (1.0 - 2.0 * q) / q;
    let ln_r = (1.0 / q - 1.0).ln();
    Ok(numerator / (top * ln_r).exp_m1())
}

/// Absorption probabilities of the band walk from a dense linear solve.
///
/// Unknowns `P_0..=P_{β+1}` with `P_0 = 1`, `P_{β+1} = 0` and
/// `P_i - q P_{i-1} - (1-q) P_{i+1} = 0` inside, solved by Gaussian
/// elimination with partial pivoting. Returns the whole vector.
pub fn absorption_vector(q: f64, beta: u32) -> Result<Vec<f64>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::arg(format!("q must lie in (0, 1), got {q}")));
    }
    if beta > 30 {
        return Err(Error::arg("beta > 30 is outside the oracle's intended range"));
    }
    let size = beta as usize + 2;
    let mut a = vec![vec![0.0f64; size + 1]; size];
    a[0][0] = 1.0;
    a[0][size] = 1.0;
    a[size - 1][size - 1] = 1.0;
    for (i, row) in a.iter_mut().enumerate().take(size - 1).skip(1) {
        row[i] = 1.0;
        row[i - 1] = -q;
        row[i + 1] = -(1.0 - q);
    }

    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("non-empty range");
        a.swap(col, pivot);
        let diag = a[col][col];
        for r in (col + 1)..size {
            let factor = a[r][col] / diag;
            if factor != 0.0 {
                for c in col..=size {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; size];
    for r in (0..size).rev() {
        let tail: f64 = ((r + 1)..size).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][size] - tail) / a[r][r];
    }
    Ok(x)
}

/// Oracle for [`gamblers_ruin_exact`], independent of the closed form.
pub fn brute_force_absorption(q: f64, beta: u32, i: u32) -> Result<f64> {
    if i > beta + 1 {
        return Err(Error::arg(format!("state i = {i} outside [0, beta + 1]")));
    }
    Ok(absorption_vector(q, beta)?[i as usize])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CloneStats {
    pub trials: u64,
    /// Fraction of generations without any clone.
    pub no_clone: f64,
    /// Fraction of generations with at least one clone.
    pub clone: f64,
}

/// Simulates `trials` generations of λ mutations each and counts how often
/// a clone of the parent appears.
pub fn monte_carlo_clone_stats(n: usize, lambda: u64, trials: u64, rng: &mut RandomStream) -> Result<CloneStats> {
    if trials < 1 {
        return Err(Error::arg("trials must be >= 1"));
    }
    let mutation = BitMutation::new(n)?;
    let mut flips = Vec::new();
    let mut with_clone = 0u64;
    for _ in 0..trials {
        let mut any = false;
        for _ in 0..lambda {
            mutation.sample_flips(rng, &mut flips);
            any |= flips.is_empty();
        }
        with_clone += any as u64;
    }
    let clone = with_clone as f64 / trials as f64;
    Ok(CloneStats {
        trials,
        no_clone: 1.0 - clone,
        clone,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EventStats {
    pub generations: u64,
    /// Generations with at least one distorted offspring.
    pub with_distorted_offspring: u64,
    /// Of those, generations whose selected offspring was clean.
    pub clean_selected_despite_distorted: u64,
}

impl EventStats {
    pub fn clean_selected_fraction(&self) -> Option<f64> {
        (self.with_distorted_offspring > 0)
            .then(|| self.clean_selected_despite_distorted as f64 / self.with_distorted_offspring as f64)
    }
}

/// Counts distorted-offspring events over a recorded trajectory.
pub fn generation_event_stats(trajectory: Option<&[GenerationRecord]>) -> Result<EventStats> {
    let trajectory =
        trajectory.ok_or_else(|| Error::arg("run was executed without trajectory logging"))?;
    let mut stats = EventStats {
        generations: trajectory.len() as u64,
        ..Default::default()
    };
    for g in trajectory.iter().filter(|g| g.distorted_offspring > 0) {
        stats.with_distorted_offspring += 1;
        stats.clean_selected_despite_distorted += !g.selected_distorted as u64;
    }
    Ok(stats)
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub formula: f64,
    pub oracle: f64,
    /// Signed slack; the check passes iff `margin >= 0`.
    pub margin: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: String, formula: f64, oracle: f64, slack: f64) -> Self {
        // formula must not exceed oracle (+ slack)
        let margin = oracle + slack - formula;
        Self {
            name,
            formula,
            oracle,
            margin,
            passed: margin >= 0.0,
        }
    }

    fn close(name: String, formula: f64, oracle: f64, tol: f64) -> Self {
        let margin = tol - (formula - oracle).abs();
        Self {
            name,
            formula,
            oracle,
            margin,
            passed: margin >= 0.0,
        }
    }
}

pub const RUIN_Q_GRID: [f64; 5] = [0.05, 0.1, 0.25, 0.4, 0.5];
pub const RUIN_TOLERANCE: f64 = 1e-10;
pub const RUIN_BOUND_TOLERANCE: f64 = 1e-12;

/// Clone-probability bounds against the exact product formula.
pub fn clone_bound_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for n in [10usize, 100, 1000] {
        for lambda in 1..=50u64 {
            let exact_none = exact_no_clone_probability(n, lambda);
            out.push(Check::at_most(
                format!("clone-absence bound n={n} lambda={lambda}"),
                clone_absence_lower_bound(lambda).expect("lambda >= 1"),
                exact_none,
                0.0,
            ));
            out.push(Check::at_most(
                format!("clone-presence bound n={n} lambda={lambda}"),
                clone_presence_lower_bound(lambda, n).expect("n >= 2"),
                1.0 - exact_none,
                0.0,
            ));
        }
    }
    out
}

/// Monte Carlo clone frequencies against both lower bounds (observed must
/// reach `bound - 4σ`).
pub fn clone_monte_carlo_checks(trials: u64, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = RandomStream::new(seed);
    for n in [10usize, 100, 1000] {
        for lambda in [1u64, 2, 5, 10, 20] {
            let stats = monte_carlo_clone_stats(n, lambda, trials, &mut rng).expect("valid inputs");
            let exact_none = exact_no_clone_probability(n, lambda);
            let sigma = (exact_none * (1.0 - exact_none) / trials as f64).sqrt();
            out.push(Check::at_most(
                format!("MC no-clone n={n} lambda={lambda}"),
                clone_absence_lower_bound(lambda).expect("lambda >= 1"),
                stats.no_clone,
                4.0 * sigma,
            ));
            out.push(Check::at_most(
                format!("MC clone n={n} lambda={lambda}"),
                clone_presence_lower_bound(lambda, n).expect("n >= 2"),
                stats.clone,
                4.0 * sigma,
            ));
        }
    }
    out
}

/// Hamming-distance-3 probability against its `1/(27e)` floor.
pub fn hamming_three_checks() -> Vec<Check> {
    let mut ns: Vec<usize> = (3..=2000).collect();
    let mut n = 2000.0f64;
    while n < 1e6 {
        n *= 1.1;
        ns.push(n as usize);
    }
    ns.push(1_000_000);
    ns.into_iter()
        .map(|n| {
            Check::at_most(
                format!("hamming-3 floor n={n}"),
                hamming_three_floor(),
                prob_hamming_three(n).expect("n >= 3"),
                0.0,
            )
        })
        .collect()
}

/// Closed-form ruin probabilities and bound against the linear-solve oracle.
pub fn gamblers_ruin_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for q in RUIN_Q_GRID {
        for beta in 1..=10u32 {
            out.extend(gamblers_ruin_checks_for(q, beta).expect("grid is in domain"));
        }
    }
    out
}

pub fn gamblers_ruin_checks_for(q: f64, beta: u32) -> Result<Vec<Check>> {
    let oracle = absorption_vector(q, beta)?;
    let mut out = Vec::new();
    for i in 0..=beta + 1 {
        out.push(Check::close(
            format!("ruin exact q={q} beta={beta} i={i}"),
            gamblers_ruin_exact(q, beta, i)?,
            oracle[i as usize],
            RUIN_TOLERANCE,
        ));
    }
    out.push(Check::close(
        format!("ruin bound q={q} beta={beta}"),
        gamblers_ruin_bound(q, beta)?,
        gamblers_ruin_exact(q, beta, beta)?,
        RUIN_BOUND_TOLERANCE,
    ));
    Ok(out)
}

/// Every analysis check with the default Monte Carlo settings.
pub fn verification_report(mc_trials: u64, seed: u64) -> Vec<Check> {
    let mut out = clone_bound_checks();
    out.extend(clone_monte_carlo_checks(mc_trials, seed));
    out.extend(hamming_three_checks());
    out.extend(gamblers_ruin_checks());
    out
}
