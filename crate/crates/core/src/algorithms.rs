//! The optimizers: SA-(1,λ)-EA with λ resets, static (1,λ)-EA, static
//! (1+λ)-EA and (1+1)-EA, each run to a fixed target under an evaluation
//! budget.

use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use crate::bitstring::{nearest_int, uniform_random_point, BitMutation, RandomStream, SearchPoint};
use crate::error::{Error, Result};
use crate::landscape::{point_hash, target_reached, DistortedOneMax, EvalCounter, Fitness, TargetSpec};

/// Parameters of the (1:s+1) success rule with reset at `lambda_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControllerParams {
    /// Update factor `F > 1`.
    pub factor: f64,
    /// Success-rule parameter `s > 0`.
    pub s: f64,
    pub lambda_max: f64,
}

impl ControllerParams {
    pub fn new(factor: f64, s: f64, lambda_max: f64) -> Result<Self> {
        let params = Self {
            factor,
            s,
            lambda_max,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.factor.is_finite() && self.factor > 1.0) {
            return Err(Error::config("F", format!("must be > 1, got {}", self.factor)));
        }
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(Error::config("s", format!("must be > 0, got {}", self.s)));
        }
        if !(self.lambda_max.is_finite() && self.lambda_max >= 1.0) {
            return Err(Error::config(
                "lambda_max",
                format!("must be >= 1, got {}", self.lambda_max),
            ));
        }
        Ok(())
    }
}

/// One step of the success rule.
///
/// Success divides by `F` (floored at 1). Failure multiplies by `F^(1/s)`
/// (capped at `lambda_max`), except that a failure at exactly `lambda_max`
/// resets to 1.
pub fn update_lambda(lambda: f64, success: bool, params: &ControllerParams) -> Result<f64> {
    if !(1.0..=params.lambda_max).contains(&lambda) {
        return Err(Error::InvalidState(format!(
            "lambda {lambda} outside [1, {}]",
            params.lambda_max
        )));
    }
    Ok(if success {
        (lambda / params.factor).max(1.0)
    } else if lambda == params.lambda_max {
        1.0
    } else {
        (lambda * params.factor.powf(1.0 / params.s)).min(params.lambda_max)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Selection {
    /// Best offspring replaces the parent unconditionally.
    Comma,
    /// Best offspring replaces the parent iff [`plus_accepts`].
    Plus,
}

/// Elitist acceptance test. Equal fitness is accepted so the parent can
/// drift on plateaus.
#[inline]
pub fn plus_accepts(best_offspring: Fitness, parent: Fitness) -> bool {
    best_offspring >= parent
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AlgorithmKind {
    SaCommaReset(ControllerParams),
    StaticComma { lambda: u64 },
    StaticPlus { lambda: u64 },
    OnePlusOne,
}

impl AlgorithmKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmKind::SaCommaReset(params) => params.validate(),
            AlgorithmKind::StaticComma { lambda } | AlgorithmKind::StaticPlus { lambda } => {
                if *lambda == 0 {
                    Err(Error::config("lambda", "static lambda must be >= 1"))
                } else {
                    Ok(())
                }
            }
            AlgorithmKind::OnePlusOne => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::SaCommaReset(_) => "sa_comma_reset",
            AlgorithmKind::StaticComma { .. } => "static_comma",
            AlgorithmKind::StaticPlus { .. } => "static_plus",
            AlgorithmKind::OnePlusOne => "one_plus_one",
        }
    }

    pub fn selection(&self) -> Selection {
        match self {
            AlgorithmKind::SaCommaReset(_) | AlgorithmKind::StaticComma { .. } => Selection::Comma,
            AlgorithmKind::StaticPlus { .. } | AlgorithmKind::OnePlusOne => Selection::Plus,
        }
    }

    pub fn controller(&self) -> Option<&ControllerParams> {
        match self {
            AlgorithmKind::SaCommaReset(params) => Some(params),
            _ => None,
        }
    }

    pub fn initial_lambda(&self) -> f64 {
        match self {
            AlgorithmKind::SaCommaReset(_) | AlgorithmKind::OnePlusOne => 1.0,
            AlgorithmKind::StaticComma { lambda } | AlgorithmKind::StaticPlus { lambda } => {
                *lambda as f64
            }
        }
    }

    /// Offspring per generation at the given (possibly real) λ.
    pub fn offspring_count(&self, lambda: f64) -> u64 {
        match self {
            AlgorithmKind::SaCommaReset(_) => nearest_int(lambda),
            AlgorithmKind::StaticComma { lambda } | AlgorithmKind::StaticPlus { lambda } => *lambda,
            AlgorithmKind::OnePlusOne => 1,
        }
    }
}

/// Running best-value tracker that breaks ties uniformly at random with a
/// single draw at the end.
#[derive(Debug, Default)]
struct TieBreaker {
    best: Option<Fitness>,
    ties: usize,
}

enum Offer {
    NewBest,
    Tie(usize),
    Worse,
}

impl TieBreaker {
    fn reset(&mut self) {
        self.best = None;
        self.ties = 0;
    }

    #[inline]
    fn offer(&mut self, f: Fitness) -> Offer {
        match self.best {
            Some(b) if f < b => Offer::Worse,
            Some(b) if f == b => {
                self.ties += 1;
                Offer::Tie(self.ties - 1)
            }
            _ => {
                self.best = Some(f);
                self.ties = 1;
                Offer::NewBest
            }
        }
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.ties > 1 {
            rng.random_range(0..self.ties)
        } else {
            0
        }
    }
}

/// Selection on bare fitness values.
///
/// Returns the index of the offspring that becomes the next parent, or
/// `None` when plus selection keeps the parent. Ties among the best
/// offspring are broken uniformly at random.
pub fn select<R: Rng + ?Sized>(
    selection: Selection,
    parent: Fitness,
    offspring: &[Fitness],
    rng: &mut R,
) -> Option<usize> {
    let mut tracker = TieBreaker::default();
    let mut tied = Vec::new();
    for (i, &f) in offspring.iter().enumerate() {
        match tracker.offer(f) {
            Offer::NewBest => {
                tied.clear();
                tied.push(i);
            }
            Offer::Tie(_) => tied.push(i),
            Offer::Worse => {}
        }
    }
    let best = tracker.best?;
    let chosen = tied[tracker.pick(rng)];
    match selection {
        Selection::Comma => Some(chosen),
        Selection::Plus => plus_accepts(best, parent).then_some(chosen),
    }
}

/// State of a running trial.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoState {
    pub x: SearchPoint,
    pub fitness: Fitness,
    pub distorted: bool,
    pub lambda: f64,
    pub generation: u64,
    pub evaluations: EvalCounter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationOutcome {
    pub offspring: u64,
    /// Fitness strictly increased.
    pub success: bool,
    pub replaced_parent: bool,
    pub distorted_offspring: u64,
    /// Distortion status of the selected best offspring.
    pub selected_distorted: bool,
}

/// Per-generation log entry: state at the start of generation `t` plus
/// what that generation did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub t: u64,
    pub lambda: f64,
    pub fitness: f64,
    pub distorted: bool,
    pub offspring: u64,
    pub distorted_offspring: u64,
    pub selected_distorted: bool,
    pub success: bool,
}

struct Candidate {
    flips: Vec<u32>,
    distorted: bool,
}

/// Reusable per-trial machinery: mutation sampler and scratch buffers.
pub struct Optimizer<'a> {
    kind: AlgorithmKind,
    landscape: &'a DistortedOneMax,
    mutation: BitMutation,
    flips: Vec<u32>,
    tied: Vec<Candidate>,
    tracker: TieBreaker,
    scratch: Option<SearchPoint>,
    seen: Option<HashSet<u64>>,
}

const QUERY_LOG_KEY: u64 = 0x5155_4552_594c_4f47;

impl<'a> Optimizer<'a> {
    pub fn new(kind: AlgorithmKind, landscape: &'a DistortedOneMax) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            landscape,
            mutation: BitMutation::new(landscape.n())?,
            flips: Vec::new(),
            tied: Vec::new(),
            tracker: TieBreaker::default(),
            scratch: None,
            seen: None,
        })
    }

    /// Also count distinct queried points (by 64-bit hash).
    pub fn track_distinct_queries(&mut self) {
        self.seen.get_or_insert_with(HashSet::new);
    }

    pub fn distinct_queries(&self) -> Option<u64> {
        self.seen.as_ref().map(|s| s.len() as u64)
    }

    pub fn kind(&self) -> &AlgorithmKind {
        &self.kind
    }

    fn log_query(&mut self, x: &SearchPoint) {
        if let Some(seen) = self.seen.as_mut() {
            seen.insert(point_hash(QUERY_LOG_KEY, x));
        }
    }

    /// Uniform random `x_0`, evaluated once.
    pub fn initialize(&mut self, rng: &mut RandomStream) -> AlgoState {
        let x = uniform_random_point(self.landscape.n(), rng).expect("landscape n >= 1");
        let mut evaluations = EvalCounter::new();
        let (fitness, distorted) = self.landscape.evaluate_unchecked(&x, &mut evaluations);
        self.log_query(&x);
        AlgoState {
            x,
            fitness,
            distorted,
            lambda: self.kind.initial_lambda(),
            generation: 0,
            evaluations,
        }
    }

    /// One generation: mutate, evaluate, select, update λ.
    pub fn step(&mut self, state: &mut AlgoState, rng: &mut RandomStream) -> Result<GenerationOutcome> {
        let m = self.kind.offspring_count(state.lambda);
        let mut scratch = match self.scratch.take() {
            Some(mut s) if s.n() == state.x.n() => {
                s.clone_from(&state.x);
                s
            }
            _ => state.x.clone(),
        };
        self.tracker.reset();
        let mut distorted_offspring = 0;

        for _ in 0..m {
            self.mutation.sample_flips(rng, &mut self.flips);
            scratch.flip_all(&self.flips);
            let (f, distorted) = self
                .landscape
                .evaluate_unchecked(&scratch, &mut state.evaluations);
            if self.seen.is_some() {
                self.log_query(&scratch);
            }
            scratch.flip_all(&self.flips);
            distorted_offspring += distorted as u64;

            let slot = match self.tracker.offer(f) {
                Offer::NewBest => 0,
                Offer::Tie(slot) => slot,
                Offer::Worse => continue,
            };
            if slot == self.tied.len() {
                self.tied.push(Candidate {
                    flips: Vec::new(),
                    distorted,
                });
            }
            let c = &mut self.tied[slot];
            c.flips.clone_from(&self.flips);
            c.distorted = distorted;
        }
        self.scratch = Some(scratch);

        let best = self.tracker.best.expect("at least one offspring per generation");
        let chosen = &self.tied[self.tracker.pick(rng)];
        let replace = match self.kind.selection() {
            Selection::Comma => true,
            Selection::Plus => plus_accepts(best, state.fitness),
        };

        let old = state.fitness;
        if replace {
            state.x.flip_all(&chosen.flips);
            state.fitness = best;
            state.distorted = chosen.distorted;
        }
        let success = state.fitness > old;
        if let Some(params) = self.kind.controller() {
            state.lambda = update_lambda(state.lambda, success, params)?;
        }
        state.generation += 1;

        Ok(GenerationOutcome {
            offspring: m,
            success,
            replaced_parent: replace,
            distorted_offspring,
            selected_distorted: chosen.distorted,
        })
    }
}

/// One generation with freshly allocated buffers. Prefer [`Optimizer`] in loops.
pub fn run_generation(
    state: &mut AlgoState,
    kind: AlgorithmKind,
    landscape: &DistortedOneMax,
    rng: &mut RandomStream,
) -> Result<GenerationOutcome> {
    if state.x.n() != landscape.n() {
        return Err(Error::arg("state dimension does not match the landscape"));
    }
    Optimizer::new(kind, landscape)?.step(state, rng)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub record_trajectory: bool,
    pub track_distinct_queries: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub evaluations: u64,
    pub generations: u64,
    pub hit_target: bool,
    /// The budget ran out before the target was reached.
    pub censored: bool,
    pub final_fitness: Fitness,
    pub final_lambda: f64,
    pub trajectory: Option<Vec<GenerationRecord>>,
    pub distinct_queries: Option<u64>,
}

pub fn run_to_target(
    kind: AlgorithmKind,
    landscape: &DistortedOneMax,
    spec: TargetSpec,
    budget: u64,
    seed: u64,
) -> Result<RunResult> {
    run_to_target_with(kind, landscape, spec, budget, seed, RunOptions::default())
}

/// Runs until `f(x_t) >= n - k*` or the budget is spent.
///
/// The generation that crosses the budget is completed and fully counted.
/// A run only counts as a hit when the target was reached within the
/// budget; everything else is censored.
pub fn run_to_target_with(
    kind: AlgorithmKind,
    landscape: &DistortedOneMax,
    spec: TargetSpec,
    budget: u64,
    seed: u64,
    options: RunOptions,
) -> Result<RunResult> {
    if budget == 0 {
        return Err(Error::config("budget", "must be >= 1"));
    }
    let n = landscape.n();
    TargetSpec::new(spec.k_star(), n)?;
    let mut rng = RandomStream::new(seed);
    let mut opt = Optimizer::new(kind, landscape)?;
    if options.track_distinct_queries {
        opt.track_distinct_queries();
    }
    let mut trajectory = options.record_trajectory.then(Vec::new);

    let mut state = opt.initialize(&mut rng);
    while !target_reached(state.fitness, n, spec) && state.evaluations.count() < budget {
        let before = (state.generation, state.lambda, state.fitness, state.distorted);
        let outcome = opt.step(&mut state, &mut rng)?;
        if let Some(log) = trajectory.as_mut() {
            log.push(GenerationRecord {
                t: before.0,
                lambda: before.1,
                fitness: before.2.value(),
                distorted: before.3,
                offspring: outcome.offspring,
                distorted_offspring: outcome.distorted_offspring,
                selected_distorted: outcome.selected_distorted,
                success: outcome.success,
            });
        }
    }

    let evaluations = state.evaluations.count();
    let hit_target = target_reached(state.fitness, n, spec) && evaluations <= budget;
    Ok(RunResult {
        evaluations,
        generations: state.generation,
        hit_target,
        censored: !hit_target,
        final_fitness: state.fitness,
        final_lambda: state.lambda,
        trajectory,
        distinct_queries: opt.distinct_queries(),
    })
}
