//! Derivative-free minimization used by the variational routines: compass
//! (coordinate pattern) search with a shrinking stencil, plus deterministic
//! multi-start reduction.
//!
//! Objectives may return `f64::INFINITY` to mark infeasible points. Results
//! are bit-stable for a fixed seed and independent of scheduling: parallel
//! starts are reduced by best value with the start index as tie-breaker.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Budget and tolerances shared by the search routines.
#[derive(Debug, Clone)]
pub struct SolverBudget {
    /// Number of independent starts for multi-start searches.
    pub starts: usize,
    /// Maximum objective evaluations per start.
    pub max_evals: usize,
    /// Initial stencil step.
    pub init_step: f64,
    /// The search stops once a full sweep at a step at or below this size
    /// yields no improvement.
    pub min_step: f64,
    /// Largest acceptable stationarity residual (best local improvement
    /// still available when the budget ran out).
    pub stationarity_tol: f64,
    /// Relative width at which feasibility bisections stop.
    pub bisection_rel_width: f64,
    /// Base seed for randomized starts.
    pub seed: u64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            starts: 8,
            max_evals: 120_000,
            init_step: 0.25,
            min_step: 2e-7,
            stationarity_tol: 1e-7,
            bisection_rel_width: 1e-8,
            seed: 0,
        }
    }
}

impl SolverBudget {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    /// A coarser budget for inner loops that only need a few digits.
    pub fn coarse(&self) -> Self {
        Self {
            max_evals: self.max_evals / 4,
            min_step: self.min_step.max(1e-5),
            ..self.clone()
        }
    }
}

/// Result of one compass-search run.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// Best improvement over the final stencil; zero when the sweep at the
    /// minimal step failed, positive when the eval budget ran out first.
    pub residual: f64,
}

/// Compass search: sweep coordinate directions, accept improvements
/// greedily (repeating a winning move while it keeps paying), halve the
/// step when a sweep stalls.
pub fn compass_search(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    budget: &SolverBudget,
) -> SearchOutcome {
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut evals = 1usize;
    let mut h = budget.init_step;
    let mut last_improvement = f64::INFINITY;

    if d == 0 {
        return SearchOutcome { x, value: fx, evals, residual: 0.0 };
    }

    // an infinite start cannot be ranked against infinite neighbors; probe
    // expanding steps until a feasible point appears
    if !fx.is_finite() {
        let mut probe = h;
        'expand: for _ in 0..16 {
            for i in 0..d {
                for sign in [1.0f64, -1.0] {
                    if evals >= budget.max_evals {
                        break 'expand;
                    }
                    let old = x[i];
                    x[i] = old + sign * probe;
                    let ft = f(&x);
                    evals += 1;
                    if ft.is_finite() {
                        fx = ft;
                        break 'expand;
                    }
                    x[i] = old;
                }
            }
            probe *= 2.0;
        }
    }

    loop {
        let mut sweep_improved = false;
        let mut sweep_best = 0.0f64;
        'coords: for i in 0..d {
            for sign in [1.0f64, -1.0] {
                if evals >= budget.max_evals {
                    break 'coords;
                }
                let old = x[i];
                x[i] = old + sign * h;
                let ft = f(&x);
                evals += 1;
                if ft < fx {
                    sweep_best = sweep_best.max(fx - ft);
                    fx = ft;
                    sweep_improved = true;
                    // ride the winning direction while it pays
                    for _ in 0..24 {
                        if evals >= budget.max_evals {
                            break;
                        }
                        let prev = x[i];
                        x[i] = prev + sign * h;
                        let fr = f(&x);
                        evals += 1;
                        if fr < fx {
                            sweep_best = sweep_best.max(fx - fr);
                            fx = fr;
                        } else {
                            x[i] = prev;
                            break;
                        }
                    }
                    break; // next coordinate
                } else {
                    x[i] = old;
                }
            }
        }
        if sweep_improved {
            last_improvement = sweep_best;
        }
        if evals >= budget.max_evals {
            let residual = if sweep_improved { last_improvement } else { 0.0 };
            return SearchOutcome { x, value: fx, evals, residual };
        }
        if !sweep_improved {
            if h <= budget.min_step {
                return SearchOutcome { x, value: fx, evals, residual: 0.0 };
            }
            h *= 0.5;
        }
    }
}

/// Outcome of a multi-start search with the winning start recorded.
#[derive(Debug, Clone)]
pub struct MultistartOutcome {
    pub best: SearchOutcome,
    pub best_start: usize,
    pub all: Vec<SearchOutcome>,
}

/// Runs compass search from every start in parallel and reduces
/// deterministically (best value, then lowest start index).
pub fn multistart_minimize(
    f: &(impl Fn(&[f64]) -> f64 + Sync),
    starts: &[Vec<f64>],
    budget: &SolverBudget,
) -> MultistartOutcome {
    assert!(!starts.is_empty());
    let all: Vec<SearchOutcome> = starts
        .par_iter()
        .map(|x0| compass_search(f, x0, budget))
        .collect();
    let mut best_start = 0;
    for (i, o) in all.iter().enumerate() {
        let better = match o.value.partial_cmp(&all[best_start].value) {
            Some(std::cmp::Ordering::Less) => true,
            Some(std::cmp::Ordering::Equal) => i < best_start,
            _ => false,
        };
        if better {
            best_start = i;
        }
    }
    MultistartOutcome {
        best: all[best_start].clone(),
        best_start,
        all,
    }
}

/// Deterministic standard-normal start vector for start index `k`.
pub fn gaussian_start(dim: usize, seed: u64, k: u64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_mul(0x0100_0000_01b3).wrapping_add(k));
    let normal = StandardNormal;
    (0..dim).map(|_| normal.sample(&mut rng)).collect()
}
