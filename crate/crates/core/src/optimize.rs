//! Derivative-free multistart minimization over small parameter spaces.

use argmin::core::{
    CostFunction, Error as ArgminError, Executor, State, TerminationReason, TerminationStatus,
};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Number of seeded uniform random starts in `[-range, range]^dim`.
    pub random_starts: usize,
    pub range: f64,
    /// Points per axis of the coarse grid (0 disables the grid).
    pub grid_points: usize,
    /// Best grid points refined locally.
    pub grid_refinements: usize,
    pub initial_step: f64,
    pub max_iters: u64,
    /// Simplex standard-deviation tolerance on cost values.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            random_starts: 16,
            range: std::f64::consts::PI,
            grid_points: 5,
            grid_refinements: 4,
            initial_step: 0.4,
            max_iters: 4000,
            tolerance: 1e-13,
            seed: 17,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub params: Vec<f64>,
    pub value: f64,
    /// Whether the best local search stopped on its tolerance.
    pub converged: bool,
}

struct Cost<'a>(&'a dyn Fn(&[f64]) -> f64);

impl CostFunction for Cost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, ArgminError> {
        Ok((self.0)(p))
    }
}

/// Nelder–Mead from one start point.
pub fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    opts: &SearchOptions,
) -> SearchResult {
    let mut simplex = vec![start.to_vec()];
    for i in 0..start.len() {
        let mut p = start.to_vec();
        p[i] += opts.initial_step;
        simplex.push(p);
    }
    let fallback = SearchResult {
        params: start.to_vec(),
        value: f(start),
        converged: false,
    };
    let Ok(solver) = NelderMead::new(simplex).with_sd_tolerance(opts.tolerance) else {
        return fallback;
    };
    let run = Executor::new(Cost(f), solver)
        .configure(|s| s.max_iters(opts.max_iters))
        .run();
    match run {
        Ok(res) => {
            let state = res.state();
            let converged = matches!(
                state.get_termination_status(),
                TerminationStatus::Terminated(TerminationReason::SolverConverged)
            );
            match state.get_best_param() {
                Some(p) if state.get_best_cost() <= fallback.value => SearchResult {
                    params: p.clone(),
                    value: state.get_best_cost(),
                    converged,
                },
                _ => SearchResult {
                    converged,
                    ..fallback
                },
            }
        }
        Err(_) => fallback,
    }
}

/// Coarse grid plus seeded random starts, each refined by Nelder–Mead;
/// `extra_starts` (e.g. the identity operation) are always refined too.
pub fn minimize(
    f: &dyn Fn(&[f64]) -> f64,
    dim: usize,
    extra_starts: &[Vec<f64>],
    opts: &SearchOptions,
) -> SearchResult {
    let mut starts: Vec<Vec<f64>> = extra_starts.to_vec();

    if opts.grid_points > 0 {
        let mut scored: Vec<(f64, Vec<f64>)> = grid(dim, opts.grid_points, opts.range)
            .into_iter()
            .map(|p| (f(&p), p))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        starts.extend(scored.into_iter().take(opts.grid_refinements).map(|(_, p)| p));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_starts {
        starts.push(
            (0..dim)
                .map(|_| rng.random_range(-opts.range..=opts.range))
                .collect(),
        );
    }

    starts
        .iter()
        .map(|s| nelder_mead(f, s, opts))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .unwrap_or_else(|| SearchResult {
            params: vec![0.0; dim],
            value: f(&vec![0.0; dim]),
            converged: false,
        })
}

fn grid(dim: usize, points: usize, range: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..points)
        .map(|i| {
            if points == 1 {
                0.0
            } else {
                -range + 2.0 * range * i as f64 / (points - 1) as f64
            }
        })
        .collect();
    let mut out = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}
