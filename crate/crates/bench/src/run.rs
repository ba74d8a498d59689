use std::f64::consts::PI;
use std::time::Instant;

use fredholm::bvp::{ode_bvp_reduce, OdeBvp};
use fredholm::classical::{
    iterate_discrete, lavrentiev_solve_discrete, quasisolution_solve, DiscreteSystem, IterationParams,
    IterationScheme, MethodResult, RegularizationParams, StoppingRule,
};
use fredholm::firstkind::{inject_noise, NoiseShape};
use fredholm::kernels::{canonical_spectrum, CanonicalKernel};
use fredholm::transform::{solve_alternative, solve_transform, AlternativeForm, TransformMethod};
use fredholm::{FirstKindProblem, Grid, NoiseSpec, TransformConfig};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, KernelName, MethodSpec, NoiseLevel, ProblemSpec, TransformForm};
use crate::error::BenchError;

/// Outcome of one (method, noise level) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: String,
    pub param_summary: String,
    pub delta: f64,
    /// Relative L2 error against the exact solution, when one is known.
    pub rel_error: Option<f64>,
    /// `‖Aψ − f‖` against the data actually used; empty for the ODE routes.
    pub residual: Option<f64>,
    pub iterations: usize,
    pub wall_ms: Option<f64>,
    pub converged: bool,
    /// Solution samples on the experiment grid, empty when the run failed.
    pub profile: Vec<f64>,
}

/// All runs of an experiment, in config order (methods outer, noise inner).
#[derive(Debug, Clone)]
pub struct Experiment {
    pub grid: Grid<f64>,
    pub records: Vec<RunRecord>,
}

impl Experiment {
    pub fn all_converged(&self) -> bool {
        self.records.iter().all(|r| r.converged)
    }
}

struct Job<'a> {
    method: &'a MethodSpec,
    noise: NoiseLevel,
    noise_index: usize,
}

/// Runs every method at every noise level. `jobs` bounds the worker count;
/// the records do not depend on it.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<Experiment, BenchError> {
    config.validate()?;
    let grid = Grid::new(0.0, 1.0, config.grid.rule(), config.grid.n)
        .map_err(|e| BenchError::Invalid(format!("grid: {e}")))?;
    let levels = config.noise_levels();
    let work: Vec<Job> = config
        .methods
        .iter()
        .flat_map(|m| {
            levels.iter().enumerate().map(move |(i, &noise)| Job {
                method: m,
                noise,
                noise_index: i,
            })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::Invalid(format!("thread pool: {e}")))?;
    let records = pool.install(|| {
        work.par_iter()
            .map(|job| run_one(config, &grid, job))
            .collect::<Vec<_>>()
    });
    Ok(Experiment { grid, records })
}

fn run_one(config: &ExperimentConfig, grid: &Grid<f64>, job: &Job) -> RunRecord {
    let start = Instant::now();
    let outcome = match config.problem {
        ProblemSpec::OdeCosine => run_ode(config, grid, job),
        _ => run_first_kind(config, grid, job),
    };
    let wall_ms = config
        .record_wall_time
        .then(|| start.elapsed().as_secs_f64() * 1e3);
    match outcome {
        Ok(mut rec) => {
            rec.wall_ms = wall_ms;
            log::info!("{} {}: converged={}", rec.method, rec.param_summary, rec.converged);
            rec
        }
        Err((delta, message)) => {
            log::warn!("{} failed: {message}", job.method.id());
            RunRecord {
                method: job.method.id().into(),
                param_summary: format!("{} error={message}", summary(job.method)),
                delta,
                rel_error: None,
                residual: None,
                iterations: 0,
                wall_ms,
                converged: false,
                profile: Vec::new(),
            }
        }
    }
}

type RunResult = Result<RunRecord, (f64, String)>;

/// The first-kind problem named by the config, with an exact solution attached.
pub fn build_problem(spec: &ProblemSpec) -> Option<FirstKindProblem<f64>> {
    match *spec {
        ProblemSpec::EigenTest { m } => Some(FirstKindProblem::eigen_test(m)),
        ProblemSpec::Kernel {
            kernel: KernelName::Exponential,
        } => Some(
            FirstKindProblem::new(
                |x: f64, xi: f64| (-(x - xi).abs()).exp(),
                |x: f64| 2.0 - (-x).exp() - (x - 1.0).exp(),
                (0.0, 1.0),
            )
            .with_exact(|_| 1.0),
        ),
        ProblemSpec::Kernel {
            kernel: KernelName::Smooth,
        } => Some(
            FirstKindProblem::new(
                |x: f64, xi: f64| (x * xi).exp(),
                |x: f64| if x.abs() < 1e-8 { 1.0 + x / 2.0 } else { x.exp_m1() / x },
                (0.0, 1.0),
            )
            .with_exact(|_| 1.0),
        ),
        ProblemSpec::OdeCosine => None,
    }
}

/// Piecewise-linear interpolant through `(nodes, values)`; exact at the nodes.
fn interpolant(nodes: Vec<f64>, values: Vec<f64>) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    move |x: f64| {
        let j = nodes.partition_point(|&t| t < x);
        if j == 0 {
            return values[0];
        }
        if j >= nodes.len() {
            return values[nodes.len() - 1];
        }
        if nodes[j] == x {
            return values[j];
        }
        let (x0, x1) = (nodes[j - 1], nodes[j]);
        let s = (x - x0) / (x1 - x0);
        values[j - 1] * (1.0 - s) + values[j] * s
    }
}

fn noisy(f: &[f64], level: &NoiseLevel, seed: u64, grid: &Grid<f64>) -> Result<(Vec<f64>, f64), String> {
    let delta = level.delta(grid.l2_norm(f));
    let spec = NoiseSpec {
        target_l2_norm: delta,
        seed,
        shape: NoiseShape::WhiteFourier { n_modes: level.modes },
    };
    let data = inject_noise(f, &spec, grid).map_err(|e| e.to_string())?;
    Ok((data, delta))
}

fn rel_error(grid: &Grid<f64>, approx: &[f64], exact: &[f64]) -> Option<f64> {
    let diff: Vec<f64> = approx.iter().zip(exact).map(|(a, b)| a - b).collect();
    let n = grid.l2_norm(exact);
    let d = grid.l2_norm(&diff);
    Some(if n > 0.0 { d / n } else { d })
}

fn summary(m: &MethodSpec) -> String {
    match *m {
        MethodSpec::Lavrentiev { alpha } => format!("alpha={alpha}"),
        MethodSpec::Quasisolution { radius, n_terms } => format!("radius={radius} n_terms={n_terms}"),
        MethodSpec::Fridman { step, lambda1, max_iters } => match lambda1 {
            Some(l) => format!("step={step} lambda1={l} max_iters={max_iters}"),
            None => format!("step={step} max_iters={max_iters}"),
        },
        MethodSpec::Landweber { step, max_iters } => match step {
            Some(s) => format!("step={s} max_iters={max_iters}"),
            None => format!("step=auto max_iters={max_iters}"),
        },
        MethodSpec::Averaged { step, max_iters } => format!("step={step} max_iters={max_iters}"),
        MethodSpec::Implicit { alpha, max_iters } => format!("alpha={alpha} max_iters={max_iters}"),
        MethodSpec::SteepestDescent { max_iters } => format!("max_iters={max_iters}"),
        MethodSpec::Transform { r, mu, n_terms, form } => {
            format!("r={r} mu={mu} n_terms={n_terms} form={form:?}").to_lowercase()
        }
        MethodSpec::KernelAbsorbed | MethodSpec::ConstantsFirst => String::new(),
    }
}

fn run_first_kind(config: &ExperimentConfig, grid: &Grid<f64>, job: &Job) -> RunResult {
    let fail = |delta: f64| move |e: String| (delta, e);
    let problem = build_problem(&config.problem).ok_or((0.0, "not a first-kind problem".to_string()))?;
    let clean = problem.rhs_samples(grid).map_err(|e| (0.0, e.to_string()))?;
    let (data, delta) = noisy(&clean, &job.noise, config.seed.wrapping_add(job.noise_index as u64), grid)
        .map_err(fail(0.0))?;
    let exact = problem.exact_samples(grid);
    let sys = DiscreteSystem::new(&problem, grid)
        .and_then(|s| s.with_rhs(data.clone()))
        .map_err(|e| (delta, e.to_string()))?;
    let stop = if delta > 0.0 {
        StoppingRule::discrepancy(delta, config.c1)
    } else {
        StoppingRule::default()
    };
    let iterative = |scheme: IterationScheme, step: f64, max_iters: usize, lambda1: Option<f64>| {
        let mut params = IterationParams::new(scheme, step, max_iters).with_stop(stop);
        if let Some(l) = lambda1 {
            params = params.with_lambda1(l);
        }
        iterate_discrete(&sys, &params, &vec![0.0; grid.len()])
    };

    let method = job.method;
    let res: MethodResult<f64> = match *method {
        MethodSpec::Lavrentiev { alpha } => lavrentiev_solve_discrete(&sys, &RegularizationParams::lavrentiev(alpha)),
        MethodSpec::Quasisolution { radius, n_terms } => {
            let ProblemSpec::EigenTest { .. } = config.problem else {
                return Err((delta, "quasisolution needs the eigen_test spectrum".into()));
            };
            canonical_spectrum(CanonicalKernel::TriangularUnit, n_terms).and_then(|basis| {
                let f = interpolant(grid.nodes().to_vec(), data.clone());
                quasisolution_solve(&basis, &f, radius, n_terms, grid)
            })
        }
        MethodSpec::Fridman { step, lambda1, max_iters } => iterative(IterationScheme::Fridman, step, max_iters, lambda1),
        MethodSpec::Landweber { step, max_iters } => {
            let step = step.unwrap_or_else(|| 1.0 / sys.normal_operator_norm());
            iterative(IterationScheme::Landweber, step, max_iters, None)
        }
        MethodSpec::Averaged { step, max_iters } => iterative(IterationScheme::Averaged, step, max_iters, None),
        MethodSpec::Implicit { alpha, max_iters } => iterative(IterationScheme::Implicit, alpha, max_iters, None),
        MethodSpec::SteepestDescent { max_iters } => {
            iterative(IterationScheme::SteepestDescent, 0.0, max_iters, None)
        }
        MethodSpec::Transform { r, mu, n_terms, form } => {
            let noisy_problem = problem.with_rhs(interpolant(grid.nodes().to_vec(), data.clone()));
            let out = TransformConfig::new(r, mu, n_terms, grid.clone()).and_then(|c| match form {
                TransformForm::Block => solve_transform(&noisy_problem, &c, TransformMethod::Direct),
                TransformForm::Body => solve_alternative(&noisy_problem, &c, AlternativeForm::Body),
                TransformForm::Conclusions => solve_alternative(&noisy_problem, &c, AlternativeForm::Conclusions),
            });
            out.map(|t| MethodResult {
                residual_history: vec![t.residual],
                iterations_used: t.iterations,
                converged: t.psi1.iter().all(|v| v.is_finite()),
                params_echo: String::new(),
                solution: t.psi1,
            })
        }
        MethodSpec::KernelAbsorbed | MethodSpec::ConstantsFirst => {
            return Err((delta, "ODE route on a first-kind problem".into()))
        }
    }
    .map_err(|e| (delta, e.to_string()))?;

    let residual = sys.residual(&res.solution);
    Ok(RunRecord {
        method: method.id().into(),
        param_summary: summary(method),
        delta,
        rel_error: exact.and_then(|e| rel_error(grid, &res.solution, &e)),
        residual: Some(residual),
        iterations: res.iterations_used,
        wall_ms: None,
        converged: res.converged,
        profile: res.solution,
    })
}

fn ode_exact(x: f64) -> f64 {
    (PI * x / 2.0).cos()
}

/// `u″ − u = f` with `f = −(1 + π²/4)cos(πx/2)`.
fn ode_rhs(x: f64) -> f64 {
    -(1.0 + PI * PI / 4.0) * ode_exact(x)
}

fn run_ode(config: &ExperimentConfig, grid: &Grid<f64>, job: &Job) -> RunResult {
    let clean = grid.sample(ode_rhs);
    let (data, delta) = noisy(&clean, &job.noise, config.seed.wrapping_add(job.noise_index as u64), grid)
        .map_err(|e| (0.0, e))?;
    let bvp = OdeBvp::new(|_| 1.0, interpolant(grid.nodes().to_vec(), data));
    let red = ode_bvp_reduce(&bvp, grid, false).map_err(|e| (delta, e.to_string()))?;
    let sol = match job.method {
        MethodSpec::KernelAbsorbed => red.solve(),
        MethodSpec::ConstantsFirst => red.solve_constants_first(),
        _ => return Err((delta, "first-kind method on the ODE problem".into())),
    }
    .map_err(|e| (delta, e.to_string()))?;
    let exact = grid.sample(ode_exact);
    Ok(RunRecord {
        method: job.method.id().into(),
        param_summary: summary(job.method),
        delta,
        rel_error: rel_error(grid, &sol.u, &exact),
        residual: None,
        iterations: 0,
        wall_ms: None,
        converged: sol.u.iter().all(|v| v.is_finite()),
        profile: sol.u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolant_is_exact_at_nodes_and_linear_between() {
        let f = interpolant(vec![0.0, 0.5, 1.0], vec![1.0, 3.0, 2.0]);
        assert_eq!(f(0.0), 1.0);
        assert_eq!(f(0.5), 3.0);
        assert_eq!(f(1.0), 2.0);
        assert_eq!(f(0.25), 2.0);
        assert_eq!(f(-1.0), 1.0);
        assert_eq!(f(2.0), 2.0);
    }

    #[test]
    fn library_kernels_carry_consistent_data() {
        let g = Grid::new(0.0, 1.0, fredholm::QuadRule::Simpson, 129).unwrap();
        for kernel in [KernelName::Exponential, KernelName::Smooth] {
            let p = build_problem(&ProblemSpec::Kernel { kernel }).unwrap();
            let sys = DiscreteSystem::new(&p, &g).unwrap();
            let r = sys.residual(&p.exact_samples(&g).unwrap());
            // the exponential kernel has a kink on the diagonal, so its quadrature error is O(h²)
            assert!(r < 1e-4, "{kernel:?} {r}");
        }
        assert!(build_problem(&ProblemSpec::OdeCosine).is_none());
    }

    #[test]
    fn ode_data_matches_exact_solution() {
        // u″ − u at a few points by central differences
        for x in [0.2, 0.5, 0.8] {
            let h = 1e-4;
            let u2 = (ode_exact(x + h) - 2.0 * ode_exact(x) + ode_exact(x - h)) / (h * h);
            assert!((u2 - ode_exact(x) - ode_rhs(x)).abs() < 1e-5);
        }
    }
}
