//! Nelder–Mead simplex search and a seeded multi-start driver.
//!
//! The simplex is the textbook one: order the n + 1 vertices, reflect the worst
//! through the centroid of the others, then expand, contract (outside or
//! inside) or shrink toward the best vertex. Ties in objective value are
//! broken by vertex index so runs are reproducible. Box bounds, when given,
//! are enforced by clamping every trial point before it is evaluated.

use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::parallel;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    /// Objective-call budget per run; `None` means 200·n.
    pub max_evals: Option<usize>,
    /// Simplex diameter (max-norm distance from the best vertex).
    pub x_tol: f64,
    /// Objective spread, relative to |f_best| with an absolute floor of f_tol².
    pub f_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            max_evals: None,
            x_tol: 1e-6,
            f_tol: 1e-8,
            restarts: 1,
            seed: 0,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.05,
        }
    }
}

impl OptimizerOptions {
    /// Defaults scaled to an amplitude box [−u_max, u_max].
    pub fn for_amplitude_bound(u_max: f64) -> Self {
        Self {
            x_tol: 1e-6 * u_max,
            initial_step: 0.05 * u_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Optimizer(format!("invalid option: {what}")));
        if !(self.reflection > 0.0) {
            return bad("reflection must be > 0");
        }
        if !(self.expansion > 1.0) {
            return bad("expansion must be > 1");
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("contraction must lie in (0, 1)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink must lie in (0, 1)");
        }
        if !(self.initial_step > 0.0) {
            return bad("initial_step must be > 0");
        }
        if !(self.x_tol >= 0.0) || !(self.f_tol >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        if self.restarts == 0 {
            return bad("restarts must be ≥ 1");
        }
        if self.max_evals == Some(0) {
            return bad("max_evals must be ≥ 1");
        }
        Ok(())
    }

    pub fn eval_budget(&self, n: usize) -> usize {
        self.max_evals.unwrap_or(200 * n)
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                context: "bounds",
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::Optimizer("lower bound above upper bound".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn symmetric(n: usize, half_width: f64) -> Self {
        Self {
            lower: vec![-half_width; n],
            upper: vec![half_width; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..=hi)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    /// Number of objective calls made.
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Which move an iteration accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Reflect,
    Expand,
    ContractOutside,
    ContractInside,
    Shrink,
}

/// Simplex after one iteration, vertices sorted best first.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub step: Step,
    pub vertices: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// Minimize `objective` from `x0`.
pub fn nelder_mead<F>(objective: F, x0: &[f64], options: &OptimizerOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    run(objective, x0, None, options, None)
}

/// Minimize within `bounds`, clamping every trial point into the box.
pub fn nelder_mead_bounded<F>(
    objective: F,
    x0: &[f64],
    bounds: &Bounds,
    options: &OptimizerOptions,
) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    if bounds.dim() != x0.len() {
        return Err(Error::DimensionMismatch {
            context: "bounds vs start point",
            expected: x0.len(),
            found: bounds.dim(),
        });
    }
    run(objective, x0, Some(bounds), options, None)
}

/// As [`nelder_mead`], also returning the simplex after every iteration.
pub fn nelder_mead_traced<F>(
    objective: F,
    x0: &[f64],
    options: &OptimizerOptions,
) -> Result<(Minimum, Vec<IterationRecord>)>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut trace = Vec::new();
    let min = run(objective, x0, None, options, Some(&mut trace))?;
    Ok((min, trace))
}

fn run<F>(
    mut objective: F,
    x0: &[f64],
    bounds: Option<&Bounds>,
    options: &OptimizerOptions,
    mut trace: Option<&mut Vec<IterationRecord>>,
) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    options.validate()?;
    let n = x0.len();
    if n == 0 {
        return Err(Error::Optimizer("empty start point".into()));
    }
    let budget = options.eval_budget(n);
    let evals = Cell::new(0usize);
    let mut eval = |x: &[f64]| -> f64 {
        evals.set(evals.get() + 1);
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let project = |mut x: Vec<f64>| -> Vec<f64> {
        if let Some(b) = bounds {
            b.clamp(&mut x);
        }
        x
    };

    let mut start = x0.to_vec();
    if let Some(b) = bounds {
        b.clamp(&mut start);
    }
    let mut vertices = Vec::with_capacity(n + 1);
    vertices.push(start.clone());
    for i in 0..n {
        let mut v = start.clone();
        let step = options.initial_step;
        v[i] += step;
        if let Some(b) = bounds {
            if v[i] > b.upper[i] {
                v[i] = (start[i] - step).max(b.lower[i]);
            }
        }
        vertices.push(v);
    }
    let mut values = Vec::with_capacity(n + 1);
    for v in &vertices {
        let f = eval(v);
        if !f.is_finite() {
            return Err(Error::Optimizer(format!(
                "objective is not finite on the initial simplex (f = {f})"
            )));
        }
        values.push(f);
    }

    let (alpha, gamma, rho, sigma) = (
        options.reflection,
        options.expansion,
        options.contraction,
        options.shrink,
    );
    let mut iterations = 0usize;
    let mut converged = false;

    loop {
        sort_simplex(&mut vertices, &mut values);
        let best = values[0];
        let worst = values[n];
        let spread = (worst - best).abs();
        let diameter = vertices[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&vertices[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter <= options.x_tol
            && spread <= options.f_tol * best.abs() + options.f_tol * options.f_tol
        {
            converged = true;
            break;
        }
        if evals.get() >= budget {
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &vertices[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            // centroid + t (centroid − from)
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + t * (c - x))
                .collect()
        };

        let x_r = project(along(alpha, &vertices[n]));
        let f_r = eval(&x_r);
        let step = if f_r < values[0] {
            let x_e = project(along(alpha * gamma, &vertices[n]));
            let f_e = eval(&x_e);
            if f_e < f_r {
                vertices[n] = x_e;
                values[n] = f_e;
                Step::Expand
            } else {
                vertices[n] = x_r;
                values[n] = f_r;
                Step::Reflect
            }
        } else if f_r < values[n - 1] {
            vertices[n] = x_r;
            values[n] = f_r;
            Step::Reflect
        } else {
            let outside = f_r < values[n];
            let (x_c, f_c) = if outside {
                let x = project(along(alpha * rho, &vertices[n]));
                let f = eval(&x);
                (x, f)
            } else {
                let x = project(along(-rho, &vertices[n]));
                let f = eval(&x);
                (x, f)
            };
            let accept = if outside { f_c <= f_r } else { f_c < values[n] };
            if accept {
                vertices[n] = x_c;
                values[n] = f_c;
                if outside {
                    Step::ContractOutside
                } else {
                    Step::ContractInside
                }
            } else {
                let anchor = vertices[0].clone();
                for i in 1..=n {
                    let shrunk: Vec<f64> = anchor
                        .iter()
                        .zip(&vertices[i])
                        .map(|(a, x)| a + sigma * (x - a))
                        .collect();
                    let shrunk = project(shrunk);
                    values[i] = eval(&shrunk);
                    vertices[i] = shrunk;
                }
                Step::Shrink
            }
        };
        iterations += 1;

        if let Some(t) = trace.as_deref_mut() {
            let (mut vs, mut fs) = (vertices.clone(), values.clone());
            sort_simplex(&mut vs, &mut fs);
            t.push(IterationRecord {
                iteration: iterations,
                step,
                vertices: vs,
                values: fs,
            });
        }
    }

    sort_simplex(&mut vertices, &mut values);
    Ok(Minimum {
        x: vertices.swap_remove(0),
        f: values[0],
        evals: evals.get(),
        iterations,
        converged,
    })
}

/// Stable sort by value, so equal values keep their vertex order.
fn sort_simplex(vertices: &mut Vec<Vec<f64>>, values: &mut [f64]) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut taken: Vec<Option<Vec<f64>>> = vertices.drain(..).map(Some).collect();
    let old_values = values.to_vec();
    for (slot, &k) in order.iter().enumerate() {
        values[slot] = old_values[k];
        vertices.push(taken[k].take().expect("each vertex is moved once"));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartResult {
    pub best: Minimum,
    /// Index of the run that produced `best`.
    pub best_run: usize,
    pub runs: Vec<Minimum>,
    /// Objective calls summed over all runs.
    pub total_evals: usize,
}

/// RNG for run `index` of a multi-start with master seed `seed`.
///
/// Each run draws from its own ChaCha stream, so results do not depend on
/// the order in which runs execute.
pub fn run_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Best of `options.restarts` bounded Nelder–Mead runs.
///
/// Run 0 starts from the zero vector when it lies inside `bounds`; the others
/// start from points drawn uniformly from the box.
pub fn multi_start<F>(
    objective: F,
    bounds: &Bounds,
    options: &OptimizerOptions,
) -> Result<MultiStartResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    multi_start_with(objective, bounds, &[], options)
}

/// As [`multi_start`], with `extra_starts` used for runs 1, 2, … before any
/// random draws.
pub fn multi_start_with<F>(
    objective: F,
    bounds: &Bounds,
    extra_starts: &[Vec<f64>],
    options: &OptimizerOptions,
) -> Result<MultiStartResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    options.validate()?;
    let n = bounds.dim();
    if n == 0 {
        return Err(Error::Optimizer("empty search space".into()));
    }
    if let Some(bad) = extra_starts.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch {
            context: "extra start point",
            expected: n,
            found: bad.len(),
        });
    }
    let zero = vec![0.0; n];
    let runs = parallel::map_indexed(options.restarts, |r| {
        let mut rng = run_rng(options.seed, r);
        let start = if r == 0 && bounds.contains(&zero) {
            zero.clone()
        } else if r >= 1 && r - 1 < extra_starts.len() {
            extra_starts[r - 1].clone()
        } else {
            bounds.sample(&mut rng)
        };
        nelder_mead_bounded(&objective, &start, bounds, options)
    });
    let runs: Vec<Minimum> = runs.into_iter().collect::<Result<_>>()?;
    let mut best_run = 0;
    for (i, m) in runs.iter().enumerate() {
        if m.f < runs[best_run].f {
            best_run = i;
        }
    }
    Ok(MultiStartResult {
        best: runs[best_run].clone(),
        best_run,
        total_evals: runs.iter().map(|m| m.evals).sum(),
        runs,
    })
}
