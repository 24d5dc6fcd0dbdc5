//! Derivative-free Nelder–Mead minimizer with dimension-adaptive coefficients and one
//! optional restart from a freshly built simplex around the incumbent.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    /// Stop when `f_worst − f_best ≤ rel_tol · |f_best| + abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on objective evaluations, restart included.
    pub max_evaluations: usize,
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: f64,
    /// Rebuild the simplex once around the best point after the first termination.
    pub restart: bool,
    /// Seed for the sign pattern of the restart simplex.
    pub restart_seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_evaluations: 20_000,
            initial_step: 0.05,
            restart: true,
            restart_seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Whether a pass stopped on the tolerance rather than the evaluation cap.
    pub converged: bool,
    pub restarted: bool,
}

struct Counter<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimizes `f` starting from `x0`.
pub fn minimize<F>(f: F, x0: &[f64], opts: &Options) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(!x0.is_empty(), "cannot optimize over zero parameters");
    let mut counter = Counter { f, evaluations: 0 };
    let first_value = counter.eval(x0);
    let steps = vec![opts.initial_step; x0.len()];
    let simplex = build_simplex(&mut counter, x0, first_value, &steps);
    let (mut best_x, mut best_f, converged) = run(&mut counter, simplex, opts);

    let mut restarted = false;
    let mut any_converged = converged;
    if opts.restart && counter.evaluations + x0.len() < opts.max_evaluations {
        restarted = true;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.restart_seed);
        let steps: Vec<f64> = (0..x0.len())
            .map(|_| {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * opts.initial_step * rng.random_range(0.5..1.0)
            })
            .collect();
        let simplex = build_simplex(&mut counter, &best_x, best_f, &steps);
        let (x, v, conv) = run(&mut counter, simplex, opts);
        any_converged |= conv;
        if v < best_f {
            best_x = x;
            best_f = v;
        }
    }

    Minimum {
        x: best_x,
        value: best_f,
        evaluations: counter.evaluations,
        converged: any_converged,
        restarted,
    }
}

type Simplex = Vec<(Vec<f64>, f64)>;

fn build_simplex<F: FnMut(&[f64]) -> f64>(
    counter: &mut Counter<F>,
    x0: &[f64],
    f0: f64,
    steps: &[f64],
) -> Simplex {
    let mut simplex = Vec::with_capacity(x0.len() + 1);
    simplex.push((x0.to_vec(), f0));
    for (i, step) in steps.iter().enumerate() {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = counter.eval(&x);
        simplex.push((x, v));
    }
    simplex
}

fn run<F: FnMut(&[f64]) -> f64>(
    counter: &mut Counter<F>,
    mut simplex: Simplex,
    opts: &Options,
) -> (Vec<f64>, f64, bool) {
    let n = simplex.len() - 1;
    let dim = n as f64;
    // Gao & Han coefficients
    let alpha = 1.0;
    let gamma = 1.0 + 2.0 / dim;
    let rho = 0.75 - 1.0 / (2.0 * dim);
    let sigma = 1.0 - 1.0 / dim;

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;
        if f_worst - f_best <= opts.rel_tol * f_best.abs() + opts.abs_tol {
            converged = true;
            break;
        }
        // an iteration costs at most n + 2 evaluations (reflection, contraction, shrink)
        if counter.evaluations + n + 2 > opts.max_evaluations {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim;
            }
        }
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let worst = simplex[n].0.clone();
        let xr = along(alpha, &worst);
        let fr = counter.eval(&xr);
        let f_second = simplex[n - 1].1;

        if fr < f_best {
            let xe = along(gamma, &worst);
            let fe = counter.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < f_worst {
            let xc = along(alpha * rho, &worst);
            let fc = counter.eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho, &worst);
            let fc = counter.eval(&xc);
            (xc, fc)
        };
        if fc < f_worst.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }

        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor
                .iter()
                .zip(&vertex.0)
                .map(|(a, v)| a + sigma * (v - a))
                .collect();
            let v = counter.eval(&x);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v, converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    }

    #[test]
    fn minimizes_quadratic_in_sixteen_dimensions() {
        let target: Vec<f64> = (0..16).map(|i| 0.1 * i as f64 - 0.5).collect();
        let f = |x: &[f64]| {
            x.iter()
                .zip(&target)
                .enumerate()
                .map(|(i, (a, b))| (1.0 + i as f64) * (a - b).powi(2))
                .sum::<f64>()
        };
        let opts = Options {
            initial_step: 0.2,
            ..Options::default()
        };
        let m = minimize(f, &[0.0; 16], &opts);
        assert!(m.value < 1e-8, "{}", m.value);
        assert!(m.evaluations <= opts.max_evaluations);
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn minimizes_rosenbrock() {
        let opts = Options {
            initial_step: 0.5,
            max_evaluations: 5000,
            ..Options::default()
        };
        let m = minimize(rosenbrock, &[-1.2, 1.0], &opts);
        assert!(m.value < 1e-10, "{}", m.value);
        assert!(m.converged);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| (x[0] - 3.0).abs() + (x[1] + 1.0).abs();
        let start = [0.0, 0.0];
        let m = minimize(f, &start, &Options::default());
        assert!(m.value <= f(&start));
    }

    #[test]
    fn nan_is_treated_as_infinite() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 1.0).powi(2) + x[1] * x[1]
            }
        };
        let m = minimize(f, &[0.5, 0.5], &Options::default());
        assert!(m.value.is_finite() && m.value < 1e-10);
    }

    #[test]
    fn respects_evaluation_cap() {
        let opts = Options {
            max_evaluations: 50,
            restart: false,
            ..Options::default()
        };
        let m = minimize(rosenbrock, &[-1.2, 1.0, 0.3, 0.1], &opts);
        assert!(!m.converged);
        assert!(m.evaluations <= 50);
    }
}
