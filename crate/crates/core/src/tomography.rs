//! From detector counts to a physical density matrix.
//!
//! Stokes parameters are estimated with the tap-off factor of two
//! (`s₀ = 2(N₀ + N₁)/N_in`, `s_k = 2(N₀ − N₁)/N_in`), inverted linearly, and then refined
//! by a maximum-likelihood search over Cholesky-parameterized states.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::experiment::{monitor_spm, output_spm, CountData, MeasurementModel, PlateKind, Run};
use crate::linalg::{hermitian_eigen, CMatrix4};
use crate::nelder_mead::{self, Options};
use crate::qstate::{
    fidelity, maximally_mixed, purity, trace_distance, validate_density, DensityMatrix,
};
use crate::stokes::{extract_tpsp, reconstruct, OnePathStokes, StokesSet, TwoPathStokes};

/// Two phases are the same configuration when they differ by less than this.
pub const PHASE_TOLERANCE: f64 = 1e-9;
/// Smallest linear-inversion trace that may be renormalized.
pub const RENORMALIZE_MIN_TRACE: f64 = 0.5;
/// Diagonal loading applied by [`cholesky_repair`].
pub const REPAIR_EPSILON: f64 = 1e-6;
/// Floor on the predicted count in the Gaussian likelihood denominator.
pub const COST_DENOMINATOR_FLOOR: f64 = 0.5;
/// Edge length of the initial Nelder–Mead simplex in parameter space.
pub const MLE_INITIAL_STEP: f64 = 0.02;

/// Standard errors laid out like a [`StokesSet`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StokesErrors {
    pub path0: [f64; 4],
    pub path1: [f64; 4],
    pub cross_re: [f64; 4],
    pub cross_im: [f64; 4],
}

impl StokesErrors {
    pub fn max(&self) -> f64 {
        self.path0
            .iter()
            .chain(&self.path1)
            .chain(&self.cross_re)
            .chain(&self.cross_im)
            .fold(0.0, |a, &b| a.max(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesEstimate {
    pub set: StokesSet,
    pub std_errs: StokesErrors,
    /// Output-arm parameters, indexed `[out_path][0 for φ = 0, 1 for φ = π/2]`.
    pub fringes: [[OnePathStokes; 2]; 2],
}

/// Estimator of the form `Σ_r Σ_d c[r][d] · N[r][d]`.
#[derive(Debug, Clone, PartialEq)]
struct CountFunctional {
    coeffs: Vec<[f64; 8]>,
}

impl CountFunctional {
    fn zero(runs: usize) -> Self {
        CountFunctional {
            coeffs: alloc::vec![[0.0; 8]; runs],
        }
    }

    /// Pooled `2 (N₀ ± N₁) / Σ n_in` of one SPM over the selected runs.
    fn pooled(data: &CountData, spm: usize, index: usize, select: impl Fn(&Run) -> bool) -> Self {
        let mut f = CountFunctional::zero(data.runs.len());
        let total: u64 = data.runs.iter().filter(|r| select(r)).map(|r| r.n_in).sum();
        let sign = if index == 0 { 1.0 } else { -1.0 };
        for (r, run) in data.runs.iter().enumerate() {
            if select(run) {
                f.coeffs[r][2 * spm] = 2.0 / total as f64;
                f.coeffs[r][2 * spm + 1] = sign * 2.0 / total as f64;
            }
        }
        f
    }

    fn combine(&self, a: f64, other: &CountFunctional, b: f64) -> Self {
        CountFunctional {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| core::array::from_fn(|d| a * x[d] + b * y[d]))
                .collect(),
        }
    }

    fn value(&self, data: &CountData) -> f64 {
        self.coeffs
            .iter()
            .zip(&data.runs)
            .map(|(c, run)| (0..8).map(|d| c[d] * run.counts[d] as f64).sum::<f64>())
            .sum()
    }

    /// Plug-in multinomial variance, `Σ_r [Σ_d c² N − (Σ_d c N)² / n_r]`.
    fn std_err(&self, data: &CountData) -> f64 {
        let var: f64 = self
            .coeffs
            .iter()
            .zip(&data.runs)
            .filter(|(_, run)| run.n_in > 0)
            .map(|(c, run)| {
                let first: f64 = (0..8).map(|d| c[d] * run.counts[d] as f64).sum();
                let second: f64 = (0..8).map(|d| c[d] * c[d] * run.counts[d] as f64).sum();
                second - first * first / run.n_in as f64
            })
            .sum();
        var.max(0.0).sqrt()
    }
}

fn same_phase(a: f64, b: f64) -> bool {
    (a - b).abs() <= PHASE_TOLERANCE
}

fn kind_for_index(index: usize) -> Option<PlateKind> {
    PlateKind::ALL
        .into_iter()
        .find(|k| k.stokes_index() == index)
}

fn check_record(data: &CountData) -> Result<()> {
    for phase in [0.0, FRAC_PI_2] {
        for kind in PlateKind::ALL {
            let found = data
                .runs
                .iter()
                .any(|r| r.setting.kind == kind && same_phase(r.phase, phase));
            if !found {
                return Err(Error::MissingRun {
                    setting: kind,
                    phase,
                });
            }
        }
    }
    if let Some(run) = data.runs.iter().position(|r| r.n_in == 0) {
        return Err(Error::ZeroBudget { run });
    }
    Ok(())
}

/// Stokes parameters and their propagated standard errors from a count record.
///
/// Input-arm parameters pool the monitor SPMs over every phase; `s₀` pools every run.
/// Output-arm parameters at φ ∈ {0, π/2} come from SPM₃ (output path 0) and SPM₂
/// (output path 1), and the two-path parameters average the extractions from both.
pub fn estimate_stokes(data: &CountData) -> Result<StokesEstimate> {
    check_record(data)?;

    let monitor = |path: usize, index: usize| {
        let kind = kind_for_index(index);
        CountFunctional::pooled(data, monitor_spm(path), index, |r| {
            kind.is_none_or(|k| r.setting.kind == k)
        })
    };
    let fringe = |out_path: usize, phase: f64, index: usize| {
        let kind = kind_for_index(index);
        CountFunctional::pooled(data, output_spm(out_path), index, |r| {
            same_phase(r.phase, phase) && kind.is_none_or(|k| r.setting.kind == k)
        })
    };

    let mut set = StokesSet::default();
    let mut errs = StokesErrors::default();
    for n in 0..4 {
        let (m0, m1) = (monitor(0, n), monitor(1, n));
        set.path0.s[n] = m0.value(data);
        set.path1.s[n] = m1.value(data);
        errs.path0[n] = m0.std_err(data);
        errs.path1[n] = m1.std_err(data);
    }

    let phases = [0.0, FRAC_PI_2];
    let mut fringes = [[OnePathStokes::default(); 2]; 2];
    let mut fringe_fns: [[Vec<CountFunctional>; 2]; 2] = Default::default();
    for out_path in 0..2 {
        for (pi, &phase) in phases.iter().enumerate() {
            let fns: Vec<CountFunctional> = (0..4).map(|n| fringe(out_path, phase, n)).collect();
            fringes[out_path][pi] = OnePathStokes {
                path: out_path,
                s: core::array::from_fn(|n| fns[n].value(data)),
            };
            fringe_fns[out_path][pi] = fns;
        }
    }

    let sums = set.path_sums();
    let from0 = extract_tpsp(&sums, &fringes[0][0], &fringes[0][1], 0);
    let from1 = extract_tpsp(&sums, &fringes[1][0], &fringes[1][1], 1);
    set.cross = TwoPathStokes {
        s: core::array::from_fn(|n| (from0.s[n] + from1.s[n]) * 0.5),
    };
    for n in 0..4 {
        // averaged extraction: Re Sₙ = ½(f¹(0) − f⁰(0)), Im Sₙ = ½(f⁰(π/2) − f¹(π/2))
        let re = fringe_fns[1][0][n].combine(0.5, &fringe_fns[0][0][n], -0.5);
        let im = fringe_fns[0][1][n].combine(0.5, &fringe_fns[1][1][n], -0.5);
        errs.cross_re[n] = re.std_err(data);
        errs.cross_im[n] = im.std_err(data);
    }

    Ok(StokesEstimate {
        set,
        std_errs: errs,
        fringes,
    })
}

/// Linear inversion of an estimate; optionally divided by its trace.
///
/// The result is not checked for positivity and carries no validity flag.
pub fn linear_inversion(est: &StokesEstimate, renormalize: bool) -> Result<DensityMatrix> {
    let raw = reconstruct(&est.set);
    if !renormalize {
        return Ok(raw);
    }
    let trace = raw.trace();
    if !(trace > RENORMALIZE_MIN_TRACE) {
        return Err(Error::DegenerateCountRecord { trace });
    }
    Ok(DensityMatrix::from_raw(raw.matrix().scale(1.0 / trace)))
}

/// Lower-triangular off-diagonal positions in parameter order.
const LOWER: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

/// Cholesky-style parameterization `ρ(t) = T†T / Tr(T†T)`.
///
/// `t[0..4]` is the real diagonal of the lower-triangular `T`; the six complex entries
/// below the diagonal follow as `(re, im)` pairs in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleParams {
    pub t: [f64; 16],
}

impl MleParams {
    pub fn t_matrix(&self) -> CMatrix4 {
        let mut m = CMatrix4::zeros();
        for i in 0..4 {
            m.0[i][i] = Complex64::new(self.t[i], 0.0);
        }
        for (k, &(i, j)) in LOWER.iter().enumerate() {
            m.0[i][j] = Complex64::new(self.t[4 + 2 * k], self.t[5 + 2 * k]);
        }
        m
    }

    pub fn from_t_matrix(t: &CMatrix4) -> Self {
        let mut p = [0.0; 16];
        for i in 0..4 {
            p[i] = t.0[i][i].re;
        }
        for (k, &(i, j)) in LOWER.iter().enumerate() {
            p[4 + 2 * k] = t.0[i][j].re;
            p[5 + 2 * k] = t.0[i][j].im;
        }
        MleParams { t: p }
    }

    /// Unnormalized `T†T`.
    fn gram(&self) -> CMatrix4 {
        let t = self.t_matrix();
        t.adjoint() * t
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        let g = self.gram();
        let trace = g.trace().re;
        if !(trace > 0.0) || !trace.is_finite() {
            return Err(Error::DegenerateParameters);
        }
        Ok(DensityMatrix::trusted(
            g.scale(1.0 / trace).hermitian_part(),
        ))
    }
}

/// Cholesky factor `L` with `A = L L†` of a Hermitian positive-definite matrix.
fn cholesky_lower(a: &CMatrix4) -> Option<CMatrix4> {
    let mut l = CMatrix4::zeros();
    for j in 0..4 {
        let mut d = a.0[j][j].re;
        for k in 0..j {
            d -= l.0[j][k].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l.0[j][j] = Complex64::new(djj, 0.0);
        for i in (j + 1)..4 {
            let mut s = a.0[i][j];
            for k in 0..j {
                s -= l.0[i][k] * l.0[j][k].conj();
            }
            l.0[i][j] = s / djj;
        }
    }
    Some(l)
}

/// Eigenvalue clipping: negative eigenvalues set to zero, trace renormalized.
///
/// Falls back to the maximally mixed state when nothing positive remains.
pub fn clip_to_physical(raw: &DensityMatrix) -> DensityMatrix {
    let eig = hermitian_eigen(raw.matrix());
    let total: f64 = eig.values.iter().map(|x| x.max(0.0)).sum();
    if !(total > 1e-300) {
        return maximally_mixed();
    }
    DensityMatrix::trusted(eig.map_values(|x| x.max(0.0) / total).hermitian_part())
}

/// Factors a positive-definite matrix as `T†T` with `T` lower triangular.
fn factor(m: &CMatrix4) -> Option<MleParams> {
    // reverse the basis so a standard L L† factor becomes the T†T we need
    let mut reversed = CMatrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            reversed.0[i][j] = m.0[3 - i][3 - j];
        }
    }
    let l = cholesky_lower(&reversed)?;
    // T = (J L J)†
    let mut t = CMatrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            t.0[i][j] = l.0[3 - j][3 - i].conj();
        }
    }
    Some(MleParams::from_t_matrix(&t))
}

impl MleParams {
    /// Exact parameters of a full-rank state; `None` if `rho` is not positive definite.
    pub fn from_density(rho: &DensityMatrix) -> Option<MleParams> {
        factor(rho.matrix())
    }
}

/// Starting parameters for the likelihood search from a possibly unphysical matrix.
///
/// Clips the spectrum, renormalizes, loads the diagonal with [`REPAIR_EPSILON`] and
/// factors the result as `T†T` with `T` lower triangular.
pub fn cholesky_repair(raw: &DensityMatrix) -> MleParams {
    let clipped = clip_to_physical(raw);
    let loaded = *clipped.matrix() + CMatrix4::identity().scale(REPAIR_EPSILON);
    factor(&loaded).expect("diagonal loading keeps the matrix positive definite")
}

/// Precomputed measurement models of every run at nominal plate angles.
#[derive(Debug, Clone)]
pub struct LikelihoodProblem {
    runs: Vec<(MeasurementModel, f64, [f64; 8])>,
}

impl LikelihoodProblem {
    pub fn new(data: &CountData) -> Self {
        LikelihoodProblem {
            runs: data
                .runs
                .iter()
                .map(|r| {
                    (
                        MeasurementModel::nominal(&r.setting, r.phase),
                        r.n_in as f64,
                        r.counts.map(|c| c as f64),
                    )
                })
                .collect(),
        }
    }

    /// Gaussian negative log-likelihood of a trace-one matrix.
    pub fn cost_of(&self, rho: &CMatrix4) -> f64 {
        let mut cost = 0.0;
        for (model, n_in, counts) in &self.runs {
            let probs = model.probabilities(rho);
            for d in 0..8 {
                let predicted = n_in * probs[d];
                let diff = predicted - counts[d];
                cost += diff * diff / (2.0 * predicted.max(COST_DENOMINATOR_FLOOR));
            }
        }
        cost
    }

    pub fn cost(&self, params: &MleParams) -> Result<f64> {
        Ok(self.cost_of(params.density()?.matrix()))
    }
}

/// `Σ_runs Σ_detectors (n_in·p − N)² / (2·max(n_in·p, 0.5))` at `ρ(t)`.
pub fn mle_cost(params: &MleParams, data: &CountData) -> Result<f64> {
    LikelihoodProblem::new(data).cost(params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleDiagnostics {
    pub cost_initial: f64,
    pub cost_final: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub fidelity: f64,
    pub trace_distance: f64,
    pub purity_est: f64,
    pub purity_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionResult {
    pub rho_linear: DensityMatrix,
    pub rho_mle: Option<DensityMatrix>,
    pub diagnostics: Option<MleDiagnostics>,
    pub metrics: Option<Metrics>,
}

impl ReconstructionResult {
    /// The physical estimate: the MLE state, or the clipped linear inversion.
    pub fn best_estimate(&self) -> DensityMatrix {
        self.rho_mle
            .unwrap_or_else(|| clip_to_physical(&self.rho_linear))
    }
}

/// Optimizer settings used by [`mle_fit`].
pub fn mle_options() -> Options {
    Options {
        rel_tol: 1e-10,
        abs_tol: 0.0,
        max_evaluations: 20_000,
        initial_step: MLE_INITIAL_STEP,
        restart: true,
        restart_seed: 0x7071_6d6c,
    }
}

/// Maximum-likelihood refinement starting from `init` (typically the linear inversion).
///
/// `init` is passed through [`cholesky_repair`] first, so unphysical starting points
/// are accepted. The returned `rho_linear` is `init`.
pub fn mle_fit(data: &CountData, init: &DensityMatrix) -> Result<ReconstructionResult> {
    let problem = LikelihoodProblem::new(data);
    let start = cholesky_repair(init);
    let cost_initial = problem.cost(&start)?;

    let objective = |x: &[f64]| -> f64 {
        let mut t = [0.0; 16];
        t.copy_from_slice(x);
        problem.cost(&MleParams { t }).unwrap_or(f64::INFINITY)
    };
    let best = nelder_mead::minimize(objective, &start.t, &mle_options());
    if !best.value.is_finite() {
        return Err(Error::OptimizerFailure {
            evaluations: best.evaluations,
            cost: best.value,
        });
    }
    let mut t = [0.0; 16];
    t.copy_from_slice(&best.x);
    let params = MleParams { t };
    let rho_mle = params.density()?;
    let cost_final = problem.cost_of(rho_mle.matrix());

    Ok(ReconstructionResult {
        rho_linear: *init,
        rho_mle: Some(rho_mle),
        diagnostics: Some(MleDiagnostics {
            cost_initial,
            cost_final,
            iterations: best.evaluations,
            converged: best.converged,
        }),
        metrics: None,
    })
}

/// Quality metrics of the result's physical estimate against a reference state.
pub fn report(reference: &DensityMatrix, result: &ReconstructionResult) -> Result<Metrics> {
    validate_density(reference).into_result()?;
    let estimate = result.best_estimate();
    Ok(Metrics {
        fidelity: fidelity(reference, &estimate)?,
        trace_distance: trace_distance(reference, &estimate),
        purity_est: purity(&estimate),
        purity_ref: purity(reference),
    })
}

/// Estimate, invert (renormalized) and optionally refine by MLE.
pub fn reconstruct_counts(
    data: &CountData,
    use_mle: bool,
) -> Result<(StokesEstimate, ReconstructionResult)> {
    let est = estimate_stokes(data)?;
    let rho_linear = linear_inversion(&est, true)?;
    let result = if use_mle {
        mle_fit(data, &rho_linear)?
    } else {
        ReconstructionResult {
            rho_linear,
            rho_mle: None,
            diagnostics: None,
            metrics: None,
        }
    };
    Ok((est, result))
}
