//! Monte-Carlo model of the tomography bench.
//!
//! Each photon first meets a 1:1 tap-off on its path. Reflected photons go to the
//! monitor Stokes measurer of that path (SPM₀ for path 0, SPM₁ for path 1); transmitted
//! photons pass the phase shifter and the output beam splitter, after which output
//! path 0 is collected by SPM₃ and output path 1 by SPM₂. Every measurer applies the
//! run's wave plate (if any) and splits H → D0, V → D1 on a polarizing beam splitter.
//!
//! A run fixes one plate setting (shared by all four measurers) and one phase. Runs
//! draw their counts from independent ChaCha streams keyed on `(seed, run index)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::CMatrix4;
use crate::optics::{hwp, interferometer, plate_on_path, qwp, OpticalUnitary};
use crate::qstate::{basis_index, validate_density, DensityMatrix};

/// Wave plate inserted in front of the polarizing beam splitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlateKind {
    /// No plate: D0 − D1 measures `s₁`.
    None,
    /// Half-wave plate at π/8: measures `s₂`.
    Hwp,
    /// Quarter-wave plate at π/4: measures `s₃`.
    Qwp,
}

impl PlateKind {
    pub const ALL: [PlateKind; 3] = [PlateKind::None, PlateKind::Hwp, PlateKind::Qwp];

    pub fn as_str(self) -> &'static str {
        match self {
            PlateKind::None => "none",
            PlateKind::Hwp => "hwp",
            PlateKind::Qwp => "qwp",
        }
    }

    pub fn parse(s: &str) -> Option<PlateKind> {
        match s {
            "none" => Some(PlateKind::None),
            "hwp" => Some(PlateKind::Hwp),
            "qwp" => Some(PlateKind::Qwp),
            _ => None,
        }
    }

    /// Fast-axis angle at which the plate maps the measured basis onto H/V.
    pub fn canonical_angle(self) -> f64 {
        match self {
            PlateKind::None => 0.0,
            PlateKind::Hwp => FRAC_PI_8,
            PlateKind::Qwp => FRAC_PI_4,
        }
    }

    /// Index `k` of the Stokes parameter `s_k` that `N₀ − N₁` measures.
    pub fn stokes_index(self) -> usize {
        match self {
            PlateKind::None => 1,
            PlateKind::Hwp => 2,
            PlateKind::Qwp => 3,
        }
    }

    /// The 2×2 plate unitary at `angle` (identity for `None`).
    pub fn unitary(self, angle: f64) -> OpticalUnitary<2> {
        match self {
            PlateKind::None => OpticalUnitary::identity(),
            PlateKind::Hwp => hwp(angle),
            PlateKind::Qwp => qwp(angle),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateSetting {
    pub kind: PlateKind,
    pub nominal_angle: f64,
}

impl PlateSetting {
    pub fn canonical(kind: PlateKind) -> Self {
        PlateSetting {
            kind,
            nominal_angle: kind.canonical_angle(),
        }
    }
}

/// One of the eight detectors on the bench.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Detector {
    Spm0D0,
    Spm0D1,
    Spm1D0,
    Spm1D1,
    Spm2D0,
    Spm2D1,
    Spm3D0,
    Spm3D1,
}

impl Detector {
    pub const ALL: [Detector; 8] = [
        Detector::Spm0D0,
        Detector::Spm0D1,
        Detector::Spm1D0,
        Detector::Spm1D1,
        Detector::Spm2D0,
        Detector::Spm2D1,
        Detector::Spm3D0,
        Detector::Spm3D1,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn spm(self) -> usize {
        self.index() / 2
    }

    /// 0 for D0 (transmitted, H after the plate), 1 for D1.
    pub fn outcome(self) -> usize {
        self.index() % 2
    }

    pub fn at(spm: usize, outcome: usize) -> Detector {
        Detector::ALL[2 * spm + outcome]
    }

    pub fn id(self) -> &'static str {
        [
            "SPM0.D0", "SPM0.D1", "SPM1.D0", "SPM1.D1", "SPM2.D0", "SPM2.D1", "SPM3.D0", "SPM3.D1",
        ][self.index()]
    }

    pub fn parse(id: &str) -> Option<Detector> {
        Detector::ALL.into_iter().find(|d| d.id() == id)
    }
}

/// Stokes measurer watching input path `path` through its tap-off.
pub const fn monitor_spm(path: usize) -> usize {
    path
}

/// Stokes measurer collecting interferometer output path `out_path`.
pub const fn output_spm(out_path: usize) -> usize {
    3 - out_path
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetPolicy {
    /// Floor division across runs, remainder to the first runs.
    #[default]
    EqualSplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_photons_total: u64,
    pub phases: Vec<f64>,
    pub settings: Vec<PlateSetting>,
    pub seed: u64,
    pub angle_jitter_sigma: f64,
    pub budget_policy: BudgetPolicy,
}

impl ExperimentConfig {
    /// Phases `{0, π/2}` and the three canonical plate settings.
    pub fn new(n_photons_total: u64, seed: u64) -> Self {
        ExperimentConfig {
            n_photons_total,
            phases: alloc::vec![0.0, FRAC_PI_2],
            settings: PlateKind::ALL
                .iter()
                .map(|&k| PlateSetting::canonical(k))
                .collect(),
            seed,
            angle_jitter_sigma: 0.0,
            budget_policy: BudgetPolicy::EqualSplit,
        }
    }

    pub fn with_jitter(mut self, sigma: f64) -> Self {
        self.angle_jitter_sigma = sigma;
        self
    }

    pub fn with_phases(mut self, phases: Vec<f64>) -> Self {
        self.phases = phases;
        self
    }

    pub fn with_settings(mut self, settings: Vec<PlateSetting>) -> Self {
        self.settings = settings;
        self
    }

    pub fn run_count(&self) -> usize {
        self.phases.len() * self.settings.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(String::from(msg)));
        if self.phases.is_empty() {
            return bad("phase list is empty");
        }
        if self.settings.is_empty() {
            return bad("plate setting list is empty");
        }
        if self.phases.iter().any(|p| !p.is_finite()) {
            return bad("phases must be finite");
        }
        if self.settings.iter().any(|s| !s.nominal_angle.is_finite()) {
            return bad("plate angles must be finite");
        }
        if !(self.angle_jitter_sigma >= 0.0 && self.angle_jitter_sigma.is_finite()) {
            return bad("angle jitter must be a finite non-negative number");
        }
        if self.n_photons_total < self.run_count() as u64 {
            return bad("photon budget is smaller than the number of runs");
        }
        Ok(())
    }

    /// `(setting, phase, n_in)` for each run, settings outermost.
    pub fn run_plan(&self) -> Vec<(PlateSetting, f64, u64)> {
        let runs = self.run_count() as u64;
        let (base, extra) = match self.budget_policy {
            BudgetPolicy::EqualSplit => (self.n_photons_total / runs, self.n_photons_total % runs),
        };
        let mut plan = Vec::with_capacity(runs as usize);
        for setting in &self.settings {
            for &phase in &self.phases {
                let idx = plan.len() as u64;
                plan.push((*setting, phase, base + u64::from(idx < extra)));
            }
        }
        plan
    }
}

/// One data-taking configuration and its counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub setting: PlateSetting,
    /// Realized plate angle per SPM; `None` when no plate is inserted.
    pub angles: Option<[f64; 4]>,
    pub phase: f64,
    pub n_in: u64,
    /// Indexed by [`Detector::index`].
    pub counts: [u64; 8],
}

impl Run {
    pub fn count(&self, detector: Detector) -> u64 {
        self.counts[detector.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountData {
    pub runs: Vec<Run>,
}

/// Linear map from a density matrix to the eight detector probabilities of one run.
///
/// Detector `d` fires with probability `½ ⟨w_d| ρ |w_d⟩`, where `w_d†` is a row of the
/// plate-and-interferometer unitary; the ½ is the tap-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    rows: [[Complex64; 4]; 8],
}

impl MeasurementModel {
    /// Per-SPM plate angles in `angles`, ignored when `kind` is `None`.
    pub fn new(kind: PlateKind, angles: &[f64; 4], phi: f64) -> Self {
        let interf = interferometer(phi);
        let mut rows = [[Complex64::new(0.0, 0.0); 4]; 8];
        for spm in 0..4 {
            let plate = plate_on_path(&kind.unitary(angles[spm]));
            let (path, chain) = if spm < 2 {
                (spm, plate)
            } else {
                (3 - spm, plate.then_after(&interf))
            };
            for outcome in 0..2 {
                rows[2 * spm + outcome] = chain.matrix().0[basis_index(outcome, path)];
            }
        }
        MeasurementModel { rows }
    }

    pub fn nominal(setting: &PlateSetting, phi: f64) -> Self {
        Self::new(setting.kind, &[setting.nominal_angle; 4], phi)
    }

    /// Probabilities for an arbitrary (possibly unnormalized) matrix.
    pub fn probabilities(&self, rho: &CMatrix4) -> [f64; 8] {
        core::array::from_fn(|d| {
            let w = &self.rows[d];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                if w[j] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut inner = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    inner += rho.0[j][k] * w[k].conj();
                }
                acc += w[j] * inner;
            }
            0.5 * acc.re
        })
    }
}

/// Detector probabilities for `rho` under `setting` (same plate on all SPMs) at phase `phi`.
pub fn detector_probabilities(
    rho: &DensityMatrix,
    setting: &PlateSetting,
    phi: f64,
) -> Result<[f64; 8]> {
    validate_density(rho).into_result()?;
    Ok(MeasurementModel::nominal(setting, phi).probabilities(rho.matrix()))
}

/// `nominal` plus a Gaussian offset of standard deviation `sigma`.
pub fn realized_angle<R: Rng + ?Sized>(nominal: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return nominal;
    }
    let z: f64 = StandardNormal.sample(rng);
    nominal + sigma * z
}

/// Counter-based stream for run `run` of an experiment seeded with `seed`.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Multinomial draw of `n` trials by sequential binomial conditioning.
pub fn sample_multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64; 8], rng: &mut R) -> [u64; 8] {
    let mut counts = [0u64; 8];
    let mut remaining = n;
    let mut mass = 1.0f64;
    for d in 0..7 {
        if remaining == 0 {
            break;
        }
        let p = probs[d].max(0.0);
        let q = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q)
                .expect("valid binomial")
                .sample(rng)
        };
        counts[d] = k;
        remaining -= k;
        mass -= p;
    }
    counts[7] = remaining;
    counts
}

/// Expected counts rounded to integers with the largest-remainder rule, so that the
/// eight counts still sum to `n`.
pub fn rounded_counts(n: u64, probs: &[f64; 8]) -> [u64; 8] {
    let expected: [f64; 8] = core::array::from_fn(|d| n as f64 * probs[d].max(0.0));
    let mut counts: [u64; 8] = core::array::from_fn(|d| expected[d].floor() as u64);
    let assigned: u64 = counts.iter().sum();
    let mut order: [usize; 8] = core::array::from_fn(|d| d);
    order.sort_by(|&a, &b| {
        let ra = expected[a] - expected[a].floor();
        let rb = expected[b] - expected[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    if assigned <= n {
        for &d in order.iter().cycle().take((n - assigned) as usize) {
            counts[d] += 1;
        }
    } else {
        let mut excess = assigned - n;
        for &d in order.iter().rev() {
            if excess == 0 {
                break;
            }
            if counts[d] > 0 {
                counts[d] -= 1;
                excess -= 1;
            }
        }
    }
    counts
}

fn realized_angles(setting: &PlateSetting, sigma: f64, rng: &mut ChaCha8Rng) -> Option<[f64; 4]> {
    match setting.kind {
        PlateKind::None => None,
        _ => Some(core::array::from_fn(|_| {
            realized_angle(setting.nominal_angle, sigma, rng)
        })),
    }
}

/// Photon-counting simulation of every `(setting, phase)` run in `cfg`.
pub fn simulate(rho: &DensityMatrix, cfg: &ExperimentConfig) -> Result<CountData> {
    cfg.validate()?;
    validate_density(rho).into_result()?;
    let runs = cfg
        .run_plan()
        .into_iter()
        .enumerate()
        .map(|(idx, (setting, phase, n_in))| {
            let mut rng = run_rng(cfg.seed, idx);
            let angles = realized_angles(&setting, cfg.angle_jitter_sigma, &mut rng);
            let model = MeasurementModel::new(
                setting.kind,
                &angles.unwrap_or([setting.nominal_angle; 4]),
                phase,
            );
            let probs = model.probabilities(rho.matrix());
            Run {
                setting,
                angles,
                phase,
                n_in,
                counts: sample_multinomial(n_in, &probs, &mut rng),
            }
        })
        .collect();
    Ok(CountData { runs })
}

/// Deterministic counterpart of [`simulate`]: counts are the rounded expectations.
///
/// Plate jitter is still drawn from the seeded streams when `angle_jitter_sigma > 0`.
pub fn exact_counts(rho: &DensityMatrix, cfg: &ExperimentConfig) -> Result<CountData> {
    cfg.validate()?;
    validate_density(rho).into_result()?;
    let runs = cfg
        .run_plan()
        .into_iter()
        .enumerate()
        .map(|(idx, (setting, phase, n_in))| {
            let mut rng = run_rng(cfg.seed, idx);
            let angles = realized_angles(&setting, cfg.angle_jitter_sigma, &mut rng);
            let model = MeasurementModel::new(
                setting.kind,
                &angles.unwrap_or([setting.nominal_angle; 4]),
                phase,
            );
            Run {
                setting,
                angles,
                phase,
                n_in,
                counts: rounded_counts(n_in, &model.probabilities(rho.matrix())),
            }
        })
        .collect();
    Ok(CountData { runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{bell_pbs_state, maximally_mixed, pure_state, random_density};

    const NONE: PlateSetting = PlateSetting {
        kind: PlateKind::None,
        nominal_angle: 0.0,
    };

    fn close(a: &[f64; 8], b: &[f64; 8], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn detector_ids_round_trip() {
        for d in Detector::ALL {
            assert_eq!(Detector::parse(d.id()), Some(d));
            assert_eq!(Detector::at(d.spm(), d.outcome()), d);
        }
        assert_eq!(output_spm(0), 3);
        assert_eq!(output_spm(1), 2);
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        for phi in [0.0, 0.7, FRAC_PI_2] {
            let p = detector_probabilities(&maximally_mixed(), &NONE, phi).unwrap();
            assert!(close(&p, &[0.125; 8], 1e-15));
        }
    }

    #[test]
    fn bell_probabilities_without_plate() {
        let p = detector_probabilities(&bell_pbs_state(), &NONE, 0.0).unwrap();
        // SPM0, SPM1, SPM2, SPM3
        let want = [0.25, 0.0, 0.0, 0.25, 0.125, 0.125, 0.125, 0.125];
        assert!(close(&p, &want, 1e-15), "{p:?}");
    }

    #[test]
    fn h0_probabilities_without_plate() {
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let h0 = pure_state([one, z, z, z]).unwrap();
        let p = detector_probabilities(&h0, &NONE, 0.0).unwrap();
        let want = [0.5, 0.0, 0.0, 0.0, 0.25, 0.0, 0.25, 0.0];
        assert!(close(&p, &want, 1e-15), "{p:?}");
    }

    #[test]
    fn probabilities_normalize_and_monitors_ignore_phase() {
        for seed in 0..1000 {
            let rho = random_density(seed, 1 + (seed as usize % 4)).unwrap();
            for kind in PlateKind::ALL {
                let setting = PlateSetting::canonical(kind);
                let a = detector_probabilities(&rho, &setting, 0.0).unwrap();
                let b = detector_probabilities(&rho, &setting, FRAC_PI_2).unwrap();
                assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                assert!((b.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                assert!(a.iter().all(|&x| x >= -1e-15));
                assert!(a[..4]
                    .iter()
                    .zip(&b[..4])
                    .all(|(x, y)| (x - y).abs() <= 1e-12));
            }
        }
    }

    #[test]
    fn unphysical_state_is_rejected() {
        let bad = DensityMatrix::from_raw(CMatrix4::from_diagonal(&[1.5, -0.5, 0.0, 0.0]));
        assert!(matches!(
            detector_probabilities(&bad, &NONE, 0.0),
            Err(Error::Unphysical { .. })
        ));
    }

    #[test]
    fn budget_split_and_validation() {
        let cfg = ExperimentConfig::new(20, 1);
        let plan = cfg.run_plan();
        assert_eq!(plan.len(), 6);
        let budgets: Vec<u64> = plan.iter().map(|p| p.2).collect();
        assert_eq!(budgets, [4, 4, 3, 3, 3, 3]);
        assert_eq!(plan[0].0.kind, PlateKind::None);
        assert_eq!(plan[1].1, FRAC_PI_2);

        assert!(ExperimentConfig::new(5, 1).validate().is_err());
        assert!(ExperimentConfig::new(6, 1)
            .with_phases(Vec::new())
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(6, 1)
            .with_settings(Vec::new())
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(6, 1)
            .with_jitter(-0.1)
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(6, 1)
            .with_jitter(f64::NAN)
            .validate()
            .is_err());
    }

    #[test]
    fn simulate_is_deterministic_and_normalized() {
        let rho = random_density(4, 4).unwrap();
        let cfg = ExperimentConfig::new(60_000, 9).with_jitter(0.01);
        let a = simulate(&rho, &cfg).unwrap();
        let b = simulate(&rho, &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a,
            simulate(
                &rho,
                &ExperimentConfig {
                    seed: 10,
                    ..cfg.clone()
                }
            )
            .unwrap()
        );
        for run in &a.runs {
            assert_eq!(run.total(), run.n_in);
        }
        assert!(a.runs[0].angles.is_none());
        assert!(a.runs[2].angles.is_some());
    }

    #[test]
    fn zero_jitter_keeps_nominal_angles() {
        let data = simulate(&bell_pbs_state(), &ExperimentConfig::new(600, 2)).unwrap();
        for run in &data.runs {
            if let Some(a) = run.angles {
                assert!(a.iter().all(|&x| x == run.setting.nominal_angle));
            }
        }
    }

    #[test]
    fn maximally_mixed_counts_are_binomial() {
        let n = 8_000_000u64;
        let cfg = ExperimentConfig::new(n, 77)
            .with_settings(alloc::vec![NONE])
            .with_phases(alloc::vec![0.0]);
        let data = simulate(&maximally_mixed(), &cfg).unwrap();
        let run = &data.runs[0];
        let p = 0.125;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for &k in &run.counts {
            assert!((k as f64 - n as f64 * p).abs() <= 5.0 * sigma);
        }
    }

    #[test]
    fn counts_converge_to_probabilities() {
        let rho = random_density(21, 4).unwrap();
        let cfg = ExperimentConfig::new(6_000_000, 5);
        let data = simulate(&rho, &cfg).unwrap();
        for run in &data.runs {
            let p = detector_probabilities(&rho, &run.setting, run.phase).unwrap();
            let n = run.n_in as f64;
            for d in 0..8 {
                let sigma = (n * p[d] * (1.0 - p[d])).sqrt().max(1.0);
                assert!((run.counts[d] as f64 - n * p[d]).abs() <= 5.0 * sigma);
            }
        }
    }

    #[test]
    fn realized_angle_statistics() {
        let mut rng = run_rng(3, 0);
        assert_eq!(realized_angle(FRAC_PI_8, 0.0, &mut rng), FRAC_PI_8);

        let n = 100_000;
        let sigma = 0.01;
        let draws: Vec<f64> = (0..n)
            .map(|_| realized_angle(FRAC_PI_8, sigma, &mut rng))
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean - FRAC_PI_8).abs() <= 3.0 * sigma / (n as f64).sqrt());
        assert!((var.sqrt() - sigma).abs() <= 0.05 * sigma);
    }

    #[test]
    fn rounded_counts_preserve_total() {
        let probs = [0.3, 0.3, 0.4 / 3.0, 0.4 / 3.0, 0.4 / 3.0, 0.0, 0.0, 0.0];
        for n in [1u64, 7, 10, 48, 1001] {
            let c = rounded_counts(n, &probs);
            assert_eq!(c.iter().sum::<u64>(), n);
        }
        let c = rounded_counts(16, &[0.25, 0.0, 0.0, 0.25, 0.125, 0.125, 0.125, 0.125]);
        assert_eq!(c, [4, 0, 0, 4, 2, 2, 2, 2]);
    }

    #[test]
    fn multinomial_edge_cases() {
        let mut rng = run_rng(1, 1);
        let c = sample_multinomial(100, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &mut rng);
        assert_eq!(c, [0, 100, 0, 0, 0, 0, 0, 0]);
        let c = sample_multinomial(0, &[0.125; 8], &mut rng);
        assert_eq!(c, [0; 8]);
    }
}
