//! End-to-end algebraic identity checks, runnable from the command line.
//!
//! The reconstruction map is injectable so the harness can prove it notices a broken one.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, TAU};
use std::fmt;

use polpath_core::experiment::{exact_counts, ExperimentConfig};
use polpath_core::optics::{evolve, hwp, interferometer, qwp};
use polpath_core::qstate::{
    bell_pbs_state, fidelity, random_density, DensityMatrix, PolarizationState,
};
use polpath_core::stokes::{
    complementarity_defect, extract_tpsp, opsp, predicted_fringe, reconstruct, stokes, StokesSet,
};
use polpath_core::tomography::{estimate_stokes, mle_fit};
use polpath_core::OpticalUnitary;

use crate::error::Result;

pub type ReconstructFn = fn(&StokesSet) -> DensityMatrix;

/// Reconstruction with a deliberately wrong `ρ₁₄` coherence (negative control).
pub fn corrupted_reconstruct(set: &StokesSet) -> DensityMatrix {
    let mut m = *reconstruct(set).matrix();
    m.0[0][3] *= 1.0 + 1e-6;
    m.0[3][0] = m.0[0][3].conj();
    DensityMatrix::from_raw(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Worst observed deviation.
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} max error {:.3e} (tolerance {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.error,
            self.tolerance
        )
    }
}

pub struct Selftest {
    reconstruct: ReconstructFn,
    states: u64,
}

impl Default for Selftest {
    fn default() -> Self {
        Selftest {
            reconstruct,
            states: 200,
        }
    }
}

fn rank_for(seed: u64) -> usize {
    1 + (seed % 4) as usize
}

fn plate_error(
    plate: &OpticalUnitary<2>,
    input: PolarizationState,
    want: PolarizationState,
) -> f64 {
    // compared up to global phase
    let out = PolarizationState::new(plate.apply(&input.amplitudes()))
        .expect("unitary output has unit norm");
    1.0 - out.overlap(&want)
}

impl Selftest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_reconstruct(mut self, f: ReconstructFn) -> Self {
        self.reconstruct = f;
        self
    }

    fn states(&self) -> impl Iterator<Item = DensityMatrix> {
        (0..self.states).map(|seed| random_density(seed, rank_for(seed)).expect("rank is in range"))
    }

    pub fn run(&self) -> Result<Vec<Check>> {
        let mut checks = Vec::new();

        let mut err = 0.0f64;
        for rho in self.states() {
            let back = (self.reconstruct)(&stokes(&rho)?);
            err = err.max((*back.matrix() - *rho.matrix()).max_abs());
        }
        checks.push(Check {
            name: "reconstruction identity",
            error: err,
            tolerance: 1e-12,
        });

        let (mut fringe_err, mut comp_err) = (0.0f64, 0.0f64);
        for rho in self.states().take(50) {
            let set = stokes(&rho)?;
            for k in 0..16 {
                let phi = TAU * k as f64 / 16.0;
                let out = evolve(&interferometer(phi), &rho)?;
                let mut seen = [opsp(&out, 0)?, opsp(&out, 1)?];
                for (p, observed) in seen.iter_mut().enumerate() {
                    let predicted = predicted_fringe(&set, p, phi);
                    for n in 0..4 {
                        fringe_err = fringe_err.max((observed.s[n] - predicted.s[n]).abs());
                    }
                }
                let defect = complementarity_defect(&set, &seen[0], &seen[1]);
                comp_err = comp_err.max(defect.iter().cloned().fold(0.0, f64::max));
            }
        }
        checks.push(Check {
            name: "fringe law",
            error: fringe_err,
            tolerance: 1e-12,
        });
        checks.push(Check {
            name: "complementarity",
            error: comp_err,
            tolerance: 1e-12,
        });

        let mut err = 0.0f64;
        for rho in self.states() {
            let set = stokes(&rho)?;
            let sums = set.path_sums();
            for p in 0..2 {
                let f0 = opsp(&evolve(&interferometer(0.0), &rho)?, p)?;
                let f1 = opsp(&evolve(&interferometer(FRAC_PI_2), &rho)?, p)?;
                let s = extract_tpsp(&sums, &f0, &f1, p);
                for n in 0..4 {
                    err = err.max((s.s[n] - set.cross.s[n]).norm());
                }
            }
        }
        checks.push(Check {
            name: "two-path extraction",
            error: err,
            tolerance: 1e-12,
        });

        let h = hwp(FRAC_PI_8);
        let q = qwp(FRAC_PI_4);
        let err = [
            plate_error(&h, PolarizationState::d(), PolarizationState::h()),
            plate_error(&h, PolarizationState::a(), PolarizationState::v()),
            plate_error(&q, PolarizationState::r(), PolarizationState::h()),
            plate_error(&q, PolarizationState::l(), PolarizationState::v()),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        checks.push(Check {
            name: "wave plates",
            error: err,
            tolerance: 1e-12,
        });

        let mut err = 0.0f64;
        for (seed, rho) in self.states().enumerate().take(50) {
            let data = exact_counts(&rho, &ExperimentConfig::new(6_000_000_000_000, seed as u64))?;
            let back = (self.reconstruct)(&estimate_stokes(&data)?.set);
            err = err.max((*back.matrix() - *rho.matrix()).max_abs());
        }
        checks.push(Check {
            name: "noiseless pipeline",
            error: err,
            tolerance: 1e-10,
        });

        let bell = bell_pbs_state();
        let data = exact_counts(&bell, &ExperimentConfig::new(6_000_000, 0))?;
        let init = (self.reconstruct)(&estimate_stokes(&data)?.set);
        let fit = mle_fit(&data, &init)?;
        let f = fidelity(&bell, &fit.best_estimate())?;
        checks.push(Check {
            name: "noiseless bell MLE",
            error: 1.0 - f,
            tolerance: 1e-8,
        });

        Ok(checks)
    }
}
