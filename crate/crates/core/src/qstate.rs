//! Density matrices on the polarization ⊗ path space, physicality checks and metrics.

use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, CMatrix4, HermitianEigen};

/// Tolerance used by [`validate_density`].
pub const PHYSICAL_TOLERANCE: f64 = 1e-10;

/// Basis labels in storage order.
pub const BASIS_LABELS: [&str; 4] = ["H0", "H1", "V0", "V1"];

/// Index of `|pol, path⟩` in the global basis, with `pol = 0` for H and `1` for V.
pub const fn basis_index(pol: usize, path: usize) -> usize {
    2 * pol + path
}

/// A 4×4 density matrix over `{|H,0⟩, |H,1⟩, |V,0⟩, |V,1⟩}`.
///
/// Raw matrices (for example a linear-inversion estimate) are carried by the same
/// type with `validated` unset; constructors that guarantee a physical state set it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix4,
    validated: bool,
}

impl DensityMatrix {
    /// Wraps an arbitrary matrix without checks.
    pub fn from_raw(matrix: CMatrix4) -> Self {
        DensityMatrix {
            matrix,
            validated: false,
        }
    }

    /// Wraps a matrix after it passes [`validate_density`].
    pub fn new_validated(matrix: CMatrix4) -> Result<Self> {
        DensityMatrix::from_raw(matrix).into_validated()
    }

    pub(crate) fn trusted(matrix: CMatrix4) -> Self {
        DensityMatrix {
            matrix,
            validated: true,
        }
    }

    pub fn matrix(&self) -> &CMatrix4 {
        &self.matrix
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.matrix.0
    }

    /// Entry `ρ_jk` with 1-based indices, as the formulas are usually written.
    pub fn rho(&self, j: usize, k: usize) -> Complex64 {
        self.matrix.0[j - 1][k - 1]
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn validity(&self) -> ValidityReport {
        validate_density(self)
    }

    pub fn into_validated(self) -> Result<Self> {
        let report = validate_density(&self);
        report.into_result()?;
        Ok(DensityMatrix::trusted(self.matrix))
    }

    pub fn eigen(&self) -> HermitianEigen<4> {
        hermitian_eigen(&self.matrix)
    }
}

/// Single-qubit polarization state in the `{|H⟩, |V⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    amplitudes: [Complex64; 2],
}

impl PolarizationState {
    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn new(amplitudes: [Complex64; 2]) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateStateVector);
        }
        Ok(PolarizationState {
            amplitudes: amplitudes.map(|a| a / norm),
        })
    }

    const fn raw(h: Complex64, v: Complex64) -> Self {
        PolarizationState { amplitudes: [h, v] }
    }

    pub const fn h() -> Self {
        Self::raw(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub const fn v() -> Self {
        Self::raw(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// Diagonal, `(|H⟩ + |V⟩)/√2`.
    pub const fn d() -> Self {
        Self::raw(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        )
    }

    /// Anti-diagonal, `(|H⟩ − |V⟩)/√2`.
    pub const fn a() -> Self {
        Self::raw(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
        )
    }

    /// Right circular, `(|H⟩ + i|V⟩)/√2`.
    pub const fn r() -> Self {
        Self::raw(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        )
    }

    /// Left circular, `(|H⟩ − i|V⟩)/√2`.
    pub const fn l() -> Self {
        Self::raw(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, -FRAC_1_SQRT_2),
        )
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amplitudes
    }

    /// `|self⟩ ⊗ |path⟩` as a 4-vector in the global basis.
    pub fn on_path(&self, path: usize) -> [Complex64; 4] {
        let mut v = [Complex64::new(0.0, 0.0); 4];
        v[basis_index(0, path)] = self.amplitudes[0];
        v[basis_index(1, path)] = self.amplitudes[1];
        v
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &PolarizationState) -> f64 {
        (self.amplitudes[0].conj() * other.amplitudes[0]
            + self.amplitudes[1].conj() * other.amplitudes[1])
            .norm()
    }
}

/// Outcome of [`validate_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub is_physical: bool,
}

impl ValidityReport {
    pub fn into_result(self) -> Result<()> {
        if self.is_physical {
            Ok(())
        } else {
            Err(Error::Unphysical {
                hermiticity_defect: self.hermiticity_defect,
                trace_defect: self.trace_defect,
                min_eigenvalue: self.min_eigenvalue,
            })
        }
    }
}

/// `|ψ⟩⟨ψ|` after normalizing `amplitudes`.
pub fn pure_state(amplitudes: [Complex64; 4]) -> Result<DensityMatrix> {
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateStateVector);
    }
    let psi = amplitudes.map(|a| a / norm);
    let mut m = CMatrix4::outer(&psi);
    for i in 0..4 {
        m.0[i][i].im = 0.0;
    }
    Ok(DensityMatrix::trusted(m))
}

/// `(|H,0⟩ + |V,1⟩)/√2`, the state a polarizing beam splitter produces from `|D⟩`.
///
/// Built from exact halves rather than `(1/√2)²` so the trace is exactly one.
pub fn bell_pbs_state() -> DensityMatrix {
    let mut m = CMatrix4::zeros();
    for (j, k) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        m.0[j][k] = Complex64::new(0.5, 0.0);
    }
    DensityMatrix::trusted(m)
}

pub fn maximally_mixed() -> DensityMatrix {
    DensityMatrix::trusted(CMatrix4::from_diagonal(&[0.25; 4]))
}

/// Ginibre-distributed density matrix `G G† / Tr(G G†)` with `G` a 4×`rank` matrix of
/// standard complex normal entries drawn from a ChaCha stream seeded by `seed`.
pub fn random_density(seed: u64, rank: usize) -> Result<DensityMatrix> {
    if !(1..=4).contains(&rank) {
        return Err(Error::RankOutOfRange(rank));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for row in g.iter_mut() {
        for entry in row.iter_mut().take(rank) {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *entry = Complex64::new(re, im);
        }
    }
    let g = CMatrix(g);
    let mut m = g * g.adjoint();
    let tr = m.trace().re;
    m = m.scale(1.0 / tr).hermitian_part();
    Ok(DensityMatrix::trusted(m))
}

/// Hermiticity and trace defects (max-abs deviations) plus the smallest eigenvalue.
pub fn validate_density(rho: &DensityMatrix) -> ValidityReport {
    let m = rho.matrix();
    let hermiticity_defect = m.hermiticity_defect();
    let trace = m.trace();
    let trace_defect = (trace - Complex64::new(1.0, 0.0)).norm();
    let min_eigenvalue = hermitian_eigen(m).values[0];
    let is_physical = hermiticity_defect <= PHYSICAL_TOLERANCE
        && trace_defect <= PHYSICAL_TOLERANCE
        && min_eigenvalue >= -PHYSICAL_TOLERANCE;
    ValidityReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        is_physical,
    }
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().trace_product(rho.matrix()).re
}

/// `½ Tr|ρ − σ|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let diff = *rho.matrix() - *sigma.matrix();
    0.5 * hermitian_eigen(&diff)
        .values
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
///
/// If either argument is pure this reduces to `Tr(ρσ)`, which is used directly.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    validate_density(rho).into_result()?;
    validate_density(sigma).into_result()?;

    let pure_limit = 1.0 - 1e-12;
    let value = if purity(rho) >= pure_limit || purity(sigma) >= pure_limit {
        rho.matrix().trace_product(sigma.matrix()).re
    } else {
        let sqrt_rho = rho.eigen().map_values(|x| x.max(0.0).sqrt());
        let inner = sqrt_rho * *sigma.matrix() * sqrt_rho;
        let root_trace: f64 = hermitian_eigen(&inner)
            .values
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .sum();
        root_trace * root_trace
    };
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis(k: usize) -> DensityMatrix {
        let mut v = [c(0.0); 4];
        v[k] = c(1.0);
        pure_state(v).unwrap()
    }

    #[test]
    fn pure_state_examples() {
        let h0 = basis(0);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert_eq!(h0.entries()[i][j], c(expect));
            }
        }

        let ones = pure_state([c(1.0); 4]).unwrap();
        assert!(ones
            .entries()
            .iter()
            .flatten()
            .all(|z| (*z - c(0.25)).norm() < 1e-15));

        assert_eq!(
            pure_state([c(0.0); 4]).unwrap_err(),
            Error::DegenerateStateVector
        );
    }

    #[test]
    fn bell_state_entries() {
        let bell = bell_pbs_state();
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = c(0.0);
        let via_vector = pure_state([s, z, z, s]).unwrap();
        assert!((*via_vector.matrix() - *bell.matrix()).max_abs() < 1e-15);
        for (j, k) in [(1, 1), (4, 4), (1, 4), (4, 1)] {
            assert!((bell.rho(j, k) - c(0.5)).norm() < 1e-15);
        }
        let nonzero = bell
            .entries()
            .iter()
            .flatten()
            .filter(|z| z.norm() > 0.0)
            .count();
        assert_eq!(nonzero, 4);
        assert!((fidelity(&bell, &bell).unwrap() - 1.0).abs() < 1e-12);
        assert!((purity(&bell) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_properties() {
        let m = maximally_mixed();
        assert!((purity(&m) - 0.25).abs() < 1e-15);
        let report = validate_density(&m);
        assert!(report.is_physical);
        assert!((report.min_eigenvalue - 0.25).abs() < 1e-15);
    }

    #[test]
    fn random_density_is_reproducible_and_physical() {
        let a = random_density(11, 4).unwrap();
        let b = random_density(11, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_density(12, 4).unwrap());
        for seed in 0..50 {
            let pure = random_density(seed, 1).unwrap();
            assert!((purity(&pure) - 1.0).abs() < 1e-12);
            let full = random_density(seed, 4).unwrap();
            assert!(full.eigen().values[0] >= -1e-12);
            assert!(validate_density(&full).is_physical);
        }
        assert_eq!(random_density(0, 0).unwrap_err(), Error::RankOutOfRange(0));
        assert_eq!(random_density(0, 5).unwrap_err(), Error::RankOutOfRange(5));
    }

    #[test]
    fn validation_flags_negative_spectrum() {
        let bad = DensityMatrix::from_raw(CMatrix4::from_diagonal(&[1.5, -0.5, 0.0, 0.0]));
        let report = validate_density(&bad);
        assert!(!report.is_physical);
        assert!((report.min_eigenvalue + 0.5).abs() < 1e-15);
        assert!(bad.into_validated().is_err());

        let bell = validate_density(&bell_pbs_state());
        assert_eq!(bell.trace_defect, 0.0);
        assert_eq!(bell.hermiticity_defect, 0.0);
    }

    #[test]
    fn fidelity_examples() {
        assert!(fidelity(&basis(0), &basis(1)).unwrap().abs() < 1e-15);
        let f = fidelity(&bell_pbs_state(), &maximally_mixed()).unwrap();
        assert!((f - 0.25).abs() < 1e-12);
        let bad = DensityMatrix::from_raw(CMatrix4::from_diagonal(&[1.5, -0.5, 0.0, 0.0]));
        assert!(matches!(
            fidelity(&bad, &maximally_mixed()),
            Err(Error::Unphysical { .. })
        ));
    }

    #[test]
    fn mixed_fidelity_matches_commuting_formula() {
        // commuting diagonal states: F = (Σ √(p_i q_i))²
        let p = [0.4, 0.3, 0.2, 0.1];
        let q = [0.1, 0.2, 0.3, 0.4];
        let rho = DensityMatrix::new_validated(CMatrix4::from_diagonal(&p)).unwrap();
        let sigma = DensityMatrix::new_validated(CMatrix4::from_diagonal(&q)).unwrap();
        let expect: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
        let f = fidelity(&rho, &sigma).unwrap();
        assert!((f - expect * expect).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_examples() {
        let r = random_density(3, 3).unwrap();
        assert!(trace_distance(&r, &r).abs() < 1e-15);
        let h0 = basis(0);
        let v0 = basis(2);
        assert!((trace_distance(&h0, &v0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polarization_states_are_normalized() {
        for s in [
            PolarizationState::h(),
            PolarizationState::v(),
            PolarizationState::d(),
            PolarizationState::a(),
            PolarizationState::r(),
            PolarizationState::l(),
        ] {
            let n: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!(PolarizationState::d().overlap(&PolarizationState::a()) < 1e-16);
        let s = PolarizationState::new([c(3.0), c(4.0)]).unwrap();
        assert!((s.amplitudes()[0] - c(0.6)).norm() < 1e-15);
    }
}
