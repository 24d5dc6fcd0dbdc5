//! Unitaries for wave plates, the phase shifter, the 1:1 beam splitter and the
//! composed interferometer, and state evolution `ρ → U ρ U†`.

use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{kron2, CMatrix, CMatrix2};
use crate::qstate::DensityMatrix;

/// Largest `|U†U − I|` accepted by [`evolve`].
pub const UNITARITY_LIMIT: f64 = 1e-10;

/// A unitary on the polarization space (`N = 2`) or on polarization ⊗ path (`N = 4`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalUnitary<const N: usize> {
    matrix: CMatrix<N>,
}

impl<const N: usize> OpticalUnitary<N> {
    /// Wraps a matrix without checking unitarity.
    pub fn from_matrix(matrix: CMatrix<N>) -> Self {
        OpticalUnitary { matrix }
    }

    pub fn identity() -> Self {
        OpticalUnitary {
            matrix: CMatrix::identity(),
        }
    }

    pub fn matrix(&self) -> &CMatrix<N> {
        &self.matrix
    }

    pub const fn dim(&self) -> usize {
        N
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.matrix.unitarity_defect()
    }

    pub fn apply(&self, v: &[Complex64; N]) -> [Complex64; N] {
        self.matrix.apply(v)
    }

    /// `self · other`: `other` acts first.
    pub fn then_after(&self, other: &Self) -> Self {
        OpticalUnitary {
            matrix: self.matrix * other.matrix,
        }
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Quarter-wave plate with fast axis at `theta` from horizontal:
/// `(1/√2) [[i + cos 2θ, sin 2θ], [sin 2θ, i − cos 2θ]]`.
pub fn qwp(theta: f64) -> OpticalUnitary<2> {
    let (s, c) = (2.0 * theta).sin_cos();
    let i = Complex64::new(0.0, 1.0);
    OpticalUnitary {
        matrix: CMatrix([[i + c, real(s)], [real(s), i - c]]).scale(FRAC_1_SQRT_2),
    }
}

/// Half-wave plate with fast axis at `theta`: `[[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]`.
pub fn hwp(theta: f64) -> OpticalUnitary<2> {
    let (s, c) = (2.0 * theta).sin_cos();
    OpticalUnitary {
        matrix: CMatrix([[real(c), real(s)], [real(s), real(-c)]]),
    }
}

/// `A = |0⟩⟨0| + e^{iφ}|1⟩⟨1|` on the path.
pub fn path_phase(phi: f64) -> CMatrix2 {
    CMatrix([
        [real(1.0), real(0.0)],
        [real(0.0), Complex64::from_polar(1.0, phi)],
    ])
}

/// `B = (|0⟩⟨0| − |0⟩⟨1| + |1⟩⟨0| + |1⟩⟨1|)/√2` on the path.
pub fn path_beam_splitter() -> CMatrix2 {
    CMatrix([[real(1.0), real(-1.0)], [real(1.0), real(1.0)]]).scale(FRAC_1_SQRT_2)
}

/// `I_p ⊗ A`.
pub fn phase_shifter(phi: f64) -> OpticalUnitary<4> {
    OpticalUnitary {
        matrix: kron2(&CMatrix2::identity(), &path_phase(phi)),
    }
}

/// `I_p ⊗ B`.
pub fn beam_splitter() -> OpticalUnitary<4> {
    OpticalUnitary {
        matrix: kron2(&CMatrix2::identity(), &path_beam_splitter()),
    }
}

/// Phase shift on path 1 followed by the 1:1 beam splitter, `I_p ⊗ B A`, written out:
///
/// ```text
///        1   ⎛ 1  −e^{iφ}  0     0    ⎞
///  U = ─── ⎜ 1   e^{iφ}  0     0    ⎟
///       √2   ⎜ 0    0      1  −e^{iφ} ⎟
///            ⎝ 0    0      1   e^{iφ} ⎠
/// ```
pub fn interferometer(phi: f64) -> OpticalUnitary<4> {
    let e = Complex64::from_polar(FRAC_1_SQRT_2, phi);
    let h = real(FRAC_1_SQRT_2);
    let z = real(0.0);
    OpticalUnitary {
        matrix: CMatrix([[h, -e, z, z], [h, e, z, z], [z, z, h, -e], [z, z, h, e]]),
    }
}

/// Lifts a polarization element onto both paths: `plate ⊗ I_path`.
pub fn plate_on_path(plate: &OpticalUnitary<2>) -> OpticalUnitary<4> {
    OpticalUnitary {
        matrix: kron2(&plate.matrix, &CMatrix2::identity()),
    }
}

/// `U ρ U†`. Keeps the validity flag of `rho`.
pub fn evolve(unitary: &OpticalUnitary<4>, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let defect = unitary.unitarity_defect();
    if defect > UNITARITY_LIMIT {
        return Err(Error::NonUnitary(defect));
    }
    Ok(evolve_unchecked(unitary, rho))
}

pub(crate) fn evolve_unchecked(unitary: &OpticalUnitary<4>, rho: &DensityMatrix) -> DensityMatrix {
    let u = unitary.matrix;
    let out = (u * *rho.matrix() * u.adjoint()).hermitian_part();
    if rho.is_validated() {
        DensityMatrix::trusted(out)
    } else {
        DensityMatrix::from_raw(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix4;
    use crate::qstate::{bell_pbs_state, purity, random_density, PolarizationState};
    use crate::stokes::opsp;
    use core::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    fn overlap_modulus(a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
        (a[0].conj() * b[0] + a[1].conj() * b[1]).norm()
    }

    fn grid(k: usize) -> impl Iterator<Item = f64> {
        (0..k).map(move |i| 2.0 * PI * i as f64 / k as f64)
    }

    #[test]
    fn qwp_converts_circular_to_linear() {
        let q = qwp(FRAC_PI_4);
        let out = q.apply(&PolarizationState::r().amplitudes());
        assert!((out[0] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15);
        assert!(overlap_modulus(&PolarizationState::h().amplitudes(), &out) >= 1.0 - 1e-12);
        let out = q.apply(&PolarizationState::l().amplitudes());
        assert!(overlap_modulus(&PolarizationState::v().amplitudes(), &out) >= 1.0 - 1e-12);
    }

    #[test]
    fn hwp_converts_diagonal_to_linear() {
        let h = hwp(FRAC_PI_8);
        let out = h.apply(&PolarizationState::d().amplitudes());
        assert!((out[0] - real(1.0)).norm() < 1e-15 && out[1].norm() < 1e-15);
        let out = h.apply(&PolarizationState::a().amplitudes());
        assert!(out[0].norm() < 1e-15 && (out[1] - real(1.0)).norm() < 1e-15);
        assert_eq!(
            *hwp(0.0).matrix(),
            CMatrix([[real(1.0), real(0.0)], [real(0.0), real(-1.0)]])
        );
    }

    #[test]
    fn constructors_are_unitary_on_grid() {
        for theta in grid(16) {
            assert!(qwp(theta).unitarity_defect() <= 1e-12);
            assert!(hwp(theta).unitarity_defect() <= 1e-12);
            assert!(plate_on_path(&qwp(theta)).unitarity_defect() <= 1e-12);
            assert!(phase_shifter(theta).unitarity_defect() <= 1e-12);
            assert!(interferometer(theta).unitarity_defect() <= 1e-12);
        }
        assert!(beam_splitter().unitarity_defect() <= 1e-12);
    }

    #[test]
    fn phase_shifter_and_beam_splitter() {
        assert_eq!(*phase_shifter(0.0).matrix(), CMatrix4::identity());
        let b = path_beam_splitter();
        let s = FRAC_1_SQRT_2;
        let want = [[s, -s], [s, s]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((b.0[i][j] - real(want[i][j])).norm() < 1e-16);
            }
        }
        let b2 = b * b;
        let want = [[0.0, -1.0], [1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((b2.0[i][j] - real(want[i][j])).norm() < 1e-15);
            }
        }
        // the 4×4 lift acts blockwise on each polarization
        let bs = beam_splitter();
        let twice = bs.then_after(&bs);
        let out = twice.apply(&PolarizationState::h().on_path(0));
        assert!((out[1] - real(1.0)).norm() < 1e-15);
    }

    #[test]
    fn interferometer_columns() {
        let s = FRAC_1_SQRT_2;
        let out = interferometer(0.0).apply(&PolarizationState::h().on_path(0));
        assert!((out[0] - real(s)).norm() < 1e-16 && (out[1] - real(s)).norm() < 1e-16);
        assert!(out[2].norm() == 0.0 && out[3].norm() == 0.0);

        for phi in grid(32) {
            let e = Complex64::from_polar(1.0, phi);
            let out = interferometer(phi).apply(&PolarizationState::h().on_path(1));
            assert!((out[0] + e * s).norm() < 1e-15);
            assert!((out[1] - e * s).norm() < 1e-15);

            let composed = kron2(
                &CMatrix2::identity(),
                &(path_beam_splitter() * path_phase(phi)),
            );
            assert!((composed - *interferometer(phi).matrix()).max_abs() <= 1e-15);
            let via_ops = beam_splitter().then_after(&phase_shifter(phi));
            assert!((*via_ops.matrix() - *interferometer(phi).matrix()).max_abs() <= 1e-15);

            let u = interferometer(phi);
            for col in 0..4 {
                let norm: f64 = (0..4).map(|r| u.matrix().0[r][col].norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn evolve_examples() {
        let rho = random_density(5, 3).unwrap();
        let same = evolve(&OpticalUnitary::identity(), &rho).unwrap();
        assert!((*same.matrix() - *rho.matrix()).max_abs() < 1e-16);

        for phi in grid(8) {
            let out = evolve(&interferometer(phi), &rho).unwrap();
            assert!((purity(&out) - purity(&rho)).abs() < 1e-12);
            assert!((out.trace() - rho.trace()).abs() < 1e-12);
            let a = out.eigen().values;
            let b = rho.eigen().values;
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12));
        }

        let out = evolve(&interferometer(0.0), &bell_pbs_state()).unwrap();
        let s = opsp(&out, 0).unwrap().s;
        let want = [0.5, 0.0, -0.5, 0.0];
        assert!(s.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15));

        let bad = OpticalUnitary::from_matrix(CMatrix4::identity().scale(1.1));
        assert!(matches!(evolve(&bad, &rho), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn opsp_sum_is_conserved_by_interferometer() {
        for seed in 0..200 {
            let rho = random_density(seed, 4).unwrap();
            let before = [opsp(&rho, 0).unwrap().s, opsp(&rho, 1).unwrap().s];
            for phi in grid(32) {
                let out = evolve(&interferometer(phi), &rho).unwrap();
                let after = [opsp(&out, 0).unwrap().s, opsp(&out, 1).unwrap().s];
                for n in 0..4 {
                    let d = before[0][n] + before[1][n] - after[0][n] - after[1][n];
                    assert!(d.abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn plate_on_path_examples() {
        assert_eq!(
            *plate_on_path(&OpticalUnitary::identity()).matrix(),
            CMatrix4::identity()
        );
        let out = plate_on_path(&hwp(FRAC_PI_8)).apply(&PolarizationState::d().on_path(0));
        assert!((out[0] - real(1.0)).norm() < 1e-15);
        assert!(out[1..].iter().all(|z| z.norm() < 1e-15));
    }
}
