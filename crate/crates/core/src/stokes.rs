//! One-path and two-path Stokes parameters.
//!
//! Formulas are transcribed with the 1-based indices `ρ_jk` used in the literature;
//! [`DensityMatrix::rho`] performs the shift to storage indices, so `ρ_13` is
//! `⟨H,0|ρ|V,0⟩` and `ρ_21` is `⟨H,1|ρ|H,0⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix4;
use crate::qstate::DensityMatrix;

/// Anti-Hermitian defect above which the Stokes maps refuse their input.
pub const HERMITICITY_LIMIT: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Stokes parameters `s_0..s_3` of the photons in one path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OnePathStokes {
    pub path: usize,
    pub s: [f64; 4],
}

/// Complex two-path parameters `S_0..S_3`, built from coherences between the paths.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoPathStokes {
    pub s: [Complex64; 4],
}

/// The twelve numbers that determine a polarization-path density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesSet {
    pub path0: OnePathStokes,
    pub path1: OnePathStokes,
    pub cross: TwoPathStokes,
}

impl Default for StokesSet {
    fn default() -> Self {
        StokesSet {
            path0: OnePathStokes {
                path: 0,
                s: [0.0; 4],
            },
            path1: OnePathStokes {
                path: 1,
                s: [0.0; 4],
            },
            cross: TwoPathStokes::default(),
        }
    }
}

impl StokesSet {
    /// `s⁽⁰⁾ₙ + s⁽¹⁾ₙ` for each `n`.
    pub fn path_sums(&self) -> [f64; 4] {
        core::array::from_fn(|n| self.path0.s[n] + self.path1.s[n])
    }

    pub fn path(&self, path: usize) -> &OnePathStokes {
        if path == 0 {
            &self.path0
        } else {
            &self.path1
        }
    }

    /// Real linear combination `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &StokesSet, beta: f64) -> StokesSet {
        StokesSet {
            path0: OnePathStokes {
                path: 0,
                s: core::array::from_fn(|n| alpha * self.path0.s[n] + beta * other.path0.s[n]),
            },
            path1: OnePathStokes {
                path: 1,
                s: core::array::from_fn(|n| alpha * self.path1.s[n] + beta * other.path1.s[n]),
            },
            cross: TwoPathStokes {
                s: core::array::from_fn(|n| self.cross.s[n] * alpha + other.cross.s[n] * beta),
            },
        }
    }

    /// Largest absolute difference over all twelve parameters (complex ones by modulus).
    pub fn max_abs_diff(&self, other: &StokesSet) -> f64 {
        let mut worst = 0.0f64;
        for n in 0..4 {
            worst = worst
                .max((self.path0.s[n] - other.path0.s[n]).abs())
                .max((self.path1.s[n] - other.path1.s[n]).abs())
                .max((self.cross.s[n] - other.cross.s[n]).norm());
        }
        worst
    }
}

fn check_hermitian(rho: &DensityMatrix) -> Result<()> {
    let defect = rho.matrix().hermiticity_defect();
    if defect > HERMITICITY_LIMIT {
        return Err(Error::NonHermitian(defect));
    }
    Ok(())
}

/// One-path Stokes parameters of `path` (0 or 1).
///
/// Path 0: `(ρ11+ρ33, ρ11−ρ33, ρ13+ρ31, i(ρ13−ρ31))`;
/// path 1: `(ρ22+ρ44, ρ22−ρ44, ρ24+ρ42, i(ρ24−ρ42))`.
pub fn opsp(rho: &DensityMatrix, path: usize) -> Result<OnePathStokes> {
    assert!(path < 2, "path index must be 0 or 1");
    check_hermitian(rho)?;
    // ρ_hh, ρ_vv, ρ_hv, ρ_vh for this path, 1-based
    let (h, v) = if path == 0 { (1, 3) } else { (2, 4) };
    let raw = [
        rho.rho(h, h) + rho.rho(v, v),
        rho.rho(h, h) - rho.rho(v, v),
        rho.rho(h, v) + rho.rho(v, h),
        I * (rho.rho(h, v) - rho.rho(v, h)),
    ];
    // real by Hermiticity; the residual imaginary part is dropped
    Ok(OnePathStokes {
        path,
        s: raw.map(|z| z.re),
    })
}

/// Two-path parameters `(ρ21+ρ43, ρ21−ρ43, ρ23+ρ41, i(ρ23−ρ41))`.
pub fn tpsp(rho: &DensityMatrix) -> Result<TwoPathStokes> {
    check_hermitian(rho)?;
    Ok(TwoPathStokes {
        s: [
            rho.rho(2, 1) + rho.rho(4, 3),
            rho.rho(2, 1) - rho.rho(4, 3),
            rho.rho(2, 3) + rho.rho(4, 1),
            I * (rho.rho(2, 3) - rho.rho(4, 1)),
        ],
    })
}

/// Full Stokes set of `rho`.
pub fn stokes(rho: &DensityMatrix) -> Result<StokesSet> {
    Ok(StokesSet {
        path0: opsp(rho, 0)?,
        path1: opsp(rho, 1)?,
        cross: tpsp(rho)?,
    })
}

/// Inverse of [`stokes`]: assembles the density matrix from its twelve parameters.
///
/// The lower triangle is
///
/// ```text
///            ⎛ s⁽⁰⁾₀+s⁽⁰⁾₁                                                ⎞
///  ρ = ½ ·  ⎜ S₀+S₁         s⁽¹⁾₀+s⁽¹⁾₁                                 ⎟
///            ⎜ s⁽⁰⁾₂+is⁽⁰⁾₃  S₂*+iS₃*      s⁽⁰⁾₀−s⁽⁰⁾₁                  ⎟
///            ⎝ S₂+iS₃        s⁽¹⁾₂+is⁽¹⁾₃  S₀−S₁        s⁽¹⁾₀−s⁽¹⁾₁    ⎠
/// ```
///
/// and the upper triangle is its conjugate transpose, so the output is Hermitian
/// exactly. The trace is `s⁽⁰⁾₀ + s⁽¹⁾₀` and is not renormalized.
pub fn reconstruct(set: &StokesSet) -> DensityMatrix {
    let a = &set.path0.s;
    let b = &set.path1.s;
    let s = &set.cross.s;
    let re = |x: f64| Complex64::new(x, 0.0);

    let mut m = CMatrix4::zeros();
    // 0-based storage: ρ_jk lives at [j-1][k-1]
    m.0[0][0] = re(a[0] + a[1]);
    m.0[1][1] = re(b[0] + b[1]);
    m.0[2][2] = re(a[0] - a[1]);
    m.0[3][3] = re(b[0] - b[1]);
    m.0[1][0] = s[0] + s[1];
    m.0[2][0] = Complex64::new(a[2], a[3]);
    m.0[3][0] = s[2] + I * s[3];
    m.0[2][1] = s[2].conj() + I * s[3].conj();
    m.0[3][1] = Complex64::new(b[2], b[3]);
    m.0[3][2] = s[0] - s[1];
    for j in 0..4 {
        for k in 0..j {
            m.0[j][k] *= 0.5;
            m.0[k][j] = m.0[j][k].conj();
        }
        m.0[j][j] *= 0.5;
    }
    DensityMatrix::from_raw(m)
}

/// Output-arm Stokes parameters after the interferometer at phase `phi`.
///
/// `s⁽⁰⁾ₙf(φ) = ½[s⁽⁰⁾ₙ + s⁽¹⁾ₙ − 2Re(Sₙ e^{iφ})]` for output path 0 (collected by SPM₃),
/// with `+` for output path 1 (SPM₂).
pub fn predicted_fringe(set: &StokesSet, out_path: usize, phi: f64) -> OnePathStokes {
    assert!(out_path < 2, "path index must be 0 or 1");
    let sign = if out_path == 0 { -1.0 } else { 1.0 };
    let rot = Complex64::from_polar(1.0, phi);
    let sums = set.path_sums();
    OnePathStokes {
        path: out_path,
        s: core::array::from_fn(|n| 0.5 * (sums[n] + sign * 2.0 * (set.cross.s[n] * rot).re)),
    }
}

/// Recovers the two-path parameters from output-arm fringes at `φ = 0` and `φ = π/2`.
///
/// `sums[n]` holds `s⁽⁰⁾ₙ + s⁽¹⁾ₙ` of the input. For output path 0,
/// `Re Sₙ = ½ sumₙ − f(0)` and `Im Sₙ = f(π/2) − ½ sumₙ`; path 1 flips both signs.
pub fn extract_tpsp(
    sums: &[f64; 4],
    fringe_at_0: &OnePathStokes,
    fringe_at_half_pi: &OnePathStokes,
    out_path: usize,
) -> TwoPathStokes {
    assert!(out_path < 2, "path index must be 0 or 1");
    let sign = if out_path == 0 { 1.0 } else { -1.0 };
    TwoPathStokes {
        s: core::array::from_fn(|n| {
            let half = 0.5 * sums[n];
            Complex64::new(
                sign * (half - fringe_at_0.s[n]),
                sign * (fringe_at_half_pi.s[n] - half),
            )
        }),
    }
}

/// Per-`n` violation `|s⁽⁰⁾ₙ + s⁽¹⁾ₙ − s⁽⁰⁾ₙf − s⁽¹⁾ₙf|` of the lossless-interferometer balance.
pub fn complementarity_defect(
    set_in: &StokesSet,
    fringe_path0: &OnePathStokes,
    fringe_path1: &OnePathStokes,
) -> [f64; 4] {
    let sums = set_in.path_sums();
    core::array::from_fn(|n| (sums[n] - fringe_path0.s[n] - fringe_path1.s[n]).abs())
}
