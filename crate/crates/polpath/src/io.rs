//! JSON interchange formats.
//!
//! Every document serializes with shortest round-trip float formatting, so writing,
//! reading and writing again reproduces the same bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use polpath_core::experiment::{CountData, Detector, PlateKind, PlateSetting, Run};
use polpath_core::linalg::CMatrix;
use polpath_core::qstate::{DensityMatrix, BASIS_LABELS};
use polpath_core::stokes::{OnePathStokes, StokesSet, TwoPathStokes};
use polpath_core::tomography::{Metrics, MleDiagnostics, ReconstructionResult};
use polpath_core::{Complex64, OpticalUnitary};

use crate::error::{CliError, Result};

/// Basis labels of a polarization-only operator.
pub const POLARIZATION_LABELS: [&str; 2] = ["H", "V"];

/// Complex matrix as separate real and imaginary parts, rows first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub basis: Vec<String>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix<const N: usize>(labels: &[&str; N], m: &CMatrix<N>) -> Self {
        MatrixJson {
            basis: labels.iter().map(|s| s.to_string()).collect(),
            re: m
                .0
                .iter()
                .map(|row| row.iter().map(|z| z.re).collect())
                .collect(),
            im: m
                .0
                .iter()
                .map(|row| row.iter().map(|z| z.im).collect())
                .collect(),
        }
    }

    pub fn to_matrix<const N: usize>(&self, labels: &[&str; N]) -> Result<CMatrix<N>> {
        if self.basis.len() != N || self.basis.iter().zip(labels).any(|(a, b)| a != b) {
            return Err(CliError::Data(format!(
                "basis must be {labels:?}, found {:?}",
                self.basis
            )));
        }
        let square = |rows: &Vec<Vec<f64>>| rows.len() == N && rows.iter().all(|r| r.len() == N);
        if !square(&self.re) || !square(&self.im) {
            return Err(CliError::Data(format!("re and im must both be {N}×{N}")));
        }
        let mut m = CMatrix::<N>::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = Complex64::new(self.re[i][j], self.im[i][j]);
            }
        }
        Ok(m)
    }
}

pub fn density_to_json(rho: &DensityMatrix) -> MatrixJson {
    MatrixJson::from_matrix(&BASIS_LABELS, rho.matrix())
}

/// Reads a matrix without checking physicality.
pub fn density_from_json(json: &MatrixJson) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_raw(json.to_matrix(&BASIS_LABELS)?))
}

/// Debug dump of a bench unitary.
pub fn unitary_to_json<const N: usize>(u: &OpticalUnitary<N>) -> MatrixJson {
    if N == 2 {
        let labels: [&str; N] = core::array::from_fn(|i| POLARIZATION_LABELS[i]);
        MatrixJson::from_matrix(&labels, u.matrix())
    } else {
        let labels: [&str; N] = core::array::from_fn(|i| BASIS_LABELS[i]);
        MatrixJson::from_matrix(&labels, u.matrix())
    }
}

pub fn unitary_from_json<const N: usize>(json: &MatrixJson) -> Result<OpticalUnitary<N>> {
    let labels: [&str; N] = match N {
        2 => core::array::from_fn(|i| POLARIZATION_LABELS[i]),
        4 => core::array::from_fn(|i| BASIS_LABELS[i]),
        _ => return Err(CliError::Data(format!("no basis labels for dimension {N}"))),
    };
    Ok(OpticalUnitary::from_matrix(json.to_matrix(&labels)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesJson {
    pub s0: [f64; 4],
    pub s1: [f64; 4],
    #[serde(rename = "S_re")]
    pub s_re: [f64; 4],
    #[serde(rename = "S_im")]
    pub s_im: [f64; 4],
}

impl From<&StokesSet> for StokesJson {
    fn from(set: &StokesSet) -> Self {
        StokesJson {
            s0: set.path0.s,
            s1: set.path1.s,
            s_re: set.cross.s.map(|z| z.re),
            s_im: set.cross.s.map(|z| z.im),
        }
    }
}

impl From<&StokesJson> for StokesSet {
    fn from(json: &StokesJson) -> Self {
        StokesSet {
            path0: OnePathStokes {
                path: 0,
                s: json.s0,
            },
            path1: OnePathStokes {
                path: 1,
                s: json.s1,
            },
            cross: TwoPathStokes {
                s: core::array::from_fn(|n| Complex64::new(json.s_re[n], json.s_im[n])),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunJson {
    pub setting: String,
    /// Realized plate angle per SPM (`"SPM0"`..`"SPM3"`); empty when no plate is inserted.
    pub angles: BTreeMap<String, f64>,
    pub phase: f64,
    pub n_in: u64,
    pub counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDataJson {
    pub runs: Vec<RunJson>,
}

fn spm_label(spm: usize) -> String {
    format!("SPM{spm}")
}

impl From<&CountData> for CountDataJson {
    fn from(data: &CountData) -> Self {
        let runs = data
            .runs
            .iter()
            .map(|run| RunJson {
                setting: run.setting.kind.as_str().to_string(),
                angles: run
                    .angles
                    .map(|a| (0..4).map(|spm| (spm_label(spm), a[spm])).collect())
                    .unwrap_or_default(),
                phase: run.phase,
                n_in: run.n_in,
                counts: Detector::ALL
                    .iter()
                    .map(|d| (d.id().to_string(), run.count(*d)))
                    .collect(),
            })
            .collect();
        CountDataJson { runs }
    }
}

impl CountDataJson {
    /// Converts to the in-memory record, checking detector ids, angles and count sums.
    pub fn to_count_data(&self) -> Result<CountData> {
        let mut runs = Vec::with_capacity(self.runs.len());
        for (idx, r) in self.runs.iter().enumerate() {
            let bad = |msg: String| CliError::Data(format!("run {idx}: {msg}"));
            let kind = PlateKind::parse(&r.setting)
                .ok_or_else(|| bad(format!("unknown setting {:?}", r.setting)))?;
            if !r.phase.is_finite() {
                return Err(bad("phase must be finite".into()));
            }

            let angles = if r.angles.is_empty() {
                None
            } else {
                let mut a = [0.0; 4];
                for (spm, slot) in a.iter_mut().enumerate() {
                    *slot = *r
                        .angles
                        .get(&spm_label(spm))
                        .ok_or_else(|| bad(format!("angles lack {}", spm_label(spm))))?;
                }
                if r.angles.len() != 4 {
                    return Err(bad("angles must name exactly SPM0..SPM3".into()));
                }
                Some(a)
            };

            let mut counts = [0u64; 8];
            for (id, &n) in &r.counts {
                let d =
                    Detector::parse(id).ok_or_else(|| bad(format!("unknown detector {id:?}")))?;
                counts[d.index()] = n;
            }
            for d in Detector::ALL {
                if !r.counts.contains_key(d.id()) {
                    return Err(bad(format!("missing count for {}", d.id())));
                }
            }
            let total: u64 = counts.iter().sum();
            if total != r.n_in {
                return Err(bad(format!("counts sum to {total} but n_in is {}", r.n_in)));
            }

            runs.push(Run {
                setting: PlateSetting::canonical(kind),
                angles,
                phase: r.phase,
                n_in: r.n_in,
                counts,
            });
        }
        Ok(CountData { runs })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    pub cost_initial: f64,
    pub cost_final: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsJson {
    pub fidelity: f64,
    pub trace_distance: f64,
    pub purity_est: f64,
    pub purity_ref: f64,
}

impl From<&Metrics> for MetricsJson {
    fn from(m: &Metrics) -> Self {
        MetricsJson {
            fidelity: m.fidelity,
            trace_distance: m.trace_distance,
            purity_est: m.purity_est,
            purity_ref: m.purity_ref,
        }
    }
}

impl From<&MetricsJson> for Metrics {
    fn from(m: &MetricsJson) -> Self {
        Metrics {
            fidelity: m.fidelity,
            trace_distance: m.trace_distance,
            purity_est: m.purity_est,
            purity_ref: m.purity_ref,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    /// `"mle"` when the maximum-likelihood refinement ran, `"linear"` otherwise.
    pub method: String,
    pub rho_linear: MatrixJson,
    pub rho_mle: Option<MatrixJson>,
    pub diagnostics: Option<DiagnosticsJson>,
    pub metrics: Option<MetricsJson>,
}

impl From<&ReconstructionResult> for ResultJson {
    fn from(r: &ReconstructionResult) -> Self {
        ResultJson {
            method: if r.rho_mle.is_some() { "mle" } else { "linear" }.to_string(),
            rho_linear: density_to_json(&r.rho_linear),
            rho_mle: r.rho_mle.as_ref().map(density_to_json),
            diagnostics: r.diagnostics.map(|d| DiagnosticsJson {
                cost_initial: d.cost_initial,
                cost_final: d.cost_final,
                iterations: d.iterations,
                converged: d.converged,
            }),
            metrics: r.metrics.as_ref().map(MetricsJson::from),
        }
    }
}

impl ResultJson {
    pub fn to_result(&self) -> Result<ReconstructionResult> {
        let rho_mle = match &self.rho_mle {
            Some(m) => Some(density_from_json(m)?.into_validated()?),
            None => None,
        };
        let expected = if rho_mle.is_some() { "mle" } else { "linear" };
        if self.method != expected {
            return Err(CliError::Data(format!(
                "method {:?} does not match the stored matrices",
                self.method
            )));
        }
        Ok(ReconstructionResult {
            rho_linear: density_from_json(&self.rho_linear)?,
            rho_mle,
            diagnostics: self.diagnostics.map(|d| MleDiagnostics {
                cost_initial: d.cost_initial,
                cost_final: d.cost_final,
                iterations: d.iterations,
                converged: d.converged,
            }),
            metrics: self.metrics.as_ref().map(Metrics::from),
        })
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("document types serialize infallibly");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Reads a state file and requires it to be physical.
pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let json: MatrixJson = read_json(path)?;
    Ok(density_from_json(&json)?.into_validated()?)
}

pub fn read_counts(path: &Path) -> Result<CountData> {
    read_json::<CountDataJson>(path)?.to_count_data()
}

pub fn read_result(path: &Path) -> Result<ReconstructionResult> {
    read_json::<ResultJson>(path)?.to_result()
}
