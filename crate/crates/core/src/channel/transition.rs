use serde::Serialize;

use super::ChannelSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};

const DEGENERATE_GAP: f64 = 1e-8;
const MAJORIZATION_TOL: f64 = 1e-9;

/// How a channel moves spectral weight: σ_l = Σ_j c[l][j] λ_j, where λ are
/// the eigenvalues of the input x (basis e_j) and σ those of Φ(x) (basis f_l).
#[derive(Clone, Debug, Serialize)]
pub struct TransitionMatrix {
    /// c[l][j] = Σ_i |⟨f_l|K_i|e_j⟩|²
    pub c: Vec<Vec<f64>>,
    pub input_spectrum: Vec<f64>,
    pub output_spectrum: Vec<f64>,
    /// ⟨f_l|Φ(I)|f_l⟩
    pub phi_identity_diag: Vec<f64>,
    /// Some eigenvalue gap of x or Φ(x) is below 1e-8, so the eigenbases
    /// (and hence c) are not unique. The spectral identity still holds.
    pub degenerate: bool,
}

impl TransitionMatrix {
    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.input_spectrum.len();
        (0..n)
            .map(|j| self.c.iter().map(|row| row[j]).sum())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.c.iter().map(|row| row.iter().sum()).collect()
    }

    /// C·λ
    pub fn predicted_output(&self) -> Vec<f64> {
        self.c
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.input_spectrum)
                    .map(|(c, l)| c * l)
                    .sum()
            })
            .collect()
    }

    /// max_l |σ_l − (C·λ)_l|
    pub fn spectral_residual(&self) -> f64 {
        self.predicted_output()
            .iter()
            .zip(&self.output_spectrum)
            .map(|(p, s)| (p - s).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        self.c.iter().flatten().all(|&v| v >= -tol)
            && self.column_sums().iter().all(|s| (s - 1.0).abs() <= tol)
            && self.row_sums().iter().all(|s| (s - 1.0).abs() <= tol)
    }
}

fn has_small_gap(sorted: &[f64]) -> bool {
    sorted
        .windows(2)
        .any(|w| (w[0] - w[1]).abs() < DEGENERATE_GAP)
}

fn overlap(f: &[C64], k: &ComplexMatrix, e: &[C64]) -> C64 {
    let ke = k.mat_vec(e);
    f.iter().zip(&ke).map(|(a, b)| a.conj() * b).sum()
}

pub fn transition_matrix(x: &ComplexMatrix, channel: &ChannelSpec) -> Result<TransitionMatrix> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let defect = x.hermitian_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitian { defect });
    }
    let ops = channel.kraus_ops()?;
    let n = x.rows();
    let input = linalg::herm_eig(x)?;
    let out = channel.apply_operator(x)?.hermitian_part();
    let output = linalg::herm_eig(&out)?;
    let es: Vec<Vec<C64>> = (0..n).map(|j| input.vector(j)).collect();
    let fs: Vec<Vec<C64>> = (0..n).map(|l| output.vector(l)).collect();

    let mut c = vec![vec![0.0; n]; n];
    for (l, f) in fs.iter().enumerate() {
        for (j, e) in es.iter().enumerate() {
            c[l][j] = ops.iter().map(|k| overlap(f, k, e).norm_sqr()).sum();
        }
    }
    let phi_i = channel.image_of_identity(n)?;
    let phi_identity_diag = fs
        .iter()
        .map(|f| {
            f.iter()
                .zip(phi_i.mat_vec(f))
                .map(|(a, b)| (a.conj() * b).re)
                .sum()
        })
        .collect();
    let degenerate = has_small_gap(&input.values) || has_small_gap(&output.values);
    Ok(TransitionMatrix {
        c,
        input_spectrum: input.values,
        output_spectrum: output.values,
        phi_identity_diag,
        degenerate,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MajorizationReport {
    /// σ ⪯ λ: every prefix inequality holds and totals agree.
    pub majorized: bool,
    /// Σ_{i≤k} λ_i − Σ_{i≤k} σ_i, k = 1..n (descending order); all ≥ 0 when majorized.
    pub prefix_gaps: Vec<f64>,
    /// Σ_{i≥k} σ_i − Σ_{i≥k} λ_i, the equivalent tail form; all ≥ 0 when majorized.
    pub tail_gaps: Vec<f64>,
    pub total_gap: f64,
}

/// Is `sigma` majorized by `lambda`? Both are sorted descending here, so
/// callers may pass them in any order.
pub fn majorization_check(sigma: &[f64], lambda: &[f64]) -> Result<MajorizationReport> {
    if sigma.len() != lambda.len() {
        return Err(Error::LengthMismatch {
            expected: lambda.len(),
            got: sigma.len(),
        });
    }
    let sort_desc = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (s, l) = (sort_desc(sigma), sort_desc(lambda));
    let n = s.len();
    let mut prefix_gaps = Vec::with_capacity(n);
    let (mut ps, mut pl) = (0.0, 0.0);
    for k in 0..n {
        ps += s[k];
        pl += l[k];
        prefix_gaps.push(pl - ps);
    }
    let mut tail_gaps = vec![0.0; n];
    let (mut ts, mut tl) = (0.0, 0.0);
    for k in (0..n).rev() {
        ts += s[k];
        tl += l[k];
        tail_gaps[k] = ts - tl;
    }
    let total_gap = pl - ps;
    let majorized =
        total_gap.abs() <= MAJORIZATION_TOL && prefix_gaps.iter().all(|g| *g >= -MAJORIZATION_TOL);
    Ok(MajorizationReport {
        majorized,
        prefix_gaps,
        tail_gaps,
        total_gap,
    })
}
