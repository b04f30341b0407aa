//! Negativity, the spectral lower bound on D²_min, and optimal witnesses.

use serde::Serialize;

use crate::config::ZERO_TOL;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::states::{Bipartition, DensityMatrix};

/// Spectrum of ρ^Γ with its negative-part summaries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub spectrum: Vec<f64>,
    /// Σ|λ| over negative eigenvalues.
    pub neg_sum: f64,
    /// Σλ² over negative eigenvalues.
    pub neg_sq_sum: f64,
    /// Number of eigenvalues above the zero tolerance.
    pub pos_rank: usize,
}

impl SpectrumReport {
    pub fn from_spectrum(spectrum: Vec<f64>) -> Self {
        let negs = spectrum.iter().filter(|&&l| l < 0.0);
        let neg_sum = negs.clone().map(|l| -l).sum();
        let neg_sq_sum = negs.map(|l| l * l).sum();
        let pos_rank = linalg::rank_with_tol(&spectrum, ZERO_TOL);
        Self {
            spectrum,
            neg_sum,
            neg_sq_sum,
            pos_rank,
        }
    }

    /// (Σ|neg|)² / pos_rank + Σ neg²
    pub fn lower_bound(&self) -> f64 {
        if self.pos_rank == 0 {
            return self.neg_sq_sum;
        }
        self.neg_sum * self.neg_sum / self.pos_rank as f64 + self.neg_sq_sum
    }
}

pub fn spectrum_report(rho: &DensityMatrix, cut: &Bipartition) -> Result<SpectrumReport> {
    Ok(SpectrumReport::from_spectrum(linalg::eigvalsh(
        &rho.partial_transpose(cut)?,
    )?))
}

/// Σ|negative eigenvalues of ρ^Γ|.
pub fn negativity(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    spectrum_report(rho, cut).map(|r| r.neg_sum)
}

/// Tr(|ρ^Γ| − ρ^Γ), twice [`negativity`].
pub fn paper_negativity(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    let pt = rho.partial_transpose(cut)?;
    let abs = linalg::matrix_abs(&pt)?;
    Ok((&abs - &pt).trace().re)
}

pub fn lower_bound(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    spectrum_report(rho, cut).map(|r| r.lower_bound())
}

/// Both normalizations of the lower bound and both ways of counting the
/// positive rank.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundDiagnostics {
    /// (Σ|neg|)²/pos_rank + Σneg², the bound that is tight in case A.
    pub lower_bound: f64,
    /// (Tr(|ρ^Γ|−ρ^Γ))²/rank(ρ^Γ+|ρ^Γ|) + ‖|ρ^Γ|−ρ^Γ‖²_HS, four times the above.
    pub trace_form: f64,
    pub pos_rank_spectral: usize,
    pub pos_rank_matrix: usize,
    pub rank_mismatch: bool,
}

pub fn lower_bound_diagnostics(
    rho: &DensityMatrix,
    cut: &Bipartition,
) -> Result<LowerBoundDiagnostics> {
    let pt = rho.partial_transpose(cut)?;
    let eig = linalg::herm_eig(&pt)?;
    let report = SpectrumReport::from_spectrum(eig.values.clone());
    let abs = eig.map_spectrum(|l| C64::new(l.abs(), 0.0));
    let gap = &abs - &pt;
    let plus = (&abs + &pt).hermitian_part();
    let pos_rank_matrix = linalg::rank_with_tol(&linalg::eigvalsh(&plus)?, ZERO_TOL);
    let tr = gap.trace().re;
    let trace_form = if pos_rank_matrix == 0 {
        gap.hs_norm_sq()
    } else {
        tr * tr / pos_rank_matrix as f64 + gap.hs_norm_sq()
    };
    Ok(LowerBoundDiagnostics {
        lower_bound: report.lower_bound(),
        trace_form,
        pos_rank_spectral: report.pos_rank,
        pos_rank_matrix,
        rank_mismatch: report.pos_rank != pos_rank_matrix,
    })
}

/// A Hermitian witness operator with the normalization it was built with.
#[derive(Clone, Debug)]
pub struct WitnessOperator {
    w: ComplexMatrix,
    norm_check: f64,
}

impl WitnessOperator {
    pub fn new(w: ComplexMatrix, norm_check: f64) -> Result<Self> {
        let defect = w.hermitian_defect();
        if defect > 1e-10 || !w.is_finite() {
            return Err(Error::NotHermitian { defect });
        }
        if norm_check.is_nan() || norm_check <= 0.0 {
            return Err(Error::OutOfRange(format!(
                "witness normalization {norm_check} must be positive"
            )));
        }
        Ok(Self { w, norm_check })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    /// ‖ρ_CSS − ρ‖_HS used as the denominator.
    pub fn norm_check(&self) -> f64 {
        self.norm_check
    }
}

/// W = (σ − ρ − Tr[σ(σ−ρ)]·I) / ‖σ − ρ‖_HS for the closest separable state σ.
pub fn build_witness(rho: &DensityMatrix, css: &DensityMatrix) -> Result<WitnessOperator> {
    let d2 = linalg::hs_distance_sq(rho.matrix(), css.matrix())?;
    if d2 <= 1e-12 {
        return Err(Error::DegenerateInput { distance_sq: d2 });
    }
    let norm = d2.sqrt();
    let diff = css.matrix() - rho.matrix();
    let offset = css.matrix().trace_product(&diff);
    let n = rho.dim();
    let w = (&diff - &ComplexMatrix::identity(n).scale(offset))
        .scale_re(1.0 / norm)
        .hermitian_part();
    WitnessOperator::new(w, norm)
}

/// Tr(Wσ). Fails if the result has an imaginary part above 1e-10.
pub fn eval_witness(w: &WitnessOperator, sigma: &DensityMatrix) -> Result<f64> {
    if w.w.shape() != sigma.matrix().shape() {
        return Err(Error::ShapeMismatch {
            left: w.w.shape(),
            right: sigma.matrix().shape(),
        });
    }
    let v = w.w.trace_product(sigma.matrix());
    if v.im.abs() > 1e-10 {
        return Err(Error::NotHermitian { defect: v.im.abs() });
    }
    Ok(v.re)
}
