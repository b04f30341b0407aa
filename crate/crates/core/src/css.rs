//! Closest separable / closest PPT state under the Hilbert-Schmidt distance.
//!
//! The solver works on ρ^Γ. Each pass keeps the positive part
//! ρ_f = ½(|ρ⁽ⁱ⁾| + ρ⁽ⁱ⁾), measures the trace excess N = 1 − Tr ρ_f, and, if
//! that is nonzero, shifts the whole operator by N/r·I where r is the rank of
//! ρ_f. Once N vanishes, (ρ_f)^Γ is the closest state whose partial transpose
//! is PSD. For 2×2 and 2×3 that set is exactly the separable set.

use std::fmt;

use serde::Serialize;

use crate::config::{DEFAULT_CSS_TOL, PSD_TOL, TRACE_TOL, ZERO_TOL};
use crate::error::{Error, Result, Violation};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::rng::Rng64;
use crate::states::{self, Bipartition, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CssLabel {
    /// PPT is equivalent to separability (2×2, 2×3), so the result is the CSS.
    #[serde(rename = "separable-certified")]
    SeparableCertified,
    /// Only the closest PPT state is promised.
    #[serde(rename = "ppt-only")]
    PptOnly,
}

impl CssLabel {
    pub fn for_side_dims(da: usize, db: usize) -> Self {
        match (da.min(db), da.max(db)) {
            (2, 2) | (2, 3) => CssLabel::SeparableCertified,
            _ => CssLabel::PptOnly,
        }
    }
}

impl fmt::Display for CssLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CssLabel::SeparableCertified => "separable-certified",
            CssLabel::PptOnly => "ppt-only",
        })
    }
}

/// One pass of the loop.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    /// Spectrum of ρ⁽ⁱ⁾, descending.
    pub spectrum_in: Vec<f64>,
    /// N_i = 1 − Tr ρ_f⁽ⁱ⁾
    pub n_i: f64,
    /// r_i = rank ρ_f⁽ⁱ⁾
    pub r_i: usize,
    /// N_i / r_i, or 0 on the terminating pass.
    pub shift: f64,
}

#[derive(Clone, Debug)]
pub struct CssResult {
    pub css: DensityMatrix,
    /// (ρ_f)^Γ's preimage: the partially transposed CSS.
    pub css_pt: ComplexMatrix,
    pub distance_sq: f64,
    pub iterations: Vec<IterationRecord>,
    pub label: CssLabel,
    pub cut: Bipartition,
}

/// Runs the three-step loop. `tol` bounds |N_i| at termination.
pub fn closest_separable(rho: &DensityMatrix, cut: &Bipartition, tol: f64) -> Result<CssResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let rho_pt = rho.partial_transpose(cut)?;
    let dim = rho.dim();
    let identity = ComplexMatrix::identity(dim);
    let mut current = rho_pt;
    let mut iterations = Vec::new();

    for _ in 0..dim {
        let eig = linalg::herm_eig(&current)?;
        let abs = eig.map_spectrum(|l| C64::new(l.abs(), 0.0));
        let rho_f = (&abs + &current).scale_re(0.5).hermitian_part();
        let f_spectrum = linalg::eigvalsh(&rho_f)?;
        let r_i = linalg::rank_with_tol(&f_spectrum, ZERO_TOL);
        let n_i = 1.0 - rho_f.trace().re;

        if n_i.abs() <= tol {
            iterations.push(IterationRecord {
                spectrum_in: eig.values,
                n_i,
                r_i,
                shift: 0.0,
            });
            return finish(rho, cut, rho_f, iterations, tol);
        }
        if r_i == 0 {
            return Err(Error::InvalidCss {
                min_eigenvalue: f64::NAN,
                distance_sq: f64::NAN,
                violations: vec![],
            });
        }
        let shift = n_i / r_i as f64;
        iterations.push(IterationRecord {
            spectrum_in: eig.values,
            n_i,
            r_i,
            shift,
        });
        current = &rho_f + &identity.scale_re(shift);
    }
    Err(Error::MaxIterationsExceeded { max: dim })
}

fn finish(
    rho: &DensityMatrix,
    cut: &Bipartition,
    css_pt: ComplexMatrix,
    iterations: Vec<IterationRecord>,
    tol: f64,
) -> Result<CssResult> {
    let css_mat =
        linalg::partial_transpose_many(&css_pt, rho.dims(), cut.side_b())?.hermitian_part();

    let mut bad = Vec::new();
    let trace = css_mat.trace().re;
    if (trace - 1.0).abs() > tol.max(TRACE_TOL) {
        bad.push(Violation::TraceNotOne { trace });
    }
    let min_eig = linalg::eigvalsh(&css_mat)?.last().copied().unwrap_or(0.0);
    if min_eig < -PSD_TOL {
        bad.push(Violation::NotPsd {
            min_eigenvalue: min_eig,
        });
    }
    let min_pt_eig = linalg::eigvalsh(&css_pt)?.last().copied().unwrap_or(0.0);
    if min_pt_eig < -PSD_TOL {
        bad.push(Violation::NotPsd {
            min_eigenvalue: min_pt_eig,
        });
    }
    let distance_sq = linalg::hs_distance_sq(rho.matrix(), &css_mat)?;
    if !bad.is_empty() {
        return Err(Error::InvalidCss {
            min_eigenvalue: min_eig.min(min_pt_eig),
            distance_sq,
            violations: bad,
        });
    }

    let (da, db) = cut.side_dims(rho.dims());
    Ok(CssResult {
        css: DensityMatrix::from_parts_unchecked(css_mat, rho.dims().to_vec()),
        css_pt,
        distance_sq,
        iterations,
        label: CssLabel::for_side_dims(da, db),
        cut: cut.clone(),
    })
}

/// Minimum squared Hilbert-Schmidt distance to the PPT set across `cut`.
pub fn min_hsd(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    closest_separable(rho, cut, DEFAULT_CSS_TOL).map(|r| r.distance_sq)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CaseId {
    /// No negative eigenvalue: already separable, distance 0.
    #[serde(rename = "separable")]
    Separable,
    #[serde(rename = "2x2-A")]
    TwoByTwoA,
    #[serde(rename = "2x2-B")]
    TwoByTwoB,
    #[serde(rename = "2x3-1neg-A")]
    TwoByThreeOneNegA,
    #[serde(rename = "2x3-1neg-B")]
    TwoByThreeOneNegB,
    #[serde(rename = "2x3-2neg-A")]
    TwoByThreeTwoNegA,
    #[serde(rename = "2x3-2neg-B")]
    TwoByThreeTwoNegB,
    #[serde(rename = "other")]
    Other,
}

impl CaseId {
    /// Case A: the first shift leaves every positive eigenvalue nonnegative.
    pub fn is_case_a(self) -> bool {
        matches!(
            self,
            CaseId::TwoByTwoA | CaseId::TwoByThreeOneNegA | CaseId::TwoByThreeTwoNegA
        )
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CaseFormulaResult {
    pub case_id: CaseId,
    pub distance_sq: Option<f64>,
}

impl CaseFormulaResult {
    fn other() -> Self {
        Self {
            case_id: CaseId::Other,
            distance_sq: None,
        }
    }
}

/// Closed-form D²_min from the spectrum of ρ^Γ for the 2×2 and 2×3 cases
/// where at most one extra eigenvalue is clipped. `side_dims` are (d_A, d_B)
/// in either order.
pub fn case_formula(spectrum: &[f64], side_dims: (usize, usize)) -> CaseFormulaResult {
    let mut s = spectrum.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let negatives = s.iter().filter(|&&l| l < -ZERO_TOL).count();
    if negatives == 0 {
        return CaseFormulaResult {
            case_id: CaseId::Separable,
            distance_sq: Some(0.0),
        };
    }
    let small = side_dims.0.min(side_dims.1);
    let big = side_dims.0.max(side_dims.1);
    let sq = |x: f64| x * x;

    let (case_id, d) = match ((small, big), negatives, s.len()) {
        ((2, 2), 1, 4) => {
            let (l2, l3, l4) = (s[1], s[2], -s[3]);
            if l3 - l4 / 3.0 >= 0.0 {
                (CaseId::TwoByTwoA, sq(l4) / 3.0 + sq(l4))
            } else if l2 - (l4 - l3) / 2.0 >= 0.0 {
                (CaseId::TwoByTwoB, sq(l4 - l3) / 2.0 + sq(l3) + sq(l4))
            } else {
                return CaseFormulaResult::other();
            }
        }
        ((2, 3), 1, 6) => {
            let (l4, l5, l6) = (s[3], s[4], -s[5]);
            if l5 - l6 / 5.0 >= 0.0 {
                (CaseId::TwoByThreeOneNegA, sq(l6) / 5.0 + sq(l6))
            } else if l4 - (l6 - l5) / 4.0 >= 0.0 {
                (
                    CaseId::TwoByThreeOneNegB,
                    sq(l6 - l5) / 4.0 + sq(l5) + sq(l6),
                )
            } else {
                return CaseFormulaResult::other();
            }
        }
        ((2, 3), 2, 6) => {
            let (l3, l4, l5, l6) = (s[2], s[3], -s[4], -s[5]);
            if l4 - (l5 + l6) / 4.0 >= 0.0 {
                (
                    CaseId::TwoByThreeTwoNegA,
                    sq(l5 + l6) / 4.0 + sq(l5) + sq(l6),
                )
            } else if l3 - (l5 + l6 - l4) / 3.0 >= 0.0 {
                (
                    CaseId::TwoByThreeTwoNegB,
                    sq(l5 + l6 - l4) / 3.0 + sq(l4) + sq(l5) + sq(l6),
                )
            } else {
                return CaseFormulaResult::other();
            }
        }
        _ => return CaseFormulaResult::other(),
    };
    CaseFormulaResult {
        case_id,
        distance_sq: Some(d),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub commutator_hs: f64,
    pub commutator_ok: bool,
    pub css_min_eigenvalue: f64,
    pub css_pt_min_eigenvalue: f64,
    pub psd_ppt_ok: bool,
    pub case: CaseFormulaResult,
    /// |D²(ρ, css) − case formula|, when a formula applies.
    pub formula_gap: Option<f64>,
    pub formula_ok: bool,
    /// Smallest first-order change of D² when moving from css toward a
    /// random product state (scaled to unit step).
    pub worst_directional_derivative: f64,
    pub local_optimality_ok: bool,
    pub probes: usize,
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const VERIFY_COMMUTATOR_TOL: f64 = 1e-8;
pub const VERIFY_PROBES: usize = 100;

/// Independent checks on a solver result.
pub fn verify_result(rho: &DensityMatrix, result: &CssResult) -> Result<VerificationReport> {
    verify_result_seeded(rho, result, 0)
}

pub fn verify_result_seeded(
    rho: &DensityMatrix,
    result: &CssResult,
    seed: u64,
) -> Result<VerificationReport> {
    verify_result_probes(rho, result, VERIFY_PROBES, seed)
}

/// As [`verify_result_seeded`] with a chosen number of product-state probes.
pub fn verify_result_probes(
    rho: &DensityMatrix,
    result: &CssResult,
    probes: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let cut = &result.cut;
    let rho_pt = rho.partial_transpose(cut)?;
    let css_pt = result.css.partial_transpose(cut)?;
    let mut failures = Vec::new();

    let commutator_hs = linalg::commutator_norm(&rho_pt, &css_pt)?;
    let commutator_ok = commutator_hs <= VERIFY_COMMUTATOR_TOL;
    if !commutator_ok {
        failures.push(format!(
            "commutator ‖[ρ^Γ, σ^Γ]‖ = {commutator_hs:.3e} exceeds {VERIFY_COMMUTATOR_TOL:e}"
        ));
    }

    let css_min_eigenvalue = linalg::eigvalsh(result.css.matrix())?
        .last()
        .copied()
        .unwrap_or(0.0);
    let css_pt_min_eigenvalue = linalg::eigvalsh(&css_pt)?.last().copied().unwrap_or(0.0);
    let trace_ok = (result.css.matrix().trace().re - 1.0).abs() <= 1e-9;
    let psd_ppt_ok =
        css_min_eigenvalue >= -PSD_TOL && css_pt_min_eigenvalue >= -PSD_TOL && trace_ok;
    if !psd_ppt_ok {
        failures.push(format!(
            "css not a PPT state (min eig {css_min_eigenvalue:.3e}, min PT eig {css_pt_min_eigenvalue:.3e}, trace ok {trace_ok})"
        ));
    }

    let distance = linalg::hs_distance_sq(rho.matrix(), result.css.matrix())?;
    let spectrum = linalg::eigvalsh(&rho_pt)?;
    let case = case_formula(&spectrum, cut.side_dims(rho.dims()));
    let formula_gap = case.distance_sq.map(|d| (d - distance).abs());
    let formula_ok = formula_gap.is_none_or(|g| g <= ZERO_TOL);
    if !formula_ok {
        failures.push(format!(
            "distance {distance:.12} disagrees with case {} formula {:.12}",
            case.case_id,
            case.distance_sq.unwrap_or(f64::NAN)
        ));
    }
    if (distance - result.distance_sq).abs() > 1e-10 {
        failures.push(format!(
            "stored distance {} differs from recomputed {}",
            result.distance_sq, distance
        ));
    }

    // For the projection σ onto a convex set, Tr[(ρ−σ)(π−σ)] ≤ 0 for every π
    // in the set; its negation times 2 is the directional derivative of D².
    let mut rng = Rng64::new(seed, 0x5eed);
    let residual = rho.matrix() - result.css.matrix();
    let mut worst = f64::INFINITY;
    for _ in 0..probes {
        let pi = states::random_cut_product_pure_from(rho.dims(), cut, &mut rng)?;
        let dir = pi.matrix() - result.css.matrix();
        let deriv = -2.0 * residual.trace_product(&dir).re;
        worst = worst.min(deriv);
    }
    let local_optimality_ok = probes == 0 || worst >= -ZERO_TOL;
    if !local_optimality_ok {
        failures.push(format!(
            "distance decreases toward a product state (derivative {worst:.3e})"
        ));
    }

    Ok(VerificationReport {
        commutator_hs,
        commutator_ok,
        css_min_eigenvalue,
        css_pt_min_eigenvalue,
        psd_ppt_ok,
        case,
        formula_gap,
        formula_ok,
        worst_directional_derivative: worst,
        local_optimality_ok,
        probes,
        failures,
    })
}
