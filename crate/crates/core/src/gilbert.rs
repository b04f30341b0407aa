//! Gilbert's algorithm over the separable set: an upper bound on D²_min in
//! any dimension, plus the commutator trace ‖[ρ^Γ, σ_k^Γ]‖_HS along the run.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{self, ComplexMatrix, C64};
use crate::rng::{haar_vector, Rng64};
use crate::states::{Bipartition, DensityMatrix};

/// Alternating rounds per restart of the product-state search.
pub const ORACLE_ROUNDS: usize = 20;
pub const DEFAULT_RESTARTS: usize = 5;
pub const DEFAULT_WINDOW: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GilbertRecord {
    pub iter: usize,
    pub distance_sq_upper: f64,
    pub commutator_hs: f64,
}

#[derive(Clone, Debug)]
pub struct GilbertTrace {
    pub records: Vec<GilbertRecord>,
    pub sigma: DensityMatrix,
}

impl GilbertTrace {
    pub fn final_upper_bound(&self) -> f64 {
        self.records
            .last()
            .map_or(f64::NAN, |r| r.distance_sq_upper)
    }

    pub fn commutators(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.commutator_hs).collect()
    }

    /// `iter,distance_sq_upper,commutator_hs`, one row per iteration.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,distance_sq_upper,commutator_hs")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:.15e},{:.15e}",
                r.iter, r.distance_sq_upper, r.commutator_hs
            )?;
        }
        Ok(())
    }
}

/// Best product vector a⊗b found for max ⟨a⊗b|X|a⊗b⟩, with its value.
fn product_oracle(
    x: &ComplexMatrix,
    da: usize,
    db: usize,
    restarts: usize,
    rng: &mut Rng64,
) -> Result<(Vec<C64>, f64)> {
    let mut best: Option<(Vec<C64>, f64)> = None;
    for _ in 0..restarts.max(1) {
        let mut b = haar_vector(db, rng);
        let mut a = vec![C64::new(0.0, 0.0); da];
        let mut value = f64::NEG_INFINITY;
        for _ in 0..ORACLE_ROUNDS {
            let ma = contract_b(x, &b, da, db);
            let ea = linalg::herm_eig(&ma)?;
            a = ea.vector(0);
            let mb = contract_a(x, &a, da, db);
            let eb = linalg::herm_eig(&mb)?;
            b = eb.vector(0);
            let improved = eb.values[0] - value;
            value = eb.values[0];
            if improved.abs() <= 1e-15 {
                break;
            }
        }
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((linalg::kron_vec(&a, &b), value));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// ⟨b|X|b⟩ on side A.
fn contract_b(x: &ComplexMatrix, b: &[C64], da: usize, db: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..db {
                for l in 0..db {
                    acc += b[k].conj() * x[(i * db + k, j * db + l)] * b[l];
                }
            }
            m[(i, j)] = acc;
        }
    }
    m.hermitian_part()
}

/// ⟨a|X|a⟩ on side B.
fn contract_a(x: &ComplexMatrix, a: &[C64], da: usize, db: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(db, db);
    for k in 0..db {
        for l in 0..db {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..da {
                for j in 0..da {
                    acc += a[i].conj() * x[(i * db + k, j * db + l)] * a[j];
                }
            }
            m[(k, l)] = acc;
        }
    }
    m.hermitian_part()
}

/// Runs `iters` Gilbert corrections starting from the maximally mixed state.
pub fn gilbert_css(
    rho: &DensityMatrix,
    cut: &Bipartition,
    iters: usize,
    restarts: usize,
    seed: u64,
) -> Result<GilbertTrace> {
    let order = cut.ordering();
    let (rho_p, _) = linalg::permute_subsystems(rho.matrix(), rho.dims(), &order)?;
    let (da, db) = cut.side_dims(rho.dims());
    let frame = [da, db];
    let n = da * db;
    let rho_pt = linalg::partial_transpose(&rho_p, &frame, 1)?;
    let mut rng = Rng64::new(seed, 0);

    let mut sigma = ComplexMatrix::identity(n).scale_re(1.0 / n as f64);
    let mut records = Vec::with_capacity(iters);
    for iter in 1..=iters {
        let residual = &rho_p - &sigma;
        let (v, _) = product_oracle(&residual, da, db, restarts, &mut rng)?;
        let pi = ComplexMatrix::outer(&v, &v);
        let step = &pi - &sigma;
        let den = step.hs_norm_sq();
        if den > 0.0 {
            let t = (residual.trace_product(&step).re / den).clamp(0.0, 1.0);
            if t > 0.0 {
                sigma = &sigma.scale_re(1.0 - t) + &pi.scale_re(t);
            }
        }
        let sigma_pt = linalg::partial_transpose(&sigma, &frame, 1)?;
        records.push(GilbertRecord {
            iter,
            distance_sq_upper: linalg::hs_distance_sq(&rho_p, &sigma)?,
            commutator_hs: linalg::commutator_norm(&rho_pt, &sigma_pt)?,
        });
    }

    let mut inverse = vec![0; order.len()];
    for (pos, &k) in order.iter().enumerate() {
        inverse[k] = pos;
    }
    let frame_dims: Vec<usize> = order.iter().map(|&k| rho.dims()[k]).collect();
    let (sigma_orig, _) = linalg::permute_subsystems(&sigma, &frame_dims, &inverse)?;
    Ok(GilbertTrace {
        records,
        sigma: DensityMatrix::from_parts_unchecked(
            sigma_orig.hermitian_part(),
            rho.dims().to_vec(),
        ),
    })
}

/// ‖ab − ba‖_HS
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    linalg::commutator_norm(a, b)
}

/// Trailing moving average; entry `i` averages `values[i+1-window..=i]`
/// (fewer points at the start).
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        acc += v;
        if i >= window {
            acc -= values[i - window];
        }
        out.push(acc / (i + 1).min(window) as f64);
    }
    out
}

/// Ratio of the windowed commutator average at iteration `late` to that at
/// iteration `early` (1-based).
pub fn commutator_decay_ratio(
    trace: &GilbertTrace,
    window: usize,
    early: usize,
    late: usize,
) -> f64 {
    let ma = moving_average(&trace.commutators(), window);
    ma[late - 1] / ma[early - 1]
}
