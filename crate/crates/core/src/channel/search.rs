//! Search for a local dilated channel that increases D²_min on two qubits.
//!
//! g(a) = D²_min(Tr_CD[(U_AC⊗U_BD)(ρ⊗σ_env)(…)†]) with U_AC = exp(iΣa₁..₁₆Λ)
//! and U_BD = exp(iΣa₁₇..₃₂Λ). Nelder–Mead maximizes g from a = 0 (the
//! identity channel, so g = D²_min(ρ)) and from random Gaussian starts.

use rayon::prelude::*;
use serde::Serialize;

use super::{apply_dilation, unitary_from_params, ChannelSpec, GellMannBasis};
use crate::css::min_hsd;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::optimize::{nelder_mead, NelderMeadConfig};
use crate::rng::Rng64;
use crate::states::{Bipartition, DensityMatrix};

pub const N_PARAMS: usize = 32;
const VIOLATION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoccSearchConfig {
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub evals: usize,
    pub initial_step: f64,
    /// Worker threads; 1 runs restarts in order on the calling thread.
    pub jobs: usize,
}

impl Default for LoccSearchConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            evals: 2000,
            initial_step: 0.5,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub seed: u64,
    pub restarts: usize,
    pub evals: usize,
    pub baseline_min_hsd: f64,
    pub best_value: f64,
    pub best_restart: usize,
    pub best_params: Vec<f64>,
    /// Spectrum of the best output's partial transpose, descending.
    pub best_output_spectrum: Vec<f64>,
    /// Same for the input, for comparing eigenvalue preservation.
    pub input_spectrum: Vec<f64>,
    pub gap: f64,
    pub violation: bool,
}

struct Problem<'a> {
    rho: &'a DensityMatrix,
    env: &'a DensityMatrix,
    basis: GellMannBasis,
    cut: Bipartition,
}

impl Problem<'_> {
    fn output(&self, params: &[f64]) -> Result<DensityMatrix> {
        if params.len() != N_PARAMS {
            return Err(Error::LengthMismatch {
                expected: N_PARAMS,
                got: params.len(),
            });
        }
        let u_ac = unitary_from_params(&params[..16], &self.basis)?;
        let u_bd = unitary_from_params(&params[16..], &self.basis)?;
        let spec = ChannelSpec::dilation(self.env.clone(), u_ac, u_bd)?;
        apply_dilation(self.rho, &spec)
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        min_hsd(&self.output(params)?, &self.cut)
    }
}

fn check_two_qubits(name: &str, s: &DensityMatrix) -> Result<()> {
    if s.dims() != [2, 2] {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be 2x2, got dims {:?}",
            s.dims()
        )));
    }
    Ok(())
}

fn problem<'a>(rho: &'a DensityMatrix, env: &'a DensityMatrix) -> Result<Problem<'a>> {
    check_two_qubits("state", rho)?;
    check_two_qubits("environment", env)?;
    Ok(Problem {
        rho,
        env,
        basis: GellMannBasis::new(4)?,
        cut: Bipartition::first_vs_rest(2)?,
    })
}

/// g(params): D²_min of the channel output.
pub fn locc_objective(rho: &DensityMatrix, env: &DensityMatrix, params: &[f64]) -> Result<f64> {
    problem(rho, env)?.value(params)
}

/// Parameters for which U_AC = U_BD = SWAP: H = (π/2)(I − SWAP) gives
/// exp(iH) = SWAP exactly, so the output is the environment state.
pub fn swap_params() -> Vec<f64> {
    let basis = GellMannBasis::new(4).expect("d = 4");
    let mut swap = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            swap[(i * 2 + j, j * 2 + i)] = linalg::ONE;
        }
    }
    let h = (&ComplexMatrix::identity(4) - &swap).scale_re(std::f64::consts::FRAC_PI_2);
    let half = basis.coefficients(&h);
    [half.clone(), half].concat()
}

struct RestartOutcome {
    value: f64,
    params: Vec<f64>,
}

fn run_restart(p: &Problem<'_>, cfg: &LoccSearchConfig, seed: u64, idx: usize) -> RestartOutcome {
    let mut rng = Rng64::new(seed, idx as u64 + 1);
    let x0: Vec<f64> = if idx == 0 {
        vec![0.0; N_PARAMS]
    } else {
        (0..N_PARAMS).map(|_| rng.gaussian()).collect()
    };
    let nm = NelderMeadConfig {
        max_evals: cfg.evals,
        initial_step: cfg.initial_step,
        ..Default::default()
    };
    // failures (never expected: the output is always a valid state) rank last
    let mut f = |x: &[f64]| p.value(x).map_or(f64::NAN, |v| -v);
    let m = nelder_mead(&mut f, &x0, &nm, &mut rng);
    RestartOutcome {
        value: -m.value,
        params: m.x,
    }
}

pub fn locc_search(
    rho: &DensityMatrix,
    env: &DensityMatrix,
    cfg: &LoccSearchConfig,
    seed: u64,
) -> Result<SearchReport> {
    if cfg.evals == 0 || cfg.restarts == 0 {
        return Err(Error::OutOfRange(
            "search needs at least one restart and one evaluation".into(),
        ));
    }
    let p = problem(rho, env)?;
    let baseline = min_hsd(rho, &p.cut)?;

    let outcomes: Vec<RestartOutcome> = if cfg.jobs <= 1 {
        (0..cfg.restarts)
            .map(|i| run_restart(&p, cfg, seed, i))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::OutOfRange(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..cfg.restarts)
                .into_par_iter()
                .map(|i| run_restart(&p, cfg, seed, i))
                .collect()
        })
    };

    // first restart wins ties, so the report does not depend on scheduling
    let (best_restart, best) = outcomes
        .iter()
        .enumerate()
        .fold(None::<(usize, &RestartOutcome)>, |acc, (i, o)| match acc {
            Some((_, b)) if b.value >= o.value => acc,
            _ => Some((i, o)),
        })
        .expect("at least one restart");

    let best_out = p.output(&best.params)?;
    let best_output_spectrum = linalg::eigvalsh(&best_out.partial_transpose(&p.cut)?)?;
    let input_spectrum = linalg::eigvalsh(&rho.partial_transpose(&p.cut)?)?;
    let gap = best.value - baseline;
    Ok(SearchReport {
        seed,
        restarts: cfg.restarts,
        evals: cfg.evals,
        baseline_min_hsd: baseline,
        best_value: best.value,
        best_restart,
        best_params: best.params.clone(),
        best_output_spectrum,
        input_spectrum,
        gap,
        violation: gap > VIOLATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{named_state, random_product_pure, NamedState};

    fn bell() -> DensityMatrix {
        named_state(&NamedState::Bell).unwrap()
    }

    #[test]
    fn zero_params_is_identity() {
        let env = named_state(&NamedState::Werner(1.0 / 3.0)).unwrap();
        let g = locc_objective(&bell(), &env, &[0.0; 32]).unwrap();
        assert!((g - 1.0 / 3.0).abs() < 1e-12);
        assert!(locc_objective(&bell(), &env, &[0.0; 31]).is_err());
    }

    #[test]
    fn swap_params_separate() {
        let env = random_product_pure(&[2, 2], 3);
        let g = locc_objective(&bell(), &env, &swap_params()).unwrap();
        assert!(g < 1e-10, "{g}");
        let env = named_state(&NamedState::Werner(1.0 / 3.0)).unwrap();
        assert!(locc_objective(&bell(), &env, &swap_params()).unwrap() < 1e-10);
    }

    #[test]
    fn single_eval_reports_baseline() {
        let env = named_state(&NamedState::Werner(1.0 / 3.0)).unwrap();
        let cfg = LoccSearchConfig {
            restarts: 1,
            evals: 1,
            ..Default::default()
        };
        let r = locc_search(&bell(), &env, &cfg, 0).unwrap();
        assert_eq!(r.best_params, vec![0.0; 32]);
        assert!((r.best_value - r.baseline_min_hsd).abs() < 1e-12);
        assert!(!r.violation);
    }

    #[test]
    fn short_search_is_deterministic_and_clean() {
        let env = named_state(&NamedState::Werner(1.0 / 3.0)).unwrap();
        let cfg = LoccSearchConfig {
            restarts: 3,
            evals: 150,
            ..Default::default()
        };
        let a = locc_search(&bell(), &env, &cfg, 42).unwrap();
        let b = locc_search(&bell(), &env, &LoccSearchConfig { jobs: 2, ..cfg }, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(!a.violation, "{a:?}");
        assert!(a.best_value >= a.baseline_min_hsd - 1e-12);
        assert_eq!(a.best_params.len(), 32);
        assert_eq!(a.best_output_spectrum.len(), 4);
    }

    #[test]
    fn rejects_wrong_dims() {
        let ghz = named_state(&NamedState::Ghz).unwrap();
        assert!(locc_search(&ghz, &bell(), &LoccSearchConfig::default(), 0).is_err());
    }
}
