//! CPTP maps, either as Kraus operators or as an environment dilation
//! ρ_AB ↦ Tr_CD[(U_AC⊗U_BD)(ρ_AB⊗σ_CD)(U_AC⊗U_BD)†], and the spectral tools
//! used to probe how D²_min behaves under them.

mod gell_mann;
mod search;
mod transition;

pub use gell_mann::{unitary_from_params, GellMannBasis};
pub use search::{locc_objective, locc_search, swap_params, LoccSearchConfig, SearchReport};
pub use transition::{majorization_check, transition_matrix, MajorizationReport, TransitionMatrix};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::rng::Rng64;
use crate::states::DensityMatrix;

const COMPLETENESS_TOL: f64 = 1e-9;
const UNITARITY_TOL: f64 = 1e-10;

/// Local unitaries coupling each system qudit to its own environment qudit.
#[derive(Clone, Debug)]
pub struct Dilation {
    env: DensityMatrix,
    u_ac: ComplexMatrix,
    u_bd: ComplexMatrix,
}

impl Dilation {
    /// `env` must be bipartite (C, D); `u_ac` acts on A⊗C and `u_bd` on B⊗D.
    pub fn new(env: DensityMatrix, u_ac: ComplexMatrix, u_bd: ComplexMatrix) -> Result<Self> {
        if env.dims().len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "environment must have two parts, got dims {:?}",
                env.dims()
            )));
        }
        for (name, u) in [("U_AC", &u_ac), ("U_BD", &u_bd)] {
            check_unitary(name, u)?;
        }
        let (dc, dd) = (env.dims()[0], env.dims()[1]);
        if !u_ac.rows().is_multiple_of(dc) || !u_bd.rows().is_multiple_of(dd) {
            return Err(Error::DimensionMismatch(format!(
                "unitaries of size {} and {} do not factor over environment dims {:?}",
                u_ac.rows(),
                u_bd.rows(),
                env.dims()
            )));
        }
        Ok(Self { env, u_ac, u_bd })
    }

    pub fn env(&self) -> &DensityMatrix {
        &self.env
    }

    /// System dims (d_A, d_B) implied by the unitaries.
    pub fn system_dims(&self) -> [usize; 2] {
        [
            self.u_ac.rows() / self.env.dims()[0],
            self.u_bd.rows() / self.env.dims()[1],
        ]
    }

    /// U_AC⊗U_BD written in A,B,C,D order.
    pub fn total_unitary(&self) -> ComplexMatrix {
        let [da, db] = self.system_dims();
        let (dc, dd) = (self.env.dims()[0], self.env.dims()[1]);
        let acbd = linalg::kron(&self.u_ac, &self.u_bd);
        linalg::permute_subsystems(&acbd, &[da, dc, db, dd], &[0, 2, 1, 3])
            .expect("dims are consistent")
            .0
    }
}

fn check_unitary(name: &str, u: &ComplexMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch(format!("{name} is not square")));
    }
    let defect = (&(&u.dagger() * u) - &ComplexMatrix::identity(u.rows())).hs_norm();
    if defect > UNITARITY_TOL {
        return Err(Error::OutOfRange(format!(
            "{name} is not unitary (‖U†U−I‖ = {defect:.3e})"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub enum ChannelSpec {
    Kraus(Vec<ComplexMatrix>),
    Dilation(Dilation),
}

impl ChannelSpec {
    /// Checks Σ K†K = I.
    pub fn kraus(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let n = ops
            .first()
            .map(ComplexMatrix::cols)
            .ok_or_else(|| Error::OutOfRange("empty Kraus list".into()))?;
        let mut acc = ComplexMatrix::zeros(n, n);
        for k in &ops {
            if k.cols() != n || k.rows() != n {
                return Err(Error::ShapeMismatch {
                    left: (n, n),
                    right: k.shape(),
                });
            }
            acc = &acc + &(&k.dagger() * k);
        }
        let defect = (&acc - &ComplexMatrix::identity(n)).hs_norm();
        if defect > COMPLETENESS_TOL {
            return Err(Error::OutOfRange(format!(
                "Kraus operators are not complete (‖ΣK†K−I‖ = {defect:.3e})"
            )));
        }
        Ok(ChannelSpec::Kraus(ops))
    }

    pub fn dilation(env: DensityMatrix, u_ac: ComplexMatrix, u_bd: ComplexMatrix) -> Result<Self> {
        Dilation::new(env, u_ac, u_bd).map(ChannelSpec::Dilation)
    }

    /// Φ(x) for any square operator x on the system.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self {
            ChannelSpec::Kraus(ops) => {
                let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
                for k in ops {
                    if k.cols() != x.rows() {
                        return Err(Error::ShapeMismatch {
                            left: k.shape(),
                            right: x.shape(),
                        });
                    }
                    out = &out + &x.conjugate_by(k);
                }
                Ok(out)
            }
            ChannelSpec::Dilation(d) => dilate_operator(x, d),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(rho.matrix())?.hermitian_part();
        DensityMatrix::validate(out, rho.dims())
    }

    /// Σ K K†, i.e. Φ(I).
    pub fn image_of_identity(&self, n: usize) -> Result<ComplexMatrix> {
        self.apply_operator(&ComplexMatrix::identity(n))
    }

    pub fn kraus_ops(&self) -> Result<Vec<ComplexMatrix>> {
        match self {
            ChannelSpec::Kraus(ops) => Ok(ops.clone()),
            ChannelSpec::Dilation(_) => match kraus_from_dilation(self)? {
                ChannelSpec::Kraus(ops) => Ok(ops),
                ChannelSpec::Dilation(_) => unreachable!(),
            },
        }
    }
}

fn dilate_operator(x: &ComplexMatrix, d: &Dilation) -> Result<ComplexMatrix> {
    let [da, db] = d.system_dims();
    if x.rows() != da * db || !x.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {} on a {da}x{db} system",
            x.rows()
        )));
    }
    let (dc, dd) = (d.env.dims()[0], d.env.dims()[1]);
    let u = d.total_unitary();
    let joint = linalg::kron(x, d.env.matrix()).conjugate_by(&u);
    linalg::partial_trace(&joint, &[da, db, dc, dd], &[0, 1])
}

/// Applies the dilated channel to a bipartite state.
pub fn apply_dilation(rho_ab: &DensityMatrix, spec: &ChannelSpec) -> Result<DensityMatrix> {
    let ChannelSpec::Dilation(d) = spec else {
        return Err(Error::OutOfRange(
            "apply_dilation needs a dilation spec".into(),
        ));
    };
    if rho_ab.dims() != d.system_dims() {
        return Err(Error::DimensionMismatch(format!(
            "state dims {:?} but the dilation acts on {:?}",
            rho_ab.dims(),
            d.system_dims()
        )));
    }
    let out = dilate_operator(rho_ab.matrix(), d)?.hermitian_part();
    DensityMatrix::validate(out, rho_ab.dims())
}

/// K_{(i,m)} = √p_m (I⊗⟨i|) U (I⊗|ψ_m⟩) over the environment's spectral
/// decomposition σ_env = Σ p_m |ψ_m⟩⟨ψ_m|. Zero operators are dropped.
pub fn kraus_from_dilation(spec: &ChannelSpec) -> Result<ChannelSpec> {
    let d = match spec {
        ChannelSpec::Kraus(_) => return Ok(spec.clone()),
        ChannelSpec::Dilation(d) => d,
    };
    let [da, db] = d.system_dims();
    let ds = da * db;
    let de = d.env.dim();
    let u = d.total_unitary();
    let env_eig = linalg::herm_eig(d.env.matrix())?;
    let mut ops = Vec::new();
    for (m, &p) in env_eig.values.iter().enumerate() {
        if p <= 1e-13 {
            continue;
        }
        let psi = env_eig.vector(m);
        let weight = p.sqrt();
        for i in 0..de {
            let mut k = ComplexMatrix::zeros(ds, ds);
            for s_out in 0..ds {
                for s_in in 0..ds {
                    let mut acc = C64::new(0.0, 0.0);
                    for (e, amp) in psi.iter().enumerate() {
                        acc += u[(s_out * de + i, s_in * de + e)] * amp;
                    }
                    k[(s_out, s_in)] = acc * weight;
                }
            }
            if k.hs_norm_sq() > 1e-24 {
                ops.push(k);
            }
        }
    }
    ChannelSpec::kraus(ops)
}

/// Φ(ρ) = Σ p_i U_i ρ U_i†
pub fn mixture_of_unitaries(probs: &[f64], unitaries: &[ComplexMatrix]) -> Result<ChannelSpec> {
    if probs.len() != unitaries.len() {
        return Err(Error::LengthMismatch {
            expected: unitaries.len(),
            got: probs.len(),
        });
    }
    if probs.iter().any(|&p| p < 0.0) {
        return Err(Error::OutOfRange("negative probability".into()));
    }
    ChannelSpec::kraus(
        unitaries
            .iter()
            .zip(probs)
            .map(|(u, &p)| u.scale_re(p.sqrt()))
            .collect(),
    )
}

/// Random unital channel: a mixture of `k` local unitaries U_0⊗U_1⊗… (one
/// per subsystem in `dims`) with random weights. Each local unitary is
/// exp(iΣ a_j Λ_j) with standard Gaussian coefficients.
pub fn random_unital_channel(dims: &[usize], k: usize, seed: u64) -> Result<ChannelSpec> {
    if k == 0 {
        return Err(Error::OutOfRange("need at least one unitary".into()));
    }
    let mut rng = Rng64::new(seed, 0);
    random_unital_channel_from(dims, k, &mut rng)
}

pub fn random_unital_channel_from(
    dims: &[usize],
    k: usize,
    rng: &mut Rng64,
) -> Result<ChannelSpec> {
    let bases = dims
        .iter()
        .map(|&d| GellMannBasis::new(d))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = (0..k).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut unitaries = Vec::with_capacity(k);
    for _ in 0..k {
        let mut u = ComplexMatrix::identity(1);
        for basis in &bases {
            let a: Vec<f64> = (0..basis.len()).map(|_| rng.gaussian()).collect();
            u = linalg::kron(&u, &unitary_from_params(&a, basis)?);
        }
        unitaries.push(u);
    }
    mixture_of_unitaries(&probs, &unitaries)
}
