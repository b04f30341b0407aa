//! Density matrices, bipartitions, named states and random sampling.

use std::fmt;
use std::str::FromStr;

use crate::config::{HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
use crate::error::{Error, Result, Violation};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::rng::{gaussian_complex, haar_vector, Rng64};

/// A validated quantum state together with its tensor-factor dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Checks every density-matrix invariant and reports all that fail.
    pub fn validate(mat: ComplexMatrix, dims: &[usize]) -> Result<Self> {
        let violations = violations(&mat, dims);
        if violations.is_empty() {
            Ok(Self {
                mat,
                dims: dims.to_vec(),
            })
        } else {
            Err(Error::InvalidState(violations))
        }
    }

    pub(crate) fn from_parts_unchecked(mat: ComplexMatrix, dims: Vec<usize>) -> Self {
        Self { mat, dims }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// ρ^Γ with respect to `cut`: every subsystem on side B is transposed.
    pub fn partial_transpose(&self, cut: &Bipartition) -> Result<ComplexMatrix> {
        cut.check(self.dims.len())?;
        linalg::partial_transpose_many(&self.mat, &self.dims, cut.side_b())
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(&self.mat)
    }

    /// Reduced state on the listed subsystems.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = linalg::partial_trace(&self.mat, &self.dims, keep)?;
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        let dims: Vec<usize> = sorted.iter().map(|&k| self.dims[k]).collect();
        Ok(Self { mat: m, dims })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            mat: linalg::kron(&self.mat, &other.mat),
            dims,
        }
    }
}

/// Lists every violated invariant; empty for a valid state.
pub fn violations(mat: &ComplexMatrix, dims: &[usize]) -> Vec<Violation> {
    let mut out = Vec::new();
    if !mat.is_finite() {
        out.push(Violation::NonFinite);
        return out;
    }
    let product: usize = dims.iter().product();
    if !mat.is_square() || dims.is_empty() || dims.contains(&0) || product != mat.rows() {
        out.push(Violation::DimensionMismatch {
            dims: dims.to_vec(),
            size: mat.rows(),
        });
    }
    if !mat.is_square() {
        return out;
    }
    let defect = mat.hermitian_defect();
    if defect > HERMITIAN_TOL {
        out.push(Violation::NotHermitian { defect });
    }
    let trace = mat.trace();
    if (trace - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
        out.push(Violation::TraceNotOne { trace: trace.re });
    }
    match linalg::eigvalsh(&mat.hermitian_part()) {
        Ok(eigs) => {
            let min = eigs.last().copied().unwrap_or(0.0);
            if min < -PSD_TOL {
                out.push(Violation::NotPsd {
                    min_eigenvalue: min,
                });
            }
        }
        Err(_) => out.push(Violation::NotPsd {
            min_eigenvalue: f64::NAN,
        }),
    }
    out
}

/// Split of the subsystems into two nonempty complementary sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl Bipartition {
    /// `side_a` lists subsystems of side A; side B is the complement among
    /// `n_subsystems`.
    pub fn new(side_a: &[usize], n_subsystems: usize) -> Result<Self> {
        let mut a = side_a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.len() != side_a.len() {
            return Err(Error::InvalidCut(format!(
                "repeated subsystem in {side_a:?}"
            )));
        }
        if let Some(&bad) = a.iter().find(|&&k| k >= n_subsystems) {
            return Err(Error::InvalidCut(format!(
                "subsystem {bad} does not exist ({n_subsystems} subsystems)"
            )));
        }
        let b: Vec<usize> = (0..n_subsystems).filter(|k| !a.contains(k)).collect();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidCut(format!(
                "{side_a:?} leaves one side empty"
            )));
        }
        Ok(Self {
            side_a: a,
            side_b: b,
        })
    }

    /// Subsystem 0 against the rest.
    pub fn first_vs_rest(n_subsystems: usize) -> Result<Self> {
        Self::new(&[0], n_subsystems)
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    pub fn n_subsystems(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    /// Side A subsystems followed by side B subsystems.
    pub fn ordering(&self) -> Vec<usize> {
        self.side_a.iter().chain(&self.side_b).copied().collect()
    }

    /// (d_A, d_B) for the given subsystem dims.
    pub fn side_dims(&self, dims: &[usize]) -> (usize, usize) {
        let da = self.side_a.iter().map(|&k| dims[k]).product();
        let db = self.side_b.iter().map(|&k| dims[k]).product();
        (da, db)
    }

    /// The swapped bipartition, so the partial transpose lands on the other side.
    pub fn swapped(&self) -> Self {
        Self {
            side_a: self.side_b.clone(),
            side_b: self.side_a.clone(),
        }
    }

    pub(crate) fn check(&self, n_subsystems: usize) -> Result<()> {
        if self.n_subsystems() != n_subsystems {
            return Err(Error::InvalidCut(format!(
                "cut {:?}|{:?} does not cover {} subsystems",
                self.side_a, self.side_b, n_subsystems
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &[usize]| {
            s.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{{{}}}|{{{}}}", join(&self.side_a), join(&self.side_b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NamedState {
    Bell,
    Ghz,
    W,
    /// p·|Φ⁺⟩⟨Φ⁺| + (1−p)·I/4
    Werner(f64),
    MaxMixed(Vec<usize>),
}

impl FromStr for NamedState {
    type Err = Error;

    /// Accepts `bell`, `ghz`, `w`, `werner(p)` / `werner:p`, `max_mixed(2x3)` / `max_mixed:2x3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.find(['(', ':']) {
            Some(i) => (&s[..i], Some(s[i + 1..].trim_end_matches(')').trim())),
            None => (s.as_str(), None),
        };
        match (name, arg) {
            ("bell", None) => Ok(NamedState::Bell),
            ("ghz", None) => Ok(NamedState::Ghz),
            ("w", None) => Ok(NamedState::W),
            ("werner", Some(p)) => p
                .parse::<f64>()
                .map(NamedState::Werner)
                .map_err(|_| Error::Parse(format!("werner parameter `{p}` is not a number"))),
            ("max_mixed" | "maxmixed", Some(d)) => parse_dims(d).map(NamedState::MaxMixed),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// Parses `2x3`, `2,3` or `2 3` into a dimension list.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let dims: std::result::Result<Vec<usize>, _> = s
        .split(|c: char| c == 'x' || c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::parse::<usize>)
        .collect();
    match dims {
        Ok(d) if !d.is_empty() && !d.contains(&0) => Ok(d),
        _ => Err(Error::Parse(format!("cannot read dimensions from `{s}`"))),
    }
}

fn projector_from_amplitudes(amps: &[(usize, f64)], dim: usize) -> ComplexMatrix {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    for &(i, a) in amps {
        v[i] = C64::new(a, 0.0);
    }
    ComplexMatrix::outer(&v, &v)
}

pub fn named_state(name: &NamedState) -> Result<DensityMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let t = 1.0 / 3f64.sqrt();
    match name {
        NamedState::Bell => {
            DensityMatrix::validate(projector_from_amplitudes(&[(0, h), (3, h)], 4), &[2, 2])
        }
        NamedState::Ghz => {
            DensityMatrix::validate(projector_from_amplitudes(&[(0, h), (7, h)], 8), &[2, 2, 2])
        }
        // |001⟩ + |010⟩ + |100⟩
        NamedState::W => DensityMatrix::validate(
            projector_from_amplitudes(&[(1, t), (2, t), (4, t)], 8),
            &[2, 2, 2],
        ),
        NamedState::Werner(p) => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::OutOfRange(format!("werner p = {p} not in [0, 1]")));
            }
            let bell = projector_from_amplitudes(&[(0, h), (3, h)], 4);
            let m = &bell.scale_re(*p) + &ComplexMatrix::identity(4).scale_re((1.0 - p) / 4.0);
            DensityMatrix::validate(m, &[2, 2])
        }
        NamedState::MaxMixed(dims) => {
            let n: usize = dims.iter().product();
            if n == 0 {
                return Err(Error::OutOfRange("empty dimension list".into()));
            }
            DensityMatrix::validate(ComplexMatrix::identity(n).scale_re(1.0 / n as f64), dims)
        }
    }
}

/// Hilbert-Schmidt (Ginibre) random state ρ = GG†/Tr(GG†), drawn from `rng`.
pub fn random_state_from(dims: &[usize], rng: &mut Rng64) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = ComplexMatrix::from_vec(n, n, (0..n * n).map(|_| gaussian_complex(rng)).collect());
    let gg = &g * &g.dagger();
    let tr = gg.trace().re;
    let mut m = gg.scale_re(1.0 / tr);
    // exact Hermiticity; GG† is Hermitian up to rounding only
    m = m.hermitian_part();
    DensityMatrix::from_parts_unchecked(m, dims.to_vec())
}

/// Ginibre random state, deterministic in `seed`.
pub fn random_state(dims: &[usize], seed: u64) -> DensityMatrix {
    random_state_from(dims, &mut Rng64::new(seed, 0))
}

/// |a⟩⟨a|⊗|b⟩⟨b|⊗… with each factor an independent Haar-random pure state.
pub fn random_product_pure_from(dims: &[usize], rng: &mut Rng64) -> DensityMatrix {
    let mut v = vec![C64::new(1.0, 0.0)];
    for &d in dims {
        v = linalg::kron_vec(&v, &haar_vector(d, rng));
    }
    DensityMatrix::from_parts_unchecked(ComplexMatrix::outer(&v, &v), dims.to_vec())
}

/// |a⟩⟨a|⊗|b⟩⟨b| with `a` Haar-random on side A and `b` on side B of `cut`,
/// expressed in the original subsystem ordering.
pub fn random_cut_product_pure_from(
    dims: &[usize],
    cut: &Bipartition,
    rng: &mut Rng64,
) -> Result<DensityMatrix> {
    cut.check(dims.len())?;
    let (da, db) = cut.side_dims(dims);
    let a = haar_vector(da, rng);
    let b = haar_vector(db, rng);
    let v = cut_frame_to_original(&linalg::kron_vec(&a, &b), dims, cut);
    Ok(DensityMatrix::from_parts_unchecked(
        ComplexMatrix::outer(&v, &v),
        dims.to_vec(),
    ))
}

/// Reorders a vector written in the (side A, side B) subsystem ordering back
/// to the original ordering.
pub(crate) fn cut_frame_to_original(v: &[C64], dims: &[usize], cut: &Bipartition) -> Vec<C64> {
    let map = linalg::permutation_map(dims, &cut.ordering());
    map.iter().map(|&k| v[k]).collect()
}

pub fn random_product_pure(dims: &[usize], seed: u64) -> DensityMatrix {
    random_product_pure_from(dims, &mut Rng64::new(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigvalsh;

    #[test]
    fn validate_examples() {
        let mm = ComplexMatrix::identity(4).scale_re(0.25);
        assert!(DensityMatrix::validate(mm, &[2, 2]).is_ok());

        let err = DensityMatrix::validate(ComplexMatrix::identity(2), &[2]).unwrap_err();
        assert!(matches!(err.violations(), [Violation::TraceNotOne { .. }]));

        assert!(named_state(&NamedState::Bell).is_ok());
    }

    #[test]
    fn validate_lists_every_violation() {
        // trace 2, not PSD, wrong dims
        let m = ComplexMatrix::from_diag(&[3.0, -1.0]);
        let err = DensityMatrix::validate(m, &[3]).unwrap_err();
        let v = err.violations();
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::DimensionMismatch { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::TraceNotOne { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::NotPsd { .. })));

        let nh = ComplexMatrix::from_real(2, 2, &[0.5, 0.3, 0.0, 0.5]);
        let err = DensityMatrix::validate(nh, &[2]).unwrap_err();
        assert!(err
            .violations()
            .iter()
            .any(|x| matches!(x, Violation::NotHermitian { .. })));
    }

    #[test]
    fn named_state_matrices() {
        let bell = named_state(&NamedState::Bell).unwrap();
        let m = bell.matrix();
        for &(r, c) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((m[(r, c)].re - 0.5).abs() < 1e-15);
        }
        assert!((m.hs_norm_sq() - 1.0).abs() < 1e-14);

        let ghz = named_state(&NamedState::Ghz).unwrap();
        for &(r, c) in &[(0, 0), (0, 7), (7, 0), (7, 7)] {
            assert!((ghz.matrix()[(r, c)].re - 0.5).abs() < 1e-15);
        }
        assert_eq!(ghz.dims(), &[2, 2, 2]);

        let w = named_state(&NamedState::W).unwrap();
        for r in [1, 2, 4] {
            for c in [1, 2, 4] {
                assert!((w.matrix()[(r, c)].re - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        assert!((w.matrix().hs_norm_sq() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn named_state_parsing() {
        assert_eq!("bell".parse::<NamedState>().unwrap(), NamedState::Bell);
        assert_eq!(
            "werner(0.25)".parse::<NamedState>().unwrap(),
            NamedState::Werner(0.25)
        );
        assert_eq!(
            "werner:1".parse::<NamedState>().unwrap(),
            NamedState::Werner(1.0)
        );
        assert_eq!(
            "max_mixed(2x3)".parse::<NamedState>().unwrap(),
            NamedState::MaxMixed(vec![2, 3])
        );
        assert!(matches!(
            "singlet".parse::<NamedState>(),
            Err(Error::UnknownName(_))
        ));
        assert!(named_state(&NamedState::Werner(1.5)).is_err());
    }

    #[test]
    fn werner_is_mixture() {
        let p = 0.4;
        let w = named_state(&NamedState::Werner(p)).unwrap();
        let bell = named_state(&NamedState::Bell).unwrap();
        let expected =
            &bell.matrix().scale_re(p) + &ComplexMatrix::identity(4).scale_re((1.0 - p) / 4.0);
        assert!(w.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn random_state_is_deterministic_per_seed() {
        let a = random_state(&[2, 2], 7);
        let b = random_state(&[2, 2], 7);
        let c = random_state(&[2, 2], 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_states_validate_and_average_to_identity() {
        let mut rng = Rng64::new(1234, 0);
        let n = 10_000;
        let mut mean = ComplexMatrix::zeros(4, 4);
        for _ in 0..n {
            let s = random_state_from(&[2, 2], &mut rng);
            assert!(violations(s.matrix(), s.dims()).is_empty());
            mean = &mean + s.matrix();
        }
        let mean = mean.scale_re(1.0 / n as f64);
        assert!(mean.max_abs_diff(&ComplexMatrix::identity(4).scale_re(0.25)) < 0.02);
    }

    #[test]
    fn pt_spectrum_has_bounded_negative_count() {
        let mut rng = Rng64::new(99, 0);
        let cut = Bipartition::first_vs_rest(2).unwrap();
        for _ in 0..10_000 {
            let s = random_state_from(&[2, 2], &mut rng);
            let neg = eigvalsh(&s.partial_transpose(&cut).unwrap())
                .unwrap()
                .iter()
                .filter(|&&l| l < 0.0)
                .count();
            assert!(neg <= 1);
            let s = random_state_from(&[2, 3], &mut rng);
            let neg = eigvalsh(&s.partial_transpose(&cut).unwrap())
                .unwrap()
                .iter()
                .filter(|&&l| l < 0.0)
                .count();
            assert!(neg <= 2);
        }
    }

    #[test]
    fn random_product_pure_properties() {
        let q = random_product_pure(&[2], 3);
        assert!((q.purity() - 1.0).abs() < 1e-12);
        assert!(violations(q.matrix(), q.dims()).is_empty());

        let cut = Bipartition::first_vs_rest(2).unwrap();
        for seed in 0..50 {
            let p = random_product_pure(&[2, 2], seed);
            let eigs = eigvalsh(&p.partial_transpose(&cut).unwrap()).unwrap();
            assert!(eigs.iter().all(|&l| l > -1e-12));

            let p = random_product_pure(&[2, 3], seed);
            assert!((p.reduce(&[0]).unwrap().purity() - 1.0).abs() < 1e-12);
            assert!((p.reduce(&[1]).unwrap().purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bipartition_rules() {
        assert!(Bipartition::new(&[], 2).is_err());
        assert!(Bipartition::new(&[0, 1], 2).is_err());
        assert!(Bipartition::new(&[0, 0], 3).is_err());
        assert!(Bipartition::new(&[5], 3).is_err());
        let c = Bipartition::new(&[2, 0], 3).unwrap();
        assert_eq!(c.side_a(), &[0, 2]);
        assert_eq!(c.side_b(), &[1]);
        assert_eq!(c.side_dims(&[2, 3, 4]), (8, 3));
    }

    #[test]
    fn both_partial_transposes_share_a_spectrum() {
        let cut = Bipartition::first_vs_rest(2).unwrap();
        for seed in 0..20 {
            let s = random_state(&[2, 3], seed);
            let a = eigvalsh(&s.partial_transpose(&cut).unwrap()).unwrap();
            let b = eigvalsh(&s.partial_transpose(&cut.swapped()).unwrap()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
