//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Pass criterion numbers as arguments to run a subset,
//! e.g. `cargo test --test acceptance -- 1 2 3`.

use std::time::Instant;

use csskit::channel::{
    locc_search, majorization_check, random_unital_channel_from, transition_matrix,
    unitary_from_params, ChannelSpec, GellMannBasis, LoccSearchConfig,
};
use csskit::css::{case_formula, closest_separable, CaseId};
use csskit::gilbert::{commutator_decay_ratio, gilbert_css, DEFAULT_RESTARTS, DEFAULT_WINDOW};
use csskit::linalg::{self, ComplexMatrix, C64};
use csskit::metrics::{build_witness, eval_witness, spectrum_report};
use csskit::rng::Rng64;
use csskit::states::{named_state, random_cut_product_pure_from, random_state_from};
use csskit::{Bipartition, DensityMatrix, Error, NamedState};

const TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn first_cut(n: usize) -> Bipartition {
    Bipartition::first_vs_rest(n).unwrap()
}

fn pt_spectrum(rho: &DensityMatrix) -> Vec<f64> {
    linalg::eigvalsh(&rho.partial_transpose(&first_cut(rho.dims().len())).unwrap()).unwrap()
}

fn is_entangled(rho: &DensityMatrix) -> bool {
    pt_spectrum(rho).last().copied().unwrap_or(0.0) < -1e-9
}

type Criterion<'a> = (usize, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn random_entangled(dims: &[usize], rng: &mut Rng64) -> DensityMatrix {
    loop {
        let s = random_state_from(dims, rng);
        if is_entangled(&s) {
            return s;
        }
    }
}

/// The solver's distance, also when its candidate was rejected as invalid.
/// The flag is true for the rejected case.
fn algorithm_distance(rho: &DensityMatrix) -> (f64, bool) {
    match closest_separable(rho, &first_cut(rho.dims().len()), TOL) {
        Ok(r) => (r.distance_sq, false),
        Err(Error::InvalidCss { distance_sq, .. }) => (distance_sq, true),
        Err(e) => panic!("solver failed: {e}"),
    }
}

fn matrix_from_real(n: usize, entries: &[(usize, usize, f64)]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for &(r, c, v) in entries {
        m[(r, c)] = C64::new(v, 0.0);
    }
    m
}

fn golden(
    name: NamedState,
    expected: &ComplexMatrix,
    distance: f64,
    dist_tol: f64,
) -> (bool, String, DensityMatrix) {
    let rho = named_state(&name).unwrap();
    let res = closest_separable(&rho, &first_cut(rho.dims().len()), TOL).unwrap();
    let diff = res.css.matrix().max_abs_diff(expected);
    let dgap = (res.distance_sq - distance).abs();
    let ok = diff <= 1e-10 && dgap <= dist_tol;
    (
        ok,
        format!(
            "max entry error {diff:.1e}, distance_sq {:.15} (error {dgap:.1e})",
            res.distance_sq
        ),
        res.css,
    )
}

fn c1_bell() -> Outcome {
    let werner = named_state(&NamedState::Werner(1.0 / 3.0)).unwrap();
    let (ok, detail, _) = golden(NamedState::Bell, werner.matrix(), 1.0 / 3.0, 1e-10);
    outcome(ok, detail)
}

fn c2_ghz() -> Outcome {
    let (a, b) = (1.0 / 3.0, 1.0 / 6.0);
    let expected = matrix_from_real(
        8,
        &[
            (0, 0, a),
            (7, 7, a),
            (0, 7, b),
            (7, 0, b),
            (3, 3, b),
            (4, 4, b),
        ],
    );
    let (ok, detail, _) = golden(NamedState::Ghz, &expected, 1.0 / 3.0, 1e-10);
    outcome(ok, detail)
}

fn c3_w() -> Outcome {
    let r2 = 2f64.sqrt();
    let (p, q, s, t, u) = (
        (6.0 - r2) / 18.0,
        1.0 / 9.0,
        (3.0 - r2) / 9.0,
        r2 / 18.0,
        r2 / 9.0,
    );
    let expected = matrix_from_real(
        8,
        &[
            (0, 0, u),
            (1, 1, p),
            (1, 2, p),
            (2, 1, p),
            (2, 2, p),
            (1, 4, q),
            (2, 4, q),
            (4, 1, q),
            (4, 2, q),
            (4, 4, s),
            (5, 5, t),
            (5, 6, t),
            (6, 5, t),
            (6, 6, t),
        ],
    );
    let (ok, detail, css) = golden(NamedState::W, &expected, 8.0 / 27.0, 1e-9);
    let spec = pt_spectrum(&css);
    let want = [
        (6.0 - r2) / 9.0,
        2.0 * r2 / 9.0,
        (3.0 - r2) / 9.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ];
    let spec_err = spec
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        ok && spec_err <= 1e-10,
        format!("{detail}, CSS PT-spectrum error {spec_err:.1e}"),
    )
}

/// Entangled 2×2 and 2×3 samples with a closed-form case, 10³ of each,
/// plus everything drawn along the way (for the lower-bound check).
struct Corpus {
    with_case: Vec<(DensityMatrix, CaseId, f64)>,
    all: Vec<DensityMatrix>,
    other_skipped: usize,
}

fn corpus() -> Corpus {
    let mut rng = Rng64::new(4, 0);
    let mut c = Corpus {
        with_case: Vec::new(),
        all: Vec::new(),
        other_skipped: 0,
    };
    for dims in [[2usize, 2], [2, 3]] {
        let mut taken = 0;
        while taken < 1000 {
            let s = random_state_from(&dims, &mut rng);
            c.all.push(s.clone());
            if !is_entangled(&s) {
                continue;
            }
            let f = case_formula(&pt_spectrum(&s), (dims[0], dims[1]));
            match f.distance_sq {
                Some(d) if f.case_id != CaseId::Other => {
                    c.with_case.push((s, f.case_id, d));
                    taken += 1;
                }
                _ => c.other_skipped += 1,
            }
        }
    }
    c
}

fn c4_formula(c: &Corpus) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut invalid = 0;
    for (s, _, formula) in &c.with_case {
        let (d, rejected) = algorithm_distance(s);
        invalid += usize::from(rejected);
        worst = worst.max((d - formula).abs());
    }
    outcome(
        worst <= 1e-9,
        format!(
            "{} states, max |D² − formula| {worst:.1e}; {} 'other' skipped; {invalid} candidates rejected as invalid (distance compared anyway)",
            c.with_case.len(),
            c.other_skipped
        ),
    )
}

fn c5_lower_bound(c: &Corpus) -> Outcome {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_case_a_gap: f64 = 0.0;
    let mut case_a = 0;
    for s in &c.all {
        let cut = first_cut(2);
        let rep = spectrum_report(s, &cut).unwrap();
        let (d, _) = algorithm_distance(s);
        worst_excess = worst_excess.max(rep.lower_bound() - d);
        let f = case_formula(&rep.spectrum, (s.dims()[0], s.dims()[1]));
        if f.case_id.is_case_a() {
            case_a += 1;
            worst_case_a_gap = worst_case_a_gap.max((rep.lower_bound() - d).abs());
        }
    }
    outcome(
        worst_excess <= 1e-9 && worst_case_a_gap <= 1e-9,
        format!(
            "{} states, max (bound − D²) {worst_excess:.1e}; {case_a} case-A states, max |bound − D²| {worst_case_a_gap:.1e}",
            c.all.len()
        ),
    )
}

fn c6_witness() -> Outcome {
    let mut rng = Rng64::new(6, 0);
    let mut probe_rng = Rng64::new(6, 1);
    let cut = first_cut(2);
    let (mut worst_rho, mut worst_css, mut worst_probe) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut failures = Vec::new();
    for i in 0..100 {
        let s = random_entangled(&[2, 2], &mut rng);
        let res = match closest_separable(&s, &cut, TOL) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("state {i}: {e}"));
                continue;
            }
        };
        let w = build_witness(&s, &res.css).unwrap();
        worst_rho = worst_rho.max((eval_witness(&w, &s).unwrap() + res.distance_sq.sqrt()).abs());
        worst_css = worst_css.max(eval_witness(&w, &res.css).unwrap().abs());
        for _ in 0..10_000 {
            let p = random_cut_product_pure_from(&[2, 2], &cut, &mut probe_rng).unwrap();
            worst_probe = worst_probe.min(eval_witness(&w, &p).unwrap());
        }
    }
    let ok = failures.is_empty() && worst_rho <= 1e-8 && worst_css <= 1e-8 && worst_probe >= -1e-9;
    let mut detail = format!(
        "max |Tr(Wρ) + D| {worst_rho:.1e}, max |Tr(Wσ_css)| {worst_css:.1e}, min Tr(Wπ) over 10⁶ product probes {worst_probe:.2e}"
    );
    if !failures.is_empty() {
        detail += &format!("; solver failures: {}", failures.join("; "));
    }
    outcome(ok, detail)
}

fn c7_gilbert() -> Outcome {
    let mut rng = Rng64::new(7, 0);
    let mut states = vec![named_state(&NamedState::Bell).unwrap()];
    states.extend((0..10).map(|_| random_entangled(&[2, 2], &mut rng)));
    let cut = first_cut(2);
    let (mut worst_rel, mut worst_below) = (0.0f64, 0.0f64);
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, s) in states.iter().enumerate() {
        let exact = match closest_separable(s, &cut, TOL) {
            Ok(r) => r.distance_sq,
            Err(e) => {
                ok = false;
                lines.push(format!("state {i}: {e}"));
                continue;
            }
        };
        let ub = gilbert_css(s, &cut, 5000, DEFAULT_RESTARTS, 70 + i as u64)
            .unwrap()
            .final_upper_bound();
        let rel = (ub - exact) / exact;
        worst_rel = worst_rel.max(rel);
        worst_below = worst_below.max(exact - ub);
        if rel > 0.02 || exact - ub > 1e-9 {
            ok = false;
            lines.push(format!("state {i}: exact {exact:.6e}, bound {ub:.6e}"));
        }
    }
    let mut detail = format!(
        "{} states, worst relative gap {:.3}%, worst undershoot {worst_below:.1e}",
        states.len(),
        worst_rel * 100.0
    );
    if !lines.is_empty() {
        detail += &format!(" [{}]", lines.join("; "));
    }
    outcome(ok, detail)
}

fn c8_commutator() -> Outcome {
    let mut rng = Rng64::new(8, 0);
    let cut = first_cut(2);
    let ratios: Vec<f64> = (0..10)
        .map(|i| {
            let s = random_entangled(&[2, 2], &mut rng);
            let tr = gilbert_css(&s, &cut, 2000, DEFAULT_RESTARTS, 80 + i).unwrap();
            commutator_decay_ratio(&tr, DEFAULT_WINDOW, 50, 2000)
        })
        .collect();
    let good = ratios.iter().filter(|r| **r < 0.1).count();
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(
        good >= 8,
        format!(
            "{good}/10 states decay below 10% (ratios {})",
            shown.join(", ")
        ),
    )
}

fn c9_unital() -> Outcome {
    let mut rng = Rng64::new(9, 0);
    let cut = first_cut(2);
    let mut worst: f64 = f64::NEG_INFINITY;
    let (mut violations, mut not_majorized, mut invalid) = (0, 0, 0);
    for _ in 0..1000 {
        let s = random_entangled(&[2, 2], &mut rng);
        let k = 1 + rng.below(4);
        let ch = random_unital_channel_from(&[2, 2], k, &mut rng).unwrap();
        let out = ch.apply(&s).unwrap();
        let (d_in, r_in) = algorithm_distance(&s);
        let (d_out, r_out) = algorithm_distance(&out);
        invalid += usize::from(r_in) + usize::from(r_out);
        worst = worst.max(d_out - d_in);
        if d_out > d_in + 1e-8 {
            violations += 1;
        }
        let sig = linalg::eigvalsh(&out.partial_transpose(&cut).unwrap()).unwrap();
        let lam = linalg::eigvalsh(&s.partial_transpose(&cut).unwrap()).unwrap();
        if !majorization_check(&sig, &lam).unwrap().majorized {
            not_majorized += 1;
        }
    }
    outcome(
        violations == 0 && not_majorized == 0,
        format!(
            "1000 pairs, max D²(Φρ) − D²(ρ) {worst:.2e}, {violations} increases, {not_majorized} majorization failures, {invalid} rejected candidates"
        ),
    )
}

fn random_dilation(rng: &mut Rng64) -> ChannelSpec {
    let b = GellMannBasis::new(4).unwrap();
    let env = random_state_from(&[2, 2], rng);
    let a: Vec<f64> = (0..16).map(|_| rng.gaussian()).collect();
    let c: Vec<f64> = (0..16).map(|_| rng.gaussian()).collect();
    ChannelSpec::dilation(
        env,
        unitary_from_params(&a, &b).unwrap(),
        unitary_from_params(&c, &b).unwrap(),
    )
    .unwrap()
}

fn c10_transition() -> Outcome {
    let mut rng = Rng64::new(10, 0);
    let cut = first_cut(2);
    let (mut col, mut row_unital, mut row_phi, mut spectral) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut checked, mut degenerate, mut row_range_bad) = (0, 0, 0);
    while checked < 100 {
        let unital = (checked + degenerate) % 2 == 0;
        let ch = if unital {
            let k = 1 + rng.below(4);
            random_unital_channel_from(&[2, 2], k, &mut rng).unwrap()
        } else {
            random_dilation(&mut rng)
        };
        let x = random_state_from(&[2, 2], &mut rng)
            .partial_transpose(&cut)
            .unwrap();
        let t = transition_matrix(&x, &ch).unwrap();
        for s in t.column_sums() {
            col = col.max((s - 1.0).abs());
        }
        for (s, phi) in t.row_sums().iter().zip(&t.phi_identity_diag) {
            row_phi = row_phi.max((s - phi).abs());
            if unital {
                row_unital = row_unital.max((s - 1.0).abs());
            }
            if !(-1e-9..=1.0 + 1e-9).contains(s) && !unital {
                // ⟨f|Φ(I)|f⟩ can exceed 1 for non-unital maps; counted for information only
                row_range_bad += 1;
            }
        }
        if t.degenerate {
            degenerate += 1;
            continue;
        }
        spectral = spectral.max(t.spectral_residual());
        checked += 1;
    }
    outcome(
        col <= 1e-9 && row_unital <= 1e-9 && row_phi <= 1e-9 && spectral <= 1e-8,
        format!(
            "max |colsum − 1| {col:.1e}, unital max |rowsum − 1| {row_unital:.1e}, max |rowsum − ⟨f|Φ(I)|f⟩| {row_phi:.1e}, \
             max spectral residual {spectral:.1e} over 100 cases ({degenerate} degenerate skipped, {row_range_bad} non-unital row sums outside [0,1])"
        ),
    )
}

fn c11_search() -> Outcome {
    let mut rng = Rng64::new(11, 0);
    let env = named_state(&NamedState::Werner(1.0 / 3.0)).unwrap();
    let mut states = vec![named_state(&NamedState::Bell).unwrap()];
    states.extend((0..20).map(|_| random_entangled(&[2, 2], &mut rng)));
    let cfg = LoccSearchConfig::default();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let report = locc_search(s, &env, &cfg, 1100 + i as u64).unwrap();
        worst_gap = worst_gap.max(report.gap);
        if report.violation {
            violations.push(format!(
                "state {i} {}: {}",
                csskit::io::state_to_json(s),
                serde_json::to_string(&report).unwrap()
            ));
        }
    }
    let mut detail = format!(
        "{} states × {} restarts × {} evals, env werner(1/3), max (best − baseline) {worst_gap:.2e}",
        states.len(),
        cfg.restarts,
        cfg.evals
    );
    for v in &violations {
        detail += &format!("\n    VIOLATION {v}");
    }
    outcome(violations.is_empty(), detail)
}

fn c12_validity() -> Outcome {
    let cut = first_cut(2);
    let mut rng = Rng64::new(12, 0);
    let mut invalid = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..100_000 {
        let s = random_state_from(&[2, 2], &mut rng);
        if let Err(e) = closest_separable(&s, &cut, TOL) {
            match e {
                Error::InvalidCss { min_eigenvalue, .. } => {
                    worst = worst.min(min_eigenvalue);
                    invalid.push(i);
                }
                other => panic!("sample {i}: unexpected error {other}"),
            }
        }
    }
    let shown: Vec<String> = invalid.iter().take(5).map(ToString::to_string).collect();
    outcome(
        invalid.is_empty(),
        format!(
            "{} of 100000 random 2x2 states gave InvalidCss (most negative eigenvalue {worst:.2e}; first samples {})",
            invalid.len(),
            shown.join(", ")
        ),
    )
}

fn main() {
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let want = |n: usize| selected.is_empty() || selected.contains(&n);

    let needs_corpus = want(4) || want(5);
    let corpus = needs_corpus.then(corpus);
    let criteria: Vec<Criterion<'_>> = vec![
        (1, "Bell golden CSS", Box::new(c1_bell)),
        (2, "GHZ golden CSS (A|BC)", Box::new(c2_ghz)),
        (3, "W golden CSS (A|BC)", Box::new(c3_w)),
        (
            4,
            "case formulas match the algorithm",
            Box::new(|| c4_formula(corpus.as_ref().unwrap())),
        ),
        (
            5,
            "lower bound sound, tight in case A",
            Box::new(|| c5_lower_bound(corpus.as_ref().unwrap())),
        ),
        (6, "optimal witness", Box::new(c6_witness)),
        (7, "Gilbert upper bound within 2%", Box::new(c7_gilbert)),
        (8, "commutator decay", Box::new(c8_commutator)),
        (
            9,
            "unital monotonicity and majorization",
            Box::new(c9_unital),
        ),
        (10, "transition-matrix contracts", Box::new(c10_transition)),
        (
            11,
            "dilated-channel search finds no increase",
            Box::new(c11_search),
        ),
        (12, "validity census", Box::new(c12_validity)),
    ];

    let mut failed = Vec::new();
    for (n, name, run) in &criteria {
        if !want(*n) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} [{n:>2}] {name}: {} ({secs:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(*n);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} criteria failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
