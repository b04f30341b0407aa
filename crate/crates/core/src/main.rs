use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use csskit::channel::{locc_search, LoccSearchConfig};
use csskit::config::{Tolerances, TOL_ENV_VAR};
use csskit::css;
use csskit::gilbert::{self, DEFAULT_RESTARTS};
use csskit::io::{self, StateFile};
use csskit::metrics;
use csskit::rng::Rng64;
use csskit::states::{self, named_state};
use csskit::{Bipartition, CssLabel, DensityMatrix, Error, NamedState};

/// Closest separable states, negativity bounds, witnesses and channel probes.
#[derive(Parser)]
#[command(name = "csskit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closest separable (PPT) state, distance and iteration trace.
    Css {
        #[command(flatten)]
        common: Common,
        /// Random product-state probes used by the local-optimality check.
        #[arg(long, default_value_t = 100)]
        probes: usize,
    },
    /// Negativity, lower bound and D²_min.
    Metrics {
        #[command(flatten)]
        common: Common,
    },
    /// Optimal witness from the closest separable state.
    Witness {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        probes: usize,
    },
    /// Gilbert upper bound with a per-iteration CSV trace.
    Gilbert {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        /// CSV path for `iter,distance_sq_upper,commutator_hs`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Search local dilated channels for an increase of D²_min (two qubits).
    LoccSearch {
        #[command(flatten)]
        common: Common,
        /// Environment state by name.
        #[arg(
            long,
            default_value = "werner(0.3333333333333333)",
            conflicts_with = "env_file"
        )]
        env: String,
        /// Environment state from a JSON state file.
        #[arg(long)]
        env_file: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Objective evaluations per restart.
        #[arg(long, default_value_t = 2000)]
        evals: usize,
    },
    /// Write random (Hilbert-Schmidt ensemble) state files.
    Random {
        /// Subsystem dimensions, e.g. 2x3.
        #[arg(long, default_value = "2x2")]
        dims: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Args)]
struct Common {
    /// JSON state file.
    #[arg(long, short, conflicts_with = "demo")]
    input: Option<PathBuf>,
    /// Built-in state instead of a file: bell, ghz, w, werner(p), max_mixed(2x3).
    #[arg(long)]
    demo: Option<String>,
    /// Subsystem indices on side A of the cut (default: 0).
    #[arg(long, value_delimiter = ',')]
    cut: Option<Vec<usize>>,
    /// Termination threshold of the closest-state loop.
    #[arg(long, env = TOL_ENV_VAR)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Also write the main result (state or report) to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidCss { .. } => 2,
            Error::DegenerateInput { .. } => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<u8, Failure>;

impl Common {
    fn state(&self) -> Result<DensityMatrix, Failure> {
        match (&self.input, &self.demo) {
            (Some(path), _) => io::read_state(path).map_err(|e| Failure {
                code: 1,
                message: format!("{}: {e}", path.display()),
            }),
            (None, Some(name)) => Ok(named_state(&name.parse::<NamedState>()?)?),
            (None, None) => Err(Failure {
                code: 1,
                message: "no input: pass --input FILE or --demo NAME".into(),
            }),
        }
    }

    fn cut(&self, rho: &DensityMatrix) -> Result<Bipartition, Failure> {
        let side_a = self.cut.clone().unwrap_or_else(|| vec![0]);
        Ok(Bipartition::new(&side_a, rho.dims().len())?)
    }

    fn tol(&self) -> Result<f64, Failure> {
        let tol = self.tol.unwrap_or(Tolerances::default().css);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Failure {
                code: 1,
                message: format!("--tol must be positive, got {tol}"),
            });
        }
        Ok(tol)
    }

    fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> Result<(), Failure> {
        let body = serde_json::to_string_pretty(value).expect("report serializes");
        if self.json {
            println!("{body}");
        } else {
            print!("{}", text());
        }
        if let Some(path) = &self.out {
            fs::write(path, body + "\n")?;
        }
        Ok(())
    }
}

fn fmt_spectrum(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn cmd_css(c: &Common, probes: usize) -> CliResult {
    let rho = c.state()?;
    let cut = c.cut(&rho)?;
    let res = css::closest_separable(&rho, &cut, c.tol()?)?;
    let verify = css::verify_result_probes(&rho, &res, probes, c.seed)?;
    let report = json!({
        "cut": cut.side_a(),
        "label": res.label,
        "distance_sq": res.distance_sq,
        "iterations": res.iterations,
        "css": StateFile::from_state(&res.css),
        "verification": verify,
    });
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    if c.json {
        println!("{body}");
    } else {
        println!("cut: {cut}");
        println!("label: {}", res.label);
        println!("distance_sq: {:.15}", res.distance_sq);
        for (i, r) in res.iterations.iter().enumerate() {
            println!(
                "pass {i}: N = {:+.3e}, rank = {}, shift = {:+.3e}, spectrum [{}]",
                r.n_i,
                r.r_i,
                r.shift,
                fmt_spectrum(&r.spectrum_in)
            );
        }
        println!("case: {}", verify.case.case_id);
        println!(
            "verification: {}",
            if verify.passed() { "ok" } else { "FAILED" }
        );
        for f in &verify.failures {
            println!("  {f}");
        }
        println!("css:");
        for r in 0..res.css.dim() {
            let row: Vec<String> = res
                .css
                .matrix()
                .row(r)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            println!("  {}", row.join(" "));
        }
    }
    // --out gets a plain state file so it can be fed back in
    if let Some(path) = &c.out {
        io::write_state(path, &res.css)?;
    }
    Ok(0)
}

fn cmd_metrics(c: &Common) -> CliResult {
    let rho = c.state()?;
    let cut = c.cut(&rho)?;
    let rep = metrics::spectrum_report(&rho, &cut)?;
    let diag = metrics::lower_bound_diagnostics(&rho, &cut)?;
    let res = css::closest_separable(&rho, &cut, c.tol()?)?;
    let tight = (diag.lower_bound - res.distance_sq).abs() <= 1e-9;
    let report = json!({
        "cut": cut.side_a(),
        "pt_spectrum": rep.spectrum,
        "negativity": rep.neg_sum,
        "paper_negativity": 2.0 * rep.neg_sum,
        "lower_bound": diag.lower_bound,
        "lower_bound_trace_form": diag.trace_form,
        "rank_mismatch": diag.rank_mismatch,
        "min_hsd": res.distance_sq,
        "label": res.label,
        "tight": tight,
    });
    c.emit(&report, || {
        format!(
            "pt spectrum: [{}]\nnegativity: {:.12}\npaper_negativity: {:.12}\nlower_bound: {:.12}\nmin_hsd: {:.12}\ntight: {tight}\n",
            fmt_spectrum(&rep.spectrum),
            rep.neg_sum,
            2.0 * rep.neg_sum,
            diag.lower_bound,
            res.distance_sq
        )
    })?;
    Ok(0)
}

fn cmd_witness(c: &Common, probes: usize) -> CliResult {
    let rho = c.state()?;
    let cut = c.cut(&rho)?;
    let res = css::closest_separable(&rho, &cut, c.tol()?)?;
    let w = metrics::build_witness(&rho, &res.css)?;
    let on_rho = metrics::eval_witness(&w, &rho)?;
    let on_css = metrics::eval_witness(&w, &res.css)?;
    let mut rng = Rng64::new(c.seed, 0);
    let mut probe_min = f64::INFINITY;
    for _ in 0..probes {
        let p = states::random_cut_product_pure_from(rho.dims(), &cut, &mut rng)?;
        probe_min = probe_min.min(metrics::eval_witness(&w, &p)?);
    }
    let matrix: Vec<Vec<[f64; 2]>> = (0..w.matrix().rows())
        .map(|r| w.matrix().row(r).iter().map(|z| [z.re, z.im]).collect())
        .collect();
    let report = json!({
        "cut": cut.side_a(),
        "label": res.label,
        "witness": matrix,
        "tr_w_rho": on_rho,
        "tr_w_css": on_css,
        "distance": w.norm_check(),
        "probes": probes,
        "probe_min": if probes > 0 { Some(probe_min) } else { None },
    });
    c.emit(&report, || {
        let mut s = format!("Tr(W rho): {on_rho:.12}\nTr(W css): {on_css:.3e}\n");
        if probes > 0 {
            s += &format!("min Tr(W sigma) over {probes} product probes: {probe_min:.6e}\n");
        }
        s
    })?;
    Ok(0)
}

fn cmd_gilbert(c: &Common, iters: usize, restarts: usize, trace_path: Option<&Path>) -> CliResult {
    let rho = c.state()?;
    let cut = c.cut(&rho)?;
    let trace = gilbert::gilbert_css(&rho, &cut, iters, restarts, c.seed)?;
    if let Some(path) = trace_path {
        trace.write_csv(std::io::BufWriter::new(fs::File::create(path)?))?;
    }
    let upper = trace.final_upper_bound();
    let (da, db) = cut.side_dims(rho.dims());
    // the exact value is only the separable distance when PPT certifies it
    let exact = match CssLabel::for_side_dims(da, db) {
        CssLabel::SeparableCertified => css::min_hsd(&rho, &cut).ok(),
        CssLabel::PptOnly => None,
    };
    let report = json!({
        "cut": cut.side_a(),
        "iters": iters,
        "restarts": restarts,
        "seed": c.seed,
        "final_upper_bound": upper,
        "exact": exact,
        "gap": exact.map(|e| upper - e),
    });
    c.emit(&report, || {
        let mut s = format!("final upper bound: {upper:.12}\n");
        if let Some(e) = exact {
            s += &format!("exact: {e:.12}\ngap: {:.3e}\n", upper - e);
        }
        s
    })?;
    Ok(0)
}

fn cmd_locc_search(
    c: &Common,
    env: &str,
    env_file: Option<&Path>,
    restarts: usize,
    evals: usize,
) -> CliResult {
    let rho = c.state()?;
    let env = match env_file {
        Some(p) => io::read_state(p).map_err(|e| Failure {
            code: 1,
            message: format!("{}: {e}", p.display()),
        })?,
        None => named_state(&env.parse::<NamedState>()?)?,
    };
    let cfg = LoccSearchConfig {
        restarts,
        evals,
        jobs: c.jobs,
        ..Default::default()
    };
    let report = locc_search(&rho, &env, &cfg, c.seed)?;
    // always JSON: the report is the reproduction record
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{body}");
    if let Some(path) = &c.out {
        fs::write(path, body + "\n")?;
    }
    if report.violation {
        eprintln!(
            "VIOLATION: best value {:.15} exceeds baseline {:.15} by {:.3e}",
            report.best_value, report.baseline_min_hsd, report.gap
        );
        return Ok(4);
    }
    Ok(0)
}

fn cmd_random(dims: &str, count: usize, seed: u64, out: &Path, jobs: usize) -> CliResult {
    let dims = states::parse_dims(dims)?;
    if count == 0 {
        return Err(Failure {
            code: 1,
            message: "--count must be at least 1".into(),
        });
    }
    fs::create_dir_all(out)?;
    let width = (count - 1).to_string().len().max(3);
    let write = |i: usize| -> Result<(), Failure> {
        let mut rng = Rng64::new(seed, i as u64);
        let rho = states::random_state_from(&dims, &mut rng);
        io::write_state(&out.join(format!("state_{i:0width$}.json")), &rho)?;
        Ok(())
    };
    if jobs <= 1 {
        (0..count).try_for_each(write)?;
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })?;
        pool.install(|| (0..count).into_par_iter().try_for_each(write))?;
    }
    println!("wrote {count} states to {}", out.display());
    Ok(0)
}

fn main() -> ExitCode {
    // usage errors share exit code 1 with other input errors; 2 means InvalidCss
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match &cli.cmd {
        Command::Css { common, probes } => cmd_css(common, *probes),
        Command::Metrics { common } => cmd_metrics(common),
        Command::Witness { common, probes } => cmd_witness(common, *probes),
        Command::Gilbert {
            common,
            iters,
            restarts,
            trace,
        } => cmd_gilbert(common, *iters, *restarts, trace.as_deref()),
        Command::LoccSearch {
            common,
            env,
            env_file,
            restarts,
            evals,
        } => cmd_locc_search(common, env, env_file.as_deref(), *restarts, *evals),
        Command::Random {
            dims,
            count,
            seed,
            out,
            jobs,
        } => cmd_random(dims, *count, *seed, out, *jobs),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
