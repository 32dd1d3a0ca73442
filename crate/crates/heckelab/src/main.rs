use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use heckelab::chebst;
use heckelab::error::Error;
use heckelab::forms::{self, cache, FormSpec};
use heckelab::lab::{self, config as labconfig, experiments, selftest, FamilyConfig};
use heckelab::signs;
use heckelab::specfun::{beta, dickman, StepFunction};

#[derive(Parser)]
#[command(
    name = "heckelab",
    version,
    about = "Hecke eigenvalue sign analytics: coefficient tables, sign scans, special functions, and desk-scale experiments",
    long_about = "Coefficient tables for a small menu of modular forms (labels: delta, wt16, wt20, e4, ec_<a4>_<a6>), sign-change analytics, the Dickman/kappa and beta special-function solvers, a Chebyshev/Sato-Tate polynomial suite, and reproducible experiments over curve families.\n\nConfig files are flat `key = value` text; keys mirror the long flag names with dashes replaced by underscores (e.g. `p_max = 10000`). Command-line flags win over config values. Exit codes: 0 success, 1 invariant violation or runtime failure, 2 usage error."
)]
struct Cli {
    /// flat key = value defaults for the flags below
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// directory for the per-form coefficient cache
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// output path (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// worker threads for family experiments (0 = rayon default)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// seed for sampled verification points
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build a coefficient table and emit it in the cache schema
    Coeffs(CoeffsArgs),
    /// Sign analytics for a pair of forms
    Signs(SignsArgs),
    /// Solve rho(2 kappa) = 2 log kappa and report the bounds
    Kappa(KappaArgs),
    /// Solve the delay integral equation and locate the first zero
    Beta(BetaArgs),
    /// Chebyshev / Sato-Tate / minorant verification reports
    Cheb(ChebArgs),
    /// Family experiments (first-negative, prescribed-signs, pair-signs, moment-sums, mod2)
    Exp(ExpArgs),
    /// Run the pinned fixture suite
    Selftest,
}

#[derive(Args)]
struct CoeffsArgs {
    /// form label: delta | wt16 | wt20 | e4 | ec_<a4>_<a6>
    #[arg(long)]
    form: String,
    #[arg(long)]
    p_max: Option<u64>,
    #[arg(long)]
    n_max: Option<u64>,
}

#[derive(Args)]
struct SignsArgs {
    #[arg(long)]
    f1: String,
    #[arg(long)]
    f2: String,
    /// prime range for agreement scans
    #[arg(long)]
    x: Option<u64>,
    /// integer range for first-negative / first-difference scans
    #[arg(long)]
    n_max: Option<u64>,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct BetaArgs {
    /// kernel staircase cap M
    #[arg(long)]
    cap: Option<u32>,
    /// grid step as 1/denom
    #[arg(long)]
    step_denom: Option<u64>,
    #[arg(long)]
    u_max: Option<f64>,
}

#[derive(Args)]
struct ChebArgs {
    /// degrees for the averaged Fejer polynomial checks
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<u64>>,
    /// tuple dimension for the product minorant sampling
    #[arg(long)]
    omega: Option<usize>,
    /// sampled tuples
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct ExpArgs {
    /// first-negative | prescribed-signs | pair-signs | moment-sums | mod2
    name: String,
    #[arg(long)]
    a4_bound: Option<i64>,
    #[arg(long)]
    a6_bound: Option<i64>,
    /// enumerate full-2-torsion triples in [-bound, bound] instead of a box
    #[arg(long)]
    torsion_bound: Option<i64>,
    /// keep only the first k family members
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    p_max: Option<u64>,
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    x: Option<u64>,
    #[arg(long)]
    z: Option<u64>,
    /// comma-separated signs (+ or -) for the primes up to z
    #[arg(long)]
    eps: Option<String>,
    /// comma-separated form labels for pair experiments
    #[arg(long)]
    forms: Option<String>,
    #[arg(long)]
    p_lo: Option<u64>,
    #[arg(long)]
    nu: Option<u32>,
    #[arg(long)]
    j: Option<u32>,
    #[arg(long)]
    b_const: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => match std::fs::read_to_string(path).map_err(Error::from).and_then(|t| labconfig::parse_config(&t)) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => BTreeMap::new(),
    };
    let started = Instant::now();
    let result = if cli.threads > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
            Ok(pool) => pool.install(|| run(&cli, &cfg)),
            Err(e) => Err(Error::InvalidInput(format!("thread pool: {e}"))),
        }
    } else {
        run(&cli, &cfg)
    };
    eprintln!("wall clock: {} ms", started.elapsed().as_millis());
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidInput(_) | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn emit(cli: &Cli, body: &str) -> heckelab::Result<()> {
    match &cli.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, body)?;
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn build_maybe_cached(
    cli: &Cli,
    spec: &FormSpec,
    p_max: u64,
    n_max: u64,
) -> heckelab::Result<forms::CoefficientTable> {
    match &cli.cache_dir {
        Some(dir) => cache::build_table_cached(dir, spec, p_max, n_max),
        None => forms::build_table(spec, p_max, n_max),
    }
}

fn pick_u64(flag: Option<u64>, cfg: &BTreeMap<String, String>, key: &str, default: u64) -> heckelab::Result<u64> {
    Ok(flag.or(labconfig::get_u64(cfg, key)?).unwrap_or(default))
}

fn pick_f64(flag: Option<f64>, cfg: &BTreeMap<String, String>, key: &str, default: f64) -> heckelab::Result<f64> {
    Ok(flag.or(labconfig::get_f64(cfg, key)?).unwrap_or(default))
}

fn pick_i64(flag: Option<i64>, cfg: &BTreeMap<String, String>, key: &str, default: i64) -> heckelab::Result<i64> {
    Ok(flag.or(labconfig::get_i64(cfg, key)?).unwrap_or(default))
}

fn run(cli: &Cli, cfg: &BTreeMap<String, String>) -> heckelab::Result<ExitCode> {
    match &cli.command {
        Command::Coeffs(a) => {
            let spec = FormSpec::parse(&a.form)?;
            let p_max = pick_u64(a.p_max, cfg, "p_max", 1000)?;
            let n_max = pick_u64(a.n_max, cfg, "n_max", 2)?;
            let table = build_maybe_cached(cli, &spec, p_max, n_max)?;
            let mut body = format!(
                "# schema=coeffs-v1, label={}, k={}, N={}\np,a_p\n",
                spec.label, spec.weight, spec.level
            );
            for (p, c) in table.prime_coeffs() {
                if c.reliable {
                    body.push_str(&format!("{},{}\n", p, c.value));
                }
            }
            emit(cli, &body)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Signs(a) => {
            let x = pick_u64(a.x, cfg, "x", 10_000)?;
            let n_max = pick_u64(a.n_max, cfg, "n_max", 10_000)?;
            let s1 = FormSpec::parse(&a.f1)?;
            let s2 = FormSpec::parse(&a.f2)?;
            let t1 = build_maybe_cached(cli, &s1, x, n_max)?;
            let t2 = build_maybe_cached(cli, &s2, x, n_max)?;
            let report = serde_json::json!({
                "f1": s1.label,
                "f2": s2.label,
                "x": x,
                "n_max": n_max,
                "first_negative_f1": signs::first_negative(&t1, n_max)?,
                "first_negative_f2": signs::first_negative(&t2, n_max)?,
                "agreement": signs::sign_agreement(&t1, &t2, x)?,
                "first_sign_difference": signs::first_sign_difference(&t1, &t2, n_max)?,
            });
            emit(cli, &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Kappa(a) => {
            let tol = pick_f64(a.tol, cfg, "tol", 1e-10)?;
            let k = dickman::solve_kappa(tol)?;
            let report = serde_json::json!({
                "kappa": k.kappa,
                "residual": k.residual,
                "grid_step": k.grid_step,
                "exceeds_10_9": k.kappa > 10.0 / 9.0,
                "exceeds_cube_root_e_half": k.kappa > (std::f64::consts::E / 2.0).powf(1.0 / 3.0),
                "exponent_1_over_2kappa": 1.0 / (2.0 * k.kappa),
            });
            emit(cli, &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Beta(a) => {
            let cap = a.cap.or(labconfig::get_u64(cfg, "cap")?.map(|v| v as u32)).unwrap_or(8);
            let denom = pick_u64(a.step_denom, cfg, "step_denom", 512)?;
            let u_max = pick_f64(a.u_max, cfg, "u_max", 3.0)?;
            let h = 1.0 / denom as f64;
            let zero = beta::beta_first_zero(cap, h, u_max)?;
            let alpha = StepFunction::remark_alpha(cap)?;
            let grid = beta::beta_volterra(&alpha, u_max, h)?;
            match cli.format {
                Format::Csv => emit(cli, &grid.to_csv())?,
                Format::Json => {
                    let report = serde_json::json!({
                        "first_zero": zero,
                        "residual_at_1": beta::volterra_residual(&alpha, &grid, 1.0),
                    });
                    emit(cli, &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Cheb(a) => {
            let degrees = a.degrees.clone().unwrap_or_else(|| vec![3, 5, 11, 101]);
            let omega = a.omega.unwrap_or(6);
            let samples = a.samples.unwrap_or(20_000);
            let y = chebst::poly_y::poly_y_suite()?;
            let gram = chebst::gram_matrix(20, 1 << 15);
            let mut gram_worst = 0.0f64;
            for (i, row) in gram.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    gram_worst = gram_worst.max((v - target).abs());
                }
            }
            let mut fejer_checks = Vec::new();
            for &l in &degrees {
                let closed = chebst::bmv::bmv_beta_l_st_integral(l)?;
                let poly = chebst::bmv::bmv_beta_l(l)?;
                let quad = chebst::st_integrate(|t| poly.eval(t / std::f64::consts::PI), 1 << 14);
                fejer_checks.push(serde_json::json!({
                    "degree": l,
                    "closed_form": closed,
                    "quadrature": quad,
                    "agree_1e10": (closed - quad).abs() < 1e-10,
                }));
            }
            let pair_degree = *degrees.iter().filter(|&&l| l % 2 == 1).max().unwrap_or(&11);
            let pair = chebst::bmv::MinorantPair::default_pair(pair_degree)?;
            let tuples = chebst::bmv::sample_tuples(omega, samples, cli.seed);
            let product = chebst::bmv::product_minorant_eval(&pair, &tuples);
            let report = serde_json::json!({
                "poly_y": y,
                "gram_worst_deviation": gram_worst,
                "fejer_integrals": fejer_checks,
                "minorant_contract": pair.report,
                "product_check": product,
            });
            emit(cli, &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Exp(a) => run_experiment(cli, cfg, a),
        Command::Selftest => {
            let checks = selftest::run();
            let mut all = true;
            let mut body = String::new();
            for c in &checks {
                all &= c.pass;
                body.push_str(&format!(
                    "{} {} {}\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                ));
            }
            emit(cli, &body)?;
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn parse_eps(raw: &str) -> heckelab::Result<Vec<i8>> {
    raw.split(',')
        .map(|s| match s.trim() {
            "+" | "+1" | "1" => Ok(1i8),
            "-" | "-1" => Ok(-1i8),
            other => Err(Error::Parse(format!("bad sign entry {other:?}"))),
        })
        .collect()
}

fn run_experiment(cli: &Cli, cfg: &BTreeMap<String, String>, a: &ExpArgs) -> heckelab::Result<ExitCode> {
    let family_cfg = FamilyConfig {
        a4_bound: pick_i64(a.a4_bound, cfg, "a4_bound", 20)?,
        a6_bound: pick_i64(a.a6_bound, cfg, "a6_bound", 20)?,
        two_torsion_bound: a.torsion_bound.or(labconfig::get_i64(cfg, "torsion_bound")?),
        p_max: pick_u64(a.p_max, cfg, "p_max", 1000)?,
        n_max: pick_u64(a.n_max, cfg, "n_max", 1000)?,
        seed: cli.seed,
        limit: a.count.or(labconfig::get_u64(cfg, "count")?.map(|v| v as usize)),
    };
    match a.name.as_str() {
        "first-negative" => {
            let family = lab::family_generate(&family_cfg)?;
            let r = experiments::exp_first_negative(&family, family_cfg.p_max, family_cfg.n_max)?;
            emit_report(cli, &r)
        }
        "prescribed-signs" => {
            let z = pick_u64(a.z, cfg, "z", 13)?;
            let n_primes = heckelab::sieve::primes_up_to(z).len();
            let eps = match (&a.eps, cfg.get("eps")) {
                (Some(raw), _) => parse_eps(raw)?,
                (None, Some(raw)) => parse_eps(raw)?,
                (None, None) => vec![1i8; n_primes],
            };
            let family = lab::family_generate(&family_cfg)?;
            let r = experiments::exp_prescribed_signs(&family, z, &eps)?;
            emit_report(cli, &r)
        }
        "pair-signs" => {
            let x = pick_u64(a.x, cfg, "x", 5000)?;
            let labels = a
                .forms
                .clone()
                .or_else(|| cfg.get("forms").cloned())
                .unwrap_or_else(|| "delta,wt16,e4,ec_1_0".to_string());
            let forms: Vec<FormSpec> = labels
                .split(',')
                .map(|s| FormSpec::parse(s.trim()))
                .collect::<heckelab::Result<_>>()?;
            let r = experiments::exp_pair_signs(&forms, x)?;
            emit_report(cli, &r)
        }
        "moment-sums" => {
            let family = lab::family_generate(&family_cfg)?;
            let p_lo = pick_u64(a.p_lo, cfg, "p_lo", 100)?;
            let nu = a.nu.or(labconfig::get_u64(cfg, "nu")?.map(|v| v as u32)).unwrap_or(1);
            let j = a.j.or(labconfig::get_u64(cfg, "j")?.map(|v| v as u32)).unwrap_or(1);
            let b_const = pick_f64(a.b_const, cfg, "b_const", 1.0)?;
            let r = experiments::exp_moment_sums(&family, p_lo, nu, j, b_const)?;
            emit_report(cli, &r)
        }
        "mod2" => {
            let mut tcfg = family_cfg;
            if tcfg.two_torsion_bound.is_none() {
                tcfg.two_torsion_bound = Some(4);
            }
            let family = lab::family_generate(&tcfg)?;
            let r = experiments::exp_mod2(&family, tcfg.p_max)?;
            emit_report(cli, &r)
        }
        other => Err(Error::InvalidInput(format!(
            "unknown experiment {other:?}; expected first-negative, prescribed-signs, pair-signs, moment-sums or mod2"
        ))),
    }
}

fn emit_report<C, R, A>(cli: &Cli, report: &lab::Report<C, R, A>) -> heckelab::Result<ExitCode>
where
    C: serde::Serialize,
    R: serde::Serialize + lab::CsvRecord,
    A: serde::Serialize,
{
    let body = match cli.format {
        Format::Json => report.to_json_string(),
        Format::Csv => report.to_csv_string(),
    };
    emit(cli, &body)?;
    Ok(ExitCode::SUCCESS)
}
