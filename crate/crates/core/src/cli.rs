//! Command-line front end.
//!
//! CSV floats are written with `{:?}`: the shortest text that reads back to
//! the same value, in exponent form when very small or large.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{emit, parse_grid, read_config, to_json, write_json, write_text, RunConfig};
use crate::ensemble::{resolve_threads, run_ensemble, EnsembleSpec, Observable};
use crate::error::{ErwsError, Result};
use crate::martingale::{lil_statistics, track};
use crate::moments::{moment_reports, ORACLE_MAX_N};
use crate::params::WalkParams;
use crate::rng::mix64;
use crate::simulator::{simulate_path, simulate_path_with_increments, CheckpointGrid, MAX_INCREMENT_HORIZON};
use crate::specfun::{
    coeff_a, coeff_b, hurwitz_zeta, log_gamma, ml_density, ml_mgf, ml_moment, stirling1u, v_limit, v_partial,
    SeriesControl,
};
use crate::verify::{
    verify_clt_critical, verify_clt_diffusive, verify_fluctuation_sr, verify_ml_limit, verify_superdiffusive,
    VerifyOptions, DEFAULT_SEED, REPORT_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "erws", version, about = "Elephant random walk with stops: simulation, exact moments, verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one path and print its checkpoints as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Append M, N, predvar, quadvar and lil_stat columns.
        #[arg(long)]
        martingale: bool,
    },
    /// Simulate replicates and print sample moments as JSON.
    Ensemble {
        #[command(flatten)]
        common: Common,
        /// Also write the per-replicate terminal values as CSV.
        #[arg(long, value_name = "PATH")]
        terminals_csv: Option<PathBuf>,
    },
    /// Print exact moments, with enumeration values for n <= 12.
    Exact {
        #[command(flatten)]
        common: Common,
        /// Skip the path enumeration.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Evaluate one special function.
    Specfun {
        #[command(subcommand)]
        function: SpecFn,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo verification and print its report as JSON.
    Verify {
        test: VerifyTest,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct Common {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Horizon.
    #[arg(long)]
    n: Option<u64>,
    /// Number of replicates.
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// geometric:R, dense:K or list:N1,N2,...
    #[arg(long)]
    checkpoints: Option<String>,
    /// Worker threads (default: $ERWS_THREADS, else one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Draw the base seed from the clock instead of the fixed default.
    #[arg(long)]
    fresh_seed: bool,
    /// Horizon of the L estimate in the fluctuation test.
    #[arg(long)]
    m_far: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum SpecFn {
    LogGamma {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    CoeffA {
        #[arg(long)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    CoeffB {
        #[arg(long)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    Stirling1 {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        k: u32,
    },
    MlMgf {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    MlDensity {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        x: f64,
    },
    MlMoment {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        m: u32,
    },
    HurwitzZeta {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        q: f64,
    },
    VPartial {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        n: u64,
    },
    VLimit {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum VerifyTest {
    MlLimit,
    CltDiffusive,
    CltCritical,
    Superdiffusive,
    Fluctuation,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let flags = RunConfig {
            p: self.p,
            q: self.q,
            r: self.r,
            s: self.s,
            n: self.n,
            reps: self.reps,
            seed: self.seed,
            out: self.out.clone(),
            checkpoints: self.checkpoints.as_deref().map(parse_grid).transpose()?,
            threads: self.threads,
            m_far: self.m_far,
            fresh_seed: self.fresh_seed,
        };
        match &self.config {
            Some(path) => Ok(flags.or(read_config(path)?)),
            None => Ok(flags),
        }
    }
}

/// A usage problem: reported like a parameter error, exit code 2.
fn missing(flag: &str) -> ErwsError {
    ErwsError::domain(format!("missing --{flag} (give it as a flag or in --config)"))
}

fn params_of(cfg: &RunConfig) -> Result<WalkParams> {
    let get = |v: Option<f64>, name| v.ok_or_else(|| missing(name));
    WalkParams::new(get(cfg.p, "p")?, get(cfg.q, "q")?, get(cfg.r, "r")?, get(cfg.s, "s")?)
}

fn seed_of(cfg: &RunConfig) -> u64 {
    if cfg.fresh_seed {
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos() as u64);
        mix64(nanos ^ ((std::process::id() as u64) << 32))
    } else {
        cfg.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    version: &'a str,
    params: WalkParams,
    base_seed: u64,
    replicate: u64,
    horizon: u64,
    checkpoints: &'a CheckpointGrid,
    columns: Vec<&'a str>,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:?}"))
}

fn cmd_simulate(common: &Common, martingale: bool) -> Result<i32> {
    let cfg = common.resolve()?;
    let params = params_of(&cfg)?;
    let n = cfg.n.ok_or_else(|| missing("n"))?;
    let seed = seed_of(&cfg);
    let grid = cfg.checkpoints.clone().unwrap_or_default();
    let mut columns = vec!["n", "S", "Sigma"];
    let mut csv = String::new();
    if martingale {
        if n > MAX_INCREMENT_HORIZON {
            return Err(ErwsError::Capacity(format!(
                "martingale columns need increments, available up to n = {MAX_INCREMENT_HORIZON}"
            )));
        }
        columns.extend(["M", "N", "predvar", "quadvar", "lil_stat"]);
        let rec = simulate_path_with_increments(&params, n, seed, 0, &grid)?;
        let c = params.derived()?;
        let t = track(&rec, &c)?;
        let lil = lil_statistics(&rec, &c);
        csv.push_str(&columns.join(","));
        csv.push('\n');
        for (i, cp) in rec.checkpoints.iter().enumerate() {
            writeln!(
                csv,
                "{},{},{},{:?},{:?},{:?},{:?},{}",
                cp.n,
                cp.s,
                cp.sigma,
                t.m[i],
                t.n_mart[i],
                t.predvar[i],
                t.quadvar[i],
                fmt_opt(lil[i])
            )
            .expect("string write");
        }
    } else {
        let rec = simulate_path(&params, n, seed, 0, &grid)?;
        csv.push_str("n,S,Sigma\n");
        for cp in &rec.checkpoints {
            writeln!(csv, "{},{},{}", cp.n, cp.s, cp.sigma).expect("string write");
        }
    }
    emit(cfg.out.as_deref(), &csv)?;
    if let Some(out) = cfg.out.as_deref() {
        let meta = SimulateMeta {
            version: REPORT_VERSION,
            params,
            base_seed: seed,
            replicate: 0,
            horizon: n,
            checkpoints: &grid,
            columns,
        };
        write_json(&sidecar_path(out), &meta)?;
    }
    Ok(EXIT_OK)
}

fn cmd_ensemble(common: &Common, terminals_csv: Option<&Path>) -> Result<i32> {
    let cfg = common.resolve()?;
    let params = params_of(&cfg)?;
    let n = cfg.n.ok_or_else(|| missing("n"))?;
    let reps = cfg.reps.ok_or_else(|| missing("reps"))?;
    let mut spec = EnsembleSpec::new(params, n, reps, seed_of(&cfg));
    spec.threads = Some(resolve_threads(cfg.threads)?);
    let mut obs: Vec<Observable> = (1..=4).map(Observable::s_pow).collect();
    obs.extend((1..=4).map(Observable::sigma_pow));
    let stats = run_ensemble(&spec, &obs)?;
    if let Some(path) = terminals_csv {
        let mut csv = String::from("replicate,S,Sigma\n");
        for (i, (s, sg)) in stats.terminals.iter().enumerate() {
            writeln!(csv, "{i},{s},{sg}").expect("string write");
        }
        write_text(path, &csv)?;
    }
    emit(cfg.out.as_deref(), &to_json(&stats))?;
    Ok(EXIT_OK)
}

fn cmd_exact(common: &Common, no_oracle: bool) -> Result<i32> {
    let cfg = common.resolve()?;
    let c = params_of(&cfg)?.derived()?;
    let n = cfg.n.ok_or_else(|| missing("n"))?;
    let rows = moment_reports(&c, n, !no_oracle && n <= ORACLE_MAX_N)?;
    let mut csv = String::from("quantity,n,closed_form,oracle,abs_err\n");
    for r in rows {
        writeln!(
            csv,
            "{},{},{:?},{},{}",
            r.quantity,
            r.n,
            r.closed_form,
            fmt_opt(r.oracle),
            fmt_opt(r.abs_err)
        )
        .expect("string write");
    }
    emit(cfg.out.as_deref(), &csv)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SpecfunOutput {
    version: &'static str,
    function: String,
    args: serde_json::Value,
    value: f64,
}

fn cmd_specfun(function: &SpecFn, out: Option<&Path>) -> Result<i32> {
    use serde_json::json;
    let ctl = SeriesControl::default();
    let (name, args, value) = match *function {
        SpecFn::LogGamma { x } => ("log-gamma", json!({ "x": x }), log_gamma(x)?),
        SpecFn::CoeffA { n, x } => ("coeff-a", json!({ "n": n, "x": x }), coeff_a(n, x)?),
        SpecFn::CoeffB { n, x } => ("coeff-b", json!({ "n": n, "x": x }), coeff_b(n, x)?),
        SpecFn::Stirling1 { m, k } => ("stirling1", json!({ "m": m, "k": k }), stirling1u(m, k)? as f64),
        SpecFn::MlMgf { alpha, t } => ("ml-mgf", json!({ "alpha": alpha, "t": t }), ml_mgf(alpha, t, &ctl)?),
        SpecFn::MlDensity { alpha, x } => (
            "ml-density",
            json!({ "alpha": alpha, "x": x }),
            ml_density(alpha, x, &ctl)?,
        ),
        SpecFn::MlMoment { alpha, m } => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(ErwsError::domain(format!("alpha = {alpha} is outside [0, 1]")));
            }
            ("ml-moment", json!({ "alpha": alpha, "m": m }), ml_moment(alpha, m))
        }
        SpecFn::HurwitzZeta { sigma, q } => ("hurwitz-zeta", json!({ "sigma": sigma, "q": q }), hurwitz_zeta(sigma, q)?),
        SpecFn::VPartial { a, b, n } => ("v-partial", json!({ "a": a, "b": b, "n": n }), v_partial(n, a, b)?),
        SpecFn::VLimit { a, b } => ("v-limit", json!({ "a": a, "b": b }), v_limit(a, b, &ctl)?),
    };
    let rec = SpecfunOutput {
        version: REPORT_VERSION,
        function: name.to_string(),
        args,
        value,
    };
    emit(out, &to_json(&rec))?;
    Ok(EXIT_OK)
}

fn cmd_verify(test: VerifyTest, common: &Common) -> Result<i32> {
    let cfg = common.resolve()?;
    let params = params_of(&cfg)?;
    let (n_default, reps_default) = match test {
        VerifyTest::Fluctuation => (10_000, 20_000),
        _ => (1_000_000, 100_000),
    };
    let n = cfg.n.unwrap_or(n_default);
    let reps = cfg.reps.unwrap_or(reps_default);
    let opts = VerifyOptions {
        base_seed: seed_of(&cfg),
        threads: Some(resolve_threads(cfg.threads)?),
        ..VerifyOptions::default()
    };
    let report = match test {
        VerifyTest::MlLimit => verify_ml_limit(&params, n, reps, &opts)?,
        VerifyTest::CltDiffusive => verify_clt_diffusive(&params, n, reps, &opts)?,
        VerifyTest::CltCritical => verify_clt_critical(&params, n, reps, &opts)?,
        VerifyTest::Superdiffusive => verify_superdiffusive(&params, n, reps, &opts)?,
        VerifyTest::Fluctuation => verify_fluctuation_sr(&params, n, cfg.m_far, reps, &opts)?,
    };
    emit(cfg.out.as_deref(), &to_json(&report))?;
    eprintln!("{} {}", report.test, report.verdict);
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAIL })
}

/// Parse `argv` (program name first), run the command, return the exit code.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate { common, martingale } => cmd_simulate(common, *martingale),
        Command::Ensemble { common, terminals_csv } => cmd_ensemble(common, terminals_csv.as_deref()),
        Command::Exact { common, no_oracle } => cmd_exact(common, *no_oracle),
        Command::Specfun { function, out } => cmd_specfun(function, out.as_deref()),
        Command::Verify { test, common } => cmd_verify(*test, common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
