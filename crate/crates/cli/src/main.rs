mod cache;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyhyp::chainseq::{
    ab_quantities, chi_tau, maximal_parameters, minimal_parameters, pollaczek_claims_ab, pollaczek_psi, ratio_bound_check, worpitzky_cf,
    ChainSequenceProbe, ParameterOutcome,
};
use polyhyp::families::{transform_params, CoefficientSequence, PollaczekParams, RandomWalkParams};
use polyhyp::hypergroup::{Linearization, LinearizationTable};
use polyhyp::par::Exec;
use polyhyp::scalar::{Mode, NumCtx, Scalar};
use polyhyp::spectrum::{eval_poly, q_measure, Character, EvalForm};
use polyhyp::verify::{list_suites, run_suite, RunOptions, VerifyError};
use serde_json::{json, Value};

use cache::Cache;

#[derive(Parser)]
#[command(name = "polyhyp", version, about = "Polynomial hypergroups on the nonnegative integers")]
struct Cli {
    /// Float precision in bits (at least 64).
    #[arg(long, global = true, default_value_t = 256)]
    precision: usize,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Directory for cached linearization rows.
    #[arg(long, global = true, env = "POLYHYP_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Seed for randomized trials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Rational,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Qleg,
    Pollaczek,
    Ultraspherical,
    RandomWalk,
    RandomWalkTilde,
    Constant,
}

#[derive(Args)]
struct FamilyArgs {
    family: Kind,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Recurrence coefficients (n, a_n, b_n, c_n).
    Coeffs {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'N', default_value_t = 10)]
        n: usize,
    },
    /// Linearization coefficients g(m,n;k).
    Linearize {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'm')]
        m: usize,
        #[arg(short = 'n')]
        n: usize,
    },
    /// Haar weights h(0..=N) with the independent value 1/g(n,n;0).
    Haar {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'N', default_value_t = 10)]
        n: usize,
    },
    /// A single polynomial value.
    Eval {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'x', allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value = "normalized")]
        form: String,
    },
    /// The character n -> P_n(x) up to K.
    Character {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'x', allow_hyphen_values = true)]
        x: String,
        #[arg(short = 'K', default_value_t = 20)]
        k: usize,
        /// Check |P_n(x)| <= 1 (only meaningful on the support or at 1).
        #[arg(long)]
        assert_bounded: bool,
        #[arg(long)]
        derivative: bool,
    },
    /// Atoms of the little q-Legendre measure.
    Measure {
        #[arg(long)]
        q: String,
        #[arg(short = 'K', default_value_t = 20)]
        k: usize,
    },
    /// Chain sequences, continued fractions and related quantities.
    Chain {
        #[command(subcommand)]
        cmd: ChainCmd,
    },
    /// Run a verification suite.
    Verify {
        suite: String,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Sweep-size override, e.g. `--size N=200`.
        #[arg(long = "size", value_parser = parse_size)]
        sizes: Vec<(String, usize)>,
        /// Record wall time per entry (makes output nondeterministic).
        #[arg(long)]
        timing: bool,
        /// Write the report here instead of stdout.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
    /// The suite catalog.
    ListSuites,
}

#[derive(Subcommand)]
enum ChainCmd {
    /// Minimal parameter sequence.
    Minimal {
        #[command(flatten)]
        src: ChainSource,
        #[arg(short = 'N', default_value_t = 10)]
        n: usize,
    },
    /// Maximal parameter sequence by backward recursion.
    Maximal {
        #[command(flatten)]
        src: ChainSource,
        #[arg(short = 'N', default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        #[arg(long, default_value = "1/1000000000000")]
        tol: String,
    },
    /// Continued fraction with a constant partial numerator.
    Worpitzky {
        #[arg(long)]
        partial: String,
        #[arg(long, default_value_t = 40)]
        depth: usize,
    },
    /// A_n(k), B_n(k) for little q-Legendre.
    Ab {
        #[arg(long)]
        q: String,
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'k')]
        k: usize,
    },
    /// Uniform ratio bound and decay envelope for little q-Legendre.
    Ratio {
        #[arg(long)]
        q: String,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long, default_value_t = 40)]
        kmax: usize,
    },
    /// psi recursion for Pollaczek parameters.
    Psi {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value = "0")]
        nu: String,
        #[arg(short = 'N', default_value_t = 100)]
        n: usize,
    },
    /// chi sequences and the ratio at omega for a random walk.
    Chi {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value = "0")]
        nu: String,
        #[arg(short = 'N', default_value_t = 1000)]
        n: usize,
    },
    /// Derivative and growth bounds at Pollaczek parameters.
    Claims {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value = "0")]
        nu: String,
        #[arg(short = 'N', default_value_t = 200)]
        n: usize,
    },
}

#[derive(Args)]
struct ChainSource {
    /// Constant chain sequence.
    #[arg(long, conflicts_with_all = ["values", "pollaczek"])]
    constant: Option<String>,
    /// Comma-separated Lambda(1), Lambda(2), ...
    #[arg(long)]
    values: Option<String>,
    /// Lambda = phi for Pollaczek parameters `alpha,lambda,nu`.
    #[arg(long, allow_hyphen_values = true)]
    pollaczek: Option<String>,
}

fn parse_size(s: &str) -> Result<(String, usize), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let v = v.parse().map_err(|_| format!("`{v}` is not a count"))?;
    Ok((k.to_string(), v))
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<polyhyp::families::FamilyError> for CliError {
    fn from(e: polyhyp::families::FamilyError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<polyhyp::scalar::ScalarError> for CliError {
    fn from(e: polyhyp::scalar::ScalarError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A rectangular result with metadata, rendered in any output format.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    meta: BTreeMap<String, Value>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    fn meta(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.meta.insert(k.into(), v.into());
        self
    }

    fn render(&self, f: Format) -> String {
        match f {
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: serde_json::Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), Value::String(v.clone())))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut obj: serde_json::Map<String, Value> = self.meta.clone().into_iter().collect();
                obj.insert("rows".into(), Value::Array(rows));
                serde_json::to_string_pretty(&Value::Object(obj)).expect("json") + "\n"
            }
            Format::Csv => {
                let mut out = self.columns.join(",") + "\n";
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(|c| csv_cell(c)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Pretty => {
                let mut out = String::new();
                for (k, v) in &self.meta {
                    let v = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("# {k}: {v}\n"));
                }
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|i| {
                        self.rows
                            .iter()
                            .map(|r| r[i].len())
                            .chain([self.columns[i].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: Vec<&str>| -> String {
                    let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                    parts.join("  ").trim_end().to_string() + "\n"
                };
                out.push_str(&line(self.columns.clone()));
                for r in &self.rows {
                    out.push_str(&line(r.iter().map(String::as_str).collect()));
                }
                out
            }
        }
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct Env {
    ctx: NumCtx,
    format: Format,
    cache_dir: Option<PathBuf>,
    seed: u64,
}

impl Env {
    fn fmt(&self, x: &Scalar) -> String {
        match x.as_rational() {
            Some(r) => polyhyp::scalar::format_rational(r),
            None => x.to_decimal(((self.ctx.precision as f64) * std::f64::consts::LOG10_2) as usize),
        }
    }

    fn parse(&self, s: &str) -> Result<Scalar, CliError> {
        Ok(self.ctx.parse(s)?)
    }

    fn opt(&self, name: &str, v: &Option<String>) -> Result<Scalar, CliError> {
        let s = v.as_deref().ok_or_else(|| usage(format!("--{name} is required for this family")))?;
        self.parse(s)
    }

    fn opt_or_zero(&self, v: &Option<String>) -> Result<Scalar, CliError> {
        v.as_deref().map_or(Ok(Scalar::zero()), |s| self.parse(s))
    }

    fn family(&self, f: &FamilyArgs) -> Result<CoefficientSequence, CliError> {
        Ok(match f.family {
            Kind::Qleg => CoefficientSequence::little_q_legendre(self.opt("q", &f.q)?)?,
            Kind::Pollaczek => CoefficientSequence::pollaczek(PollaczekParams::new(
                self.opt("alpha", &f.alpha)?,
                self.opt_or_zero(&f.lambda)?,
                self.opt_or_zero(&f.nu)?,
            )?)?,
            Kind::Ultraspherical => CoefficientSequence::ultraspherical(self.opt("alpha", &f.alpha)?)?,
            Kind::RandomWalk | Kind::RandomWalkTilde => CoefficientSequence::random_walk(RandomWalkParams::new(
                self.opt("a", &f.a)?,
                self.opt("b", &f.b)?,
                self.opt_or_zero(&f.nu)?,
                matches!(f.family, Kind::RandomWalkTilde),
            )?)?,
            Kind::Constant => CoefficientSequence::constant_symmetric(self.opt("c", &f.c)?)?,
        })
    }

    fn family_meta(&self, t: Table, cs: &CoefficientSequence) -> Table {
        let params: serde_json::Map<String, Value> = cs
            .family()
            .params()
            .into_iter()
            .map(|(k, v)| (k.to_string(), Value::String(v)))
            .collect();
        t.meta("family", cs.family().name())
            .meta("params", Value::Object(params))
            .meta("mode", format!("{:?}", self.ctx.mode).to_lowercase())
            .meta("precision", self.ctx.precision)
    }

    fn emit(&self, t: Table) {
        print!("{}", t.render(self.format));
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let mode = match cli.mode {
        ModeArg::Auto => Mode::Auto,
        ModeArg::Rational => Mode::Rational,
        ModeArg::Float => Mode::Float,
    };
    let env = Env {
        ctx: NumCtx::new(mode, cli.precision)?,
        format: cli.format,
        cache_dir: cli.cache_dir,
        seed: cli.seed,
    };
    match cli.cmd {
        Cmd::Coeffs { fam, n } => {
            let cs = env.family(&fam)?;
            let rows = cs.try_prefix(n)?;
            let mut t = env.family_meta(Table::new(vec!["n", "a", "b", "c"]), &cs);
            for (k, r) in rows.iter().enumerate() {
                t.rows.push(vec![k.to_string(), env.fmt(&r.a), env.fmt(&r.b), env.fmt(&r.c)]);
            }
            env.emit(t);
        }
        Cmd::Linearize { fam, m, n } => {
            let cs = env.family(&fam)?;
            cs.try_prefix(m + n + 1)?;
            let t = env.family_meta(Table::new(vec!["k", "g"]), &cs);
            let (g, hit) = linearize_cached(&env, cs, m, n)?;
            let mut t = t.meta("m", m).meta("n", n).meta("cache", if hit { "hit" } else { "miss" });
            for (k, v) in g.iter() {
                t.rows.push(vec![k.to_string(), env.fmt(v)]);
            }
            if env.format == Format::Csv {
                eprintln!("cache: {}", if hit { "hit" } else { "miss" });
            }
            env.emit(t);
        }
        Cmd::Haar { fam, n } => {
            let cs = env.family(&fam)?;
            cs.try_prefix(n + 1)?;
            let lt = LinearizationTable::new(Arc::new(cs));
            let h = lt.haar_prefix(n);
            let mut t = env.family_meta(Table::new(vec!["n", "h", "inv_g_nn0"]), lt.coefficients());
            for (k, v) in h.iter().enumerate() {
                t.rows.push(vec![k.to_string(), env.fmt(v), env.fmt(&lt.g(k, k, 0).recip())]);
            }
            env.emit(t);
        }
        Cmd::Eval { fam, n, x, form } => {
            let cs = env.family(&fam)?;
            cs.try_prefix(n + 1)?;
            let form: EvalForm = form.parse().map_err(usage)?;
            let x = env.parse(&x)?;
            let v = eval_poly(&cs, n, &x, form, &env.ctx)?;
            let mut t = env.family_meta(Table::new(vec!["n", "x", "value"]), &cs);
            t.rows.push(vec![n.to_string(), env.fmt(&x), env.fmt(&v)]);
            env.emit(t);
        }
        Cmd::Character {
            fam,
            x,
            k,
            assert_bounded,
            derivative,
        } => {
            let cs = env.family(&fam)?;
            cs.try_prefix(k + 1)?;
            let x = env.parse(&x)?;
            let ch = Character::new(&cs, &x, k, assert_bounded, derivative);
            let cols = if derivative {
                vec!["n", "value", "derivative"]
            } else {
                vec!["n", "value"]
            };
            let mut t = env.family_meta(Table::new(cols), &cs).meta("x", env.fmt(&x));
            if assert_bounded {
                t = t.meta("bound_violation", ch.bound_violation.map_or(Value::Null, |n| json!(n)));
            }
            for (n, v) in ch.values.iter().enumerate() {
                let mut row = vec![n.to_string(), env.fmt(v)];
                if let Some(d) = &ch.derivatives {
                    row.push(env.fmt(&d[n]));
                }
                t.rows.push(row);
            }
            env.emit(t);
            if ch.bound_violation.is_some() {
                return Ok(1);
            }
        }
        Cmd::Measure { q, k } => {
            let q = env.parse(&q)?;
            let mu = q_measure(&q, k)?;
            let mut t = Table::new(vec!["m", "location", "mass"])
                .meta("q", env.fmt(&q))
                .meta("tail_bound", env.fmt(&mu.tail_bound));
            for (m, a) in mu.atoms.iter().enumerate() {
                t.rows.push(vec![m.to_string(), env.fmt(&a.location), env.fmt(&a.mass)]);
            }
            env.emit(t);
        }
        Cmd::Chain { cmd } => return chain(&env, cmd),
        Cmd::Verify {
            suite,
            q,
            alpha,
            lambda,
            nu,
            a,
            b,
            sizes,
            timing,
            output,
        } => {
            let mut params = BTreeMap::new();
            for (k, v) in [("q", q), ("alpha", alpha), ("lambda", lambda), ("nu", nu), ("a", a), ("b", b)] {
                if let Some(v) = v {
                    params.insert(k.to_string(), v);
                }
            }
            let overrides: BTreeMap<String, usize> = sizes.into_iter().collect();
            let opts = RunOptions {
                ctx: env.ctx,
                exec: Exec::default(),
                seed: env.seed,
                timing,
            };
            let report = run_suite(&suite, &params, &overrides, &opts)?;
            let text = match env.format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_csv(),
                Format::Pretty => report.to_pretty(),
            };
            match output {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            return Ok(report.exit_code() as u8);
        }
        Cmd::ListSuites => {
            let mut t = Table::new(vec!["suite", "params", "sizes", "tolerance", "summary"]);
            for s in list_suites() {
                let params: Vec<String> = s
                    .params
                    .iter()
                    .map(|p| format!("{} [{}] = {}", p.name, p.range, p.default))
                    .collect();
                let sizes: Vec<String> = s.sizes.iter().map(|(k, v)| format!("{k}={v}")).collect();
                t.rows.push(vec![
                    s.name.into(),
                    params.join("; "),
                    sizes.join(" "),
                    s.tolerance.into(),
                    s.summary.into(),
                ]);
            }
            env.emit(t);
        }
    }
    Ok(0)
}

fn linearize_cached(env: &Env, cs: CoefficientSequence, m: usize, n: usize) -> Result<(Linearization, bool), CliError> {
    let mut parts = vec![cs.family().name().to_string()];
    parts.extend(cs.family().params().into_iter().map(|(k, v)| format!("{k}={v}")));
    parts.push(format!("{:?}", env.ctx.mode));
    parts.push(env.ctx.precision.to_string());
    parts.push(format!("{m},{n}"));
    let key = Cache::key(&parts);
    let cache = match &env.cache_dir {
        Some(dir) => Some(Cache::open(dir)?),
        None => None,
    };
    if let Some(g) = cache.as_ref().and_then(|c| c.get(&key)) {
        return Ok((g, true));
    }
    let g = LinearizationTable::from_sequence(cs).linearize(m, n).as_ref().clone();
    if let Some(c) = &cache {
        c.put(&key, &g)?;
    }
    Ok((g, false))
}

fn probe(env: &Env, src: &ChainSource) -> Result<ChainSequenceProbe, CliError> {
    if let Some(c) = &src.constant {
        return Ok(ChainSequenceProbe::constant(env.parse(c)?));
    }
    if let Some(v) = &src.values {
        let vals = v.split(',').map(|s| env.parse(s)).collect::<Result<Vec<_>, _>>()?;
        return Ok(ChainSequenceProbe::from_values(vals));
    }
    if let Some(p) = &src.pollaczek {
        let v = p.split(',').map(|s| env.parse(s)).collect::<Result<Vec<_>, _>>()?;
        let [a, l, n] = <[Scalar; 3]>::try_from(v).map_err(|_| usage("--pollaczek takes alpha,lambda,nu"))?;
        return Ok(ChainSequenceProbe::pollaczek_phi(PollaczekParams::new(a, l, n)?)?);
    }
    Err(usage("give one of --constant, --values, --pollaczek"))
}

fn json_out(env: &Env, v: Value) -> Result<u8, CliError> {
    match env.format {
        Format::Json | Format::Pretty => println!("{}", serde_json::to_string_pretty(&v).expect("json")),
        Format::Csv => return Err(usage("this command has no CSV form; use --format json")),
    }
    Ok(0)
}

fn chain(env: &Env, cmd: ChainCmd) -> Result<u8, CliError> {
    match cmd {
        ChainCmd::Minimal { src, n } => {
            let p = probe(env, &src)?;
            match minimal_parameters(&p, n) {
                ParameterOutcome::Sequence { values } => {
                    let mut t = Table::new(vec!["n", "m"]).meta("chain", true);
                    for (k, v) in values.iter().enumerate() {
                        t.rows.push(vec![(k + p.start - 1).to_string(), env.fmt(v)]);
                    }
                    env.emit(t);
                    Ok(0)
                }
                ParameterOutcome::NotChain { n, value } => {
                    let t = Table::new(vec!["n", "m"])
                        .meta("chain", false)
                        .meta("witness_n", n)
                        .meta("witness_value", env.fmt(&value));
                    env.emit(t);
                    Ok(1)
                }
            }
        }
        ChainCmd::Maximal { src, n, horizon, tol } => {
            let p = probe(env, &src)?;
            let tol = env.parse(&tol)?;
            let est = maximal_parameters(&p, n, horizon, &tol, env.ctx.precision).map_err(|e| CliError::Compute(e.to_string()))?;
            let mut t = Table::new(vec!["n", "M"])
                .meta("horizon", est.horizon)
                .meta("cauchy_gap", env.fmt(&est.cauchy_gap))
                .meta("nonincreasing", est.nonincreasing.map_or(Value::Null, Value::Bool));
            for (k, v) in est.values.iter().enumerate() {
                t.rows.push(vec![(k + p.start - 1).to_string(), env.fmt(v)]);
            }
            env.emit(t);
            Ok(0)
        }
        ChainCmd::Worpitzky { partial, depth } => {
            let a = env.parse(&partial)?;
            let q = worpitzky_cf(|_| a.clone(), depth);
            json_out(
                env,
                json!({
                    "value": env.fmt(&q.value),
                    "depth": q.depth,
                    "contained": q.contained,
                    "tail_bound": q.tail_bound.as_ref().map(|b| env.fmt(b)),
                    "breakdown": q.breakdown,
                }),
            )
        }
        ChainCmd::Ab { q, n, k } => {
            let ab = ab_quantities(&env.parse(&q)?, n, k)?;
            json_out(
                env,
                json!({
                    "n": n, "k": k,
                    "A_n(k)": env.fmt(&ab.a),
                    "A_n(n+k)": env.fmt(&ab.a_shifted),
                    "B_n(k)": env.fmt(&ab.b),
                    "B_n(k) - 1/q": env.fmt(&ab.b_minus_limit),
                    "k_at_least_N": ab.in_range,
                    "A_above_4": ab.a_ok,
                    "B_above_1/(2q)": ab.b_ok,
                }),
            )
        }
        ChainCmd::Ratio { q, n, kmax } => {
            let rep = ratio_bound_check(&env.parse(&q)?, n, kmax)?;
            let ok = rep.passes();
            json_out(
                env,
                json!({
                    "N": rep.big_n,
                    "zero_indices": rep.zero_indices,
                    "max_ratio": env.fmt(&rep.max_ratio),
                    "max_ratio_at": rep.max_ratio_at,
                    "ratio_margin": env.fmt(&rep.ratio_margin),
                    "envelope_margin": env.fmt(&rep.envelope_margin),
                    "envelope_at": rep.envelope_at,
                    "cf_gap": env.fmt(&rep.cf_gap),
                    "cf_tail": env.fmt(&rep.cf_tail),
                    "pass": ok,
                }),
            )?;
            Ok(if ok { 0 } else { 1 })
        }
        ChainCmd::Psi { alpha, lambda, nu, n } => {
            let tb = transform_params(&env.parse(&alpha)?, &env.parse(&lambda)?, &env.parse(&nu)?, &env.ctx)?;
            let rep = pollaczek_psi(&tb, n, env.ctx.precision);
            let head: Vec<String> = rep.psi.iter().take(10).map(|v| env.fmt(v)).collect();
            json_out(
                env,
                json!({
                    "psi_head": head,
                    "min_rel_margin": env.fmt(&rep.min_rel_margin),
                    "min_at": rep.min_at,
                    "base_case_exact": rep.base_case_exact,
                    "product_gap": env.fmt(&rep.product_gap),
                    "positive": rep.positive,
                }),
            )
        }
        ChainCmd::Chi { a, b, nu, n } => {
            let p = RandomWalkParams::new(env.parse(&a)?, env.parse(&b)?, env.parse(&nu)?, false)?;
            let c = chi_tau(&p, n, &env.ctx).map_err(|e| CliError::Compute(e.to_string()))?;
            json_out(
                env,
                json!({
                    "n": c.n,
                    "r_n": env.fmt(&c.r_n),
                    "r_2n": env.fmt(&c.r_2n),
                    "cauchy_gap": env.fmt(&c.cauchy_gap),
                    "tau_estimate": env.fmt(&c.tau_estimate),
                    "identity_residual": env.fmt(&c.identity_residual),
                    "chi_le_violation": c.chi_le_violation,
                    "tilde_increase_violation": c.tilde_increase_violation,
                    "chi_tilde_head": c.chi_tilde_head.iter().map(|v| env.fmt(v)).collect::<Vec<_>>(),
                }),
            )
        }
        ChainCmd::Claims { alpha, lambda, nu, n } => {
            let p = PollaczekParams::new(env.parse(&alpha)?, env.parse(&lambda)?, env.parse(&nu)?)?;
            let rep = pollaczek_claims_ab(&p, n, n, n, &env.ctx)?;
            json_out(
                env,
                json!({
                    "a_min_rel_margin": env.fmt(&rep.a_min_rel_margin),
                    "a_min_at": rep.a_min_at,
                    "even_derivatives_vanish": rep.even_derivatives_vanish,
                    "b_min_rel_margin": env.fmt(&rep.b_min_rel_margin),
                    "b_min_at": rep.b_min_at,
                    "case1_region": rep.case1_region,
                    "case1_min_margin": rep.case1_min_margin.as_ref().map(|m| env.fmt(m)),
                }),
            )
        }
    }
}
