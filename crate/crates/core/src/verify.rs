//! Named verification suites. Each suite runs finite-range checks and
//! collects one [`Entry`] per claim with its worst margin and a witness.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::chainseq::{
    chi_tau, in_case1_region, laguerre_turan, maximal_parameters, minimal_parameters, noise_floor, pollaczek_claims_ab, pollaczek_psi,
    ratio_bound_check_with, turan_check, unit_grid, worpitzky_cf, ChainSequenceProbe, ParameterOutcome, QLegendreRatios,
};
use crate::families::{
    critical_points, in_small_lambda_regime, iota_parts, little_q_legendre_haar, phi, phi_prime, pollaczek_c_via_laguerre,
    transform_params, CoefficientSequence, FamilyError, PollaczekParams, RandomWalkParams,
};
use crate::hypergroup::{haar_partial_sums, LinearizationTable};
use crate::par::Exec;
use crate::scalar::{format_rational, NumCtx, Scalar, ScalarError};
use crate::spectrum::{
    atom_characters, character_limit_series, eval_values, fourier, integrate_power_from, q_hypergeometric_r, q_measure, support_interval,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Indeterminate,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Indeterminate => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub claim: String,
    pub anchor: String,
    pub status: Status,
    /// Worst `value - bound`; `p/q` when exact and short, otherwise a
    /// decimal.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub margin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms: Option<u64>,
}

impl Entry {
    fn new(claim: &str, anchor: &str, status: Status) -> Self {
        Entry {
            claim: claim.into(),
            anchor: anchor.into(),
            status,
            margin: None,
            witness: None,
            note: None,
            runtime_ms: None,
        }
    }

    /// Inequality entry judged on its margin; floats within `floor` of zero
    /// are indeterminate.
    pub fn bound(claim: &str, anchor: &str, margin: &Scalar, strict: bool, floor: &Scalar) -> Self {
        let mut e = Entry::new(claim, anchor, judge(margin, strict, floor));
        e.margin = Some(fmt_scalar(margin));
        if e.status == Status::Indeterminate {
            e.note = Some("margin within float noise; rerun at higher precision".into());
        }
        e
    }

    /// `value < tol`, with margin `tol - value`.
    pub fn within(claim: &str, anchor: &str, value: &Scalar, tol: &Scalar) -> Self {
        let mut e = Entry::new(claim, anchor, if value < tol { Status::Pass } else { Status::Fail });
        e.margin = Some(fmt_scalar(&(tol - value)));
        e
    }

    pub fn flag(claim: &str, anchor: &str, ok: bool) -> Self {
        Entry::new(claim, anchor, if ok { Status::Pass } else { Status::Fail })
    }

    pub fn info(claim: &str, anchor: &str, note: String) -> Self {
        let mut e = Entry::new(claim, anchor, Status::Pass);
        e.note = Some(note);
        e
    }

    pub fn witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }
}

fn judge(margin: &Scalar, strict: bool, floor: &Scalar) -> Status {
    if margin.is_exact() {
        let ok = if strict { margin.is_positive() } else { !margin.is_negative() };
        return if ok { Status::Pass } else { Status::Fail };
    }
    if margin > floor {
        Status::Pass
    } else if *margin < -floor.clone() {
        Status::Fail
    } else {
        Status::Indeterminate
    }
}

const MAX_EXACT_CHARS: usize = 160;

/// `p/q` for short exact values, scientific decimal otherwise.
pub fn fmt_scalar(x: &Scalar) -> String {
    if let Some(r) = x.as_rational() {
        let s = format_rational(r);
        if s.len() <= MAX_EXACT_CHARS {
            return s;
        }
    }
    let f = x.to_f64();
    if f.is_finite() && (f != 0.0 || x.is_zero()) {
        format!("{f:e}")
    } else {
        x.to_decimal(20)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub params: BTreeMap<String, String>,
    pub sizes: BTreeMap<String, usize>,
    pub mode: String,
    pub precision: usize,
    pub status: Status,
    pub pass: bool,
    pub entries: Vec<Entry>,
}

impl Report {
    pub fn new(suite: &str, ctx: &NumCtx, entries: Vec<Entry>) -> Self {
        let status = entries.iter().map(|e| e.status).max().unwrap_or(Status::Pass);
        Report {
            suite: suite.into(),
            params: BTreeMap::new(),
            sizes: BTreeMap::new(),
            mode: format!("{:?}", ctx.mode).to_lowercase(),
            precision: ctx.precision,
            status,
            pass: status == Status::Pass,
            entries,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// One row per entry, prefixed by the suite name and overall status.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "overall", "claim", "anchor", "status", "margin", "witness", "note"])
            .expect("in-memory csv");
        let status = |s: Status| serde_json::to_value(s).expect("status").as_str().expect("str").to_string();
        for e in &self.entries {
            w.write_record([
                self.suite.clone(),
                status(self.status),
                e.claim.clone(),
                e.anchor.clone(),
                status(e.status),
                e.margin.clone().unwrap_or_default(),
                e.witness.clone().unwrap_or_default(),
                e.note.clone().unwrap_or_default(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    /// Human-readable summary.
    pub fn to_pretty(&self) -> String {
        let mut out = format!(
            "{} [{:?}] mode={} precision={}\n",
            self.suite, self.status, self.mode, self.precision
        );
        for (k, v) in &self.params {
            out.push_str(&format!("  {k} = {v}\n"));
        }
        for e in &self.entries {
            out.push_str(&format!("  {:<13} {}", format!("{:?}", e.status), e.claim));
            if let Some(m) = &e.margin {
                out.push_str(&format!("  margin={m}"));
            }
            if let Some(w) = &e.witness {
                out.push_str(&format!("  at {w}"));
            }
            if let Some(n) = &e.note {
                out.push_str(&format!("  ({n})"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("suite `{suite}` takes no parameter `{name}`")]
    UnknownParam { suite: String, name: String },
    #[error("parameter `{name}`: {msg}")]
    Param { name: String, msg: String },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub range: &'static str,
    /// Default values; several mean a sweep.
    pub default: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSpec {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: Vec<ParamSpec>,
    pub sizes: Vec<(&'static str, usize)>,
    pub tolerance: &'static str,
}

const Q_GRID_BASIC: &str = "1/4, 1/2, 3/4";
const Q_GRID_DECAY: &str = "3/10, 1/2, 7/10";
const ALPHA_GRID: &str = "-2/5, -1/4, 0, 1/2, 1, 2";
const LAMBDA_GRID: &str = "0, 1/10, 3/10, 1, 5";
const NU_GRID: &str = "0, 1/2, 1, 3";

fn q_param(default: &'static str) -> ParamSpec {
    ParamSpec {
        name: "q",
        range: "0 < q < 1",
        default,
    }
}

fn poll_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec {
            name: "alpha",
            range: "alpha > -1/2",
            default: ALPHA_GRID,
        },
        ParamSpec {
            name: "lambda",
            range: "lambda >= 0",
            default: LAMBDA_GRID,
        },
        ParamSpec {
            name: "nu",
            range: "nu >= 0",
            default: NU_GRID,
        },
    ]
}

fn valid_region_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec {
            name: "alpha",
            range: "alpha > -1/2",
            default: ALPHA_GRID,
        },
        ParamSpec {
            name: "lambda",
            range: "0 < lambda < alpha + 1/2",
            default: LAMBDA_GRID,
        },
        ParamSpec {
            name: "nu",
            range: "nu >= 0",
            default: NU_GRID,
        },
    ]
}

/// The fixed suite catalog.
pub fn list_suites() -> Vec<SuiteSpec> {
    let exact = "exact";
    vec![
        SuiteSpec {
            name: "qleg-basics",
            summary: "q-Legendre: nonnegative linearization, Haar weights, basic hypergeometric form",
            params: vec![q_param(Q_GRID_BASIC)],
            sizes: vec![("N", 30), ("H", 100), ("R", 20)],
            tolerance: exact,
        },
        SuiteSpec {
            name: "qleg-thm21",
            summary: "q-Legendre: character norm sandwich with the explicit constant",
            params: vec![q_param(Q_GRID_DECAY)],
            sizes: vec![("N", 15), ("K", 40)],
            tolerance: "exact sums, float constant, envelope tails",
        },
        SuiteSpec {
            name: "qleg-thm23-idempotents",
            summary: "q-Legendre: idempotent expansion residual of eps_1 - eps_0",
            params: vec![q_param("1/2")],
            sizes: vec![("M", 25), ("K", 160)],
            tolerance: "residual < 1e-6",
        },
        SuiteSpec {
            name: "qleg-cor24",
            summary: "q-Legendre: character limit series and growth of fourth moments",
            params: vec![q_param("1/10, 1/5")],
            sizes: vec![("N", 40), ("T", 30), ("K", 120), ("lo", 20)],
            tolerance: "series gap < 1e-5",
        },
        SuiteSpec {
            name: "qleg-lemma32",
            summary: "q-Legendre: uniform ratio bound, decay envelope, continued fraction route",
            params: vec![q_param(Q_GRID_DECAY)],
            sizes: vec![("N", 10), ("K", 40), ("depth", 40)],
            tolerance: exact,
        },
        SuiteSpec {
            name: "qleg-lemma33",
            summary: "q-Legendre: bounds on A_n and B_n and the limit of B_n",
            params: vec![q_param(Q_GRID_DECAY)],
            sizes: vec![("N", 10), ("K", 40), ("L", 200)],
            tolerance: "limit gap < 1e-6",
        },
        SuiteSpec {
            name: "qleg-lemma34",
            summary: "q-Legendre: squared l2 norms of characters at the atoms",
            params: vec![q_param("1/2")],
            sizes: vec![("N", 8), ("K", 80)],
            tolerance: "1e-10",
        },
        SuiteSpec {
            name: "qleg-lemma35",
            summary: "q-Legendre: Haar partial sums",
            params: vec![q_param("1/4, 1/2")],
            sizes: vec![("N", 100)],
            tolerance: exact,
        },
        SuiteSpec {
            name: "poll-thm25",
            summary: "Pollaczek: monotone coefficients and nonnegative linearization",
            params: poll_params(),
            sizes: vec![("N", 500), ("P", 8)],
            tolerance: "exact; |c_N - 1/2| < 5e-2",
        },
        SuiteSpec {
            name: "poll-cor26",
            summary: "Pollaczek: upper bound through phi and the Laguerre ratio form",
            params: poll_params(),
            sizes: vec![("N", 500), ("L", 200)],
            tolerance: exact,
        },
        SuiteSpec {
            name: "poll-lemma37",
            summary: "Pollaczek: support of the random-walk families and the transform to Pollaczek",
            params: valid_region_params(),
            sizes: vec![("N", 100), ("S", 4000)],
            tolerance: "relative 2^-(p-40)",
        },
        SuiteSpec {
            name: "poll-lemma38",
            summary: "random walk: chi sequences and the ratio limit",
            params: vec![
                ParamSpec {
                    name: "a",
                    range: "a > 1",
                    default: "3",
                },
                ParamSpec {
                    name: "b",
                    range: "b > 0",
                    default: "9/2",
                },
                ParamSpec {
                    name: "nu",
                    range: "nu >= 0",
                    default: "1",
                },
            ],
            sizes: vec![("N", 10_000)],
            tolerance: "Cauchy gap < 1e-6",
        },
        SuiteSpec {
            name: "poll-lemma39",
            summary: "Pollaczek: psi recursion and its lower bound",
            params: valid_region_params(),
            sizes: vec![("N", 1000)],
            tolerance: "float noise floor",
        },
        SuiteSpec {
            name: "poll-thm27-bounds",
            summary: "Pollaczek: derivative and growth bounds behind the point-derivation argument",
            params: valid_region_params(),
            sizes: vec![("A", 200), ("B", 500), ("C", 1000)],
            tolerance: "exact A, float B",
        },
        SuiteSpec {
            name: "appendixA",
            summary: "Pollaczek: coefficient comparisons, iota bound, critical points",
            params: poll_params(),
            sizes: vec![("N", 500)],
            tolerance: exact,
        },
        SuiteSpec {
            name: "turan",
            summary: "Turan inequalities for the random-walk families and for Laguerre",
            params: valid_region_params(),
            sizes: vec![("N", 100), ("grid", 128)],
            tolerance: "float noise floor",
        },
        SuiteSpec {
            name: "chain-basics",
            summary: "chain sequences: parameter sequences and Worpitzky containment",
            params: vec![],
            sizes: vec![("N", 100), ("trials", 1000), ("P", 200)],
            tolerance: "maximal tol 1e-12",
        },
    ]
}

pub fn find_suite(name: &str) -> Option<SuiteSpec> {
    list_suites().into_iter().find(|s| s.name == name)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub ctx: NumCtx,
    pub exec: Exec,
    pub seed: u64,
    /// Record per-entry wall time; off by default so reports are
    /// reproducible byte for byte.
    pub timing: bool,
}

struct Cx<'a> {
    params: BTreeMap<String, Vec<Scalar>>,
    sizes: BTreeMap<String, usize>,
    opts: &'a RunOptions,
}

impl Cx<'_> {
    fn size(&self, k: &str) -> usize {
        self.sizes[k]
    }

    fn values(&self, k: &str) -> &[Scalar] {
        &self.params[k]
    }

    fn prec(&self) -> usize {
        self.opts.ctx.precision
    }

    fn exec(&self) -> Exec {
        self.opts.exec
    }

    fn poll_points(&self, valid_region: bool) -> Result<Vec<PollaczekParams>, VerifyError> {
        let mut out = Vec::new();
        for a in self.values("alpha") {
            for l in self.values("lambda") {
                for n in self.values("nu") {
                    out.push(PollaczekParams::new(a.clone(), l.clone(), n.clone())?);
                }
            }
        }
        if valid_region {
            let half = Scalar::ratio(1, 2);
            let explicit = ["alpha", "lambda"].iter().all(|k| self.params[*k].len() == 1);
            out.retain(|p| p.lambda.is_positive() && p.lambda < &p.alpha + &half);
            if out.is_empty() && explicit {
                return Err(VerifyError::Param {
                    name: "lambda".into(),
                    msg: "need 0 < lambda < alpha + 1/2".into(),
                });
            }
        }
        Ok(out)
    }
}

fn parse_list(ctx: &NumCtx, s: &str) -> Result<Vec<Scalar>, ScalarError> {
    s.split(',')
        .map(|t| {
            NumCtx {
                mode: ctx.mode,
                precision: ctx.precision,
            }
            .parse(t.trim())
        })
        .collect()
}

fn check_range(name: &str, x: &Scalar) -> Result<(), VerifyError> {
    let err = |msg: &str| {
        Err(VerifyError::Param {
            name: name.into(),
            msg: format!("{msg}, got {x}"),
        })
    };
    match name {
        "q" if !(x.is_positive() && *x < Scalar::one()) => err("need 0 < q < 1"),
        "alpha" if *x <= Scalar::ratio(-1, 2) => err("need alpha > -1/2"),
        "lambda" | "nu" if x.is_negative() => err("need a nonnegative value"),
        "a" if *x <= Scalar::one() => err("need a > 1"),
        "b" if !x.is_positive() => err("need b > 0"),
        _ => Ok(()),
    }
}

/// Run the named suite. `params` override the default sweeps (a
/// comma-separated list is a sweep), `overrides` the sweep sizes.
pub fn run_suite(
    name: &str,
    params: &BTreeMap<String, String>,
    overrides: &BTreeMap<String, usize>,
    opts: &RunOptions,
) -> Result<Report, VerifyError> {
    let spec = find_suite(name).ok_or_else(|| VerifyError::UnknownSuite(name.into()))?;
    for k in params.keys() {
        if !spec.params.iter().any(|p| p.name == k) {
            return Err(VerifyError::UnknownParam {
                suite: name.into(),
                name: k.clone(),
            });
        }
    }
    for k in overrides.keys() {
        if !spec.sizes.iter().any(|(s, _)| s == k) {
            return Err(VerifyError::UnknownParam {
                suite: name.into(),
                name: k.clone(),
            });
        }
    }
    // grid defaults are always exact
    let exact = NumCtx {
        mode: crate::scalar::Mode::Rational,
        precision: opts.ctx.precision,
    };
    let mut resolved = BTreeMap::new();
    let mut shown = BTreeMap::new();
    for p in &spec.params {
        let (text, values) = match params.get(p.name) {
            Some(s) => (s.clone(), parse_list(&opts.ctx, s)?),
            None => (p.default.to_string(), parse_list(&exact, p.default)?),
        };
        for v in &values {
            check_range(p.name, v)?;
        }
        shown.insert(p.name.to_string(), text);
        resolved.insert(p.name.to_string(), values);
    }
    let mut sizes: BTreeMap<String, usize> = spec.sizes.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in overrides {
        sizes.insert(k.clone(), *v);
    }
    let cx = Cx {
        params: resolved,
        sizes: sizes.clone(),
        opts,
    };
    let start = Instant::now();
    let mut entries = match name {
        "qleg-basics" => qleg_basics(&cx)?,
        "qleg-thm21" => qleg_norm_sandwich(&cx)?,
        "qleg-thm23-idempotents" => qleg_idempotents(&cx)?,
        "qleg-cor24" => qleg_character_limit(&cx)?,
        "qleg-lemma32" => qleg_ratio_bound(&cx)?,
        "qleg-lemma33" => qleg_ab_bounds(&cx)?,
        "qleg-lemma34" => qleg_l2_norm(&cx)?,
        "qleg-lemma35" => qleg_haar_sums(&cx)?,
        "poll-thm25" => poll_monotone(&cx)?,
        "poll-cor26" => poll_phi_bound(&cx)?,
        "poll-lemma37" => poll_transform(&cx)?,
        "poll-lemma38" => poll_chi(&cx)?,
        "poll-lemma39" => poll_psi(&cx)?,
        "poll-thm27-bounds" => poll_growth_bounds(&cx)?,
        "appendixA" => coefficient_comparisons(&cx)?,
        "turan" => turan(&cx)?,
        "chain-basics" => chain_basics(&cx)?,
        _ => unreachable!("catalog and dispatch agree"),
    };
    if opts.timing {
        let ms = start.elapsed().as_millis() as u64;
        for e in &mut entries {
            e.runtime_ms = Some(ms);
        }
    }
    let mut report = Report::new(name, &opts.ctx, entries);
    report.params = shown;
    report.sizes = sizes;
    Ok(report)
}

fn zero() -> Scalar {
    Scalar::zero()
}

/// Track the smallest margin and where it occurred.
struct Worst {
    margin: Option<Scalar>,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: None,
            at: String::new(),
        }
    }

    fn see(&mut self, m: Scalar, at: impl FnOnce() -> String) {
        if self.margin.as_ref().is_none_or(|w| m < *w) {
            self.margin = Some(m);
            self.at = at();
        }
    }

    fn merge(&mut self, other: Worst) {
        if let Some(m) = other.margin {
            let at = other.at;
            self.see(m, || at);
        }
    }

    fn entry(self, claim: &str, anchor: &str, strict: bool, floor: &Scalar) -> Entry {
        match self.margin {
            Some(m) => Entry::bound(claim, anchor, &m, strict, floor).witness(self.at),
            None => Entry::info(claim, anchor, "no points in range".into()),
        }
    }
}

fn point(p: &PollaczekParams) -> String {
    format!("(alpha, lambda, nu) = ({}, {}, {})", p.alpha, p.lambda, p.nu)
}

// ---------------------------------------------------------------- q-Legendre

const A_PROPERTY_P: &str = "q-Legendre linearization coefficients are nonnegative";
const A_HAAR: &str = "q-Legendre Haar weights in closed form";
const A_HYPERGEOMETRIC: &str = "q-Legendre basic hypergeometric representation";

fn qleg_basics(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n, hn, rn) = (cx.size("N"), cx.size("H"), cx.size("R"));
    let mut out = Vec::new();
    for q in cx.values("q") {
        let t = LinearizationTable::from_sequence(CoefficientSequence::little_q_legendre(q.clone())?);
        let rep = t.property_p_check(n, cx.exec());
        let w = &rep.min_value;
        out.push(
            Entry::bound(
                &format!("q={q}: min g(m,n;k) >= 0 for m,n <= {n}"),
                A_PROPERTY_P,
                &w.value,
                false,
                &zero(),
            )
            .witness(format!("g({},{};{})", w.m, w.n, w.k)),
        );
        out.push(
            Entry::flag(&format!("q={q}: sum_k g(m,n;k) = 1 for m,n <= {n}"), A_PROPERTY_P, rep.sums_ok)
                .note(format!("max residual {}", fmt_scalar(&rep.max_sum_residual))),
        );
        out.push(Entry::flag(
            &format!("q={q}: support of g is |m-n|..m+n"),
            A_PROPERTY_P,
            rep.support_ok,
        ));

        let h = t.haar_prefix(hn);
        let bad = (0..=hn).find(|&k| h[k] != little_q_legendre_haar(q, k));
        let mut e = Entry::flag(
            &format!("q={q}: recursive h(n) equals closed form, n <= {hn}"),
            A_HAAR,
            bad.is_none(),
        );
        if let Some(k) = bad {
            e = e.witness(format!("n = {k}"));
        }
        out.push(e);
        let bad = (0..=n).find(|&k| {
            let (h, inv) = t.haar_with_check(k);
            &h * t.g(k, k, 0) != Scalar::one() || h != inv
        });
        let mut e = Entry::flag(&format!("q={q}: h(n) g(n,n;0) = 1, n <= {n}"), A_HAAR, bad.is_none());
        if let Some(k) = bad {
            e = e.witness(format!("n = {k}"));
        }
        out.push(e);

        let xs = [Scalar::zero(), Scalar::ratio(1, 2), Scalar::one()];
        let mut bad = None;
        for x in &xs {
            let vals = eval_values(t.coefficients(), rn, x);
            if let Some(k) = (0..=rn).find(|&k| q_hypergeometric_r(q, k, x) != vals[k]) {
                bad = Some(format!("n = {k}, x = {x}"));
                break;
            }
        }
        let mut e = Entry::flag(
            &format!("q={q}: 2phi1 form equals recurrence, n <= {rn}, x in {{0, 1/2, 1}}"),
            A_HYPERGEOMETRIC,
            bad.is_none(),
        );
        if let Some(w) = bad {
            e = e.witness(w);
        }
        out.push(e);
    }
    Ok(out)
}

/// Series part of the explicit constant, summed until terms fall below
/// `2^{-(p+20)}` relative.
pub fn character_norm_constant(q: &Scalar, precision: usize) -> Scalar {
    let big_n = crate::chainseq::q_threshold(q) as i64;
    let qf = q.to_float(precision + 32);
    let one = Scalar::one();
    let mut sum = Scalar::zero().to_float(precision + 32);
    let cutoff = Scalar::int(2).powi(-(precision as i64 + 20));
    for k in 1i64.. {
        let e = (2 * big_n + k - 1) * k;
        // exponent is always even
        let term = Scalar::int(4).powi(k) * qf.powi(e / 2);
        sum = sum + &term;
        if term < cutoff && k > 2 {
            break;
        }
    }
    let inner = (&one - q).recip() + sum / (&one - qf.powi(2 * big_n + 1));
    (inner / qf.powi(big_n)).to_float(precision)
}

const A_SANDWICH: &str = "q-Legendre character norms: l2 below l1 below C l2";

fn qleg_norm_sandwich(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n_max, kext) = (cx.size("N"), cx.size("K"));
    let prec = cx.prec();
    let floor = noise_floor(prec, &zero());
    let mut out = Vec::new();
    for q in cx.values("q") {
        let r = QLegendreRatios::new(q.clone())?;
        let big_n = r.big_n;
        let c = character_norm_constant(q, prec);
        out.push(Entry::info(
            &format!("q={q}: explicit constant"),
            A_SANDWICH,
            format!("C = {}, N = {big_n}", c.to_decimal(12)),
        ));
        let rows = cx.exec().map_range(0..n_max + 1, |n| {
            let kk = n + big_n + kext;
            let x = Scalar::one() - q.powi(n as i64);
            let alpha = eval_values(&r.cs, kk, &x);
            let h: Vec<Scalar> = (0..=kk + 40).map(|k| little_q_legendre_haar(q, k)).collect();
            let l1: Scalar = alpha.iter().zip(&h).map(|(a, w)| a.abs() * w).sum();
            let l2: Scalar = alpha.iter().zip(&h).map(|(a, w)| a.square() * w).sum();
            // envelope tails for indices n+N+j, j > kext; doubled to cover the rest
            let mut t1 = Scalar::zero();
            let mut t2 = Scalar::zero();
            for j in kext + 1..=kext + 40 {
                let e = ((2 * big_n + j + 1) * j / 2) as i64;
                let env = Scalar::int(4).powi(j as i64) * q.powi(e);
                let w = &h[n + big_n + j];
                t1 = t1 + &env * w;
                t2 = t2 + env.square() * w;
            }
            let (t1, t2) = (t1 * 2, t2 * 2);
            let pos = l2.clone();
            let lower = (&l1 - (&l2 + &t2)) / &l2;
            let upper = (&c * &l2 - (&l1 + &t1)) / &l2;
            (n, pos, lower, upper)
        });
        let (mut pos, mut lower, mut upper) = (Worst::new(), Worst::new(), Worst::new());
        for (n, p, lo, up) in rows {
            let at = move || format!("q={q}, n={n}");
            pos.see(p, at);
            lower.see(lo, at);
            upper.see(up, at);
        }
        out.push(pos.entry(&format!("q={q}: ||alpha||_2^2 > 0, n <= {n_max}"), A_SANDWICH, true, &zero()));
        out.push(lower.entry(
            &format!("q={q}: ||alpha||_2^2 < ||alpha||_1 (relative, tails included)"),
            A_SANDWICH,
            true,
            &zero(),
        ));
        out.push(upper.entry(
            &format!("q={q}: ||alpha||_1 < C ||alpha||_2^2 (relative, tails included)"),
            A_SANDWICH,
            true,
            &floor,
        ));
    }
    Ok(out)
}

/// `‖ε_1 - ε_0 + Σ_{n≤M} (q+1) q^{2n} (1-q) α_{1-q^n}‖_1` on `k ≤ K`, for
/// every `M` up to `m_max`.
pub fn idempotent_residuals(q: &Scalar, m_max: usize, k: usize, exec: Exec) -> Result<Vec<Scalar>, FamilyError> {
    let t = LinearizationTable::from_sequence(CoefficientSequence::little_q_legendre(q.clone())?);
    let chars = atom_characters(t.coefficients(), q, k, m_max, exec);
    let h = t.haar_prefix(k);
    let one = Scalar::one();
    let mut v = vec![Scalar::zero(); k + 1];
    v[0] = -one.clone();
    v[1] = h[1].recip();
    let mut out = Vec::with_capacity(m_max + 1);
    for (n, row) in chars.iter().enumerate() {
        let w = (q + 1) * q.powi(2 * n as i64) * (&one - q);
        for (vk, a) in v.iter_mut().zip(row) {
            *vk = &*vk + &w * a;
        }
        out.push(v.iter().zip(&h).map(|(x, hk)| x.abs() * hk).sum());
    }
    Ok(out)
}

const A_IDEMPOTENT: &str = "q-Legendre l1 algebra is spanned by idempotents";

fn qleg_idempotents(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (m, k) = (cx.size("M"), cx.size("K"));
    let mut out = Vec::new();
    for q in cx.values("q") {
        let t = LinearizationTable::from_sequence(CoefficientSequence::little_q_legendre(q.clone())?);
        let diff = t.epsilon(0).sub(&t.epsilon(1));
        let bad = (0..=10).find(|&n| fourier(&t, &diff, &(Scalar::one() - q.powi(n))) != (q + 1) * q.powi(n));
        out.push(Entry::flag(
            &format!("q={q}: (eps_0 - eps_1)^(1-q^n) = (q+1) q^n, n <= 10"),
            A_IDEMPOTENT,
            bad.is_none(),
        ));
        let res = idempotent_residuals(q, m, k, cx.exec())?;
        let mut worst = Worst::new();
        for w in 0..res.len().saturating_sub(1) {
            worst.see(&res[w] - &res[w + 1], || format!("M = {w}"));
        }
        out.push(worst.entry(
            &format!("q={q}: residual strictly decreasing in M <= {m}"),
            A_IDEMPOTENT,
            true,
            &zero(),
        ));
        let last = res.last().cloned().unwrap_or_else(Scalar::zero);
        out.push(
            Entry::within(
                &format!("q={q}: residual at M={m}, K={k} below 1e-6"),
                A_IDEMPOTENT,
                &last,
                &Scalar::ratio(1, 1_000_000),
            )
            .note(format!("R = {}", fmt_scalar(&last))),
        );
    }
    Ok(out)
}

const A_CHAR_LIMIT: &str = "q-Legendre: the sufficient conditions for weak amenability fail";

fn qleg_character_limit(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n, terms, k, lo) = (cx.size("N"), cx.size("T"), cx.size("K"), cx.size("lo"));
    let prec = cx.prec();
    let mut out = Vec::new();
    for q in cx.values("q") {
        let t = LinearizationTable::from_sequence(CoefficientSequence::little_q_legendre(q.clone())?);
        let x = Scalar::one() - q.powi(n as i64);
        let direct = eval_values(t.coefficients(), n, &x)[n].clone();
        let series = character_limit_series(q, terms, prec);
        let gap = (&series.value - &direct).abs();
        out.push(
            Entry::within(
                &format!("q={q}: limit series vs P_{n}(1-q^{n})"),
                A_CHAR_LIMIT,
                &gap,
                &Scalar::ratio(1, 100_000),
            )
            .note(format!("series {}, direct {}", series.value.to_decimal(10), direct.to_decimal(10))),
        );
        let chars = atom_characters(t.coefficients(), q, n, k, cx.exec());
        let mu = q_measure(q, k)?;
        let h = t.haar_prefix(n);
        let ints: Vec<_> = (lo..=n).map(|j| integrate_power_from(&chars, &mu, &h, j, 4)).collect();
        let mut worst = Worst::new();
        for (i, w) in ints.windows(2).enumerate() {
            worst.see(&w[1].value - &w[0].value - &w[0].tail_bound, || format!("n = {}", lo + i));
        }
        out.push(worst.entry(
            &format!("q={q}: int p_n^4 strictly increasing on [{lo}, {n}]"),
            A_CHAR_LIMIT,
            true,
            &zero(),
        ));
    }
    for q in [Scalar::ratio(1, 2), Scalar::ratio(3, 4)] {
        let s = character_limit_series(&q, 2, prec);
        let d = &s.gammas[0] - &s.gammas[1];
        out.push(Entry::info(
            &format!("q={q}: sign of gamma_0 - gamma_1"),
            A_CHAR_LIMIT,
            format!("gamma_0 - gamma_1 = {} (reported only)", fmt_scalar(&d)),
        ));
    }
    Ok(out)
}

const A_RATIO: &str = "q-Legendre characters: uniform ratio bound and decay envelope";

fn qleg_ratio_bound(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n_max, kext, depth) = (cx.size("N"), cx.size("K"), cx.size("depth"));
    let mut out = Vec::new();
    for q in cx.values("q") {
        let r = QLegendreRatios::new(q.clone())?;
        let k_max = r.big_n + kext;
        let reps = cx.exec().map_range(0..n_max + 1, |n| ratio_bound_check_with(&r, n, k_max, depth));
        let (mut ratio, mut env, mut cf) = (Worst::new(), Worst::new(), Worst::new());
        let mut zeros = Vec::new();
        let mut contained = true;
        for rep in reps {
            let rep = rep?;
            let n = rep.n;
            ratio.see(rep.ratio_margin.clone(), || format!("n={n}, index {}", rep.max_ratio_at));
            env.see(rep.envelope_margin.clone(), || format!("n={n}, index {}", rep.envelope_at));
            cf.see(&rep.cf_tail - &rep.cf_gap, || format!("n={n}"));
            contained &= rep.cf_contained;
            zeros.extend(rep.zero_indices.iter().map(|z| (n, *z)));
        }
        let n_big = r.big_n;
        out.push(
            Entry::flag(&format!("q={q}: alpha(n+k) != 0 for N <= k <= N+{kext}"), A_RATIO, zeros.is_empty()).witness(format!("{zeros:?}")),
        );
        out.push(ratio.entry(
            &format!("q={q}: 4 - |alpha(n+k+1)/(alpha(n+k) q^(k+1))| > 0, N = {n_big}"),
            A_RATIO,
            true,
            &zero(),
        ));
        out.push(env.entry(&format!("q={q}: envelope 4^k q^((2N+k+1)k/2), relative"), A_RATIO, false, &zero()));
        out.push(cf.entry(
            &format!("q={q}: continued fraction psi_(n,k) matches character ratio within its tail bound"),
            A_RATIO,
            false,
            &zero(),
        ));
        out.push(Entry::flag(&format!("q={q}: psi_(n,k) lies in [2/3, 2]"), A_RATIO, contained));
    }
    // ratio limit at the first few atoms
    let q = Scalar::ratio(1, 2);
    let cs = CoefficientSequence::little_q_legendre(q.clone())?;
    let mut worst = Scalar::zero();
    let mut at = 0;
    for n in 0..=5usize {
        let x = Scalar::one() - q.powi(n as i64);
        let v = eval_values(&cs, n + 61, &x);
        let ratio = (&v[n + 61] / (&v[n + 60] * q.powi(61))).abs();
        let gap = (ratio - Scalar::one()).abs();
        if gap > worst {
            worst = gap;
            at = n;
        }
    }
    out.push(
        Entry::within(
            "q=1/2: ratio tends to 1, |ratio - 1| at k = 60, n <= 5",
            A_RATIO,
            &worst,
            &Scalar::ratio(1, 1_000_000),
        )
        .witness(format!("n = {at}")),
    );
    Ok(out)
}

const A_AB: &str = "q-Legendre: bounds on A_n and B_n";

fn qleg_ab_bounds(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n_max, kext, l) = (cx.size("N"), cx.size("K"), cx.size("L"));
    let mut out = Vec::new();
    for q in cx.values("q") {
        let r = QLegendreRatios::new(q.clone())?;
        let big_n = r.big_n;
        let rows = cx.exec().map_range(0..n_max + 1, |n| {
            let mut a = Worst::new();
            let mut b = Worst::new();
            for k in big_n..=big_n + kext {
                let ab = r.ab(n, k);
                a.see(&ab.a_shifted - Scalar::int(4), || format!("n={n}, k={k}"));
                b.see(&ab.b - (q * 2).recip(), || format!("n={n}, k={k}"));
            }
            let lim = r.ab(n, l).b_minus_limit.abs();
            (a, b, (lim, n))
        });
        let (mut a, mut b) = (Worst::new(), Worst::new());
        let mut lim = (Scalar::zero(), 0);
        for (ra, rb, rl) in rows {
            a.merge(ra);
            b.merge(rb);
            if rl.0 > lim.0 {
                lim = rl;
            }
        }
        out.push(a.entry(&format!("q={q}: A_n(n+k) > 4 for N <= k <= N+{kext}"), A_AB, true, &zero()));
        out.push(b.entry(&format!("q={q}: B_n(k) > 1/(2q) for N <= k <= N+{kext}"), A_AB, true, &zero()));
        out.push(
            Entry::within(
                &format!("q={q}: |B_n({l}) - 1/q| < 1e-6"),
                A_AB,
                &lim.0,
                &Scalar::ratio(1, 1_000_000),
            )
            .witness(format!("n = {}", lim.1)),
        );
    }
    Ok(out)
}

const A_SQNORM: &str = "q-Legendre: squared norm of the character at an atom";

fn qleg_l2_norm(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n_max, kext) = (cx.size("N"), cx.size("K"));
    let mut out = Vec::new();
    for q in cx.values("q") {
        let cs = CoefficientSequence::little_q_legendre(q.clone())?;
        let mut worst = (Scalar::zero(), 0);
        for n in 0..=n_max {
            let kk = n + kext;
            let x = Scalar::one() - q.powi(n as i64);
            let v = eval_values(&cs, kk, &x);
            let l2: Scalar = v.iter().enumerate().map(|(k, a)| a.square() * little_q_legendre_haar(q, k)).sum();
            let closed = (q.powi(n as i64) * (Scalar::one() - q)).recip();
            let gap = (l2 - closed).abs();
            if gap > worst.0 {
                worst = (gap, n);
            }
        }
        out.push(
            Entry::within(
                &format!("q={q}: |sum_(k<=n+{kext}) alpha(k)^2 h(k) - 1/(q^n(1-q))| < 1e-10, n <= {n_max}"),
                A_SQNORM,
                &worst.0,
                &Scalar::ratio(1, 10_000_000_000),
            )
            .witness(format!("n = {}", worst.1)),
        );
    }
    Ok(out)
}

const A_PARTIAL: &str = "q-Legendre: partial sums of Haar weights";

fn qleg_haar_sums(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let n = cx.size("N");
    let mut out = Vec::new();
    for q in cx.values("q") {
        let sums = haar_partial_sums(q, n)?;
        let bad = sums.iter().find(|s| s.lhs != s.rhs);
        let mut e = Entry::flag(
            &format!("q={q}: sum_(k<=n) h(k) equals closed form, n <= {n}"),
            A_PARTIAL,
            bad.is_none(),
        );
        e = match bad {
            Some(s) => e.witness(format!("n = {}", s.n)),
            None if sums.len() > 2 => e.note(format!("n=2 value {}", fmt_scalar(&sums[2].lhs))),
            None => e,
        };
        out.push(e);
        let mut worst = Worst::new();
        for s in &sums {
            worst.see(s.margin.clone(), || format!("n = {}", s.n));
        }
        out.push(worst.entry(&format!("q={q}: sum_(k<=n) h(k) < h(n)/(1-q)"), A_PARTIAL, true, &zero()));
    }
    Ok(out)
}

// ------------------------------------------------------------------ Pollaczek

const A_MONOTONE: &str = "Pollaczek: c_n strictly increasing";
const A_PROPERTY_P_POLL: &str = "Pollaczek: nonnegative linearization";

fn poll_monotone(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n, pn) = (cx.size("N"), cx.size("P"));
    let points = cx.poll_points(false)?;
    let rows = cx.exec().map(&points, |p| -> Result<_, FamilyError> {
        let cs = CoefficientSequence::pollaczek(p.clone())?;
        let c = cs.prefix(n);
        let mut w = Worst::new();
        for k in 1..n {
            w.see(&c[k + 1].c - &c[k].c, || format!("{} n={k}", point(p)));
        }
        let far = (&c[n].c - Scalar::ratio(1, 2)).abs();
        let first = (c[1].c.clone(), c.get(2).map(|t| t.c.clone()));
        let prop = LinearizationTable::from_sequence(cs).property_p_check(pn, Exec::Sequential);
        Ok((w, far, first, prop.min_value.value.clone(), prop.sums_ok))
    });
    let (mut mono, mut far, mut pp) = (Worst::new(), Worst::new(), Worst::new());
    let mut sums_ok = true;
    let mut first = None;
    for (p, row) in points.iter().zip(rows) {
        let (w, f, fst, minp, ok) = row?;
        mono.merge(w);
        far.see(Scalar::ratio(1, 20) - f, || point(p));
        pp.see(minp, || point(p));
        sums_ok &= ok;
        if first.is_none() {
            first = Some(fst);
        }
    }
    let mut e = mono.entry(&format!("c_(n+1) - c_n > 0 for n < {n}"), A_MONOTONE, true, &zero());
    if let (1, Some((c1, Some(c2)))) = (points.len(), first) {
        e = e.note(format!("c_1 = {} < c_2 = {}", fmt_scalar(&c1), fmt_scalar(&c2)));
    }
    Ok(vec![
        e,
        far.entry(&format!("|c_{n} - 1/2| < 5e-2"), A_MONOTONE, true, &zero()),
        pp.entry(&format!("min g(m,n;k) >= 0 for m,n <= {pn}"), A_PROPERTY_P_POLL, false, &zero()),
        Entry::flag(&format!("sum_k g(m,n;k) = 1 for m,n <= {pn}"), A_PROPERTY_P_POLL, sums_ok),
    ])
}

/// `½(1 - √max(0, 1-4φ(n+1))) - c_n` decided exactly; the returned margin
/// is `(1-2c_n)² - max(0, D)` (positive iff the bound holds, given
/// `1 - 2c_n > 0`).
fn phi_bound_margin(p: &PollaczekParams, n: usize, c: &Scalar) -> Scalar {
    let d = Scalar::one() - phi(p, &Scalar::int(n as i64 + 1)) * 4;
    let d = d.max(Scalar::zero());
    let s = Scalar::one() - c * 2;
    if !s.is_positive() {
        return s;
    }
    s.square() - d
}

/// `ι(n) - c_n` decided on squares: `F²(1-2c)² - E` when `1-2c > 0`.
fn iota_margin(p: &PollaczekParams, n: usize, c: &Scalar) -> Scalar {
    let (e, f) = iota_parts(p, &Scalar::int(n as i64));
    let s = Scalar::one() - c * 2;
    if !s.is_positive() {
        return s;
    }
    (f * s).square() - e
}

const A_PHI_BOUND: &str = "Pollaczek: c_n below the phi bound";
const A_LAGUERRE_FORM: &str = "Pollaczek: Laguerre ratio form of c_n";

fn poll_phi_bound(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n, l) = (cx.size("N"), cx.size("L"));
    let points = cx.poll_points(false)?;
    let rows = cx.exec().map(&points, |p| -> Result<_, FamilyError> {
        let cs = CoefficientSequence::pollaczek(p.clone())?;
        let c = cs.prefix(n.max(l));
        let mut w = Worst::new();
        for k in 0..=n {
            w.see(phi_bound_margin(p, k, &c[k].c), || format!("{} n={k}", point(p)));
        }
        let lag = pollaczek_c_via_laguerre(p, l);
        let bad = (1..=l).find(|&k| lag[k] != c[k].c);
        Ok((w, bad))
    });
    let mut worst = Worst::new();
    let mut mismatch = None;
    for (p, row) in points.iter().zip(rows) {
        let (w, bad) = row?;
        worst.merge(w);
        if let (None, Some(k)) = (&mismatch, bad) {
            mismatch = Some(format!("{} n={k}", point(p)));
        }
    }
    let mut e = Entry::flag(
        &format!("Laguerre form equals forward recursion, n <= {l}"),
        A_LAGUERRE_FORM,
        mismatch.is_none(),
    );
    if let Some(w) = mismatch {
        e = e.witness(w);
    }
    Ok(vec![
        worst
            .entry(
                &format!("c_n < (1 - sqrt(max(0, 1 - 4 phi(n+1))))/2, n <= {n}"),
                A_PHI_BOUND,
                true,
                &zero(),
            )
            .note("margin is (1-2c_n)^2 - max(0, 1-4phi(n+1))"),
        e,
    ])
}

const A_SUPPORT: &str = "random-walk families are supported on [-omega, omega]";
const A_TRANSFORM: &str = "Pollaczek polynomials as rescaled random-walk polynomials";

fn poll_transform(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n, s) = (cx.size("N"), cx.size("S"));
    let prec = cx.prec();
    let ctx = NumCtx::float(prec);
    let points = cx.poll_points(true)?;
    let xs = [
        Scalar::zero(),
        Scalar::ratio(1, 3),
        Scalar::ratio(1, 2),
        Scalar::ratio(-3, 4),
        Scalar::one(),
    ];
    let rows = cx.exec().map(&points, |p| -> Result<_, FamilyError> {
        let tb = transform_params(&p.alpha, &p.lambda, &p.nu, &ctx)?;
        let rw = CoefficientSequence::random_walk(tb.random_walk(false))?;
        let table = rw.float_table(n, prec);
        let poll = CoefficientSequence::pollaczek(p.clone())?;
        let omega = tb.omega.to_float(prec);
        let den = eval_values(&table, n, &omega);
        let positive = den.iter().all(Scalar::is_positive);
        let mut gap = Worst::new();
        for x in &xs {
            let direct = eval_values(&poll, n, x);
            let via = eval_values(&table, n, &(&omega * x));
            for k in 0..=n {
                let diff = (&via[k] / &den[k] - &direct[k]).abs() / direct[k].abs().max(Scalar::one());
                gap.see(-diff, || format!("{} n={k} x={x}", point(p)));
            }
        }
        let tilde = CoefficientSequence::random_walk(tb.random_walk(true))?;
        let si = support_interval(&tilde.float_table(s, prec), s, &ctx)?;
        let si_plain = support_interval(&rw.float_table(s, prec), s, &ctx)?;
        let end_gap = (&si.endpoint - &omega).abs().max((&si_plain.endpoint - &omega).abs());
        Ok((positive, gap, end_gap, si.premise_ok))
    });
    let tol = Scalar::int(2).powi(-(prec as i64 - 40));
    let mut positive = true;
    let mut gap = Worst::new();
    let mut ends = (Scalar::zero(), String::new());
    let mut premise = true;
    for (p, row) in points.iter().zip(rows) {
        let (pos, g, e, pr) = row?;
        positive &= pos;
        gap.merge(g);
        premise &= pr;
        if e > ends.0 {
            ends = (e, point(p));
        }
    }
    let worst_gap = gap.margin.clone().map(|m| -m).unwrap_or_else(Scalar::zero);
    Ok(vec![
        Entry::flag(&format!("S_n(omega) > 0, n <= {n}"), A_TRANSFORM, positive),
        Entry::within(
            &format!("Q_n(x) = S_n(omega x)/S_n(omega), n <= {n}, relative"),
            A_TRANSFORM,
            &worst_gap,
            &tol,
        )
        .witness(gap.at),
        Entry::flag("tilde coefficients nondecreasing (support premise)", A_SUPPORT, premise),
        Entry::within(
            &format!("support endpoints from c_{s} within 1e-3 of omega"),
            A_SUPPORT,
            &ends.0,
            &Scalar::ratio(1, 1000),
        )
        .witness(ends.1),
    ])
}

const A_CHI: &str = "random walk: the ratio S_n/tilde S_n at omega has a positive limit";

fn poll_chi(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let n = cx.size("N");
    let prec = cx.prec();
    let floor = noise_floor(prec, &zero());
    let mut out = Vec::new();
    for a in cx.values("a") {
        for b in cx.values("b") {
            for nu in cx.values("nu") {
                let p = RandomWalkParams::new(a.clone(), b.clone(), nu.clone(), false)?;
                let tag = format!("(a, b, nu) = ({a}, {b}, {nu})");
                let c = chi_tau(&p, n, &NumCtx::float(prec)).map_err(|e| VerifyError::Param {
                    name: "a".into(),
                    msg: e.to_string(),
                })?;
                let id_tol = Scalar::int(2).powi(-(prec as i64 - 40));
                out.push(Entry::within(
                    &format!("{tag}: chi_n(1 - chi_(n-1)) = lambda_n/omega^2, relative"),
                    A_CHI,
                    &c.identity_residual,
                    &id_tol,
                ));
                out.push(Entry::within(
                    &format!("{tag}: chi_1 = c_1/omega^2"),
                    A_CHI,
                    &c.chi1_residual,
                    &id_tol,
                ));
                // with Δλ ≥ 0 every term of the gap recursion is nonnegative, so
                // its float value cannot change sign
                let gap_floor = if c.min_delta_lambda.is_exact() && !c.min_delta_lambda.is_negative() {
                    zero()
                } else {
                    floor.clone()
                };
                out.push(
                    Entry::bound(
                        &format!("{tag}: chi_n <= tilde chi_n, n <= {} (relative gap)", 2 * n),
                        A_CHI,
                        &c.min_rel_gap,
                        false,
                        &gap_floor,
                    )
                    .witness(format!("{:?}", c.chi_le_violation))
                    .note(format!("min tilde lambda_n - lambda_n = {}", fmt_scalar(&c.min_delta_lambda))),
                );
                out.push(
                    Entry::within(
                        &format!("{tag}: gap recursion agrees with direct subtraction"),
                        A_CHI,
                        &c.gap_route_diff,
                        &floor,
                    )
                    .note(format!("smallest direct gap {}", fmt_scalar(&c.min_chi_gap))),
                );
                out.push(
                    Entry::bound(
                        &format!("{tag}: tilde chi_n strictly increasing"),
                        A_CHI,
                        &c.min_tilde_increment,
                        true,
                        &floor,
                    )
                    .witness(format!("{:?}", c.tilde_increase_violation)),
                );
                out.push(
                    Entry::within(
                        &format!("{tag}: |r_(2n) - r_n| < 1e-6 at n = {n}"),
                        A_CHI,
                        &c.cauchy_gap,
                        &Scalar::ratio(1, 1_000_000),
                    )
                    .note(format!("tau estimate {}", c.tau_estimate.to_decimal(12))),
                );
                out.push(Entry::bound(&format!("{tag}: tau > 0"), A_CHI, &c.tau_estimate, true, &floor));
            }
        }
    }
    Ok(out)
}

const A_PSI: &str = "Pollaczek: psi recursion stays above its lower bound";

fn poll_psi(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let n = cx.size("N");
    let prec = cx.prec();
    let ctx = NumCtx {
        mode: crate::scalar::Mode::Auto,
        precision: prec,
    };
    let floor = noise_floor(prec, &zero());
    let points = cx.poll_points(true)?;
    let rows = cx.exec().map(&points, |p| -> Result<_, FamilyError> {
        let tb = transform_params(&p.alpha, &p.lambda, &p.nu, &ctx)?;
        Ok(pollaczek_psi(&tb, n, prec))
    });
    let (mut bound, mut base) = (Worst::new(), Worst::new());
    let mut prod_gap = (Scalar::zero(), String::new());
    let mut positive = true;
    let mut float_base = false;
    for (p, row) in points.iter().zip(rows) {
        let rep = row?;
        bound.see(rep.min_rel_margin.clone(), || format!("{} n={}", point(p), rep.min_at));
        match rep.base_case_margin {
            Some(m) => base.see(m, || point(p)),
            None => float_base = true,
        }
        positive &= rep.positive;
        if rep.product_gap > prod_gap.0 {
            prod_gap = (rep.product_gap.clone(), point(p));
        }
    }
    let mut out = vec![
        Entry::flag(&format!("psi_n > 0, n <= {n}"), A_PSI, positive),
        bound.entry(
            &format!("psi_n >= gamma (2 lambda n + 2 lambda nu + 2 alpha + 1)/(... - 2 lambda), 2 <= n <= {n}, relative"),
            A_PSI,
            false,
            &floor,
        ),
        base.entry("n = 1 case, decided on squares", A_PSI, false, &zero()),
        Entry::within(
            "prod_(k<=n) psi_k equals tilde S_n(rho), relative",
            A_PSI,
            &prod_gap.0,
            &Scalar::int(2).powi(-(prec as i64 - 40)),
        )
        .witness(prod_gap.1),
    ];
    if float_base {
        out.push(Entry::info(
            "n = 1 case",
            A_PSI,
            "float parameters: base case only covered by the float sweep".into(),
        ));
    }
    // the worked point
    let p = PollaczekParams::ratios((0, 1), (1, 4), (0, 1))?;
    let tb = transform_params(&p.alpha, &p.lambda, &p.nu, &ctx)?;
    let rep = pollaczek_psi(&tb, 2, prec);
    let s3 = NumCtx::float(prec).sqrt(&Scalar::int(3))?;
    let expected = Scalar::int(17) / (Scalar::int(12) * &s3);
    let gap = (&rep.psi[1] - &expected).abs();
    out.push(Entry::within(
        "worked point (0, 1/4, 0): psi_2 = 17/(12 sqrt 3)",
        A_PSI,
        &gap,
        &floor,
    ));
    out.push(Entry::bound(
        "worked point (0, 1/4, 0): psi_2 - 4/(3 sqrt 3) > 0",
        A_PSI,
        &(&rep.psi[1] - Scalar::int(4) / (Scalar::int(3) * s3)),
        true,
        &floor,
    ));
    Ok(out)
}

const A_GROWTH: &str = "Pollaczek: bounded point derivation at 0";

fn poll_growth_bounds(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (na, nb, nc) = (cx.size("A"), cx.size("B"), cx.size("C"));
    let prec = cx.prec();
    let ctx = NumCtx {
        mode: crate::scalar::Mode::Auto,
        precision: prec,
    };
    let floor = noise_floor(prec, &zero());
    let mut points = cx.poll_points(true)?;
    let case1 = PollaczekParams::ratios((0, 1), (1, 5), (0, 1))?;
    let defaults = cx.params["alpha"].len() > 1;
    if defaults && !points.contains(&case1) {
        points.push(case1);
    }
    let rows = cx.exec().map(&points, |p| pollaczek_claims_ab(p, na, nb, nc, &ctx));
    let (mut a, mut b, mut base, mut c1) = (Worst::new(), Worst::new(), Worst::new(), Worst::new());
    let mut even = true;
    let mut in_case1 = Vec::new();
    for (p, row) in points.iter().zip(rows) {
        let rep = row?;
        a.see(rep.a_min_rel_margin.clone(), || format!("{} n={}", point(p), rep.a_min_at));
        b.see(rep.b_min_rel_margin.clone(), || format!("{} n={}", point(p), rep.b_min_at));
        if let Some(m) = rep.b_base_exact {
            base.see(m, || point(p));
        }
        even &= rep.even_derivatives_vanish;
        if let (Some(m), Some(at)) = (rep.case1_min_margin, rep.case1_min_at) {
            c1.see(m, || format!("{} n={at}", point(p)));
            in_case1.push(point(p));
        }
        debug_assert_eq!(rep.case1_region, in_case1_region(p));
    }
    Ok(vec![
        Entry::flag("S'_(2n)(0) = 0", A_GROWTH, even),
        a.entry(&format!("a^n |S'_(2n+1)(0)| <= 2n+1, n <= {na}, relative"), A_GROWTH, false, &floor),
        b.entry(
            &format!(
                "tilde S_n(rho) >= gamma^n (2 lambda n + 2 lambda nu + 2 alpha + 1)/(2 lambda nu + 2 alpha + 1), 2 <= n <= {nb}, relative"
            ),
            A_GROWTH,
            false,
            &floor,
        ),
        base.entry("n = 1 case of the tilde S bound, decided on squares", A_GROWTH, false, &zero()),
        c1.entry(
            &format!("1/4 - c_n a_(n-1) >= 0 in the first case, n <= {nc}"),
            A_GROWTH,
            false,
            &zero(),
        )
        .note(format!("{} points in the first-case region", in_case1.len())),
    ])
}

const A_APPENDIX: &str = "Pollaczek coefficient comparisons";

fn coefficient_comparisons(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let n = cx.size("N");
    let ctx = NumCtx::float(cx.prec().max(128));
    let points = cx.poll_points(false)?;
    let rows = cx.exec().map(&points, |p| -> Result<_, FamilyError> {
        let c = CoefficientSequence::pollaczek(p.clone())?.prefix(n);
        let c_l0 = CoefficientSequence::pollaczek(p.with_lambda_zero())?.prefix(n);
        let c_n0 = CoefficientSequence::pollaczek(p.with_nu_zero())?.prefix(n);
        let c_00 = CoefficientSequence::pollaczek(p.with_lambda_zero().with_nu_zero())?.prefix(n);
        let (mut i, mut ii, mut iii, mut half) = (Worst::new(), Worst::new(), Worst::new(), Worst::new());
        for k in 0..=n {
            i.see(&c_l0[k].c - &c[k].c, || format!("{} n={k}", point(p)));
            if k >= 1 {
                iii.see(iota_margin(p, k, &c_n0[k].c), || format!("{} n={k}", point(p)));
                half.see(Scalar::ratio(1, 2) - &c_00[k].c, || format!("{} n={k}", point(p)));
            }
        }
        let mut crit = None;
        if in_small_lambda_regime(p) {
            let cp = critical_points(p, &ctx)?;
            let top = cp.x_star_star.floor();
            let top = usize::try_from(top).unwrap_or(0).min(n);
            for k in 0..=top {
                ii.see(&c_n0[k].c - &c[k].c, || format!("{} n={k} (floor x** = {top})", point(p)));
            }
            crit = Some((phi_prime(p, &cp.x_star).abs(), point(p)));
        }
        Ok((i, ii, iii, half, crit))
    });
    let (mut i, mut ii, mut iii, mut half) = (Worst::new(), Worst::new(), Worst::new(), Worst::new());
    let mut crit = (Scalar::zero(), String::new());
    let mut regime = 0;
    for row in rows {
        let (a, b, c, d, e) = row?;
        i.merge(a);
        ii.merge(b);
        iii.merge(c);
        half.merge(d);
        if let Some((v, at)) = e {
            regime += 1;
            if v > crit.0 {
                crit = (v, at);
            }
        }
    }
    let mut out = vec![
        i.entry(&format!("c_n <= c_n(lambda=0), n <= {n}"), A_APPENDIX, false, &zero()),
        ii.entry(
            "c_n <= c_n(nu=0) for n <= floor(x**) when 0 < lambda < 1/2 - |alpha|",
            A_APPENDIX,
            false,
            &zero(),
        )
        .note(format!("{regime} points in the small-lambda regime")),
        iii.entry(&format!("c_n(nu=0) < iota(n), 1 <= n <= {n}"), A_APPENDIX, true, &zero())
            .note("margin is F^2 (1-2c)^2 - E with iota = (1 - sqrt(E)/F)/2"),
        half.entry(&format!("ultraspherical c_n < 1/2, n <= {n}"), A_APPENDIX, true, &zero()),
    ];
    if regime > 0 {
        out.push(
            Entry::within(
                "phi'(x*) = 0",
                A_APPENDIX,
                &crit.0,
                &Scalar::int(2).powi(-(ctx.precision as i64 - 40)),
            )
            .witness(crit.1),
        );
    }
    Ok(out)
}

const A_TURAN: &str = "Turan inequality";

fn turan(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n, d) = (cx.size("N"), cx.size("grid"));
    let prec = cx.prec();
    let ctx = NumCtx {
        mode: crate::scalar::Mode::Auto,
        precision: prec,
    };
    let floor = noise_floor(prec, &zero());
    let xs = unit_grid(d as i64);
    let points = cx.poll_points(true)?;
    let mut non_neg = Worst::new();
    let mut strict = true;
    let mut indeterminate = 0;
    let mut negative = Vec::new();
    for p in &points {
        let tb = transform_params(&p.alpha, &p.lambda, &p.nu, &ctx)?;
        for tilde in [true, false] {
            let cs = CoefficientSequence::random_walk(tb.random_walk(tilde))?;
            let rep = turan_check(&cs, &xs, n, prec, cx.exec());
            let fam = if tilde { "tilde S" } else { "S" };
            non_neg.see(rep.min_rel.clone(), || {
                format!("{fam} {} n={} x={}", point(p), rep.min_at.0, rep.min_at.1)
            });
            strict &= rep.strict_interior;
            indeterminate += rep.indeterminate.len();
            negative.extend(rep.negative.iter().map(|(k, x)| format!("{fam} {} n={k} x={x}", point(p))));
        }
    }
    let mut out = vec![
        non_neg.entry(
            &format!("S_n^2 - S_(n+1) S_(n-1) >= 0 on the 1/{d} grid, n <= {n}, relative"),
            A_TURAN,
            false,
            &floor,
        ),
        Entry::flag("no point below minus the noise floor", A_TURAN, negative.is_empty())
            .witness(negative.first().cloned().unwrap_or_default()),
        Entry::new(
            "strictly positive at interior grid points",
            A_TURAN,
            if !strict {
                Status::Fail
            } else if indeterminate > 0 {
                Status::Indeterminate
            } else {
                Status::Pass
            },
        )
        .note(format!("{indeterminate} interior values within noise")),
    ];
    // Laguerre at x = -2 lambda, nu = 0
    let mut lag = Worst::new();
    let mut strict_ok = true;
    let mut lambdas: Vec<Scalar> = cx.values("lambda").to_vec();
    lambdas.dedup();
    for a in cx.values("alpha") {
        for l in &lambdas {
            let rep = laguerre_turan(&(a * 2), &-(l * 2), n);
            lag.see(rep.min_margin.clone(), || format!("alpha={a}, lambda={l}, n={}", rep.min_at));
            if l.is_positive() {
                strict_ok &= rep.all_positive;
            }
        }
    }
    out.push(lag.entry(
        &format!("normalized Laguerre Turan at x = -2 lambda, n <= {n}"),
        "Turan inequality for Laguerre polynomials",
        false,
        &zero(),
    ));
    out.push(Entry::flag(
        "strict for lambda > 0",
        "Turan inequality for Laguerre polynomials",
        strict_ok,
    ));
    Ok(out)
}

// --------------------------------------------------------------------- chains

const A_CHAIN: &str = "chain sequences and parameter sequences";
const A_WORPITZKY: &str = "Worpitzky containment";

fn chain_basics(cx: &Cx) -> Result<Vec<Entry>, VerifyError> {
    let (n, trials, pn) = (cx.size("N"), cx.size("trials"), cx.size("P"));
    let mut out = Vec::new();
    let quarter = ChainSequenceProbe::constant(Scalar::ratio(1, 4));
    let m = minimal_parameters(&quarter, n);
    let ok = m.values().is_some_and(|v| {
        v.iter().enumerate().all(|(k, x)| *x == Scalar::ratio(k as i64, 2 * k as i64 + 2)) && v.windows(2).all(|w| w[0] < w[1])
    });
    out.push(Entry::flag(
        &format!("constant 1/4: minimal m_n = n/(2n+2), strictly increasing, n <= {n}"),
        A_CHAIN,
        ok,
    ));
    let bad = ChainSequenceProbe::from_values(vec![Scalar::ratio(9, 10), Scalar::ratio(9, 10)]);
    let cert = matches!(minimal_parameters(&bad, 2), ParameterOutcome::NotChain { n: 2, .. });
    out.push(Entry::flag(
        "0.9, 0.9 is certified not to be a chain sequence at n = 2",
        A_CHAIN,
        cert,
    ));

    let tol = Scalar::int(2).powi(-40);
    let prec = cx.prec();
    match maximal_parameters(&ChainSequenceProbe::constant(Scalar::ratio(3, 16)), n, 2 * n, &tol, prec) {
        Ok(est) => {
            let gap = est
                .values
                .iter()
                .map(|v| (v - Scalar::ratio(3, 4)).abs())
                .fold(Scalar::zero(), Scalar::max);
            out.push(Entry::within(
                &format!("constant 3/16: maximal M_n = 3/4, n <= {n}"),
                A_CHAIN,
                &gap,
                &Scalar::ratio(1, 1_000_000_000_000),
            ));
            out.push(Entry::flag(
                "maximal parameters nonincreasing",
                A_CHAIN,
                est.nonincreasing == Some(true),
            ));
        }
        Err(e) => out.push(Entry::flag("constant 3/16: maximal parameters", A_CHAIN, false).note(e.to_string())),
    }

    let p = PollaczekParams::ratios((0, 1), (1, 4), (0, 1))?;
    let cs = CoefficientSequence::pollaczek(p.clone())?;
    let probe = ChainSequenceProbe::pollaczek_phi(p)?;
    let m = minimal_parameters(&probe, pn);
    let ok = m.values().is_some_and(|v| v.iter().enumerate().all(|(k, x)| *x == cs.c(k)));
    out.push(Entry::flag(
        &format!("Pollaczek (0, 1/4, 0): minimal parameters of phi are c_n, n <= {pn}"),
        A_CHAIN,
        ok,
    ));
    let loose = Scalar::ratio(1, 100_000);
    match maximal_parameters(&probe, 50, 128, &loose, prec) {
        Ok(est) => {
            let mut w = Worst::new();
            for k in 1..=50 {
                w.see(&est.values[k] - cs.c(k), || format!("n = {k}"));
            }
            out.push(w.entry(
                "Pollaczek (0, 1/4, 0): maximal M_n > c_n, n <= 50",
                A_CHAIN,
                true,
                &noise_floor(prec, &zero()),
            ));
        }
        Err(e) => out.push(Entry::flag("Pollaczek (0, 1/4, 0): maximal parameters", A_CHAIN, false).note(e.to_string())),
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cx.opts.seed);
    let mut fails = Vec::new();
    for t in 0..trials {
        let depth = rng.gen_range(1..=30);
        let parts: Vec<Scalar> = (0..depth).map(|_| Scalar::ratio(rng.gen_range(1..250), 1000)).collect();
        let q = worpitzky_cf(|j| parts[j - 1].clone(), depth);
        if q.contained != Some(true) {
            fails.push(t);
        }
    }
    out.push(
        Entry::flag(
            &format!("random partials in (0, 1/4): value in [2/3, 2], {trials} trials"),
            A_WORPITZKY,
            fails.is_empty(),
        )
        .witness(format!("seed {}; failing trials {:?}", cx.opts.seed, fails)),
    );
    let q = worpitzky_cf(|_| Scalar::ratio(1, 8), 80);
    let two = NumCtx::float(prec).sqrt(&Scalar::int(2))?;
    let expected = Scalar::int(4) - two * 2;
    out.push(Entry::within(
        "constant 1/8: value 4 - 2 sqrt 2",
        A_WORPITZKY,
        &(&q.value - expected).abs(),
        &q.tail_bound.unwrap_or_else(Scalar::one),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str, params: &[(&str, &str)], sizes: &[(&str, usize)]) -> Report {
        let p = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let s = sizes.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        run_suite(name, &p, &s, &RunOptions::default()).unwrap()
    }

    #[test]
    fn catalog() {
        let c = list_suites();
        assert_eq!(c.len(), 17);
        assert!(c.iter().all(|s| !s.sizes.is_empty() || s.name == "chain-basics"));
        assert!(find_suite("nosuch").is_none());
        assert!(matches!(
            run_suite("nosuch", &BTreeMap::new(), &BTreeMap::new(), &RunOptions::default()),
            Err(VerifyError::UnknownSuite(_))
        ));
    }

    #[test]
    fn constant_at_one_half() {
        let c = character_norm_constant(&Scalar::ratio(1, 2), 128).to_f64();
        assert!((c - 16.076).abs() < 1e-2, "{c}");
    }

    #[test]
    fn monotone_worked_point() {
        let r = run("poll-thm25", &[("alpha", "0"), ("lambda", "1/4"), ("nu", "0")], &[]);
        assert!(r.pass, "{}", r.to_pretty());
        assert!(r.entries[0].note.as_deref().unwrap().contains("c_1 = 4/21 < c_2 = 48/187"));
    }

    #[test]
    fn haar_sum_value() {
        let r = run("qleg-lemma35", &[("q", "1/2")], &[]);
        assert!(r.pass);
        assert!(r.entries[0].note.as_deref().unwrap().contains("49/4"));
    }

    #[test]
    fn small_lambda_regime() {
        let r = run("appendixA", &[("alpha", "1/10"), ("lambda", "1/20"), ("nu", "1")], &[("N", 60)]);
        assert!(r.entries[1].note.as_deref().unwrap().starts_with("1 points"));
        assert_eq!(r.entries[1].status, Status::Pass);
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let a = run("qleg-lemma34", &[], &[("N", 4)]);
        let b = run("qleg-lemma34", &[], &[("N", 4)]);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(Report::from_json(&a.to_json()).unwrap(), a);
        let empty = Report::new("x", &NumCtx::default(), vec![]);
        assert!(empty.pass);
        assert_eq!(Report::from_json(&empty.to_json()).unwrap(), empty);
        assert!(a.to_csv().lines().count() == a.entries.len() + 1);
    }

    #[test]
    fn range_errors() {
        let p = [("q".to_string(), "3/2".to_string())].into_iter().collect();
        assert!(matches!(
            run_suite("qleg-lemma35", &p, &BTreeMap::new(), &RunOptions::default()),
            Err(VerifyError::Param { .. })
        ));
        let p = [("zeta".to_string(), "1".to_string())].into_iter().collect();
        assert!(matches!(
            run_suite("qleg-lemma35", &p, &BTreeMap::new(), &RunOptions::default()),
            Err(VerifyError::UnknownParam { .. })
        ));
    }
}
