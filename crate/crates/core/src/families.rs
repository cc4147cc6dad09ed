//! Recurrence coefficients of the polynomial families and the scalar
//! auxiliary functions attached to the associated Pollaczek family.
//!
//! Every family is normalized by `P_n(1) = 1`, so that
//! `P_1 P_n = a_n P_{n+1} + b_n P_n + c_n P_{n-1}` with `a_n + b_n + c_n = 1`
//! and `P_1(x) = (x - b_0) / a_0`.

use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Mode, NumCtx, Scalar, ScalarError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("coefficient invariant violated at n = {n}: {what}")]
    Invariant { n: usize, what: String },
    #[error("index {n} is beyond the explicit table of length {len}")]
    OutOfRange { n: usize, len: usize },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn domain(msg: impl Into<String>) -> FamilyError {
    FamilyError::Domain(msg.into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
}

impl Triple {
    pub fn new(a: Scalar, b: Scalar, c: Scalar) -> Self {
        Triple { a, b, c }
    }

    pub fn to_float(&self, precision: usize) -> Triple {
        Triple {
            a: self.a.to_float(precision),
            b: self.b.to_float(precision),
            c: self.c.to_float(precision),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollaczekParams {
    pub alpha: Scalar,
    pub lambda: Scalar,
    pub nu: Scalar,
}

impl PollaczekParams {
    pub fn new(alpha: Scalar, lambda: Scalar, nu: Scalar) -> Result<Self, FamilyError> {
        if alpha <= Scalar::ratio(-1, 2) {
            return Err(domain(format!("alpha = {alpha} must exceed -1/2")));
        }
        if lambda.is_negative() {
            return Err(domain(format!("lambda = {lambda} must be nonnegative")));
        }
        if nu.is_negative() {
            return Err(domain(format!("nu = {nu} must be nonnegative")));
        }
        Ok(PollaczekParams { alpha, lambda, nu })
    }

    pub fn ratios(alpha: (i64, i64), lambda: (i64, i64), nu: (i64, i64)) -> Result<Self, FamilyError> {
        Self::new(
            Scalar::ratio(alpha.0, alpha.1),
            Scalar::ratio(lambda.0, lambda.1),
            Scalar::ratio(nu.0, nu.1),
        )
    }

    pub fn with_lambda_zero(&self) -> Self {
        PollaczekParams {
            lambda: Scalar::zero(),
            ..self.clone()
        }
    }

    pub fn with_nu_zero(&self) -> Self {
        PollaczekParams {
            nu: Scalar::zero(),
            ..self.clone()
        }
    }

    pub fn is_exact(&self) -> bool {
        self.alpha.is_exact() && self.lambda.is_exact() && self.nu.is_exact()
    }
}

impl fmt::Display for PollaczekParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha={}, lambda={}, nu={}", self.alpha, self.lambda, self.nu)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomWalkParams {
    pub a: Scalar,
    pub b: Scalar,
    pub nu: Scalar,
    pub tilde: bool,
}

impl RandomWalkParams {
    pub fn new(a: Scalar, b: Scalar, nu: Scalar, tilde: bool) -> Result<Self, FamilyError> {
        if a <= Scalar::one() {
            return Err(domain(format!("a = {a} must exceed 1")));
        }
        if !b.is_positive() {
            return Err(domain(format!("b = {b} must be positive")));
        }
        if nu.is_negative() {
            return Err(domain(format!("nu = {nu} must be nonnegative")));
        }
        Ok(RandomWalkParams { a, b, nu, tilde })
    }

    /// `c̃_n = (n+ν)/((a+1)(n+ν)+b)`.
    pub fn c_tilde(&self, n: usize) -> Scalar {
        let m = Scalar::int(n as i64) + &self.nu;
        &m / ((&self.a + 1) * &m + &self.b)
    }

    /// `ω = 2√a/(a+1)`, the right end of the support.
    pub fn omega(&self, ctx: &NumCtx) -> Result<Scalar, FamilyError> {
        Ok(ctx.sqrt(&self.a)? * 2 / (&self.a + 1))
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    LittleQLegendre {
        q: Scalar,
    },
    Pollaczek(PollaczekParams),
    RandomWalk(RandomWalkParams),
    /// `b ≡ 0`, `a_0 = 1`, `c_n = c` for `n ≥ 1`.
    ConstantSymmetric {
        c: Scalar,
    },
    Table(Arc<Vec<Triple>>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::LittleQLegendre { .. } => "qleg",
            Family::Pollaczek(_) => "pollaczek",
            Family::RandomWalk(p) if p.tilde => "random-walk-tilde",
            Family::RandomWalk(_) => "random-walk",
            Family::ConstantSymmetric { .. } => "constant",
            Family::Table(_) => "table",
        }
    }

    /// Parameter list in a stable order, values encoded exactly.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match self {
            Family::LittleQLegendre { q } => vec![("q", q.encode())],
            Family::Pollaczek(p) => vec![("alpha", p.alpha.encode()), ("lambda", p.lambda.encode()), ("nu", p.nu.encode())],
            Family::RandomWalk(p) => vec![("a", p.a.encode()), ("b", p.b.encode()), ("nu", p.nu.encode())],
            Family::ConstantSymmetric { c } => vec![("c", c.encode())],
            Family::Table(rows) => vec![("rows", rows.len().to_string())],
        }
    }

    fn row(&self, n: usize, prev: &[Triple]) -> Result<Triple, FamilyError> {
        let zero = Scalar::zero;
        match self {
            Family::LittleQLegendre { q } => {
                if n == 0 {
                    let a0 = (q + 1).recip();
                    let b0 = q / (q + 1);
                    return Ok(Triple::new(a0, b0, zero()));
                }
                let qn = q.powi(n as i64);
                let qn1 = &qn * q;
                let q2n1 = &qn * &qn * q;
                let one = Scalar::one();
                let a = &qn * (q + 1) * (&one - &qn1) / ((&one - &q2n1) * (&one + &qn1));
                let c = &qn * (q + 1) * (&one - &qn) / ((&one - &q2n1) * (&one + &qn));
                let b = &one - &a - &c;
                Ok(Triple::new(a, b, c))
            }
            Family::Pollaczek(p) => {
                if n == 0 {
                    return Ok(Triple::new(Scalar::one(), zero(), zero()));
                }
                let c = phi(p, &Scalar::int(n as i64)) / (Scalar::one() - &prev[n - 1].c);
                Ok(Triple::new(Scalar::one() - &c, zero(), c))
            }
            Family::RandomWalk(p) => {
                if n == 0 {
                    return Ok(Triple::new(Scalar::one(), zero(), zero()));
                }
                let c = if p.tilde {
                    p.c_tilde(n)
                } else if n == 1 {
                    let t = &p.a * &p.nu + &p.b;
                    p.c_tilde(1) * &t / (&t + &p.nu)
                } else {
                    let a_tilde_prev = Scalar::one() - p.c_tilde(n - 1);
                    p.c_tilde(n) * a_tilde_prev / (Scalar::one() - &prev[n - 1].c)
                };
                Ok(Triple::new(Scalar::one() - &c, zero(), c))
            }
            Family::ConstantSymmetric { c } => {
                if n == 0 {
                    return Ok(Triple::new(Scalar::one(), zero(), zero()));
                }
                Ok(Triple::new(Scalar::one() - c, zero(), c.clone()))
            }
            Family::Table(rows) => rows.get(n).cloned().ok_or(FamilyError::OutOfRange { n, len: rows.len() }),
        }
    }
}

fn check_row(n: usize, t: &Triple) -> Result<(), FamilyError> {
    let bad = |what: &str| Err(FamilyError::Invariant { n, what: what.to_string() });
    let one = Scalar::one();
    if n == 0 {
        if !t.c.is_zero() {
            return bad("c(0) must be 0");
        }
        if !t.a.is_positive() {
            return bad("a(0) must be positive");
        }
        if t.b >= one {
            return bad("b(0) must be below 1");
        }
    } else {
        if !(t.a.is_positive() && t.a < one) {
            return bad("a(n) must lie in (0,1)");
        }
        if !(t.c.is_positive() && t.c < one) {
            return bad("c(n) must lie in (0,1)");
        }
        // a float b(n) may round to 1 once a(n) and c(n) are tiny
        if t.b.is_negative() || t.b > one || (t.b == one && t.b.is_exact()) {
            return bad("b(n) must lie in [0,1)");
        }
    }
    let residual = (&t.a + &t.b + &t.c - 1).abs();
    let ok = match [&t.a, &t.b, &t.c].iter().filter_map(|x| x.precision()).max() {
        None => residual.is_zero(),
        Some(p) => residual <= Scalar::int(2).powi(2 - p as i64),
    };
    if !ok {
        return bad("a(n) + b(n) + c(n) must equal 1");
    }
    Ok(())
}

/// Lazily generated, memoized recurrence coefficients.
///
/// Extension takes the write lock; readers get an immutable snapshot of the
/// materialized prefix.
pub struct CoefficientSequence {
    family: Family,
    memo: RwLock<Arc<Vec<Triple>>>,
}

impl fmt::Debug for CoefficientSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSequence").field("family", &self.family).finish()
    }
}

impl CoefficientSequence {
    fn build(family: Family) -> Result<Self, FamilyError> {
        let cs = CoefficientSequence {
            family,
            memo: RwLock::new(Arc::new(Vec::new())),
        };
        cs.try_prefix(0)?;
        Ok(cs)
    }

    pub fn little_q_legendre(q: Scalar) -> Result<Self, FamilyError> {
        if !(q.is_positive() && q < Scalar::one()) {
            return Err(domain(format!("q = {q} must lie in (0,1)")));
        }
        Self::build(Family::LittleQLegendre { q })
    }

    pub fn pollaczek(p: PollaczekParams) -> Result<Self, FamilyError> {
        let p = PollaczekParams::new(p.alpha, p.lambda, p.nu)?;
        Self::build(Family::Pollaczek(p))
    }

    /// Ultraspherical family, the Pollaczek case `λ = ν = 0`.
    pub fn ultraspherical(alpha: Scalar) -> Result<Self, FamilyError> {
        Self::pollaczek(PollaczekParams::new(alpha, Scalar::zero(), Scalar::zero())?)
    }

    pub fn random_walk(p: RandomWalkParams) -> Result<Self, FamilyError> {
        let p = RandomWalkParams::new(p.a, p.b, p.nu, p.tilde)?;
        Self::build(Family::RandomWalk(p))
    }

    pub fn constant_symmetric(c: Scalar) -> Result<Self, FamilyError> {
        if !(c.is_positive() && c < Scalar::one()) {
            return Err(domain(format!("c = {c} must lie in (0,1)")));
        }
        Self::build(Family::ConstantSymmetric { c })
    }

    /// Finite explicit table; every row is validated up front.
    pub fn from_table(rows: Vec<Triple>) -> Result<Self, FamilyError> {
        for (n, t) in rows.iter().enumerate() {
            check_row(n, t)?;
        }
        if rows.is_empty() {
            return Err(domain("empty coefficient table"));
        }
        Self::build(Family::Table(Arc::new(rows)))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Snapshot holding at least `a(0..=n)`.
    pub fn try_prefix(&self, n: usize) -> Result<Arc<Vec<Triple>>, FamilyError> {
        {
            let memo = self.memo.read().expect("memo lock");
            if memo.len() > n {
                return Ok(Arc::clone(&memo));
            }
        }
        let mut memo = self.memo.write().expect("memo lock");
        if memo.len() > n {
            return Ok(Arc::clone(&memo));
        }
        let target = match &self.family {
            Family::Table(rows) => (n + 1).max(2 * memo.len()).min(rows.len()).max(n + 1),
            _ => (n + 1).max(2 * memo.len()),
        };
        let mut rows: Vec<Triple> = memo.as_ref().clone();
        rows.reserve(target - rows.len());
        while rows.len() < target {
            let k = rows.len();
            let t = match self.family.row(k, &rows) {
                Ok(t) => t,
                Err(FamilyError::OutOfRange { .. }) if k > n => break,
                Err(e) => return Err(e),
            };
            check_row(k, &t)?;
            rows.push(t);
        }
        *memo = Arc::new(rows);
        Ok(Arc::clone(&memo))
    }

    /// Like [`Self::try_prefix`]; an invariant violation here is a bug in a
    /// built-in family, or an explicit table read past its end.
    pub fn prefix(&self, n: usize) -> Arc<Vec<Triple>> {
        self.try_prefix(n).unwrap_or_else(|e| panic!("coefficient sequence: {e}"))
    }

    pub fn triple(&self, n: usize) -> Triple {
        self.prefix(n)[n].clone()
    }

    pub fn a(&self, n: usize) -> Scalar {
        self.prefix(n)[n].a.clone()
    }

    pub fn b(&self, n: usize) -> Scalar {
        self.prefix(n)[n].b.clone()
    }

    pub fn c(&self, n: usize) -> Scalar {
        self.prefix(n)[n].c.clone()
    }

    /// Whether every materialized coefficient is exact.
    pub fn is_exact(&self) -> bool {
        self.prefix(0)[0].a.is_exact() && self.prefix(1)[1].c.is_exact()
    }

    /// Float copy of `a(0..=n)` as an explicit table, for long float sweeps
    /// that would otherwise convert exact coefficients at every step.
    pub fn float_table(&self, n: usize, precision: usize) -> CoefficientSequence {
        let rows: Vec<Triple> = self.prefix(n)[..=n].iter().map(|t| t.to_float(precision)).collect();
        CoefficientSequence {
            family: Family::Table(Arc::new(rows.clone())),
            memo: RwLock::new(Arc::new(rows)),
        }
    }

    /// `P_1(x) = (x - b_0)/a_0`.
    pub fn p1(&self, x: &Scalar) -> Scalar {
        let t = self.triple(0);
        (x - &t.b) / &t.a
    }
}

/// `h(n) = q^{-n}(1 - q^{2n+1})/(1 - q)` for the little q-Legendre family.
pub fn little_q_legendre_haar(q: &Scalar, n: usize) -> Scalar {
    let one = Scalar::one();
    (&one - q.powi(2 * n as i64 + 1)) / (&one - q) / q.powi(n as i64)
}

/// `L_n^{(2α,ν)}(x)` by its three-term recurrence.
pub fn laguerre_eval(n: usize, x: &Scalar, two_alpha: &Scalar, nu: &Scalar) -> Scalar {
    laguerre_values(n, x, two_alpha, nu).pop().expect("nonempty")
}

/// `L_0..=L_n` at `x`.
pub fn laguerre_values(n: usize, x: &Scalar, two_alpha: &Scalar, nu: &Scalar) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Scalar::one());
    if n == 0 {
        return out;
    }
    out.push((-x + nu * 2 + two_alpha + 1) / (nu + 1));
    for k in 1..n {
        let kk = Scalar::int(k as i64);
        let next = ((-x + &kk * 2 + nu * 2 + two_alpha + 1) * &out[k] - (&kk + nu + two_alpha) * &out[k - 1]) / (&kk + nu + 1);
        out.push(next);
    }
    out
}

/// Ratios `L_{k-1}/L_k` for `k = 1..=n` (index 0 holds 0), propagated
/// without forming the raw values.
pub fn laguerre_ratios(n: usize, x: &Scalar, two_alpha: &Scalar, nu: &Scalar) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Scalar::zero());
    if n == 0 {
        return out;
    }
    // r_1 = L_0/L_1
    out.push((nu + 1) / (-x + nu * 2 + two_alpha + 1));
    for k in 1..n {
        // L_{k+1}/L_k = ((-x+2k+2ν+2α+1) - (k+ν+2α) r_k)/(k+ν+1)
        let kk = Scalar::int(k as i64);
        let growth = ((-x + &kk * 2 + nu * 2 + two_alpha + 1) - (&kk + nu + two_alpha) * &out[k]) / (&kk + nu + 1);
        out.push(growth.recip());
    }
    out
}

/// `c_1..=c_n` of the Pollaczek family through the Laguerre ratio form
/// `c_n = (n+ν+2α)/(2n+2ν+2α+2λ+1) · L_{n-1}(-2λ)/L_n(-2λ)`; index 0 holds 0.
pub fn pollaczek_c_via_laguerre(p: &PollaczekParams, n: usize) -> Vec<Scalar> {
    let two_alpha = &p.alpha * 2;
    let x = -(&p.lambda * 2);
    let ratios = laguerre_ratios(n, &x, &two_alpha, &p.nu);
    let mut out = vec![Scalar::zero()];
    for (k, r) in ratios.iter().enumerate().skip(1) {
        let kk = Scalar::int(k as i64);
        let front = (&kk + &p.nu + &two_alpha) / (&kk * 2 + &p.nu * 2 + &two_alpha + &p.lambda * 2 + 1);
        out.push(front * r);
    }
    out
}

/// Pollaczek Haar weights in closed form through `L_n^{(2α,ν)}(-2λ)^2`.
pub fn pollaczek_haar_closed_form(p: &PollaczekParams, n: usize) -> Vec<Scalar> {
    let two_alpha = &p.alpha * 2;
    let lag = laguerre_values(n, &-(&p.lambda * 2), &two_alpha, &p.nu);
    let base = &two_alpha + &p.lambda * 2 + &p.nu * 2 + 1;
    let mut poch_num = Scalar::one(); // (ν+1)_k
    let mut poch_den = Scalar::one(); // (2α+ν+1)_k
    let mut out = Vec::with_capacity(n + 1);
    for (k, l) in lag.iter().enumerate() {
        if k > 0 {
            let km1 = Scalar::int(k as i64 - 1);
            poch_num = poch_num * (&p.nu + 1 + &km1);
            poch_den = poch_den * (&two_alpha + &p.nu + 1 + &km1);
        }
        let lead = Scalar::int(2 * k as i64) + &base;
        out.push(lead * &poch_num / (&base * &poch_den) * l.square());
    }
    out
}

/// `φ(x) = (x+ν)(x+ν+2α)/((2x+2ν+2α+2λ+1)(2x+2ν+2α+2λ-1))`.
pub fn phi(p: &PollaczekParams, x: &Scalar) -> Scalar {
    let s = x + &p.nu;
    let d = &s * 2 + &p.alpha * 2 + &p.lambda * 2;
    &s * (&s + &p.alpha * 2) / ((&d + 1) * (&d - 1))
}

/// The second closed form of `φ`, written as `1 - N(x)/D(x)`.
pub fn phi_second_form(p: &PollaczekParams, x: &Scalar) -> Scalar {
    let (al, la) = (&p.alpha, &p.lambda);
    let s = x + &p.nu;
    let num = (al * 2 + 1) * (&s * 3 + al * 2 + la * 4 - 1) + la * 4 * (&s * 2 + la - 1) + &s * 3 * (&s - 1);
    let d = &s * 2 + al * 2 + la * 2;
    Scalar::one() - num / ((&d + 1) * (&d - 1))
}

fn rho_sq_product(p: &PollaczekParams) -> Scalar {
    // (1-(2α-2λ)^2)(1-(2α+2λ)^2)
    let m = (&p.alpha - &p.lambda) * 2;
    let s = (&p.alpha + &p.lambda) * 2;
    (Scalar::one() - m.square()) * (Scalar::one() - s.square())
}

/// `η(x) = (8λ(x+ν)+(2α+2λ)²-1)² - (1-(2α-2λ)²)(1-(2α+2λ)²)`.
pub fn eta(p: &PollaczekParams, x: &Scalar) -> Scalar {
    let s = (&p.alpha + &p.lambda) * 2;
    let inner = &p.lambda * 8 * (x + &p.nu) + s.square() - 1;
    inner.square() - rho_sq_product(p)
}

/// `θ(x) = (8λ(x+ν/2)+(2α+2λ)²-1)² - (1-(2α-2λ)²)(1-(2α+2λ)²) - 16λ²ν²`.
pub fn theta(p: &PollaczekParams, x: &Scalar) -> Scalar {
    let s = (&p.alpha + &p.lambda) * 2;
    let inner = &p.lambda * 8 * (x + &p.nu / 2) + s.square() - 1;
    inner.square() - rho_sq_product(p) - (&p.lambda * &p.nu).square() * 16
}

pub fn phi_prime(p: &PollaczekParams, x: &Scalar) -> Scalar {
    let s = x + &p.nu;
    if p.lambda.is_zero() {
        let d = &s * 2 + &p.alpha * 2;
        return (&p.alpha * 2 + 1) * (&p.alpha * 2 - 1) * &d / ((&d + 1).square() * (&d - 1).square());
    }
    let d = &s * 2 + &p.alpha * 2 + &p.lambda * 2;
    eta(p, x) / (&p.lambda * 8 * (&d + 1).square() * (&d - 1).square())
}

/// Radicand and denominator of `ι(x) = (1 - √R/D)/2`.
pub fn iota_parts(p: &PollaczekParams, x: &Scalar) -> (Scalar, Scalar) {
    let t = &p.alpha * 2 + &p.lambda * 2 + 1;
    let radicand = &p.lambda * 8 * x + t.square();
    let denom = x * 2 + &t;
    (radicand, denom)
}

fn sqrt_in(ctx: &NumCtx, x: &Scalar) -> Result<Scalar, FamilyError> {
    if ctx.mode != Mode::Float {
        if let Some(r) = x.sqrt_exact() {
            return Ok(r);
        }
    }
    Ok(ctx.sqrt(x)?)
}

pub fn iota(p: &PollaczekParams, x: &Scalar, ctx: &NumCtx) -> Result<Scalar, FamilyError> {
    let (r, d) = iota_parts(p, x);
    Ok((Scalar::one() - sqrt_in(ctx, &r)? / d) / 2)
}

pub fn xi(p: &PollaczekParams, x: &Scalar, ctx: &NumCtx) -> Result<Scalar, FamilyError> {
    let f = phi(p, x);
    let disc = Scalar::one() - &f * 4;
    if disc.is_negative() {
        return Err(domain(format!("xi({x}) needs phi(x) <= 1/4, got {f}")));
    }
    Ok((Scalar::one() - sqrt_in(ctx, &disc)?) / 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aux {
    Phi,
    PhiPrime,
    Eta,
    Theta,
    Iota,
    Xi,
}

impl std::str::FromStr for Aux {
    type Err = FamilyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "phi" => Aux::Phi,
            "phi_prime" | "phi-prime" => Aux::PhiPrime,
            "eta" => Aux::Eta,
            "theta" => Aux::Theta,
            "iota" => Aux::Iota,
            "xi" => Aux::Xi,
            _ => return Err(domain(format!("unknown auxiliary function `{s}`"))),
        })
    }
}

/// Named auxiliary function with domain checks. `η` and `θ` are
/// polynomials and accept any real argument.
pub fn aux_eval(name: Aux, x: &Scalar, p: &PollaczekParams, ctx: &NumCtx) -> Result<Scalar, FamilyError> {
    let one = Scalar::one();
    match name {
        Aux::Eta => return Ok(eta(p, x)),
        Aux::Theta => return Ok(theta(p, x)),
        Aux::Iota if x.is_negative() => return Err(domain(format!("iota needs x >= 0, got {x}"))),
        Aux::Iota => return iota(p, x, ctx),
        _ => {}
    }
    if *x < one {
        return Err(domain(format!("{name:?} needs x >= 1, got {x}")));
    }
    match name {
        Aux::Phi => Ok(phi(p, x)),
        Aux::PhiPrime => Ok(phi_prime(p, x)),
        Aux::Xi => xi(p, x, ctx),
        _ => unreachable!(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalPoints {
    pub x_star: Scalar,
    pub x_star_star: Scalar,
    pub x0: Option<Scalar>,
}

/// Whether `0 < λ < -|α| + 1/2`.
pub fn in_small_lambda_regime(p: &PollaczekParams) -> bool {
    p.lambda.is_positive() && &p.lambda + p.alpha.abs() < Scalar::ratio(1, 2)
}

/// Zeros `x_*` of `η`, `x_**` of `θ` and the crossing `x_0` of `φ = 1/4`.
pub fn critical_points(p: &PollaczekParams, ctx: &NumCtx) -> Result<CriticalPoints, FamilyError> {
    if !in_small_lambda_regime(p) {
        return Err(domain(format!("critical points need 0 < lambda < -|alpha| + 1/2 ({p})")));
    }
    let s = (&p.alpha + &p.lambda) * 2;
    let base = Scalar::one() - s.square();
    let prod = rho_sq_product(p);
    let eight_l = &p.lambda * 8;
    let x_star = -&p.nu + (&base + sqrt_in(ctx, &prod)?) / &eight_l;
    let rad2 = &prod + (&p.lambda * &p.nu).square() * 16;
    let x_star_star = -(&p.nu / 2) + (&base + sqrt_in(ctx, &rad2)?) / &eight_l;

    let quarter = Scalar::ratio(1, 4);
    let one = Scalar::one();
    let x0 = if x_star <= one || phi(p, &one) <= quarter {
        None
    } else {
        // φ is strictly decreasing on [1, x_*], φ(1) > 1/4 > φ(x_*)
        let prec = ctx.precision.max(128);
        let mut lo = one.to_float(prec);
        let mut hi = x_star.to_float(prec);
        let tol = Scalar::int(2).powi(-64);
        while &hi - &lo > tol {
            let mid = (&lo + &hi) / 2;
            if phi(p, &mid) > quarter {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some((lo + hi) / 2)
    };
    Ok(CriticalPoints { x_star, x_star_star, x0 })
}

/// Random-walk parameters and constants derived from a Pollaczek `(α, λ, ν)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransformBundle {
    pub alpha: Scalar,
    pub lambda: Scalar,
    pub nu: Scalar,
    pub a: Scalar,
    pub b: Scalar,
    pub omega: Scalar,
    pub rho: Scalar,
    pub gamma: Scalar,
}

impl TransformBundle {
    /// `s_n = (2α+2λ+1)(n+ν+2α+1)/((2α+1)(2n+2ν+2α+2λ+1))`.
    pub fn s(&self, n: usize) -> Scalar {
        let nn = Scalar::int(n as i64);
        let two_a = &self.alpha * 2;
        (&two_a + &self.lambda * 2 + 1) * (&nn + &self.nu + &two_a + 1)
            / ((&two_a + 1) * (&nn * 2 + &self.nu * 2 + &two_a + &self.lambda * 2 + 1))
    }

    pub fn t(&self, n: usize) -> Scalar {
        Scalar::one() - self.s(n)
    }

    /// `ρ² = 1 - (2λ/(2α+1))²`, exact for rational parameters.
    pub fn rho_squared(&self) -> Scalar {
        Scalar::one() - (&self.lambda * 2 / (&self.alpha * 2 + 1)).square()
    }

    /// `γ² = (2α-2λ+1)/(2α+2λ+1) = 1/a`.
    pub fn gamma_squared(&self) -> Scalar {
        self.a.recip()
    }

    pub fn random_walk(&self, tilde: bool) -> RandomWalkParams {
        RandomWalkParams {
            a: self.a.clone(),
            b: self.b.clone(),
            nu: self.nu.clone(),
            tilde,
        }
    }
}

pub fn transform_params(alpha: &Scalar, lambda: &Scalar, nu: &Scalar, ctx: &NumCtx) -> Result<TransformBundle, FamilyError> {
    if *alpha <= Scalar::ratio(-1, 2) {
        return Err(domain(format!("alpha = {alpha} must exceed -1/2")));
    }
    if !lambda.is_positive() || *lambda >= alpha + Scalar::ratio(1, 2) {
        return Err(domain(format!("need 0 < lambda < alpha + 1/2, got lambda = {lambda}")));
    }
    if nu.is_negative() {
        return Err(domain(format!("nu = {nu} must be nonnegative")));
    }
    let two_a = alpha * 2;
    let a = (&two_a + lambda * 2 + 1) / (&two_a - lambda * 2 + 1);
    let b = (&two_a + 1) * &a;
    let omega = ctx.sqrt(&a)? * 2 / (&a + 1);
    let rho = ctx.sqrt(&(Scalar::one() - (lambda * 2 / (&two_a + 1)).square()))?;
    let gamma = ctx.sqrt(&a.recip())?;
    Ok(TransformBundle {
        alpha: alpha.clone(),
        lambda: lambda.clone(),
        nu: nu.clone(),
        a,
        b,
        omega,
        rho,
        gamma,
    })
}

/// Monic recurrence `x σ_n = σ_{n+1} + shift_n σ_n + λ_n σ_{n-1}`;
/// `lambda[0]` is unused and set to 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonicView {
    pub shift: Vec<Scalar>,
    pub lambda: Vec<Scalar>,
}

/// Jacobi matrix of the orthonormal polynomials: `diag[n]` and
/// `offdiag[n]` coupling `n` and `n+1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrthonormalView {
    pub diag: Vec<Scalar>,
    pub offdiag: Vec<Scalar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisForm {
    Orthonormal,
    Monic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum BasisView {
    Orthonormal(OrthonormalView),
    Monic(MonicView),
}

pub fn monic_view(cs: &CoefficientSequence, n_max: usize) -> MonicView {
    let rows = cs.prefix(n_max + 1);
    let (a0, b0) = (&rows[0].a, &rows[0].b);
    let a0sq = a0.square();
    let mut shift = vec![b0.clone()];
    let mut lambda = vec![Scalar::zero()];
    for n in 1..=n_max {
        shift.push(a0 * &rows[n].b + b0);
        let prev_a = if n == 1 { Scalar::one() } else { rows[n - 1].a.clone() };
        lambda.push(&a0sq * &rows[n].c * prev_a);
    }
    MonicView { shift, lambda }
}

/// Needs square roots, so rational mode is refused.
pub fn orthonormal_view(cs: &CoefficientSequence, n_max: usize, ctx: &NumCtx) -> Result<OrthonormalView, FamilyError> {
    let monic = monic_view(cs, n_max + 1);
    let mut offdiag = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        offdiag.push(ctx.sqrt(&monic.lambda[n + 1])?);
    }
    let mut diag = monic.shift;
    diag.truncate(n_max + 1);
    Ok(OrthonormalView { diag, offdiag })
}

pub fn basis_coefficients(cs: &CoefficientSequence, form: BasisForm, n_max: usize, ctx: &NumCtx) -> Result<BasisView, FamilyError> {
    Ok(match form {
        BasisForm::Monic => BasisView::Monic(monic_view(cs, n_max)),
        BasisForm::Orthonormal => BasisView::Orthonormal(orthonormal_view(cs, n_max, ctx)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Scalar {
        Scalar::ratio(p, q)
    }

    fn poll(a: (i64, i64), l: (i64, i64), n: (i64, i64)) -> PollaczekParams {
        PollaczekParams::ratios(a, l, n).unwrap()
    }

    #[test]
    fn q_legendre_half() {
        let cs = CoefficientSequence::little_q_legendre(r(1, 2)).unwrap();
        assert_eq!(cs.a(0), r(2, 3));
        assert_eq!(cs.b(0), r(1, 3));
        assert_eq!(cs.c(0), Scalar::zero());
        assert_eq!(cs.c(1), r(2, 7));
        assert_eq!(cs.a(1), r(18, 35));
        assert_eq!(cs.b(1), r(1, 5));
        // values used by the A/B quantities
        assert_eq!(cs.b(2), r(7, 15));
        assert_eq!(cs.c(2), r(36, 155));
        assert_eq!(cs.b(3), r(35, 51));
        assert_eq!(cs.a(2), r(28, 93));
        assert_eq!(cs.c(3), r(56, 381));
    }

    #[test]
    fn q_legendre_b_closed_form() {
        for q in [r(1, 4), r(1, 2), r(3, 4)] {
            let cs = CoefficientSequence::little_q_legendre(q.clone()).unwrap();
            let one = Scalar::one();
            for n in 1..=200usize {
                let qn = q.powi(n as i64);
                let qn1 = &qn * &q;
                let b = (&one - &qn) * (&one - &qn1) / ((&one + &qn) * (&one + &qn1));
                assert_eq!(cs.b(n), b, "n={n}");
                let t = cs.triple(n);
                assert_eq!(&t.a + &t.b + &t.c, one);
            }
        }
    }

    #[test]
    fn q_legendre_domain() {
        assert!(CoefficientSequence::little_q_legendre(r(0, 1)).is_err());
        assert!(CoefficientSequence::little_q_legendre(r(1, 1)).is_err());
        assert!(CoefficientSequence::little_q_legendre(r(3, 2)).is_err());
    }

    #[test]
    fn ultraspherical_and_pollaczek() {
        let u = CoefficientSequence::ultraspherical(Scalar::zero()).unwrap();
        assert_eq!(u.c(1), r(1, 3));
        assert_eq!(u.c(2), r(2, 5));
        for n in 1..=50 {
            assert_eq!(u.c(n), r(n as i64, 2 * n as i64 + 1));
        }
        let p = CoefficientSequence::pollaczek(poll((0, 1), (1, 4), (0, 1))).unwrap();
        assert_eq!(p.c(0), Scalar::zero());
        assert_eq!(p.c(1), r(4, 21));
        assert_eq!(p.c(2), r(48, 187));
        assert!(PollaczekParams::ratios((-1, 1), (0, 1), (0, 1)).is_err());
        assert!(PollaczekParams::ratios((0, 1), (-1, 1), (0, 1)).is_err());
        assert!(PollaczekParams::ratios((0, 1), (0, 1), (-1, 2)).is_err());
    }

    #[test]
    fn laguerre_basics() {
        let z = Scalar::zero();
        assert_eq!(laguerre_eval(0, &r(7, 3), &r(1, 2), &r(1, 1)), Scalar::one());
        assert_eq!(laguerre_eval(1, &r(-1, 2), &z, &z), r(3, 2));
        for n in 0..=20 {
            assert_eq!(laguerre_eval(n, &z, &z, &z), Scalar::one());
        }
        let vals = laguerre_values(12, &r(-3, 5), &r(1, 3), &r(1, 2));
        let ratios = laguerre_ratios(12, &r(-3, 5), &r(1, 3), &r(1, 2));
        for k in 1..=12 {
            assert_eq!(&vals[k - 1] / &vals[k], ratios[k]);
        }
    }

    #[test]
    fn laguerre_form_matches_recursion() {
        let grid = [
            poll((0, 1), (1, 4), (0, 1)),
            poll((-2, 5), (1, 10), (1, 2)),
            poll((1, 1), (5, 1), (3, 1)),
            poll((-1, 4), (0, 1), (1, 1)),
        ];
        for p in grid {
            let cs = CoefficientSequence::pollaczek(p.clone()).unwrap();
            let lag = pollaczek_c_via_laguerre(&p, 120);
            for n in 1..=120 {
                assert_eq!(cs.c(n), lag[n], "{p} n={n}");
            }
        }
    }

    #[test]
    fn random_walk_coefficients() {
        let t = CoefficientSequence::random_walk(RandomWalkParams::new(r(3, 1), r(9, 2), r(0, 1), true).unwrap()).unwrap();
        assert_eq!(t.c(1), r(2, 17));
        let plain = CoefficientSequence::random_walk(RandomWalkParams::new(r(3, 1), r(9, 2), r(0, 1), false).unwrap()).unwrap();
        for n in 0..=60 {
            assert_eq!(t.c(n), plain.c(n));
        }
        let params = RandomWalkParams::new(r(3, 1), r(9, 2), r(1, 1), false).unwrap();
        let plain = CoefficientSequence::random_walk(params.clone()).unwrap();
        let tilde = CoefficientSequence::random_walk(RandomWalkParams { tilde: true, ..params }).unwrap();
        let cap = r(1, 4);
        for n in 1..=100 {
            assert!(plain.c(n) <= tilde.c(n));
            assert!(tilde.c(n) < cap);
        }
        assert!(RandomWalkParams::new(r(1, 1), r(1, 1), r(0, 1), true).is_err());
        assert!(RandomWalkParams::new(r(2, 1), r(0, 1), r(0, 1), true).is_err());
    }

    #[test]
    fn corrupted_table_is_rejected() {
        let rows = vec![Triple::new(r(1, 1), r(0, 1), r(0, 1)), Triple::new(r(6, 10), r(-1, 10), r(5, 10))];
        assert!(matches!(
            CoefficientSequence::from_table(rows),
            Err(FamilyError::Invariant { n: 1, .. })
        ));
        let rows = vec![Triple::new(r(1, 1), r(0, 1), r(0, 1)), Triple::new(r(1, 2), r(0, 1), r(1, 2))];
        let cs = CoefficientSequence::from_table(rows).unwrap();
        assert!(matches!(cs.try_prefix(5), Err(FamilyError::OutOfRange { .. })));
        assert_eq!(cs.c(1), r(1, 2));
    }

    #[test]
    fn float_mode_sums_within_tolerance() {
        let q = r(1, 3).to_float(128);
        let cs = CoefficientSequence::little_q_legendre(q).unwrap();
        let prefix = cs.prefix(200);
        assert!(prefix.iter().all(|t| t.a.precision() == Some(128)));
    }

    #[test]
    fn aux_values() {
        let ctx = NumCtx::default();
        let u = poll((0, 1), (0, 1), (0, 1));
        assert_eq!(aux_eval(Aux::Phi, &Scalar::one(), &u, &ctx).unwrap(), r(1, 3));
        let p = poll((0, 1), (1, 4), (0, 1));
        assert_eq!(aux_eval(Aux::Phi, &Scalar::one(), &p, &ctx).unwrap(), r(4, 21));
        let i1 = aux_eval(Aux::Iota, &Scalar::one(), &p, &ctx).unwrap().to_f64();
        assert!((i1 - (1.0 - 17f64.sqrt() / 7.0) / 2.0).abs() < 1e-15);
        assert!(aux_eval(Aux::Phi, &r(1, 2), &p, &ctx).is_err());
        assert!(aux_eval(Aux::Iota, &r(-1, 2), &p, &ctx).is_err());
        // φ(1) = 4/21 ≤ 1/4 so ξ(1) is defined; a regime with φ(1) > 1/4 is not
        assert!(aux_eval(Aux::Xi, &Scalar::one(), &p, &ctx).is_ok());
        let steep = poll((-2, 5), (1, 20), (0, 1));
        assert!(phi(&steep, &Scalar::one()) > r(1, 4));
        assert!(aux_eval(Aux::Xi, &Scalar::one(), &steep, &ctx).is_err());
    }

    #[test]
    fn phi_forms_agree_and_bound() {
        let grid = [
            poll((0, 1), (1, 4), (0, 1)),
            poll((-2, 5), (1, 10), (1, 2)),
            poll((2, 1), (5, 1), (3, 1)),
        ];
        for p in grid {
            let ult = p.with_lambda_zero();
            for x in (1..=1000).step_by(37) {
                let x = Scalar::int(x);
                let f = phi(&p, &x);
                assert_eq!(f, phi_second_form(&p, &x));
                assert!(f.is_positive() && f < Scalar::one());
                assert!(f <= phi(&ult, &x));
            }
        }
    }

    #[test]
    fn phi_prime_matches_difference_quotient() {
        // central difference oracle at 256 bits
        let ctx = NumCtx::float(256);
        let h = Scalar::int(2).powi(-40).to_float(256);
        for p in [
            poll((0, 1), (1, 8), (1, 2)),
            poll((1, 1), (0, 1), (1, 1)),
            poll((-1, 4), (3, 10), (0, 1)),
        ] {
            for x in [r(1, 1), r(5, 2), r(17, 1)] {
                let x = ctx.adopt(x);
                let fd = (phi(&p, &(&x + &h)) - phi(&p, &(&x - &h))) / (&h * 2);
                let exact = phi_prime(&p, &x);
                assert!((fd - &exact).abs().to_f64() < 1e-20, "{p}");
            }
        }
    }

    #[test]
    fn critical_points_small_regime() {
        let ctx = NumCtx::default();
        let p = poll((0, 1), (1, 8), (0, 1));
        let cp = critical_points(&p, &ctx).unwrap();
        assert_eq!(cp.x_star, r(15, 8));
        assert_eq!(cp.x_star_star, cp.x_star);
        for p in [
            poll((1, 10), (1, 20), (1, 1)),
            poll((-1, 5), (1, 10), (3, 1)),
            poll((0, 1), (1, 100), (1, 2)),
        ] {
            let cp = critical_points(&p, &ctx).unwrap();
            assert!(cp.x_star_star >= cp.x_star);
            assert!(cp.x_star_star.is_positive());
            assert!(eta(&p, &cp.x_star).abs().to_f64() < 1e-20);
            assert!(theta(&p, &cp.x_star_star).abs().to_f64() < 1e-20);
            if let Some(x0) = &cp.x0 {
                let q = Scalar::ratio(1, 4);
                let eps = Scalar::int(2).powi(-60);
                assert!(phi(&p, &(x0 - &eps)) > q);
                assert!(phi(&p, &(x0 + &eps)) <= q);
            }
        }
        assert!(critical_points(&poll((0, 1), (0, 1), (0, 1)), &ctx).is_err());
        assert!(critical_points(&poll((0, 1), (1, 2), (0, 1)), &ctx).is_err());
    }

    #[test]
    fn transform_worked_point() {
        let ctx = NumCtx::default();
        let tb = transform_params(&Scalar::zero(), &r(1, 4), &Scalar::zero(), &ctx).unwrap();
        assert_eq!(tb.a, r(3, 1));
        assert_eq!(tb.b, r(3, 1));
        let s3 = 3f64.sqrt();
        assert!((tb.omega.to_f64() - s3 / 2.0).abs() < 1e-15);
        assert!((tb.rho.to_f64() - s3 / 2.0).abs() < 1e-15);
        assert!((tb.gamma.to_f64() - 1.0 / s3).abs() < 1e-15);
        assert!((&tb.omega - &tb.rho).abs() < Scalar::int(2).powi(-250));
        assert_eq!(tb.s(1), r(6, 7));
        assert_eq!(tb.t(1), r(1, 7));
        assert!(transform_params(&Scalar::zero(), &r(1, 2), &Scalar::zero(), &ctx).is_err());
        assert!(transform_params(&Scalar::zero(), &Scalar::zero(), &Scalar::zero(), &ctx).is_err());
    }

    #[test]
    fn monic_views() {
        let ctx = NumCtx::default();
        let cs = CoefficientSequence::little_q_legendre(r(1, 2)).unwrap();
        let m = monic_view(&cs, 5);
        assert_eq!(m.lambda[1], r(8, 63));
        let u = CoefficientSequence::ultraspherical(Scalar::zero()).unwrap();
        assert!(monic_view(&u, 20).shift.iter().all(Scalar::is_zero));
        let p = poll((1, 3), (1, 5), (1, 2));
        let cs = CoefficientSequence::pollaczek(p.clone()).unwrap();
        let m = monic_view(&cs, 50);
        for n in 1..=50 {
            assert_eq!(m.lambda[n], phi(&p, &Scalar::int(n as i64)));
        }
        let o = orthonormal_view(&cs, 10, &ctx).unwrap();
        assert!((o.offdiag[3].square() - &m.lambda[4]).abs().to_f64() < 1e-60);
        let rational = NumCtx::new(Mode::Rational, 256).unwrap();
        assert!(basis_coefficients(&cs, BasisForm::Orthonormal, 4, &rational).is_err());
        assert!(basis_coefficients(&cs, BasisForm::Monic, 4, &rational).is_ok());
    }

    #[test]
    fn pollaczek_haar_closed_form_seed() {
        let p = poll((0, 1), (1, 4), (0, 1));
        let h = pollaczek_haar_closed_form(&p, 3);
        assert_eq!(h[0], Scalar::one());
        // h(1) = 1/c_1
        assert_eq!(h[1], r(21, 4));
    }
}
