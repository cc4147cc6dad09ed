//! Chain sequences and their parameter sequences, Worpitzky continued
//! fractions, the little q-Legendre ratio machinery and the random-walk
//! quantities attached to the associated Pollaczek family.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::families::{laguerre_values, phi, CoefficientSequence, FamilyError, PollaczekParams, RandomWalkParams, TransformBundle};
use crate::par::Exec;
use crate::scalar::{NumCtx, Scalar};
use crate::spectrum::{eval_values, eval_with_derivative};

type SeqFn = Arc<dyn Fn(usize) -> Scalar + Send + Sync>;

/// A candidate chain sequence `Λ(n)`, `n ≥ start`, optionally with a
/// claimed parameter sequence `p`.
#[derive(Clone)]
pub struct ChainSequenceProbe {
    lambda: SeqFn,
    pub start: usize,
    known: Option<SeqFn>,
}

impl std::fmt::Debug for ChainSequenceProbe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainSequenceProbe").field("start", &self.start).finish()
    }
}

impl ChainSequenceProbe {
    pub fn new(lambda: impl Fn(usize) -> Scalar + Send + Sync + 'static) -> Self {
        ChainSequenceProbe {
            lambda: Arc::new(lambda),
            start: 1,
            known: None,
        }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::new(move |_| c.clone())
    }

    pub fn from_values(values: Vec<Scalar>) -> Self {
        Self::new(move |n| values.get(n - 1).cloned().unwrap_or_else(Scalar::zero))
    }

    /// `Λ(n) = φ(n)` for the Pollaczek parameters, with the recurrence
    /// coefficients `c_n` as claimed parameters.
    pub fn pollaczek_phi(p: PollaczekParams) -> Result<Self, FamilyError> {
        let cs = Arc::new(CoefficientSequence::pollaczek(p.clone())?);
        let probe = Self::new(move |n| phi(&p, &Scalar::int(n as i64)));
        Ok(probe.with_parameters(move |n| cs.c(n)))
    }

    pub fn with_parameters(mut self, p: impl Fn(usize) -> Scalar + Send + Sync + 'static) -> Self {
        self.known = Some(Arc::new(p));
        self
    }

    pub fn lambda(&self, n: usize) -> Scalar {
        (self.lambda)(n)
    }

    /// First `n ≤ big_n` where `Λ(n) ≠ p(n)(1 - p(n-1))`.
    pub fn check_known(&self, big_n: usize) -> Option<usize> {
        let p = self.known.as_ref()?;
        (self.start..=big_n).find(|&n| self.lambda(n) != p(n) * (Scalar::one() - p(n - 1)))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParameterOutcome {
    /// `m(start-1) ..= m(N)`.
    Sequence { values: Vec<Scalar> },
    /// `m(n)` left `(0,1)`, so `Λ` is not a chain sequence.
    NotChain { n: usize, value: Scalar },
}

impl ParameterOutcome {
    pub fn values(&self) -> Option<&[Scalar]> {
        match self {
            ParameterOutcome::Sequence { values } => Some(values),
            ParameterOutcome::NotChain { .. } => None,
        }
    }
}

/// `m(start-1) = 0`, `m(n) = Λ(n)/(1 - m(n-1))`.
pub fn minimal_parameters(probe: &ChainSequenceProbe, big_n: usize) -> ParameterOutcome {
    let one = Scalar::one();
    let mut values = vec![Scalar::zero()];
    for n in probe.start..=big_n {
        let m = probe.lambda(n) / (&one - values.last().expect("seeded"));
        if !(m.is_positive() && m < one) {
            return ParameterOutcome::NotChain { n, value: m };
        }
        values.push(m);
    }
    ParameterOutcome::Sequence { values }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaximalEstimate {
    /// `M(start-1) ..= M(N)`.
    pub values: Vec<Scalar>,
    pub horizon: usize,
    /// Largest change between the last two horizons.
    pub cauchy_gap: Scalar,
    /// Nonincreasing up to `cauchy_gap`. `None` when `Λ` is not nondecreasing on the range, so no
    /// monotonicity is claimed.
    pub nonincreasing: Option<bool>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("maximal parameters did not settle below the tolerance by horizon {horizon} (gap {gap})")]
    NoConvergence { horizon: usize, gap: f64 },
    #[error("backward recursion left (0,1] at n = {n}")]
    NotChain { n: usize },
    #[error("horizon {horizon} must be at least twice N = {n}")]
    Horizon { horizon: usize, n: usize },
    #[error(transparent)]
    Family(#[from] FamilyError),
}

pub const MAX_HORIZON: usize = 1 << 20;

fn backward(probe: &ChainSequenceProbe, big_n: usize, horizon: usize, prec: usize) -> Result<Vec<Scalar>, ChainError> {
    let one = Scalar::one().to_float(prec);
    let mut m = one.clone();
    let mut out = vec![Scalar::zero(); big_n + 2 - probe.start];
    for n in (probe.start..=horizon).rev() {
        m = &one - probe.lambda(n).to_float(prec) / &m;
        if !m.is_positive() {
            return Err(ChainError::NotChain { n: n - 1 });
        }
        if n - 1 <= big_n {
            out[n - probe.start] = m.clone();
        }
    }
    Ok(out)
}

/// Backward recursion `M(n-1) = 1 - Λ(n)/M(n)` from `M(H) = 1`, doubling
/// `H` until two horizons agree to `tol` on `[start-1, N]`.
pub fn maximal_parameters(
    probe: &ChainSequenceProbe,
    big_n: usize,
    horizon: usize,
    tol: &Scalar,
    precision: usize,
) -> Result<MaximalEstimate, ChainError> {
    if horizon < 2 * big_n || horizon < probe.start {
        return Err(ChainError::Horizon { horizon, n: big_n });
    }
    let mut h = horizon;
    let mut prev = backward(probe, big_n, h, precision)?;
    loop {
        let next_h = 2 * h;
        if next_h > MAX_HORIZON {
            return Err(ChainError::NoConvergence { horizon: h, gap: f64::NAN });
        }
        let next = backward(probe, big_n, next_h, precision)?;
        let gap = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(Scalar::zero(), Scalar::max);
        if gap < *tol {
            let lambda_nondecreasing = (probe.start..big_n).all(|n| probe.lambda(n) <= probe.lambda(n + 1));
            // values are only known to within the gap between horizons
            let nonincreasing = lambda_nondecreasing.then(|| next.windows(2).all(|w| w[1] <= &w[0] + &gap));
            return Ok(MaximalEstimate {
                values: next,
                horizon: next_h,
                cauchy_gap: gap,
                nonincreasing,
            });
        }
        if 2 * next_h > MAX_HORIZON {
            return Err(ChainError::NoConvergence {
                horizon: next_h,
                gap: gap.to_f64(),
            });
        }
        prev = next;
        h = next_h;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CfQuote {
    pub value: Scalar,
    pub depth: usize,
    /// `Some(in [2/3, 2])` when every partial numerator lies in `(0, 1/4)`;
    /// `None` when the containment premise fails.
    pub contained: Option<bool>,
    /// Bound on `|value - limit|`, present under the same premise.
    pub tail_bound: Option<Scalar>,
    /// Level whose denominator vanished; `value` is then meaningless.
    pub breakdown: Option<usize>,
}

/// `1/(1 - a_1/(1 - a_2/(1 - ...)))` evaluated bottom-up to `depth` with
/// tail seed 1.
pub fn worpitzky_cf(partials: impl Fn(usize) -> Scalar, depth: usize) -> CfQuote {
    let one = Scalar::one();
    let quarter = Scalar::ratio(1, 4);
    let a: Vec<Scalar> = (1..=depth).map(&partials).collect();
    let premise = a.iter().all(|x| x.is_positive() && *x < quarter);
    let mut psi = Scalar::one();
    let mut breakdown = None;
    for (j, aj) in a.iter().enumerate().rev() {
        let den = &one - aj * &psi;
        if den.is_zero() {
            breakdown = Some(j + 1);
            psi = Scalar::zero();
            break;
        }
        psi = den.recip();
    }
    let (contained, tail_bound) = if premise {
        let inside = psi >= Scalar::ratio(2, 3) && psi <= Scalar::int(2);
        // each level contracts seed errors by a_j/(1 - 2a_j)^2 while all tails stay ≤ 2
        let bound = a.iter().map(|x| x / (&one - x * 2).square()).fold(Scalar::one(), |acc, f| acc * f);
        (Some(inside), Some(bound))
    } else {
        (None, None)
    };
    CfQuote {
        value: psi,
        depth,
        contained,
        tail_bound,
        breakdown,
    }
}

/// `N = min{N ≥ 0 : q^{N+1} ≤ 1/4}`.
pub fn q_threshold(q: &Scalar) -> usize {
    let quarter = Scalar::ratio(1, 4);
    let mut n = 0;
    let mut qp = q.clone();
    while qp > quarter {
        qp = qp * q;
        n += 1;
    }
    n
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AbQuantities {
    pub n: usize,
    pub k: usize,
    /// `A_n(k)`.
    pub a: Scalar,
    /// `A_n(n+k)`, bounded below by 4 for `k ≥ N`.
    pub a_shifted: Scalar,
    pub b: Scalar,
    pub in_range: bool,
    pub a_ok: bool,
    pub b_ok: bool,
    /// `B_n(k) - 1/q`, which tends to 0.
    pub b_minus_limit: Scalar,
}

/// Ratio quantities `A_n`, `B_n` for little q-Legendre.
pub struct QLegendreRatios {
    pub q: Scalar,
    pub cs: CoefficientSequence,
    pub big_n: usize,
}

impl QLegendreRatios {
    pub fn new(q: Scalar) -> Result<Self, FamilyError> {
        let cs = CoefficientSequence::little_q_legendre(q.clone())?;
        let big_n = q_threshold(&q);
        Ok(QLegendreRatios { q, cs, big_n })
    }

    fn p1_at(&self, n: usize) -> Scalar {
        self.cs.p1(&(Scalar::one() - self.q.powi(n as i64)))
    }

    /// `A_n(k) = (b_{k+1} - P_1(1-q^n))(b_{k+2} - P_1(1-q^n))/(a_{k+1} c_{k+2})`.
    pub fn a_n(&self, n: usize, k: usize) -> Scalar {
        let p1 = self.p1_at(n);
        let c = self.cs.prefix(k + 2);
        (&c[k + 1].b - &p1) * (&c[k + 2].b - &p1) / (&c[k + 1].a * &c[k + 2].c)
    }

    /// `B_n(k) = (b_{n+k+1} - P_1(1-q^n)) q^k / c_{n+k+1}`.
    pub fn b_n(&self, n: usize, k: usize) -> Scalar {
        let p1 = self.p1_at(n);
        let t = self.cs.triple(n + k + 1);
        (&t.b - p1) * self.q.powi(k as i64) / &t.c
    }

    pub fn ab(&self, n: usize, k: usize) -> AbQuantities {
        let a = self.a_n(n, k);
        let a_shifted = self.a_n(n, n + k);
        let b = self.b_n(n, k);
        let in_range = k >= self.big_n;
        let a_ok = a_shifted > Scalar::int(4);
        let b_ok = b > (&self.q * 2).recip();
        let b_minus_limit = &b - self.q.recip();
        AbQuantities {
            n,
            k,
            a,
            a_shifted,
            b,
            in_range,
            a_ok,
            b_ok,
            b_minus_limit,
        }
    }
}

pub fn ab_quantities(q: &Scalar, n: usize, k: usize) -> Result<AbQuantities, FamilyError> {
    Ok(QLegendreRatios::new(q.clone())?.ab(n, k))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioBoundReport {
    pub q: Scalar,
    pub n: usize,
    pub big_n: usize,
    pub k_max: usize,
    /// Indices `n+k` where the character vanished; skipped in the ratios.
    pub zero_indices: Vec<usize>,
    pub max_ratio: Scalar,
    pub max_ratio_at: usize,
    /// `4 - max_ratio`.
    pub ratio_margin: Scalar,
    /// Smallest `1 - |α(n+N+k)| / (4^k q^{(2N+k+1)k/2})` over `k ≤ k_max`.
    pub envelope_margin: Scalar,
    pub envelope_at: usize,
    /// Largest `|ψ_{n,k} - (-B_n(k) α(n+k+1)/(α(n+k) q^k))|` with `ψ_{n,k}`
    /// from the continued fraction, and the matching tail bound.
    pub cf_gap: Scalar,
    pub cf_tail: Scalar,
    pub cf_contained: bool,
}

impl RatioBoundReport {
    pub fn passes(&self) -> bool {
        self.zero_indices.is_empty()
            && self.ratio_margin.is_positive()
            && !self.envelope_margin.is_negative()
            && self.cf_gap <= self.cf_tail
            && self.cf_contained
    }
}

/// Exact check of the uniform ratio bound and the decay envelope of
/// `α_{1-q^n}`.
pub fn ratio_bound_check(q: &Scalar, n: usize, k_max: usize) -> Result<RatioBoundReport, FamilyError> {
    ratio_bound_check_with(&QLegendreRatios::new(q.clone())?, n, k_max, 40)
}

pub fn ratio_bound_check_with(r: &QLegendreRatios, n: usize, k_max: usize, cf_depth: usize) -> Result<RatioBoundReport, FamilyError> {
    let q = &r.q;
    let big_n = r.big_n;
    let x = Scalar::one() - q.powi(n as i64);
    let alpha = eval_values(&r.cs, n + big_n + k_max + 1, &x);
    let four = Scalar::int(4);

    let mut zero_indices = Vec::new();
    let mut max_ratio = Scalar::zero();
    let mut max_ratio_at = n + big_n;
    for k in big_n..=k_max {
        let (lo, hi) = (&alpha[n + k], &alpha[n + k + 1]);
        if lo.is_zero() {
            zero_indices.push(n + k);
            continue;
        }
        let ratio = (hi / (lo * q.powi(k as i64 + 1))).abs();
        if ratio > max_ratio {
            max_ratio = ratio;
            max_ratio_at = n + k;
        }
    }

    let mut envelope_margin = Scalar::one();
    let mut envelope_at = n + big_n;
    for k in 0..=k_max {
        let e = ((2 * big_n + k + 1) * k / 2) as i64;
        let bound = four.powi(k as i64) * q.powi(e);
        let margin = Scalar::one() - alpha[n + big_n + k].abs() / bound;
        if margin < envelope_margin {
            envelope_margin = margin;
            envelope_at = n + big_n + k;
        }
    }

    let mut cf_gap = Scalar::zero();
    let mut cf_tail = Scalar::zero();
    let mut cf_contained = true;
    for k in big_n..=k_max.min(big_n + 10) {
        if alpha[n + k].is_zero() {
            continue;
        }
        let quote = worpitzky_cf(|j| r.a_n(n, n + k + j - 1).recip(), cf_depth);
        let direct = -r.b_n(n, k) * &alpha[n + k + 1] / (&alpha[n + k] * q.powi(k as i64));
        cf_gap = cf_gap.max((&quote.value - direct).abs());
        cf_contained &= quote.contained == Some(true);
        cf_tail = cf_tail.max(quote.tail_bound.unwrap_or_else(|| Scalar::int(2)));
    }

    Ok(RatioBoundReport {
        q: q.clone(),
        n,
        big_n,
        k_max,
        zero_indices,
        ratio_margin: &four - &max_ratio,
        max_ratio,
        max_ratio_at,
        envelope_margin,
        envelope_at,
        cf_gap,
        cf_tail,
        cf_contained,
    })
}

/// Float inequality noise floor: `scale · 2^{-(p-20)}`.
pub fn noise_floor(precision: usize, scale: &Scalar) -> Scalar {
    scale.abs().max(Scalar::ratio(1, 1)) * Scalar::int(2).powi(-(precision as i64 - 20))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiReport {
    pub psi: Vec<Scalar>,
    /// Smallest `(ψ_n - bound_n)/bound_n` over `2 ≤ n ≤ N`.
    pub min_rel_margin: Scalar,
    pub min_at: usize,
    /// `ρ ≥ γ(2λ+2λν+2α+1)/(2λν+2α+1)` decided on squares; `None` for
    /// float parameters.
    pub base_case_exact: Option<bool>,
    /// Exact `ρ² D² - γ² M²` for the base case (zero when `ν = 0`).
    pub base_case_margin: Option<Scalar>,
    /// Largest relative gap between `Π ψ_k` and the recurrence value of
    /// `S̃_n(ρ)`.
    pub product_gap: Scalar,
    pub positive: bool,
}

fn psi_bound_factor(tb: &TransformBundle, n: usize) -> (Scalar, Scalar) {
    let nn = Scalar::int(n as i64);
    let two_l = &tb.lambda * 2;
    let base = &two_l * &nn + &two_l * &tb.nu + &tb.alpha * 2 + 1;
    let den = &base - &two_l;
    (base, den)
}

/// `ψ_1 = ρ`, `ψ_{n+1} = (ρψ_n - t_n)/(s_n ψ_n)` with its lower bound.
pub fn pollaczek_psi(tb: &TransformBundle, big_n: usize, precision: usize) -> PsiReport {
    let rho = tb.rho.to_float(precision);
    let gamma = tb.gamma.to_float(precision);
    let mut psi = vec![rho.clone()];
    let mut positive = true;
    for n in 1..big_n {
        let prev = &psi[n - 1];
        if !prev.is_positive() {
            positive = false;
            break;
        }
        let next = (&rho * prev - tb.t(n)) / (tb.s(n) * prev);
        psi.push(next);
    }
    let mut min_rel_margin = Scalar::int(1_000_000);
    let mut min_at = 0;
    for (i, v) in psi.iter().enumerate().skip(1) {
        let (num, den) = psi_bound_factor(tb, i + 1);
        let bound = &gamma * num / den;
        let rel = (v - &bound) / bound;
        if rel < min_rel_margin {
            min_rel_margin = rel;
            min_at = i + 1;
        }
    }
    let (base_case_exact, base_case_margin) = if tb.alpha.is_exact() && tb.lambda.is_exact() && tb.nu.is_exact() {
        let (num, den) = psi_bound_factor(tb, 1);
        let margin = tb.rho_squared() * den.square() - tb.gamma_squared() * num.square();
        (Some(!margin.is_negative()), Some(margin))
    } else {
        (None, None)
    };

    // S̃ has c̃_n = t_n and ã_n = s_n
    let rw = CoefficientSequence::random_walk(tb.random_walk(true)).expect("transform yields valid random walk");
    let table = rw.float_table(big_n, precision);
    let direct = eval_values(&table, big_n, &rho);
    let mut prod = Scalar::one().to_float(precision);
    let mut product_gap = Scalar::zero();
    for (i, v) in psi.iter().enumerate() {
        prod = prod * v;
        let d = &direct[i + 1];
        product_gap = product_gap.max(((&prod - d) / d).abs());
    }
    PsiReport {
        psi,
        min_rel_margin,
        min_at,
        base_case_exact,
        base_case_margin,
        product_gap,
        positive,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChiTau {
    pub n: usize,
    /// `r_n = S_n(ω)/S̃_n(ω)` and `r_{2n}`.
    pub r_n: Scalar,
    pub r_2n: Scalar,
    pub cauchy_gap: Scalar,
    pub tau_estimate: Scalar,
    /// Largest relative residual of `χ_k(1-χ_{k-1}) = λ_k/ω²`, both
    /// families.
    pub identity_residual: Scalar,
    pub chi1_residual: Scalar,
    /// First `k` with `χ_k > χ̃_k` by the cancellation-free recursion.
    pub chi_le_violation: Option<usize>,
    /// Smallest `χ̃_k - χ_k` by direct subtraction.
    pub min_chi_gap: Scalar,
    /// Smallest `(χ̃_k - χ_k)/χ̃_k` by the recursion.
    pub min_rel_gap: Scalar,
    /// Largest disagreement between the two routes for `χ̃_k - χ_k`.
    pub gap_route_diff: Scalar,
    /// Smallest `λ̃_k - λ_k`, exact for exact parameters.
    pub min_delta_lambda: Scalar,
    /// First `k` with `χ̃_{k+1} ≤ χ̃_k`, and the smallest increment.
    pub tilde_increase_violation: Option<usize>,
    pub min_tilde_increment: Scalar,
    pub chi_tilde_head: Vec<Scalar>,
    pub chi_head: Vec<Scalar>,
}

/// The χ, χ̃ parameter sequences at `ω` and the ratio `S_n(ω)/S̃_n(ω)`,
/// evaluated in floats up to `2N + 1`.
pub fn chi_tau(params: &RandomWalkParams, big_n: usize, ctx: &NumCtx) -> Result<ChiTau, ChainError> {
    let prec = ctx.precision;
    let fl = |x: &Scalar| x.to_float(prec);
    let plain = RandomWalkParams {
        a: fl(&params.a),
        b: fl(&params.b),
        nu: fl(&params.nu),
        tilde: false,
    };
    let tilde = RandomWalkParams {
        tilde: true,
        ..plain.clone()
    };
    let omega = NumCtx::float(prec).sqrt(&plain.a).map_err(FamilyError::from)? * 2 / (&plain.a + 1);
    let top = 2 * big_n + 1;
    let cs = CoefficientSequence::random_walk(plain)?;
    let ct = CoefficientSequence::random_walk(tilde)?;
    let (c, s) = (cs.prefix(top), eval_values(&cs, top, &omega));
    let (c_t, s_t) = (ct.prefix(top), eval_values(&ct, top, &omega));

    let omega_sq = omega.square();
    let chi_of = |coeffs: &[crate::families::Triple], vals: &[Scalar]| -> Vec<Scalar> {
        // index 0 unused
        let mut out = vec![Scalar::zero()];
        for k in 1..top {
            out.push(Scalar::one() - &vals[k + 1] * &coeffs[k].a / (&omega * &vals[k]));
        }
        out
    };
    let chi = chi_of(&c, &s);
    let chi_t = chi_of(&c_t, &s_t);

    let lam = |coeffs: &[crate::families::Triple], k: usize| -> Scalar {
        if k == 1 {
            coeffs[1].c.clone()
        } else {
            &coeffs[k].c * &coeffs[k - 1].a
        }
    };
    let mut identity_residual = Scalar::zero();
    for (coeffs, x) in [(&c, &chi), (&c_t, &chi_t)] {
        for k in 2..top {
            let target = lam(coeffs, k) / &omega_sq;
            let got = &x[k] * (Scalar::one() - &x[k - 1]);
            identity_residual = identity_residual.max(((got - &target) / target).abs());
        }
    }
    let chi1_residual = ((&chi[1] - lam(&c, 1) / &omega_sq).abs()).max((&chi_t[1] - lam(&c_t, 1) / &omega_sq).abs());

    // d_k = χ̃_k - χ_k without cancellation:
    // d_k = (Δλ_k/ω² + χ_k d_{k-1}) / (1 - χ̃_{k-1}), Δλ_k = λ̃_k - λ_k exact
    // when the parameters are.
    let exact = CoefficientSequence::random_walk(RandomWalkParams {
        tilde: false,
        ..params.clone()
    })?
    .prefix(top);
    let exact_t = CoefficientSequence::random_walk(RandomWalkParams {
        tilde: true,
        ..params.clone()
    })?
    .prefix(top);
    let mut d = vec![Scalar::zero(); top];
    let mut min_delta_lambda = lam(&exact_t, 1) - lam(&exact, 1);
    d[1] = fl(&min_delta_lambda) / &omega_sq;
    for k in 2..top {
        let dl = lam(&exact_t, k) - lam(&exact, k);
        d[k] = (fl(&dl) / &omega_sq + &chi[k] * &d[k - 1]) / (Scalar::one() - &chi_t[k - 1]);
        min_delta_lambda = min_delta_lambda.min(dl);
    }

    let mut chi_le_violation = None;
    let mut min_chi_gap = Scalar::one();
    let mut min_rel_gap = Scalar::one();
    let mut gap_route_diff = Scalar::zero();
    let mut tilde_increase_violation = None;
    let mut min_tilde_increment = Scalar::one();
    for k in 1..top {
        let gap = &chi_t[k] - &chi[k];
        gap_route_diff = gap_route_diff.max((&gap - &d[k]).abs());
        if d[k].is_negative() && chi_le_violation.is_none() {
            chi_le_violation = Some(k);
        }
        min_chi_gap = min_chi_gap.min(gap);
        min_rel_gap = min_rel_gap.min(&d[k] / &chi_t[k]);
        if k + 1 < top {
            let inc = &chi_t[k + 1] - &chi_t[k];
            if !inc.is_positive() && tilde_increase_violation.is_none() {
                tilde_increase_violation = Some(k);
            }
            min_tilde_increment = min_tilde_increment.min(inc);
        }
    }
    let r_n = &s[big_n] / &s_t[big_n];
    let r_2n = &s[2 * big_n] / &s_t[2 * big_n];
    let cauchy_gap = (&r_2n - &r_n).abs();
    Ok(ChiTau {
        n: big_n,
        tau_estimate: r_2n.clone(),
        r_n,
        r_2n,
        cauchy_gap,
        identity_residual,
        chi1_residual,
        chi_le_violation,
        min_chi_gap,
        min_rel_gap,
        gap_route_diff,
        min_delta_lambda,
        tilde_increase_violation,
        min_tilde_increment,
        chi_tilde_head: chi_t.iter().skip(1).take(8).cloned().collect(),
        chi_head: chi.iter().skip(1).take(8).cloned().collect(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClaimsReport {
    /// Smallest `(2n+1) - a^n |S'_{2n+1}(0)|`, relative to `2n+1`.
    pub a_min_rel_margin: Scalar,
    pub a_min_at: usize,
    /// `S'_{2n}(0)` vanished for every even index.
    pub even_derivatives_vanish: bool,
    /// Smallest `S̃_n(ρ)/bound_n - 1` for `2 ≤ n ≤ N_B`.
    pub b_min_rel_margin: Scalar,
    pub b_min_at: usize,
    /// Exact decision of the `n = 1` case of claim B on squares.
    pub b_base_exact: Option<Scalar>,
    /// Whether `(α,λ,ν)` lies in the case-1 region, and if so the
    /// smallest `1/4 - c_n a_{n-1}` over the scanned range.
    pub case1_region: bool,
    pub case1_min_margin: Option<Scalar>,
    pub case1_min_at: Option<usize>,
}

/// Whether `λ ≥ -α-ν-1 + √(4(ν+1)(2α+ν+1)+1)/2`, decided exactly.
pub fn in_case1_region(p: &PollaczekParams) -> bool {
    let lhs = &p.lambda + &p.alpha + &p.nu + 1;
    if lhs.is_negative() {
        return false;
    }
    let d = (&p.nu + 1) * (&p.alpha * 2 + &p.nu + 1) * 4 + 1;
    lhs.square() * 4 >= d
}

/// Claims A and B together with the case-1 coefficient bound.
pub fn pollaczek_claims_ab(p: &PollaczekParams, n_a: usize, n_b: usize, n_case1: usize, ctx: &NumCtx) -> Result<ClaimsReport, FamilyError> {
    let tb = crate::families::transform_params(&p.alpha, &p.lambda, &p.nu, ctx)?;
    let prec = ctx.precision;

    // claim A on the plain S family, exact when the parameters are
    let rw = CoefficientSequence::random_walk(tb.random_walk(false))?;
    let top = 2 * n_a + 1;
    let rw_cs = if p.is_exact() { rw } else { rw.float_table(top, prec) };
    let (_, d) = eval_with_derivative(&rw_cs, top, &Scalar::zero());
    let even_derivatives_vanish = d.iter().step_by(2).all(Scalar::is_zero);
    let mut a_min_rel_margin = Scalar::int(1_000_000);
    let mut a_min_at = 0;
    let mut an = Scalar::one();
    for n in 0..=n_a {
        if n > 0 {
            an = an * &tb.a;
        }
        let bound = Scalar::int(2 * n as i64 + 1);
        let rel = (&bound - &an * d[2 * n + 1].abs()) / bound;
        if rel < a_min_rel_margin {
            a_min_rel_margin = rel;
            a_min_at = n;
        }
    }

    // claim B on S̃ at ρ, by the recurrence
    let rwt = CoefficientSequence::random_walk(tb.random_walk(true))?.float_table(n_b, prec);
    let rho = tb.rho.to_float(prec);
    let s = eval_values(&rwt, n_b, &rho);
    let gamma = tb.gamma.to_float(prec);
    let two_l = &p.lambda * 2;
    let den = &two_l * &p.nu + &p.alpha * 2 + 1;
    let mut b_min_rel_margin = Scalar::int(1_000_000);
    let mut b_min_at = 0;
    let mut gn = Scalar::one().to_float(prec);
    for (n, sn) in s.iter().enumerate().skip(1) {
        gn = gn * &gamma;
        if n == 1 {
            continue;
        }
        let bound = &gn * (&two_l * n as i64 + &den) / &den;
        let rel = (sn - &bound) / bound;
        if rel < b_min_rel_margin {
            b_min_rel_margin = rel;
            b_min_at = n;
        }
    }
    let b_base_exact = p.is_exact().then(|| {
        let num = &two_l + &den;
        tb.rho_squared() * den.square() - tb.gamma_squared() * num.square()
    });

    let case1_region = in_case1_region(p);
    let (case1_min_margin, case1_min_at) = if case1_region {
        let cs = CoefficientSequence::pollaczek(p.clone())?;
        let coeffs = cs.prefix(n_case1);
        let quarter = Scalar::ratio(1, 4);
        let mut best = None::<(Scalar, usize)>;
        for n in 1..=n_case1 {
            let prev_a = if n == 1 { Scalar::one() } else { coeffs[n - 1].a.clone() };
            let m = &quarter - &coeffs[n].c * prev_a;
            if best.as_ref().is_none_or(|(b, _)| m < *b) {
                best = Some((m, n));
            }
        }
        best.map_or((None, None), |(m, at)| (Some(m), Some(at)))
    } else {
        (None, None)
    };

    Ok(ClaimsReport {
        a_min_rel_margin,
        a_min_at,
        even_derivatives_vanish,
        b_min_rel_margin,
        b_min_at,
        b_base_exact,
        case1_region,
        case1_min_margin,
        case1_min_at,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TuranReport {
    pub points: usize,
    pub n_max: usize,
    /// Smallest `(P_n² - P_{n+1}P_{n-1})/scale` over the grid.
    pub min_rel: Scalar,
    pub min_at: (usize, Scalar),
    /// Interior points whose margin is within the float noise floor.
    pub indeterminate: Vec<(usize, Scalar)>,
    /// Points with a margin below minus the noise floor.
    pub negative: Vec<(usize, Scalar)>,
    /// Interior points with a margin that is exactly or confidently zero
    /// count as non-strict.
    pub strict_interior: bool,
}

impl TuranReport {
    pub fn nonnegative(&self) -> bool {
        self.negative.is_empty()
    }
}

/// Turán expression on `xs` for `1 ≤ n ≤ n_max`. The endpoints `±1` are
/// evaluated exactly; interior points in floats at `precision`.
pub fn turan_check(cs: &CoefficientSequence, xs: &[Scalar], n_max: usize, precision: usize, exec: Exec) -> TuranReport {
    let table = cs.float_table(n_max + 1, precision);
    let one = Scalar::one();
    let rows = exec.map(xs, |x| {
        let endpoint = x.abs() == one;
        let vals = if endpoint && cs.is_exact() {
            eval_values(cs, n_max + 1, x)
        } else {
            eval_values(&table, n_max + 1, &x.to_float(precision))
        };
        let mut out = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let sq = vals[n].square();
            let cross = &vals[n + 1] * &vals[n - 1];
            let t = &sq - &cross;
            let scale = sq + cross.abs();
            let exact = t.is_exact();
            let floor = if exact {
                Scalar::zero()
            } else {
                noise_floor(precision, &Scalar::zero())
            };
            let rel = if scale.is_zero() { Scalar::zero() } else { t / scale };
            out.push((n, rel, floor, endpoint));
        }
        out
    });
    let mut min_rel = Scalar::int(1_000_000);
    let mut min_at = (0, Scalar::zero());
    let mut indeterminate = Vec::new();
    let mut negative = Vec::new();
    let mut strict_interior = true;
    for (x, row) in xs.iter().zip(rows) {
        for (n, rel, floor, endpoint) in row {
            if rel < min_rel {
                min_rel = rel.clone();
                min_at = (n, x.clone());
            }
            if rel < -floor.clone() {
                negative.push((n, x.clone()));
            } else if !endpoint && rel.abs() <= floor {
                if floor.is_zero() {
                    strict_interior = false;
                } else {
                    indeterminate.push((n, x.clone()));
                }
            }
        }
    }
    TuranReport {
        points: xs.len(),
        n_max,
        min_rel,
        min_at,
        indeterminate,
        negative,
        strict_interior,
    }
}

/// `k/d` for `k = -d..=d`.
pub fn unit_grid(d: i64) -> Vec<Scalar> {
    (-d..=d).map(|k| Scalar::ratio(k, d)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaguerreTuran {
    /// Smallest `ℓ_n² - ℓ_{n+1}ℓ_{n-1}` with `ℓ_k = L_k(x)/L_k(0)`, `1 ≤ n ≤ N`.
    pub min_margin: Scalar,
    pub min_at: usize,
    pub all_positive: bool,
}

/// Normalized Turán expression of `L_n^{(2α)}` at `x`, exact for rational
/// inputs.
pub fn laguerre_turan(two_alpha: &Scalar, x: &Scalar, n_max: usize) -> LaguerreTuran {
    let zero = Scalar::zero();
    let at_x = laguerre_values(n_max + 1, x, two_alpha, &zero);
    let at_0 = laguerre_values(n_max + 1, &zero, two_alpha, &zero);
    let ell: Vec<Scalar> = at_x.iter().zip(&at_0).map(|(a, b)| a / b).collect();
    let mut min_margin = Scalar::int(1_000_000);
    let mut min_at = 1;
    let mut all_positive = true;
    for n in 1..=n_max {
        let m = ell[n].square() - &ell[n + 1] * &ell[n - 1];
        all_positive &= m.is_positive();
        if m < min_margin {
            min_margin = m;
            min_at = n;
        }
    }
    LaguerreTuran {
        min_margin,
        min_at,
        all_positive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::transform_params;

    fn r(p: i64, q: i64) -> Scalar {
        Scalar::ratio(p, q)
    }

    #[test]
    fn minimal_parameter_examples() {
        let m = minimal_parameters(&ChainSequenceProbe::constant(r(1, 4)), 3);
        assert_eq!(m.values().unwrap(), &[r(0, 1), r(1, 4), r(1, 3), r(3, 8)]);
        for (n, v) in minimal_parameters(&ChainSequenceProbe::constant(r(1, 4)), 50)
            .values()
            .unwrap()
            .iter()
            .enumerate()
        {
            assert_eq!(*v, r(n as i64, 2 * n as i64 + 2));
        }
        let bad = ChainSequenceProbe::from_values(vec![r(9, 10), r(9, 10)]);
        match minimal_parameters(&bad, 2) {
            ParameterOutcome::NotChain { n, value } => {
                assert_eq!(n, 2);
                assert_eq!(value, r(9, 1));
            }
            other => panic!("expected a negative certificate, got {other:?}"),
        }
    }

    #[test]
    fn pollaczek_minimal_parameters_are_coefficients() {
        let p = PollaczekParams::ratios((0, 1), (1, 4), (0, 1)).unwrap();
        let probe = ChainSequenceProbe::pollaczek_phi(p.clone()).unwrap();
        let cs = CoefficientSequence::pollaczek(p).unwrap();
        let m = minimal_parameters(&probe, 200);
        for (n, v) in m.values().unwrap().iter().enumerate() {
            assert_eq!(*v, cs.c(n));
        }
        assert_eq!(probe.check_known(200), None);
    }

    #[test]
    fn maximal_parameter_examples() {
        let tol = Scalar::int(2).powi(-40);
        let est = maximal_parameters(&ChainSequenceProbe::constant(r(3, 16)), 10, 64, &tol, 128).unwrap();
        assert!(est.values.iter().all(|v| (v - r(3, 4)).abs() < Scalar::int(2).powi(-38)));
        assert_eq!(est.nonincreasing, Some(true));
        let loose = Scalar::ratio(1, 100_000);
        let est = maximal_parameters(&ChainSequenceProbe::constant(r(1, 4)), 10, 64, &loose, 128).unwrap();
        assert!(est.values.iter().all(|v| (v - r(1, 2)).abs().to_f64() < 1e-4));
        let p = PollaczekParams::ratios((0, 1), (1, 4), (0, 1)).unwrap();
        let probe = ChainSequenceProbe::pollaczek_phi(p.clone()).unwrap();
        let cs = CoefficientSequence::pollaczek(p).unwrap();
        let est = maximal_parameters(&probe, 50, 128, &loose, 128).unwrap();
        for n in 1..=50 {
            assert!(est.values[n] > cs.c(n));
        }
        assert!(maximal_parameters(&probe, 50, 10, &loose, 128).is_err());
    }

    #[test]
    fn worpitzky_examples() {
        let q = worpitzky_cf(|_| r(1, 8), 80);
        assert!((q.value.to_f64() - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(q.contained, Some(true));
        let q = worpitzky_cf(|_| r(10, 259), 40);
        assert_eq!(q.contained, Some(true));
        let q = worpitzky_cf(|_| r(1, 8), 0);
        assert_eq!(q.value, Scalar::one());
        let q = worpitzky_cf(|_| r(1, 2), 5);
        assert_eq!(q.contained, None);
        assert_eq!(q.breakdown, Some(4));
    }

    #[test]
    fn thresholds_and_ab() {
        assert_eq!(q_threshold(&r(1, 2)), 1);
        assert_eq!(q_threshold(&r(3, 10)), 1);
        assert_eq!(q_threshold(&r(7, 10)), 3);
        assert_eq!(q_threshold(&r(3, 4)), 4);
        let ab = ab_quantities(&r(1, 2), 0, 1).unwrap();
        assert_eq!(ab.b, r(4495, 2160));
        assert!(ab.b_ok && ab.a_ok && ab.in_range);
        assert!((ab.a.to_f64() - 25.9).abs() < 0.05);
        for q in [r(3, 10), r(1, 2), r(7, 10)] {
            for n in 0..=10 {
                assert!(ab_quantities(&q, n, 200).unwrap().b_minus_limit.abs().to_f64() < 1e-6);
            }
        }
    }

    #[test]
    fn ratio_bounds() {
        let rep = ratio_bound_check(&r(1, 2), 0, 40).unwrap();
        assert!(rep.passes(), "{rep:?}");
        assert!((rep.max_ratio.to_f64() - 1.0).abs() < 0.6);
        for n in 0..=5 {
            let rep = ratio_bound_check(&r(3, 4), n, 40).unwrap();
            assert_eq!(rep.big_n, 4);
            assert!(rep.passes(), "n={n}: {rep:?}");
        }
    }

    #[test]
    fn psi_worked_point() {
        let ctx = NumCtx::default();
        let tb = transform_params(&Scalar::zero(), &r(1, 4), &Scalar::zero(), &ctx).unwrap();
        let rep = pollaczek_psi(&tb, 1000, 256);
        let s3 = 3f64.sqrt();
        assert!((rep.psi[0].to_f64() - s3 / 2.0).abs() < 1e-15);
        assert!((rep.psi[1].to_f64() - 17.0 / (12.0 * s3)).abs() < 1e-15);
        assert!(rep.psi[1].to_f64() >= 4.0 / (3.0 * s3));
        assert_eq!(rep.base_case_exact, Some(true));
        assert_eq!(rep.base_case_margin, Some(Scalar::zero()));
        assert!(rep.min_rel_margin.is_positive());
        assert!(rep.product_gap.to_f64() < 1e-60);
    }

    #[test]
    fn chi_examples() {
        let ctx = NumCtx::float(256);
        let zero_nu = RandomWalkParams::new(r(3, 1), r(9, 2), r(0, 1), false).unwrap();
        let c = chi_tau(&zero_nu, 200, &ctx).unwrap();
        assert!((c.r_n.to_f64() - 1.0).abs() < 1e-60 && (c.r_2n.to_f64() - 1.0).abs() < 1e-60);
        let p = RandomWalkParams::new(r(3, 1), r(9, 2), r(1, 1), false).unwrap();
        let c = chi_tau(&p, 500, &ctx).unwrap();
        assert!(c.chi_le_violation.is_none());
        assert!(c.tilde_increase_violation.is_none());
        assert!(c.identity_residual.to_f64() < 1e-50);
        assert!(c.chi1_residual.to_f64() < 1e-60);
        let omega_sq = r(3, 4);
        let ctilde1 = p.c_tilde(1);
        assert!((&c.chi_tilde_head[0] - ctilde1 / omega_sq).abs().to_f64() < 1e-60);
    }

    #[test]
    fn claims_worked_point() {
        let ctx = NumCtx::default();
        let p = PollaczekParams::ratios((0, 1), (1, 4), (0, 1)).unwrap();
        let rep = pollaczek_claims_ab(&p, 200, 500, 0, &ctx).unwrap();
        assert!(rep.even_derivatives_vanish);
        assert!(!rep.a_min_rel_margin.is_negative());
        assert!(rep.b_min_rel_margin.is_positive());
        assert_eq!(rep.b_base_exact, Some(Scalar::zero()));
        let p = PollaczekParams::ratios((0, 1), (1, 5), (0, 1)).unwrap();
        assert!(in_case1_region(&p));
        let rep = pollaczek_claims_ab(&p, 10, 10, 1000, &ctx).unwrap();
        assert!(!rep.case1_min_margin.unwrap().is_negative());
        assert!(!in_case1_region(&PollaczekParams::ratios((0, 1), (1, 10), (0, 1)).unwrap()));
    }

    #[test]
    fn turan_examples() {
        let ctx = NumCtx::default();
        let tb = transform_params(&Scalar::zero(), &r(1, 4), &r(1, 1), &ctx).unwrap();
        for tilde in [true, false] {
            let cs = CoefficientSequence::random_walk(tb.random_walk(tilde)).unwrap();
            let rep = turan_check(&cs, &unit_grid(32), 60, 256, Exec::default());
            assert!(rep.nonnegative() && rep.strict_interior && rep.indeterminate.is_empty(), "{rep:?}");
        }
        let lt = laguerre_turan(&Scalar::zero(), &r(-1, 2), 100);
        assert!(lt.all_positive);
        let lt = laguerre_turan(&r(1, 2), &Scalar::zero(), 20);
        assert!(lt.min_margin.is_zero());
    }
}
