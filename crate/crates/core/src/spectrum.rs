//! Pointwise evaluation, characters, the Fourier transform and the
//! discrete little q-Legendre measure.

use serde::{Deserialize, Serialize};

use crate::families::{monic_view, CoefficientSequence, FamilyError};
use crate::hypergroup::{HSequence, LinearizationTable};
use crate::par::Exec;
use crate::scalar::{NumCtx, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalForm {
    Normalized,
    Orthonormal,
    Monic,
    Derivative,
}

impl std::str::FromStr for EvalForm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "normalized" => EvalForm::Normalized,
            "orthonormal" => EvalForm::Orthonormal,
            "monic" => EvalForm::Monic,
            "derivative" => EvalForm::Derivative,
            _ => return Err(format!("unknown form `{s}`")),
        })
    }
}

/// `P_0(x) ..= P_n(x)` by forward recurrence.
pub fn eval_values(cs: &CoefficientSequence, n: usize, x: &Scalar) -> Vec<Scalar> {
    let coeffs = cs.prefix(n);
    let p1 = cs.p1(x);
    let mut out = Vec::with_capacity(n + 1);
    out.push(Scalar::one());
    if n == 0 {
        return out;
    }
    out.push(p1.clone());
    for k in 1..n {
        let t = &coeffs[k];
        let next = ((&p1 - &t.b) * &out[k] - &t.c * &out[k - 1]) / &t.a;
        out.push(next);
    }
    out
}

/// `(P_k(x), P_k'(x))` for `k ≤ n`, differentiating the recurrence.
pub fn eval_with_derivative(cs: &CoefficientSequence, n: usize, x: &Scalar) -> (Vec<Scalar>, Vec<Scalar>) {
    let coeffs = cs.prefix(n);
    let dp1 = coeffs[0].a.recip();
    let p1 = cs.p1(x);
    let mut v = vec![Scalar::one()];
    let mut d = vec![Scalar::zero()];
    if n == 0 {
        return (v, d);
    }
    v.push(p1.clone());
    d.push(dp1.clone());
    for k in 1..n {
        let t = &coeffs[k];
        let shifted = &p1 - &t.b;
        let nv = (&shifted * &v[k] - &t.c * &v[k - 1]) / &t.a;
        let nd = (&shifted * &d[k] + &dp1 * &v[k] - &t.c * &d[k - 1]) / &t.a;
        v.push(nv);
        d.push(nd);
    }
    (v, d)
}

/// Monic `σ_0..=σ_n` through the monic recurrence.
pub fn eval_monic(cs: &CoefficientSequence, n: usize, x: &Scalar) -> Vec<Scalar> {
    let view = monic_view(cs, n);
    let mut out = vec![Scalar::one()];
    if n == 0 {
        return out;
    }
    out.push(x - &view.shift[0]);
    for k in 1..n {
        let next = (x - &view.shift[k]) * &out[k] - &view.lambda[k] * &out[k - 1];
        out.push(next);
    }
    out
}

/// Orthonormal `p_0..=p_n` through the Jacobi recurrence.
pub fn eval_orthonormal(cs: &CoefficientSequence, n: usize, x: &Scalar, ctx: &NumCtx) -> Result<Vec<Scalar>, FamilyError> {
    let view = crate::families::orthonormal_view(cs, n, ctx)?;
    let mut out = vec![Scalar::one()];
    if n == 0 {
        return Ok(out);
    }
    out.push((x - &view.diag[0]) / &view.offdiag[0]);
    for k in 1..n {
        let next = ((x - &view.diag[k]) * &out[k] - &view.offdiag[k - 1] * &out[k - 1]) / &view.offdiag[k];
        out.push(next);
    }
    Ok(out)
}

pub fn eval_poly(cs: &CoefficientSequence, n: usize, x: &Scalar, form: EvalForm, ctx: &NumCtx) -> Result<Scalar, FamilyError> {
    let x = ctx.adopt(x.clone());
    let last = |mut v: Vec<Scalar>| v.pop().expect("nonempty");
    Ok(match form {
        EvalForm::Normalized => last(eval_values(cs, n, &x)),
        EvalForm::Derivative => last(eval_with_derivative(cs, n, &x).1),
        EvalForm::Monic => last(eval_monic(cs, n, &x)),
        EvalForm::Orthonormal => last(eval_orthonormal(cs, n, &x, ctx)?),
    })
}

/// `α_x(n) = P_n(x)` for `n ≤ K`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Character {
    pub x: Scalar,
    pub values: Vec<Scalar>,
    pub derivatives: Option<Vec<Scalar>>,
    /// First `n` with `|P_n(x)| > 1`, recorded only when the caller asserted
    /// that `x` lies in the support or equals 1.
    pub bound_violation: Option<usize>,
}

impl Character {
    pub fn new(cs: &CoefficientSequence, x: &Scalar, k: usize, assert_bounded: bool, with_derivative: bool) -> Self {
        let (values, derivatives) = if with_derivative {
            let (v, d) = eval_with_derivative(cs, k, x);
            (v, Some(d))
        } else {
            (eval_values(cs, k, x), None)
        };
        let one = Scalar::one();
        let bound_violation = if assert_bounded {
            values.iter().position(|v| v.abs() > one)
        } else {
            None
        };
        Character {
            x: x.clone(),
            values,
            derivatives,
            bound_violation,
        }
    }

    pub fn truncation(&self) -> usize {
        self.values.len() - 1
    }

    pub fn as_sequence(&self) -> HSequence {
        HSequence::from_dense(&self.values)
    }

    pub fn csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "value"])?;
        for (n, v) in self.values.iter().enumerate() {
            w.write_record([n.to_string(), scalar_cell(v)])?;
        }
        Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8 csv"))
    }
}

fn scalar_cell(v: &Scalar) -> String {
    match v.as_rational() {
        Some(r) => crate::scalar::format_rational(r),
        None => v.to_decimal(40),
    }
}

/// `f̂(x) = Σ f(k) P_k(x) h(k)`.
pub fn fourier(t: &LinearizationTable, f: &HSequence, x: &Scalar) -> Scalar {
    let Some(hi) = f.max_index() else {
        return Scalar::zero();
    };
    let p = eval_values(t.coefficients(), hi, x);
    let h = t.haar_prefix(hi);
    f.iter().map(|(k, v)| v * &p[k] * &h[k]).sum()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub location: Scalar,
    pub mass: Scalar,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
    /// Upper bound for the mass beyond the listed atoms.
    pub tail_bound: Scalar,
}

impl DiscreteMeasure {
    pub fn total_mass(&self) -> Scalar {
        self.atoms.iter().map(|a| &a.mass).sum()
    }

    /// `Σ f(x_m) w_m` over the listed atoms.
    pub fn integrate(&self, f: impl Fn(&Scalar) -> Scalar) -> Scalar {
        self.atoms.iter().map(|a| f(&a.location) * &a.mass).sum()
    }

    pub fn csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["m", "location", "mass"])?;
        for (m, a) in self.atoms.iter().enumerate() {
            w.write_record([m.to_string(), scalar_cell(&a.location), scalar_cell(&a.mass)])?;
        }
        Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8 csv"))
    }
}

/// Atoms `(1 - q^m, q^m (1-q))` for `m ≤ K`, tail `q^{K+1}`.
pub fn q_measure(q: &Scalar, k: usize) -> Result<DiscreteMeasure, FamilyError> {
    let one = Scalar::one();
    if !(q.is_positive() && *q < one) {
        return Err(FamilyError::Domain(format!("q = {q} must lie in (0,1)")));
    }
    let mut atoms = Vec::with_capacity(k + 1);
    let mut qm = Scalar::one();
    for _ in 0..=k {
        atoms.push(Atom {
            location: &one - &qm,
            mass: &qm * (&one - q),
        });
        qm = qm * q;
    }
    Ok(DiscreteMeasure { atoms, tail_bound: qm })
}

/// `P_0..=P_{n_max}` at every atom `1 - q^m`, `m ≤ K`; row `m` is the
/// character at the `m`-th atom.
pub fn atom_characters(cs: &CoefficientSequence, q: &Scalar, n_max: usize, k: usize, exec: Exec) -> Vec<Vec<Scalar>> {
    cs.prefix(n_max);
    let one = Scalar::one();
    exec.map_range(0..k + 1, |m| eval_values(cs, n_max, &(&one - q.powi(m as i64))))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncated {
    pub value: Scalar,
    pub tail_bound: Scalar,
}

/// `∫ p_n^power dμ` over the first `K+1` atoms of the q-Legendre measure,
/// with `p_n = √h(n) P_n`; the tail uses `|P_n| ≤ 1` on the support.
pub fn integrate_poly_power(q: &Scalar, n: usize, power: u32, k: usize) -> Result<Truncated, FamilyError> {
    let table = LinearizationTable::from_sequence(CoefficientSequence::little_q_legendre(q.clone())?);
    let chars = atom_characters(table.coefficients(), q, n, k, Exec::default());
    let mu = q_measure(q, k)?;
    Ok(integrate_power_from(&chars, &mu, &table.haar_prefix(n), n, power))
}

/// Same as [`integrate_poly_power`] on precomputed atom characters.
pub fn integrate_power_from(chars: &[Vec<Scalar>], mu: &DiscreteMeasure, h: &[Scalar], n: usize, power: u32) -> Truncated {
    assert!(power == 2 || power == 4, "power must be 2 or 4");
    let half = (power / 2) as i64;
    let hn = h[n].powi(half);
    let sum: Scalar = chars.iter().zip(&mu.atoms).map(|(c, a)| c[n].powi(power as i64) * &a.mass).sum();
    Truncated {
        value: &hn * sum,
        tail_bound: hn * &mu.tail_bound,
    }
}

/// The terminating basic hypergeometric form of `P_n(x)` for little
/// q-Legendre.
pub fn q_hypergeometric_r(q: &Scalar, n: usize, x: &Scalar) -> Scalar {
    let one = Scalar::one();
    let z = q - q * x;
    let q_neg_n = q.powi(-(n as i64));
    let q_n1 = q.powi(n as i64 + 1);
    let mut term = Scalar::one();
    let mut sum = Scalar::one();
    for k in 0..n {
        let qk = q.powi(k as i64);
        let qqk = &qk * q; // q^{k+1}
        let num = (&one - &q_neg_n * &qk) * (&one - &q_n1 * &qk);
        let den = (&one - &qqk).square();
        term = term * num / den * &z;
        sum = sum + &term;
    }
    sum
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupportInterval {
    /// Bracket `[c(N), 1/2]` for the limit of `c_n`.
    pub c_limit: Scalar,
    pub c_upper: Scalar,
    /// `2√(c(1-c))` at the lower and upper bracket ends.
    pub endpoint: Scalar,
    pub endpoint_upper: Scalar,
    pub premise_ok: bool,
    pub premise_failure: Option<String>,
}

/// Support `[-2√(c(1-c)), 2√(c(1-c))]` for symmetric families with
/// nondecreasing `c_n → c`.
pub fn support_interval(cs: &CoefficientSequence, big_n: usize, ctx: &NumCtx) -> Result<SupportInterval, FamilyError> {
    let coeffs = cs.prefix(big_n);
    let mut failure = None;
    if let Some(n) = (0..=big_n).find(|&n| !coeffs[n].b.is_zero()) {
        failure = Some(format!("b({n}) is nonzero"));
    } else if let Some(n) = (1..big_n).find(|&n| coeffs[n].c > coeffs[n + 1].c) {
        failure = Some(format!("c decreases at n = {n}"));
    }
    let one = Scalar::one();
    let c = coeffs[big_n].c.clone();
    let half = Scalar::ratio(1, 2);
    let upper = if c > half { c.clone() } else { half };
    let end = |c: &Scalar| -> Result<Scalar, FamilyError> { Ok(ctx.sqrt(&(c * (&one - c)))? * 2) };
    Ok(SupportInterval {
        endpoint: end(&c)?,
        endpoint_upper: end(&upper)?,
        c_limit: c,
        c_upper: upper,
        premise_ok: failure.is_none(),
        premise_failure: failure,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: Scalar,
    /// Modulus of the first omitted term times the product prefactor.
    pub tail_estimate: Scalar,
    /// `γ_k = q^{k(3k+1)/2}/(q;q)_k^3` for the summed `k`.
    pub gammas: Vec<Scalar>,
}

/// `(q;q)_∞ Σ_{k<terms} (-1)^k q^{k(3k+1)/2}/(q;q)_k^3`, the limit of
/// `P_n(1-q^n)`.
pub fn character_limit_series(q: &Scalar, terms: usize, precision: usize) -> SeriesValue {
    let one = Scalar::one();
    let qf = q.to_float(precision + 32);
    // truncate (q;q)_∞ once q^j drops below the working precision
    let cutoff = Scalar::int(2).powi(-(precision as i64 + 40));
    let mut prod = Scalar::one().to_float(precision + 32);
    let mut qj = qf.clone();
    while qj > cutoff {
        prod = prod * (&one - &qj);
        qj = qj * &qf;
    }
    let gamma = |k: usize| -> Scalar {
        let mut poch = Scalar::one();
        for j in 1..=k {
            poch = poch * (&one - q.powi(j as i64));
        }
        let e = (k * (3 * k + 1) / 2) as i64;
        q.powi(e) / poch.powi(3)
    };
    let gammas: Vec<Scalar> = (0..terms).map(gamma).collect();
    let mut sum = Scalar::zero();
    for (k, g) in gammas.iter().enumerate() {
        sum = if k % 2 == 0 { sum + g } else { sum - g };
    }
    let value = (&prod * sum).to_float(precision);
    let tail_estimate = (&prod * gamma(terms)).abs().to_float(precision);
    SeriesValue {
        value,
        tail_estimate,
        gammas,
    }
}

/// Heuristic growth profile of `|P_n'(x)|`; never used for pass/fail.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub max: Scalar,
    pub argmax: usize,
    pub last_window_max: Scalar,
    /// Global maximum reached in the first half; a heuristic only.
    pub bounded_looking: bool,
}

pub fn derivative_growth(cs: &CoefficientSequence, x: &Scalar, big_n: usize, precision: usize) -> GrowthProfile {
    let table = cs.float_table(big_n, precision);
    let (_, d) = eval_with_derivative(&table, big_n, &x.to_float(precision));
    let mut max = Scalar::zero();
    let mut argmax = 0;
    let mut last_window_max = Scalar::zero();
    for (n, v) in d.iter().enumerate() {
        let a = v.abs();
        if 2 * n > big_n && a > last_window_max {
            last_window_max = a.clone();
        }
        if a > max {
            max = a;
            argmax = n;
        }
    }
    GrowthProfile {
        max,
        argmax,
        last_window_max,
        bounded_looking: 2 * argmax <= big_n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::PollaczekParams;

    fn r(p: i64, q: i64) -> Scalar {
        Scalar::ratio(p, q)
    }

    fn qleg(q: Scalar) -> CoefficientSequence {
        CoefficientSequence::little_q_legendre(q).unwrap()
    }

    #[test]
    fn evaluation_basics() {
        let ctx = NumCtx::default();
        let cs = qleg(r(1, 2));
        let v = eval_values(&cs, 50, &Scalar::one());
        assert!(v.iter().all(|p| *p == Scalar::one()));
        assert_eq!(eval_poly(&cs, 1, &Scalar::zero(), EvalForm::Normalized, &ctx).unwrap(), r(-1, 2));
        assert_eq!(eval_poly(&cs, 2, &Scalar::zero(), EvalForm::Normalized, &ctx).unwrap(), r(1, 8));
        for x in [r(0, 1), r(1, 3), r(-2, 1)] {
            assert_eq!(eval_poly(&cs, 1, &x, EvalForm::Derivative, &ctx).unwrap(), r(3, 2));
        }
        let p = CoefficientSequence::pollaczek(PollaczekParams::ratios((1, 3), (1, 5), (1, 2)).unwrap()).unwrap();
        assert!(eval_values(&p, 50, &Scalar::one()).iter().all(|v| *v == Scalar::one()));
    }

    #[test]
    fn forms_are_rescalings() {
        // σ_n = P_n / lead(P_n) and p_n = √h(n) P_n
        let ctx = NumCtx::default();
        let cs = qleg(r(1, 3));
        let t = LinearizationTable::from_sequence(qleg(r(1, 3)));
        let x = r(2, 7);
        let p = eval_values(&cs, 12, &x);
        let monic = eval_monic(&cs, 12, &x);
        let polys = t.monomials(12);
        for n in 0..=12 {
            assert_eq!(&p[n] / &polys[n][n], monic[n]);
        }
        let on = eval_orthonormal(&cs, 12, &x, &ctx).unwrap();
        let h = t.haar_prefix(12);
        for n in 0..=12 {
            let expect = p[n].square() * &h[n];
            assert!(((on[n].square() - &expect) / expect).abs().to_f64() < 1e-60);
        }
    }

    #[test]
    fn derivative_matches_monomials() {
        let t = LinearizationTable::from_sequence(qleg(r(1, 2)));
        let polys = t.monomials(10);
        let x = r(-3, 5);
        let (_, d) = eval_with_derivative(t.coefficients(), 10, &x);
        for n in 0..=10 {
            let horner: Scalar = polys[n]
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as i64 * x.powi(i as i64 - 1))
                .sum();
            assert_eq!(d[n], horner);
        }
    }

    #[test]
    fn kappa_reproduces_derivative() {
        let ctx = NumCtx::float(256);
        let t = LinearizationTable::from_sequence(qleg(r(1, 2)));
        let step = Scalar::int(2).powi(-20).to_float(256);
        for n in 1..=12 {
            let kappa = t.kappa(n);
            let h = t.haar_prefix(n);
            for x in [r(0, 1), r(1, 2), r(-1, 2)] {
                let x = ctx.adopt(x);
                let p = eval_values(t.coefficients(), n, &x);
                let lhs: Scalar = kappa.iter().map(|(k, v)| v * &p[k] * &h[k]).sum();
                let up = eval_values(t.coefficients(), n, &(&x + &step)).pop().unwrap();
                let down = eval_values(t.coefficients(), n, &(&x - &step)).pop().unwrap();
                let fd = (up - down) / (&step * 2);
                let scale = fd.abs().max(Scalar::one());
                assert!((lhs - fd).abs() < Scalar::int(2).powi(-30) * scale, "n={n}");
            }
        }
    }

    #[test]
    fn characters() {
        let cs = qleg(r(1, 2));
        let one = Character::new(&cs, &Scalar::one(), 30, true, false);
        assert!(one.values.iter().all(|v| *v == Scalar::one()));
        assert!(one.bound_violation.is_none());
        let c = Character::new(&cs, &Scalar::zero(), 2, true, false);
        assert_eq!(c.values, vec![Scalar::one(), r(-1, 2), r(1, 8)]);
        let c = Character::new(&cs, &Scalar::zero(), 41, true, false);
        for k in 1..=40 {
            let ratio = (&c.values[k + 1] / (&c.values[k] * r(1, 2).powi(k as i64 + 1))).abs();
            assert!(ratio < Scalar::int(4));
        }
        let off = Character::new(&cs, &Scalar::int(3), 5, true, false);
        assert_eq!(off.bound_violation, Some(1));
        assert!(c.csv().unwrap().starts_with("n,value\n0,1\n1,-1/2\n2,1/8\n"));
    }

    #[test]
    fn multiplicativity_of_characters() {
        // T_m α_x (n) = α_x(m) α_x(n)
        let t = LinearizationTable::from_sequence(qleg(r(1, 2)));
        let x = Scalar::zero();
        let alpha = eval_values(t.coefficients(), 20, &x);
        for m in 0..=10 {
            for n in 0..=10 {
                let g = t.linearize(m, n);
                let lhs: Scalar = g.iter().map(|(k, v)| v * &alpha[k]).sum();
                assert_eq!(lhs, &alpha[m] * &alpha[n]);
            }
        }
    }

    #[test]
    fn fourier_transform() {
        let q = r(1, 2);
        let t = LinearizationTable::from_sequence(qleg(q.clone()));
        for x in [r(0, 1), r(1, 3), r(7, 8)] {
            assert_eq!(fourier(&t, &t.epsilon(0), &x), Scalar::one());
        }
        let d = t.epsilon(0).sub(&t.epsilon(1));
        for n in 0..10 {
            let x = Scalar::one() - q.powi(n);
            assert_eq!(fourier(&t, &d, &x), (&q + 1) * q.powi(n));
        }
        let e1 = t.epsilon(1);
        let ee = t.convolve(&e1, &e1);
        for x in [r(0, 1), r(2, 5), r(-1, 3)] {
            assert_eq!(fourier(&t, &ee, &x), fourier(&t, &e1, &x).square());
        }
    }

    #[test]
    fn measure_and_integrals() {
        let q = r(1, 2);
        let mu = q_measure(&q, 60).unwrap();
        assert_eq!(mu.atoms[0].location, Scalar::zero());
        assert_eq!(mu.atoms[0].mass, r(1, 2));
        assert_eq!(mu.total_mass(), Scalar::one() - q.powi(61));
        assert_eq!(&mu.total_mass() + &mu.tail_bound, Scalar::one());
        let cs = qleg(q.clone());
        let p1 = mu.integrate(|x| cs.p1(x));
        assert!(p1.abs() <= mu.tail_bound);
        for n in 0..=10 {
            let i = integrate_poly_power(&q, n, 2, 120).unwrap();
            assert!((&i.value - 1).abs() <= i.tail_bound, "n={n}");
        }
        let i0 = integrate_poly_power(&r(1, 5), 0, 4, 50).unwrap();
        assert_eq!(i0.value, Scalar::one() - r(1, 5).powi(51));
        let a = integrate_poly_power(&r(1, 5), 20, 4, 140).unwrap();
        let b = integrate_poly_power(&r(1, 5), 40, 4, 140).unwrap();
        assert!(b.value > a.value * 5);
    }

    #[test]
    fn plancherel_on_truncation() {
        let q = r(1, 2);
        let t = LinearizationTable::from_sequence(qleg(q.clone()));
        let mu = q_measure(&q, 150).unwrap();
        let f = HSequence::from_pairs([(0, r(1, 2)), (1, r(-3, 1)), (3, r(2, 7)), (5, r(1, 1))]);
        let n = t.norms(&f);
        let chars = atom_characters(t.coefficients(), &q, 5, 150, Exec::default());
        let h = t.haar_prefix(5);
        let spectral: Scalar = chars
            .iter()
            .zip(&mu.atoms)
            .map(|(c, a)| f.iter().map(|(k, v)| v * &c[k] * &h[k]).sum::<Scalar>().square() * &a.mass)
            .sum();
        assert!((&n.l2sq - spectral).abs() <= n.l1.square() * &mu.tail_bound);
        assert_eq!(t.norms(&t.epsilon(0)).l2sq, Scalar::one());
    }

    #[test]
    fn hypergeometric_form() {
        let q = r(1, 2);
        let cs = qleg(q.clone());
        assert_eq!(q_hypergeometric_r(&q, 0, &r(1, 3)), Scalar::one());
        assert_eq!(q_hypergeometric_r(&q, 1, &Scalar::zero()), r(-1, 2));
        for x in [r(0, 1), r(1, 2), r(1, 1)] {
            let v = eval_values(&cs, 20, &x);
            for n in 0..=20 {
                assert_eq!(q_hypergeometric_r(&q, n, &x), v[n]);
            }
        }
    }

    #[test]
    fn support_intervals() {
        let ctx = NumCtx::default();
        let c = CoefficientSequence::constant_symmetric(r(1, 4)).unwrap();
        let s = support_interval(&c, 10, &ctx).unwrap();
        assert!((s.endpoint.to_f64() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let p = CoefficientSequence::pollaczek(PollaczekParams::ratios((0, 1), (1, 4), (0, 1)).unwrap()).unwrap();
        let s = support_interval(&p, 2000, &ctx).unwrap();
        assert!(s.premise_ok && s.endpoint.to_f64() > 0.999);
        let rw = crate::families::RandomWalkParams::new(r(3, 1), r(9, 2), r(1, 1), true).unwrap();
        let omega = rw.omega(&ctx).unwrap();
        let s = support_interval(&CoefficientSequence::random_walk(rw).unwrap(), 4000, &ctx).unwrap();
        assert!(s.premise_ok);
        assert!((s.endpoint - omega).abs().to_f64() < 1e-3);
        let s = support_interval(&qleg(r(1, 2)), 10, &ctx).unwrap();
        assert!(!s.premise_ok);
    }

    #[test]
    fn limit_series() {
        let s = character_limit_series(&r(1, 2), 6, 256);
        assert!((s.value.to_f64() + 0.2463).abs() < 5e-5);
        let s = character_limit_series(&r(1, 10), 30, 256);
        let cs = qleg(r(1, 10));
        let p30 = eval_values(&cs, 30, &(Scalar::one() - r(1, 10).powi(30))).pop().unwrap();
        assert!((s.value - p30).abs().to_f64() < 1e-6);
        let s = character_limit_series(&r(1, 2), 1, 256);
        assert_eq!(s.gammas, vec![Scalar::one()]);
    }

    #[test]
    fn growth_profiles() {
        let u = CoefficientSequence::ultraspherical(Scalar::zero()).unwrap();
        assert!(!derivative_growth(&u, &Scalar::one(), 400, 128).bounded_looking);
        let p = CoefficientSequence::pollaczek(PollaczekParams::ratios((0, 1), (1, 20), (0, 1)).unwrap()).unwrap();
        assert!(derivative_growth(&p, &Scalar::zero(), 2000, 128).bounded_looking);
        let u1 = CoefficientSequence::ultraspherical(Scalar::one()).unwrap();
        assert!(derivative_growth(&u1, &Scalar::zero(), 2000, 128).bounded_looking);
        // the Legendre case grows like √n at 0
        assert!(!derivative_growth(&u, &Scalar::zero(), 2000, 128).bounded_looking);
    }
}
