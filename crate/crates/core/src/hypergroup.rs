//! Linearization coefficients `g(m,n;k)`, Haar weights and the convolution
//! structure they induce on finitely supported sequences.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::families::CoefficientSequence;
use crate::par::Exec;
use crate::scalar::{format_rational, Scalar};

/// `g(m,n;k)` for `k` in `lo..lo + values.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Linearization {
    pub lo: usize,
    pub values: Vec<Scalar>,
}

impl Linearization {
    pub fn get(&self, k: usize) -> Scalar {
        k.checked_sub(self.lo)
            .and_then(|i| self.values.get(i))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn hi(&self) -> usize {
        self.lo + self.values.len() - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.values.iter().enumerate().map(move |(i, v)| (self.lo + i, v))
    }

    pub fn sum(&self) -> Scalar {
        self.values.iter().sum()
    }
}

type Row = Arc<Mutex<Vec<Arc<Linearization>>>>;

/// Memoized linearization of a coefficient sequence. Cells are keyed by
/// `(min(m,n), max(m,n))`; row `n` stores `g(0,n;·) ..= g(m,n;·)` and is
/// extended under its own lock.
pub struct LinearizationTable {
    cs: Arc<CoefficientSequence>,
    rows: Mutex<HashMap<usize, Row>>,
    haar: RwLock<Vec<Scalar>>,
    monomials: Mutex<Vec<Vec<Scalar>>>,
}

impl std::fmt::Debug for LinearizationTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearizationTable").field("family", self.cs.family()).finish()
    }
}

impl LinearizationTable {
    pub fn new(cs: Arc<CoefficientSequence>) -> Self {
        LinearizationTable {
            cs,
            rows: Mutex::new(HashMap::new()),
            haar: RwLock::new(vec![Scalar::one()]),
            monomials: Mutex::new(Vec::new()),
        }
    }

    pub fn from_sequence(cs: CoefficientSequence) -> Self {
        Self::new(Arc::new(cs))
    }

    pub fn coefficients(&self) -> &Arc<CoefficientSequence> {
        &self.cs
    }

    fn row(&self, n: usize) -> Row {
        let mut rows = self.rows.lock().expect("row map lock");
        Arc::clone(rows.entry(n).or_insert_with(|| {
            let unit = Linearization {
                lo: n,
                values: vec![Scalar::one()],
            };
            Arc::new(Mutex::new(vec![Arc::new(unit)]))
        }))
    }

    /// Expansion of `P_m P_n` in the `P` basis.
    pub fn linearize(&self, m: usize, n: usize) -> Arc<Linearization> {
        let (m, n) = if m <= n { (m, n) } else { (n, m) };
        let row = self.row(n);
        let mut cells = row.lock().expect("row lock");
        if cells.len() > m {
            return Arc::clone(&cells[m]);
        }
        let coeffs = self.cs.prefix(2 * n + 1);
        while cells.len() <= m {
            let j = cells.len() - 1; // build g(j+1, n)
            let cur = &cells[j];
            // P_1 · g(j,n;·) spreads each k onto k-1, k, k+1
            let lo = n - j - 1;
            let mut out = vec![Scalar::zero(); 2 * j + 3];
            for (k, v) in cur.iter() {
                let t = &coeffs[k];
                let i = k - lo;
                if !t.c.is_zero() {
                    out[i - 1] = &out[i - 1] + &t.c * v;
                }
                out[i] = &out[i] + &t.b * v;
                out[i + 1] = &out[i + 1] + &t.a * v;
            }
            if j > 0 {
                let tj = &coeffs[j];
                for (k, v) in cur.iter() {
                    out[k - lo] = &out[k - lo] - &tj.b * v;
                }
                for (k, v) in cells[j - 1].iter() {
                    out[k - lo] = &out[k - lo] - &tj.c * v;
                }
                for v in out.iter_mut() {
                    *v = &*v / &tj.a;
                }
            }
            cells.push(Arc::new(Linearization { lo, values: out }));
        }
        Arc::clone(&cells[m])
    }

    pub fn g(&self, m: usize, n: usize, k: usize) -> Scalar {
        self.linearize(m, n).get(k)
    }

    /// Haar weights `h(0..=n)`: `h(1) = 1/c_1`, then `h(k+1) = a_k/c_{k+1} · h(k)`.
    pub fn haar_prefix(&self, n: usize) -> Vec<Scalar> {
        {
            let h = self.haar.read().expect("haar lock");
            if h.len() > n {
                return h[..=n].to_vec();
            }
        }
        let mut h = self.haar.write().expect("haar lock");
        let coeffs = self.cs.prefix(n + 1);
        while h.len() <= n {
            let k = h.len() - 1;
            let next = if k == 0 {
                coeffs[1].c.recip()
            } else {
                &h[k] * &coeffs[k].a / &coeffs[k + 1].c
            };
            h.push(next);
        }
        h[..=n].to_vec()
    }

    pub fn haar(&self, n: usize) -> Scalar {
        self.haar_prefix(n).pop().expect("nonempty")
    }

    /// `h(n)` together with the independent value `1/g(n,n;0)`.
    pub fn haar_with_check(&self, n: usize) -> (Scalar, Scalar) {
        (self.haar(n), self.g(n, n, 0).recip())
    }

    /// `(T_n f)(m) = Σ_k g(m,n;k) f(k)`.
    pub fn translate(&self, f: &HSequence, n: usize) -> HSequence {
        let (Some(lo), Some(hi)) = (f.min_index(), f.max_index()) else {
            return HSequence::zero();
        };
        let mut out = HSequence::zero();
        for m in lo.saturating_sub(n)..=hi + n {
            let g = self.linearize(m, n);
            let v: Scalar = f.iter().map(|(k, fk)| g.get(k) * fk).sum();
            out.set(m, v);
        }
        out
    }

    /// `(f∗g)(n) = Σ_k (T_n f)(k) g(k) h(k)`.
    pub fn convolve(&self, f: &HSequence, g: &HSequence) -> HSequence {
        let (Some(fmax), Some(gmax)) = (f.max_index(), g.max_index()) else {
            return HSequence::zero();
        };
        let h = self.haar_prefix(fmax + gmax);
        let mut out = HSequence::zero();
        for n in 0..=fmax + gmax {
            let mut acc = Scalar::zero();
            for (k, gk) in g.iter() {
                let row = self.linearize(k, n);
                let tnf: Scalar = f.iter().map(|(j, fj)| row.get(j) * fj).sum();
                if !tnf.is_zero() {
                    acc = acc + tnf * gk * &h[k];
                }
            }
            out.set(n, acc);
        }
        out
    }

    /// Convolution through `ε_j ∗ ε_k = Σ_n g(j,k;n) ε_n`, an independent
    /// route to [`Self::convolve`].
    pub fn convolve_by_expansion(&self, f: &HSequence, g: &HSequence) -> HSequence {
        let (Some(fmax), Some(gmax)) = (f.max_index(), g.max_index()) else {
            return HSequence::zero();
        };
        let h = self.haar_prefix(fmax + gmax);
        let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
        for (j, fj) in f.iter() {
            for (k, gk) in g.iter() {
                let w = fj * gk * &h[j] * &h[k];
                for (n, gv) in self.linearize(j, k).iter() {
                    let e = acc.entry(n).or_insert_with(Scalar::zero);
                    *e = &*e + &w * gv / &h[n];
                }
            }
        }
        HSequence::from_pairs(acc)
    }

    pub fn norms(&self, f: &HSequence) -> Norms {
        let Some(hi) = f.max_index() else {
            return Norms {
                l1: Scalar::zero(),
                l2sq: Scalar::zero(),
                linf: Scalar::zero(),
            };
        };
        let h = self.haar_prefix(hi);
        let mut l1 = Scalar::zero();
        let mut l2sq = Scalar::zero();
        let mut linf = Scalar::zero();
        for (k, v) in f.iter() {
            let a = v.abs();
            l1 = l1 + &a * &h[k];
            l2sq = l2sq + a.square() * &h[k];
            linf = linf.max(a);
        }
        Norms { l1, l2sq, linf }
    }

    /// Unit-normalized point mass `ε_n = δ_n/h(n)`.
    pub fn epsilon(&self, n: usize) -> HSequence {
        HSequence::from_pairs([(n, self.haar(n).recip())])
    }

    /// Monomial coefficients of `P_0..=P_n`, lowest degree first.
    pub fn monomials(&self, n: usize) -> Vec<Vec<Scalar>> {
        let mut polys = self.monomials.lock().expect("monomial lock");
        let coeffs = self.cs.prefix(n + 1);
        if polys.is_empty() {
            polys.push(vec![Scalar::one()]);
        }
        let (a0, b0) = (&coeffs[0].a, &coeffs[0].b);
        while polys.len() <= n {
            let k = polys.len() - 1;
            // P_{k+1} = ((x - b_0)/a_0 · P_k - b_k P_k - c_k P_{k-1})/a_k, with the k = 0 step P_1 itself
            let pk = &polys[k];
            let mut next = vec![Scalar::zero(); k + 2];
            for (i, v) in pk.iter().enumerate() {
                next[i + 1] = &next[i + 1] + v / a0;
                next[i] = &next[i] - v * b0 / a0;
            }
            if k > 0 {
                let t = &coeffs[k];
                for (i, v) in pk.iter().enumerate() {
                    next[i] = &next[i] - &t.b * v;
                }
                for (i, v) in polys[k - 1].iter().enumerate() {
                    next[i] = &next[i] - &t.c * v;
                }
                for v in next.iter_mut() {
                    *v = &*v / &t.a;
                }
            }
            polys.push(next);
        }
        polys[..=n].to_vec()
    }

    /// `κ_n` with `P_n' = Σ_{k<n} κ_n(k) P_k h(k)`.
    pub fn kappa(&self, n: usize) -> HSequence {
        if n == 0 {
            return HSequence::zero();
        }
        let polys = self.monomials(n);
        let h = self.haar_prefix(n);
        let mut d: Vec<Scalar> = polys[n].iter().enumerate().skip(1).map(|(i, v)| v * i as i64).collect();
        let mut out = HSequence::zero();
        for deg in (0..n).rev() {
            let beta = &d[deg] / &polys[deg][deg];
            if !beta.is_zero() {
                for (i, v) in polys[deg].iter().enumerate() {
                    d[i] = &d[i] - &beta * v;
                }
            }
            out.set(deg, beta / &h[deg]);
        }
        out
    }

    /// Scan of `g(m,n;k)` over `m ≤ n ≤ big_n`.
    pub fn property_p_check(&self, big_n: usize, exec: Exec) -> PropertyPReport {
        let coeffs = self.cs.prefix(2 * big_n + 1);
        let tol = coeffs[1]
            .c
            .precision()
            .map(|p| Scalar::int(2).powi(-(p as i64 - 10)))
            .unwrap_or_else(Scalar::zero);
        let per_row = exec.map_range(0..big_n + 1, |n| {
            let mut min: Option<(Scalar, (usize, usize, usize))> = None;
            let mut first_violation = None;
            let mut max_residual = Scalar::zero();
            let mut support_ok = true;
            for m in 0..=n {
                let g = self.linearize(m, n);
                if g.lo != n - m || g.hi() != n + m || g.values[0].is_zero() || g.values.last().is_some_and(Scalar::is_zero) {
                    support_ok = false;
                }
                for (k, v) in g.iter() {
                    if min.as_ref().is_none_or(|(best, _)| v < best) {
                        min = Some((v.clone(), (m, n, k)));
                    }
                    if v.is_negative() && first_violation.is_none() {
                        first_violation = Some(Witness { m, n, k, value: v.clone() });
                    }
                }
                max_residual = max_residual.max((g.sum() - 1).abs());
            }
            (min.expect("nonempty row"), first_violation, max_residual, support_ok)
        });

        let mut min_value = None::<(Scalar, (usize, usize, usize))>;
        let mut first_violation = None;
        let mut max_sum_residual = Scalar::zero();
        let mut support_ok = true;
        for (row_min, viol, res, sup) in per_row {
            if min_value.as_ref().is_none_or(|(best, _)| row_min.0 < *best) {
                min_value = Some(row_min);
            }
            if first_violation.is_none() {
                first_violation = viol;
            }
            max_sum_residual = max_sum_residual.max(res);
            support_ok &= sup;
        }
        let (min_value, (m, n, k)) = min_value.expect("nonempty scan");

        let half = Scalar::ratio(1, 2);
        let quarter = Scalar::ratio(1, 4);
        let symmetric = coeffs[..=big_n].iter().all(|t| t.b.is_zero());
        let c_nondecreasing = (1..big_n).all(|i| coeffs[i].c <= coeffs[i + 1].c);
        let c_increasing = (1..big_n).all(|i| coeffs[i].c < coeffs[i + 1].c);
        let c_bounded = (1..=big_n).all(|i| coeffs[i].c <= half);
        let derivation_premise = (1..=big_n).all(|i| {
            let prev_a = if i == 1 { Scalar::one() } else { coeffs[i - 1].a.clone() };
            &coeffs[i].c * prev_a <= quarter
        });
        PropertyPReport {
            scanned: big_n,
            min_value: Witness { m, n, k, value: min_value },
            first_violation,
            max_sum_residual: max_sum_residual.clone(),
            sum_tolerance: tol.clone(),
            sums_ok: max_sum_residual <= tol,
            support_ok,
            szwarc_premise: symmetric && c_nondecreasing && c_bounded,
            c_strictly_increasing: c_increasing,
            derivation_premise,
        }
    }

    /// CSV of `g(m,n;k)` for `m ≤ n ≤ big_n`.
    pub fn table_csv(&self, big_n: usize) -> Result<String, csv::Error> {
        let exact = self.cs.is_exact();
        let mut w = csv::Writer::from_writer(Vec::new());
        if exact {
            w.write_record(["m", "n", "k", "g_num", "g_den"])?;
        } else {
            w.write_record(["m", "n", "k", "g_decimal"])?;
        }
        for n in 0..=big_n {
            for m in 0..=n {
                for (k, v) in self.linearize(m, n).iter() {
                    let (m, n, k) = (m.to_string(), n.to_string(), k.to_string());
                    match v.as_rational() {
                        Some(r) => w.write_record([m, n, k, r.numerator().to_string(), r.denominator().to_string()])?,
                        None => w.write_record([m, n, k, v.to_decimal(40)])?,
                    }
                }
            }
        }
        Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8 csv"))
    }

    /// CSV of `h(0..=n)`.
    pub fn haar_csv(&self, n: usize) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "h_num", "h_den"])?;
        for (k, h) in self.haar_prefix(n).iter().enumerate() {
            let r = h.to_rational();
            w.write_record([k.to_string(), r.numerator().to_string(), r.denominator().to_string()])?;
        }
        Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8 csv"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub value: Scalar,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyPReport {
    pub scanned: usize,
    pub min_value: Witness,
    pub first_violation: Option<Witness>,
    pub max_sum_residual: Scalar,
    pub sum_tolerance: Scalar,
    pub sums_ok: bool,
    /// Support is exactly `[|m-n|, m+n]` with nonzero end coefficients.
    pub support_ok: bool,
    /// `b ≡ 0`, `c` nondecreasing and `c ≤ 1/2` on the scanned range;
    /// sufficient for nonnegative linearization.
    pub szwarc_premise: bool,
    pub c_strictly_increasing: bool,
    /// `c_n a_{n-1} ≤ 1/4` on the scanned range; the family then admits a
    /// nonzero bounded point derivation.
    pub derivation_premise: bool,
}

impl PropertyPReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: Scalar,
    pub l2sq: Scalar,
    pub linf: Scalar,
}

/// Finitely supported sequence on ℕ₀; zero values are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HSequence {
    values: BTreeMap<usize, Scalar>,
}

impl HSequence {
    pub fn zero() -> Self {
        HSequence::default()
    }

    pub fn delta(n: usize) -> Self {
        Self::from_pairs([(n, Scalar::one())])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Scalar)>) -> Self {
        let mut out = HSequence::zero();
        for (k, v) in pairs {
            let v = out.get(k) + v;
            out.set(k, v);
        }
        out
    }

    pub fn from_dense(values: &[Scalar]) -> Self {
        Self::from_pairs(values.iter().cloned().enumerate())
    }

    pub fn get(&self, k: usize) -> Scalar {
        self.values.get(&k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn set(&mut self, k: usize, v: Scalar) {
        if v.is_zero() {
            self.values.remove(&k);
        } else {
            self.values.insert(k, v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn support(&self) -> Vec<usize> {
        self.values.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min_index(&self) -> Option<usize> {
        self.values.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.values.keys().next_back().copied()
    }

    pub fn scale(&self, s: &Scalar) -> HSequence {
        Self::from_pairs(self.iter().map(|(k, v)| (k, v * s)))
    }

    pub fn add(&self, other: &HSequence) -> HSequence {
        Self::from_pairs(self.iter().chain(other.iter()).map(|(k, v)| (k, v.clone())))
    }

    pub fn sub(&self, other: &HSequence) -> HSequence {
        self.add(&other.scale(&Scalar::int(-1)))
    }

    /// Largest absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &HSequence) -> Scalar {
        self.sub(other).iter().map(|(_, v)| v.abs()).fold(Scalar::zero(), Scalar::max)
    }

    /// Dense `(index, value)` rows, `p/q` strings for exact entries.
    pub fn rows(&self) -> Vec<(usize, String)> {
        self.iter()
            .map(|(k, v)| {
                let s = match v.as_rational() {
                    Some(r) => format_rational(r),
                    None => v.to_decimal(40),
                };
                (k, s)
            })
            .collect()
    }
}

/// Partial sums of the little q-Legendre Haar weights against their
/// closed form `(1-q^{n+1})^2/((1-q)(1-q^{2n+1})) · h(n)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartialSum {
    pub n: usize,
    pub lhs: Scalar,
    pub rhs: Scalar,
    /// `h(n)/(1-q) - lhs`, positive by the strict bound.
    pub margin: Scalar,
}

pub fn haar_partial_sums(q: &Scalar, n_max: usize) -> Result<Vec<PartialSum>, crate::families::FamilyError> {
    let table = LinearizationTable::from_sequence(CoefficientSequence::little_q_legendre(q.clone())?);
    let h = table.haar_prefix(n_max);
    let one = Scalar::one();
    let mut lhs = Scalar::zero();
    let mut out = Vec::with_capacity(n_max + 1);
    for (n, hn) in h.iter().enumerate() {
        lhs = lhs + hn;
        let qn1 = q.powi(n as i64 + 1);
        let rhs = (&one - &qn1).square() / ((&one - q) * (&one - q.powi(2 * n as i64 + 1))) * hn;
        let margin = hn / (&one - q) - &lhs;
        out.push(PartialSum {
            n,
            lhs: lhs.clone(),
            rhs,
            margin,
        });
    }
    Ok(out)
}

pub fn haar_partial_sum_identity(q: &Scalar, n: usize) -> Result<(Scalar, Scalar), crate::families::FamilyError> {
    let s = haar_partial_sums(q, n)?.pop().expect("nonempty");
    Ok((s.lhs, s.rhs))
}
