//! The continued logarithm (CL) algorithm: pseudo-divisions, traced runs,
//! the CLCF expansion, continuant pairs and the associated cost algebra.
//!
//! One pseudo-division maps a pair `(p, q)` with `p <= q` to `(r, 2^a p)`
//! where `a` is the largest exponent with `2^a p <= q` and `r = q - 2^a p`.
//! Iterating until the remainder vanishes writes `p/q` as
//! `h_{a_1} o ... o h_{a_k}(0)` with `h_a(x) = 2^-a / (1 + x)`.

use std::fmt::{self, Write as _};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::numbers::{
    dyadic_norm, dyadic_valuation_uint, g2, ln_biguint, pow2, IntMatrix2, Rational, Valuation,
};

/// How the last pseudo-division is counted.
///
/// `Greedy` always takes the maximal exponent. `Canonical` rewrites a final
/// step `(.., a)` with `a >= 1` into `(.., a - 1, 0)` so the expansion ends
/// with `h_0`; this is the convention used for every reported cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Greedy,
    #[default]
    Canonical,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Convention::Greedy),
            "canonical" => Ok(Convention::Canonical),
            other => Err(invalid(format!("unknown convention `{other}`"))),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Greedy => "greedy",
            Convention::Canonical => "canonical",
        })
    }
}

/// Serializes a big integer as a JSON number when it fits in 64 bits and as a
/// decimal string otherwise.
pub(crate) fn ser_big<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match n.to_u64() {
        Some(v) => s.serialize_u64(v),
        None => s.serialize_str(&n.to_string()),
    }
}

/// Digits `(a_1, ..., a_k)` of a finite CLCF expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ExponentSeq(Vec<u32>);

impl ExponentSeq {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(invalid("exponent sequence must be nonempty"));
        }
        Ok(ExponentSeq(exponents))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total shift count `S = sum a_i`.
    pub fn shifts(&self) -> u64 {
        self.0.iter().map(|&a| u64::from(a)).sum()
    }

    /// Canonical sequences end with a zero exponent.
    pub fn is_canonical(&self) -> bool {
        self.0.last() == Some(&0)
    }

    /// Rewrites a final exponent `a >= 1` as `(a - 1, 0)`. The evaluated
    /// fraction is unchanged since `h_a(0) = h_{a-1}(h_0(0))`.
    pub fn canonicalize(&self) -> ExponentSeq {
        let mut v = self.0.clone();
        if let Some(&last) = v.last() {
            if last >= 1 {
                *v.last_mut().unwrap() = last - 1;
                v.push(0);
            }
        }
        ExponentSeq(v)
    }
}

impl fmt::Display for ExponentSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl std::str::FromStr for ExponentSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| invalid(format!("bad exponent `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        ExponentSeq::new(v)
    }
}

/// Result of a single pseudo-division `q = 2^a p + r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub exponent: u32,
    pub remainder: BigUint,
    /// `2^a p`, the second component of the new pair.
    pub shifted: BigUint,
}

/// One pseudo-division on `0 < p <= q`, returning the new pair `(r, 2^a p)`.
pub fn cl_step(p: &BigUint, q: &BigUint) -> Result<Step> {
    if p.is_zero() || p > q {
        return Err(invalid(format!("cl_step needs 0 < p <= q, got ({p}, {q})")));
    }
    let mut a = q.bits() - p.bits();
    let mut shifted = p << a;
    if &shifted > q {
        a -= 1;
        shifted >>= 1u32;
    }
    let remainder = q - &shifted;
    Ok(Step { exponent: a as u32, remainder, shifted })
}

/// One row of an execution table.
///
/// Row `i >= 1` holds the exponent `a_i`, the shifted value `2^{a_i} q_i`,
/// the remainder `q_{i+1}` and the valuations of both and of their gcd.
/// Row `0` is the input pair `(q_0, q_1) = (q, p)` and has no exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub i: usize,
    pub a_i: Option<u32>,
    #[serde(serialize_with = "ser_big")]
    pub shifted: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub remainder: BigUint,
    pub val_shifted: Valuation,
    pub val_remainder: Valuation,
    pub val_gcd: Valuation,
}

impl StepRecord {
    fn new(i: usize, a_i: Option<u32>, shifted: BigUint, remainder: BigUint) -> Self {
        let g = shifted.gcd(&remainder);
        StepRecord {
            i,
            a_i,
            val_shifted: dyadic_valuation_uint(&shifted),
            val_remainder: dyadic_valuation_uint(&remainder),
            val_gcd: dyadic_valuation_uint(&g),
            shifted,
            remainder,
        }
    }
}

/// Full record of one CL execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    #[serde(serialize_with = "ser_big")]
    pub p: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub q: BigUint,
    pub convention: Convention,
    /// The `k` pseudo-divisions, rows `1..=k` of the execution table.
    #[serde(skip)]
    pub records: Vec<StepRecord>,
    pub exponents: ExponentSeq,
    pub k: u64,
    pub s: u64,
    /// Second component of the terminal pair `(0, 2^{a_k} q_k)`.
    #[serde(serialize_with = "ser_big")]
    pub terminal: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub odd_gcd: BigUint,
}

impl Trace {
    /// Execution table including the input row `i = 0`.
    pub fn table_rows(&self) -> Vec<StepRecord> {
        let mut rows = Vec::with_capacity(self.records.len() + 1);
        rows.push(StepRecord::new(0, None, self.q.clone(), self.p.clone()));
        rows.extend(self.records.iter().cloned());
        rows
    }

    /// JSON object with the summary fields and the table under `rows`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("trace serializes");
        v["rows"] = serde_json::to_value(self.table_rows()).expect("rows serialize");
        v
    }

    /// Aligned text table, one row per step, binary expansions included.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "CL execution for ({}, {}), {} convention", self.p, self.q, self.convention);
        let _ = writeln!(
            out,
            "{:>3} {:>4} {:>10} {:>10} {:>20} {:>20} {:>8} {:>8} {:>8}",
            "i", "a_i", "shifted", "remainder", "shifted_2", "remainder_2", "d(sh)", "d(rem)", "d(gcd)"
        );
        for row in self.table_rows() {
            let a = row.a_i.map_or_else(|| "-".to_string(), |a| a.to_string());
            let _ = writeln!(
                out,
                "{:>3} {:>4} {:>10} {:>10} {:>20} {:>20} {:>8} {:>8} {:>8}",
                row.i,
                a,
                row.shifted,
                row.remainder,
                row.shifted.to_str_radix(2),
                row.remainder.to_str_radix(2),
                row.val_shifted.to_string(),
                row.val_remainder.to_string(),
                row.val_gcd.to_string()
            );
        }
        let _ = writeln!(
            out,
            "K = {}, S = {}, exponents = {}, terminal = (0, {}), odd gcd = {}",
            self.k, self.s, self.exponents, self.terminal, self.odd_gcd
        );
        out
    }
}

fn odd_part(n: &BigUint) -> BigUint {
    match n.trailing_zeros() {
        Some(z) => n >> z,
        None => BigUint::zero(),
    }
}

/// Runs the CL algorithm on `0 < p < q`, recording every pseudo-division.
pub fn cl_run(p: &BigUint, q: &BigUint, convention: Convention) -> Result<Trace> {
    if p.is_zero() || p >= q {
        return Err(invalid(format!("cl_run needs 0 < p < q, got ({p}, {q})")));
    }
    let mut lo = p.clone();
    let mut hi = q.clone();
    let mut records = Vec::new();
    let mut exponents = Vec::new();
    loop {
        let mut step = cl_step(&lo, &hi)?;
        if convention == Convention::Canonical && step.remainder.is_zero() && step.exponent >= 1 {
            step.exponent -= 1;
            step.shifted >>= 1u32;
            step.remainder = step.shifted.clone();
        }
        exponents.push(step.exponent);
        records.push(StepRecord::new(records.len() + 1, Some(step.exponent), step.shifted.clone(), step.remainder.clone()));
        if step.remainder.is_zero() {
            hi = step.shifted;
            break;
        }
        lo = step.remainder;
        hi = step.shifted;
    }
    let exponents = ExponentSeq(exponents);
    Ok(Trace {
        p: p.clone(),
        q: q.clone(),
        convention,
        k: records.len() as u64,
        s: exponents.shifts(),
        records,
        exponents,
        odd_gcd: odd_part(&hi),
        terminal: hi,
    })
}

/// Convenience wrapper around [`cl_run`] for machine integers.
pub fn cl_run_u64(p: u64, q: u64, convention: Convention) -> Result<Trace> {
    cl_run(&BigUint::from(p), &BigUint::from(q), convention)
}

/// Counts from a CL run on machine integers, without the per-step record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub k: u32,
    pub s: u32,
    pub terminal: u64,
}

/// Allocation-free CL run on `0 < p < q` returning `K`, `S` and the terminal value.
pub fn cl_summary(p: u64, q: u64, convention: Convention) -> Result<RunSummary> {
    if p == 0 || p >= q {
        return Err(invalid(format!("cl_summary needs 0 < p < q, got ({p}, {q})")));
    }
    let (mut lo, mut hi) = (p, q);
    let (mut k, mut s) = (0u32, 0u32);
    loop {
        let mut a = lo.leading_zeros() - hi.leading_zeros();
        let mut shifted = lo << a;
        if shifted > hi {
            a -= 1;
            shifted >>= 1;
        }
        let mut rem = hi - shifted;
        if convention == Convention::Canonical && rem == 0 && a >= 1 {
            a -= 1;
            shifted >>= 1;
            rem = shifted;
        }
        k += 1;
        s += a;
        if rem == 0 {
            return Ok(RunSummary { k, s, terminal: shifted });
        }
        lo = rem;
        hi = shifted;
    }
}

/// Counts from a CL run on big integers, without the per-step record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigRunSummary {
    pub k: u64,
    pub s: u64,
    pub terminal: BigUint,
}

/// Big-integer version of [`cl_summary`].
pub fn cl_summary_big(p: &BigUint, q: &BigUint, convention: Convention) -> Result<BigRunSummary> {
    if p.is_zero() || p >= q {
        return Err(invalid(format!("cl_summary needs 0 < p < q, got ({p}, {q})")));
    }
    let mut lo = p.clone();
    let mut hi = q.clone();
    let (mut k, mut s) = (0u64, 0u64);
    loop {
        let mut a = hi.bits() - lo.bits();
        let mut shifted = &lo << a;
        if shifted > hi {
            a -= 1;
            shifted >>= 1u32;
        }
        let mut rem = &hi - &shifted;
        if convention == Convention::Canonical && rem.is_zero() && a >= 1 {
            a -= 1;
            shifted >>= 1u32;
            rem = shifted.clone();
        }
        k += 1;
        s += a;
        if rem.is_zero() {
            return Ok(BigRunSummary { k, s, terminal: shifted });
        }
        lo = rem;
        hi = shifted;
    }
}

fn h_branch(a: u32, x: &Rational) -> Rational {
    pow2(-i64::from(a)) / (Rational::one() + x)
}

/// Evaluates `h_{a_1} o ... o h_{a_k}(0)` exactly.
pub fn cf_eval(seq: &ExponentSeq) -> Rational {
    seq.0.iter().rev().fold(Rational::zero(), |x, &a| h_branch(a, &x))
}

/// Continuant pair `(P, Q)^T = M_{a_1} ... M_{a_k} (0, 1)^T` with its gcd
/// `g` (a power of two) and the reduced continuant `R = Q / g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuantPair {
    #[serde(serialize_with = "ser_big")]
    pub p: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub q: BigUint,
    #[serde(skip)]
    pub matrix: IntMatrix2,
    #[serde(serialize_with = "ser_big")]
    pub g: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub r: BigUint,
}

impl ContinuantPair {
    /// `P/Q` reduced, i.e. the rational expanded by the sequence.
    pub fn fraction(&self) -> Rational {
        Rational::new(BigInt::from(self.p.clone()), BigInt::from(self.q.clone()))
    }
}

pub fn product_matrix(seq: &ExponentSeq) -> IntMatrix2 {
    seq.0.iter().fold(IntMatrix2::identity(), |m, &a| &m * &IntMatrix2::branch(a))
}

pub fn continuants(seq: &ExponentSeq) -> ContinuantPair {
    let matrix = product_matrix(seq);
    let to_uint = |n: &BigInt| n.to_biguint().expect("continuants of M_a products are nonnegative");
    let p = to_uint(&matrix.m01);
    let q = to_uint(&matrix.m11);
    let g = p.gcd(&q);
    let r = &q / &g;
    ContinuantPair { p, q, matrix, g, r }
}

/// The costs of one finite expansion. Powers of two are stored by exponent,
/// the continuants `Q` and `R` exactly; logarithms are produced on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostVector {
    pub k: u64,
    pub s: u64,
    /// `Q`; the cost is `q = log Q^2`.
    pub continuant: BigUint,
    /// `log2 g(P, Q)`; the cost is `rho = log g^2`.
    pub gcd_exponent: u64,
    /// `R = Q / g`; the cost is `r = log R^2`.
    pub reduced: BigUint,
    /// `δ(Q)`, so `|Q|_2^-2 = 4^δ(Q)`; the cost is `q2 = log |Q|_2^-2`.
    pub q2_exponent: u64,
}

impl CostVector {
    /// `sigma = log d(h) = S log 2`.
    pub fn sigma(&self) -> f64 {
        self.s as f64 * std::f64::consts::LN_2
    }

    pub fn q(&self) -> f64 {
        2.0 * ln_biguint(&self.continuant)
    }

    pub fn rho(&self) -> f64 {
        2.0 * self.gcd_exponent as f64 * std::f64::consts::LN_2
    }

    pub fn r(&self) -> f64 {
        2.0 * ln_biguint(&self.reduced)
    }

    pub fn q2(&self) -> f64 {
        2.0 * self.q2_exponent as f64 * std::f64::consts::LN_2
    }
}

impl Serialize for CostVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CostVector", 7)?;
        st.serialize_field("K", &self.k)?;
        st.serialize_field("S", &self.s)?;
        st.serialize_field("sigma", &self.sigma())?;
        st.serialize_field("q", &self.q())?;
        st.serialize_field("rho", &self.rho())?;
        st.serialize_field("r", &self.r())?;
        st.serialize_field("q2", &self.q2())?;
        st.end()
    }
}

fn big_rational(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}

fn exact_log2(n: &BigUint) -> Option<u64> {
    let z = n.trailing_zeros()?;
    (n >> z).is_one().then_some(z)
}

/// Costs of the expansion `seq`, computed directly from the continuants and
/// checked against the four identities expressing them through
/// `|h'(0)|`, `|h'(0)|_2`, `d(h) = 2^S` and `G2(h(0))`.
///
/// A mismatch can only come from an implementation bug and is reported as
/// [`Error::Consistency`].
pub fn cost_vector(seq: &ExponentSeq) -> Result<CostVector> {
    let cp = continuants(seq);
    let s = seq.shifts();
    let zero = Rational::zero();

    let det = cp.matrix.abs_det();
    if exact_log2(&det) != Some(s) {
        return Err(Error::Consistency(format!("|det M| = {det} is not 2^{s}")));
    }
    let gcd_exponent = exact_log2(&cp.g)
        .ok_or_else(|| Error::Consistency(format!("gcd(P, Q) = {} is not a power of two", cp.g)))?;
    let q2_exponent = cp.q.trailing_zeros().unwrap_or(0);

    let h0 = cp.matrix.apply(&zero)?;
    let deriv = cp.matrix.derivative_at(&zero)?;
    let hp = deriv.abs();
    let hp2 = dyadic_norm(&deriv).to_rational();
    let d = pow2(s as i64);
    let gmap = g2(&h0);

    let q_sq = big_rational(&(&cp.q * &cp.q));
    let r_sq = big_rational(&(&cp.r * &cp.r));
    let g_sq = big_rational(&(&cp.g * &cp.g));
    let q2 = pow2(2 * q2_exponent as i64);

    let checks = [
        ("Q^-2 = |h'(0)| / d(h)", q_sq.recip(), &hp / &d),
        ("|Q|_2^-2 = d(h) |h'(0)|_2", q2.clone(), &d * &hp2),
        ("R^-2 = |h'(0)| |h'(0)|_2 G2(h(0))", r_sq.recip(), &hp * &hp2 * &gmap),
        ("g^2 = d(h) |h'(0)|_2 G2(h(0))", g_sq, &d * &hp2 * &gmap),
    ];
    for (name, direct, via) in checks {
        if direct != via {
            return Err(Error::Consistency(format!("{name} fails for {seq}: {direct} vs {via}")));
        }
    }

    Ok(CostVector {
        k: seq.len() as u64,
        s,
        continuant: cp.q,
        gcd_exponent,
        reduced: cp.r,
        q2_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbers::rational;
    use proptest::prelude::*;

    fn seq(v: &[u32]) -> ExponentSeq {
        ExponentSeq::new(v.to_vec()).unwrap()
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn step_examples() {
        let s = cl_step(&big(31), &big(75)).unwrap();
        assert_eq!((s.exponent, s.remainder, s.shifted), (1, big(13), big(62)));
        let s = cl_step(&big(13), &big(62)).unwrap();
        assert_eq!((s.exponent, s.remainder, s.shifted), (2, big(10), big(52)));
        let s = cl_step(&big(1), &big(1)).unwrap();
        assert_eq!((s.exponent, s.remainder, s.shifted), (0, big(0), big(1)));
    }

    #[test]
    fn step_rejects_bad_domain() {
        assert!(cl_step(&big(0), &big(5)).is_err());
        assert!(cl_step(&big(6), &big(5)).is_err());
        assert!(cl_run_u64(5, 5, Convention::Greedy).is_err());
        assert!(cl_run_u64(0, 5, Convention::Greedy).is_err());
        assert!(cl_summary(7, 3, Convention::Greedy).is_err());
    }

    #[test]
    fn trace_31_75_columns() {
        let t = cl_run_u64(31, 75, Convention::Canonical).unwrap();
        let rows = t.table_rows();
        let col = |f: fn(&StepRecord) -> u64| rows.iter().map(f).collect::<Vec<_>>();
        assert_eq!(col(|r| r.shifted.to_u64().unwrap()), [75, 62, 52, 40, 24, 16, 8, 8]);
        assert_eq!(col(|r| r.remainder.to_u64().unwrap()), [31, 13, 10, 12, 16, 8, 8, 0]);
        assert_eq!(col(|r| r.val_shifted.finite().unwrap()), [0, 1, 2, 3, 3, 4, 3, 3]);
        assert_eq!(col(|r| r.val_gcd.finite().unwrap()), [0, 0, 1, 2, 3, 3, 3, 3]);
        let vr: Vec<Valuation> = rows.iter().map(|r| r.val_remainder).collect();
        use Valuation::*;
        assert_eq!(vr, [Finite(0), Finite(0), Finite(1), Finite(2), Finite(4), Finite(3), Finite(3), Infinite]);
        assert_eq!(t.exponents, seq(&[1, 2, 2, 1, 0, 0, 0]));
        assert_eq!((t.k, t.s), (7, 6));
        assert_eq!(t.terminal, big(8));
        assert_eq!(t.odd_gcd, big(1));
    }

    #[test]
    fn greedy_run_of_31_75() {
        let t = cl_run_u64(31, 75, Convention::Greedy).unwrap();
        assert_eq!(t.exponents, seq(&[1, 2, 2, 1, 0, 1]));
        assert_eq!(t.terminal, big(16));
    }

    #[test]
    fn small_runs() {
        let t = cl_run_u64(1, 2, Convention::Canonical).unwrap();
        assert_eq!((t.exponents.clone(), t.k, t.s, t.terminal.clone()), (seq(&[0, 0]), 2, 0, big(1)));
        let t = cl_run_u64(1, 2, Convention::Greedy).unwrap();
        assert_eq!((t.exponents.clone(), t.k, t.s, t.terminal.clone()), (seq(&[1]), 1, 1, big(2)));
    }

    #[test]
    fn trace_json_uses_table_column_names() {
        let t = cl_run_u64(31, 75, Convention::Canonical).unwrap();
        let v = t.to_json();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 8);
        for key in ["i", "a_i", "shifted", "remainder", "val_shifted", "val_remainder", "val_gcd"] {
            assert!(rows[3].get(key).is_some(), "missing {key}");
        }
        assert_eq!(rows[7]["val_remainder"], "inf");
        assert_eq!(rows[0]["a_i"], serde_json::Value::Null);
        assert_eq!(v["k"], 7);
    }

    #[test]
    fn cf_eval_examples() {
        assert_eq!(cf_eval(&seq(&[1, 2, 2, 1, 0, 0, 0])), rational(31, 75));
        assert_eq!(cf_eval(&seq(&[0])), rational(1, 1));
        assert_eq!(cf_eval(&seq(&[1, 2])), rational(2, 5));
    }

    #[test]
    fn continuant_examples() {
        let c = continuants(&seq(&[1, 2]));
        assert_eq!((c.p, c.q, c.g, c.r), (big(4), big(10), big(2), big(5)));
        let c = continuants(&seq(&[0]));
        assert_eq!((c.p, c.q, c.g, c.r), (big(1), big(1), big(1), big(1)));
        let c = continuants(&seq(&[1, 1]));
        assert_eq!((c.p, c.q, c.g, c.r), (big(2), big(6), big(2), big(3)));
        let c = continuants(&seq(&[2, 0]));
        assert_eq!(c.matrix, IntMatrix2::new(1, 1, 4, 8));
        assert_eq!((c.p, c.q, c.g, c.r), (big(1), big(8), big(1), big(8)));
    }

    #[test]
    fn cost_vector_examples() {
        let c = cost_vector(&seq(&[1, 2])).unwrap();
        assert_eq!(c.s, 3);
        assert_eq!(c.continuant, big(10));
        assert_eq!(c.q2_exponent, 1);
        assert_eq!(c.reduced, big(5));
        assert_eq!(c.gcd_exponent, 1);

        let c = cost_vector(&seq(&[0])).unwrap();
        assert_eq!((c.s, c.continuant.clone(), c.gcd_exponent, c.reduced.clone(), c.q2_exponent), (0, big(1), 0, big(1), 0));

        let c = cost_vector(&seq(&[2, 0])).unwrap();
        assert_eq!((c.s, c.continuant.clone(), c.gcd_exponent, c.reduced.clone(), c.q2_exponent), (2, big(8), 0, big(8), 3));
        assert!((c.sigma() - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
        assert!((c.q() - 2.0 * 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("greedy".parse::<Convention>().unwrap(), Convention::Greedy);
        assert!("other".parse::<Convention>().is_err());
        assert_eq!("1,2,0".parse::<ExponentSeq>().unwrap(), seq(&[1, 2, 0]));
        assert!("".parse::<ExponentSeq>().is_err());
        assert!(ExponentSeq::new(vec![]).is_err());
    }

    #[test]
    fn step_maximality_and_record_shape() {
        for q in 2..200u64 {
            for p in 1..q {
                let t = cl_run_u64(p, q, Convention::Canonical).unwrap();
                let mut prev_hi = BigUint::from(q);
                for (j, rec) in t.records.iter().enumerate() {
                    let forced = rec.remainder == rec.shifted;
                    if !forced {
                        assert!(&rec.shifted << 1u32 > prev_hi, "({p},{q}) step {j}");
                    }
                    assert!(rec.shifted <= prev_hi);
                    prev_hi = rec.shifted.clone();
                }
            }
        }
    }

    #[test]
    fn summary_matches_full_trace() {
        for q in 2..300u64 {
            for p in 1..q {
                for conv in [Convention::Greedy, Convention::Canonical] {
                    let t = cl_run_u64(p, q, conv).unwrap();
                    let s = cl_summary(p, q, conv).unwrap();
                    assert_eq!((u64::from(s.k), u64::from(s.s), BigUint::from(s.terminal)), (t.k, t.s, t.terminal.clone()));
                    let b = cl_summary_big(&big(p), &big(q), conv).unwrap();
                    assert_eq!((b.k, b.s, b.terminal), (t.k, t.s, t.terminal));
                }
            }
        }
    }

    #[test]
    fn convention_bridge() {
        for q in 2..400u64 {
            for p in 1..q {
                let g = cl_run_u64(p, q, Convention::Greedy).unwrap();
                let c = cl_run_u64(p, q, Convention::Canonical).unwrap();
                let rewritten = *g.exponents.as_slice().last().unwrap() >= 1;
                assert_eq!(c.k, g.k + u64::from(rewritten));
                assert_eq!(c.s + u64::from(rewritten), g.s);
                assert_eq!(c.exponents, g.exponents.canonicalize());
                assert_eq!(cf_eval(&c.exponents), cf_eval(&g.exponents));
            }
        }
    }

    fn arb_seq() -> impl Strategy<Value = ExponentSeq> {
        prop::collection::vec(0u32..=8, 1..=30).prop_map(|mut v| {
            *v.last_mut().unwrap() = 0;
            ExponentSeq::new(v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn continuant_coherence(s in arb_seq()) {
            let c = continuants(&s);
            prop_assert_eq!(c.fraction(), cf_eval(&s));
            prop_assert!(exact_log2(&c.g).is_some());
            prop_assert_eq!(big_rational(&c.r), Rational::from_integer(cf_eval(&s).denom().clone()));
        }

        #[test]
        fn cost_identities_hold(s in arb_seq()) {
            let c = cost_vector(&s).unwrap();
            prop_assert_eq!(&c.continuant >> c.gcd_exponent, c.reduced.clone());
        }

        #[test]
        fn odd_gcd_matches_euclid(p in 1u64..1_000_000, q in 2u64..1_000_000) {
            prop_assume!(p < q);
            let t = cl_run_u64(p, q, Convention::Canonical).unwrap();
            let g = num_integer::gcd(p, q);
            prop_assert_eq!(t.odd_gcd, BigUint::from(g >> g.trailing_zeros()));
            prop_assert_eq!(cf_eval(&t.exponents), rational(p as i64, q as i64));
        }
    }
}
