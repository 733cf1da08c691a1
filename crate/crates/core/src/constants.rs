//! Closed-form values of the constants governing the mean-value laws.
//!
//! `E` and `D` have explicit expressions, `A = E - D`. The dyadic constant
//! `B` has no closed form; the table carries the conjectured value
//! `B = D - log 2` and marks everything derived from it as conjectural.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fmt;

use serde::Serialize;

/// Default number of series terms; the tail is below `2^-64 / 64^2`.
pub const DEFAULT_TERMS: u32 = 64;

fn ln_4_3() -> f64 {
    2.0 * LN_2 - 3f64.ln()
}

/// Partial sum `pi^2/6 + 2 sum_{k=1}^{terms} (-1)^k / (k^2 2^k)`.
pub fn e_bracket(terms: u32) -> f64 {
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 1..=terms {
        pow *= 0.5;
        let kf = f64::from(k);
        let term = pow / (kf * kf);
        sum += if k % 2 == 1 { -term } else { term };
    }
    PI * PI / 6.0 + 2.0 * sum
}

/// Bound on the neglected tail of [`e_bracket`] (first omitted term of an
/// alternating series with decreasing terms).
pub fn e_tail_bound(terms: u32) -> f64 {
    let k = f64::from(terms + 1);
    2.0 * 0.5f64.powf(k) / (k * k)
}

/// `E = E_psi[2 |log x|]`.
pub fn const_e(terms: u32) -> f64 {
    e_bracket(terms) / ln_4_3()
}

/// `D = log 2 * log(3/2) / log(4/3) = log 2 * E_psi[a]`.
pub fn const_d() -> f64 {
    LN_2 * (1.5f64).ln() / ln_4_3()
}

/// Entropy of the one-component system, `A = E - D`.
pub fn const_a() -> f64 {
    const_e(DEFAULT_TERMS) - const_d()
}

/// Conjectured dyadic constant `B = D - log 2`.
pub fn const_b_conjectured() -> f64 {
    const_d() - LN_2
}

/// Conjectured entropy of the extended system,
/// `H = [bracket - log 2 (3 log 3 - 4 log 2)] / (2 log 2 - log 3)`.
pub fn const_h_conjectured() -> f64 {
    let h = (e_bracket(DEFAULT_TERMS) - LN_2 * (3.0 * 3f64.ln() - 4.0 * LN_2)) / ln_4_3();
    let via_a = const_a() - const_b_conjectured();
    assert!((h - via_a).abs() < 1e-12, "H = A - B identity broken: {h} vs {via_a}");
    h
}

/// A cost of the expansion, keyed as in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cost {
    K,
    S,
    Sigma,
    Q,
    Rho,
    R,
    Q2,
}

impl Cost {
    pub const ALL: [Cost; 7] = [Cost::K, Cost::S, Cost::Sigma, Cost::Q, Cost::Rho, Cost::R, Cost::Q2];

    pub fn name(self) -> &'static str {
        match self {
            Cost::K => "K",
            Cost::S => "S",
            Cost::Sigma => "sigma",
            Cost::Q => "q",
            Cost::Rho => "rho",
            Cost::R => "r",
            Cost::Q2 => "q2",
        }
    }

    /// Asymptotic ratio `E_N[c] / E_N[K]`. For `S` this is `D / log 2`.
    pub fn growth_constant(self) -> f64 {
        let (a, b, d) = (const_a(), const_b_conjectured(), const_d());
        match self {
            Cost::K => 1.0,
            Cost::S => d / LN_2,
            Cost::Sigma => d,
            Cost::Q => a + d,
            Cost::Rho | Cost::Q2 => b + d,
            Cost::R => a - b,
        }
    }

    /// Whether [`Cost::growth_constant`] relies on the conjectured `B`.
    pub fn conjectural(self) -> bool {
        matches!(self, Cost::Rho | Cost::Q2 | Cost::R)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of the cost table: the cost, its exponent quadruple `(t, u, v, z)`,
/// the symbolic constant and its value.
#[derive(Debug, Clone, Serialize)]
pub struct CostRow {
    pub cost: &'static str,
    pub quantity: &'static str,
    pub quadruple: [i8; 4],
    pub constant: &'static str,
    pub value: f64,
    pub conjectural: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsTable {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B_conj")]
    pub b_conj: f64,
    #[serde(rename = "H_conj")]
    pub h_conj: f64,
    pub two_over_h: f64,
    #[serde(rename = "M")]
    pub m: BTreeMap<&'static str, f64>,
    pub rows: Vec<CostRow>,
}

pub fn m_table() -> ConstantsTable {
    let (e, d, a, b) = (const_e(DEFAULT_TERMS), const_d(), const_a(), const_b_conjectured());
    let h = const_h_conjectured();
    let rows = vec![
        CostRow { cost: "sigma", quantity: "d(h)", quadruple: [0, 0, 1, 0], constant: "D", value: d, conjectural: false },
        CostRow { cost: "q", quantity: "Q^2", quadruple: [-1, 0, 1, 0], constant: "A+D", value: a + d, conjectural: false },
        CostRow { cost: "rho", quantity: "g^2(P,Q)", quadruple: [0, 1, 1, 1], constant: "B+D", value: b + d, conjectural: true },
        CostRow { cost: "r", quantity: "R^2(P,Q)", quadruple: [-1, -1, 0, -1], constant: "A-B", value: a - b, conjectural: true },
        CostRow { cost: "q2", quantity: "|Q|_2^-2", quadruple: [0, 1, 1, 0], constant: "B+D", value: b + d, conjectural: true },
    ];
    let m = rows.iter().map(|r| (r.cost, r.value)).collect();
    ConstantsTable { e, d, a, b_conj: b, h_conj: h, two_over_h: 2.0 / h, m, rows }
}

impl fmt::Display for ConstantsTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scalars = [
            ("E", self.e, ""),
            ("D", self.d, ""),
            ("A", self.a, ""),
            ("B", self.b_conj, "  conjectured: B = D - log 2"),
            ("H", self.h_conj, "  conjectured: H = A - B"),
            ("2/H", self.two_over_h, "  conjectured"),
            ("D/log2", self.d / LN_2, ""),
        ];
        for (name, v, note) in scalars {
            writeln!(f, "{name} = {v:.6}    ({v:.12}){note}")?;
        }
        writeln!(f)?;
        writeln!(f, "{:<6} {:<10} {:<16} {:<6} {:>10}", "cost", "C", "(t,u,v,z)", "M(c)", "value")?;
        for r in &self.rows {
            let quad = format!("({},{},{},{})", r.quadruple[0], r.quadruple[1], r.quadruple[2], r.quadruple[3]);
            let flag = if r.conjectural { "  *" } else { "" };
            writeln!(f, "{:<6} {:<10} {:<16} {:<6} {:>10.5}{flag}", r.cost, r.quantity, quad, r.constant, r.value)?;
        }
        writeln!(f, "* depends on the conjecture D - B = log 2")
    }
}
