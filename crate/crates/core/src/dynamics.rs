//! The CL dynamical system on `[0, 1]`.
//!
//! Branches `T_a(x) = 1/(2^a x) - 1` on `(2^{-a-1}, 2^{-a}]`, their inverses
//! `h_a(x) = 2^-a / (1 + x)`, the invariant density
//! `psi(x) = 1 / (log(4/3) (x + 1)(x + 2))`, the weighted density transformer,
//! and orbit averages for the per-step growth rates of the costs.
//!
//! On a rational starting point the dyadic component of the extended system
//! coincides with the real one, so `|x|_2` is read off the exact orbit.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cl::{cl_step, cl_summary_big, Convention};
use crate::error::{invalid, Result};
use crate::numbers::{dyadic_norm, ln_biguint, pow2, Rational};
use crate::spectral::{tail_depth, CollocationGrid};

/// Index `a` of the fundamental interval `(2^{-a-1}, 2^{-a}]` containing `x`.
///
/// The dyadic endpoint `2^{-a-1}` belongs to branch `a + 1`, which agrees
/// with the maximal-exponent rule of the pseudo-division.
pub fn branch_of(x: &Rational) -> Result<u32> {
    if !x.is_positive() || x > &Rational::one() {
        return Err(invalid(format!("branch_of needs 0 < x <= 1, got {x}")));
    }
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    Ok(cl_step(n, d)?.exponent)
}

/// `(a, T_a(x))` for `0 < x <= 1`.
pub fn t_apply(x: &Rational) -> Result<(u32, Rational)> {
    let a = branch_of(x)?;
    let image = (pow2(i64::from(a)) * x).recip() - Rational::one();
    Ok((a, image))
}

/// Inverse branch `h_a(x) = 2^-a / (1 + x)`.
pub fn h_apply(a: u32, x: &Rational) -> Rational {
    pow2(-i64::from(a)) / (Rational::one() + x)
}

/// Invariant density of the CL system.
pub fn psi(x: f64) -> f64 {
    1.0 / ((4.0f64 / 3.0).ln() * (x + 1.0) * (x + 2.0))
}

/// Antiderivative of [`psi`], vanishing at 0.
pub fn psi_cdf(x: f64) -> f64 {
    (((x + 1.0) / (x + 2.0)).ln() + 2f64.ln()) / (4.0f64 / 3.0).ln()
}

/// Gauss-Legendre nodes and weights of order `m` on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = mf * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre quadrature with `panels` equal panels of order 8.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let (z, w) = gauss_legendre(8);
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = lo + (k as f64 + 0.5) * h;
            z.iter().zip(&w).map(|(zi, wi)| wi * f(mid + 0.5 * h * zi)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// Applies `H_{t,v}` to a function given in closed form, at the points `xs`.
///
/// `sup_f` bounds `|f|` on `[0, 1]` and sets the truncation depth.
pub fn transfer_apply_fn(
    f: impl Fn(f64) -> f64,
    xs: &[f64],
    t: f64,
    v: f64,
    sup_f: f64,
    tail_tol: f64,
) -> Result<Vec<f64>> {
    let a_max = tail_depth(t, v, sup_f, tail_tol)?;
    Ok(xs
        .iter()
        .map(|&x| {
            let sum: f64 = (0..=a_max)
                .map(|a| 2f64.powf(a as f64 * (v - t)) * f(2f64.powi(-(a as i32)) / (1.0 + x)))
                .sum();
            (1.0 + x).powf(-2.0 * t) * sum
        })
        .collect())
}

/// Applies `H_{t,v}` to a function given by its samples on `grid`, returning
/// samples of the image on the same grid. Off-grid values come from
/// barycentric interpolation.
pub fn transfer_apply(grid: &CollocationGrid, samples: &[f64], t: f64, v: f64, tail_tol: f64) -> Result<Vec<f64>> {
    if samples.len() != grid.len() {
        return Err(invalid("sample count does not match the grid"));
    }
    let sup = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    transfer_apply_fn(|y| grid.interpolate(samples, y), grid.nodes(), t, v, sup, tail_tol)
}

fn ser_rational<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitStep {
    #[serde(serialize_with = "ser_rational")]
    pub x: Rational,
    pub branch: u32,
    /// `2 log |x|_2`.
    pub dyadic_log: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSample {
    pub steps: Vec<OrbitStep>,
    pub length: usize,
    /// Whether the orbit reached the fixed point 0.
    pub terminated: bool,
}

impl OrbitSample {
    pub fn branches(&self) -> Vec<u32> {
        self.steps.iter().map(|s| s.branch).collect()
    }
}

/// Iterates `T` from `x0` until reaching 0 or `max_steps`.
pub fn orbit(x0: &Rational, max_steps: usize) -> Result<OrbitSample> {
    if !x0.is_positive() || x0 >= &Rational::one() {
        return Err(invalid(format!("orbit needs 0 < x0 < 1, got {x0}")));
    }
    let mut x = x0.clone();
    let mut steps = Vec::new();
    while !x.is_zero() && steps.len() < max_steps {
        let (branch, next) = t_apply(&x)?;
        let e = dyadic_norm(&x).exponent().expect("x is nonzero");
        steps.push(OrbitStep { x, branch, dyadic_log: 2.0 * e as f64 * std::f64::consts::LN_2 });
        x = next;
    }
    Ok(OrbitSample { length: steps.len(), terminated: x.is_zero(), steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirkhoffConfig {
    pub bits: u64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimates {
    /// Mean of `S/K`; tends to `D / log 2`.
    pub shift_rate: f64,
    /// Mean of `2 log q / K`; tends to the entropy `H`.
    pub entropy: f64,
    /// Mean of `rho / K`; tends to `B + D`.
    pub e2: f64,
    /// Mean of `δ(ĝ_K) / K`, the terminal gcd valuation per step.
    pub valuation_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirkhoffReport {
    pub samples: usize,
    pub bits: u64,
    pub seed: u64,
    pub estimates: Estimates,
    pub std_errors: Estimates,
}

/// Uniform coprime pair with `q` in `[lo, hi)` and `p` in `[1, q - 1]`; both
/// coordinates are redrawn until coprime.
pub(crate) fn draw_coprime_big(rng: &mut ChaCha8Rng, lo: &BigUint, hi: &BigUint) -> (BigUint, BigUint) {
    loop {
        let q = rng.gen_biguint_range(lo, hi);
        let p = rng.gen_biguint_range(&BigUint::one(), &q);
        if p.gcd(&q).is_one() {
            return (p, q);
        }
    }
}

/// Per-sample generator: stream `index` of the ChaCha generator seeded with
/// `seed`, so results do not depend on how samples are split across threads.
pub(crate) fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Per-trajectory averages over random coprime `bits`-bit inputs.
pub fn birkhoff_estimates(cfg: BirkhoffConfig) -> Result<BirkhoffReport> {
    if cfg.bits < 64 || cfg.samples == 0 {
        return Err(invalid("birkhoff_estimates needs bits >= 64 and samples >= 1"));
    }
    let lo = BigUint::one() << (cfg.bits - 1);
    let hi = BigUint::one() << cfg.bits;
    let ln2 = std::f64::consts::LN_2;
    let rows: Vec<[f64; 4]> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, i);
            let (p, q) = draw_coprime_big(&mut rng, &lo, &hi);
            let run = cl_summary_big(&p, &q, Convention::Canonical).expect("valid coprime pair");
            let k = run.k as f64;
            let e = run.terminal.trailing_zeros().expect("terminal is nonzero");
            [
                run.s as f64 / k,
                2.0 * ln_biguint(&q) / k,
                2.0 * (run.s - e) as f64 * ln2 / k,
                e as f64 / k,
            ]
        })
        .collect();
    let col = |j: usize| mean_and_stderr(rows.iter().map(move |r| r[j]), rows.len());
    let (m0, s0) = col(0);
    let (m1, s1) = col(1);
    let (m2, s2) = col(2);
    let (m3, s3) = col(3);
    Ok(BirkhoffReport {
        samples: cfg.samples,
        bits: cfg.bits,
        seed: cfg.seed,
        estimates: Estimates { shift_rate: m0, entropy: m1, e2: m2, valuation_rate: m3 },
        std_errors: Estimates { shift_rate: s0, entropy: s1, e2: s2, valuation_rate: s3 },
    })
}
