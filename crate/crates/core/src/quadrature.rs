//! Gauss-Jacobi rules, Halton points and deterministic summation.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        pairwise_sum(&self.iter().map(|(x, w)| w * f(x)).collect::<Vec<_>>())
    }

    /// Affine image on `[a, b]` (weights scaled by the Jacobian only).
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        Rule {
            nodes: self.nodes.iter().map(|x| a + half * (x + 1.0)).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }
}

fn jacobi_recurrence(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let diag: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                let s = 2.0 * k as f64 + ab;
                (beta * beta - alpha * alpha) / (s * (s + 2.0))
            }
        })
        .collect();
    // off[k] couples p_k and p_{k+1}; off[0] is written separately because the
    // generic formula is 0/0 when alpha + beta = -1.
    let off: Vec<f64> = (1..=n)
        .map(|k| {
            let kf = k as f64;
            if k == 1 {
                (4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                let s = 2.0 * kf + ab;
                (4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0)))
                    .sqrt()
            }
        })
        .collect();
    (diag, off)
}

/// Orthonormal polynomial values `p_0..p_{n-1}` at `x`, plus the (unnormalized)
/// degree-n value and its derivative.
fn orthonormal_eval(x: f64, diag: &[f64], off: &[f64], p0: f64) -> (f64, f64, f64) {
    let n = diag.len();
    let (mut pm, mut p) = (0.0, p0);
    let (mut dpm, mut dp) = (0.0, 0.0);
    let mut sumsq = p0 * p0;
    for k in 0..n {
        let prev = if k == 0 { 0.0 } else { off[k - 1] };
        let next = (x - diag[k]) * p - prev * pm;
        let dnext = p + (x - diag[k]) * dp - prev * dpm;
        if k + 1 == n {
            return (sumsq, next, dnext);
        }
        pm = p;
        dpm = dp;
        p = next / off[k];
        dp = dnext / off[k];
        sumsq += p * p;
    }
    unreachable!("n >= 1")
}

/// Gauss-Jacobi rule on `[-1, 1]` for the weight `(1 − x)^alpha (1 + x)^beta`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Rule> {
    if n == 0 {
        return Err(Error::Quadrature("rule needs at least one node".into()));
    }
    if !(alpha > -1.0 && beta > -1.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Quadrature(format!(
            "Jacobi exponents must exceed -1, got ({alpha}, {beta})"
        )));
    }
    let ab = alpha + beta;
    let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0);
    let mu0 = ln_mu0.exp();
    let (diag, off) = jacobi_recurrence(n, alpha, beta);

    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = diag[k];
        if k + 1 < n {
            jm[(k, k + 1)] = off[k];
            jm[(k + 1, k)] = off[k];
        }
    }
    let mut guesses: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().copied().collect();
    guesses.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    let p0 = 1.0 / mu0.sqrt();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for mut x in guesses {
        for _ in 0..8 {
            let (_, pn, dpn) = orthonormal_eval(x, &diag, &off, p0);
            if dpn == 0.0 {
                break;
            }
            let step = pn / dpn;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1e-3) {
                break;
            }
        }
        let (sumsq, _, _) = orthonormal_eval(x, &diag, &off, p0);
        nodes.push(x);
        weights.push(1.0 / sumsq);
    }
    Ok(Rule { nodes, weights })
}

pub fn gauss_legendre(n: usize) -> Rule {
    gauss_jacobi(n, 0.0, 0.0).expect("Legendre exponents are valid")
}

/// Rule on `[0, 1]` for the weight `(1 − t)^alpha t^beta`.
pub fn gauss_jacobi_unit(n: usize, alpha: f64, beta: f64) -> Result<Rule> {
    let rule = gauss_jacobi(n, alpha, beta)?;
    let scale = 0.5f64.powf(alpha + beta + 1.0);
    Ok(Rule {
        nodes: rule.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: rule.weights.iter().map(|w| w * scale).collect(),
    })
}

/// Equispaced rule on `[0, 2π)`; exact for trigonometric polynomials of
/// degree below `m`.
pub fn trapezoid_circle(m: usize) -> Rule {
    let h = std::f64::consts::TAU / m as f64;
    Rule { nodes: (0..m).map(|k| k as f64 * h).collect(), weights: vec![h; m] }
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

/// Point `index` of the Halton sequence in `[0, 1)^dim`.
pub fn halton(index: u64, dim: usize) -> Result<Vec<f64>> {
    if dim > PRIMES.len() {
        return Err(Error::Quadrature(format!("Halton sequence supports at most {} dimensions", PRIMES.len())));
    }
    Ok(PRIMES[..dim].iter().map(|&b| radical_inverse(index, b)).collect())
}

/// Sum in a fixed binary-tree order, independent of any thread schedule.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Tree reduction of owned partial results, combining neighbours in order.
pub fn tree_reduce<T>(mut parts: Vec<T>, mut combine: impl FnMut(T, T) -> T) -> Option<T> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}
