//! Weighted Bergman spaces `H = {f ∈ Hol(Ω) : ∫ |f|² e^{−λφ} ωⁿ/n! < ∞}` on
//! the model domains, truncated to polynomials of total degree at most `N`.
//!
//! `ω` is the Kähler form of the model metric `g = μ g_min` and `φ` its
//! potential, possibly shifted by a pluriharmonic gauge term. Monomials are
//! ordered by total degree, and the Gram matrix `G = L L*` is factored once;
//! the orthonormal basis is `s(z) = L⁻¹ m(z)`. Since `L` is lower triangular
//! the basis for a smaller degree is a prefix of the same vector.
//!
//! [`KernelApproximation::kernel_diastasis`] returns `log ψ / λ`: the log of
//! the kernel cross ratio is the diastasis of `λ g`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::{ConeRule, DomainModel, ModelKind};
use crate::point::{Point, C64};
use crate::quadrature::{gauss_jacobi_unit, pairwise_sum, tree_reduce, Rule};
use crate::shells::{self, ShellReport, ShellSchedule, Verdict};

/// Largest sample radius used by the default balance test.
pub const DEFAULT_RHO_MAX: f64 = 0.9;
pub const DEFAULT_REL_TOL: f64 = 1e-4;
const HERMITIAN_TOL: f64 = 1e-12;
const CHUNK: usize = 512;

/// Truncation degree used when none is given: 64 on the disk, 16 in two
/// variables, 8 in three, 4 beyond.
pub fn default_degree(model: &DomainModel) -> usize {
    match model.dim() {
        1 => 64,
        2 => 16,
        3 => 8,
        _ => 4,
    }
}

/// `8` radii `ρ_max·k/7` times `3` angles.
pub fn default_samples(model: &DomainModel) -> Vec<Point> {
    let mut out = Vec::with_capacity(24);
    for k in 0..8 {
        let r = DEFAULT_RHO_MAX * k as f64 / 7.0;
        for a in 0..3 {
            out.push(model.sample_point(r, TAU * a as f64 / 3.0));
        }
    }
    out
}

/// Pluriharmonic gauge term `2 Re Σ α_j z_j` added to the potential.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gauge {
    pub coefficients: Vec<C64>,
}

impl Gauge {
    pub fn none() -> Self {
        Gauge::default()
    }

    pub fn linear(coefficients: Vec<C64>) -> Self {
        Gauge { coefficients }
    }

    pub fn is_trivial(&self) -> bool {
        self.coefficients.iter().all(|a| a.norm_sqr() == 0.0)
    }

    pub fn term(&self, z: &Point) -> f64 {
        2.0 * self.coefficients.iter().zip(&z.0).map(|(a, z)| (a * z).re).sum::<f64>()
    }
}

/// How the Gram matrix is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum QuadratureSpec {
    /// Torus-invariant weights: exact angular integrals, Gauss-Jacobi in `|z|²`.
    Radial { radial_nodes: usize },
    /// Trapezoid phases, Gauss-Legendre moduli angles and Gauss-Jacobi radius
    /// (disk, ball, polydisk factors).
    Cone { radial_nodes: usize, angular_nodes: usize, polar_nodes: usize },
    /// Halton directions with a Gauss-Jacobi radius.
    QuasiMonteCarlo { samples: u64, radial_nodes: usize },
}

impl QuadratureSpec {
    pub fn auto(model: &DomainModel, degree: usize, gauge: &Gauge) -> Self {
        let radial_nodes = degree + model.dim() + 24;
        match model.kind {
            ModelKind::TypeI { .. } => QuadratureSpec::QuasiMonteCarlo { samples: 1 << 14, radial_nodes },
            _ if gauge.is_trivial() => QuadratureSpec::Radial { radial_nodes },
            ModelKind::Ball(_) => {
                QuadratureSpec::Cone { radial_nodes, angular_nodes: degree + 32, polar_nodes: degree / 2 + 12 }
            }
            _ => QuadratureSpec::Cone { radial_nodes, angular_nodes: degree + 64, polar_nodes: 1 },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            QuadratureSpec::Radial { radial_nodes } => format!("radial(gauss-jacobi {radial_nodes})"),
            QuadratureSpec::Cone { radial_nodes, angular_nodes, polar_nodes } => {
                format!("cone(trapezoid {angular_nodes}, legendre {polar_nodes}, gauss-jacobi {radial_nodes})")
            }
            QuadratureSpec::QuasiMonteCarlo { samples, radial_nodes } => {
                format!("qmc(halton {samples}, gauss-jacobi {radial_nodes})")
            }
        }
    }

    fn radial_nodes(&self) -> usize {
        match *self {
            QuadratureSpec::Radial { radial_nodes }
            | QuadratureSpec::Cone { radial_nodes, .. }
            | QuadratureSpec::QuasiMonteCarlo { radial_nodes, .. } => radial_nodes,
        }
    }
}

/// Multi-indices of total degree `≤ N`, graded.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomials {
    pub dim: usize,
    pub degree: usize,
    pub exponents: Vec<Vec<usize>>,
    /// `offsets[k]` counts the exponents of total degree `< k`.
    pub offsets: Vec<usize>,
}

impl Monomials {
    pub fn graded(dim: usize, degree: usize) -> Self {
        let mut exponents = Vec::new();
        let mut offsets = vec![0];
        for k in 0..=degree {
            let mut cur = vec![0; dim];
            compositions(k, 0, &mut cur, &mut exponents);
            offsets.push(exponents.len());
        }
        Monomials { dim, degree, exponents, offsets }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Number of monomials of total degree `≤ k`.
    pub fn count_through(&self, k: usize) -> usize {
        self.offsets[k.min(self.degree) + 1]
    }

    pub fn eval(&self, z: &Point) -> DVector<C64> {
        let powers: Vec<Vec<C64>> = z
            .0
            .iter()
            .map(|&c| {
                let mut p = Vec::with_capacity(self.degree + 1);
                let mut acc = C64::new(1.0, 0.0);
                for _ in 0..=self.degree {
                    p.push(acc);
                    acc *= c;
                }
                p
            })
            .collect();
        DVector::from_iterator(
            self.len(),
            self.exponents.iter().map(|a| a.iter().enumerate().map(|(j, &k)| powers[j][k]).product::<C64>()),
        )
    }
}

fn compositions(total: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if j + 1 == cur.len() {
        cur[j] = total;
        out.push(cur.clone());
        return;
    }
    for k in (0..=total).rev() {
        cur[j] = k;
        compositions(total - k, j + 1, cur, out);
    }
    cur[j] = 0;
}

/// Shell report for `‖1‖²`; used to refuse spaces that do not contain the
/// constants. A bounded gauge factor does not affect convergence and is
/// left out.
pub fn constant_norm_report(model: &DomainModel, lambda: f64, spec: &QuadratureSpec) -> Result<ShellReport> {
    let schedule = ShellSchedule::default();
    let s = model.boundary_exponent(lambda);
    let mu = model.scale;
    match model.kind {
        ModelKind::Disk | ModelKind::Ball(_) => {
            let n = model.dim() as i32;
            let sphere = 2.0 * PI.powi(n) / (1..n).map(f64::from).product::<f64>();
            shells::exhaust(&schedule, |t| mu.powi(n) * sphere * t.powi(2 * n - 1) * (1.0 - t * t).powf(s))
        }
        ModelKind::Polydisk(_) => shells::exhaust(&schedule, |t| mu * TAU * t * (1.0 - t * t).powf(s)),
        ModelKind::TypeI { .. } => {
            let samples = match spec {
                QuadratureSpec::QuasiMonteCarlo { samples, .. } => (*samples).min(1 << 12),
                _ => 1 << 12,
            };
            let rule = ConeRule::quasi_monte_carlo(model, samples)?;
            let d = model.dim() as i32;
            shells::exhaust(&schedule, |t| {
                t.powi(2 * d - 1) * rule.directions.iter().map(|w| w.weight * w.weight_along(model, lambda, t)).sum::<f64>()
            })
        }
    }
}

/// A truncated weighted Bergman space with its factored Gram matrix.
#[derive(Debug, Clone)]
pub struct KernelApproximation {
    pub model: DomainModel,
    pub lambda: f64,
    pub degree: usize,
    pub gauge: Gauge,
    pub spec: QuadratureSpec,
    pub monomials: Monomials,
    gram: Gram,
    /// Largest normalized difference between the Gram matrices of the two
    /// halves of a quasi-Monte Carlo sample.
    pub quadrature_error: Option<f64>,
}

/// A torus-invariant weight makes the monomials orthogonal, so the radial
/// path keeps only the norms `‖m_j‖²` and larger bases stay affordable.
#[derive(Debug, Clone)]
enum Gram {
    Diagonal(DVector<f64>),
    Dense { gram: DMatrix<C64>, factor: DMatrix<C64> },
}

/// Builds the space for the potential `φ = μ φ_min`.
pub fn build_space(model: &DomainModel, lambda: f64, degree: usize, spec: QuadratureSpec) -> Result<KernelApproximation> {
    build_gauged_space(model, lambda, degree, Gauge::none(), spec)
}

pub fn build_gauged_space(
    model: &DomainModel,
    lambda: f64,
    degree: usize,
    gauge: Gauge,
    spec: QuadratureSpec,
) -> Result<KernelApproximation> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if !gauge.coefficients.is_empty() && gauge.coefficients.len() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "gauge has {} coefficients for a {}-dimensional model",
            gauge.coefficients.len(),
            model.dim()
        )));
    }
    let report = constant_norm_report(model, lambda, &spec)?;
    if report.verdict != Verdict::Convergent {
        return Err(Error::DivergentNorm { lambda, ratios: report.ratios });
    }

    let monomials = Monomials::graded(model.dim(), degree);
    let s = model.boundary_exponent(lambda);
    let radial = gauss_jacobi_unit(spec.radial_nodes().max(1), s, 0.0)?;
    let (gram, quadrature_error) = match (spec, model.kind) {
        (QuadratureSpec::Radial { .. }, ModelKind::TypeI { .. }) => {
            return Err(Error::Unsupported("radial quadrature for type I models".into()))
        }
        (QuadratureSpec::Radial { .. }, _) if !gauge.is_trivial() => {
            return Err(Error::Unsupported("radial quadrature with a gauge term (weight is not torus-invariant)".into()))
        }
        (QuadratureSpec::Radial { radial_nodes }, _) => {
            let moments = gauss_jacobi_unit(radial_nodes.max(1), s, 0.0)?;
            let norms = radial_norms(model, &monomials, &moments);
            if norms.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
                return Err(Error::FactorizationFailed);
            }
            return Ok(KernelApproximation {
                model: model.clone(),
                lambda,
                degree,
                gauge,
                spec,
                monomials,
                gram: Gram::Diagonal(norms),
                quadrature_error: None,
            });
        }
        (QuadratureSpec::Cone { angular_nodes, .. }, ModelKind::Polydisk(n)) => {
            let disk = DomainModel::disk(model.scale)?;
            let rule = ConeRule::product(&disk, angular_nodes, 1)?;
            let one_dim = Monomials::graded(1, degree);
            let factors: Vec<DMatrix<C64>> = (0..n)
                .map(|j| {
                    let g = Gauge::linear(vec![gauge.coefficients.get(j).copied().unwrap_or_default()]);
                    let nodes = cone_nodes(&disk, lambda, &g, &rule, &radial, None);
                    accumulate(&one_dim, &nodes).0
                })
                .collect();
            (polydisk_gram(&monomials, &factors), None)
        }
        (QuadratureSpec::Cone { angular_nodes, polar_nodes, .. }, ModelKind::Disk | ModelKind::Ball(_)) => {
            let rule = ConeRule::product(model, angular_nodes, polar_nodes)?;
            let nodes = cone_nodes(model, lambda, &gauge, &rule, &radial, None);
            (accumulate(&monomials, &nodes).0, None)
        }
        (QuadratureSpec::Cone { .. }, ModelKind::TypeI { .. }) => {
            return Err(Error::Unsupported("product cone rule for type I models (use quasi-Monte Carlo)".into()))
        }
        (QuadratureSpec::QuasiMonteCarlo { samples, .. }, _) => {
            let rule = ConeRule::quasi_monte_carlo(model, samples)?;
            let nodes = cone_nodes(model, lambda, &gauge, &rule, &radial, Some(samples / 2));
            let (g, halves) = accumulate(&monomials, &nodes);
            let (a, b) = halves;
            let mut err: f64 = 0.0;
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    let scale = (g[(i, i)].re * g[(j, j)].re).sqrt();
                    err = err.max((a[(i, j)] - b[(i, j)]).norm() / scale);
                }
            }
            (g, Some(err))
        }
    };

    let defect = hermitian_defect(&gram);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let gram = (&gram + gram.adjoint()).unscale(2.0);
    let factor = Cholesky::new(gram.clone()).ok_or(Error::FactorizationFailed)?.l();
    if factor.diagonal().iter().any(|d| !(d.re > 0.0 && d.re.is_finite())) {
        return Err(Error::FactorizationFailed);
    }
    Ok(KernelApproximation {
        model: model.clone(),
        lambda,
        degree,
        gauge,
        spec,
        monomials,
        gram: Gram::Dense { gram, factor },
        quadrature_error,
    })
}

fn hermitian_defect(g: &DMatrix<C64>) -> f64 {
    let scale = g.diagonal().iter().map(|d| d.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..i {
            worst = worst.max((g[(i, j)] - g[(j, i)].conj()).norm());
        }
        worst = worst.max(g[(i, i)].im.abs());
    }
    worst / scale
}

/// `α! / (|α| + n − 1)!`, the angular factor of `∫ |z^α|² f(|z|²)` over the ball.
fn sphere_moment(alpha: &[usize]) -> f64 {
    let n = alpha.len();
    let total: usize = alpha.iter().sum();
    let log: f64 = alpha.iter().map(|&a| ln_gamma(a as f64 + 1.0)).sum::<f64>() - ln_gamma((total + n) as f64);
    log.exp()
}

fn radial_norms(model: &DomainModel, mono: &Monomials, rule: &Rule) -> DVector<f64> {
    let mu = model.scale;
    let moment = |k: usize| pairwise_sum(&rule.iter().map(|(x, w)| w * x.powi(k as i32)).collect::<Vec<_>>());
    let diag: Vec<f64> = mono
        .exponents
        .iter()
        .map(|a| match model.kind {
            ModelKind::Polydisk(_) => a.iter().map(|&k| mu * PI * moment(k)).product(),
            _ => {
                let n = a.len();
                let total: usize = a.iter().sum();
                (mu * PI).powi(n as i32) * sphere_moment(a) * moment(total + n - 1)
            }
        })
        .collect();
    DVector::from_vec(diag)
}

fn polydisk_gram(mono: &Monomials, factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    let k = mono.len();
    DMatrix::from_fn(k, k, |i, j| {
        let (a, b) = (&mono.exponents[i], &mono.exponents[j]);
        factors.iter().enumerate().map(|(f, g)| g[(a[f], b[f])]).product()
    })
}

/// A weighted node `(z, w, half)`: `w` includes `e^{−λφ'}` and the volume
/// density; `half` tags the second half of a quasi-Monte Carlo sample.
type Node = (Point, f64, bool);

fn cone_nodes(model: &DomainModel, lambda: f64, gauge: &Gauge, rule: &ConeRule, radial: &Rule, split: Option<u64>) -> Vec<Node> {
    let d = rule.real_dim as i32;
    let mut nodes = Vec::with_capacity(rule.directions.len() * radial.len());
    for dir in &rule.directions {
        let half = split.is_some_and(|h| dir.index > h);
        for (t, v) in radial.iter() {
            let z = dir.point.scaled(t);
            let w = dir.weight * v * t.powi(d - 1) * dir.folded_weight_along(model, lambda, t) * (-lambda * gauge.term(&z)).exp();
            nodes.push((z, w, half));
        }
    }
    nodes
}

/// `Σ w m(z) m(z)*` over the nodes, plus the same sum split by half.
fn accumulate(mono: &Monomials, nodes: &[Node]) -> (DMatrix<C64>, (DMatrix<C64>, DMatrix<C64>)) {
    let k = mono.len();
    let zero = || DMatrix::<C64>::zeros(k, k);
    let parts: Vec<(DMatrix<C64>, DMatrix<C64>)> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut out = [zero(), zero()];
            for (g, half) in [(0usize, false), (1, true)] {
                let cols: Vec<DVector<C64>> =
                    chunk.iter().filter(|n| n.2 == half).map(|(z, w, _)| mono.eval(z) * C64::new(w.sqrt(), 0.0)).collect();
                if !cols.is_empty() {
                    let a = DMatrix::from_columns(&cols);
                    out[g] = &a * a.adjoint();
                }
            }
            let [a, b] = out;
            (a, b)
        })
        .collect();
    let (a, b) = tree_reduce(parts, |x, y| (x.0 + y.0, x.1 + y.1)).unwrap_or_else(|| (zero(), zero()));
    (&a + &b, (a, b))
}

/// `ε` at one point together with its value at half the truncation degree.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSample {
    pub point: Point,
    pub radius: f64,
    pub epsilon: f64,
    pub epsilon_half: f64,
    pub truncation_limited: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BalanceVerdict {
    Balanced,
    NotBalanced,
    /// Deviation within a factor 2 of the tolerance.
    Inconclusive,
    /// The space does not contain the constants.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub lambda: f64,
    pub degree: usize,
    pub rel_tol: f64,
    pub samples: Vec<EpsilonSample>,
    pub mean: f64,
    /// `max |ε_i − ε̄| / ε̄`.
    pub deviation: f64,
    /// `deviation ≤ rel_tol` and every sample positive.
    pub balanced: bool,
    pub verdict: BalanceVerdict,
    pub truncation_limited: bool,
    pub reason: Option<String>,
}

impl KernelApproximation {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// The Gram matrix `⟨m_i, m_j⟩`.
    pub fn gram(&self) -> DMatrix<C64> {
        match &self.gram {
            Gram::Diagonal(d) => DMatrix::from_diagonal(&d.map(|x| C64::new(x, 0.0))),
            Gram::Dense { gram, .. } => gram.clone(),
        }
    }

    /// Orthonormal basis values `s(z) = L⁻¹ m(z)`.
    pub fn basis_values(&self, z: &Point) -> Result<DVector<C64>> {
        self.model.check(z)?;
        let m = self.monomials.eval(z);
        match &self.gram {
            Gram::Diagonal(d) => Ok(m.zip_map(d, |a, n| a.unscale(n.sqrt()))),
            Gram::Dense { factor, .. } => factor.solve_lower_triangular(&m).ok_or(Error::FactorizationFailed),
        }
    }

    fn kernel_from(&self, sz: &DVector<C64>, sw: &DVector<C64>, terms: usize) -> C64 {
        sz.iter().zip(sw.iter()).take(terms).map(|(a, b)| a * b.conj()).sum()
    }

    /// `K(z, w̄) = Σ s_j(z) conj(s_j(w))`.
    pub fn reproducing_kernel(&self, z: &Point, w: &Point) -> Result<C64> {
        let sz = self.basis_values(z)?;
        let sw = self.basis_values(w)?;
        Ok(self.kernel_from(&sz, &sw, self.len()))
    }

    /// The kernel on the diagonal truncated at total degree `k ≤ N`.
    pub fn truncated_diagonal(&self, z: &Point, k: usize) -> Result<f64> {
        let sz = self.basis_values(z)?;
        Ok(self.kernel_from(&sz, &sz, self.monomials.count_through(k)).re)
    }

    /// The shifted potential `φ' = μφ_min + 2 Re(α·z)`.
    pub fn potential(&self, z: &Point) -> Result<f64> {
        Ok(self.model.potential(z)? + self.gauge.term(z))
    }

    pub fn epsilon_function(&self, z: &Point) -> Result<f64> {
        let k = self.reproducing_kernel(z, z)?.re;
        Ok((-self.lambda * self.potential(z)?).exp() * k)
    }

    /// `ε` at `N` and `N/2`; flagged when they differ by more than
    /// `10·rel_tol`.
    pub fn epsilon_sample(&self, z: &Point, rel_tol: f64) -> Result<EpsilonSample> {
        let sz = self.basis_values(z)?;
        let w = (-self.lambda * self.potential(z)?).exp();
        let epsilon = w * self.kernel_from(&sz, &sz, self.len()).re;
        let epsilon_half = w * self.kernel_from(&sz, &sz, self.monomials.count_through(self.degree / 2)).re;
        let truncation_limited = ((epsilon - epsilon_half) / epsilon).abs() > 10.0 * rel_tol;
        Ok(EpsilonSample { point: z.clone(), radius: self.model.gauge_norm(z), epsilon, epsilon_half, truncation_limited })
    }

    pub fn is_balanced(&self, samples: &[Point], rel_tol: f64) -> Result<BalanceReport> {
        if samples.len() < 2 {
            return Err(Error::Precondition("constancy needs at least two sample points".into()));
        }
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {rel_tol}")));
        }
        let samples: Vec<EpsilonSample> = samples.iter().map(|z| self.epsilon_sample(z, rel_tol)).collect::<Result<_>>()?;
        let values: Vec<f64> = samples.iter().map(|s| s.epsilon).collect();
        let mean = pairwise_sum(&values) / values.len() as f64;
        let deviation = values.iter().map(|e| (e - mean).abs() / mean).fold(0.0, f64::max);
        let positive = values.iter().all(|&e| e > 0.0);
        let verdict = if !positive || deviation > 2.0 * rel_tol {
            BalanceVerdict::NotBalanced
        } else if deviation <= 0.5 * rel_tol {
            BalanceVerdict::Balanced
        } else {
            BalanceVerdict::Inconclusive
        };
        Ok(BalanceReport {
            lambda: self.lambda,
            degree: self.degree,
            rel_tol,
            truncation_limited: samples.iter().any(|s| s.truncation_limited),
            samples,
            mean,
            deviation,
            balanced: positive && deviation <= rel_tol,
            verdict,
            reason: None,
        })
    }

    /// `(1/λ) log[K(z,z̄) K(z0,z̄0) / (K(z,z̄0) K(z0,z̄))]`.
    pub fn kernel_diastasis(&self, z0: &Point, z: &Point) -> Result<f64> {
        let s0 = self.basis_values(z0)?;
        let s = self.basis_values(z)?;
        let kzz = self.kernel_from(&s, &s, self.len()).re;
        let k00 = self.kernel_from(&s0, &s0, self.len()).re;
        let cross = self.kernel_from(&s, &s0, self.len()).norm();
        if let Some(v) = [kzz, k00, cross].into_iter().find(|v| !(v.abs() >= 1e-300)) {
            return Err(Error::VanishingKernel(v));
        }
        Ok((kzz.ln() + k00.ln() - 2.0 * cross.ln()) / self.lambda)
    }

    /// Weighted nodes integrating `∫ f e^{−λφ'} ωⁿ/n!` for polynomials up to
    /// degree about `2N` (disk and ball) or with the space's sample (type I).
    pub fn weighted_nodes(&self) -> Result<Vec<(Point, f64)>> {
        let s = self.model.boundary_exponent(self.lambda);
        let n = self.degree;
        let radial = gauss_jacobi_unit(self.spec.radial_nodes().max(n + 8), s, 0.0)?;
        let rule = match (self.model.kind, self.spec) {
            (ModelKind::Polydisk(_), _) => {
                return Err(Error::Unsupported("weighted nodes for polydisks".into()));
            }
            (ModelKind::TypeI { .. }, QuadratureSpec::QuasiMonteCarlo { samples, .. }) => {
                ConeRule::quasi_monte_carlo(&self.model, samples)?
            }
            (_, QuadratureSpec::Cone { angular_nodes, polar_nodes, .. }) => {
                ConeRule::product(&self.model, angular_nodes, polar_nodes)?
            }
            _ => ConeRule::for_model(&self.model, n + 64, n / 2 + 12, 1 << 14)?,
        };
        Ok(cone_nodes(&self.model, self.lambda, &self.gauge, &rule, &radial, None)
            .into_iter()
            .map(|(z, w, _)| (z, w))
            .collect())
    }

    /// Quadrature inner product `∫ f conj(g) e^{−λφ'} ωⁿ/n!`.
    pub fn inner_product(&self, f: impl Fn(&Point) -> C64 + Sync, g: impl Fn(&Point) -> C64 + Sync) -> Result<C64> {
        let nodes = self.weighted_nodes()?;
        let parts: Vec<C64> = nodes
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|(z, w)| f(z) * g(z).conj() * *w).sum::<C64>())
            .collect();
        Ok(tree_reduce(parts, |a, b| a + b).unwrap_or_default())
    }
}

/// Largest basis the automatic degree escalation will build with a dense
/// Gram matrix.
pub const MAX_AUTO_BASIS: usize = 1024;
/// Same bound when the Gram matrix is diagonal.
pub const MAX_AUTO_DIAGONAL_BASIS: usize = 1 << 16;

/// Builds the space with default quadrature and tests it on the default
/// samples. Without an explicit degree, the default is doubled while the
/// tail check reports truncation and the basis stays within
/// [`MAX_AUTO_BASIS`] (or [`MAX_AUTO_DIAGONAL_BASIS`] on the radial path). A space without the constants is reported as
/// [`BalanceVerdict::Degenerate`] rather than as an error.
pub fn check_balanced(model: &DomainModel, lambda: f64, degree: Option<usize>, samples: Option<&[Point]>, rel_tol: f64) -> Result<BalanceReport> {
    let owned;
    let pts = match samples {
        Some(p) => p,
        None => {
            owned = default_samples(model);
            &owned
        }
    };
    let mut n = degree.unwrap_or_else(|| default_degree(model));
    loop {
        let spec = QuadratureSpec::auto(model, n, &Gauge::none());
        let rep = match build_space(model, lambda, n, spec) {
            Ok(ka) => ka.is_balanced(pts, rel_tol)?,
            Err(e @ Error::DivergentNorm { .. }) => {
                return Ok(BalanceReport {
                    lambda,
                    degree: n,
                    rel_tol,
                    samples: Vec::new(),
                    mean: f64::NAN,
                    deviation: f64::NAN,
                    balanced: false,
                    verdict: BalanceVerdict::Degenerate,
                    truncation_limited: false,
                    reason: Some(format!("not balanced: space degenerates ({e})")),
                })
            }
            Err(e) => return Err(e),
        };
        let next = (2 * n).max(1);
        let cap = match spec {
            QuadratureSpec::Radial { .. } => MAX_AUTO_DIAGONAL_BASIS,
            _ => MAX_AUTO_BASIS,
        };
        if degree.is_some() || !rep.truncation_limited || Monomials::graded(model.dim(), next).len() > cap {
            return Ok(rep);
        }
        n = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta;

    fn disk(lambda: f64, n: usize) -> KernelApproximation {
        let m = DomainModel::disk(1.0).unwrap();
        build_space(&m, lambda, n, QuadratureSpec::auto(&m, n, &Gauge::none())).unwrap()
    }

    fn at(x: f64) -> Point {
        Point::real(&[x])
    }

    #[test]
    fn graded_monomials() {
        let m = Monomials::graded(2, 3);
        assert_eq!(m.len(), 10);
        assert_eq!(m.offsets, vec![0, 1, 3, 6, 10]);
        assert_eq!(m.exponents[1], vec![1, 0]);
        assert_eq!(m.count_through(1), 3);
        assert_eq!(Monomials::graded(4, 4).len(), 70);
    }

    #[test]
    fn disk_gram_matches_beta_norms() {
        for lambda in [2.0, 1.5, 3.7] {
            let ka = disk(lambda, 8);
            for k in 0..=8 {
                let exact = PI * beta(k as f64 + 1.0, lambda - 1.0);
                assert!((ka.gram()[(k, k)].re / exact - 1.0).abs() < 1e-12, "λ={lambda} k={k}");
            }
        }
        assert!((disk(2.0, 0).gram()[(0, 0)].re - PI).abs() < 1e-13);
    }

    #[test]
    fn divergent_constant_norm() {
        let m = DomainModel::disk(1.0).unwrap();
        for lambda in [0.9, 1.0] {
            let err = build_space(&m, lambda, 0, QuadratureSpec::Radial { radial_nodes: 8 }).unwrap_err();
            assert!(matches!(err, Error::DivergentNorm { .. }), "{err}");
        }
        let rep = check_balanced(&m, 1.0, None, None, DEFAULT_REL_TOL).unwrap();
        assert_eq!(rep.verdict, BalanceVerdict::Degenerate);
        assert!(!rep.balanced);
    }

    #[test]
    fn kernel_matches_closed_form() {
        let ka = disk(2.0, 64);
        let k0 = ka.reproducing_kernel(&at(0.0), &at(0.0)).unwrap();
        assert!((k0.re - 1.0 / PI).abs() < 1e-10 && k0.im == 0.0);
        let k = ka.reproducing_kernel(&at(0.5), &at(0.5)).unwrap().re;
        assert!((k - 1.0 / (PI * 0.75f64.powi(2))).abs() < 1e-8);
        let eps = disk(1.5, 64).epsilon_function(&at(0.5)).unwrap();
        assert!((eps - 0.5 / PI).abs() < 1e-9);
    }

    #[test]
    fn truncation_is_monotone() {
        let ka = disk(2.0, 32);
        let z = Point(vec![C64::new(0.3, 0.6)]);
        let mut prev = 0.0;
        for k in 0..=32 {
            let v = ka.truncated_diagonal(&z, k).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn balanced_disk() {
        let ka = disk(2.0, 128);
        let pts: Vec<Point> = [0.0, 0.3, 0.6, 0.9].iter().map(|&r| at(r)).collect();
        let rep = ka.is_balanced(&pts, 1e-5).unwrap();
        assert!(rep.balanced);
        assert_eq!(rep.verdict, BalanceVerdict::Balanced);
        assert!(matches!(ka.is_balanced(&pts[..1], 1e-5), Err(Error::Precondition(_))));
    }

    #[test]
    fn ball_and_polydisk_epsilon() {
        let ball = DomainModel::ball(2, 1.0).unwrap();
        let ka = build_space(&ball, 3.0, 16, QuadratureSpec::auto(&ball, 16, &Gauge::none())).unwrap();
        let z = ball.sample_point(0.4, 0.7);
        let exact = ball.closed_form_kernel(3.0, &z, &z).unwrap().re * (-3.0 * ball.potential(&z).unwrap()).exp();
        assert!((ka.epsilon_function(&z).unwrap() / exact - 1.0).abs() < 1e-8);
        // the exact constant is (λ−1)(λ−2)/π²
        assert!((exact - 2.0 / (PI * PI)).abs() < 1e-12);

        let poly = DomainModel::polydisk(2, 1.0).unwrap();
        let kp = build_space(&poly, 2.0, 16, QuadratureSpec::auto(&poly, 16, &Gauge::none())).unwrap();
        let z = poly.sample_point(0.3, 0.4);
        assert!((kp.epsilon_function(&z).unwrap() / (1.0 / (PI * PI)) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn radial_gram_is_diagonal_and_gauge_is_not() {
        let m = DomainModel::disk(1.0).unwrap();
        let g = Gauge::linear(vec![C64::new(0.3, 0.0)]);
        let ka = build_gauged_space(&m, 2.0, 16, g.clone(), QuadratureSpec::auto(&m, 16, &g)).unwrap();
        assert!(ka.gram()[(1, 0)].norm() > 1e-3);
        let plain = disk(2.0, 16).gram();
        for i in 0..17 {
            for j in 0..17 {
                if i != j {
                    assert_eq!(plain[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn gauge_leaves_epsilon_alone() {
        let m = DomainModel::disk(1.0).unwrap();
        let g = Gauge::linear(vec![C64::new(0.3, 0.0)]);
        let ka = build_gauged_space(&m, 2.0, 48, g.clone(), QuadratureSpec::auto(&m, 48, &g)).unwrap();
        let plain = disk(2.0, 48);
        for r in [0.0, 0.3, 0.6] {
            let z = Point(vec![C64::from_polar(r, 1.0)]);
            let (a, b) = (ka.epsilon_function(&z).unwrap(), plain.epsilon_function(&z).unwrap());
            assert!((a / b - 1.0).abs() < 1e-9, "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn gauged_polydisk_factorizes() {
        let m = DomainModel::polydisk(2, 1.0).unwrap();
        let g = Gauge::linear(vec![C64::new(0.2, 0.1), C64::new(-0.1, 0.0)]);
        let ka = build_gauged_space(&m, 2.0, 8, g.clone(), QuadratureSpec::auto(&m, 8, &g)).unwrap();
        let z = m.sample_point(0.3, 0.5);
        assert!((ka.epsilon_function(&z).unwrap() * PI * PI - 1.0).abs() < 1e-5);
    }

    #[test]
    fn kernel_diastasis_matches_geometry() {
        let ka = disk(2.0, 64);
        let m = &ka.model;
        assert!((ka.kernel_diastasis(&at(0.0), &at(0.5)).unwrap() + 0.75f64.ln()).abs() < 1e-8);
        let (z0, z) = (at(0.3), at(0.5));
        assert!((ka.kernel_diastasis(&z0, &z).unwrap() - m.diastasis(&z0, &z).unwrap()).abs() < 1e-8);
        assert!(ka.kernel_diastasis(&z, &z).unwrap().abs() < 1e-12);
    }

    #[test]
    fn reproducing_property() {
        let ka = disk(2.0, 64);
        let f = |w: &Point| C64::new(1.0, 0.0) + w.0[0] * w.0[0];
        for x in [0.0, 0.4, 0.7] {
            let z = at(x);
            let v = ka.inner_product(f, |w| ka.reproducing_kernel(w, &z).unwrap()).unwrap();
            assert!((v - f(&z)).norm() < 1e-6, "z={x}: {v}");
        }
    }

    #[test]
    fn type_one_space_is_roughly_balanced() {
        let m = DomainModel::type_one(1, 2, 1.0).unwrap();
        let spec = QuadratureSpec::QuasiMonteCarlo { samples: 1 << 12, radial_nodes: 12 };
        let ka = build_space(&m, 3.0, 2, spec).unwrap();
        let e0 = ka.epsilon_function(&m.sample_point(0.0, 0.0)).unwrap();
        assert!((e0 / (2.0 / (PI * PI)) - 1.0).abs() < 0.05, "{e0}");
        assert!(ka.quadrature_error.unwrap() < 0.1);
    }
}
