//! Cone decompositions of circled model domains.
//!
//! A star-shaped domain with Minkowski functional `ρ` satisfies
//! `∫_Ω f dV = ∫_0^1 t^{2d−1} ∫_{∂Ω} f(tW) dσ(W) dt` for the cone measure
//! `σ` on the boundary. A [`ConeRule`] discretizes `σ`; radial integrals are
//! left to the caller.

use std::f64::consts::{FRAC_PI_2, TAU};

use super::{DomainModel, ModelKind};
use crate::error::{Error, Result};
use crate::point::{Point, C64};
use crate::quadrature::{gauss_legendre, halton, trapezoid_circle};

/// A boundary point `W` with its cone-measure weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub point: Point,
    pub weight: f64,
    /// Squared singular values of `W` in decreasing order; the first is 1.
    pub sigma2: Vec<f64>,
    /// Sample index for quasi-Monte Carlo rules, 0 otherwise.
    pub index: u64,
}

impl Direction {
    /// `e^{−cφ(tW)} × volume(tW)` for the model's potential `φ = μ φ_min`.
    pub fn weight_along(&self, model: &DomainModel, c: f64, t: f64) -> f64 {
        let s = model.boundary_exponent(c);
        let mu_n = model.scale.powi(model.dim() as i32);
        mu_n * self.sigma2.iter().map(|s2| (1.0 - t * t * s2).powf(s)).product::<f64>()
    }

    /// [`weight_along`](Self::weight_along) divided by `(1 − t)^s`, smooth up
    /// to `t = 1`.
    pub fn folded_weight_along(&self, model: &DomainModel, c: f64, t: f64) -> f64 {
        let s = model.boundary_exponent(c);
        let mu_n = model.scale.powi(model.dim() as i32);
        let rest: f64 = self.sigma2[1..].iter().map(|s2| (1.0 - t * t * s2).powf(s)).product();
        mu_n * (1.0 + t).powf(s) * rest
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeRule {
    pub directions: Vec<Direction>,
    /// `2d`, the real dimension.
    pub real_dim: usize,
    /// Number of quasi-Monte Carlo samples drawn (accepted or not).
    pub samples: u64,
}

impl ConeRule {
    pub fn total_weight(&self) -> f64 {
        self.directions.iter().map(|d| d.weight).sum()
    }

    /// Deterministic product rule: trapezoid in every phase, Gauss-Legendre
    /// in the moduli angles. Disk and ball only.
    pub fn product(model: &DomainModel, angular: usize, polar: usize) -> Result<ConeRule> {
        let n = match model.kind {
            ModelKind::Disk => 1,
            ModelKind::Ball(n) => n,
            other => return Err(Error::Unsupported(format!("product cone rule for {other}"))),
        };
        let angular = angular.max(1);
        let polar = polar.max(1);
        let circle = trapezoid_circle(angular);
        let chi = gauss_legendre(polar).mapped(0.0, FRAC_PI_2);

        // moduli on the positive orthant of S^{n-1} with their measure
        let mut moduli: Vec<(Vec<f64>, f64)> = vec![(vec![1.0], 1.0)];
        if n > 1 {
            moduli.clear();
            let mut idx = vec![0usize; n - 1];
            loop {
                let mut r = Vec::with_capacity(n);
                let mut w = 1.0;
                let mut sin_prod = 1.0;
                for (k, &i) in idx.iter().enumerate() {
                    let (x, wx) = (chi.nodes[i], chi.weights[i]);
                    r.push(sin_prod * x.cos());
                    w *= wx * x.sin().powi((n - 2 - k) as i32);
                    sin_prod *= x.sin();
                }
                r.push(sin_prod);
                moduli.push((r, w));
                if !advance(&mut idx, polar) {
                    break;
                }
            }
        }

        let mut directions = Vec::new();
        for (r, wr) in &moduli {
            let jac: f64 = r.iter().product();
            let mut phases = vec![0usize; n];
            loop {
                let point = Point(
                    phases.iter().zip(r).map(|(&k, &rj)| C64::from_polar(rj, circle.nodes[k])).collect(),
                );
                let wt: f64 = phases.iter().map(|&k| circle.weights[k]).product();
                directions.push(Direction { point, weight: wr * jac * wt, sigma2: vec![1.0], index: 0 });
                if !advance(&mut phases, angular) {
                    break;
                }
            }
        }
        Ok(ConeRule { directions, real_dim: 2 * n, samples: 0 })
    }

    /// Quasi-Monte Carlo cone rule: Halton points of the unit polydisk that
    /// fall inside the domain, pushed radially to the boundary.
    pub fn quasi_monte_carlo(model: &DomainModel, samples: u64) -> Result<ConeRule> {
        let d = model.dim();
        if matches!(model.kind, ModelKind::Polydisk(_)) {
            return Err(Error::Unsupported("quasi-Monte Carlo cone rule for polydisks".into()));
        }
        let polydisk_volume = std::f64::consts::PI.powi(d as i32);
        let weight = 2.0 * d as f64 * polydisk_volume / samples as f64;
        let mut directions = Vec::new();
        for index in 1..=samples {
            let u = halton(index, 2 * d)?;
            let z = Point((0..d).map(|j| C64::from_polar(u[2 * j].sqrt(), TAU * u[2 * j + 1])).collect());
            let rho = model.gauge_norm(&z);
            if !(rho < 1.0) || rho == 0.0 {
                continue;
            }
            let w = z.scaled(1.0 / rho);
            let sigma2 = model.normalized_sigma2(&w);
            directions.push(Direction { point: w, weight, sigma2, index });
        }
        if directions.is_empty() {
            return Err(Error::Quadrature("no quasi-Monte Carlo sample landed in the domain".into()));
        }
        Ok(ConeRule { directions, real_dim: 2 * d, samples })
    }

    /// Product rule for the disk and ball, quasi-Monte Carlo for type I.
    pub fn for_model(model: &DomainModel, angular: usize, polar: usize, samples: u64) -> Result<ConeRule> {
        match model.kind {
            ModelKind::Disk | ModelKind::Ball(_) => Self::product(model, angular, polar),
            ModelKind::TypeI { .. } => Self::quasi_monte_carlo(model, samples),
            ModelKind::Polydisk(_) => Err(Error::Unsupported("cone rule for polydisks (use the product structure)".into())),
        }
    }
}

impl DomainModel {
    /// Squared singular values of a boundary point, scaled so the largest is 1.
    pub(crate) fn normalized_sigma2(&self, w: &Point) -> Vec<f64> {
        match self.kind {
            ModelKind::TypeI { .. } => {
                let mut s: Vec<f64> = self.matrix(w).singular_values().iter().map(|x| x * x).collect();
                s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
                let top = s[0];
                s.iter_mut().for_each(|x| *x /= top);
                s[0] = 1.0;
                s
            }
            _ => vec![1.0],
        }
    }
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for i in idx.iter_mut().rev() {
        *i += 1;
        if *i < base {
            return true;
        }
        *i = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ball_volume(n: usize) -> f64 {
        PI.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>()
    }

    #[test]
    fn product_rule_masses() {
        // total cone mass is 2d · vol(Ω)
        for n in 1..=3 {
            let m = if n == 1 { DomainModel::disk(1.0) } else { DomainModel::ball(n, 1.0) }.unwrap();
            let rule = ConeRule::product(&m, 8, 12).unwrap();
            let mass = rule.total_weight();
            assert!((mass - 2.0 * n as f64 * ball_volume(n)).abs() < 1e-10, "n={n}: {mass}");
            assert!(rule.directions.iter().all(|d| (d.point.norm() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn product_rule_integrates_sphere_moments() {
        // ∫_{S^3} |w_1|^4 dσ = 2π² · 2!/(2·3) = 2π²/3
        let m = DomainModel::ball(2, 1.0).unwrap();
        let rule = ConeRule::product(&m, 8, 16).unwrap();
        let v: f64 = rule.directions.iter().map(|d| d.weight * d.point.0[0].norm_sqr().powi(2)).sum();
        assert!((v - 2.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn qmc_rule_for_ball_as_type_one() {
        let m = DomainModel::type_one(1, 2, 1.0).unwrap();
        let rule = ConeRule::quasi_monte_carlo(&m, 1 << 14).unwrap();
        let mass = rule.total_weight();
        assert!((mass / (4.0 * ball_volume(2)) - 1.0).abs() < 5e-3, "{mass}");
        assert!(rule.directions.iter().all(|d| d.sigma2 == vec![1.0]));
    }

    #[test]
    fn qmc_rule_type_one_volume() {
        // vol I(2,2) = π⁴/12
        let m = DomainModel::type_one(2, 2, 1.0).unwrap();
        let rule = ConeRule::quasi_monte_carlo(&m, 1 << 15).unwrap();
        let vol = rule.total_weight() / 8.0;
        assert!((vol / (PI.powi(4) / 12.0) - 1.0).abs() < 2e-2, "{vol}");
        for d in &rule.directions {
            assert_eq!(d.sigma2[0], 1.0);
            assert!(d.sigma2[1] <= 1.0);
        }
    }

    #[test]
    fn polydisk_has_no_cone_rule() {
        let m = DomainModel::polydisk(2, 1.0).unwrap();
        assert!(ConeRule::for_model(&m, 4, 4, 16).is_err());
    }
}
