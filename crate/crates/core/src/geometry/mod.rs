//! Model domains: potentials, diastasis, volume densities and closed-form
//! reproducing kernels.
//!
//! Every model carries the metric `μ·g_min`, where `g_min` has the potential
//!
//! | kind          | `φ_min(z)`                  |
//! |---------------|-----------------------------|
//! | disk, ball(n) | `−log(1 − |z|²)`            |
//! | polydisk(n)   | `Σ_j −log(1 − |z_j|²)`      |
//! | typeI(p,q)    | `−log det(I_p − Z Z*)`      |
//!
//! The Bergman metric of an irreducible model is `μ = genus`. The diastasis
//! uses the Calabi convention `D(w, z) = φ(z,z̄) + φ(w,w̄) − φ(z,w̄) − φ(w,z̄)`
//! built from the closed-form continuation `φ_min(z, w̄) = −log(1 − ⟨z, w⟩)`
//! (resp. `−log det(I − Z W*)`), so `D(w, w) = 0`.
//!
//! Volume densities are taken against Lebesgue measure on `ℂⁿ ≅ ℝ²ⁿ` with
//! `(i/2) dz ∧ dz̄ = dx ∧ dy`.

mod cone;

pub use cone::{ConeRule, Direction};

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::catalog::{DomainDescriptor, Family};
use crate::error::{Error, Result};
use crate::point::{Point, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Disk,
    Ball(usize),
    Polydisk(usize),
    TypeI { p: usize, q: usize },
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Disk => write!(f, "disk"),
            ModelKind::Ball(n) => write!(f, "ball:{n}"),
            ModelKind::Polydisk(n) => write!(f, "polydisk:{n}"),
            ModelKind::TypeI { p, q } => write!(f, "typeI:{p},{q}"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    /// `disk`, `ball:n`, `polydisk:n`, `typeI:p,q`; the catalog label `I:p,q`
    /// is accepted for type I.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<usize> = if tail.is_empty() {
            Vec::new()
        } else {
            tail.split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad model parameter in {s:?}"))))
                .collect::<Result<_>>()?
        };
        let kind = match (head.to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("disk", []) => ModelKind::Disk,
            ("ball", [n]) => ModelKind::Ball(*n),
            ("polydisk", [n]) => ModelKind::Polydisk(*n),
            ("typei" | "i", [p, q]) => ModelKind::TypeI { p: *p, q: *q },
            _ => return Err(Error::Parse(format!("unknown model {s:?}"))),
        };
        match kind {
            ModelKind::Ball(0) | ModelKind::Polydisk(0) => Err(Error::InvalidParameter(format!("model {s:?} needs n >= 1"))),
            ModelKind::TypeI { p, q } if p == 0 || q == 0 => {
                Err(Error::InvalidParameter(format!("model {s:?} needs p, q >= 1")))
            }
            k => Ok(k),
        }
    }
}

/// A model domain with the metric `scale · g_min`.
impl ModelKind {
    /// Model of a catalog domain; only family I has one (`I:1,1` is the disk,
    /// `I:1,n` the ball).
    pub fn from_descriptor(d: &DomainDescriptor) -> Result<Self> {
        match (d.family, d.params.as_slice()) {
            (Family::I, &[1, 1]) => Ok(ModelKind::Disk),
            (Family::I, &[p, q]) if p == 1 || q == 1 => Ok(ModelKind::Ball((p * q) as usize)),
            (Family::I, &[p, q]) => Ok(ModelKind::TypeI { p: p as usize, q: q as usize }),
            _ => Err(Error::Unsupported(format!("no evaluatable model for {}", d.label()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainModel {
    pub kind: ModelKind,
    pub scale: f64,
}

impl DomainModel {
    pub fn new(kind: ModelKind, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::NonPositiveScale(scale.to_string()));
        }
        Ok(DomainModel { kind, scale })
    }

    pub fn disk(scale: f64) -> Result<Self> {
        Self::new(ModelKind::Disk, scale)
    }

    pub fn ball(n: usize, scale: f64) -> Result<Self> {
        Self::new(ModelKind::Ball(n), scale)
    }

    pub fn polydisk(n: usize, scale: f64) -> Result<Self> {
        Self::new(ModelKind::Polydisk(n), scale)
    }

    pub fn type_one(p: usize, q: usize, scale: f64) -> Result<Self> {
        Self::new(ModelKind::TypeI { p, q }, scale)
    }

    /// The model carrying its Bergman metric (`μ = genus`); polydisks use the
    /// per-factor genus 2.
    pub fn bergman(kind: ModelKind) -> Result<Self> {
        let m = Self::new(kind, 1.0)?;
        Self::new(kind, m.volume_exponent() as f64)
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::Disk => 1,
            ModelKind::Ball(n) | ModelKind::Polydisk(n) => n,
            ModelKind::TypeI { p, q } => p * q,
        }
    }

    /// Exponent `e` in the volume density `μⁿ h^{−e}` of the defining
    /// function `h` (per factor for polydisks); equals the genus of the
    /// irreducible models.
    pub fn volume_exponent(&self) -> usize {
        match self.kind {
            ModelKind::Disk | ModelKind::Polydisk(_) => 2,
            ModelKind::Ball(n) => n + 1,
            ModelKind::TypeI { p, q } => p + q,
        }
    }

    pub fn genus(&self) -> Option<usize> {
        match self.kind {
            ModelKind::Polydisk(n) if n > 1 => None,
            _ => Some(self.volume_exponent()),
        }
    }

    /// Closed-form diastatic entropy `(e − 1)/μ`, which is also the infimum
    /// of the `λ` making `λ g` balanced.
    pub fn entropy_closed_form(&self) -> f64 {
        (self.volume_exponent() as f64 - 1.0) / self.scale
    }

    /// Boundary exponent of `e^{−cφ}·volume`: the weight behaves like
    /// `h^{cμ − e}` near the boundary.
    pub fn boundary_exponent(&self, c: f64) -> f64 {
        c * self.scale - self.volume_exponent() as f64
    }

    fn matrix(&self, z: &Point) -> DMatrix<C64> {
        let ModelKind::TypeI { p, q } = self.kind else { unreachable!("matrix view of a non-matrix model") };
        DMatrix::from_row_slice(p, q, &z.0)
    }

    /// Minkowski functional of the circled domain: `|z|`, `max |z_j|` or the
    /// operator norm.
    pub fn gauge_norm(&self, z: &Point) -> f64 {
        match self.kind {
            ModelKind::Disk | ModelKind::Ball(_) => z.norm(),
            ModelKind::Polydisk(_) => z.0.iter().map(|c| c.norm()).fold(0.0, f64::max),
            ModelKind::TypeI { .. } => self.matrix(z).singular_values().max(),
        }
    }

    pub fn check(&self, z: &Point) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} expects points of dimension {}, got {}",
                self.kind,
                self.dim(),
                z.dim()
            )));
        }
        let norm = self.gauge_norm(z);
        if norm < 1.0 && z.0.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { norm })
        }
    }

    /// `φ_min(z, w̄)`, the holomorphic-antiholomorphic continuation.
    pub fn continued_min_potential(&self, z: &Point, w: &Point) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self.kind {
            ModelKind::Disk | ModelKind::Ball(_) => -(one - z.dot_conj(w)).ln(),
            ModelKind::Polydisk(_) => z.0.iter().zip(&w.0).map(|(a, b)| -(one - a * b.conj()).ln()).sum(),
            ModelKind::TypeI { p, .. } => {
                let m = DMatrix::<C64>::identity(p, p) - self.matrix(z) * self.matrix(w).adjoint();
                -m.determinant().ln()
            }
        }
    }

    /// `μ φ_min(z)`; zero at the origin.
    pub fn potential(&self, z: &Point) -> Result<f64> {
        self.check(z)?;
        Ok(self.scale * self.continued_min_potential(z, z).re)
    }

    /// Calabi diastasis `D(w, z)` of the metric `μ g_min`.
    pub fn diastasis(&self, w: &Point, z: &Point) -> Result<f64> {
        self.check(w)?;
        self.check(z)?;
        let zz = self.continued_min_potential(z, z);
        let ww = self.continued_min_potential(w, w);
        let cross = self.continued_min_potential(z, w) + self.continued_min_potential(w, z);
        let scale = 1.0 + cross.norm();
        if cross.im.abs() > 1e-9 * scale {
            return Err(Error::NonRealDiastasis(cross.im));
        }
        Ok(self.scale * (zz.re + ww.re - cross.re))
    }

    /// Density of `ωⁿ/n!` against Lebesgue measure.
    pub fn volume_density(&self, z: &Point) -> Result<f64> {
        self.check(z)?;
        Ok(self.volume_density_unchecked(z))
    }

    pub(crate) fn volume_density_unchecked(&self, z: &Point) -> f64 {
        let mu_n = self.scale.powi(self.dim() as i32);
        match self.kind {
            ModelKind::Disk | ModelKind::Ball(_) => {
                mu_n * (1.0 - z.norm().powi(2)).powi(-(self.volume_exponent() as i32))
            }
            ModelKind::Polydisk(_) => mu_n * z.0.iter().map(|c| (1.0 - c.norm_sqr()).powi(-2)).product::<f64>(),
            ModelKind::TypeI { p, q } => {
                let h = self.continued_min_potential(z, z).re;
                mu_n * (h * (p + q) as f64).exp()
            }
        }
    }

    /// Exact reproducing kernel `K(z, w̄)` of the space weighted by `e^{−λφ}`
    /// against `ωⁿ/n!`, for the disk, ball and polydisk.
    pub fn closed_form_kernel(&self, lambda: f64, z: &Point, w: &Point) -> Result<C64> {
        self.check(z)?;
        self.check(w)?;
        let threshold = self.entropy_closed_form();
        if !(lambda > threshold) {
            return Err(Error::BelowThreshold { lambda, threshold });
        }
        let s = lambda * self.scale;
        let one = C64::new(1.0, 0.0);
        let pi = std::f64::consts::PI;
        match self.kind {
            ModelKind::Disk | ModelKind::Ball(_) => {
                let n = self.dim();
                // Γ(s)/Γ(s − n) = (s − 1)(s − 2)…(s − n)
                let ratio: f64 = (1..=n).map(|k| s - k as f64).product();
                let c = ratio / (pi * self.scale).powi(n as i32);
                Ok(c * (one - z.dot_conj(w)).powf(-s))
            }
            ModelKind::Polydisk(_) => Ok(z
                .0
                .iter()
                .zip(&w.0)
                .map(|(a, b)| (s - 1.0) / (pi * self.scale) * (one - a * b.conj()).powf(-s))
                .product()),
            ModelKind::TypeI { .. } => Err(Error::Unsupported(
                "closed-form kernel for type I models; build the space numerically".into(),
            )),
        }
    }

    /// Representative sample points at Minkowski radius `r` and angle `theta`,
    /// spread over the coordinates.
    pub fn sample_point(&self, r: f64, theta: f64) -> Point {
        let n = self.dim();
        let phase = |k: usize| C64::from_polar(1.0, theta * (k + 1) as f64);
        match self.kind {
            ModelKind::Disk => Point(vec![C64::from_polar(r, theta)]),
            ModelKind::Ball(_) => Point((0..n).map(|k| phase(k) * (r / (n as f64).sqrt())).collect()),
            ModelKind::Polydisk(_) => Point((0..n).map(|k| phase(k) * r).collect()),
            ModelKind::TypeI { p, q } => {
                let mut v = vec![C64::new(0.0, 0.0); n];
                for k in 0..p.min(q) {
                    v[k * q + k] = phase(k) * r;
                }
                Point(v)
            }
        }
    }

    /// Point with first coordinate `r` and all others zero (the canonical
    /// radial direction).
    pub fn axis_point(&self, r: f64) -> Point {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[0] = C64::new(r, 0.0);
        Point(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn potential_examples() {
        let disk = DomainModel::disk(1.0).unwrap();
        assert_eq!(disk.potential(&Point::real(&[0.0])).unwrap(), 0.0);
        assert_relative_eq!(disk.potential(&Point::real(&[0.5])).unwrap(), 0.287682072451781, epsilon = 1e-12);
        let t = DomainModel::type_one(2, 2, 1.0).unwrap();
        let z = Point::real(&[0.5, 0.0, 0.0, 0.5]);
        assert_relative_eq!(t.potential(&z).unwrap(), 0.575364144903562, epsilon = 1e-12);
    }

    #[test]
    fn diastasis_examples() {
        let disk = DomainModel::disk(1.0).unwrap();
        let zero = Point::real(&[0.0]);
        let half = Point::real(&[0.5]);
        assert_relative_eq!(disk.diastasis(&zero, &half).unwrap(), 0.287682072451781, epsilon = 1e-12);
        assert_relative_eq!(DomainModel::disk(2.0).unwrap().diastasis(&zero, &half).unwrap(), 0.575364144903562, epsilon = 1e-12);
        let w = Point(vec![c(0.3, -0.2)]);
        assert!(disk.diastasis(&w, &w).unwrap().abs() < 1e-15);
    }

    #[test]
    fn volume_density_examples() {
        let disk = DomainModel::disk(1.0).unwrap();
        assert_eq!(disk.volume_density(&Point::real(&[0.0])).unwrap(), 1.0);
        assert_relative_eq!(disk.volume_density(&Point::real(&[0.5])).unwrap(), 1.0 / 0.5625, epsilon = 1e-12);
        let ball = DomainModel::ball(2, 1.0).unwrap();
        assert_relative_eq!(ball.volume_density(&Point::real(&[0.5, 0.0])).unwrap(), 0.75f64.powi(-3), epsilon = 1e-12);
        let t = DomainModel::type_one(2, 3, 2.0).unwrap();
        let z = Point::real(&[0.5, 0.0, 0.0, 0.0, 0.5, 0.0]);
        assert_relative_eq!(t.volume_density(&z).unwrap(), 2f64.powi(6) * 0.75f64.powi(-10), epsilon = 1e-9);
    }

    #[test]
    fn closed_form_kernel_examples() {
        let disk = DomainModel::disk(1.0).unwrap();
        let pi = std::f64::consts::PI;
        let zero = Point::real(&[0.0]);
        let half = Point::real(&[0.5]);
        assert_relative_eq!(disk.closed_form_kernel(2.0, &zero, &zero).unwrap().re, 1.0 / pi, epsilon = 1e-15);
        assert_relative_eq!(disk.closed_form_kernel(2.0, &half, &zero).unwrap().re, 1.0 / pi, epsilon = 1e-15);
        assert_relative_eq!(disk.closed_form_kernel(2.0, &half, &half).unwrap().re, 0.565884242, epsilon = 1e-9);
        assert!(matches!(disk.closed_form_kernel(1.0, &zero, &zero), Err(Error::BelowThreshold { .. })));
        let ball = DomainModel::ball(2, 1.0).unwrap();
        assert!(ball.closed_form_kernel(2.0, &Point::origin(2), &Point::origin(2)).is_err());
        let t = DomainModel::type_one(2, 2, 1.0).unwrap();
        assert!(matches!(t.closed_form_kernel(5.0, &Point::origin(4), &Point::origin(4)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn outside_points_are_rejected() {
        let disk = DomainModel::disk(1.0).unwrap();
        assert!(matches!(disk.potential(&Point::real(&[1.0])), Err(Error::OutsideDomain { .. })));
        assert!(matches!(disk.potential(&Point::real(&[0.1, 0.1])), Err(Error::DimensionMismatch(_))));
        let poly = DomainModel::polydisk(2, 1.0).unwrap();
        assert!(poly.potential(&Point::real(&[0.9, 0.9])).is_ok());
        let ball = DomainModel::ball(2, 1.0).unwrap();
        assert!(ball.potential(&Point::real(&[0.9, 0.9])).is_err());
        let t = DomainModel::type_one(2, 2, 1.0).unwrap();
        assert!(t.potential(&Point::real(&[0.6, 0.6, 0.6, 0.6])).is_err());
        assert!(DomainModel::disk(0.0).is_err());
    }

    #[test]
    fn model_parsing() {
        assert_eq!("disk".parse::<ModelKind>().unwrap(), ModelKind::Disk);
        assert_eq!("ball:3".parse::<ModelKind>().unwrap(), ModelKind::Ball(3));
        assert_eq!("I:2,3".parse::<ModelKind>().unwrap(), ModelKind::TypeI { p: 2, q: 3 });
        assert_eq!("typeI:1,2".parse::<ModelKind>().unwrap(), ModelKind::TypeI { p: 1, q: 2 });
        assert!("ball:0".parse::<ModelKind>().is_err());
        assert!("IV:5".parse::<ModelKind>().is_err());
    }

    #[test]
    fn entropy_and_bergman_scale() {
        assert_eq!(DomainModel::disk(1.0).unwrap().entropy_closed_form(), 1.0);
        assert_eq!(DomainModel::ball(2, 1.0).unwrap().entropy_closed_form(), 2.0);
        let b = DomainModel::bergman(ModelKind::TypeI { p: 2, q: 3 }).unwrap();
        assert_eq!(b.scale, 5.0);
        assert_relative_eq!(b.entropy_closed_form(), 0.8);
    }
}
