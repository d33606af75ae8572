//! Numerical diastatic entropy: the infimum of the `c` for which
//! `∫_Ω e^{−c D_{z0}} ωⁿ/n!` is finite, located by shell exhaustion and
//! bisection.
//!
//! At the threshold itself the integral diverges logarithmically, so the
//! infimum is not attained; estimates are open brackets `(lower, upper)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConeRule, DomainModel, ModelKind};
use crate::point::Point;
use crate::quadrature::pairwise_sum;
use crate::shells::{self, ShellReport, ShellSchedule, Verdict};

const MAX_SEED_STEPS: usize = 20;
const MAX_BISECTIONS: usize = 80;
const ANGULAR_NODES: usize = 64;
const BALL_ANGULAR_NODES: usize = 24;
const POLAR_NODES: usize = 12;
const QMC_SAMPLES: u64 = 1 << 12;

/// One classification of the integral at exponent `c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub c: f64,
    pub verdict: Verdict,
    pub ratios: Vec<f64>,
    #[serde(skip)]
    pub shells: ShellReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    pub lower: f64,
    pub upper: f64,
    pub z0: Point,
    /// Probes in the order they were made.
    pub probes: Vec<Probe>,
    /// Range of exponents that classified inconclusive, if any.
    pub inconclusive: Option<(f64, f64)>,
}

impl EntropyEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powi(n as i32) / (1..n).map(|k| k as f64).product::<f64>()
}

/// Radial profile at the origin of the disk or ball:
/// `|S^{2n−1}| μⁿ t^{2n−1} (1 − t²)^{cμ − (n+1)}`.
pub fn radial_report(model: &DomainModel, c: f64, schedule: &ShellSchedule) -> Result<ShellReport> {
    let n = match model.kind {
        ModelKind::Disk => 1,
        ModelKind::Ball(n) => n,
        other => return Err(Error::Unsupported(format!("radial entropy profile for {other}"))),
    };
    let s = model.boundary_exponent(c);
    let k = sphere_area(n) * model.scale.powi(n as i32);
    shells::exhaust(schedule, |t| k * t.powi(2 * n as i32 - 1) * (1.0 - t * t).powf(s))
}

/// Profile `t^{2d−1} Σ_W w e^{−c D(z0, tW)} vol(tW)` over a cone rule.
pub fn cone_report(model: &DomainModel, z0: &Point, c: f64, rule: &ConeRule, schedule: &ShellSchedule) -> Result<ShellReport> {
    model.check(z0)?;
    let rules = schedule.shell_rules();
    let d = rule.real_dim as i32;
    let at_origin = z0.is_origin();
    let values: Vec<Vec<f64>> = rules
        .iter()
        .map(|r| {
            r.nodes
                .par_iter()
                .map(|&t| {
                    let terms: Vec<f64> = rule
                        .directions
                        .iter()
                        .map(|w| {
                            if at_origin {
                                return Ok(w.weight * w.weight_along(model, c, t));
                            }
                            let z = w.point.scaled(t);
                            let dz = model.diastasis(z0, &z)?;
                            Ok(w.weight * (-c * dz).exp() * model.volume_density_unchecked(&z))
                        })
                        .collect::<Result<_>>()?;
                    Ok(t.powi(d - 1) * pairwise_sum(&terms))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    shells::from_samples(schedule, &rules, &values)
}

fn default_rule(model: &DomainModel) -> Result<ConeRule> {
    match model.kind {
        ModelKind::Disk => ConeRule::product(model, ANGULAR_NODES, 1),
        ModelKind::Ball(_) => ConeRule::product(model, BALL_ANGULAR_NODES, POLAR_NODES),
        _ => ConeRule::for_model(model, ANGULAR_NODES, POLAR_NODES, QMC_SAMPLES),
    }
}

/// Shell report at exponent `c`: the radial profile when `z0` is the origin
/// of a disk or ball, the cone quadrature otherwise. Polydisks factor into
/// disks; the report of the deciding factor is returned.
pub fn shell_report(model: &DomainModel, z0: &Point, c: f64, schedule: &ShellSchedule) -> Result<ShellReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent must be positive, got {c}")));
    }
    model.check(z0)?;
    match model.kind {
        ModelKind::Disk | ModelKind::Ball(_) if z0.is_origin() => radial_report(model, c, schedule),
        ModelKind::Polydisk(_) => {
            let disk = DomainModel::disk(model.scale)?;
            let reports: Vec<ShellReport> =
                z0.0.iter().map(|&zj| shell_report(&disk, &Point(vec![zj]), c, schedule)).collect::<Result<_>>()?;
            let pick = |v: Verdict| reports.iter().find(|r| r.verdict == v).cloned();
            Ok(pick(Verdict::Divergent).or_else(|| pick(Verdict::Inconclusive)).unwrap_or_else(|| reports[0].clone()))
        }
        _ => cone_report(model, z0, c, &default_rule(model)?, schedule),
    }
}

pub fn classify_convergence(model: &DomainModel, z0: &Point, c: f64, schedule: &ShellSchedule) -> Result<Verdict> {
    Ok(shell_report(model, z0, c, schedule)?.verdict)
}

/// Bisection with the default narrow classification band.
pub fn estimate_entropy(model: &DomainModel, z0: &Point, tol: f64) -> Result<EntropyEstimate> {
    estimate_entropy_with(model, z0, tol, &ShellSchedule::for_bisection())
}

struct Search<'a> {
    model: &'a DomainModel,
    z0: &'a Point,
    schedule: &'a ShellSchedule,
    probes: Vec<Probe>,
}

impl Search<'_> {
    fn probe(&mut self, c: f64) -> Result<Verdict> {
        let shells = shell_report(self.model, self.z0, c, self.schedule)?;
        let verdict = shells.verdict;
        self.probes.push(Probe { c, verdict, ratios: shells.ratios.clone(), shells });
        Ok(verdict)
    }
}

pub fn estimate_entropy_with(model: &DomainModel, z0: &Point, tol: f64, schedule: &ShellSchedule) -> Result<EntropyEstimate> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    schedule.validate()?;
    model.check(z0)?;
    let mut s = Search { model, z0, schedule, probes: Vec::new() };
    let mut band: Option<(f64, f64)> = None;
    let widen = |band: &mut Option<(f64, f64)>, c: f64| {
        *band = Some(band.map_or((c, c), |(a, b)| (a.min(c), b.max(c))));
    };

    let first = s.probe(1.0)?;
    if first == Verdict::Inconclusive {
        widen(&mut band, 1.0);
    }
    let mut hi = if first == Verdict::Convergent { Some(1.0) } else { None };
    let mut lo = if first == Verdict::Divergent { Some(1.0) } else { None };
    let mut c = 1.0;
    let mut steps = 0;
    while hi.is_none() {
        steps += 1;
        c *= 2.0;
        if steps > MAX_SEED_STEPS {
            return Err(Error::NoBracket(format!("no convergent exponent up to c = {c}")));
        }
        match s.probe(c)? {
            Verdict::Convergent => hi = Some(c),
            Verdict::Divergent => lo = Some(c),
            Verdict::Inconclusive => widen(&mut band, c),
        }
    }
    let mut c = 1.0;
    let mut steps = 0;
    while lo.is_none() {
        steps += 1;
        c *= 0.5;
        if steps > MAX_SEED_STEPS {
            return Err(Error::NoBracket(format!("no divergent exponent down to c = {c}")));
        }
        match s.probe(c)? {
            Verdict::Divergent => lo = Some(c),
            Verdict::Convergent => hi = Some(c),
            Verdict::Inconclusive => widen(&mut band, c),
        }
    }
    let (mut lo, mut hi) = (lo.unwrap(), hi.unwrap());

    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let c = match band {
            None => 0.5 * (lo + hi),
            Some((a, b)) => {
                let (left, right) = (a - lo, hi - b);
                if left.max(right) <= 0.25 * tol {
                    break;
                }
                if left >= right {
                    0.5 * (lo + a)
                } else {
                    0.5 * (b + hi)
                }
            }
        };
        match s.probe(c)? {
            Verdict::Convergent => hi = c,
            Verdict::Divergent => lo = c,
            Verdict::Inconclusive => widen(&mut band, c),
        }
        band = band.and_then(|(a, b)| {
            let (a, b) = (a.max(lo), b.min(hi));
            (a <= b).then_some((a, b))
        });
    }

    let probes = s.probes;
    for p in probes.iter().filter(|p| p.verdict == Verdict::Convergent) {
        if let Some(q) = probes.iter().find(|q| q.verdict == Verdict::Divergent && q.c > p.c) {
            return Err(Error::Quadrature(format!(
                "verdicts are not monotone: convergent at {} but divergent at {}",
                p.c, q.c
            )));
        }
    }
    Ok(EntropyEstimate { lower: lo, upper: hi, z0: z0.clone(), probes, inconclusive: band })
}
