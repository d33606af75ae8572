//! Shell exhaustion: integrals of a radial profile over the dyadic shells
//! `ρ_j = 1 − 2^{−j}` and a convergence verdict from their decay ratios.
//!
//! For profiles behaving like `(1 − t)^s` the shell integrals decay with
//! ratio `2^{−(s+1)}`, so ratios below 1 mean an integrable boundary
//! singularity and ratios above 1 a divergent one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, pairwise_sum, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellSchedule {
    pub j_min: u32,
    pub j_max: u32,
    pub nodes_per_shell: usize,
    /// Number of trailing ratios that must agree.
    pub tail: usize,
    pub converge_below: f64,
    pub diverge_above: f64,
}

impl Default for ShellSchedule {
    fn default() -> Self {
        ShellSchedule { j_min: 4, j_max: 14, nodes_per_shell: 16, tail: 3, converge_below: 0.95, diverge_above: 1.05 }
    }
}

impl ShellSchedule {
    /// Narrow band used when bisecting for a threshold: the inconclusive
    /// window in `c` shrinks from about `±0.074/μ` to `±0.015/μ`.
    pub fn for_bisection() -> Self {
        ShellSchedule { converge_below: 0.99, diverge_above: 1.01, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.j_max < self.j_min + 2 || self.tail == 0 || self.tail as u32 > self.j_max - self.j_min - 1 {
            return Err(Error::InvalidParameter(format!("shell schedule {self:?} yields too few ratios")));
        }
        if self.j_max > 50 {
            return Err(Error::InvalidParameter("shells beyond j = 50 are below double precision".into()));
        }
        if !(self.converge_below < 1.0 && self.diverge_above > 1.0) {
            return Err(Error::InvalidParameter("ratio thresholds must straddle 1".into()));
        }
        Ok(())
    }

    pub fn radius(j: u32) -> f64 {
        1.0 - 0.5f64.powi(j as i32)
    }

    pub fn radii(&self) -> Vec<f64> {
        (self.j_min..=self.j_max).map(Self::radius).collect()
    }

    /// Sample nodes `t` and weights for every shell, in the variable
    /// `u = −log₂(1 − t)` where the shells have unit width.
    pub fn shell_rules(&self) -> Vec<Rule> {
        let base = gauss_legendre(self.nodes_per_shell);
        let ln2 = std::f64::consts::LN_2;
        (self.j_min..self.j_max)
            .map(|j| {
                let r = base.mapped(j as f64, j as f64 + 1.0);
                let nodes: Vec<f64> = r.nodes.iter().map(|u| 1.0 - 0.5f64.powf(*u)).collect();
                let weights = r.weights.iter().zip(&r.nodes).map(|(w, u)| w * ln2 * 0.5f64.powf(*u)).collect();
                Rule { nodes, weights }
            })
            .collect()
    }

    pub fn classify(&self, ratios: &[f64]) -> Verdict {
        let tail = &ratios[ratios.len().saturating_sub(self.tail)..];
        if tail.iter().all(|&r| r <= self.converge_below) {
            Verdict::Convergent
        } else if tail.iter().all(|&r| r >= self.diverge_above) {
            Verdict::Divergent
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellReport {
    /// Shell boundaries `ρ_{j_min} … ρ_{j_max}`.
    pub radii: Vec<f64>,
    pub integrals: Vec<f64>,
    pub ratios: Vec<f64>,
    pub verdict: Verdict,
}

/// Integrates `profile` over every shell and classifies the tail.
pub fn exhaust(schedule: &ShellSchedule, profile: impl Fn(f64) -> f64) -> Result<ShellReport> {
    let rules = schedule.shell_rules();
    let values: Vec<Vec<f64>> = rules.iter().map(|r| r.nodes.iter().map(|&t| profile(t)).collect()).collect();
    from_samples(schedule, &rules, &values)
}

/// Like [`exhaust`] for a profile evaluated in bulk: `values[shell][node]`
/// must correspond to [`ShellSchedule::shell_rules`].
pub fn from_samples(schedule: &ShellSchedule, rules: &[Rule], values: &[Vec<f64>]) -> Result<ShellReport> {
    schedule.validate()?;
    let integrals: Vec<f64> = rules
        .iter()
        .zip(values)
        .map(|(r, v)| pairwise_sum(&r.weights.iter().zip(v).map(|(w, f)| w * f).collect::<Vec<_>>()))
        .collect();
    if let Some(bad) = integrals.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::Quadrature(format!("shell integral {bad} is not finite and positive")));
    }
    let ratios: Vec<f64> = integrals.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(ShellReport { radii: schedule.radii(), verdict: schedule.classify(&ratios), integrals, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_ratios() {
        let sched = ShellSchedule::default();
        for (s, verdict) in [(0.0, Verdict::Convergent), (-0.5, Verdict::Convergent), (-1.0, Verdict::Inconclusive), (-1.5, Verdict::Divergent)] {
            let rep = exhaust(&sched, |t| (1.0 - t).powf(s)).unwrap();
            let expected = 2f64.powf(-(s + 1.0));
            for r in &rep.ratios {
                assert!((r - expected).abs() < 1e-12, "s={s}: {r} vs {expected}");
            }
            assert_eq!(rep.verdict, verdict, "s={s}");
            assert_eq!(rep.integrals.len(), 10);
            assert_eq!(rep.ratios.len(), 9);
        }
    }

    #[test]
    fn shell_integrals_match_antiderivative() {
        let sched = ShellSchedule::default();
        let rep = exhaust(&sched, |t| (1.0 - t).powf(-0.3)).unwrap();
        for (k, j) in (sched.j_min..sched.j_max).enumerate() {
            let (a, b) = (ShellSchedule::radius(j), ShellSchedule::radius(j + 1));
            let exact = ((1.0 - a).powf(0.7) - (1.0 - b).powf(0.7)) / 0.7;
            assert!((rep.integrals[k] / exact - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn bisection_band_is_narrower() {
        let wide = ShellSchedule::default();
        let narrow = ShellSchedule::for_bisection();
        let ratios = vec![0.97; 9];
        assert_eq!(wide.classify(&ratios), Verdict::Inconclusive);
        assert_eq!(narrow.classify(&ratios), Verdict::Convergent);
    }

    #[test]
    fn bad_schedules_and_profiles() {
        let sched = ShellSchedule { j_min: 4, j_max: 5, ..ShellSchedule::default() };
        assert!(exhaust(&sched, |_| 1.0).is_err());
        assert!(matches!(exhaust(&ShellSchedule::default(), |_| f64::NAN), Err(Error::Quadrature(_))));
    }
}
