//! Exact entropy of homogeneous bounded domains from their
//! Piatetskii-Shapiro constants.
//!
//! For a homogeneous bounded domain of rank `r` with constants
//! `p_k, q_k, b_k, γ_k` the diastatic entropy is the constant
//!
//! ```text
//! Ent = max_k (1 + p_k + b_k + q_k/2) / γ_k
//! ```
//!
//! and `λ g` is balanced exactly when `λ` strictly exceeds that value.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, half, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootConstants {
    pub rank: usize,
    #[serde(with = "exact::serde_rational_vec")]
    pub p: Vec<Rational>,
    #[serde(with = "exact::serde_rational_vec")]
    pub q: Vec<Rational>,
    #[serde(with = "exact::serde_rational_vec")]
    pub b: Vec<Rational>,
    #[serde(with = "exact::serde_rational_vec")]
    pub gamma: Vec<Rational>,
}

impl RootConstants {
    pub fn new(p: Vec<Rational>, q: Vec<Rational>, b: Vec<Rational>, gamma: Vec<Rational>) -> Result<Self> {
        let c = RootConstants { rank: p.len(), p, q, b, gamma };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidParameter("rank must be at least 1".into()));
        }
        for (name, v) in [("p", &self.p), ("q", &self.q), ("b", &self.b), ("gamma", &self.gamma)] {
            if v.len() != self.rank {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has length {} but rank is {}",
                    v.len(),
                    self.rank
                )));
            }
        }
        for (name, v) in [("p", &self.p), ("q", &self.q), ("b", &self.b)] {
            if let Some(k) = v.iter().position(Signed::is_negative) {
                return Err(Error::InvalidParameter(format!("{name}_{} is negative", k + 1)));
            }
        }
        if let Some(k) = self.gamma.iter().position(|g| !g.is_positive()) {
            return Err(Error::NonPositiveGamma { index: k + 1 });
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: RootConstants = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("root constants serialize")
    }

    /// The quotients `(1 + p_k + b_k + q_k/2)/γ_k`, `k = 1..r`.
    pub fn terms(&self) -> Vec<Rational> {
        (0..self.rank)
            .map(|k| {
                (Rational::one() + &self.p[k] + &self.b[k] + &self.q[k] * half()) / &self.gamma[k]
            })
            .collect()
    }
}

/// Builds the constants from root-space dimensions.
///
/// `dims_upper[i][l]` (for `i < l`, zero-based) is `dim s_{(α_l − α_i)/2}`;
/// entries on or below the diagonal are ignored. `dims_half[k]` is
/// `dim s_{α_k/2}`.
pub fn constants_from_root_dims(
    rank: usize,
    dims_upper: &[Vec<u64>],
    dims_half: &[u64],
    gamma: &[Rational],
) -> Result<RootConstants> {
    if rank == 0 {
        return Err(Error::InvalidParameter("rank must be at least 1".into()));
    }
    if gamma.len() != rank || dims_half.len() != rank {
        return Err(Error::DimensionMismatch(format!(
            "rank {rank} but {} gamma values and {} half-root dimensions",
            gamma.len(),
            dims_half.len()
        )));
    }
    let upper = |i: usize, l: usize| -> Result<u64> {
        dims_upper
            .get(i)
            .and_then(|row| row.get(l))
            .copied()
            .ok_or_else(|| Error::DimensionMismatch(format!("dims_upper has no entry ({}, {})", i + 1, l + 1)))
    };
    if rank > 1 && dims_upper.len() < rank - 1 {
        return Err(Error::DimensionMismatch(format!(
            "dims_upper needs {} rows for rank {rank}",
            rank - 1
        )));
    }
    let mut p = Vec::with_capacity(rank);
    let mut q = Vec::with_capacity(rank);
    for k in 0..rank {
        let pk: u64 = (0..k).map(|i| upper(i, k)).sum::<Result<u64>>()?;
        let qk: u64 = (k + 1..rank).map(|l| upper(k, l)).sum::<Result<u64>>()?;
        p.push(exact::int(pk as i64));
        q.push(exact::int(qk as i64));
    }
    let b = dims_half.iter().map(|&d| exact::ratio(d as i64, 2)).collect();
    RootConstants::new(p, q, b, gamma.to_vec())
}

pub fn entropy_homogeneous(c: &RootConstants) -> Rational {
    c.terms().into_iter().max().expect("rank >= 1")
}

/// λg is balanced iff λ is strictly above this value.
pub fn balanced_threshold(c: &RootConstants) -> Rational {
    entropy_homogeneous(c)
}

pub fn is_balanced_at(c: &RootConstants, lambda: &Rational) -> bool {
    *lambda > balanced_threshold(c)
}

/// Replaces `γ_k` by the Bergman-metric values `2 + p_k + q_k + b_k`.
pub fn bergman_gamma(c: &RootConstants) -> RootConstants {
    let two = exact::int(2);
    let gamma = (0..c.rank).map(|k| &two + &c.p[k] + &c.q[k] + &c.b[k]).collect();
    RootConstants { gamma, ..c.clone() }
}

/// Entropy of `(Ω, λg)` given the entropy of `(Ω, g)`.
pub fn entropy_scaled(ent: &Rational, lambda: &Rational) -> Result<Rational> {
    if !lambda.is_positive() {
        return Err(Error::NonPositiveScale(exact::format_rational(lambda)));
    }
    if ent.is_zero() || ent.is_negative() {
        return Err(Error::InvalidParameter("entropy must be positive".into()));
    }
    Ok(ent / lambda)
}
