//! Irreducible bounded symmetric domains and their invariants.
//!
//! Each family is described by its rank `r`, the root multiplicities `a` and
//! `b`, the complex dimension and the genus `γ = (r − 1)a + b + 2`. All
//! arithmetic here is exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, Rational};
use crate::homog::RootConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::I, Family::II, Family::III, Family::IV, Family::V, Family::VI];

    pub fn name(self) -> &'static str {
        match self {
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
            Family::IV => "IV",
            Family::V => "V",
            Family::VI => "VI",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" => Ok(Family::I),
            "II" => Ok(Family::II),
            "III" => Ok(Family::III),
            "IV" => Ok(Family::IV),
            "V" => Ok(Family::V),
            "VI" => Ok(Family::VI),
            other => Err(Error::Parse(format!("unknown domain family {other:?}"))),
        }
    }
}

/// Discrete data of an irreducible bounded symmetric domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomainDescriptor {
    pub family: Family,
    pub params: Vec<u64>,
    pub rank: u64,
    pub a: u64,
    pub b: u64,
    pub dim: u64,
    pub genus: u64,
}

impl DomainDescriptor {
    /// `(r − 1)a + b + 2`, the genus recomputed from the root data.
    pub fn genus_from_roots(&self) -> u64 {
        (self.rank - 1) * self.a + self.b + 2
    }

    /// `r + r(r − 1)a/2 + rb`, the dimension recomputed from the root data.
    pub fn dim_from_roots(&self) -> u64 {
        self.rank + self.rank * (self.rank - 1) * self.a / 2 + self.rank * self.b
    }

    fn checked(self) -> Result<Self> {
        if self.rank == 0 || self.dim < self.rank {
            return Err(Error::InvalidParameter(format!(
                "descriptor {self:?} violates rank >= 1, dim >= rank"
            )));
        }
        if self.genus != self.genus_from_roots() {
            return Err(Error::InvalidParameter(format!(
                "descriptor {self:?} violates genus = (rank-1)a + b + 2"
            )));
        }
        Ok(self)
    }

    /// Short spec string, e.g. `I:2,3`.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            self.family.to_string()
        } else {
            let p: Vec<String> = self.params.iter().map(u64::to_string).collect();
            format!("{}:{}", self.family, p.join(","))
        }
    }
}

fn expect_params(family: Family, params: &[u64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::InvalidParameter(format!(
            "family {family} takes {n} parameter(s), got {}",
            params.len()
        )));
    }
    Ok(())
}

/// Looks up the invariants of the domain of the given family and parameters.
pub fn lookup_domain(family: Family, params: &[u64]) -> Result<DomainDescriptor> {
    let d = match family {
        Family::I => {
            expect_params(family, params, 2)?;
            let (p, q) = (params[0], params[1]);
            if p < 1 || p > q {
                return Err(Error::InvalidParameter(format!(
                    "family I requires 1 <= p <= q, got p = {p}, q = {q}"
                )));
            }
            DomainDescriptor { family, params: vec![p, q], rank: p, a: 2, b: q - p, dim: p * q, genus: p + q }
        }
        Family::II => {
            expect_params(family, params, 1)?;
            let n = params[0];
            if n < 2 {
                return Err(Error::InvalidParameter(format!("family II requires n >= 2, got n = {n}")));
            }
            let b = if n.is_multiple_of(2) { 0 } else { 2 };
            DomainDescriptor { family, params: vec![n], rank: n / 2, a: 4, b, dim: n * (n - 1) / 2, genus: 2 * n - 2 }
        }
        Family::III => {
            expect_params(family, params, 1)?;
            let n = params[0];
            if n < 1 {
                return Err(Error::InvalidParameter("family III requires n >= 1, got n = 0".into()));
            }
            DomainDescriptor { family, params: vec![n], rank: n, a: 1, b: 0, dim: n * (n + 1) / 2, genus: n + 1 }
        }
        Family::IV => {
            expect_params(family, params, 1)?;
            let n = params[0];
            if n < 3 {
                return Err(Error::InvalidParameter(format!("family IV requires n >= 3, got n = {n}")));
            }
            DomainDescriptor { family, params: vec![n], rank: 2, a: n - 2, b: 0, dim: n, genus: n }
        }
        Family::V => {
            expect_params(family, params, 0)?;
            DomainDescriptor { family, params: vec![], rank: 2, a: 6, b: 4, dim: 16, genus: 12 }
        }
        Family::VI => {
            expect_params(family, params, 0)?;
            DomainDescriptor { family, params: vec![], rank: 3, a: 8, b: 0, dim: 27, genus: 18 }
        }
    };
    d.checked()
}

/// Parses `I:2,3`, `IV:5`, `VI`, and the aliases `disk` (= `I:1,1`) and
/// `ball:n` (= `I:1,n`).
pub fn parse_domain(spec: &str) -> Result<DomainDescriptor> {
    let spec = spec.trim();
    let (head, tail) = spec.split_once(':').unwrap_or((spec, ""));
    let params: Vec<u64> = if tail.trim().is_empty() {
        Vec::new()
    } else {
        tail.split(',')
            .map(|p| p.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad parameter {p:?} in {spec:?}"))))
            .collect::<Result<_>>()?
    };
    match head.to_ascii_lowercase().as_str() {
        "disk" if params.is_empty() => lookup_domain(Family::I, &[1, 1]),
        "ball" if params.len() == 1 => lookup_domain(Family::I, &[1, params[0]]),
        _ => lookup_domain(head.parse()?, &params),
    }
}

/// `p_k = (k−1)a`, `q_k = (r−k)a`, `b_k = b`, `γ_k = γ` for `k = 1..r`.
pub fn symmetric_root_constants(d: &DomainDescriptor) -> RootConstants {
    let r = d.rank as i64;
    let a = d.a as i64;
    let ks = 1..=r;
    RootConstants {
        rank: d.rank as usize,
        p: ks.clone().map(|k| int((k - 1) * a)).collect(),
        q: ks.clone().map(|k| int((r - k) * a)).collect(),
        b: ks.clone().map(|_| int(d.b as i64)).collect(),
        gamma: ks.map(|_| int(d.genus as i64)).collect(),
    }
}

/// `(γ − 1)/γ`, the entropy of the Bergman metric.
pub fn entropy_symmetric(d: &DomainDescriptor) -> Rational {
    let g = d.genus as i64;
    Rational::new((g - 1).into(), g.into())
}

/// Every catalog entry in a parameter sweep, in stable order: family, then
/// parameters lexicographically.
pub fn sweep(max_param: u64) -> Vec<DomainDescriptor> {
    let mut out = Vec::new();
    for p in 1..=max_param {
        for q in p..=max_param {
            out.push(lookup_domain(Family::I, &[p, q]).expect("valid family I parameters"));
        }
    }
    for n in 2..=max_param {
        out.push(lookup_domain(Family::II, &[n]).expect("valid family II parameters"));
    }
    for n in 1..=max_param {
        out.push(lookup_domain(Family::III, &[n]).expect("valid family III parameters"));
    }
    for n in 3..=max_param {
        out.push(lookup_domain(Family::IV, &[n]).expect("valid family IV parameters"));
    }
    out.push(lookup_domain(Family::V, &[]).expect("family V"));
    out.push(lookup_domain(Family::VI, &[]).expect("family VI"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::homog::entropy_homogeneous;

    fn tuple(d: &DomainDescriptor) -> (u64, u64, u64, u64, u64) {
        (d.rank, d.a, d.b, d.dim, d.genus)
    }

    #[test]
    fn lookup_examples() {
        assert_eq!(tuple(&lookup_domain(Family::I, &[1, 1]).unwrap()), (1, 2, 0, 1, 2));
        assert_eq!(tuple(&lookup_domain(Family::I, &[2, 3]).unwrap()), (2, 2, 1, 6, 5));
        assert_eq!(tuple(&lookup_domain(Family::IV, &[5]).unwrap()), (2, 3, 0, 5, 5));
        assert_eq!(tuple(&lookup_domain(Family::VI, &[]).unwrap()), (3, 8, 0, 27, 18));
        assert_eq!(tuple(&lookup_domain(Family::V, &[]).unwrap()), (2, 6, 4, 16, 12));
        assert_eq!(tuple(&lookup_domain(Family::II, &[5]).unwrap()), (2, 4, 2, 10, 8));
        assert_eq!(tuple(&lookup_domain(Family::III, &[2]).unwrap()), (2, 1, 0, 3, 3));
    }

    #[test]
    fn invalid_parameters_name_the_constraint() {
        let e = lookup_domain(Family::I, &[3, 2]).unwrap_err();
        assert!(e.to_string().contains("p <= q"), "{e}");
        assert!(lookup_domain(Family::I, &[0, 2]).is_err());
        assert!(lookup_domain(Family::II, &[1]).unwrap_err().to_string().contains("n >= 2"));
        assert!(lookup_domain(Family::III, &[0]).is_err());
        assert!(lookup_domain(Family::IV, &[2]).unwrap_err().to_string().contains("n >= 3"));
        assert!(lookup_domain(Family::V, &[1]).is_err());
        assert!(lookup_domain(Family::I, &[2]).is_err());
    }

    #[test]
    fn parse_aliases() {
        assert_eq!(parse_domain("disk").unwrap(), lookup_domain(Family::I, &[1, 1]).unwrap());
        assert_eq!(parse_domain("ball:3").unwrap(), lookup_domain(Family::I, &[1, 3]).unwrap());
        assert_eq!(parse_domain("iv:5").unwrap().genus, 5);
        assert_eq!(parse_domain("VI").unwrap().dim, 27);
        assert!(parse_domain("VII").is_err());
        assert!(parse_domain("I:x,2").is_err());
    }

    #[test]
    fn symmetric_constants_examples() {
        let disk = symmetric_root_constants(&parse_domain("disk").unwrap());
        assert_eq!((disk.p.clone(), disk.q.clone(), disk.b.clone(), disk.gamma.clone()),
                   (vec![int(0)], vec![int(0)], vec![int(0)], vec![int(2)]));
        let c = symmetric_root_constants(&parse_domain("I:2,3").unwrap());
        assert_eq!(c.p, vec![int(0), int(2)]);
        assert_eq!(c.q, vec![int(2), int(0)]);
        assert_eq!(c.b, vec![int(1), int(1)]);
        assert_eq!(c.gamma, vec![int(5), int(5)]);
        let c = symmetric_root_constants(&parse_domain("III:2").unwrap());
        assert_eq!(c.p, vec![int(0), int(1)]);
        assert_eq!(c.q, vec![int(1), int(0)]);
        assert_eq!(c.b, vec![int(0), int(0)]);
        assert_eq!(c.gamma, vec![int(3), int(3)]);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_symmetric(&parse_domain("disk").unwrap()), ratio(1, 2));
        assert_eq!(entropy_symmetric(&parse_domain("I:2,3").unwrap()), ratio(4, 5));
        assert_eq!(entropy_symmetric(&parse_domain("VI").unwrap()), ratio(17, 18));
    }

    #[test]
    fn sweep_identities() {
        for d in sweep(10) {
            assert_eq!(d.genus, d.genus_from_roots(), "{}", d.label());
            assert_eq!(d.dim, d.dim_from_roots(), "{}", d.label());
            assert_eq!(entropy_symmetric(&d), entropy_homogeneous(&symmetric_root_constants(&d)), "{}", d.label());
            match d.family {
                Family::I => assert_eq!(d.genus, d.params[0] + d.params[1]),
                Family::IV => assert_eq!(d.genus, d.params[0]),
                _ => {}
            }
        }
    }

    #[test]
    fn symmetric_maximum_at_last_index() {
        for d in sweep(8) {
            let c = symmetric_root_constants(&d);
            let terms = c.terms();
            let last = terms.last().unwrap().clone();
            assert!(terms.iter().all(|t| *t <= last), "{}", d.label());
        }
    }

    #[test]
    fn json_uses_lowercase_fields() {
        let d = parse_domain("I:2,3").unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"family":"I","params":[2,3],"rank":2,"a":2,"b":1,"dim":6,"genus":5}"#);
        let back: DomainDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
