//! Points of `ℂⁿ` and the `a+bi` literal syntax used on the command line.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// A point of `ℂⁿ`. Matrix points (type I models) are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<C64>);

impl Point {
    pub fn origin(dim: usize) -> Self {
        Point(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn real(xs: &[f64]) -> Self {
        Point(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, t: f64) -> Point {
        Point(self.0.iter().map(|z| z * t).collect())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|z| z.norm_sqr() == 0.0)
    }

    /// Hermitian product `Σ z_j w̄_j`.
    pub fn dot_conj(&self, w: &Point) -> C64 {
        self.0.iter().zip(&w.0).map(|(a, b)| a * b.conj()).sum()
    }
}

impl From<C64> for Point {
    fn from(z: C64) -> Self {
        Point(vec![z])
    }
}

/// Parses `1.5`, `-2i`, `0.3+0.4i`, `1e-3-2i`, `i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("not a complex literal: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let num = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    if let Some(body) = s.strip_suffix(['i', 'j']) {
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => Ok(C64::new(body[..k].parse::<f64>().map_err(|_| bad())?, num(&body[k..])?)),
            None => Ok(C64::new(0.0, num(body)?)),
        }
    } else {
        Ok(C64::new(s.parse::<f64>().map_err(|_| bad())?, 0.0))
    }
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

impl FromStr for Point {
    type Err = Error;

    /// Comma-separated complex literals, or a JSON array of numbers/strings.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('[') {
            let v: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
            let mut out = Vec::new();
            flatten_json(&v, &mut out)?;
            return Ok(Point(out));
        }
        s.split(',').map(parse_complex).collect::<Result<Vec<_>>>().map(Point)
    }
}

fn flatten_json(v: &serde_json::Value, out: &mut Vec<C64>) -> Result<()> {
    match v {
        serde_json::Value::Array(items) => items.iter().try_for_each(|x| flatten_json(x, out)),
        serde_json::Value::Number(n) => {
            out.push(C64::new(n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}")))?, 0.0));
            Ok(())
        }
        serde_json::Value::String(s) => {
            out.push(parse_complex(s)?);
            Ok(())
        }
        other => Err(Error::Parse(format!("unexpected JSON value {other}"))),
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|&z| format_complex(z)).collect();
        f.write_str(&parts.join(","))
    }
}
