use crate::error::{QmlError, Result};
use num_rational::Rational64;
use std::fmt;
use std::str::FromStr;

/// Lebesgue exponent `p` in `[2, inf]`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lebesgue {
    Finite(Rational64),
    Infinity,
}

impl Lebesgue {
    pub fn int(p: i64) -> Self {
        Lebesgue::Finite(Rational64::from_integer(p))
    }

    /// `1 / p`, zero at infinity.
    pub fn recip(&self) -> Rational64 {
        match self {
            Lebesgue::Finite(p) => p.recip(),
            Lebesgue::Infinity => Rational64::from_integer(0),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Lebesgue::Finite(p) => *p.numer() as f64 / *p.denom() as f64,
            Lebesgue::Infinity => f64::INFINITY,
        }
    }

    fn require(&self, min: i64) -> Result<()> {
        match self {
            Lebesgue::Finite(p) if *p < Rational64::from_integer(min) => {
                Err(QmlError::Domain(format!("p must be at least {min}, got {self}")))
            }
            _ => Ok(()),
        }
    }

    fn at_least_six(&self) -> bool {
        match self {
            Lebesgue::Finite(p) => *p >= Rational64::from_integer(6),
            Lebesgue::Infinity => true,
        }
    }
}

impl fmt::Display for Lebesgue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lebesgue::Finite(p) => write!(f, "{p}"),
            Lebesgue::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Lebesgue {
    type Err = QmlError;

    /// `inf`, an integer, or a fraction `a/b`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞") {
            return Ok(Lebesgue::Infinity);
        }
        let bad = || QmlError::Domain(format!("cannot read p = {s:?}"));
        let r = match s.split_once('/') {
            Some((a, b)) => {
                let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if b <= 0 {
                    return Err(bad());
                }
                Rational64::new(a, b)
            }
            None => Rational64::from_integer(s.parse().map_err(|_| bad())?),
        };
        let p = Lebesgue::Finite(r);
        p.require(2)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentQuery {
    pub p: Lebesgue,
    pub k: u32,
    pub j: u32,
}

impl ExponentQuery {
    pub fn new(p: Lebesgue, k: u32, j: u32) -> Result<Self> {
        p.require(2)?;
        if k < 1 {
            return Err(QmlError::Domain("contact order k must be at least 1".into()));
        }
        Ok(ExponentQuery { p, k, j })
    }
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// `(1/2 - 2/p) - (1/2 - 3/p) / (k + 1)`, the formula valid for `p >= 6`.
pub fn delta_high_branch(p: Lebesgue, k: u32) -> Rational64 {
    let q = p.recip();
    (r(1, 2) - q * 2) - (r(1, 2) - q * 3) / Rational64::from_integer(k as i64 + 1)
}

/// `1/4 - 1/(2p)`, the formula valid for `2 <= p <= 6`.
pub fn delta_low_branch(p: Lebesgue) -> Rational64 {
    r(1, 4) - p.recip() / 2
}

/// Growth exponent for joint quasimodes with contact order `k`.
pub fn delta_p_k(p: Lebesgue, k: u32) -> Result<Rational64> {
    let q = ExponentQuery::new(p, k, 0)?;
    Ok(if q.p.at_least_six() { delta_high_branch(q.p, k) } else { delta_low_branch(q.p) })
}

/// Spectral-cluster exponent: `1/2 - 2/p` for `p >= 6`, `1/4 - 1/(2p)` below.
pub fn sogge_delta(p: Lebesgue) -> Result<Rational64> {
    p.require(2)?;
    Ok(if p.at_least_six() { r(1, 2) - p.recip() * 2 } else { delta_low_branch(p) })
}

/// `j (1/2 - 3/p)` for `p >= 6`, zero below.
pub fn mu_p_j(p: Lebesgue, j: u32) -> Result<Rational64> {
    p.require(2)?;
    Ok(if p.at_least_six() { (r(1, 2) - p.recip() * 3) * Rational64::from_integer(j as i64) } else { r(0, 1) })
}

/// Growth exponent of `||T_{alpha_k}||_p`, `alpha_k = 1/(k+1)`, for `p >= 6`.
pub fn t_alpha_lower_exponent(p: Lebesgue, k: u32) -> Result<Rational64> {
    p.require(6)?;
    if k < 1 {
        return Err(QmlError::Domain("contact order k must be at least 1".into()));
    }
    let q = p.recip();
    let kk = Rational64::from_integer(k as i64 + 1);
    Ok(r(1, 2) - q * 2 - (r(1, 2) - q * 3) / kk)
}

/// `alpha_k = 1/(k+1)`.
pub fn alpha_k(k: u32) -> Rational64 {
    r(1, k as i64 + 1)
}

pub fn to_f64(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}
