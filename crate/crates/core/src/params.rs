//! Physical parameters shared by every module.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("omega must be finite and > 0 (got {0})")]
    Omega(f64),
    #[error("{name} must be finite and >= 0 (got {value})")]
    Barrier { name: &'static str, value: f64 },
    #[error("invalid rational {input:?}: {reason}")]
    Rational { input: String, reason: String },
}

/// A positive rational number p/q in lowest terms.
///
/// Parsed from "p/q", an integer, or a plain decimal string. Decimals are
/// converted digit by digit, so "1.4142135" becomes exactly
/// 14142135/10000000 reduced; `from_decimal` reports that a conversion
/// happened so callers can warn about it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Result<Self, ParamError> {
        if numer < 1 || denom < 1 {
            return Err(ParamError::Rational {
                input: format!("{numer}/{denom}"),
                reason: "numerator and denominator must be >= 1".into(),
            });
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    pub fn integer(n: i64) -> Result<Self, ParamError> {
        Self::new(n, 1)
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }

    /// Parses the input and reports whether it was a decimal that had to be
    /// converted to a fraction.
    pub fn parse_reporting(input: &str) -> Result<(Self, bool), ParamError> {
        let s = input.trim();
        let bad = |reason: &str| ParamError::Rational {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad("numerator is not an integer"))?;
            let q: i64 = q.trim().parse().map_err(|_| bad("denominator is not an integer"))?;
            return Self::new(p, q).map(|r| (r, false));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() && int.is_empty() {
                return Err(bad("empty number"));
            }
            if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad("decimal must contain only digits"));
            }
            if frac.len() > 17 {
                return Err(bad("too many decimal digits"));
            }
            let digits = format!("{int}{frac}");
            let numer: i64 = digits.parse().map_err(|_| bad("decimal out of range"))?;
            let denom = 10_i64.pow(frac.len() as u32);
            return Self::new(numer, denom).map(|r| (r, !frac.chars().all(|c| c == '0')));
        }
        let n: i64 = s.parse().map_err(|_| bad("expected p/q, an integer, or a decimal"))?;
        Self::new(n, 1).map(|r| (r, false))
    }
}

impl FromStr for Rational {
    type Err = ParamError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_reporting(s).map(|(r, _)| r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(n) => Rational::integer(n).map_err(serde::de::Error::custom),
        }
    }
}

/// ω, α, β and the rational angular index k of the potential
/// H = p_r² + p_θ²/r² + ω²r² + (αk²/sin²kθ + βk²/cos²kθ)/r² on the wedge
/// 0 ≤ θ ≤ π/(2k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PotentialParams {
    omega: f64,
    alpha: f64,
    beta: f64,
    k: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    omega: f64,
    alpha: f64,
    beta: f64,
    k: Rational,
}

impl TryFrom<RawParams> for PotentialParams {
    type Error = ParamError;
    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        PotentialParams::new(raw.omega, raw.alpha, raw.beta, raw.k)
    }
}

impl From<PotentialParams> for RawParams {
    fn from(p: PotentialParams) -> Self {
        RawParams {
            omega: p.omega,
            alpha: p.alpha,
            beta: p.beta,
            k: p.k,
        }
    }
}

impl PotentialParams {
    pub fn new(omega: f64, alpha: f64, beta: f64, k: Rational) -> Result<Self, ParamError> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(ParamError::Omega(omega));
        }
        for (name, value) in [("alpha", alpha), ("beta", beta)] {
            if !value.is_finite() || value < 0.0 {
                return Err(ParamError::Barrier { name, value });
            }
        }
        Ok(Self { omega, alpha, beta, k })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn k(&self) -> Rational {
        self.k
    }

    pub fn k_f64(&self) -> f64 {
        self.k.to_f64()
    }

    pub fn with_k(&self, k: Rational) -> Self {
        Self { k, ..*self }
    }

    /// Upper edge π/(2k) of the angular wedge.
    pub fn wedge(&self) -> f64 {
        PI / (2.0 * self.k_f64())
    }

    /// Pöschl–Teller exponents (p_φ, p_ψ) = (√(α+¼), √(β+¼)).
    pub fn exponents(&self) -> (f64, f64) {
        ((self.alpha + 0.25).sqrt(), (self.beta + 0.25).sqrt())
    }

    /// The exponents as exact rationals, when α+¼ and β+¼ are squares of
    /// rationals. The f64 inputs are read as the exact dyadic rationals
    /// they represent.
    pub fn exact_exponents(&self) -> Option<(BigRational, BigRational)> {
        Some((exact_sqrt_shifted(self.alpha)?, exact_sqrt_shifted(self.beta)?))
    }

    /// The angular potential k²(α/sin²kθ + β/cos²kθ). Terms with a zero
    /// coefficient are dropped so that unbarriered walls stay finite.
    pub fn angular_potential(&self, theta: f64) -> f64 {
        let k = self.k_f64();
        let (s, c) = (k * theta).sin_cos();
        let mut v = 0.0;
        if self.alpha != 0.0 {
            v += self.alpha / (s * s);
        }
        if self.beta != 0.0 {
            v += self.beta / (c * c);
        }
        k * k * v
    }

    /// dV/dθ of [`angular_potential`](Self::angular_potential).
    pub fn angular_potential_derivative(&self, theta: f64) -> f64 {
        let k = self.k_f64();
        let (s, c) = (k * theta).sin_cos();
        let mut dv = 0.0;
        if self.alpha != 0.0 {
            dv -= 2.0 * self.alpha * c / (s * s * s);
        }
        if self.beta != 0.0 {
            dv += 2.0 * self.beta * s / (c * c * c);
        }
        k * k * k * dv
    }

    /// Angle of the minimum of the angular potential, where
    /// tan²kθ = √(α/β). Returns the wedge midpoint when α = β = 0.
    pub fn angular_minimum(&self) -> f64 {
        let k = self.k_f64();
        match (self.alpha > 0.0, self.beta > 0.0) {
            (true, true) => (self.alpha / self.beta).sqrt().sqrt().atan() / k,
            _ => self.wedge() / 2.0,
        }
    }
}

fn exact_sqrt_shifted(x: f64) -> Option<BigRational> {
    let q = BigRational::from_float(x)? + BigRational::new(BigInt::one(), BigInt::from(4));
    if q.is_negative() {
        return None;
    }
    if q.is_zero() {
        return Some(q);
    }
    let (n, d) = (q.numer().clone(), q.denom().clone());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &rn * &rn == n && &rd * &rd == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

/// Radial node count and angular index of an eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub n_r: usize,
    pub l1: usize,
}

impl QuantumNumbers {
    pub fn new(n_r: usize, l1: usize) -> Self {
        Self { n_r, l1 }
    }

    /// 2l₁ + p_φ + p_ψ + 1, the square root of the angular eigenvalue of L².
    pub fn angular_index(&self, params: &PotentialParams) -> f64 {
        let (pp, ps) = params.exponents();
        2.0 * self.l1 as f64 + pp + ps + 1.0
    }

    /// k(2l₁ + p_φ + p_ψ + 1): the Laguerre parameter and radial exponent.
    pub fn radial_exponent(&self, params: &PotentialParams) -> f64 {
        params.k_f64() * self.angular_index(params)
    }
}
