//! Named formula variants, registered once and picked at runtime.
//!
//! Three places admit more than one reading: the spectrum formula, the sign
//! of the Jacobi argument in the angular factor, and the Gamma-function
//! denominator of the Bessel-product coefficients. Each family is a trait;
//! every variant is registered under a stable name and the oracle module
//! decides which one the defaults point at.

use crate::params::{PotentialParams, QuantumNumbers};
use crate::specfun::ln_gamma;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub trait Strategy: Send + Sync {
    fn name(&self) -> &'static str;
}

/// A closed set of strategies of one kind, looked up by name.
pub struct Registry<T: ?Sized + Strategy + 'static> {
    kind: &'static str,
    entries: Vec<Box<T>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown {kind} {name:?} (known: {known})")]
pub struct UnknownStrategy {
    pub kind: &'static str,
    pub name: String,
    pub known: String,
}

impl<T: ?Sized + Strategy + 'static> Registry<T> {
    pub fn new(kind: &'static str, entries: Vec<Box<T>>) -> Self {
        Self { kind, entries }
    }

    pub fn get(&'static self, name: &str) -> Result<&'static T, UnknownStrategy> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|b| &**b)
            .ok_or_else(|| UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&'static self) -> impl Iterator<Item = &'static T> {
        self.entries.iter().map(|b| &**b)
    }
}

// ---------------------------------------------------------------- spectrum

pub trait SpectrumFormula: Strategy {
    fn energy(&self, qn: QuantumNumbers, params: &PotentialParams) -> f64;

    /// The same energy in exact arithmetic, when the exponents are rational.
    /// ω enters as the exact binary fraction of its f64 value.
    fn exact_energy(&self, qn: QuantumNumbers, params: &PotentialParams) -> Option<BigRational>;
}

/// E = 2Λk + 2n_r with Λ = 2l₁ + p_φ + p_ψ + 1. No ω.
pub struct PaperEqE;

/// E = 2ω(2n_r + kΛ + 1), the separated radial-oscillator ladder.
pub struct Resolved;

impl Strategy for PaperEqE {
    fn name(&self) -> &'static str {
        "PaperEqE"
    }
}

impl SpectrumFormula for PaperEqE {
    fn energy(&self, qn: QuantumNumbers, params: &PotentialParams) -> f64 {
        2.0 * qn.angular_index(params) * params.k_f64() + 2.0 * qn.n_r as f64
    }

    fn exact_energy(&self, qn: QuantumNumbers, params: &PotentialParams) -> Option<BigRational> {
        let lambda = exact_angular_index(qn, params)?;
        let two = BigRational::from_integer(BigInt::from(2));
        Some(&two * lambda * params.k().to_big() + two * BigRational::from_integer(qn.n_r.into()))
    }
}

impl Strategy for Resolved {
    fn name(&self) -> &'static str {
        "Resolved"
    }
}

impl SpectrumFormula for Resolved {
    fn energy(&self, qn: QuantumNumbers, params: &PotentialParams) -> f64 {
        2.0 * params.omega() * (2.0 * qn.n_r as f64 + qn.radial_exponent(params) + 1.0)
    }

    fn exact_energy(&self, qn: QuantumNumbers, params: &PotentialParams) -> Option<BigRational> {
        let lambda = exact_angular_index(qn, params)?;
        let omega = BigRational::from_float(params.omega())?;
        let two = BigRational::from_integer(BigInt::from(2));
        let inner = &two * BigRational::from_integer(qn.n_r.into()) + params.k().to_big() * lambda + BigRational::one();
        Some(two * omega * inner)
    }
}

fn exact_angular_index(qn: QuantumNumbers, params: &PotentialParams) -> Option<BigRational> {
    let (a, b) = params.exact_exponents()?;
    Some(BigRational::from_integer(BigInt::from(2 * qn.l1 + 1)) + a + b)
}

pub static SPECTRUM_FORMULAS: Lazy<Registry<dyn SpectrumFormula>> =
    Lazy::new(|| Registry::new("spectrum formula", vec![Box::new(PaperEqE), Box::new(Resolved)]));

// ------------------------------------------------------- jacobi argument

pub trait AngularArgument: Strategy {
    /// The Jacobi argument expressed through y = cos 2kθ.
    fn from_cos2(&self, y: f64) -> f64;

    fn argument(&self, k_theta: f64) -> f64 {
        self.from_cos2((2.0 * k_theta).cos())
    }
}

/// P(cos 2kθ).
pub struct Cos2Theta;

/// P(2sin²kθ − 1) = P(−cos 2kθ).
pub struct TwoSinSqMinusOne;

impl Strategy for Cos2Theta {
    fn name(&self) -> &'static str {
        "cos2T"
    }
}

impl AngularArgument for Cos2Theta {
    fn from_cos2(&self, y: f64) -> f64 {
        y
    }
}

impl Strategy for TwoSinSqMinusOne {
    fn name(&self) -> &'static str {
        "2sin2m1"
    }
}

impl AngularArgument for TwoSinSqMinusOne {
    fn from_cos2(&self, y: f64) -> f64 {
        -y
    }

    fn argument(&self, k_theta: f64) -> f64 {
        let s = k_theta.sin();
        2.0 * s * s - 1.0
    }
}

pub static ANGULAR_ARGUMENTS: Lazy<Registry<dyn AngularArgument>> = Lazy::new(|| {
    Registry::new("jacobi argument", vec![Box::new(Cos2Theta), Box::new(TwoSinSqMinusOne)])
});

// ------------------------------------------------------ product constant

/// Denominator of the l-th coefficient in the expansion of a product of two
/// Bessel functions into J_{2l+a+b+1} times two Jacobi polynomials.
pub trait ProductConstant: Strategy {
    fn ln_denominator(&self, a: f64, b: f64, l: usize) -> f64;

    /// (−1)^l (2l+a+b+1) l! Γ(a+b+l+1) / denominator, as (sign, ln|value|).
    fn coefficient(&self, a: f64, b: f64, l: usize) -> (f64, f64) {
        let lf = l as f64;
        let ln = (2.0 * lf + a + b + 1.0).ln() + lg(lf + 1.0) + lg(a + b + lf + 1.0) - self.ln_denominator(a, b, l);
        (if l % 2 == 0 { 1.0 } else { -1.0 }, ln)
    }
}

/// Γ(a+l+1)²; only agrees with the symmetric form when a = b.
pub struct AsymmetricConstant;

/// Γ(a+l+1) Γ(b+l+1).
pub struct SymmetricConstant;

impl Strategy for AsymmetricConstant {
    fn name(&self) -> &'static str {
        "asymmetric"
    }
}

impl ProductConstant for AsymmetricConstant {
    fn ln_denominator(&self, a: f64, _b: f64, l: usize) -> f64 {
        2.0 * lg(a + l as f64 + 1.0)
    }
}

impl Strategy for SymmetricConstant {
    fn name(&self) -> &'static str {
        "symmetric"
    }
}

impl ProductConstant for SymmetricConstant {
    fn ln_denominator(&self, a: f64, b: f64, l: usize) -> f64 {
        lg(a + l as f64 + 1.0) + lg(b + l as f64 + 1.0)
    }
}

pub static PRODUCT_CONSTANTS: Lazy<Registry<dyn ProductConstant>> = Lazy::new(|| {
    Registry::new("product constant", vec![Box::new(AsymmetricConstant), Box::new(SymmetricConstant)])
});

fn lg(x: f64) -> f64 {
    ln_gamma(x).expect("positive Gamma argument")
}

// --------------------------------------------------------------- bundle

/// The three choices in effect for a run.
#[derive(Clone, Copy)]
pub struct Conventions {
    pub spectrum: &'static dyn SpectrumFormula,
    pub jacobi: &'static dyn AngularArgument,
    pub constant: &'static dyn ProductConstant,
}

/// Names of a [`Conventions`] bundle, for config files and reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionNames {
    pub spectrum: String,
    pub jacobi: String,
    pub constant: String,
}

impl Default for ConventionNames {
    fn default() -> Self {
        Conventions::default().names()
    }
}

impl Conventions {
    pub fn from_names(names: &ConventionNames) -> Result<Self, UnknownStrategy> {
        Ok(Self {
            spectrum: SPECTRUM_FORMULAS.get(&names.spectrum)?,
            jacobi: ANGULAR_ARGUMENTS.get(&names.jacobi)?,
            constant: PRODUCT_CONSTANTS.get(&names.constant)?,
        })
    }

    pub fn names(&self) -> ConventionNames {
        ConventionNames {
            spectrum: self.spectrum.name().into(),
            jacobi: self.jacobi.name().into(),
            constant: self.constant.name().into(),
        }
    }
}

impl Default for Conventions {
    /// The variants the oracles confirm.
    fn default() -> Self {
        Self {
            spectrum: &Resolved,
            jacobi: &Cos2Theta,
            constant: &SymmetricConstant,
        }
    }
}

impl std::fmt::Debug for Conventions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Conventions")
            .field("spectrum", &self.spectrum.name())
            .field("jacobi", &self.jacobi.name())
            .field("constant", &self.constant.name())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Rational;

    fn params(k: &str, alpha: f64, beta: f64) -> PotentialParams {
        PotentialParams::new(1.0, alpha, beta, k.parse().unwrap()).unwrap()
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(SPECTRUM_FORMULAS.names(), vec!["PaperEqE", "Resolved"]);
        assert_eq!(ANGULAR_ARGUMENTS.get("2sin2m1").unwrap().name(), "2sin2m1");
        let err = PRODUCT_CONSTANTS.get("nope").err().unwrap();
        assert!(err.to_string().contains("asymmetric, symmetric"));
        let names = ConventionNames::default();
        assert_eq!(Conventions::from_names(&names).unwrap().names(), names);
    }

    #[test]
    fn spectrum_formula_examples() {
        let qn = QuantumNumbers::new(0, 0);
        assert_eq!(PaperEqE.energy(qn, &params("1", 0.0, 0.0)), 4.0);
        assert_eq!(PaperEqE.energy(QuantumNumbers::new(1, 0), &params("3", 0.0, 0.0)), 14.0);
        assert_eq!(Resolved.energy(qn, &params("1", 0.0, 0.0)), 6.0);
    }

    #[test]
    fn exact_energy_matches_float() {
        let p = PotentialParams::new(1.25, 2.0, 0.75, Rational::new(3, 2).unwrap()).unwrap();
        for f in SPECTRUM_FORMULAS.iter() {
            for (n, l) in [(0, 0), (2, 1), (4, 3)] {
                let qn = QuantumNumbers::new(n, l);
                let exact = num_traits::ToPrimitive::to_f64(&f.exact_energy(qn, &p).unwrap()).unwrap();
                assert!((exact - f.energy(qn, &p)).abs() < 1e-12 * exact);
            }
        }
        assert!(Resolved.exact_energy(QuantumNumbers::new(0, 0), &params("1", 1.0, 0.0)).is_none());
    }

    #[test]
    fn arguments_differ_by_sign() {
        for t in [0.1, 0.4, 0.7] {
            assert!((Cos2Theta.argument(t) + TwoSinSqMinusOne.argument(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn constants_agree_when_symmetric() {
        for l in 0..6 {
            let (s1, a) = AsymmetricConstant.coefficient(1.5, 1.5, l);
            let (s2, b) = SymmetricConstant.coefficient(1.5, 1.5, l);
            assert_eq!(s1, s2);
            assert!((a - b).abs() < 1e-13);
        }
        let (_, a) = AsymmetricConstant.coefficient(0.5, 1.5, 2);
        let (_, b) = SymmetricConstant.coefficient(0.5, 1.5, 2);
        assert!((a - b).abs() > 0.1);
    }
}
