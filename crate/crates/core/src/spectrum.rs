//! Eigenvalues, eigenstates and degeneracy classes.

use crate::conventions::{AngularArgument, SpectrumFormula};
use crate::params::{PotentialParams, QuantumNumbers};
use crate::quadrature::{gauss_jacobi, gauss_laguerre, QuadratureError};
use crate::specfun::{jacobi_unchecked, laguerre_unchecked, ln_gamma};
use num_rational::BigRational;
use std::cmp::Ordering;
use thiserror::Error;

pub const DEFAULT_QUADRATURE_ORDER: usize = 128;

/// Relative tolerance for grouping energies when exact arithmetic is
/// unavailable.
pub const FLOAT_DEGENERACY_TOL: f64 = 1e-12;

const DOUBLING_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub fn angular_exponent_pair(params: &PotentialParams) -> (f64, f64) {
    params.exponents()
}

pub fn energy(qn: QuantumNumbers, params: &PotentialParams, formula: &dyn SpectrumFormula) -> f64 {
    formula.energy(qn, params)
}

/// (sin kθ)^{p_φ+½} (cos kθ)^{p_ψ+½} P^{(p_φ,p_ψ)}_{l₁}(x*), zero on and
/// outside the walls.
pub fn angular_wavefunction(l1: usize, theta: f64, params: &PotentialParams, arg: &dyn AngularArgument) -> f64 {
    let k = params.k_f64();
    if theta <= 0.0 || theta >= params.wedge() {
        return 0.0;
    }
    let (a, b) = params.exponents();
    let (s, c) = (k * theta).sin_cos();
    if s <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    let x = arg.argument(k * theta).clamp(-1.0, 1.0);
    s.powf(a + 0.5) * c.powf(b + 0.5) * jacobi_unchecked(l1, a, b, x)
}

/// e^{−ωr²/2} (ωr²)^{λ/2} L^{(λ)}_{n_r}(ωr²) with λ = k(2l₁+p_φ+p_ψ+1).
pub fn radial_factor(qn: QuantumNumbers, params: &PotentialParams, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let lam = qn.radial_exponent(params);
    let x = params.omega() * r * r;
    (0.5 * (lam * x.ln() - x)).exp() * laguerre_unchecked(qn.n_r, lam, x)
}

/// Unnormalized eigenstate amplitude at (r, θ).
pub fn eigenstate(qn: QuantumNumbers, params: &PotentialParams, r: f64, theta: f64, arg: &dyn AngularArgument) -> f64 {
    radial_factor(qn, params, r) * angular_wavefunction(qn.l1, theta, params, arg)
}

/// ∫ R_a R_b r dr by generalized Gauss–Laguerre in x = ωr², where the
/// integrand is a polynomial against x^{(λa+λb)/2} e^{−x}.
fn radial_overlap(a: QuantumNumbers, b: QuantumNumbers, params: &PotentialParams, order: usize) -> Result<f64, SpectrumError> {
    let (la, lb) = (a.radial_exponent(params), b.radial_exponent(params));
    let rule = gauss_laguerre(order, 0.5 * (la + lb))?;
    let sum = rule.normalized_sum(|x| laguerre_unchecked(a.n_r, la, x) * laguerre_unchecked(b.n_r, lb, x));
    Ok(rule.ln_mu0.exp() * sum / (2.0 * params.omega()))
}

/// ∫ Θ_a Θ_b dθ over the wedge by Gauss–Jacobi in y = cos 2kθ.
fn angular_overlap(
    la: usize,
    lb: usize,
    params: &PotentialParams,
    arg: &dyn AngularArgument,
    order: usize,
) -> Result<f64, SpectrumError> {
    let (a, b) = params.exponents();
    let rule = gauss_jacobi(order, a, b)?;
    let sum = rule.normalized_sum(|y| {
        let x = arg.from_cos2(y);
        jacobi_unchecked(la, a, b, x) * jacobi_unchecked(lb, a, b, x)
    });
    Ok(rule.mu0() * sum * 2f64.powf(-(a + b)) / (4.0 * params.k_f64()))
}

/// ∫ Θ_l² dθ by quadrature, for either argument convention.
pub fn angular_norm_sq(l1: usize, params: &PotentialParams, arg: &dyn AngularArgument, order: usize) -> Result<f64, SpectrumError> {
    angular_overlap(l1, l1, params, arg, order)
}

fn overlap_at(
    a: QuantumNumbers,
    b: QuantumNumbers,
    params: &PotentialParams,
    arg: &dyn AngularArgument,
    order: usize,
) -> Result<f64, SpectrumError> {
    Ok(radial_overlap(a, b, params, order)? * angular_overlap(a.l1, b.l1, params, arg, order)?)
}

/// Evaluates at `order` and `2·order`; the change must stay below 1e-8 of
/// `scale`, or of the value itself when no scale is given.
fn checked<F>(order: usize, scale: Option<f64>, f: F) -> Result<f64, SpectrumError>
where
    F: Fn(usize) -> Result<f64, SpectrumError>,
{
    let low = f(order)?;
    let high = f(2 * order)?;
    let scale = scale.unwrap_or(low.abs().max(high.abs()));
    let rel_diff = if scale == 0.0 { 0.0 } else { (high - low).abs() / scale };
    if rel_diff > DOUBLING_TOL {
        return Err(QuadratureError::Unconverged {
            low: order,
            high: 2 * order,
            rel_diff,
        }
        .into());
    }
    Ok(high)
}

/// c > 0 with ∫∫ |c Ψ|² r dr dθ = 1, checked against a doubled-order rule.
pub fn norm_constant(
    qn: QuantumNumbers,
    params: &PotentialParams,
    arg: &dyn AngularArgument,
    order: usize,
) -> Result<f64, SpectrumError> {
    let norm_sq = checked(order, None, |n| overlap_at(qn, qn, params, arg, n))?;
    Ok(norm_sq.sqrt().recip())
}

/// ∫∫ Ψ_a Ψ_b r dr dθ for two normalized eigenstates.
pub fn inner_product(
    a: QuantumNumbers,
    b: QuantumNumbers,
    params: &PotentialParams,
    arg: &dyn AngularArgument,
    order: usize,
) -> Result<f64, SpectrumError> {
    let ca = norm_constant(a, params, arg, order)?;
    let cb = norm_constant(b, params, arg, order)?;
    // orthogonal pairs are pure rounding noise, so judge them against the norms
    let raw = checked(order, Some((ca * cb).recip()), |n| overlap_at(a, b, params, arg, n))?;
    Ok(ca * cb * raw)
}

/// Γ(l+a+1)Γ(l+b+1) / (2k(2l+a+b+1) l! Γ(l+a+b+1)): the angular norm² in
/// closed form, for the cos 2kθ argument.
pub fn angular_norm_sq_closed(l1: usize, params: &PotentialParams) -> f64 {
    let (a, b) = params.exponents();
    let l = l1 as f64;
    let ln = lg(l + a + 1.0) + lg(l + b + 1.0) - lg(l + 1.0) - lg(l + a + b + 1.0);
    ln.exp() / (2.0 * params.k_f64() * (2.0 * l + a + b + 1.0))
}

/// Γ(n+λ+1) / (n! 2ω): the radial norm² in closed form.
pub fn radial_norm_sq_closed(qn: QuantumNumbers, params: &PotentialParams) -> f64 {
    let n = qn.n_r as f64;
    let lam = qn.radial_exponent(params);
    (lg(n + lam + 1.0) - lg(n + 1.0)).exp() / (2.0 * params.omega())
}

fn lg(x: f64) -> f64 {
    ln_gamma(x).expect("positive Gamma argument")
}

/// An eigenstate with its normalization constant attached.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedEigenstate {
    pub qn: QuantumNumbers,
    pub c: f64,
}

impl NormalizedEigenstate {
    pub fn new(qn: QuantumNumbers, params: &PotentialParams, arg: &dyn AngularArgument, order: usize) -> Result<Self, SpectrumError> {
        Ok(Self {
            qn,
            c: norm_constant(qn, params, arg, order)?,
        })
    }

    pub fn eval(&self, params: &PotentialParams, r: f64, theta: f64, arg: &dyn AngularArgument) -> f64 {
        self.c * eigenstate(self.qn, params, r, theta, arg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLevel {
    pub qn: QuantumNumbers,
    pub energy: f64,
    pub energy_exact: Option<BigRational>,
}

/// Levels sorted by energy (ties broken by n_r) and their degeneracy classes.
#[derive(Debug, Clone)]
pub struct LevelTable {
    pub levels: Vec<EnergyLevel>,
    /// Index ranges into `levels`, one per class, in ascending energy.
    pub classes: Vec<std::ops::Range<usize>>,
    pub exact: bool,
}

impl LevelTable {
    pub fn class_of(&self, level: usize) -> usize {
        self.classes
            .iter()
            .position(|c| c.contains(&level))
            .expect("every level belongs to a class")
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.len()).collect()
    }

    pub fn max_class_size(&self) -> usize {
        self.class_sizes().into_iter().max().unwrap_or(0)
    }
}

/// All (n_r, l₁) with E ≤ e_max, grouped into equal-energy classes.
///
/// Grouping is exact when p_φ and p_ψ are rational; otherwise energies
/// within a relative 1e-12 of their neighbour are merged.
pub fn enumerate_levels(params: &PotentialParams, e_max: f64, formula: &dyn SpectrumFormula) -> LevelTable {
    let exact = params.exact_exponents().is_some() && BigRational::from_float(e_max).is_some();
    let cap = BigRational::from_float(e_max);
    let within = |qn: QuantumNumbers| -> Option<EnergyLevel> {
        let energy = formula.energy(qn, params);
        let energy_exact = if exact { formula.exact_energy(qn, params) } else { None };
        let inside = match (&energy_exact, &cap) {
            (Some(e), Some(c)) => e <= c,
            _ => energy <= e_max,
        };
        inside.then_some(EnergyLevel { qn, energy, energy_exact })
    };

    let mut levels = Vec::new();
    for l1 in 0.. {
        if within(QuantumNumbers::new(0, l1)).is_none() {
            break;
        }
        for n_r in 0.. {
            match within(QuantumNumbers::new(n_r, l1)) {
                Some(level) => levels.push(level),
                None => break,
            }
        }
    }

    levels.sort_by(|a, b| {
        let by_energy = match (&a.energy_exact, &b.energy_exact) {
            (Some(x), Some(y)) => x.cmp(y),
            _ => a.energy.total_cmp(&b.energy),
        };
        by_energy.then(a.qn.n_r.cmp(&b.qn.n_r))
    });

    let same = |a: &EnergyLevel, b: &EnergyLevel| match (&a.energy_exact, &b.energy_exact) {
        (Some(x), Some(y)) => x.cmp(y) == Ordering::Equal,
        _ => (a.energy - b.energy).abs() <= FLOAT_DEGENERACY_TOL * a.energy.abs().max(b.energy.abs()),
    };
    let mut classes = Vec::new();
    let mut start = 0;
    for i in 1..=levels.len() {
        if i == levels.len() || !same(&levels[i - 1], &levels[i]) {
            classes.push(start..i);
            start = i;
        }
    }
    if levels.is_empty() {
        classes.clear();
    }
    LevelTable { levels, classes, exact }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conventions::{Cos2Theta, PaperEqE, Resolved, TwoSinSqMinusOne};

    fn params(omega: f64, alpha: f64, beta: f64, k: &str) -> PotentialParams {
        PotentialParams::new(omega, alpha, beta, k.parse().unwrap()).unwrap()
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(angular_exponent_pair(&params(1.0, 0.0, 0.0, "1")), (0.5, 0.5));
        assert_eq!(angular_exponent_pair(&params(1.0, 2.0, 0.75, "1")), (1.5, 1.0));
        let (a, b) = angular_exponent_pair(&params(1.0, 1.0, 1.0, "1"));
        assert!((a - 1.118033988749895).abs() < 1e-15 && a == b);
    }

    #[test]
    fn angular_wavefunction_examples() {
        let p = params(1.0, 0.0, 0.0, "1");
        for t in [0.1, 0.5, 1.2] {
            let v = angular_wavefunction(0, t, &p, &Cos2Theta);
            assert!((v - 0.5 * (2.0 * t).sin()).abs() < 1e-15);
        }
        let p = params(1.0, 2.0, 0.75, "1");
        let v = angular_wavefunction(0, std::f64::consts::FRAC_PI_4, &p, &Cos2Theta);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v - 0.5 * h.powf(1.5)).abs() < 1e-15);
        assert!((v - 0.29730177875068026).abs() < 1e-12);
        assert_eq!(angular_wavefunction(3, 0.0, &p, &Cos2Theta), 0.0);
        assert_eq!(angular_wavefunction(3, p.wedge(), &p, &Cos2Theta), 0.0);
    }

    #[test]
    fn first_radial_node_location() {
        let p = params(1.3, 2.0, 0.75, "3/2");
        let qn = QuantumNumbers::new(1, 2);
        let lam = qn.radial_exponent(&p);
        let r0 = ((1.0 + lam) / p.omega()).sqrt();
        assert!(radial_factor(qn, &p, r0 * 0.999) > 0.0);
        assert!(radial_factor(qn, &p, r0 * 1.001) < 0.0);
        assert_eq!(radial_factor(qn, &p, 0.0), 0.0);
    }

    #[test]
    fn quadrature_norms_match_closed_forms() {
        let p = params(0.7, 2.0, 0.75, "3/2");
        for (n, l) in [(0, 0), (1, 0), (2, 3), (5, 1)] {
            let qn = QuantumNumbers::new(n, l);
            let c = norm_constant(qn, &p, &Cos2Theta, 64).unwrap();
            let closed = (angular_norm_sq_closed(l, &p) * radial_norm_sq_closed(qn, &p)).sqrt().recip();
            assert!((c - closed).abs() < 1e-10 * closed, "{qn:?}: {c} vs {closed}");
        }
    }

    #[test]
    fn argument_sign_is_invisible_when_symmetric() {
        let p = params(1.0, 2.0, 2.0, "2");
        for l in 0..4 {
            let qn = QuantumNumbers::new(1, l);
            let a = norm_constant(qn, &p, &Cos2Theta, 32).unwrap();
            let b = norm_constant(qn, &p, &TwoSinSqMinusOne, 32).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn enumeration_orders_and_groups() {
        let p = params(1.0, 0.0, 0.0, "1");
        let table = enumerate_levels(&p, 20.0, &Resolved);
        assert!(table.exact);
        // 2(2n + 2l + 3): levels 6, 10, 14, 18 with 1, 2, 3, 4 members
        assert_eq!(table.class_sizes(), vec![1, 2, 3, 4]);
        let energies: Vec<f64> = table.classes.iter().map(|c| table.levels[c.start].energy).collect();
        assert_eq!(energies, vec![6.0, 10.0, 14.0, 18.0]);
        assert!(enumerate_levels(&p, 5.0, &Resolved).levels.is_empty());
        let table = enumerate_levels(&p, 10.0, &PaperEqE);
        assert_eq!(table.levels[0].energy, 4.0);
    }

    #[test]
    fn float_grouping_for_irrational_exponents() {
        let p = params(1.0, 1.0, 1.0, "2");
        let table = enumerate_levels(&p, 40.0, &Resolved);
        assert!(!table.exact);
        assert!(table.max_class_size() >= 2);
    }
}
