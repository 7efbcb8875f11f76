//! Gaussian quadrature rules from the Golub–Welsch construction.
//!
//! Nodes are eigenvalues of the Jacobi matrix of the weight's monic
//! orthogonal polynomials; weights are μ₀ times the squared first components
//! of the normalized eigenvectors. The eigenproblem is solved with an
//! implicit QL sweep that only tracks the first eigenvector row.

use crate::specfun::ln_gamma;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature order must be at least 1")]
    EmptyRule,
    #[error("invalid weight parameter: {0}")]
    Parameter(String),
    #[error("QL iteration did not converge for eigenvalue {0}")]
    NoConvergence(usize),
    #[error("quadrature did not converge: orders {low} and {high} differ by {rel_diff:e} (relative)")]
    Unconverged { low: usize, high: usize, rel_diff: f64 },
}

/// A Gaussian rule ∫ w(x) f(x) dx ≈ μ₀ Σᵢ wᵢ f(xᵢ) with Σᵢ wᵢ = 1.
///
/// The total mass μ₀ is kept as a logarithm because generalized Laguerre
/// weights with large exponents have Γ(a+1) beyond f64 range.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub ln_mu0: f64,
}

impl GaussRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn mu0(&self) -> f64 {
        self.ln_mu0.exp()
    }

    /// ∫ w(x) f(x) dx.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.mu0() * self.normalized_sum(f)
    }

    /// Σᵢ wᵢ f(xᵢ) with unit total mass.
    pub fn normalized_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    fn from_jacobi_matrix(mut diag: Vec<f64>, mut off: Vec<f64>, ln_mu0: f64) -> Result<Self, QuadratureError> {
        let n = diag.len();
        let mut first = vec![0.0; n];
        first[0] = 1.0;
        off.push(0.0);
        implicit_ql(&mut diag, &mut off, &mut first)?;
        let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(first.into_iter().map(|z| z * z)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self { nodes, weights, ln_mu0 })
    }
}

/// Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(order: usize) -> Result<GaussRule, QuadratureError> {
    gauss_jacobi(order, 0.0, 0.0)
}

/// Gauss–Jacobi rule for the weight (1−x)^a (1+x)^b on [−1, 1].
pub fn gauss_jacobi(order: usize, a: f64, b: f64) -> Result<GaussRule, QuadratureError> {
    if order == 0 {
        return Err(QuadratureError::EmptyRule);
    }
    if !(a > -1.0 && b > -1.0) {
        return Err(QuadratureError::Parameter(format!("Jacobi weight needs a, b > -1 (got {a}, {b})")));
    }
    let ab = a + b;
    let diag = (0..order)
        .map(|n| {
            if n == 0 {
                (b - a) / (ab + 2.0)
            } else {
                let s = 2.0 * n as f64 + ab;
                (b * b - a * a) / (s * (s + 2.0))
            }
        })
        .collect();
    let off = (1..order)
        .map(|n| {
            let nf = n as f64;
            let s = 2.0 * nf + ab;
            let beta = if n == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * nf * (nf + a) * (nf + b) * (nf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            beta.sqrt()
        })
        .collect();
    let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + lg(a + 1.0) + lg(b + 1.0) - lg(ab + 2.0);
    GaussRule::from_jacobi_matrix(diag, off, ln_mu0)
}

/// Generalized Gauss–Laguerre rule for the weight x^a e^{−x} on [0, ∞).
pub fn gauss_laguerre(order: usize, a: f64) -> Result<GaussRule, QuadratureError> {
    if order == 0 {
        return Err(QuadratureError::EmptyRule);
    }
    if !(a > -1.0) || !a.is_finite() {
        return Err(QuadratureError::Parameter(format!("Laguerre weight needs a > -1 (got {a})")));
    }
    let diag = (0..order).map(|n| 2.0 * n as f64 + a + 1.0).collect();
    let off = (1..order).map(|n| (n as f64 * (n as f64 + a)).sqrt()).collect();
    GaussRule::from_jacobi_matrix(diag, off, lg(a + 1.0))
}

fn lg(x: f64) -> f64 {
    ln_gamma(x).expect("positive argument")
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
///
/// `diag` is overwritten with eigenvalues; `off[i]` couples rows i and i+1
/// (its last entry is scratch). `first` starts as the first row of the
/// identity and ends as the first row of the eigenvector matrix.
fn implicit_ql(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) -> Result<(), QuadratureError> {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(QuadratureError::NoConvergence(l));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let fz = first[i + 1];
                first[i + 1] = s * first[i] + c * fz;
                first[i] = c * first[i] - s * fz;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
