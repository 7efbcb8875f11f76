//! Numerical ground truth for the analytic formulas.
//!
//! Finite-difference eigenvalues of the separated angular and radial
//! operators (symmetric tridiagonal, Sturm bisection, Richardson over grid
//! doublings), a residual checker for the Bessel-product expansion, and the
//! arbitration routines that pick a variant from each convention registry.
//! Nothing here is random.

use crate::conventions::{
    AngularArgument, ANGULAR_ARGUMENTS, PRODUCT_CONSTANTS, SPECTRUM_FORMULAS,
};
use crate::params::{PotentialParams, QuantumNumbers, Rational};
use crate::specfun::{bessel_j, jacobi_unchecked, SpecfunError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("eigenvalue {level} not converged: last extrapolants {previous} and {last} differ by {rel_change:e} (relative)")]
    NotConverged {
        level: usize,
        previous: f64,
        last: f64,
        rel_change: f64,
    },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

pub const CONVERGENCE_TOL: f64 = 1e-3;

/// A uniform grid on (lo, hi) with Dirichlet values at both ends.
/// `n_points` interior nodes on the coarsest level; each refinement
/// level doubles the node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    lo: f64,
    hi: f64,
    refinement_levels: usize,
}

impl GridSpec {
    pub fn new(n_points: usize, domain: (f64, f64), refinement_levels: usize) -> Result<Self, OracleError> {
        let (lo, hi) = domain;
        if n_points < 64 {
            return Err(OracleError::Grid(format!("n_points must be >= 64 (got {n_points})")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(OracleError::Grid(format!("domain must satisfy lo < hi (got {lo}, {hi})")));
        }
        if refinement_levels < 2 {
            return Err(OracleError::Grid(format!("need at least 2 refinement levels (got {refinement_levels})")));
        }
        Ok(Self {
            n_points,
            lo,
            hi,
            refinement_levels,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn refinement_levels(&self) -> usize {
        self.refinement_levels
    }

    pub fn with_domain(&self, domain: (f64, f64)) -> Result<Self, OracleError> {
        Self::new(self.n_points, domain, self.refinement_levels)
    }

    fn level_points(&self, level: usize) -> usize {
        (self.n_points + 1) * (1 << level) - 1
    }
}

// ------------------------------------------------------------ tridiagonal

/// Symmetric tridiagonal matrix: `diag` of length n, `off` of length n−1.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    /// −d²/dx² + V on the interior nodes of a uniform Dirichlet grid.
    pub fn schrodinger(lo: f64, hi: f64, n: usize, potential: impl Fn(f64) -> f64) -> (Self, f64) {
        let h = (hi - lo) / (n + 1) as f64;
        let inv = 1.0 / (h * h);
        let diag = (1..=n).map(|i| 2.0 * inv + potential(lo + i as f64 * h)).collect();
        let off = vec![-inv; n.saturating_sub(1)];
        (Self { diag, off }, h)
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below x.
    pub fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - x - coupling;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `index`-th smallest eigenvalue by bisection.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn lowest(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.len())).map(|i| self.eigenvalue(i)).collect()
    }

    /// Eigenvector for an eigenvalue by two sweeps of inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let shift = lambda + 1e-10 * lambda.abs().max(1.0);
        let mut x = vec![1.0; n];
        for _ in 0..3 {
            x = self.solve_shifted(shift, &x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }

    fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0] - shift;
        c[0] = if n > 1 { self.off[0] / denom } else { 0.0 };
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - shift - self.off[i - 1] * c[i - 1];
            if denom == 0.0 {
                denom = f64::EPSILON;
            }
            c[i] = if i + 1 < n { self.off[i] / denom } else { 0.0 };
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }
}

pub fn sign_changes(values: &[f64]) -> usize {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut last = 0.0;
    let mut count = 0;
    for &v in values {
        if v.abs() <= 1e-9 * scale {
            continue;
        }
        if last * v < 0.0 {
            count += 1;
        }
        last = v;
    }
    count
}

// ------------------------------------------------------------ FD solves

/// Eigenvalue estimates on each grid level and their Richardson limits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdEigenvalues {
    /// `raw[level][i]`: i-th eigenvalue on refinement level `level`.
    pub raw: Vec<Vec<f64>>,
    /// Extrapolated values from the two finest levels.
    pub values: Vec<f64>,
    /// |last − previous| of the extrapolants, or of the two finest raw
    /// values when only two levels exist.
    pub error_estimate: Vec<f64>,
}

fn solve_levels(grid: &GridSpec, n_levels: usize, potential: impl Fn(f64) -> f64) -> Result<FdEigenvalues, OracleError> {
    let (lo, hi) = grid.domain();
    let raw: Vec<Vec<f64>> = (0..grid.refinement_levels())
        .map(|lvl| {
            let (m, _) = Tridiagonal::schrodinger(lo, hi, grid.level_points(lvl), &potential);
            m.lowest(n_levels)
        })
        .collect();
    // h halves per level and the error is O(h²)
    let extrap: Vec<Vec<f64>> = raw
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
        .collect();
    let last = extrap.last().expect("at least two levels").clone();
    let mut error_estimate = Vec::with_capacity(n_levels);
    for i in 0..last.len() {
        let (previous, reference) = if extrap.len() >= 2 {
            (extrap[extrap.len() - 2][i], last[i])
        } else {
            (raw[raw.len() - 2][i], raw[raw.len() - 1][i])
        };
        let change = (reference - previous).abs();
        let rel_change = change / reference.abs().max(f64::MIN_POSITIVE);
        if rel_change > CONVERGENCE_TOL {
            return Err(OracleError::NotConverged {
                level: i,
                previous,
                last: reference,
                rel_change,
            });
        }
        error_estimate.push(change);
    }
    Ok(FdEigenvalues {
        raw,
        values: last,
        error_estimate,
    })
}

/// Lowest eigenvalues of −d²/dΘ² + α/sin²Θ + β/cos²Θ on (0, π/2).
/// `grid`'s domain is used as given.
pub fn angular_eigenvalues(alpha: f64, beta: f64, n_levels: usize, grid: &GridSpec) -> Result<FdEigenvalues, OracleError> {
    solve_levels(grid, n_levels, angular_potential(alpha, beta))
}

fn angular_potential(alpha: f64, beta: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        let (s, c) = t.sin_cos();
        alpha / (s * s) + beta / (c * c)
    }
}

/// The default angular grid: the full interval (0, π/2), walls included as
/// Dirichlet nodes.
pub fn angular_grid(n_points: usize, refinement_levels: usize) -> Result<GridSpec, OracleError> {
    GridSpec::new(n_points, (0.0, FRAC_PI_2), refinement_levels)
}

/// Lowest eigenvalues of −d²/dr² + (λ²−¼)/r² + ω²r² on (lo, hi).
pub fn radial_eigenvalues(lam_k: f64, omega: f64, n_levels: usize, grid: &GridSpec) -> Result<FdEigenvalues, OracleError> {
    solve_levels(grid, n_levels, radial_potential(lam_k, omega))
}

fn radial_potential(lam_k: f64, omega: f64) -> impl Fn(f64) -> f64 {
    let c = lam_k * lam_k - 0.25;
    move |r: f64| c / (r * r) + omega * omega * r * r
}

/// Outer radius for a radial solve: a coarse solve estimates the highest
/// requested level E_top, then R is grown until ωR² ≥ 4E_top/ω.
pub fn radial_extent(lam_k: f64, omega: f64, n_levels: usize) -> f64 {
    let c = (lam_k * lam_k - 0.25).max(0.0);
    let r_min = (c / (omega * omega)).sqrt().sqrt();
    let mut r = 3.0 * r_min.max(1.0 / omega.sqrt());
    for _ in 0..20 {
        let (m, _) = Tridiagonal::schrodinger(0.0, r, 400, radial_potential(lam_k, omega));
        let e_top = m.eigenvalue(n_levels.max(1) - 1);
        let needed = 2.0 * e_top.max(0.0).sqrt() / omega;
        if needed <= r {
            return r;
        }
        r = 1.25 * needed;
    }
    r
}

// ------------------------------------------------------------ identity

/// One side-by-side evaluation of the Bessel-product expansion.
///
/// On the diagonal Θ = Φ the product J_a(z sinΘ sinΦ) J_b(z cosΘ cosΦ)
/// reduces to J_a(x) J_b(y) with z = x + y and sin²Θ = x/z. The right side
/// is (2/z)(sin²Θ)^a (cos²Θ)^b Σ_l c_l J_{2l+a+b+1}(z) P_l(cos 2Θ)², with
/// c_l from each registered denominator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub p_phi: f64,
    pub p_psi: f64,
    pub x: Complex64Repr,
    pub y: Complex64Repr,
    pub l1_max: usize,
    pub lhs: Complex64Repr,
    pub candidates: Vec<IdentityCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCandidate {
    pub constant: String,
    pub rhs: Complex64Repr,
    pub residual: f64,
}

/// A complex number as a `[re, im]` pair in reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex64Repr(pub Complex64);

impl Serialize for Complex64Repr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl IdentityReport {
    pub fn residual(&self, constant: &str) -> Option<f64> {
        self.candidates.iter().find(|c| c.constant == constant).map(|c| c.residual)
    }
}

/// Evaluates both sides for real arguments x, y > 0.
pub fn bessel_product_identity_check(p_phi: f64, p_psi: f64, x: f64, y: f64, l1_max: usize) -> Result<IdentityReport, OracleError> {
    identity_check_complex(p_phi, p_psi, Complex64::new(x, 0.0), Complex64::new(y, 0.0), l1_max)
}

/// Evaluates both sides for x = s·x₀, y = s·y₀ sharing one complex
/// direction s, so that sin²Θ = x₀/(x₀+y₀) stays real.
pub fn identity_check_complex(
    p_phi: f64,
    p_psi: f64,
    x: Complex64,
    y: Complex64,
    l1_max: usize,
) -> Result<IdentityReport, OracleError> {
    let z = x + y;
    if z.norm() == 0.0 {
        return Err(OracleError::Grid("identity check needs x + y != 0".into()));
    }
    let sin2 = (x / z).re;
    let cos2 = 1.0 - sin2;
    let cos_2t = cos2 - sin2;
    let (a, b) = (p_phi, p_psi);
    let lhs = bessel_j(a, x)? * bessel_j(b, y)?;
    let prefactor = 2.0 / z * sin2.powf(a) * cos2.powf(b);
    let mut terms = Vec::with_capacity(l1_max + 1);
    for l in 0..=l1_max {
        let p = jacobi_unchecked(l, a, b, cos_2t);
        terms.push(bessel_j(2.0 * l as f64 + a + b + 1.0, z)? * p * p);
    }
    let candidates = PRODUCT_CONSTANTS
        .iter()
        .map(|constant| {
            let sum: Complex64 = terms
                .iter()
                .enumerate()
                .map(|(l, t)| {
                    let (sign, ln) = constant.coefficient(a, b, l);
                    t * (sign * ln.exp())
                })
                .sum();
            let rhs = prefactor * sum;
            IdentityCandidate {
                constant: constant.name().to_string(),
                rhs: Complex64Repr(rhs),
                residual: (rhs - lhs).norm() / lhs.norm().max(f64::MIN_POSITIVE),
            }
        })
        .collect();
    Ok(IdentityReport {
        p_phi,
        p_psi,
        x: Complex64Repr(x),
        y: Complex64Repr(y),
        l1_max,
        lhs: Complex64Repr(lhs),
        candidates,
    })
}

pub const IDENTITY_TOL: f64 = 1e-8;
/// Residuals below this count as converged when checking tail decay.
pub const IDENTITY_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantArbitration {
    pub p_phi: f64,
    pub p_psi: f64,
    pub l1_max: usize,
    pub reports: Vec<IdentityReport>,
    /// Truncations used for the tail-decay check, ascending.
    pub decay_truncations: Vec<usize>,
    /// Per passing candidate, whether its worst residual over the argument
    /// pairs was non-increasing along `decay_truncations`.
    pub monotone: Vec<(String, bool)>,
    pub passing: Vec<String>,
    /// A registry name, "indistinguishable-symmetric", or "inconclusive".
    pub winner: String,
}

impl ConstantArbitration {
    pub fn conclusive(&self) -> bool {
        self.winner != "inconclusive"
    }
}

fn truncation_ladder(l1_max: usize) -> Vec<usize> {
    let mut ladder = vec![l1_max];
    let mut l = l1_max;
    while l >= 6 {
        l /= 2;
        ladder.push(l);
    }
    ladder.reverse();
    ladder
}

/// Runs the identity on every argument pair, on the real axis and on the
/// negative imaginary axis, and picks the denominator whose worst residual
/// stays under 1e-8 with non-increasing tail residuals.
pub fn arbitrate_product_constant(
    p_phi: f64,
    p_psi: f64,
    pairs: &[(f64, f64)],
    l1_max: usize,
) -> Result<ConstantArbitration, OracleError> {
    let directions = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
    let ladder = truncation_ladder(l1_max);
    let mut reports = Vec::new();
    // worst[name][j]: worst residual at ladder[j]
    let names: Vec<&str> = PRODUCT_CONSTANTS.names();
    let mut worst = vec![vec![0.0_f64; ladder.len()]; names.len()];
    for &(x, y) in pairs {
        for dir in directions {
            for (j, &l) in ladder.iter().enumerate() {
                let report = identity_check_complex(p_phi, p_psi, dir * x, dir * y, l)?;
                for (i, c) in report.candidates.iter().enumerate() {
                    worst[i][j] = worst[i][j].max(c.residual);
                }
                if l == l1_max {
                    reports.push(report);
                }
            }
        }
    }
    let last = ladder.len() - 1;
    let passing: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|(i, _)| worst[*i][last] < IDENTITY_TOL)
        .map(|(_, n)| n.to_string())
        .collect();
    let monotone: Vec<(String, bool)> = names
        .iter()
        .enumerate()
        .filter(|(_, n)| passing.iter().any(|p| p == *n))
        .map(|(i, n)| {
            let ok = worst[i]
                .windows(2)
                .all(|w| w[1] <= w[0] || w[1] <= IDENTITY_FLOOR);
            (n.to_string(), ok)
        })
        .collect();
    let symmetric = p_phi == p_psi;
    let winner = match (passing.len(), symmetric) {
        (_, true) if !passing.is_empty() => "indistinguishable-symmetric".to_string(),
        (1, false) if monotone.iter().all(|(_, ok)| *ok) => passing[0].clone(),
        _ => "inconclusive".to_string(),
    };
    Ok(ConstantArbitration {
        p_phi,
        p_psi,
        l1_max,
        reports,
        decay_truncations: ladder,
        monotone,
        passing,
        winner,
    })
}

// ------------------------------------------------------- jacobi argument

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArgumentCase {
    pub alpha: f64,
    pub beta: f64,
    pub l1: usize,
    pub oracle_eigenvalue: f64,
    /// (argument name, max relative ODE residual).
    pub residuals: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArgumentArbitration {
    pub cases: Vec<ArgumentCase>,
    pub passing: Vec<String>,
    /// A registry name, "indistinguishable-symmetric", or "inconclusive".
    pub winner: String,
}

impl ArgumentArbitration {
    pub fn conclusive(&self) -> bool {
        self.winner != "inconclusive"
    }
}

pub const ODE_RESIDUAL_TOL: f64 = 1e-4;

/// Max over interior sample points of |−f″ + Vf − μf| / (|f″| + |Vf| + |μf|)
/// for f = sin^{a+½}Θ cos^{b+½}Θ P_l(x*(Θ)), with f″ by a central
/// difference.
pub fn angular_ode_residual(alpha: f64, beta: f64, l1: usize, mu: f64, arg: &dyn AngularArgument) -> f64 {
    let a = (alpha + 0.25).sqrt();
    let b = (beta + 0.25).sqrt();
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        s.powf(a + 0.5) * c.powf(b + 0.5) * jacobi_unchecked(l1, a, b, arg.argument(t))
    };
    let v = angular_potential(alpha, beta);
    let h = 1e-4;
    let samples = 37;
    let mut worst = 0.0_f64;
    for i in 1..samples {
        let t = FRAC_PI_2 * i as f64 / samples as f64;
        let f0 = f(t);
        let d2 = (f(t + h) - 2.0 * f0 + f(t - h)) / (h * h);
        let scale = d2.abs() + (v(t) * f0).abs() + (mu * f0).abs();
        if scale == 0.0 {
            continue;
        }
        worst = worst.max((-d2 + v(t) * f0 - mu * f0).abs() / scale);
    }
    worst
}

/// Tests each registered argument against the ODE with the oracle
/// eigenvalue, for every (α, β) in `barriers` and l₁ ≤ `l1_max`.
pub fn arbitrate_jacobi_argument(
    barriers: &[(f64, f64)],
    l1_max: usize,
    grid: &GridSpec,
) -> Result<ArgumentArbitration, OracleError> {
    let mut cases = Vec::new();
    for &(alpha, beta) in barriers {
        let fd = angular_eigenvalues(alpha, beta, l1_max + 1, grid)?;
        for (l1, &mu) in fd.values.iter().enumerate() {
            let residuals = ANGULAR_ARGUMENTS
                .iter()
                .map(|arg| (arg.name().to_string(), angular_ode_residual(alpha, beta, l1, mu, arg)))
                .collect();
            cases.push(ArgumentCase {
                alpha,
                beta,
                l1,
                oracle_eigenvalue: mu,
                residuals,
            });
        }
    }
    let passing: Vec<String> = ANGULAR_ARGUMENTS
        .names()
        .into_iter()
        .filter(|name| {
            cases.iter().all(|c| {
                c.residuals
                    .iter()
                    .any(|(n, r)| n == name && *r < ODE_RESIDUAL_TOL)
            })
        })
        .map(String::from)
        .collect();
    let any_asymmetric = barriers.iter().any(|(a, b)| a != b);
    let winner = match passing.len() {
        1 => passing[0].clone(),
        n if n > 1 && !any_asymmetric => "indistinguishable-symmetric".into(),
        _ => "inconclusive".into(),
    };
    Ok(ArgumentArbitration { cases, passing, winner })
}

// ------------------------------------------------------------- spectrum

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCase {
    pub alpha: f64,
    pub beta: f64,
    pub k: Rational,
    pub l1: usize,
    /// √ of the angular oracle eigenvalue times k.
    pub lam_k: f64,
    pub oracle: Vec<f64>,
    /// (formula name, predicted levels, max relative deviation).
    pub candidates: Vec<(String, Vec<f64>, f64)>,
    pub matches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumArbitration {
    pub omega: f64,
    pub n_radial: usize,
    pub cases: Vec<SpectrumCase>,
    /// A registry name or "inconclusive".
    pub winner: String,
}

impl SpectrumArbitration {
    pub fn conclusive(&self) -> bool {
        self.winner != "inconclusive"
    }
}

pub const SPECTRUM_MATCH_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGrids {
    pub angular_points: usize,
    pub radial_points: usize,
    pub refinement_levels: usize,
}

impl Default for OracleGrids {
    fn default() -> Self {
        Self {
            angular_points: 1000,
            radial_points: 1000,
            refinement_levels: 3,
        }
    }
}

/// Solves the separated problem by finite differences for every
/// (α, β) × k × l₁ combination and reports which registered spectrum
/// formula reproduces every oracle level to 1e-3.
pub fn arbitrate_spectrum(
    omega: f64,
    barriers: &[(f64, f64)],
    ks: &[Rational],
    l1_max: usize,
    n_radial: usize,
    grids: &OracleGrids,
) -> Result<SpectrumArbitration, OracleError> {
    let agrid = angular_grid(grids.angular_points, grids.refinement_levels)?;
    let mut cases = Vec::new();
    for &(alpha, beta) in barriers {
        let angular = angular_eigenvalues(alpha, beta, l1_max + 1, &agrid)?;
        for &k in ks {
            let params = PotentialParams::new(omega, alpha, beta, k).map_err(|e| OracleError::Grid(e.to_string()))?;
            for (l1, &mu) in angular.values.iter().enumerate() {
                let lam_k = k.to_f64() * mu.sqrt();
                let extent = radial_extent(lam_k, omega, n_radial);
                let rgrid = GridSpec::new(grids.radial_points, (0.0, extent), grids.refinement_levels)?;
                let oracle = radial_eigenvalues(lam_k, omega, n_radial, &rgrid)?.values;
                let candidates: Vec<(String, Vec<f64>, f64)> = SPECTRUM_FORMULAS
                    .iter()
                    .map(|f| {
                        let predicted: Vec<f64> = (0..n_radial)
                            .map(|n| f.energy(QuantumNumbers::new(n, l1), &params))
                            .collect();
                        let dev = predicted
                            .iter()
                            .zip(&oracle)
                            .map(|(p, o)| (p - o).abs() / o.abs())
                            .fold(0.0, f64::max);
                        (f.name().to_string(), predicted, dev)
                    })
                    .collect();
                let matches = candidates
                    .iter()
                    .filter(|c| c.2 <= SPECTRUM_MATCH_TOL)
                    .map(|c| c.0.clone())
                    .collect();
                cases.push(SpectrumCase {
                    alpha,
                    beta,
                    k,
                    l1,
                    lam_k,
                    oracle,
                    candidates,
                    matches,
                });
            }
        }
    }
    let winners: Vec<&str> = SPECTRUM_FORMULAS
        .names()
        .into_iter()
        .filter(|name| cases.iter().all(|c| c.matches.len() == 1 && c.matches[0] == *name))
        .collect();
    let winner = match winners.as_slice() {
        [one] => one.to_string(),
        _ => "inconclusive".to_string(),
    };
    Ok(SpectrumArbitration {
        omega,
        n_radial,
        cases,
        winner,
    })
}

// --------------------------------------------------------------- sweeps

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularCheck {
    pub alpha: f64,
    pub beta: f64,
    pub oracle: Vec<f64>,
    pub analytic: Vec<f64>,
    pub max_rel_error: f64,
}

/// Oracle angular eigenvalues against (2l₁+p_φ+p_ψ+1)².
pub fn angular_check(alpha: f64, beta: f64, n_levels: usize, grid: &GridSpec) -> Result<AngularCheck, OracleError> {
    let oracle = angular_eigenvalues(alpha, beta, n_levels, grid)?.values;
    let (a, b) = ((alpha + 0.25).sqrt(), (beta + 0.25).sqrt());
    let analytic: Vec<f64> = (0..n_levels).map(|l| (2.0 * l as f64 + a + b + 1.0).powi(2)).collect();
    let max_rel_error = oracle
        .iter()
        .zip(&analytic)
        .map(|(o, e)| (o - e).abs() / e)
        .fold(0.0, f64::max);
    Ok(AngularCheck {
        alpha,
        beta,
        oracle,
        analytic,
        max_rel_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialCheck {
    pub lam_k: f64,
    pub omega: f64,
    pub oracle: Vec<f64>,
    pub spacing: Vec<f64>,
}

pub fn radial_check(lam_k: f64, omega: f64, n_levels: usize, n_points: usize, refinement_levels: usize) -> Result<RadialCheck, OracleError> {
    let grid = GridSpec::new(n_points, (0.0, radial_extent(lam_k, omega, n_levels)), refinement_levels)?;
    let oracle = radial_eigenvalues(lam_k, omega, n_levels, &grid)?.values;
    let spacing = oracle.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(RadialCheck {
        lam_k,
        omega,
        oracle,
        spacing,
    })
}

/// Everything the validation command needs to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub params: PotentialParams,
    pub barriers: Vec<(f64, f64)>,
    pub ks: Vec<Rational>,
    pub l1_max: usize,
    pub n_radial: usize,
    pub grids: OracleGrids,
    /// Barriers used to tell the two Jacobi arguments apart; the run's own
    /// (α, β) is added to this list.
    pub argument_probes: Vec<(f64, f64)>,
    /// (p_φ, p_ψ) for the product-constant probe.
    pub identity_probe: (f64, f64),
    pub identity_pairs: Vec<(f64, f64)>,
    pub identity_l1_max: usize,
}

impl ValidationConfig {
    pub fn for_params(params: PotentialParams) -> Self {
        let k = |p, q| Rational::new(p, q).expect("valid literal");
        Self {
            params,
            barriers: vec![(0.0, 0.0), (0.0, 2.0), (2.0, 0.0), (2.0, 2.0)],
            ks: vec![k(1, 1), k(2, 1), k(3, 1), k(3, 2)],
            l1_max: 2,
            n_radial: 5,
            grids: OracleGrids::default(),
            argument_probes: vec![(0.0, 2.0)],
            identity_probe: (0.5, 1.5),
            identity_pairs: vec![(0.3, 0.7), (1.2, 0.8), (2.5, 1.5)],
            identity_l1_max: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySection {
    /// The run's own exponents.
    pub configured: ConstantArbitration,
    /// The asymmetric probe that separates the two denominators.
    pub probe: ConstantArbitration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub angular: Vec<AngularCheck>,
    pub radial: Vec<RadialCheck>,
    pub identity: IdentitySection,
    pub spectrum: SpectrumArbitration,
    pub jacobi_argument: ArgumentArbitration,
    pub spectrum_convention_winner: String,
    pub jacobi_argument_winner: String,
    pub product_constant_winner: String,
}

impl ValidationReport {
    /// Names of the arbitrations that failed to pick a variant.
    pub fn inconclusive(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.spectrum.conclusive() {
            out.push("spectrum_convention");
        }
        if !self.jacobi_argument.conclusive() {
            out.push("jacobi_argument");
        }
        if !self.identity.probe.conclusive() || !self.identity.configured.conclusive() {
            out.push("product_constant");
        }
        out
    }
}

pub fn run_validation(config: &ValidationConfig) -> Result<ValidationReport, OracleError> {
    let p = &config.params;
    let agrid = angular_grid(config.grids.angular_points, config.grids.refinement_levels)?;

    let mut barriers = config.barriers.clone();
    if !barriers.contains(&(p.alpha(), p.beta())) {
        barriers.push((p.alpha(), p.beta()));
    }
    let angular = barriers
        .iter()
        .map(|&(a, b)| angular_check(a, b, config.l1_max + 1, &agrid))
        .collect::<Result<Vec<_>, _>>()?;

    let (pp, ps) = p.exponents();
    let radial = (0..=config.l1_max)
        .map(|l| {
            let lam = p.k_f64() * (2.0 * l as f64 + pp + ps + 1.0);
            radial_check(lam, p.omega(), config.n_radial, config.grids.radial_points, config.grids.refinement_levels)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut ks = config.ks.clone();
    if !ks.contains(&p.k()) {
        ks.push(p.k());
    }
    let spectrum = arbitrate_spectrum(p.omega(), &barriers, &ks, config.l1_max, config.n_radial, &config.grids)?;

    let mut probes = config.argument_probes.clone();
    if !probes.contains(&(p.alpha(), p.beta())) {
        probes.push((p.alpha(), p.beta()));
    }
    let jacobi_argument = arbitrate_jacobi_argument(&probes, config.l1_max, &agrid)?;

    let configured = arbitrate_product_constant(pp, ps, &config.identity_pairs, config.identity_l1_max)?;
    let (a, b) = config.identity_probe;
    let probe = arbitrate_product_constant(a, b, &config.identity_pairs, config.identity_l1_max)?;
    let product_constant_winner = if probe.conclusive() && probe.winner != "indistinguishable-symmetric" {
        probe.winner.clone()
    } else {
        configured.winner.clone()
    };

    Ok(ValidationReport {
        angular,
        radial,
        spectrum_convention_winner: spectrum.winner.clone(),
        jacobi_argument_winner: jacobi_argument.winner.clone(),
        product_constant_winner,
        identity: IdentitySection { configured, probe },
        spectrum,
        jacobi_argument,
    })
}
