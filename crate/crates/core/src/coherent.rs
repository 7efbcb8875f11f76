//! Coherent states of the four oscillators behind the TTW system, projected
//! onto fixed L₁₂ and L₃₄.
//!
//! The u-pair (κ₁, κ₂) carries the sin kθ wall and α, the v-pair (λ₁, λ₂)
//! the cos kθ wall and β. Every amplitude rotates as e^{−2iωt}; all
//! expectation values depend on relative phases only, so global phases are
//! dropped throughout.

use crate::classical::ClassicalState;
use crate::conventions::Conventions;
use crate::params::{PotentialParams, QuantumNumbers};
use crate::quadrature::{gauss_jacobi, gauss_laguerre, QuadratureError};
use crate::specfun::{binomial_real, jacobi_unchecked, laguerre_unchecked, ln_gamma};
use crate::spectrum::{angular_norm_sq, eigenstate, SpectrumError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, LN_2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoherentError {
    #[error("charge constraints cannot be met at E = {requested}; need E >= {minimum}")]
    Infeasible { requested: f64, minimum: f64 },
    #[error("constraint violated: L12² = {l12_sq} but the barrier needs {target} (|diff| > 1e-10)")]
    Constraint { l12_sq: f64, target: f64 },
    #[error("truncation too short: {which} tail {ratio:e} exceeds {tol:e}")]
    Truncation { which: &'static str, ratio: f64, tol: f64 },
    #[error("invalid input: {0}")]
    Domain(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

const CONSTRAINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorAmplitudes {
    pub kappa1: Complex64,
    pub kappa2: Complex64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub omega: f64,
}

impl OscillatorAmplitudes {
    pub fn new(kappa1: Complex64, kappa2: Complex64, lambda1: Complex64, lambda2: Complex64, omega: f64) -> Self {
        Self {
            kappa1,
            kappa2,
            lambda1,
            lambda2,
            omega,
        }
    }

    /// Amplitudes at time t: each picks up e^{−2iωt}.
    pub fn evolve(&self, t: f64) -> Self {
        let ph = Complex64::from_polar(1.0, -2.0 * self.omega * t);
        Self {
            kappa1: self.kappa1 * ph,
            kappa2: self.kappa2 * ph,
            lambda1: self.lambda1 * ph,
            lambda2: self.lambda2 * ph,
            omega: self.omega,
        }
    }

    pub fn all(&self) -> [Complex64; 4] {
        [self.kappa1, self.kappa2, self.lambda1, self.lambda2]
    }

    /// κ₁² + κ₂².
    pub fn s_kappa(&self) -> Complex64 {
        self.kappa1 * self.kappa1 + self.kappa2 * self.kappa2
    }

    /// λ₁² + λ₂².
    pub fn s_lambda(&self) -> Complex64 {
        self.lambda1 * self.lambda1 + self.lambda2 * self.lambda2
    }

    pub fn u_weight(&self) -> f64 {
        self.kappa1.norm_sqr() + self.kappa2.norm_sqr()
    }

    pub fn v_weight(&self) -> f64 {
        self.lambda1.norm_sqr() + self.lambda2.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedCharges {
    pub l12: f64,
    pub l34: f64,
    /// Σ|amplitude|²; see [`charges_from_amplitudes`].
    pub energy_over_omega: f64,
    /// κ₁² + κ₂² + λ₁² + λ₂² at t = 0.
    pub kappa_sq: Complex64,
    /// 2δ = arg(κ² + λ²) − π/2.
    pub delta: f64,
    pub k0: Option<Complex64>,
    pub lambda0: Option<Complex64>,
}

impl ConservedCharges {
    /// E = ω Σ|a|².
    pub fn energy(&self, omega: f64) -> f64 {
        omega * self.energy_over_omega
    }

    /// A = ((Σ|a|²)² − |κ² + λ²|²)/4, the classical angular charge.
    pub fn angular_charge(&self) -> f64 {
        (self.energy_over_omega.powi(2) - self.kappa_sq.norm_sqr()) / 4.0
    }

    /// t₀ = δ/(2ω).
    pub fn t0(&self, omega: f64) -> f64 {
        self.delta / (2.0 * omega)
    }
}

fn minus_im(a: Complex64, b: Complex64) -> f64 {
    // −(ab* − ba*)/(2i) = −Im(ab*)
    let num = a * b.conj() - b * a.conj();
    -(num / Complex64::new(0.0, 2.0)).re
}

fn ratio_root(first: Complex64, second: Complex64) -> Option<Complex64> {
    let i = Complex64::i();
    let den = second - i * first;
    if den.norm() <= 1e-300 {
        return None;
    }
    Some(((second + i * first) / den).sqrt())
}

/// Conserved quantities of a set of amplitudes.
///
/// The energy is E/ω = Σ|a|², not the half-sum: the mean of
/// ω⟨r²⟩ must equal E/(2ω), which fixes the normalization. K₀ and Λ₀ are
/// `None` when their denominator vanishes.
pub fn charges_from_amplitudes(a: &OscillatorAmplitudes) -> ConservedCharges {
    let kappa_sq = a.s_kappa() + a.s_lambda();
    ConservedCharges {
        l12: minus_im(a.kappa1, a.kappa2),
        l34: minus_im(a.lambda1, a.lambda2),
        energy_over_omega: a.u_weight() + a.v_weight(),
        kappa_sq,
        delta: 0.5 * (kappa_sq.arg() - FRAC_PI_2),
        k0: ratio_root(a.kappa1, a.kappa2),
        lambda0: ratio_root(a.lambda1, a.lambda2),
    }
}

/// Amplitudes with L₁₂ = k√(α+¼), L₃₄ = k√(β+¼) and E/ω = e_target/ω.
///
/// Each pair gets equal moduli; `split` is the u-pair's share of E/ω. The
/// phase difference inside a pair is the one that makes ρ² sin(φ₂−φ₁) hit
/// the target.
pub fn constrain_amplitudes(
    e_target: f64,
    params: &PotentialParams,
    phase_u: f64,
    phase_v: f64,
    split: f64,
) -> Result<OscillatorAmplitudes, CoherentError> {
    if !(split > 0.0 && split < 1.0) {
        return Err(CoherentError::Domain(format!("split must lie in (0, 1) (got {split})")));
    }
    if !(e_target.is_finite() && e_target > 0.0) {
        return Err(CoherentError::Domain(format!("energy must be > 0 (got {e_target})")));
    }
    let w = params.omega();
    let k = params.k_f64();
    let (pp, ps) = params.exponents();
    let (tu, tv) = (k * pp, k * ps);
    let minimum = w * (2.0 * tu / split).max(2.0 * tv / (1.0 - split));
    let rho_u2 = split * e_target / w / 2.0;
    let rho_v2 = (1.0 - split) * e_target / w / 2.0;
    if tu > rho_u2 * (1.0 + 1e-14) || tv > rho_v2 * (1.0 + 1e-14) {
        return Err(CoherentError::Infeasible {
            requested: e_target,
            minimum,
        });
    }
    let pair = |rho2: f64, target: f64, phase: f64| {
        let gap = (target / rho2).min(1.0).asin();
        let rho = rho2.sqrt();
        (Complex64::from_polar(rho, phase), Complex64::from_polar(rho, phase + gap))
    };
    let (kappa1, kappa2) = pair(rho_u2, tu, phase_u);
    let (lambda1, lambda2) = pair(rho_v2, tv, phase_v);
    Ok(OscillatorAmplitudes::new(kappa1, kappa2, lambda1, lambda2, w))
}

fn check_constraint(l: f64, shifted: f64) -> Result<(), CoherentError> {
    let target = shifted;
    if (l * l - target).abs() > CONSTRAINT_TOL * target.max(1.0) {
        return Err(CoherentError::Constraint { l12_sq: l * l, target });
    }
    Ok(())
}

fn pair_square(weight: f64, s: Complex64, target: f64, omega: f64, t: f64) -> f64 {
    let bracket = (weight * weight / 4.0 - target).max(0.0);
    weight / 2.0 + bracket.sqrt() * (4.0 * omega * t - s.arg()).cos()
}

/// ⟨u⟩²_t for k = 1 with the constraint L₁₂² = α + ¼:
/// (|κ₁|²+|κ₂|²)/2 + [(|κ₁|²+|κ₂|²)²/4 − (α+¼)]^{½} cos(4ωt − 2φ),
/// where 2φ = arg(κ₁² + κ₂²).
pub fn expectation_u2(a: &OscillatorAmplitudes, t: f64, alpha: f64) -> Result<f64, CoherentError> {
    let c = charges_from_amplitudes(a);
    check_constraint(c.l12, alpha + 0.25)?;
    Ok(pair_square(a.u_weight(), a.s_kappa(), alpha + 0.25, a.omega, t))
}

/// Mirror of [`expectation_u2`] for the v-pair, λ and β.
pub fn expectation_v2(a: &OscillatorAmplitudes, t: f64, beta: f64) -> Result<f64, CoherentError> {
    let c = charges_from_amplitudes(a);
    check_constraint(c.l34, beta + 0.25)?;
    Ok(pair_square(a.v_weight(), a.s_lambda(), beta + 0.25, a.omega, t))
}

/// ⟨r⟩²_t = E/(2ω²) + [(E/(2ω²))² − A/ω²]^{½} sin 4ω(t − t₀).
pub fn expectation_r2(e: f64, a: f64, omega: f64, t: f64, t0: f64) -> Result<f64, CoherentError> {
    let m = e / (2.0 * omega * omega);
    let rad = m * m - a / (omega * omega);
    if rad < -1e-12 * m * m {
        return Err(CoherentError::Domain(format!("negative radicand {rad:e}")));
    }
    Ok(m + rad.max(0.0).sqrt() * (4.0 * omega * (t - t0)).sin())
}

/// ⟨r⟩²_t straight from the amplitudes.
pub fn expectation_r2_of(a: &OscillatorAmplitudes, t: f64) -> Result<f64, CoherentError> {
    let c = charges_from_amplitudes(a);
    expectation_r2(c.energy(a.omega), c.angular_charge(), a.omega, t, c.t0(a.omega))
}

/// [`expectation_u2`] under the k-scaled constraint L₁₂² = k²(α+¼); equal
/// to it at k = 1.
pub fn expectation_u2_scaled(a: &OscillatorAmplitudes, params: &PotentialParams, t: f64) -> Result<f64, CoherentError> {
    let target = params.k_f64().powi(2) * (params.alpha() + 0.25);
    check_constraint(charges_from_amplitudes(a).l12, target)?;
    Ok(pair_square(a.u_weight(), a.s_kappa(), target, a.omega, t))
}

/// Mirror of [`expectation_u2_scaled`].
pub fn expectation_v2_scaled(a: &OscillatorAmplitudes, params: &PotentialParams, t: f64) -> Result<f64, CoherentError> {
    let target = params.k_f64().powi(2) * (params.beta() + 0.25);
    check_constraint(charges_from_amplitudes(a).l34, target)?;
    Ok(pair_square(a.v_weight(), a.s_lambda(), target, a.omega, t))
}

/// ⟨sin kθ⟩²_t = ⟨u⟩²_t / (ω⟨r⟩²_t), with the u-pair constraint taken in
/// its k-scaled form L₁₂² = k²(α+¼).
pub fn expectation_sin2_theta(a: &OscillatorAmplitudes, params: &PotentialParams, t: f64) -> Result<f64, CoherentError> {
    let u2 = expectation_u2_scaled(a, params, t)?;
    let r2 = expectation_r2_of(a, t)?;
    let den = a.omega * r2;
    if den <= 0.0 {
        return Err(CoherentError::Domain("⟨r⟩² vanishes".into()));
    }
    Ok(u2 / den)
}

/// Classical TTW state (k = 1) traced by the oscillator centres at time t.
///
/// The centres are u_i = Re κ_i(t), v_i = Re λ_i(t) with momenta
/// √ω Im κ_i(t); x = |u|/√ω and y = |v|/√ω are the Cartesian coordinates
/// with x = r sin θ.
pub fn classical_state(a: &OscillatorAmplitudes, t: f64) -> Result<ClassicalState, CoherentError> {
    let e = a.evolve(t);
    let w = a.omega;
    let sw = w.sqrt();
    let plane = |c1: Complex64, c2: Complex64| {
        let rho = (c1.re * c1.re + c2.re * c2.re).sqrt();
        let p = (c1.re * c1.im + c2.re * c2.im) / rho;
        (rho / sw, sw * p)
    };
    let (x, px) = plane(e.kappa1, e.kappa2);
    let (y, py) = plane(e.lambda1, e.lambda2);
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(CoherentError::Domain("oscillator centre on a wall".into()));
    }
    let r = x.hypot(y);
    let theta = x.atan2(y);
    let p_r = (x * px + y * py) / r;
    let p_theta = px * y - py * x;
    Ok(ClassicalState::new(r, theta, p_r, p_theta))
}

// ------------------------------------------------------------------ series

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    pub l1_max: usize,
    pub nr_max: usize,
    pub tail_tol: f64,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self {
            l1_max: 24,
            nr_max: 48,
            tail_tol: 1e-8,
        }
    }
}

impl SeriesTruncation {
    pub fn validate(&self) -> Result<(), CoherentError> {
        if self.l1_max < 1 || self.nr_max < 1 || !(self.tail_tol > 0.0) {
            return Err(CoherentError::Domain(format!("invalid truncation {self:?}")));
        }
        Ok(())
    }
}

/// One term of the expansion over normalized eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficient {
    pub l1: usize,
    pub n_r: usize,
    /// Value at t = 0.
    pub value: Complex64,
    /// Phase rate in units of 4ω: the coefficient at t is
    /// value · e^{−4iωt·rate}, rate = k l₁ + n_r.
    pub rate: f64,
}

/// Tail magnitudes relative to the whole truncated state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailReport {
    pub last_shell: f64,
    pub last_radial: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentGrid {
    pub radial_order: usize,
    pub angular_order: usize,
}

impl Default for MomentGrid {
    fn default() -> Self {
        Self {
            radial_order: 160,
            angular_order: 64,
        }
    }
}

/// Coefficient table plus the quadrature grid used for normalization and
/// moments. The table is built once per (amplitudes, truncation).
#[derive(Debug, Clone)]
pub struct CoherentState {
    params: PotentialParams,
    conventions: Conventions,
    omega: f64,
    pub coefficients: Vec<Coefficient>,
    pub tail: TailReport,
    /// ∫|Ψ|² of the truncated state with unit-normalized coefficients,
    /// before rescaling; close to 1 by orthonormality.
    pub raw_norm: f64,
    lmax: usize,
    nmax: usize,
    // per-node values: radial[l][n][i] and angular[l][j], scaled by √weight
    radial: Vec<Vec<Vec<f64>>>,
    angular: Vec<Vec<f64>>,
    x_nodes: Vec<f64>,
    x_weights: Vec<f64>,
    y_nodes: Vec<f64>,
    y_weights: Vec<f64>,
    eig_norm: Vec<Vec<f64>>,
}

/// H_l(S_κ, S_λ) = Σ_s C(l+a, l−s) C(l+b, s) (−S_κ)^s S_λ^{l−s}; equals
/// S^l P_l^{(a,b)}((S_λ − S_κ)/S) and stays finite as S → 0.
fn homogeneous_jacobi(l: usize, a: f64, b: f64, s_kappa: Complex64, s_lambda: Complex64) -> Complex64 {
    let lf = l as f64;
    (0..=l)
        .map(|s| {
            binomial_real(lf + a, l - s) * binomial_real(lf + b, s) * (-s_kappa).powu(s as u32) * s_lambda.powu((l - s) as u32)
        })
        .sum()
}

impl CoherentState {
    pub fn new(
        a: &OscillatorAmplitudes,
        params: &PotentialParams,
        conventions: Conventions,
        trunc: SeriesTruncation,
        grid: MomentGrid,
    ) -> Result<Self, CoherentError> {
        trunc.validate()?;
        if (a.omega - params.omega()).abs() > 1e-12 * params.omega() {
            return Err(CoherentError::Domain("amplitude ω differs from the potential's ω".into()));
        }
        let k = params.k_f64();
        let (pa, pb) = params.exponents();
        let omega = params.omega();
        let (s_kappa, s_lambda) = (a.s_kappa(), a.s_lambda());
        let z0 = -(s_kappa + s_lambda) / 4.0;
        let (lmax, nmax) = (trunc.l1_max, trunc.nr_max);
        let ang_order = (lmax + 2).max(grid.angular_order);

        // ln|coefficient| and phase relative to normalized eigenstates
        let mut terms: Vec<(usize, usize, f64, f64, f64)> = Vec::new();
        let mut ang_norm = Vec::with_capacity(lmax + 1);
        for l in 0..=lmax {
            ang_norm.push(angular_norm_sq(l, params, conventions.jacobi, ang_order)?);
        }
        for l in 0..=lmax {
            let lf = l as f64;
            let lam = k * (2.0 * lf + pa + pb + 1.0);
            let (sign_c, ln_c) = conventions.constant.coefficient(pa, pb, l);
            let h = homogeneous_jacobi(l, pa, pb, s_kappa, s_lambda);
            if h.norm() == 0.0 {
                continue;
            }
            let sign = sign_c * if l % 2 == 0 { 1.0 } else { -1.0 };
            for n in 0..=nmax {
                let gamma = (k - 1.0) * lf + n as f64;
                let (ln_z, arg_z) = if gamma == 0.0 {
                    (0.0, 0.0)
                } else if z0.norm() == 0.0 {
                    continue;
                } else {
                    (gamma * z0.norm().ln(), gamma * z0.arg())
                };
                let nf = n as f64;
                let ln_radial_norm = 0.5 * (lg(nf + lam + 1.0) - lg(nf + 1.0) - (2.0 * omega).ln());
                let ln_mag = ln_c - 2.0 * lf * LN_2 + h.norm().ln() + ln_z - lg(nf + lam + 1.0)
                    + ln_radial_norm
                    + 0.5 * ang_norm[l].ln();
                let phase = h.arg() + arg_z + if sign < 0.0 { std::f64::consts::PI } else { 0.0 };
                terms.push((l, n, ln_mag, phase, k * lf + nf));
            }
        }
        if terms.is_empty() {
            return Err(CoherentError::Domain("all series coefficients vanish".into()));
        }
        let ln_max = terms.iter().map(|t| t.2).fold(f64::NEG_INFINITY, f64::max);
        let mut coefficients: Vec<Coefficient> = terms
            .iter()
            .map(|&(l1, n_r, ln_mag, phase, rate)| Coefficient {
                l1,
                n_r,
                value: Complex64::from_polar((ln_mag - ln_max).exp(), phase),
                rate,
            })
            .collect();
        let total: f64 = coefficients.iter().map(|c| c.value.norm_sqr()).sum();
        for c in coefficients.iter_mut() {
            c.value /= total.sqrt();
        }

        let shell: f64 = coefficients.iter().filter(|c| c.l1 == lmax).map(|c| c.value.norm_sqr()).sum();
        let radial_tail = (0..=lmax)
            .map(|l| {
                coefficients
                    .iter()
                    .filter(|c| c.l1 == l && c.n_r == nmax)
                    .map(|c| c.value.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let tail = TailReport {
            last_shell: shell.sqrt(),
            last_radial: radial_tail,
        };

        // quadrature grid: x = ωr² with weight x^{λ₀}e^{−x}, y = cos 2kθ
        let lam0 = k * (pa + pb + 1.0);
        let xr = gauss_laguerre(grid.radial_order, lam0)?;
        let yr = gauss_jacobi(ang_order, pa, pb)?;
        let mut radial = vec![vec![Vec::new(); nmax + 1]; lmax + 1];
        for (l, per_l) in radial.iter_mut().enumerate() {
            let lam = k * (2.0 * l as f64 + pa + pb + 1.0);
            for (n, row) in per_l.iter_mut().enumerate() {
                let nf = n as f64;
                // normalized radial function over √(x^{λ₀}e^{−x}/Γ(λ₀+1)),
                // measure r dr = dx/(2ω) folded in
                let ln_c = 0.5 * (lg(nf + 1.0) - lg(nf + lam + 1.0) + xr.ln_mu0);
                *row = xr
                    .nodes
                    .iter()
                    .map(|&x| {
                        let lv = laguerre_unchecked(n, lam, x);
                        if lv == 0.0 {
                            return 0.0;
                        }
                        lv.signum() * (ln_c + 0.5 * (lam - lam0) * x.ln() + lv.abs().ln()).exp()
                    })
                    .collect();
            }
        }
        let ang_scale = yr.mu0() * 2f64.powf(-(pa + pb)) / (4.0 * k);
        let angular: Vec<Vec<f64>> = (0..=lmax)
            .map(|l| {
                let c = (ang_scale / ang_norm[l]).sqrt();
                yr.nodes
                    .iter()
                    .map(|&y| c * jacobi_unchecked(l, pa, pb, conventions.jacobi.from_cos2(y)))
                    .collect()
            })
            .collect();

        let eig_norm = (0..=lmax)
            .map(|l| {
                let lam = k * (2.0 * l as f64 + pa + pb + 1.0);
                (0..=nmax)
                    .map(|n| {
                        let nf = n as f64;
                        let ln_rad = 0.5 * (lg(nf + lam + 1.0) - lg(nf + 1.0) - (2.0 * omega).ln());
                        (-(ln_rad + 0.5 * ang_norm[l].ln())).exp()
                    })
                    .collect()
            })
            .collect();

        let mut state = Self {
            params: *params,
            conventions,
            omega,
            coefficients,
            tail,
            raw_norm: 0.0,
            lmax,
            nmax,
            radial,
            angular,
            x_nodes: xr.nodes,
            x_weights: xr.weights,
            y_nodes: yr.nodes,
            y_weights: yr.weights,
            eig_norm,
        };
        // N from the quadrature of the truncated state
        let norm = state.moments(0.0).norm;
        state.raw_norm = norm;
        for c in state.coefficients.iter_mut() {
            c.value /= norm.sqrt();
        }
        Ok(state)
    }

    pub fn params(&self) -> &PotentialParams {
        &self.params
    }

    /// Errors when either tail exceeds the truncation tolerance.
    pub fn check_tail(&self, tol: f64) -> Result<(), CoherentError> {
        for (which, ratio) in [("l1 shell", self.tail.last_shell), ("radial", self.tail.last_radial)] {
            if ratio > tol {
                return Err(CoherentError::Truncation { which, ratio, tol });
            }
        }
        Ok(())
    }

    pub fn coefficient_at(&self, c: &Coefficient, t: f64) -> Complex64 {
        c.value * Complex64::from_polar(1.0, -4.0 * self.omega * t * c.rate)
    }

    /// Ψ(r, θ, t) as a sum over normalized eigenstates.
    pub fn eval(&self, t: f64, r: f64, theta: f64) -> Complex64 {
        self.coefficients
            .iter()
            .map(|c| {
                let qn = QuantumNumbers::new(c.n_r, c.l1);
                let psi = eigenstate(qn, &self.params, r, theta, self.conventions.jacobi) * self.eig_norm[c.l1][c.n_r];
                self.coefficient_at(c, t) * psi
            })
            .sum()
    }

    /// Values of Ψ(t) at the quadrature nodes, over √weight.
    fn node_values(&self, t: f64) -> Vec<Vec<Complex64>> {
        let nx = self.x_nodes.len();
        let mut per_l = vec![vec![Complex64::new(0.0, 0.0); nx]; self.lmax + 1];
        for c in &self.coefficients {
            let v = self.coefficient_at(c, t);
            let row = &self.radial[c.l1][c.n_r];
            for (acc, &f) in per_l[c.l1].iter_mut().zip(row) {
                *acc += v * f;
            }
        }
        let ny = self.y_nodes.len();
        (0..nx)
            .map(|i| {
                (0..ny)
                    .map(|j| (0..=self.lmax).map(|l| per_l[l][i] * self.angular[l][j]).sum())
                    .collect()
            })
            .collect()
    }

    /// ∫|Ψ|², ⟨ωr²⟩ and ⟨sin²kθ⟩ by tensor quadrature at time t.
    pub fn moments(&self, t: f64) -> Moments {
        let vals = self.node_values(t);
        let (mut norm, mut x_mom, mut s_mom) = (0.0, 0.0, 0.0);
        for (i, row) in vals.iter().enumerate() {
            let x = self.x_nodes[i];
            let wx = self.x_weights[i];
            for (j, v) in row.iter().enumerate() {
                let w = wx * self.y_weights[j] * v.norm_sqr();
                norm += w;
                x_mom += w * x;
                s_mom += w * 0.5 * (1.0 - self.y_nodes[j]);
            }
        }
        Moments {
            norm,
            omega_r2: x_mom / norm,
            sin2_theta: s_mom / norm,
        }
    }

    /// ⟨r²⟩ of the truncated series.
    pub fn expectation_r2(&self, t: f64) -> f64 {
        self.moments(t).omega_r2 / self.omega
    }

    /// ⟨φ_{n,l}|Ψ(t)⟩ by the same tensor quadrature.
    pub fn project(&self, qn: QuantumNumbers, t: f64) -> Option<Complex64> {
        if qn.l1 > self.lmax || qn.n_r > self.nmax {
            return None;
        }
        let vals = self.node_values(t);
        let rad = &self.radial[qn.l1][qn.n_r];
        let ang = &self.angular[qn.l1];
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, row) in vals.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                acc += self.x_weights[i] * self.y_weights[j] * rad[i] * ang[j] * v;
            }
        }
        Some(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub norm: f64,
    pub omega_r2: f64,
    pub sin2_theta: f64,
}

/// Ψ(r, θ, t) for one point; builds the table each call and enforces the
/// tail tolerance.
pub fn coherent_eval(
    a: &OscillatorAmplitudes,
    params: &PotentialParams,
    t: f64,
    r: f64,
    theta: f64,
    trunc: SeriesTruncation,
) -> Result<Complex64, CoherentError> {
    let state = CoherentState::new(a, params, Conventions::default(), trunc, MomentGrid::default())?;
    state.check_tail(trunc.tail_tol)?;
    Ok(state.eval(t, r, theta))
}

fn lg(x: f64) -> f64 {
    ln_gamma(x).expect("positive Gamma argument")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit() -> OscillatorAmplitudes {
        OscillatorAmplitudes::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), 1.0)
    }

    #[test]
    fn charge_examples() {
        let a = unit();
        let ch = charges_from_amplitudes(&a);
        assert_eq!(ch.l12, 0.0);
        assert_eq!(ch.energy_over_omega, 4.0);
        let a = OscillatorAmplitudes::new(c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0), 1.0);
        assert!((charges_from_amplitudes(&a).l12 - 1.0).abs() < 1e-15);
        // κ₂ = iκ₁ puts K₀'s denominator at zero
        let a = OscillatorAmplitudes::new(c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(2.0, 0.0), 1.0);
        let ch = charges_from_amplitudes(&a);
        assert!(ch.k0.is_none());
        assert!(ch.lambda0.is_some());
    }

    #[test]
    fn constrain_examples() {
        let p = PotentialParams::new(1.0, 0.75, 0.75, "1".parse().unwrap()).unwrap();
        let a = constrain_amplitudes(4.0, &p, 0.0, 0.0, 0.5).unwrap();
        assert!((a.kappa1.norm() - 1.0).abs() < 1e-15);
        assert!((a.kappa2.arg() - a.kappa1.arg() - FRAC_PI_2).abs() < 1e-12);
        let u0 = expectation_u2(&a, 0.0, 0.75).unwrap();
        let u1 = expectation_u2(&a, 0.37, 0.75).unwrap();
        assert!((u0 - 1.0).abs() < 1e-12 && (u1 - 1.0).abs() < 1e-12);
        let v = expectation_v2(&a, 0.2, 0.75).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let p = PotentialParams::new(1.0, 2.0, 0.0, "1".parse().unwrap()).unwrap();
        match constrain_amplitudes(4.0, &p, 0.0, 0.0, 0.5) {
            Err(CoherentError::Infeasible { minimum, .. }) => assert!((minimum - 6.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(constrain_amplitudes(6.0, &p, 0.0, 0.0, 0.5).is_ok());
        assert!(constrain_amplitudes(6.0, &p, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn expectation_r2_examples() {
        assert_eq!(expectation_r2(4.0, 4.0, 1.0, 0.9, 0.1).unwrap(), 2.0);
        assert_eq!(expectation_r2(4.0, 3.0, 1.0, 0.4, 0.4).unwrap(), 2.0);
        let v = expectation_r2(4.0, 3.0, 1.0, 0.7, 0.4).unwrap();
        assert!((v - (2.0 + (4.0 * 0.3_f64).sin())).abs() < 1e-15);
        assert!(expectation_r2(4.0, 5.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn u2_peaks_at_half_phase() {
        let p = PotentialParams::new(1.3, 0.3, 1.1, "1".parse().unwrap()).unwrap();
        let a = constrain_amplitudes(20.0, &p, 0.4, -0.2, 0.45).unwrap();
        let phi = 0.5 * a.s_kappa().arg();
        let t = phi / (2.0 * a.omega);
        let top = expectation_u2(&a, t, 0.3).unwrap();
        for dt in [-0.05, -0.01, 0.01, 0.05] {
            assert!(expectation_u2(&a, t + dt, 0.3).unwrap() < top);
        }
    }

    #[test]
    fn symmetric_charges_give_half() {
        let p = PotentialParams::new(1.0, 1.2, 1.2, "3/2".parse().unwrap()).unwrap();
        let a = constrain_amplitudes(30.0, &p, 0.3, 0.3, 0.5).unwrap();
        for t in [0.0, 0.2, 0.9] {
            assert!((expectation_sin2_theta(&a, &p, t).unwrap() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn homogeneous_jacobi_matches_jacobi() {
        let (a, b) = (0.5, 1.5);
        let (sk, sl) = (c(0.7, 0.2), c(-0.1, 0.9));
        let s = sk + sl;
        for l in 0..6 {
            let h = homogeneous_jacobi(l, a, b, sk, sl);
            // S^l P_l((S_λ − S_κ)/S), with complex argument via the sum form
            let x = (sl - sk) / s;
            let p: Complex64 = (0..=l)
                .map(|m| {
                    binomial_real(l as f64 + a, l - m)
                        * binomial_real(l as f64 + b, m)
                        * ((x - 1.0) / 2.0).powu(m as u32)
                        * ((x + 1.0) / 2.0).powu((l - m) as u32)
                })
                .sum();
            let expect = s.powu(l as u32) * p;
            assert!((h - expect).norm() < 1e-12 * expect.norm().max(1.0));
        }
        // real argument reduces to the scalar Jacobi polynomial
        let x = 0.3;
        let h = homogeneous_jacobi(3, a, b, c((1.0 - x) / 2.0, 0.0), c((1.0 + x) / 2.0, 0.0));
        assert!((h.re - jacobi_unchecked(3, a, b, x)).abs() < 1e-14);
    }
}
