//! Classical flow of H = p_r² + p_θ²/r² + ω²r² + V(θ)/r² with
//! V(θ) = k²(α/sin²kθ + β/cos²kθ).
//!
//! There are no ½ factors, so dr/dt = 2p_r and the radial variable s = r²
//! obeys s̈ + 16ω²s = 8E: r² oscillates with period π/(2ω), matching the
//! e^{−2iωt} phases of the quantum amplitudes.

use crate::ode::{Control, Dopri5, OdeError, Step};
use crate::params::PotentialParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("state outside the domain: {0}")]
    Domain(String),
    #[error("tolerance must lie in [1e-12, 1e-6] (got {0:e})")]
    Tolerance(f64),
    #[error("integrator failed: {0}")]
    Integrator(#[from] OdeError),
    #[error("radicand (E/2ω²)² − A/ω² is negative ({0:e})")]
    Radicand(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub r: f64,
    pub theta: f64,
    pub p_r: f64,
    pub p_theta: f64,
}

impl ClassicalState {
    pub fn new(r: f64, theta: f64, p_r: f64, p_theta: f64) -> Self {
        Self { r, theta, p_r, p_theta }
    }

    fn to_array(self) -> [f64; 4] {
        [self.r, self.theta, self.p_r, self.p_theta]
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self::new(y[0], y[1], y[2], y[3])
    }

    /// Same point, momenta reversed.
    pub fn reversed(&self) -> Self {
        Self::new(self.r, self.theta, -self.p_r, -self.p_theta)
    }
}

/// Walls only exist where the barrier is switched on; with α = β = 0 the
/// angle is free.
fn check(s: &ClassicalState, params: &PotentialParams) -> Result<(), ClassicalError> {
    if !(s.r > 0.0 && s.r.is_finite()) {
        return Err(ClassicalError::Domain(format!("r = {} must be > 0", s.r)));
    }
    if ![s.theta, s.p_r, s.p_theta].iter().all(|v| v.is_finite()) {
        return Err(ClassicalError::Domain("non-finite coordinate".into()));
    }
    let k = params.k_f64();
    let (sn, cs) = (k * s.theta).sin_cos();
    if (params.alpha() > 0.0 && sn == 0.0) || (params.beta() > 0.0 && cs == 0.0) {
        return Err(ClassicalError::Domain(format!("θ = {} sits on a wall", s.theta)));
    }
    // an absent wall lets the orbit cross into the mirrored wedge
    let below = params.alpha() > 0.0 && s.theta <= 0.0;
    let above = params.beta() > 0.0 && s.theta >= params.wedge();
    if below || above {
        return Err(ClassicalError::Domain(format!(
            "θ = {} outside (0, {})",
            s.theta,
            params.wedge()
        )));
    }
    Ok(())
}

pub fn hamiltonian(s: &ClassicalState, params: &PotentialParams) -> Result<f64, ClassicalError> {
    check(s, params)?;
    Ok(energy_unchecked(s, params))
}

fn energy_unchecked(s: &ClassicalState, params: &PotentialParams) -> f64 {
    let r2 = s.r * s.r;
    let w = params.omega();
    s.p_r * s.p_r + (s.p_theta * s.p_theta + params.angular_potential(s.theta)) / r2 + w * w * r2
}

/// A = p_θ² + V(θ), which equals k²L².
pub fn angular_charge(s: &ClassicalState, params: &PotentialParams) -> Result<f64, ClassicalError> {
    check(s, params)?;
    Ok(charge_unchecked(s, params))
}

fn charge_unchecked(s: &ClassicalState, params: &PotentialParams) -> f64 {
    s.p_theta * s.p_theta + params.angular_potential(s.theta)
}

/// (dr/dt, dθ/dt, dp_r/dt, dp_θ/dt).
pub fn flow_derivative(s: &ClassicalState, params: &PotentialParams) -> Result<[f64; 4], ClassicalError> {
    check(s, params)?;
    Ok(flow_unchecked(&s.to_array(), params))
}

fn flow_unchecked(y: &[f64; 4], params: &PotentialParams) -> [f64; 4] {
    let [r, theta, p_r, p_theta] = *y;
    let w = params.omega();
    let r2 = r * r;
    let v = params.angular_potential(theta);
    [
        2.0 * p_r,
        2.0 * p_theta / r2,
        2.0 * (p_theta * p_theta + v) / (r2 * r) - 2.0 * w * w * r,
        -params.angular_potential_derivative(theta) / r2,
    ]
}

fn rhs(params: PotentialParams) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    move |_, y| {
        let s = ClassicalState::from_array(*y);
        if check(&s, &params).is_err() {
            return [f64::NAN; 4];
        }
        flow_unchecked(y, &params)
    }
}

/// Radial period π/(2ω) of r².
pub fn radial_period(params: &PotentialParams) -> f64 {
    PI / (2.0 * params.omega())
}

fn solver(tol: f64) -> Result<Dopri5, ClassicalError> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(ClassicalError::Tolerance(tol));
    }
    // the controller runs below the nominal tolerance so that `tol` bounds
    // the drift accumulated over ~100 radial periods
    Ok(Dopri5::new(tol / 100.0, tol * 1e-3)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub state: ClassicalState,
    pub energy: f64,
    pub angular_charge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub energy0: f64,
    pub angular_charge0: f64,
}

impl Trajectory {
    pub fn max_energy_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.energy - self.energy0).abs() / self.energy0.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_charge_drift(&self) -> f64 {
        let scale = self.angular_charge0.abs().max(f64::MIN_POSITIVE);
        self.samples
            .iter()
            .map(|s| (s.angular_charge - self.angular_charge0).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has samples")
    }
}

/// Integrates from t = 0 and records the state at every requested time
/// (ascending, within [0, t_end]) through the dense output.
pub fn integrate_at(
    s0: ClassicalState,
    params: &PotentialParams,
    times: &[f64],
    tol: f64,
) -> Result<Trajectory, ClassicalError> {
    let energy0 = hamiltonian(&s0, params)?;
    let angular_charge0 = angular_charge(&s0, params)?;
    let solver = solver(tol)?;
    let t_end = times.last().copied().unwrap_or(0.0);
    let mut samples = Vec::with_capacity(times.len());
    let mut next = 0;
    let record = |t: f64, y: [f64; 4], samples: &mut Vec<Sample>| {
        let state = ClassicalState::from_array(y);
        samples.push(Sample {
            t,
            state,
            energy: energy_unchecked(&state, params),
            angular_charge: charge_unchecked(&state, params),
        });
    };
    while next < times.len() && times[next] <= 0.0 {
        record(times[next], s0.to_array(), &mut samples);
        next += 1;
    }
    solver.solve(rhs(*params), 0.0, s0.to_array(), t_end, |step: &Step<4>| {
        while next < times.len() && times[next] <= step.t1 {
            let y = if times[next] == step.t1 { step.y1 } else { step.eval(times[next]) };
            record(times[next], y, &mut samples);
            next += 1;
        }
        Control::Continue
    })?;
    Ok(Trajectory {
        samples,
        energy0,
        angular_charge0,
    })
}

/// Samples per radial period used by [`integrate`].
pub const SAMPLES_PER_PERIOD: usize = 64;

/// Integrates over [0, t_end] with uniform samples, 64 per radial period.
pub fn integrate(s0: ClassicalState, params: &PotentialParams, t_end: f64, tol: f64) -> Result<Trajectory, ClassicalError> {
    let n = ((t_end / radial_period(params)) * SAMPLES_PER_PERIOD as f64).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
    integrate_at(s0, params, &times, tol)
}

/// r²(t) = E/(2ω²) + √((E/(2ω²))² − A/ω²) sin 4ω(t − t₀).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSquare {
    pub energy: f64,
    pub angular_charge: f64,
    pub omega: f64,
    pub t0: f64,
}

impl RadialSquare {
    /// (E, A, t₀) straight from the initial state: with s = r² and
    /// ṡ = 4r p_r, s(0) − m = R sin(−4ωt₀) and ṡ(0) = 4ωR cos(−4ωt₀).
    pub fn from_state(s0: &ClassicalState, params: &PotentialParams) -> Result<Self, ClassicalError> {
        let energy = hamiltonian(s0, params)?;
        let angular_charge = angular_charge(s0, params)?;
        let w = params.omega();
        let mean = energy / (2.0 * w * w);
        let s = s0.r * s0.r;
        let s_dot = 4.0 * s0.r * s0.p_r;
        let t0 = -(s - mean).atan2(s_dot / (4.0 * w)) / (4.0 * w);
        Ok(Self {
            energy,
            angular_charge,
            omega: w,
            t0,
        })
    }

    pub fn mean(&self) -> f64 {
        self.energy / (2.0 * self.omega * self.omega)
    }

    pub fn amplitude(&self) -> Result<f64, ClassicalError> {
        let m = self.mean();
        let rad = m * m - self.angular_charge / (self.omega * self.omega);
        // a circular orbit computed in floating point can land a hair below 0
        if rad < -1e-12 * m * m {
            return Err(ClassicalError::Radicand(rad));
        }
        Ok(rad.max(0.0).sqrt())
    }

    pub fn eval(&self, t: f64) -> Result<f64, ClassicalError> {
        Ok(self.mean() + self.amplitude()? * (4.0 * self.omega * (t - self.t0)).sin())
    }
}

/// max |s̈ + 16ω²s − 8E| / (8E) over interior samples, with s̈ from the
/// five-point stencil. Samples must be uniformly spaced.
pub fn harmonicity_residual(traj: &Trajectory, omega: f64) -> Option<f64> {
    let s: Vec<f64> = traj.samples.iter().map(|x| x.state.r * x.state.r).collect();
    if s.len() < 5 {
        return None;
    }
    let h = traj.samples[1].t - traj.samples[0].t;
    let e = traj.energy0;
    let mut worst = 0.0_f64;
    for i in 2..s.len() - 2 {
        let d2 = (-s[i + 2] + 16.0 * s[i + 1] - 30.0 * s[i] + 16.0 * s[i - 1] - s[i - 2]) / (12.0 * h * h);
        worst = worst.max((d2 + 16.0 * omega * omega * s[i] - 8.0 * e).abs() / (8.0 * e));
    }
    Some(worst)
}

/// A return to the reference section crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Closure {
    /// Time from the reference crossing to the closing crossing.
    pub time: f64,
    pub radial_periods: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    pub closure: Option<Closure>,
    /// Smallest normalized distance seen at any later crossing.
    pub best_residual: Option<f64>,
    pub crossings: usize,
    /// (r_max, π/(2k), |p_r|max, |p_θ|max) over the first radial period.
    pub scales: [f64; 4],
}

/// Phase-space distance normalized by the scales; θ is compared modulo
/// π/k, the period of the angular potential.
pub fn normalized_distance(a: &ClassicalState, b: &ClassicalState, scales: &[f64; 4], k: f64) -> f64 {
    let period = PI / k;
    let mut dt = (a.theta - b.theta).rem_euclid(period);
    if dt > 0.5 * period {
        dt -= period;
    }
    let d = [a.r - b.r, dt, a.p_r - b.p_r, a.p_theta - b.p_theta];
    d.iter().zip(scales).map(|(x, s)| (x / s) * (x / s)).sum::<f64>().sqrt()
}

const SECTION_TOL: f64 = 1e-14;

/// Finds the first return to the reference state on the section p_r = 0
/// with p_r increasing (the inner turning point). The reference is the
/// first section crossing after t = 0; closure is the first later crossing
/// within `tol` of it, up to `max_radial_periods` radial periods.
pub fn closure_detect(
    s0: ClassicalState,
    params: &PotentialParams,
    max_radial_periods: usize,
    tol: f64,
) -> Result<ClosureReport, ClassicalError> {
    check(&s0, params)?;
    let period = radial_period(params);
    let k = params.k_f64();
    // the reference crossing can take up to one period to appear
    let t_end = (max_radial_periods + 1) as f64 * period;
    let solver = solver(1e-11)?;

    let mut scales = [0.0_f64, PI / (2.0 * k), 0.0, 0.0];
    let mut reference: Option<(f64, ClassicalState)> = None;
    let mut crossings = 0;
    let mut best: Option<f64> = None;
    let mut closure = None;
    let mut scan_err: Option<ClassicalError> = None;

    solver.solve(rhs(*params), 0.0, s0.to_array(), t_end, |step: &Step<4>| {
        if step.t0 < period {
            for j in 0..=8 {
                let t = step.t0 + (step.t1 - step.t0) * j as f64 / 8.0;
                if t > period {
                    break;
                }
                let y = step.eval(t);
                scales[0] = scales[0].max(y[0].abs());
                scales[2] = scales[2].max(y[2].abs());
                scales[3] = scales[3].max(y[3].abs());
            }
        }
        if !(step.y0[2] < 0.0 && step.y1[2] >= 0.0) {
            return Control::Continue;
        }
        let t_cross = section_time(step);
        let state = ClassicalState::from_array(step.eval(t_cross));
        crossings += 1;
        match reference {
            None => reference = Some((t_cross, state)),
            Some((t_ref, ref_state)) => {
                if t_cross - t_ref > max_radial_periods as f64 * period * (1.0 + 1e-9) {
                    return Control::Stop;
                }
                if step.t0 < period {
                    return Control::Continue;
                }
                let sc = fill_scales(scales);
                let d = normalized_distance(&state, &ref_state, &sc, k);
                if !d.is_finite() {
                    scan_err = Some(ClassicalError::Domain("non-finite state at section".into()));
                    return Control::Stop;
                }
                best = Some(best.map_or(d, |b: f64| b.min(d)));
                if d < tol {
                    let time = t_cross - t_ref;
                    closure = Some(Closure {
                        time,
                        radial_periods: time / period,
                        residual: d,
                    });
                    return Control::Stop;
                }
            }
        }
        Control::Continue
    })?;
    if let Some(e) = scan_err {
        return Err(e);
    }
    Ok(ClosureReport {
        closure,
        best_residual: best,
        crossings,
        scales: fill_scales(scales),
    })
}

fn fill_scales(mut s: [f64; 4]) -> [f64; 4] {
    for v in s.iter_mut() {
        if *v <= 0.0 {
            *v = 1.0;
        }
    }
    s
}

/// Root of p_r on the dense output of one step, by safeguarded secant.
fn section_time(step: &Step<4>) -> f64 {
    let (mut a, mut b) = (step.t0, step.t1);
    let (mut fa, mut fb) = (step.y0[2], step.y1[2]);
    let scale = fa.abs().max(fb.abs());
    for _ in 0..100 {
        let mut t = b - fb * (b - a) / (fb - fa);
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
        let ft = step.eval(t)[2];
        if ft.abs() <= SECTION_TOL * scale || b - a <= 1e-15 * b.abs() {
            return t;
        }
        if ft < 0.0 {
            a = t;
            fa = ft;
        } else {
            b = t;
            fb = ft;
        }
    }
    0.5 * (a + b)
}

/// A state on the orbit with energy E and angular charge A, starting at
/// angle θ₀ with p_θ ≥ 0 and at radius r₀ with p_r ≥ 0.
pub fn state_from_charges(
    params: &PotentialParams,
    energy: f64,
    charge: f64,
    theta0: f64,
    r0: f64,
) -> Result<ClassicalState, ClassicalError> {
    let v = params.angular_potential(theta0);
    let pt2 = charge - v;
    if pt2 < -1e-12 * charge.abs() {
        return Err(ClassicalError::Domain(format!("A = {charge} below V(θ₀) = {v}")));
    }
    let w = params.omega();
    let pr2 = energy - charge / (r0 * r0) - w * w * r0 * r0;
    if pr2 < -1e-12 * energy.abs() {
        return Err(ClassicalError::Domain(format!("r₀ = {r0} outside the radial well")));
    }
    let s = ClassicalState::new(r0, theta0, pr2.max(0.0).sqrt(), pt2.max(0.0).sqrt());
    check(&s, params)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn params(alpha: f64, beta: f64, k: &str) -> PotentialParams {
        PotentialParams::new(1.0, alpha, beta, k.parse().unwrap()).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let s = ClassicalState::new(1.0, FRAC_PI_4, 0.0, 0.0);
        assert!((hamiltonian(&s, &params(0.0, 0.0, "1")).unwrap() - 1.0).abs() < 1e-15);
        assert!((hamiltonian(&s, &params(1.0, 1.0, "1")).unwrap() - 5.0).abs() < 1e-14);
        let s = ClassicalState::new(1.0, PI / 8.0, 0.0, 0.0);
        assert!((hamiltonian(&s, &params(1.0, 0.0, "2")).unwrap() - 9.0).abs() < 1e-13);
        assert!(hamiltonian(&ClassicalState::new(1.0, 0.0, 0.0, 0.0), &params(1.0, 0.0, "1")).is_err());
        assert!(hamiltonian(&ClassicalState::new(0.0, 0.3, 0.0, 0.0), &params(0.0, 0.0, "1")).is_err());
    }

    #[test]
    fn angular_charge_examples() {
        let s = ClassicalState::new(1.3, 0.4, 0.2, 2.0);
        assert_eq!(angular_charge(&s, &params(0.0, 0.0, "1")).unwrap(), 4.0);
        for k in ["1", "2", "3/2"] {
            let p = params(1.0, 1.0, k);
            let s = ClassicalState::new(1.0, PI / (4.0 * p.k_f64()), 0.0, 0.0);
            let kf = p.k_f64();
            assert!((angular_charge(&s, &p).unwrap() - 4.0 * kf * kf).abs() < 1e-12);
        }
    }

    #[test]
    fn flow_examples() {
        let p = params(1.0, 2.0, "3/2");
        let a = 30.0;
        let theta = p.angular_minimum();
        let rc = (a / (p.omega() * p.omega())).sqrt().sqrt();
        let pt = (a - p.angular_potential(theta)).sqrt();
        let d = flow_derivative(&ClassicalState::new(rc, theta, 0.0, pt), &p).unwrap();
        assert_eq!(d[0], 0.0);
        assert!(d[2].abs() < 1e-12);
        let free = flow_derivative(&ClassicalState::new(1.0, 0.3, 0.1, 0.7), &params(0.0, 0.0, "2")).unwrap();
        assert_eq!(free[3], 0.0);
        let p = params(1.5, 1.5, "2");
        let mid = flow_derivative(&ClassicalState::new(1.0, PI / 8.0, 0.0, 0.3), &p).unwrap();
        assert!(mid[3].abs() < 1e-12);
    }

    #[test]
    fn radial_line_returns_after_one_period() {
        let p = params(0.0, 0.0, "1");
        // nearly radial: the angle sweeps slowly while r² keeps its period
        let s0 = ClassicalState::new(1.2, 0.3, 0.4, 0.05);
        let t = radial_period(&p);
        let traj = integrate_at(s0, &p, &[0.0, t], 1e-10).unwrap();
        let r2 = traj.last().state.r.powi(2);
        assert!((r2 - 1.44).abs() < 1e-8, "{r2}");
    }

    #[test]
    fn closed_form_circular_orbit() {
        let p = params(0.0, 0.0, "1");
        let rs = RadialSquare {
            energy: 4.0,
            angular_charge: 4.0,
            omega: 1.0,
            t0: 0.3,
        };
        assert_eq!(rs.amplitude().unwrap(), 0.0);
        assert_eq!(rs.eval(1.7).unwrap(), 2.0);
        let rs = RadialSquare { angular_charge: 3.0, ..rs };
        assert!((rs.eval(0.3).unwrap() - 2.0).abs() < 1e-15);
        let bad = RadialSquare { angular_charge: 5.0, ..rs };
        assert!(bad.eval(0.0).is_err());
        let _ = p;
    }

    #[test]
    fn rejects_bad_tolerance() {
        let s0 = ClassicalState::new(1.0, 0.3, 0.0, 0.5);
        assert!(matches!(
            integrate(s0, &params(0.0, 0.0, "1"), 1.0, 1e-3),
            Err(ClassicalError::Tolerance(_))
        ));
    }
}
