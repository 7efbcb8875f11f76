//! One function per subcommand. Each writes its data files into the output
//! directory and returns a small JSON summary for the run sidecar.

use anyhow::{bail, Result};
use serde::Serialize;
use serde_json::{json, Value};
use ttw::classical::{self, ClassicalState};
use ttw::coherent::{self, CoherentState, OscillatorAmplitudes};
use ttw::conventions::Conventions;
use ttw::oracle;
use ttw::params::{PotentialParams, QuantumNumbers};
use ttw::specfun::{self, RealParam};
use ttw::spectrum::{self, NormalizedEigenstate};

use crate::config::RunConfig;
use crate::exit::{Inconclusive, Usage};
use crate::output::OutDir;

fn conventions(cfg: &RunConfig) -> Result<Conventions> {
    Ok(Conventions::from_names(&cfg.conventions)?)
}

/// n+1 evenly spaced points on [lo, hi] with both ends hit exactly.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![lo];
    }
    (0..=n)
        .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
        .collect()
}

/// Radius beyond which e^{−ωr²} has dropped below e^{−30} past the
/// classical turning point of energy `e`.
fn default_r_max(e: f64, omega: f64) -> f64 {
    ((e / omega + 30.0) / omega).sqrt()
}

pub fn spectrum(cfg: &RunConfig, out: &mut OutDir) -> Result<Value> {
    let conv = conventions(cfg)?;
    let emax = cfg.spectrum.emax;
    if !emax.is_finite() {
        return Err(Usage(format!("emax must be finite (got {emax})")).into());
    }
    let table = spectrum::enumerate_levels(&cfg.params, emax, conv.spectrum);
    let sizes = table.class_sizes();
    let rows = table.levels.iter().enumerate().map(|(i, level)| {
        let class = table.class_of(i);
        (level.qn.n_r, level.qn.l1, level.energy, class, sizes[class])
    });
    out.write_csv(
        "levels.csv",
        &["n_r", "l1", "energy", "degeneracy_class_id", "class_size"],
        rows,
    )?;
    Ok(json!({
        "levels": table.levels.len(),
        "classes": table.classes.len(),
        "max_class_size": table.max_class_size(),
        "exact_grouping": table.exact,
    }))
}

pub fn eigenstate(cfg: &RunConfig, out: &mut OutDir) -> Result<Value> {
    let conv = conventions(cfg)?;
    let o = &cfg.eigenstate;
    if o.r_points < 2 || o.theta_points < 2 {
        return Err(Usage("eigenstate grids need at least 2 intervals per axis".into()).into());
    }
    let p = &cfg.params;
    let qn = QuantumNumbers::new(o.n_r, o.l1);
    let state = NormalizedEigenstate::new(qn, p, conv.jacobi, o.quadrature_order)?;
    let energy = spectrum::energy(qn, p, conv.spectrum);
    let r_max = o.r_max.unwrap_or_else(|| default_r_max(energy, p.omega()));
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Usage(format!("r_max must be > 0 (got {r_max})")).into());
    }
    let rs = linspace(0.0, r_max, o.r_points);
    let thetas = linspace(0.0, p.wedge(), o.theta_points);
    let mut rows = Vec::with_capacity(rs.len() * thetas.len());
    for &r in &rs {
        for (j, &theta) in thetas.iter().enumerate() {
            // every factor vanishes at the origin and on both walls; cos kθ
            // at the upper wall is only ~1e-17 in floating point
            let wall = r == 0.0 || j == 0 || j + 1 == thetas.len();
            let psi = if wall { 0.0 } else { state.eval(p, r, theta, conv.jacobi) };
            rows.push((r, theta, psi));
        }
    }
    out.write_csv("eigenstate.csv", &["r", "theta", "psi"], rows)?;
    Ok(json!({
        "n_r": o.n_r,
        "l1": o.l1,
        "energy": energy,
        "norm_constant": state.c,
        "r_max": r_max,
    }))
}

fn coherent_amplitudes(cfg: &RunConfig) -> Result<(OscillatorAmplitudes, f64)> {
    let o = &cfg.coherent;
    let p = &cfg.params;
    let (energy, split) = if o.circular {
        let (pp, ps) = p.exponents();
        (2.0 * p.omega() * p.k_f64() * (pp + ps), pp / (pp + ps))
    } else {
        (o.energy, o.split)
    };
    let a = coherent::constrain_amplitudes(energy, p, o.phase_u, o.phase_v, split)?;
    Ok((a, energy))
}

#[derive(Serialize)]
struct CoherentRow {
    t: f64,
    exp_r2_analytic: f64,
    exp_r2_series: f64,
    exp_u2: f64,
    exp_sin2theta: f64,
}

pub fn coherent(cfg: &RunConfig, out: &mut OutDir) -> Result<Value> {
    let conv = conventions(cfg)?;
    let o = &cfg.coherent;
    let p = &cfg.params;
    let (a, energy) = coherent_amplitudes(cfg)?;
    let state = CoherentState::new(&a, p, conv, o.truncation, o.grid)?;
    state.check_tail(o.truncation.tail_tol)?;

    let period = classical::radial_period(p);
    let t_end = o.t_end.unwrap_or(period);
    if !(t_end.is_finite() && t_end >= 0.0) || o.n_times < 2 {
        return Err(Usage("coherent needs t_end >= 0 and n_times >= 2".into()).into());
    }
    let times = linspace(0.0, t_end, o.n_times - 1);
    let mut rows = Vec::with_capacity(times.len());
    let mut offset_sum = 0.0;
    for &t in &times {
        let analytic = coherent::expectation_r2_of(&a, t)?;
        let series = state.expectation_r2(t);
        offset_sum += series - analytic;
        rows.push(CoherentRow {
            t,
            exp_r2_analytic: analytic,
            exp_r2_series: series,
            exp_u2: coherent::expectation_u2_scaled(&a, p, t)?,
            exp_sin2theta: coherent::expectation_sin2_theta(&a, p, t)?,
        });
    }
    let offset = offset_sum / times.len() as f64;
    let spread = rows
        .iter()
        .map(|r| (r.exp_r2_series - r.exp_r2_analytic - offset).abs())
        .fold(0.0, f64::max);
    out.write_csv("coherent.csv", &["t", "exp_r2_analytic", "exp_r2_series", "exp_u2", "exp_sin2theta"], rows)?;

    let coeffs = state
        .coefficients
        .iter()
        .map(|c| (c.l1, c.n_r, c.value.re, c.value.im));
    out.write_csv("coefficients.csv", &["l1", "n_r", "coeff_re", "coeff_im"], coeffs)?;

    if o.snapshots > 0 {
        if o.snapshot_r_points < 1 || o.snapshot_theta_points < 1 {
            return Err(Usage("snapshot grids need at least one interval per axis".into()).into());
        }
        let rs = linspace(0.0, default_r_max(energy, p.omega()), o.snapshot_r_points);
        let thetas = linspace(0.0, p.wedge(), o.snapshot_theta_points);
        let frame_times = if o.snapshots == 1 { vec![0.0] } else { linspace(0.0, t_end, o.snapshots - 1) };
        for (i, &t) in frame_times.iter().enumerate() {
            let mut rows = Vec::with_capacity(rs.len() * thetas.len());
            for &r in &rs {
                for &theta in &thetas {
                    rows.push((t, r, theta, state.eval(t, r, theta).norm_sqr()));
                }
            }
            out.write_csv(&format!("snapshot_{i:04}.csv"), &["t", "r", "theta", "density"], rows)?;
        }
    }

    let charges = coherent::charges_from_amplitudes(&a);
    Ok(json!({
        "energy": energy,
        "angular_charge": charges.angular_charge(),
        "t0": charges.t0(p.omega()),
        "series_norm_before_normalization": state.raw_norm,
        "tail_last_shell": state.tail.last_shell,
        "tail_last_radial": state.tail.last_radial,
        "series_minus_analytic_r2_mean": offset,
        "series_minus_analytic_r2_spread": spread,
    }))
}

fn classical_initial(cfg: &RunConfig) -> Result<ClassicalState> {
    let o = &cfg.classical;
    let p = &cfg.params;
    if let Some(s) = o.initial {
        return Ok(ClassicalState::new(s.r, s.theta, s.p_r, s.p_theta));
    }
    let w = p.omega();
    let k = p.k_f64();
    let charge = o.charge.unwrap_or(20.0 * k * k * w);
    if !(charge.is_finite() && charge > 0.0) {
        return Err(Usage(format!("angular charge must be > 0 (got {charge})")).into());
    }
    let energy = o.energy.unwrap_or(2.6 * charge.sqrt() * w);
    let theta0 = o.theta0.unwrap_or(0.8 * p.angular_minimum());
    let r0 = o.r0.unwrap_or((charge / (w * w)).sqrt().sqrt());
    Ok(classical::state_from_charges(p, energy, charge, theta0, r0)?)
}

#[derive(Serialize)]
struct ClosureJson {
    closure_time: Option<f64>,
    closure_radial_periods: Option<f64>,
    closure_residual: Option<f64>,
    best_residual: Option<f64>,
    crossings: usize,
    horizon_radial_periods: usize,
    tolerance: f64,
}

pub fn classical(cfg: &RunConfig, out: &mut OutDir) -> Result<Value> {
    let o = &cfg.classical;
    let p = &cfg.params;
    let s0 = classical_initial(cfg)?;
    if !(o.periods.is_finite() && o.periods > 0.0) || o.samples_per_period < 1 {
        return Err(Usage("classical needs periods > 0 and samples_per_period >= 1".into()).into());
    }
    let period = classical::radial_period(p);
    let n = (o.periods * o.samples_per_period as f64).ceil() as usize;
    let times = linspace(0.0, o.periods * period, n);
    let traj = classical::integrate_at(s0, p, &times, o.tol)?;
    let rows = traj.samples.iter().map(|s| {
        (
            s.t,
            s.state.r,
            s.state.theta,
            s.state.p_r,
            s.state.p_theta,
            s.energy,
            s.angular_charge,
        )
    });
    out.write_csv(
        "trajectory.csv",
        &["t", "r", "theta", "p_r", "p_theta", "energy", "angular_charge"],
        rows,
    )?;

    let report = classical::closure_detect(s0, p, o.closure_periods, o.closure_tol)?;
    out.write_json(
        "closure.json",
        &ClosureJson {
            closure_time: report.closure.map(|c| c.time),
            closure_radial_periods: report.closure.map(|c| c.radial_periods),
            closure_residual: report.closure.map(|c| c.residual),
            best_residual: report.best_residual,
            crossings: report.crossings,
            horizon_radial_periods: o.closure_periods,
            tolerance: o.closure_tol,
        },
    )?;
    Ok(json!({
        "initial": s0,
        "energy": traj.energy0,
        "angular_charge": traj.angular_charge0,
        "max_energy_drift": traj.max_energy_drift(),
        "max_charge_drift": traj.max_charge_drift(),
        "harmonicity_residual": classical::harmonicity_residual(&traj, p.omega()),
        "closed": report.closure.is_some(),
    }))
}

pub fn validate(cfg: &RunConfig, out: &mut OutDir) -> Result<Value> {
    let vc = cfg.validate.with_params(cfg.params);
    let report = oracle::run_validation(&vc)?;
    out.write_json("validate.json", &report)?;
    let summary = json!({
        "spectrum_convention_winner": report.spectrum_convention_winner,
        "jacobi_argument_winner": report.jacobi_argument_winner,
        "product_constant_winner": report.product_constant_winner,
    });
    let open = report.inconclusive();
    if !open.is_empty() {
        return Err(Inconclusive(open).into());
    }
    Ok(summary)
}

/// Evaluates one special function; complex results print as two lines,
/// real part first.
pub fn specfun_probe(func: &str, args: &[f64]) -> Result<Vec<f64>> {
    let want = |n: usize| -> Result<()> {
        if args.len() != n {
            bail!(Usage(format!("{func} takes {n} arguments (got {})", args.len())));
        }
        Ok(())
    };
    let index = |x: f64| -> Result<usize> {
        if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
            Ok(x as usize)
        } else {
            Err(Usage(format!("{func}: degree must be a non-negative integer (got {x})")).into())
        }
    };
    let values = match func {
        "gamma" => {
            want(1)?;
            vec![specfun::gamma_real(args[0])?]
        }
        "ln_gamma" => {
            want(1)?;
            vec![specfun::ln_gamma(args[0])?]
        }
        "laguerre" => {
            want(3)?;
            vec![specfun::laguerre(index(args[0])?, args[1], args[2])?]
        }
        "jacobi" => {
            want(4)?;
            vec![specfun::jacobi(index(args[0])?, args[1], args[2], args[3])?]
        }
        "bessel_j" => {
            want(3)?;
            RealParam::bessel_order(args[0])?;
            let z = specfun::bessel_j(args[0], num_complex::Complex64::new(args[1], args[2]))?;
            vec![z.re, z.im]
        }
        other => {
            return Err(Usage(format!(
                "unknown function {other:?} (known: gamma, ln_gamma, laguerre, jacobi, bessel_j)"
            ))
            .into())
        }
    };
    Ok(values)
}

pub fn params_summary(p: &PotentialParams) -> Value {
    json!({ "omega": p.omega(), "alpha": p.alpha(), "beta": p.beta(), "k": p.k().to_string() })
}
