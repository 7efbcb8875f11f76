//! Dormand–Prince 5(4) with step rejection and 4th-order dense output.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size collapsed to {h:e} at t = {t}")]
    StepCollapse { t: f64, h: f64 },
    #[error("too many steps ({0})")]
    TooManySteps(usize),
    #[error("invalid tolerance {0}")]
    Tolerance(f64),
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Dense output at t ∈ [t0, t1].
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let th = (t - self.t0) / h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }
}

/// What the step observer wants next.
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Result<Self, OdeError> {
        for tol in [rtol, atol] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(OdeError::Tolerance(tol));
            }
        }
        Ok(Self {
            rtol,
            atol,
            max_steps: 10_000_000,
        })
    }

    /// Integrates y′ = f(t, y) from t0 to t_end, handing every accepted step
    /// to `observe`. A non-finite derivative counts as a failed step, so a
    /// right-hand side may return NaN outside its domain.
    pub fn solve<const N: usize, F, O>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut observe: O,
    ) -> Result<Stats, OdeError>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: FnMut(&Step<N>) -> Control,
    {
        let mut stats = Stats::default();
        let span = t_end - t0;
        if span <= 0.0 {
            return Ok(stats);
        }
        let h_min = 1e-14 * t_end.abs().max(span);
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        stats.evaluations += 1;
        let mut h = self.initial_step(&f, t, &y, &k1, span);
        stats.evaluations += 1;

        while t < t_end {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(OdeError::TooManySteps(self.max_steps));
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            let stage = |k: &[&[f64; N]], a: &[f64]| -> [f64; N] {
                std::array::from_fn(|i| y[i] + h * k.iter().zip(a).map(|(kj, aj)| aj * kj[i]).sum::<f64>())
            };
            let k2 = f(t + C2 * h, &stage(&[&k1], &[A21]));
            let k3 = f(t + C3 * h, &stage(&[&k1, &k2], &[A31, A32]));
            let k4 = f(t + C4 * h, &stage(&[&k1, &k2, &k3], &[A41, A42, A43]));
            let k5 = f(t + C5 * h, &stage(&[&k1, &k2, &k3, &k4], &[A51, A52, A53, A54]));
            let k6 = f(t + h, &stage(&[&k1, &k2, &k3, &k4, &k5], &[A61, A62, A63, A64, A65]));
            let y_new = stage(&[&k1, &k3, &k4, &k5, &k6], &[A71, A73, A74, A75, A76]);
            let k7 = f(t + h, &y_new);
            stats.evaluations += 6;

            let mut err = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();

            if !err.is_finite() || err > 1.0 {
                stats.rejected += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
                h *= fac;
                if h < h_min {
                    return Err(OdeError::StepCollapse { t, h });
                }
                continue;
            }

            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y_new[i] - y[i];
                let bspl = h * k1[i] - dy;
                rcont[0][i] = y[i];
                rcont[1][i] = dy;
                rcont[2][i] = bspl;
                rcont[3][i] = dy - h * k7[i] - bspl;
                rcont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let t_new = if last { t_end } else { t + h };
            let step = Step {
                t0: t,
                t1: t_new,
                y0: y,
                y1: y_new,
                rcont,
            };
            stats.accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;
            if let Control::Stop = observe(&step) {
                break;
            }
            let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            h *= fac;
            if h < h_min && t < t_end {
                return Err(OdeError::StepCollapse { t, h });
            }
        }
        Ok(stats)
    }

    fn initial_step<const N: usize, F>(&self, f: &F, t: f64, y: &[f64; N], k1: &[f64; N], span: f64) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let sc: [f64; N] = std::array::from_fn(|i| self.atol + self.rtol * y[i].abs());
        let rms = |v: &[f64; N]| (v.iter().zip(&sc).map(|(x, s)| (x / s) * (x / s)).sum::<f64>() / N as f64).sqrt();
        let (d0, d1) = (rms(y), rms(k1));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1: [f64; N] = std::array::from_fn(|i| y[i] + h0 * k1[i]);
        let k2 = f(t + h0, &y1);
        let diff: [f64; N] = std::array::from_fn(|i| k2[i] - k1[i]);
        let d2 = rms(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        if !h1.is_finite() {
            return h0;
        }
        (100.0 * h0).min(h1).min(span)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        let solver = Dopri5::new(1e-11, 1e-13).unwrap();
        let mut last = [0.0; 2];
        solver
            .solve(|_, y| [y[1], -y[0]], 0.0, [1.0, 0.0], 20.0, |s| {
                last = s.y1;
                Control::Continue
            })
            .unwrap();
        assert!((last[0] - 20f64.cos()).abs() < 1e-9);
        assert!((last[1] + 20f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_tracks_solution() {
        let solver = Dopri5::new(1e-10, 1e-12).unwrap();
        let mut worst = 0.0_f64;
        solver
            .solve(|_, y| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, |s| {
                for j in 1..10 {
                    let t = s.t0 + (s.t1 - s.t0) * j as f64 / 10.0;
                    worst = worst.max((s.eval(t)[0] - t.sin()).abs());
                }
                Control::Continue
            })
            .unwrap();
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn finite_time_blowup_collapses() {
        let solver = Dopri5::new(1e-8, 1e-10).unwrap();
        let res = solver.solve(|_, y| [y[0] * y[0]], 0.0, [1.0], 2.0, |_| Control::Continue);
        assert!(matches!(res, Err(OdeError::StepCollapse { .. })));
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(Dopri5::new(0.0, 1e-8).is_err());
        assert!(Dopri5::new(1e-8, f64::NAN).is_err());
    }
}
