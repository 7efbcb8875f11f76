//! Independent reference implementations used only by tests.
//!
//! Everything here is summed term by term with compensated accumulation and
//! shares no code with the library's recurrences.

#![allow(dead_code)]

/// Kahan–Babuška (Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct Compensated {
    sum: f64,
    carry: f64,
    abs: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }

    /// Σ|terms|; the scale against which cancellation is measured.
    pub fn magnitude(&self) -> f64 {
        self.abs
    }
}

/// C(top, k) for real `top` as a finite product.
pub fn binom(top: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (top - j as f64) / (j as f64 + 1.0))
}

/// L_n^(a)(x) = Σ_m (−1)^m C(n+a, n−m) x^m / m!.
pub fn laguerre_sum(n: usize, a: f64, x: f64) -> Compensated {
    let mut acc = Compensated::default();
    let mut xm_over_fact = 1.0;
    for m in 0..=n {
        if m > 0 {
            xm_over_fact *= x / m as f64;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binom(n as f64 + a, n - m) * xm_over_fact);
    }
    acc
}

/// P_l^(a,b)(x) = Σ_s C(l+a, l−s) C(l+b, s) ((x−1)/2)^s ((x+1)/2)^(l−s).
pub fn jacobi_sum(l: usize, a: f64, b: f64, x: f64) -> Compensated {
    let mut acc = Compensated::default();
    let (m, p) = ((x - 1.0) / 2.0, (x + 1.0) / 2.0);
    for s in 0..=l {
        acc.add(binom(l as f64 + a, l - s) * binom(l as f64 + b, s) * m.powi(s as i32) * p.powi((l - s) as i32));
    }
    acc
}

/// Γ(x) for half-integers and integers from Γ(1) = 1, Γ(½) = √π.
pub fn gamma_from_recurrence(twice_x: u32) -> f64 {
    assert!(twice_x > 0);
    let (mut value, mut at) = if twice_x % 2 == 0 { (1.0, 2u32) } else { (std::f64::consts::PI.sqrt(), 1u32) };
    while at < twice_x {
        value *= at as f64 / 2.0;
        at += 2;
    }
    value
}

/// J_ν(x) for real x, summed with term ratios so that no Gamma value is
/// needed beyond the leading (x/2)^ν/Γ(ν+1), which is passed in.
pub fn bessel_sum(nu: f64, x: f64, lead_gamma: f64) -> f64 {
    let mut term = (x / 2.0).powf(nu) / lead_gamma;
    let mut acc = Compensated::default();
    let q = -x * x / 4.0;
    for m in 0..400 {
        acc.add(term);
        term *= q / ((m as f64 + 1.0) * (m as f64 + nu + 1.0));
        if term.abs() < 1e-18 * acc.magnitude() {
            break;
        }
    }
    acc.value()
}

/// Relative difference against the reference, with the reference's
/// cancellation scale as a floor so that points next to a root are judged
/// by the accuracy either side can actually deliver.
pub fn rel_diff(value: f64, reference: &Compensated) -> f64 {
    let scale = reference.value().abs().max(1e-6 * reference.magnitude());
    (value - reference.value()).abs() / scale
}
