//! Adaptive Dormand–Prince 5(4) integrator with an implicit-Euler fallback.
//!
//! Only the leading `controlled` components of the state take part in the
//! error norm; trailing components (running integrals) are carried along
//! by the same Runge–Kutta weights, so any linear invariant linking them to
//! the controlled components is preserved step by step.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Consecutive rejected steps tolerated before switching to implicit Euler.
    pub max_consecutive_rejects: usize,
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-6,
            max_consecutive_rejects: 50,
            max_step: f64::INFINITY,
            min_step: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub implicit_steps: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    NonFinite { time: f64 },
    StepTooSmall { time: f64, step: f64 },
}

impl std::fmt::Display for OdeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OdeError::NonFinite { time } => write!(f, "non-finite state at t={time}"),
            OdeError::StepTooSmall { time, step } => {
                write!(f, "step size {step:e} below minimum at t={time}")
            }
        }
    }
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

// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Stateful integrator; remembers the last step size across calls to
/// [`Integrator::advance`] so piecewise integration between breakpoints
/// does not restart from scratch.
#[derive(Debug, Clone)]
pub struct Integrator {
    pub options: SolverOptions,
    pub stats: SolverStats,
    controlled: usize,
    step: Option<f64>,
    k: [Vec<f64>; 7],
    scratch: Vec<f64>,
    next: Vec<f64>,
}

impl Integrator {
    /// `dim` state components, of which the first `controlled` enter the error norm.
    pub fn new(options: SolverOptions, dim: usize, controlled: usize) -> Self {
        assert!(controlled <= dim);
        Self {
            options,
            stats: SolverStats::default(),
            controlled,
            step: None,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            scratch: vec![0.0; dim],
            next: vec![0.0; dim],
        }
    }

    fn weighted_norm(&self, err: &[f64], y0: &[f64], y1: &[f64]) -> f64 {
        let n = self.controlled.max(1);
        let sum: f64 = (0..self.controlled)
            .map(|i| {
                let sc = self.options.atol + self.options.rtol * y0[i].abs().max(y1[i].abs());
                (err[i] / sc).powi(2)
            })
            .sum();
        (sum / n as f64).sqrt()
    }

    fn initial_step<F>(&mut self, f: &mut F, t: f64, y: &[f64], span: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        f(t, y, &mut self.k[0]);
        self.stats.rhs_evals += 1;
        let d0 = self.weighted_norm(y, y, y);
        let d1 = self.weighted_norm(&self.k[0].clone(), y, y);
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span).min(self.options.max_step)
    }

    /// Integrate `y` in place from `t0` to `t1`.
    pub fn advance<F>(&mut self, f: &mut F, t0: f64, y: &mut [f64], t1: f64) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let dim = y.len();
        debug_assert_eq!(dim, self.scratch.len());
        if t1 <= t0 {
            return Ok(());
        }
        let mut t = t0;
        let mut h = match self.step {
            Some(h) => h.min(self.options.max_step),
            None => self.initial_step(f, t0, y, t1 - t0),
        };
        let mut rejects = 0usize;
        let mut have_k1 = false;

        while t < t1 {
            let remaining = t1 - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let h_eff = if last { remaining } else { h };
            if h_eff < self.options.min_step && !last {
                return Err(OdeError::StepTooSmall { time: t, step: h_eff });
            }

            if !have_k1 {
                f(t, y, &mut self.k[0]);
                self.stats.rhs_evals += 1;
                have_k1 = true;
            }
            let err = self.dopri_trial(f, t, y, h_eff);
            let err = if err.is_finite() { err } else { f64::INFINITY };

            if err <= 1.0 {
                if self.next.iter().any(|v| !v.is_finite()) {
                    return Err(OdeError::NonFinite { time: t + h_eff });
                }
                y.copy_from_slice(&self.next);
                // FSAL: stage 7 is the derivative at the new point.
                let (first, rest) = self.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                t = if last { t1 } else { t + h_eff };
                self.stats.accepted += 1;
                rejects = 0;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let proposal = (h_eff * fac).min(self.options.max_step);
                // Keep the unconstrained size when the interval end clipped this step.
                h = if last { proposal.max(h) } else { proposal };
            } else {
                self.stats.rejected += 1;
                rejects += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = h_eff * fac;
                if rejects > self.options.max_consecutive_rejects {
                    let taken = self.implicit_euler_step(f, t, y, t1)?;
                    t = if t + taken >= t1 { t1 } else { t + taken };
                    h = taken;
                    rejects = 0;
                    have_k1 = false;
                }
            }
        }
        self.step = Some(h);
        Ok(())
    }

    /// One Dormand–Prince trial step from (t, y) with `self.k[0]` holding
    /// f(t, y). Leaves the 5th-order result in `self.next` and returns the
    /// scaled error norm.
    fn dopri_trial<F>(&mut self, f: &mut F, t: f64, y: &[f64], h: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let dim = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let s = &mut self.scratch;

        for i in 0..dim {
            s[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, s, k2);
        for i in 0..dim {
            s[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, s, k3);
        for i in 0..dim {
            s[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, s, k4);
        for i in 0..dim {
            s[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, s, k5);
        for i in 0..dim {
            s[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, s, k6);
        let next = &mut self.next;
        for i in 0..dim {
            next[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + h, next, k7);
        self.stats.rhs_evals += 6;

        for i in 0..dim {
            s[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = std::mem::take(&mut self.scratch);
        let norm = self.weighted_norm(&err, y, &self.next);
        self.scratch = err;
        norm
    }

    /// Step-halving implicit Euler: accept the largest step (starting from
    /// the whole remaining interval) whose full-step and two-half-step
    /// solutions agree within tolerance. Returns the step taken.
    fn implicit_euler_step<F>(
        &mut self,
        f: &mut F,
        t: f64,
        y: &mut [f64],
        t1: f64,
    ) -> Result<f64, OdeError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let mut h = (t1 - t).min(self.options.max_step);
        loop {
            if h < self.options.min_step {
                return Err(OdeError::StepTooSmall { time: t, step: h });
            }
            let full = self.backward_euler(f, t, y, h);
            let half = self
                .backward_euler(f, t, y, 0.5 * h)
                .and_then(|mid| self.backward_euler(f, t + 0.5 * h, &mid, 0.5 * h));
            if let (Some(full), Some(half)) = (full, half) {
                let diff: Vec<f64> = full.iter().zip(&half).map(|(a, b)| b - a).collect();
                if self.weighted_norm(&diff, y, &half) <= 1.0 {
                    if half.iter().any(|v| !v.is_finite()) {
                        return Err(OdeError::NonFinite { time: t + h });
                    }
                    y.copy_from_slice(&half);
                    self.stats.implicit_steps += 1;
                    return Ok(h);
                }
            }
            h *= 0.5;
        }
    }

    /// Solve z = y + h f(t + h, z) by Newton iteration with a
    /// finite-difference Jacobian.
    fn backward_euler<F>(&mut self, f: &mut F, t: f64, y: &[f64], h: f64) -> Option<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        let tn = t + h;
        let mut z = y.to_vec();
        let mut fz = vec![0.0; n];
        let mut fp = vec![0.0; n];
        for _ in 0..25 {
            f(tn, &z, &mut fz);
            self.stats.rhs_evals += 1;
            let g = DVector::from_iterator(n, (0..n).map(|i| z[i] - y[i] - h * fz[i]));
            let mut jac = DMatrix::<f64>::identity(n, n);
            for j in 0..n {
                let dz = 1e-7 * z[j].abs().max(1.0);
                let saved = z[j];
                z[j] = saved + dz;
                f(tn, &z, &mut fp);
                self.stats.rhs_evals += 1;
                z[j] = saved;
                for i in 0..n {
                    jac[(i, j)] -= h * (fp[i] - fz[i]) / dz;
                }
            }
            let delta = jac.lu().solve(&g)?;
            for i in 0..n {
                z[i] -= delta[i];
            }
            if z.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let d: Vec<f64> = delta.iter().copied().collect();
            if self.weighted_norm(&d, y, &z) < 1e-3 {
                return Some(z);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let opts = SolverOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() };
        let mut integ = Integrator::new(opts, 1, 1);
        let mut y = [1.0];
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        integ.advance(&mut f, 0.0, &mut y, 5.0).unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-8);
        assert_eq!(integ.stats.implicit_steps, 0);
    }

    #[test]
    fn harmonic_oscillator_piecewise() {
        let mut integ = Integrator::new(SolverOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() }, 2, 2);
        let mut y = [1.0, 0.0];
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let mut t = 0.0;
        for k in 1..=100 {
            let t1 = 0.1 * k as f64;
            integ.advance(&mut f, t, &mut y, t1).unwrap();
            t = t1;
        }
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[1] + 10f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn uncontrolled_integral_tracks_linear_invariant() {
        // y0' = -y0, y1' = y0  ⇒ y0 + y1 is conserved.
        let mut integ = Integrator::new(SolverOptions::default(), 2, 1);
        let mut y = [3.0, 0.0];
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[0];
            dy[1] = y[0];
        };
        integ.advance(&mut f, 0.0, &mut y, 20.0).unwrap();
        assert!((y[0] + y[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn implicit_fallback_on_forced_rejects() {
        let opts = SolverOptions {
            max_consecutive_rejects: 0,
            rtol: 1e-4,
            atol: 1e-6,
            ..Default::default()
        };
        let mut integ = Integrator::new(opts, 1, 1);
        integ.step = Some(10.0);
        let lambda = 1e4;
        let mut y = [0.0];
        let mut f = |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -lambda * (y[0] - t.cos());
        integ.advance(&mut f, 0.0, &mut y, 1.0).unwrap();
        assert!(integ.stats.implicit_steps > 0);
        // Slow manifold: y ≈ cos t + sin t / λ.
        assert!((y[0] - 1f64.cos()).abs() < 1e-3, "{}", y[0]);
    }

    #[test]
    fn reports_non_finite_state() {
        let mut integ = Integrator::new(SolverOptions::default(), 1, 1);
        let mut y = [1.0];
        let mut f = |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = f64::NAN;
        assert!(integ.advance(&mut f, 0.0, &mut y, 1.0).is_err());
    }
}
