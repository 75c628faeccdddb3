//! Adaptive Dormand–Prince 5(4) time stepping for semi-discrete systems.
//!
//! Step control follows Hairer, Nørsett & Wanner (DOPRI5): PI controller,
//! componentwise-scaled RMS error norm, FSAL stage reuse and the free
//! fourth-order continuous extension for output times that fall inside a step.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::SemiDiscreteSystem;
use crate::spatial::Field;

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

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// First trial step; `None` picks one with [`estimate_initial_step`].
    pub initial_step: Option<f64>,
    /// Sorted times in `[0, T]` at which states are returned. Empty means
    /// `[T]`.
    pub output_times: Vec<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-13,
            max_steps: 1_000_000,
            initial_step: None,
            output_times: Vec::new(),
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Default::default()
        }
    }

    pub fn output_times(mut self, times: Vec<f64>) -> Self {
        self.output_times = times;
        self
    }

    /// The output times to use for a horizon `t_end`.
    pub fn resolved_output_times(&self, t_end: f64) -> Vec<f64> {
        if self.output_times.is_empty() {
            vec![t_end]
        } else {
            self.output_times.clone()
        }
    }

    pub fn validate(&self, t_end: f64) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive, got rtol = {}, atol = {}",
                self.rtol, self.atol
            )));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "initial step must be positive, got {h}"
                )));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be positive".into()));
        }
        let times = self.resolved_output_times(t_end);
        if times.iter().any(|&t| !(0.0..=t_end).contains(&t)) {
            return Err(Error::InvalidArgument(format!(
                "output times must lie in [0, {t_end}]"
            )));
        }
        if times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("output times must be sorted".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Total right-hand side evaluations:
    /// `1 + 6 · (accepted + rejected) + startup_evals`.
    pub rhs_evals: usize,
    /// Evaluations spent choosing the first step.
    pub startup_evals: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Field> {
        self.states.last()
    }
}

struct Rhs<'s, 'a> {
    sys: &'s SemiDiscreteSystem<'a>,
    scratch: Vec<f64>,
    evals: usize,
}

impl Rhs<'_, '_> {
    fn eval(&mut self, t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.evals += 1;
        self.sys.eval_rhs_into(t, u, &mut self.scratch, out)
    }
}

fn rms_scaled(v: &[f64], scale: &[f64]) -> f64 {
    let sum: f64 = v.iter().zip(scale).map(|(a, s)| (a / s).powi(2)).sum();
    (sum / v.len() as f64).sqrt()
}

fn initial_step_from(
    rhs: &mut Rhs<'_, '_>,
    t_end: f64,
    u0: &[f64],
    f0: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<f64> {
    let scale: Vec<f64> = u0.iter().map(|u| atol + rtol * u.abs()).collect();
    let dnf = rms_scaled(f0, &scale);
    let dny = rms_scaled(u0, &scale);
    let mut h = if dnf <= 1e-5 || dny <= 1e-5 {
        1e-6
    } else {
        0.01 * dny / dnf
    };
    h = h.min(t_end);
    let u1: Vec<f64> = u0.iter().zip(f0).map(|(u, f)| u + h * f).collect();
    let mut f1 = vec![0.0; u0.len()];
    rhs.eval(h, &u1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let der2 = rms_scaled(&diff, &scale) / h;
    let der12 = der2.max(dnf);
    if der12 <= 1e-15 {
        return Ok(t_end / 100.0);
    }
    let h1 = (0.01 / der12).powf(1.0 / 5.0);
    Ok((100.0 * h).min(h1).min(t_end))
}

/// Starting step from the usual `‖u_0‖ / ‖f(0, u_0)‖` heuristic refined by
/// one explicit Euler trial step. Falls back to `T/100` when the right-hand
/// side vanishes; never exceeds `T`.
pub fn estimate_initial_step(
    sys: &SemiDiscreteSystem<'_>,
    u0: &Field,
    rtol: f64,
    atol: f64,
) -> Result<f64> {
    let t_end = sys.spec().time_horizon();
    let mut rhs = Rhs {
        sys,
        scratch: vec![0.0; sys.dim()],
        evals: 0,
    };
    let mut f0 = vec![0.0; sys.dim()];
    rhs.eval(0.0, u0.values(), &mut f0)?;
    initial_step_from(&mut rhs, t_end, u0.values(), &f0, rtol, atol)
}

/// Integrates `sys` from its initial condition at `t = 0` to its horizon `T`.
pub fn integrate(sys: &SemiDiscreteSystem<'_>, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let u0 = sys.initial_state()?;
    integrate_from(sys, u0, cfg)
}

/// Same as [`integrate`] with an explicit initial state.
pub fn integrate_from(
    sys: &SemiDiscreteSystem<'_>,
    u0: Field,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let t_end = sys.spec().time_horizon();
    cfg.validate(t_end)?;
    let outputs = cfg.resolved_output_times(t_end);
    let n = sys.dim();
    if u0.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: u0.len(),
        });
    }
    let disc = Arc::clone(sys.disc());
    let (rtol, atol) = (cfg.rtol, cfg.atol);

    let mut rhs = Rhs {
        sys,
        scratch: vec![0.0; n],
        evals: 0,
    };
    let mut y = u0.into_values();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: 0.0 });
    }
    let mut k1 = vec![0.0; n];
    rhs.eval(0.0, &y, &mut k1)?;
    let mut h = match cfg.initial_step {
        Some(h) => h.min(t_end),
        None => initial_step_from(&mut rhs, t_end, &y, &k1, rtol, atol)?,
    };
    let startup_evals = rhs.evals - 1;

    let mut times = Vec::with_capacity(outputs.len());
    let mut states = Vec::with_capacity(outputs.len());
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] == 0.0 {
        times.push(0.0);
        states.push(Field::new(Arc::clone(&disc), y.clone())?);
        next_out += 1;
    }

    let [mut k2, mut k3, mut k4, mut k5, mut k6, mut k7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err_vec = vec![0.0; n];
    let mut scale = vec![0.0; n];

    let mut t = 0.0_f64;
    let mut fac_old = 1e-4_f64;
    let mut last_rejected = false;
    let mut stats = StepStats::default();
    let expo = 0.2 - BETA * 0.75;

    while t < t_end {
        if stats.steps_accepted + stats.steps_rejected >= cfg.max_steps {
            return Err(Error::MaxSteps {
                max_steps: cfg.max_steps,
                t,
            });
        }
        if 0.1 * h.abs() <= t.abs() * f64::EPSILON || h <= f64::MIN_POSITIVE {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let last = t + 1.01 * h >= t_end;
        if last {
            h = t_end - t;
        }

        for i in 0..n {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        rhs.eval(t + C2 * h, &stage, &mut k2)?;
        for i in 0..n {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs.eval(t + C3 * h, &stage, &mut k3)?;
        for i in 0..n {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs.eval(t + C4 * h, &stage, &mut k4)?;
        for i in 0..n {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs.eval(t + C5 * h, &stage, &mut k5)?;
        for i in 0..n {
            stage[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t_end } else { t + h };
        rhs.eval(t_new, &stage, &mut k6)?;
        for i in 0..n {
            y_new[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs.eval(t_new, &y_new, &mut k7)?;
        for i in 0..n {
            err_vec[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            scale[i] = atol + rtol * y[i].abs().max(y_new[i].abs());
        }
        let err = rms_scaled(&err_vec, &scale);

        if !err.is_finite() {
            stats.steps_rejected += 1;
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(expo);
        if err <= 1.0 {
            if y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t: t_new });
            }
            stats.steps_accepted += 1;

            // outputs inside (t, t_new]
            while next_out < outputs.len() && outputs[next_out] <= t_new {
                let tout = outputs[next_out];
                let values = if tout == t_new {
                    y_new.clone()
                } else {
                    let theta = (tout - t) / h;
                    let theta1 = 1.0 - theta;
                    (0..n)
                        .map(|i| {
                            let ydiff = y_new[i] - y[i];
                            let bspl = h * k1[i] - ydiff;
                            let r4 = ydiff - h * k7[i] - bspl;
                            let r5 = h
                                * (D1 * k1[i]
                                    + D3 * k3[i]
                                    + D4 * k4[i]
                                    + D5 * k5[i]
                                    + D6 * k6[i]
                                    + D7 * k7[i]);
                            y[i] + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)))
                        })
                        .collect()
                };
                times.push(tout);
                states.push(Field::new(Arc::clone(&disc), values)?);
                next_out += 1;
            }

            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;

            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = err.max(1e-4);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            stats.steps_rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }

    stats.rhs_evals = rhs.evals;
    stats.startup_evals = startup_evals;
    Ok(Trajectory {
        times,
        states,
        stats,
    })
}
