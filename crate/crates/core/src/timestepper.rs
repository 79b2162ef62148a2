//! Method-of-lines integration of `u_t = rhs_u_form(u)` with classical RK4.

use crate::model::{rhs_u_form, ModelParams};
use crate::spectral::{derivative, Field};

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// Advective CFL step.
    Auto,
    /// CFL step, never larger than the cap.
    AutoCapped(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    pub dt: TimeStep,
    pub cfl_safety: f64,
    pub t_end: f64,
    /// Breaking is declared once `‖u_x‖_∞` reaches this value.
    pub breaking_threshold: f64,
    pub max_steps: u64,
}

impl StepControl {
    pub const DEFAULT_CFL: f64 = 0.3;
    pub const DEFAULT_BREAKING_THRESHOLD: f64 = 1e6;
    pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

    pub fn new(dt: TimeStep, t_end: f64) -> Self {
        Self {
            dt,
            cfl_safety: Self::DEFAULT_CFL,
            t_end,
            breaking_threshold: Self::DEFAULT_BREAKING_THRESHOLD,
            max_steps: Self::DEFAULT_MAX_STEPS,
        }
    }

    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self::new(TimeStep::Fixed(dt), t_end)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(format!(
                "cfl safety must lie in (0, 1], got {}",
                self.cfl_safety
            ));
        }
        match self.dt {
            TimeStep::Fixed(dt) | TimeStep::AutoCapped(dt) if !(dt > 0.0 && dt.is_finite()) => {
                return Err(format!("dt must be positive, got {dt}"));
            }
            _ => {}
        }
        if !(self.breaking_threshold > 0.0) {
            return Err(format!(
                "breaking threshold must be positive, got {}",
                self.breaking_threshold
            ));
        }
        if self.max_steps == 0 {
            return Err("max_steps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub u: Field,
    pub step: u64,
    pub breaking: bool,
    pub breaking_time: Option<f64>,
}

impl SolverState {
    pub fn new(u: Field) -> Self {
        Self::at(0.0, u)
    }

    pub fn at(t: f64, u: Field) -> Self {
        Self {
            t,
            u,
            step: 0,
            breaking: false,
            breaking_time: None,
        }
    }

    fn broken(mut self) -> Self {
        self.breaking = true;
        self.breaking_time = Some(self.t);
        self
    }
}

/// Relative slack under which a final step is treated as a full step.
const CLIP_SLACK: f64 = 1e-6;

fn advective_dt(u: &Field, params: &ModelParams, safety: f64) -> f64 {
    let speed = u.max_abs().powi(params.p() as i32).max(1.0);
    safety * u.grid().dx() / speed
}

/// Step size for the next step from `state`, clipped to the remaining time.
///
/// `dt = safety · Δx / max(1, ‖u‖_∞^p)` in the automatic modes.
pub fn cfl_dt(state: &SolverState, params: &ModelParams, control: &StepControl) -> f64 {
    let candidate = match control.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => advective_dt(&state.u, params, control.cfl_safety),
        TimeStep::AutoCapped(cap) => advective_dt(&state.u, params, control.cfl_safety).min(cap),
    };
    let remaining = control.t_end - state.t;
    if remaining <= candidate * (1.0 + CLIP_SLACK) {
        if (remaining - candidate).abs() <= CLIP_SLACK * candidate {
            candidate
        } else {
            remaining
        }
    } else {
        candidate
    }
}

/// One classical RK4 step. A non-finite stage leaves `u` and `t` untouched and
/// marks the state as breaking at the current time.
pub fn rk4_step(state: &SolverState, dt: f64, params: &ModelParams) -> SolverState {
    match rk4_update(&state.u, dt, params) {
        Some(u) => SolverState {
            t: state.t + dt,
            u,
            step: state.step + 1,
            breaking: false,
            breaking_time: None,
        },
        None => state.clone().broken(),
    }
}

fn rk4_update(u: &Field, dt: f64, params: &ModelParams) -> Option<Field> {
    let k1 = rhs_u_form(u, params).ok()?;
    let k2 = rhs_u_form(&u.axpy(0.5 * dt, &k1), params).ok()?;
    let k3 = rhs_u_form(&u.axpy(0.5 * dt, &k2), params).ok()?;
    let k4 = rhs_u_form(&u.axpy(dt, &k3), params).ok()?;
    let w = dt / 6.0;
    let mut next = u.clone();
    for (i, v) in next.values_mut().iter_mut().enumerate() {
        *v += w * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i]);
    }
    next.is_finite().then_some(next)
}

/// `‖u_x‖_∞` at or above the threshold, or any non-finite sample.
pub fn detect_breaking(state: &SolverState, control: &StepControl) -> bool {
    if !state.u.is_finite() {
        return true;
    }
    derivative(&state.u, 1).max_abs() >= control.breaking_threshold
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Breaking,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct Advance {
    pub state: SolverState,
    pub status: RunStatus,
    pub steps_taken: u64,
}

/// Steps from `state` to `control.t_end`, stopping early on breaking or when
/// `control.max_steps` steps have been taken.
///
/// The observer sees the initial state, every `cadence`-th state, and the
/// final state, together with the step size that produced it (0 for the
/// initial state). With `cadence == 0` only the end points are observed.
pub fn advance<F>(
    state: SolverState,
    params: &ModelParams,
    control: &StepControl,
    cadence: u64,
    mut observer: F,
) -> Advance
where
    F: FnMut(&SolverState, f64),
{
    let mut state = state;
    observer(&state, 0.0);
    if state.breaking {
        return Advance {
            state,
            status: RunStatus::Breaking,
            steps_taken: 0,
        };
    }
    let mut taken = 0;
    while state.t < control.t_end {
        if taken >= control.max_steps {
            return Advance {
                state,
                status: RunStatus::StepLimit,
                steps_taken: taken,
            };
        }
        let dt = cfl_dt(&state, params, control);
        let is_last = state.t + dt >= control.t_end
            || (control.t_end - state.t - dt).abs() <= CLIP_SLACK * dt;
        let mut next = rk4_step(&state, dt, params);
        taken += 1;
        if next.breaking {
            observer(&next, dt);
            return Advance {
                state: next,
                status: RunStatus::Breaking,
                steps_taken: taken,
            };
        }
        if is_last {
            next.t = control.t_end;
        }
        if detect_breaking(&next, control) {
            let next = next.broken();
            observer(&next, dt);
            return Advance {
                state: next,
                status: RunStatus::Breaking,
                steps_taken: taken,
            };
        }
        state = next;
        let at_end = state.t >= control.t_end;
        if at_end || (cadence > 0 && state.step.is_multiple_of(cadence)) {
            observer(&state, dt);
        }
    }
    Advance {
        state,
        status: RunStatus::Completed,
        steps_taken: taken,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;
    use crate::spectral::GridSpec;
    use std::f64::consts::PI;

    #[test]
    fn cfl_examples() {
        let g = GridSpec::periodic_2pi(256).unwrap();
        let ch = Preset::CamassaHolm.params();
        let ctl = StepControl::new(TimeStep::Auto, 10.0);
        let dx = 2.0 * PI / 256.0;
        let zero = SolverState::new(Field::zeros(g));
        assert!((cfl_dt(&zero, &ch, &ctl) - 0.3 * dx).abs() < 1e-18);

        let nov = Preset::Novikov.params();
        let two = SolverState::new(Field::from_fn(g, |x| 2.0 * x.cos()));
        assert!((cfl_dt(&two, &nov, &ctl) - 0.3 * dx / 4.0).abs() < 1e-18);

        let capped = StepControl::new(TimeStep::AutoCapped(1e-4), 10.0);
        assert!(cfl_dt(&zero, &ch, &capped) <= 1e-4);
        let fixed = StepControl::fixed(0.1, 0.25);
        let mut s = SolverState::new(Field::zeros(g));
        assert_eq!(cfl_dt(&s, &ch, &fixed), 0.1);
        s.t = 0.2;
        assert!((cfl_dt(&s, &ch, &fixed) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn constant_state_only_advances_time() {
        let g = GridSpec::periodic_2pi(32).unwrap();
        let s = SolverState::new(Field::constant(g, 0.4));
        let next = rk4_step(&s, 0.01, &Preset::Novikov.params());
        assert_eq!(next.u, s.u);
        assert_eq!(next.t, 0.01);
        assert_eq!(next.step, 1);
    }

    #[test]
    fn zero_horizon_returns_immediately() {
        let g = GridSpec::periodic_2pi(32).unwrap();
        let s = SolverState::new(Field::from_fn(g, f64::cos));
        let ctl = StepControl::fixed(0.01, 0.0);
        let out = advance(s.clone(), &Preset::CamassaHolm.params(), &ctl, 1, |_, _| {});
        assert_eq!(out.steps_taken, 0);
        assert_eq!(out.status, RunStatus::Completed);
        assert_eq!(out.state, s);
    }

    #[test]
    fn breaking_predicate() {
        let g = GridSpec::periodic_2pi(32).unwrap();
        let ctl = StepControl::fixed(0.01, 1.0);
        let smooth = SolverState::new(Field::from_fn(g, |x| 0.1 * x.sin()));
        assert!(!detect_breaking(&smooth, &ctl));
        let mut v = vec![0.0; 32];
        v[5] = f64::NAN;
        assert!(detect_breaking(
            &SolverState::new(Field::from_raw(g, v)),
            &ctl
        ));
        let mut tight = ctl.clone();
        tight.breaking_threshold = 0.05; // ‖u_x‖_∞ = 0.1 = 2 × threshold
        assert!(detect_breaking(&smooth, &tight));
    }

    #[test]
    fn non_finite_stage_marks_breaking() {
        let g = GridSpec::periodic_2pi(16).unwrap();
        let params = crate::model::ModelParams::new(1, 3, 4.0, vec![]).unwrap();
        let s = SolverState::at(0.5, Field::from_fn(g, |x| 1e110 * x.cos()));
        let next = rk4_step(&s, 0.1, &params);
        assert!(next.breaking);
        assert_eq!(next.breaking_time, Some(0.5));
        assert_eq!(next.t, 0.5);
    }

    #[test]
    fn step_limit_is_reported() {
        let g = GridSpec::periodic_2pi(32).unwrap();
        let s = SolverState::new(Field::from_fn(g, |x| 0.1 * x.cos()));
        let mut ctl = StepControl::fixed(0.01, 1.0);
        ctl.max_steps = 3;
        let out = advance(s, &Preset::CamassaHolm.params(), &ctl, 0, |_, _| {});
        assert_eq!(out.status, RunStatus::StepLimit);
        assert_eq!(out.steps_taken, 3);
    }

    #[test]
    fn final_time_is_hit_exactly() {
        let g = GridSpec::periodic_2pi(32).unwrap();
        let s = SolverState::new(Field::from_fn(g, |x| 0.2 * x.cos()));
        let ctl = StepControl::new(TimeStep::Auto, 0.37);
        let mut seen = Vec::new();
        let out = advance(s, &Preset::CamassaHolm.params(), &ctl, 5, |st, _| {
            seen.push(st.t)
        });
        assert_eq!(out.status, RunStatus::Completed);
        assert_eq!(out.state.t, 0.37);
        assert_eq!(*seen.last().unwrap(), 0.37);
        assert!(seen.windows(2).all(|w| w[0] <= w[1]));
    }
}
