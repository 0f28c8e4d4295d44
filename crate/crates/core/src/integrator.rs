//! Forward-Euler time stepping of a scenario and its snapshot schedule.

use crate::cascade::{CascadeRhs, CascadeState, Family, Operators};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::scalar::Real;
use crate::scenario::Scenario;
use crate::velocity::{NumericVelocity, RiemannVelocity, VelocityKind, VelocitySpec};

/// `cfl·ε / speed`, or `cfl·ε` when nothing moves.
pub fn stable_dt(epsilon: f64, cfl: f64, speed: f64) -> f64 {
    if speed > 0.0 {
        cfl * epsilon / speed
    } else {
        cfl * epsilon
    }
}

/// Uniform steps covering `[start, end]` with `dt ≤ dt_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    pub dt: f64,
}

/// Step sizes fitted so every snapshot time is hit exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct StepControl {
    pub dt_max: f64,
    pub times: Vec<f64>,
}

impl StepControl {
    pub fn new(dt_max: f64, times: Vec<f64>) -> Result<Self> {
        if !(dt_max.is_finite() && dt_max > 0.0) {
            return Err(Error::InvalidParams(format!(
                "time step must be positive (got {dt_max})"
            )));
        }
        Ok(Self { dt_max, times })
    }

    /// One interval per gap between consecutive times, starting from 0.
    pub fn schedule(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut start = 0.0;
        for &end in &self.times {
            let len = end - start;
            if len <= 0.0 {
                continue;
            }
            let steps = ((len / self.dt_max - 1e-9).ceil() as usize).max(1);
            out.push(Interval {
                start,
                end,
                steps,
                dt: len / steps as f64,
            });
            start = end;
        }
        out
    }
}

/// Anything that yields the time derivative of a state and rebuilds its derived fields.
pub trait RhsEvaluator<T: Real> {
    fn rhs(&self, state: &CascadeState<T>) -> Result<CascadeRhs<T>>;
    fn refresh(&self, state: &mut CascadeState<T>) -> Result<()>;
}

impl<T: Real> RhsEvaluator<T> for Operators<T> {
    fn rhs(&self, state: &CascadeState<T>) -> Result<CascadeRhs<T>> {
        Operators::rhs(self, state)
    }

    fn refresh(&self, state: &mut CascadeState<T>) -> Result<()> {
        Operators::refresh(self, state)
    }
}

fn magnitude<T: Real>(f: &Field<T>) -> f64 {
    f.values()
        .iter()
        .map(|v| {
            let v = v.to_f64_lossy().abs();
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        })
        .fold(0.0, f64::max)
}

/// Fails with [`Error::BlowUp`] if any field carries a non-finite value.
pub fn check_blow_up<T: Real>(state: &CascadeState<T>) -> Result<()> {
    for (name, f) in state.named_fields() {
        if f.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                time: state.time,
                field: name.to_string(),
                magnitude: magnitude(f),
            });
        }
    }
    Ok(())
}

/// One explicit Euler step of the evolved fields; `u` is advanced only when
/// it belongs to the system (nonlinear family).
pub fn euler_step<T: Real>(
    state: &CascadeState<T>,
    eval: &impl RhsEvaluator<T>,
    dt: f64,
) -> Result<CascadeState<T>> {
    let rhs = eval.rhs(state)?;
    let h = T::of(dt);
    let mut next = state.clone();
    next.time = state.time + dt;
    next.density_raw.axpy(h, &rhs.density)?;
    if let Some(du) = &rhs.u {
        next.u.axpy(h, du)?;
    }
    if let (Some(w), Some(dw)) = (next.w.as_mut(), rhs.w.as_ref()) {
        w.axpy(h, dw)?;
    }
    if let (Some(z), Some(dz)) = (next.z.as_mut(), rhs.z.as_ref()) {
        z.axpy(h, dz)?;
    }
    eval.refresh(&mut next)?;
    check_blow_up(&next)?;
    Ok(next)
}

/// Produces one velocity component over time.
#[derive(Clone, Debug)]
enum Driver<T> {
    Riemann {
        wave: RiemannVelocity,
        along_y: bool,
    },
    Numeric(NumericVelocity<T>),
    Fixed(Field<T>),
}

impl<T: Real> Driver<T> {
    fn build(
        spec: &VelocitySpec,
        grid: Grid<T>,
        scenario: &Scenario,
        along_y: bool,
    ) -> Result<Self> {
        let p = &scenario.params;
        Ok(match &spec.kind {
            VelocityKind::ExactRiemann { left, right } => {
                let mut wave = RiemannVelocity::new(*left, *right, spec.a, p.velocity_width());
                wave.shape = p.bump;
                Driver::Riemann { wave, along_y }
            }
            VelocityKind::Numeric(profile) => Driver::Numeric(NumericVelocity::new(
                profile.sample(grid),
                T::of(spec.a),
                grid.spacing(),
                T::of(p.beta),
            )?),
            VelocityKind::Prescribed(profile) => Driver::Fixed(profile.sample(grid)),
            VelocityKind::Zero => Driver::Fixed(Field::zeros(grid)),
        })
    }

    fn at(&self, grid: Grid<T>, t: f64) -> Field<T> {
        match self {
            Driver::Riemann {
                wave,
                along_y: false,
            } => wave.field(grid, t),
            Driver::Riemann {
                wave,
                along_y: true,
            } => wave.field_along_y(grid, t),
            Driver::Numeric(n) => n.current().clone(),
            Driver::Fixed(f) => f.clone(),
        }
    }

    fn advance(&mut self, dt: f64) -> Result<()> {
        if let Driver::Numeric(n) = self {
            n.step(T::of(dt))?;
        }
        Ok(())
    }
}

/// One recorded state.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub time: f64,
    pub state: CascadeState<T>,
}

/// Divergence detected during a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub time: f64,
    pub field: String,
    pub magnitude: f64,
}

/// Snapshots of a run, truncated at the first divergence if one occurred.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub diverged: Option<Divergence>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> Option<&Snapshot<T>> {
        self.snapshots.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }
}

/// A scenario bound to a grid, ready to run.
#[derive(Debug)]
pub struct Simulation<T: Real> {
    scenario: Scenario,
    grid: Grid<T>,
    ops: Operators<T>,
    u_driver: Option<Driver<T>>,
    uy_driver: Option<Driver<T>>,
    control: StepControl,
    u_bound: f64,
    state: CascadeState<T>,
}

impl<T: Real> Simulation<T> {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let scenario = scenario.effective()?;
        let grid: Grid<T> = scenario.grid()?;
        let ops = Operators::new(&grid, &scenario.params, &scenario.system)?;
        let sys = &scenario.system;
        let two_d = grid.dimension() == 2;

        let mut u_driver = Some(Driver::build(&scenario.velocity, grid, &scenario, false)?);
        let uy_driver = if two_d {
            Some(Driver::build(&scenario.velocity_y, grid, &scenario, true)?)
        } else {
            None
        };
        let u = u_driver
            .as_ref()
            .map(|d| d.at(grid, 0.0))
            .unwrap_or_else(|| Field::zeros(grid));
        let u_y = uy_driver.as_ref().map(|d| d.at(grid, 0.0));
        let u_bound = scenario.velocity.u_bound() + scenario.velocity_y.u_bound();

        let speed = if sys.family == Family::Nonlinear {
            // the nonlinear system evolves u itself
            u_driver = None;
            sys.f.bound().max(sys.g.bound())
        } else {
            let mut s = sys.transport_multiplier() * u_bound;
            if scenario.velocity.is_numeric() {
                s = s.max(2.0 * sys.a.abs() * scenario.velocity.u_bound());
            }
            s
        };
        let dt_max = stable_dt(scenario.params.epsilon, scenario.params.cfl, speed);
        let control = StepControl::new(dt_max, scenario.snapshot_times())?;

        let (density_raw, w, z) = match ops.density_kernel() {
            Some(k) => (
                scenario.initial.density.realize(grid, k)?,
                sys.has_w()
                    .then(|| scenario.initial.w.realize(grid, k))
                    .transpose()?,
                sys.has_z()
                    .then(|| scenario.initial.z.realize(grid, k))
                    .transpose()?,
            ),
            None => {
                // no mollifier in the nonlinear system: Riemann steps stay sharp
                let k = crate::mollifier::Kernel::with_scale(
                    &grid,
                    T::of(scenario.params.velocity_width()),
                    scenario.params.bump,
                )?;
                (scenario.initial.density.realize(grid, &k)?, None, None)
            }
        };
        let mut state = CascadeState {
            time: 0.0,
            density: density_raw.clone(),
            density_raw,
            u,
            u_y,
            w,
            z,
        };
        ops.refresh(&mut state)?;
        check_blow_up(&state)?;
        Ok(Self {
            scenario,
            grid,
            ops,
            u_driver,
            uy_driver,
            control,
            u_bound,
            state,
        })
    }

    /// The scenario with `ε` set to the grid spacing.
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn operators(&self) -> &Operators<T> {
        &self.ops
    }

    pub fn control(&self) -> &StepControl {
        &self.control
    }

    pub fn state(&self) -> &CascadeState<T> {
        &self.state
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let mut next = euler_step(&self.state, &self.ops, dt)?;
        if let Some(d) = self.u_driver.as_mut() {
            d.advance(dt)?;
            next.u = d.at(self.grid, next.time);
        }
        if let Some(d) = self.uy_driver.as_mut() {
            d.advance(dt)?;
            next.u_y = Some(d.at(self.grid, next.time));
        }
        self.state = next;
        check_blow_up(&self.state)
    }

    fn check_velocity_bound(&self) -> Result<()> {
        if self.scenario.system.family == Family::Nonlinear {
            return Ok(());
        }
        let m = magnitude(&self.state.u).max(self.state.u_y.as_ref().map_or(0.0, magnitude));
        if m > self.u_bound * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::InvalidParams(format!(
                "velocity reached {m} above its bound {} at t = {}",
                self.u_bound, self.state.time
            )));
        }
        Ok(())
    }

    /// Runs to `t_end`, recording every snapshot time. A blow-up ends the run
    /// early and is reported in [`Trajectory::diverged`]. A simulation
    /// runs once; later calls fail.
    pub fn run(&mut self) -> Result<Trajectory<T>> {
        if self.state.time != 0.0 {
            return Err(Error::InvalidParams("simulation has already run".into()));
        }
        let mut snapshots = Vec::new();
        if self.control.times.first() == Some(&0.0) {
            snapshots.push(Snapshot {
                time: 0.0,
                state: self.state.clone(),
            });
        }
        for iv in self.control.schedule() {
            for k in 0..iv.steps {
                match self.step(iv.dt) {
                    Ok(()) => {}
                    Err(Error::BlowUp {
                        time,
                        field,
                        magnitude,
                    }) => {
                        return Ok(Trajectory {
                            snapshots,
                            diverged: Some(Divergence {
                                time,
                                field,
                                magnitude,
                            }),
                        })
                    }
                    Err(e) => return Err(e),
                }
                if k + 1 == iv.steps {
                    // pin the clock to the snapshot time
                    self.state.time = iv.end;
                }
            }
            self.check_velocity_bound()?;
            snapshots.push(Snapshot {
                time: iv.end,
                state: self.state.clone(),
            });
        }
        Ok(Trajectory {
            snapshots,
            diverged: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    const ADVECT: &str = r#"
system.family = "ps3"
system.p = [0]
scheme.epsilon = 0.02
scheme.alpha = 0.3
scheme.beta = 0.15
scheme.smoothing = "cells"
scheme.smoothing_cells = 3
scheme.cfl = 0.4
velocity.kind = "prescribed"
velocity.terms = [["const", 1.0]]
initial.density.kind = "analytic"
initial.density.terms = [["const", 1.0], ["sin", 0.5, 1]]
run.t_end = 0.5
"#;

    #[test]
    fn schedule_hits_snapshot_times() {
        let c = StepControl::new(0.1, vec![0.0, 0.3, 1.0]).unwrap();
        let s = c.schedule();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].steps, 3);
        assert!((s[0].dt - 0.1).abs() < 1e-15);
        assert_eq!(s[1].steps, 7);
        let c = StepControl::new(0.25, vec![0.3]).unwrap();
        let s = c.schedule();
        assert_eq!(s[0].steps, 2);
        assert_eq!(s[0].dt, 0.15);
        assert!(StepControl::new(0.0, vec![1.0]).is_err());
    }

    #[test]
    fn stable_dt_cases() {
        assert_eq!(stable_dt(0.01, 0.5, 0.0), 0.005);
        assert_eq!(stable_dt(0.01, 0.5, 2.0), 0.0025);
    }

    #[test]
    fn runs_are_deterministic_and_snapshot_exact() {
        let s = parse_scenario(ADVECT).unwrap();
        let a = Simulation::<f64>::new(&s).unwrap().run().unwrap();
        let b = Simulation::<f64>::new(&s).unwrap().run().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.times(), vec![0.0, 0.5]);
        assert!(a.diverged.is_none());
    }

    #[test]
    fn constant_advection_translates_profile() {
        let s = parse_scenario(ADVECT).unwrap();
        let traj = Simulation::<f64>::new(&s).unwrap().run().unwrap();
        let last = &traj.last().unwrap().state;
        let g = *last.grid();
        // raw density ≈ 1 + 0.5 sin(x - t), diffused by upwinding at O(h)
        let err = g
            .nodes()
            .iter()
            .zip(last.density_raw.values())
            .map(|(&x, &v)| (v - (1.0 + 0.5 * (x - 0.5).sin())).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.01, "{err}");
    }

    #[test]
    fn half_steps_differ_at_second_order() {
        let s = parse_scenario(ADVECT).unwrap();
        let sim = Simulation::<f64>::new(&s).unwrap();
        let st = sim.state().clone();
        let dt = 1e-3;
        let one = euler_step(&st, sim.operators(), dt).unwrap();
        let half = euler_step(&st, sim.operators(), dt / 2.0).unwrap();
        let two = euler_step(&half, sim.operators(), dt / 2.0).unwrap();
        let diff = one
            .density_raw
            .values()
            .iter()
            .zip(two.density_raw.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // A u·dt²/ε² style bound for the flux-split operator
        let bound = 10.0 * dt * dt / (s.params.epsilon * s.params.epsilon);
        assert!(diff < bound, "{diff} vs {bound}");
        assert!(diff > 0.0);
    }

    #[test]
    fn first_order_in_dt() {
        let base = parse_scenario(ADVECT).unwrap();
        let run = |cfl: f64| {
            let mut s = base.clone();
            s.params.cfl = cfl;
            s.t_end = 0.2;
            Simulation::<f64>::new(&s)
                .unwrap()
                .run()
                .unwrap()
                .last()
                .unwrap()
                .state
                .density_raw
                .clone()
        };
        let fields: Vec<_> = [0.4, 0.2, 0.1, 0.05].iter().map(|&c| run(c)).collect();
        let limit: Vec<f64> = fields[3]
            .values()
            .iter()
            .zip(fields[2].values())
            .map(|(a, b)| 2.0 * a - b)
            .collect();
        let err = |f: &Field<f64>| {
            f.values()
                .iter()
                .zip(&limit)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let e: Vec<f64> = fields.iter().map(err).collect();
        for pair in e[..3].windows(2) {
            let r = pair[1] / pair[0];
            assert!((r - 0.5).abs() < 0.1, "{e:?}");
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let s = parse_scenario(ADVECT).unwrap();
        let sim = Simulation::<f64>::new(&s).unwrap();
        let mut st = sim.state().clone();
        st.w.as_mut().unwrap().values_mut()[3] = f64::NAN;
        match check_blow_up(&st) {
            Err(Error::BlowUp {
                field, magnitude, ..
            }) => {
                assert_eq!(field, "w");
                assert!(magnitude.is_infinite());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn f32_and_f64_agree() {
        let s = parse_scenario(ADVECT).unwrap();
        let a = Simulation::<f64>::new(&s).unwrap().run().unwrap();
        let b = Simulation::<f32>::new(&s).unwrap().run().unwrap();
        let (fa, fb) = (
            &a.last().unwrap().state.density,
            &b.last().unwrap().state.density,
        );
        for (x, y) in fa.values().iter().zip(fb.values()) {
            assert!((x - *y as f64).abs() < 1e-4);
        }
    }
}
