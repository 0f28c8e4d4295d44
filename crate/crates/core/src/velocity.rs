//! Bounded velocity families for the Burgers-type law `∂t u + ∂x(a·u²) = 0`.
//!
//! Three sources: the periodic Riemann solution smoothed by the bump
//! profile, a flux-split numeric solver with periodic three-cell averaging,
//! and time-independent analytic profiles.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::mollifier::BumpShape;
use crate::profile::Analytic;
use crate::scalar::Real;
use crate::transport::transport_rhs;

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// Periodic Riemann solution: the jump `left → right` at `x = 0` and the
/// wrap-around jump `right → left` at `x = ±π`, each smoothed over `width`.
///
/// Both waves are centred at `a(left + right)·t` relative to their origin, so
/// they stay half a period apart; the solution is exact while each wave
/// (fan half-width plus smoothing) stays within a quarter period of its centre.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiemannVelocity {
    pub left: f64,
    pub right: f64,
    pub a: f64,
    pub width: f64,
    pub shape: BumpShape,
}

impl RiemannVelocity {
    pub fn new(left: f64, right: f64, a: f64, width: f64) -> Self {
        Self {
            left,
            right,
            a,
            width,
            shape: BumpShape::Standard,
        }
    }

    pub fn bound(&self) -> f64 {
        self.left.abs().max(self.right.abs())
    }

    /// Last time at which both waves are still separated.
    pub fn horizon(&self) -> f64 {
        let spread = self.a.abs() * (self.left - self.right).abs();
        let room = PI / 2.0 - self.width;
        if room <= 0.0 {
            0.0
        } else if spread == 0.0 {
            f64::INFINITY
        } else {
            room / spread
        }
    }

    pub fn sample(&self, x: f64, t: f64) -> f64 {
        let centre = self.a * (self.left + self.right) * t;
        if wrap(x - centre).abs() < PI / 2.0 {
            self.wave(self.left, self.right, centre + wrap(x - centre), t)
        } else {
            self.wave(self.right, self.left, centre + wrap(x - PI - centre), t)
        }
    }

    /// Single wave from a step at the origin, `xx` in unwrapped coordinates.
    fn wave(&self, left: f64, right: f64, xx: f64, t: f64) -> f64 {
        let s = self.width;
        let profile = self.shape.profile();
        let (xa, xb) = (2.0 * self.a * left * t, 2.0 * self.a * right * t);
        if left == right {
            return left;
        }
        if xb <= xa {
            // shock (or the t = 0 step)
            let p = self.a * (left + right) * t;
            if s == 0.0 {
                return if xx < p { left } else { right };
            }
            return left + (right - left) * profile.cdf((xx - p) / s);
        }
        if s == 0.0 {
            return if xx <= xa {
                left
            } else if xx >= xb {
                right
            } else {
                xx / (2.0 * self.a * t)
            };
        }
        // ramp convolved with the bump: (y)⁺ * φ_s = s·R(y/s)
        let slope = (right - left) / (xb - xa);
        left + slope
            * s
            * (profile.second_antiderivative((xx - xa) / s)
                - profile.second_antiderivative((xx - xb) / s))
    }

    pub fn field<T: Real>(&self, grid: Grid<T>, t: f64) -> Field<T> {
        if grid.dimension() == 1 {
            Field::from_fn(grid, |x| T::of(self.sample(x.to_f64_lossy(), t)))
        } else {
            Field::from_fn_2d(grid, |x, _| T::of(self.sample(x.to_f64_lossy(), t)))
        }
    }

    /// Same wave pattern varying along y (for the y-velocity of 2-D runs).
    pub fn field_along_y<T: Real>(&self, grid: Grid<T>, t: f64) -> Field<T> {
        Field::from_fn_2d(grid, |_, y| T::of(self.sample(y.to_f64_lossy(), t)))
    }
}

/// Sharp entropy solution on the torus (no smoothing layer).
pub fn riemann_velocity(u_l: f64, u_r: f64, a: f64, x: f64, t: f64) -> f64 {
    RiemannVelocity::new(u_l, u_r, a, 0.0).sample(x, t)
}

/// `(u⁺, u⁻)` with `u⁺ - u⁻ = u` and `u⁺ + u⁻ = |u|`.
pub fn sign_split<T: Real>(u: &Field<T>) -> (Field<T>, Field<T>) {
    (u.map(|v| v.max(T::zero())), u.map(|v| (-v).max(T::zero())))
}

/// One forward-Euler step of `∂t u + ∂x(a·u²) = 0` written as flux-split
/// transport of `u` by the velocity `a·u`.
///
/// The update is monotone when `2·|a|·‖u‖∞·dt ≤ ε`; larger steps are refused.
pub fn step_velocity_numeric<T: Real>(u: &Field<T>, a: T, epsilon: T, dt: T) -> Result<Field<T>> {
    let limit = stability_limit(u, a, epsilon);
    if dt > limit * (T::one() + T::of(1e-12)) {
        return Err(Error::UnstableStep {
            dt: dt.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    let speed = u.map(|v| a * v);
    let rhs = transport_rhs(u, &speed, epsilon, T::one())?;
    let mut next = u.clone();
    next.axpy(dt, &rhs)?;
    Ok(next)
}

fn stability_limit<T: Real>(u: &Field<T>, a: T, epsilon: T) -> T {
    let m = (a + a).abs() * u.max_abs();
    if m == T::zero() {
        T::infinity()
    } else {
        epsilon / m
    }
}

/// Conservative three-cell average `(u[i-1] + u[i] + u[i+1]) / 3`.
pub fn smooth_three_cell<T: Real>(u: &Field<T>) -> Field<T> {
    let n = u.len();
    let v = u.values();
    let third = T::one() / T::of(3.0);
    let out = (0..n)
        .map(|i| (v[(i + n - 1) % n] + v[i] + v[(i + 1) % n]) * third)
        .collect();
    Field::from_raw(*u.grid(), out)
}

/// Numeric velocity with the averaging cadence `⌈ε^(β-1)⌉` steps.
#[derive(Clone, Debug)]
pub struct NumericVelocity<T> {
    u: Field<T>,
    a: T,
    epsilon: T,
    every: usize,
    steps: usize,
}

impl<T: Real> NumericVelocity<T> {
    pub fn new(initial: Field<T>, a: T, epsilon: T, beta: T) -> Result<Self> {
        if initial.grid().dimension() != 1 {
            return Err(Error::UnsupportedDimension(
                "the numeric velocity solver is 1-D only".into(),
            ));
        }
        let every = epsilon
            .powf(beta - T::one())
            .ceil()
            .to_usize()
            .unwrap_or(usize::MAX)
            .max(1);
        Ok(Self {
            u: initial,
            a,
            epsilon,
            every,
            steps: 0,
        })
    }

    pub fn current(&self) -> &Field<T> {
        &self.u
    }

    pub fn smoothing_interval(&self) -> usize {
        self.every
    }

    pub fn step(&mut self, dt: T) -> Result<()> {
        self.u = step_velocity_numeric(&self.u, self.a, self.epsilon, dt)?;
        self.steps += 1;
        if self.steps.is_multiple_of(self.every) {
            self.u = smooth_three_cell(&self.u);
        }
        Ok(())
    }
}

/// How the velocity `u` of a cascade run is produced.
#[derive(Clone, Debug, PartialEq)]
pub enum VelocityKind {
    /// Smoothed periodic Riemann solution with states `(left, right)`.
    ExactRiemann { left: f64, right: f64 },
    /// Flux-split numeric solution started from an analytic profile.
    Numeric(Analytic),
    /// Time-independent analytic velocity.
    Prescribed(Analytic),
    /// Identically zero.
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VelocitySpec {
    pub kind: VelocityKind,
    /// Coefficient of the flux `a·u²`.
    pub a: f64,
}

impl VelocitySpec {
    pub fn zero() -> Self {
        Self {
            kind: VelocityKind::Zero,
            a: 1.0,
        }
    }

    /// `M₁ = sup|u|` over all times.
    pub fn u_bound(&self) -> f64 {
        match &self.kind {
            VelocityKind::ExactRiemann { left, right } => left.abs().max(right.abs()),
            VelocityKind::Numeric(p) | VelocityKind::Prescribed(p) => p.bound(),
            VelocityKind::Zero => 0.0,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, VelocityKind::Numeric(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_state_everywhere() {
        for x in [-3.0, -1.0, 0.0, 0.5, 3.1] {
            assert_eq!(riemann_velocity(1.0, 1.0, 0.7, x, 0.8), 1.0);
        }
    }

    #[test]
    fn shock_moves_at_rankine_hugoniot_speed() {
        // left state just behind the shock at x = 3t, right state ahead of it
        for t in [0.25, 0.5, 1.0] {
            assert_eq!(riemann_velocity(2.0, 1.0, 1.0, 3.0 * t - 1e-9, t), 2.0);
            assert_eq!(riemann_velocity(2.0, 1.0, 1.0, 3.0 * t + 1e-9, t), 1.0);
        }
        assert_eq!(riemann_velocity(2.0, 1.0, 1.0, -1e-12, 0.2), 2.0);
        // at t = 1 the wrap-around fan (spanning π+2 .. π+4) covers x = 0
        let u = riemann_velocity(2.0, 1.0, 1.0, -1e-12, 1.0);
        assert!((u - PI / 2.0).abs() < 1e-9, "{u}");
    }

    #[test]
    fn rarefaction_midpoint_matches_characteristics() {
        let (ul, ur, a, t) = (1.0, 2.0, 1.0, 0.4);
        let x = 3.0 * t;
        // characteristics from the origin: x = 2·a·u·t, scan u over the fan
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=100_000 {
            let u = ul + (ur - ul) * k as f64 / 100_000.0;
            let d = (2.0 * a * u * t - x).abs();
            if d < best.0 {
                best = (d, u);
            }
        }
        assert!((best.1 - 1.5).abs() < 1e-4);
        assert!((riemann_velocity(ul, ur, a, x, t) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn smoothed_wave_is_bounded_with_controlled_gradient() {
        for (l, r) in [(2.0, 1.0), (1.0, 2.0), (-1.0, 0.5)] {
            let rv = RiemannVelocity::new(l, r, 1.0, 0.05);
            let g = Grid::<f64>::line(4096).unwrap();
            for t in [0.0, 0.3, 0.9] {
                let f = rv.field(g, t);
                let (lo, hi) = (l.min(r), l.max(r));
                assert!(f
                    .values()
                    .iter()
                    .all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
                let max_grad = (0..4096)
                    .map(|i| (f.values()[(i + 1) % 4096] - f.values()[i]).abs() / g.spacing())
                    .fold(0.0, f64::max);
                // |Δu|·max φ / width
                let bound = (l - r).abs() * BumpShape::Standard.profile().phi(0.0) / 0.05;
                assert!(max_grad <= bound * 1.01, "{max_grad} > {bound}");
            }
        }
    }

    #[test]
    fn smoothed_fan_reduces_to_sharp_far_from_edges() {
        let rv = RiemannVelocity::new(1.0, 2.0, 1.0, 0.02);
        let t = 0.5;
        for x in [0.5, 1.2, 1.5, 1.9, 2.5] {
            assert!((rv.sample(x, t) - riemann_velocity(1.0, 2.0, 1.0, x, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_constant_is_fixed_point() {
        let g = Grid::<f64>::line(64).unwrap();
        let u = Field::constant(g, 1.3);
        let next = step_velocity_numeric(&u, 1.0, g.spacing(), 0.3 * g.spacing()).unwrap();
        assert!(next.values().iter().all(|&v| (v - 1.3).abs() < 1e-15));
    }

    #[test]
    fn numeric_rejects_large_step() {
        let g = Grid::<f64>::line(64).unwrap();
        let u = Field::constant(g, 2.0);
        let eps = g.spacing();
        assert!(matches!(
            step_velocity_numeric(&u, 1.0, eps, eps / 3.0),
            Err(Error::UnstableStep { .. })
        ));
        assert!(step_velocity_numeric(&u, 1.0, eps, eps / 4.0).is_ok());
    }

    #[test]
    fn numeric_shock_tracks_exact_position() {
        let n = 2048;
        let g = Grid::<f64>::line(n).unwrap();
        let eps = g.spacing();
        let exact = RiemannVelocity::new(2.0, 1.0, 1.0, 0.0);
        let mut sim = NumericVelocity::new(exact.field(g, 0.0), 1.0, eps, 0.2).unwrap();
        let t_end = 0.2;
        let dt_max = eps / (2.0 * 2.0);
        let steps = (t_end / dt_max).ceil() as usize;
        let dt = t_end / steps as f64;
        let sup0 = sim.current().max_abs();
        for _ in 0..steps {
            sim.step(dt).unwrap();
            assert!(sim.current().max_abs() <= sup0 + 1e-12);
        }
        // locate the 1.5 crossing near x = 0.6
        let u = sim.current();
        let x = g.nodes();
        let i = (n / 2..n - 1)
            .find(|&i| u.values()[i] >= 1.5 && u.values()[i + 1] < 1.5)
            .unwrap();
        let (u0, u1) = (u.values()[i], u.values()[i + 1]);
        let pos = x[i] + eps * (u0 - 1.5) / (u0 - u1);
        assert!((pos - 3.0 * t_end).abs() < 2.0 * eps, "shock at {pos}");
    }

    #[test]
    fn averaging_cadence() {
        let g = Grid::<f64>::line(1000).unwrap();
        let v = NumericVelocity::new(Field::zeros(g), 1.0, 1e-3, 0.5).unwrap();
        assert_eq!(v.smoothing_interval(), 32);
    }

    #[test]
    fn sign_split_examples() {
        let g = Grid::<f64>::line(4).unwrap();
        let u = Field::new(g, vec![3.0, -2.0, 0.0, 1.0]).unwrap();
        let (p, m) = sign_split(&u);
        assert_eq!(p.values(), &[3.0, 0.0, 0.0, 1.0]);
        assert_eq!(m.values(), &[0.0, 2.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn sign_split_reconstructs(v in prop::collection::vec(-1e3f64..1e3, 4..64)) {
            let g = Grid::line(v.len()).unwrap();
            let u = Field::new(g, v).unwrap();
            let (p, m) = sign_split(&u);
            for i in 0..u.len() {
                prop_assert_eq!(p.values()[i] - m.values()[i], u.values()[i]);
                prop_assert_eq!(p.values()[i] + m.values()[i], u.values()[i].abs());
            }
        }

        #[test]
        fn numeric_step_respects_max_principle(v in prop::collection::vec(-2.0f64..2.0, 8..128), cfl in 0.1f64..1.0) {
            let g = Grid::line(v.len()).unwrap();
            let u = Field::new(g, v).unwrap();
            let eps = g.spacing();
            let dt = cfl * eps / (2.0 * u.max_abs().max(1e-9));
            let next = step_velocity_numeric(&u, 1.0, eps, dt).unwrap();
            let (lo, hi) = u.values().iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            prop_assert!(next.values().iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
            let s = smooth_three_cell(&next);
            prop_assert!(s.max_abs() <= next.max_abs() + 1e-12);
        }
    }
}
