//! Norms, weak residuals, primitive areas, delta-power estimates and the
//! characteristics oracle.

use crate::cascade::{CascadeState, Operators};
use crate::error::{Error, Result};
use crate::grid::{primitive, Field, Grid};
use crate::integrator::Trajectory;
use crate::profile::Analytic;
use crate::scalar::Real;
use crate::velocity::{VelocityKind, VelocitySpec};

/// `h^d · Σ|values|`.
pub fn l1_norm<T: Real>(field: &Field<T>) -> T {
    let s: T = field.values().iter().map(|v| v.abs()).sum();
    field.grid().cell_measure() * s
}

/// `max|a − b|` on a shared grid.
pub fn sup_error<T: Real>(a: &Field<T>, b: &Field<T>) -> Result<T> {
    a.ensure_same_grid(b)?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())))
}

/// Equation whose weak form is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    /// `∂t v + b·∂x(uv) = 0`, tested on the mollified density.
    Density,
    /// `∂t w + ∂x(c·uw + P(v)) = 0`.
    W,
    /// `∂t Z + ∂x(z_t·uZ + z_s·vw) = 0`.
    Z,
}

impl Equation {
    pub fn name(&self) -> &'static str {
        match self {
            Equation::Density => "density",
            Equation::W => "w",
            Equation::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "density" | "v" => Some(Equation::Density),
            "w" => Some(Equation::W),
            "z" | "Z" => Some(Equation::Z),
            _ => None,
        }
    }
}

/// Periodic test function `1`, `cos kx` or `sin kx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestFunction {
    One,
    Cos(u32),
    Sin(u32),
}

impl TestFunction {
    /// `{1} ∪ {cos kx, sin kx : 1 ≤ k ≤ K}`.
    pub fn basis(k_max: u32) -> Vec<Self> {
        let mut out = vec![TestFunction::One];
        for k in 1..=k_max {
            out.push(TestFunction::Cos(k));
            out.push(TestFunction::Sin(k));
        }
        out
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TestFunction::One => 1.0,
            TestFunction::Cos(k) => (k as f64 * x).cos(),
            TestFunction::Sin(k) => (k as f64 * x).sin(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            TestFunction::One => 0.0,
            TestFunction::Cos(k) => -(k as f64) * (k as f64 * x).sin(),
            TestFunction::Sin(k) => k as f64 * (k as f64 * x).cos(),
        }
    }
}

/// `∫ ∂t(target)·ψ − ∫ flux·ψ′` at one state, with `∂t` taken from the scheme's rhs.
pub fn residual_at<T: Real>(
    ops: &Operators<T>,
    state: &CascadeState<T>,
    equation: Equation,
    psi: TestFunction,
) -> Result<f64> {
    let grid = *state.grid();
    if grid.dimension() != 1 {
        return Err(Error::UnsupportedDimension(
            "weak residuals are computed for 1-D cascades".into(),
        ));
    }
    let spec = ops.spec();
    let rhs = ops.rhs(state)?;
    let missing = |name: &str| Error::IncompatibleFields(format!("state has no `{name}` field"));
    let (dt_target, flux): (Vec<T>, Vec<T>) = match equation {
        Equation::Density => {
            let b = T::of(spec.b);
            let dv = ops.mollify(&rhs.density)?.into_values();
            let flux = state
                .u
                .values()
                .iter()
                .zip(state.density.values())
                .map(|(&u, &v)| b * u * v)
                .collect();
            (dv, flux)
        }
        Equation::W => {
            let w = state.w.as_ref().ok_or_else(|| missing("w"))?;
            let dw = rhs.w.ok_or_else(|| missing("w"))?.into_values();
            let c = T::of(spec.c);
            let flux = (0..grid.len())
                .map(|i| {
                    c * state.u.values()[i] * w.values()[i] + spec.p.eval(state.density.values()[i])
                })
                .collect();
            (dw, flux)
        }
        Equation::Z => {
            let z = state.z.as_ref().ok_or_else(|| missing("Z"))?;
            let w = state.w.as_ref().ok_or_else(|| missing("w"))?;
            let dz = rhs.z.ok_or_else(|| missing("Z"))?.into_values();
            let (zt, zs) = (T::of(spec.z_transport), T::of(spec.z_source));
            let flux = (0..grid.len())
                .map(|i| {
                    zt * state.u.values()[i] * z.values()[i]
                        + zs * state.density.values()[i] * w.values()[i]
                })
                .collect();
            (dz, flux)
        }
    };
    let h = grid.spacing().to_f64_lossy();
    let nodes = grid.nodes();
    let mut time_part = 0.0;
    let mut flux_part = 0.0;
    for (i, x) in nodes.iter().enumerate() {
        let x = x.to_f64_lossy();
        time_part += dt_target[i].to_f64_lossy() * psi.value(x);
        flux_part += flux[i].to_f64_lossy() * psi.derivative(x);
    }
    Ok(h * (time_part - flux_part))
}

/// `sup` over snapshots and test functions of `|R_k(t)|` for one run.
pub fn weak_residual<T: Real>(
    ops: &Operators<T>,
    trajectory: &Trajectory<T>,
    equation: Equation,
    k_max: u32,
) -> Result<f64> {
    let snaps = &trajectory.snapshots;
    if snaps.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "weak residual needs at least 3 snapshots (got {})",
            snaps.len()
        )));
    }
    let dt0 = snaps[1].time - snaps[0].time;
    let uniform = snaps
        .windows(2)
        .all(|p| ((p[1].time - p[0].time) - dt0).abs() <= 1e-9 * dt0.abs().max(1.0));
    if !(dt0 > 0.0 && uniform) {
        return Err(Error::InsufficientData(
            "weak residual needs uniformly spaced snapshots".into(),
        ));
    }
    let basis = TestFunction::basis(k_max);
    let mut sup: f64 = 0.0;
    for s in snaps {
        for &psi in &basis {
            sup = sup.max(residual_at(ops, &s.state, equation, psi)?.abs());
        }
    }
    Ok(sup)
}

/// Residuals along an ε ladder with the fitted decay exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub epsilons: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log R` against `log ε`.
    pub exponent: f64,
}

impl ResidualReport {
    pub fn new(epsilons: Vec<f64>, residuals: Vec<f64>) -> Result<Self> {
        if epsilons.len() != residuals.len() || epsilons.len() < 2 {
            return Err(Error::InsufficientData(
                "a residual ladder needs at least 2 matching entries".into(),
            ));
        }
        if epsilons.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::InvalidLadder("ε must be strictly decreasing".into()));
        }
        if residuals.iter().any(|r| !r.is_finite()) {
            return Err(Error::InsufficientData("residuals must be finite".into()));
        }
        let exponent = fit_log_slope(&epsilons, &residuals);
        Ok(Self {
            epsilons,
            residuals,
            exponent,
        })
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.residuals.windows(2).all(|p| p[1] < p[0])
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Default half-width (in cells) of the window integrated by [`shock_area`].
pub fn shock_window(cells: usize) -> usize {
    (cells / 64).max(8)
}

/// Area between the primitive of `w` and its baseline around the shock.
///
/// The field is rotated so the extremum of `W − mean(W)` sits at the centre
/// `c`; with `m = shock_window(N)` the baseline is the median of `W` over
/// `[c−2m, c−m)` left of the shock and over `(c+m, c+2m]` right of it, and
/// the area is `h·Σ_{|i−c|<m} |W − baseline|`. Grids too small for the two
/// side windows use the median over the quarter of cells farthest from `c`.
pub fn shock_area<T: Real>(w: &Field<T>) -> Result<f64> {
    shock_area_with_window(w, shock_window(w.len()))
}

pub fn shock_area_with_window<T: Real>(w: &Field<T>, m: usize) -> Result<f64> {
    let big = primitive(w)?;
    let n = w.len();
    let h = w.grid().spacing().to_f64_lossy();
    let vals: Vec<f64> = big.values().iter().map(|v| v.to_f64_lossy()).collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let peak = vals
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (i, v)| {
            let d = (v - mean).abs();
            if d > acc.1 {
                (i, d)
            } else {
                acc
            }
        })
        .0;
    let c = n / 2;
    // rotate w (not W) so the primitive restarts at the left edge of the window
    let shift = (c + n - peak) % n;
    let mut rotated = vec![0.0; n];
    for (i, v) in w.values().iter().enumerate() {
        rotated[(i + shift) % n] = v.to_f64_lossy();
    }
    let mut acc = 0.0;
    let prim: Vec<f64> = rotated
        .iter()
        .map(|v| {
            acc += v;
            h * acc
        })
        .collect();
    if m == 0 || 4 * m >= n {
        let mut by_distance: Vec<usize> = (0..n).collect();
        by_distance.sort_by_key(|&i| std::cmp::Reverse(i.abs_diff(c)));
        let base = median(by_distance[..n / 4].iter().map(|&i| prim[i]).collect());
        return Ok(h * prim.iter().map(|v| (v - base).abs()).sum::<f64>());
    }
    let left = median(prim[c - 2 * m..c - m].to_vec());
    let right = median(prim[c + m + 1..=c + 2 * m].to_vec());
    let area = (c + 1 - m..c + m)
        .map(|i| {
            let base = if i <= c { left } else { right };
            (prim[i] - base).abs()
        })
        .sum::<f64>();
    Ok(h * area)
}

/// `1 + mean log₂(A(ε/2)/A(ε))` over consecutive pairs of a halving ladder.
pub fn estimate_delta_power(ladder: &[(f64, f64)]) -> Result<f64> {
    if ladder.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "a delta-power estimate needs at least 3 ladder entries (got {})",
            ladder.len()
        )));
    }
    for p in ladder.windows(2) {
        let r = p[1].0 / p[0].0;
        if (r - 0.5).abs() > 1e-9 {
            return Err(Error::InvalidLadder(format!(
                "each ε must halve the previous one ({} → {})",
                p[0].0, p[1].0
            )));
        }
    }
    if let Some(&(eps, a)) = ladder.iter().find(|(_, a)| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::InvalidLadder(format!(
            "area at ε = {eps} must be positive (got {a})"
        )));
    }
    let sum: f64 = ladder
        .windows(2)
        .map(|p| 1.0 + (p[1].1 / p[0].1).log2())
        .sum();
    Ok(sum / (ladder.len() - 1) as f64)
}

/// Discrete second antiderivative `primitive(primitive(f))`.
pub fn double_primitive<T: Real>(field: &Field<T>) -> Result<Field<T>> {
    primitive(&primitive(field)?)
}

fn rk4(x: f64, dt: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let k1 = f(x);
    let k2 = f(x + 0.5 * dt * k1);
    let k3 = f(x + 0.5 * dt * k2);
    let k4 = f(x + dt * k3);
    x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Exact solution of `∂t X + ∂x(m·u·X) = 0`, `X(·,0) = v0`, for a
/// time-independent velocity, by characteristics.
///
/// Each node is traced back to its foot `x0` with RK4 (step `t/1000`); the
/// Jacobian `J` then follows `dJ/ds = J·m·u'(x)` forward and the value is
/// `v0(x0)/J`.
pub fn characteristics_oracle<T: Real>(
    velocity: &VelocitySpec,
    multiplier: f64,
    v0: &Analytic,
    grid: Grid<T>,
    t: f64,
) -> Result<Field<T>> {
    if grid.dimension() != 1 {
        return Err(Error::UnsupportedDimension("the oracle is 1-D".into()));
    }
    let profile = match &velocity.kind {
        VelocityKind::Prescribed(p) => p.clone(),
        VelocityKind::Zero => Analytic::constant(0.0),
        _ => {
            return Err(Error::InvalidParams(
                "the characteristics oracle needs a smooth time-independent velocity".into(),
            ))
        }
    };
    let steps = 1000;
    let dt = t / steps as f64;
    let speed = |x: f64| multiplier * profile.value(x);
    let mut out = Vec::with_capacity(grid.len());
    for x in grid.nodes() {
        let mut x0 = x.to_f64_lossy();
        for _ in 0..steps {
            x0 = rk4(x0, -dt, &speed);
        }
        // forward pass carrying (x, log J) with the same step
        let mut xs = x0;
        let mut j = 1.0;
        for k in 0..steps {
            let f = |p: (f64, f64)| (speed(p.0), p.1 * multiplier * profile.dx(p.0));
            let y = (xs, j);
            let k1 = f(y);
            let k2 = f((y.0 + 0.5 * dt * k1.0, y.1 + 0.5 * dt * k1.1));
            let k3 = f((y.0 + 0.5 * dt * k2.0, y.1 + 0.5 * dt * k2.1));
            let k4 = f((y.0 + dt * k3.0, y.1 + dt * k3.1));
            xs += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            j += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            if j <= 0.0 {
                return Err(Error::CharacteristicsCrossed {
                    x0,
                    time: (k + 1) as f64 * dt,
                });
            }
        }
        out.push(T::of(v0.value(x0) / j));
    }
    Field::new(grid, out)
}
