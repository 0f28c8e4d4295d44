//! Right-hand sides of the triangular cascades: velocity → density → w → Z.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::mollifier::{convolve, gradient_2d, BumpShape, Convolver, Kernel};
use crate::scalar::Real;
use crate::transport::{nonlinear_rhs, transport_rhs, transport_rhs_2d, FluxFn};

/// Polynomial with ascending coefficients `c₀ + c₁v + c₂v² + …`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Default for Polynomial {
    fn default() -> Self {
        Self::new(Vec::new())
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// `lead·vⁿ`
    pub fn monomial(n: usize, lead: f64) -> Self {
        let mut c = vec![0.0; n + 1];
        c[n] = lead;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap_or(&0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn eval<T: Real>(&self, v: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * v + T::of(c))
    }
}

/// How mollifier and velocity-layer widths follow ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothing {
    /// Widths `ε^α` (density), `ε^β` (velocity layer) and `ε^γ` (Z source).
    Power,
    /// Every width equals `k·ε`.
    Cells(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub cfl: f64,
    pub smoothing: Smoothing,
    pub bump: BumpShape,
}

impl SchemeParams {
    /// Default exponents for degree `n`: `α = 0.9/(n+1)` and `β = α/2`.
    ///
    /// With a Z equation `α` is lowered to `0.9/(3(n+2))` so that some `γ`
    /// satisfies both `γ > (n+2)α` and `2γ + (n+2)α < 1`; `γ = 1.05·(n+2)α`
    /// is then pulled back to the middle of that interval if needed.
    pub fn default_exponents(n: usize, with_z: bool) -> (f64, f64, Option<f64>) {
        let n = n as f64;
        let mut alpha = 0.9 / (n + 1.0);
        if with_z {
            alpha = alpha.min(0.9 / (3.0 * (n + 2.0)));
        }
        let beta = alpha / 2.0;
        let gamma = with_z.then(|| {
            let lower = (n + 2.0) * alpha;
            let upper = (1.0 - lower) / 2.0;
            let g = 1.05 * lower;
            if g < upper {
                g
            } else {
                0.5 * (lower + upper)
            }
        });
        (alpha, beta, gamma)
    }

    pub fn density_scale(&self) -> f64 {
        match self.smoothing {
            Smoothing::Power => self.epsilon.powf(self.alpha),
            Smoothing::Cells(k) => k * self.epsilon,
        }
    }

    pub fn velocity_width(&self) -> f64 {
        match self.smoothing {
            Smoothing::Power => self.epsilon.powf(self.beta),
            Smoothing::Cells(k) => k * self.epsilon,
        }
    }

    pub fn z_scale(&self) -> Option<f64> {
        self.gamma.map(|g| match self.smoothing {
            Smoothing::Power => self.epsilon.powf(g),
            Smoothing::Cells(k) => k * self.epsilon,
        })
    }

    /// Checks the exponent constraints for a source polynomial of degree `n`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self, n: usize, needs_gamma: bool) -> Result<()> {
        let eps = self.epsilon;
        if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
            return Err(Error::validation(
                "scheme.epsilon",
                format!("epsilon must lie in (0, 1) (got {eps})"),
            ));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::validation(
                "scheme.cfl",
                format!("cfl must lie in (0, 1] (got {})", self.cfl),
            ));
        }
        let (a, b) = (self.alpha, self.beta);
        let cap = 1.0 / (n as f64 + 1.0);
        if !(b > 0.0) {
            return Err(Error::validation(
                "scheme.beta",
                format!("beta must satisfy 0 < beta (got {b})"),
            ));
        }
        if !(b < a) {
            return Err(Error::validation(
                "scheme.beta",
                format!("beta must satisfy beta < alpha (got beta = {b}, alpha = {a})"),
            ));
        }
        if !(a < cap) {
            return Err(Error::validation(
                "scheme.alpha",
                format!("alpha must satisfy alpha < 1/(n+1) = {cap:.4} for n = {n} (got {a})"),
            ));
        }
        if needs_gamma {
            let g = self.gamma.ok_or_else(|| {
                Error::validation(
                    "scheme.gamma",
                    "gamma is required when a Z equation is present",
                )
            })?;
            let lower = (n as f64 + 2.0) * a;
            if !(g > lower) {
                return Err(Error::validation(
                    "scheme.gamma",
                    format!("gamma must satisfy gamma > (n+2)·alpha = {lower:.4} (got {g})"),
                ));
            }
            if !(2.0 * g + lower < 1.0) {
                return Err(Error::validation(
                    "scheme.gamma",
                    format!(
                        "gamma must satisfy 2·gamma + (n+2)·alpha < 1 (got {:.4})",
                        2.0 * g + lower
                    ),
                ));
            }
        }
        match self.smoothing {
            Smoothing::Power => {
                if self.density_scale() < 2.0 * eps {
                    return Err(Error::validation(
                        "scheme.alpha",
                        format!(
                            "kernel width epsilon^alpha = {:e} must be at least 2·epsilon",
                            self.density_scale()
                        ),
                    ));
                }
                if let Some(z) = self.z_scale() {
                    if needs_gamma && z < 2.0 * eps {
                        return Err(Error::validation(
                            "scheme.gamma",
                            format!(
                                "kernel width epsilon^gamma = {z:e} must be at least 2·epsilon"
                            ),
                        ));
                    }
                }
            }
            Smoothing::Cells(k) => {
                if !(k >= 2.0 && k.is_finite()) {
                    return Err(Error::validation(
                        "scheme.smoothing_cells",
                        format!("smoothing width must span at least 2 cells (got {k})"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// u, density, w
    Ps3,
    /// u, density, w, Z
    Ps4,
    /// 2-D velocity (u, u_y), density ρ, w
    TwoD,
    /// `u` and `v` transported by bounded laws `f(u,v)`, `g(u,v)`
    Nonlinear,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Ps3 => "ps3",
            Family::Ps4 => "ps4",
            Family::TwoD => "two_d",
            Family::Nonlinear => "nonlinear_2x2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ps3" => Some(Family::Ps3),
            "ps4" => Some(Family::Ps4),
            "two_d" => Some(Family::TwoD),
            "nonlinear_2x2" => Some(Family::Nonlinear),
            _ => None,
        }
    }

    pub fn dimension(&self) -> usize {
        if *self == Family::TwoD {
            2
        } else {
            1
        }
    }
}

/// Which system is solved and its coefficients.
///
/// `∂t u + ∂x(a·u²) = 0`, `∂t v + b·∂x(uv) = 0`,
/// `∂t w + c·∂x(uw) + ∂x P(v) [+ ∂y Q(v)] = 0`,
/// `∂t Z + z_transport·∂x(uZ) + z_source·∂x(vw) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub family: Family,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: Polynomial,
    pub q: Polynomial,
    pub z_transport: f64,
    pub z_source: f64,
    pub f: FluxFn,
    pub g: FluxFn,
}

impl SystemSpec {
    pub fn ps3(a: f64, b: f64, c: f64, p: Polynomial) -> Self {
        Self {
            family: Family::Ps3,
            a,
            b,
            c,
            p,
            q: Polynomial::default(),
            z_transport: 0.0,
            z_source: 0.0,
            f: FluxFn::Const(0.0),
            g: FluxFn::Const(0.0),
        }
    }

    /// The δ″ system with multipliers (2, 2, 2, 6) and `P = 2v²`.
    pub fn ps4() -> Self {
        Self {
            family: Family::Ps4,
            z_transport: 2.0,
            z_source: 6.0,
            ..Self::ps3(1.0, 2.0, 2.0, Polynomial::monomial(2, 2.0))
        }
    }

    pub fn two_d(p: Polynomial, q: Polynomial) -> Self {
        Self {
            family: Family::TwoD,
            q,
            ..Self::ps3(1.0, 1.0, 1.0, p)
        }
    }

    pub fn nonlinear(f: FluxFn, g: FluxFn) -> Self {
        Self {
            family: Family::Nonlinear,
            f,
            g,
            ..Self::ps3(1.0, 1.0, 1.0, Polynomial::default())
        }
    }

    /// Degree entering the exponent constraints.
    pub fn degree(&self) -> usize {
        match self.family {
            Family::TwoD => self.p.degree().max(self.q.degree()),
            Family::Nonlinear => 0,
            _ => self.p.degree(),
        }
    }

    pub fn has_z(&self) -> bool {
        self.family == Family::Ps4
    }

    pub fn has_w(&self) -> bool {
        self.family != Family::Nonlinear
    }

    /// Largest transport multiplier applied to the velocity.
    pub fn transport_multiplier(&self) -> f64 {
        match self.family {
            Family::Nonlinear => 1.0,
            Family::Ps4 => self.b.abs().max(self.c.abs()).max(self.z_transport.abs()),
            _ => self.b.abs().max(self.c.abs()),
        }
    }
}

/// Fields of a cascade at one instant. `density` is always the mollified
/// view of `density_raw` (for the nonlinear family they coincide).
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeState<T> {
    pub time: f64,
    pub u: Field<T>,
    pub u_y: Option<Field<T>>,
    pub density_raw: Field<T>,
    pub density: Field<T>,
    pub w: Option<Field<T>>,
    pub z: Option<Field<T>>,
}

impl<T: Real> CascadeState<T> {
    pub fn grid(&self) -> &Grid<T> {
        self.u.grid()
    }

    /// `(name, field)` pairs in a fixed order, for blow-up checks and output.
    pub fn named_fields(&self) -> Vec<(&'static str, &Field<T>)> {
        let mut out = vec![("u", &self.u)];
        if let Some(uy) = &self.u_y {
            out.push(("u_y", uy));
        }
        out.push(("X", &self.density_raw));
        out.push(("v", &self.density));
        if let Some(w) = &self.w {
            out.push(("w", w));
        }
        if let Some(z) = &self.z {
            out.push(("Z", z));
        }
        out
    }
}

/// Time derivatives of the evolving fields.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeRhs<T> {
    /// Only for the nonlinear family, where `u` is part of the system.
    pub u: Option<Field<T>>,
    pub density: Field<T>,
    pub w: Option<Field<T>>,
    pub z: Option<Field<T>>,
}

enum DensityKernel<T: Real> {
    Line(Convolver<T>),
    Plane(Kernel<T>),
}

/// Kernels and coefficients bound to one grid; evaluates the scheme.
pub struct Operators<T: Real> {
    epsilon: T,
    spec: SystemSpec,
    density: Option<DensityKernel<T>>,
    z_kernel: Option<Convolver<T>>,
}

impl<T: Real> std::fmt::Debug for Operators<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Operators")
            .field("epsilon", &self.epsilon)
            .field("spec", &self.spec)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Operators<T> {
    pub fn new(grid: &Grid<T>, params: &SchemeParams, spec: &SystemSpec) -> Result<Self> {
        if grid.dimension() != spec.family.dimension() {
            return Err(Error::UnsupportedDimension(format!(
                "family {} needs a {}-D grid",
                spec.family.name(),
                spec.family.dimension()
            )));
        }
        let epsilon = grid.spacing();
        let density = match spec.family {
            Family::Nonlinear => None,
            _ => {
                let k = Kernel::with_scale(grid, T::of(params.density_scale()), params.bump)?;
                Some(if grid.dimension() == 1 {
                    DensityKernel::Line(Convolver::new(grid, k)?)
                } else {
                    DensityKernel::Plane(k)
                })
            }
        };
        let z_kernel = if spec.has_z() {
            let scale = params.z_scale().ok_or_else(|| {
                Error::validation(
                    "scheme.gamma",
                    "gamma is required when a Z equation is present",
                )
            })?;
            let k = Kernel::with_scale(grid, T::of(scale), params.bump)?;
            Some(Convolver::new(grid, k)?)
        } else {
            None
        };
        Ok(Self {
            epsilon,
            spec: spec.clone(),
            density,
            z_kernel,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn density_kernel(&self) -> Option<&Kernel<T>> {
        match &self.density {
            Some(DensityKernel::Line(c)) => Some(c.kernel()),
            Some(DensityKernel::Plane(k)) => Some(k),
            None => None,
        }
    }

    /// Mollified view of a raw density (identity for the nonlinear family).
    pub fn mollify(&self, raw: &Field<T>) -> Result<Field<T>> {
        match &self.density {
            Some(DensityKernel::Line(c)) => {
                Ok(Field::from_raw(*raw.grid(), c.smooth(raw.values())))
            }
            Some(DensityKernel::Plane(k)) => convolve(raw, k),
            None => Ok(raw.clone()),
        }
    }

    /// `∂x` of the mollified density in 1-D.
    pub fn density_derivative(&self, raw: &Field<T>) -> Result<Field<T>> {
        match &self.density {
            Some(DensityKernel::Line(c)) => {
                Ok(Field::from_raw(*raw.grid(), c.derivative(raw.values())))
            }
            _ => Err(Error::UnsupportedDimension(
                "density derivative is defined for the 1-D cascades".into(),
            )),
        }
    }

    /// Source `P'(v)·∂x v` of the w equation.
    pub fn w_source(&self, v: &Field<T>, vx: &Field<T>) -> Result<Field<T>> {
        let dp = self.spec.p.derivative();
        v.zip_map(vx, |a, b| dp.eval(a) * b)
    }

    /// Convolution of `v·w` with the Z kernel, differentiated.
    pub fn z_source(&self, v: &Field<T>, w: &Field<T>) -> Result<Field<T>> {
        let conv = self
            .z_kernel
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("no Z kernel configured for this system".into()))?;
        let vw = v.zip_map(w, |a, b| a * b)?;
        Ok(Field::from_raw(*v.grid(), conv.derivative(vw.values())))
    }

    /// Recomputes the mollified view after the raw density changed.
    pub fn refresh(&self, state: &mut CascadeState<T>) -> Result<()> {
        state.density = self.mollify(&state.density_raw)?;
        Ok(())
    }

    pub fn rhs(&self, state: &CascadeState<T>) -> Result<CascadeRhs<T>> {
        match self.spec.family {
            Family::Ps3 => ps3_rhs(state, self),
            Family::Ps4 => ps4_rhs(state, self),
            Family::TwoD => twod_rhs(state, self),
            Family::Nonlinear => nonlinear_system_rhs(state, self),
        }
    }
}

fn require<'a, T>(f: &'a Option<Field<T>>, name: &str) -> Result<&'a Field<T>> {
    f.as_ref()
        .ok_or_else(|| Error::IncompatibleFields(format!("state has no `{name}` field")))
}

/// Density transport and the w equation with source `-P'(v)·∂x v`.
pub fn ps3_rhs<T: Real>(state: &CascadeState<T>, ops: &Operators<T>) -> Result<CascadeRhs<T>> {
    let spec = &ops.spec;
    let eps = ops.epsilon;
    let density = transport_rhs(&state.density_raw, &state.u, eps, T::of(spec.b))?;
    let w = require(&state.w, "w")?;
    let vx = ops.density_derivative(&state.density_raw)?;
    let source = ops.w_source(&state.density, &vx)?;
    let mut rhs_w = transport_rhs(w, &state.u, eps, T::of(spec.c))?;
    rhs_w.axpy(-T::one(), &source)?;
    Ok(CascadeRhs {
        u: None,
        density,
        w: Some(rhs_w),
        z: None,
    })
}

/// [`ps3_rhs`] plus the Z equation with source `-z_source·∂x[(v·w) * φ_γ]`.
pub fn ps4_rhs<T: Real>(state: &CascadeState<T>, ops: &Operators<T>) -> Result<CascadeRhs<T>> {
    let mut out = ps3_rhs(state, ops)?;
    let spec = &ops.spec;
    let z = require(&state.z, "Z")?;
    let w = require(&state.w, "w")?;
    let mut rhs_z = transport_rhs(z, &state.u, ops.epsilon, T::of(spec.z_transport))?;
    let source = ops.z_source(&state.density, w)?;
    rhs_z.axpy(-T::of(spec.z_source), &source)?;
    out.z = Some(rhs_z);
    Ok(out)
}

/// Two-dimensional density transport and w equation with sources
/// `-P'(ρ)·∂x ρ - Q'(ρ)·∂y ρ`.
pub fn twod_rhs<T: Real>(state: &CascadeState<T>, ops: &Operators<T>) -> Result<CascadeRhs<T>> {
    let spec = &ops.spec;
    let eps = ops.epsilon;
    let uy = require(&state.u_y, "u_y")?;
    let w = require(&state.w, "w")?;
    let kernel = ops
        .density_kernel()
        .ok_or_else(|| Error::InvalidParams("no density kernel".into()))?;
    let density = transport_rhs_2d(&state.density_raw, &state.u, uy, eps, T::of(spec.b))?;
    let (rx, ry) = gradient_2d(&state.density_raw, kernel)?;
    let (dp, dq) = (spec.p.derivative(), spec.q.derivative());
    let mut rhs_w = transport_rhs_2d(w, &state.u, uy, eps, T::of(spec.c))?;
    let rho = state.density.values();
    for (i, r) in rhs_w.values_mut().iter_mut().enumerate() {
        *r = *r - dp.eval(rho[i]) * rx.values()[i] - dq.eval(rho[i]) * ry.values()[i];
    }
    Ok(CascadeRhs {
        u: None,
        density,
        w: Some(rhs_w),
        z: None,
    })
}

/// Both components of the nonlinear 2×2 system (`u` and `v = density_raw`).
pub fn nonlinear_system_rhs<T: Real>(
    state: &CascadeState<T>,
    ops: &Operators<T>,
) -> Result<CascadeRhs<T>> {
    let (ru, rv) = nonlinear_rhs(
        &state.u,
        &state.density_raw,
        &ops.spec.f,
        &ops.spec.g,
        ops.epsilon,
    )?;
    Ok(CascadeRhs {
        u: Some(ru),
        density: rv,
        w: None,
        z: None,
    })
}
