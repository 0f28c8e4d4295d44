//! Flux-split transport stencils on one-cell shifts.
//!
//! A cell sends `X·u⁺` to its right neighbour and `X·u⁻` to its left one, so
//! every unit of mass leaving a cell enters another and the update telescopes.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::scalar::Real;

/// `len` cells starting at flat index `start`, `stride` apart.
#[derive(Clone, Copy)]
struct Line {
    start: usize,
    stride: usize,
    len: usize,
}

/// `out[i] = coef·((p[i-1] - p[i]) + (m[i+1] - m[i]))` with `p = X·u⁺`,
/// `m = X·u⁻`, read along one periodic grid line.
fn stencil<T: Real>(x: &[T], u: &[T], coef: T, out: &mut [T], line: Line, accumulate: bool) {
    let Line { start, stride, len } = line;
    let at = |i: usize| start + i * stride;
    let p = |i: usize| x[at(i)] * u[at(i)].max(T::zero());
    let m = |i: usize| x[at(i)] * (-u[at(i)]).max(T::zero());
    for i in 0..len {
        let prev = if i == 0 { len - 1 } else { i - 1 };
        let next = if i + 1 == len { 0 } else { i + 1 };
        let v = coef * ((p(prev) - p(i)) + (m(next) - m(i)));
        if accumulate {
            out[at(i)] = out[at(i)] + v;
        } else {
            out[at(i)] = v;
        }
    }
}

fn check_pair<T: Real>(x: &Field<T>, u: &Field<T>) -> Result<()> {
    x.ensure_same_grid(u)
}

/// Right-hand side of the 1-D flux-split transport ODE with multiplier `b`:
/// `(b/ε)[X[i-1]u⁺[i-1] - X[i]|u[i]| + X[i+1]u⁻[i+1]]`.
pub fn transport_rhs<T: Real>(x: &Field<T>, u: &Field<T>, epsilon: T, b: T) -> Result<Field<T>> {
    check_pair(x, u)?;
    if x.grid().dimension() != 1 {
        return Err(Error::UnsupportedDimension(
            "transport_rhs expects 1-D fields; use transport_rhs_2d".into(),
        ));
    }
    let n = x.len();
    let mut out = vec![T::zero(); n];
    stencil(
        x.values(),
        u.values(),
        b / epsilon,
        &mut out,
        Line {
            start: 0,
            stride: 1,
            len: n,
        },
        false,
    );
    Ok(Field::from_raw(*x.grid(), out))
}

/// Transport along both axes of a 2-D grid: velocity `u` along x, `v` along y.
pub fn transport_rhs_2d<T: Real>(
    x: &Field<T>,
    u: &Field<T>,
    v: &Field<T>,
    epsilon: T,
    b: T,
) -> Result<Field<T>> {
    if x.grid().dimension() != 2 {
        return Err(Error::UnsupportedDimension(
            "transport_rhs_2d expects 2-D fields".into(),
        ));
    }
    check_pair(x, u)?;
    check_pair(x, v)?;
    let n = x.grid().cells_per_axis();
    let coef = b / epsilon;
    let mut out = vec![T::zero(); x.len()];
    for iy in 0..n {
        stencil(
            x.values(),
            u.values(),
            coef,
            &mut out,
            Line {
                start: iy * n,
                stride: 1,
                len: n,
            },
            false,
        );
    }
    for ix in 0..n {
        stencil(
            x.values(),
            v.values(),
            coef,
            &mut out,
            Line {
                start: ix,
                stride: n,
                len: n,
            },
            true,
        );
    }
    Ok(Field::from_raw(*x.grid(), out))
}

/// Bounded velocity laws `f(u, v)` for the nonlinear 2×2 system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FluxFn {
    /// `tanh(c·u)`
    TanhScaled(f64),
    /// `sin(c1·u + c2·v)`
    SinSum(f64, f64),
    /// `c`
    Const(f64),
}

impl FluxFn {
    /// Parses `tanh_scaled(c)`, `sin_sum(c1,c2)` or `const(c)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |msg: &str| Error::InvalidFlux(format!("{msg}: `{text}`"));
        let open = text.find('(').ok_or_else(|| bad("expected name(args)"))?;
        if !text.ends_with(')') {
            return Err(bad("expected name(args)"));
        }
        let name = text[..open].trim();
        let args = text[open + 1..text.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|_| bad("arguments must be numbers"))?;
        if args.iter().any(|a| !a.is_finite()) {
            return Err(bad("arguments must be finite"));
        }
        match (name, args.as_slice()) {
            ("tanh_scaled", [c]) => Ok(FluxFn::TanhScaled(*c)),
            ("sin_sum", [c1, c2]) => Ok(FluxFn::SinSum(*c1, *c2)),
            ("const", [c]) => Ok(FluxFn::Const(*c)),
            ("linear" | "square" | "exp", _) => Err(bad("unbounded flux is not admissible")),
            ("tanh_scaled" | "sin_sum" | "const", _) => Err(bad("wrong number of arguments")),
            _ => Err(bad("unknown flux family")),
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match *self {
            FluxFn::TanhScaled(c) => (c * u).tanh(),
            FluxFn::SinSum(c1, c2) => (c1 * u + c2 * v).sin(),
            FluxFn::Const(c) => c,
        }
    }

    /// Sup of `|f|` over the plane.
    pub fn bound(&self) -> f64 {
        match *self {
            FluxFn::TanhScaled(c) => {
                if c == 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            FluxFn::SinSum(c1, c2) => {
                if c1 == 0.0 && c2 == 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            FluxFn::Const(c) => c.abs(),
        }
    }

    pub fn field<T: Real>(&self, u: &Field<T>, v: &Field<T>) -> Result<Field<T>> {
        u.zip_map(v, |a, b| {
            T::of(self.eval(a.to_f64_lossy(), b.to_f64_lossy()))
        })
    }
}

impl std::fmt::Display for FluxFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FluxFn::TanhScaled(c) => write!(f, "tanh_scaled({c:?})"),
            FluxFn::SinSum(a, b) => write!(f, "sin_sum({a:?},{b:?})"),
            FluxFn::Const(c) => write!(f, "const({c:?})"),
        }
    }
}

/// Right-hand sides of the nonlinear system: `u` transported by `f(u,v)`,
/// `v` transported by `g(u,v)`.
pub fn nonlinear_rhs<T: Real>(
    u: &Field<T>,
    v: &Field<T>,
    f: &FluxFn,
    g: &FluxFn,
    epsilon: T,
) -> Result<(Field<T>, Field<T>)> {
    check_pair(u, v)?;
    let fu = f.field(u, v)?;
    let gv = g.field(u, v)?;
    Ok((
        transport_rhs(u, &fu, epsilon, T::one())?,
        transport_rhs(v, &gv, epsilon, T::one())?,
    ))
}
