//! Closed family of analytic initial profiles and Riemann step data.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::mollifier::{convolve, Kernel};
use crate::scalar::Real;

/// One summand of an analytic profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Term {
    Const(f64),
    /// `amp·sin(k·x)`
    Sin {
        amp: f64,
        k: f64,
    },
    /// `amp·cos(k·x)`
    Cos {
        amp: f64,
        k: f64,
    },
    /// `amp·sin(k·y)` (2-D only)
    SinY {
        amp: f64,
        k: f64,
    },
    /// `amp·cos(k·y)` (2-D only)
    CosY {
        amp: f64,
        k: f64,
    },
}

impl Term {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        match *self {
            Term::Const(a) => a,
            Term::Sin { amp, k } => amp * (k * x).sin(),
            Term::Cos { amp, k } => amp * (k * x).cos(),
            Term::SinY { amp, k } => amp * (k * y).sin(),
            Term::CosY { amp, k } => amp * (k * y).cos(),
        }
    }

    pub fn dx(&self, x: f64) -> f64 {
        match *self {
            Term::Sin { amp, k } => amp * k * (k * x).cos(),
            Term::Cos { amp, k } => -amp * k * (k * x).sin(),
            _ => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Term::Const(_) => "const",
            Term::Sin { .. } => "sin",
            Term::Cos { .. } => "cos",
            Term::SinY { .. } => "sin_y",
            Term::CosY { .. } => "cos_y",
        }
    }

    fn depends_on_y(&self) -> bool {
        matches!(self, Term::SinY { .. } | Term::CosY { .. })
    }

    /// Wave numbers must be integers so the term is periodic on the torus.
    pub fn validate(&self) -> Result<()> {
        let k = match *self {
            Term::Const(a) => return finite("const", a),
            Term::Sin { amp, k }
            | Term::Cos { amp, k }
            | Term::SinY { amp, k }
            | Term::CosY { amp, k } => {
                finite(self.name(), amp)?;
                k
            }
        };
        if !k.is_finite() || k.fract() != 0.0 {
            return Err(Error::validation(
                self.name(),
                format!("wave number must be an integer for a 2π-periodic profile (got {k})"),
            ));
        }
        Ok(())
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, "coefficient must be finite"))
    }
}

/// Sum of [`Term`]s.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Analytic {
    pub terms: Vec<Term>,
}

impl Analytic {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![Term::Const(c)])
    }

    pub fn value(&self, x: f64) -> f64 {
        self.value_2d(x, 0.0)
    }

    pub fn value_2d(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|t| t.value(x, y)).sum()
    }

    pub fn dx(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.dx(x)).sum()
    }

    /// Upper bound of `|value|` (sum of absolute amplitudes).
    pub fn bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match *t {
                Term::Const(a) => a.abs(),
                Term::Sin { amp, .. }
                | Term::Cos { amp, .. }
                | Term::SinY { amp, .. }
                | Term::CosY { amp, .. } => amp.abs(),
            })
            .sum()
    }

    pub fn depends_on_y(&self) -> bool {
        self.terms.iter().any(Term::depends_on_y)
    }

    pub fn sample<T: Real>(&self, grid: Grid<T>) -> Field<T> {
        if grid.dimension() == 1 {
            Field::from_fn(grid, |x| T::of(self.value(x.to_f64_lossy())))
        } else {
            Field::from_fn_2d(grid, |x, y| {
                T::of(self.value_2d(x.to_f64_lossy(), y.to_f64_lossy()))
            })
        }
    }
}

/// Initial data of a transported field.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum InitialData {
    #[default]
    Zero,
    /// `left` on `[-π, 0)`, `right` on `[0, π)`, jump smoothed by the density kernel.
    Riemann {
        left: f64,
        right: f64,
    },
    Analytic(Analytic),
}

impl InitialData {
    pub fn is_zero(&self) -> bool {
        matches!(self, InitialData::Zero)
    }

    /// Samples the data; Riemann steps (along x) are smoothed with `kernel`.
    pub fn realize<T: Real>(&self, grid: Grid<T>, kernel: &Kernel<T>) -> Result<Field<T>> {
        match self {
            InitialData::Zero => Ok(Field::zeros(grid)),
            InitialData::Analytic(a) => Ok(a.sample(grid)),
            InitialData::Riemann { left, right } => {
                let (l, r) = (T::of(*left), T::of(*right));
                let step = if grid.dimension() == 1 {
                    Field::from_fn(grid, |x| if x < T::zero() { l } else { r })
                } else {
                    Field::from_fn_2d(grid, |x, _| if x < T::zero() { l } else { r })
                };
                convolve(&step, kernel)
            }
        }
    }
}
