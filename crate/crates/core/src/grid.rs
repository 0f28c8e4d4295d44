//! Periodic grids on the torus `[-π, π)` (and its square) with cell-valued fields.
//!
//! Cells are centred at `x_i = -π + i·h` with `h = 2π/N`. All index arithmetic
//! wraps modulo `N` on every axis. In 2-D, values are stored row-major: the
//! value at `(ix, iy)` lives at `iy·N + ix`, so `x` runs along a row.

use crate::error::{Error, Result};
use crate::scalar::{sum_values, CompensatedSum, Real, COMPENSATION_THRESHOLD};

pub const MIN_CELLS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    dimension: usize,
    cells_per_axis: usize,
    spacing: T,
}

impl<T: Real> Grid<T> {
    pub fn new(dimension: usize, cells_per_axis: usize) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dimension}"
            )));
        }
        if cells_per_axis < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_CELLS} cells per axis, got {cells_per_axis}"
            )));
        }
        Ok(Self {
            dimension,
            cells_per_axis,
            spacing: T::two_pi() / T::of_usize(cells_per_axis),
        })
    }

    pub fn line(cells: usize) -> Result<Self> {
        Self::new(1, cells)
    }

    pub fn square(cells_per_axis: usize) -> Result<Self> {
        Self::new(2, cells_per_axis)
    }

    /// Grid whose spacing is the closest match to `epsilon` (`N = round(2π/ε)`).
    pub fn for_epsilon(dimension: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let n = (std::f64::consts::TAU / epsilon).round();
        if n > usize::MAX as f64 / 4.0 {
            return Err(Error::InvalidGrid(format!(
                "epsilon {epsilon} is too small"
            )));
        }
        Self::new(dimension, n as usize)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    /// Total number of cells (`N` or `N²`).
    pub fn len(&self) -> usize {
        self.cells_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Measure of one cell: `h` in 1-D, `h²` in 2-D.
    pub fn cell_measure(&self) -> T {
        self.spacing.powi(self.dimension as i32)
    }

    /// Centre coordinate of cell `i` along an axis.
    pub fn node(&self, i: usize) -> T {
        -T::PI() + T::of_usize(i) * self.spacing
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.cells_per_axis).map(|i| self.node(i)).collect()
    }

    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.cells_per_axis as isize) as usize
    }
}

/// Cell values on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    /// Wraps `values`, rejecting wrong lengths and non-finite entries.
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::IncompatibleFields(format!(
                "grid has {} cells but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        let field = Self { grid, values };
        field.check_finite("field")?;
        Ok(field)
    }

    /// Wraps values without the finiteness scan; for internal hot paths.
    pub(crate) fn from_raw(grid: Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Grid<T>, value: T) -> Self {
        Self::from_raw(grid, vec![value; grid.len()])
    }

    /// Samples `f(x)` at the cell centres of a 1-D grid, or `f(x)` for every row of a 2-D grid.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Self {
        match grid.dimension() {
            1 => Self::from_raw(grid, grid.nodes().into_iter().map(f).collect()),
            _ => Self::from_fn_2d(grid, |x, _| f(x)),
        }
    }

    pub fn from_fn_2d(grid: Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        let n = grid.cells_per_axis();
        let nodes = grid.nodes();
        let mut values = Vec::with_capacity(grid.len());
        if grid.dimension() == 1 {
            values.extend(nodes.iter().map(|&x| f(x, T::zero())));
        } else {
            for iy in 0..n {
                for ix in 0..n {
                    values.push(f(nodes[ix], nodes[iy]));
                }
            }
        }
        Self::from_raw(grid, values)
    }

    /// Discrete delta: `1/h^d` in cell `index`, zero elsewhere (unit mass).
    pub fn discrete_delta(grid: Grid<T>, index: usize) -> Self {
        let mut f = Self::zeros(grid);
        f.values[index % grid.len()] = T::one() / grid.cell_measure();
        f
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self, name: &str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite {
                field: name.to_string(),
                index,
            }),
            None => Ok(()),
        }
    }

    pub fn ensure_same_grid(&self, other: &Field<T>) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::IncompatibleFields(format!(
                "grid mismatch: {}-D N={} vs {}-D N={}",
                self.grid.dimension(),
                self.grid.cells_per_axis(),
                other.grid.dimension(),
                other.grid.cells_per_axis()
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.ensure_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// `self + scale·other`, in place.
    pub fn axpy(&mut self, scale: T, other: &Field<T>) -> Result<()> {
        self.ensure_same_grid(other)?;
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, &b)| *a = *a + scale * b);
        Ok(())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Value at wrapped 2-D index.
    pub fn at(&self, ix: isize, iy: isize) -> T {
        let n = self.grid.cells_per_axis();
        let ix = self.grid.wrap(ix);
        if self.grid.dimension() == 1 {
            self.values[ix]
        } else {
            self.values[self.grid.wrap(iy) * n + ix]
        }
    }

    /// Row `iy` of a 2-D field (the whole field in 1-D).
    pub fn row(&self, iy: usize) -> &[T] {
        let n = self.grid.cells_per_axis();
        if self.grid.dimension() == 1 {
            &self.values
        } else {
            &self.values[iy * n..(iy + 1) * n]
        }
    }
}

/// `result[i] = field[(i - offset) mod N]`, along `x` (axis 0) in 1-D or 2-D.
pub fn shift<T: Real>(field: &Field<T>, offset_cells: isize) -> Field<T> {
    shift_axis(field, 0, offset_cells)
}

/// Periodic shift along `axis` (0 = x, 1 = y).
pub fn shift_axis<T: Real>(field: &Field<T>, axis: usize, offset_cells: isize) -> Field<T> {
    let grid = *field.grid();
    let n = grid.cells_per_axis();
    let k = grid.wrap(offset_cells);
    let src = field.values();
    let mut out = vec![T::zero(); src.len()];
    match (grid.dimension(), axis) {
        (1, _) | (2, 0) => {
            for (dst_row, src_row) in out.chunks_mut(n).zip(src.chunks(n)) {
                dst_row[k..].copy_from_slice(&src_row[..n - k]);
                dst_row[..k].copy_from_slice(&src_row[n - k..]);
            }
        }
        _ => {
            for iy in 0..n {
                let from = (iy + n - k) % n;
                out[iy * n..(iy + 1) * n].copy_from_slice(&src[from * n..(from + 1) * n]);
            }
        }
    }
    Field::from_raw(grid, out)
}

/// Midpoint quadrature `h^d · Σ values`.
pub fn integrate<T: Real>(field: &Field<T>) -> T {
    field.grid().cell_measure() * sum_values(field.values())
}

/// Discrete antiderivative from `-π`: `result[i] = h · Σ_{j≤i} values[j]`.
pub fn primitive<T: Real>(field: &Field<T>) -> Result<Field<T>> {
    if field.grid().dimension() != 1 {
        return Err(Error::UnsupportedDimension(
            "primitive is defined for 1-D fields only".into(),
        ));
    }
    let h = field.grid().spacing();
    let values = field.values();
    let mut out = Vec::with_capacity(values.len());
    if values.len() > COMPENSATION_THRESHOLD {
        let mut acc = CompensatedSum::new();
        for &v in values {
            acc.add(v);
            out.push(h * acc.value());
        }
    } else {
        let mut acc = T::zero();
        for &v in values {
            acc = acc + v;
            out.push(h * acc);
        }
    }
    Ok(Field::from_raw(*field.grid(), out))
}
