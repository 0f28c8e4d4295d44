//! Compactly supported smoothing kernels and periodic convolution.
//!
//! The continuous bump `φ` is sampled at cell centres, rescaled to the
//! requested width and renormalised so the discrete mass `h·Σw` is one.
//! Derivative kernels sample `φ'`, are exactly antisymmetric (so they
//! annihilate constants and produce zero-mean output) and are rescaled so
//! their first moment is exactly `-1`, which makes them differentiate linear
//! data exactly.

use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::scalar::Real;

/// Shape of the reference bump on `(-1, 1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BumpShape {
    /// `exp(-1/(1-s²))`
    #[default]
    Standard,
    /// `exp(-1/(1-s⁴))`, flatter top and steeper flanks.
    Quartic,
}

impl BumpShape {
    pub fn name(&self) -> &'static str {
        match self {
            BumpShape::Standard => "standard",
            BumpShape::Quartic => "quartic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "standard" => Some(BumpShape::Standard),
            "quartic" => Some(BumpShape::Quartic),
            _ => None,
        }
    }

    /// The normalised profile (tables built once per shape).
    pub fn profile(self) -> &'static BumpProfile {
        static STANDARD: OnceLock<BumpProfile> = OnceLock::new();
        static QUARTIC: OnceLock<BumpProfile> = OnceLock::new();
        match self {
            BumpShape::Standard => STANDARD.get_or_init(|| BumpProfile::build(self)),
            BumpShape::Quartic => QUARTIC.get_or_init(|| BumpProfile::build(self)),
        }
    }

    fn raw(self, s: f64) -> f64 {
        let q = match self {
            BumpShape::Standard => s * s,
            BumpShape::Quartic => s * s * s * s,
        };
        if q >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - q)).exp()
        }
    }

    fn raw_derivative(self, s: f64) -> f64 {
        let (q, dq) = match self {
            BumpShape::Standard => (s * s, 2.0 * s),
            BumpShape::Quartic => (s * s * s * s, 4.0 * s * s * s),
        };
        if q >= 1.0 {
            0.0
        } else {
            let d = 1.0 - q;
            (-1.0 / d).exp() * (-dq / (d * d))
        }
    }
}

const TABLE_INTERVALS: usize = 4096;

// 5-point Gauss-Legendre on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

fn gauss(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(&x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Unit-mass bump `φ`, its cumulative `Φ` and the second antiderivative
/// `R(z) = ∫_{-1}^{z} Φ`, evaluated in `f64`.
#[derive(Debug)]
pub struct BumpProfile {
    shape: BumpShape,
    norm: f64,
    cdf: Vec<f64>,
    second: Vec<f64>,
}

impl BumpProfile {
    fn build(shape: BumpShape) -> Self {
        let step = 2.0 / TABLE_INTERVALS as f64;
        let node = |k: usize| -1.0 + step * k as f64;
        let total: f64 = (0..TABLE_INTERVALS)
            .map(|k| gauss(node(k), node(k + 1), |s| shape.raw(s)))
            .sum();
        let norm = 1.0 / total;
        let mut cdf = Vec::with_capacity(TABLE_INTERVALS + 1);
        let mut second = Vec::with_capacity(TABLE_INTERVALS + 1);
        let (mut c, mut r) = (0.0, 0.0);
        cdf.push(0.0);
        second.push(0.0);
        for k in 0..TABLE_INTERVALS {
            let (a, b) = (node(k), node(k + 1));
            r += c * (b - a) + norm * gauss(a, b, |s| (b - s) * shape.raw(s));
            c += norm * gauss(a, b, |s| shape.raw(s));
            cdf.push(c);
            second.push(r);
        }
        Self {
            shape,
            norm,
            cdf,
            second,
        }
    }

    pub fn shape(&self) -> BumpShape {
        self.shape
    }

    /// Normalising constant `c` with `∫ c·bump = 1`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn phi(&self, s: f64) -> f64 {
        self.norm * self.shape.raw(s)
    }

    pub fn phi_prime(&self, s: f64) -> f64 {
        self.norm * self.shape.raw_derivative(s)
    }

    fn locate(z: f64) -> (usize, f64) {
        let step = 2.0 / TABLE_INTERVALS as f64;
        let k = (((z + 1.0) / step).floor() as usize).min(TABLE_INTERVALS - 1);
        (k, -1.0 + step * k as f64)
    }

    /// `Φ(z) = ∫_{-1}^{z} φ`.
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= -1.0 {
            return 0.0;
        }
        if z >= 1.0 {
            return 1.0;
        }
        let (k, zk) = Self::locate(z);
        self.cdf[k] + self.norm * gauss(zk, z, |s| self.shape.raw(s))
    }

    /// `R(z) = ∫_{-1}^{z} Φ`; equals `z` for `z ≥ 1` since `φ` is even.
    pub fn second_antiderivative(&self, z: f64) -> f64 {
        if z <= -1.0 {
            return 0.0;
        }
        if z >= 1.0 {
            return z;
        }
        let (k, zk) = Self::locate(z);
        self.second[k]
            + self.cdf[k] * (z - zk)
            + self.norm * gauss(zk, z, |s| (z - s) * self.shape.raw(s))
    }
}

/// Discrete mollifier of continuous width `scale` on a given grid spacing.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    half_width: usize,
    weights: Vec<T>,
    derivative_weights: Vec<T>,
    scale: T,
    spacing: T,
    shape: BumpShape,
}

impl<T: Real> Kernel<T> {
    /// Kernel of width `epsilon^exponent`.
    pub fn build(grid: &Grid<T>, exponent: T, epsilon: T) -> Result<Self> {
        Self::with_scale(grid, epsilon.powf(exponent), BumpShape::Standard)
    }

    pub fn with_scale(grid: &Grid<T>, scale: T, shape: BumpShape) -> Result<Self> {
        let h = grid.spacing();
        if !(scale.is_finite() && scale >= h + h) {
            return Err(Error::KernelTooNarrow {
                scale: scale.to_f64_lossy(),
                spacing: h.to_f64_lossy(),
            });
        }
        let half_width = (scale / h).floor().to_usize().unwrap_or(usize::MAX);
        if half_width > 10_000_000 {
            return Err(Error::KernelTooWide {
                half_width,
                limit: grid.cells_per_axis() / 2,
            });
        }
        let profile = shape.profile();
        let hs = h.to_f64_lossy() / scale.to_f64_lossy();
        let inv_scale = 1.0 / scale.to_f64_lossy();
        let raw: Vec<f64> = (0..=half_width)
            .map(|j| profile.phi(j as f64 * hs) * inv_scale)
            .collect();
        let mass = h.to_f64_lossy() * (raw[0] + 2.0 * raw[1..].iter().sum::<f64>());
        let renorm = 1.0 / mass;
        let h64 = h.to_f64_lossy();
        let slope: Vec<f64> = (0..=half_width)
            .map(|j| profile.phi_prime(j as f64 * hs) * inv_scale * inv_scale)
            .collect();
        // h·Σ_j d_j·(j·h) over both sides
        let moment: f64 =
            2.0 * h64 * h64 * (1..=half_width).map(|j| j as f64 * slope[j]).sum::<f64>();
        let slope_renorm = -1.0 / moment;

        let len = 2 * half_width + 1;
        let mut weights = vec![T::zero(); len];
        let mut derivative_weights = vec![T::zero(); len];
        for j in 0..=half_width {
            let w = T::of(raw[j] * renorm);
            weights[half_width + j] = w;
            weights[half_width - j] = w;
            if j > 0 {
                let d = T::of(slope[j] * slope_renorm);
                derivative_weights[half_width + j] = d;
                derivative_weights[half_width - j] = -d;
            }
        }
        Ok(Self {
            half_width,
            weights,
            derivative_weights,
            scale,
            spacing: h,
            shape,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Weights for offsets `-r..=r` (index `r + j` holds offset `j`).
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn derivative_weights(&self) -> &[T] {
        &self.derivative_weights
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn shape(&self) -> BumpShape {
        self.shape
    }

    pub fn max_weight(&self) -> T {
        self.weights[self.half_width]
    }

    fn check_fits(&self, n: usize) -> Result<()> {
        if 2 * self.half_width >= n {
            return Err(Error::KernelTooWide {
                half_width: self.half_width,
                limit: n / 2,
            });
        }
        Ok(())
    }
}

/// `out[i] = h · Σ_j src[(i - j) mod n] · taps[r + j]`, direct summation.
fn circular_direct<T: Real>(src: &[T], taps: &[T], h: T, out: &mut [T]) {
    let n = src.len();
    let r = taps.len() / 2;
    let mut ext = Vec::with_capacity(n + 2 * r);
    ext.extend_from_slice(&src[n - r..]);
    ext.extend_from_slice(src);
    ext.extend_from_slice(&src[..r]);
    for (i, o) in out.iter_mut().enumerate() {
        // src[i - j] = ext[i + r - j]; j runs -r..=r
        let window = &ext[i..i + 2 * r + 1];
        let acc = window
            .iter()
            .zip(taps.iter().rev())
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        *o = h * acc;
    }
}

fn check_1d<T: Real>(field: &Field<T>) -> Result<()> {
    if field.grid().dimension() != 1 {
        return Err(Error::UnsupportedDimension(
            "expected a 1-D field; use the 2-D routines".into(),
        ));
    }
    Ok(())
}

/// Periodic convolution with the kernel weights. 2-D fields are smoothed
/// along both axes (tensor-product kernel).
pub fn convolve<T: Real>(field: &Field<T>, kernel: &Kernel<T>) -> Result<Field<T>> {
    kernel.check_fits(field.grid().cells_per_axis())?;
    match field.grid().dimension() {
        1 => {
            let mut out = vec![T::zero(); field.len()];
            circular_direct(field.values(), kernel.weights(), kernel.spacing(), &mut out);
            Ok(Field::from_raw(*field.grid(), out))
        }
        _ => Ok(apply_axes(
            field,
            kernel.weights(),
            kernel.weights(),
            kernel.spacing(),
        )),
    }
}

/// Periodic convolution with the derivative kernel (`∂x` of the mollified field).
pub fn convolve_derivative<T: Real>(field: &Field<T>, kernel: &Kernel<T>) -> Result<Field<T>> {
    check_1d(field)?;
    kernel.check_fits(field.len())?;
    let mut out = vec![T::zero(); field.len()];
    circular_direct(
        field.values(),
        kernel.derivative_weights(),
        kernel.spacing(),
        &mut out,
    );
    Ok(Field::from_raw(*field.grid(), out))
}

/// `(∂x, ∂y)` of the tensor-product mollification of a 2-D field.
pub fn gradient_2d<T: Real>(field: &Field<T>, kernel: &Kernel<T>) -> Result<(Field<T>, Field<T>)> {
    if field.grid().dimension() != 2 {
        return Err(Error::UnsupportedDimension("expected a 2-D field".into()));
    }
    kernel.check_fits(field.grid().cells_per_axis())?;
    let h = kernel.spacing();
    let dx = apply_axes(field, kernel.derivative_weights(), kernel.weights(), h);
    let dy = apply_axes(field, kernel.weights(), kernel.derivative_weights(), h);
    Ok((dx, dy))
}

fn apply_axes<T: Real>(field: &Field<T>, x_taps: &[T], y_taps: &[T], h: T) -> Field<T> {
    let n = field.grid().cells_per_axis();
    let src = field.values();
    let mut rows = vec![T::zero(); src.len()];
    for (dst, row) in rows.chunks_mut(n).zip(src.chunks(n)) {
        circular_direct(row, x_taps, h, dst);
    }
    let mut out = vec![T::zero(); src.len()];
    let mut column = vec![T::zero(); n];
    let mut smoothed = vec![T::zero(); n];
    for ix in 0..n {
        for iy in 0..n {
            column[iy] = rows[iy * n + ix];
        }
        circular_direct(&column, y_taps, h, &mut smoothed);
        for iy in 0..n {
            out[iy * n + ix] = smoothed[iy];
        }
    }
    Field::from_raw(*field.grid(), out)
}

/// Above this many taps a [`Convolver`] switches to FFT products.
pub const FFT_TAP_THRESHOLD: usize = 48;

struct Spectral<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    weights: Vec<Complex<T>>,
    derivative: Vec<Complex<T>>,
}

/// Kernel bound to a fixed 1-D grid, reused across many time steps.
pub struct Convolver<T: Real> {
    kernel: Kernel<T>,
    n: usize,
    spectral: Option<Spectral<T>>,
}

impl<T: Real> std::fmt::Debug for Convolver<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver")
            .field("kernel", &self.kernel)
            .field("n", &self.n)
            .field("fft", &self.spectral.is_some())
            .finish()
    }
}

impl<T: Real> Convolver<T> {
    pub fn new(grid: &Grid<T>, kernel: Kernel<T>) -> Result<Self> {
        let n = grid.cells_per_axis();
        kernel.check_fits(n)?;
        let spectral = (kernel.weights().len() > FFT_TAP_THRESHOLD && grid.dimension() == 1)
            .then(|| Self::spectral(n, &kernel));
        Ok(Self {
            kernel,
            n,
            spectral,
        })
    }

    /// Forces direct summation regardless of kernel size.
    pub fn direct(grid: &Grid<T>, kernel: Kernel<T>) -> Result<Self> {
        let n = grid.cells_per_axis();
        kernel.check_fits(n)?;
        Ok(Self {
            kernel,
            n,
            spectral: None,
        })
    }

    fn spectral(n: usize, kernel: &Kernel<T>) -> Spectral<T> {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let r = kernel.half_width() as isize;
        let embed = |taps: &[T]| {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
            for (k, &t) in taps.iter().enumerate() {
                let j = (k as isize - r).rem_euclid(n as isize) as usize;
                buf[j].re = t;
            }
            forward.process(&mut buf);
            buf
        };
        Spectral {
            weights: embed(kernel.weights()),
            derivative: embed(kernel.derivative_weights()),
            forward: forward.clone(),
            inverse,
        }
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn uses_fft(&self) -> bool {
        self.spectral.is_some()
    }

    /// Mollified values.
    pub fn smooth(&self, src: &[T]) -> Vec<T> {
        self.apply(src, true, false).0
    }

    /// `∂x` of the mollified values.
    pub fn derivative(&self, src: &[T]) -> Vec<T> {
        self.apply(src, false, true).1
    }

    /// Both the mollified values and their derivative, sharing one transform.
    pub fn smooth_and_derivative(&self, src: &[T]) -> (Vec<T>, Vec<T>) {
        self.apply(src, true, true)
    }

    fn apply(&self, src: &[T], want_value: bool, want_derivative: bool) -> (Vec<T>, Vec<T>) {
        debug_assert_eq!(src.len(), self.n);
        let h = self.kernel.spacing();
        match &self.spectral {
            None => {
                let mut value = Vec::new();
                let mut derivative = Vec::new();
                if want_value {
                    value = vec![T::zero(); self.n];
                    circular_direct(src, self.kernel.weights(), h, &mut value);
                }
                if want_derivative {
                    derivative = vec![T::zero(); self.n];
                    circular_direct(src, self.kernel.derivative_weights(), h, &mut derivative);
                }
                (value, derivative)
            }
            Some(sp) => {
                let mut spectrum: Vec<Complex<T>> =
                    src.iter().map(|&v| Complex::new(v, T::zero())).collect();
                sp.forward.process(&mut spectrum);
                let scale = h / T::of_usize(self.n);
                let back = |taps: &[Complex<T>]| {
                    let mut buf: Vec<Complex<T>> =
                        spectrum.iter().zip(taps).map(|(a, b)| a * b).collect();
                    sp.inverse.process(&mut buf);
                    buf.into_iter().map(|c| c.re * scale).collect::<Vec<T>>()
                };
                let value = if want_value {
                    back(&sp.weights)
                } else {
                    Vec::new()
                };
                let derivative = if want_derivative {
                    back(&sp.derivative)
                } else {
                    Vec::new()
                };
                (value, derivative)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::integrate;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_is_normalised() {
        for shape in [BumpShape::Standard, BumpShape::Quartic] {
            let p = shape.profile();
            assert!((p.cdf(1.0) - 1.0).abs() < 1e-15);
            assert!((p.cdf(0.0) - 0.5).abs() < 1e-13, "{shape:?}");
            assert!((p.cdf(0.999_999) - 1.0).abs() < 1e-12);
            // R(z) joins z continuously at z = 1
            assert!((p.second_antiderivative(1.0 - 1e-9) - 1.0).abs() < 1e-8);
            // Φ' = φ by central difference
            let z = 0.37;
            let fd = (p.cdf(z + 1e-6) - p.cdf(z - 1e-6)) / 2e-6;
            assert!((fd - p.phi(z)).abs() < 1e-8);
            let fd = (p.second_antiderivative(z + 1e-6) - p.second_antiderivative(z - 1e-6)) / 2e-6;
            assert!((fd - p.cdf(z)).abs() < 1e-8);
        }
        // c = 1/∫exp(-1/(1-s²)) ≈ 2.2523
        let c = BumpShape::Standard.profile().normalization();
        assert!((c - 2.252_283_621).abs() < 1e-8, "{c}");
    }

    #[test]
    fn narrow_kernel_rejected() {
        let g = Grid::<f64>::line(100).unwrap();
        let h = g.spacing();
        assert!(matches!(
            Kernel::with_scale(&g, 1.9 * h, BumpShape::Standard),
            Err(Error::KernelTooNarrow { .. })
        ));
        assert!(Kernel::with_scale(&g, 2.0 * h, BumpShape::Standard).is_ok());
    }

    #[test]
    fn wide_kernel_rejected_by_convolution() {
        let g = Grid::<f64>::line(16).unwrap();
        let k = Kernel::with_scale(&g, 3.5, BumpShape::Standard).unwrap();
        assert!(k.half_width() >= 8);
        let f = Field::constant(g, 1.0);
        assert!(matches!(convolve(&f, &k), Err(Error::KernelTooWide { .. })));
        assert!(matches!(
            convolve_derivative(&f, &k),
            Err(Error::KernelTooWide { .. })
        ));
    }

    #[test]
    fn build_kernel_at_table_resolution() {
        // ε = π/1000 on N = 2000, exponent 1/4
        let g = Grid::<f64>::line(2000).unwrap();
        let eps = PI / 1000.0;
        let k = Kernel::build(&g, 0.25, eps).unwrap();
        let scale = eps.powf(0.25);
        assert!((scale - 0.2367).abs() < 1e-3);
        assert_eq!(k.half_width(), (scale / g.spacing()).floor() as usize);
        assert_eq!(k.half_width(), 75);
        let mass: f64 = g.spacing() * k.weights().iter().sum::<f64>();
        assert!((mass - 1.0).abs() < 1e-14);
        assert!(k.weights().iter().all(|&w| w >= 0.0));
        let dsum: f64 = k.derivative_weights().iter().sum();
        assert!(dsum.abs() < 1e-9 * k.derivative_weights().iter().map(|d| d.abs()).sum::<f64>());
        let h = g.spacing();
        let first_moment: f64 = (0..k.weights().len())
            .map(|j| h * k.derivative_weights()[j] * (j as f64 - 75.0) * h)
            .sum();
        assert!((first_moment + 1.0).abs() < 1e-13);
        for j in 0..k.weights().len() {
            let m = k.weights().len() - 1 - j;
            assert_eq!(k.weights()[j], k.weights()[m]);
            assert_eq!(k.derivative_weights()[j], -k.derivative_weights()[m]);
        }
    }

    #[test]
    fn constants_are_preserved_and_annihilated() {
        let g = Grid::<f64>::line(128).unwrap();
        let k = Kernel::with_scale(&g, 0.4, BumpShape::Standard).unwrap();
        let one = Field::constant(g, 1.0);
        let c = convolve(&one, &k).unwrap();
        assert!(c.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
        let d = convolve_derivative(&one, &k).unwrap();
        assert!(d.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn delta_reproduces_kernel() {
        let g = Grid::<f64>::line(64).unwrap();
        let k = Kernel::with_scale(&g, 0.5, BumpShape::Standard).unwrap();
        let d = Field::discrete_delta(g, 20);
        let c = convolve(&d, &k).unwrap();
        let r = k.half_width();
        for j in 0..k.weights().len() {
            let idx = 20 + j - r;
            assert!((c.values()[idx] - k.weights()[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn sine_is_damped_by_a_brute_force_factor() {
        // Dense O(N²) convolution against the sampled continuous kernel as oracle.
        let n = 64;
        let g = Grid::<f64>::line(n).unwrap();
        let h = g.spacing();
        let k = Kernel::with_scale(&g, 0.6, BumpShape::Standard).unwrap();
        let f = Field::from_fn(g, f64::sin);
        let out = convolve(&f, &k).unwrap();
        let r = k.half_width() as isize;
        let mut oracle = vec![0.0; n];
        for (i, o) in oracle.iter_mut().enumerate() {
            for j in 0..n {
                let off = (i as isize - j as isize).rem_euclid(n as isize);
                let off = if off > n as isize / 2 {
                    off - n as isize
                } else {
                    off
                };
                if off.abs() <= r {
                    *o += h * f.values()[j] * k.weights()[(off + r) as usize];
                }
            }
        }
        let amp = out.values()[n / 4 + n / 2] / f.values()[n / 4 + n / 2];
        assert!(amp > 0.0 && amp <= 1.0);
        for (i, o) in oracle.iter().enumerate() {
            assert!((out.values()[i] - o).abs() < 1e-14);
            assert!((out.values()[i] - amp * f.values()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_kernel_approaches_cosine() {
        let g = Grid::<f64>::line(256).unwrap();
        let h = g.spacing();
        let f = Field::from_fn(g, f64::sin);
        let mut last = f64::INFINITY;
        for scale in [0.8, 0.4, 0.2, 0.1] {
            let k = Kernel::with_scale(&g, scale, BumpShape::Standard).unwrap();
            let d = convolve_derivative(&f, &k).unwrap();
            let c = convolve(&f, &k).unwrap();
            let err = g
                .nodes()
                .iter()
                .zip(d.values())
                .map(|(x, v)| (v - x.cos()).abs())
                .fold(0.0, f64::max);
            // agrees with the centred difference of the smoothed field
            let l1 = 4.0;
            let tol = h * h * l1 / scale.powi(3);
            for i in 0..256isize {
                let fd = (c.at(i + 1, 0) - c.at(i - 1, 0)) / (2.0 * h);
                assert!(
                    (fd - d.at(i, 0)).abs() < tol,
                    "{scale}: {} vs {tol}",
                    (fd - d.at(i, 0)).abs()
                );
            }
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn fft_path_matches_direct() {
        let g = Grid::<f64>::line(1000).unwrap();
        let k = Kernel::with_scale(&g, 0.9, BumpShape::Standard).unwrap();
        assert!(k.weights().len() > FFT_TAP_THRESHOLD);
        let f = Field::from_fn(g, |x| (3.0 * x).sin() + (x * x).cos());
        let fast = Convolver::new(&g, k.clone()).unwrap();
        assert!(fast.uses_fft());
        let slow = Convolver::direct(&g, k.clone()).unwrap();
        let (a, da) = fast.smooth_and_derivative(f.values());
        let (b, db) = slow.smooth_and_derivative(f.values());
        for i in 0..1000 {
            assert!((a[i] - b[i]).abs() < 1e-12);
            assert!((da[i] - db[i]).abs() < 1e-11);
        }
        assert_eq!(b, convolve(&f, &k).unwrap().into_values());
    }

    #[test]
    fn tensor_product_matches_brute_force_2d() {
        let n = 12;
        let g = Grid::<f64>::square(n).unwrap();
        let h = g.spacing();
        let k = Kernel::with_scale(&g, 1.2, BumpShape::Standard).unwrap();
        let f = Field::from_fn_2d(g, |x, y| (x + 2.0 * y).sin() + 0.3 * (y * 3.0).cos() * x);
        let axis = convolve(&f, &k).unwrap();
        let (gx, gy) = gradient_2d(&f, &k).unwrap();
        let r = k.half_width() as isize;
        let w = k.weights();
        let d = k.derivative_weights();
        for iy in 0..n as isize {
            for ix in 0..n as isize {
                let (mut s, mut sx, mut sy) = (0.0, 0.0, 0.0);
                for jy in -r..=r {
                    for jx in -r..=r {
                        let v = f.at(ix - jx, iy - jy);
                        let (wx, wy) = (w[(jx + r) as usize], w[(jy + r) as usize]);
                        s += h * h * v * wx * wy;
                        sx += h * h * v * d[(jx + r) as usize] * wy;
                        sy += h * h * v * wx * d[(jy + r) as usize];
                    }
                }
                assert!((axis.at(ix, iy) - s).abs() < 1e-13);
                assert!((gx.at(ix, iy) - sx).abs() < 1e-12);
                assert!((gy.at(ix, iy) - sy).abs() < 1e-12);
            }
        }
    }

    fn random_field() -> impl Strategy<Value = Field<f64>> {
        (32usize..160).prop_flat_map(|n| {
            prop::collection::vec(-5.0f64..5.0, n)
                .prop_map(move |v| Field::new(Grid::line(n).unwrap(), v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn mass_is_preserved(f in random_field(), cells in 2.0f64..12.0) {
            let g = *f.grid();
            let k = Kernel::with_scale(&g, cells * g.spacing(), BumpShape::Standard).unwrap();
            let i0 = integrate(&f);
            let c = convolve(&f, &k).unwrap();
            prop_assert!((integrate(&c) - i0).abs() <= 1e-12 * (1.0 + i0.abs()));
            let d = convolve_derivative(&f, &k).unwrap();
            let scale = d.values().iter().map(|v| v.abs()).sum::<f64>() * g.spacing();
            prop_assert!(integrate(&d).abs() <= 1e-12 * (1.0 + scale));
        }

        #[test]
        fn smoothing_bounded_by_l1(f in random_field(), cells in 2.0f64..12.0) {
            let g = *f.grid();
            let k = Kernel::with_scale(&g, cells * g.spacing(), BumpShape::Quartic).unwrap();
            let l1 = g.spacing() * f.values().iter().map(|v| v.abs()).sum::<f64>();
            let c = convolve(&f, &k).unwrap();
            prop_assert!(c.max_abs() <= l1 * k.max_weight() * (1.0 + 1e-12));
        }
    }
}
