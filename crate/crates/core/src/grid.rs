//! Periodic square grids and complex sample fields.
//!
//! The plane is replaced by the box `[-L, L)²` sampled at `n × n` nodes.
//! Node `(ix, iy)` sits at `x = -L + ix·h`, `y = -L + iy·h` with `h = 2L/n`,
//! so index `n/2` is the origin. Values are stored row-major:
//! `values[iy * n + ix]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Sampling of the periodic box `[-L, L)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    half_width: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        Ok(Self { n, half_width })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Quadrature weight of a single node.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical coordinate of node index `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Angular frequency of DFT index `j`; the Nyquist index is negative.
    #[inline]
    pub fn freq(&self, j: usize) -> f64 {
        let n = self.n as isize;
        let j = j as isize;
        let m = if j < n / 2 { j } else { j - n };
        m as f64 * PI / self.half_width
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.freq(j)).collect()
    }

    #[inline]
    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Largest resolvable angular frequency `π/h`.
    #[inline]
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Complex position `x + iy` of node `(ix, iy)`.
    #[inline]
    pub fn z(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(self.coord(ix), self.coord(iy))
    }

    /// The grid covering the central half `[-L/2, L/2)²` at the same spacing.
    pub fn central_half(&self) -> Result<GridSpec> {
        GridSpec::new(self.n / 2, self.half_width / 2.0)
    }

    /// The grid covering `[-2L, 2L)²` at the same spacing.
    pub fn doubled(&self) -> GridSpec {
        GridSpec {
            n: self.n * 2,
            half_width: self.half_width * 2.0,
        }
    }
}

/// Which space a field's samples live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceTag {
    Physical,
    Spectral,
    /// Samples indexed by the spectral parameter `k` of the scattering transform.
    SpectralParameter,
}

impl SpaceTag {
    pub fn to_byte(self) -> u8 {
        match self {
            SpaceTag::Physical => 0,
            SpaceTag::Spectral => 1,
            SpaceTag::SpectralParameter => 2,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(SpaceTag::Physical),
            1 => Some(SpaceTag::Spectral),
            2 => Some(SpaceTag::SpectralParameter),
            _ => None,
        }
    }
}

/// Complex samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<Complex64>,
    tag: SpaceTag,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, tag: SpaceTag) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for an {}x{} grid",
                values.len(),
                grid.n(),
                grid.n()
            )));
        }
        Ok(Self { grid, values, tag })
    }

    pub fn zeros(grid: GridSpec, tag: SpaceTag) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            tag,
        }
    }

    pub fn physical(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        Self::new(grid, values, SpaceTag::Physical)
    }

    /// Samples `f(z)` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(Complex64) -> Complex64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..n {
            for ix in 0..n {
                values.push(f(grid.z(ix, iy)));
            }
        }
        Self {
            grid,
            values,
            tag: SpaceTag::Physical,
        }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |z| Complex64::new(f(z.re, z.im), 0.0))
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.grid.n() + ix]
    }

    pub fn expect_tag(&self, tag: SpaceTag) -> Result<()> {
        if self.tag != tag {
            return Err(Error::TagMismatch {
                expected: tag,
                found: self.tag,
            });
        }
        Ok(())
    }

    pub fn expect_grid(&self, grid: &GridSpec) -> Result<()> {
        if &self.grid != grid {
            return Err(Error::GridMismatch(format!(
                "field on n={} L={}, expected n={} L={}",
                self.grid.n(),
                self.grid.half_width(),
                grid.n(),
                grid.half_width()
            )));
        }
        Ok(())
    }

    /// Discrete L² norm. Physical fields use the grid quadrature
    /// `h² Σ|f|²`; spectral fields use the matching dual weights
    /// `h²/n² Σ|F|²`, so the two agree across a transform.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let w = match self.tag {
            SpaceTag::Spectral => self.grid.cell_area() / self.grid.len() as f64,
            _ => self.grid.cell_area(),
        };
        (w * s).sqrt()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        let w = self.grid.cell_area();
        if p.is_infinite() {
            return self.max_abs();
        }
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (w * s).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid quadrature `h² Σ f`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.grid.len() as f64
    }

    pub fn conj(&self) -> Field {
        self.map(|v| v.conj())
    }

    pub fn re(&self) -> Field {
        self.map(|v| Complex64::new(v.re, 0.0))
    }

    pub fn im(&self) -> Field {
        self.map(|v| Complex64::new(v.im, 0.0))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            tag: self.tag,
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            tag: self.tag,
        }
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|v| v * c)
    }

    pub fn scale_re(&self, c: f64) -> Field {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a * b)
    }

    /// `‖self − other‖₂ / ‖other‖₂`.
    pub fn rel_distance(&self, reference: &Field) -> f64 {
        let d = self.sub(reference).l2_norm();
        let r = reference.l2_norm();
        if r == 0.0 {
            d
        } else {
            d / r
        }
    }

    /// Largest imaginary part relative to the largest modulus.
    pub fn imag_fraction(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / m
    }

    /// Discrete Fourier transform (unnormalized forward DFT).
    pub fn forward_transform(&self) -> Result<Field> {
        self.expect_tag(SpaceTag::Physical)?;
        let mut values = self.values.clone();
        fft::plan(self.grid.n()).forward(&mut values);
        Ok(Field {
            grid: self.grid,
            values,
            tag: SpaceTag::Spectral,
        })
    }

    pub fn inverse_transform(&self) -> Result<Field> {
        self.expect_tag(SpaceTag::Spectral)?;
        let mut values = self.values.clone();
        fft::plan(self.grid.n()).inverse(&mut values);
        Ok(Field {
            grid: self.grid,
            values,
            tag: SpaceTag::Physical,
        })
    }

    /// Norm of the part of the field outside the central half of the box,
    /// relative to the full norm.
    pub fn tail_fraction(&self) -> f64 {
        let n = self.grid.n();
        let (lo, hi) = (n / 4, n / 4 + n / 2);
        let mut outer = 0.0;
        let mut total = 0.0;
        for iy in 0..n {
            for ix in 0..n {
                let v = self.values[iy * n + ix].norm_sqr();
                total += v;
                if ix < lo || ix >= hi || iy < lo || iy >= hi {
                    outer += v;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (outer / total).sqrt()
        }
    }

    /// Copies the central `n/2 × n/2` block onto [`GridSpec::central_half`].
    pub fn crop_central_half(&self) -> Result<Field> {
        let g = self.grid.central_half()?;
        let n = self.grid.n();
        let m = n / 2;
        let o = n / 4;
        let mut values = Vec::with_capacity(m * m);
        for iy in 0..m {
            values.extend_from_slice(&self.values[(iy + o) * n + o..(iy + o) * n + o + m]);
        }
        Field::new(g, values, self.tag)
    }

    /// Embeds the field into the centre of [`GridSpec::doubled`], zero outside.
    pub fn zero_extend(&self) -> Field {
        let g = self.grid.doubled();
        let n = self.grid.n();
        let big = g.n();
        let o = n / 2;
        let mut values = vec![Complex64::new(0.0, 0.0); big * big];
        for iy in 0..n {
            values[(iy + o) * big + o..(iy + o) * big + o + n]
                .copy_from_slice(&self.values[iy * n..(iy + 1) * n]);
        }
        Field {
            grid: g,
            values,
            tag: self.tag,
        }
    }

    /// Band-limited resampling onto `new_n` nodes of the same box, by
    /// zero-padding or truncating the spectrum.
    pub fn fourier_resample(&self, new_n: usize) -> Result<Field> {
        self.expect_tag(SpaceTag::Physical)?;
        let g = GridSpec::new(new_n, self.grid.half_width())?;
        let n = self.grid.n();
        if new_n == n {
            return Ok(self.clone());
        }
        let spec = self.forward_transform()?;
        let mut out = vec![Complex64::new(0.0, 0.0); new_n * new_n];
        let m = n.min(new_n);
        let half = m / 2;
        let map = |j: isize, size: usize| -> usize {
            if j < 0 {
                (j + size as isize) as usize
            } else {
                j as usize
            }
        };
        for jy in -(half as isize)..=(half as isize) {
            for jx in -(half as isize)..=(half as isize) {
                // growing splits the old Nyquist mode evenly; shrinking folds it
                let mut w = 1.0;
                if new_n > n {
                    if jx.unsigned_abs() == half {
                        w *= 0.5;
                    }
                    if jy.unsigned_abs() == half {
                        w *= 0.5;
                    }
                }
                let src = spec.values[map(jy, n) * n + map(jx, n)];
                out[map(jy, new_n) * new_n + map(jx, new_n)] += src * w;
            }
        }
        let scale = (new_n * new_n) as f64 / (n * n) as f64;
        for v in out.iter_mut() {
            *v *= scale;
        }
        Field {
            grid: g,
            values: out,
            tag: SpaceTag::Spectral,
        }
        .inverse_transform()
    }
}
