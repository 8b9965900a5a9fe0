//! The spectral parameter `k = k₁ + ik₂` and lattices of it.

use std::ops::{Add, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavenumber {
    pub k1: f64,
    pub k2: f64,
}

impl Wavenumber {
    pub const ZERO: Wavenumber = Wavenumber { k1: 0.0, k2: 0.0 };

    pub fn new(k1: f64, k2: f64) -> Self {
        Self { k1, k2 }
    }

    pub fn from_complex(k: Complex64) -> Self {
        Self { k1: k.re, k2: k.im }
    }

    #[inline]
    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.k1, self.k2)
    }

    pub fn is_finite(self) -> bool {
        self.k1.is_finite() && self.k2.is_finite()
    }
}

impl Neg for Wavenumber {
    type Output = Wavenumber;
    fn neg(self) -> Wavenumber {
        Wavenumber::new(-self.k1, -self.k2)
    }
}

impl Add for Wavenumber {
    type Output = Wavenumber;
    fn add(self, o: Wavenumber) -> Wavenumber {
        Wavenumber::new(self.k1 + o.k1, self.k2 + o.k2)
    }
}

/// Square lattice of `nk × nk` wavenumbers covering `[-K, K)²`, laid out like
/// a [`GridSpec`]: node `(i, j)` is `k = (−K + iΔ) + i(−K + jΔ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    nk: usize,
    half_width: f64,
}

impl KGrid {
    pub fn new(nk: usize, half_width: f64) -> Result<Self> {
        if nk < 2 || !nk.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "nk must be even and >= 2, got {nk}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "K must be positive, got {half_width}"
            )));
        }
        Ok(Self { nk, half_width })
    }

    #[inline]
    pub fn nk(&self) -> usize {
        self.nk
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.nk as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nk * self.nk
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nk).map(|i| self.coord(i)).collect()
    }

    /// Node `idx` in row-major order.
    #[inline]
    pub fn node(&self, idx: usize) -> Wavenumber {
        Wavenumber::new(self.coord(idx % self.nk), self.coord(idx / self.nk))
    }

    pub fn nodes(&self) -> impl Iterator<Item = Wavenumber> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// The same lattice viewed as a physical grid in the `k` variable.
    pub fn as_grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.nk, self.half_width)
    }

    pub fn from_grid(g: &GridSpec) -> Self {
        Self {
            nk: g.n(),
            half_width: g.half_width(),
        }
    }

    /// Checks that every node is resolvable by the `e_k` phases of grid `g`:
    /// `2·max(|k₁|, |k₂|) ≤ π/h`.
    pub fn check_band(&self, g: &GridSpec) -> Result<()> {
        let limit = g.nyquist() / 2.0;
        if self.half_width > limit {
            return Err(Error::Band {
                k1: self.half_width,
                k2: self.half_width,
                limit,
            });
        }
        Ok(())
    }
}
