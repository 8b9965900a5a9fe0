//! Fourier multipliers on the dual grid and the complex derivative calculus.
//!
//! With `f = e^{i(ξ₁x+ξ₂y)}` the operators `∂ = ½(∂ₓ − i∂ᵧ)` and
//! `∂̄ = ½(∂ₓ + i∂ᵧ)` have symbols `½(iξ₁ + ξ₂)` and `½(iξ₁ − ξ₂)`.
//! First-order pieces are zeroed on the Nyquist lines so that `∂ₓ`, `∂ᵧ`
//! map real grid functions to real grid functions; this keeps identities
//! such as `conj(∂f) = ∂̄ conj(f)` exact on the grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Field, GridSpec, SpaceTag};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A symbol table on the dual grid.
#[derive(Debug, Clone)]
pub struct Multiplier {
    grid: GridSpec,
    symbol: Vec<Complex64>,
}

impl Multiplier {
    /// Builds the table from `f(ξ₁, ξ₂, nyq_x, nyq_y)` and overwrites the zero
    /// frequency with `dc`.
    pub fn from_fn(
        grid: GridSpec,
        dc: Complex64,
        f: impl Fn(f64, f64, bool, bool) -> Complex64,
    ) -> Self {
        let n = grid.n();
        let freqs = grid.freqs();
        let mut symbol = Vec::with_capacity(grid.len());
        for (jy, &xi2) in freqs.iter().enumerate() {
            for (jx, &xi1) in freqs.iter().enumerate() {
                symbol.push(f(xi1, xi2, grid.is_nyquist(jx), grid.is_nyquist(jy)));
            }
        }
        symbol[0] = dc;
        debug_assert_eq!(symbol.len(), n * n);
        Self { grid, symbol }
    }

    pub fn identity(grid: GridSpec) -> Self {
        Self::from_fn(grid, Complex64::new(1.0, 0.0), |_, _, _, _| {
            Complex64::new(1.0, 0.0)
        })
    }

    /// `∂`.
    pub fn d(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, sym_d)
    }

    /// `∂̄`.
    pub fn d_bar(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, sym_dbar)
    }

    /// Beurling transform `∂̄⁻¹∂`, unit modulus away from the origin, 0 at it.
    pub fn beurling(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, |a, b, nx, ny| {
            ratio_or_one(sym_d(a, b, nx, ny), sym_dbar(a, b, nx, ny))
        })
    }

    /// `∂⁻¹∂̄`, the inverse of [`Multiplier::beurling`] on zero-mean fields.
    pub fn anti_beurling(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, |a, b, nx, ny| {
            ratio_or_one(sym_dbar(a, b, nx, ny), sym_d(a, b, nx, ny))
        })
    }

    /// Periodic `∂̄⁻¹` with value 0 at the zero frequency.
    pub fn d_bar_inverse(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, |a, b, nx, ny| {
            inv_or_zero(sym_dbar(a, b, nx, ny))
        })
    }

    /// Periodic `∂⁻¹` with value 0 at the zero frequency.
    pub fn d_inverse(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, |a, b, nx, ny| inv_or_zero(sym_d(a, b, nx, ny)))
    }

    /// `Δ` with the full symbol `−|ξ|²`.
    pub fn laplacian(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, |a, b, _, _| {
            Complex64::new(-(a * a + b * b), 0.0)
        })
    }

    /// `Δ⁻¹` on zero-mean fields, 0 at the origin.
    pub fn inverse_laplacian(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, |a, b, _, _| {
            let r2 = a * a + b * b;
            if r2 == 0.0 {
                ZERO
            } else {
                Complex64::new(-1.0 / r2, 0.0)
            }
        })
    }

    /// `∂ₓ` and `∂ᵧ` (real derivatives).
    pub fn dx(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, |a, _, nx, _| if nx { ZERO } else { I * a })
    }

    pub fn dy(grid: GridSpec) -> Self {
        Self::from_fn(grid, ZERO, |_, b, _, ny| if ny { ZERO } else { I * b })
    }

    /// Fractional derivative `|D|^s`, 0 at the origin.
    pub fn frac_derivative(grid: GridSpec, s: f64) -> Self {
        Self::from_fn(grid, ZERO, move |a, b, _, _| {
            let r = (a * a + b * b).sqrt();
            if r == 0.0 {
                ZERO
            } else {
                Complex64::new(r.powf(s), 0.0)
            }
        })
    }

    /// Spectral truncation keeping `|ξ| ≤ fraction · π/h`.
    pub fn radial_mask(grid: GridSpec, fraction: f64) -> Self {
        let cut = fraction * grid.nyquist();
        Self::from_fn(grid, Complex64::new(1.0, 0.0), move |a, b, _, _| {
            if (a * a + b * b).sqrt() <= cut {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    #[inline]
    pub fn dc(&self) -> Complex64 {
        self.symbol[0]
    }

    /// Pointwise product of two symbols.
    pub fn compose(&self, other: &Multiplier) -> Multiplier {
        Multiplier {
            grid: self.grid,
            symbol: self
                .symbol
                .iter()
                .zip(&other.symbol)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Multiplier {
        Multiplier {
            grid: self.grid,
            symbol: self.symbol.iter().map(|&s| f(s)).collect(),
        }
    }

    /// Multiplies spectral coefficients in place.
    #[inline]
    pub fn apply_spectral(&self, spec: &mut [Complex64]) {
        for (v, s) in spec.iter_mut().zip(&self.symbol) {
            *v *= s;
        }
    }

    /// `inverse_transform(symbol ⊙ forward_transform(f))`.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        f.expect_tag(SpaceTag::Physical)?;
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch(
                "multiplier and field live on different grids".into(),
            ));
        }
        let mut v = f.values().to_vec();
        self.apply_raw(&mut v);
        Field::new(self.grid, v, SpaceTag::Physical)
    }

    /// Applies the multiplier to physical samples in place.
    pub fn apply_raw(&self, v: &mut [Complex64]) {
        let plan = fft::plan(self.grid.n());
        plan.forward(v);
        self.apply_spectral(v);
        plan.inverse(v);
    }
}

#[inline]
pub(crate) fn sym_d(xi1: f64, xi2: f64, nyq_x: bool, nyq_y: bool) -> Complex64 {
    let a = if nyq_x { 0.0 } else { xi1 };
    let b = if nyq_y { 0.0 } else { xi2 };
    Complex64::new(0.5 * b, 0.5 * a)
}

#[inline]
pub(crate) fn sym_dbar(xi1: f64, xi2: f64, nyq_x: bool, nyq_y: bool) -> Complex64 {
    let a = if nyq_x { 0.0 } else { xi1 };
    let b = if nyq_y { 0.0 } else { xi2 };
    Complex64::new(-0.5 * b, 0.5 * a)
}

fn ratio_or_one(num: Complex64, den: Complex64) -> Complex64 {
    if den.norm_sqr() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        num / den
    }
}

fn inv_or_zero(s: Complex64) -> Complex64 {
    if s.norm_sqr() == 0.0 {
        ZERO
    } else {
        1.0 / s
    }
}

/// Precomputed symbol tables for one grid, shared by the nonlinearities and
/// the Newton solver.
#[derive(Debug, Clone)]
pub struct Calculus {
    pub grid: GridSpec,
    pub d: Multiplier,
    pub d_bar: Multiplier,
    pub beurling: Multiplier,
    pub anti_beurling: Multiplier,
    pub laplacian: Multiplier,
    pub inverse_laplacian: Multiplier,
    pub dx: Multiplier,
    pub dy: Multiplier,
}

impl Calculus {
    pub fn new(grid: GridSpec) -> Self {
        Self {
            grid,
            d: Multiplier::d(grid),
            d_bar: Multiplier::d_bar(grid),
            beurling: Multiplier::beurling(grid),
            anti_beurling: Multiplier::anti_beurling(grid),
            laplacian: Multiplier::laplacian(grid),
            inverse_laplacian: Multiplier::inverse_laplacian(grid),
            dx: Multiplier::dx(grid),
            dy: Multiplier::dy(grid),
        }
    }
}

pub fn d(f: &Field) -> Result<Field> {
    Multiplier::d(*f.grid()).apply(f)
}

pub fn d_bar(f: &Field) -> Result<Field> {
    Multiplier::d_bar(*f.grid()).apply(f)
}

/// Beurling transform; the zero frequency is dropped.
pub fn beurling(f: &Field) -> Result<Field> {
    Multiplier::beurling(*f.grid()).apply(f)
}

pub fn anti_beurling(f: &Field) -> Result<Field> {
    Multiplier::anti_beurling(*f.grid()).apply(f)
}

/// Beurling transform that rejects inputs whose mean exceeds `tol · max|f|`.
pub fn beurling_strict(f: &Field, tol: f64) -> Result<Field> {
    check_zero_mean(f, tol)?;
    beurling(f)
}

pub fn anti_beurling_strict(f: &Field, tol: f64) -> Result<Field> {
    check_zero_mean(f, tol)?;
    anti_beurling(f)
}

pub(crate) fn check_zero_mean(f: &Field, tol: f64) -> Result<()> {
    let mean = f.mean().norm();
    let scale = f.max_abs().max(f64::MIN_POSITIVE);
    if mean > tol * scale {
        return Err(Error::Contract {
            what: "nonzero mean passed to a zero-mean operator".into(),
            magnitude: mean,
        });
    }
    Ok(())
}
