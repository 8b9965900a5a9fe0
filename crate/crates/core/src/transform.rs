//! The unimodular exponentials `e_k` and the `(i/π)`-normalized Fourier pair.
//!
//! With `z = x + iy`, `e_k(z) = exp(i(zk + z̄k̄)) = exp(2i(xk₁ − yk₂))`, and
//! `û(k) = (i/π)∫ e_{−k}(z) u(z) dz`. Its inverse is
//! `ǔ(z) = (−i/π)∫ e_k(z) s(k) dk`. All integrals are grid Riemann sums, and
//! both directions are evaluated as separable matrix products.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, SpaceTag};
use crate::kgrid::{KGrid, Wavenumber};

/// Samples of `e_k` on the grid.
pub fn exp_k(grid: &GridSpec, k: Wavenumber) -> Field {
    let (ex, ey) = exp_k_factors(grid, k, 1.0);
    let n = grid.n();
    let mut values = Vec::with_capacity(grid.len());
    for iy in 0..n {
        for ix in 0..n {
            values.push(ex[ix] * ey[iy]);
        }
    }
    Field::physical(*grid, values).expect("grid-sized buffer")
}

/// Per-axis factors of `e_{sign·k}`: `exp(2i·sign·x k₁)` and `exp(−2i·sign·y k₂)`.
pub(crate) fn exp_k_factors(
    grid: &GridSpec,
    k: Wavenumber,
    sign: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let xs = grid.coords();
    let ex = xs
        .iter()
        .map(|&x| Complex64::from_polar(1.0, 2.0 * sign * x * k.k1))
        .collect();
    let ey = xs
        .iter()
        .map(|&y| Complex64::from_polar(1.0, -2.0 * sign * y * k.k2))
        .collect();
    (ex, ey)
}

fn check_k(grid: &GridSpec, k: Wavenumber) -> Result<()> {
    let limit = grid.nyquist() / 2.0;
    if !k.is_finite() || k.k1.abs() > limit || k.k2.abs() > limit {
        return Err(Error::Band {
            k1: k.k1,
            k2: k.k2,
            limit,
        });
    }
    Ok(())
}

/// `û(k)` at a single wavenumber.
pub fn nv_hat(u: &Field, k: Wavenumber) -> Result<Complex64> {
    u.expect_tag(SpaceTag::Physical)?;
    check_k(u.grid(), k)?;
    let (ex, ey) = exp_k_factors(u.grid(), k, -1.0);
    let n = u.grid().n();
    let mut acc = Complex64::new(0.0, 0.0);
    for iy in 0..n {
        let row = &u.values()[iy * n..(iy + 1) * n];
        let s: Complex64 = row.iter().zip(&ex).map(|(a, b)| a * b).sum();
        acc += s * ey[iy];
    }
    Ok(acc * u.grid().cell_area() * Complex64::new(0.0, 1.0 / PI))
}

/// `û` on every node of `kgrid`, row-major.
pub fn nv_hat_grid(u: &Field, kgrid: &KGrid) -> Result<Vec<Complex64>> {
    u.expect_tag(SpaceTag::Physical)?;
    kgrid.check_band(u.grid())?;
    let g = u.grid();
    let n = g.n();
    let nk = kgrid.nk();
    let xs = g.coords();
    let ks = kgrid.coords();
    // A[kx][x] = exp(-2i x k1), Bm[ky][y] = exp(2i y k2)
    let a: Vec<Complex64> = ks
        .iter()
        .flat_map(|&k1| {
            xs.iter()
                .map(move |&x| Complex64::from_polar(1.0, -2.0 * x * k1))
        })
        .collect();
    let b: Vec<Complex64> = ks
        .iter()
        .flat_map(|&k2| {
            xs.iter()
                .map(move |&y| Complex64::from_polar(1.0, 2.0 * y * k2))
        })
        .collect();
    // T[y][kx] = Σ_x u[y][x] A[kx][x]
    let mut t = vec![Complex64::new(0.0, 0.0); n * nk];
    for iy in 0..n {
        let row = &u.values()[iy * n..(iy + 1) * n];
        for jk in 0..nk {
            let arow = &a[jk * n..(jk + 1) * n];
            t[iy * nk + jk] = row.iter().zip(arow).map(|(p, q)| p * q).sum();
        }
    }
    let w = g.cell_area() * Complex64::new(0.0, 1.0 / PI);
    let mut out = vec![Complex64::new(0.0, 0.0); nk * nk];
    for jy in 0..nk {
        let brow = &b[jy * n..(jy + 1) * n];
        for jx in 0..nk {
            let mut s = Complex64::new(0.0, 0.0);
            for iy in 0..n {
                s += t[iy * nk + jx] * brow[iy];
            }
            out[jy * nk + jx] = s * w;
        }
    }
    Ok(out)
}

/// `ǔ(z) = (−i/π) Σ_k e_k(z) s(k) Δk²` on every node of `out`.
///
/// The lattice must resolve the output box: `2L ≤ π/Δk`.
pub fn nv_check(values: &[Complex64], kgrid: &KGrid, out: &GridSpec) -> Result<Field> {
    if values.len() != kgrid.len() {
        return Err(Error::GridMismatch(
            "scattering values do not match the k-grid".into(),
        ));
    }
    let limit = PI / kgrid.spacing() / 2.0;
    if out.half_width() > limit * (1.0 + 1e-12) {
        return Err(Error::Band {
            k1: out.half_width(),
            k2: out.half_width(),
            limit,
        });
    }
    let n = out.n();
    let nk = kgrid.nk();
    let xs = out.coords();
    let ks = kgrid.coords();
    // exp(2i x k1) and exp(-2i y k2)
    let a: Vec<Complex64> = xs
        .iter()
        .flat_map(|&x| {
            ks.iter()
                .map(move |&k1| Complex64::from_polar(1.0, 2.0 * x * k1))
        })
        .collect();
    let b: Vec<Complex64> = xs
        .iter()
        .flat_map(|&y| {
            ks.iter()
                .map(move |&k2| Complex64::from_polar(1.0, -2.0 * y * k2))
        })
        .collect();
    // T[ky][x] = Σ_kx s[ky][kx] a[x][kx]
    let mut t = vec![Complex64::new(0.0, 0.0); nk * n];
    for jy in 0..nk {
        let row = &values[jy * nk..(jy + 1) * nk];
        for ix in 0..n {
            let arow = &a[ix * nk..(ix + 1) * nk];
            t[jy * n + ix] = row.iter().zip(arow).map(|(p, q)| p * q).sum();
        }
    }
    let dk = kgrid.spacing();
    let w = dk * dk * Complex64::new(0.0, -1.0 / PI);
    let mut vals = vec![Complex64::new(0.0, 0.0); n * n];
    for iy in 0..n {
        let brow = &b[iy * nk..(iy + 1) * nk];
        for ix in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for jy in 0..nk {
                s += t[jy * n + ix] * brow[jy];
            }
            vals[iy * n + ix] = s * w;
        }
    }
    Field::physical(*out, vals)
}

/// The k-lattice dual to `grid`: same node count, `Δk = π/(2L)`, so that
/// [`nv_hat_grid`] and [`nv_check`] are an exact discrete pair.
pub fn dual_kgrid(grid: &GridSpec) -> KGrid {
    let dk = PI / (2.0 * grid.half_width());
    KGrid::new(grid.n(), dk * grid.n() as f64 / 2.0).expect("valid dual lattice")
}
