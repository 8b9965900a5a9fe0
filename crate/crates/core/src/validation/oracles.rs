//! Slow reference computations used by the oracle gates.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Field, GridSpec};
use crate::kgrid::KGrid;

const MAX_DEPTH: u32 = 40;
const OUTER_PANELS: usize = 256;
const INNER_PANELS: usize = 32;

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (fa + 4.0 * fm + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.norm() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`, starting from `panels` equal panels so that features narrower than
/// the interval are not missed by the first samples.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
) -> Complex64 {
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let w = (b - a) / panels as f64;
    let tol = tol / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * w, a + (i + 1) as f64 * w);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = simpson(lo, hi, fa, fm, fb);
            refine(&f, lo, hi, fa, fm, fb, whole, tol, 0)
        })
        .sum()
}

/// `(1/π)∫ f(w)/(z − w) dw` for `f` supported in the disk of radius `support`
/// about the origin, by nested adaptive quadrature in polar coordinates
/// centered at `z` (where the kernel singularity cancels against `ρ dρ`).
pub fn cauchy_quadrature(
    f: impl Fn(f64, f64) -> f64,
    support: f64,
    z: Complex64,
    tol: f64,
) -> Complex64 {
    let outer = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let proj = z.re * c + z.im * s;
        let disc = proj * proj - z.norm_sqr() + support * support;
        if disc <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let hi = -proj + disc.sqrt();
        let lo = (-proj - disc.sqrt()).max(0.0);
        if hi <= lo {
            return Complex64::new(0.0, 0.0);
        }
        let inner = adaptive_simpson(
            |rho| Complex64::new(f(z.re + rho * c, z.im + rho * s), 0.0),
            lo,
            hi,
            INNER_PANELS,
            1e-3 * tol,
        );
        -Complex64::from_polar(1.0, -theta) * inner / PI
    };
    adaptive_simpson(outer, 0.0, TAU, OUTER_PANELS, tol)
}

/// Cell averages of `f` on `grid` from `sub × sub` midpoint samples per cell.
pub fn cell_average(grid: GridSpec, sub: usize, f: impl Fn(f64, f64) -> f64) -> Field {
    let h = grid.spacing();
    let offsets: Vec<f64> = (0..sub)
        .map(|i| ((i as f64 + 0.5) / sub as f64 - 0.5) * h)
        .collect();
    let w = 1.0 / (sub * sub) as f64;
    Field::from_real_fn(grid, |x, y| {
        offsets
            .iter()
            .flat_map(|&dy| offsets.iter().map(move |&dx| (dx, dy)))
            .map(|(dx, dy)| f(x + dx, y + dy))
            .sum::<f64>()
            * w
    })
}

/// `û(k) = (i/π) Σ_z e^{−2i(x k₁ − y k₂)} u(z) h²` by direct summation over
/// every pair of nodes.
pub fn direct_hat(u: &Field, kgrid: &KGrid) -> Vec<Complex64> {
    let g = u.grid();
    let n = g.n();
    let w = Complex64::new(0.0, g.cell_area() / PI);
    kgrid
        .nodes()
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for iy in 0..n {
                for ix in 0..n {
                    let (x, y) = (g.coord(ix), g.coord(iy));
                    acc += u.at(ix, iy) * Complex64::from_polar(1.0, -2.0 * (x * k.k1 - y * k.k2));
                }
            }
            acc * w
        })
        .collect()
}

/// `ǔ(z) = (−i/π) Σ_k e^{2i(x k₁ − y k₂)} s(k) Δk²` by direct summation.
pub fn direct_check(values: &[Complex64], kgrid: &KGrid, out: &GridSpec) -> Result<Field> {
    let dk = kgrid.spacing();
    let w = Complex64::new(0.0, -dk * dk / PI);
    let vals = (0..out.len())
        .map(|i| {
            let (x, y) = (out.coord(i % out.n()), out.coord(i / out.n()));
            kgrid
                .nodes()
                .zip(values)
                .map(|(k, s)| s * Complex64::from_polar(1.0, 2.0 * (x * k.k1 - y * k.k2)))
                .sum::<Complex64>()
                * w
        })
        .collect();
    Field::physical(*out, vals)
}

/// Unnormalized 2-D DFT `Σ f[y][x] e^{−2πi(jx·x + jy·y)/n}` by direct summation.
pub fn direct_dft(values: &[Complex64], n: usize) -> Vec<Complex64> {
    let w = |a: usize, b: usize| Complex64::from_polar(1.0, -TAU * ((a * b) % n) as f64 / n as f64);
    (0..n * n)
        .map(|j| {
            let (jx, jy) = (j % n, j / n);
            (0..n * n)
                .map(|i| values[i] * w(i % n, jx) * w(i / n, jy))
                .sum()
        })
        .collect()
}

/// `V^p` of a sequence of samples by enumerating every subsequence.
pub fn v_p_exhaustive(samples: &[Field], p: f64) -> f64 {
    let m = samples.len();
    assert!(
        m < 25,
        "exhaustive search is exponential in the sample count"
    );
    let best = (0u32..(1 << m))
        .map(|mask| {
            let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            idx.windows(2)
                .map(|w| samples[w[1]].sub(&samples[w[0]]).l2_norm().powf(p))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    best.powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_a_step() {
        let v = adaptive_simpson(
            |x| Complex64::new(if x < 0.3 { 1.0 } else { 0.0 }, 0.0),
            0.0,
            1.0,
            1,
            1e-12,
        );
        assert!((v.re - 0.3).abs() < 1e-9, "{v}");
    }

    #[test]
    fn cauchy_of_disk_is_conjugate_inside_and_reciprocal_outside() {
        let disk = |x: f64, y: f64| if x * x + y * y < 1.0 { 1.0 } else { 0.0 };
        let inside = Complex64::new(0.3, -0.2);
        let v = cauchy_quadrature(disk, 1.5, inside, 1e-10);
        assert!((v - inside.conj()).norm() < 1e-7, "{v}");
        let outside = Complex64::new(2.5, 1.0);
        let v = cauchy_quadrature(disk, 1.5, outside, 1e-10);
        assert!((v - 1.0 / outside).norm() < 1e-7, "{v}");
    }
}
