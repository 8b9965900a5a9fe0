//! Discrete uncentered Hardy–Littlewood maximal function.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Field, SpaceTag};

/// `Mf(x) = max |f|`-average over node squares of side `s ∈ {1, 2, 4, …, n}`
/// that lie inside the box and contain `x`.
///
/// Side `1` is the node itself, so `Mf ≥ |f|` pointwise.
pub fn maximal_function(f: &Field) -> Result<Field> {
    f.expect_tag(SpaceTag::Physical)?;
    let g = *f.grid();
    let n = g.n();
    let w = n + 1;
    let mut sat = vec![0.0f64; w * w];
    for iy in 0..n {
        for ix in 0..n {
            sat[(iy + 1) * w + ix + 1] =
                f.at(ix, iy).norm() + sat[iy * w + ix + 1] + sat[(iy + 1) * w + ix]
                    - sat[iy * w + ix];
        }
    }
    let mut out: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let mut s = 2;
    while s <= n {
        let m = n - s + 1;
        let inv = 1.0 / (s * s) as f64;
        let avg = |i0: usize, j0: usize| {
            (sat[(j0 + s) * w + i0 + s] - sat[j0 * w + i0 + s] - sat[(j0 + s) * w + i0]
                + sat[j0 * w + i0])
                * inv
        };
        // Row pass: best square start in x for each start row j0.
        let mut rows = vec![0.0f64; m * n];
        for j0 in 0..m {
            let a: Vec<f64> = (0..m).map(|i0| avg(i0, j0)).collect();
            for x in 0..n {
                let lo = (x + 1).saturating_sub(s);
                let hi = x.min(m - 1);
                rows[j0 * n + x] = a[lo..=hi].iter().copied().fold(0.0, f64::max);
            }
        }
        for y in 0..n {
            let lo = (y + 1).saturating_sub(s);
            let hi = y.min(m - 1);
            for x in 0..n {
                let best = (lo..=hi).map(|j0| rows[j0 * n + x]).fold(0.0, f64::max);
                let o = &mut out[y * n + x];
                *o = o.max(best);
            }
        }
        s *= 2;
    }
    Field::new(
        g,
        out.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        SpaceTag::Physical,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn constant_maps_to_modulus() {
        let g = GridSpec::new(16, 2.0).unwrap();
        let f = Field::from_fn(g, |_| Complex64::new(0.6, -0.8));
        let m = maximal_function(&f).unwrap();
        assert!(m
            .values()
            .iter()
            .all(|v| (v.re - 1.0).abs() < 1e-14 && v.im == 0.0));
    }

    #[test]
    fn dominates_modulus() {
        let g = GridSpec::new(16, 2.0).unwrap();
        let f = Field::from_fn(g, |z| (z * z).sin());
        let m = maximal_function(&f).unwrap();
        assert!(m
            .values()
            .iter()
            .zip(f.values())
            .all(|(a, b)| a.re >= b.norm() - 1e-15));
    }
}
