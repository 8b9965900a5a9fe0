//! Littlewood–Paley shells and homogeneous Besov norms.
//!
//! The bump is `ϕ(ξ) = 1 − h(log₂|ξ|)` with the quintic smoothstep
//! `h(t) = t³(10 − 15t + 6t²)` clamped to `[0, 1]`, so `ϕ = 1` on `|ξ| ≤ 1`
//! and `ϕ = 0` on `|ξ| ≥ 2`. Shell `k` has symbol `ψ(ξ/2^k)` with
//! `ψ(ξ) = ϕ(ξ) − ϕ(2ξ)`.
//!
//! Shells run from the largest `k` with `2^k` at most the fundamental
//! frequency `π/L` up to the smallest `k` with `2^k` at least the corner
//! frequency `√2·π/h`. The sum telescopes to the identity except at the
//! zero frequency, which is kept apart as the remainder.

use num_complex::Complex64;

use super::NormReport;
use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Field, GridSpec, SpaceTag};

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// The bump `ϕ(ξ)` as a function of `|ξ|`.
pub fn lp_profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        1.0 - smoothstep(r.log2())
    }
}

fn shell_symbol(r: f64, k: i32) -> f64 {
    let x = r / 2f64.powi(k);
    lp_profile(x) - lp_profile(2.0 * x)
}

/// Shell symbol tables for one grid.
#[derive(Debug, Clone)]
pub(crate) struct Shells {
    pub grid: GridSpec,
    pub k_min: i32,
    pub tables: Vec<Vec<f64>>,
}

impl Shells {
    pub fn new(grid: GridSpec) -> Self {
        let freqs = grid.freqs();
        let radii: Vec<f64> = freqs
            .iter()
            .flat_map(|&b| freqs.iter().map(move |&a| (a * a + b * b).sqrt()))
            .collect();
        let k_min = grid.freq(1).log2().floor() as i32;
        let k_max = (std::f64::consts::SQRT_2 * grid.nyquist()).log2().ceil() as i32;
        let tables = (k_min..=k_max)
            .map(|k| {
                radii
                    .iter()
                    .map(|&r| if r == 0.0 { 0.0 } else { shell_symbol(r, k) })
                    .collect()
            })
            .collect();
        Self {
            grid,
            k_min,
            tables,
        }
    }

    /// `P_k f` for every shell, from the spectrum of `f`.
    pub fn project_spectrum(&self, spec: &[Complex64]) -> Vec<Field> {
        let plan = fft::plan(self.grid.n());
        self.tables
            .iter()
            .map(|tab| {
                let mut v: Vec<Complex64> = spec.iter().zip(tab).map(|(c, w)| c * w).collect();
                plan.inverse(&mut v);
                Field::new(self.grid, v, SpaceTag::Physical).expect("grid-sized buffer")
            })
            .collect()
    }

    pub fn project(&self, f: &Field) -> Result<Vec<Field>> {
        f.expect_tag(SpaceTag::Physical)?;
        f.expect_grid(&self.grid)?;
        let mut spec = f.values().to_vec();
        fft::plan(self.grid.n()).forward(&mut spec);
        Ok(self.project_spectrum(&spec))
    }
}

/// Dyadic shell projections of a field.
#[derive(Debug, Clone)]
pub struct LpDecomposition {
    pub field: Field,
    /// Index of the first shell; block `i` is `P_{k_min + i} f`.
    pub k_min: i32,
    pub blocks: Vec<Field>,
    /// The zero-frequency part (the mean).
    pub remainder: Field,
}

impl LpDecomposition {
    pub fn k_max(&self) -> i32 {
        self.k_min + self.blocks.len() as i32 - 1
    }

    pub fn block(&self, k: i32) -> Option<&Field> {
        usize::try_from(k - self.k_min)
            .ok()
            .and_then(|i| self.blocks.get(i))
    }

    /// Sum of all blocks and the remainder.
    pub fn reconstruct(&self) -> Field {
        self.blocks
            .iter()
            .fold(self.remainder.clone(), |acc, b| acc.add(b))
    }
}

pub fn lp_decompose(f: &Field) -> Result<LpDecomposition> {
    let shells = Shells::new(*f.grid());
    let blocks = shells.project(f)?;
    let m = f.mean();
    Ok(LpDecomposition {
        field: f.clone(),
        k_min: shells.k_min,
        blocks,
        remainder: Field::from_fn(*f.grid(), |_| m),
    })
}

pub(crate) fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v >= 1.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::Usage(format!("{name} must lie in [1, ∞], got {v}")))
    }
}

/// `ℓ^q` sum of a sequence, `q = ∞` giving the maximum.
pub(crate) fn lq_sum(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        values.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `(Σ_k (2^{ks}‖P_k f‖_{L^p})^q)^{1/q}` over the shells of the grid band.
///
/// The zero frequency is excluded.
pub fn besov_norm(f: &Field, s: f64, p: f64, q: f64) -> Result<NormReport> {
    if !s.is_finite() {
        return Err(Error::Usage(format!("s must be finite, got {s}")));
    }
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let shells = Shells::new(*f.grid());
    let blocks = shells.project(f)?;
    let value = lq_sum(
        blocks
            .iter()
            .zip(shells.k_min..)
            .map(|(b, k)| 2f64.powf(k as f64 * s) * b.lp_norm(p)),
        q,
    );
    NormReport::new("besov", value, f.grid())
        .with_s(s)
        .with_p(p)
        .with_q(q)
        .check()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_endpoints_and_monotone() {
        assert_eq!(lp_profile(0.0), 1.0);
        assert_eq!(lp_profile(1.0), 1.0);
        assert_eq!(lp_profile(2.0), 0.0);
        assert!((lp_profile(std::f64::consts::SQRT_2) - 0.5).abs() < 1e-15);
        let vals: Vec<f64> = (0..=100)
            .map(|i| lp_profile(1.0 + i as f64 / 100.0))
            .collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn shells_cover_the_band() {
        let g = GridSpec::new(32, 8.0).unwrap();
        let sh = Shells::new(g);
        let total: Vec<f64> = (0..g.len())
            .map(|i| sh.tables.iter().map(|t| t[i]).sum())
            .collect();
        assert_eq!(total[0], 0.0);
        assert!(total[1..].iter().all(|&t| (t - 1.0).abs() < 1e-15));
        assert!(2f64.powi(sh.k_min) <= g.freq(1));
        assert!(
            2f64.powi(sh.k_min + sh.tables.len() as i32 - 1)
                >= std::f64::consts::SQRT_2 * g.nyquist()
        );
    }

    #[test]
    fn zero_has_zero_norm() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let f = Field::zeros(g, SpaceTag::Physical);
        assert_eq!(besov_norm(&f, 0.3, 2.0, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn bad_exponents_rejected() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let f = Field::zeros(g, SpaceTag::Physical);
        assert!(besov_norm(&f, 0.0, 0.5, 2.0).is_err());
        assert!(besov_norm(&f, 0.0, 2.0, f64::NAN).is_err());
        assert!(besov_norm(&f, f64::INFINITY, 2.0, 2.0).is_err());
    }
}
