//! Cauchy transform `∂̄⁻¹f(z) = (1/π) ∫ f(w)/(z − w) dw`.
//!
//! Two realizations are provided. The periodic one divides by the `∂̄`
//! symbol and needs zero-mean input. The free-space one convolves with the
//! fundamental solution `1/(πz)` truncated to the disk of radius `2L`, on a
//! grid zero-padded to `[-2L, 2L)²`; the truncated kernel has the closed-form
//! transform `−2i(1 − J₀(R|ξ|))/(ξ₁ + iξ₂)`, so for inputs supported in the
//! central half of the box the result is free of periodic images.

use num_complex::Complex64;

use crate::error::Result;
use crate::fft::{self, Fft2};
use crate::grid::{Field, GridSpec, SpaceTag};
use crate::multiplier::{check_zero_mean, Multiplier};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CauchyMode {
    PeriodicDcZero,
    FreeSpaceTruncated,
}

/// Raised when a free-space input leaks out of the central half of the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportWarning {
    pub tail_fraction: f64,
    pub threshold: f64,
}

impl std::fmt::Display for SupportWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "support leakage: {:.3e} of the L2 mass lies outside the central half (threshold {:.1e})",
            self.tail_fraction, self.threshold
        )
    }
}

/// Default relative tail allowed outside the central half.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-6;

/// Relative mean tolerated by the periodic mode.
pub const PERIODIC_MEAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CauchyOutput {
    pub field: Field,
    pub warning: Option<SupportWarning>,
}

pub fn cauchy_transform(f: &Field, mode: CauchyMode) -> Result<CauchyOutput> {
    cauchy_transform_with(f, mode, DEFAULT_TAIL_THRESHOLD)
}

pub fn cauchy_transform_with(
    f: &Field,
    mode: CauchyMode,
    tail_threshold: f64,
) -> Result<CauchyOutput> {
    f.expect_tag(SpaceTag::Physical)?;
    match mode {
        CauchyMode::PeriodicDcZero => {
            check_zero_mean(f, PERIODIC_MEAN_TOL)?;
            let field = Multiplier::d_bar_inverse(*f.grid()).apply(f)?;
            Ok(CauchyOutput {
                field,
                warning: None,
            })
        }
        CauchyMode::FreeSpaceTruncated => {
            let tail = f.tail_fraction();
            let warning = (tail > tail_threshold).then_some(SupportWarning {
                tail_fraction: tail,
                threshold: tail_threshold,
            });
            let op = FreeSpaceCauchy::new(*f.grid());
            let mut out = vec![Complex64::new(0.0, 0.0); f.grid().len()];
            op.apply(f.values(), &mut out, &mut Vec::new());
            Ok(CauchyOutput {
                field: Field::physical(*f.grid(), out)?,
                warning,
            })
        }
    }
}

/// Reusable free-space Cauchy operator for one grid.
pub struct FreeSpaceCauchy {
    grid: GridSpec,
    padded: std::sync::Arc<Fft2>,
    symbol: Vec<Complex64>,
}

impl FreeSpaceCauchy {
    pub fn new(grid: GridSpec) -> Self {
        let big = grid.doubled();
        let radius = 2.0 * grid.half_width();
        let p = big.n();
        let freqs = big.freqs();
        let mut symbol = Vec::with_capacity(p * p);
        for &b in &freqs {
            for &a in &freqs {
                symbol.push(truncated_kernel_symbol(a, b, radius));
            }
        }
        Self {
            grid,
            padded: fft::plan(p),
            symbol,
        }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Writes `∂̄⁻¹ input` into `out`; both are `n × n` row-major.
    /// Row transforms of the all-zero padding rows are skipped.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64], buf: &mut Vec<Complex64>) {
        let n = self.grid.n();
        let p = 2 * n;
        let o = n / 2;
        buf.clear();
        buf.resize(p * p, Complex64::new(0.0, 0.0));
        for iy in 0..n {
            buf[(iy + o) * p + o..(iy + o) * p + o + n]
                .copy_from_slice(&input[iy * n..(iy + 1) * n]);
        }
        self.padded.rows(true, buf, o..o + n);
        self.padded.cols(true, buf, 0..p);
        for (v, s) in buf.iter_mut().zip(&self.symbol) {
            *v *= s;
        }
        self.padded.cols(false, buf, 0..p);
        self.padded.rows(false, buf, o..o + n);
        let scale = 1.0 / (p * p) as f64;
        for iy in 0..n {
            for ix in 0..n {
                out[iy * n + ix] = buf[(iy + o) * p + o + ix] * scale;
            }
        }
    }

    /// The convolution on the whole padded box `[-2L, 2L)²`.
    pub fn apply_padded(&self, input: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let p = 2 * n;
        let o = n / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); p * p];
        for iy in 0..n {
            buf[(iy + o) * p + o..(iy + o) * p + o + n]
                .copy_from_slice(&input[iy * n..(iy + 1) * n]);
        }
        self.padded.forward(&mut buf);
        for (v, s) in buf.iter_mut().zip(&self.symbol) {
            *v *= s;
        }
        self.padded.inverse(&mut buf);
        buf
    }
}

/// Transform of `χ_{|z|<R}/(πz)` at angular frequency `(ξ₁, ξ₂)`.
pub fn truncated_kernel_symbol(xi1: f64, xi2: f64, radius: f64) -> Complex64 {
    let r = (xi1 * xi1 + xi2 * xi2).sqrt();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let factor = 1.0 - libm::j0(radius * r);
    Complex64::new(0.0, -2.0 * factor) / Complex64::new(xi1, xi2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::multiplier;

    fn gaussian(g: GridSpec, c: Complex64, w: f64) -> Field {
        Field::from_fn(g, |z| Complex64::new((-(z - c).norm_sqr() / w).exp(), 0.0))
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = GridSpec::new(32, 4.0).unwrap();
        let z = Field::zeros(g, SpaceTag::Physical);
        for mode in [CauchyMode::PeriodicDcZero, CauchyMode::FreeSpaceTruncated] {
            assert_eq!(cauchy_transform(&z, mode).unwrap().field.max_abs(), 0.0);
        }
    }

    #[test]
    fn free_space_inverts_dbar_of_compact_bump() {
        // g = exp(-|z-c|²/0.5), f = ∂̄g; the Cauchy transform returns g exactly
        // (the constant is zero since g decays).
        let g = GridSpec::new(128, 8.0).unwrap();
        let bump = gaussian(g, Complex64::new(0.4, -0.3), 0.5);
        let f = multiplier::d_bar(&bump).unwrap();
        let out = cauchy_transform(&f, CauchyMode::FreeSpaceTruncated).unwrap();
        assert!(out.warning.is_none());
        assert!(
            out.field.rel_distance(&bump) < 1e-6,
            "{}",
            out.field.rel_distance(&bump)
        );
    }

    #[test]
    fn free_space_then_dbar_reproduces_gaussian_on_central_quarter() {
        let g = GridSpec::new(128, 8.0).unwrap();
        let f = gaussian(g, Complex64::new(0.0, 0.0), 1.0);
        let op = FreeSpaceCauchy::new(g);
        let padded = op.apply_padded(f.values());
        let big = g.doubled();
        let dbw = multiplier::d_bar(&Field::physical(big, padded).unwrap()).unwrap();
        let n = g.n();
        let o = n / 2;
        let (mut err, mut nrm) = (0.0f64, 0.0f64);
        for iy in 3 * n / 8..5 * n / 8 {
            for ix in 3 * n / 8..5 * n / 8 {
                err = err.max((dbw.at(ix + o, iy + o) - f.at(ix, iy)).norm());
                nrm = nrm.max(f.at(ix, iy).norm());
            }
        }
        assert!(err / nrm < 1e-6, "{}", err / nrm);
    }

    #[test]
    fn leakage_is_reported() {
        let g = GridSpec::new(32, 4.0).unwrap();
        let f = Field::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let out = cauchy_transform(&f, CauchyMode::FreeSpaceTruncated).unwrap();
        let w = out.warning.expect("constant field must leak");
        assert!(w.tail_fraction > 0.5);
    }

    #[test]
    fn periodic_mode_rejects_nonzero_mean() {
        let g = GridSpec::new(32, 4.0).unwrap();
        let f = gaussian(g, Complex64::new(0.0, 0.0), 1.0);
        assert!(matches!(
            cauchy_transform(&f, CauchyMode::PeriodicDcZero),
            Err(Error::Contract { .. })
        ));
    }

    #[test]
    fn periodic_mode_inverts_dbar() {
        let g = GridSpec::new(64, 6.0).unwrap();
        let bump = gaussian(g, Complex64::new(0.5, 0.5), 0.7);
        let f = multiplier::d_bar(&bump).unwrap();
        let out = cauchy_transform(&f, CauchyMode::PeriodicDcZero)
            .unwrap()
            .field;
        let shifted = bump.map(|v| v - bump.mean());
        assert!(out.rel_distance(&shifted) < 1e-10);
    }
}
