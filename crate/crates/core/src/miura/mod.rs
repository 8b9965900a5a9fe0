//! The Miura map `M(u) = 2∂u + |u|²`, its inverse through the logarithmic
//! zero mode, the positivity classifier for `−Δ + q`, and NV solutions
//! obtained from the mNV flow.
//!
//! A field `u` is constrained when `∂u` is real; every constrained field is
//! `2∂̄φ` for a real `φ`, and then `M(u) = Δφ + |∇φ|²`.

mod flow;
mod newton;
mod spectrum;

pub use flow::{nv_via_miura, NvMiuraOptions, NvViaMiura};
pub use newton::{
    miura_inverse, roundtrip_error, zero_mode, LogZeroMode, MiuraInverse, NewtonParams,
    NewtonStatus,
};
pub use spectrum::{
    classify, dense_min_eig, schrodinger_min_eig, ClassifierReport, EigenCertificate, EigenParams,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, SpaceTag};
use crate::multiplier::{check_zero_mean, Multiplier};
use crate::{fft, Complex64};

/// Relative size of `Im ∂u` above which a field counts as unconstrained.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// A real potential together with its grid integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiuraPotential {
    #[serde(skip)]
    q: Option<Field>,
    pub integral: f64,
    /// `‖Im ∂u‖₂/‖u‖₂` of the source field, when it exceeded [`CONSTRAINT_TOL`].
    pub constraint_violation: Option<f64>,
}

impl MiuraPotential {
    /// Wraps a real field; the imaginary part must be below `1e-12` relative.
    pub fn new(q: Field) -> Result<Self> {
        q.expect_tag(SpaceTag::Physical)?;
        let frac = q.imag_fraction();
        if frac > 1e-12 {
            return Err(Error::Contract {
                what: "potential must be real".into(),
                magnitude: frac,
            });
        }
        let q = q.re();
        Ok(Self {
            integral: q.integral().re,
            q: Some(q),
            constraint_violation: None,
        })
    }

    pub fn field(&self) -> &Field {
        self.q.as_ref().expect("potential samples")
    }

    pub fn grid(&self) -> &GridSpec {
        self.field().grid()
    }

    pub fn max_abs(&self) -> f64 {
        self.field().max_abs()
    }

    pub fn into_field(self) -> Field {
        self.q.expect("potential samples")
    }
}

/// `‖Im ∂u‖₂ / ‖u‖₂`, zero for `u = 0`.
pub fn constraint_violation(u: &Field) -> Result<f64> {
    let norm = u.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(crate::multiplier::d(u)?.im().l2_norm() / norm)
}

/// `M(u) = 2∂u + |u|²`, keeping the real part. Unconstrained input is
/// accepted and tagged with the size of `Im ∂u`.
pub fn miura_forward(u: &Field) -> Result<MiuraPotential> {
    u.expect_tag(SpaceTag::Physical)?;
    let du = crate::multiplier::d(u)?;
    let norm = u.l2_norm();
    let violation = if norm > 0.0 {
        du.im().l2_norm() / norm
    } else {
        0.0
    };
    let q = du.zip_map(u, |d, v| Complex64::new(2.0 * d.re + v.norm_sqr(), 0.0));
    let mut p = MiuraPotential::new(q)?;
    if violation > CONSTRAINT_TOL {
        log::warn!("miura_forward: constraint violated by {violation:.3e}");
        p.constraint_violation = Some(violation);
    }
    Ok(p)
}

/// `2∂̄ Re(½∂̄⁻¹u)`: the closest field of the form `2∂̄φ` with `φ` real.
pub fn constraint_project(u: &Field) -> Result<Field> {
    u.expect_tag(SpaceTag::Physical)?;
    check_zero_mean(u, 1e-10)?;
    let phi = Multiplier::d_bar_inverse(*u.grid())
        .apply(u)?
        .re()
        .scale_re(0.5);
    Ok(crate::multiplier::d_bar(&phi)?.scale_re(2.0))
}

/// `u = 2∂̄φ` for real `φ`.
pub fn from_log_potential(phi: &Field) -> Result<Field> {
    Ok(crate::multiplier::d_bar(&phi.re())?.scale_re(2.0))
}

/// Discrete surrogate for the `Ḣ⁻¹ + L¹` norm: the least value over radial
/// frequency cuts `c` of `‖|D|⁻¹P_{<c}f‖₂ + ‖f − P_{<c}f‖₁`, where `P_{<c}`
/// drops the zero frequency, minimized by golden-section search in `log c`.
pub fn surrogate_norm(f: &Field) -> Result<f64> {
    f.expect_tag(SpaceTag::Physical)?;
    let g = *f.grid();
    let plan = fft::plan(g.n());
    let mut spec = f.values().to_vec();
    plan.forward(&mut spec);
    let freqs = g.freqs();
    let n = g.n();
    let radii: Vec<f64> = (0..n * n)
        .map(|i| freqs[i % n].hypot(freqs[i / n]))
        .collect();
    let eval = |logc: f64| -> f64 {
        let c = logc.exp();
        let mut low = vec![Complex64::new(0.0, 0.0); n * n];
        let mut high = spec.clone();
        for i in 1..n * n {
            if radii[i] < c {
                low[i] = spec[i] / radii[i];
                high[i] = Complex64::new(0.0, 0.0);
            }
        }
        plan.inverse(&mut low);
        plan.inverse(&mut high);
        let l2 = (low.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.cell_area()).sqrt();
        let l1 = high.iter().map(|v| v.norm()).sum::<f64>() * g.cell_area();
        l2 + l1
    };
    let lo = (std::f64::consts::PI / g.half_width()).ln() - 0.1;
    let hi = (g.nyquist() * std::f64::consts::SQRT_2).ln() + 0.1;
    Ok(golden_min(eval, lo, hi, 40))
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = f(a).min(f(b)).min(fc).min(fd);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
            best = best.min(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
            best = best.min(fd);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_phi(g: GridSpec) -> Field {
        Field::from_real_fn(g, |x, y| {
            0.7 * (-((x - 0.3).powi(2) + 0.7 * (y + 0.2).powi(2))).exp()
        })
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = GridSpec::new(32, 8.0).unwrap();
        let z = Field::zeros(g, SpaceTag::Physical);
        let q = miura_forward(&z).unwrap();
        assert_eq!(q.field().max_abs(), 0.0);
        assert_eq!(q.integral, 0.0);
        assert!(q.constraint_violation.is_none());
    }

    #[test]
    fn forward_matches_symbolic_gaussian() {
        // φ = a e^{−r²}: Δφ = a(4r² − 4)e^{−r²}, |∇φ|² = 4a²r²e^{−2r²}
        let g = GridSpec::new(128, 8.0).unwrap();
        let a = 0.6;
        let phi = Field::from_real_fn(g, |x, y| a * (-(x * x + y * y)).exp());
        let u = from_log_potential(&phi).unwrap();
        let q = miura_forward(&u).unwrap();
        assert!(q.constraint_violation.is_none());
        let expect = Field::from_real_fn(g, |x, y| {
            let r2 = x * x + y * y;
            a * (4.0 * r2 - 4.0) * (-r2).exp() + 4.0 * a * a * r2 * (-2.0 * r2).exp()
        });
        assert!(q.field().sub(&expect).max_abs() < 1e-8);
    }

    #[test]
    fn integral_equals_mass() {
        let g = GridSpec::new(64, 8.0).unwrap();
        let u = from_log_potential(&gaussian_phi(g)).unwrap();
        let q = miura_forward(&u).unwrap();
        let m = u.l2_norm().powi(2);
        assert!((q.integral - m).abs() <= 1e-12 * m);
    }

    #[test]
    fn unconstrained_input_is_tagged() {
        let g = GridSpec::new(64, 8.0).unwrap();
        let u = from_log_potential(&gaussian_phi(g))
            .unwrap()
            .scale(Complex64::new(0.0, 1.0));
        let q = miura_forward(&u).unwrap();
        assert!(q.constraint_violation.unwrap() > 1e-3);
    }

    #[test]
    fn projection_fixes_constrained_and_kills_imaginary_potential() {
        let g = GridSpec::new(64, 8.0).unwrap();
        let u = from_log_potential(&gaussian_phi(g)).unwrap();
        assert!(constraint_project(&u).unwrap().rel_distance(&u) < 1e-12);
        let v = crate::multiplier::d_bar(&gaussian_phi(g))
            .unwrap()
            .scale(Complex64::new(0.0, 2.0));
        assert!(constraint_project(&v).unwrap().max_abs() < 1e-12 * v.max_abs());
    }

    #[test]
    fn projection_output_is_constrained_and_idempotent() {
        let g = GridSpec::new(32, 8.0).unwrap();
        let u = Field::from_fn(g, |z| {
            (-(z.norm_sqr())).exp() * Complex64::new(z.re, 1.0 + z.im * z.re)
        });
        let u = u.map(|v| v - u.mean());
        let p = constraint_project(&u).unwrap();
        assert!(constraint_violation(&p).unwrap() <= 1e-12);
        assert!(constraint_project(&p).unwrap().rel_distance(&p) < 1e-12);
    }

    #[test]
    fn surrogate_norm_is_positive_homogeneous() {
        let g = GridSpec::new(32, 8.0).unwrap();
        let f = Field::from_real_fn(g, |x, y| (-(x * x + y * y)).exp() * (x + 0.5));
        let a = surrogate_norm(&f).unwrap();
        let b = surrogate_norm(&f.scale_re(3.0)).unwrap();
        assert!(a > 0.0);
        assert!((b / a - 3.0).abs() < 1e-6);
        assert_eq!(
            surrogate_norm(&Field::zeros(g, SpaceTag::Physical)).unwrap(),
            0.0
        );
    }
}
