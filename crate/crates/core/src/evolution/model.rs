//! The three models, their dispersive symbols and nonlinearities.
//!
//! All three are written `u_t = Λu + 𝒩(u)` with `Λ` diagonal in Fourier space:
//!
//! * mNV: `u_t + (∂³ + ∂̄³)u = N(u)`, cubic `N`.
//! * NV: `q_t + (∂³ + ∂̄³)q = N(q)`, quadratic `N`, real `q`.
//! * DS-II: `iu_t + (∂² + ∂̄²)u + u(r + r̄) = 0` with `∂̄r + ∂|u|² = 0`.
//!
//! For `e^{i(ξ₁x+ξ₂y)}` the symbol of `∂³ + ∂̄³` is `σ = iξ₁(3ξ₂² − ξ₁²)/4`
//! and that of `∂² + ∂̄²` is `−(ξ₁² − ξ₂²)/2`; both flows are unitary.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Fft2};
use crate::grid::{Field, GridSpec, SpaceTag};
use crate::kgrid::Wavenumber;
use crate::multiplier::{sym_d, sym_dbar, Calculus, Multiplier};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "mNV")]
    Mnv,
    #[serde(rename = "NV")]
    Nv,
    #[serde(rename = "DSII")]
    Ds2,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Mnv => "mNV",
            ModelKind::Nv => "NV",
            ModelKind::Ds2 => "DSII",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mnv" => Ok(ModelKind::Mnv),
            "nv" => Ok(ModelKind::Nv),
            "dsii" | "ds2" | "ds-ii" => Ok(ModelKind::Ds2),
            other => Err(Error::Usage(format!("unknown model {other:?}"))),
        }
    }
}

/// Which form of the quadratic NV nonlinearity to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NvForm {
    /// `¾[∂(q ∂̄⁻¹∂q) + ∂̄(q̄ ∂⁻¹∂̄q̄)]`.
    #[default]
    Divergence,
    /// `¾[q ∂̄⁻¹∂q + q ∂⁻¹∂̄q]`, kept for comparison only.
    Undifferentiated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ModelKind,
    #[serde(default)]
    pub nv_form: NvForm,
}

impl Model {
    pub const MNV: Model = Model {
        kind: ModelKind::Mnv,
        nv_form: NvForm::Divergence,
    };
    pub const NV: Model = Model {
        kind: ModelKind::Nv,
        nv_form: NvForm::Divergence,
    };
    pub const DS2: Model = Model {
        kind: ModelKind::Ds2,
        nv_form: NvForm::Divergence,
    };

    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            nv_form: NvForm::default(),
        }
    }

    /// Symbol of the dispersive operator: `∂³ + ∂̄³` or `∂² + ∂̄²`.
    pub fn dispersion(&self, grid: GridSpec) -> Multiplier {
        let p = match self.kind {
            ModelKind::Mnv | ModelKind::Nv => 3,
            ModelKind::Ds2 => 2,
        };
        Multiplier::from_fn(grid, ZERO, move |a, b, nx, ny| {
            sym_d(a, b, nx, ny).powi(p) + sym_dbar(a, b, nx, ny).powi(p)
        })
    }

    /// `Λ` in `u_t = Λu + 𝒩(u)`; purely imaginary.
    pub fn generator(&self, grid: GridSpec) -> Multiplier {
        let disp = self.dispersion(grid);
        match self.kind {
            ModelKind::Mnv | ModelKind::Nv => disp.map(|s| -s),
            ModelKind::Ds2 => disp.map(|s| I * s),
        }
    }

    /// Radius of the dealiasing mask as a fraction of the Nyquist frequency.
    pub fn dealias_fraction(&self) -> f64 {
        match self.kind {
            ModelKind::Nv => 2.0 / 3.0,
            ModelKind::Mnv | ModelKind::Ds2 => 0.5,
        }
    }

    /// Amplitude `c` for which `u ↦ S(cu)` turns the flow into a phase
    /// rotation; none for NV, whose flow is not linearized by this transform.
    pub fn coupling(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Mnv => Some(0.5),
            ModelKind::Ds2 => Some(FRAC_1_SQRT_2),
            ModelKind::Nv => None,
        }
    }

    /// Phase multiplying scattering data over time `t`:
    /// `e^{−itω}` with `ω = k³ + k̄³` for mNV, `e^{itω}` with `ω = k² + k̄²` for DS-II.
    pub fn scattering_phase(&self, k: Wavenumber, t: f64) -> Result<Complex64> {
        let kc = k.as_complex();
        match self.kind {
            ModelKind::Mnv => Ok(Complex64::from_polar(1.0, -t * 2.0 * (kc * kc * kc).re)),
            ModelKind::Ds2 => Ok(Complex64::from_polar(1.0, t * 2.0 * (kc * kc).re)),
            ModelKind::Nv => Err(Error::Usage(
                "NV has no scattering phase for this transform".into(),
            )),
        }
    }

    /// Rough size of the linearized nonlinear term for data of sup norm
    /// `amplitude` on `grid`, used for the published step bound.
    pub fn nonlinear_rate(&self, grid: &GridSpec, amplitude: f64) -> f64 {
        let xi = self.dealias_fraction() * grid.nyquist();
        match self.kind {
            // ¾ × four terms × |u|² × |σ_∂| ≤ ξ/2
            ModelKind::Mnv => 1.5 * amplitude * amplitude * xi,
            // ¾ × two terms × |q| × ξ/2
            ModelKind::Nv => 0.75 * amplitude * xi,
            // |r + r̄| ≤ 2|u|²
            ModelKind::Ds2 => 2.0 * amplitude * amplitude,
        }
    }
}

/// `e^{tΛ} f`.
pub fn linear_flow(model: &Model, f: &Field, t: f64) -> Result<Field> {
    f.expect_tag(SpaceTag::Physical)?;
    model.generator(*f.grid()).map(|s| (s * t).exp()).apply(f)
}

/// Spectral workspace for repeated nonlinearity evaluations on one grid.
pub struct NonlinearOps {
    pub(crate) model: Model,
    pub(crate) grid: GridSpec,
    pub(crate) fft: std::sync::Arc<Fft2>,
    pub(crate) calc: Calculus,
    /// Input and output mask; `None` evaluates without dealiasing.
    pub(crate) mask: Option<Vec<f64>>,
    bufs: [Vec<Complex64>; 6],
}

impl NonlinearOps {
    pub fn new(model: Model, grid: GridSpec, dealias: bool) -> Self {
        let mask = dealias.then(|| {
            Multiplier::radial_mask(grid, model.dealias_fraction())
                .symbol()
                .iter()
                .map(|v| v.re)
                .collect()
        });
        let len = grid.len();
        Self {
            model,
            grid,
            fft: fft::plan(grid.n()),
            calc: Calculus::new(grid),
            mask,
            bufs: std::array::from_fn(|_| vec![ZERO; len]),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `𝒩̂` from `û` (unnormalized DFT coefficients), written into `out`.
    pub fn eval_spectral(&mut self, u_hat: &[Complex64], out: &mut [Complex64]) {
        let [b0, b1, b2, b3, b4, b5] = &mut self.bufs;
        b0.copy_from_slice(u_hat);
        if let Some(m) = &self.mask {
            b0.iter_mut().zip(m).for_each(|(v, w)| *v *= w);
        }
        let f = &self.fft;
        let c = &self.calc;
        match self.model.kind {
            ModelKind::Mnv => {
                // u, ∂u, ∂̄u
                mul_into(b1, b0, c.d.symbol());
                mul_into(b2, b0, c.d_bar.symbol());
                f.inverse(b0);
                f.inverse(b1);
                f.inverse(b2);
                // ū∂u, |u|², ū∂̄u
                for i in 0..b0.len() {
                    let ub = b0[i].conj();
                    b3[i] = ub * b1[i];
                    b4[i] = Complex64::new(b0[i].norm_sqr(), 0.0);
                    b5[i] = ub * b2[i];
                }
                f.forward(b3);
                f.forward(b4);
                f.forward(b5);
                // B(ū∂u) + B̄(ū∂̄u) into b3; B|u|² into b5; B̄|u|² into b4
                let (bs, abs) = (c.beurling.symbol(), c.anti_beurling.symbol());
                for i in 0..b3.len() {
                    b3[i] = bs[i] * b3[i] + abs[i] * b5[i];
                    b5[i] = bs[i] * b4[i];
                    b4[i] *= abs[i];
                }
                f.inverse(b3);
                f.inverse(b4);
                f.inverse(b5);
                for i in 0..out.len() {
                    out[i] = (b0[i] * b3[i] + b1[i] * b5[i] + b2[i] * b4[i]) * 0.75;
                }
                f.forward(out);
            }
            ModelKind::Nv => {
                let (bs, abs) = (c.beurling.symbol(), c.anti_beurling.symbol());
                let n = self.grid.n();
                // q̄ in spectral form: conj(q̂(−ξ))
                for iy in 0..n {
                    for ix in 0..n {
                        let r = ((n - iy) % n) * n + (n - ix) % n;
                        b1[iy * n + ix] = b0[r].conj();
                    }
                }
                match self.model.nv_form {
                    NvForm::Divergence => {
                        mul_into(b2, b0, bs);
                        mul_into(b3, b1, abs);
                        f.inverse(b0);
                        f.inverse(b1);
                        f.inverse(b2);
                        f.inverse(b3);
                        for i in 0..b2.len() {
                            b2[i] *= b0[i];
                            b3[i] *= b1[i];
                        }
                        f.forward(b2);
                        f.forward(b3);
                        let (ds, dbs) = (c.d.symbol(), c.d_bar.symbol());
                        for i in 0..out.len() {
                            out[i] = (ds[i] * b2[i] + dbs[i] * b3[i]) * 0.75;
                        }
                    }
                    NvForm::Undifferentiated => {
                        mul_into(b2, b0, bs);
                        mul_into(b3, b0, abs);
                        f.inverse(b0);
                        f.inverse(b2);
                        f.inverse(b3);
                        for i in 0..out.len() {
                            out[i] = b0[i] * (b2[i] + b3[i]) * 0.75;
                        }
                        f.forward(out);
                    }
                }
            }
            ModelKind::Ds2 => {
                f.inverse(b0);
                for i in 0..b1.len() {
                    b1[i] = Complex64::new(b0[i].norm_sqr(), 0.0);
                }
                f.forward(b1);
                let bs = c.beurling.symbol();
                // r = −B|u|²
                for i in 0..b1.len() {
                    b1[i] *= -bs[i];
                }
                f.inverse(b1);
                for i in 0..out.len() {
                    out[i] = I * b0[i] * (2.0 * b1[i].re);
                }
                f.forward(out);
            }
        }
        if let Some(m) = &self.mask {
            out.iter_mut().zip(m).for_each(|(v, w)| *v *= w);
        }
    }

    /// `𝒩(u)` in physical space.
    pub fn eval(&mut self, u: &Field) -> Result<Field> {
        u.expect_tag(SpaceTag::Physical)?;
        u.expect_grid(&self.grid)?;
        let mut spec = u.values().to_vec();
        self.fft.forward(&mut spec);
        let mut out = vec![ZERO; spec.len()];
        self.eval_spectral(&spec, &mut out);
        self.fft.inverse(&mut out);
        Field::physical(self.grid, out)
    }

    /// `Λu + 𝒩(u)` in physical space.
    pub fn rhs(&mut self, u: &Field) -> Result<Field> {
        let lin = self.model.generator(self.grid).apply(u)?;
        Ok(lin.add(&self.eval(u)?))
    }
}

fn mul_into(dst: &mut [Complex64], src: &[Complex64], sym: &[Complex64]) {
    for ((d, s), m) in dst.iter_mut().zip(src).zip(sym) {
        *d = s * m;
    }
}

/// The mNV nonlinearity
/// `N = ¾[u B(ū∂u) + ∂u B|u|² + u B̄(ū∂̄u) + ∂̄u B̄|u|²]`
/// with `B = ∂̄⁻¹∂` and `B̄ = ∂⁻¹∂̄`, dealiased.
pub fn nonlinearity_mnv(u: &Field) -> Result<Field> {
    NonlinearOps::new(Model::MNV, *u.grid(), true).eval(u)
}

/// The NV nonlinearity `N = ¾[∂(q Bq) + ∂̄(q̄ B̄q̄)]` for real `q`, dealiased.
pub fn nonlinearity_nv(q: &Field) -> Result<Field> {
    check_real(q)?;
    NonlinearOps::new(Model::NV, *q.grid(), true).eval(q)
}

/// The undifferentiated variant `¾[q Bq + q B̄q]`.
pub fn nonlinearity_nv_undifferentiated(q: &Field) -> Result<Field> {
    check_real(q)?;
    let model = Model {
        kind: ModelKind::Nv,
        nv_form: NvForm::Undifferentiated,
    };
    NonlinearOps::new(model, *q.grid(), true).eval(q)
}

/// The DS-II coupling `u(r + r̄)` with `r = −B|u|²`, dealiased.
pub fn nonlinearity_dsii(u: &Field) -> Result<Field> {
    // the stepper form carries the factor i from iu_t
    Ok(NonlinearOps::new(Model::DS2, *u.grid(), true)
        .eval(u)?
        .scale(-I))
}

pub(crate) fn check_real(q: &Field) -> Result<()> {
    let imag = q.im().l2_norm();
    let total = q.l2_norm();
    if imag > 1e-12 * total {
        return Err(Error::Contract {
            what: "NV potential must be real".into(),
            magnitude: imag / total.max(f64::MIN_POSITIVE),
        });
    }
    Ok(())
}
