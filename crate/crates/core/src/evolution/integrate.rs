//! Exponential fourth-order time stepping in Fourier space.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::{check_real, Model, ModelKind, NonlinearOps};
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, SpaceTag};
use crate::io;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Norm above which a state counts as blown up.
pub const BLOWUP_NORM: f64 = 1e8;

/// Safety constant in `dt_max = STABILITY_CONSTANT / ν`; the RK4 stability
/// region reaches `2.78` along the real and imaginary axes.
pub const STABILITY_CONSTANT: f64 = 2.8;

/// Fraction of `1/max|σ|` used for the default step.
pub const DEFAULT_DT_FACTOR: f64 = 0.3;

/// Number of contour points for the ETDRK4 coefficients.
const CONTOUR_POINTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scheme {
    /// Lawson integrating-factor RK4.
    #[default]
    Ifrk4,
    /// Cox-Matthews ETDRK4 with contour-averaged coefficients.
    Etdrk4,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ifrk4" => Ok(Scheme::Ifrk4),
            "etdrk4" => Ok(Scheme::Etdrk4),
            other => Err(Error::Usage(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Largest admissible `|dt|` for data of sup norm `amplitude`.
///
/// The dispersive part is integrated exactly, so the bound comes from the
/// linearized nonlinear term only.
pub fn dt_max(model: &Model, _scheme: Scheme, grid: &GridSpec, amplitude: f64) -> f64 {
    let rate = model.nonlinear_rate(grid, amplitude);
    if rate > 0.0 {
        STABILITY_CONSTANT / rate
    } else {
        f64::INFINITY
    }
}

/// `0.3 / max|σ|` over the dealiased band, capped by [`dt_max`].
pub fn default_dt(model: &Model, scheme: Scheme, grid: &GridSpec, amplitude: f64) -> f64 {
    let cut = model.dealias_fraction() * grid.nyquist();
    let gen = model.generator(*grid);
    let freqs = grid.freqs();
    let n = grid.n();
    let mut smax = 0.0f64;
    for (jy, &b) in freqs.iter().enumerate() {
        for (jx, &a) in freqs.iter().enumerate() {
            if (a * a + b * b).sqrt() <= cut {
                smax = smax.max(gen.symbol()[jy * n + jx].norm());
            }
        }
    }
    let dt = if smax > 0.0 {
        DEFAULT_DT_FACTOR / smax
    } else {
        f64::INFINITY
    };
    dt.min(dt_max(model, scheme, grid, amplitude))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveParams {
    pub scheme: Scheme,
    /// Step size; the default step is refined so that `T` is a whole number of steps.
    pub dt: Option<f64>,
    pub dealias: bool,
    /// Output times; empty means `[0, T]`.
    pub save_times: Vec<f64>,
    /// Integrates the linear part only.
    pub linear_only: bool,
}

impl Default for EvolveParams {
    fn default() -> Self {
        Self {
            scheme: Scheme::Ifrk4,
            dt: None,
            dealias: true,
            save_times: Vec::new(),
            linear_only: false,
        }
    }
}

impl EvolveParams {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_save_times(mut self, times: Vec<f64>) -> Self {
        self.save_times = times;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub dt: f64,
    pub dt_max: f64,
    /// `None` for trajectories computed through the scattering transform.
    pub scheme: Option<Scheme>,
    /// Mask radius as a fraction of Nyquist, or `None` without dealiasing.
    pub dealias: Option<f64>,
    pub steps: usize,
    /// Largest relative imaginary part removed by the NV real projection.
    pub projection_max: f64,
}

/// Time bracket for a detected blow-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    /// Last time at which the state was finite and below the threshold.
    pub last_good: f64,
    /// First time at which the threshold was crossed.
    pub detected: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub model: Model,
    pub grid: GridSpec,
    /// Monotone in the direction of integration; `times[0]` is the initial time.
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub meta: TrajectoryMeta,
    pub blow_up: Option<BlowUp>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    model: Model,
    grid: GridSpec,
    times: Vec<f64>,
    meta: TrajectoryMeta,
    blow_up: Option<BlowUp>,
    files: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &Field {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    /// State saved at time `t`, if any.
    pub fn state_at(&self, t: f64) -> Option<&Field> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .map(|i| &self.states[i])
    }

    /// Writes `manifest.json` and one `state_NNNN.f2d` per saved time.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.states.len());
        for (i, s) in self.states.iter().enumerate() {
            let name = format!("state_{i:04}.f2d");
            io::save_field(dir.join(&name), s)?;
            files.push(name);
        }
        let manifest = Manifest {
            model: self.model,
            grid: self.grid,
            times: self.times.clone(),
            meta: self.meta.clone(),
            blow_up: self.blow_up,
            files,
        };
        let text =
            serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let text = std::fs::read_to_string(dir.join("manifest.json"))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        if m.files.len() != m.times.len() {
            return Err(Error::Format(
                "manifest lists a different number of files and times".into(),
            ));
        }
        let states = m
            .files
            .iter()
            .map(|f| {
                let s = io::load_field(dir.join(f))?;
                s.expect_grid(&m.grid)?;
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model: m.model,
            grid: m.grid,
            times: m.times,
            states,
            meta: m.meta,
            blow_up: m.blow_up,
        })
    }
}

/// One model on one grid with a fixed step, advancing DFT coefficients.
pub struct Stepper {
    ops: NonlinearOps,
    scheme: Scheme,
    dt: f64,
    linear_only: bool,
    real: bool,
    e: Vec<Complex64>,
    e_half: Vec<Complex64>,
    /// ETDRK4 coefficients `Q, f₁, f₂, f₃`.
    etd: Option<[Vec<Complex64>; 4]>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
    stage: Vec<Complex64>,
}

impl Stepper {
    pub fn new(model: Model, grid: GridSpec, dt: f64, scheme: Scheme, dealias: bool) -> Self {
        let lam = model.generator(grid);
        let e = lam.symbol().iter().map(|s| (s * dt).exp()).collect();
        let e_half = lam
            .symbol()
            .iter()
            .map(|s| (s * (0.5 * dt)).exp())
            .collect();
        let etd = (scheme == Scheme::Etdrk4).then(|| etd_coefficients(lam.symbol(), dt));
        let len = grid.len();
        Self {
            ops: NonlinearOps::new(model, grid, dealias),
            scheme,
            dt,
            linear_only: false,
            real: model.kind == ModelKind::Nv,
            e,
            e_half,
            etd,
            k: std::array::from_fn(|_| vec![ZERO; len]),
            tmp: vec![ZERO; len],
            stage: vec![ZERO; len],
        }
    }

    pub fn linear_only(mut self, on: bool) -> Self {
        self.linear_only = on;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn nonlinear(&mut self, input: &[Complex64], out_idx: usize) {
        if self.linear_only {
            self.k[out_idx].iter_mut().for_each(|v| *v = ZERO);
            return;
        }
        let mut out = std::mem::take(&mut self.k[out_idx]);
        self.ops.eval_spectral(input, &mut out);
        self.k[out_idx] = out;
    }

    /// Advances `v` (unnormalized DFT coefficients) by one step. Returns the
    /// relative size of the non-real part removed for NV, zero otherwise.
    pub fn step(&mut self, v: &mut [Complex64]) -> f64 {
        let h = self.dt;
        match self.scheme {
            Scheme::Ifrk4 => {
                self.nonlinear(v, 0);
                for i in 0..v.len() {
                    self.stage[i] = self.e_half[i] * (v[i] + 0.5 * h * self.k[0][i]);
                }
                let stage = std::mem::take(&mut self.stage);
                self.nonlinear(&stage, 1);
                self.stage = stage;
                for i in 0..v.len() {
                    self.stage[i] = self.e_half[i] * v[i] + 0.5 * h * self.k[1][i];
                }
                let stage = std::mem::take(&mut self.stage);
                self.nonlinear(&stage, 2);
                self.stage = stage;
                for i in 0..v.len() {
                    self.stage[i] = self.e[i] * v[i] + h * self.e_half[i] * self.k[2][i];
                }
                let stage = std::mem::take(&mut self.stage);
                self.nonlinear(&stage, 3);
                self.stage = stage;
                let [k1, k2, k3, k4] = &self.k;
                for i in 0..v.len() {
                    v[i] = self.e[i] * v[i]
                        + h / 6.0
                            * (self.e[i] * k1[i] + 2.0 * self.e_half[i] * (k2[i] + k3[i]) + k4[i]);
                }
            }
            Scheme::Etdrk4 => {
                let [q, f1, f2, f3] = self.etd.take().expect("ETDRK4 coefficients");
                // a in stage, b in tmp, c reuses stage after a is consumed
                self.nonlinear(v, 0);
                for i in 0..v.len() {
                    self.stage[i] = self.e_half[i] * v[i] + q[i] * self.k[0][i];
                }
                let stage = std::mem::take(&mut self.stage);
                self.nonlinear(&stage, 1);
                for i in 0..v.len() {
                    self.tmp[i] = self.e_half[i] * v[i] + q[i] * self.k[1][i];
                }
                let tmp = std::mem::take(&mut self.tmp);
                self.nonlinear(&tmp, 2);
                self.tmp = tmp;
                let mut c = stage;
                for i in 0..v.len() {
                    c[i] = self.e_half[i] * c[i] + q[i] * (2.0 * self.k[2][i] - self.k[0][i]);
                }
                self.nonlinear(&c, 3);
                self.stage = c;
                let [nv, na, nb, nc] = &self.k;
                for i in 0..v.len() {
                    v[i] = self.e[i] * v[i]
                        + nv[i] * f1[i]
                        + 2.0 * (na[i] + nb[i]) * f2[i]
                        + nc[i] * f3[i];
                }
                self.etd = Some([q, f1, f2, f3]);
            }
        }
        if self.real {
            project_real(v, self.ops.grid().n())
        } else {
            0.0
        }
    }
}

/// `v̂ ← ½(v̂(ξ) + conj v̂(−ξ))`; returns the removed part relative to `‖v̂‖`.
fn project_real(v: &mut [Complex64], n: usize) -> f64 {
    let (mut removed, mut total) = (0.0f64, 0.0f64);
    for iy in 0..n {
        let ry = (n - iy) % n;
        for ix in 0..n {
            let rx = (n - ix) % n;
            let a = iy * n + ix;
            let b = ry * n + rx;
            if b < a {
                continue;
            }
            let (va, vb) = (v[a], v[b]);
            let sym = 0.5 * (va + vb.conj());
            let diff = va - sym;
            let w = if a == b { 1.0 } else { 2.0 };
            removed += w * diff.norm_sqr();
            total += va.norm_sqr() + if a == b { 0.0 } else { vb.norm_sqr() };
            v[a] = sym;
            v[b] = sym.conj();
        }
    }
    if total > 0.0 {
        (removed / total).sqrt()
    } else {
        0.0
    }
}

/// `h·mean_j φ(hλ + r_j)` over `r_j = e^{iπ(j−½)/M}` for the four ETDRK4 weights.
fn etd_coefficients(lam: &[Complex64], h: f64) -> [Vec<Complex64>; 4] {
    let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
        .map(|j| {
            Complex64::from_polar(
                1.0,
                std::f64::consts::PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64 * 2.0,
            )
        })
        .collect();
    let m = CONTOUR_POINTS as f64;
    let mut out: [Vec<Complex64>; 4] = std::array::from_fn(|_| Vec::with_capacity(lam.len()));
    for &l in lam {
        let (mut q, mut f1, mut f2, mut f3) = (ZERO, ZERO, ZERO, ZERO);
        for r in &roots {
            let z = l * h + r;
            let ez = z.exp();
            let ez2 = (0.5 * z).exp();
            let z3 = z * z * z;
            q += (ez2 - 1.0) / z;
            f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
            f2 += (2.0 + z + ez * (z - 2.0)) / z3;
            f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
        }
        out[0].push(q * (h / m));
        out[1].push(f1 * (h / m));
        out[2].push(f2 * (h / m));
        out[3].push(f3 * (h / m));
    }
    out
}

/// Smallest positive gap between consecutive save times and `t_final`; the
/// default step divides it so uniform save grids land on whole steps.
fn save_quantum(save_times: &[f64], t_final: f64) -> f64 {
    let mut ts: Vec<f64> = save_times
        .iter()
        .map(|t| t.abs())
        .chain([0.0, t_final.abs()])
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > 1e-12 * t_final.abs().max(1.0))
        .fold(f64::INFINITY, f64::min)
        .min(t_final.abs())
}

/// Maps save times to step indices; each must be a whole multiple of `dt`
/// and lie between 0 and `t_final`.
fn save_steps(save_times: &[f64], t_final: f64, dt: f64) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(save_times.len());
    for &t in save_times {
        let r = t / dt;
        let k = r.round();
        if !r.is_finite() || (r - k).abs() > 1e-9 * k.abs().max(1.0) || k < 0.0 {
            return Err(Error::Usage(format!(
                "save time {t} is not a non-negative multiple of dt = {dt}"
            )));
        }
        if (t - t_final) * t_final.signum() > 1e-12 * t_final.abs().max(1.0) {
            return Err(Error::Usage(format!(
                "save time {t} lies beyond T = {t_final}"
            )));
        }
        out.push(k as usize);
    }
    if out.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("save times must be strictly monotone".into()));
    }
    Ok(out)
}

fn spectral_norm(v: &[Complex64], grid: &GridSpec) -> f64 {
    let s: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    s.sqrt() * grid.spacing() / grid.n() as f64
}

/// Integrates `model` from `u0` at time 0 to `t_final` (which may be negative).
pub fn evolve_direct(
    model: &Model,
    u0: &Field,
    t_final: f64,
    params: &EvolveParams,
) -> Result<Trajectory> {
    u0.expect_tag(SpaceTag::Physical)?;
    if model.kind == ModelKind::Nv {
        check_real(u0)?;
    }
    if !t_final.is_finite() {
        return Err(Error::Usage("final time must be finite".into()));
    }
    let grid = *u0.grid();
    let amp = u0.max_abs();
    let bound = if params.linear_only {
        f64::INFINITY
    } else {
        dt_max(model, params.scheme, &grid, amp)
    };
    let dt = match params.dt {
        Some(dt) => {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Usage(format!("dt must be positive, got {dt}")));
            }
            if dt > bound {
                return Err(Error::Usage(format!(
                    "dt = {dt:.6e} exceeds the stability bound dt_max = {bound:.6e}"
                )));
            }
            dt
        }
        None => {
            let d = default_dt(model, params.scheme, &grid, amp).min(bound);
            let span = save_quantum(&params.save_times, t_final);
            if span == 0.0 {
                d.min(1.0)
            } else {
                span / (span / d).ceil()
            }
        }
    };
    let h = dt * if t_final < 0.0 { -1.0 } else { 1.0 };
    let save_times = if params.save_times.is_empty() {
        if t_final == 0.0 {
            vec![0.0]
        } else {
            vec![0.0, t_final]
        }
    } else {
        params.save_times.clone()
    };
    let steps_at = save_steps(&save_times, t_final, h)?;
    let total_steps = steps_at.last().copied().unwrap_or(0);

    let mut stepper = Stepper::new(*model, grid, h, params.scheme, params.dealias)
        .linear_only(params.linear_only);
    let plan = crate::fft::plan(grid.n());
    let mut v = u0.values().to_vec();
    plan.forward(&mut v);
    let n0 = spectral_norm(&v, &grid);

    let mut times = Vec::with_capacity(save_times.len());
    let mut states = Vec::with_capacity(save_times.len());
    let snapshot = |v: &[Complex64]| -> Result<Field> {
        let mut u = v.to_vec();
        plan.inverse(&mut u);
        Field::physical(grid, u)
    };
    let mut next = 0;
    if steps_at.first() == Some(&0) {
        times.push(save_times[0]);
        states.push(u0.clone());
        next = 1;
    }
    let mut projection_max = 0.0f64;
    let mut blow_up = None;
    let mut steps = 0;
    for s in 1..=total_steps {
        projection_max = projection_max.max(stepper.step(&mut v));
        steps = s;
        let norm = spectral_norm(&v, &grid);
        if !norm.is_finite() || norm > BLOWUP_NORM {
            blow_up = Some(BlowUp {
                last_good: (s - 1) as f64 * h,
                detected: s as f64 * h,
                norm,
            });
            log::warn!("blow-up at t = {:.6} (norm {norm:.3e})", s as f64 * h);
            break;
        }
        if params.linear_only && (norm - n0).abs() > 1e-10 * n0.max(f64::MIN_POSITIVE) {
            return Err(Error::Usage(format!(
                "linear flow changed the norm by {:.3e} at step {s}; check the configuration",
                (norm - n0).abs() / n0
            )));
        }
        if next < steps_at.len() && steps_at[next] == s {
            times.push(save_times[next]);
            states.push(snapshot(&v)?);
            next += 1;
        }
    }
    log::debug!("{model:?}: {steps} steps of dt = {h:.3e}, projection max {projection_max:.2e}");
    Ok(Trajectory {
        model: *model,
        grid,
        times,
        states,
        meta: TrajectoryMeta {
            dt: h,
            dt_max: bound,
            scheme: Some(params.scheme),
            dealias: params.dealias.then(|| model.dealias_fraction()),
            steps,
            projection_max,
        },
        blow_up,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::model::linear_flow;

    fn bump(g: GridSpec, amp: f64) -> Field {
        Field::from_fn(g, |z| Complex64::new(amp * (-z.norm_sqr()).exp(), 0.0))
    }

    #[test]
    fn etd_coefficients_match_taylor_limit_at_zero() {
        // λ = 0: Q = h/2, f1 = h/6, f2 = h/6, f3 = h/6
        let c = etd_coefficients(&[ZERO], 0.1);
        assert!((c[0][0] - 0.05).norm() < 1e-14);
        for f in &c[1..] {
            assert!((f[0] - 0.1 / 6.0).norm() < 1e-14);
        }
    }

    #[test]
    fn etd_coefficients_match_closed_form_at_large_lambda() {
        let l = Complex64::new(0.0, 40.0);
        let h = 0.1;
        let z: Complex64 = l * h;
        let c = etd_coefficients(&[l], h);
        let q = h * ((0.5 * z).exp() - 1.0) / z;
        assert!((c[0][0] - q).norm() < 1e-12);
        let f2 = h * (2.0 + z + z.exp() * (z - 2.0)) / (z * z * z);
        assert!((c[2][0] - f2).norm() < 1e-12);
    }

    #[test]
    fn linear_only_matches_linear_flow() {
        let g = GridSpec::new(32, 4.0).unwrap();
        let u0 = bump(g, 0.5);
        for scheme in [Scheme::Ifrk4, Scheme::Etdrk4] {
            for model in [Model::MNV, Model::DS2, Model::NV] {
                let params = EvolveParams {
                    scheme,
                    dt: Some(0.01),
                    linear_only: true,
                    save_times: vec![0.0, 0.05, 0.1],
                    ..Default::default()
                };
                let traj = evolve_direct(&model, &u0, 0.1, &params).unwrap();
                for (t, s) in traj.times.iter().zip(&traj.states) {
                    let lin = linear_flow(&model, &u0, *t).unwrap();
                    assert!(s.rel_distance(&lin) < 1e-12, "{model:?} {scheme:?} {t}");
                }
            }
        }
    }

    #[test]
    fn dt_above_bound_is_rejected_with_bound() {
        let g = GridSpec::new(32, 4.0).unwrap();
        let u0 = bump(g, 50.0);
        let bound = dt_max(&Model::MNV, Scheme::Ifrk4, &g, 50.0);
        let err = evolve_direct(
            &Model::MNV,
            &u0,
            1.0,
            &EvolveParams::default().with_dt(2.0 * bound),
        )
        .unwrap_err();
        assert!(err.to_string().contains("dt_max"));
    }

    #[test]
    fn misaligned_save_time_is_rejected() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let u0 = bump(g, 0.1);
        let p = EvolveParams::default()
            .with_dt(0.01)
            .with_save_times(vec![0.0, 0.015]);
        assert!(matches!(
            evolve_direct(&Model::MNV, &u0, 0.02, &p),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn projection_is_idempotent_on_real_data() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let mut v = bump(g, 1.0).into_values();
        crate::fft::plan(16).forward(&mut v);
        assert!(project_real(&mut v, 16) < 1e-15);
    }

    #[test]
    fn blow_up_is_flagged_with_bracket() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let u0 = bump(g, 1.0);
        // exponential growth via an artificial norm threshold crossing
        let big = u0.scale_re(2e8);
        let p = EvolveParams {
            dt: Some(1e-12),
            linear_only: true,
            ..Default::default()
        };
        let traj = evolve_direct(&Model::DS2, &big, 1e-12, &p).unwrap();
        let b = traj.blow_up.expect("flagged");
        assert!(b.detected > b.last_good);
        assert_eq!(traj.times, vec![0.0]);
    }

    #[test]
    fn persistence_roundtrip() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let u0 = bump(g, 0.3);
        let p = EvolveParams::default()
            .with_dt(0.01)
            .with_save_times(vec![0.0, 0.01, 0.02]);
        let traj = evolve_direct(&Model::MNV, &u0, 0.02, &p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        traj.save(dir.path()).unwrap();
        let back = Trajectory::load(dir.path()).unwrap();
        assert_eq!(back, traj);
    }
}
