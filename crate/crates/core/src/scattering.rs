//! Jost functions and the scattering transform.
//!
//! For a spectral parameter `k`, `m±(·, k)` solve
//! `∂̄m± = ±e_{−k} u conj(m±)` with `m± → 1` at infinity. Writing `m = 1 + w`
//! gives the fixed-point form `w = ±C(e_{−k} u conj(1 + w))` with `C` the
//! free-space Cauchy transform. The conjugation makes the operator only
//! real-linear, so it is solved by GMRES over the real inner product.
//!
//! The solve runs on the central half of the grid, where the potential is
//! required to live; the padded Cauchy grid then coincides with the full grid,
//! which is where the returned Jost functions are sampled.
//!
//! `S u(k) = (1/2πi) ∫ e_k ū (m⁺ + m⁻) dz`.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::{FreeSpaceCauchy, SupportWarning, DEFAULT_TAIL_THRESHOLD};
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, SpaceTag};
use crate::io;
use crate::kgrid::{KGrid, Wavenumber};
use crate::krylov::{gmres, KrylovParams};
use crate::multiplier::Multiplier;
use crate::transform::exp_k_factors;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JostSign {
    Plus,
    Minus,
}

impl JostSign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            JostSign::Plus => 1.0,
            JostSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostParams {
    /// Relative residual of the fixed-point equation.
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    pub tail_threshold: f64,
}

impl Default for JostParams {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            restart: 40,
            tail_threshold: DEFAULT_TAIL_THRESHOLD,
        }
    }
}

impl JostParams {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn krylov(&self) -> KrylovParams {
        KrylovParams {
            tol: self.tol,
            max_iter: self.max_iter,
            restart: self.restart,
        }
    }
}

/// One of `m±` on the full grid.
#[derive(Debug, Clone)]
pub struct JostHalf {
    pub k: Wavenumber,
    pub sign: JostSign,
    pub m: Field,
    /// `‖∂̄m ∓ e_{−k} u conj(m)‖₂` over the central quarter of the grid.
    pub residual: f64,
    /// Final relative residual of the Krylov solve.
    pub fixed_point_residual: f64,
    pub iterations: usize,
    /// Relative mass of `m − 1` outside the central half.
    pub tail_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct JostSolution {
    pub k: Wavenumber,
    pub m_plus: Field,
    pub m_minus: Field,
    /// `(m⁺ + m⁻)/2`.
    pub m1: Field,
    /// `(m⁺ − m⁻)/2`.
    pub m2: Field,
    pub residual_norms: [f64; 2],
    pub iterations: [usize; 2],
}

/// Reusable Jost solver for one potential.
pub struct JostSolver {
    grid: GridSpec,
    crop: GridSpec,
    u: Vec<Complex64>,
    u_l2: f64,
    cauchy: FreeSpaceCauchy,
    warning: Option<SupportWarning>,
}

struct Solved {
    w: Vec<Complex64>,
    iterations: usize,
    residual: f64,
    history: Vec<f64>,
}

impl JostSolver {
    pub fn new(u: &Field) -> Result<Self> {
        Self::with_threshold(u, DEFAULT_TAIL_THRESHOLD)
    }

    pub fn with_threshold(u: &Field, tail_threshold: f64) -> Result<Self> {
        u.expect_tag(SpaceTag::Physical)?;
        let grid = *u.grid();
        let tail = u.tail_fraction();
        let warning = (tail > tail_threshold).then_some(SupportWarning {
            tail_fraction: tail,
            threshold: tail_threshold,
        });
        if let Some(w) = &warning {
            log::warn!("{w}");
        }
        let cropped = u.crop_central_half()?;
        let crop = *cropped.grid();
        Ok(Self {
            grid,
            crop,
            u_l2: u.l2_norm(),
            u: cropped.into_values(),
            cauchy: FreeSpaceCauchy::new(crop),
            warning,
        })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn warning(&self) -> Option<SupportWarning> {
        self.warning
    }

    #[inline]
    pub fn potential_l2(&self) -> f64 {
        self.u_l2
    }

    fn check_k(&self, k: Wavenumber) -> Result<()> {
        let limit = self.crop.nyquist() / 2.0;
        if !k.is_finite() || k.k1.abs() > limit || k.k2.abs() > limit {
            return Err(Error::Band {
                k1: k.k1,
                k2: k.k2,
                limit,
            });
        }
        Ok(())
    }

    /// `±e_{−k} u` on the crop.
    fn coefficient(&self, k: Wavenumber, sign: JostSign) -> Vec<Complex64> {
        let (ex, ey) = exp_k_factors(&self.crop, k, -1.0);
        let m = self.crop.n();
        let s = sign.value();
        let mut a = Vec::with_capacity(m * m);
        for iy in 0..m {
            for ix in 0..m {
                a.push(ex[ix] * ey[iy] * self.u[iy * m + ix] * s);
            }
        }
        a
    }

    fn solve_crop(&self, a: &[Complex64], params: &JostParams, buf: &mut Vec<Complex64>) -> Solved {
        let len = a.len();
        let mut b = vec![ZERO; len];
        self.cauchy.apply(a, &mut b, buf);
        let mut tmp = vec![ZERO; len];
        let out = gmres(
            &b,
            |w: &Vec<Complex64>| {
                for ((t, ai), wi) in tmp.iter_mut().zip(a).zip(w) {
                    *t = ai * wi.conj();
                }
                let mut r = vec![ZERO; len];
                self.cauchy.apply(&tmp, &mut r, buf);
                for (ri, wi) in r.iter_mut().zip(w) {
                    *ri = wi - *ri;
                }
                r
            },
            params.krylov(),
        );
        Solved {
            w: out.solution,
            iterations: out.iterations,
            residual: out.residual,
            history: out.history,
        }
    }

    /// `m = 1 + w` extended to the full grid by one more Cauchy application.
    fn extend(&self, a: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
        let rhs: Vec<Complex64> = a
            .iter()
            .zip(w)
            .map(|(ai, wi)| ai * (ONE + wi).conj())
            .collect();
        let mut full = self.cauchy.apply_padded(&rhs);
        full.iter_mut().for_each(|v| *v += ONE);
        full
    }

    /// The first Born iterate `1 ± ∂̄⁻¹(e_{−k} u)` on the full grid.
    pub fn born(&self, k: Wavenumber, sign: JostSign) -> Result<Field> {
        self.check_k(k)?;
        let a = self.coefficient(k, sign);
        let mut full = self.cauchy.apply_padded(&a);
        full.iter_mut().for_each(|v| *v += ONE);
        Field::physical(self.grid, full)
    }

    /// Solves for `m±` at `k` and returns it on the full grid.
    pub fn solve_half(
        &self,
        k: Wavenumber,
        sign: JostSign,
        params: &JostParams,
    ) -> Result<JostHalf> {
        self.check_k(k)?;
        let a = self.coefficient(k, sign);
        let solved = self.solve_crop(&a, params, &mut Vec::new());
        if solved.residual > params.tol {
            return Err(Error::NonConvergence {
                iterations: solved.iterations,
                residual: solved.residual,
                history: solved.history,
            });
        }
        let m = Field::physical(self.grid, self.extend(&a, &solved.w))?;
        let residual = self.dbar_residual(&m, k, sign)?;
        let tail_fraction = m.map(|v| v - ONE).tail_fraction();
        Ok(JostHalf {
            k,
            sign,
            m,
            residual,
            fixed_point_residual: solved.residual,
            iterations: solved.iterations,
            tail_fraction,
        })
    }

    pub fn solve(&self, k: Wavenumber, params: &JostParams) -> Result<JostSolution> {
        let p = self.solve_half(k, JostSign::Plus, params)?;
        let m = self.solve_half(k, JostSign::Minus, params)?;
        let m1 = p.m.add(&m.m).scale_re(0.5);
        let m2 = p.m.sub(&m.m).scale_re(0.5);
        Ok(JostSolution {
            k,
            residual_norms: [p.residual, m.residual],
            iterations: [p.iterations, m.iterations],
            m_plus: p.m,
            m_minus: m.m,
            m1,
            m2,
        })
    }

    /// `‖∂̄m ∓ e_{−k} u conj(m)‖₂` on the central quarter, where the truncated
    /// kernel agrees with the true one.
    pub fn dbar_residual(&self, m: &Field, k: Wavenumber, sign: JostSign) -> Result<f64> {
        m.expect_grid(&self.grid)?;
        let dbm = Multiplier::d_bar(self.grid).apply(&m.map(|v| v - ONE))?;
        let (ex, ey) = exp_k_factors(&self.grid, k, -1.0);
        let n = self.grid.n();
        let mc = self.crop.n();
        let o = n / 4;
        let s = sign.value();
        let mut acc = 0.0;
        for iy in 3 * n / 8..5 * n / 8 {
            for ix in 3 * n / 8..5 * n / 8 {
                let u = self.u[(iy - o) * mc + (ix - o)];
                let idx = iy * n + ix;
                let r = dbm.values()[idx] - ex[ix] * ey[iy] * u * m.values()[idx].conj() * s;
                acc += r.norm_sqr();
            }
        }
        Ok((acc * self.grid.cell_area()).sqrt())
    }

    /// `S u(k)` together with per-node solver statistics.
    pub fn node(
        &self,
        k: Wavenumber,
        params: &JostParams,
        buf: &mut Vec<Complex64>,
    ) -> (Complex64, NodeStats) {
        let mut stats = NodeStats {
            k1: k.k1,
            k2: k.k2,
            iterations: [0, 0],
            residuals: [0.0, 0.0],
            converged: true,
        };
        let mut sum = vec![Complex64::new(2.0, 0.0); self.u.len()];
        for (i, sign) in [JostSign::Plus, JostSign::Minus].into_iter().enumerate() {
            let a = self.coefficient(k, sign);
            let solved = self.solve_crop(&a, params, buf);
            stats.iterations[i] = solved.iterations;
            stats.residuals[i] = solved.residual;
            stats.converged &= solved.residual <= params.tol && solved.residual.is_finite();
            sum.iter_mut().zip(&solved.w).for_each(|(s, w)| *s += w);
        }
        let (ex, ey) = exp_k_factors(&self.crop, k, 1.0);
        let m = self.crop.n();
        let mut acc = ZERO;
        for iy in 0..m {
            let mut row = ZERO;
            for ix in 0..m {
                let idx = iy * m + ix;
                row += ex[ix] * self.u[idx].conj() * sum[idx];
            }
            acc += row * ey[iy];
        }
        let value = acc * self.crop.cell_area() / Complex64::new(0.0, 2.0 * PI);
        (value, stats)
    }
}

pub fn solve_jost(
    u: &Field,
    k: Wavenumber,
    sign: JostSign,
    params: &JostParams,
) -> Result<JostHalf> {
    JostSolver::with_threshold(u, params.tail_threshold)?.solve_half(k, sign, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub k1: f64,
    pub k2: f64,
    pub iterations: [usize; 2],
    pub residuals: [f64; 2],
    pub converged: bool,
}

/// `S u` sampled on a [`KGrid`].
#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub kgrid: KGrid,
    pub values: Vec<Complex64>,
    pub source_l2: f64,
    pub stats: Vec<NodeStats>,
    pub warning: Option<SupportWarning>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    nk: usize,
    half_width: f64,
    source_l2: f64,
    total_iterations: usize,
    failed: Vec<(f64, f64)>,
    warning: Option<(f64, f64)>,
    nodes: Vec<NodeStats>,
}

impl ScatteringData {
    pub fn zeros(kgrid: KGrid) -> Self {
        Self {
            kgrid,
            values: vec![ZERO; kgrid.len()],
            source_l2: 0.0,
            stats: Vec::new(),
            warning: None,
        }
    }

    /// Builds data from raw values with no solver statistics.
    pub fn from_values(kgrid: KGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != kgrid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-node k-grid",
                values.len(),
                kgrid.len()
            )));
        }
        Ok(Self {
            kgrid,
            values,
            source_l2: f64::NAN,
            stats: Vec::new(),
            warning: None,
        })
    }

    pub fn failed(&self) -> Vec<Wavenumber> {
        self.stats
            .iter()
            .filter(|s| !s.converged)
            .map(|s| Wavenumber::new(s.k1, s.k2))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.stats.iter().all(|s| s.converged)
    }

    pub fn ensure_complete(&self) -> Result<()> {
        if self.is_complete() {
            return Ok(());
        }
        Err(Error::PartialScattering {
            failed: self.failed().into_iter().map(|k| (k.k1, k.k2)).collect(),
            total: self.kgrid.len(),
        })
    }

    pub fn total_iterations(&self) -> usize {
        self.stats
            .iter()
            .map(|s| s.iterations[0] + s.iterations[1])
            .sum()
    }

    /// `(Σ |s|² Δk²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let dk = self.kgrid.spacing();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dk * dk).sqrt()
    }

    pub fn rel_distance(&self, other: &[Complex64]) -> f64 {
        let num: f64 = self
            .values
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = other.iter().map(|b| b.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// Multiplies node values by `f(k)`.
    pub fn map_with_k(&self, f: impl Fn(Wavenumber, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            *v = f(self.kgrid.node(i), *v);
        }
        out
    }

    /// The data as a spectral-parameter field on the lattice viewed as a grid.
    pub fn to_field(&self) -> Result<Field> {
        Field::new(
            self.kgrid.as_grid()?,
            self.values.clone(),
            SpaceTag::SpectralParameter,
        )
    }

    /// Writes the values in the field format and the statistics to a JSON
    /// sidecar next to it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        io::save_field(path, &self.to_field()?)?;
        let side = Sidecar {
            nk: self.kgrid.nk(),
            half_width: self.kgrid.half_width(),
            source_l2: self.source_l2,
            total_iterations: self.total_iterations(),
            failed: self.failed().into_iter().map(|k| (k.k1, k.k2)).collect(),
            warning: self.warning.map(|w| (w.tail_fraction, w.threshold)),
            nodes: self.stats.clone(),
        };
        let json = serde_json::to_string_pretty(&side).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(sidecar_path(path), json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = io::load_field(path)?;
        f.expect_tag(SpaceTag::SpectralParameter)?;
        let kgrid = KGrid::from_grid(f.grid());
        let mut data = Self::from_values(kgrid, f.into_values())?;
        let side = sidecar_path(path);
        if side.exists() {
            let text = std::fs::read_to_string(side)?;
            let s: Sidecar =
                serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
            data.source_l2 = s.source_l2;
            data.stats = s.nodes;
            data.warning = s.warning.map(|(t, th)| SupportWarning {
                tail_fraction: t,
                threshold: th,
            });
        }
        Ok(data)
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    path.with_file_name(name)
}

/// Evaluates `S u` at every node of `kgrid`, in parallel over nodes.
/// Nodes whose Jost solve fails are marked in `stats` and keep the last
/// iterate's value.
pub fn scattering_transform(
    u: &Field,
    kgrid: &KGrid,
    params: &JostParams,
) -> Result<ScatteringData> {
    let solver = JostSolver::with_threshold(u, params.tail_threshold)?;
    scatter_with(&solver, kgrid, params)
}

pub fn scatter_with(
    solver: &JostSolver,
    kgrid: &KGrid,
    params: &JostParams,
) -> Result<ScatteringData> {
    kgrid.check_band(&solver.crop)?;
    let (values, stats): (Vec<Complex64>, Vec<NodeStats>) = (0..kgrid.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| solver.node(kgrid.node(i), params, buf))
        .unzip();
    let data = ScatteringData {
        kgrid: *kgrid,
        values,
        source_l2: solver.u_l2,
        stats,
        warning: solver.warning,
    };
    let failed = data.failed();
    if !failed.is_empty() {
        log::warn!(
            "scattering: {} of {} nodes did not converge",
            failed.len(),
            kgrid.len()
        );
    }
    Ok(data)
}

/// The lattice on which [`inverse_scattering`] evaluates the transform.
pub fn inverse_lattice(s: &ScatteringData, out: &GridSpec) -> Result<KGrid> {
    KGrid::new(s.kgrid.nk(), out.half_width() / 2.0)
}

/// Applies the transform a second time to `s`, viewed as a potential in the
/// `k` variable, and resamples the result onto `out`.
///
/// The data is zero-extended to twice the lattice box so that its own box is
/// the central half of the Jost grid; the output is sampled on `[-L/2, L/2)²`
/// of `out`, zero-extended, and Fourier-resampled to `out.n()` nodes.
pub fn inverse_scattering(
    s: &ScatteringData,
    out: &GridSpec,
    params: &JostParams,
) -> Result<Field> {
    let (field, data) = inverse_scattering_data(s, out, params)?;
    data.ensure_complete()?;
    Ok(field)
}

/// As [`inverse_scattering`], also returning the raw lattice data.
pub fn inverse_scattering_data(
    s: &ScatteringData,
    out: &GridSpec,
    params: &JostParams,
) -> Result<(Field, ScatteringData)> {
    if s.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Usage(
            "scattering data contains non-finite values".into(),
        ));
    }
    let lattice = inverse_lattice(s, out)?;
    let potential = Field::physical(s.kgrid.as_grid()?, s.values.clone())?.zero_extend();
    let data = scattering_transform(&potential, &lattice, params)?;
    let on_lattice = Field::physical(lattice.as_grid()?, data.values.clone())?;
    let field = on_lattice.zero_extend().fourier_resample(out.n())?;
    Ok((field, data))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JostConvention {
    /// `m² = (m⁺ − m⁻)/2`.
    Plain,
    /// `m² = e_{−k} conj((m⁺ − m⁻)/2)`.
    Phased,
}

/// Residuals of `∂̄m¹ = u m²` and `∂(e_k m²) = e_k ū m¹` under both
/// conventions for `m²`, evaluated on the central quarter of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostIdentityReport {
    pub plain: [f64; 2],
    pub phased: [f64; 2],
    pub matching: JostConvention,
}

impl JostIdentityReport {
    pub fn matching_residual(&self) -> f64 {
        match self.matching {
            JostConvention::Plain => self.plain[0].max(self.plain[1]),
            JostConvention::Phased => self.phased[0].max(self.phased[1]),
        }
    }
}

pub fn jost_identity_check(u: &Field, sol: &JostSolution) -> Result<JostIdentityReport> {
    let g = *u.grid();
    sol.m1.expect_grid(&g)?;
    let ek = crate::transform::exp_k(&g, sol.k);
    let em = ek.conj();
    let m1 = &sol.m1;
    let plain_m2 = sol.m2.clone();
    let phased_m2 = em.mul(&sol.m2.conj());
    let dbar_m1 = Multiplier::d_bar(g).apply(&m1.map(|v| v - ONE))?;
    let d = Multiplier::d(g);
    let quarter = |f: &Field| -> f64 {
        let n = g.n();
        let mut acc = 0.0;
        for iy in 3 * n / 8..5 * n / 8 {
            for ix in 3 * n / 8..5 * n / 8 {
                acc += f.at(ix, iy).norm_sqr();
            }
        }
        (acc * g.cell_area()).sqrt()
    };
    let ubar_m1 = ek.mul(&u.conj()).mul(m1);
    let eval = |m2: &Field| -> Result<[f64; 2]> {
        let r1 = dbar_m1.sub(&u.mul(m2));
        let r2 = d.apply(&ek.mul(m2))?.sub(&ubar_m1);
        Ok([quarter(&r1), quarter(&r2)])
    };
    let plain = eval(&plain_m2)?;
    let phased = eval(&phased_m2)?;
    let matching = if phased[0].max(phased[1]) <= plain[0].max(plain[1]) {
        JostConvention::Phased
    } else {
        JostConvention::Plain
    };
    Ok(JostIdentityReport {
        plain,
        phased,
        matching,
    })
}
