//! Newton inversion of the Miura map through `q = Δφ + |∇φ|²`.
//!
//! The unknowns are a zero-mean real `φ` and a scalar shift `μ`, and the
//! residual is `G(φ, μ) = M(2∂̄φ) + μ − q`. The shift makes the linearization
//! square; at a solution `ψ = e^φ` satisfies `(−Δ + q)ψ = μψ`, so `μ` is the
//! ground-state energy and `q` lies in the range of `M` exactly when `μ = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{miura_forward, MiuraPotential};
use crate::error::{Error, Result};
use crate::fft::{self, Fft2};
use crate::grid::{Field, GridSpec};
use crate::krylov::{gmres, KrylovParams};
use crate::multiplier::{sym_d, sym_dbar, Multiplier};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonParams {
    /// Target for `‖M(u) − q‖₂`.
    pub tol: f64,
    pub max_newton: usize,
    /// Step halvings allowed per Newton step.
    pub max_halvings: usize,
    pub krylov_restart: usize,
    pub krylov_max_iter: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_newton: 40,
            max_halvings: 8,
            krylov_restart: 40,
            krylov_max_iter: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NewtonStatus {
    /// `‖M(u) − q‖₂ ≤ tol`.
    Converged,
    /// Newton converged with a positive shift: `−Δ + q` has a spectral gap
    /// above zero and `q` is not an exact image on the periodic box.
    PositiveShift,
    /// Newton converged with a negative shift: `−Δ + q` has a negative
    /// eigenvalue.
    OutOfRange,
    /// The line search could not reduce `‖G‖`.
    Stagnated,
    /// No convergence within the Newton budget.
    Diverged,
}

impl NewtonStatus {
    pub fn likely_out_of_range(self) -> bool {
        matches!(
            self,
            NewtonStatus::OutOfRange | NewtonStatus::Stagnated | NewtonStatus::Diverged
        )
    }

    /// Whether the Newton iteration itself reached the tolerance.
    pub fn newton_converged(self) -> bool {
        matches!(
            self,
            NewtonStatus::Converged | NewtonStatus::PositiveShift | NewtonStatus::OutOfRange
        )
    }
}

#[derive(Debug, Clone)]
pub struct MiuraInverse {
    pub u: Field,
    /// Zero-mean real `φ` with `u = 2∂̄φ`.
    pub phi: Field,
    /// Spectral shift `μ`; `M(u) = q − μ` at convergence.
    pub shift: f64,
    pub status: NewtonStatus,
    pub newton_iters: usize,
    pub krylov_iters: usize,
    /// `‖G‖₂` before each Newton step and at the end.
    pub residual_history: Vec<f64>,
}

impl MiuraInverse {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("non-empty history")
    }
}

struct Tables {
    grid: GridSpec,
    plan: std::sync::Arc<Fft2>,
    /// `4∂∂̄`.
    lap: Vec<Complex64>,
    /// Pseudo-inverse of `lap`.
    lap_inv: Vec<f64>,
    /// `2∂̄`.
    dbar2: Vec<Complex64>,
}

impl Tables {
    fn new(grid: GridSpec) -> Self {
        let d = Multiplier::from_fn(grid, ZERO, sym_d);
        let db = Multiplier::from_fn(grid, ZERO, sym_dbar);
        let lap: Vec<Complex64> = d
            .symbol()
            .iter()
            .zip(db.symbol())
            .map(|(a, b)| 4.0 * a * b)
            .collect();
        let lap_inv = lap
            .iter()
            .map(|l| if l.norm() > 0.0 { 1.0 / l.re } else { 0.0 })
            .collect();
        Self {
            grid,
            plan: fft::plan(grid.n()),
            lap,
            lap_inv,
            dbar2: db.symbol().iter().map(|s| 2.0 * s).collect(),
        }
    }

    /// `(2∂̄φ, G(φ, μ))` for real `φ`.
    fn residual(&self, phi: &[f64], mu: f64, q: &[f64]) -> (Vec<Complex64>, Vec<f64>) {
        let mut spec: Vec<Complex64> = phi.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        self.plan.forward(&mut spec);
        let mut lap: Vec<Complex64> = spec.iter().zip(&self.lap).map(|(a, b)| a * b).collect();
        let mut g: Vec<Complex64> = spec.iter().zip(&self.dbar2).map(|(a, b)| a * b).collect();
        self.plan.inverse(&mut lap);
        self.plan.inverse(&mut g);
        let r = lap
            .iter()
            .zip(&g)
            .zip(q)
            .map(|((l, gv), qv)| l.re + gv.norm_sqr() + mu - qv)
            .collect();
        (g, r)
    }

    fn norm(&self, v: &[f64]) -> f64 {
        (v.iter().map(|x| x * x).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    /// `w ↦ (δ, dμ) = (lap⁺ w, mean w)`.
    fn precondition(&self, w: &[f64]) -> (Vec<f64>, f64) {
        let mut spec: Vec<Complex64> = w.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        self.plan.forward(&mut spec);
        let mean = spec[0].re / w.len() as f64;
        spec.iter_mut()
            .zip(&self.lap_inv)
            .for_each(|(v, s)| *v *= s);
        self.plan.inverse(&mut spec);
        (spec.into_iter().map(|v| v.re).collect(), mean)
    }

    /// `w + 2∇φ·∇(lap⁺ w)`, the Jacobian applied to the preconditioned `w`.
    fn jacobian_right(&self, g: &[Complex64], w: &[f64]) -> Vec<f64> {
        let mut spec: Vec<Complex64> = w.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        self.plan.forward(&mut spec);
        for ((v, s), d) in spec.iter_mut().zip(&self.lap_inv).zip(&self.dbar2) {
            *v *= d * s;
        }
        self.plan.inverse(&mut spec);
        w.iter()
            .zip(&spec)
            .zip(g)
            .map(|((wv, e), gv)| wv + 2.0 * (gv.conj() * e).re)
            .collect()
    }
}

/// Recovers the constrained `u` with `M(u) = q` by Newton's method with a
/// halving line search and Laplacian-preconditioned GMRES inner solves.
pub fn miura_inverse(q: &MiuraPotential, params: &NewtonParams) -> Result<MiuraInverse> {
    let grid = *q.grid();
    let t = Tables::new(grid);
    let qv: Vec<f64> = q.field().values().iter().map(|v| v.re).collect();
    let area_sqrt = (4.0 * grid.half_width() * grid.half_width()).sqrt();

    // φ₀ = Δ⁻¹(q − mean q)
    let (mut phi, _) = t.precondition(&qv);
    let (_, r0) = t.residual(&phi, 0.0, &qv);
    let mut mu = -r0.iter().sum::<f64>() / r0.len() as f64;
    let (mut g, mut r) = t.residual(&phi, mu, &qv);
    let mut rnorm = t.norm(&r);
    let mut history = vec![rnorm];
    let mut krylov_iters = 0;
    let newton_tol = 0.1 * params.tol;
    let mut status = NewtonStatus::Diverged;
    let mut iters = 0;

    while iters < params.max_newton {
        if !rnorm.is_finite() {
            break;
        }
        if rnorm <= newton_tol {
            status = if mu.abs() * area_sqrt + rnorm <= params.tol {
                NewtonStatus::Converged
            } else if mu < 0.0 {
                NewtonStatus::OutOfRange
            } else {
                NewtonStatus::PositiveShift
            };
            break;
        }
        iters += 1;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let ktol = (1e-3 * rnorm / history[0].max(f64::MIN_POSITIVE)).clamp(1e-12, 1e-3);
        let out = gmres(
            &rhs,
            |w: &Vec<f64>| t.jacobian_right(&g, w),
            KrylovParams {
                tol: ktol,
                max_iter: params.krylov_max_iter,
                restart: params.krylov_restart,
            },
        );
        krylov_iters += out.iterations;
        if out.residual > 0.5 {
            return Err(Error::NonConvergence {
                iterations: out.iterations,
                residual: out.residual,
                history: out.history,
            });
        }
        let (delta, dmu) = t.precondition(&out.solution);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=params.max_halvings {
            let trial: Vec<f64> = phi.iter().zip(&delta).map(|(p, d)| p + alpha * d).collect();
            let tmu = mu + alpha * dmu;
            let (tg, tr) = t.residual(&trial, tmu, &qv);
            let tn = t.norm(&tr);
            if tn.is_finite() && tn < (1.0 - 1e-4 * alpha) * rnorm {
                phi = trial;
                mu = tmu;
                g = tg;
                r = tr;
                rnorm = tn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        history.push(rnorm);
        log::debug!("miura newton {iters}: |G| = {rnorm:.3e}, mu = {mu:.6e}, step {alpha}");
        if !accepted {
            status = NewtonStatus::Stagnated;
            break;
        }
    }
    if status == NewtonStatus::Diverged && rnorm <= newton_tol {
        status = if mu.abs() * area_sqrt + rnorm <= params.tol {
            NewtonStatus::Converged
        } else if mu < 0.0 {
            NewtonStatus::OutOfRange
        } else {
            NewtonStatus::PositiveShift
        };
    }
    let phi = Field::physical(
        grid,
        phi.into_iter().map(|p| Complex64::new(p, 0.0)).collect(),
    )?;
    Ok(MiuraInverse {
        u: Field::physical(grid, g)?,
        phi,
        shift: mu,
        status,
        newton_iters: iters,
        krylov_iters,
        residual_history: history,
    })
}

/// `ψ = e^φ` with diagnostics of the zero-mode equation.
#[derive(Debug, Clone)]
pub struct LogZeroMode {
    pub phi: Field,
    pub psi: Field,
    pub newton_iters: usize,
    pub final_residual: f64,
    pub shift: f64,
    /// `‖Δψ − qψ‖₂ / ‖ψ‖₂`.
    pub psi_residual: f64,
}

impl LogZeroMode {
    /// `max_v ‖(L₁*L₁ + L₂*L₂)v − (−Δ + q)v‖₂ / ‖v‖₂` over `probes`, with
    /// `L_j = ∂_j − ∂_jφ`.
    pub fn factorization_residual(&self, q: &MiuraPotential, probes: &[Field]) -> Result<f64> {
        let grid = *self.phi.grid();
        let dx = Multiplier::dx(grid);
        let dy = Multiplier::dy(grid);
        let lap = Multiplier::laplacian(grid);
        let px = dx.apply(&self.phi)?;
        let py = dy.apply(&self.phi)?;
        let mut worst = 0.0f64;
        for v in probes {
            let mut acc = Field::zeros(grid, crate::grid::SpaceTag::Physical);
            for (d, p) in [(&dx, &px), (&dy, &py)] {
                let lv = d.apply(v)?.sub(&p.mul(v));
                // L* = −∂ − ∂φ
                let adj = d.apply(&lv)?.scale_re(-1.0).sub(&p.mul(&lv));
                acc = acc.add(&adj);
            }
            let h = lap.apply(v)?.scale_re(-1.0).add(&q.field().mul(v));
            worst = worst.max(acc.sub(&h).l2_norm() / v.l2_norm());
        }
        Ok(worst)
    }
}

/// Positive zero mode of `−Δ + q` from the Newton solve.
pub fn zero_mode(q: &MiuraPotential, params: &NewtonParams) -> Result<LogZeroMode> {
    let inv = miura_inverse(q, params)?;
    if inv.status.likely_out_of_range() {
        return Err(Error::Contract {
            what: format!(
                "no positive zero mode ({:?}, shift {:.3e})",
                inv.status, inv.shift
            ),
            magnitude: inv.shift.abs(),
        });
    }
    let psi = inv.phi.map(|p| Complex64::new(p.re.exp(), 0.0));
    let lap_psi = Multiplier::laplacian(*q.grid()).apply(&psi)?;
    let psi_residual = lap_psi.sub(&q.field().mul(&psi)).l2_norm() / psi.l2_norm();
    Ok(LogZeroMode {
        final_residual: inv.final_residual(),
        newton_iters: inv.newton_iters,
        shift: inv.shift,
        phi: inv.phi,
        psi,
        psi_residual,
    })
}

/// Roundtrip helper: `‖M⁻¹(M(u)) − u‖₂ / ‖u‖₂`.
pub fn roundtrip_error(u: &Field, params: &NewtonParams) -> Result<f64> {
    let q = miura_forward(u)?;
    let inv = miura_inverse(&q, params)?;
    Ok(inv.u.rel_distance(u))
}
