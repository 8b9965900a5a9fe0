//! NV solutions as Miura images of mNV solutions.

use num_complex::Complex64;

use super::newton::{miura_inverse, NewtonParams};
use super::spectrum::{schrodinger_min_eig, EigenCertificate, EigenParams};
use super::{miura_forward, MiuraPotential};
use crate::error::{Error, Result};
use crate::evolution::{
    evolve_direct, EvolveParams, Model, NonlinearOps, Trajectory, TrajectoryMeta,
};
use crate::grid::Field;
use crate::multiplier;

#[derive(Debug, Clone)]
pub struct NvMiuraOptions {
    pub evolve: EvolveParams,
    pub newton: NewtonParams,
    pub eigen: EigenParams,
    /// Range tolerance: `q₀` is accepted when `λ_min ≥ −range_tol·(1 + max|q₀|)`.
    pub range_tol: f64,
}

impl Default for NvMiuraOptions {
    fn default() -> Self {
        Self {
            evolve: EvolveParams::default(),
            newton: NewtonParams::default(),
            eigen: EigenParams::default(),
            range_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NvViaMiura {
    /// `q(t) = M(u(t))`, with model NV.
    pub trajectory: Trajectory,
    /// The underlying mNV trajectory.
    pub mnv: Trajectory,
    /// `∫q(t)` per saved time.
    pub integrals: Vec<f64>,
    /// `‖q_t − (Λq + N(q))‖₂ / ‖q_t‖₂` with `q_t = 2∂u_t + 2Re(ū u_t)` and
    /// `u_t` from the mNV equation, all evaluated without dealiasing.
    pub nv_residuals: Vec<f64>,
    pub initial_certificate: EigenCertificate,
}

/// Evolves `q₀` under NV by `q(t) = M(u(t))`, `u₀ = M⁻¹q₀`, `u` solving mNV.
///
/// `times` are the save times; the final one is the integration horizon.
pub fn nv_via_miura(
    q0: &MiuraPotential,
    times: &[f64],
    opts: &NvMiuraOptions,
) -> Result<NvViaMiura> {
    let t_final = *times
        .last()
        .ok_or_else(|| Error::Usage("no output times".into()))?;
    let grid = *q0.grid();
    let cert = schrodinger_min_eig(q0, &opts.eigen)?;
    let bound = -opts.range_tol * (1.0 + q0.max_abs());
    if cert.lambda_min < bound {
        return Err(Error::Contract {
            what: format!(
                "initial potential outside the Miura range: lambda_min = {:.6e} (residual {:.1e})",
                cert.lambda_min, cert.residual
            ),
            magnitude: cert.lambda_min,
        });
    }
    let u0 = if q0.field().max_abs() == 0.0 {
        Field::zeros(grid, crate::grid::SpaceTag::Physical)
    } else {
        let inv = miura_inverse(q0, &opts.newton)?;
        if !inv.status.newton_converged() {
            return Err(Error::NonConvergence {
                iterations: inv.newton_iters,
                residual: inv.final_residual(),
                history: inv.residual_history,
            });
        }
        inv.u
    };
    let params = EvolveParams {
        save_times: times.to_vec(),
        ..opts.evolve.clone()
    };
    let mnv = evolve_direct(&Model::MNV, &u0, t_final, &params)?;
    let mut states = Vec::with_capacity(mnv.len());
    let mut integrals = Vec::with_capacity(mnv.len());
    let mut nv_residuals = Vec::with_capacity(mnv.len());
    let mut mnv_ops = NonlinearOps::new(Model::MNV, grid, false);
    let mut nv_ops = NonlinearOps::new(Model::NV, grid, false);
    for u in &mnv.states {
        let q = miura_forward(u)?;
        integrals.push(q.integral);
        let ut = mnv_ops.rhs(u)?;
        let qt = multiplier::d(&ut)?
            .scale_re(2.0)
            .add(&u.conj().mul(&ut).scale_re(2.0))
            .map(|v| Complex64::new(v.re, 0.0));
        let rhs = nv_ops.rhs(q.field())?;
        let denom = qt.l2_norm();
        nv_residuals.push(if denom > 0.0 {
            qt.sub(&rhs).l2_norm() / denom
        } else {
            0.0
        });
        states.push(q.into_field());
    }
    let trajectory = Trajectory {
        model: Model::NV,
        grid,
        times: mnv.times.clone(),
        states,
        meta: TrajectoryMeta {
            dealias: None,
            ..mnv.meta.clone()
        },
        blow_up: mnv.blow_up,
    };
    Ok(NvViaMiura {
        trajectory,
        mnv,
        integrals,
        nv_residuals,
        initial_certificate: cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, SpaceTag};

    #[test]
    fn zero_potential_stays_zero() {
        let g = GridSpec::new(16, 8.0).unwrap();
        let q = MiuraPotential::new(Field::zeros(g, SpaceTag::Physical)).unwrap();
        let out = nv_via_miura(&q, &[0.0, 0.01], &NvMiuraOptions::default()).unwrap();
        assert!(out.trajectory.states.iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn deep_well_is_rejected() {
        let g = GridSpec::new(32, 8.0).unwrap();
        let q = MiuraPotential::new(Field::from_real_fn(g, |x, y| {
            -10.0 * (-(x * x + y * y)).exp()
        }))
        .unwrap();
        let err = nv_via_miura(&q, &[0.0, 0.01], &NvMiuraOptions::default()).unwrap_err();
        assert!(err.to_string().contains("lambda_min"));
    }
}
