//! Evolution through the scattering transform and the diagnostics that
//! compare it with direct integration.
//!
//! With the transform as normalized in [`crate::scattering`], the mNV flow is
//! diagonalized by `u ↦ S(u/2)` and the DS-II flow by `u ↦ S(u/√2)`; the
//! factor is [`Model::coupling`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrate::{evolve_direct, EvolveParams, Trajectory, TrajectoryMeta};
use super::model::{linear_flow, Model};
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, SpaceTag};
use crate::kgrid::KGrid;
use crate::scattering::{inverse_scattering, scattering_transform, JostParams, ScatteringData};
use crate::transform::nv_check;

fn coupling(model: &Model) -> Result<f64> {
    model.coupling().ok_or_else(|| {
        Error::Usage(format!(
            "{} is not linearized by the scattering transform",
            model.kind
        ))
    })
}

/// `S(c·u)` on `kgrid`, failing on unconverged nodes.
pub fn coupled_transform(
    model: &Model,
    u: &Field,
    kgrid: &KGrid,
    params: &JostParams,
) -> Result<ScatteringData> {
    let c = coupling(model)?;
    let s = scattering_transform(&u.scale_re(c), kgrid, params)?;
    s.ensure_complete()?;
    Ok(s)
}

/// Solves at each time in `times` by one forward transform, a phase
/// rotation on `kgrid`, and one inverse transform per time.
pub fn evolve_ist(
    model: &Model,
    u0: &Field,
    times: &[f64],
    kgrid: &KGrid,
    params: &JostParams,
) -> Result<Trajectory> {
    Ok(evolve_ist_with_data(model, u0, times, kgrid, params)?.0)
}

/// As [`evolve_ist`], also returning `S(c·u₀)`.
pub fn evolve_ist_with_data(
    model: &Model,
    u0: &Field,
    times: &[f64],
    kgrid: &KGrid,
    params: &JostParams,
) -> Result<(Trajectory, ScatteringData)> {
    u0.expect_tag(SpaceTag::Physical)?;
    let c = coupling(model)?;
    if times.is_empty() {
        return Err(Error::Usage("no output times".into()));
    }
    let grid = *u0.grid();
    let s0 = coupled_transform(model, u0, kgrid, params)?;
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let phase = phase_table(model, kgrid, t, Orientation::AsWritten)?;
        let st = ScatteringData::from_values(
            *kgrid,
            s0.values.iter().zip(&phase).map(|(s, p)| s * p).collect(),
        )?;
        let u = inverse_scattering(&st, &grid, params)?.scale_re(1.0 / c);
        log::debug!("ist: t = {t}, |u| = {:.6}", u.l2_norm());
        states.push(u);
    }
    let traj = Trajectory {
        model: *model,
        grid,
        times: times.to_vec(),
        states,
        meta: TrajectoryMeta {
            dt: 0.0,
            dt_max: f64::INFINITY,
            scheme: None,
            dealias: None,
            steps: 0,
            projection_max: 0.0,
        },
        blow_up: None,
    };
    Ok((traj, s0))
}

/// Sign of the scattering-data phase relative to the written flow law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    AsWritten,
    Reversed,
}

fn phase_table(
    model: &Model,
    kgrid: &KGrid,
    t: f64,
    orientation: Orientation,
) -> Result<Vec<Complex64>> {
    let t = match orientation {
        Orientation::AsWritten => t,
        Orientation::Reversed => -t,
    };
    kgrid
        .nodes()
        .map(|k| model.scattering_phase(k, t))
        .collect()
}

fn weighted_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizationReport {
    pub orientation: Orientation,
    pub times: Vec<f64>,
    /// `‖S(c u(t)) − phase(t) S(c u(0))‖ / ‖S(c u(0))‖` per saved time.
    pub deviations: Vec<f64>,
}

impl DiagonalizationReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

/// Compares the scattering data of each saved state with the phase-rotated
/// data of the first one.
pub fn diagonalization_check(
    traj: &Trajectory,
    kgrid: &KGrid,
    orientation: Orientation,
    params: &JostParams,
) -> Result<DiagonalizationReport> {
    let model = &traj.model;
    coupling(model)?;
    let t0 = traj.times[0];
    let s0 = coupled_transform(model, &traj.states[0], kgrid, params)?;
    let mut deviations = Vec::with_capacity(traj.len());
    for (&t, u) in traj.times.iter().zip(&traj.states) {
        if t == t0 {
            deviations.push(0.0);
            continue;
        }
        let st = coupled_transform(model, u, kgrid, params)?;
        let phase = phase_table(model, kgrid, t - t0, orientation)?;
        let expect: Vec<Complex64> = s0.values.iter().zip(&phase).map(|(s, p)| s * p).collect();
        deviations.push(weighted_distance(&st.values, &expect));
    }
    Ok(DiagonalizationReport {
        orientation,
        times: traj.times.clone(),
        deviations,
    })
}

/// Fixes the phase orientation by evolving a tiny Gaussian (amplitude
/// `1e-3`, so the flow is linear to `1e-6`) to `t` and keeping whichever
/// orientation explains the scattering data better.
pub fn calibrate_orientation(
    model: &Model,
    grid: GridSpec,
    kgrid: &KGrid,
    t: f64,
    params: &JostParams,
) -> Result<Orientation> {
    let u0 = Field::from_fn(grid, |z| Complex64::new(1e-3 * (-z.norm_sqr()).exp(), 0.0));
    let traj = evolve_direct(model, &u0, t, &EvolveParams::default())?;
    let fwd = diagonalization_check(&traj, kgrid, Orientation::AsWritten, params)?;
    let rev = diagonalization_check(&traj, kgrid, Orientation::Reversed, params)?;
    log::info!(
        "orientation calibration: as written {:.3e}, reversed {:.3e}",
        fwd.max_deviation(),
        rev.max_deviation()
    );
    Ok(if fwd.max_deviation() <= rev.max_deviation() {
        Orientation::AsWritten
    } else {
        Orientation::Reversed
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticSign {
    /// `t → +∞`.
    Plus,
    /// `t → −∞`.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticStatus {
    Stabilized,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct AsymptoticReport {
    /// Back-propagated final state `e^{−tΛ}u(t)`.
    pub state: Field,
    pub status: AsymptoticStatus,
    /// Relative change between consecutive back-propagated states.
    pub cauchy_differences: Vec<f64>,
    /// Distance to `c⁻¹·check(conj S(c u₀))`, when a `k`-grid is given.
    pub identification_error: Option<f64>,
    /// `‖u±‖ / ‖u₀‖`.
    pub norm_ratio: f64,
}

/// Back-propagates each saved state with the linear flow and reports
/// whether the result has settled.
///
/// The status is `Stabilized` when the last Cauchy difference is at most
/// `tol`. When `kgrid` is given the limit is also compared with the
/// transform-side prediction.
pub fn asymptotic_state(
    traj: &Trajectory,
    sign: AsymptoticSign,
    tol: f64,
    kgrid: Option<&KGrid>,
    params: &JostParams,
) -> Result<AsymptoticReport> {
    let last = *traj.times.last().expect("non-empty trajectory");
    let forward = last > traj.times[0];
    match (sign, forward) {
        (AsymptoticSign::Plus, false) | (AsymptoticSign::Minus, true) => {
            return Err(Error::Usage(format!(
                "trajectory runs {} in time but the {sign:?} limit was requested",
                if forward { "forward" } else { "backward" }
            )))
        }
        _ => {}
    }
    let back: Vec<Field> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| linear_flow(&traj.model, u, -t))
        .collect::<Result<_>>()?;
    let cauchy_differences: Vec<f64> = back.windows(2).map(|w| w[1].rel_distance(&w[0])).collect();
    let status = match cauchy_differences.last() {
        Some(&d) if d <= tol => AsymptoticStatus::Stabilized,
        _ => AsymptoticStatus::Inconclusive,
    };
    let state = back.last().cloned().expect("non-empty");
    let u0 = &traj.states[0];
    let identification_error = match kgrid {
        Some(kg) => {
            let c = coupling(&traj.model)?;
            let s = coupled_transform(&traj.model, u0, kg, params)?;
            let conj: Vec<Complex64> = s.values.iter().map(|v| v.conj()).collect();
            let target = nv_check(&conj, kg, &traj.grid)?.scale_re(1.0 / c);
            Some(state.rel_distance(&target))
        }
        None => None,
    };
    Ok(AsymptoticReport {
        norm_ratio: state.l2_norm() / u0.l2_norm(),
        state,
        status,
        cauchy_differences,
        identification_error,
    })
}
