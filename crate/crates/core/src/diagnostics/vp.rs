//! Discrete `V^p` variation norms.

use super::NormReport;
use crate::error::{Error, Result};
use crate::evolution::{linear_flow, Trajectory};
use crate::grid::Field;

/// `sup (Σ dist(i_j, i_{j+1})^p)^{1/p}` over increasing index chains in
/// `0..n`, by dynamic programming on the best chain ending at each index.
pub fn v_p_dp(n: usize, p: f64, dist: impl Fn(usize, usize) -> f64) -> f64 {
    let mut best = vec![0.0f64; n];
    for j in 1..n {
        best[j] = (0..j)
            .map(|i| best[i] + dist(i, j).powf(p))
            .fold(0.0, f64::max);
    }
    best.into_iter().fold(0.0, f64::max).powf(1.0 / p)
}

/// `V^p` norm of the sequence in the `L²` distance.
pub fn v_p_discrete(samples: &[Field], p: f64) -> Result<NormReport> {
    if samples.len() < 2 {
        return Err(Error::Usage("V^p needs at least two samples".into()));
    }
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::Usage(format!(
            "V^p exponent must satisfy 1 <= p < ∞, got {p}"
        )));
    }
    let grid = *samples[0].grid();
    for s in samples {
        s.expect_grid(&grid)?;
    }
    let value = v_p_dp(samples.len(), p, |i, j| {
        samples[j].sub(&samples[i]).l2_norm()
    });
    NormReport::new("v_p", value, &grid).with_p(p).check()
}

/// `V^p` norm of the interaction profile `v(t) = e^{−tΛ}u(t)`.
pub fn v_p_trajectory(traj: &Trajectory, p: f64) -> Result<NormReport> {
    let v: Vec<Field> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| linear_flow(&traj.model, u, -t))
        .collect::<Result<_>>()?;
    let mut rep = v_p_discrete(&v, p)?;
    if traj.len() > 1 {
        rep.cadence = Some((traj.times[1] - traj.times[0]).abs());
    }
    Ok(rep)
}
