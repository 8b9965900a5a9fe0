//! Residual of a sampled trajectory in the evolution equation.

use super::strichartz::cadence;
use super::NormReport;
use crate::error::{Error, Result};
use crate::evolution::{Model, NonlinearOps, Trajectory};
use crate::grid::Field;
use crate::multiplier::Multiplier;

/// Fourth-order first-derivative weights at sample `j` of `m`, each over
/// `12·Δt`: centered in the interior, one-sided at the two ends.
fn stencil(j: usize, m: usize) -> (usize, [f64; 5]) {
    const CENTER: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
    let flip = |w: [f64; 5]| {
        let mut r = w;
        r.reverse();
        r.map(|v| -v)
    };
    match j {
        0 => (0, EDGE0),
        1 => (0, EDGE1),
        _ if j + 2 < m => (j - 2, CENTER),
        _ if j + 2 == m => (m - 5, flip(EDGE1)),
        _ => (m - 5, flip(EDGE0)),
    }
}

/// `‖u_t − Λu − 𝒩(u)‖` in the homogeneous `Ḣ^{−1}` norm at every save time,
/// with `u_t` from fourth-order differences on the save grid.
///
/// The right-hand side is dealiased exactly when the trajectory was
/// integrated with dealiasing, so the residual measures the time
/// discretization of the system that was actually solved.
///
/// Needs at least five uniformly spaced samples.
pub fn pde_residual(traj: &Trajectory, model: &Model) -> Result<Vec<NormReport>> {
    let m = traj.len();
    if m < 5 {
        return Err(Error::Usage(format!(
            "pde_residual needs at least 5 save times for fourth-order differences, got {m}"
        )));
    }
    let dt = cadence(&traj.times)?;
    let dt_signed = traj.times[1] - traj.times[0];
    let grid = traj.grid;
    let mut ops = NonlinearOps::new(*model, grid, traj.meta.dealias.is_some());
    let inv = Multiplier::frac_derivative(grid, -1.0);
    (0..m)
        .map(|j| {
            let (start, w) = stencil(j, m);
            let ut = w
                .iter()
                .zip(&traj.states[start..start + 5])
                .fold(
                    Field::zeros(grid, crate::grid::SpaceTag::Physical),
                    |acc, (c, u)| acc.add(&u.scale_re(*c)),
                )
                .scale_re(1.0 / (12.0 * dt_signed));
            let r = ut.sub(&ops.rhs(&traj.states[j])?);
            let value = inv.apply(&r)?.l2_norm();
            NormReport::new(format!("pde_residual@t={:.6}", traj.times[j]), value, &grid)
                .with_s(-1.0)
                .with_p(2.0)
                .with_cadence(dt)
                .check()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_differentiate_quartics_exactly() {
        let m = 7;
        for j in 0..m {
            let (s, w) = stencil(j, m);
            for deg in 0..=4 {
                let d: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * ((s + i) as f64).powi(deg))
                    .sum::<f64>()
                    / 12.0;
                let exact = if deg == 0 {
                    0.0
                } else {
                    deg as f64 * (j as f64).powi(deg - 1)
                };
                assert!((d - exact).abs() < 1e-9, "j {j} deg {deg}: {d} vs {exact}");
            }
        }
    }
}
