//! Mixed space-time Strichartz norms `‖|D|^{1/p}u‖_{L^p_t L^r_x}`.

use num_complex::Complex64;

use super::lp::Shells;
use super::NormReport;
use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::fft;
use crate::grid::{Field, SpaceTag};
use crate::multiplier::Multiplier;

#[derive(Debug, Clone, PartialEq)]
pub struct StrichartzReport {
    /// `‖u‖_{S^p}`.
    pub mixed: NormReport,
    /// `(Σ_k ‖P_k u‖²_{S^p})^{1/2}`.
    pub l2: NormReport,
}

/// `r` with `1/p + 1/r = 1/2`.
pub(crate) fn dual_r(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 2.0 || p.is_infinite() {
        return Err(Error::Usage(format!(
            "Strichartz exponent must satisfy 2 < p < ∞, got {p}"
        )));
    }
    Ok(1.0 / (0.5 - 1.0 / p))
}

/// Uniform save spacing, or a usage error.
pub(crate) fn cadence(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Usage(
            "mixed norms need at least two save times".into(),
        ));
    }
    let dt = times[1] - times[0];
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300));
    if dt == 0.0 || !uniform {
        return Err(Error::Usage("save times must be uniformly spaced".into()));
    }
    Ok(dt.abs())
}

/// `(∫ a(t)^p dt)^{1/p}` by the trapezoid rule.
pub(crate) fn trapezoid_lp(a: &[f64], dt: f64, p: f64) -> f64 {
    let n = a.len();
    let s: f64 = a
        .iter()
        .enumerate()
        .map(|(j, v)| if j == 0 || j == n - 1 { 0.5 } else { 1.0 } * v.powf(p))
        .sum();
    (dt * s).powf(1.0 / p)
}

/// Per-time `L^r` norms of `|D|^{1/p}f(t)` overall and per shell.
pub(crate) fn spatial_profile(
    fields: &[Field],
    p: f64,
    r: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let grid = *fields[0].grid();
    let frac = Multiplier::frac_derivative(grid, 1.0 / p);
    let shells = Shells::new(grid);
    let plan = fft::plan(grid.n());
    let mut whole = Vec::with_capacity(fields.len());
    let mut per_shell = vec![Vec::with_capacity(fields.len()); shells.tables.len()];
    for f in fields {
        f.expect_tag(SpaceTag::Physical)?;
        f.expect_grid(&grid)?;
        let mut spec: Vec<Complex64> = f.values().to_vec();
        plan.forward(&mut spec);
        frac.apply_spectral(&mut spec);
        for (acc, b) in per_shell.iter_mut().zip(shells.project_spectrum(&spec)) {
            acc.push(b.lp_norm(r));
        }
        plan.inverse(&mut spec);
        whole.push(Field::new(grid, spec, SpaceTag::Physical)?.lp_norm(r));
    }
    Ok((whole, per_shell))
}

/// Strichartz norms of sampled fields at uniformly spaced `times`.
pub fn strichartz_fields(times: &[f64], fields: &[Field], p: f64) -> Result<StrichartzReport> {
    let r = dual_r(p)?;
    let dt = cadence(times)?;
    if fields.len() != times.len() {
        return Err(Error::Usage("one field per save time required".into()));
    }
    let grid = *fields[0].grid();
    let (whole, per_shell) = spatial_profile(fields, p, r)?;
    let mixed = trapezoid_lp(&whole, dt, p);
    let l2 = per_shell
        .iter()
        .map(|a| trapezoid_lp(a, dt, p).powi(2))
        .sum::<f64>()
        .sqrt();
    let report = |name: &str, v: f64| {
        NormReport::new(name, v, &grid)
            .with_p(p)
            .with_r(r)
            .with_cadence(dt)
            .check()
    };
    Ok(StrichartzReport {
        mixed: report("strichartz", mixed)?,
        l2: report("strichartz_l2", l2)?.with_q(2.0),
    })
}

pub fn strichartz_norm(traj: &Trajectory, p: f64) -> Result<StrichartzReport> {
    strichartz_fields(&traj.times, &traj.states, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn exponent_window() {
        assert!(dual_r(2.0).is_err());
        assert!(dual_r(f64::INFINITY).is_err());
        assert!((dual_r(4.0).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn zero_trajectory_has_zero_norm() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let z = Field::zeros(g, SpaceTag::Physical);
        let rep = strichartz_fields(&[0.0, 0.1, 0.2], &[z.clone(), z.clone(), z], 4.0).unwrap();
        assert_eq!(rep.mixed.value, 0.0);
        assert_eq!(rep.l2.value, 0.0);
    }

    #[test]
    fn nonuniform_cadence_rejected() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let z = Field::zeros(g, SpaceTag::Physical);
        assert!(strichartz_fields(&[0.0, 0.1, 0.3], &[z.clone(), z.clone(), z], 4.0).is_err());
    }
}
