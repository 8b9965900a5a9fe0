//! Empirical nonlinear Gagliardo–Nirenberg ratios and pointwise bounds for
//! the scattering transform.
//!
//! Exponents: `2 < r < 4`, `1/r₁ = 2/r − 1/2`, `0 < s < 1/2`. In the
//! space-time form `(p, r)` and `(p₁, r₁)` are Strichartz pairs with
//! `1/p + 1/r = 1/2`, so `p > 4`.

use super::lp::Shells;
use super::maximal::maximal_function;
use super::strichartz::{cadence, dual_r, strichartz_fields};
use super::{besov_norm, NormReport};
use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::grid::Field;
use crate::kgrid::KGrid;
use crate::scattering::{scattering_transform, JostParams};
use crate::transform::nv_hat_grid;

/// `r₁` with `1/2 + 1/r₁ = 2/r`.
pub fn r1_of(r: f64) -> f64 {
    1.0 / (2.0 / r - 0.5)
}

/// `p` with `1/p + 1/r = 1/2`.
pub fn strichartz_partner(r: f64) -> f64 {
    1.0 / (0.5 - 1.0 / r)
}

fn check_fixed(s: f64, r: f64) -> Result<()> {
    if !(r > 2.0 && r < 4.0) {
        return Err(Error::Usage(format!("GN ratio needs 2 < r < 4, got {r}")));
    }
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::Usage(format!("GN ratio needs 0 < s < 1/2, got {s}")));
    }
    Ok(())
}

/// `û` sampled on the `k`-grid, as a physical field in the `k` variable.
pub fn hat_field(u: &Field, kgrid: &KGrid) -> Result<Field> {
    Field::physical(kgrid.as_grid()?, nv_hat_grid(u, kgrid)?)
}

/// `Su` on the `k`-grid, as a physical field in the `k` variable.
pub fn scattering_field(u: &Field, kgrid: &KGrid, params: &JostParams) -> Result<Field> {
    let s = scattering_transform(u, kgrid, params)?;
    s.ensure_complete()?;
    Field::physical(kgrid.as_grid()?, s.values)
}

fn fixed_ratio(lhs_field: &Field, uh: &Field, s: f64, r: f64, name: &str) -> Result<NormReport> {
    let lhs = besov_norm(lhs_field, s, r, 2.0)?.value;
    let rhs = (uh.l2_norm() * besov_norm(uh, 2.0 * s, r1_of(r), 2.0)?.value).sqrt();
    if rhs == 0.0 {
        return Err(Error::Degenerate(format!(
            "{name}: right-hand side vanishes"
        )));
    }
    NormReport::new(name, lhs / rhs, uh.grid())
        .with_s(s)
        .with_r(r)
        .with_q(2.0)
        .check()
}

/// `‖Su‖_{Ḃ^{s,r}_2} / (‖û‖₂^{1/2} ‖û‖_{Ḃ^{2s,r₁}_2}^{1/2})` on the `k`-grid.
pub fn gn_ratio(
    u: &Field,
    s: f64,
    r: f64,
    kgrid: &KGrid,
    params: &JostParams,
) -> Result<NormReport> {
    check_fixed(s, r)?;
    if u.max_abs() == 0.0 {
        return Err(Error::Degenerate("gn_ratio of the zero field".into()));
    }
    let uh = hat_field(u, kgrid)?;
    fixed_ratio(&scattering_field(u, kgrid, params)?, &uh, s, r, "gn_ratio")
}

/// [`gn_ratio`] with `Su` replaced by its linearization `conj(û)`.
pub fn gn_ratio_linear(u: &Field, s: f64, r: f64, kgrid: &KGrid) -> Result<NormReport> {
    check_fixed(s, r)?;
    if u.max_abs() == 0.0 {
        return Err(Error::Degenerate("gn_ratio of the zero field".into()));
    }
    let uh = hat_field(u, kgrid)?;
    fixed_ratio(&uh.conj(), &uh, s, r, "gn_ratio_linear")
}

fn l2_sup_l2(fields: &[Field]) -> Result<f64> {
    let shells = Shells::new(*fields[0].grid());
    let mut sup = vec![0.0f64; shells.tables.len()];
    for f in fields {
        for (m, b) in sup.iter_mut().zip(shells.project(f)?) {
            *m = m.max(b.l2_norm());
        }
    }
    Ok(sup.iter().map(|v| v * v).sum::<f64>().sqrt())
}

fn spacetime_ratio(
    times: &[f64],
    lhs: &[Field],
    uh: &[Field],
    p: f64,
    name: &str,
) -> Result<NormReport> {
    let r = dual_r(p)?;
    if !(r > 2.0 && r < 4.0) {
        return Err(Error::Usage(format!(
            "space-time GN ratio needs p > 4, got {p}"
        )));
    }
    let dt = cadence(times)?;
    let p1 = strichartz_partner(r1_of(r));
    let left = strichartz_fields(times, lhs, p)?.l2.value;
    let right = (l2_sup_l2(uh)? * strichartz_fields(times, uh, p1)?.l2.value).sqrt();
    if right == 0.0 {
        return Err(Error::Degenerate(format!(
            "{name}: right-hand side vanishes"
        )));
    }
    NormReport::new(name, left / right, uh[0].grid())
        .with_p(p)
        .with_r(r)
        .with_q(2.0)
        .with_cadence(dt)
        .check()
}

fn check_nonzero(traj: &Trajectory) -> Result<()> {
    if traj.states.iter().all(|u| u.max_abs() == 0.0) {
        return Err(Error::Degenerate(
            "space-time GN ratio of the zero trajectory".into(),
        ));
    }
    Ok(())
}

/// `‖Su‖_{ℓ²S^p} / (‖û‖_{ℓ²L^∞L²}^{1/2} ‖û‖_{ℓ²S^{p₁}}^{1/2})` over the saved
/// states, with `S` and `^` applied at each time.
pub fn gn_ratio_spacetime(
    traj: &Trajectory,
    p: f64,
    kgrid: &KGrid,
    params: &JostParams,
) -> Result<NormReport> {
    dual_r(p)?;
    check_nonzero(traj)?;
    let uh: Vec<Field> = traj
        .states
        .iter()
        .map(|u| hat_field(u, kgrid))
        .collect::<Result<_>>()?;
    let su: Vec<Field> = traj
        .states
        .iter()
        .map(|u| scattering_field(u, kgrid, params))
        .collect::<Result<_>>()?;
    spacetime_ratio(&traj.times, &su, &uh, p, "gn_ratio_spacetime")
}

/// [`gn_ratio_spacetime`] with `Su(t)` replaced by `conj(û(t))`.
pub fn gn_ratio_spacetime_linear(traj: &Trajectory, p: f64, kgrid: &KGrid) -> Result<NormReport> {
    dual_r(p)?;
    check_nonzero(traj)?;
    let uh: Vec<Field> = traj
        .states
        .iter()
        .map(|u| hat_field(u, kgrid))
        .collect::<Result<_>>()?;
    let lhs: Vec<Field> = uh.iter().map(Field::conj).collect();
    spacetime_ratio(&traj.times, &lhs, &uh, p, "gn_ratio_spacetime_linear")
}

/// `max |a| / Mb` over the nodes where `a ≠ 0`; infinite if `Mb` vanishes
/// there.
pub fn pointwise_sup_ratio(a: &Field, b: &Field) -> Result<f64> {
    a.expect_grid(b.grid())?;
    let mb = maximal_function(b)?;
    Ok(a.values()
        .iter()
        .zip(mb.values())
        .filter(|(x, _)| x.norm() > 0.0)
        .map(|(x, m)| {
            if m.re > 0.0 {
                x.norm() / m.re
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, SpaceTag};

    #[test]
    fn exponent_relations() {
        let r = 3.0;
        let r1 = r1_of(r);
        assert!((0.5 + 1.0 / r1 - 2.0 / r).abs() < 1e-15);
        assert!(r1 > 2.0);
        assert!((1.0 / strichartz_partner(r) + 1.0 / r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inadmissible_and_degenerate_inputs() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let kg = KGrid::new(8, 1.0).unwrap();
        let z = Field::zeros(g, SpaceTag::Physical);
        assert!(matches!(
            gn_ratio_linear(&z, 0.25, 4.5, &kg),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            gn_ratio_linear(&z, 0.6, 3.0, &kg),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            gn_ratio_linear(&z, 0.25, 3.0, &kg),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            gn_ratio(&z, 0.25, 3.0, &kg, &JostParams::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn pointwise_ratio_of_self_is_at_most_one() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let f = Field::from_fn(g, |z| (-z.norm_sqr()).exp() * z);
        let r = pointwise_sup_ratio(&f, &f).unwrap();
        assert!(r <= 1.0 + 1e-15 && r > 0.99);
    }
}
