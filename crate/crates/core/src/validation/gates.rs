use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracles::{
    cauchy_quadrature, cell_average, direct_check, direct_dft, direct_hat, v_p_exhaustive,
};
use super::{Checks, Scale, Suite};
use crate::cauchy::{cauchy_transform, CauchyMode};
use crate::corpus::{corpus_member, gaussian_ensemble, Datum, DatumRole, GaussianTerm};
use crate::diagnostics::{
    gn_ratio, gn_ratio_spacetime, hat_field, pde_residual, pointwise_sup_ratio, strichartz_fields,
    v_p_discrete,
};
use crate::error::{Error, Result};
use crate::evolution::{
    diagonalization_check, evolve_direct, evolve_ist, linear_flow, EvolveParams, Model,
    Orientation, Scheme, Trajectory, TrajectoryMeta,
};
use crate::fft;
use crate::grid::{Field, GridSpec};
use crate::kgrid::KGrid;
use crate::miura::{
    classify, constraint_violation, dense_min_eig, miura_forward, nv_via_miura as nv_miura,
    roundtrip_error, schrodinger_min_eig, EigenParams, MiuraPotential, NewtonParams,
    NvMiuraOptions,
};
use crate::scattering::{inverse_scattering, scattering_transform, JostParams, ScatteringData};
use crate::transform::{dual_kgrid, nv_check, nv_hat_grid};

fn member_field(name: &str, grid: GridSpec) -> Result<Field> {
    corpus_member(name)
        .ok_or_else(|| Error::Usage(format!("no corpus member {name}")))?
        .datum
        .sample(grid)
}

fn gaussian(amplitude: f64, grid: GridSpec) -> Result<Field> {
    Datum::Gaussian(GaussianTerm::new(amplitude)).sample(grid)
}

fn uniform(t0: f64, dt: f64, m: usize) -> Vec<f64> {
    (0..m).map(|j| t0 + j as f64 * dt).collect()
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(0.0, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn involution_error(scale: &Scale, params: &JostParams) -> Result<f64> {
    let g = scale.grid()?;
    let u = member_field("unit-gaussian", g)?;
    let s = scattering_transform(&u, &scale.kgrid()?, params)?;
    s.ensure_complete()?;
    Ok(inverse_scattering(&s, &g, params)?.rel_distance(&u))
}

pub(super) fn involution(suite: &Suite, c: &mut Checks) -> Result<()> {
    let fine = involution_error(&suite.scale, &suite.params)?;
    let coarse = involution_error(&suite.scale.coarse(), &suite.params)?;
    c.at_most("error", fine, 2e-2);
    c.record("coarse_error", coarse);
    c.require(
        fine < coarse,
        format!("error {fine:.3e} did not decrease from {coarse:.3e}"),
    );
    Ok(())
}

pub(super) fn plancherel(suite: &Suite, c: &mut Checks) -> Result<()> {
    for t in suite.transforms()? {
        c.within(
            format!("ratio[{}]", t.member.name),
            t.data.l2_norm() / t.u.l2_norm(),
            0.98,
            1.02,
        );
    }
    Ok(())
}

pub(super) fn linearization(suite: &Suite, c: &mut Checks) -> Result<()> {
    let g = suite.scale.grid()?;
    let kg = KGrid::new(8, 2.0)?;
    let u = member_field("unit-gaussian", g)?;
    let hat = nv_hat_grid(&u, &kg)?;
    let params = JostParams::with_tol(1e-12);
    let eps = [1e-1, 3e-2, 1e-2];
    let errs = eps
        .iter()
        .map(|&e| {
            let s = scattering_transform(&u.scale_re(e), &kg, &params)?;
            s.ensure_complete()?;
            let diff = s
                .values
                .iter()
                .zip(&hat)
                .map(|(a, h)| a - h.conj() * e)
                .collect();
            Ok(ScatteringData::from_values(kg, diff)?.l2_norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    for (e, err) in eps.iter().zip(&errs) {
        c.record(format!("error[eps={e}]"), *err);
    }
    c.at_least("slope", loglog_slope(&eps, &errs), 1.9);
    Ok(())
}

pub(super) fn diagonalization(suite: &Suite, c: &mut Checks) -> Result<()> {
    let g = suite.scale.grid()?;
    let kg = suite.scale.kgrid()?;
    for (amp, bound, key) in [(0.5, 5e-2, "deviation"), (1e-3, 1e-3, "deviation_linear")] {
        let traj = evolve_direct(
            &Model::MNV,
            &gaussian(amp, g)?,
            0.05,
            &EvolveParams::default(),
        )?;
        let rep = diagonalization_check(&traj, &kg, Orientation::AsWritten, &suite.params)?;
        c.at_most(key, rep.max_deviation(), bound);
    }
    Ok(())
}

fn two_path_distance(scale: &Scale, params: &JostParams) -> Result<f64> {
    let u0 = gaussian(0.5, scale.grid()?)?;
    let direct = evolve_direct(&Model::MNV, &u0, 0.05, &EvolveParams::default())?;
    let ist = evolve_ist(&Model::MNV, &u0, &[0.05], &scale.kgrid()?, params)?;
    Ok(ist.final_state().rel_distance(direct.final_state()))
}

pub(super) fn two_path(suite: &Suite, c: &mut Checks) -> Result<()> {
    let fine = two_path_distance(&suite.scale, &suite.params)?;
    let coarse = two_path_distance(&suite.scale.coarse(), &suite.params)?;
    c.at_most("distance", fine, 5e-2);
    c.record("coarse_distance", coarse);
    c.require(
        fine < coarse,
        format!("distance {fine:.3e} did not decrease from {coarse:.3e}"),
    );
    Ok(())
}

fn final_state(model: &Model, u0: &Field, t: f64, steps: usize, scheme: Scheme) -> Result<Field> {
    let p = EvolveParams::default()
        .with_dt(t / steps as f64)
        .with_scheme(scheme);
    Ok(evolve_direct(model, u0, t, &p)?.final_state().clone())
}

pub(super) fn integrator_order(_suite: &Suite, c: &mut Checks) -> Result<()> {
    let g = GridSpec::new(64, 8.0)?;
    let data = [
        (Model::MNV, gaussian(0.5, g)?),
        (Model::NV, gaussian(1.0, g)?),
    ];
    for scheme in [Scheme::Ifrk4, Scheme::Etdrk4] {
        for (model, u0) in &data {
            let runs = [4, 8, 16]
                .iter()
                .map(|&s| final_state(model, u0, 0.05, s, scheme))
                .collect::<Result<Vec<_>>>()?;
            let order = (runs[0].sub(&runs[1]).l2_norm() / runs[1].sub(&runs[2]).l2_norm()).log2();
            c.at_least(format!("order[{},{scheme:?}]", model.kind), order, 3.5);
        }
    }
    Ok(())
}

pub(super) fn conservation(suite: &Suite, c: &mut Checks) -> Result<()> {
    let params = EvolveParams {
        dt: Some(0.0025),
        save_times: uniform(0.0, 0.01, 11),
        ..Default::default()
    };
    for (m, u0) in suite.corpus_fields()? {
        if m.datum.role() != DatumRole::Constrained {
            continue;
        }
        let traj = evolve_direct(&Model::MNV, &u0, 0.1, &params)?;
        let m0 = u0.l2_norm();
        let drift = traj
            .states
            .iter()
            .map(|u| (u.l2_norm() / m0 - 1.0).abs())
            .fold(0.0, f64::max);
        let constraint = traj
            .states
            .iter()
            .map(constraint_violation)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        c.at_most(format!("l2_drift[{}]", m.name), drift, 1e-6);
        c.at_most(format!("constraint[{}]", m.name), constraint, 1e-6);
    }
    Ok(())
}

pub(super) fn miura_identity(suite: &Suite, c: &mut Checks) -> Result<()> {
    let newton = NewtonParams::default();
    for (m, u) in suite.corpus_fields()? {
        let mass = u.l2_norm().powi(2);
        let q = miura_forward(&u)?;
        c.at_most(
            format!("integral[{}]", m.name),
            (q.integral - mass).abs() / mass,
            1e-12,
        );
        if m.datum.role() == DatumRole::Constrained {
            c.at_most(
                format!("roundtrip[{}]", m.name),
                roundtrip_error(&u, &newton)?,
                1e-8,
            );
        }
    }
    Ok(())
}

pub(super) fn classifier(suite: &Suite, c: &mut Checks) -> Result<()> {
    let (eig, newton) = (EigenParams::default(), NewtonParams::default());
    for (m, u) in suite.corpus_fields()? {
        if m.datum.role() != DatumRole::Constrained {
            continue;
        }
        let q = miura_forward(&u)?;
        let r = classify(&q, &eig, &newton, 1e-6)?;
        c.at_least(
            format!("lambda_min[{}]", m.name),
            r.lambda_min,
            -1e-6 * (1.0 + q.max_abs()),
        );
        c.require(
            r.consistent,
            format!("{}: Newton and eigenvalue verdicts disagree", m.name),
        );
    }
    let coarse = GridSpec::new(32, suite.scale.half_width)?;
    let well = MiuraPotential::new(member_field("deep-well", coarse)?)?;
    let r = classify(&well, &eig, &newton, 1e-6)?;
    let dense = dense_min_eig(&well)?;
    c.record("lambda_min[deep-well]", r.lambda_min);
    c.record("dense_lambda_min[deep-well]", dense);
    c.at_most(
        "relative_gap[deep-well]",
        ((r.lambda_min - dense) / dense).abs(),
        5e-4,
    );
    c.require(!r.nonnegative, "deep well classified nonnegative");
    c.require(
        r.consistent,
        "deep-well: Newton and eigenvalue verdicts disagree",
    );
    Ok(())
}

fn center_residual(traj: &Trajectory, model: &Model) -> Result<f64> {
    let reps = pde_residual(traj, model)?;
    Ok(reps[reps.len() / 2].value)
}

pub(super) fn nv_via_miura(suite: &Suite, c: &mut Checks) -> Result<()> {
    let g = suite.scale.grid()?;
    let q0 = miura_forward(&member_field("constrained-a", g)?)?;
    let d = 0.002;
    let window = EvolveParams {
        dt: Some(0.00025),
        save_times: uniform(0.02 - 4.0 * d, d, 9),
        dealias: false,
        ..Default::default()
    };
    let direct = evolve_direct(&Model::NV, q0.field(), 0.02 + 4.0 * d, &window)?;
    let opts = NvMiuraOptions {
        evolve: window.clone(),
        ..Default::default()
    };
    let via = nv_miura(&q0, &window.save_times, &opts)?;
    let (a, b) = (
        center_residual(&via.trajectory, &Model::NV)?,
        center_residual(&direct, &Model::NV)?,
    );
    c.record("residual_via_miura", a);
    c.record("residual_direct", b);
    c.within("residual_ratio", a / b, 1.0 / 3.0, 3.0);

    let mut opts = NvMiuraOptions::default();
    opts.evolve.dt = Some(0.0025);
    let out = nv_miura(&q0, &uniform(0.0, 0.025, 5), &opts)?;
    let drift = out
        .integrals
        .iter()
        .map(|i| (i - q0.integral).abs() / q0.integral.abs())
        .fold(0.0, f64::max);
    c.at_most("integral_drift", drift, 1e-6);
    let mut worst = f64::INFINITY;
    for q in &out.trajectory.states {
        let p = MiuraPotential::new(q.clone())?;
        let lam = schrodinger_min_eig(&p, &EigenParams::default())?.lambda_min;
        worst = worst.min(lam / (1.0 + p.max_abs()));
    }
    c.at_least("scaled_lambda_min", worst, -1e-5);
    Ok(())
}

/// Grid for ensemble member rescaled by `λ`: fixed node count, box `12/λ`.
fn ensemble_grid(lambda: f64) -> Result<(GridSpec, KGrid)> {
    Ok((
        GridSpec::new(64, 12.0 / lambda)?,
        KGrid::new(ENSEMBLE_NK, 3.0 * lambda)?,
    ))
}

const ENSEMBLE_NK: usize = 16;

pub(super) fn gn_ratios(suite: &Suite, c: &mut Checks) -> Result<()> {
    let lambdas = [0.5, 1.0, 2.0];
    let mut fixed = Vec::new();
    let mut spacetime = Vec::new();
    for m in gaussian_ensemble(20, 0.5, suite.seed) {
        let mut f = Vec::new();
        let mut st = Vec::new();
        for &lam in &lambdas {
            let (g, kg) = ensemble_grid(lam)?;
            let u = m.datum.rescaled(lam)?.sample(g)?;
            f.push(gn_ratio(&u, 0.25, 3.0, &kg, &suite.params)?.value);
            let t = 0.03 / lam.powi(3);
            let params = EvolveParams::default().with_save_times(uniform(0.0, t / 3.0, 4));
            let traj = evolve_direct(&Model::MNV, &u, t, &params)?;
            st.push(gn_ratio_spacetime(&traj, 6.0, &kg, &suite.params)?.value);
        }
        c.at_most(format!("fixed_spread[{}]", m.name), spread(&f), 2.0);
        c.at_most(format!("spacetime_spread[{}]", m.name), spread(&st), 2.0);
        fixed.extend(f);
        spacetime.extend(st);
    }
    for (name, v) in [("fixed", &fixed), ("spacetime", &spacetime)] {
        let med = median(v);
        let max = v.iter().copied().fold(0.0, f64::max);
        c.require(
            v.iter().all(|r| r.is_finite()),
            format!("{name}: non-finite ratio"),
        );
        c.record(format!("{name}_median"), med);
        c.at_most(format!("{name}_max_over_median"), max / med, 10.0);
    }
    Ok(())
}

pub(super) fn pointwise(suite: &Suite, c: &mut Checks) -> Result<()> {
    let kg = suite.scale.kgrid()?;
    for t in suite.transforms()? {
        let name = &t.member.name;
        let small = t.u.l2_norm() <= 0.25;
        let su = Field::physical(kg.as_grid()?, t.data.values.clone())?;
        let rs = pointwise_sup_ratio(&su, &hat_field(&t.u, &kg)?)?;
        let u_t = evolve_direct(&Model::MNV, &t.u, 0.05, &EvolveParams::default())?;
        let lin = linear_flow(&Model::MNV, &t.u, 0.05)?;
        let rt = pointwise_sup_ratio(u_t.final_state(), &lin)?;
        c.require(
            rs.is_finite() && rt.is_finite(),
            format!("{name}: unbounded ratio"),
        );
        if small {
            c.at_most(format!("scattering[{name}]"), rs, 1.5);
            c.at_most(format!("flow[{name}]"), rt, 2.0);
        } else {
            c.record(format!("scattering[{name}]"), rs);
            c.record(format!("flow[{name}]"), rt);
        }
    }
    Ok(())
}

fn random_field(g: GridSpec, rng: &mut ChaCha8Rng) -> Field {
    let vals = (0..g.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Field::physical(g, vals).expect("grid-sized buffer")
}

fn max_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Probe nodes of `g`: ten inside the unit disk and ten outside it.
fn disk_probes(g: &GridSpec) -> Vec<(usize, usize)> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..20)
        .map(|i| {
            let r = if i < 10 {
                0.1 + 0.08 * i as f64
            } else {
                1.2 + 0.25 * (i - 10) as f64
            };
            let z = Complex64::from_polar(r, golden * i as f64);
            let idx = |x: f64| ((x + g.half_width()) / g.spacing()).round() as usize;
            (idx(z.re), idx(z.im))
        })
        .collect()
}

pub(super) fn oracles(suite: &Suite, c: &mut Checks) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);

    let small = GridSpec::new(8, 1.0)?;
    let samples: Vec<Field> = (0..12).map(|_| random_field(small, &mut rng)).collect();
    for p in [1.0, 2.0, 3.5] {
        let dp = v_p_discrete(&samples, p)?.value;
        let brute = v_p_exhaustive(&samples, p);
        c.at_most(format!("v_p_gap[p={p}]"), (dp - brute).abs() / brute, 1e-12);
    }

    let g = GridSpec::new(256, 8.0)?;
    let disk = |x: f64, y: f64| if x * x + y * y < 1.0 { 1.0 } else { 0.0 };
    let f = cell_average(g, 8, disk);
    let out = cauchy_transform(&f, CauchyMode::FreeSpaceTruncated)?;
    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for (ix, iy) in disk_probes(&g) {
        let z = g.z(ix, iy);
        let err = (out.field.at(ix, iy) - cauchy_quadrature(disk, 1.5, z, 1e-10)).norm();
        if z.norm() < 1.0 {
            inside = inside.max(err);
        } else {
            outside = outside.max(err);
        }
    }
    c.at_most("cauchy_interior", inside, 5e-3);
    c.at_most("cauchy_exterior", outside, 5e-3);

    let g = GridSpec::new(16, 2.0)?;
    let u = random_field(g, &mut rng);
    let kg = dual_kgrid(&g);
    let hat = nv_hat_grid(&u, &kg)?;
    c.at_most("hat_gap", max_gap(&hat, &direct_hat(&u, &kg)), 1e-12);
    let back = nv_check(&hat, &kg, &g)?;
    c.at_most(
        "check_gap",
        max_gap(back.values(), direct_check(&hat, &kg, &g)?.values()),
        1e-12,
    );
    c.at_most("roundtrip", back.rel_distance(&u), 1e-12);
    let mut spec = u.values().to_vec();
    fft::plan(g.n()).forward(&mut spec);
    c.at_most(
        "fft_gap",
        max_gap(&spec, &direct_dft(u.values(), g.n())),
        1e-12,
    );
    Ok(())
}

fn linear_trajectory(u0: &Field, times: &[f64]) -> Result<Trajectory> {
    Ok(Trajectory {
        model: Model::MNV,
        grid: *u0.grid(),
        times: times.to_vec(),
        states: times
            .iter()
            .map(|&t| linear_flow(&Model::MNV, u0, t))
            .collect::<Result<_>>()?,
        meta: TrajectoryMeta {
            dt: 0.0,
            dt_max: f64::INFINITY,
            scheme: None,
            dealias: None,
            steps: 0,
            projection_max: 0.0,
        },
        blow_up: None,
    })
}

pub(super) fn strichartz_scaling(_suite: &Suite, c: &mut Checks) -> Result<()> {
    let lam = 2.0;
    let (coarse, fine) = (GridSpec::new(64, 8.0)?, GridSpec::new(128, 8.0)?);
    let profile = |z: Complex64| Complex64::new((-z.norm_sqr()).exp(), 0.0) * (1.0 + 0.5 * z);
    let u0 = Field::from_fn(coarse, profile);
    let v0 = Field::from_fn(fine, |z| lam * profile(lam * z));
    let t = 0.2;
    let a = linear_trajectory(&u0, &uniform(0.0, t / 40.0, 41))?;
    let b = linear_trajectory(&v0, &uniform(0.0, t / lam.powi(3) / 40.0, 41))?;
    let na = strichartz_fields(&a.times, &a.states, 4.0)?.mixed.value;
    let nb = strichartz_fields(&b.times, &b.states, 4.0)?.mixed.value;
    c.record("norm", na);
    c.record("norm_rescaled", nb);
    c.at_most("relative_change", (na / nb - 1.0).abs(), 0.05);
    Ok(())
}
