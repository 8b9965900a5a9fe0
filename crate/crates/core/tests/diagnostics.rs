use nvlab::diagnostics::{
    besov_norm, gn_ratio, gn_ratio_linear, gn_ratio_spacetime, gn_ratio_spacetime_linear,
    lp_decompose, maximal_function, pde_residual, strichartz_fields, v_p_discrete, v_p_dp,
};
use nvlab::evolution::{
    evolve_direct, linear_flow, EvolveParams, Model, Trajectory, TrajectoryMeta,
};
use nvlab::miura::{from_log_potential, miura_forward, nv_via_miura, NvMiuraOptions};
use nvlab::scattering::JostParams;
use nvlab::{Complex64, Field, GridSpec, KGrid, SpaceTag};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(g: GridSpec, rng: &mut ChaCha8Rng) -> Field {
    let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let w = rng.random_range(0.3..2.0);
    Field::from_fn(g, |z| {
        a * (-((z.re - c[0]).powi(2) + (z.im - c[1]).powi(2)) * w).exp() * (1.0 + z)
    })
}

fn zero_mean(f: Field) -> Field {
    let m = f.mean();
    f.map(|v| v - m)
}

fn plane_wave(g: GridSpec, jx: i64, jy: i64) -> Field {
    let (a, b) = (
        g.freq(0) * 0.0 + jx as f64 * g.freq(1),
        jy as f64 * g.freq(1),
    );
    Field::from_fn(g, |z| Complex64::from_polar(1.0, a * z.re + b * z.im))
}

/// Independent evaluation of the shell symbol from the smoothstep formula.
fn shell_weight(r: f64, k: i32) -> f64 {
    let phi = |x: f64| {
        if x <= 1.0 {
            1.0
        } else if x >= 2.0 {
            0.0
        } else {
            let t = x.log2();
            1.0 - (10.0 * t.powi(3) - 15.0 * t.powi(4) + 6.0 * t.powi(5))
        }
    };
    let x = r / 2f64.powi(k);
    phi(x) - phi(2.0 * x)
}

#[test]
fn lp_blocks_reconstruct_the_field() {
    let g = GridSpec::new(64, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_field(g, &mut rng);
    let lp = lp_decompose(&f).unwrap();
    assert!(lp.reconstruct().sub(&f).l2_norm() <= 1e-12 * f.l2_norm());
    // Only adjacent shells overlap.
    for (i, a) in lp.blocks.iter().enumerate() {
        for b in lp.blocks.iter().skip(i + 2) {
            let ip: Complex64 = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| x * y.conj())
                .sum();
            assert!(ip.norm() * g.cell_area() <= 1e-12 * f.l2_norm().powi(2));
        }
    }
}

#[test]
fn besov_zero_two_two_is_equivalent_to_l2() {
    let g = GridSpec::new(32, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let f = zero_mean(random_field(g, &mut rng));
        let b = besov_norm(&f, 0.0, 2.0, 2.0).unwrap().value;
        let l2 = f.l2_norm();
        assert!(
            b >= l2 / 2f64.sqrt() - 1e-12 && b <= l2 + 1e-12,
            "{b} vs {l2}"
        );
    }
}

#[test]
fn single_shell_field_matches_direct_computation() {
    // L = π gives integer frequencies.
    let g = GridSpec::new(32, std::f64::consts::PI).unwrap();
    let s = 0.7;
    // |ξ| = 8 sits exactly on shell 3 only.
    let f = plane_wave(g, 8, 0);
    let b = besov_norm(&f, s, 2.0, 2.0).unwrap().value;
    assert!((b - 2f64.powf(3.0 * s) * f.l2_norm()).abs() <= 1e-12 * b);
    // |ξ| = 5 splits between shells 2 and 3.
    let f = plane_wave(g, 3, 4);
    let expect = (2..=3)
        .map(|k: i32| (2f64.powf(k as f64 * s) * shell_weight(5.0, k) * f.l2_norm()).powi(2))
        .sum::<f64>()
        .sqrt();
    let b = besov_norm(&f, s, 2.0, 2.0).unwrap().value;
    assert!((b - expect).abs() <= 1e-12 * expect, "{b} vs {expect}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn besov_triangle_and_homogeneity(seed in 0u64..100_000, c in -3.0f64..3.0, s in -0.5f64..1.0) {
        let g = GridSpec::new(16, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(g, &mut rng);
        let h = random_field(g, &mut rng);
        let nf = besov_norm(&f, s, 3.0, 2.0).unwrap().value;
        let nh = besov_norm(&h, s, 3.0, 2.0).unwrap().value;
        let nsum = besov_norm(&f.add(&h), s, 3.0, 2.0).unwrap().value;
        prop_assert!(nsum <= (nf + nh) * (1.0 + 1e-12));
        let nc = besov_norm(&f.scale_re(c), s, 3.0, 2.0).unwrap().value;
        prop_assert!((nc - c.abs() * nf).abs() <= 1e-12 * nf.max(1e-300));
    }

    #[test]
    fn maximal_function_is_sublinear(seed in 0u64..100_000) {
        let g = GridSpec::new(16, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(g, &mut rng);
        let h = random_field(g, &mut rng);
        let m = maximal_function(&f.add(&h)).unwrap();
        let mf = maximal_function(&f).unwrap();
        let mh = maximal_function(&h).unwrap();
        for ((a, b), c) in m.values().iter().zip(mf.values()).zip(mh.values()) {
            prop_assert!(a.re <= (b.re + c.re) * (1.0 + 1e-12) + 1e-14);
        }
    }
}

#[test]
fn maximal_function_of_point_mass_matches_brute_force() {
    let n = 16;
    let g = GridSpec::new(n, 2.0).unwrap();
    let (px, py) = (5usize, 11usize);
    let f = Field::from_fn(g, |_| Complex64::new(0.0, 0.0));
    let mut v = f.into_values();
    v[py * n + px] = Complex64::new(3.0, 0.0);
    let f = Field::physical(g, v).unwrap();
    let m = maximal_function(&f).unwrap();
    for y in 0..n {
        for x in 0..n {
            let mut best = 0.0f64;
            let mut s = 1;
            while s <= n {
                for j0 in 0..=n - s {
                    for i0 in 0..=n - s {
                        let holds = |a: usize, lo: usize| a >= lo && a < lo + s;
                        if holds(x, i0) && holds(y, j0) {
                            let mass = if holds(px, i0) && holds(py, j0) {
                                3.0
                            } else {
                                0.0
                            };
                            best = best.max(mass / (s * s) as f64);
                        }
                    }
                }
                s *= 2;
            }
            assert!((m.at(x, y).re - best).abs() < 1e-14, "({x},{y})");
        }
    }
}

#[test]
fn v_p_dynamic_program_matches_exhaustive_search() {
    let g = GridSpec::new(8, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples: Vec<Field> = (0..12).map(|_| random_field(g, &mut rng)).collect();
    for p in [1.0, 2.0, 3.5] {
        let dp = v_p_discrete(&samples, p).unwrap().value;
        let mut best = 0.0f64;
        for mask in 0u32..(1 << 12) {
            let idx: Vec<usize> = (0..12).filter(|i| mask & (1 << i) != 0).collect();
            let sum: f64 = idx
                .windows(2)
                .map(|w| samples[w[1]].sub(&samples[w[0]]).l2_norm().powf(p))
                .sum();
            best = best.max(sum);
        }
        let exhaustive = best.powf(1.0 / p);
        assert!(
            (dp - exhaustive).abs() <= 1e-12 * exhaustive,
            "p {p}: {dp} vs {exhaustive}"
        );
    }
}

proptest! {
    #[test]
    fn v_p_is_monotone_under_refinement(values in proptest::collection::vec(-5.0f64..5.0, 3..20), p in 1.0f64..4.0, drop in 0usize..20) {
        let full = v_p_dp(values.len(), p, |i, j| (values[j] - values[i]).abs());
        let mut coarse = values.clone();
        coarse.remove(drop % values.len());
        let sub = v_p_dp(coarse.len(), p, |i, j| (coarse[j] - coarse[i]).abs());
        prop_assert!(sub <= full * (1.0 + 1e-12));
    }
}

fn linear_trajectory(model: &Model, u0: &Field, times: &[f64]) -> Trajectory {
    Trajectory {
        model: *model,
        grid: *u0.grid(),
        times: times.to_vec(),
        states: times
            .iter()
            .map(|&t| linear_flow(model, u0, t).unwrap())
            .collect(),
        meta: TrajectoryMeta {
            dt: 0.0,
            dt_max: f64::INFINITY,
            scheme: None,
            dealias: None,
            steps: 0,
            projection_max: 0.0,
        },
        blow_up: None,
    }
}

fn uniform(t0: f64, dt: f64, m: usize) -> Vec<f64> {
    (0..m).map(|j| t0 + j as f64 * dt).collect()
}

#[test]
fn strichartz_of_single_mode_is_closed_form() {
    let g = GridSpec::new(32, std::f64::consts::PI).unwrap();
    let u0 = plane_wave(g, 8, 0);
    let times = uniform(0.0, 0.01, 11);
    let traj = linear_trajectory(&Model::MNV, &u0, &times);
    for p in [3.0, 4.0, 6.0] {
        let r = 1.0 / (0.5 - 1.0 / p);
        let rep = strichartz_fields(&traj.times, &traj.states, p).unwrap();
        let area = (2.0 * std::f64::consts::PI).powi(2);
        let expect = 0.1f64.powf(1.0 / p) * 8f64.powf(1.0 / p) * area.powf(1.0 / r);
        assert!(
            (rep.mixed.value - expect).abs() <= 1e-10 * expect,
            "{} vs {expect}",
            rep.mixed.value
        );
        assert!((rep.l2.value - expect).abs() <= 1e-10 * expect);
    }
}

#[test]
fn strichartz_norm_is_scale_invariant() {
    let (coarse, fine) = (
        GridSpec::new(64, 8.0).unwrap(),
        GridSpec::new(128, 8.0).unwrap(),
    );
    let gauss = |z: Complex64| Complex64::new((-z.norm_sqr()).exp(), 0.0) * (1.0 + 0.5 * z);
    let u0 = Field::from_fn(coarse, gauss);
    let v0 = Field::from_fn(fine, |z| 2.0 * gauss(2.0 * z));
    let t = 0.2;
    let a = linear_trajectory(&Model::MNV, &u0, &uniform(0.0, t / 40.0, 41));
    let b = linear_trajectory(&Model::MNV, &v0, &uniform(0.0, t / 320.0, 41));
    let na = strichartz_fields(&a.times, &a.states, 4.0)
        .unwrap()
        .mixed
        .value;
    let nb = strichartz_fields(&b.times, &b.states, 4.0)
        .unwrap()
        .mixed
        .value;
    assert!((na / nb - 1.0).abs() <= 0.05, "{na} vs {nb}");
}

fn center_residual(traj: &Trajectory, model: &Model) -> f64 {
    let reps = pde_residual(traj, model).unwrap();
    reps[reps.len() / 2].value
}

fn orders(res: &[f64]) -> Vec<f64> {
    res.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn residual_of_linear_trajectory_decays_at_fourth_order() {
    let g = GridSpec::new(64, 8.0).unwrap();
    let u0 = Field::from_fn(g, |z| Complex64::new(1e-5 * (-z.norm_sqr()).exp(), 0.0));
    let res: Vec<f64> = [0.004, 0.002, 0.001]
        .iter()
        .map(|&d| {
            center_residual(
                &linear_trajectory(&Model::MNV, &u0, &uniform(0.02 - 4.0 * d, d, 9)),
                &Model::MNV,
            )
        })
        .collect();
    for o in orders(&res) {
        assert!(o >= 3.5, "{res:?}");
    }
}

fn windowed(model: &Model, u0: &Field, d: f64, dealias: bool) -> Trajectory {
    let params = EvolveParams {
        dt: Some(0.00025),
        save_times: uniform(0.02 - 4.0 * d, d, 9),
        dealias,
        ..Default::default()
    };
    evolve_direct(model, u0, 0.02 + 4.0 * d, &params).unwrap()
}

#[test]
fn residual_of_direct_mnv_decays_under_cadence_refinement() {
    let g = GridSpec::new(128, 8.0).unwrap();
    let u0 = Field::from_fn(g, |z| Complex64::new(0.5 * (-z.norm_sqr()).exp(), 0.0));
    let res: Vec<f64> = [0.004, 0.002, 0.001]
        .iter()
        .map(|&d| center_residual(&windowed(&Model::MNV, &u0, d, true), &Model::MNV))
        .collect();
    for o in orders(&res) {
        assert!(o >= 3.5, "{res:?}");
    }
}

#[test]
fn miura_image_residual_is_comparable_to_direct_nv() {
    let g = GridSpec::new(128, 8.0).unwrap();
    let phi = Field::from_real_fn(g, |x, y| 0.4 * (-(x * x + y * y)).exp());
    let q0 = miura_forward(&from_log_potential(&phi).unwrap()).unwrap();
    let d = 0.002;
    let direct = windowed(&Model::NV, q0.field(), d, false);
    let opts = NvMiuraOptions {
        evolve: EvolveParams {
            dt: Some(0.00025),
            save_times: uniform(0.02 - 4.0 * d, d, 9),
            dealias: false,
            ..Default::default()
        },
        ..Default::default()
    };
    let via = nv_via_miura(&q0, &opts.evolve.save_times.clone(), &opts).unwrap();
    let a = center_residual(&via.trajectory, &Model::NV);
    let b = center_residual(&direct, &Model::NV);
    assert!(a / b <= 3.0 && b / a <= 3.0, "{a} vs {b}");
}

fn small_kgrid_setup(lambda: f64) -> (Field, KGrid) {
    let g = GridSpec::new(64, 8.0 / lambda).unwrap();
    let u = Field::from_fn(g, |z| {
        let w = lambda * z;
        lambda * Complex64::new(0.5 * (-w.norm_sqr()).exp(), 0.0) * (1.0 + 0.3 * w)
    });
    (u, KGrid::new(32, 3.0 * lambda).unwrap())
}

#[test]
fn gn_ratio_is_scale_invariant() {
    let params = JostParams::default();
    let ratios: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&l| {
            let (u, kg) = small_kgrid_setup(l);
            gn_ratio(&u, 0.25, 3.0, &kg, &params).unwrap().value
        })
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo <= 2.0, "{ratios:?}");
}

#[test]
fn gn_ratio_approaches_linear_limit() {
    let (u, kg) = small_kgrid_setup(1.0);
    let small = u.scale_re(0.01);
    let r = gn_ratio(&small, 0.25, 3.0, &kg, &JostParams::default())
        .unwrap()
        .value;
    let lin = gn_ratio_linear(&u, 0.25, 3.0, &kg).unwrap().value;
    assert!((r / lin - 1.0).abs() <= 0.1, "{r} vs {lin}");
}

#[test]
fn spacetime_ratio_matches_linear_limit_for_small_data() {
    let (u, kg) = small_kgrid_setup(1.0);
    let small = u.scale_re(0.01);
    let traj = linear_trajectory(&Model::MNV, &small, &uniform(0.0, 0.01, 5));
    let r = gn_ratio_spacetime(&traj, 6.0, &kg, &JostParams::default())
        .unwrap()
        .value;
    let lin = gn_ratio_spacetime_linear(&traj, 6.0, &kg).unwrap().value;
    assert!((r / lin - 1.0).abs() <= 0.1, "{r} vs {lin}");
}

#[test]
fn spacetime_ratio_of_zero_trajectory_is_degenerate() {
    let g = GridSpec::new(16, 4.0).unwrap();
    let z = Field::zeros(g, SpaceTag::Physical);
    let traj = linear_trajectory(&Model::MNV, &z, &uniform(0.0, 0.1, 3));
    let kg = KGrid::new(8, 1.0).unwrap();
    assert!(matches!(
        gn_ratio_spacetime(&traj, 6.0, &kg, &JostParams::default()),
        Err(nvlab::Error::Degenerate(_))
    ));
}
