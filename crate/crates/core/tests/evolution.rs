use std::f64::consts::PI;

use nvlab::evolution::{
    evolve_direct, linear_flow, nonlinearity_dsii, nonlinearity_mnv, nonlinearity_nv, EvolveParams,
    Model, NonlinearOps, Scheme,
};
use nvlab::multiplier::{anti_beurling, beurling, d, d_bar};
use nvlab::{Complex64, Field, GridSpec};
use proptest::prelude::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn gaussian(g: GridSpec, amp: f64) -> Field {
    Field::from_fn(g, |z| Complex64::new(amp * (-z.norm_sqr()).exp(), 0.0))
}

/// `∂̄` of a real Gaussian, so `∂u = Δ(·)/4` is real.
fn constrained(g: GridSpec, amp: f64) -> Field {
    Field::from_fn(g, |z| -z * amp * (-z.norm_sqr()).exp())
}

fn run(model: &Model, u0: &Field, t: f64, steps: usize, scheme: Scheme) -> Field {
    let p = EvolveParams::default()
        .with_dt(t.abs() / steps as f64)
        .with_scheme(scheme);
    evolve_direct(model, u0, t, &p)
        .unwrap()
        .final_state()
        .clone()
}

fn observed_order(model: &Model, u0: &Field, t: f64, scheme: Scheme, steps: usize) -> f64 {
    let a = run(model, u0, t, steps, scheme);
    let b = run(model, u0, t, 2 * steps, scheme);
    let c = run(model, u0, t, 4 * steps, scheme);
    (a.sub(&b).l2_norm() / b.sub(&c).l2_norm()).log2()
}

#[test]
fn mnv_nonlinearity_matches_term_by_term_evaluation() {
    // without the mask the four terms can be formed from field-level operators
    let g = GridSpec::new(64, 4.0).unwrap();
    let u = Field::from_fn(g, |z| {
        let c = Complex64::new(0.2, -0.1);
        (-(z - c).norm_sqr() * 1.3).exp() * Complex64::new(0.7, 0.3 * z.im)
    });
    let ub = u.conj();
    let du = d(&u).unwrap();
    let dbu = d_bar(&u).unwrap();
    let m2 = u.mul(&ub);
    let t1 = u.mul(&beurling(&ub.mul(&du)).unwrap());
    let t2 = du.mul(&beurling(&m2).unwrap());
    let t3 = u.mul(&anti_beurling(&ub.mul(&dbu)).unwrap());
    let t4 = dbu.mul(&anti_beurling(&m2).unwrap());
    let expect = t1.add(&t2).add(&t3).add(&t4).scale_re(0.75);
    let got = NonlinearOps::new(Model::MNV, g, false).eval(&u).unwrap();
    assert!(
        got.rel_distance(&expect) < 1e-12,
        "{}",
        got.rel_distance(&expect)
    );
}

#[test]
fn nv_nonlinearity_matches_term_by_term_evaluation() {
    let g = GridSpec::new(64, 4.0).unwrap();
    let q = Field::from_real_fn(g, |x, y| (-(x * x + 1.5 * y * y)).exp() * (1.0 + 0.3 * x));
    let qb = q.conj();
    let a = d(&q.mul(&beurling(&q).unwrap())).unwrap();
    let b = d_bar(&qb.mul(&anti_beurling(&qb).unwrap())).unwrap();
    let expect = a.add(&b).scale_re(0.75);
    let got = NonlinearOps::new(Model::NV, g, false).eval(&q).unwrap();
    assert!(
        got.rel_distance(&expect) < 1e-12,
        "{}",
        got.rel_distance(&expect)
    );
}

/// Direct `O(n⁴)` DFT with the symbol written out from `∂ = ½(∂ₓ − i∂ᵧ)`.
fn dense_beurling(f: &Field) -> Field {
    let g = *f.grid();
    let n = g.n();
    let freq = |j: usize| -> (f64, bool) {
        let s = if j < n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        };
        (s * PI / g.half_width(), j == n / 2)
    };
    let w = |a: usize, b: usize, sign: f64| {
        Complex64::from_polar(1.0, sign * 2.0 * PI * (a * b % n) as f64 / n as f64)
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for jy in 0..n {
        for jx in 0..n {
            let (a, nx) = freq(jx);
            let (b, ny) = freq(jy);
            let (a0, b0) = (if nx { 0.0 } else { a }, if ny { 0.0 } else { b });
            let num = 0.5 * (I * a0 + b0);
            let den = 0.5 * (I * a0 - b0);
            let sym = if jx == 0 && jy == 0 {
                Complex64::new(0.0, 0.0)
            } else if den.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                num / den
            };
            let mut c = Complex64::new(0.0, 0.0);
            for iy in 0..n {
                for ix in 0..n {
                    c += f.at(ix, iy) * w(ix, jx, -1.0) * w(iy, jy, -1.0);
                }
            }
            let c = c * sym;
            for iy in 0..n {
                for ix in 0..n {
                    out[iy * n + ix] += c * w(ix, jx, 1.0) * w(iy, jy, 1.0);
                }
            }
        }
    }
    let s = 1.0 / (n * n) as f64;
    Field::physical(g, out.into_iter().map(|v| v * s).collect()).unwrap()
}

#[test]
fn dsii_nonlinearity_matches_dense_evaluation() {
    let g = GridSpec::new(32, 4.0).unwrap();
    let u = Field::from_fn(g, |z| {
        (-(z.norm_sqr())).exp() * Complex64::new(1.0, 0.5 * z.re)
    });
    let r = dense_beurling(&u.mul(&u.conj())).scale_re(-1.0);
    let expect = u.zip_map(&r, |a, b| a * (2.0 * b.re));
    let mut ops = NonlinearOps::new(Model::DS2, g, false);
    // the stepper form is i·u(r + r̄)
    let got = ops.eval(&u).unwrap().scale(-I);
    assert!(
        got.rel_distance(&expect) < 1e-12,
        "{}",
        got.rel_distance(&expect)
    );
    // plane wave: |u|² constant, r = 0
    let pw = Field::from_fn(g, |z| Complex64::new(0.0, g.freq(3) * z.re).exp());
    assert!(nonlinearity_dsii(&pw).unwrap().max_abs() < 1e-12);
    assert!(dense_beurling(&pw.mul(&pw.conj())).max_abs() < 1e-12);
}

#[test]
fn integrator_order_mnv_and_nv() {
    let g = GridSpec::new(64, 8.0).unwrap();
    let u0 = gaussian(g, 0.5);
    let q0 = gaussian(g, 1.0);
    for scheme in [Scheme::Ifrk4, Scheme::Etdrk4] {
        let p = observed_order(&Model::MNV, &u0, 0.05, scheme, 4);
        assert!(p >= 3.5, "mNV {scheme:?}: {p}");
        let p = observed_order(&Model::NV, &q0, 0.05, scheme, 4);
        assert!(p >= 3.5, "NV {scheme:?}: {p}");
    }
}

#[test]
fn mnv_conserves_mass_and_constraint() {
    let g = GridSpec::new(64, 8.0).unwrap();
    let u0 = constrained(g, 0.5);
    let p = EvolveParams::default().with_save_times((0..=10).map(|i| i as f64 * 0.01).collect());
    let p = EvolveParams {
        dt: Some(0.01 / 4.0),
        ..p
    };
    let traj = evolve_direct(&Model::MNV, &u0, 0.1, &p).unwrap();
    let m0 = u0.l2_norm();
    for u in &traj.states {
        assert!((u.l2_norm() / m0 - 1.0).abs() <= 1e-6);
        let imd = d(u).unwrap().im().l2_norm() / u.l2_norm();
        assert!(imd <= 1e-6, "{imd}");
    }
}

#[test]
fn nv_state_stays_real() {
    let g = GridSpec::new(32, 8.0).unwrap();
    let q0 = gaussian(g, 1.0);
    let traj = evolve_direct(&Model::NV, &q0, 0.05, &EvolveParams::default()).unwrap();
    assert!(
        traj.meta.projection_max < 1e-12,
        "{}",
        traj.meta.projection_max
    );
    assert!(traj.final_state().im().l2_norm() < 1e-14);
}

#[test]
fn time_reversal_returns_initial_datum() {
    let g = GridSpec::new(64, 8.0).unwrap();
    let u0 = gaussian(g, 0.5);
    let t = 0.05;
    let steps = 8;
    let fwd = run(&Model::MNV, &u0, t, steps, Scheme::Ifrk4);
    let back = run(&Model::MNV, &fwd, -t, steps, Scheme::Ifrk4);
    let scheme_err = fwd
        .sub(&run(&Model::MNV, &u0, t, 2 * steps, Scheme::Ifrk4))
        .l2_norm();
    let err = back.sub(&u0).l2_norm();
    assert!(err <= 10.0 * scheme_err, "{err} vs {scheme_err}");
}

#[test]
fn scaling_covariance_on_nested_grids() {
    // λu₀(λ·) on [-L/λ, L/λ)² has the same samples as λu₀ on [-L, L)².
    let lam = 2.0;
    let g = GridSpec::new(64, 8.0).unwrap();
    let gs = GridSpec::new(64, 8.0 / lam).unwrap();
    let u0 = gaussian(g, 0.5);
    let us = Field::physical(gs, u0.values().iter().map(|v| v * lam).collect()).unwrap();
    let t = 0.04;
    let a = run(&Model::MNV, &u0, t, 8, Scheme::Etdrk4);
    let b = run(&Model::MNV, &us, t / lam.powi(3), 8, Scheme::Etdrk4);
    let b = Field::physical(g, b.values().iter().map(|v| v / lam).collect()).unwrap();
    assert!(a.rel_distance(&b) < 1e-10, "{}", a.rel_distance(&b));
}

#[test]
fn nonlinearity_off_matches_linear_flow_at_save_times() {
    let g = GridSpec::new(64, 8.0).unwrap();
    let u0 = constrained(g, 0.5);
    let p = EvolveParams {
        dt: Some(0.01),
        linear_only: true,
        save_times: vec![0.0, 0.03, 0.07, 0.1],
        ..Default::default()
    };
    let traj = evolve_direct(&Model::MNV, &u0, 0.1, &p).unwrap();
    for (t, u) in traj.times.iter().zip(&traj.states) {
        assert!(u.rel_distance(&linear_flow(&Model::MNV, &u0, *t).unwrap()) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_flow_is_unitary(t in -10.0f64..10.0, seed in 0u64..1000, which in 0usize..3) {
        let g = GridSpec::new(32, 4.0).unwrap();
        let s = seed as f64;
        let f = Field::from_fn(g, |z| {
            let c = Complex64::new((s * 0.37).sin(), (s * 0.11).cos());
            (-(z - c).norm_sqr()).exp() * Complex64::new((s + z.re).cos(), (s * z.im).sin())
        });
        let model = [Model::MNV, Model::NV, Model::DS2][which];
        let out = linear_flow(&model, &f, t).unwrap();
        prop_assert!((out.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cubic_homogeneity(lam in -3.0f64..3.0, seed in 0u64..1000) {
        let g = GridSpec::new(32, 4.0).unwrap();
        let s = seed as f64;
        let u = Field::from_fn(g, |z| (-(z.norm_sqr())).exp() * Complex64::new((s + z.re).cos(), (s * 0.3 + z.im).sin()));
        let a = nonlinearity_mnv(&u.scale_re(lam)).unwrap();
        let b = nonlinearity_mnv(&u).unwrap().scale_re(lam.powi(3));
        prop_assert!(a.sub(&b).l2_norm() <= 1e-12 * b.l2_norm().max(1e-300));
    }

    #[test]
    fn nv_output_is_real(seed in 0u64..1000) {
        let g = GridSpec::new(32, 4.0).unwrap();
        let s = seed as f64;
        let q = Field::from_real_fn(g, |x, y| (-(x * x + y * y)).exp() * (s * 0.1 + x * y).cos());
        let n = nonlinearity_nv(&q).unwrap();
        prop_assert!(n.im().l2_norm() <= 1e-12 * n.l2_norm());
    }
}
