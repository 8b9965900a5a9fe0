//! Lowest eigenvalue of the periodic Schrödinger operator `−Δ + q`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::newton::{miura_inverse, NewtonParams, NewtonStatus};
use super::MiuraPotential;
use crate::error::{Error, Result};
use crate::fft::{self, Fft2};
use crate::grid::GridSpec;
use crate::krylov::{conjugate_gradient, KrylovParams, KrylovVector};
use crate::multiplier::Multiplier;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenParams {
    /// Bound on the Ritz residual `‖Hx − λx‖/‖x‖`.
    pub tol: f64,
    /// Initial Lanczos subspace size; doubled on each retry.
    pub subspace: usize,
    pub retries: usize,
    pub seed: u64,
}

impl Default for EigenParams {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            subspace: 40,
            retries: 2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCertificate {
    pub lambda_min: f64,
    /// `‖Hx − λx‖₂ / ‖x‖₂` for the returned Ritz vector.
    pub residual: f64,
    pub shift: f64,
    pub lanczos_steps: usize,
    pub inner_iterations: usize,
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
}

struct Operator {
    plan: std::sync::Arc<Fft2>,
    /// `|ξ|²`.
    neg_lap: Vec<f64>,
    q: Vec<f64>,
}

impl Operator {
    fn new(grid: GridSpec, q: Vec<f64>) -> Self {
        let lap = Multiplier::laplacian(grid);
        Self {
            plan: fft::plan(grid.n()),
            neg_lap: lap.symbol().iter().map(|s| -s.re).collect(),
            q,
        }
    }

    fn spectral(&self, x: &[f64], sym: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut s: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.plan.forward(&mut s);
        s.iter_mut().enumerate().for_each(|(i, v)| *v *= sym(i));
        self.plan.inverse(&mut s);
        s.into_iter().map(|v| v.re).collect()
    }

    /// `(−Δ + q − σ)x`.
    fn apply(&self, x: &[f64], sigma: f64) -> Vec<f64> {
        let mut y = self.spectral(x, |i| self.neg_lap[i]);
        for ((yv, xv), qv) in y.iter_mut().zip(x).zip(&self.q) {
            *yv += (qv - sigma) * xv;
        }
        y
    }
}

/// Lowest eigenvalue of the spectrally discretized `−Δ + q` by Lanczos on
/// `(H − σ)⁻¹` with `σ` below `min q`, inner solves by CG preconditioned
/// with `(−Δ + c)⁻¹`, `c = mean(q) − σ`.
pub fn schrodinger_min_eig(q: &MiuraPotential, params: &EigenParams) -> Result<EigenCertificate> {
    let grid = *q.grid();
    let qv: Vec<f64> = q.field().values().iter().map(|v| v.re).collect();
    let len = qv.len();
    let qmin = qv.iter().copied().fold(f64::INFINITY, f64::min);
    let qmean = qv.iter().sum::<f64>() / len as f64;
    // −Δ ≥ 0, so λ_min ≥ min q > σ
    let sigma = qmin - 1.0;
    let c = (qmean - sigma).max(1.0);
    let op = Operator::new(grid, qv);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let start: Vec<f64> = (0..len).map(|_| 1.0 + 0.01 * rng.random::<f64>()).collect();

    let mut inner = 0usize;
    let mut m = params.subspace;
    let mut last = None;
    for _ in 0..=params.retries {
        let solve = |b: &Vec<f64>, inner: &mut usize| -> Result<Vec<f64>> {
            let out = conjugate_gradient(
                b,
                |x: &Vec<f64>| op.apply(x, sigma),
                |r: &Vec<f64>| op.spectral(r, |i| 1.0 / (op.neg_lap[i] + c)),
                KrylovParams {
                    tol: 1e-13,
                    max_iter: 2000,
                    restart: 0,
                },
            );
            *inner += out.iterations;
            if out.residual > 1e-10 {
                return Err(Error::NonConvergence {
                    iterations: out.iterations,
                    residual: out.residual,
                    history: out.history,
                });
            }
            Ok(out.solution)
        };
        let cert = lanczos(
            &start,
            m,
            |v| solve(v, &mut inner),
            |x| op.apply(x, 0.0),
            params.tol,
        )?;
        let done = cert.residual <= params.tol;
        last = Some(EigenCertificate {
            shift: sigma,
            inner_iterations: inner,
            ..cert
        });
        if done {
            break;
        }
        log::info!("lanczos: residual above tolerance with {m} vectors, retrying");
        m *= 2;
    }
    let cert = last.expect("at least one attempt");
    if cert.residual > params.tol {
        return Err(Error::NonConvergence {
            iterations: cert.lanczos_steps,
            residual: cert.residual,
            history: vec![cert.residual],
        });
    }
    Ok(cert)
}

/// Lanczos with full reorthogonalization for the largest eigenvalue of the
/// SPD operator `K = (H − σ)⁻¹`; the Ritz vector is returned with its
/// Rayleigh quotient and residual for `H` itself.
fn lanczos(
    start: &[f64],
    m: usize,
    mut k: impl FnMut(&Vec<f64>) -> Result<Vec<f64>>,
    h: impl Fn(&[f64]) -> Vec<f64>,
    tol: f64,
) -> Result<EigenCertificate> {
    let mut v = start.to_vec();
    let nrm = v.norm();
    v.scale(1.0 / nrm);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut best: Option<EigenCertificate> = None;
    for j in 0..m {
        let mut w = k(&basis[j])?;
        let a = w.dot(&basis[j]);
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = w.dot(b);
                w.axpy(-c, b);
            }
        }
        let bnorm = w.norm();
        let steps = j + 1;
        let breakdown = bnorm <= 1e-14 * a.abs().max(1.0);
        if steps % 5 == 0 || steps == m || breakdown {
            let cert = ritz(&basis, &alpha, &beta, &h, steps);
            let ok = cert.residual <= tol;
            best = Some(cert);
            if ok || breakdown {
                break;
            }
        }
        if breakdown {
            break;
        }
        beta.push(bnorm);
        w.scale(1.0 / bnorm);
        basis.push(w);
    }
    Ok(best.expect("at least one Ritz evaluation"))
}

fn ritz(
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    h: &impl Fn(&[f64]) -> Vec<f64>,
    steps: usize,
) -> EigenCertificate {
    let mut t = DMatrix::<f64>::zeros(steps, steps);
    for i in 0..steps {
        t[(i, i)] = alpha[i];
        if i + 1 < steps {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (imax, _) =
        eig.eigenvalues
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &e)| if e > acc.1 { (i, e) } else { acc },
            );
    let y = eig.eigenvectors.column(imax);
    let mut x = vec![0.0; basis[0].len()];
    for (i, b) in basis.iter().take(steps).enumerate() {
        x.axpy(y[i], b);
    }
    let xn = x.norm();
    x.scale(1.0 / xn);
    let hx = h(&x);
    let lambda = hx.dot(&x);
    let mut r = hx;
    r.axpy(-lambda, &x);
    // normalize the positive ground state
    if x.iter().sum::<f64>() < 0.0 {
        x.scale(-1.0);
    }
    EigenCertificate {
        lambda_min: lambda,
        residual: r.norm(),
        shift: 0.0,
        lanczos_steps: steps,
        inner_iterations: 0,
        eigenvector: x,
    }
}

/// Smallest eigenvalue of the dense matrix of `−Δ + q`; for small grids only.
pub fn dense_min_eig(q: &MiuraPotential) -> Result<f64> {
    let grid = *q.grid();
    let len = grid.len();
    if len > 64 * 64 {
        return Err(Error::Usage(format!(
            "dense eigensolver limited to 64x64 grids, got {}",
            grid.n()
        )));
    }
    let qv: Vec<f64> = q.field().values().iter().map(|v| v.re).collect();
    let op = Operator::new(grid, qv);
    let mut mat = DMatrix::<f64>::zeros(len, len);
    let mut e = vec![0.0; len];
    for j in 0..len {
        e[j] = 1.0;
        let col = op.apply(&e, 0.0);
        for (i, v) in col.into_iter().enumerate() {
            mat[(i, j)] = v;
        }
        e[j] = 0.0;
    }
    let sym = (&mat + mat.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Positivity classification of one potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub lambda_min: f64,
    pub certificate_residual: f64,
    pub newton_status: NewtonStatus,
    pub newton_shift: f64,
    pub residual_history: Vec<f64>,
    pub integral: f64,
    /// `λ_min ≥ −tol·(1 + max|q|)`.
    pub nonnegative: bool,
    /// The Newton verdict agrees with the eigenvalue verdict.
    pub consistent: bool,
}

impl ClassifierReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs both the eigenvalue certificate and the Newton inversion.
pub fn classify(
    q: &MiuraPotential,
    eig: &EigenParams,
    newton: &NewtonParams,
    tol: f64,
) -> Result<ClassifierReport> {
    let cert = schrodinger_min_eig(q, eig)?;
    let inv = miura_inverse(q, newton)?;
    let nonnegative = cert.lambda_min >= -tol * (1.0 + q.max_abs());
    let newton_ok = inv.status.newton_converged() && inv.shift >= -tol * (1.0 + q.max_abs());
    if newton_ok != nonnegative {
        log::warn!(
            "classifier disagreement: lambda_min {:.3e}, newton {:?} (shift {:.3e})",
            cert.lambda_min,
            inv.status,
            inv.shift
        );
    }
    Ok(ClassifierReport {
        lambda_min: cert.lambda_min,
        certificate_residual: cert.residual,
        newton_status: inv.status,
        newton_shift: inv.shift,
        residual_history: inv.residual_history,
        integral: q.integral,
        nonnegative,
        consistent: newton_ok == nonnegative,
    })
}
