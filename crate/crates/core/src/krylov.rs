//! Restarted GMRES and conjugate gradients over real inner products.
//!
//! Complex vectors are treated as real vector spaces with `⟨a, b⟩ = Re Σ āb`,
//! which makes real-linear operators such as `w ↦ C(a w̄)` admissible.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait KrylovVector: Clone {
    fn zeros_like(&self) -> Self;
    fn dot(&self, other: &Self) -> f64;
    fn axpy(&mut self, a: f64, x: &Self);
    fn scale(&mut self, a: f64);
    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl KrylovVector for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn dot(&self, other: &Self) -> f64 {
        let mut acc = [0.0; 4];
        let (a4, b4) = (self.chunks_exact(4), other.chunks_exact(4));
        let tail: f64 = a4
            .remainder()
            .iter()
            .zip(b4.remainder())
            .map(|(a, b)| a * b)
            .sum();
        for (a, b) in a4.zip(b4) {
            for i in 0..4 {
                acc[i] += a[i] * b[i];
            }
        }
        acc.iter().sum::<f64>() + tail
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        self.iter_mut().zip(x).for_each(|(s, v)| *s += a * v);
    }
    fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|s| *s *= a);
    }
}

impl KrylovVector for Vec<Complex64> {
    fn zeros_like(&self) -> Self {
        vec![Complex64::new(0.0, 0.0); self.len()]
    }
    fn dot(&self, other: &Self) -> f64 {
        // independent accumulators let the loop vectorize
        let mut acc = [0.0; 4];
        let (a2, b2) = (self.chunks_exact(2), other.chunks_exact(2));
        let tail: f64 = a2
            .remainder()
            .iter()
            .zip(b2.remainder())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        for (a, b) in a2.zip(b2) {
            acc[0] += a[0].re * b[0].re;
            acc[1] += a[0].im * b[0].im;
            acc[2] += a[1].re * b[1].re;
            acc[3] += a[1].im * b[1].im;
        }
        acc.iter().sum::<f64>() + tail
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        self.iter_mut().zip(x).for_each(|(s, v)| *s += v * a);
    }
    fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|s| *s *= a);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovParams {
    /// Relative residual target `‖b − Ax‖/‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for KrylovParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            restart: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KrylovOutcome<V> {
    pub solution: V,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    pub history: Vec<f64>,
}

impl<V> KrylovOutcome<V> {
    pub fn into_result(self, tol: f64) -> Result<Self> {
        if self.residual <= tol {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                residual: self.residual,
                history: self.history,
            })
        }
    }
}

/// Solves `A x = b` by GMRES(m) from `x0 = 0`. Convergence is not enforced;
/// inspect `residual` or call [`KrylovOutcome::into_result`].
pub fn gmres<V, A>(b: &V, mut op: A, params: KrylovParams) -> KrylovOutcome<V>
where
    V: KrylovVector,
    A: FnMut(&V) -> V,
{
    let bnorm = b.norm();
    let mut x = b.zeros_like();
    let mut history = vec![1.0];
    if bnorm == 0.0 {
        return KrylovOutcome {
            solution: x,
            iterations: 0,
            residual: 0.0,
            history,
        };
    }
    let m = params.restart.max(1);
    let mut iterations = 0;
    let mut r = b.clone();
    let mut rel = 1.0;
    while iterations < params.max_iter {
        let beta = r.norm();
        rel = beta / bnorm;
        if rel <= params.tol {
            break;
        }
        let mut basis: Vec<V> = Vec::with_capacity(m + 1);
        let mut v0 = r.clone();
        v0.scale(1.0 / beta);
        basis.push(v0);
        // Hessenberg columns, Givens rotations and the rotated rhs.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![beta];
        let mut j = 0;
        while j < m && iterations < params.max_iter {
            let mut w = op(&basis[j]);
            let mut col = vec![0.0; j + 2];
            for (i, vi) in basis.iter().enumerate() {
                let c = vi.dot(&w);
                w.axpy(-c, vi);
                col[i] = c;
            }
            let wn = w.norm();
            col[j + 1] = wn;
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = c * a + s * bb;
                col[i + 1] = -s * a + c * bb;
            }
            let (a, bb) = (col[j], col[j + 1]);
            let d = a.hypot(bb);
            let (c, s) = if d == 0.0 {
                (1.0, 0.0)
            } else {
                (a / d, bb / d)
            };
            col[j] = d;
            col[j + 1] = 0.0;
            cs.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            h.push(col);
            iterations += 1;
            j += 1;
            rel = g[j].abs() / bnorm;
            history.push(rel);
            if rel <= params.tol || wn <= 1e-300 {
                break;
            }
            w.scale(1.0 / wn);
            basis.push(w);
        }
        let mut y = vec![0.0; j];
        for i in (0..j).rev() {
            let mut s = g[i];
            for k in i + 1..j {
                s -= h[k][i] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            x.axpy(*yi, &basis[i]);
        }
        if rel <= params.tol || iterations >= params.max_iter {
            break;
        }
        let ax = op(&x);
        r = b.clone();
        r.axpy(-1.0, &ax);
    }
    KrylovOutcome {
        solution: x,
        iterations,
        residual: rel,
        history,
    }
}

/// Preconditioned conjugate gradients for symmetric positive definite `A`,
/// with preconditioner `M⁻¹` given by `precond`.
pub fn conjugate_gradient<V, A, P>(
    b: &V,
    mut op: A,
    mut precond: P,
    params: KrylovParams,
) -> KrylovOutcome<V>
where
    V: KrylovVector,
    A: FnMut(&V) -> V,
    P: FnMut(&V) -> V,
{
    let bnorm = b.norm();
    let mut x = b.zeros_like();
    let mut history = vec![1.0];
    if bnorm == 0.0 {
        return KrylovOutcome {
            solution: x,
            iterations: 0,
            residual: 0.0,
            history,
        };
    }
    let mut r = b.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut rel = 1.0;
    let mut iterations = 0;
    while iterations < params.max_iter {
        let ap = op(&p);
        let alpha = rz / p.dot(&ap);
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        iterations += 1;
        rel = r.norm() / bnorm;
        history.push(rel);
        if rel <= params.tol {
            break;
        }
        z = precond(&r);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        let mut np = z.clone();
        np.axpy(beta, &p);
        p = np;
    }
    KrylovOutcome {
        solution: x,
        iterations,
        residual: rel,
        history,
    }
}
