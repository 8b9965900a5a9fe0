//! Square 2-D FFTs built from row and column passes.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse plans for `n × n` row-major data.
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Unnormalized forward DFT in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(&self.fwd, data);
    }

    /// Inverse DFT in place, normalized by `1/n²`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(&self.inv, data);
        let s = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    /// Inverse DFT without the `1/n²` factor.
    pub fn inverse_unnormalized(&self, data: &mut [Complex64]) {
        self.run(&self.inv, data);
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n * self.n);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        self.cols_with(plan, data, 0..self.n);
    }

    /// Row transforms only, for the rows listed in `rows`.
    pub(crate) fn rows(&self, forward: bool, data: &mut [Complex64], rows: Range<usize>) {
        let plan = if forward { &self.fwd } else { &self.inv };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let n = self.n;
        plan.process_with_scratch(&mut data[rows.start * n..rows.end * n], &mut scratch);
    }

    /// Column transforms only, for the columns listed in `cols`.
    pub(crate) fn cols(&self, forward: bool, data: &mut [Complex64], cols: Range<usize>) {
        let plan = if forward { &self.fwd } else { &self.inv };
        self.cols_with(plan, data, cols);
    }

    /// Columns are gathered in narrow blocks into contiguous rows, transformed,
    /// and scattered back; this avoids full transposes, whose power-of-two
    /// strides defeat the cache.
    fn cols_with(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], cols: Range<usize>) {
        const B: usize = 8;
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let mut block = vec![Complex64::new(0.0, 0.0); B * n];
        let mut c0 = cols.start;
        while c0 < cols.end {
            let w = B.min(cols.end - c0);
            for r in 0..n {
                let src = &data[r * n + c0..r * n + c0 + w];
                for (b, v) in src.iter().enumerate() {
                    block[b * n + r] = *v;
                }
            }
            plan.process_with_scratch(&mut block[..w * n], &mut scratch);
            for r in 0..n {
                let dst = &mut data[r * n + c0..r * n + c0 + w];
                for (b, v) in dst.iter_mut().enumerate() {
                    *v = block[b * n + r];
                }
            }
            c0 += w;
        }
    }
}

/// Shared plan for size `n`; plans are immutable and reused across threads.
pub fn plan(n: usize) -> Arc<Fft2> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(Fft2::new(n)))
        .clone()
}
