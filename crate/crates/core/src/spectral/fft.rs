use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::Grid;

type PlanKey = (usize, bool);

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let key = (len, direction == FftDirection::Forward);
    if let Some(p) = guard.1.get(&key) {
        return Arc::clone(p);
    }
    let p = guard.0.plan_fft(len, direction);
    guard.1.insert(key, Arc::clone(&p));
    p
}

/// Rows per parallel task when transforming contiguous lines.
const LINES_PER_TASK: usize = 64;

fn fft_contiguous(data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
    let len = fft.len();
    data.par_chunks_mut(len * LINES_PER_TASK).for_each_init(
        || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
        |scratch, chunk| fft.process_with_scratch(chunk, scratch),
    );
}

/// In-place unitary n-dimensional DFT, row-major layout.
pub(crate) fn fft_nd(data: &mut [Complex64], grid: &Grid, forward: bool) {
    let npts = grid.points;
    let direction = if forward {
        FftDirection::Forward
    } else {
        FftDirection::Inverse
    };
    let fft = plan(npts, direction);
    let total = data.len();
    let mut buffer: Vec<Complex64> = Vec::new();
    for axis in 0..grid.n {
        let stride = npts.pow((grid.n - 1 - axis) as u32);
        if stride == 1 {
            fft_contiguous(data, &fft);
            continue;
        }
        let block = npts * stride;
        buffer.resize(total, Complex64::new(0.0, 0.0));
        {
            let src: &[Complex64] = data;
            buffer.par_chunks_mut(npts).enumerate().for_each(|(line, out)| {
                let outer = line / stride;
                let inner = line % stride;
                let base = outer * block + inner;
                for (i, v) in out.iter_mut().enumerate() {
                    *v = src[base + i * stride];
                }
            });
        }
        fft_contiguous(&mut buffer, &fft);
        let lines: &[Complex64] = &buffer;
        data.par_iter_mut().enumerate().for_each(|(idx, v)| {
            let outer = idx / block;
            let rem = idx % block;
            let i = rem / stride;
            let inner = rem % stride;
            *v = lines[(outer * stride + inner) * npts + i];
        });
    }
    let scale = 1.0 / (total as f64).sqrt();
    data.par_iter_mut().for_each(|v| *v *= scale);
}
