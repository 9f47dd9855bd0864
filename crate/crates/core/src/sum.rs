use rayon::prelude::*;

const CHUNK: usize = 4096;

/// Σ_{i<len} f(i) over fixed chunks, so the rounding does not depend on scheduling.
pub(crate) fn ordered_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partial: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).sum())
        .collect();
    partial.iter().sum()
}
