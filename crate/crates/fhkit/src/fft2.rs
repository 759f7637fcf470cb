//! In-place 2-D FFT on a row-major `rows × cols` buffer.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::par;

/// Unnormalised transform: forward uses e^{−2πi}, inverse e^{+2πi}.
pub fn fft2(buf: &mut [Complex64], rows: usize, cols: usize, direction: FftDirection) {
    assert_eq!(buf.len(), rows * cols);
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft(cols, direction);
    let col_fft = planner.plan_fft(rows, direction);

    // rows: contiguous, a few per task
    let per_task = (1 << 16) / cols.max(1) + 1;
    par::for_each_chunk_mut(buf, cols * per_task, |_, chunk| {
        let mut scratch = vec![Complex64::default(); row_fft.get_inplace_scratch_len()];
        for row in chunk.chunks_mut(cols) {
            row_fft.process_with_scratch(row, &mut scratch);
        }
    });

    // columns: gather a block of columns into contiguous storage
    const BLOCK: usize = 16;
    let nblocks = cols.div_ceil(BLOCK);
    let ptr = SyncPtr(buf.as_mut_ptr());
    let col_fft = &col_fft;
    par::map_indexed(nblocks, |bi| {
        let c0 = bi * BLOCK;
        let width = BLOCK.min(cols - c0);
        let mut tmp = vec![Complex64::default(); rows * width];
        let mut scratch = vec![Complex64::default(); col_fft.get_inplace_scratch_len()];
        let p = ptr;
        // SAFETY: blocks touch disjoint column ranges of the buffer.
        unsafe {
            for r in 0..rows {
                for w in 0..width {
                    tmp[w * rows + r] = *p.0.add(r * cols + c0 + w);
                }
            }
        }
        for w in 0..width {
            col_fft.process_with_scratch(&mut tmp[w * rows..(w + 1) * rows], &mut scratch);
        }
        unsafe {
            for r in 0..rows {
                for w in 0..width {
                    *p.0.add(r * cols + c0 + w) = tmp[w * rows + r];
                }
            }
        }
    });
}

#[derive(Clone, Copy)]
struct SyncPtr(*mut Complex64);
unsafe impl Send for SyncPtr {}
unsafe impl Sync for SyncPtr {}

/// 1-D in-place transform.
pub fn fft1(buf: &mut [Complex64], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft(buf.len(), direction).process(buf);
}

/// Signed frequency of FFT index `i` on a length-`n` axis.
#[inline]
pub fn signed_freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index of signed frequency `k` (taken mod n).
#[inline]
pub fn index_of_freq(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}
