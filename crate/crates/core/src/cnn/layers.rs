//! Convolution and pooling kernels on planar (channel, row, column) data
//! with square `n x n` planes.

use alloc::vec::Vec;

use super::{KERNEL, PADDING};

/// Source rows/columns `[lo, hi)` of the output that a kernel tap with
/// offset `d` (in `-PADDING..=PADDING`) reads inside the plane.
#[inline]
fn valid(n: usize, d: isize) -> (usize, usize) {
    let lo = (-d).max(0) as usize;
    let hi = (n as isize - d).min(n as isize) as usize;
    (lo, hi)
}

/// Same-padded stride-1 convolution.
/// `weights` is `(out_c, in_c, KERNEL, KERNEL)`; returns `(out_c, n, n)`.
pub(crate) fn conv_forward(
    input: &[f64],
    in_c: usize,
    n: usize,
    weights: &[f64],
    bias: &[f64],
    out_c: usize,
) -> Vec<f64> {
    let plane = n * n;
    let mut out = alloc::vec![0.0; out_c * plane];
    for o in 0..out_c {
        let dst = &mut out[o * plane..(o + 1) * plane];
        dst.fill(bias[o]);
        for c in 0..in_c {
            let src = &input[c * plane..(c + 1) * plane];
            for ky in 0..KERNEL {
                let dy = ky as isize - PADDING as isize;
                let (y_lo, y_hi) = valid(n, dy);
                for kx in 0..KERNEL {
                    let w = weights[((o * in_c + c) * KERNEL + ky) * KERNEL + kx];
                    let dx = kx as isize - PADDING as isize;
                    let (x_lo, x_hi) = valid(n, dx);
                    for y in y_lo..y_hi {
                        let sy = (y as isize + dy) as usize;
                        let sx = (x_lo as isize + dx) as usize;
                        let len = x_hi - x_lo;
                        let d = &mut dst[y * n + x_lo..y * n + x_lo + len];
                        let s = &src[sy * n + sx..sy * n + sx + len];
                        for (a, b) in d.iter_mut().zip(s) {
                            *a += w * b;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Backward pass of [`conv_forward`]: accumulates weight and bias gradients
/// and, when `want_input` is set, returns the gradient with respect to the
/// input (empty otherwise).
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv_backward(
    input: &[f64],
    in_c: usize,
    n: usize,
    weights: &[f64],
    dout: &[f64],
    out_c: usize,
    dweights: &mut [f64],
    dbias: &mut [f64],
    want_input: bool,
) -> Vec<f64> {
    let plane = n * n;
    let mut dinput = if want_input { alloc::vec![0.0; in_c * plane] } else { Vec::new() };
    for o in 0..out_c {
        let g = &dout[o * plane..(o + 1) * plane];
        dbias[o] += g.iter().sum::<f64>();
        for c in 0..in_c {
            let src = &input[c * plane..(c + 1) * plane];
            for ky in 0..KERNEL {
                let dy = ky as isize - PADDING as isize;
                let (y_lo, y_hi) = valid(n, dy);
                for kx in 0..KERNEL {
                    let widx = ((o * in_c + c) * KERNEL + ky) * KERNEL + kx;
                    let w = weights[widx];
                    let dx = kx as isize - PADDING as isize;
                    let (x_lo, x_hi) = valid(n, dx);
                    let len = x_hi - x_lo;
                    let mut acc = 0.0;
                    for y in y_lo..y_hi {
                        let sy = (y as isize + dy) as usize;
                        let sx = (x_lo as isize + dx) as usize;
                        let gr = &g[y * n + x_lo..y * n + x_lo + len];
                        let s = &src[sy * n + sx..sy * n + sx + len];
                        acc += gr.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
                        if want_input {
                            let di = &mut dinput[c * plane + sy * n + sx..c * plane + sy * n + sx + len];
                            for (d, a) in di.iter_mut().zip(gr) {
                                *d += w * a;
                            }
                        }
                    }
                    dweights[widx] += acc;
                }
            }
        }
    }
    dinput
}

/// 2x2 stride-2 max pooling. Returns pooled values and, for each, the flat
/// index of the winning input (first maximum in row-major window order).
pub(crate) fn maxpool_forward(input: &[f64], channels: usize, n: usize) -> (Vec<f64>, Vec<usize>) {
    let m = n / 2;
    let mut out = Vec::with_capacity(channels * m * m);
    let mut arg = Vec::with_capacity(channels * m * m);
    for c in 0..channels {
        let base = c * n * n;
        for y in 0..m {
            for x in 0..m {
                let mut best = base + 2 * y * n + 2 * x;
                for idx in [best + 1, best + n, best + n + 1] {
                    if input[idx] > input[best] {
                        best = idx;
                    }
                }
                out.push(input[best]);
                arg.push(best);
            }
        }
    }
    (out, arg)
}

pub(crate) fn maxpool_backward(dout: &[f64], arg: &[usize], input_len: usize) -> Vec<f64> {
    let mut dinput = alloc::vec![0.0; input_len];
    for (&g, &i) in dout.iter().zip(arg) {
        dinput[i] += g;
    }
    dinput
}
