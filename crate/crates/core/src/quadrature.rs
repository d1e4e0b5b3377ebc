//! Globally adaptive 15-point Gauss–Kronrod quadrature of vector-valued
//! integrands over the whole real line.
//!
//! The line is cut into `(-∞, -W]`, `[-W, W]` and `[W, ∞)`. The finite window is
//! pre-split at caller-supplied breakpoints (resonances, filter centres); the
//! tails are mapped onto `(0, 1]` with `ω = ±W/t`, which turns a `1/ω²` decay
//! into a bounded integrand. Subintervals are bisected in order of their error
//! estimate until the summed estimate of every component meets the tolerance.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;


use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Absolute tolerance on the summed error estimate of each component.
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            max_intervals: 8000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult<const N: usize> {
    pub value: [f64; N],
    /// Summed error estimate per component.
    pub error: [f64; N],
    pub intervals: usize,
    pub evaluations: usize,
}

impl<const N: usize> QuadratureResult<N> {
    pub fn max_error(&self) -> f64 {
        self.error.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Identity,
    /// `ω = W / t`
    Upper(f64),
    /// `ω = -W / t`
    Lower(f64),
}

impl Map {
    #[inline]
    fn apply(self, t: f64) -> (f64, f64) {
        match self {
            Map::Identity => (t, 1.0),
            Map::Upper(w) => (w / t, w / (t * t)),
            Map::Lower(w) => (-w / t, w / (t * t)),
        }
    }
}

struct Segment<const N: usize> {
    map: Map,
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: [f64; N],
    worst: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.worst == other.worst
    }
}
impl<const N: usize> Eq for Segment<N> {}
impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.worst.total_cmp(&other.worst)
    }
}

fn rescale_error(err: f64, resasc: f64) -> f64 {
    let err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        if scale < 1.0 {
            return resasc * scale;
        }
        return resasc;
    }
    err
}

fn kronrod<const N: usize, F>(f: &mut F, map: Map, lo: f64, hi: f64) -> Result<Segment<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut eval = |t: f64| -> Result<[f64; N]> {
        let (omega, jac) = map.apply(t);
        let mut v = f(omega)?;
        for x in v.iter_mut() {
            *x *= jac;
        }
        Ok(v)
    };

    let mut samples = [[0.0; N]; 15];
    samples[7] = eval(center)?;
    for j in 0..7 {
        let dx = half * XGK[j];
        samples[j] = eval(center - dx)?;
        samples[14 - j] = eval(center + dx)?;
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut worst = 0.0f64;
    for c in 0..N {
        let mut k = WGK[7] * samples[7][c];
        let mut g = WG[3] * samples[7][c];
        for j in 0..7 {
            let pair = samples[j][c] + samples[14 - j][c];
            k += WGK[j] * pair;
            if j % 2 == 1 {
                g += WG[j / 2] * pair;
            }
        }
        let mean = 0.5 * k;
        let mut asc = WGK[7] * (samples[7][c] - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((samples[j][c] - mean).abs() + (samples[14 - j][c] - mean).abs());
        }
        value[c] = k * half;
        error[c] = rescale_error((k - g) * half, asc * half.abs());
        worst = worst.max(error[c]);
    }
    Ok(Segment {
        map,
        lo,
        hi,
        value,
        error,
        worst,
    })
}

/// Integrates `f` over the real line.
///
/// `window` is the half-width `W` of the directly integrated region; points in
/// `breakpoints` falling strictly inside `(-W, W)` start as interval edges.
pub fn integrate_real_line<const N: usize, F>(
    mut f: F,
    window: f64,
    breakpoints: &[f64],
    opts: &QuadratureOptions,
) -> Result<QuadratureResult<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::invalid("window", "must be finite and > 0"));
    }
    let mut edges: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && x.abs() < window)
        .collect();
    edges.push(-window);
    edges.push(window);
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * window);

    let mut heap = BinaryHeap::new();
    for pair in edges.windows(2) {
        heap.push(kronrod(&mut f, Map::Identity, pair[0], pair[1])?);
    }
    for map in [Map::Upper(window), Map::Lower(window)] {
        heap.push(kronrod(&mut f, map, 0.0, 0.5)?);
        heap.push(kronrod(&mut f, map, 0.5, 1.0)?);
    }

    let mut evaluations = 15 * heap.len();
    loop {
        let mut total_err = [0.0; N];
        for seg in heap.iter() {
            for c in 0..N {
                total_err[c] += seg.error[c];
            }
        }
        let worst = total_err.iter().copied().fold(0.0, f64::max);
        if worst <= opts.abs_tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: worst,
                tolerance: opts.abs_tol,
            });
        }
        // Bisect a batch of the worst intervals before re-summing.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let seg = match heap.pop() {
                Some(s) => s,
                None => break,
            };
            if seg.worst <= f64::EPSILON * opts.abs_tol {
                heap.push(seg);
                break;
            }
            let mid = 0.5 * (seg.lo + seg.hi);
            heap.push(kronrod(&mut f, seg.map, seg.lo, mid)?);
            heap.push(kronrod(&mut f, seg.map, mid, seg.hi)?);
            evaluations += 30;
        }
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let intervals = heap.len();
    for seg in heap.into_iter() {
        for c in 0..N {
            value[c] += seg.value[c];
            error[c] += seg.error[c];
        }
    }
    Ok(QuadratureResult {
        value,
        error,
        intervals,
        evaluations,
    })
}
