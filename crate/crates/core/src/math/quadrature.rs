//! Globally adaptive Gauss-Kronrod quadrature.
//!
//! Each interval is scored with the embedded 15-point Kronrod / 7-point
//! Gauss pair; the interval with the largest error estimate is bisected
//! until the summed estimate meets the tolerance or the subdivision budget
//! runs out. The integrands here (delay CDFs times polynomials) are smooth
//! but rise sharply near the left endpoint for long packets, which is
//! exactly the shape a global heap strategy handles well.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Kronrod abscissae for [-1, 1], positive half (last entry is the center).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

/// 15-point Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_6,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// 7-point Gauss weights for the odd-indexed abscissae of `XGK`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Quadrature failure: the error estimate still achieved is reported so
/// callers can decide whether a degraded answer is usable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error(
        "quadrature did not converge within {max_subdivisions} subdivisions: \
         achieved error {achieved:e}, requested {requested:e}"
    )]
    NonConvergence {
        achieved: f64,
        requested: f64,
        max_subdivisions: usize,
    },
}

/// Converged integral with its final error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One Gauss-Kronrod 15(7) evaluation on [a, b]. Returns the Kronrod value
/// and |K15 - G7| as its (conservative) error estimate.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);

    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;

    for (i, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Integrate `f` over [a, b], stopping once the summed error estimate is
/// below `max(rel_tol * |integral|, abs_tol)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult, QuadError> {
    debug_assert!(a <= b, "integration bounds must be ordered");
    debug_assert!(rel_tol > 0.0 && abs_tol > 0.0);
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }

    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut subdivisions = 0usize;

    while total_err > (rel_tol * total.abs()).max(abs_tol) {
        if subdivisions >= max_subdivisions {
            return Err(QuadError::NonConvergence {
                achieved: total_err,
                requested: (rel_tol * total.abs()).max(abs_tol),
                max_subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at f64 resolution; accept what we have
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        subdivisions += 1;
    }

    Ok(QuadResult {
        value: total,
        error_estimate: total_err,
        subdivisions,
    })
}
