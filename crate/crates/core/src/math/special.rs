//! Error function, Gaussian tail (Q-function), and inverse Q-function.
//!
//! `erf` uses the Maclaurin series for small arguments and the Legendre
//! continued fraction for the complementary function at large arguments,
//! giving close to full f64 accuracy on both branches. The inverse starts
//! from the Acklam rational approximation of the normal quantile and
//! polishes with Newton steps against the accurate tail, so the result is
//! limited by `q_function` itself rather than the seed polynomial.

use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};

use crate::analytic::AnalyticError;

/// 1 / sqrt(2 pi)
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Crossover between the erf series and the erfc continued fraction.
const SERIES_CUTOFF: f64 = 2.0;

/// Error function, series branch for |x| < 2, else via `erfc`.
pub fn erf(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        erf_series(x)
    } else if x > 0.0 {
        1.0 - erfc_cf(x)
    } else {
        erfc_cf(-x) - 1.0
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x >= SERIES_CUTOFF {
        erfc_cf(x)
    } else if x <= -SERIES_CUTOFF {
        2.0 - erfc_cf(-x)
    } else {
        1.0 - erf_series(x)
    }
}

/// Maclaurin series erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1)).
/// Converges to f64 precision within ~60 terms for |x| < 2.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..120 {
        term *= -x2 / n as f64;
        let contrib = term / (2 * n + 1) as f64;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

/// Legendre continued fraction for erfc, valid for x >= ~1.5, evaluated
/// with the modified Lentz algorithm.
fn erfc_cf(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let x2 = x * x;
    // K = x + (1/2)/(x + 1/(x + (3/2)/(x + ...))), b_n = x, a_n = n/2;
    // erfc(x) = exp(-x^2) / (sqrt(pi) * K)
    let tiny = 1e-300;
    let mut f = x.max(tiny);
    let mut c = f;
    let mut d = 0.0;
    for n in 1..300 {
        let a = n as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x2).exp() / (std::f64::consts::PI.sqrt() * f)
}

/// Standard normal density.
pub fn gaussian_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Gaussian tail Q(z) = P(N(0,1) > z) = erfc(z / sqrt(2)) / 2.
pub fn q_function(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Acklam's rational approximation to the standard normal quantile
/// Phi^-1(p); absolute error below ~1.2e-9 across (0, 1).
fn norm_quantile_seed(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Inverse Gaussian tail: the z with Q(z) = eps, for eps in (0, 1).
///
/// Newton refinement drives the seed to the accuracy of `q_function`,
/// comfortably below the 1e-10 absolute contract.
pub fn q_inverse_checked(eps: f64) -> Result<f64, AnalyticError> {
    if !(eps > 0.0 && eps < 1.0) || eps.is_nan() {
        return Err(AnalyticError::Domain(format!(
            "q_inverse requires eps in (0, 1), got {eps}"
        )));
    }
    // Q^-1(eps) = Phi^-1(1 - eps) = -Phi^-1(eps)
    let mut z = -norm_quantile_seed(eps);
    for _ in 0..4 {
        let f = q_function(z) - eps;
        let d = gaussian_pdf(z);
        if d <= 0.0 {
            break;
        }
        let step = f / d;
        z += step;
        if step.abs() < 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::quadrature::integrate;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Independent tail evaluation: numerically integrate the Gaussian
    /// density over [z, z + 60]; the remainder beyond is far below 1e-300.
    fn q_by_quadrature(z: f64) -> f64 {
        integrate(gaussian_pdf, z, z + 60.0, 1e-13, 1e-300, 20_000)
            .unwrap()
            .value
    }

    /// Bisection on the integrated tail, the oracle for the inverse.
    fn q_inverse_by_bisection(eps: f64) -> f64 {
        let (mut lo, mut hi) = (-12.0f64, 12.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q_by_quadrature(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn erf_reference_points() {
        // A&S table values
        assert_relative_eq!(erf(0.5), 0.5204998778130465, max_relative = 1e-14);
        assert_relative_eq!(erf(1.0), 0.8427007929497149, max_relative = 1e-14);
        assert_relative_eq!(erf(2.0), 0.9953222650189527, max_relative = 1e-13);
        assert_relative_eq!(erfc(3.0), 2.209049699858544e-5, max_relative = 1e-12);
        assert_eq!(erf(0.0), 0.0);
    }

    #[test]
    fn q_at_median_is_half() {
        assert_relative_eq!(q_function(0.0), 0.5, max_relative = 1e-15);
        assert!(q_inverse_checked(0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn q_inverse_small_eps_matches_bisection_oracle() {
        // frozen from the bisection-on-quadrature oracle
        let z = q_inverse_checked(1e-5).unwrap();
        assert!((z - 4.264890793922825).abs() < 1e-10);
        let oracle = q_inverse_by_bisection(1e-5);
        assert!((z - oracle).abs() < 1e-10, "z={z} oracle={oracle}");
    }

    #[test]
    fn q_inverse_symmetry() {
        let a = q_inverse_checked(0.9).unwrap();
        let b = q_inverse_checked(0.1).unwrap();
        assert!(a < 0.0);
        assert_relative_eq!(a, -b, max_relative = 1e-12);
    }

    #[test]
    fn q_inverse_rejects_out_of_domain() {
        for bad in [0.0, 1.0, -0.3, 1.7, f64::NAN] {
            assert!(q_inverse_checked(bad).is_err());
        }
    }

    #[test]
    fn q_matches_quadrature_across_range() {
        for z in [-4.0, -1.0, 0.0, 0.5, 1.0, 2.5, 4.0, 6.0, 8.0] {
            let q = q_function(z);
            let numeric = q_by_quadrature(z);
            assert!(
                (q - numeric).abs() <= 1e-12 * numeric.max(1e-300),
                "z={z}: q={q:e} numeric={numeric:e}"
            );
        }
    }

    proptest! {
        #[test]
        fn q_inverse_round_trip(eps in 1e-9f64..0.999) {
            let z = q_inverse_checked(eps).unwrap();
            let back = q_function(z);
            prop_assert!((back - eps).abs() <= 1e-12 * eps + 1e-16);
        }

        #[test]
        fn q_is_monotone_decreasing(a in -8.0f64..8.0, delta in 1e-6f64..4.0) {
            prop_assert!(q_function(a) > q_function(a + delta));
        }
    }
}
