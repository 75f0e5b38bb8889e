//! Zonal harmonics on S³, their derivatives, inner products on the upper
//! hemisphere, Lagrange partial sums and summation by parts.
//!
//! The normalized zonal harmonic is `f_k(φ) = sin((k+1)φ) / (π sin φ)`, which
//! is `U_k(cos φ)/π`. It is evaluated through the cosine expansion
//! `f_k = (1/π) Σ_{m=0}^{k} cos((k−2m)φ)`, so no quotient appears and the
//! poles need no special treatment. Each `f_k` has unit norm on the upper
//! hemisphere with area element `4π sin²φ dφ`.
//!
//! # Summation by parts
//!
//! For coefficients `b_j`, the alternating series `Σ (−1)^j b_j ∂^m f_{2j}`
//! is rewritten as
//! `(1/π) [Σ_{j<N} A_j (b_j − b_{j+1}) + A_N b_N]` where `A_j = ∂^m S_j` and
//! `S_n = π Σ_{k≤n} (−1)^k f_{2k} = (−1)^n sin(2(n+1)φ) / sin(2φ)`.
//! The partial sums `A_j` grow like `j^{m+1}` but oscillate away from the
//! corner `φ = π/2`, so when `b_j − b_{j+1}` decays like `j^{−(m+3)}` the
//! transformed series converges absolutely while the original converges only
//! conditionally. Dropping the boundary term `A_N b_N` gives the limit of the
//! infinite series with a much smaller truncation error, except within about
//! `1/N` of `φ = π/2` where the partial sums stop oscillating.

use std::f64::consts::{FRAC_1_PI, PI};

use crate::error::{Error, Result};
use crate::geometry::gauss_legendre_on;

/// Index of a zonal harmonic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZonalIndex {
    pub k: u32,
}

impl ZonalIndex {
    pub fn new(k: u32) -> Self {
        ZonalIndex { k }
    }

    /// Eigenvalue of the Laplacian on S³.
    pub fn eigenvalue(self) -> f64 {
        let k = self.k as f64;
        -k * (k + 2.0)
    }

    /// Dimension of the full eigenspace on S³.
    pub fn multiplicity(self) -> u64 {
        (self.k as u64 + 1).pow(2)
    }

    pub fn is_even(self) -> bool {
        self.k % 2 == 0
    }
}

/// `d^m/dx^m cos(x)` expressed through `cos x` and `sin x`.
#[inline]
fn cos_deriv(m: u32, c: f64, s: f64) -> f64 {
    match m % 4 {
        0 => c,
        1 => -s,
        2 => -c,
        _ => s,
    }
}

/// Zonal harmonic `f_k(φ)`.
pub fn zonal(k: u32, phi: f64) -> f64 {
    zonal_deriv(k, phi, 0)
}

/// `∫₀^{π/2} f_k(φ) sin²φ dφ`.
pub fn hemisphere_moment(k: u32) -> f64 {
    if k == 0 {
        return 0.25;
    }
    // ½∫[cos(kφ) − cos((k+2)φ)] with f_k sin φ = sin((k+1)φ)/π
    let half_sin = |a: u32| match a % 4 {
        1 => 1.0,
        3 => -1.0,
        _ => 0.0,
    };
    0.5 * FRAC_1_PI * (half_sin(k) / k as f64 - half_sin(k + 2) / (k + 2) as f64)
}

/// `m`-th derivative of `f_k` in `φ`, for `m ≤ 4`.
pub fn zonal_deriv(k: u32, phi: f64, m: u32) -> f64 {
    assert!(m <= 4, "derivative order is capped at 4");
    let a = k as f64 + 1.0;
    if a * phi.sin().abs() >= 4.0 {
        quotient_deriv(a, phi, m)
    } else {
        cosine_sum_deriv(k, phi, m)
    }
}

/// Leibniz rule on `sin(aφ) · csc φ`, accurate once `a sin φ` is not small.
fn quotient_deriv(a: f64, phi: f64, m: u32) -> f64 {
    let (s, c) = phi.sin_cos();
    let cs = 1.0 / s;
    let ct = c / s;
    let csc = [
        cs,
        -cs * ct,
        cs * ct * ct + cs.powi(3),
        -cs * ct.powi(3) - 5.0 * cs.powi(3) * ct,
        cs * ct.powi(4) + 18.0 * cs.powi(3) * ct * ct + 5.0 * cs.powi(5),
    ];
    let (sa, ca) = (a * phi).sin_cos();
    let binom = [[1.0, 0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0, 0.0], [1.0, 3.0, 3.0, 1.0, 0.0], [1.0, 4.0, 6.0, 4.0, 1.0]];
    let mut acc = 0.0;
    for i in 0..=m as usize {
        // d^i sin(aφ) = a^i sin(aφ + iπ/2)
        let d = a.powi(i as i32) * cos_deriv(i as u32 + 3, ca, sa);
        acc += binom[m as usize][i] * d * csc[m as usize - i];
    }
    acc * FRAC_1_PI
}

fn cosine_sum_deriv(k: u32, phi: f64, m: u32) -> f64 {
    let mut acc = if k % 2 == 0 && m == 0 { 1.0 } else { 0.0 };
    let start = if k % 2 == 0 { 2 } else { 1 };
    let mut l = start;
    while l <= k {
        let lf = l as f64;
        let (s, c) = (lf * phi).sin_cos();
        acc += 2.0 * lf.powi(m as i32) * cos_deriv(m, c, s);
        l += 2;
    }
    acc * FRAC_1_PI
}

/// Fills `out[k] = ∂^m f_k(φ)` for `k = 0..out.len()` using
/// `f_k − f_{k−2} = (2/π) cos(kφ)`.
pub fn zonal_derivs_into(phi: f64, m: u32, out: &mut [f64]) {
    assert!(m <= 4, "derivative order is capped at 4");
    if out.is_empty() {
        return;
    }
    const RESYNC: usize = 32;
    let (s1, c1) = phi.sin_cos();
    let (mut s, mut c) = (s1, c1);
    out[0] = if m == 0 { FRAC_1_PI } else { 0.0 };
    let two_pi = 2.0 * FRAC_1_PI;
    for k in 1..out.len() {
        if k > 1 {
            if k % RESYNC == 0 {
                let (sk, ck) = (k as f64 * phi).sin_cos();
                s = sk;
                c = ck;
            } else {
                let cn = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = cn;
            }
        }
        let kf = k as f64;
        let kp = match m {
            0 => 1.0,
            1 => kf,
            2 => kf * kf,
            3 => kf * kf * kf,
            _ => (kf * kf) * (kf * kf),
        };
        let term = two_pi * kp * cos_deriv(m, c, s);
        out[k] = if k >= 2 { out[k - 2] + term } else { term };
    }
}

/// All derivatives `∂^m f_k(φ)` for `k ≤ kmax`.
pub fn zonal_derivs(kmax: u32, phi: f64, m: u32) -> Vec<f64> {
    let mut out = vec![0.0; kmax as usize + 1];
    zonal_derivs_into(phi, m, &mut out);
    out
}

/// Closed-form pairing `⟨f_odd, f_even⟩` on the upper hemisphere.
pub fn inner_closed(odd: u32, even: u32) -> Result<f64> {
    if odd % 2 != 1 || even % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "inner_closed needs an odd and an even index, got ({odd}, {even})"
        )));
    }
    let k = ((odd - 1) / 2) as f64;
    let j = (even / 2) as f64;
    let sign = if ((odd - 1) / 2 + even / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(8.0 * sign * (k + 1.0) / (PI * (2.0 * k + 2.0 * j + 3.0) * (2.0 * k - 2.0 * j + 1.0)))
}

/// Gauss–Legendre rule in `φ ∈ [0, π/2]` with the hemisphere density
/// `4π sin²φ` folded into the weights.
#[derive(Clone, Debug)]
pub struct HemisphereRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HemisphereRule {
    pub fn new(n: usize) -> Self {
        let (p, w) = gauss_legendre_on(n, 0.0, PI / 2.0);
        let weights = p.iter().zip(&w).map(|(phi, wi)| 4.0 * PI * wi * phi.sin().powi(2)).collect();
        HemisphereRule { nodes: p, weights }
    }

    /// Pairing of a function of `φ` against `f_k`.
    pub fn project<F: Fn(f64) -> f64>(&self, k: u32, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(phi, w)| w * f(*phi) * zonal(k, *phi))
            .collect();
        crate::geometry::pairwise_sum(&terms)
    }
}

/// `⟨f_j, f_k⟩` on the upper hemisphere by quadrature.
pub fn inner_quad(j: u32, k: u32, rule: &HemisphereRule) -> f64 {
    rule.project(k, |phi| zonal(j, phi))
}

/// `S_n` by direct summation.
pub fn lagrange_sum_direct(n: u32, phi: f64) -> f64 {
    let f = zonal_derivs(2 * n, phi, 0);
    let mut acc = 0.0;
    for k in 0..=n as usize {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * f[2 * k];
    }
    PI * acc
}

/// `S_n` by the closed form; needs `sin 2φ ≠ 0`.
pub fn lagrange_sum_closed(n: u32, phi: f64) -> f64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * (2.0 * (n as f64 + 1.0) * phi).sin() / (2.0 * phi).sin()
}

/// `S_n`, closed form away from `φ ∈ {0, π/2, π}`, direct sum otherwise.
pub fn lagrange_sum(n: u32, phi: f64) -> f64 {
    let d = phi.min((phi - PI / 2.0).abs()).min((PI - phi).abs());
    if d > 1e-8 {
        lagrange_sum_closed(n, phi)
    } else {
        lagrange_sum_direct(n, phi)
    }
}

/// `A_j = ∂^m S_j` for `j = 0..=n`, by accumulation.
pub fn lagrange_partial_sums(n: u32, phi: f64, m: u32) -> Vec<f64> {
    let f = zonal_derivs(2 * n, phi, m);
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    for j in 0..=n as usize {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * PI * f[2 * j];
        out.push(acc);
    }
    out
}

/// How the Abel-transformed sum treats the boundary term `A_N b_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbelMode {
    /// Keep it: equals the truncated sum up to rounding.
    Exact,
    /// Drop it: estimates the limit of the infinite series.
    Limit,
}

/// `Σ_{j≤N} (−1)^j b_j ∂^m f_{2j}(φ)` through summation by parts.
pub fn sum_by_parts(b: &[f64], m: u32, phi: f64, mode: AbelMode) -> Result<f64> {
    if b.is_empty() {
        return Ok(0.0);
    }
    check_decay(b)?;
    let n = b.len() - 1;
    let a = lagrange_partial_sums(n as u32, phi, m);
    Ok(abel_from_partial_sums(b, &a, mode))
}

/// Rejects sequences that show no decay over their second half.
pub fn check_decay(b: &[f64]) -> Result<()> {
    let n = b.len().saturating_sub(1);
    if n >= 8 {
        let last = b[n].abs();
        let mid = b[n / 2].abs();
        if last > 0.0 && last >= mid {
            return Err(Error::NonDecaying { last, mid });
        }
    }
    Ok(())
}

/// Abel transform given partial sums `A_j` (already including the factor π).
pub(crate) fn abel_from_partial_sums(b: &[f64], a: &[f64], mode: AbelMode) -> f64 {
    let n = b.len() - 1;
    let mut terms = Vec::with_capacity(n + 1);
    for j in 0..n {
        terms.push(a[j] * (b[j] - b[j + 1]));
    }
    if mode == AbelMode::Exact {
        terms.push(a[n] * b[n]);
    }
    crate::geometry::pairwise_sum(&terms) * FRAC_1_PI
}

/// Direct evaluation of `Σ_{j≤N} (−1)^j b_j ∂^m f_{2j}(φ)`.
pub fn alternating_direct(b: &[f64], m: u32, phi: f64) -> f64 {
    if b.is_empty() {
        return 0.0;
    }
    let f = zonal_derivs(2 * (b.len() as u32 - 1), phi, m);
    let terms: Vec<f64> = b
        .iter()
        .enumerate()
        .map(|(j, bj)| if j % 2 == 0 { bj * f[2 * j] } else { -bj * f[2 * j] })
        .collect();
    crate::geometry::pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hemisphere_moments_match_quadrature() {
        let (x, w) = gauss_legendre_on(200, 0.0, PI / 2.0);
        for k in 0..30 {
            let q: f64 = x.iter().zip(&w).map(|(p, wi)| wi * zonal(k, *p) * p.sin().powi(2)).sum();
            assert!((q - hemisphere_moment(k)).abs() < 1e-14, "k={k}");
        }
    }
    use proptest::prelude::*;

    fn fd(k: u32, phi: f64, m: u32) -> f64 {
        // central differences on the quotient form, lower order derivative
        let h = 1e-4;
        let f = |x: f64| zonal_deriv(k, x, m - 1);
        (f(phi - 2.0 * h) - 8.0 * f(phi - h) + 8.0 * f(phi + h) - f(phi + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn values() {
        for phi in [0.0, 0.3, 1.0, PI / 2.0, PI] {
            assert!((zonal(0, phi) - FRAC_1_PI).abs() < 1e-16);
        }
        for j in 0..30u32 {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((zonal(2 * j, PI / 2.0) - s / PI).abs() < 1e-14);
        }
        assert!((zonal(1, PI / 3.0) - FRAC_1_PI).abs() < 1e-15);
        for k in 0..20u32 {
            assert!((zonal(k, 0.0) - (k as f64 + 1.0) / PI).abs() < 1e-13);
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((zonal(k, PI) - s * (k as f64 + 1.0) / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_at_equator() {
        for j in 0..20u32 {
            assert!(zonal_deriv(2 * j, PI / 2.0, 1).abs() < 1e-12);
            let s = if j % 2 == 0 { -1.0 } else { 1.0 };
            let expect = (2.0 * j as f64 + 2.0) * s / PI;
            assert!((zonal_deriv(2 * j + 1, PI / 2.0, 1) - expect).abs() < 1e-12);
        }
        assert_eq!(zonal_deriv(0, 0.7, 1), 0.0);
    }

    #[test]
    fn derivatives_match_differences() {
        for k in [1u32, 2, 5, 12, 40] {
            for phi in [0.01, 0.05, 0.4, 1.2, 1.5, 2.9] {
                for m in 1..=4 {
                    let a = zonal_deriv(k, phi, m);
                    let b = fd(k, phi, m);
                    let scale = (k as f64 + 1.0).powi(m as i32 + 1);
                    assert!((a - b).abs() < 1e-6 * scale, "k={k} phi={phi} m={m}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn two_paths_agree() {
        for k in 0..60u32 {
            for phi in [0.02, 0.1, 0.7, 1.3, 1.57, 2.0, 3.1] {
                for m in 0..=4 {
                    let a = quotient_deriv(k as f64 + 1.0, phi, m);
                    let b = cosine_sum_deriv(k, phi, m);
                    let scale = (k as f64 + 1.0).powi(m as i32 + 1) / phi.sin().powi(m as i32 + 1);
                    assert!((a - b).abs() < 1e-11 * scale.max(1.0), "k={k} phi={phi} m={m}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn batch_matches_single() {
        for phi in [0.0, 1e-3, 0.3, 1.0, PI / 2.0, 2.5] {
            for m in 0..=4 {
                let v = zonal_derivs(300, phi, m);
                for k in [0usize, 1, 2, 3, 17, 100, 299, 300] {
                    let s = zonal_deriv(k as u32, phi, m);
                    let scale = (k as f64 + 1.0).powi(m as i32 + 1);
                    assert!((v[k] - s).abs() < 1e-12 * scale, "k={k} phi={phi} m={m}");
                }
            }
        }
    }

    #[test]
    fn eigenvalue_identity() {
        for k in 0..=20u32 {
            let lam = ZonalIndex::new(k).eigenvalue();
            for i in 1..100 {
                let phi = 0.05 + (PI - 0.1) * i as f64 / 100.0;
                let lap = zonal_deriv(k, phi, 2) + 2.0 / phi.tan() * zonal_deriv(k, phi, 1);
                assert!((lap - lam * zonal(k, phi)).abs() < 1e-10, "k={k}");
            }
        }
        assert_eq!(ZonalIndex::new(3).multiplicity(), 16);
    }

    #[test]
    fn inner_products() {
        let rule = HemisphereRule::new(64);
        assert!((inner_closed(1, 0).unwrap() - 8.0 / (3.0 * PI)).abs() < 1e-15);
        assert!((inner_closed(1, 2).unwrap() - 8.0 / (5.0 * PI)).abs() < 1e-15);
        for j in 0..10u32 {
            let s = if j % 2 == 0 { -1.0 } else { 1.0 };
            let jf = j as f64;
            let expect = 8.0 * s / (PI * (2.0 * jf - 1.0) * (2.0 * jf + 3.0));
            assert!((inner_closed(1, 2 * j).unwrap() - expect).abs() < 1e-15);
        }
        assert!(inner_closed(2, 4).is_err());
        assert!((inner_quad(2, 2, &rule) - 1.0).abs() < 1e-12);
        assert!(inner_quad(2, 4, &rule).abs() < 1e-12);
        assert!((inner_quad(1, 2, &rule) - 8.0 / (5.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn lagrange_sums() {
        assert!((lagrange_sum(0, 0.3) - 1.0).abs() < 1e-15);
        assert!(lagrange_sum_closed(1, PI / 4.0).abs() < 1e-15);
        assert!((1.0 - PI * zonal(2, PI / 4.0)).abs() < 1e-15);
        assert!((lagrange_sum_direct(5, 0.7) - lagrange_sum_closed(5, 0.7)).abs() < 1e-13);
        for n in 0..=50u32 {
            for i in 0..=40 {
                let phi = 0.05 + 1.45 * i as f64 / 40.0;
                assert!((lagrange_sum_direct(n, phi) - lagrange_sum_closed(n, phi)).abs() < 1e-12);
            }
        }
        let a = lagrange_partial_sums(10, 0.4, 0);
        for (n, v) in a.iter().enumerate() {
            assert!((v - lagrange_sum_closed(n as u32, 0.4)).abs() < 1e-13);
        }
    }

    #[test]
    fn sbp_basic() {
        assert_eq!(sum_by_parts(&[0.0; 20], 0, 0.5, AbelMode::Limit).unwrap(), 0.0);
        let b: Vec<f64> = (0..50).map(|j| 1.0 / (1.0 + j as f64).powi(3)).collect();
        for m in 0..=4 {
            let d = alternating_direct(&b, m, 0.8);
            let e = sum_by_parts(&b, m, 0.8, AbelMode::Exact).unwrap();
            assert!((d - e).abs() < 1e-10 * d.abs().max(1.0));
        }
        let flat = vec![1.0; 20];
        assert!(matches!(sum_by_parts(&flat, 0, 0.5, AbelMode::Limit), Err(Error::NonDecaying { .. })));
    }

    #[test]
    fn sbp_limit_beats_truncation() {
        // b_j = 1/((2j−1)(2j+3)): compare N = 2048 against a long reference.
        let coef = |j: usize| 1.0 / ((2.0 * j as f64 - 1.0) * (2.0 * j as f64 + 3.0));
        let long: Vec<f64> = (0..=(1 << 17)).map(coef).collect();
        let short = &long[..=2048];
        for phi in [0.05, 0.3, 1.0, 1.45] {
            let reference = sum_by_parts(&long, 0, phi, AbelMode::Limit).unwrap();
            let direct = alternating_direct(short, 0, phi);
            let abel = sum_by_parts(short, 0, phi, AbelMode::Limit).unwrap();
            assert!((abel - reference).abs() < (direct - reference).abs(), "phi={phi}");
            assert!((abel - reference).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn parity_symmetry(k in 0u32..60, phi in 0.0f64..PI) {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((zonal(k, PI - phi) - s * zonal(k, phi)).abs() < 1e-11 * (k as f64 + 1.0));
        }

        #[test]
        fn sbp_exact_equals_direct(
            b in proptest::collection::vec(-1.0f64..1.0, 1..40),
            m in 0u32..=4,
            phi in 0.05f64..1.5,
        ) {
            let b: Vec<f64> = b.iter().enumerate().map(|(j, v)| v / (1.0 + j as f64).powi(2)).collect();
            if check_decay(&b).is_ok() {
                let d = alternating_direct(&b, m, phi);
                let e = sum_by_parts(&b, m, phi, AbelMode::Exact).unwrap();
                let scale = 40f64.powi(m as i32 + 1);
                prop_assert!((d - e).abs() < 1e-12 * scale);
            }
        }
    }
}
