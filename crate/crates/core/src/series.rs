//! Axisymmetric polynomial fields `Σ c ρ^n f_k(φ)` with exact operator calculus.
//!
//! Every monomial keeps `n ≥ k` and `n − k` even, so each one is a polynomial
//! in Cartesian coordinates (`ρ^k f_k` is a harmonic polynomial). The flat
//! Laplacian then acts as `Δ(ρ^n f_k) = (n(n+2) − k(k+2)) ρ^{n−2} f_k` and all
//! boundary operators reduce to coefficient arithmetic.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{abel_from_partial_sums, hemisphere_moment, zonal_deriv, zonal_derivs_into, AbelMode};

/// `c ρ^n f_k(φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub k: u32,
    pub n: u32,
    pub c: f64,
}

/// Whether a series is a truncation of an infinite expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tail {
    /// The field is exactly this finite sum.
    Finite,
    /// The field is the limit of the series; evaluation near the edges may
    /// estimate that limit by summation by parts.
    Truncated,
}

/// How the even part of a series is summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Summation {
    Direct,
    /// Abel-transformed limit estimate wherever the series is a truncation.
    Limit,
    /// `Limit` in the edge zones (`ρ > 0.9`, `φ` within 0.1 of a pole or of
    /// the equator) except right at the corner; `Direct` elsewhere.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SeriesRepr", into = "SeriesRepr")]
pub struct ZonalSeries {
    monos: Vec<Monomial>,
    tail: Tail,
    summation: Summation,
    kmax: u32,
    nmax: u32,
}

#[derive(Clone, Serialize, Deserialize)]
struct SeriesRepr {
    monos: Vec<Monomial>,
    tail: Tail,
    summation: Summation,
}

impl From<SeriesRepr> for ZonalSeries {
    fn from(r: SeriesRepr) -> Self {
        Self::normalized(r.monos, r.tail).with_summation(r.summation)
    }
}

impl From<ZonalSeries> for SeriesRepr {
    fn from(s: ZonalSeries) -> Self {
        SeriesRepr { monos: s.monos, tail: s.tail, summation: s.summation }
    }
}

fn falling(n: u32, a: u32) -> f64 {
    (0..a).map(|i| n as f64 - i as f64).product()
}

fn flushed(x: f64) -> f64 {
    if x.abs() < 1e-200 {
        0.0
    } else {
        x
    }
}

fn kk(k: u32) -> f64 {
    let k = k as f64;
    k * (k + 2.0)
}

impl ZonalSeries {
    pub fn new(monos: Vec<Monomial>, tail: Tail) -> Result<Self> {
        for m in &monos {
            if m.n < m.k || (m.n - m.k) % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "monomial rho^{} f_{} is not a polynomial",
                    m.n, m.k
                )));
            }
            if !m.c.is_finite() {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
        }
        Ok(Self::normalized(monos, tail))
    }

    fn normalized(mut monos: Vec<Monomial>, tail: Tail) -> Self {
        monos.sort_by_key(|m| (m.k, m.n));
        let mut out: Vec<Monomial> = Vec::with_capacity(monos.len());
        for m in monos {
            match out.last_mut() {
                Some(last) if last.k == m.k && last.n == m.n => last.c += m.c,
                _ => out.push(m),
            }
        }
        out.retain(|m| m.c != 0.0);
        let kmax = out.iter().map(|m| m.k).max().unwrap_or(0);
        let nmax = out.iter().map(|m| m.n).max().unwrap_or(0);
        ZonalSeries { monos: out, tail, summation: Summation::Auto, kmax, nmax }
    }

    pub fn zero() -> Self {
        Self::normalized(Vec::new(), Tail::Finite)
    }

    pub fn constant(c: f64) -> Self {
        Self::normalized(vec![Monomial { k: 0, n: 0, c: c * PI }], Tail::Finite)
    }

    pub fn with_summation(mut self, s: Summation) -> Self {
        self.summation = s;
        self
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monos
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn summation(&self) -> Summation {
        self.summation
    }

    pub fn is_zero(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn kmax(&self) -> u32 {
        self.kmax
    }

    pub fn nmax(&self) -> u32 {
        self.nmax
    }

    /// Sum of absolute coefficients.
    pub fn coefficient_mass(&self) -> f64 {
        self.monos.iter().map(|m| m.c.abs()).sum()
    }

    pub fn add(&self, other: &ZonalSeries) -> ZonalSeries {
        let mut v = self.monos.clone();
        v.extend_from_slice(&other.monos);
        let tail = if self.tail == Tail::Truncated || other.tail == Tail::Truncated {
            Tail::Truncated
        } else {
            Tail::Finite
        };
        Self::normalized(v, tail).with_summation(self.summation)
    }

    pub fn scale(&self, s: f64) -> ZonalSeries {
        let v = self.monos.iter().map(|m| Monomial { c: m.c * s, ..*m }).collect();
        Self::normalized(v, self.tail).with_summation(self.summation)
    }

    /// Flat Laplacian on R⁴.
    pub fn laplacian(&self) -> ZonalSeries {
        let v = self
            .monos
            .iter()
            .filter_map(|m| {
                let f = kk(m.n) - kk(m.k);
                (f != 0.0).then(|| Monomial { k: m.k, n: m.n - 2, c: m.c * f })
            })
            .collect();
        Self::normalized(v, self.tail).with_summation(self.summation)
    }

    /// Laplacian of the round 3-sphere applied on each sphere `ρ = const`.
    pub fn sphere_laplacian(&self) -> ZonalSeries {
        let v = self.monos.iter().map(|m| Monomial { c: -m.c * kk(m.k), ..*m }).collect();
        Self::normalized(v, self.tail).with_summation(self.summation)
    }

    /// True when every term is even under `φ ↦ π − φ`.
    pub fn is_even(&self) -> bool {
        self.monos.iter().all(|m| m.k % 2 == 0)
    }

    fn uses_limit(&self, rho: f64, phi: f64) -> bool {
        if self.tail != Tail::Truncated {
            return false;
        }
        let near_corner = {
            let n_even = (self.kmax() / 2) as f64;
            (n_even + 1.0) * phi.cos().abs() < 4.0
        };
        match self.summation {
            Summation::Direct => false,
            Summation::Limit => !near_corner,
            Summation::Auto => {
                let edge = rho > 0.9
                    || phi < 0.1
                    || (phi - FRAC_PI_2).abs() < 0.1
                    || phi > PI - 0.1;
                edge && !near_corner
            }
        }
    }

    /// `Σ_k C_k ∂^m f_k(φ)` with the summation policy of this series.
    fn zonal_sum(&self, coeffs: &[f64], phi: f64, m: u32, limit: bool) -> f64 {
        if coeffs.is_empty() {
            return 0.0;
        }
        let at_equator = (phi - FRAC_PI_2).abs() < 1e-15;
        let mut d = vec![0.0; coeffs.len()];
        zonal_derivs_into(phi, m, &mut d);
        let mut odd = Vec::with_capacity(coeffs.len() / 2 + 1);
        let mut k = 1;
        while k < coeffs.len() {
            if !(at_equator && m % 2 == 0) {
                odd.push(coeffs[k] * d[k]);
            }
            k += 2;
        }
        let odd_sum = crate::geometry::pairwise_sum(&odd);
        if at_equator && m % 2 == 1 {
            return odd_sum;
        }
        let n_even = (coeffs.len() - 1) / 2;
        let even_sum = if limit && n_even >= 1 {
            let mut b = Vec::with_capacity(n_even + 1);
            let mut a = Vec::with_capacity(n_even + 1);
            let mut acc = 0.0;
            for j in 0..=n_even {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                b.push(sign * coeffs[2 * j]);
                acc += sign * PI * d[2 * j];
                a.push(acc);
            }
            abel_from_partial_sums(&b, &a, AbelMode::Limit)
        } else {
            let terms: Vec<f64> = (0..=n_even).map(|j| coeffs[2 * j] * d[2 * j]).collect();
            crate::geometry::pairwise_sum(&terms)
        };
        odd_sum + even_sum
    }

    /// `C_k(ρ) = Σ_n c [n]_a ρ^{n−a}`, the coefficient of `f_k` in `∂_ρ^a`.
    fn radial_coeffs(&self, rho: f64, a: u32) -> Vec<f64> {
        let len = self.nmax() as usize + 1;
        let mut pow = Vec::with_capacity(len);
        let mut acc = 1.0;
        while pow.len() < len && acc != 0.0 {
            pow.push(acc);
            // subnormal arithmetic is very slow and contributes nothing here
            acc = flushed(acc * rho);
        }
        pow.resize(len, 0.0);
        self.coeffs_by(|m| {
            if m.n < a {
                0.0
            } else {
                m.c * falling(m.n, a) * pow[(m.n - a) as usize]
            }
        })
    }

    fn coeffs_by<F: Fn(&Monomial) -> f64>(&self, f: F) -> Vec<f64> {
        if self.monos.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0.0; self.kmax() as usize + 1];
        for m in &self.monos {
            out[m.k as usize] += f(m);
        }
        out
    }

    /// `∂_ρ^a ∂_φ^b` of the field at `(ρ, φ)`, for `a, b ≤ 4`.
    pub fn partial(&self, rho: f64, phi: f64, a: u32, b: u32) -> f64 {
        let mut c = self.radial_coeffs(rho, a);
        let limit = self.uses_limit(rho, phi);
        if !limit {
            while c.last() == Some(&0.0) {
                c.pop();
            }
        }
        self.zonal_sum(&c, phi, b, limit)
    }

    pub fn value(&self, rho: f64, phi: f64) -> f64 {
        self.partial(rho, phi, 0, 0)
    }

    /// Value at an arbitrary Cartesian point of the full ball.
    pub fn value_cart(&self, c: [f64; 4]) -> f64 {
        let s = crate::geometry::cart_to_sph_unchecked(c);
        self.value(s.rho, s.phi)
    }

    /// Inward normal derivative on the round face, `−∂_ρ` at `ρ = 1`.
    pub fn mu_m(&self, phi: f64) -> f64 {
        -self.partial(1.0, phi, 1, 0)
    }

    /// Inward normal derivative on the flat face, `−ρ⁻¹ ∂_φ` at `φ = π/2`.
    pub fn mu_n(&self, rho: f64) -> f64 {
        let c = self.coeffs_by(|m| -m.c * flushed(rho.powi(m.n as i32 - 1)));
        self.zonal_sum(&c, FRAC_PI_2, 1, false)
    }

    /// Third-order boundary operator on the round face at `ρ = 1`.
    pub fn p3m(&self, phi: f64) -> f64 {
        let c = self.coeffs_by(|m| {
            let n = m.n as f64;
            m.c * (-0.5 * (n - 2.0) * (kk(m.n) - kk(m.k)) + (n + 1.0) * kk(m.k))
        });
        self.zonal_sum(&c, phi, 0, self.uses_limit(1.0, phi))
    }

    /// Third-order boundary operator on the flat face at radius `ρ > 0`.
    pub fn p3n(&self, rho: f64) -> f64 {
        let c = self.coeffs_by(|m| {
            let n = m.n as f64;
            let f = 0.5 * (kk(m.n) - kk(m.k)) + n * (n - 1.0);
            if f == 0.0 {
                0.0
            } else {
                -m.c * f * flushed(rho.powi(m.n as i32 - 3))
            }
        });
        self.zonal_sum(&c, FRAC_PI_2, 1, false)
    }

    /// Corner operator at any point of the corner sphere; for axisymmetric
    /// fields it reduces to `2 ∂_ρ ∂_φ` at `(1, π/2)`.
    pub fn p2(&self) -> f64 {
        2.0 * self.partial(1.0, FRAC_PI_2, 1, 1)
    }

    /// `−∂_φ` at the corner.
    pub fn nu_m(&self) -> f64 {
        -self.partial(1.0, FRAC_PI_2, 0, 1)
    }

    /// `−∂_ρ` at the corner.
    pub fn nu_n(&self) -> f64 {
        -self.partial(1.0, FRAC_PI_2, 1, 0)
    }

    /// Exact integrals of the operators over the half-ball, its faces and
    /// its corner, with the flat measures.
    pub fn operator_integrals(&self) -> OperatorIntegrals {
        let area = 4.0 * PI;
        let mut interior = Vec::new();
        for m in self.laplacian().laplacian().monos {
            interior.push(area * m.c * hemisphere_moment(m.k) / (m.n + 4) as f64);
        }
        let mut face_m = Vec::new();
        let mut face_n = Vec::new();
        for m in &self.monos {
            let n = m.n as f64;
            let c3m = m.c * (-0.5 * (n - 2.0) * (kk(m.n) - kk(m.k)) + (n + 1.0) * kk(m.k));
            face_m.push(area * c3m * hemisphere_moment(m.k));
            let f = 0.5 * (kk(m.n) - kk(m.k)) + n * (n - 1.0);
            if f != 0.0 {
                // ∫₀¹ ρ^{n−3} ρ² dρ = 1/n
                face_n.push(-area * m.c * f * zonal_deriv(m.k, FRAC_PI_2, 1) / n);
            }
        }
        OperatorIntegrals {
            interior_p4: crate::geometry::pairwise_sum(&interior),
            face_m_p3: crate::geometry::pairwise_sum(&face_m),
            face_n_p3: crate::geometry::pairwise_sum(&face_n),
            corner_p2: area * self.p2(),
        }
    }

    /// `Δ²` at `(ρ, φ)`.
    pub fn p4(&self, rho: f64, phi: f64) -> f64 {
        self.laplacian().laplacian().value(rho, phi)
    }
}

/// `∫_X P₄f`, `∫_M P₃ᴹf`, `∫_N P₃ᴺf` and `∮_Σ P₂f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorIntegrals {
    pub interior_p4: f64,
    pub face_m_p3: f64,
    pub face_n_p3: f64,
    pub corner_p2: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::zonal;

    fn rho_cos_phi() -> ZonalSeries {
        ZonalSeries::new(vec![Monomial { k: 1, n: 1, c: PI / 2.0 }], Tail::Finite).unwrap()
    }

    #[test]
    fn rejects_non_polynomial() {
        assert!(ZonalSeries::new(vec![Monomial { k: 2, n: 1, c: 1.0 }], Tail::Finite).is_err());
        assert!(ZonalSeries::new(vec![Monomial { k: 2, n: 3, c: 1.0 }], Tail::Finite).is_err());
    }

    #[test]
    fn constant_and_linear() {
        let c = ZonalSeries::constant(2.5);
        assert!((c.value(0.3, 1.1) - 2.5).abs() < 1e-15);
        assert_eq!(c.p3m(0.7), 0.0);
        assert_eq!(c.p2(), 0.0);
        let l = rho_cos_phi();
        assert!((l.value(0.5, 0.3) - 0.5 * 0.3f64.cos()).abs() < 1e-15);
        assert!((l.p2() + 2.0).abs() < 1e-14);
        assert!((l.mu_n(0.4) - 1.0).abs() < 1e-14);
        assert!((l.mu_m(0.8) + 0.8f64.cos()).abs() < 1e-15);
        assert!(l.laplacian().is_zero());
    }

    #[test]
    fn radial_laplacian_oracle() {
        // ρ⁴ = π ρ⁴ f₀; Δ = ∂²_ρ + (3/ρ)∂_ρ gives Δρ⁴ = 24ρ², Δ(24ρ²) = 192.
        let s = ZonalSeries::new(vec![Monomial { k: 0, n: 4, c: PI }], Tail::Finite).unwrap();
        assert!((s.laplacian().value(0.7, 0.2) - 24.0 * 0.49).abs() < 1e-13);
        assert!((s.p4(0.3, 1.0) - 192.0).abs() < 1e-12);
    }

    #[test]
    fn partials_match_direct_formula() {
        let s = ZonalSeries::new(
            vec![Monomial { k: 2, n: 4, c: 0.7 }, Monomial { k: 3, n: 3, c: -1.3 }],
            Tail::Finite,
        )
        .unwrap();
        let (r, p) = (0.6, 0.9);
        let direct = 0.7 * 12.0 * r * r * crate::harmonics::zonal_deriv(2, p, 1)
            - 1.3 * 6.0 * r * crate::harmonics::zonal_deriv(3, p, 1);
        assert!((s.partial(r, p, 2, 1) - direct).abs() < 1e-13);
        assert!((s.value(r, p) - (0.7 * r.powi(4) * zonal(2, p) - 1.3 * r.powi(3) * zonal(3, p))).abs() < 1e-14);
    }

    #[test]
    fn summation_modes_agree_on_finite_series() {
        let monos: Vec<Monomial> = (0..200u32)
            .map(|j| Monomial { k: 2 * j, n: 2 * j, c: 1.0 / (1.0 + j as f64).powi(4) })
            .collect();
        let a = ZonalSeries::new(monos.clone(), Tail::Finite).unwrap();
        let b = ZonalSeries::new(monos, Tail::Truncated).unwrap();
        for (r, p) in [(0.5, 0.5), (1.0, 0.05), (0.95, 1.0), (1.0, 1.3)] {
            let va = a.value(r, p);
            let vb = b.value(r, p);
            assert!((va - vb).abs() < 1e-6, "{r} {p}: {va} {vb}");
        }
    }
}
