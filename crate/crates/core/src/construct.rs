//! Construction of solutions: the explicit series `u₁` and `ω₁`, the full-ball
//! solver, the pullback of flat-face data through `Λ`, and assembly of
//! `ω = ω₁ + v₁ + v₂`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{series_from_terms, BasisTerm, Family};
use crate::conformal::{compose_all, ConfElement, TransformSpec};
use crate::error::{Error, Result};
use crate::expr::{DataExpression, Var};
use crate::fd::{FdScheme, Side};
use crate::field::Field;
use crate::geometry::Point4;
use crate::harmonics::{zonal, HemisphereRule};
use crate::ops::{self, Face};
use crate::series::{Monomial, Tail, ZonalSeries};

/// Default truncation of the `ω₁` series.
pub const DEFAULT_TERMS: u32 = 4096;

/// Coefficient of `(j+1−jρ²)ρ^{2j} f_{2j}` in `8u₁`.
fn u1_coefficient(j: u32) -> f64 {
    let j = j as f64;
    let sign = if (j as u64) % 2 == 0 { 1.0 } else { -1.0 };
    6.0 * sign / (j * (j + 1.0) * (2.0 * j - 1.0) * (2.0 * j + 1.0) * (2.0 * j + 3.0))
}

fn u1_monomials(n_terms: u32, scale: f64) -> Vec<Monomial> {
    let mut v = vec![Monomial { k: 1, n: 1, c: scale * FRAC_PI_2 / 8.0 }];
    for j in 1..=n_terms {
        let a = scale * u1_coefficient(j) / 8.0;
        let jf = j as f64;
        v.push(Monomial { k: 2 * j, n: 2 * j, c: a * (jf + 1.0) });
        v.push(Monomial { k: 2 * j, n: 2 * j + 2, c: -a * jf });
    }
    v
}

/// `u₁ = (1/8)[ρ cos φ + 6 Σ_j (−1)^j (j+1−jρ²)ρ^{2j} f_{2j} / (j(j+1)(2j−1)(2j+1)(2j+3))]`.
pub fn u1_series(n_terms: u32) -> Result<ZonalSeries> {
    if n_terms == 0 {
        return Err(Error::InvalidArgument("N_terms must be at least 1".into()));
    }
    ZonalSeries::new(u1_monomials(n_terms, 1.0), Tail::Truncated)
}

/// `u₀ = u₁ − (π/32) F_{1,2}`.
pub fn u0_series(n_terms: u32) -> Result<ZonalSeries> {
    let f12 = series_from_terms(&[(BasisTerm::new(1, Family::Two), -PI / 32.0)], Tail::Finite);
    Ok(u1_series(n_terms)?.add(&f12))
}

pub fn build_u1(n_terms: u32) -> Result<Field> {
    Ok(Field::series(u1_series(n_terms)?))
}

/// Value of the truncated `u₁` on the corner sphere.
pub fn u1_corner_value(n_terms: u32) -> f64 {
    // f_{2j}(π/2) = (−1)^j / π and the radial factor is 1 at ρ = 1
    let terms: Vec<f64> = (1..=n_terms)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            u1_coefficient(j) * s / (8.0 * PI)
        })
        .collect();
    crate::geometry::pairwise_sum(&terms)
}

/// `ω₁ = −2π u₁ + C`, with the constant `C` chosen so that `ω₁` vanishes on
/// the corner sphere.
pub fn omega1_series(n_terms: u32) -> Result<ZonalSeries> {
    let base = u1_series(n_terms)?.scale(-2.0 * PI);
    let c = 2.0 * PI * u1_corner_value(n_terms);
    Ok(base.add(&ZonalSeries::constant(c)))
}

pub fn build_omega1(n_terms: u32) -> Result<Field> {
    Ok(Field::series(omega1_series(n_terms)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Zonal data `Σ c_i f_{k_i}` of one parity: `coeffs[i]` multiplies
/// `f_{2i}` (even) or `f_{2i+1}` (odd).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZonalData {
    pub parity: Parity,
    pub coeffs: Vec<f64>,
}

impl ZonalData {
    pub fn even(coeffs: Vec<f64>) -> Self {
        ZonalData { parity: Parity::Even, coeffs }
    }

    pub fn index(&self, i: usize) -> u32 {
        match self.parity {
            Parity::Even => 2 * i as u32,
            Parity::Odd => 2 * i as u32 + 1,
        }
    }

    /// Builds data from `(k, c)` pairs, rejecting mixed parity.
    pub fn from_pairs(pairs: &[(u32, f64)]) -> Result<Self> {
        let parity = match pairs.iter().find(|(_, c)| *c != 0.0) {
            None => Parity::Even,
            Some((k, _)) if k % 2 == 0 => Parity::Even,
            Some(_) => Parity::Odd,
        };
        let mut coeffs = Vec::new();
        for &(k, c) in pairs {
            if c == 0.0 {
                continue;
            }
            let this = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
            if this != parity {
                return Err(Error::InvalidArgument("mixed parity zonal data".into()));
            }
            let i = (k / 2) as usize;
            if coeffs.len() <= i {
                coeffs.resize(i + 1, 0.0);
            }
            coeffs[i] += c;
        }
        Ok(ZonalData { parity, coeffs })
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(i, c)| c * zonal(self.index(i), phi)).sum()
    }

    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

/// Biharmonic `u` on the unit ball with `u = 0` and inward normal derivative
/// equal to the data on the sphere: `u = −½ Σ c_k (ρ²−1) ρ^k f_k`.
pub fn solve_fullball(data: &ZonalData) -> ZonalSeries {
    let terms: Vec<(BasisTerm, f64)> = data
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| (BasisTerm::new(data.index(i), Family::Two), -0.5 * c))
        .collect();
    series_from_terms(&terms, Tail::Finite)
}

/// Mode cap for extracted data.
pub const MODE_CAP: usize = 128;
/// Quadrature nodes for coefficient extraction.
pub const EXTRACTION_NODES: usize = 256;
/// Coefficients below this, relative to the largest one when that exceeds 1,
/// are dropped.
pub const DROP_BELOW: f64 = 1e-14;
/// Largest admissible relative L² mass above the cap.
pub const TAIL_TOL: f64 = 1e-10;

/// Even zonal coefficients of the even reflection of `d`, a function on the
/// upper hemisphere. Returns the data and the relative tail mass.
pub fn extract_even<F>(d: F) -> Result<(ZonalData, f64)>
where
    F: Fn(f64) -> f64 + Sync,
{
    use rayon::prelude::*;
    let rule = HemisphereRule::new(EXTRACTION_NODES);
    let vals: Vec<f64> = rule.nodes.iter().map(|phi| d(*phi)).collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node: Point4::zonal(1.0, rule.nodes[i]).cartesian(), value: vals[i] });
    }
    let norm2: f64 = crate::geometry::pairwise_sum(
        &vals.iter().zip(&rule.weights).map(|(v, w)| v * v * w).collect::<Vec<_>>(),
    );
    let mut coeffs: Vec<f64> = (0..MODE_CAP)
        .into_par_iter()
        .map(|j| {
            let terms: Vec<f64> = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&vals)
                .map(|((phi, w), v)| w * v * zonal(2 * j as u32, *phi))
                .collect();
            crate::geometry::pairwise_sum(&terms)
        })
        .collect();
    let captured: f64 = coeffs.iter().map(|c| c * c).sum();
    let tail = if norm2 > 1e-28 { ((norm2 - captured) / norm2).max(0.0) } else { 0.0 };
    if tail > TAIL_TOL {
        return Err(Error::TailMass(tail));
    }
    let scale = coeffs.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    for c in coeffs.iter_mut() {
        if c.abs() < DROP_BELOW * scale {
            *c = 0.0;
        }
    }
    while coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    Ok((ZonalData::even(coeffs), tail))
}

/// Natural cubic spline through tabulated samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(Error::InvalidArgument("a table needs at least 3 matching samples".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("table abscissae must increase".into()));
        }
        // second derivatives m with m_0 = m_{n−1} = 0
        let mut a = vec![0.0; n];
        let mut b = vec![1.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            r[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = r[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
        }
        Ok(Spline { xs, ys, m })
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (t0, t1) = (x1 - x, x - x0);
        self.m[i] * t0.powi(3) / (6.0 * h)
            + self.m[i + 1] * t1.powi(3) / (6.0 * h)
            + (self.ys[i] / h - self.m[i] * h / 6.0) * t0
            + (self.ys[i + 1] / h - self.m[i + 1] * h / 6.0) * t1
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (t0, t1) = (x1 - x, x - x0);
        -self.m[i] * t0 * t0 / (2.0 * h) + self.m[i + 1] * t1 * t1 / (2.0 * h)
            - (self.ys[i] / h - self.m[i] * h / 6.0)
            + (self.ys[i + 1] / h - self.m[i + 1] * h / 6.0)
    }
}

/// An axisymmetric boundary profile.
#[derive(Clone)]
pub enum Profile {
    Expression(DataExpression),
    Table(Spline),
    Closed { name: Arc<str>, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Profile({})", self.describe())
    }
}

impl Profile {
    pub fn expression(src: &str, var: Var) -> Result<Self> {
        Ok(Profile::Expression(DataExpression::parse(src, var)?))
    }

    pub fn closed<F: Fn(f64) -> f64 + Send + Sync + 'static>(name: &str, f: F) -> Self {
        Profile::Closed { name: Arc::from(name), f: Arc::new(f) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Expression(e) => e.eval(x),
            Profile::Table(s) => s.eval(x),
            Profile::Closed { f, .. } => f(x),
        }
    }

    /// Derivative at `x`; `side` says where the profile may be sampled.
    pub fn derivative(&self, x: f64, side: Side) -> f64 {
        if let Profile::Table(s) = self {
            return s.derivative(x);
        }
        let fd = FdScheme { h: 1e-3, interior_order: 4, boundary_order: 4, ..FdScheme::default() };
        let central = fd.derivative(|s| Ok(self.eval(x + s)), 1, Side::Central, 1e-3);
        match central {
            Ok(v) if v.is_finite() => v,
            _ => fd.derivative(|s| Ok(self.eval(x + s)), 1, side, 1e-3).unwrap_or(f64::NAN),
        }
    }

    /// Tolerance for the corner constraint on this kind of data.
    pub fn constraint_tolerance(&self) -> f64 {
        match self {
            Profile::Table(_) => 1e-4,
            _ => 1e-8,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Profile::Expression(e) => e.source().to_string(),
            Profile::Table(_) => "table".to_string(),
            Profile::Closed { name, .. } => name.to_string(),
        }
    }
}

/// Neumann data `ψ(φ)` on the round face and `φ_N(ρ)` on the flat face.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub psi: Profile,
    pub phi_n: Profile,
}

/// The two corner scalars of the data, both to be compared with `π/4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataConstraints {
    /// `ν_M ψ = −ψ′(π/2)`.
    pub nu_m_psi: f64,
    /// `ν_N φ_N − φ_N = −φ_N′(1) − φ_N(1)`.
    pub nu_n_phi_minus_phi: f64,
    pub tol_m: f64,
    pub tol_n: f64,
}

impl DataConstraints {
    pub fn ok(&self) -> bool {
        (self.nu_m_psi - FRAC_PI_4).abs() <= self.tol_m
            && (self.nu_n_phi_minus_phi - FRAC_PI_4).abs() <= self.tol_n
    }
}

impl BoundaryData {
    pub fn from_expressions(psi: &str, phi_n: &str) -> Result<Self> {
        Ok(BoundaryData {
            psi: Profile::expression(psi, Var::Phi)?,
            phi_n: Profile::expression(phi_n, Var::R)?,
        })
    }

    pub fn measure_constraints(&self) -> DataConstraints {
        let nu_m_psi = -self.psi.derivative(FRAC_PI_2, Side::Backward);
        let nu_n = -self.phi_n.derivative(1.0, Side::Backward) - self.phi_n.eval(1.0);
        DataConstraints {
            nu_m_psi,
            nu_n_phi_minus_phi: nu_n,
            tol_m: self.psi.constraint_tolerance(),
            tol_n: self.phi_n.constraint_tolerance(),
        }
    }

    pub fn check_constraints(&self) -> Result<DataConstraints> {
        let c = self.measure_constraints();
        if (c.nu_m_psi - FRAC_PI_4).abs() > c.tol_m || !c.nu_m_psi.is_finite() {
            return Err(Error::Constraint { name: "nu_M(psi)", measured: c.nu_m_psi, expected: FRAC_PI_4 });
        }
        if (c.nu_n_phi_minus_phi - FRAC_PI_4).abs() > c.tol_n || !c.nu_n_phi_minus_phi.is_finite() {
            return Err(Error::Constraint {
                name: "nu_N(phi_N) - phi_N",
                measured: c.nu_n_phi_minus_phi,
                expected: FRAC_PI_4,
            });
        }
        Ok(c)
    }
}

/// The pulled-back flat-face data on the upper hemisphere:
/// `φ̂(φ) = (φ_N(tan(φ/2)) + π/4) / (1 + cos φ)`.
pub fn pullback_n_data(phi_n: &Profile) -> impl Fn(f64) -> f64 + Sync + '_ {
    move |phi: f64| {
        let r = (phi / 2.0).tan().min(1.0);
        (phi_n.eval(r) + FRAC_PI_4) / (1.0 + phi.cos())
    }
}

/// Checks that the pulled-back data has vanishing derivative at the equator,
/// which makes its even reflection `C^{2,1}`.
pub fn pullback_n_coefficients(phi_n: &Profile) -> Result<(ZonalData, f64)> {
    let d = pullback_n_data(phi_n);
    let fd = FdScheme { h: 1e-3, boundary_order: 4, ..FdScheme::default() };
    let slope = fd.derivative(|s| Ok(d(FRAC_PI_2 + s)), 1, Side::Backward, 1e-3)?;
    let tol = 10.0 * phi_n.constraint_tolerance();
    if slope.abs() > tol {
        return Err(Error::Constraint { name: "nu_M(pullback of phi_N)", measured: slope, expected: 0.0 });
    }
    extract_even(pullback_n_data(phi_n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataRecord {
    pub psi: String,
    #[serde(rename = "phiN")]
    pub phi_n: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub constraint: f64,
    pub mode_cap: usize,
    pub tail: f64,
    pub drop_below: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { constraint: 1e-8, mode_cap: MODE_CAP, tail: TAIL_TOL, drop_below: DROP_BELOW }
    }
}

/// Diagnostics recorded at build time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionChecks {
    pub data: DataConstraints,
    pub tail_v1: f64,
    pub tail_v2: f64,
    /// `sup |μ_M ω − ψ|` on a φ grid.
    pub mu_m_residual: f64,
    /// `sup |μ_N ω − φ_N|` on a ρ grid.
    pub mu_n_residual: f64,
    /// `ω` at a corner point.
    pub sigma_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub omega1_terms: u32,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub data: DataRecord,
    pub tolerances: Tolerances,
    #[serde(default)]
    pub transforms: Vec<TransformSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<SolutionChecks>,
}

impl Solution {
    /// The zero field, as a stub for testing verification.
    pub fn zero() -> Self {
        Solution {
            omega1_terms: 0,
            v1: Vec::new(),
            v2: Vec::new(),
            data: DataRecord { psi: "0".into(), phi_n: "0".into() },
            tolerances: Tolerances::default(),
            transforms: Vec::new(),
            checks: None,
        }
    }

    /// `ω` before any transforms. `omega1_terms = 0` leaves out `ω₁`.
    pub fn base_field(&self) -> Result<Field> {
        let mut parts = Vec::new();
        if self.omega1_terms > 0 {
            parts.push((1.0, build_omega1(self.omega1_terms)?));
        }
        let v1 = solve_fullball(&ZonalData::even(self.v1.clone()));
        if !v1.is_zero() {
            parts.push((1.0, Field::pullback(Field::series(v1), ConfElement::lambda())));
        }
        let v2 = solve_fullball(&ZonalData::even(self.v2.clone()));
        if !v2.is_zero() {
            parts.push((1.0, Field::series(v2)));
        }
        Ok(match parts.len() {
            0 => Field::zero(),
            1 => parts.pop().map(|(_, f)| f).expect("one part"),
            _ => Field::sum(parts),
        })
    }

    pub fn element(&self) -> Result<ConfElement> {
        compose_all(&self.transforms)
    }

    pub fn field(&self) -> Result<Field> {
        let base = self.base_field()?;
        let e = self.element()?;
        if e.is_identity() {
            return Ok(base);
        }
        Ok(Field::acted(base, e))
    }

    pub fn with_transform(&self, t: TransformSpec) -> Solution {
        let mut s = self.clone();
        s.transforms.push(t);
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))
    }
}

/// Runs the full construction for the given data.
pub fn build_solution(data: &BoundaryData, n_terms: u32) -> Result<Solution> {
    let constraints = data.check_constraints()?;
    if n_terms == 0 {
        return Err(Error::InvalidArgument("N_terms must be at least 1".into()));
    }
    let (v1, tail_v1) = pullback_n_coefficients(&data.phi_n)?;
    let v1_hat = solve_fullball(&v1);
    // μ_M(v̂₁ ∘ Λ)(q) = Ω(q) · (μ_N v̂₁)(Λq); v̂₁ is even so this vanishes.
    let mu_m_v1 = |phi: f64| -> f64 {
        let q = Point4::zonal(1.0, phi).cartesian();
        let img = crate::conformal::lambda_map(q);
        let rho = crate::geometry::norm(img);
        if rho <= 0.0 {
            return 0.0;
        }
        crate::conformal::conformal_factor_lambda(q) * v1_hat.mu_n(rho)
    };
    let psi = &data.psi;
    let d2 = |phi: f64| psi.eval(phi) - FRAC_PI_4 * phi.cos() - mu_m_v1(phi);
    let (v2, tail_v2) = extract_even(d2)?;

    let mut sol = Solution {
        omega1_terms: n_terms,
        v1: v1.coeffs,
        v2: v2.coeffs,
        data: DataRecord { psi: data.psi.describe(), phi_n: data.phi_n.describe() },
        tolerances: Tolerances { constraint: constraints.tol_m.max(constraints.tol_n), ..Tolerances::default() },
        transforms: Vec::new(),
        checks: None,
    };
    let omega = sol.field()?;
    let fd = FdScheme::default();
    let mut mu_m_res = 0.0f64;
    for i in 0..=32 {
        let phi = 0.05 + (FRAC_PI_2 - 0.1) * i as f64 / 32.0;
        let p = Point4::zonal(1.0, phi);
        let v = ops::apply_mu(Face::M, &omega, &p, &fd)?;
        mu_m_res = mu_m_res.max((v - data.psi.eval(phi)).abs());
    }
    let mut mu_n_res = 0.0f64;
    for i in 0..=32 {
        let rho = 0.05 + 0.9 * i as f64 / 32.0;
        let p = Point4::zonal(rho, FRAC_PI_2);
        let v = ops::apply_mu(Face::N, &omega, &p, &fd)?;
        mu_n_res = mu_n_res.max((v - data.phi_n.eval(rho)).abs());
    }
    let sigma_value = omega.value(&Point4::zonal(1.0, FRAC_PI_2));
    sol.checks = Some(SolutionChecks {
        data: constraints,
        tail_v1,
        tail_v2,
        mu_m_residual: mu_m_res,
        mu_n_residual: mu_n_res,
        sigma_value,
    });
    Ok(sol)
}

/// The two corner scalars `ν_M μ_M ω` and `ν_N μ_N ω − μ_N ω`, both equal
/// to `π/4` for solutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerConstraints {
    pub nu_mu_m: f64,
    pub nu_mu_n_minus_mu_n: f64,
}

/// Evaluates the corner scalars at a corner point.
pub fn check_corner_constraints(omega: &Field, p: &Point4, fd: &FdScheme) -> Result<CornerConstraints> {
    if let Some(s) = omega.as_series() {
        let mixed = s.partial(1.0, FRAC_PI_2, 1, 1);
        // ν_N μ_N ω − μ_N ω = (∂_ρφ ω − ∂_φ ω) + ∂_φ ω at the corner
        let nu_n_mu_n = mixed - s.partial(1.0, FRAC_PI_2, 0, 1);
        let mu_n = -s.partial(1.0, FRAC_PI_2, 0, 1);
        return Ok(CornerConstraints { nu_mu_m: mixed, nu_mu_n_minus_mu_n: nu_n_mu_n - mu_n });
    }
    if !p.on_sigma(1e-9) {
        return Err(Error::InvalidArgument("corner constraints need a corner point".into()));
    }
    let c = p.cartesian();
    let x = crate::geometry::norm([c[0], c[1], c[2], 0.0]);
    let x = [c[0] / x, c[1] / x, c[2] / x, 0.0];
    let ext = omega.extends_beyond_domain();
    let (ts, rs) = if ext { (Side::Central, Side::Central) } else { (Side::Forward, Side::Backward) };
    let chart = |rho: f64, t: f64| {
        let (s, co) = t.sin_cos();
        [rho * co * x[0], rho * co * x[1], rho * co * x[2], rho * s]
    };
    let g = |rho: f64, t: f64| -> Result<f64> {
        let q = chart(rho, t);
        if !ext && !crate::geometry::in_half_ball(q, 1e-10) {
            return Err(Error::StencilOutside(q));
        }
        Ok(omega.value_cart(q))
    };
    // ν_M μ_M ω: t-derivative of μ_M ω = −∂_ρ G along the round face.
    let mu_m = |t: f64| -> Result<f64> { Ok(-fd.derivative(|r| g(1.0 + r, t), 1, rs, fd.h)?) };
    let nu_mu_m = fd.derivative(mu_m, 1, ts, fd.h)?;
    // μ_N ω(ρ) = ρ⁻¹ ∂_t G(ρ, 0); ν_N = −∂_ρ at ρ = 1.
    let mu_n = |r: f64| -> Result<f64> {
        let rho = 1.0 + r;
        Ok(fd.derivative(|t| g(rho, t), 1, ts, fd.h)? / rho)
    };
    let nu_mu_n = -fd.derivative(mu_n, 1, rs, fd.h)?;
    Ok(CornerConstraints { nu_mu_m, nu_mu_n_minus_mu_n: nu_mu_n - mu_n(0.0)? })
}
