//! Curvatures of the metric `e^{2ω}|dx|²` on the half-ball, residuals of the
//! boundary value problem, Gauss–Bonnet accounting and corner probes.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{check_corner_constraints, u1_series, CornerConstraints};
use crate::error::{Error, Result};
use crate::fd::{FdScheme, Side};
use crate::field::Field;
use crate::geometry::{gauss_legendre_on, in_half_ball, integrate, pairwise_sum, GridOrders, Point4, QuadratureGrid, Region};
use crate::harmonics::zonal;
use crate::ops::{self, Face};
use crate::series::OperatorIntegrals;

/// Curvature constants of the flat half-ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlatConstants {
    pub q: f64,
    pub t_m: f64,
    pub t_n: f64,
    pub h_m: f64,
    pub h_n: f64,
    pub u: f64,
    /// Gauss curvature of the corner sphere.
    pub k: f64,
    pub eta_m: f64,
    pub eta_n: f64,
    pub theta0: f64,
    pub g: f64,
    pub weyl2: f64,
    pub trace_free_l_m: f64,
    pub trace_free_l_n: f64,
    pub trace_free_ii_m: f64,
    pub trace_free_ii_n: f64,
    pub chi: f64,
}

pub const FLAT: FlatConstants = FlatConstants {
    q: 0.0,
    t_m: 2.0,
    t_n: 0.0,
    h_m: 3.0,
    h_n: 0.0,
    u: FRAC_PI_2,
    k: 1.0,
    eta_m: 0.0,
    eta_n: 2.0,
    theta0: FRAC_PI_2,
    g: 0.0,
    weyl2: 0.0,
    trace_free_l_m: 0.0,
    trace_free_l_n: 0.0,
    trace_free_ii_m: 0.0,
    trace_free_ii_n: 0.0,
    chi: 1.0,
};

/// Curvatures of `e^{2ω}|dx|²`, evaluated lazily.
#[derive(Clone, Debug)]
pub struct Curvatures {
    omega: Field,
    fd: FdScheme,
}

pub fn curvatures(omega: &Field, fd: &FdScheme) -> Curvatures {
    Curvatures { omega: omega.clone(), fd: *fd }
}

impl Curvatures {
    fn w(&self, p: &Point4) -> f64 {
        self.omega.value(p)
    }

    /// `Q̃ = e^{−4ω}(Q + P₄ω)`.
    pub fn q(&self, p: &Point4) -> Result<f64> {
        Ok((-4.0 * self.w(p)).exp() * (FLAT.q + ops::apply_p4(&self.omega, p, &self.fd)?))
    }

    /// `T̃_M = e^{−3ω}(T_M + P₃ᴹω)`.
    pub fn t_m(&self, p: &Point4) -> Result<f64> {
        Ok((-3.0 * self.w(p)).exp() * (FLAT.t_m + ops::apply_p3m(&self.omega, p, &self.fd)?))
    }

    /// `T̃_N = e^{−3ω}(T_N + P₃ᴺω)`.
    pub fn t_n(&self, p: &Point4) -> Result<f64> {
        Ok((-3.0 * self.w(p)).exp() * (FLAT.t_n + ops::apply_p3n(&self.omega, p, &self.fd)?))
    }

    /// `Ũ = e^{−2ω}(U + P₂ω)`.
    pub fn u(&self, p: &Point4) -> Result<f64> {
        Ok((-2.0 * self.w(p)).exp() * (FLAT.u + ops::apply_p2(&self.omega, p, &self.fd)?))
    }

    /// `H̃_M = e^{−ω}(H_M − 3μ_Mω)`.
    pub fn h_m(&self, p: &Point4) -> Result<f64> {
        Ok((-self.w(p)).exp() * (FLAT.h_m - 3.0 * ops::apply_mu(Face::M, &self.omega, p, &self.fd)?))
    }

    /// `H̃_N = e^{−ω}(H_N − 3μ_Nω)`.
    pub fn h_n(&self, p: &Point4) -> Result<f64> {
        Ok((-self.w(p)).exp() * (FLAT.h_n - 3.0 * ops::apply_mu(Face::N, &self.omega, p, &self.fd)?))
    }
}

/// Where and how strictly the boundary value problem is checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResidualConfig {
    /// Corner exclusion band for composite fields.
    pub delta: f64,
    pub fd: FdScheme,
    pub m_phi: [f64; 2],
    pub m_count: usize,
    pub n_rho: [f64; 2],
    pub n_count: usize,
    pub x_rho: [f64; 2],
    pub x_phi: [f64; 2],
    pub x_count: [usize; 2],
    /// `(α, θ)` directions sampled for fields without axial symmetry.
    pub directions: Vec<[f64; 2]>,
    pub tol_p4: f64,
    pub tol_p3: f64,
    pub tol_p2: f64,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        ResidualConfig {
            delta: 0.05,
            fd: FdScheme::default(),
            m_phi: [0.2, 1.35],
            m_count: 12,
            n_rho: [0.1, 0.95],
            n_count: 12,
            x_rho: [0.1, 0.9],
            x_phi: [0.1, 1.47],
            x_count: [5, 5],
            directions: vec![
                [0.0, 0.0],
                [PI, 0.0],
                [FRAC_PI_2, 0.0],
                [FRAC_PI_2, PI],
                [FRAC_PI_2, FRAC_PI_2],
                [FRAC_PI_2, 1.5 * PI],
                [1.0, 0.7],
                [2.2, 4.0],
            ],
            tol_p4: 1e-3,
            tol_p3: 5e-3,
            tol_p2: 1e-3,
        }
    }
}

fn linspace(r: [f64; 2], n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (r[0] + r[1])],
        _ => (0..n).map(|i| r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeResidual {
    pub region: String,
    pub rho: f64,
    pub phi: f64,
    pub alpha: f64,
    pub theta: f64,
    pub condition: String,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub region: String,
    pub sup: f64,
    /// Root mean square over the nodes.
    pub l2: f64,
    pub tolerance: f64,
    pub nodes: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub conditions: Vec<ConditionSummary>,
    pub config: ResidualConfig,
    pub axisymmetric: bool,
    pub pass: bool,
    #[serde(skip)]
    pub nodes: Vec<NodeResidual>,
}

impl ResidualReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionSummary> {
        self.conditions.iter().find(|c| c.condition == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("region,rho,phi,alpha,theta,condition,residual\n");
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
                n.region, n.rho, n.phi, n.alpha, n.theta, n.condition, n.residual
            );
        }
        out
    }
}

type Check = (Region, &'static str, Point4);

/// Residuals of `Δ²ω = 0`, `P₃ᴹω + 2 = 0`, `P₃ᴺω = 0` and
/// `P₂ω − (πe^{2ω} − π/2) = 0` on grids of the interior, the faces and the
/// corner.
pub fn residual_report(omega: &Field, cfg: &ResidualConfig) -> Result<ResidualReport> {
    let axisymmetric = omega.is_zonal();
    let dirs: Vec<[f64; 2]> = if axisymmetric || cfg.directions.is_empty() {
        vec![[0.0, 0.0]]
    } else {
        cfg.directions.clone()
    };
    let fd = cfg.fd.with_band(cfg.delta);
    let mut checks: Vec<Check> = Vec::new();
    for &[a, t] in &dirs {
        for rho in linspace(cfg.x_rho, cfg.x_count[0]) {
            for phi in linspace(cfg.x_phi, cfg.x_count[1]) {
                checks.push((Region::X, "P4", Point4::from_spherical(rho, phi, a, t)));
            }
        }
    }
    let m_hi = cfg.m_phi[1].min(FRAC_PI_2 - cfg.delta);
    for &[a, t] in &dirs {
        for phi in linspace([cfg.m_phi[0], m_hi], cfg.m_count) {
            checks.push((Region::M, "P3M", Point4::from_spherical(1.0, phi, a, t)));
        }
    }
    let n_hi = cfg.n_rho[1].min(1.0 - cfg.delta);
    for &[a, t] in &dirs {
        for rho in linspace([cfg.n_rho[0].max(0.05), n_hi], cfg.n_count) {
            checks.push((Region::N, "P3N", Point4::from_spherical(rho, FRAC_PI_2, a, t)));
        }
    }
    for &[a, t] in &dirs {
        checks.push((Region::Sigma, "P2", Point4::from_spherical(1.0, FRAC_PI_2, a, t)));
    }
    let values: Vec<f64> = checks
        .par_iter()
        .map(|(_, cond, p)| -> Result<f64> {
            Ok(match *cond {
                "P4" => ops::apply_p4(omega, p, &fd)?,
                "P3M" => ops::apply_p3m(omega, p, &fd)? + 2.0,
                "P3N" => ops::apply_p3n(omega, p, &fd)?,
                _ => {
                    let w = omega.value(p);
                    ops::apply_p2(omega, p, &fd)? - (PI * (2.0 * w).exp() - FRAC_PI_2)
                }
            })
        })
        .collect::<Result<_>>()?;
    let nodes: Vec<NodeResidual> = checks
        .iter()
        .zip(&values)
        .map(|((region, cond, p), r)| {
            let s = p.spherical();
            NodeResidual {
                region: region.name().to_string(),
                rho: s.rho,
                phi: s.phi,
                alpha: s.alpha,
                theta: s.theta,
                condition: cond.to_string(),
                residual: *r,
            }
        })
        .collect();
    let mut conditions = Vec::new();
    for (cond, region, tol) in [
        ("P4", Region::X, cfg.tol_p4),
        ("P3M", Region::M, cfg.tol_p3),
        ("P3N", Region::N, cfg.tol_p3),
        ("P2", Region::Sigma, cfg.tol_p2),
    ] {
        let r: Vec<f64> = nodes.iter().filter(|n| n.condition == cond).map(|n| n.residual).collect();
        let sup = r.iter().fold(0.0f64, |a, v| if v.is_nan() { f64::NAN } else { a.max(v.abs()) });
        let l2 = if r.is_empty() {
            0.0
        } else {
            (pairwise_sum(&r.iter().map(|v| v * v).collect::<Vec<_>>()) / r.len() as f64).sqrt()
        };
        conditions.push(ConditionSummary {
            condition: cond.to_string(),
            region: region.name().to_string(),
            sup,
            l2,
            tolerance: tol,
            nodes: r.len(),
            pass: sup <= tol,
        });
    }
    let pass = conditions.iter().all(|c| c.pass);
    Ok(ResidualReport { conditions, config: cfg.clone(), axisymmetric, pass, nodes })
}

/// Quadrature settings for Gauss–Bonnet integrals of fields without exact
/// operator integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbConfig {
    /// Radial and polar orders for axisymmetric fields.
    pub zonal_orders: [usize; 2],
    pub face_orders: GridOrders,
    pub volume_orders: GridOrders,
    pub fd: FdScheme,
    /// For fields that cannot be sampled outside the half-ball, the interior
    /// integral runs over a half-ball of radius `1 − 2·margin` centred at
    /// `margin·e_w` instead.
    pub interior_margin: f64,
}

impl Default for GbConfig {
    fn default() -> Self {
        GbConfig {
            zonal_orders: [24, 48],
            face_orders: GridOrders { radial: 16, polar: 24, alpha: 8, theta: 16 },
            volume_orders: GridOrders { radial: 6, polar: 8, alpha: 4, theta: 8 },
            fd: FdScheme { h_p4: 5e-3, ..FdScheme::default() }.allowing_band(),
            interior_margin: 0.05,
        }
    }
}

/// Gauss–Bonnet terms of `e^{2ω}|dx|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussBonnet {
    /// `½∫(Q + P₄ω)`.
    pub interior: f64,
    /// `∫_M (T_M + P₃ᴹω)`.
    pub face_m: f64,
    /// `∫_N (T_N + P₃ᴺω)`.
    pub face_n: f64,
    /// `∮_Σ (U + P₂ω)`.
    pub corner: f64,
    pub total: f64,
    /// `4π²χ`.
    pub expected: f64,
    /// Fraction of the volume covered by the interior quadrature.
    pub interior_coverage: f64,
}

impl GaussBonnet {
    pub fn defect(&self) -> f64 {
        self.total - self.expected
    }
}

/// Flat-metric terms by quadrature.
pub fn flat_gauss_bonnet() -> Result<GaussBonnet> {
    let m = integrate(Region::M, &QuadratureGrid::default_for(Region::M), |_| Ok(FLAT.t_m))?;
    let n = integrate(Region::N, &QuadratureGrid::default_for(Region::N), |_| Ok(FLAT.t_n))?;
    let s = integrate(Region::Sigma, &QuadratureGrid::default_for(Region::Sigma), |_| Ok(FLAT.u))?;
    let x = integrate(Region::X, &QuadratureGrid::default_for(Region::X), |_| Ok(FLAT.q))?;
    let interior = 0.5 * x;
    Ok(GaussBonnet {
        interior,
        face_m: m,
        face_n: n,
        corner: s,
        total: interior + m + n + s,
        expected: 4.0 * PI * PI * FLAT.chi,
        interior_coverage: 1.0,
    })
}

/// `(∫P₄ω, ∫P₃ᴹω, ∫P₃ᴺω, ∮P₂ω)` and the interior coverage.
pub fn operator_integrals(omega: &Field, cfg: &GbConfig) -> Result<(OperatorIntegrals, f64)> {
    match omega {
        Field::Series(s) => return Ok((s.operator_integrals(), 1.0)),
        Field::Sum(parts) => {
            let mut acc = OperatorIntegrals { interior_p4: 0.0, face_m_p3: 0.0, face_n_p3: 0.0, corner_p2: 0.0 };
            let mut coverage = 1.0f64;
            for (w, f) in parts.iter() {
                let (t, c) = operator_integrals(f, cfg)?;
                acc.interior_p4 += w * t.interior_p4;
                acc.face_m_p3 += w * t.face_m_p3;
                acc.face_n_p3 += w * t.face_n_p3;
                acc.corner_p2 += w * t.corner_p2;
                coverage = coverage.min(c);
            }
            return Ok((acc, coverage));
        }
        _ => {}
    }
    let fd = cfg.fd;
    let grid = |r: Region| -> Result<QuadratureGrid> {
        if omega.is_zonal() {
            QuadratureGrid::zonal(r, cfg.zonal_orders[0], cfg.zonal_orders[1])
        } else {
            match r {
                Region::X => QuadratureGrid::new(r, cfg.volume_orders),
                _ => QuadratureGrid::new(r, cfg.face_orders),
            }
        }
    };
    let face_m = integrate(Region::M, &grid(Region::M)?, |p| ops::apply_p3m(omega, p, &fd))?;
    let face_n = integrate(Region::N, &grid(Region::N)?, |p| ops::apply_p3n(omega, p, &fd))?;
    let corner = integrate(Region::Sigma, &grid(Region::Sigma)?, |p| ops::apply_p2(omega, p, &fd))?;
    let (interior, coverage) = if omega.extends_beyond_domain() {
        (integrate(Region::X, &grid(Region::X)?, |p| ops::apply_p4(omega, p, &fd))?, 1.0)
    } else {
        let m = cfg.interior_margin;
        let s = 1.0 - 2.0 * m;
        let v = integrate(Region::X, &grid(Region::X)?, |p| {
            let c = p.cartesian();
            let q = Point4::raw([s * c[0], s * c[1], s * c[2], m + s * c[3]]);
            ops::apply_p4(omega, &q, &fd)
        })?;
        (v * s.powi(4), s.powi(4))
    };
    Ok((
        OperatorIntegrals { interior_p4: interior, face_m_p3: face_m, face_n_p3: face_n, corner_p2: corner },
        coverage,
    ))
}

/// `½∫P₄ω + ∫_{M∪N}P₃ω + ∮P₂ω`, which vanishes for every smooth `ω`.
pub fn linearized_gauss_bonnet(omega: &Field, cfg: &GbConfig) -> Result<f64> {
    let (t, _) = operator_integrals(omega, cfg)?;
    Ok(0.5 * t.interior_p4 + t.face_m_p3 + t.face_n_p3 + t.corner_p2)
}

/// Gauss–Bonnet terms in linear form: the conformal weights of the measures
/// cancel those of the curvatures.
pub fn gauss_bonnet(omega: &Field, cfg: &GbConfig) -> Result<GaussBonnet> {
    let flat = flat_gauss_bonnet()?;
    let (t, coverage) = operator_integrals(omega, cfg)?;
    let interior = flat.interior + 0.5 * t.interior_p4;
    let face_m = flat.face_m + t.face_m_p3;
    let face_n = flat.face_n + t.face_n_p3;
    let corner = flat.corner + t.corner_p2;
    Ok(GaussBonnet {
        interior,
        face_m,
        face_n,
        corner,
        total: interior + face_m + face_n + corner,
        expected: flat.expected,
        interior_coverage: coverage,
    })
}

/// Left minus right side of the two corner equations for the mean
/// curvatures, at one point of the corner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HCompatibility {
    pub alpha: f64,
    pub theta: f64,
    /// `ν_M H̃_M + (3π/4)e^{−ω} − (1/3)e^{ω}H̃_N H̃_M`.
    pub residual_m: f64,
    /// `ν_N H̃_N + (3π/4)e^{−ω} − (1/3)e^{ω}H̃_M H̃_N`.
    pub residual_n: f64,
}

/// One-sided scheme used at the corner.
pub fn corner_scheme() -> FdScheme {
    FdScheme { h: 1e-3, boundary_order: 2, richardson: false, ..FdScheme::default() }
}

pub fn corner_h_compatibility(omega: &Field, points: &[Point4]) -> Result<Vec<HCompatibility>> {
    let fd = corner_scheme();
    let h = fd.h;
    points
        .iter()
        .map(|p| {
            if !p.on_sigma(1e-9) {
                return Err(Error::InvalidArgument("H compatibility needs corner points".into()));
            }
            let c = p.cartesian();
            let x = {
                let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                [c[0] / n, c[1] / n, c[2] / n]
            };
            let g = |rho: f64, t: f64| -> Result<f64> {
                let (s, co) = t.sin_cos();
                let q = [rho * co * x[0], rho * co * x[1], rho * co * x[2], rho * s];
                if !omega.extends_beyond_domain() && !in_half_ball(q, 1e-10) {
                    return Err(Error::StencilOutside(q));
                }
                Ok(omega.value_cart(q))
            };
            let h_m = |t: f64| -> Result<f64> {
                let mu = -fd.derivative(|r| g(1.0 + r, t), 1, Side::Backward, h)?;
                Ok((-g(1.0, t)?).exp() * (FLAT.h_m - 3.0 * mu))
            };
            let h_n = |r: f64| -> Result<f64> {
                let rho = 1.0 + r;
                let mu = fd.derivative(|t| g(rho, t), 1, Side::Forward, h)? / rho;
                Ok((-g(rho, 0.0)?).exp() * (FLAT.h_n - 3.0 * mu))
            };
            let w = g(1.0, 0.0)?;
            let (hm, hn) = (h_m(0.0)?, h_n(0.0)?);
            let nu_hm = fd.derivative(h_m, 1, Side::Forward, h)?;
            let nu_hn = -fd.derivative(h_n, 1, Side::Backward, h)?;
            let rhs = |a: f64, b: f64| -0.75 * PI * (-w).exp() + w.exp() * a * b / 3.0;
            let s = p.spherical();
            Ok(HCompatibility {
                alpha: s.alpha,
                theta: s.theta,
                residual_m: nu_hm - rhs(hn, hm),
                residual_n: nu_hn - rhs(hm, hn),
            })
        })
        .collect()
}

/// Partial sums of `∂⁴_ρ u₁` and `∂³_ρ u₁` at the corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub n: u32,
    pub s4: f64,
    pub s3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    /// `|S₄(2N)| > |S₄(N)| + 0.5` for every listed pair with `N ≥ 64`.
    pub fourth_diverges: bool,
    /// Successive changes of `S₄(N)/ln N` shrink.
    pub ratio_stabilizes: bool,
    /// `−(9/(2π)) ln 2`, the limit of `S₄(2N) − S₄(N)`.
    pub doubling_limit: f64,
}

impl ProbeReport {
    pub fn row(&self, n: u32) -> Option<&ProbeRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Term-wise derivatives of `u₁` at `(1, π/2)` accumulated up to each `N`.
pub fn non_c4_probe(n_list: &[u32]) -> Result<ProbeReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::InvalidArgument("N list must be positive and increasing".into()));
    }
    let nmax = *n_list.last().expect("nonempty");
    let u = u1_series(nmax)?;
    let mut t4 = vec![0.0; nmax as usize + 1];
    let mut t3 = vec![0.0; nmax as usize + 1];
    for m in u.monomials() {
        if m.k % 2 == 1 {
            continue;
        }
        let j = (m.k / 2) as usize;
        let n = m.n as f64;
        let fk = zonal(m.k, FRAC_PI_2);
        t4[j] += m.c * n * (n - 1.0) * (n - 2.0) * (n - 3.0) * fk;
        t3[j] += m.c * n * (n - 1.0) * (n - 2.0) * fk;
    }
    let mut rows = Vec::new();
    let (mut s4, mut s3) = (0.0, 0.0);
    let mut next = 0;
    for j in 1..=nmax as usize {
        s4 += t4[j];
        s3 += t3[j];
        if j as u32 == n_list[next] {
            rows.push(ProbeRow { n: j as u32, s4, s3 });
            next += 1;
        }
    }
    let by_n = |n: u32| rows.iter().find(|r| r.n == n);
    let fourth_diverges = rows
        .iter()
        .filter(|r| r.n >= 64)
        .filter_map(|r| by_n(2 * r.n).map(|d| (r, d)))
        .all(|(a, b)| b.s4.abs() > a.s4.abs() + 0.5);
    let ratios: Vec<f64> = rows.iter().filter(|r| r.n >= 2).map(|r| r.s4 / (r.n as f64).ln()).collect();
    let changes: Vec<f64> = ratios.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let ratio_stabilizes = changes.windows(2).all(|w| w[1] <= w[0]);
    Ok(ProbeReport { rows, fourth_diverges, ratio_stabilizes, doubling_limit: -4.5 / PI * 2f64.ln() })
}

/// Gauss–Legendre nodes on the corner sphere for corner checks of
/// non-axisymmetric fields.
pub fn corner_points(n: usize) -> Vec<Point4> {
    let (a, _) = gauss_legendre_on(n.max(1), 0.0, PI);
    a.iter()
        .enumerate()
        .map(|(i, alpha)| Point4::from_spherical(1.0, FRAC_PI_2, *alpha, 2.0 * PI * i as f64 / n.max(1) as f64))
        .collect()
}

/// `π/4`, the common value of the corner scalars of a solution.
pub const CORNER_SCALAR: f64 = FRAC_PI_4;

/// Tolerances for the checks that accompany the residual suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckTolerances {
    /// Relative error of the corner term against `4π²`.
    pub gb_corner: f64,
    /// Absolute size of the interior and face terms.
    pub gb_faces: f64,
    /// Corner scalars against `π/4`.
    pub corner: f64,
    /// Mean-curvature compatibility residuals.
    pub h_compat: f64,
    /// Corner points sampled for fields without axial symmetry.
    pub corner_points: usize,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances { gb_corner: 1e-3, gb_faces: 1e-3, corner: 1e-3, h_compat: 1e-2, corner_points: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerCheck {
    pub alpha: f64,
    pub theta: f64,
    pub constraints: CornerConstraints,
    pub h: HCompatibility,
}

/// Residuals, Gauss–Bonnet and corner checks of one field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub residuals: ResidualReport,
    pub gauss_bonnet: GaussBonnet,
    pub gauss_bonnet_pass: bool,
    /// Corner scalars and mean-curvature compatibility are only defined
    /// as checks when `ω` is constant along the corner.
    pub corner_applicable: bool,
    pub corner: Vec<CornerCheck>,
    pub corner_pass: bool,
    pub tolerances: CheckTolerances,
    pub pass: bool,
}

impl GaussBonnet {
    /// Corner term at `4π²` and the remaining terms near zero.
    pub fn closes(&self, tol: &CheckTolerances) -> bool {
        (self.corner / self.expected - 1.0).abs() < tol.gb_corner
            && self.interior.abs() < tol.gb_faces
            && self.face_m.abs() < tol.gb_faces
            && self.face_n.abs() < tol.gb_faces
    }
}

pub fn verify_field(
    omega: &Field,
    residual: &ResidualConfig,
    gb: &GbConfig,
    tol: &CheckTolerances,
) -> Result<VerifyReport> {
    let residuals = residual_report(omega, residual)?;
    let g = gauss_bonnet(omega, gb)?;
    let points = if omega.is_zonal() {
        vec![Point4::zonal(1.0, FRAC_PI_2)]
    } else {
        corner_points(tol.corner_points)
    };
    let values: Vec<f64> = points.iter().map(|p| omega.value(p)).collect();
    let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
    let corner_applicable = spread < 1e-8;
    let mut corner = Vec::new();
    if corner_applicable {
        let h = corner_h_compatibility(omega, &points)?;
        let fd = FdScheme { richardson: false, ..FdScheme::default() };
        for (p, h) in points.iter().zip(h) {
            let constraints = check_corner_constraints(omega, p, &fd)?;
            corner.push(CornerCheck { alpha: h.alpha, theta: h.theta, constraints, h });
        }
    }
    let corner_pass = corner.iter().all(|c| {
        (c.constraints.nu_mu_m - CORNER_SCALAR).abs() < tol.corner
            && (c.constraints.nu_mu_n_minus_mu_n - CORNER_SCALAR).abs() < tol.corner
            && c.h.residual_m.abs() < tol.h_compat
            && c.h.residual_n.abs() < tol.h_compat
    });
    let gauss_bonnet_pass = g.closes(tol);
    Ok(VerifyReport {
        pass: residuals.pass && gauss_bonnet_pass && corner_pass,
        residuals,
        gauss_bonnet: g,
        gauss_bonnet_pass,
        corner_applicable,
        corner,
        corner_pass,
        tolerances: tol.clone(),
    })
}
