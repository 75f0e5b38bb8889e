//! Coordinates on the half-ball, domain predicates and quadrature.
//!
//! Spherical coordinates are fixed as
//! `w = ρ cos φ`, `z = ρ sin φ cos α`, `x = ρ sin φ sin α cos θ`,
//! `y = ρ sin φ sin α sin θ`, so the half-ball `w ≥ 0` is `φ ≤ π/2`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when deciding whether a point belongs to the closed half-ball.
pub const DOMAIN_TOL: f64 = 1e-12;

/// The four strata of the half-ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// The solid half-ball.
    X,
    /// The round face, the upper unit hemisphere.
    M,
    /// The flat face, the unit 3-ball in `w = 0`.
    N,
    /// The corner 2-sphere.
    Sigma,
}

impl Region {
    /// Volume or area of the region in the Euclidean metric.
    pub fn measure(self) -> f64 {
        match self {
            Region::X => PI * PI / 4.0,
            Region::M => PI * PI,
            Region::N => 4.0 * PI / 3.0,
            Region::Sigma => 4.0 * PI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::X => "X",
            Region::M => "M",
            Region::N => "N",
            Region::Sigma => "Sigma",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spherical {
    pub rho: f64,
    pub phi: f64,
    pub alpha: f64,
    pub theta: f64,
}

/// A point carrying both coordinate systems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point4 {
    cart: [f64; 4],
    sph: Spherical,
}

/// Converts without any domain check. Angles are zero at the origin.
pub fn cart_to_sph_unchecked(c: [f64; 4]) -> Spherical {
    let [x, y, z, w] = c;
    let s2 = (x * x + y * y).sqrt();
    let s3 = (x * x + y * y + z * z).sqrt();
    let rho = (s3 * s3 + w * w).sqrt();
    if rho == 0.0 {
        return Spherical { rho: 0.0, phi: 0.0, alpha: 0.0, theta: 0.0 };
    }
    let phi = s3.atan2(w);
    let alpha = s2.atan2(z);
    let mut theta = y.atan2(x);
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    if theta >= 2.0 * PI {
        theta = 0.0;
    }
    Spherical { rho, phi, alpha, theta }
}

/// Cartesian to spherical, rejecting points outside the closed half-ball.
pub fn cart_to_sph(c: [f64; 4]) -> Result<Spherical> {
    if !in_half_ball(c, DOMAIN_TOL) {
        return Err(Error::OutsideDomain(c));
    }
    Ok(cart_to_sph_unchecked(c))
}

pub fn sph_to_cart(s: Spherical) -> [f64; 4] {
    let (sp, cp) = s.phi.sin_cos();
    let (sa, ca) = s.alpha.sin_cos();
    let (st, ct) = s.theta.sin_cos();
    [
        s.rho * sp * sa * ct,
        s.rho * sp * sa * st,
        s.rho * sp * ca,
        s.rho * cp,
    ]
}

pub fn norm(c: [f64; 4]) -> f64 {
    c.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn in_half_ball(c: [f64; 4], tol: f64) -> bool {
    c.iter().all(|v| v.is_finite()) && norm(c) <= 1.0 + tol && c[3] >= -tol
}

impl Point4 {
    pub fn from_cartesian(c: [f64; 4]) -> Result<Self> {
        let sph = cart_to_sph(c)?;
        Ok(Point4 { cart: c, sph })
    }

    /// Builds a point from spherical coordinates. No domain check is made so
    /// that full-ball points (`φ > π/2`) can be represented too.
    pub fn from_spherical(rho: f64, phi: f64, alpha: f64, theta: f64) -> Self {
        let sph = Spherical { rho, phi, alpha, theta };
        Point4 { cart: sph_to_cart(sph), sph }
    }

    /// A point anywhere in R⁴, used for stencil nodes and full-ball samples.
    pub fn raw(c: [f64; 4]) -> Self {
        Point4 { cart: c, sph: cart_to_sph_unchecked(c) }
    }

    /// Zonal sample point `(ρ, φ)` on the `α = θ = 0` meridian.
    pub fn zonal(rho: f64, phi: f64) -> Self {
        Self::from_spherical(rho, phi, 0.0, 0.0)
    }

    pub fn cartesian(&self) -> [f64; 4] {
        self.cart
    }

    pub fn spherical(&self) -> Spherical {
        self.sph
    }

    pub fn rho(&self) -> f64 {
        self.sph.rho
    }

    pub fn phi(&self) -> f64 {
        self.sph.phi
    }

    pub fn alpha(&self) -> f64 {
        self.sph.alpha
    }

    pub fn theta(&self) -> f64 {
        self.sph.theta
    }

    pub fn w(&self) -> f64 {
        self.cart[3]
    }

    pub fn on_m(&self, tol: f64) -> bool {
        (self.sph.rho - 1.0).abs() <= tol && self.w() >= -tol
    }

    pub fn on_n(&self, tol: f64) -> bool {
        self.w().abs() <= tol && self.sph.rho <= 1.0 + tol
    }

    pub fn on_sigma(&self, tol: f64) -> bool {
        self.on_m(tol) && self.on_n(tol)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let wgt = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = wgt;
        weights[n - 1 - i] = wgt;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Node counts per coordinate direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridOrders {
    pub radial: usize,
    pub polar: usize,
    pub alpha: usize,
    pub theta: usize,
}

impl Default for GridOrders {
    fn default() -> Self {
        GridOrders { radial: 32, polar: 64, alpha: 32, theta: 64 }
    }
}

impl GridOrders {
    /// Smaller default for full 4-dimensional products over `X`.
    pub fn volume_default() -> Self {
        GridOrders { radial: 16, polar: 32, alpha: 16, theta: 32 }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    region: Region,
    nodes: Vec<Point4>,
    weights: Vec<f64>,
    zonal_only: bool,
}

/// Polar rule in `φ ∈ [0, π/2]` carrying the `sin²φ` density.
fn polar_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (p, w) = gauss_legendre_on(n, 0.0, PI / 2.0);
    let w = p.iter().zip(&w).map(|(phi, wi)| wi * phi.sin().powi(2)).collect();
    (p, w)
}

/// Unit 2-sphere rule: Gauss–Legendre in `cos α` times a uniform rule in `θ`.
fn sphere2_rule(n_alpha: usize, n_theta: usize) -> Vec<(f64, f64, f64)> {
    let (u, wu) = gauss_legendre(n_alpha);
    let wt = 2.0 * PI / n_theta as f64;
    let mut out = Vec::with_capacity(n_alpha * n_theta);
    for (ui, wi) in u.iter().zip(&wu) {
        let alpha = ui.clamp(-1.0, 1.0).acos();
        for t in 0..n_theta {
            out.push((alpha, 2.0 * PI * t as f64 / n_theta as f64, wi * wt));
        }
    }
    out
}

impl QuadratureGrid {
    /// Full tensor-product grid over the region.
    pub fn new(region: Region, o: GridOrders) -> Result<Self> {
        if o.radial == 0 || o.polar == 0 || o.alpha == 0 || o.theta == 0 {
            return Err(Error::InvalidArgument("grid orders must be positive".into()));
        }
        let s2 = sphere2_rule(o.alpha, o.theta);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        match region {
            Region::X => {
                let (r, wr) = gauss_legendre_on(o.radial, 0.0, 1.0);
                let (p, wp) = polar_rule(o.polar);
                for (ri, wri) in r.iter().zip(&wr) {
                    for (pi, wpi) in p.iter().zip(&wp) {
                        for &(a, t, ws) in &s2 {
                            nodes.push(Point4::from_spherical(*ri, *pi, a, t));
                            weights.push(wri * ri.powi(3) * wpi * ws);
                        }
                    }
                }
            }
            Region::M => {
                let (p, wp) = polar_rule(o.polar);
                for (pi, wpi) in p.iter().zip(&wp) {
                    for &(a, t, ws) in &s2 {
                        nodes.push(Point4::from_spherical(1.0, *pi, a, t));
                        weights.push(wpi * ws);
                    }
                }
            }
            Region::N => {
                let (r, wr) = gauss_legendre_on(o.radial, 0.0, 1.0);
                for (ri, wri) in r.iter().zip(&wr) {
                    for &(a, t, ws) in &s2 {
                        nodes.push(Point4::from_spherical(*ri, PI / 2.0, a, t));
                        weights.push(wri * ri * ri * ws);
                    }
                }
            }
            Region::Sigma => {
                for &(a, t, ws) in &s2 {
                    nodes.push(Point4::from_spherical(1.0, PI / 2.0, a, t));
                    weights.push(ws);
                }
            }
        }
        Ok(QuadratureGrid { region, nodes, weights, zonal_only: false })
    }

    /// Reduced grid on the `α = θ = 0` meridian with the 2-sphere area
    /// folded into the weights. Exact only for zonal integrands.
    pub fn zonal(region: Region, radial: usize, polar: usize) -> Result<Self> {
        if radial == 0 || polar == 0 {
            return Err(Error::InvalidArgument("grid orders must be positive".into()));
        }
        let area = 4.0 * PI;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        match region {
            Region::X => {
                let (r, wr) = gauss_legendre_on(radial, 0.0, 1.0);
                let (p, wp) = polar_rule(polar);
                for (ri, wri) in r.iter().zip(&wr) {
                    for (pi, wpi) in p.iter().zip(&wp) {
                        nodes.push(Point4::zonal(*ri, *pi));
                        weights.push(area * wri * ri.powi(3) * wpi);
                    }
                }
            }
            Region::M => {
                let (p, wp) = polar_rule(polar);
                for (pi, wpi) in p.iter().zip(&wp) {
                    nodes.push(Point4::zonal(1.0, *pi));
                    weights.push(area * wpi);
                }
            }
            Region::N => {
                let (r, wr) = gauss_legendre_on(radial, 0.0, 1.0);
                for (ri, wri) in r.iter().zip(&wr) {
                    nodes.push(Point4::zonal(*ri, PI / 2.0));
                    weights.push(area * wri * ri * ri);
                }
            }
            Region::Sigma => {
                nodes.push(Point4::zonal(1.0, PI / 2.0));
                weights.push(area);
            }
        }
        Ok(QuadratureGrid { region, nodes, weights, zonal_only: true })
    }

    pub fn default_for(region: Region) -> Self {
        let o = match region {
            Region::X => GridOrders::volume_default(),
            _ => GridOrders::default(),
        };
        Self::new(region, o).expect("default orders are positive")
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn nodes(&self) -> &[Point4] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_zonal_only(&self) -> bool {
        self.zonal_only
    }
}

/// Pairwise summation with a fixed split order, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if v.len() <= BLOCK {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Integrates `f` over `region` with the given grid.
pub fn integrate<F>(region: Region, grid: &QuadratureGrid, f: F) -> Result<f64>
where
    F: Fn(&Point4) -> Result<f64> + Sync,
{
    if grid.region != region {
        return Err(Error::RegionMismatch { grid: grid.region, requested: region });
    }
    let vals: Vec<f64> = grid
        .nodes
        .par_iter()
        .map(|p| {
            let v = f(p)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { node: p.cartesian(), value: v });
            }
            Ok(v)
        })
        .collect::<Result<Vec<f64>>>()?;
    let terms: Vec<f64> = vals.iter().zip(&grid.weights).map(|(v, w)| v * w).collect();
    Ok(pairwise_sum(&terms))
}
