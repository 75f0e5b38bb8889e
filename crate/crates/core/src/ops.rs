//! Boundary and interior operators of the flat half-ball.
//!
//! With inward normals `μ_M = −∂_ρ` on the round face `M` and
//! `μ_N = ∂_w = −ρ⁻¹∂_φ` on the flat face `N`:
//!
//! * `P₄ = Δ²`
//! * `P₃ᴹ f = ½ μ_M Δf + Δ_M(μ_M f) − Δ_M f`
//! * `P₃ᴺ f = ½ μ_N Δf + Δ_N(μ_N f)`
//! * `P₂ f = −(π/2) Δ_Σ f + ν_M μ_M f + ν_N μ_N f − ν_M f` on the corner,
//!   with `ν_M = −∂_φ` and `ν_N = −∂_ρ`.
//!
//! Series fields use exact coefficient calculus. Other fields use finite
//! differences along curves: radial lines and great circles for `M`,
//! straight lines for `N`, and the quarter circles
//! `t ↦ ρ(cos t x̂ + sin t e_w)` at the corner. On `M` these reduce to
//! `P₃ᴹ f = −½g‴ − (3/2)g″ + (3/2)g′ − (3/2)Δ_M(g′)` with `g(r) = f(r q)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::fd::{FdScheme, Side};
use crate::field::{Field, FieldKind};
use crate::geometry::{in_half_ball, Point4};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Face {
    M,
    N,
}

const FACE_TOL: f64 = 1e-9;

type V4 = [f64; 4];

fn add(a: V4, b: V4, s: f64) -> V4 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]]
}

fn dot(a: V4, b: V4) -> f64 {
    a.iter().zip(&b).map(|(x, y)| x * y).sum()
}

fn normalize(a: V4) -> V4 {
    let n = dot(a, a).sqrt();
    a.map(|v| v / n)
}

/// Orthonormal vectors completing `fixed` inside the span of `ambient`
/// coordinate axes.
fn complete_frame(fixed: &[V4], ambient: &[usize]) -> Vec<V4> {
    let mut out: Vec<V4> = Vec::new();
    let mut basis: Vec<V4> = fixed.to_vec();
    for &i in ambient {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        for b in &basis {
            let d = dot(v, *b);
            v = add(v, *b, -d);
        }
        let n = dot(v, v).sqrt();
        if n > 1e-6 {
            let v = v.map(|x| x / n);
            basis.push(v);
            out.push(v);
        }
    }
    out
}

/// Evaluates a field at a stencil node, refusing nodes outside the closed
/// half-ball for fields that do not extend past it.
fn sample(f: &Field, c: V4) -> Result<f64> {
    if !f.extends_beyond_domain() && !in_half_ball(c, 1e-10) {
        return Err(Error::StencilOutside(c));
    }
    let v = f.value_cart(c);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { node: c, value: v })
    }
}

fn check_face(face: Face, p: &Point4) -> Result<()> {
    let ok = match face {
        Face::M => p.on_m(FACE_TOL),
        Face::N => p.on_n(FACE_TOL) && p.rho() > 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{:?} is not on face {face:?}", p.cartesian())))
    }
}

fn check_band(f: &Field, distance: f64, fd: &FdScheme) -> Result<()> {
    if f.kind() == FieldKind::Composite && !fd.allow_band && distance < fd.corner_band {
        return Err(Error::CornerBand { distance, delta: fd.corner_band });
    }
    Ok(())
}

/// Linear combination helper: applies `op` to each part of a sum.
fn linear<F>(f: &Field, op: &F) -> Option<Result<f64>>
where
    F: Fn(&Field) -> Result<f64>,
{
    match f {
        Field::Sum(parts) => {
            let mut acc = 0.0;
            for (w, g) in parts.iter() {
                match op(g) {
                    Ok(v) => acc += w * v,
                    Err(e) => return Some(Err(e)),
                }
            }
            Some(Ok(acc))
        }
        _ => None,
    }
}

/// Unit vector of the round face through `p`.
fn unit(p: &Point4) -> V4 {
    normalize(p.cartesian())
}

/// `d/dr` of `f(r q)` at `r = 1`, one-sided from inside.
fn radial_first(f: &Field, q: V4, fd: &FdScheme) -> Result<f64> {
    let side = if f.extends_beyond_domain() { Side::Central } else { Side::Backward };
    fd.derivative(|s| sample(f, q.map(|v| v * (1.0 + s))), 1, side, fd.h)
}

/// Laplacian of the round 3-sphere at `q` of a function given on the sphere.
fn sphere3_laplacian<G>(g: G, q: V4, extends: bool, fd: &FdScheme) -> Result<f64>
where
    G: Fn(V4) -> Result<f64>,
{
    // e1 points along the meridian toward the pole; e2, e3 keep w fixed to
    // second order so their great circles stay on the face.
    let ew = [0.0, 0.0, 0.0, 1.0];
    let proj = add(ew, q, -q[3]);
    let np = dot(proj, proj).sqrt();
    let mut frame = Vec::new();
    if np > 1e-8 {
        frame.push(proj.map(|v| v / np));
    }
    let fixed = match frame.first() {
        Some(e1) => vec![q, *e1],
        None => vec![q],
    };
    let rest = complete_frame(&fixed, &[0, 1, 2, 3]);
    frame.extend(rest);
    frame.truncate(3);
    let mut acc = 0.0;
    for (i, e) in frame.iter().enumerate() {
        let curve = |s: f64| add(q.map(|v| v * s.cos()), *e, s.sin());
        let side = if i == 0 && !extends {
            let reach = fd.reach(2, Side::Central, fd.h);
            if curve(-reach)[3] < -1e-12 {
                Side::Forward
            } else {
                Side::Central
            }
        } else {
            Side::Central
        };
        acc += fd.derivative(|s| g(curve(s)), 2, side, fd.h)?;
    }
    Ok(acc)
}

/// Inward normal derivative on a face.
pub fn apply_mu(face: Face, f: &Field, p: &Point4, fd: &FdScheme) -> Result<f64> {
    check_face(face, p)?;
    if let Some(r) = linear(f, &|g: &Field| apply_mu(face, g, p, fd)) {
        return r;
    }
    if let Field::Series(s) = f {
        return Ok(match face {
            Face::M => s.mu_m(p.phi()),
            Face::N => s.mu_n(p.rho()),
        });
    }
    match face {
        Face::M => Ok(-radial_first(f, unit(p), fd)?),
        Face::N => {
            // ∂_w f = ρ⁻¹ ∂_t f(ρ(cos t ŷ + sin t e_w)) keeps the stencil on
            // the sphere of radius ρ, inside the domain up to the corner.
            let c = p.cartesian();
            let rho = p.rho();
            let y = normalize([c[0], c[1], c[2], 0.0]);
            let side = if f.extends_beyond_domain() { Side::Central } else { Side::Forward };
            Ok(fd.derivative(|t| sample(f, corner_chart(y, rho, t)), 1, side, fd.h)? / rho)
        }
    }
}

/// Third-order boundary operator on the round face.
pub fn apply_p3m(f: &Field, p: &Point4, fd: &FdScheme) -> Result<f64> {
    check_face(Face::M, p)?;
    if let Some(r) = linear(f, &|g: &Field| apply_p3m(g, p, fd)) {
        return r;
    }
    if let Field::Series(s) = f {
        return Ok(s.p3m(p.phi()));
    }
    check_band(f, FRAC_PI_2 - p.phi(), fd)?;
    let q = unit(p);
    let ext = f.extends_beyond_domain();
    let side = if ext { Side::Central } else { Side::Backward };
    let g = |s: f64| sample(f, q.map(|v| v * (1.0 + s)));
    let g1 = fd.derivative(g, 1, side, fd.h)?;
    let g2 = fd.derivative(g, 2, side, fd.h)?;
    let g3 = fd.derivative(g, 3, side, fd.h)?;
    let lap = sphere3_laplacian(|x| radial_first(f, x, fd), q, ext, fd)?;
    Ok(-0.5 * g3 - 1.5 * g2 + 1.5 * g1 - 1.5 * lap)
}

/// `∂_w` of `f` at a point of the flat face.
fn normal_w(f: &Field, y: V4, fd: &FdScheme) -> Result<f64> {
    let side = if f.extends_beyond_domain() { Side::Central } else { Side::Forward };
    fd.derivative(|s| sample(f, add(y, [0.0, 0.0, 0.0, 1.0], s)), 1, side, fd.h)
}

/// Flat 3-dimensional Laplacian at `y` in the slice `w = 0`.
fn flat3_laplacian<G>(g: G, y: V4, extends: bool, fd: &FdScheme) -> Result<f64>
where
    G: Fn(V4) -> Result<f64>,
{
    let r = dot(y, y).sqrt();
    let er = if r > 1e-12 { y.map(|v| v / r) } else { [1.0, 0.0, 0.0, 0.0] };
    let mut frame = vec![er];
    frame.extend(complete_frame(&[er, [0.0, 0.0, 0.0, 1.0]], &[0, 1, 2]));
    let reach = fd.reach(2, Side::Central, fd.h);
    let mut acc = 0.0;
    for (i, e) in frame.iter().enumerate() {
        let side = if i == 0 && !extends && r + reach > 1.0 { Side::Backward } else { Side::Central };
        acc += fd.derivative(|s| g(add(y, *e, s)), 2, side, fd.h)?;
    }
    Ok(acc)
}

/// Third-order boundary operator on the flat face.
pub fn apply_p3n(f: &Field, p: &Point4, fd: &FdScheme) -> Result<f64> {
    check_face(Face::N, p)?;
    if p.rho() >= 1.0 {
        return Err(Error::InvalidArgument("P3N needs rho < 1".into()));
    }
    if let Some(r) = linear(f, &|g: &Field| apply_p3n(g, p, fd)) {
        return r;
    }
    if let Field::Series(s) = f {
        return Ok(s.p3n(p.rho()));
    }
    check_band(f, 1.0 - p.rho(), fd)?;
    let y = p.cartesian();
    let y = [y[0], y[1], y[2], 0.0];
    let ext = f.extends_beyond_domain();
    let side = if ext { Side::Central } else { Side::Forward };
    let fw3 = fd.derivative(|s| sample(f, add(y, [0.0, 0.0, 0.0, 1.0], s)), 3, side, fd.h)?;
    let lap = flat3_laplacian(|x| normal_w(f, x, fd), y, ext, fd)?;
    Ok(0.5 * fw3 + 1.5 * lap)
}

fn corner_unit(p: &Point4) -> Result<V4> {
    if !p.on_sigma(FACE_TOL) {
        return Err(Error::InvalidArgument(format!("{:?} is not on the corner", p.cartesian())));
    }
    let c = p.cartesian();
    Ok(normalize([c[0], c[1], c[2], 0.0]))
}

/// `G(ρ, t) = f(ρ(cos t x̂ + sin t e_w))`.
fn corner_chart(x: V4, rho: f64, t: f64) -> V4 {
    let (s, c) = t.sin_cos();
    [rho * c * x[0], rho * c * x[1], rho * c * x[2], rho * s]
}

/// Derivatives of the corner chart: `∂_t G(1, 0)` and `∂_ρ G(1, 0)`.
fn corner_first(f: &Field, x: V4, fd: &FdScheme) -> Result<(f64, f64)> {
    let ext = f.extends_beyond_domain();
    let ts = if ext { Side::Central } else { Side::Forward };
    let rs = if ext { Side::Central } else { Side::Backward };
    let gt = fd.derivative(|t| sample(f, corner_chart(x, 1.0, t)), 1, ts, fd.h)?;
    let gr = fd.derivative(|r| sample(f, corner_chart(x, 1.0 + r, 0.0)), 1, rs, fd.h)?;
    Ok((gt, gr))
}

/// `∂_ρ ∂_t G` at the corner.
fn corner_mixed(f: &Field, x: V4, fd: &FdScheme) -> Result<f64> {
    let ext = f.extends_beyond_domain();
    let ts = if ext { Side::Central } else { Side::Forward };
    let rs = if ext { Side::Central } else { Side::Backward };
    fd.derivative(
        |t| fd.derivative(|r| sample(f, corner_chart(x, 1.0 + r, t)), 1, rs, fd.h),
        1,
        ts,
        fd.h,
    )
}

/// Laplacian of the corner sphere.
fn sphere2_laplacian(f: &Field, x: V4, fd: &FdScheme) -> Result<f64> {
    let frame = complete_frame(&[x, [0.0, 0.0, 0.0, 1.0]], &[0, 1, 2]);
    let mut acc = 0.0;
    for e in frame {
        let curve = |s: f64| add(x.map(|v| v * s.cos()), e, s.sin());
        acc += fd.derivative(|s| sample(f, curve(s)), 2, Side::Central, fd.h)?;
    }
    Ok(acc)
}

/// `ν_M f = −∂_φ f` on the corner.
pub fn apply_nu_m(f: &Field, p: &Point4, fd: &FdScheme) -> Result<f64> {
    let x = corner_unit(p)?;
    if let Some(r) = linear(f, &|g: &Field| apply_nu_m(g, p, fd)) {
        return r;
    }
    if let Field::Series(s) = f {
        return Ok(s.nu_m());
    }
    Ok(corner_first(f, x, fd)?.0)
}

/// `ν_N f = −∂_ρ f` on the corner.
pub fn apply_nu_n(f: &Field, p: &Point4, fd: &FdScheme) -> Result<f64> {
    let x = corner_unit(p)?;
    if let Some(r) = linear(f, &|g: &Field| apply_nu_n(g, p, fd)) {
        return r;
    }
    if let Field::Series(s) = f {
        return Ok(s.nu_n());
    }
    Ok(-corner_first(f, x, fd)?.1)
}

/// `∂²_{ρφ} f` at the corner.
pub fn corner_mixed_rho_phi(f: &Field, p: &Point4, fd: &FdScheme) -> Result<f64> {
    let x = corner_unit(p)?;
    if let Some(r) = linear(f, &|g: &Field| corner_mixed_rho_phi(g, p, fd)) {
        return r;
    }
    if let Field::Series(s) = f {
        return Ok(s.partial(1.0, FRAC_PI_2, 1, 1));
    }
    // φ = π/2 − t
    Ok(-corner_mixed(f, x, fd)?)
}

/// Second-order corner operator.
pub fn apply_p2(f: &Field, p: &Point4, fd: &FdScheme) -> Result<f64> {
    let x = corner_unit(p)?;
    if let Some(r) = linear(f, &|g: &Field| apply_p2(g, p, fd)) {
        return r;
    }
    if let Field::Series(s) = f {
        return Ok(s.p2());
    }
    let lap = sphere2_laplacian(f, x, fd)?;
    let mixed = corner_mixed(f, x, fd)?;
    Ok(-FRAC_PI_2 * lap - 2.0 * mixed)
}

/// Flat 4-dimensional Laplacian by central differences with step `h`.
fn flat4_laplacian<G>(g: G, c: V4, h: f64, fd: &FdScheme) -> Result<f64>
where
    G: Fn(V4) -> Result<f64>,
{
    let mut acc = 0.0;
    for i in 0..4 {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        acc += fd.derivative(|s| g(add(c, e, s)), 2, Side::Central, h)?;
    }
    Ok(acc)
}

/// `Δ²` at an interior point. Fields that cannot be sampled outside the
/// half-ball get a step shrunk to fit the distance to the boundary.
pub fn apply_p4(f: &Field, p: &Point4, fd: &FdScheme) -> Result<f64> {
    if let Some(r) = linear(f, &|g: &Field| apply_p4(g, p, fd)) {
        return r;
    }
    if let Field::Series(s) = f {
        return Ok(s.p4(p.rho(), p.phi()));
    }
    let c = p.cartesian();
    let fd = &FdScheme { richardson: false, ..*fd };
    let units = 2.0 * fd.reach(2, Side::Central, 1.0);
    let mut h = fd.h_p4;
    if let Field::Composite { element, .. } = f {
        // keep the pulled-back stencil at the nominal size
        h /= element.conformal_factor(c).max(1.0);
    }
    if !f.extends_beyond_domain() {
        let dist = (1.0 - p.rho()).min(c[3]);
        if dist <= 0.0 {
            return Err(Error::StencilOutside(c));
        }
        h = h.min(0.99 * dist / units);
    }
    flat4_laplacian(|x| flat4_laplacian(|y| sample(f, y), x, h, fd), c, h, fd)
}

/// Flat Laplacian at an interior point.
pub fn apply_laplacian(f: &Field, p: &Point4, fd: &FdScheme) -> Result<f64> {
    if let Some(r) = linear(f, &|g: &Field| apply_laplacian(g, p, fd)) {
        return r;
    }
    if let Field::Series(s) = f {
        return Ok(s.laplacian().value(p.rho(), p.phi()));
    }
    flat4_laplacian(|y| sample(f, y), p.cartesian(), fd.h_p4, fd)
}

/// Total angle of the corner, for documentation of `U = π/2`.
pub const CORNER_ANGLE: f64 = PI / 2.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BasisTerm, Family};
    use crate::series::{Monomial, Tail, ZonalSeries};

    fn closed_of(s: ZonalSeries) -> Field {
        Field::closed("series", true, move |c| s.value_cart(c))
    }

    #[test]
    fn mu_examples() {
        let l = ZonalSeries::new(vec![Monomial { k: 1, n: 1, c: PI / 2.0 }], Tail::Finite).unwrap();
        let fd = FdScheme::default();
        for rho in [0.2, 0.6, 0.9] {
            let p = Point4::zonal(rho, FRAC_PI_2);
            assert!((apply_mu(Face::N, &Field::series(l.clone()), &p, &fd).unwrap() - 1.0).abs() < 1e-14);
            assert!((apply_mu(Face::N, &closed_of(l.clone()), &p, &fd).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn p2_examples() {
        let fd = FdScheme::default();
        let p = Point4::from_spherical(1.0, FRAC_PI_2, 0.7, 2.0);
        let lin = Field::closed("w", true, |c| c[3]);
        assert!((apply_p2(&lin, &p, &fd).unwrap() + 2.0).abs() < 1e-7);
        assert!(apply_p2(&Field::constant(3.0), &p, &fd).unwrap().abs() < 1e-15);
        let c = Field::closed("c", true, |_| 3.0);
        assert!(apply_p2(&c, &p, &fd).unwrap().abs() < 1e-8);
    }

    #[test]
    fn p4_examples() {
        let fd = FdScheme::default();
        let r4 = Field::closed("rho^4", true, |c| {
            let s: f64 = c.iter().map(|v| v * v).sum();
            s * s
        });
        let x = Field::closed("x", true, |c| c[0]);
        for p in [Point4::zonal(0.3, 0.8), Point4::from_spherical(0.5, 1.0, 0.4, 1.0)] {
            assert!((apply_p4(&r4, &p, &fd).unwrap() - 192.0).abs() < 1e-5);
            assert!(apply_p4(&x, &p, &fd).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn fd_matches_series_operators() {
        let fd = FdScheme::high_order();
        for (k, fam) in [(1, Family::One), (2, Family::Two), (3, Family::One), (4, Family::One)] {
            let s = BasisTerm::new(k, fam).series();
            let f = closed_of(s.clone());
            let g = Field::series(s.clone());
            for phi in [0.2, 0.9, 1.4] {
                let p = Point4::from_spherical(1.0, phi, 0.3, 1.2);
                let a = apply_p3m(&g, &p, &fd).unwrap();
                let b = apply_p3m(&f, &p, &fd).unwrap();
                assert!((a - b).abs() < 1e-5 * a.abs().max(1.0), "k={k} phi={phi}: {a} {b}");
            }
            for rho in [0.2, 0.6, 0.9] {
                let p = Point4::from_spherical(rho, FRAC_PI_2, 1.1, 0.5);
                let a = apply_p3n(&g, &p, &fd).unwrap();
                let b = apply_p3n(&f, &p, &fd).unwrap();
                assert!((a - b).abs() < 1e-5 * a.abs().max(1.0), "k={k} rho={rho}: {a} {b}");
            }
            let p = Point4::from_spherical(1.0, FRAC_PI_2, 0.9, 0.2);
            let a = apply_p2(&g, &p, &fd).unwrap();
            let b = apply_p2(&f, &p, &fd).unwrap();
            assert!((a - b).abs() < 1e-5 * a.abs().max(1.0), "k={k}: {a} {b}");
        }
    }

    #[test]
    fn normals_coincide_on_corner() {
        let fd = FdScheme::default();
        let s = BasisTerm::new(3, Family::One).series().add(&BasisTerm::new(2, Family::Two).series());
        let f = Field::closed("f", false, move |c| s.value_cart(c));
        let p = Point4::from_spherical(1.0, FRAC_PI_2, 1.0, 1.0);
        let q = Point4::from_spherical(1.0 - 1e-12, FRAC_PI_2, 1.0, 1.0);
        let mu_n = apply_mu(Face::N, &f, &q, &fd).unwrap();
        let mu_m = apply_mu(Face::M, &f, &p, &fd).unwrap();
        assert!((apply_nu_m(&f, &p, &fd).unwrap() - mu_n).abs() < 1e-8);
        assert!((apply_nu_n(&f, &p, &fd).unwrap() - mu_m).abs() < 1e-8);
    }

    #[test]
    fn composite_band_is_refused() {
        let fd = FdScheme::default();
        let f = Field::acted(Field::constant(0.0), crate::conformal::ConfElement::lambda());
        let p = Point4::zonal(1.0, FRAC_PI_2 - 0.01);
        assert!(matches!(apply_p3m(&f, &p, &fd), Err(Error::CornerBand { .. })));
        assert!(apply_p3m(&f, &p, &fd.allowing_band()).is_ok());
    }
}
