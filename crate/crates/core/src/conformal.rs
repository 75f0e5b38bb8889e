//! Conformal transformations of the half-ball.
//!
//! Möbius transformations of the corner sphere act on the ball through the
//! hyperboloid model: a point `p` of the Poincaré ball is lifted to
//! `(1+|p|², 2p) / (1−|p|²)` on the hyperboloid, a Lorentz matrix acts on the
//! coordinates `(t, x, y, z)` leaving `w` untouched, and the result is
//! projected back. Working with the unnormalized lift `(1+|p|², 2p)` keeps the
//! formula valid on the boundary sphere as well.
//!
//! The inversion `Λ` swaps the two faces and fixes the corner pointwise. It
//! commutes with every such Möbius element, so an element is a pair
//! `(L, n)` acting as `p ↦ Λⁿ(Φ_L(p))`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{integrate, QuadratureGrid, Region};

/// Minkowski metric `diag(−1, 1, 1, 1)`.
pub fn eta() -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

/// Matrix exponential by scaling and squaring.
pub fn expm(a: &Matrix4<f64>) -> Matrix4<f64> {
    let norm = a.abs().row_sum().max();
    let mut s = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        s += 1;
    }
    let x = a * scale;
    let mut term = Matrix4::identity();
    let mut sum = Matrix4::identity();
    for k in 1..=20 {
        term = term * x / k as f64;
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

fn axis_index(axis: usize) -> Result<usize> {
    if axis < 3 {
        Ok(axis + 1)
    } else {
        Err(Error::InvalidArgument(format!("axis {axis} is not one of x, y, z")))
    }
}

/// Parses `x`, `y` or `z`.
pub fn parse_axis(s: &str) -> Result<usize> {
    match s.trim() {
        "x" => Ok(0),
        "y" => Ok(1),
        "z" => Ok(2),
        other => Err(Error::InvalidArgument(format!("unknown axis '{other}'"))),
    }
}

/// Generator of boosts along a spatial axis.
pub fn boost_generator(axis: usize) -> Result<Matrix4<f64>> {
    let i = axis_index(axis)?;
    let mut g = Matrix4::zeros();
    g[(0, i)] = 1.0;
    g[(i, 0)] = 1.0;
    Ok(g)
}

/// Generator of rotations about a spatial axis.
pub fn rotation_generator(axis: usize) -> Result<Matrix4<f64>> {
    let i = axis_index(axis)?;
    let (a, b) = match i {
        1 => (2, 3),
        2 => (3, 1),
        _ => (1, 2),
    };
    let mut g = Matrix4::zeros();
    g[(a, b)] = -1.0;
    g[(b, a)] = 1.0;
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfElement {
    lorentz: Matrix4<f64>,
    lambda: bool,
}

/// Serialized form of one transformation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TransformSpec {
    Lorentz { matrix: [[f64; 4]; 4] },
    Lambda,
}

impl TransformSpec {
    pub fn element(&self) -> Result<ConfElement> {
        match self {
            TransformSpec::Lorentz { matrix } => {
                ConfElement::from_matrix(Matrix4::from_fn(|i, j| matrix[i][j]))
            }
            TransformSpec::Lambda => Ok(ConfElement::lambda()),
        }
    }
}

/// Combined map `T₁ ∘ T₂ ∘ … ∘ Tₙ` of a transform list.
pub fn compose_all(list: &[TransformSpec]) -> Result<ConfElement> {
    let mut e = ConfElement::identity();
    for t in list {
        e = e.compose(&t.element()?);
    }
    Ok(e)
}

impl ConfElement {
    pub fn identity() -> Self {
        ConfElement { lorentz: Matrix4::identity(), lambda: false }
    }

    pub fn lambda() -> Self {
        ConfElement { lorentz: Matrix4::identity(), lambda: true }
    }

    pub fn boost(axis: usize, rapidity: f64) -> Result<Self> {
        Ok(ConfElement { lorentz: expm(&(boost_generator(axis)? * rapidity)), lambda: false })
    }

    pub fn rotation(axis: usize, angle: f64) -> Result<Self> {
        Ok(ConfElement { lorentz: expm(&(rotation_generator(axis)? * angle)), lambda: false })
    }

    /// Accepts a time-orientation-preserving Lorentz matrix.
    pub fn from_matrix(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotLorentz("non-finite entry".into()));
        }
        let scale = m.abs().max().max(1.0).powi(2);
        let defect = (m.transpose() * eta() * m - eta()).abs().max();
        if defect > 1e-12 * scale {
            return Err(Error::NotLorentz(format!("L^T eta L differs from eta by {defect:e}")));
        }
        if m[(0, 0)] < 1.0 - 1e-12 {
            return Err(Error::NotLorentz("reverses time orientation".into()));
        }
        Ok(ConfElement { lorentz: m, lambda: false })
    }

    pub fn lorentz(&self) -> &Matrix4<f64> {
        &self.lorentz
    }

    pub fn has_lambda(&self) -> bool {
        self.lambda
    }

    pub fn lambda_exp(&self) -> u8 {
        self.lambda as u8
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &ConfElement) -> ConfElement {
        ConfElement { lorentz: self.lorentz * other.lorentz, lambda: self.lambda ^ other.lambda }
    }

    pub fn inverse(&self) -> ConfElement {
        let e = eta();
        ConfElement { lorentz: e * self.lorentz.transpose() * e, lambda: self.lambda }
    }

    pub fn is_identity(&self) -> bool {
        !self.lambda && (self.lorentz - Matrix4::identity()).abs().max() == 0.0
    }

    pub fn to_specs(&self) -> Vec<TransformSpec> {
        let mut v = Vec::new();
        if self.lambda {
            v.push(TransformSpec::Lambda);
        }
        if (self.lorentz - Matrix4::identity()).abs().max() != 0.0 {
            let mut m = [[0.0; 4]; 4];
            for (i, row) in m.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = self.lorentz[(i, j)];
                }
            }
            v.push(TransformSpec::Lorentz { matrix: m });
        }
        v
    }

    fn mobius_with_factor(&self, p: [f64; 4]) -> ([f64; 4], f64) {
        let s: f64 = p.iter().map(|v| v * v).sum();
        let a = 1.0 + s;
        let c = 1.0 - s;
        let v = nalgebra::Vector4::new(a, 2.0 * p[0], 2.0 * p[1], 2.0 * p[2]);
        let u = self.lorentz * v;
        let d = u[0] + c;
        ([u[1] / d, u[2] / d, u[3] / d, 2.0 * p[3] / d], 2.0 / d)
    }

    /// Image of a point together with the conformal factor at that point.
    pub fn apply_with_factor(&self, p: [f64; 4]) -> ([f64; 4], f64) {
        let (q, om) = self.mobius_with_factor(p);
        if self.lambda {
            (lambda_map(q), om * conformal_factor_lambda(q))
        } else {
            (q, om)
        }
    }

    pub fn apply(&self, p: [f64; 4]) -> [f64; 4] {
        self.apply_with_factor(p).0
    }

    /// Conformal factor `Ω` with `Φ*g = Ω² g`.
    pub fn conformal_factor(&self, p: [f64; 4]) -> f64 {
        self.apply_with_factor(p).1
    }

    /// `|det DΦ| = Ω⁴`.
    pub fn jacobian_det(&self, p: [f64; 4]) -> f64 {
        self.conformal_factor(p).powi(4)
    }

    /// Jacobian matrix by central differences, `J[i][j] = ∂Φ_i/∂p_j`.
    pub fn jacobian_fd(&self, p: [f64; 4], h: f64) -> [[f64; 4]; 4] {
        jacobian_fd_of(|q| self.apply(q), p, h)
    }
}

pub(crate) fn jacobian_fd_of<F: Fn([f64; 4]) -> [f64; 4]>(f: F, p: [f64; 4], h: f64) -> [[f64; 4]; 4] {
    let mut j = [[0.0; 4]; 4];
    for col in 0..4 {
        let shift = |s: f64| {
            let mut q = p;
            q[col] += s;
            f(q)
        };
        let (a, b, c, d) = (shift(-2.0 * h), shift(-h), shift(h), shift(2.0 * h));
        for (row, jr) in j.iter_mut().enumerate() {
            jr[col] = (a[row] - 8.0 * b[row] + 8.0 * c[row] - d[row]) / (12.0 * h);
        }
    }
    j
}

/// Determinant of a 4×4 array matrix.
pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    Matrix4::from_fn(|i, j| m[i][j]).determinant()
}

/// `∮_Σ Ω² dσ`, the area of the corner sphere in the pulled-back metric.
pub fn sigma_area(e: &ConfElement, grid: &QuadratureGrid) -> Result<f64> {
    integrate(Region::Sigma, grid, |p| Ok(e.conformal_factor(p.cartesian()).powi(2)))
}

/// `JᵀJ / Ω² − Id`, largest entry.
pub fn conformality_defect(j: &[[f64; 4]; 4], omega: f64) -> f64 {
    let m = Matrix4::from_fn(|i, k| j[i][k]);
    ((m.transpose() * m) / (omega * omega) - Matrix4::identity()).abs().max()
}

/// The inversion `Λ`.
pub fn lambda_map(p: [f64; 4]) -> [f64; 4] {
    let [x, y, z, w] = p;
    let s = x * x + y * y + z * z + w * w;
    let d = x * x + y * y + z * z + (w + 1.0) * (w + 1.0);
    [2.0 * x / d, 2.0 * y / d, 2.0 * z / d, (1.0 - s) / d]
}

/// Conformal factor of `Λ`, equal to `2 / (1 + 2ρ cos φ + ρ²)`.
pub fn conformal_factor_lambda(p: [f64; 4]) -> f64 {
    let [x, y, z, w] = p;
    2.0 / (x * x + y * y + z * z + (w + 1.0) * (w + 1.0))
}

/// A point of the hyperboloid `t² − |x|² = 1`, `t ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinkowskiPoint {
    pub t: f64,
    pub x: [f64; 4],
}

impl MinkowskiPoint {
    /// Lift of an interior ball point.
    pub fn from_ball(p: [f64; 4]) -> Result<Self> {
        let s: f64 = p.iter().map(|v| v * v).sum();
        if s >= 1.0 {
            return Err(Error::OutsideDomain(p));
        }
        let d = 1.0 - s;
        Ok(MinkowskiPoint { t: (1.0 + s) / d, x: p.map(|v| 2.0 * v / d) })
    }

    pub fn from_spatial(x: [f64; 4]) -> Self {
        let n2: f64 = x.iter().map(|v| v * v).sum();
        MinkowskiPoint { t: (1.0 + n2).sqrt(), x }
    }

    pub fn to_ball(&self) -> [f64; 4] {
        self.x.map(|v| v / (1.0 + self.t))
    }

    /// Applies `L ⊕ 1` to `(t, x₁, x₂, x₃)`, leaving `x₄` fixed.
    pub fn transform(&self, l: &Matrix4<f64>) -> Self {
        let v = l * nalgebra::Vector4::new(self.t, self.x[0], self.x[1], self.x[2]);
        MinkowskiPoint { t: v[0], x: [v[1], v[2], v[3], self.x[3]] }
    }
}

/// `e·u = u ∘ e + log |J_e|^{1/4}`.
pub fn act(e: &ConfElement, u: &Field) -> Field {
    Field::acted(u.clone(), *e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_point(rng: &mut impl Rng) -> [f64; 4] {
        loop {
            let p = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..1.0),
            ];
            let n: f64 = p.iter().map(|v| v * v).sum();
            if n < 0.98 {
                return p;
            }
        }
    }

    fn close(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_map([0.0; 4]), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(lambda_map([1.0, 0.0, 0.0, 0.0]), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(conformal_factor_lambda([0.0; 4]), 2.0);
        assert!((conformal_factor_lambda([0.6, 0.0, 0.8, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(ConfElement::lambda().jacobian_det([0.0; 4]), 16.0);
    }

    #[test]
    fn boost_moves_origin_by_half_rapidity() {
        let s = 0.7;
        let e = ConfElement::boost(2, s).unwrap();
        let q = e.apply([0.0; 4]);
        assert!(close(q, [0.0, 0.0, (s / 2.0).tanh(), 0.0], 1e-15));
        let m = MinkowskiPoint::from_spatial([0.0; 4]).transform(e.lorentz());
        assert!((m.t - s.cosh()).abs() < 1e-14 && (m.x[2] - s.sinh()).abs() < 1e-14);
    }

    #[test]
    fn hyperboloid_chart_agrees_with_lift() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let e = ConfElement::boost(0, 0.9).unwrap().compose(&ConfElement::rotation(1, 0.4).unwrap());
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let m = MinkowskiPoint::from_ball(p).unwrap();
            assert!(m.t >= 1.0);
            assert!(close(m.to_ball(), p, 1e-12));
            let via_chart = m.transform(e.lorentz()).to_ball();
            assert!(close(via_chart, e.apply(p), 1e-12));
        }
    }

    #[test]
    fn lambda_commutes_with_mobius() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let b = ConfElement::boost(1, 0.8).unwrap().compose(&ConfElement::rotation(2, 1.1).unwrap());
        for _ in 0..50 {
            let p = random_point(&mut rng);
            let a = lambda_map(b.apply(p));
            let c = b.apply(lambda_map(p));
            assert!(close(a, c, 1e-12));
        }
    }

    #[test]
    fn group_action_and_cocycle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = ConfElement::boost(2, 0.5).unwrap().compose(&ConfElement::lambda());
        let b = ConfElement::rotation(0, 0.3).unwrap().compose(&ConfElement::boost(0, -0.4).unwrap());
        let ab = a.compose(&b);
        for _ in 0..50 {
            let p = random_point(&mut rng);
            assert!(close(ab.apply(p), a.apply(b.apply(p)), 1e-12));
            let lhs = ab.jacobian_det(p);
            let rhs = a.jacobian_det(b.apply(p)) * b.jacobian_det(p);
            assert!((lhs / rhs - 1.0).abs() < 1e-12);
            let inv = ab.inverse();
            assert!(close(inv.apply(ab.apply(p)), p, 1e-12));
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for e in [
            ConfElement::lambda(),
            ConfElement::boost(2, 1.0).unwrap(),
            ConfElement::boost(0, 0.5).unwrap().compose(&ConfElement::lambda()),
        ] {
            for _ in 0..50 {
                let p = random_point(&mut rng);
                let j = e.jacobian_fd(p, 1e-5);
                let om = e.conformal_factor(p);
                assert!(conformality_defect(&j, om) < 1e-6);
                assert!((det4(&j).abs() / e.jacobian_det(p) - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn faces_and_corner_preserved() {
        let b = ConfElement::boost(2, 1.3).unwrap();
        for t in 0..20 {
            let th = t as f64 * 0.3;
            let p = [th.cos() * 0.6, th.sin() * 0.6, 0.8, 0.0];
            let q = b.apply(p);
            let n: f64 = q.iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-13 && q[3].abs() < 1e-15);
            let r = ConfElement::lambda().apply(q);
            assert!(close(r, q, 1e-13));
        }
    }

    #[test]
    fn rejects_non_lorentz() {
        let mut m = Matrix4::identity();
        m[(0, 1)] = 0.3;
        assert!(ConfElement::from_matrix(m).is_err());
        let mut t = Matrix4::identity();
        t[(0, 0)] = -1.0;
        assert!(ConfElement::from_matrix(t).is_err());
        let ok = *ConfElement::boost(1, 1.7).unwrap().lorentz();
        assert!(ConfElement::from_matrix(ok).is_ok());
    }

    #[test]
    fn corner_area_is_preserved() {
        let grid = QuadratureGrid::default_for(Region::Sigma);
        for (axis, s) in [(0, 0.3), (1, 0.7), (2, 1.0)] {
            let e = ConfElement::boost(axis, s).unwrap();
            let a = sigma_area(&e, &grid).unwrap();
            assert!((a - 4.0 * std::f64::consts::PI).abs() < 1e-8, "{a}");
        }
        let a = sigma_area(&ConfElement::lambda(), &grid).unwrap();
        assert!((a - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
