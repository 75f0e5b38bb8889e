//! One-dimensional finite-difference derivatives along parametrized curves.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Which side of the evaluation point a stencil may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Central,
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    /// Step for first to third derivatives.
    pub h: f64,
    /// Step for the fourth-order interior operator, which is never
    /// extrapolated: nested extrapolation amplifies rounding too much.
    pub h_p4: f64,
    /// Formal order of central stencils.
    pub interior_order: usize,
    /// Formal order of one-sided stencils.
    pub boundary_order: usize,
    /// One Richardson extrapolation level on first to third derivatives.
    pub richardson: bool,
    /// Angular width of the corner exclusion band for composite fields.
    pub corner_band: f64,
    /// Evaluate inside the exclusion band anyway.
    pub allow_band: bool,
}

impl Default for FdScheme {
    fn default() -> Self {
        FdScheme {
            h: 5e-3,
            h_p4: 2e-2,
            interior_order: 4,
            boundary_order: 3,
            richardson: true,
            corner_band: 0.05,
            allow_band: false,
        }
    }
}

impl FdScheme {
    /// Higher-order one-sided stencils for smooth closed-form fields.
    pub fn high_order() -> Self {
        FdScheme { h: 1e-2, boundary_order: 6, interior_order: 6, ..Self::default() }
    }

    pub fn with_band(mut self, delta: f64) -> Self {
        self.corner_band = delta;
        self
    }

    pub fn allowing_band(mut self) -> Self {
        self.allow_band = true;
        self
    }

    /// Stencil offsets (in units of `h`) for an `m`-th derivative.
    pub fn offsets(&self, m: usize, side: Side) -> Vec<f64> {
        match side {
            Side::Central => {
                let half = (m + self.interior_order - 1) / 2;
                (-(half as i64)..=half as i64).map(|i| i as f64).collect()
            }
            Side::Forward => (0..(m + self.boundary_order)).map(|i| i as f64).collect(),
            Side::Backward => (0..(m + self.boundary_order)).map(|i| -(i as f64)).collect(),
        }
    }

    /// Largest stencil reach, in units of length, for steps `h`.
    pub fn reach(&self, m: usize, side: Side, h: f64) -> f64 {
        let o = self.offsets(m, side);
        o.iter().fold(0.0f64, |a, b| a.max(b.abs())) * h
    }

    /// `m`-th derivative at `0` of `g`, sampled at `s = offset · h`.
    pub fn derivative<G>(&self, g: G, m: usize, side: Side, h: f64) -> Result<f64>
    where
        G: Fn(f64) -> Result<f64>,
    {
        let offs = self.offsets(m, side);
        let w = fornberg(0.0, &offs, m);
        let eval = |step: f64| -> Result<f64> {
            let mut acc = 0.0;
            for (o, wi) in offs.iter().zip(&w) {
                if *wi != 0.0 {
                    acc += wi * g(o * step)?;
                }
            }
            Ok(acc / step.powi(m as i32))
        };
        let d1 = eval(h)?;
        if !self.richardson {
            return Ok(d1);
        }
        let d2 = eval(h / 2.0)?;
        let p = match side {
            Side::Central => self.interior_order,
            _ => self.boundary_order,
        } as i32;
        let f = 2f64.powi(p);
        Ok((f * d2 - d1) / (f - 1.0))
    }
}

/// Fornberg's weights for the `m`-th derivative at `x0` on nodes `x`.
pub fn fornberg(x0: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > m, "need more nodes than the derivative order");
    // c[i][k]: weight of node i for derivative k
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}
