//! The biharmonic families `F_{k,1} = (k+2−kρ²)ρ^k f_k` and
//! `F_{k,2} = (ρ²−1)ρ^k f_k`, and their images under the boundary operators.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::Field;
use crate::fd::FdScheme;
use crate::geometry::Point4;
use crate::harmonics::{zonal, zonal_deriv};
use crate::ops;
use crate::series::{Monomial, Tail, ZonalSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisTerm {
    pub k: u32,
    pub family: Family,
}

impl BasisTerm {
    pub fn new(k: u32, family: Family) -> Self {
        BasisTerm { k, family }
    }

    /// Radial profile `r(ρ)`.
    pub fn radial(&self, rho: f64) -> f64 {
        let k = self.k as f64;
        let rk = rho.powi(self.k as i32);
        match self.family {
            Family::One => (k + 2.0 - k * rho * rho) * rk,
            Family::Two => (rho * rho - 1.0) * rk,
        }
    }

    pub fn eval(&self, p: &Point4) -> f64 {
        self.radial(p.rho()) * zonal(self.k, p.phi())
    }

    /// Closed-form flat Laplacian.
    pub fn laplacian(&self, p: &Point4) -> f64 {
        let k = self.k as f64;
        let base = p.rho().powi(self.k as i32) * zonal(self.k, p.phi());
        match self.family {
            Family::One => -4.0 * k * (k + 2.0) * base,
            Family::Two => 4.0 * (k + 2.0) * base,
        }
    }

    /// The two monomials `c ρ^n f_k` making up this term.
    pub fn monomials(&self, coeff: f64) -> [Monomial; 2] {
        let k = self.k as f64;
        match self.family {
            Family::One => [
                Monomial { k: self.k, n: self.k, c: coeff * (k + 2.0) },
                Monomial { k: self.k, n: self.k + 2, c: -coeff * k },
            ],
            Family::Two => [
                Monomial { k: self.k, n: self.k, c: -coeff },
                Monomial { k: self.k, n: self.k + 2, c: coeff },
            ],
        }
    }

    pub fn series(&self) -> ZonalSeries {
        series_from_terms(&[(*self, 1.0)], Tail::Finite)
    }
}

pub fn series_from_terms(terms: &[(BasisTerm, f64)], tail: Tail) -> ZonalSeries {
    let monos = terms.iter().flat_map(|(t, c)| t.monomials(*c)).collect();
    ZonalSeries::new(monos, tail).expect("basis terms are polynomial")
}

/// `low · ρ^p + high · ρ^{p+2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerPair {
    pub power: i32,
    pub low: f64,
    pub high: f64,
}

impl PowerPair {
    pub fn eval(&self, rho: f64) -> f64 {
        let mut v = 0.0;
        if self.low != 0.0 {
            v += self.low * rho.powi(self.power);
        }
        if self.high != 0.0 {
            v += self.high * rho.powi(self.power + 2);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.low == 0.0 && self.high == 0.0
    }
}

/// Images of one basis term: the round-face entries are multiples of `f_k`,
/// the flat-face entries are functions of `ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub k: u32,
    pub family: Family,
    /// `P₃ᴹ F = p3m · f_k`.
    pub p3m: f64,
    /// `μ_M F = mu_m · f_k`.
    pub mu_m: f64,
    pub p3n: PowerPair,
    pub mu_n: PowerPair,
}

pub fn table1_row(k: u32, family: Family) -> Table1Row {
    let kf = k as f64;
    let d = zonal_deriv(k, FRAC_PI_2, 1);
    let d = if k % 2 == 0 { 0.0 } else { d };
    let (p3m, mu_m, p3n, mu_n) = match family {
        Family::One => (
            2.0 * kf * (kf + 1.0) * (kf + 2.0),
            0.0,
            PowerPair {
                power: k as i32 - 3,
                low: -kf * (kf + 2.0) * (kf - 1.0) * d,
                high: kf * (kf + 2.0) * (kf + 3.0) * d,
            },
            PowerPair { power: k as i32 - 1, low: -(kf + 2.0) * d, high: kf * d },
        ),
        Family::Two => (
            0.0,
            -2.0,
            PowerPair {
                power: k as i32 - 3,
                low: kf * (kf - 1.0) * d,
                high: -(kf + 2.0) * (kf + 3.0) * d,
            },
            PowerPair { power: k as i32 - 1, low: d, high: -d },
        ),
    };
    let clean = |p: PowerPair| PowerPair {
        power: p.power,
        low: if p.low == 0.0 { 0.0 } else { p.low },
        high: if p.high == 0.0 { 0.0 } else { p.high },
    };
    Table1Row { k, family, p3m, mu_m, p3n: clean(p3n), mu_n: clean(mu_n) }
}

/// Sample locations for table comparisons.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Table1Grid {
    pub phis: Vec<f64>,
    pub rhos: Vec<f64>,
}

impl Default for Table1Grid {
    fn default() -> Self {
        let phis = (0..=8).map(|i| 0.1 + (1.47 - 0.1) * i as f64 / 8.0).collect();
        let rhos = (0..=8).map(|i| 0.1 + 0.8 * i as f64 / 8.0).collect();
        Table1Grid { phis, rhos }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Table1Check {
    pub k: u32,
    pub family: Family,
    pub operator: String,
    /// Largest gap between the table entry and the series calculus.
    pub analytic_sup: f64,
    /// Largest gap, relative to `max(1, |entry|)`, between the table entry
    /// and finite differences.
    pub fd_sup: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Table1Report {
    pub k_max: u32,
    pub analytic_tol: f64,
    pub fd_tol: f64,
    pub checks: Vec<Table1Check>,
    pub pass: bool,
}

/// Compares every table entry against the series calculus and against
/// finite differences of the closed-form basis function.
pub fn verify_table1(k_max: u32, grid: &Table1Grid, fd: &FdScheme) -> Result<Table1Report> {
    use rayon::prelude::*;
    let analytic_tol = 1e-8;
    let fd_tol = 1e-4;
    let jobs: Vec<(u32, Family)> = (0..=k_max)
        .flat_map(|k| [(k, Family::One), (k, Family::Two)])
        .collect();
    let per_term: Vec<Vec<Table1Check>> = jobs
        .par_iter()
        .map(|&(k, family)| check_term(k, family, grid, fd, analytic_tol, fd_tol))
        .collect::<Result<Vec<_>>>()?;
    let checks: Vec<Table1Check> = per_term.into_iter().flatten().collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(Table1Report { k_max, analytic_tol, fd_tol, checks, pass })
}

fn check_term(
    k: u32,
    family: Family,
    grid: &Table1Grid,
    fd: &FdScheme,
    analytic_tol: f64,
    fd_tol: f64,
) -> Result<Vec<Table1Check>> {
    let term = BasisTerm::new(k, family);
    let row = table1_row(k, family);
    let series = Field::series(term.series());
    let closed = Field::closed(format!("F_{{{k},{family:?}}}"), true, move |c| {
        let p = Point4::raw(c);
        term.eval(&p)
    });
    let mut out = Vec::new();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);

    let mut push = |name: &str, an: f64, fdv: f64| {
        out.push(Table1Check {
            k,
            family,
            operator: name.to_string(),
            analytic_sup: an,
            fd_sup: fdv,
            pass: an < analytic_tol && fdv < fd_tol,
        })
    };

    let (mut a1, mut f1, mut a2, mut f2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &phi in &grid.phis {
        let p = Point4::zonal(1.0, phi);
        let fk = zonal(k, phi);
        let e_p3m = row.p3m * fk;
        let e_mu = row.mu_m * fk;
        a1 = a1.max((ops::apply_p3m(&series, &p, fd)? - e_p3m).abs());
        f1 = f1.max(rel(e_p3m, ops::apply_p3m(&closed, &p, fd)?));
        a2 = a2.max((ops::apply_mu(ops::Face::M, &series, &p, fd)? - e_mu).abs());
        f2 = f2.max(rel(e_mu, ops::apply_mu(ops::Face::M, &closed, &p, fd)?));
    }
    push("P3M", a1, f1);
    push("muM", a2, f2);

    let (mut a1, mut f1, mut a2, mut f2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &rho in &grid.rhos {
        let p = Point4::zonal(rho, FRAC_PI_2);
        let e_p3n = row.p3n.eval(rho);
        let e_mu = row.mu_n.eval(rho);
        a1 = a1.max((ops::apply_p3n(&series, &p, fd)? - e_p3n).abs());
        f1 = f1.max(rel(e_p3n, ops::apply_p3n(&closed, &p, fd)?));
        a2 = a2.max((ops::apply_mu(ops::Face::N, &series, &p, fd)? - e_mu).abs());
        f2 = f2.max(rel(e_mu, ops::apply_mu(ops::Face::N, &closed, &p, fd)?));
    }
    push("P3N", a1, f1);
    push("muN", a2, f2);
    Ok(out)
}
