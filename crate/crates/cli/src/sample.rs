//! Field dumps on a fixed `(α, θ)` slice.

use std::f64::consts::FRAC_PI_2;

use anyhow::{anyhow, Context};
use cornerq::verify::Curvatures;
use cornerq::{Field, Point4};
use rayon::prelude::*;

pub struct SampleRow {
    pub rho: f64,
    pub phi: f64,
    pub alpha: f64,
    pub theta: f64,
    pub omega: f64,
    pub q: Option<f64>,
    pub t: Option<f64>,
    pub u: Option<f64>,
}

/// Parses `RxP` with both counts at least 2.
pub fn parse_grid(s: &str) -> anyhow::Result<(usize, usize)> {
    let (r, p) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("--grid expects RxP, got '{s}'"))?;
    let r: usize = r.trim().parse().with_context(|| format!("bad radial count in '{s}'"))?;
    let p: usize = p.trim().parse().with_context(|| format!("bad polar count in '{s}'"))?;
    if r < 2 || p < 2 {
        return Err(anyhow!("--grid needs at least 2 points per direction"));
    }
    Ok((r, p))
}

/// Parses `alpha=A,theta=T` in either order.
pub fn parse_slice(s: &str) -> anyhow::Result<(f64, f64)> {
    let mut alpha = None;
    let mut theta = None;
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("--slice expects alpha=A,theta=T, got '{s}'"))?;
        let v: f64 = v.trim().parse().with_context(|| format!("bad number in --slice '{s}'"))?;
        if !v.is_finite() {
            return Err(anyhow!("--slice values must be finite"));
        }
        let slot = match k.trim() {
            "alpha" => &mut alpha,
            "theta" => &mut theta,
            other => return Err(anyhow!("unknown slice key '{other}'")),
        };
        if slot.replace(v).is_some() {
            return Err(anyhow!("repeated slice key '{}'", k.trim()));
        }
    }
    match (alpha, theta) {
        (Some(a), Some(t)) => Ok((a, t)),
        _ => Err(anyhow!("--slice needs both alpha and theta")),
    }
}

/// Samples `ρ ∈ [0, 1]` and `φ ∈ [0, π/2]` uniformly. `Q̃` is reported in
/// the open half-ball, `T̃` on the faces and `Ũ` on the corner, each only
/// where its operator can be evaluated.
pub fn sample_slice(field: &Field, curv: &Curvatures, nr: usize, np: usize, alpha: f64, theta: f64) -> Vec<SampleRow> {
    let nodes: Vec<(usize, usize)> = (0..nr).flat_map(|i| (0..np).map(move |j| (i, j))).collect();
    nodes
        .par_iter()
        .map(|&(i, j)| {
            let rho = i as f64 / (nr - 1) as f64;
            let phi = if j + 1 == np { FRAC_PI_2 } else { FRAC_PI_2 * j as f64 / (np - 1) as f64 };
            let p = Point4::from_spherical(rho, phi, alpha, theta);
            let on_m = i + 1 == nr;
            let on_n = j + 1 == np;
            let q = if !on_m && !on_n { curv.q(&p).ok() } else { None };
            let t = match (on_m, on_n) {
                (true, false) => curv.t_m(&p).ok(),
                (false, true) if rho > 0.0 => curv.t_n(&p).ok(),
                _ => None,
            };
            let u = if on_m && on_n { curv.u(&p).ok() } else { None };
            SampleRow { rho, phi, alpha, theta, omega: field.value(&p), q, t, u }
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        _ => String::new(),
    }
}

pub fn to_csv(rows: &[SampleRow]) -> String {
    let mut s = String::from("rho,phi,alpha,theta,omega,Qtilde,Ttilde,Utilde\n");
    for r in rows {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}\n",
            r.rho,
            r.phi,
            r.alpha,
            r.theta,
            r.omega,
            cell(r.q),
            cell(r.t),
            cell(r.u)
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_slice_specs() {
        assert_eq!(parse_grid("100x80").unwrap(), (100, 80));
        assert!(parse_grid("1x5").is_err());
        assert!(parse_grid("10").is_err());
        assert_eq!(parse_slice("theta=2,alpha=0.5").unwrap(), (0.5, 2.0));
        for bad in ["alpha=1", "alpha=1,theta=x", "beta=1,theta=2", "alpha=1,alpha=2", "alpha=nan,theta=0"] {
            assert!(parse_slice(bad).is_err(), "{bad}");
        }
    }
}
