//! Run configuration shared by the command-line tools.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::construct::DEFAULT_TERMS;
use crate::error::{Error, Result};
use crate::verify::{CheckTolerances, GbConfig, ResidualConfig};

/// Environment variable that overrides `threads`.
pub const THREADS_ENV: &str = "CORNERQ_THREADS";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    #[serde(alias = "N_terms")]
    pub n_terms: u32,
    pub residual: ResidualConfig,
    pub gauss_bonnet: GbConfig,
    pub checks: CheckTolerances,
    /// Worker threads; `None` means available parallelism.
    pub threads: Option<usize>,
    pub output: OutputPaths,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n_terms: DEFAULT_TERMS,
            residual: ResidualConfig::default(),
            gauss_bonnet: GbConfig::default(),
            checks: CheckTolerances::default(),
            threads: None,
            output: OutputPaths::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("config field {name} must be positive, got {v}")))
    }
}

fn positive_count(name: &str, v: usize) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("config field {name} must be positive")))
    }
}

impl Config {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Config = serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        positive_count("n_terms", self.n_terms as usize)?;
        let r = &self.residual;
        positive("residual.delta", r.delta)?;
        positive("residual.fd.h", r.fd.h)?;
        positive("residual.fd.h_p4", r.fd.h_p4)?;
        positive("residual.tol_p4", r.tol_p4)?;
        positive("residual.tol_p3", r.tol_p3)?;
        positive("residual.tol_p2", r.tol_p2)?;
        positive_count("residual.m_count", r.m_count)?;
        positive_count("residual.n_count", r.n_count)?;
        positive_count("residual.x_count", r.x_count[0].min(r.x_count[1]))?;
        let g = &self.gauss_bonnet;
        positive_count("gauss_bonnet.zonal_orders", g.zonal_orders[0].min(g.zonal_orders[1]))?;
        for (name, o) in [("face_orders", g.face_orders), ("volume_orders", g.volume_orders)] {
            positive_count(name, o.radial.min(o.polar).min(o.alpha).min(o.theta))?;
        }
        positive("gauss_bonnet.fd.h", g.fd.h)?;
        let t = &self.checks;
        for (name, v) in [
            ("checks.gb_corner", t.gb_corner),
            ("checks.gb_faces", t.gb_faces),
            ("checks.corner", t.corner),
            ("checks.h_compat", t.h_compat),
        ] {
            positive(name, v)?;
        }
        positive_count("checks.corner_points", t.corner_points)?;
        if let Some(t) = self.threads {
            positive_count("threads", t)?;
        }
        Ok(())
    }

    /// Thread count after applying the environment override.
    pub fn resolved_threads(&self) -> Result<usize> {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV}={v} is not a thread count")))?;
            positive_count(THREADS_ENV, n)?;
            return Ok(n);
        }
        Ok(self
            .threads
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)))
    }
}
