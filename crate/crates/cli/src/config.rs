//! Run configuration: defaults, a flat `key = value` file, and flag overrides.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use phasepotts::{DynamicsParams, StagePlan};

pub const CONFIG_ENV: &str = "PHASEPOTTS_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dynamics: DynamicsParams,
    pub plan: StagePlan,
    pub iterations: usize,
    pub master_seed: u64,
    pub colors: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dynamics: DynamicsParams::default(),
            plan: StagePlan::default(),
            iterations: 40,
            master_seed: 0,
            colors: 4,
        }
    }
}

impl RunConfig {
    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("config line {}: expected `key = value`", lineno + 1))?;
            config
                .set(key.trim(), value.trim())
                .with_context(|| format!("config line {}", lineno + 1))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let real = || -> Result<f64> { value.parse().with_context(|| format!("`{key}` expects a number, got `{value}`")) };
        match key {
            "coupling" => self.dynamics.coupling = real()?,
            "shil" => self.dynamics.shil = real()?,
            "sigma" => self.dynamics.sigma = real()?,
            "dt" => self.dynamics.dt = real()?,
            "t_init" => self.plan.t_init = real()?,
            "t_anneal1" => self.plan.t_anneal1 = real()?,
            "t_lock1" => self.plan.t_lock1 = real()?,
            "t_relax" => self.plan.t_relax = real()?,
            "t_anneal2" => self.plan.t_anneal2 = real()?,
            "t_lock2" => self.plan.t_lock2 = real()?,
            "sigma_relax" => self.plan.sigma_relax = real()?,
            "lock_tolerance" => self.plan.lock_tolerance = real()?,
            "iterations" => self.iterations = value.parse().with_context(|| format!("bad iterations `{value}`"))?,
            "seed" | "master_seed" => self.master_seed = value.parse().with_context(|| format!("bad seed `{value}`"))?,
            "colors" => self.colors = value.parse().with_context(|| format!("bad colors `{value}`"))?,
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    /// Checks ranges that do not depend on the graph.
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            bail!("iterations must be at least 1");
        }
        if self.stages().is_none() {
            bail!("colors must be one of 2, 4, 8, 16 (got {})", self.colors);
        }
        self.plan.validate()?;
        Ok(())
    }

    /// `m` with `colors = 2^m`.
    pub fn stages(&self) -> Option<u32> {
        match self.colors {
            2 => Some(1),
            4 => Some(2),
            8 => Some(3),
            16 => Some(4),
            _ => None,
        }
    }

    /// The file form, readable by [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let d = &self.dynamics;
        let p = &self.plan;
        format!(
            "coupling = {}\nshil = {}\nsigma = {}\ndt = {}\n\
             t_init = {}\nt_anneal1 = {}\nt_lock1 = {}\nt_relax = {}\nt_anneal2 = {}\nt_lock2 = {}\n\
             sigma_relax = {}\nlock_tolerance = {}\niterations = {}\nseed = {}\ncolors = {}\n",
            d.coupling,
            d.shil,
            d.sigma,
            d.dt,
            p.t_init,
            p.t_anneal1,
            p.t_lock1,
            p.t_relax,
            p.t_anneal2,
            p.t_lock2,
            p.sigma_relax,
            p.lock_tolerance,
            self.iterations,
            self.master_seed,
            self.colors
        )
    }
}
