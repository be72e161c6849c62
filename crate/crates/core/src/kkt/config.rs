use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assembly::{ControlSpace, ObservationSpec, T_END};
use crate::error::{Error, Result};
use crate::linalg::ResidualReference;
use crate::precond::SpatialBackend;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    #[serde(rename = "3x3")]
    ThreeByThree,
    #[serde(rename = "2x2")]
    TwoByTwo,
}

impl FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3x3" => Ok(Self::ThreeByThree),
            "2x2" => Ok(Self::TwoByTwo),
            o => Err(Error::Config(format!("formulation must be '3x3' or '2x2', got '{o}'"))),
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ThreeByThree => "3x3",
            Self::TwoByTwo => "2x2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    /// built-in name or `file:<path>` of a control net
    pub geometry: String,
    pub level: u32,
    pub degree: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub observation: ObservationSpec,
    pub formulation: Formulation,
    pub control: ControlSpace,
    pub backend: SpatialBackend,
    pub tol: f64,
    pub maxit: usize,
    pub mg_pre: usize,
    pub mg_post: usize,
    /// seed of random vectors (Lanczos start vector)
    pub seed: u64,
    pub lanczos_iters: usize,
    /// normalization of the MINRES stopping test
    pub residual_reference: ResidualReference,
}

impl Default for ProblemConfig {
    /// The benchmark: quarter annulus, four observation windows, level 4,
    /// quadratic splines, `kappa = 1e-2`, `alpha = 1e-3`.
    fn default() -> Self {
        Self {
            geometry: "quarter_annulus".into(),
            level: 4,
            degree: 2,
            alpha: 1e-3,
            kappa: 1e-2,
            observation: ObservationSpec::benchmark(),
            formulation: Formulation::ThreeByThree,
            control: ControlSpace::Paper,
            backend: SpatialBackend::Cholesky,
            tol: 1e-6,
            maxit: 500,
            mg_pre: 2,
            mg_post: 2,
            seed: 42,
            lanczos_iters: 60,
            residual_reference: ResidualReference::Preconditioned,
        }
    }
}

fn parse_observation(v: &str) -> Result<ObservationSpec> {
    match v {
        "benchmark" | "partial" => Ok(ObservationSpec::benchmark()),
        "full" => Ok(ObservationSpec::full(T_END)),
        "none" => Ok(ObservationSpec::none()),
        list => {
            let mut iv = Vec::new();
            for part in list.split(',') {
                let (a, b) = part
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("observation: expected 'a:b', got '{part}'")))?;
                let num = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("observation: bad number '{s}'")))
                };
                iv.push((num(a)?, num(b)?));
            }
            ObservationSpec::new(iv, T_END).map_err(|e| Error::Config(format!("observation: {e}")))
        }
    }
}

fn format_observation(o: &ObservationSpec) -> String {
    if *o == ObservationSpec::benchmark() {
        "benchmark".into()
    } else if o.is_full(T_END) {
        "full".into()
    } else if o.intervals().is_empty() {
        "none".into()
    } else {
        o.intervals()
            .iter()
            .map(|(a, b)| format!("{a}:{b}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl ProblemConfig {
    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{v}'")))
        }
        match key {
            "geometry" => self.geometry = value.to_string(),
            "level" => self.level = num(key, value)?,
            "degree" => self.degree = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "kappa" => self.kappa = num(key, value)?,
            "observation" => self.observation = parse_observation(value)?,
            "formulation" => self.formulation = value.parse()?,
            "control" => self.control = value.parse()?,
            "backend" => self.backend = value.parse()?,
            "tol" => self.tol = num(key, value)?,
            "maxit" => self.maxit = num(key, value)?,
            "mg_pre" => self.mg_pre = num(key, value)?,
            "mg_post" => self.mg_post = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "lanczos_iters" => self.lanczos_iters = num(key, value)?,
            "residual_reference" => self.residual_reference = value.parse()?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines over the defaults; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::Config("kappa must be positive".into()));
        }
        if self.degree < 2 {
            return Err(Error::Config("degree must be at least 2".into()));
        }
        if self.degree > 8 {
            return Err(Error::Config("degree must be at most 8".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config("tol must lie in (0, 1)".into()));
        }
        if self.maxit == 0 {
            return Err(Error::Config("maxit must be positive".into()));
        }
        if self.level > 10 {
            return Err(Error::Config("level must be at most 10".into()));
        }
        Ok(())
    }

    /// Inverse of [`ProblemConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "geometry = {}", self.geometry);
        let _ = writeln!(s, "level = {}", self.level);
        let _ = writeln!(s, "degree = {}", self.degree);
        let _ = writeln!(s, "alpha = {:e}", self.alpha);
        let _ = writeln!(s, "kappa = {:e}", self.kappa);
        let _ = writeln!(s, "observation = {}", format_observation(&self.observation));
        let _ = writeln!(s, "formulation = {}", self.formulation);
        let _ = writeln!(
            s,
            "control = {}",
            match self.control {
                ControlSpace::Paper => "paper",
                ControlSpace::Tilde => "tilde",
            }
        );
        let _ = writeln!(
            s,
            "backend = {}",
            match self.backend {
                SpatialBackend::Cholesky => "cholesky",
                SpatialBackend::Multigrid => "multigrid",
            }
        );
        let _ = writeln!(s, "tol = {:e}", self.tol);
        let _ = writeln!(s, "maxit = {}", self.maxit);
        let _ = writeln!(s, "mg_pre = {}", self.mg_pre);
        let _ = writeln!(s, "mg_post = {}", self.mg_post);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "lanczos_iters = {}", self.lanczos_iters);
        let _ = writeln!(
            s,
            "residual_reference = {}",
            match self.residual_reference {
                ResidualReference::Preconditioned => "preconditioned",
                ResidualReference::RhsEuclidean => "rhs_euclidean",
            }
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = ProblemConfig::default();
        c.alpha = 1e-5;
        c.observation = ObservationSpec::new(vec![(0.1, 0.2), (0.5, 0.75)], 1.0).unwrap();
        c.formulation = Formulation::TwoByTwo;
        c.backend = SpatialBackend::Multigrid;
        c.residual_reference = ResidualReference::RhsEuclidean;
        assert_eq!(ProblemConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_key() {
        let e = ProblemConfig::parse("alpha = -1").unwrap_err().to_string();
        assert!(e.contains("alpha must be positive"), "{e}");
        let e = ProblemConfig::parse("alpah = 1").unwrap_err().to_string();
        assert!(e.contains("alpah"), "{e}");
        let e = ProblemConfig::parse("level = x").unwrap_err().to_string();
        assert!(e.contains("level"), "{e}");
    }
}
