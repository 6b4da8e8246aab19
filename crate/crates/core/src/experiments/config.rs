//! Flat `key = value` settings with layered precedence.
//!
//! Layers are applied in order defaults, config file, command-line flags; a later
//! layer replaces keys set by an earlier one. `eps` and `total-learning` are two
//! spellings of the same setting, so setting either clears the other.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::PiGrid;
use crate::model::ModelParams;
use crate::monte_carlo::McConfig;
use crate::pde::PdeConfig;

/// Every key accepted in a config file.
pub const KEYS: &[&str] = &[
    "mu0",
    "mu1",
    "sigma",
    "r",
    "N",
    "eps",
    "total-learning",
    "grid",
    "dt-target",
    "theta",
    "smoothing-steps",
    "curve-stride",
    "paths",
    "dt",
    "t-max",
    "seed",
    "start-pi",
    "dominance-paths",
    "boundaries",
    "axis",
    "values",
    "out",
];

/// Unresolved settings keyed by flag name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layers {
    values: BTreeMap<String, String>,
}

impl Layers {
    /// The captioned base parameters shared by most figures.
    pub fn defaults() -> Self {
        let mut l = Self::default();
        for (k, v) in [
            ("mu0", "-1"),
            ("mu1", "1"),
            ("sigma", "4"),
            ("r", "0.1"),
            ("N", "10"),
            ("total-learning", "1"),
            ("grid", "2001"),
            ("theta", "0.5"),
            ("smoothing-steps", "4"),
            ("curve-stride", "10"),
            ("paths", "100000"),
            ("dt", "0.001"),
            ("seed", "1"),
            ("start-pi", "0.3"),
            ("dominance-paths", "20000"),
        ] {
            l.values.insert(k.into(), v.into());
        }
        l
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut layer = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", lineno + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
            }
            if layer.values.insert(key.into(), value.trim().into()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }
        layer.check_learning()?;
        Ok(layer)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        debug_assert!(KEYS.contains(&key), "{key}");
        self.values.insert(key.into(), value.to_string());
    }

    pub fn set_opt<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    fn check_learning(&self) -> Result<()> {
        if self.values.contains_key("eps") && self.values.contains_key("total-learning") {
            return Err(Error::Config("eps and total-learning are mutually exclusive".into()));
        }
        Ok(())
    }

    /// Applies `top` over `self`.
    pub fn overlay(mut self, top: &Layers) -> Result<Self> {
        top.check_learning()?;
        if top.values.contains_key("eps") {
            self.values.remove("total-learning");
        }
        if top.values.contains_key("total-learning") {
            self.values.remove("eps");
        }
        self.values.extend(top.values.iter().map(|(k, v)| (k.clone(), v.clone())));
        Ok(self)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {s:?}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| Error::InvalidParameter(format!("{key} is required")))
    }

    /// Model parameters; `eps` wins over `total-learning` only if it is the one present.
    pub fn model(&self) -> Result<ModelParams> {
        let (mu0, mu1, sigma, r) =
            (self.require("mu0")?, self.require("mu1")?, self.require("sigma")?, self.require("r")?);
        let n: usize = self.require("N")?;
        match self.get::<f64>("eps")? {
            Some(eps) => ModelParams::new(mu0, mu1, sigma, r, n, eps),
            None => ModelParams::with_total_learning(mu0, mu1, sigma, r, n, self.require("total-learning")?),
        }
    }

    pub fn numerics(&self) -> Result<Numerics> {
        let pde = PdeConfig {
            theta: self.require("theta")?,
            dt_target: self.get("dt-target")?,
            smoothing_steps: self.require("smoothing-steps")?,
        };
        pde.validate()?;
        let grid = PiGrid::new(self.require("grid")?)?;
        let curve_stride: usize = self.require("curve-stride")?;
        if curve_stride == 0 {
            return Err(Error::InvalidParameter("curve-stride must be >= 1".into()));
        }
        Ok(Numerics { grid, pde, curve_stride })
    }

    pub fn monte_carlo(&self, r: f64) -> Result<MonteCarlo> {
        let mut mc = McConfig::new(self.require("paths")?, self.require("seed")?, r);
        mc.dt = self.require("dt")?;
        if let Some(t) = self.get("t-max")? {
            mc.t_max = t;
        }
        mc.validate()?;
        let start_pi: f64 = self.require("start-pi")?;
        if !(0.0..=1.0).contains(&start_pi) {
            return Err(Error::Domain { value: start_pi, domain: "[0, 1]" });
        }
        Ok(MonteCarlo { mc, start_pi })
    }
}

/// Discretisation settings of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Numerics {
    #[serde(serialize_with = "grid_len")]
    pub grid: PiGrid,
    pub pde: PdeConfig,
    /// Every `curve_stride`-th node goes into curve dumps.
    pub curve_stride: usize,
}

fn grid_len<S: serde::Serializer>(g: &PiGrid, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(g.len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub mc: McConfig,
    pub start_pi: f64,
}

/// `key = value` text that reproduces `p` and `num` when read back.
pub fn resolved_config(p: &ModelParams, num: &Numerics, mc: Option<&MonteCarlo>) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
    line("mu0", p.mu0.to_string());
    line("mu1", p.mu1.to_string());
    line("sigma", p.sigma.to_string());
    line("r", p.r.to_string());
    line("N", p.n_rights.to_string());
    line("eps", p.eps.to_string());
    line("grid", num.grid.len().to_string());
    line("theta", num.pde.theta.to_string());
    line("smoothing-steps", num.pde.smoothing_steps.to_string());
    if let Some(dt) = num.pde.dt_target {
        line("dt-target", dt.to_string());
    }
    line("curve-stride", num.curve_stride.to_string());
    if let Some(m) = mc {
        line("paths", m.mc.n_paths.to_string());
        line("dt", m.mc.dt.to_string());
        line("t-max", m.mc.t_max.to_string());
        line("seed", m.mc.seed.to_string());
        line("start-pi", m.start_pi.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let file = Layers::parse("sigma = 10 # noisy\nN=5\n\neps = 0.05\n").unwrap();
        let mut flags = Layers::default();
        flags.set("N", 7);
        let l = Layers::defaults().overlay(&file).unwrap().overlay(&flags).unwrap();
        let p = l.model().unwrap();
        assert_eq!((p.sigma, p.n_rights, p.eps, p.mu0), (10.0, 7, 0.05, -1.0));
    }

    #[test]
    fn learning_spellings_replace_each_other() {
        let mut flags = Layers::default();
        flags.set("total-learning", 2);
        let file = Layers::parse("eps = 0.05").unwrap();
        let l = Layers::defaults().overlay(&file).unwrap().overlay(&flags).unwrap();
        assert_eq!(l.model().unwrap().eps, 0.2);
        assert!(Layers::parse("eps = 1\ntotal-learning = 2").is_err());
    }

    #[test]
    fn bad_files_are_config_errors() {
        for text in ["sigma 4", "colour = red", "r = 1\nr = 2"] {
            let e = Layers::parse(text).unwrap_err();
            assert!(e.is_input_error(), "{text}: {e}");
        }
        let mut l = Layers::defaults();
        l.set("sigma", "abc");
        assert!(l.model().unwrap_err().is_input_error());
    }

    #[test]
    fn resolved_config_round_trips() {
        let l = Layers::defaults();
        let (p, num, mc) = (l.model().unwrap(), l.numerics().unwrap(), l.monte_carlo(0.1).unwrap());
        let back = Layers::defaults().overlay(&Layers::parse(&resolved_config(&p, &num, Some(&mc))).unwrap()).unwrap();
        assert_eq!(back.model().unwrap(), p);
        assert_eq!(back.numerics().unwrap(), num);
        assert_eq!(back.monte_carlo(0.1).unwrap(), mc);
    }
}
