//! Line-oriented `key = value` run configuration.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fe_space::ElementKind;
use crate::mesh::{build_structured_quadrilateral, build_structured_triangular, Mesh, TriangularVariant};
use crate::problems::PresetName;
use crate::stepper::{Scheme, SchemeConfig, StabDtFactor, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    TriDelaunay,
    TriNonDelaunay,
    Quad,
}

impl FromStr for MeshKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tri_delaunay" => Ok(MeshKind::TriDelaunay),
            "tri_non_delaunay" => Ok(MeshKind::TriNonDelaunay),
            "quad" => Ok(MeshKind::Quad),
            other => Err(Error::invalid(format!(
                "unknown mesh kind `{other}` (expected tri_delaunay, tri_non_delaunay, quad)"
            ))),
        }
    }
}

impl MeshKind {
    fn as_str(self) -> &'static str {
        match self {
            MeshKind::TriDelaunay => "tri_delaunay",
            MeshKind::TriNonDelaunay => "tri_non_delaunay",
            MeshKind::Quad => "quad",
        }
    }
}

/// A fully validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: PresetName,
    pub mesh: MeshKind,
    pub n: usize,
    pub element: ElementKind,
    pub scheme: Scheme,
    pub theta: f64,
    pub dt: f64,
    pub t_final: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub output_dir: PathBuf,
    pub snapshot_stride: usize,
}

const KEYS: &[&str] = &[
    "problem", "mesh", "n", "element", "scheme", "theta", "dt", "T", "gamma", "alpha", "omega",
    "tol", "max_iter", "output_dir", "snapshot_stride",
];
const REQUIRED: &[&str] = &["problem", "mesh", "n", "element", "scheme", "theta", "dt", "T"];

fn cfg_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

impl RunConfig {
    /// Parse the documented `key = value` format: one pair per line, `#`
    /// starts a comment, unknown keys are rejected, and missing required
    /// keys or out-of-range values are configuration errors.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut seen: Vec<(&str, String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(line_no, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim().to_string();
            let canonical = KEYS
                .iter()
                .find(|&&k| k == key)
                .ok_or_else(|| cfg_err(line_no, format!("unknown key `{key}`")))?;
            if seen.iter().any(|(k, _, _)| k == canonical) {
                return Err(cfg_err(line_no, format!("duplicate key `{key}`")));
            }
            if value.is_empty() {
                return Err(cfg_err(line_no, format!("empty value for key `{key}`")));
            }
            seen.push((canonical, value, line_no));
        }

        let lookup = |key: &str| seen.iter().find(|(k, _, _)| *k == key).cloned();
        for &req in REQUIRED {
            if lookup(req).is_none() {
                return Err(cfg_err(0, format!("missing required key `{req}`")));
            }
        }

        fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
            value.parse::<T>().map_err(|_| {
                cfg_err(line, format!("unparsable value `{value}` for key `{key}`"))
            })
        }

        let mut cfg = RunConfig {
            problem: PresetName::Smooth,
            mesh: MeshKind::TriDelaunay,
            n: 2,
            element: ElementKind::P1,
            scheme: Scheme::BoundPreserving,
            theta: 1.0,
            dt: 0.0,
            t_final: 0.0,
            gamma: 0.05,
            alpha: 1.0,
            omega: 0.1,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            output_dir: PathBuf::from("out"),
            snapshot_stride: 1,
        };

        for (key, value, line) in &seen {
            let (value, line) = (value.as_str(), *line);
            match *key {
                "problem" => {
                    cfg.problem = value.parse().map_err(|e| cfg_err(line, format!("{e}")))?
                }
                "mesh" => cfg.mesh = value.parse().map_err(|e| cfg_err(line, format!("{e}")))?,
                "n" => cfg.n = parse_value("n", value, line)?,
                "element" => {
                    cfg.element = value.parse().map_err(|e| cfg_err(line, format!("{e}")))?
                }
                "scheme" => {
                    cfg.scheme = match value {
                        "bp" => Scheme::BoundPreserving,
                        "cip" => Scheme::CipOnly,
                        other => {
                            return Err(cfg_err(
                                line,
                                format!("unknown scheme `{other}` (expected bp or cip)"),
                            ))
                        }
                    }
                }
                "theta" => cfg.theta = parse_value("theta", value, line)?,
                "dt" => cfg.dt = parse_value("dt", value, line)?,
                "T" => cfg.t_final = parse_value("T", value, line)?,
                "gamma" => cfg.gamma = parse_value("gamma", value, line)?,
                "alpha" => cfg.alpha = parse_value("alpha", value, line)?,
                "omega" => cfg.omega = parse_value("omega", value, line)?,
                "tol" => cfg.tol = parse_value("tol", value, line)?,
                "max_iter" => cfg.max_iter = parse_value("max_iter", value, line)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "snapshot_stride" => cfg.snapshot_stride = parse_value("snapshot_stride", value, line)?,
                _ => unreachable!(),
            }
        }

        let line_of = |key: &str| lookup(key).map(|(_, _, l)| l).unwrap_or(0);
        if !(0.5..=1.0).contains(&cfg.theta) {
            return Err(cfg_err(line_of("theta"), format!("theta = {} must lie in [1/2, 1]", cfg.theta)));
        }
        if !(cfg.omega > 0.0 && cfg.omega <= 1.0) {
            return Err(cfg_err(line_of("omega"), format!("omega = {} must lie in (0, 1]", cfg.omega)));
        }
        if cfg.dt <= 0.0 {
            return Err(cfg_err(line_of("dt"), "dt must be positive"));
        }
        if cfg.t_final <= 0.0 {
            return Err(cfg_err(line_of("T"), "T must be positive"));
        }
        if cfg.n < 2 {
            return Err(cfg_err(line_of("n"), "n must be at least 2"));
        }
        if cfg.gamma < 0.0 || cfg.alpha < 0.0 {
            return Err(cfg_err(line_of("gamma"), "gamma and alpha must be nonnegative"));
        }
        if cfg.tol <= 0.0 {
            return Err(cfg_err(line_of("tol"), "tol must be positive"));
        }
        if cfg.max_iter == 0 {
            return Err(cfg_err(line_of("max_iter"), "max_iter must be positive"));
        }
        if cfg.snapshot_stride == 0 {
            return Err(cfg_err(line_of("snapshot_stride"), "snapshot_stride must be positive"));
        }
        let mesh_element_ok = match cfg.mesh {
            MeshKind::Quad => cfg.element == ElementKind::Q1,
            _ => matches!(cfg.element, ElementKind::P1 | ElementKind::P2),
        };
        if !mesh_element_ok {
            return Err(cfg_err(
                line_of("element"),
                format!("element {:?} is incompatible with mesh {}", cfg.element, cfg.mesh.as_str()),
            ));
        }
        Ok(cfg)
    }

    /// Serialize back into the `key = value` format; `parse` of the result
    /// reproduces the config.
    pub fn to_text(&self) -> String {
        let element = match self.element {
            ElementKind::P1 => "p1",
            ElementKind::P2 => "p2",
            ElementKind::Q1 => "q1",
        };
        let scheme = match self.scheme {
            Scheme::BoundPreserving => "bp",
            Scheme::CipOnly => "cip",
        };
        let problem = match self.problem {
            PresetName::Smooth => "smooth",
            PresetName::Rotation => "rotation",
        };
        format!(
            "problem = {problem}\nmesh = {mesh}\nn = {n}\nelement = {element}\n\
             scheme = {scheme}\ntheta = {theta:.17e}\ndt = {dt:.17e}\nT = {t:.17e}\n\
             gamma = {gamma:.17e}\nalpha = {alpha:.17e}\nomega = {omega:.17e}\n\
             tol = {tol:.17e}\nmax_iter = {max_iter}\noutput_dir = {out}\n\
             snapshot_stride = {stride}\n",
            mesh = self.mesh.as_str(),
            n = self.n,
            theta = self.theta,
            dt = self.dt,
            t = self.t_final,
            gamma = self.gamma,
            alpha = self.alpha,
            omega = self.omega,
            tol = self.tol,
            max_iter = self.max_iter,
            out = self.output_dir.display(),
            stride = self.snapshot_stride,
        )
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match self.mesh {
            MeshKind::TriDelaunay => build_structured_triangular(self.n, TriangularVariant::Delaunay),
            MeshKind::TriNonDelaunay => {
                build_structured_triangular(self.n, TriangularVariant::NonDelaunay)
            }
            MeshKind::Quad => build_structured_quadrilateral(self.n),
        }
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        SchemeConfig {
            theta: self.theta,
            dt: self.dt,
            t_final: self.t_final,
            gamma: self.gamma,
            alpha: self.alpha,
            omega: self.omega,
            tol: self.tol,
            max_iter: self.max_iter,
            scheme: self.scheme,
            stab_dt_factor: StabDtFactor::Dt,
        }
    }
}
