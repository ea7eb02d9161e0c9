//! Run and study configuration files.
//!
//! Configs are TOML with one table per concern:
//!
//! ```toml
//! [kernel]
//! profile = "uniform"      # uniform | triangular | quadratic
//! delta = 0.1
//!
//! [flux]
//! local = "burgers"        # burgers | linear_advection | cubic
//! family = "godunov"       # godunov | lax_friedrichs | engquist_osher | upwind_linear
//!
//! [problem]
//! name = "burgers_shock"   # burgers_shock | burgers_rarefaction | advect_bump | constant
//!
//! [grid]
//! dx = 0.015625
//!
//! [scheme]
//! T = 0.5
//! ```
//!
//! Unknown keys are rejected. Optional keys are filled in by [`Config::finalize`]
//! so that a finalized config written back out parses to the same value.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{FluxFamily, LocalFlux, TwoPointFlux};
use crate::grid::Boundary;
use crate::harness::{Problem, ProblemKind, Regime, StudyOptions};
use crate::kernel::{Kernel, Profile};
use crate::scheme::{SchemeConfig, Workers};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default = "default_profile")]
    pub profile: String,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSection {
    pub local: String,
    pub family: String,
    /// Lax-Friedrichs flux parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Advection speed for `linear_advection`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(rename = "T")]
    pub final_time: f64,
    /// Mesh ratio `dt / dx`; defaults to `safety` times the CFL limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(default = "default_regime")]
    pub regime: String,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// `delta = coupling * dx` in the joint limit.
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_true")]
    pub check_entropy: bool,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            regime: default_regime(),
            levels: default_levels(),
            coupling: default_coupling(),
            window: None,
            check_entropy: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: String,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out(), threads: 0 }
    }
}

fn default_profile() -> String {
    "uniform".into()
}
fn default_safety() -> f64 {
    0.9
}
fn default_snapshots() -> usize {
    9
}
fn default_regime() -> String {
    "fixed_delta".into()
}
fn default_levels() -> usize {
    4
}
fn default_coupling() -> f64 {
    2.0
}
fn default_true() -> bool {
    true
}
fn default_out() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kernel: KernelSection,
    pub flux: FluxSection,
    pub problem: ProblemSection,
    pub grid: GridSection,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub output: OutputSection,
}

/// The sections that determine the numbers; output location and thread
/// count are left out so that echoed configs do not depend on them.
#[derive(Debug, Serialize)]
pub struct ConfigEcho<'a> {
    pub kernel: &'a KernelSection,
    pub flux: &'a FluxSection,
    pub problem: &'a ProblemSection,
    pub grid: &'a GridSection,
    pub scheme: &'a SchemeSection,
    pub study: &'a StudySection,
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub dx: Option<f64>,
    pub delta: Option<f64>,
    pub flux: Option<String>,
    pub final_time: Option<f64>,
    pub levels: Option<usize>,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

impl Config {
    /// Parses without validation.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn echo(&self) -> ConfigEcho<'_> {
        ConfigEcho {
            kernel: &self.kernel,
            flux: &self.flux,
            problem: &self.problem,
            grid: &self.grid,
            scheme: &self.scheme,
            study: &self.study,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads, applies overrides, validates and fills defaults.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        config.apply(overrides);
        config.finalize()?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dx) = o.dx {
            self.grid.dx = dx;
        }
        if let Some(delta) = o.delta {
            self.kernel.delta = delta;
        }
        if let Some(family) = &o.flux {
            self.flux.family = family.clone();
        }
        if let Some(t) = o.final_time {
            self.scheme.final_time = t;
        }
        if let Some(levels) = o.levels {
            self.study.levels = levels;
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(threads) = o.threads {
            self.output.threads = threads;
        }
    }

    /// Validates every section and fills optional keys, including a default
    /// mesh ratio of `safety` times the CFL limit on the initial data range.
    pub fn finalize(&mut self) -> Result<()> {
        positive("grid.dx", self.grid.dx)?;
        positive("kernel.delta", self.kernel.delta)?;
        if !(self.scheme.final_time.is_finite() && self.scheme.final_time > 0.0) {
            return Err(Error::Config(format!("scheme.T must be positive, got {}", self.scheme.final_time)));
        }
        if !(self.scheme.safety > 0.0 && self.scheme.safety <= 1.0) {
            return Err(Error::Config(format!("scheme.safety must lie in (0, 1], got {}", self.scheme.safety)));
        }
        if self.study.levels < 2 {
            return Err(Error::Config(format!("study.levels must be at least 2, got {}", self.study.levels)));
        }
        positive("study.coupling", self.study.coupling)?;
        self.regime()?;

        let problem = self.problem()?;
        if let Some(b) = &self.problem.boundary {
            Boundary::from_key(b)?;
        }
        if let Some([a, b]) = self.study.window {
            if !(a < b) || a < problem.domain.0 || b > problem.domain.1 {
                return Err(Error::WindowOutsideDomain { a, b, lo: problem.domain.0, hi: problem.domain.1 });
            }
        }

        let flux = self.two_point_flux()?;
        let (b1, b2) = problem.data_box();
        flux.check_monotone_on(b1, b2)?;
        let probe = SchemeConfig {
            kernel: self.kernel()?,
            flux,
            mesh_ratio: 1.0,
            final_time: self.scheme.final_time,
            safety: self.scheme.safety,
        };
        let max_ratio = probe.max_mesh_ratio(b1, b2)?;
        match self.scheme.lambda {
            Some(lambda) => {
                positive("scheme.lambda", lambda)?;
                SchemeConfig { mesh_ratio: lambda, ..probe }.check_cfl(b1, b2)?;
            }
            None => {
                let lambda = if max_ratio.is_finite() { self.scheme.safety * max_ratio } else { self.scheme.safety };
                self.scheme.lambda = Some(lambda);
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<Kernel> {
        Kernel::new(self.kernel.delta, Profile::from_key(&self.kernel.profile)?)
    }

    pub fn local_flux(&self) -> Result<LocalFlux> {
        match self.flux.local.as_str() {
            "burgers" => Ok(LocalFlux::Burgers),
            "cubic" => Ok(LocalFlux::Cubic),
            "linear_advection" => Ok(LocalFlux::LinearAdvection { speed: self.flux.speed.unwrap_or(1.0) }),
            other => Err(Error::Config(format!(
                "unknown local flux `{other}`; valid keys: burgers, linear_advection, cubic"
            ))),
        }
    }

    pub fn two_point_flux(&self) -> Result<TwoPointFlux> {
        let family = match self.flux.family.as_str() {
            "godunov" => FluxFamily::Godunov,
            "engquist_osher" => FluxFamily::EngquistOsher,
            "upwind_linear" => FluxFamily::UpwindLinear,
            "lax_friedrichs" => FluxFamily::LaxFriedrichs {
                lambda: self
                    .flux
                    .lambda
                    .ok_or_else(|| Error::Config("flux.lambda is required for lax_friedrichs".into()))?,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown flux family `{other}`; valid keys: {}",
                    FluxFamily::KEYS.join(", ")
                )))
            }
        };
        TwoPointFlux::new(self.local_flux()?, family)
    }

    pub fn problem(&self) -> Result<Problem> {
        let mut p = Problem::from_kind(ProblemKind::from_key(&self.problem.name)?);
        if let Some(v) = self.problem.left {
            p.left = v;
        }
        if let Some(v) = self.problem.right {
            p.right = v;
        }
        if p.kind == ProblemKind::Constant {
            p.right = p.left;
        }
        if let Some(v) = self.problem.origin {
            p.origin = v;
        }
        if let Some([a, b]) = self.problem.domain {
            if !(a < b) {
                return Err(Error::Config(format!("problem.domain [{a}, {b}] is empty")));
            }
            p.domain = (a, b);
        }
        if let Some(b) = &self.problem.boundary {
            p.boundary = Boundary::from_key(b)?;
        }
        Ok(p)
    }

    pub fn regime(&self) -> Result<Regime> {
        match self.study.regime.as_str() {
            "fixed_delta" => Ok(Regime::FixedDelta),
            "joint_limit" => Ok(Regime::JointLimit),
            other => Err(Error::Config(format!("unknown regime `{other}`; valid keys: fixed_delta, joint_limit"))),
        }
    }

    /// Scheme parameters; call after [`Config::finalize`].
    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let config = SchemeConfig {
            kernel: self.kernel()?,
            flux: self.two_point_flux()?,
            mesh_ratio: self.scheme.lambda.ok_or_else(|| Error::Config("config not finalized".into()))?,
            final_time: self.scheme.final_time,
            safety: self.scheme.safety,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn workers(&self) -> Workers {
        match self.output.threads {
            0 => Workers::Global,
            1 => Workers::Serial,
            n => Workers::Threads(n),
        }
    }

    pub fn study_options(&self) -> StudyOptions {
        StudyOptions {
            snapshots: self.scheme.snapshots,
            check_entropy: self.study.check_entropy,
            workers: self.workers(),
            window: self.study.window.map(|[a, b]| (a, b)),
            timing: false,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[kernel]
delta = 0.1

[flux]
local = "burgers"
family = "godunov"

[problem]
name = "burgers_shock"

[grid]
dx = 0.015625

[scheme]
T = 0.5
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let mut c = Config::from_toml(MINIMAL).unwrap();
        c.finalize().unwrap();
        assert_eq!(c.scheme.safety, 0.9);
        assert_eq!(c.kernel.profile, "uniform");
        // data box [0, 1] gives L1 + L2 = 1
        assert!((c.scheme.lambda.unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(c.study.levels, 4);
        assert_eq!(c.study_options().window, None);
        let p = c.problem().unwrap();
        let w = p.default_window(&LocalFlux::Burgers, 0.1, 0.5);
        assert!(w.0 > p.domain.0 && w.1 < p.domain.1);
    }

    #[test]
    fn finalized_config_round_trips() {
        let mut c = Config::from_toml(MINIMAL).unwrap();
        c.study.window = Some([-0.5, 1.5]);
        c.flux.family = "lax_friedrichs".into();
        c.flux.lambda = Some(1.0);
        c.finalize().unwrap();
        let text = c.to_toml().unwrap();
        let back = Config::from_toml(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_large_mesh_ratio_with_bound() {
        let text = MINIMAL.replace("T = 0.5", "T = 0.5\nlambda = 1.5");
        let mut c = Config::from_toml(&text).unwrap();
        let err = c.finalize().unwrap_err();
        assert!(matches!(err, Error::CflViolation { bound, .. } if (bound - 1.0).abs() < 1e-15), "{err}");
    }

    #[test]
    fn unknown_flux_lists_valid_keys() {
        let text = MINIMAL.replace("family = \"godunov\"", "family = \"roe\"");
        let mut c = Config::from_toml(&text).unwrap();
        let msg = c.finalize().unwrap_err().to_string();
        assert!(msg.contains("godunov") && msg.contains("engquist_osher"), "{msg}");
    }

    #[test]
    fn unknown_and_missing_keys() {
        let text = MINIMAL.replace("dx = 0.015625", "dx = 0.015625\ncells = 3");
        assert!(Config::from_toml(&text).unwrap_err().to_string().contains("cells"));
        let text = MINIMAL.replace("dx = 0.015625", "");
        assert!(Config::from_toml(&text).unwrap_err().to_string().contains("dx"));
    }

    #[test]
    fn nonpositive_values_rejected() {
        for (from, to) in [("dx = 0.015625", "dx = 0.0"), ("delta = 0.1", "delta = -0.1"), ("T = 0.5", "T = 0")] {
            let mut c = Config::from_toml(&MINIMAL.replace(from, to)).unwrap();
            assert!(c.finalize().is_err(), "{to}");
        }
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = Config::from_toml(MINIMAL).unwrap();
        c.apply(&Overrides { dx: Some(0.5), flux: Some("engquist_osher".into()), levels: Some(6), ..Default::default() });
        c.finalize().unwrap();
        assert_eq!(c.grid.dx, 0.5);
        assert_eq!(c.study.levels, 6);
        assert_eq!(c.two_point_flux().unwrap().family, FluxFamily::EngquistOsher);
    }
}
