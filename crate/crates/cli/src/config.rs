//! TOML run configuration. Every default reproduces the reference
//! Schwarzschild setup (M = 1, b = 0.1, ε₁ = 1/1000, ρ₀ = 1000, margin 2),
//! so the bare commands rerun the headline verification.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context};
use serde::Deserialize;

use morawetz::geometry::{BackgroundModel, CosineProfile, QuadraticProfile};
use morawetz::multiplier::MultiplierG;
use morawetz::sim::{self, presets, Boundary, InitialData, Pulse, RunThresholds, SimConfig};
use morawetz::spectral::{Chi1, SpectralProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Schwarzschild exterior, M = 1, p = 3.
    Paper,
    /// Warped product r = 1 + ρ², p = 3.
    Riemannian,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub multiplier: MultiplierSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub hardy: HardySection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Option<String>,
    pub mass: Option<f64>,
    /// Offset of the profile: r0 for `warped-quadratic` (r = r0 + ρ²),
    /// the additive constant for `warped-cosine` (r = offset + cos ρ).
    pub offset: Option<f64>,
    pub p: Option<f64>,
}

impl ModelSection {
    pub fn build(&self, preset: Preset) -> anyhow::Result<BackgroundModel> {
        let default_kind = match preset {
            Preset::Paper => "schwarzschild",
            Preset::Riemannian => "warped-quadratic",
        };
        let kind = self.kind.as_deref().unwrap_or(default_kind);
        let p = self.p.unwrap_or(3.0);
        let model = match kind {
            "schwarzschild" => {
                let mass = self.mass.unwrap_or(1.0);
                BackgroundModel::with_p(
                    morawetz::geometry::ModelKind::Schwarzschild { mass },
                    p,
                )?
            }
            "warped-quadratic" => BackgroundModel::warped(
                Arc::new(QuadraticProfile {
                    r0: self.offset.unwrap_or(1.0),
                }),
                p,
            )?,
            "warped-cosine" => BackgroundModel::warped(
                Arc::new(CosineProfile {
                    offset: self.offset.unwrap_or(2.0),
                }),
                p,
            )?,
            other => bail!("unknown model kind {other:?}"),
        };
        Ok(model)
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MultiplierSection {
    pub b: Option<f64>,
}

impl MultiplierSection {
    pub fn build(&self) -> anyhow::Result<MultiplierG> {
        Ok(MultiplierG::new(self.b.unwrap_or(0.1))?)
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    pub rho0: Option<f64>,
    pub eps1: Option<f64>,
    pub margin: Option<f64>,
    /// Dense output spacing of the trajectory.
    pub resolution: Option<f64>,
    /// Interior node count of the eigenvalue oracle.
    pub oracle_n: Option<usize>,
}

impl SpectralSection {
    pub fn build(
        &self,
        model: BackgroundModel,
        mult: MultiplierG,
    ) -> anyhow::Result<SpectralProblem> {
        let eps1 = self.eps1.unwrap_or(1e-3);
        // library-level range is (0, 2); the physical condition needs (0, 1)
        if !(eps1 > 0.0 && eps1 < 1.0) {
            bail!("eps1 = {eps1} outside (0, 1)");
        }
        Ok(SpectralProblem::new(
            model,
            mult,
            eps1,
            Chi1::Zero,
            self.rho0.unwrap_or(1000.0),
        )?)
    }

    pub fn margin(&self) -> f64 {
        self.margin.unwrap_or(2.0)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution.unwrap_or(0.25)
    }

    pub fn oracle_n(&self) -> usize {
        self.oracle_n.unwrap_or(200_000)
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct HardySection {
    pub alpha: Option<f64>,
    pub domain: Option<f64>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    /// Support of the bump localizer, centered.
    pub chi_lo: Option<f64>,
    pub chi_hi: Option<f64>,
}

impl HardySection {
    pub fn build(&self) -> anyhow::Result<morawetz::hardy::HardyConfig> {
        let r = self.domain.unwrap_or(100.0);
        let (lo, hi) = (self.chi_lo.unwrap_or(-1.0), self.chi_hi.unwrap_or(1.0));
        if !(hi > lo) {
            bail!("empty localizer support");
        }
        Ok(morawetz::hardy::HardyConfig::new(
            self.alpha.unwrap_or(0.0),
            Arc::new(move |rho| morawetz::smooth_bump(lo, hi, rho)),
            (-r, r),
            self.n.unwrap_or(10_000),
        )?)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(100)
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// One of linear-free, linear-l2, linear-l10, nonlinear-l0.
    pub scenario: Option<String>,
    pub ell: Option<u32>,
    pub nonlinear: Option<bool>,
    pub l: Option<f64>,
    pub h: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub boundary: Option<String>,
    pub frame_interval: Option<usize>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub amplitude: Option<f64>,
    pub drift_max: Option<f64>,
    pub identity_max: Option<f64>,
    /// Attach the certificate-derived weighted-bound constant.
    pub check_bound: Option<bool>,
}

impl SimulateSection {
    pub fn build(&self, eps1: f64) -> anyhow::Result<(SimConfig, RunThresholds)> {
        let scenario = self.scenario.as_deref().unwrap_or("nonlinear-l0");
        let (mut cfg, mut th) = match scenario {
            "linear-free" => presets::linear_free(),
            "linear-l2" => presets::linear_schwarzschild_l2(),
            "linear-l10" => presets::linear_schwarzschild_l10(),
            "nonlinear-l0" => presets::nonlinear_schwarzschild_l0(),
            other => bail!("unknown scenario {other:?}"),
        };
        if let Some(e) = self.ell {
            cfg.ell = e;
        }
        if let Some(nl) = self.nonlinear {
            cfg.nonlinear = nl;
        }
        if let Some(l) = self.l {
            cfg.l = l;
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(t) = self.t_end {
            cfg.t_end = t;
        }
        if let Some(b) = &self.boundary {
            cfg.boundary = match b.as_str() {
                "dirichlet" => Boundary::Dirichlet,
                "outgoing-sponge" => Boundary::Sponge {
                    width_frac: 0.1,
                    strength: 1.0,
                },
                other => bail!("unknown boundary {other:?}"),
            };
        }
        if let Some(f) = self.frame_interval {
            cfg.frame_interval = f;
        }
        if self.center.is_some() || self.width.is_some() || self.amplitude.is_some() {
            cfg.initial = InitialData {
                u: Pulse::Gaussian {
                    center: self.center.unwrap_or(0.0),
                    width: self.width.unwrap_or(5.0),
                    amplitude: self.amplitude.unwrap_or(1.0),
                },
                ut: Pulse::Zero,
            };
        }
        if let Some(d) = self.drift_max {
            th.drift_max = d;
        }
        if let Some(i) = self.identity_max {
            th.identity_max = i;
        }
        if self.check_bound.unwrap_or(true) {
            // certificate-derived constants; skipped for fixtures without a
            // geometry
            if let Ok(c) = sim::certificate_bound_constant(&cfg.model, &cfg.mult, eps1, cfg.l) {
                th.bound_constant = Some(c);
            }
            if let Ok(c) = sim::pairing_energy_constant(&cfg.model, &cfg.mult, cfg.l) {
                th.pairing_constant = Some(c);
            }
        }
        cfg.validate()?;
        Ok((cfg, th))
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub plot_points: Option<usize>,
}

impl OutputSection {
    pub fn plot_points(&self) -> usize {
        self.plot_points.unwrap_or(4000)
    }
}
