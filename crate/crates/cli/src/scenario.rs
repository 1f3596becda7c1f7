//! JSON scenario files (`"schema": 1`). Unknown keys are rejected everywhere.

use crate::CliError;
use dualgain::brownian::{BrownianControl, BrownianParams};
use dualgain::inversion::{InversionControl, InversionMethod};
use dualgain::mc::MCConfig;
use dualgain::model::{DualModelParams, InterarrivalSpec, LatticeParams};
use dualgain::transforms::SeriesControl;
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    #[serde(default)]
    pub brownian: Option<BrownianSpec>,
    #[serde(default)]
    pub numerics: NumericsSpec,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub outputs: OutputsSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub a: f64,
    pub interarrival: InterarrivalJson,
    pub gain: GainJson,
    #[serde(default)]
    pub mixture: Option<MixtureJson>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterarrivalJson {
    Exponential { rate: f64 },
    Erlang { shape: u32, rate: f64 },
    Deterministic { d: f64 },
    HyperExponential { weights: Vec<f64>, rates: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainJson {
    Exponential { mu: f64 },
    None,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureJson {
    pub p: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub b: f64,
    pub n_levels: usize,
    pub lambda: f64,
    pub q: f64,
    /// Defaults to `model.a`.
    #[serde(default)]
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownianSpec {
    pub eta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSpec {
    #[serde(default)]
    pub series: SeriesSpec,
    #[serde(default)]
    pub inversion: InversionSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSpec {
    pub tail_tolerance: f64,
    pub max_terms: usize,
    pub singularity_guard: Option<f64>,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        let d = SeriesControl::default();
        Self { tail_tolerance: d.tail_tolerance, max_terms: d.max_terms, singularity_guard: d.singularity_guard }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodJson {
    Euler,
    Talbot,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionSpec {
    pub method: MethodJson,
    pub terms: usize,
    pub contour_shift: f64,
    pub precision_target: f64,
}

impl Default for InversionSpec {
    fn default() -> Self {
        let d = InversionControl::default();
        Self {
            method: MethodJson::Euler,
            terms: d.terms,
            contour_shift: d.contour_shift,
            precision_target: d.precision_target,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        let d = BrownianControl::default();
        Self { nodes: d.nodes, rel_tol: d.rel_tol }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSpec {
    pub paths: usize,
    pub seed: u64,
    pub escape_factor: f64,
    pub time_cap: f64,
    pub euler_dt: f64,
    pub threads: usize,
}

impl Default for McSpec {
    fn default() -> Self {
        let d = MCConfig::default();
        Self {
            paths: d.paths,
            seed: d.seed,
            escape_factor: d.escape_factor,
            time_cap: d.time_cap,
            euler_dt: d.euler_dt,
            threads: d.threads,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsSpec {
    /// Evaluation points in capital units.
    pub x: Vec<f64>,
    pub x_grid: Option<GridSpec>,
    /// Lattice indices `n`, evaluated at `L_n`.
    pub levels: Vec<usize>,
    /// Transform arguments `[re, im]`.
    pub s: Vec<[f64; 2]>,
    pub alpha: f64,
    /// Lattice sizes for convergence sweeps.
    pub n_sweep: Vec<usize>,
    /// Estimands for `simulate`: `ruin_prob`, `ruin_time`, `lattice`, `brownian`.
    pub quantities: Vec<String>,
    /// Checks run by `compare`.
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub check: String,
    #[serde(default)]
    pub quantity: Option<String>,
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub levels: Vec<usize>,
    #[serde(default)]
    pub s: Vec<[f64; 2]>,
    #[serde(default)]
    pub n_sweep: Vec<usize>,
    /// Relative allowance added to `3 stderr` in Monte-Carlo checks.
    #[serde(default)]
    pub allowance: Option<f64>,
    /// Overrides the default tolerance of deterministic checks.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn invalid(e: dualgain::Error) -> CliError {
    CliError::Schema(e.to_string())
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let scn: Scenario = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        if scn.schema != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "schema: unsupported version {} (expected {SCHEMA_VERSION})",
                scn.schema
            )));
        }
        scn.validate()?;
        Ok(scn)
    }

    /// Validate every present section.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.model.is_some() {
            self.model()?;
        }
        if self.lattice.is_some() {
            self.lattice()?;
        }
        if self.brownian.is_some() {
            self.brownian()?;
        }
        self.series()?;
        self.inversion()?;
        self.mc()?;
        if let Some(g) = &self.outputs.x_grid {
            if g.count < 1 || !(g.stop >= g.start) {
                return Err(CliError::Schema("outputs.x_grid: need count >= 1 and stop >= start".into()));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<DualModelParams, CliError> {
        let m = self.model.as_ref().ok_or_else(|| CliError::Schema("model: section is required".into()))?;
        let ia = match &m.interarrival {
            InterarrivalJson::Exponential { rate } => InterarrivalSpec::exponential(*rate),
            InterarrivalJson::Erlang { shape, rate } => InterarrivalSpec::erlang(*shape, *rate),
            InterarrivalJson::Deterministic { d } => InterarrivalSpec::deterministic(*d),
            InterarrivalJson::HyperExponential { weights, rates } => {
                InterarrivalSpec::hyper_exponential(weights.clone(), rates.clone())
            }
        }
        .map_err(invalid)?;
        let base = match m.gain {
            GainJson::Exponential { mu } => DualModelParams::new(m.a, mu, ia),
            GainJson::None => DualModelParams::without_additive_gain(m.a, ia),
        }
        .map_err(invalid)?;
        match &m.mixture {
            Some(mx) => base.with_mixture(mx.p, mx.delta).map_err(invalid),
            None => Ok(base),
        }
    }

    pub fn lattice(&self) -> Result<LatticeParams, CliError> {
        let l = self.lattice.as_ref().ok_or_else(|| CliError::Schema("lattice: section is required".into()))?;
        let a = match (l.a, &self.model) {
            (Some(a), _) => a,
            (None, Some(m)) => m.a,
            (None, None) => return Err(CliError::Schema("lattice.a: required when there is no model section".into())),
        };
        LatticeParams::new(l.b, l.n_levels, l.lambda, l.q, a).map_err(invalid)
    }

    /// The lattice with `N` levels replaced.
    pub fn lattice_with(&self, n_levels: usize) -> Result<LatticeParams, CliError> {
        let mut l = self.lattice()?;
        l.n_levels = n_levels;
        l.validate().map_err(invalid)?;
        Ok(l)
    }

    pub fn brownian(&self) -> Result<BrownianParams, CliError> {
        let b = self.brownian.as_ref().ok_or_else(|| CliError::Schema("brownian: section is required".into()))?;
        BrownianParams::new(b.eta, b.sigma, self.lattice()?).map_err(invalid)
    }

    pub fn series(&self) -> Result<SeriesControl, CliError> {
        let s = &self.numerics.series;
        let c = SeriesControl {
            tail_tolerance: s.tail_tolerance,
            max_terms: s.max_terms,
            singularity_guard: s.singularity_guard,
        };
        c.validate().map_err(invalid)?;
        Ok(c)
    }

    pub fn inversion(&self) -> Result<InversionControl, CliError> {
        let i = &self.numerics.inversion;
        let c = InversionControl {
            method: match i.method {
                MethodJson::Euler => InversionMethod::EulerSummation,
                MethodJson::Talbot => InversionMethod::Talbot,
            },
            terms: i.terms,
            contour_shift: i.contour_shift,
            precision_target: i.precision_target,
        };
        c.validate().map_err(invalid)?;
        Ok(c)
    }

    pub fn quadrature(&self) -> BrownianControl {
        BrownianControl { nodes: self.numerics.quadrature.nodes, rel_tol: self.numerics.quadrature.rel_tol }
    }

    pub fn mc(&self) -> Result<MCConfig, CliError> {
        let m = &self.mc;
        let c = MCConfig {
            paths: m.paths,
            seed: m.seed,
            escape_factor: m.escape_factor,
            time_cap: m.time_cap,
            euler_dt: m.euler_dt,
            threads: m.threads,
        };
        c.validate().map_err(invalid)?;
        Ok(c)
    }

    /// `outputs.x` followed by the `x_grid` points.
    pub fn x_points(&self) -> Vec<f64> {
        let mut xs = self.outputs.x.clone();
        if let Some(g) = &self.outputs.x_grid {
            if g.count == 1 {
                xs.push(g.start);
            } else {
                let h = (g.stop - g.start) / (g.count - 1) as f64;
                xs.extend((0..g.count).map(|i| g.start + h * i as f64));
            }
        }
        xs
    }
}
