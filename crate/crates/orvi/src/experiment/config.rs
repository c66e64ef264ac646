//! Declarative experiment description (TOML). See `presets/*.toml` for
//! complete examples; every field is documented in the README.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{Quadrature, SamplingGrid, Variant};
use crate::sim::{ExplorationSignal, FeedbackSource, Tone};
use crate::vi::{BoundSchedule, StepSchedule, ViConfig, Weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Real poles of the filter polynomial (a pole may also be written as
    /// `[re, im]`; conjugates must be listed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observer_poles: Option<Vec<Pole>>,
    /// Run the p-copy internal model driven by `e`.
    #[serde(default = "yes")]
    pub internal_model: bool,
    pub plant: PlantConfig,
    pub exosystem: ExosystemConfig,
    pub initial: InitialConfig,
    pub exploration: ExplorationConfig,
    pub simulation: SimulationConfig,
    pub grid: GridConfig,
    pub learning: LearningConfig,
    pub evaluation: EvaluationConfig,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Pole {
    Real(f64),
    Complex([f64; 2]),
}

impl Pole {
    pub fn value(self) -> Complex<f64> {
        match self {
            Pole::Real(r) => Complex::new(r, 0.0),
            Pole::Complex([re, im]) => Complex::new(re, im),
        }
    }
}

/// Model matrices; only the simulated plant and the oracle read them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
    pub f: Vec<Vec<f64>>,
}

/// The exosystem in companion coordinates: `v̇ = S v` with `S` the
/// companion matrix of the minimal polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExosystemConfig {
    /// Low-order coefficients `[c_0, …, c_{d-1}]` of the monic polynomial.
    pub minimal_polynomial: Vec<f64>,
    pub v0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplorationConfig {
    pub source: FeedbackSource,
    pub gain: Vec<Vec<f64>>,
    #[serde(default)]
    pub tones: Vec<Tone<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub h: f64,
    /// End of data collection; the learned policy takes over here.
    pub switch_time: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t0: f64,
    pub dt: f64,
    pub s: usize,
    #[serde(default)]
    pub quadrature: Quadrature,
}

/// A scalar `w` means `w·I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Scale(f64),
    Matrix(Vec<Vec<f64>>),
}

impl WeightSpec {
    pub fn matrix(&self, name: &str, n: usize) -> Result<DMatrix<f64>> {
        let m = match self {
            WeightSpec::Scale(w) => DMatrix::identity(n, n) * *w,
            WeightSpec::Matrix(rows) => to_matrix(name, rows)?,
        };
        if m.shape() != (n, n) {
            return Err(Error::Config(format!("{name} must be {n}x{n}")));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalStep {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearBound {
    pub scale: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningConfig {
    pub variant: Variant,
    pub p0: WeightSpec,
    /// `ε_k = a / (k + b)`
    pub step: RationalStep,
    /// `r_j = scale · (j + offset)`
    pub bounds: LinearBound,
    pub eps_conv: f64,
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qy: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qz: Option<WeightSpec>,
    pub r: WeightSpec,
    #[serde(default = "yes")]
    pub enforce_rank: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    /// `|e(t)|` is checked for `t ≥ settle_time`.
    pub settle_time: f64,
    pub tolerance: f64,
}

/// Row-major nested arrays, as written in the config.
pub fn to_matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if r == 0 || c == 0 || rows.iter().any(|x| x.len() != c) {
        return Err(Error::Config(format!("{name} must be a non-empty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Sizes implied by the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigDims {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub n_zeta: usize,
    pub n_z: usize,
}

impl ConfigDims {
    pub fn n_rho(&self) -> usize {
        self.n_zeta + self.n_z
    }

    /// Size of the learning state for a variant.
    pub fn learning_dim(&self, v: Variant) -> usize {
        match v {
            Variant::StateFeedback => self.n,
            Variant::OutputFeedback => self.n_zeta,
            _ => self.n_rho(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn needs_filter(&self) -> bool {
        self.learning.variant != Variant::StateFeedback || self.exploration.source != FeedbackSource::State
    }

    pub fn dims(&self) -> Result<ConfigDims> {
        let a = to_matrix("plant.a", &self.plant.a)?;
        let b = to_matrix("plant.b", &self.plant.b)?;
        let c = to_matrix("plant.c", &self.plant.c)?;
        let (n, m, p) = (a.nrows(), b.ncols(), c.nrows());
        let q = self.exosystem.minimal_polynomial.len();
        let n_zeta = if self.observer_poles.is_some() { n * (m + p) } else { 0 };
        let n_z = if self.internal_model { p * q } else { 0 };
        Ok(ConfigDims { n, m, p, q, n_zeta, n_z })
    }

    pub fn poles(&self) -> Option<Vec<Complex<f64>>> {
        self.observer_poles.as_ref().map(|v| v.iter().map(|p| p.value()).collect())
    }

    /// Every cross-reference is checked here, before any simulation.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        let d = self.dims()?;
        let shape = |name: &str, rows: &[Vec<f64>], r: usize, c: usize| -> Result<()> {
            let m = to_matrix(name, rows)?;
            if m.shape() != (r, c) {
                return Err(Error::Config(format!("{name} is {}x{}, expected {r}x{c}", m.nrows(), m.ncols())));
            }
            Ok(())
        };
        shape("plant.a", &self.plant.a, d.n, d.n)?;
        shape("plant.b", &self.plant.b, d.n, d.m)?;
        shape("plant.c", &self.plant.c, d.p, d.n)?;
        shape("plant.e", &self.plant.e, d.n, d.q)?;
        shape("plant.f", &self.plant.f, d.p, d.q)?;
        if d.q == 0 {
            return cfg("exosystem.minimal_polynomial needs degree ≥ 1".into());
        }
        if self.exosystem.v0.len() != d.q {
            return cfg(format!("exosystem.v0 has {} entries, expected {}", self.exosystem.v0.len(), d.q));
        }
        if self.initial.x0.len() != d.n {
            return cfg(format!("initial.x0 has {} entries, expected {}", self.initial.x0.len(), d.n));
        }
        if let Some(poles) = &self.observer_poles {
            if poles.len() != d.n {
                return cfg(format!("{} observer poles for a plant of order {}", poles.len(), d.n));
            }
            if poles.iter().any(|p| !(p.value().re < 0.0)) {
                return cfg("observer poles must lie in the open left half-plane".into());
            }
        } else if self.needs_filter() {
            return cfg("observer_poles are required for this variant / exploration source".into());
        }
        if let Some(z) = &self.initial.zeta0 {
            if z.len() != d.n_zeta {
                return cfg(format!("initial.zeta0 has {} entries, expected {}", z.len(), d.n_zeta));
            }
        }
        if let Some(z) = &self.initial.z0 {
            if z.len() != d.n_z {
                return cfg(format!("initial.z0 has {} entries, expected {}", z.len(), d.n_z));
            }
        }
        let v = self.learning.variant;
        if v.is_regulator() && !self.internal_model {
            return cfg(format!("{v} needs the internal model"));
        }
        let src_dim = match self.exploration.source {
            FeedbackSource::State => d.n,
            FeedbackSource::Zeta => d.n_zeta,
            FeedbackSource::Rho => d.n_rho(),
        };
        shape("exploration.gain", &self.exploration.gain, d.m, src_dim)?;
        for t in &self.exploration.tones {
            if t.channel >= d.m || !t.amplitude.is_finite() || !t.frequency.is_finite() || !t.phase.is_finite() {
                return cfg(format!("exploration tone on channel {} is invalid", t.channel));
            }
        }
        let s = &self.simulation;
        if !(s.h > 0.0 && s.switch_time > 0.0 && s.horizon >= s.switch_time) {
            return cfg("simulation needs h > 0 and 0 < switch_time ≤ horizon".into());
        }
        for (name, t) in [("switch_time", s.switch_time), ("horizon", s.horizon)] {
            let k = t / s.h;
            if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
                return cfg(format!("simulation.{name} is not a multiple of h"));
            }
        }
        let g = &self.grid;
        if g.s == 0 || !(g.dt > 0.0) || g.t0 < 0.0 {
            return cfg("grid needs s ≥ 1, dt > 0, t0 ≥ 0".into());
        }
        if g.t0 + g.dt * g.s as f64 > s.switch_time * (1.0 + 1e-12) {
            return cfg("sampling grid extends past the policy switch".into());
        }
        let e = &self.evaluation;
        if !(e.tolerance > 0.0) || e.settle_time < s.switch_time || e.settle_time > s.horizon {
            return cfg("evaluation needs tolerance > 0 and switch_time ≤ settle_time ≤ horizon".into());
        }
        self.vi_config(&d)?;
        Ok(())
    }

    pub fn sampling_grid(&self) -> SamplingGrid<f64> {
        SamplingGrid { t0: self.grid.t0, dt: self.grid.dt, s: self.grid.s }
    }

    pub fn exploration_signal(&self, m: usize) -> ExplorationSignal<f64> {
        ExplorationSignal { inputs: m, tones: self.exploration.tones.clone() }
    }

    pub fn vi_config(&self, d: &ConfigDims) -> Result<ViConfig<f64>> {
        let l = &self.learning;
        let n = d.learning_dim(l.variant);
        let opt = |w: &Option<WeightSpec>, name: &str, k: usize| w.as_ref().map(|w| w.matrix(name, k)).transpose();
        let weights = Weights {
            q: opt(&l.q, "learning.q", n)?,
            qy: opt(&l.qy, "learning.qy", d.p)?,
            qz: opt(&l.qz, "learning.qz", d.n_z)?,
            r: l.r.matrix("learning.r", d.m)?,
        };
        if l.variant.output_cost() {
            if weights.qy.is_none() || (l.variant.is_regulator() && weights.qz.is_none()) {
                return Err(Error::Config(format!("{} needs learning.qy and learning.qz", l.variant)));
            }
        } else if weights.q.is_none() {
            return Err(Error::Config(format!("{} needs learning.q", l.variant)));
        }
        if !(l.eps_conv > 0.0) || l.max_iters == 0 {
            return Err(Error::Config("learning needs eps_conv > 0 and max_iters ≥ 1".into()));
        }
        Ok(ViConfig {
            p0: l.p0.matrix("learning.p0", n)?,
            step: StepSchedule::new(l.step.a, l.step.b)?,
            bounds: BoundSchedule::new(l.bounds.scale, l.bounds.offset)?,
            eps_conv: l.eps_conv,
            max_iters: l.max_iters,
            weights,
            enforce_rank: l.enforce_rank,
        })
    }

    /// State-weight block `Q̄ = blockdiag(Q_y, Q_z)` used by the oracle for
    /// output-cost comparisons.
    pub fn q_bar(&self, d: &ConfigDims) -> Result<DMatrix<f64>> {
        let l = &self.learning;
        let qy = l.qy.as_ref().map_or(Ok(DMatrix::identity(d.p, d.p)), |w| w.matrix("learning.qy", d.p))?;
        let qz = l.qz.as_ref().map_or(Ok(DMatrix::identity(d.n_z, d.n_z)), |w| w.matrix("learning.qz", d.n_z))?;
        Ok(crate::linalg::block_diag(&[&qy, &qz]))
    }

    pub fn v0(&self) -> DVector<f64> {
        DVector::from_vec(self.exosystem.v0.clone())
    }
}
