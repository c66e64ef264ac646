//! simulate → collect → learn → switch policy → evaluate, with an oracle
//! running alongside for comparison only.
//!
//! The learner sees the trajectory log, the filter and internal model it
//! built itself, and their known input matrices. Plant matrices reach the
//! simulated world and the oracle only; a blinded run hands the model side
//! a NaN-poisoned plant to certify this.

pub mod config;
pub mod presets;
pub mod verify;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::internal_model::{build_p_copy, InternalModel};
use crate::linalg::vstack;
use crate::observer::ObserverFilter;
use crate::oracle::{
    build_augmented_aux, compute_parameterization, place_observer_gain, solve_care, verify_riccati_correspondence,
    AugmentedAux, ObserverParameterization,
};
use crate::regression::{build_regression, RankReport, RegressionData, Variant};
use crate::sim::{simulate, FeedbackSource, Interconnection, Policy, PolicySchedule, SimSettings, TrajectoryLog};
use crate::system::{Exosystem, LtiPlant};
use crate::vi::{vi_run, StopReason, ViResult};

pub use config::{ConfigDims, ExperimentConfig};

/// Everything the learner is allowed to build: no plant matrices.
#[derive(Debug, Clone)]
pub struct LearnerSide {
    pub filter: Option<ObserverFilter<f64>>,
    pub internal_model: Option<InternalModel<f64>>,
    pub exosystem: Exosystem<f64>,
}

impl LearnerSide {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let d = cfg.dims()?;
        let filter = match cfg.poles() {
            Some(poles) => Some(ObserverFilter::from_poles(&poles, d.m, d.p)?),
            None => None,
        };
        let internal_model =
            if cfg.internal_model { Some(build_p_copy(&cfg.exosystem.minimal_polynomial, d.p)?) } else { None };
        let exosystem = crate::internal_model::recast_exosystem(&cfg.exosystem.minimal_polynomial, &cfg.v0())?;
        Ok(Self { filter, internal_model, exosystem })
    }

    /// Known input matrix of the learning state (`B_ζ` or `B_ρ = [B_ζ; 0]`).
    pub fn known_input_matrix(&self, variant: Variant) -> Result<Option<DMatrix<f64>>> {
        let filter =
            || self.filter.as_ref().ok_or_else(|| Error::Config(format!("{variant} needs the observer filter")));
        Ok(match variant {
            Variant::StateFeedback => None,
            Variant::OutputFeedback => Some(filter()?.b_zeta.clone()),
            _ => {
                let f = filter()?;
                let nz = self.internal_model.as_ref().map_or(0, |im| im.n_z());
                Some(vstack(&[&f.b_zeta, &DMatrix::zeros(nz, f.inputs)])?)
            }
        })
    }
}

pub fn plant_from_config(cfg: &ExperimentConfig) -> Result<LtiPlant<f64>> {
    use config::to_matrix;
    let p = &cfg.plant;
    LtiPlant::unchecked(
        to_matrix("plant.a", &p.a)?,
        to_matrix("plant.b", &p.b)?,
        to_matrix("plant.c", &p.c)?,
        to_matrix("plant.e", &p.e)?,
        to_matrix("plant.f", &p.f)?,
    )
}

/// Same shapes, every entry NaN.
pub fn poison(plant: &LtiPlant<f64>) -> LtiPlant<f64> {
    let nan = |m: &DMatrix<f64>| DMatrix::from_element(m.nrows(), m.ncols(), f64::NAN);
    LtiPlant { a: nan(&plant.a), b: nan(&plant.b), c: nan(&plant.c), e: nan(&plant.e), f: nan(&plant.f) }
}

/// Model-based references for one config.
#[derive(Debug, Clone)]
pub struct OracleRefs {
    pub l: DMatrix<f64>,
    pub param: Option<ObserverParameterization<f64>>,
    pub aux: Option<AugmentedAux<f64>>,
    /// Optimal value matrix and gain in the learner's coordinates.
    pub p_star: DMatrix<f64>,
    pub k_star: DMatrix<f64>,
    pub correspondence: Option<(f64, f64)>,
}

pub fn oracle_refs(cfg: &ExperimentConfig, plant: &LtiPlant<f64>, learner: &LearnerSide) -> Result<OracleRefs> {
    let d = cfg.dims()?;
    let vi = cfg.vi_config(&d)?;
    let r = &vi.weights.r;
    let (param, l) = match (&learner.filter, cfg.poles()) {
        (Some(f), Some(poles)) => {
            let l = place_observer_gain(&plant.a, &plant.c, &poles)?;
            (Some(compute_parameterization(plant, &l, f.lambda())?), l)
        }
        _ => (None, DMatrix::zeros(d.n, d.p)),
    };
    let aux = match (&param, &learner.internal_model) {
        (Some(param), Some(im)) => Some(build_augmented_aux(plant, param, im, &learner.exosystem)?),
        _ => None,
    };
    let need = |what: &str| Error::Config(format!("oracle reference needs {what}"));
    let variant = cfg.learning.variant;
    let (p_star, k_star, correspondence) = match variant {
        Variant::StateFeedback => {
            let s = solve_care(&plant.a, &plant.b, vi.weights.q.as_ref().ok_or_else(|| need("Q"))?, r)?;
            (s.p, s.k, None)
        }
        Variant::OutputFeedback => {
            let param = param.as_ref().ok_or_else(|| need("the filter"))?;
            let qy = vi.weights.qy.as_ref().ok_or_else(|| need("Q_y"))?;
            let t = verify_riccati_correspondence(plant, param, None, qy, r)?;
            (t.rho.p, t.rho.k, Some((t.deviation, t.gain_deviation)))
        }
        Variant::Regulator | Variant::RegulatorReduced => {
            let aux = aux.as_ref().ok_or_else(|| need("the augmented system"))?;
            let s = solve_care(&aux.a_rho, &aux.b_rho, vi.weights.q.as_ref().ok_or_else(|| need("Q"))?, r)?;
            (s.p, s.k, None)
        }
        Variant::OutputCostRegulator | Variant::OutputCostRegulatorReduced => {
            let param = param.as_ref().ok_or_else(|| need("the filter"))?;
            let t = verify_riccati_correspondence(plant, param, learner.internal_model.as_ref(), &cfg.q_bar(&d)?, r)?;
            (t.rho.p, t.rho.k, Some((t.deviation, t.gain_deviation)))
        }
    };
    Ok(OracleRefs { l, param, aux, p_star, k_star, correspondence })
}

fn exploration_policy(cfg: &ExperimentConfig, m: usize) -> Result<Policy<f64>> {
    Ok(Policy {
        source: cfg.exploration.source,
        gain: config::to_matrix("exploration.gain", &cfg.exploration.gain)?,
        signal: cfg.exploration_signal(m),
    })
}

fn sim_settings(cfg: &ExperimentConfig, learner: &LearnerSide, t_end: f64) -> SimSettings<f64> {
    use nalgebra::DVector;
    SimSettings {
        h: cfg.simulation.h,
        t_end,
        x0: DVector::from_vec(cfg.initial.x0.clone()),
        zeta0: learner
            .filter
            .as_ref()
            .map(|f| cfg.initial.zeta0.clone().map_or(DVector::zeros(f.dim()), DVector::from_vec)),
        z0: learner
            .internal_model
            .as_ref()
            .map(|im| cfg.initial.z0.clone().map_or(DVector::zeros(im.n_z()), DVector::from_vec)),
    }
}

/// Collection phase only: what the learner has before iterating.
#[derive(Debug, Clone)]
pub struct Collected {
    pub learner: LearnerSide,
    pub log: TrajectoryLog<f64>,
    pub b_known: Option<DMatrix<f64>>,
    pub data: RegressionData<f64>,
}

/// Simulate up to the switch time and build the regression for `variant`
/// (the configured one when `None`).
pub fn collect(cfg: &ExperimentConfig, variant: Option<Variant>) -> Result<Collected> {
    cfg.validate()?;
    let dims = cfg.dims()?;
    let vi_cfg = cfg.vi_config(&dims)?;
    let plant = plant_from_config(cfg)?;
    let learner = LearnerSide::new(cfg)?;
    let sys = Interconnection {
        plant: &plant,
        exo: &learner.exosystem,
        filter: learner.filter.as_ref(),
        internal_model: learner.internal_model.as_ref(),
    };
    let schedule = PolicySchedule { initial: exploration_policy(cfg, dims.m)?, switch: None };
    let log = simulate(&sys, &schedule, &sim_settings(cfg, &learner, cfg.simulation.switch_time))?;
    let variant = variant.unwrap_or(cfg.learning.variant);
    let b_known = learner.known_input_matrix(variant)?;
    let data = build_regression(
        &log,
        &cfg.sampling_grid(),
        variant,
        cfg.grid.quadrature,
        &vi_cfg.weights.r,
        b_known.as_ref(),
    )?;
    Ok(Collected { learner, log, b_known, data })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: &'static str,
    pub status: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViSummary {
    pub iters: usize,
    pub resets: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub final_step_metric: f64,
    pub learned_gain: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub reference_gain: Vec<Vec<f64>>,
    pub gain_error: Option<f64>,
    pub p_error: Option<f64>,
    pub e_rho_error: Option<f64>,
    /// Value-matrix and gain deviations between the filter-coordinate and
    /// state-coordinate Riccati solutions.
    pub correspondence_deviation: Option<[f64; 2]>,
    pub observer_identity_residuals: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackingSummary {
    pub switch_time: f64,
    pub settle_time: f64,
    pub tolerance: f64,
    pub max_abs_e_after_settle: Option<f64>,
    pub within_tolerance: bool,
    pub diverged_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub variant: Variant,
    pub blinded: bool,
    pub stages: Vec<StageRecord>,
    pub rank: Option<RankReport>,
    pub vi: Option<ViSummary>,
    pub oracle: Option<OracleSummary>,
    pub tracking: Option<TrackingSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub file: String,
    /// `learner` (byte-identical under blinding), `world`, `oracle` or
    /// `report`.
    pub side: &'static str,
    pub description: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema: u32,
    pub name: String,
    pub artifacts: Vec<Artifact>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<crate::regression::RegressionManifest>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub blinded: bool,
}

/// In-memory results alongside the report.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub collection_log: TrajectoryLog<f64>,
    pub full_log: Option<TrajectoryLog<f64>>,
    pub data: Option<RegressionData<f64>>,
    pub vi: Option<ViResult<f64>>,
    pub oracle: Option<OracleRefs>,
}

#[derive(Debug, thiserror::Error)]
#[error("stage `{stage}` failed: {source}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub source: Error,
    pub report: Box<ExperimentReport>,
}

struct Writer {
    dir: Option<PathBuf>,
    artifacts: Vec<Artifact>,
}

impl Writer {
    fn file(&mut self, name: &str, side: &'static str, description: &str) -> Result<Option<BufWriter<File>>> {
        let Some(dir) = &self.dir else { return Ok(None) };
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        self.artifacts.push(Artifact { file: name.into(), side, description: description.into() });
        Ok(Some(BufWriter::new(File::create(path)?)))
    }

    fn matrix(&mut self, name: &str, side: &'static str, description: &str, m: &DMatrix<f64>) -> Result<()> {
        if let Some(w) = self.file(name, side, description)? {
            crate::io::write_matrix_csv(w, None, m)?;
        }
        Ok(())
    }

    fn json<S: Serialize>(&mut self, name: &str, side: &'static str, description: &str, v: &S) -> Result<()> {
        if let Some(mut w) = self.file(name, side, description)? {
            serde_json::to_writer_pretty(&mut w, v).map_err(|e| Error::Io(e.to_string()))?;
            std::io::Write::write_all(&mut w, b"\n")?;
        }
        Ok(())
    }
}

fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    if a.shape() != b.shape() {
        return None;
    }
    let d = b.norm();
    Some((a - b).norm() / if d > 0.0 { d } else { 1.0 })
}

fn learned_source(v: Variant) -> FeedbackSource {
    match v {
        Variant::StateFeedback => FeedbackSource::State,
        Variant::OutputFeedback => FeedbackSource::Zeta,
        _ => FeedbackSource::Rho,
    }
}

struct Run {
    report: ExperimentReport,
    writer: Writer,
}

impl Run {
    fn ok(&mut self, stage: &'static str, detail: impl Into<String>) {
        self.report.stages.push(StageRecord { stage, status: "ok", detail: detail.into() });
    }

    fn failed(&mut self, stage: &'static str, detail: impl Into<String>) {
        self.report.stages.push(StageRecord { stage, status: "failed", detail: detail.into() });
    }

    /// Record the failure, flush report and manifest, and hand back the error.
    fn abort(
        mut self,
        stage: &'static str,
        source: Error,
        regression: Option<crate::regression::RegressionManifest>,
    ) -> StageError {
        self.failed(stage, source.to_string());
        let _ = self.finish(regression);
        StageError { stage, source, report: Box::new(self.report) }
    }

    fn finish(&mut self, regression: Option<crate::regression::RegressionManifest>) -> Result<()> {
        let report = self.report.clone();
        self.writer.json("report.json", "report", "stage outcomes, learned gain and oracle comparison", &report)?;
        if let Some(dir) = self.writer.dir.clone() {
            let mut artifacts = self.writer.artifacts.clone();
            artifacts.push(Artifact { file: "manifest.json".into(), side: "report", description: "this index".into() });
            let manifest = Manifest { schema: 1, name: report.name.clone(), artifacts, regression };
            let f = BufWriter::new(File::create(dir.join("manifest.json"))?);
            serde_json::to_writer_pretty(f, &manifest).map_err(|e| Error::Io(e.to_string()))?;
        }
        Ok(())
    }
}

/// Run the whole pipeline. Stage errors carry the partial report; files
/// written before the failure are kept.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> std::result::Result<RunOutput, StageError> {
    let report = ExperimentReport {
        name: cfg.name.clone(),
        variant: cfg.learning.variant,
        blinded: opts.blinded,
        stages: Vec::new(),
        rank: None,
        vi: None,
        oracle: None,
        tracking: None,
    };
    let mut run = Run { report, writer: Writer { dir: opts.out_dir.clone(), artifacts: Vec::new() } };
    macro_rules! stage {
        ($name:expr, $e:expr) => {
            match $e {
                Ok(v) => v,
                Err(err) => return Err(run.abort($name, err, None)),
            }
        };
    }

    // config
    stage!("config", cfg.validate());
    let dims = stage!("config", cfg.dims());
    let vi_cfg = stage!("config", cfg.vi_config(&dims));
    if let Some(dir) = &opts.out_dir {
        stage!("config", std::fs::create_dir_all(dir).map_err(Error::from));
    }
    let text = stage!("config", cfg.to_toml());
    if let Some(mut w) = stage!("config", run.writer.file("config.toml", "report", "parameters of this run, verbatim"))
    {
        stage!("config", std::io::Write::write_all(&mut w, text.as_bytes()).map_err(Error::from));
    }
    run.ok("config", format!("n = {}, m = {}, p = {}, q = {}", dims.n, dims.m, dims.p, dims.q));

    // model: the world keeps the true plant; the model side may be poisoned
    let world_plant = stage!("model", plant_from_config(cfg));
    let model_plant = if opts.blinded { poison(&world_plant) } else { world_plant.clone() };
    let learner = stage!("model", LearnerSide::new(cfg));
    run.ok("model", if opts.blinded { "model side poisoned" } else { "model side intact" });

    // oracle (comparison only; failures are recorded, not fatal)
    let oracle = match oracle_refs(cfg, &model_plant, &learner) {
        Ok(o) => {
            run.ok("oracle", "references computed");
            Some(o)
        }
        Err(e) => {
            run.failed("oracle", e.to_string());
            None
        }
    };

    // simulate the collection phase
    let sys = Interconnection {
        plant: &world_plant,
        exo: &learner.exosystem,
        filter: learner.filter.as_ref(),
        internal_model: learner.internal_model.as_ref(),
    };
    let explore = stage!("simulate", exploration_policy(cfg, dims.m));
    let settings = |t_end: f64| sim_settings(cfg, &learner, t_end);
    let collect = PolicySchedule { initial: explore.clone(), switch: None };
    let collection_log = stage!("simulate", simulate(&sys, &collect, &settings(cfg.simulation.switch_time)));
    run.ok("simulate", format!("{} samples up to t = {}", collection_log.len(), cfg.simulation.switch_time));

    // regression (learner)
    let variant = cfg.learning.variant;
    let b_known = stage!("regression", learner.known_input_matrix(variant));
    let data = stage!(
        "regression",
        build_regression(
            &collection_log,
            &cfg.sampling_grid(),
            variant,
            cfg.grid.quadrature,
            &vi_cfg.weights.r,
            b_known.as_ref()
        )
    );
    let rank = stage!("regression", data.check_rank());
    run.report.rank = Some(rank.clone());
    let reg_manifest = match &opts.out_dir {
        Some(dir) => Some(stage!("regression", data.write_csv(&dir.join("regression")))),
        None => None,
    };
    if let Some(m) = &reg_manifest {
        for b in &m.blocks {
            run.writer.artifacts.push(Artifact {
                file: format!("regression/{}", b.file),
                side: "learner",
                description: format!("{} ({}x{})", b.name, b.rows, b.cols),
            });
        }
    }
    let rank_detail = format!(
        "rank {}/{}{}",
        rank.rank,
        rank.required,
        rank.identification.as_ref().map_or(String::new(), |s| format!(", identification {}/{}", s.rank, s.required))
    );
    let rank_detail = if data.undersampled() {
        format!("{rank_detail}; warning: fewer intervals than unknowns")
    } else {
        rank_detail
    };
    if rank.satisfied {
        run.ok("regression", rank_detail);
    } else {
        run.failed("regression", rank_detail);
    }

    // learn
    let reference = oracle.as_ref().map(|o| &o.k_star);
    let vi = match vi_run(&data, &vi_cfg, b_known.as_ref(), reference) {
        Ok(v) => v,
        Err(e) => return Err(run.abort("learn", e, reg_manifest)),
    };
    let last_metric = vi.history.last().map_or(f64::NAN, |r| r.step_metric);
    run.report.vi = Some(ViSummary {
        iters: vi.iters,
        resets: vi.resets,
        converged: vi.converged,
        stop: vi.stop,
        final_step_metric: last_metric,
        learned_gain: config::from_matrix(&vi.k),
    });
    let wrote: Result<()> = (|| {
        if let Some(w) = run.writer.file("vi_history.csv", "learner", "k, j, normP, step_metric per iteration")? {
            vi.write_history_csv(w)?;
        }
        if reference.is_some() {
            if let Some(w) =
                run.writer.file("vi_gain_error.csv", "oracle", "gain error against the oracle per iteration")?
            {
                vi.write_gain_error_csv(w)?;
            }
        }
        run.writer.matrix("learned_gain.csv", "learner", "final gain K", &vi.k)?;
        run.writer.matrix("learned_p.csv", "learner", "final value matrix P", &vi.p)?;
        if let Some(e) = &vi.e_rho {
            run.writer.matrix("identified_e_rho.csv", "learner", "identified exosystem coupling", e)?;
        }
        Ok(())
    })();
    stage!("learn", wrote);
    let detail = format!("{:?} after {} iterations, {} resets", vi.stop, vi.iters, vi.resets);
    if vi.converged {
        run.ok("learn", detail);
    } else {
        run.failed("learn", detail);
    }

    // oracle comparison
    if let Some(o) = &oracle {
        let e_err = match (&vi.e_rho, &o.aux) {
            (Some(e), Some(aux)) => rel_err(e, &aux.e_rho),
            _ => None,
        };
        run.report.oracle = Some(OracleSummary {
            reference_gain: config::from_matrix(&o.k_star),
            gain_error: rel_err(&vi.k, &o.k_star),
            p_error: rel_err(&vi.p, &o.p_star),
            e_rho_error: e_err,
            correspondence_deviation: o.correspondence.map(|(a, b)| [a, b]),
            observer_identity_residuals: o.param.as_ref().map(|p| p.identity_residuals(&model_plant)),
        });
    }

    // switch to the learned policy and evaluate
    let mut full_log = None;
    let tracking = if vi.k.iter().all(|x| x.is_finite()) {
        let learned = Policy {
            source: learned_source(variant),
            gain: vi.k.clone(),
            signal: crate::sim::ExplorationSignal::silent(dims.m),
        };
        let schedule = PolicySchedule { initial: explore, switch: Some((cfg.simulation.switch_time, learned)) };
        let ev = &cfg.evaluation;
        match simulate(&sys, &schedule, &settings(cfg.simulation.horizon)) {
            Ok(mut log) => {
                if let (Some(o), Some(param)) = (&oracle, oracle.as_ref().and_then(|o| o.param.as_ref())) {
                    if let Some(aux) = &o.aux {
                        let _ = log.attach_observer_error(&param.m, &aux.x_prime);
                    }
                }
                let k0 = log.index_of(ev.settle_time).unwrap_or(log.len());
                let max_e = (k0..log.len()).map(|k| log.e.column(k).amax()).fold(0.0f64, f64::max);
                let stage_ok = max_e <= ev.tolerance;
                let written: Result<()> = (|| {
                    if let Some(w) = run.writer.file(
                        "trajectory.csv",
                        "world",
                        "full closed-loop trajectory (ex_norm is oracle-derived)",
                    )? {
                        log.write_csv(w)?;
                    }
                    let ks = log.index_of(cfg.simulation.switch_time)?;
                    let mut m = DMatrix::zeros(log.len() - ks, 1 + dims.p + 1);
                    for (r, k) in (ks..log.len()).enumerate() {
                        m[(r, 0)] = log.times[k];
                        for i in 0..dims.p {
                            m[(r, 1 + i)] = log.e[(i, k)];
                        }
                        m[(r, 1 + dims.p)] = log.e.column(k).amax();
                    }
                    let mut header = vec!["t".to_string()];
                    header.extend((1..=dims.p).map(|i| format!("e_{i}")));
                    header.push("abs_e".into());
                    if let Some(w) =
                        run.writer.file("tracking.csv", "world", "regulated error after the policy switch")?
                    {
                        crate::io::write_matrix_csv(w, Some(&header), &m)?;
                    }
                    Ok(())
                })();
                stage!("evaluate", written);
                let s = TrackingSummary {
                    switch_time: cfg.simulation.switch_time,
                    settle_time: ev.settle_time,
                    tolerance: ev.tolerance,
                    max_abs_e_after_settle: Some(max_e),
                    within_tolerance: stage_ok,
                    diverged_at: None,
                };
                full_log = Some(log);
                Some(s)
            }
            Err(Error::Diverged { t }) => Some(TrackingSummary {
                switch_time: cfg.simulation.switch_time,
                settle_time: ev.settle_time,
                tolerance: ev.tolerance,
                max_abs_e_after_settle: None,
                within_tolerance: false,
                diverged_at: Some(t),
            }),
            Err(e) => return Err(run.abort("evaluate", e, reg_manifest)),
        }
    } else {
        None
    };
    match &tracking {
        Some(t) if t.within_tolerance => {
            run.ok("evaluate", format!("max |e| after settle = {:e}", t.max_abs_e_after_settle.unwrap_or(f64::NAN)))
        }
        Some(t) => run.failed(
            "evaluate",
            match (t.diverged_at, t.max_abs_e_after_settle) {
                (Some(td), _) => format!("closed loop diverged at t = {td}"),
                (_, Some(e)) => format!("max |e| after settle = {e:e} exceeds {:e}", t.tolerance),
                _ => "no evaluation".into(),
            },
        ),
        None => run.failed("evaluate", "learned gain is not finite"),
    }
    run.report.tracking = tracking;

    if let Err(e) = run.finish(reg_manifest) {
        return Err(StageError { stage: "write", source: e, report: Box::new(run.report) });
    }
    Ok(RunOutput { report: run.report, collection_log, full_log, data: Some(data), vi: Some(vi), oracle })
}

/// Write into `dir`, creating it.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path, blinded: bool) -> std::result::Result<RunOutput, StageError> {
    run_experiment(cfg, &RunOptions { out_dir: Some(dir.to_path_buf()), blinded })
}
