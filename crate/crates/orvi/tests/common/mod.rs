#![allow(dead_code)]

use nalgebra::DMatrix;
use orvi::experiment::{oracle_refs, plant_from_config, presets, ExperimentConfig, LearnerSide, OracleRefs};
use orvi::system::LtiPlant;

pub struct Setup {
    pub cfg: ExperimentConfig,
    pub plant: LtiPlant<f64>,
    pub learner: LearnerSide,
    pub oracle: OracleRefs,
}

pub fn setup(preset: &str) -> Setup {
    let cfg = presets::load(preset).unwrap();
    let plant = plant_from_config(&cfg).unwrap();
    let learner = LearnerSide::new(&cfg).unwrap();
    let oracle = oracle_refs(&cfg, &plant, &learner).unwrap();
    Setup { cfg, plant, learner, oracle }
}

pub fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Least-squares slope of `ln y` against `t`.
pub fn log_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mt = t.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = t.iter().zip(&ly).map(|(a, b)| (a - mt) * (b - my)).sum();
    let var: f64 = t.iter().map(|a| (a - mt) * (a - mt)).sum();
    cov / var
}
