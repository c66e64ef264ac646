//! Interval integrals of logged signals: the data matrices of every learning
//! equation, one row per sampling interval `[t_{j-1}, t_j]`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{dim, Error, Result};
use crate::linalg::{equilibrate_columns, hstack, numerical_rank, tri, vecv, RANK_TOL};
use crate::scalar::{lit, to_f64, Real};
use crate::sim::TrajectoryLog;

/// `t_j = t0 + j·dt`, `j = 0..=s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid<T> {
    pub t0: T,
    pub dt: T,
    pub s: usize,
}

impl<T: Real> SamplingGrid<T> {
    pub fn end(&self) -> T {
        self.t0 + self.dt * lit(self.s as f64)
    }

    /// Log sample index of every grid node.
    pub fn node_indices(&self, log: &TrajectoryLog<T>) -> Result<Vec<usize>> {
        if self.s == 0 {
            return Err(Error::Grid("needs at least one interval".into()));
        }
        if !(self.dt > T::zero()) || self.t0 < T::zero() {
            return Err(Error::Grid("dt must be positive and t0 non-negative".into()));
        }
        let ratio = self.dt / log.h;
        if (ratio - ratio.round()).abs() > lit::<T>(1e-9) * ratio.max(T::one()) {
            return Err(Error::Grid(format!(
                "dt = {} is not a multiple of the integration step {}",
                to_f64(self.dt),
                to_f64(log.h)
            )));
        }
        (0..=self.s).map(|j| log.index_of(self.t0 + self.dt * lit(j as f64))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// Composite Simpson on the integration grid; needs an even number of
    /// steps per interval.
    #[default]
    Simpson,
    Trapezoid,
}

impl Quadrature {
    /// Weights for `steps + 1` equally spaced samples.
    fn weights<T: Real>(self, steps: usize, h: T) -> Result<Vec<T>> {
        match self {
            Quadrature::Trapezoid => {
                let mut w = vec![h; steps + 1];
                w[0] = h * lit(0.5);
                w[steps] = h * lit(0.5);
                Ok(w)
            }
            Quadrature::Simpson => {
                if steps % 2 != 0 {
                    return Err(Error::Grid(format!(
                        "Simpson quadrature needs an even number of steps per interval, got {steps}"
                    )));
                }
                let third = h / lit(3.0);
                Ok((0..=steps)
                    .map(|i| {
                        if i == 0 || i == steps {
                            third
                        } else if i % 2 == 1 {
                            third * lit(4.0)
                        } else {
                            third * lit(2.0)
                        }
                    })
                    .collect())
            }
        }
    }
}

/// The six learning schemes, named by what they learn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Full-state LQR from `(x, u)`.
    StateFeedback,
    /// Output-feedback LQR from the filter state `ζ` and `y`.
    OutputFeedback,
    /// Regulator on `ρ = col(ζ, z)` solving jointly for `H` and `E_ρᵀP`.
    Regulator,
    /// As [`Variant::Regulator`], but `E_ρ` is identified once and only `H`
    /// is solved afterwards.
    RegulatorReduced,
    /// Regulator with the cost written on `y` and `z` instead of `ρ`.
    OutputCostRegulator,
    OutputCostRegulatorReduced,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::StateFeedback,
        Variant::OutputFeedback,
        Variant::Regulator,
        Variant::RegulatorReduced,
        Variant::OutputCostRegulator,
        Variant::OutputCostRegulatorReduced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::StateFeedback => "state-feedback",
            Variant::OutputFeedback => "output-feedback",
            Variant::Regulator => "regulator",
            Variant::RegulatorReduced => "regulator-reduced",
            Variant::OutputCostRegulator => "output-cost-regulator",
            Variant::OutputCostRegulatorReduced => "output-cost-regulator-reduced",
        }
    }

    /// Uses `ρ`, `v` and the exosystem term.
    pub fn is_regulator(self) -> bool {
        !matches!(self, Variant::StateFeedback | Variant::OutputFeedback)
    }

    /// Identifies `E_ρ` once and drops it from the per-iteration unknowns.
    pub fn is_reduced(self) -> bool {
        matches!(self, Variant::RegulatorReduced | Variant::OutputCostRegulatorReduced)
    }

    /// Cost measured on outputs (`Q_y`, `Q_z`) rather than on the state.
    pub fn output_cost(self) -> bool {
        matches!(self, Variant::OutputFeedback | Variant::OutputCostRegulator | Variant::OutputCostRegulatorReduced)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Learner-side data matrices. `a` denotes the learning state (`x`, `ζ` or
/// `ρ`); every block has one row per sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData<T: Real> {
    pub variant: Variant,
    pub grid: SamplingGrid<T>,
    pub quadrature: Quadrature,
    pub state_dim: usize,
    pub inputs: usize,
    pub exo_dim: usize,
    /// `vecv(a(t_j)) − vecv(a(t_{j-1}))`
    pub delta: DMatrix<T>,
    /// `∫ vecv(a)`
    pub i_aa: DMatrix<T>,
    /// `∫ a ⊗ R u` (state and output feedback)
    pub i_au: Option<DMatrix<T>>,
    /// `∫ ρ ⊗ v`
    pub gamma_v: Option<DMatrix<T>>,
    /// `∫ ρ ⊗ B_ρ u` with the known input matrix
    pub gamma_bu: Option<DMatrix<T>>,
    pub i_yy: Option<DMatrix<T>>,
    pub i_zz: Option<DMatrix<T>>,
}

fn kron_vec<T: Real>(a: &DVector<T>, b: &DVector<T>) -> DVector<T> {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, ai) in a.iter().enumerate() {
        out.rows_mut(i * b.len(), b.len()).copy_from(&(b * *ai));
    }
    out
}

fn integrate<T: Real>(
    nodes: &[usize],
    quad: Quadrature,
    h: T,
    width: usize,
    feature: impl Fn(usize) -> DVector<T>,
) -> Result<DMatrix<T>> {
    let s = nodes.len() - 1;
    let mut out = DMatrix::zeros(s, width);
    for j in 0..s {
        let (a, b) = (nodes[j], nodes[j + 1]);
        let w = quad.weights(b - a, h)?;
        let mut acc = DVector::zeros(width);
        for (k, wk) in (a..=b).zip(w) {
            acc.axpy(wk, &feature(k), T::one());
        }
        out.set_row(j, &acc.transpose());
    }
    Ok(out)
}

fn endpoint_differences<T: Real>(nodes: &[usize], width: usize, f: impl Fn(usize) -> DVector<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(nodes.len() - 1, width);
    for j in 0..nodes.len() - 1 {
        out.set_row(j, &(f(nodes[j + 1]) - f(nodes[j])).transpose());
    }
    out
}

/// Build the blocks a variant needs.
///
/// `r` is the input weight (used by the `∫ a ⊗ R u` block); `b_known` is the
/// learner-known input matrix of the `ρ`-system, required for regulator
/// variants.
pub fn build_regression<T: Real>(
    log: &TrajectoryLog<T>,
    grid: &SamplingGrid<T>,
    variant: Variant,
    quadrature: Quadrature,
    r: &DMatrix<T>,
    b_known: Option<&DMatrix<T>>,
) -> Result<RegressionData<T>> {
    let nodes = grid.node_indices(log)?;
    let h = log.h;
    let m = log.u.nrows();
    if r.shape() != (m, m) {
        return Err(dim("build_regression", format!("R is {}x{}, expected {m}x{m}", r.nrows(), r.ncols())));
    }
    let mut data = RegressionData {
        variant,
        grid: *grid,
        quadrature,
        state_dim: 0,
        inputs: m,
        exo_dim: 0,
        delta: DMatrix::zeros(0, 0),
        i_aa: DMatrix::zeros(0, 0),
        i_au: None,
        gamma_v: None,
        gamma_bu: None,
        i_yy: None,
        i_zz: None,
    };
    let u = |k: usize| log.u.column(k).clone_owned();
    match variant {
        Variant::StateFeedback | Variant::OutputFeedback => {
            let chan = if variant == Variant::StateFeedback { &log.x } else { &log.zeta };
            let n = chan.nrows();
            if n == 0 {
                return Err(dim("build_regression", format!("{variant} needs a non-empty learning state")));
            }
            let a = |k: usize| chan.column(k).clone_owned();
            data.state_dim = n;
            data.delta = endpoint_differences(&nodes, tri(n), |k| vecv(&a(k)));
            data.i_aa = integrate(&nodes, quadrature, h, tri(n), |k| vecv(&a(k)))?;
            data.i_au = Some(integrate(&nodes, quadrature, h, n * m, |k| kron_vec(&a(k), &(r * u(k))))?);
            if variant == Variant::OutputFeedback {
                let p = log.y.nrows();
                data.i_yy = Some(integrate(&nodes, quadrature, h, tri(p), |k| vecv(&log.y.column(k).clone_owned()))?);
            }
        }
        _ => {
            let n = log.zeta.nrows() + log.z.nrows();
            let q = log.v.nrows();
            if n == 0 {
                return Err(dim("build_regression", "regulator variants need ζ or z logged"));
            }
            let b = b_known.ok_or_else(|| Error::Config(format!("{variant} needs the known input matrix")))?;
            if b.shape() != (n, m) {
                return Err(dim(
                    "build_regression",
                    format!("known input matrix is {}x{}, expected {n}x{m}", b.nrows(), b.ncols()),
                ));
            }
            data.state_dim = n;
            data.exo_dim = q;
            data.delta = endpoint_differences(&nodes, tri(n), |k| vecv(&log.rho(k)));
            data.i_aa = integrate(&nodes, quadrature, h, tri(n), |k| vecv(&log.rho(k)))?;
            data.gamma_v = Some(integrate(&nodes, quadrature, h, n * q, |k| {
                kron_vec(&log.rho(k), &log.v.column(k).clone_owned())
            })?);
            data.gamma_bu = Some(integrate(&nodes, quadrature, h, n * n, |k| kron_vec(&log.rho(k), &(b * u(k))))?);
            if variant.output_cost() {
                let p = log.y.nrows();
                let nz = log.z.nrows();
                data.i_yy = Some(integrate(&nodes, quadrature, h, tri(p), |k| vecv(&log.y.column(k).clone_owned()))?);
                data.i_zz = Some(integrate(&nodes, quadrature, h, tri(nz), |k| vecv(&log.z.column(k).clone_owned()))?);
            }
        }
    }
    Ok(data)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankStage {
    pub name: &'static str,
    pub rank: usize,
    pub required: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub required: usize,
    pub satisfied: bool,
    /// Joint identification system of the reduced variants, which must also
    /// have full column rank for the one-off `E_ρ` solve.
    pub identification: Option<RankStage>,
}

fn eq_rank<T: Real>(a: &DMatrix<T>) -> Result<usize> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Rank { context: "data matrix has non-finite entries".into(), rank: 0, required: a.ncols() });
    }
    numerical_rank(&equilibrate_columns(a).0, lit(RANK_TOL))
}

impl<T: Real> RegressionData<T> {
    pub fn rows(&self) -> usize {
        self.delta.nrows()
    }

    fn block<'a>(&self, b: &'a Option<DMatrix<T>>, name: &str) -> Result<&'a DMatrix<T>> {
        b.as_ref().ok_or_else(|| Error::Config(format!("{} data lacks the {name} block", self.variant)))
    }

    /// Coefficient matrix of the joint unknowns: `[I_xx, −2 I_xu]` for state
    /// feedback, `I_ζζ` for output feedback, `[I_ρρ, 2 Γ_ρv]` for regulators.
    pub fn joint_matrix(&self) -> Result<DMatrix<T>> {
        match self.variant {
            Variant::StateFeedback => hstack(&[&self.i_aa, &(self.block(&self.i_au, "I_au")? * lit::<T>(-2.0))]),
            Variant::OutputFeedback => Ok(self.i_aa.clone()),
            _ => hstack(&[&self.i_aa, &(self.block(&self.gamma_v, "Γ_ρv")? * lit::<T>(2.0))]),
        }
    }

    pub fn gamma_v(&self) -> Result<&DMatrix<T>> {
        self.block(&self.gamma_v, "Γ_ρv")
    }

    pub fn gamma_bu(&self) -> Result<&DMatrix<T>> {
        self.block(&self.gamma_bu, "Γ_ρ(Bu)")
    }

    pub fn i_au(&self) -> Result<&DMatrix<T>> {
        self.block(&self.i_au, "I_au")
    }

    pub fn i_yy(&self) -> Result<&DMatrix<T>> {
        self.block(&self.i_yy, "I_yy")
    }

    pub fn i_zz(&self) -> Result<&DMatrix<T>> {
        self.block(&self.i_zz, "I_zz")
    }

    /// Unknowns per iteration.
    pub fn required_rank(&self) -> usize {
        let n = self.state_dim;
        match self.variant {
            Variant::StateFeedback => tri(n) + self.inputs * n,
            Variant::OutputFeedback | Variant::RegulatorReduced | Variant::OutputCostRegulatorReduced => tri(n),
            Variant::Regulator | Variant::OutputCostRegulator => tri(n) + self.exo_dim * n,
        }
    }

    /// Rank test on column-equilibrated data, threshold `1e-8 · σ_max`.
    pub fn check_rank(&self) -> Result<RankReport> {
        let required = self.required_rank();
        let (rank, identification) = if self.variant.is_reduced() {
            let joint = self.joint_matrix()?;
            let stage = RankStage { name: "identification", rank: eq_rank(&joint)?, required: joint.ncols() };
            (eq_rank(&self.i_aa)?, Some(stage))
        } else {
            (eq_rank(&self.joint_matrix()?)?, None)
        };
        let satisfied = rank >= required && identification.as_ref().is_none_or(|s| s.rank >= s.required);
        Ok(RankReport { rank, required, satisfied, identification })
    }

    /// Fewer intervals than unknowns: the rank test cannot pass.
    pub fn undersampled(&self) -> bool {
        let joint = if self.variant.is_reduced() {
            self.required_rank() + self.exo_dim * self.state_dim
        } else {
            self.required_rank()
        };
        self.rows() < joint
    }

    /// Per-row relative residual of the regulator data equation
    /// `δ vecs P = I_ρρ vecs H + 2 Γ_ρ(Bu) vec P + 2 Γ_ρv vec(E_ρᵀP)`,
    /// normalized by the sum of the term magnitudes.
    pub fn regulator_residual(&self, p: &DMatrix<T>, h: &DMatrix<T>, e_rho: &DMatrix<T>) -> Result<DVector<T>> {
        use crate::linalg::{vec, vecs};
        let n = self.state_dim;
        if !self.variant.is_regulator()
            || p.shape() != (n, n)
            || h.shape() != (n, n)
            || e_rho.shape() != (n, self.exo_dim)
        {
            return Err(dim("regulator_residual", "P, H or E_ρ does not match the data"));
        }
        let two: T = lit(2.0);
        let lhs = &self.delta * vecs(p)?;
        let t_h = &self.i_aa * vecs(h)?;
        let t_b = self.gamma_bu()? * vec(p) * two;
        let t_e = self.gamma_v()? * vec(&(e_rho.transpose() * p)) * two;
        Ok(DVector::from_fn(lhs.len(), |j, _| {
            let scale = lhs[j].abs() + t_h[j].abs() + t_b[j].abs() + t_e[j].abs();
            let r = (lhs[j] - t_h[j] - t_b[j] - t_e[j]).abs();
            if scale > T::zero() {
                r / scale
            } else {
                r
            }
        }))
    }

    fn named_blocks(&self) -> Vec<(&'static str, &DMatrix<T>)> {
        let mut out = vec![("delta", &self.delta), ("i_aa", &self.i_aa)];
        for (name, b) in [
            ("i_au", &self.i_au),
            ("gamma_v", &self.gamma_v),
            ("gamma_bu", &self.gamma_bu),
            ("i_yy", &self.i_yy),
            ("i_zz", &self.i_zz),
        ] {
            if let Some(b) = b {
                out.push((name, b));
            }
        }
        out
    }

    /// One CSV per block in `dir`, returning the manifest entries.
    pub fn write_csv(&self, dir: &Path) -> Result<RegressionManifest> {
        std::fs::create_dir_all(dir)?;
        let mut blocks = Vec::new();
        for (name, m) in self.named_blocks() {
            let file = format!("{name}.csv");
            let f = std::io::BufWriter::new(std::fs::File::create(dir.join(&file))?);
            crate::io::write_matrix_csv(f, None, m)?;
            blocks.push(BlockEntry { name: name.into(), file, rows: m.nrows(), cols: m.ncols() });
        }
        Ok(RegressionManifest {
            variant: self.variant,
            quadrature: self.quadrature,
            t0: to_f64(self.grid.t0),
            dt: to_f64(self.grid.dt),
            s: self.grid.s,
            state_dim: self.state_dim,
            inputs: self.inputs,
            exo_dim: self.exo_dim,
            blocks,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub name: String,
    pub file: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionManifest {
    pub variant: Variant,
    pub quadrature: Quadrature,
    pub t0: f64,
    pub dt: f64,
    pub s: usize,
    pub state_dim: usize,
    pub inputs: usize,
    pub exo_dim: usize,
    pub blocks: Vec<BlockEntry>,
}

/// Problem sizes for unknown-count comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub q: usize,
    /// Internal-model order (`p` times the minimal-polynomial degree).
    pub n_z: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    /// Observer built from past inputs, outputs and the internal model state.
    AugmentedObserver,
    /// Observer that also filters the exogenous signal.
    ExogenousObserver,
    Regulator,
    RegulatorReduced,
}

/// Number of unknowns (hence data rows) a method needs per iteration.
pub fn unknown_count(d: Dims, method: CountMethod) -> usize {
    match method {
        CountMethod::AugmentedObserver => {
            let nc = (d.n + d.n_z) * d.m + 2 * (d.n + d.n_z) * d.p;
            tri(nc) + (d.m + d.p) * nc
        }
        CountMethod::ExogenousObserver => {
            let ng = d.n * (d.m + d.p + d.q) + d.n_z;
            tri(ng) + (d.m + d.q) * ng
        }
        CountMethod::Regulator => {
            let nr = d.n * (d.m + d.p) + d.n_z;
            tri(nr) + d.q * nr
        }
        CountMethod::RegulatorReduced => tri(d.n * (d.m + d.p) + d.n_z),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn log_from(f: impl Fn(f64) -> (f64, f64), h: f64, t_end: f64) -> TrajectoryLog<f64> {
        let n = (t_end / h).round() as usize + 1;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        let x = DMatrix::from_fn(1, n, |_, k| f(times[k]).0);
        let u = DMatrix::from_fn(1, n, |_, k| f(times[k]).1);
        TrajectoryLog {
            h,
            times,
            v: DMatrix::zeros(0, n),
            x: x.clone(),
            zeta: DMatrix::zeros(0, n),
            z: DMatrix::zeros(0, n),
            u,
            y: x,
            e: DMatrix::zeros(1, n),
            ex_norm: None,
        }
    }

    #[test]
    fn constant_signal_integrals() {
        let log = log_from(|_| (3.0, 0.5), 0.01, 1.0);
        let grid = SamplingGrid { t0: 0.0, dt: 0.5, s: 2 };
        for quad in [Quadrature::Simpson, Quadrature::Trapezoid] {
            let d =
                build_regression(&log, &grid, Variant::StateFeedback, quad, &DMatrix::identity(1, 1), None).unwrap();
            assert_eq!(d.delta, DMatrix::zeros(2, 1));
            for j in 0..2 {
                assert!((d.i_aa[(j, 0)] - 0.5 * 9.0).abs() < 1e-12);
                assert!((d.i_au.as_ref().unwrap()[(j, 0)] - 0.5 * 1.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_ramp_integral() {
        // ∫₀¹ t·1 dt = 1/2 through the a ⊗ R u block with R = 1.
        let log = log_from(|t| (t, 1.0), 0.1, 1.0);
        let grid = SamplingGrid { t0: 0.0, dt: 1.0, s: 1 };
        for quad in [Quadrature::Simpson, Quadrature::Trapezoid] {
            let d =
                build_regression(&log, &grid, Variant::StateFeedback, quad, &DMatrix::identity(1, 1), None).unwrap();
            assert!((d.i_au.unwrap()[(0, 0)] - 0.5).abs() < 1e-12);
            assert!((d.delta[(0, 0)] - 1.0).abs() < 1e-12);
        }
        // R-weighting scales the block.
        let d = build_regression(
            &log,
            &grid,
            Variant::StateFeedback,
            Quadrature::Simpson,
            &DMatrix::from_element(1, 1, 3.0),
            None,
        )
        .unwrap();
        assert!((d.i_au.unwrap()[(0, 0)] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let log = log_from(|t| (t, t * t), 0.1, 2.0);
        let grid = SamplingGrid { t0: 0.0, dt: 1.0, s: 2 };
        let d =
            build_regression(&log, &grid, Variant::StateFeedback, Quadrature::Simpson, &DMatrix::identity(1, 1), None)
                .unwrap();
        // ∫ t³ over [0,1] and [1,2]
        let iau = d.i_au.unwrap();
        assert!((iau[(0, 0)] - 0.25).abs() < 1e-12);
        assert!((iau[(1, 0)] - 3.75).abs() < 1e-12);
    }

    #[test]
    fn grid_errors() {
        let log = log_from(|_| (1.0, 0.0), 0.1, 1.0);
        let r = DMatrix::identity(1, 1);
        let bad = [
            SamplingGrid { t0: 0.0, dt: 0.25, s: 2 },
            SamplingGrid { t0: 0.0, dt: 0.5, s: 3 },
            SamplingGrid { t0: 0.05, dt: 0.2, s: 2 },
            SamplingGrid { t0: 0.0, dt: 0.2, s: 0 },
        ];
        for g in bad {
            assert!(matches!(
                build_regression(&log, &g, Variant::StateFeedback, Quadrature::Trapezoid, &r, None),
                Err(Error::Grid(_))
            ));
        }
        // Odd step count is a Simpson-only failure.
        let g = SamplingGrid { t0: 0.0, dt: 0.3, s: 3 };
        assert!(build_regression(&log, &g, Variant::StateFeedback, Quadrature::Simpson, &r, None).is_err());
        assert!(build_regression(&log, &g, Variant::StateFeedback, Quadrature::Trapezoid, &r, None).is_ok());
    }

    #[test]
    fn zero_data_is_rank_zero() {
        let log = log_from(|_| (0.0, 0.0), 0.1, 1.0);
        let grid = SamplingGrid { t0: 0.0, dt: 0.2, s: 5 };
        let d =
            build_regression(&log, &grid, Variant::StateFeedback, Quadrature::Simpson, &DMatrix::identity(1, 1), None)
                .unwrap();
        let rep = d.check_rank().unwrap();
        assert_eq!((rep.rank, rep.required, rep.satisfied), (0, 2, false));
    }

    #[test]
    fn kron_vec_ordering() {
        assert_eq!(kron_vec(&dvector![1.0, 2.0], &dvector![3.0, 4.0, 5.0]), dvector![3.0, 4.0, 5.0, 6.0, 8.0, 10.0]);
    }

    #[test]
    fn table_counts() {
        let d = Dims { n: 5, m: 5, p: 1, q: 4, n_z: 4 };
        assert_eq!(unknown_count(d, CountMethod::AugmentedObserver), 2394);
        assert_eq!(unknown_count(d, CountMethod::ExogenousObserver), 1971);
        assert_eq!(unknown_count(d, CountMethod::Regulator), 731);
        assert_eq!(unknown_count(d, CountMethod::RegulatorReduced), 595);
        let small = Dims { n: 3, m: 1, p: 1, q: 2, n_z: 2 };
        assert_eq!(unknown_count(small, CountMethod::Regulator), 52);
        assert_eq!(unknown_count(small, CountMethod::RegulatorReduced), 36);
    }
}
