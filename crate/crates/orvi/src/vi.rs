//! Value iteration on recorded data: a stochastic-approximation update of the
//! Riccati iterate with resets on escape from growing bound sets.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{dim, Error, Result};
use crate::linalg::{is_symmetric, spectral_norm, symmetrize, tri, unvec, unvecs, vec, vecs, LeastSquares, SYM_TOL};
use crate::regression::{RankReport, RegressionData, Variant};
use crate::scalar::{lit, to_f64, Real};

/// `ε_k = a / (k + b)`; `a, b > 0` gives `Σε_k = ∞`, `Σε_k² < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> StepSchedule<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite()) {
            return Err(Error::Config(format!(
                "step schedule a/(k+b) needs a > 0 and b > 0 (got a = {}, b = {})",
                to_f64(a),
                to_f64(b)
            )));
        }
        Ok(Self { a, b })
    }

    pub fn at(&self, k: usize) -> T {
        self.a / (lit::<T>(k as f64) + self.b)
    }
}

/// `r_j = scale · (j + offset)`: nondecreasing and unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSchedule<T> {
    pub scale: T,
    pub offset: T,
}

impl<T: Real> BoundSchedule<T> {
    pub fn new(scale: T, offset: T) -> Result<Self> {
        if !(scale > T::zero() && offset > T::zero() && scale.is_finite() && offset.is_finite()) {
            return Err(Error::Config("bound schedule needs scale > 0 and offset > 0".into()));
        }
        Ok(Self { scale, offset })
    }

    pub fn at(&self, j: usize) -> T {
        self.scale * (lit::<T>(j as f64) + self.offset)
    }
}

/// `q` weighs the learning state (state-cost variants); `qy`, `qz` weigh
/// outputs and internal-model states (output-cost variants).
#[derive(Debug, Clone, PartialEq)]
pub struct Weights<T: Real> {
    pub q: Option<DMatrix<T>>,
    pub qy: Option<DMatrix<T>>,
    pub qz: Option<DMatrix<T>>,
    pub r: DMatrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViConfig<T: Real> {
    pub p0: DMatrix<T>,
    pub step: StepSchedule<T>,
    pub bounds: BoundSchedule<T>,
    pub eps_conv: T,
    pub max_iters: usize,
    pub weights: Weights<T>,
    /// Refuse to iterate on rank-deficient data (default). When off, the
    /// verdict is only recorded and least squares is attempted anyway.
    pub enforce_rank: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord<T> {
    pub k: usize,
    /// Bound-set index in force during this iteration.
    pub j: usize,
    /// `‖P̃_{k+1}‖₂`
    pub norm_p: T,
    /// `‖P̃_{k+1} − P_k‖₂ / ε_k`
    pub step_metric: T,
    pub reset: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIters,
    /// The iterate became non-finite.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViResult<T: Real> {
    pub variant: Variant,
    pub p: DMatrix<T>,
    pub k: DMatrix<T>,
    /// Identified `E_ρ` (reduced variants).
    pub e_rho: Option<DMatrix<T>>,
    pub iters: usize,
    pub resets: usize,
    pub history: Vec<IterRecord<T>>,
    /// `‖K_k − K_ref‖_F / ‖K_ref‖_F` per iteration when a reference was
    /// supplied.
    pub gain_error: Vec<T>,
    pub converged: bool,
    pub stop: StopReason,
    pub rank: RankReport,
}

/// Output of one least-squares stage at `P_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage<T: Real> {
    /// `H_k` or `H̄_k` (symmetric).
    pub h: DMatrix<T>,
    pub k: DMatrix<T>,
    /// `E_ρᵀP_k` from a joint solve.
    pub e_term: Option<DMatrix<T>>,
}

fn positive_definite<T: Real>(a: &DMatrix<T>) -> bool {
    a.clone().cholesky().is_some()
}

fn positive_semidefinite<T: Real>(a: &DMatrix<T>) -> bool {
    let e = nalgebra::SymmetricEigen::new(a.clone());
    let scale = e.eigenvalues.amax().max(T::one());
    e.eigenvalues.iter().all(|&x| x >= -lit::<T>(1e-12) * scale)
}

fn check_weight<T: Real>(w: &Option<DMatrix<T>>, name: &str, n: usize) -> Result<DMatrix<T>> {
    let w = w.as_ref().ok_or_else(|| Error::Config(format!("missing weight {name}")))?;
    if w.shape() != (n, n) {
        return Err(Error::Config(format!("{name} is {}x{}, expected {n}x{n}", w.nrows(), w.ncols())));
    }
    if !is_symmetric(w, lit(SYM_TOL)) || !positive_semidefinite(w) {
        return Err(Error::Config(format!("{name} must be symmetric positive semidefinite")));
    }
    Ok(w.clone())
}

/// Precomputed factorizations and fixed right-hand-side pieces.
struct Engine<'a, T: Real> {
    data: &'a RegressionData<T>,
    variant: Variant,
    n: usize,
    q: Option<DMatrix<T>>,
    r: DMatrix<T>,
    r_inv: DMatrix<T>,
    b: Option<DMatrix<T>>,
    joint: Option<LeastSquares<T>>,
    reduced: Option<LeastSquares<T>>,
    /// `I_yy vecs Q_y (+ I_zz vecs Q_z)`
    cost: Option<DVector<T>>,
}

impl<'a, T: Real> Engine<'a, T> {
    fn new(data: &'a RegressionData<T>, cfg: &ViConfig<T>, b_known: Option<&DMatrix<T>>) -> Result<Self> {
        let variant = data.variant;
        let (n, m) = (data.state_dim, data.inputs);
        let r = cfg.weights.r.clone();
        if r.shape() != (m, m) || !is_symmetric(&r, lit(SYM_TOL)) || !positive_definite(&r) {
            return Err(Error::Config(format!("R must be a symmetric positive definite {m}x{m} matrix")));
        }
        let r_inv = r.clone().cholesky().expect("checked positive definite").inverse();
        if cfg.p0.shape() != (n, n) || !is_symmetric(&cfg.p0, lit(SYM_TOL)) {
            return Err(Error::Config(format!("P0 must be symmetric {n}x{n}")));
        }
        let needs_pd = !variant.output_cost() || variant.is_reduced();
        if needs_pd && !positive_definite(&cfg.p0) {
            return Err(Error::Config(format!("{variant} needs a positive definite P0")));
        }
        if !positive_semidefinite(&cfg.p0) {
            return Err(Error::Config("P0 must be positive semidefinite".into()));
        }
        if !(cfg.eps_conv > T::zero()) || cfg.max_iters == 0 {
            return Err(Error::Config("convergence threshold and iteration cap must be positive".into()));
        }
        let b = if variant == Variant::StateFeedback {
            None
        } else {
            let b = b_known.ok_or_else(|| Error::Config(format!("{variant} needs the known input matrix")))?;
            if b.shape() != (n, m) {
                return Err(dim(
                    "vi_run",
                    format!("known input matrix is {}x{}, expected {n}x{m}", b.nrows(), b.ncols()),
                ));
            }
            Some(b.clone())
        };
        let q = if variant.output_cost() { None } else { Some(check_weight(&cfg.weights.q, "Q", n)?) };
        let cost = match variant {
            Variant::OutputFeedback => {
                let qy = check_weight(&cfg.weights.qy, "Q_y", tri_root(data.i_yy()?.ncols()))?;
                Some(data.i_yy()? * vecs(&qy)?)
            }
            Variant::OutputCostRegulator | Variant::OutputCostRegulatorReduced => {
                let qy = check_weight(&cfg.weights.qy, "Q_y", tri_root(data.i_yy()?.ncols()))?;
                let qz = check_weight(&cfg.weights.qz, "Q_z", tri_root(data.i_zz()?.ncols()))?;
                Some(data.i_yy()? * vecs(&qy)? + data.i_zz()? * vecs(&qz)?)
            }
            _ => None,
        };
        let (joint, reduced) = match variant {
            Variant::OutputFeedback => (None, Some(LeastSquares::new(&data.i_aa)?)),
            v if v.is_reduced() => {
                (Some(LeastSquares::new(&data.joint_matrix()?)?), Some(LeastSquares::new(&data.i_aa)?))
            }
            _ => (Some(LeastSquares::new(&data.joint_matrix()?)?), None),
        };
        Ok(Self { data, variant, n, q, r, r_inv, b, joint, reduced, cost })
    }

    fn known_gain(&self, p: &DMatrix<T>) -> DMatrix<T> {
        let b = self.b.as_ref().expect("known input matrix present");
        -(&self.r_inv * b.transpose() * p)
    }

    /// Right-hand side shared by the regulator variants.
    fn regulator_rhs(&self, p: &DMatrix<T>) -> Result<DVector<T>> {
        let mut rhs = &self.data.delta * vecs(p)? - self.data.gamma_bu()? * vec(p) * lit::<T>(2.0);
        if let Some(c) = &self.cost {
            rhs += c;
        }
        Ok(rhs)
    }

    fn stage(&self, p: &DMatrix<T>, e_rho: Option<&DMatrix<T>>) -> Result<Stage<T>> {
        let n = self.n;
        let nt = tri(n);
        let d = self.data;
        match self.variant {
            Variant::StateFeedback => {
                let sol = self.joint.as_ref().unwrap().solve(&(&d.delta * vecs(p)?));
                let h = unvecs(&sol.rows(0, nt).clone_owned(), n)?;
                let k = unvec(&sol.rows(nt, d.inputs * n).clone_owned(), d.inputs, n)?;
                Ok(Stage { h, k, e_term: None })
            }
            Variant::OutputFeedback => {
                let k = self.known_gain(p);
                let rhs = &d.delta * vecs(p)? + self.cost.as_ref().unwrap() + d.i_au()? * vec(&k) * lit::<T>(2.0);
                let h = unvecs(&self.reduced.as_ref().unwrap().solve(&rhs), n)?;
                Ok(Stage { h, k, e_term: None })
            }
            _ => {
                let k = self.known_gain(p);
                let rhs = self.regulator_rhs(p)?;
                match e_rho {
                    Some(e) if self.variant.is_reduced() => {
                        let rhs = rhs - d.gamma_v()? * vec(&(e.transpose() * p)) * lit::<T>(2.0);
                        let h = unvecs(&self.reduced.as_ref().unwrap().solve(&rhs), n)?;
                        Ok(Stage { h, k, e_term: None })
                    }
                    _ => {
                        let sol = self.joint.as_ref().unwrap().solve(&rhs);
                        let h = unvecs(&sol.rows(0, nt).clone_owned(), n)?;
                        let q = d.exo_dim;
                        let e_term = unvec(&sol.rows(nt, q * n).clone_owned(), q, n)?;
                        Ok(Stage { h, k, e_term: Some(e_term) })
                    }
                }
            }
        }
    }

    /// `P̃ − P` divided by `ε_k`.
    fn direction(&self, st: &Stage<T>) -> DMatrix<T> {
        // For output-cost variants H̄ already carries the cost, and
        // P B R⁻¹ Bᵀ P = Kᵀ R K with K = −R⁻¹BᵀP.
        let krk = st.k.transpose() * &self.r * &st.k;
        match &self.q {
            Some(q) => &st.h + q - krk,
            None => &st.h - krk,
        }
    }
}

fn tri_root(len: usize) -> usize {
    let mut n = 0;
    while tri(n) < len {
        n += 1;
    }
    n
}

/// Solve one stage outside the iteration loop (diagnostics and tests).
pub fn solve_stage<T: Real>(
    data: &RegressionData<T>,
    cfg: &ViConfig<T>,
    b_known: Option<&DMatrix<T>>,
    p: &DMatrix<T>,
    e_rho: Option<&DMatrix<T>>,
) -> Result<Stage<T>> {
    Engine::new(data, cfg, b_known)?.stage(p, e_rho)
}

/// Recover `E_ρ` from a joint stage at a positive definite `P`:
/// `E_ρ = P⁻¹ (E_ρᵀP)ᵀ`.
pub fn identify_e_rho<T: Real>(p: &DMatrix<T>, e_term: &DMatrix<T>) -> Result<DMatrix<T>> {
    let chol =
        p.clone().cholesky().ok_or_else(|| Error::Config("identification needs a positive definite P".into()))?;
    Ok(chol.solve(&e_term.transpose()))
}

/// Run the iteration for the variant the data was built for.
///
/// `b_known` is the learner-known input matrix (all variants except state
/// feedback); `reference_gain` only feeds the gain-error monitor.
pub fn vi_run<T: Real>(
    data: &RegressionData<T>,
    cfg: &ViConfig<T>,
    b_known: Option<&DMatrix<T>>,
    reference_gain: Option<&DMatrix<T>>,
) -> Result<ViResult<T>> {
    let rank = data.check_rank()?;
    if cfg.enforce_rank && !rank.satisfied {
        let (r, req) = match &rank.identification {
            Some(s) if s.rank < s.required => (s.rank, s.required),
            _ => (rank.rank, rank.required),
        };
        return Err(Error::Rank { context: format!("{} data", data.variant), rank: r, required: req });
    }
    let eng = Engine::new(data, cfg, b_known)?;
    let gain_err = |k: &DMatrix<T>| -> Option<T> {
        reference_gain.map(|r| {
            let d = r.norm();
            (k - r).norm() / if d > T::zero() { d } else { T::one() }
        })
    };

    let mut p = cfg.p0.clone();
    let mut e_rho: Option<DMatrix<T>> = None;
    let (mut j, mut resets) = (0usize, 0usize);
    let mut history = Vec::new();
    let mut gain_error = Vec::new();
    let mut last_k = DMatrix::zeros(data.inputs, data.state_dim);
    let mut stop = StopReason::MaxIters;
    let mut iters = cfg.max_iters;

    for k in 0..cfg.max_iters {
        let st = eng.stage(&p, e_rho.as_ref())?;
        if eng.variant.is_reduced() && e_rho.is_none() {
            let et = st.e_term.as_ref().expect("joint stage returns the exosystem term");
            e_rho = Some(identify_e_rho(&p, et)?);
        }
        let eps = cfg.step.at(k);
        let p_next = symmetrize(&(&p + eng.direction(&st) * eps));
        let norm_p = spectral_norm(&p_next);
        let metric = spectral_norm(&(&p_next - &p)) / eps;
        last_k = st.k.clone();
        if let Some(g) = gain_err(&st.k) {
            gain_error.push(g);
        }
        if !norm_p.is_finite() || !metric.is_finite() {
            history.push(IterRecord { k, j, norm_p, step_metric: metric, reset: false });
            stop = StopReason::NonFinite;
            iters = k + 1;
            break;
        }
        if norm_p > cfg.bounds.at(j) {
            history.push(IterRecord { k, j, norm_p, step_metric: metric, reset: true });
            p = cfg.p0.clone();
            j += 1;
            resets += 1;
            continue;
        }
        history.push(IterRecord { k, j, norm_p, step_metric: metric, reset: false });
        if metric < cfg.eps_conv {
            stop = StopReason::Converged;
            iters = k + 1;
            break;
        }
        p = p_next;
    }

    let k_final = if eng.variant == Variant::StateFeedback { last_k } else { eng.known_gain(&p) };
    Ok(ViResult {
        variant: data.variant,
        p,
        k: k_final,
        e_rho,
        iters,
        resets,
        history,
        gain_error,
        converged: stop == StopReason::Converged,
        stop,
        rank,
    })
}

impl<T: Real> ViResult<T> {
    /// `k, j, normP, step_metric`
    pub fn write_history_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        use crate::io::fmt;
        writeln!(w, "k,j,normP,step_metric")?;
        for r in &self.history {
            writeln!(w, "{},{},{},{}", r.k, r.j, fmt(r.norm_p), fmt(r.step_metric))?;
        }
        Ok(())
    }

    /// `k, gain_error_vs_oracle`
    pub fn write_gain_error_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,gain_error_vs_oracle")?;
        for (k, g) in self.gain_error.iter().enumerate() {
            writeln!(w, "{k},{}", crate::io::fmt(*g))?;
        }
        Ok(())
    }
}
