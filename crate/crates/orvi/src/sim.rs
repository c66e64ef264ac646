//! Fixed-step RK4 simulation of exosystem, plant, filter and internal model.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{dim, Error, Result};
use crate::internal_model::InternalModel;
use crate::observer::ObserverFilter;
use crate::scalar::{lit, to_f64, Real};
use crate::system::{Exosystem, LtiPlant};

/// Abort threshold on the stacked state norm.
pub const STATE_BOUND: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tone<T> {
    pub channel: usize,
    pub amplitude: T,
    /// rad/s
    pub frequency: T,
    pub phase: T,
}

/// Multitone probing signal `Σ aᵢ sin(ωᵢ t + φᵢ)` per input channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationSignal<T> {
    pub inputs: usize,
    pub tones: Vec<Tone<T>>,
}

impl<T: Real> ExplorationSignal<T> {
    pub fn silent(inputs: usize) -> Self {
        Self { inputs, tones: Vec::new() }
    }

    pub fn value(&self, t: T) -> DVector<T> {
        let mut u = DVector::zeros(self.inputs);
        for tone in &self.tones {
            u[tone.channel] += tone.amplitude * (tone.frequency * t + tone.phase).sin();
        }
        u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackSource {
    /// Plant state `x` (full-state experiments).
    State,
    /// Filter state `ζ`.
    Zeta,
    /// `ρ = col(ζ, z)`.
    Rho,
}

/// `u = K·(feedback) + δ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy<T> {
    pub source: FeedbackSource,
    pub gain: DMatrix<T>,
    pub signal: ExplorationSignal<T>,
}

/// Exploration policy with an optional hard switch to a second policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySchedule<T> {
    pub initial: Policy<T>,
    pub switch: Option<(T, Policy<T>)>,
}

pub struct Interconnection<'a, T: Real> {
    pub plant: &'a LtiPlant<T>,
    pub exo: &'a Exosystem<T>,
    pub filter: Option<&'a ObserverFilter<T>>,
    pub internal_model: Option<&'a InternalModel<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings<T> {
    pub h: T,
    pub t_end: T,
    pub x0: DVector<T>,
    pub zeta0: Option<DVector<T>>,
    pub z0: Option<DVector<T>>,
}

/// Every channel is stored column-per-sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog<T: Real> {
    pub h: T,
    pub times: Vec<T>,
    pub v: DMatrix<T>,
    pub x: DMatrix<T>,
    pub zeta: DMatrix<T>,
    pub z: DMatrix<T>,
    /// Input applied on the step ending at each sample (left limit at a
    /// policy switch; first sample uses the initial policy).
    pub u: DMatrix<T>,
    pub y: DMatrix<T>,
    pub e: DMatrix<T>,
    /// `‖Mζ + X′v − x‖`, attached afterwards from model knowledge.
    pub ex_norm: Option<Vec<T>>,
}

struct Layout {
    q: usize,
    n: usize,
    nzeta: usize,
    nz: usize,
}

impl Layout {
    fn total(&self) -> usize {
        self.q + self.n + self.nzeta + self.nz
    }
}

fn segment<T: Real>(s: &DVector<T>, start: usize, len: usize) -> DVector<T> {
    s.rows(start, len).clone_owned()
}

impl<'a, T: Real> Interconnection<'a, T> {
    fn layout(&self) -> Layout {
        Layout {
            q: self.exo.q(),
            n: self.plant.n(),
            nzeta: self.filter.map_or(0, |f| f.dim()),
            nz: self.internal_model.map_or(0, |im| im.n_z()),
        }
    }

    fn input(&self, lay: &Layout, policy: &Policy<T>, t: T, s: &DVector<T>) -> DVector<T> {
        let fb = match policy.source {
            FeedbackSource::State => segment(s, lay.q, lay.n),
            FeedbackSource::Zeta => segment(s, lay.q + lay.n, lay.nzeta),
            FeedbackSource::Rho => segment(s, lay.q + lay.n, lay.nzeta + lay.nz),
        };
        &policy.gain * fb + policy.signal.value(t)
    }

    fn derivative(&self, lay: &Layout, policy: &Policy<T>, t: T, s: &DVector<T>) -> DVector<T> {
        let v = segment(s, 0, lay.q);
        let x = segment(s, lay.q, lay.n);
        let u = self.input(lay, policy, t, s);
        let y = &self.plant.c * &x;
        let e = &y + &self.plant.f * &v;
        let mut ds = DVector::zeros(lay.total());
        ds.rows_mut(0, lay.q).copy_from(&(&self.exo.s * &v));
        ds.rows_mut(lay.q, lay.n).copy_from(&(&self.plant.a * &x + &self.plant.b * &u + &self.plant.e * &v));
        if let Some(f) = self.filter {
            let zeta = segment(s, lay.q + lay.n, lay.nzeta);
            ds.rows_mut(lay.q + lay.n, lay.nzeta).copy_from(&f.derivative(&zeta, &u, &y));
        }
        if let Some(im) = self.internal_model {
            let z = segment(s, lay.q + lay.n + lay.nzeta, lay.nz);
            ds.rows_mut(lay.q + lay.n + lay.nzeta, lay.nz).copy_from(&im.derivative(&z, &e));
        }
        ds
    }

    fn check_policy(&self, lay: &Layout, p: &Policy<T>) -> Result<()> {
        let cols = match p.source {
            FeedbackSource::State => lay.n,
            FeedbackSource::Zeta => lay.nzeta,
            FeedbackSource::Rho => lay.nzeta + lay.nz,
        };
        if p.gain.shape() != (self.plant.m(), cols) {
            return Err(dim(
                "policy",
                format!("gain is {}x{}, expected {}x{}", p.gain.nrows(), p.gain.ncols(), self.plant.m(), cols),
            ));
        }
        if p.signal.inputs != self.plant.m() || p.signal.tones.iter().any(|t| t.channel >= self.plant.m()) {
            return Err(dim("policy", "exploration channels exceed the input count"));
        }
        Ok(())
    }
}

/// Integrate on `[0, t_end]` with step `h`, logging every step.
pub fn simulate<T: Real>(
    sys: &Interconnection<'_, T>,
    policy: &PolicySchedule<T>,
    settings: &SimSettings<T>,
) -> Result<TrajectoryLog<T>> {
    let lay = sys.layout();
    let h = settings.h;
    if !(h > T::zero()) || !(settings.t_end > T::zero()) {
        return Err(Error::Config("step and horizon must be positive".into()));
    }
    let steps_f = (settings.t_end / h).round();
    if ((steps_f * h - settings.t_end).abs()) > lit::<T>(1e-9) * settings.t_end.max(T::one()) {
        return Err(Error::Grid("horizon is not a multiple of the step".into()));
    }
    let steps = to_f64(steps_f) as usize;
    if settings.x0.len() != lay.n {
        return Err(dim("simulate", "x0 length differs from n"));
    }
    if sys.plant.q() != lay.q {
        return Err(dim("simulate", "exosystem order differs from the plant's E"));
    }
    if let Some(f) = sys.filter {
        if f.inputs != sys.plant.m() || f.outputs != sys.plant.p() || f.order() != lay.n {
            return Err(dim("simulate", "filter does not match plant dimensions"));
        }
    }
    if let Some(im) = sys.internal_model {
        if im.copies != sys.plant.p() {
            return Err(dim("simulate", "internal model copies differ from p"));
        }
    }
    sys.check_policy(&lay, &policy.initial)?;
    let switch_step = match &policy.switch {
        Some((ts, p)) => {
            sys.check_policy(&lay, p)?;
            Some(to_f64((*ts / h).round()) as usize)
        }
        None => None,
    };
    let policy_for_step = |k: usize| -> &Policy<T> {
        match (&policy.switch, switch_step) {
            (Some((_, p)), Some(ks)) if k >= ks => p,
            _ => &policy.initial,
        }
    };

    let mut s = DVector::zeros(lay.total());
    s.rows_mut(0, lay.q).copy_from(&sys.exo.v0);
    s.rows_mut(lay.q, lay.n).copy_from(&settings.x0);
    if let Some(z0) = &settings.zeta0 {
        if z0.len() != lay.nzeta {
            return Err(dim("simulate", "zeta0 length differs from the filter dimension"));
        }
        s.rows_mut(lay.q + lay.n, lay.nzeta).copy_from(z0);
    }
    if let Some(z0) = &settings.z0 {
        if z0.len() != lay.nz {
            return Err(dim("simulate", "z0 length differs from the internal model dimension"));
        }
        s.rows_mut(lay.q + lay.n + lay.nzeta, lay.nz).copy_from(z0);
    }

    let (m, p) = (sys.plant.m(), sys.plant.p());
    let count = steps + 1;
    let mut log = TrajectoryLog {
        h,
        times: Vec::with_capacity(count),
        v: DMatrix::zeros(lay.q, count),
        x: DMatrix::zeros(lay.n, count),
        zeta: DMatrix::zeros(lay.nzeta, count),
        z: DMatrix::zeros(lay.nz, count),
        u: DMatrix::zeros(m, count),
        y: DMatrix::zeros(p, count),
        e: DMatrix::zeros(p, count),
        ex_norm: None,
    };
    let record = |log: &mut TrajectoryLog<T>, k: usize, t: T, s: &DVector<T>, pol: &Policy<T>| {
        log.times.push(t);
        let v = segment(s, 0, lay.q);
        let x = segment(s, lay.q, lay.n);
        let y = &sys.plant.c * &x;
        log.e.set_column(k, &(&y + &sys.plant.f * &v));
        log.y.set_column(k, &y);
        log.v.set_column(k, &v);
        log.x.set_column(k, &x);
        log.zeta.set_column(k, &s.rows(lay.q + lay.n, lay.nzeta));
        log.z.set_column(k, &s.rows(lay.q + lay.n + lay.nzeta, lay.nz));
        log.u.set_column(k, &sys.input(&lay, pol, t, s));
    };
    record(&mut log, 0, T::zero(), &s, policy_for_step(0));

    let half: T = lit(0.5);
    let sixth: T = lit(1.0 / 6.0);
    let bound: T = lit(STATE_BOUND);
    for k in 0..steps {
        let t = lit::<T>(k as f64) * h;
        let pol = policy_for_step(k);
        let k1 = sys.derivative(&lay, pol, t, &s);
        let k2 = sys.derivative(&lay, pol, t + h * half, &(&s + &k1 * (h * half)));
        let k3 = sys.derivative(&lay, pol, t + h * half, &(&s + &k2 * (h * half)));
        let k4 = sys.derivative(&lay, pol, t + h, &(&s + &k3 * h));
        s += (k1 + (k2 + k3) * lit::<T>(2.0) + k4) * (h * sixth);
        let t_next = lit::<T>((k + 1) as f64) * h;
        if s.iter().any(|x| !x.is_finite()) || s.norm() > bound {
            return Err(Error::Diverged { t: to_f64(t_next) });
        }
        record(&mut log, k + 1, t_next, &s, pol);
    }
    Ok(log)
}

impl<T: Real> TrajectoryLog<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample index of time `t`; errors if `t` is off the grid or outside.
    pub fn index_of(&self, t: T) -> Result<usize> {
        let k = (t / self.h).round();
        if (k * self.h - t).abs() > lit::<T>(1e-9) * t.abs().max(T::one()) || k < T::zero() {
            return Err(Error::Grid(format!("t = {} is not on the integration grid", to_f64(t))));
        }
        let k = to_f64(k) as usize;
        if k >= self.len() {
            return Err(Error::Grid(format!("t = {} lies beyond the simulated horizon", to_f64(t))));
        }
        Ok(k)
    }

    /// `col(ζ, z)` at sample `k`.
    pub fn rho(&self, k: usize) -> DVector<T> {
        let (a, b) = (self.zeta.nrows(), self.z.nrows());
        let mut r = DVector::zeros(a + b);
        r.rows_mut(0, a).copy_from(&self.zeta.column(k));
        r.rows_mut(a, b).copy_from(&self.z.column(k));
        r
    }

    /// Attach `‖Mζ + X′v − x‖` per sample.
    pub fn attach_observer_error(&mut self, m: &DMatrix<T>, x_prime: &DMatrix<T>) -> Result<()> {
        if m.ncols() != self.zeta.nrows() || x_prime.ncols() != self.v.nrows() {
            return Err(dim("attach_observer_error", "M or X′ does not match the log"));
        }
        let est = m * &self.zeta + x_prime * &self.v - &self.x;
        self.ex_norm = Some(est.column_iter().map(|c| c.norm()).collect());
        Ok(())
    }

    /// Header and 17-significant-digit rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["t".to_string()];
        for (name, mat) in [
            ("v", &self.v),
            ("x", &self.x),
            ("zeta", &self.zeta),
            ("z", &self.z),
            ("u", &self.u),
            ("y", &self.y),
            ("e", &self.e),
        ] {
            header.extend((1..=mat.nrows()).map(|i| format!("{name}_{i}")));
        }
        header.push("ex_norm".into());
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = vec![crate::io::fmt(self.times[k])];
            for mat in [&self.v, &self.x, &self.zeta, &self.z, &self.u, &self.y, &self.e] {
                row.extend(mat.column(k).iter().map(|x| crate::io::fmt(*x)));
            }
            row.push(match &self.ex_norm {
                Some(e) => crate::io::fmt(e[k]),
                None => "nan".into(),
            });
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn tone(a: f64, w: f64) -> Tone<f64> {
        Tone { channel: 0, amplitude: a, frequency: w, phase: 0.0 }
    }

    #[test]
    fn exploration_values() {
        let spec = ExplorationSignal {
            inputs: 1,
            tones: vec![tone(10.0, 4.0), tone(10.0, 10.0), tone(10.0, 9.0), tone(-10.0, 2.0), tone(-10.0, 6.0)],
        };
        assert_eq!(spec.value(0.0)[0], 0.0);
        let want = 10.0 * (4f64.sin() + 10f64.sin() + 9f64.sin() - 2f64.sin() - 6f64.sin());
        assert!((spec.value(1.0)[0] - want).abs() < 1e-12);
        let single = ExplorationSignal { inputs: 1, tones: vec![tone(10.0, 4.0)] };
        assert!((single.value(std::f64::consts::PI / 8.0)[0] - 10.0).abs() < 1e-12);
    }

    fn free_plant() -> (LtiPlant<f64>, Exosystem<f64>) {
        let plant = LtiPlant::unchecked(
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
            DMatrix::zeros(2, 1),
        )
        .unwrap();
        let exo = Exosystem::new(dmatrix![0.0], dvector![0.0]).unwrap();
        (plant, exo)
    }

    #[test]
    fn equilibrium_is_held() {
        let (plant, exo) = free_plant();
        let sys = Interconnection { plant: &plant, exo: &exo, filter: None, internal_model: None };
        let pol = PolicySchedule {
            initial: Policy {
                source: FeedbackSource::State,
                gain: DMatrix::zeros(2, 2),
                signal: ExplorationSignal::silent(2),
            },
            switch: None,
        };
        let set = SimSettings { h: 0.01, t_end: 1.0, x0: dvector![1.5, -2.0], zeta0: None, z0: None };
        let log = simulate(&sys, &pol, &set).unwrap();
        assert_eq!(log.len(), 101);
        for k in 0..log.len() {
            assert_eq!(log.x.column(k), dvector![1.5, -2.0]);
        }
    }

    #[test]
    fn divergence_is_reported_with_time() {
        let (plant, exo) = free_plant();
        let sys = Interconnection { plant: &plant, exo: &exo, filter: None, internal_model: None };
        let pol = PolicySchedule {
            initial: Policy {
                source: FeedbackSource::State,
                gain: DMatrix::identity(2, 2) * 50.0,
                signal: ExplorationSignal::silent(2),
            },
            switch: None,
        };
        let set = SimSettings { h: 0.01, t_end: 2.0, x0: dvector![1.0, 0.0], zeta0: None, z0: None };
        match simulate(&sys, &pol, &set) {
            Err(Error::Diverged { t }) => assert!(t > 0.0 && t <= 2.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rk4_fourth_order() {
        // Damped oscillator; compare terminal errors at h and h/2 against h/4.
        let plant = LtiPlant::unchecked(
            dmatrix![0.0, 1.0; -4.0, -0.4],
            dmatrix![0.0; 1.0],
            dmatrix![1.0, 0.0],
            DMatrix::zeros(2, 1),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let exo = Exosystem::new(dmatrix![0.0], dvector![0.0]).unwrap();
        let sys = Interconnection { plant: &plant, exo: &exo, filter: None, internal_model: None };
        let pol = PolicySchedule {
            initial: Policy {
                source: FeedbackSource::State,
                gain: DMatrix::zeros(1, 2),
                signal: ExplorationSignal { inputs: 1, tones: vec![tone(1.0, 3.0)] },
            },
            switch: None,
        };
        let run = |h: f64| {
            let set = SimSettings { h, t_end: 2.0, x0: dvector![1.0, 0.0], zeta0: None, z0: None };
            let log = simulate(&sys, &pol, &set).unwrap();
            log.x.column(log.len() - 1).clone_owned()
        };
        let reference = run(0.0125);
        let e1 = (run(0.1) - &reference).norm();
        let e2 = (run(0.05) - &reference).norm();
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn switch_logs_left_limit() {
        let (plant, exo) = free_plant();
        let sys = Interconnection { plant: &plant, exo: &exo, filter: None, internal_model: None };
        let pol = PolicySchedule {
            initial: Policy {
                source: FeedbackSource::State,
                gain: DMatrix::zeros(2, 2),
                signal: ExplorationSignal::silent(2),
            },
            switch: Some((
                0.5,
                Policy {
                    source: FeedbackSource::State,
                    gain: -DMatrix::identity(2, 2),
                    signal: ExplorationSignal::silent(2),
                },
            )),
        };
        let set = SimSettings { h: 0.1, t_end: 1.0, x0: dvector![1.0, 1.0], zeta0: None, z0: None };
        let log = simulate(&sys, &pol, &set).unwrap();
        let k = log.index_of(0.5).unwrap();
        assert_eq!(log.u.column(k).norm(), 0.0);
        assert!(log.u.column(k + 1).norm() > 0.0);
        assert_eq!(log.x.column(k), dvector![1.0, 1.0]);
        assert!(log.x[(0, k + 1)] < 1.0);
        assert!(log.index_of(0.55).is_err());
        assert!(log.index_of(2.0).is_err());
    }

    #[test]
    fn output_channels_consistent() {
        let plant = LtiPlant::unchecked(
            dmatrix![-1.0, 0.5; 0.0, -2.0],
            dmatrix![0.0; 1.0],
            dmatrix![1.0, 2.0],
            dmatrix![1.0, 0.0; 0.0, 1.0],
            dmatrix![0.5, -0.8],
        )
        .unwrap();
        let exo = Exosystem::new(dmatrix![0.0, 1.0; -1.0, 0.0], dvector![1.0, 0.8]).unwrap();
        let sys = Interconnection { plant: &plant, exo: &exo, filter: None, internal_model: None };
        let pol = PolicySchedule {
            initial: Policy {
                source: FeedbackSource::State,
                gain: DMatrix::zeros(1, 2),
                signal: ExplorationSignal { inputs: 1, tones: vec![tone(1.0, 2.0)] },
            },
            switch: None,
        };
        let set = SimSettings { h: 0.01, t_end: 1.0, x0: dvector![1.0, 0.0], zeta0: None, z0: None };
        let log = simulate(&sys, &pol, &set).unwrap();
        for k in 0..log.len() {
            let y = &plant.c * log.x.column(k);
            assert!((log.y.column(k) - &y).amax() <= 1e-12);
            assert!((log.e.column(k) - (&y + &plant.f * log.v.column(k))).amax() <= 1e-12);
        }
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,v_1,v_2,x_1,x_2,u_1,y_1,e_1,ex_norm\n"));
        assert_eq!(text.lines().count(), log.len() + 1);
    }
}
