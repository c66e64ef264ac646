//! Plant and exosystem descriptions.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim, Error, Result};
use crate::linalg::eigenvalues;
use crate::oracle::pbh::{pbh_check, PbhMode};
use crate::scalar::{lit, to_f64, Real};

/// `ẋ = Ax + Bu + Ev`, `y = Cx`, `e = Cx + Fv`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiPlant<T: Real> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    pub e: DMatrix<T>,
    pub f: DMatrix<T>,
}

impl<T: Real> LtiPlant<T> {
    /// Checked constructor: dimensions, `(A, B)` stabilizable and `(A, C)`
    /// observable.
    pub fn new(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>, e: DMatrix<T>, f: DMatrix<T>) -> Result<Self> {
        let plant = Self::unchecked(a, b, c, e, f)?;
        let stab = pbh_check(&plant.a, &plant.b, PbhMode::Stabilizable)?;
        if !stab.ok {
            return Err(stab.into_error("plant (A, B) stabilizability"));
        }
        let obs = pbh_check(&plant.a, &plant.c, PbhMode::Observable)?;
        if !obs.ok {
            return Err(obs.into_error("plant (A, C) observability"));
        }
        Ok(plant)
    }

    /// Dimension checks only; used by diagnostics that report on invalid
    /// plants instead of rejecting them.
    pub fn unchecked(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>, e: DMatrix<T>, f: DMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || n == 0 {
            return Err(dim("plant", format!("A is {}x{}", a.nrows(), a.ncols())));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(dim("plant", format!("B is {}x{} for n = {n}", b.nrows(), b.ncols())));
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(dim("plant", format!("C is {}x{} for n = {n}", c.nrows(), c.ncols())));
        }
        if e.nrows() != n {
            return Err(dim("plant", format!("E has {} rows for n = {n}", e.nrows())));
        }
        if f.nrows() != c.nrows() || f.ncols() != e.ncols() {
            return Err(dim(
                "plant",
                format!("F is {}x{}, expected {}x{}", f.nrows(), f.ncols(), c.nrows(), e.ncols()),
            ));
        }
        Ok(Self { a, b, c, e, f })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    pub fn p(&self) -> usize {
        self.c.nrows()
    }
    pub fn q(&self) -> usize {
        self.e.ncols()
    }
}

/// `v̇ = Sv`, `v(0) = v0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Exosystem<T: Real> {
    pub s: DMatrix<T>,
    pub v0: DVector<T>,
}

impl<T: Real> Exosystem<T> {
    /// Rejects exosystems with a decaying mode (real part below `-1e-9`).
    pub fn new(s: DMatrix<T>, v0: DVector<T>) -> Result<Self> {
        if !s.is_square() || s.nrows() != v0.len() {
            return Err(dim("exosystem", format!("S is {}x{}, v0 has length {}", s.nrows(), s.ncols(), v0.len())));
        }
        for z in eigenvalues(&s)? {
            if z.re < lit(-1e-9) {
                return Err(Error::Config(format!(
                    "exosystem has a decaying mode {}{:+}i",
                    to_f64(z.re),
                    to_f64(z.im)
                )));
            }
        }
        Ok(Self { s, v0 })
    }

    pub fn q(&self) -> usize {
        self.s.nrows()
    }
}
