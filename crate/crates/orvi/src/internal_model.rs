//! Minimal `p`-copy internal model and exosystem recasting.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim, Error, Result};
use crate::linalg::{block_diag, vec, CompanionPair, LeastSquares};
use crate::scalar::{lit, Real};
use crate::system::Exosystem;

/// Default annihilation tolerance for [`minimal_polynomial`].
pub const MINPOLY_TOL: f64 = 1e-10;

/// Smallest-degree monic `m` with `‖m(S)‖_F ≤ tol · max(1, ‖S‖_F)^deg`,
/// found by growing the Krylov sequence `vec(I), vec(S), vec(S²), …`.
/// Returns the low-order coefficients `[c_0, …, c_{d-1}]`.
pub fn minimal_polynomial<T: Real>(s: &DMatrix<T>, tol: T) -> Result<Vec<T>> {
    let q = s.nrows();
    if !s.is_square() || q == 0 {
        return Err(dim("minimal_polynomial", format!("{}x{}", s.nrows(), s.ncols())));
    }
    let scale = s.norm().max(T::one());
    let mut powers = vec![DMatrix::<T>::identity(q, q)];
    for k in 1..=q {
        let sk = &powers[k - 1] * s;
        let mut krylov = DMatrix::zeros(q * q, k);
        for (j, pj) in powers.iter().enumerate() {
            krylov.set_column(j, &vec(pj));
        }
        let target = -vec(&sk);
        let coeffs = match LeastSquares::new(&krylov) {
            Ok(ls) => ls.solve(&target),
            Err(_) => {
                powers.push(sk);
                continue;
            }
        };
        let mut m = sk.clone();
        for (j, pj) in powers.iter().enumerate() {
            m += pj * coeffs[j];
        }
        if m.norm() <= tol * scale.powi(k as i32) || k == q {
            return Ok(coeffs.iter().copied().collect());
        }
        powers.push(sk);
    }
    unreachable!("Cayley–Hamilton bounds the degree by q")
}

/// `ż = G1 z + G2 e` with `G1 = I_p ⊗ β`, `G2 = I_p ⊗ σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalModel<T: Real> {
    pub minpoly: Vec<T>,
    /// `β` (companion block) and `σ = e_deg`.
    pub beta: CompanionPair<T>,
    pub copies: usize,
    pub g1: DMatrix<T>,
    pub g2: DMatrix<T>,
}

impl<T: Real> InternalModel<T> {
    pub fn n_z(&self) -> usize {
        self.g1.nrows()
    }

    pub fn derivative(&self, z: &DVector<T>, e: &DVector<T>) -> DVector<T> {
        &self.g1 * z + &self.g2 * e
    }
}

pub fn build_p_copy<T: Real>(minpoly: &[T], p: usize) -> Result<InternalModel<T>> {
    if minpoly.is_empty() {
        return Err(Error::Polynomial("internal model needs degree ≥ 1".into()));
    }
    if p == 0 {
        return Err(Error::Config("internal model needs p ≥ 1".into()));
    }
    let beta = CompanionPair::new(minpoly)?;
    let sigma = DMatrix::from_column_slice(beta.degree(), 1, beta.b.as_slice());
    let g1 = block_diag(&vec![&beta.a; p]);
    let g2 = block_diag(&vec![&sigma; p]);
    Ok(InternalModel { minpoly: minpoly.to_vec(), beta, copies: p, g1, g2 })
}

/// Exosystem in companion form generating the same signal class; the
/// learner treats its state as the known exogenous signal.
pub fn recast_exosystem<T: Real>(minpoly: &[T], vhat0: &DVector<T>) -> Result<Exosystem<T>> {
    let c = CompanionPair::new(minpoly)?;
    Exosystem::new(c.a, vhat0.clone())
}

/// `‖m(A)‖_F` for a monic polynomial given by its low-order coefficients.
pub fn annihilation_residual<T: Real>(minpoly: &[T], a: &DMatrix<T>) -> T {
    crate::linalg::poly_eval_matrix(minpoly, a).norm()
}

pub fn default_tol<T: Real>() -> T {
    lit(MINPOLY_TOL)
}
