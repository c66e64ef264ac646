//! Model-free input/output filter whose state reconstructs the plant state
//! through an unknown linear map.
//!
//! Each input and output channel drives its own copy of the companion pair
//! `(𝒜, b)` built from a user-chosen stable polynomial. Nothing here depends
//! on the plant matrices.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{kron, poly_from_roots, CompanionPair};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverFilter<T: Real> {
    pub companion: CompanionPair<T>,
    pub inputs: usize,
    pub outputs: usize,
    /// `I_{m+p} ⊗ 𝒜`
    pub a_blocks: DMatrix<T>,
    /// `[I_m ⊗ b; 0]`
    pub b_zeta: DMatrix<T>,
    /// `[0; I_p ⊗ b]`
    pub e_zeta: DMatrix<T>,
}

impl<T: Real> ObserverFilter<T> {
    /// `lambda` holds the low-order coefficients of the monic filter
    /// polynomial; it must have all roots in the open left half-plane.
    pub fn new(lambda: &[T], inputs: usize, outputs: usize) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::Config("filter needs at least one input and one output".into()));
        }
        let companion = CompanionPair::new(lambda)?;
        let h = crate::linalg::is_hurwitz(&companion.a)?;
        if !h.verdict {
            return Err(Error::Config("filter polynomial is not Hurwitz".into()));
        }
        let n = companion.degree();
        let k = inputs + outputs;
        let a_blocks = kron(&DMatrix::identity(k, k), &companion.a);
        let bcol = DMatrix::from_column_slice(n, 1, companion.b.as_slice());
        let mut b_zeta = DMatrix::zeros(n * k, inputs);
        b_zeta.view_mut((0, 0), (n * inputs, inputs)).copy_from(&kron(&DMatrix::identity(inputs, inputs), &bcol));
        let mut e_zeta = DMatrix::zeros(n * k, outputs);
        e_zeta
            .view_mut((n * inputs, 0), (n * outputs, outputs))
            .copy_from(&kron(&DMatrix::identity(outputs, outputs), &bcol));
        Ok(Self { companion, inputs, outputs, a_blocks, b_zeta, e_zeta })
    }

    pub fn from_poles(poles: &[Complex<T>], inputs: usize, outputs: usize) -> Result<Self> {
        Self::new(&poly_from_roots(poles)?, inputs, outputs)
    }

    /// Plant order `n` (degree of the filter polynomial).
    pub fn order(&self) -> usize {
        self.companion.degree()
    }

    /// `n (m + p)`.
    pub fn dim(&self) -> usize {
        self.order() * (self.inputs + self.outputs)
    }

    pub fn lambda(&self) -> &[T] {
        &self.companion.alpha
    }

    /// `ζ̇ = (I ⊗ 𝒜) ζ + B_ζ u + E_ζ y`.
    pub fn derivative(&self, zeta: &DVector<T>, u: &DVector<T>, y: &DVector<T>) -> DVector<T> {
        &self.a_blocks * zeta + &self.b_zeta * u + &self.e_zeta * y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn block_layout() {
        let f = ObserverFilter::new(&[2.0, 3.0], 1, 2).unwrap();
        assert_eq!(f.dim(), 6);
        assert_eq!(f.b_zeta.column(0).iter().copied().collect::<Vec<_>>(), vec![0., 1., 0., 0., 0., 0.]);
        assert_eq!(f.e_zeta, dmatrix![0.,0.; 0.,0.; 0.,0.; 1.,0.; 0.,0.; 0.,1.]);
        assert_eq!(f.a_blocks.view((2, 2), (2, 2)).clone_owned(), f.companion.a);
    }

    #[test]
    fn rejects_unstable_polynomial() {
        assert!(ObserverFilter::new(&[-1.0f64], 1, 1).is_err());
        assert!(ObserverFilter::new(&[1.0f64], 0, 1).is_err());
    }
}
