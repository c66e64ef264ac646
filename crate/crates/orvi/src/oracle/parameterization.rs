//! The linear map `M` with `x ≈ Mζ` for the model-free filter state.

use nalgebra::DMatrix;

use crate::error::{dim, Error, Result};
use crate::linalg::hstack;
use crate::observer::ObserverFilter;
use crate::oracle::placement::char_poly;
use crate::scalar::{lit, to_f64, Real};
use crate::system::LtiPlant;

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverParameterization<T: Real> {
    pub filter: ObserverFilter<T>,
    pub l: DMatrix<T>,
    /// `D_0, …, D_{n-1}`: coefficients of `adj(sI − (A − LC))`.
    pub d: Vec<DMatrix<T>>,
    pub m: DMatrix<T>,
}

/// `‖lhs − rhs‖_F ≤ tol (‖lhs‖_F + ‖rhs‖_F)`.
pub(crate) fn rel_close<T: Real>(lhs: &DMatrix<T>, rhs: &DMatrix<T>, tol: f64) -> (bool, T) {
    let diff = (lhs - rhs).norm();
    let scale = lhs.norm() + rhs.norm();
    let rel = if scale > T::zero() { diff / scale } else { T::zero() };
    (rel <= lit(tol), rel)
}

impl<T: Real> ObserverParameterization<T> {
    /// Relative residuals of `M(I⊗𝒜) = (A−LC)M`, `M B_ζ = B`, `M E_ζ = L`.
    pub fn identity_residuals(&self, plant: &LtiPlant<T>) -> [T; 3] {
        let abar = &plant.a - &self.l * &plant.c;
        [
            rel_close(&(&self.m * &self.filter.a_blocks), &(&abar * &self.m), 0.0).1,
            rel_close(&(&self.m * &self.filter.b_zeta), &plant.b, 0.0).1,
            rel_close(&(&self.m * &self.filter.e_zeta), &self.l, 0.0).1,
        ]
    }
}

pub fn compute_parameterization<T: Real>(
    plant: &LtiPlant<T>,
    l: &DMatrix<T>,
    lambda: &[T],
) -> Result<ObserverParameterization<T>> {
    let (n, m, p) = (plant.n(), plant.m(), plant.p());
    if l.shape() != (n, p) {
        return Err(dim("compute_parameterization", format!("L is {}x{}", l.nrows(), l.ncols())));
    }
    if lambda.len() != n {
        return Err(dim("compute_parameterization", format!("degree {} for n = {n}", lambda.len())));
    }
    let abar = &plant.a - l * &plant.c;
    let actual = char_poly(&abar)?;
    for (i, (got, want)) in actual.iter().zip(lambda).enumerate() {
        if (*got - *want).abs() > lit::<T>(1e-6) * (T::one() + want.abs()) {
            return Err(Error::PolynomialMismatch { index: i, got: to_f64(*got), expected: to_f64(*want) });
        }
    }

    let eye = DMatrix::<T>::identity(n, n);
    let mut d = vec![DMatrix::zeros(n, n); n];
    d[n - 1] = eye.clone();
    for i in (1..n).rev() {
        d[i - 1] = &abar * &d[i] + &eye * lambda[i];
    }
    let tail = &abar * &d[0];
    let (ok, rel) = rel_close(&tail, &(-&eye * lambda[0]), 1e-8);
    if !ok && !(tail.norm() <= lit(1e-12) && lambda[0] == T::zero()) {
        return Err(Error::Identity(format!("adjugate recursion residual {:e}", to_f64(rel))));
    }

    let f = hstack(&[&plant.b, l])?;
    let mut blocks = Vec::with_capacity(m + p);
    for i in 0..m + p {
        let fi = f.column(i);
        let mut mi = DMatrix::zeros(n, n);
        for (j, dj) in d.iter().enumerate() {
            mi.set_column(j, &(dj * fi));
        }
        blocks.push(mi);
    }
    let mm = hstack(&blocks.iter().collect::<Vec<_>>())?;

    let filter = ObserverFilter::new(lambda, m, p)?;
    let param = ObserverParameterization { filter, l: l.clone(), d, m: mm };
    for (name, r) in ["M(I⊗𝒜) = (A−LC)M", "M B_ζ = B", "M E_ζ = L"].iter().zip(param.identity_residuals(plant))
    {
        if r > lit(1e-8) {
            return Err(Error::Identity(format!("{name} violated: relative residual {:e}", to_f64(r))));
        }
    }
    Ok(param)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::poly_from_real_roots;
    use crate::oracle::placement::place_observer_gain;
    use nalgebra::{dmatrix, Complex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_case() {
        let plant = LtiPlant::new(dmatrix![0.5], dmatrix![2.0], dmatrix![1.0], dmatrix![0.0], dmatrix![0.0]).unwrap();
        let l = dmatrix![3.5];
        // A − LC = −3
        let par = compute_parameterization(&plant, &l, &[3.0]).unwrap();
        assert_eq!(par.d, vec![dmatrix![1.0]]);
        assert_eq!(par.m, dmatrix![2.0, 3.5]);
    }

    #[test]
    fn mismatched_polynomial_rejected() {
        let plant = LtiPlant::new(dmatrix![0.5], dmatrix![2.0], dmatrix![1.0], dmatrix![0.0], dmatrix![0.0]).unwrap();
        assert!(matches!(
            compute_parameterization(&plant, &dmatrix![3.5], &[4.0]),
            Err(Error::PolynomialMismatch { .. })
        ));
    }

    #[test]
    fn random_plants_satisfy_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 20 {
            let a = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-2.0..2.0));
            let b = DMatrix::from_fn(3, 1, |_, _| rng.random_range(-1.0..1.0));
            let c = DMatrix::from_fn(1, 3, |_, _| rng.random_range(-1.0..1.0));
            let Ok(plant) = LtiPlant::new(a, b, c, DMatrix::zeros(3, 1), DMatrix::zeros(1, 1)) else {
                continue;
            };
            let poles: Vec<_> = [-2.0, -3.0, -4.0].iter().map(|&x| Complex::new(x, 0.0)).collect();
            let Ok(l) = place_observer_gain(&plant.a, &plant.c, &poles) else { continue };
            let par = compute_parameterization(&plant, &l, &poly_from_real_roots(&[-2.0, -3.0, -4.0])).unwrap();
            assert!((&par.m * &par.filter.b_zeta - &plant.b).norm() <= 1e-10 * (1.0 + plant.b.norm()));
            assert!((&par.m * &par.filter.e_zeta - &l).norm() <= 1e-10 * (1.0 + l.norm()));
            checked += 1;
        }
    }
}
