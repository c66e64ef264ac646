//! Observer pole placement and characteristic polynomials.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{dim, Error, Result};
use crate::linalg::{eigenvalues, numerical_rank, poly_eval_matrix, poly_from_roots, RANK_TOL};
use crate::oracle::pbh::{pbh_check, PbhMode};
use crate::scalar::{lit, to_f64, Real};

/// Low-order coefficients of `det(sI − A)`, from the spectrum.
pub fn char_poly<T: Real>(a: &DMatrix<T>) -> Result<Vec<T>> {
    poly_from_roots(&eigenvalues(a)?)
}

fn observability_matrix<T: Real>(a: &DMatrix<T>, c: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let p = c.nrows();
    let mut o = DMatrix::zeros(n * p, n);
    let mut row = c.clone();
    for k in 0..n {
        o.view_mut((k * p, 0), (p, n)).copy_from(&row);
        row = &row * a;
    }
    o
}

/// Ackermann's formula on the dual pair for a single output row `c`.
fn ackermann<T: Real>(a: &DMatrix<T>, c: &DMatrix<T>, alpha: &[T]) -> Option<DVector<T>> {
    let n = a.nrows();
    let o = observability_matrix(a, c);
    let mut en = DVector::zeros(n);
    en[n - 1] = T::one();
    let col = o.lu().solve(&en)?;
    Some(poly_eval_matrix(alpha, a) * col)
}

/// Observer gain `L` (n×p) with `λ(A − LC)` equal to `poles`.
///
/// Multi-output plants are reduced to a single output `gᵀC` with the first
/// weight `g` (unit vectors, then all-ones) that keeps the pair observable;
/// the result is `L = ℓ gᵀ`.
pub fn place_observer_gain<T: Real>(a: &DMatrix<T>, c: &DMatrix<T>, poles: &[Complex<T>]) -> Result<DMatrix<T>> {
    let (n, p) = (a.nrows(), c.nrows());
    if !a.is_square() || c.ncols() != n {
        return Err(dim("place_observer_gain", "A and C shapes disagree"));
    }
    if poles.len() != n {
        return Err(dim("place_observer_gain", format!("{} poles for n = {n}", poles.len())));
    }
    let alpha = poly_from_roots(poles)?;
    let obs = pbh_check(a, c, PbhMode::Observable)?;
    if !obs.ok {
        return Err(obs.into_error("place_observer_gain (A, C) observability"));
    }

    let mut weights: Vec<DVector<T>> = (0..p)
        .map(|i| {
            let mut g = DVector::zeros(p);
            g[i] = T::one();
            g
        })
        .collect();
    if p > 1 {
        weights.push(DVector::from_element(p, T::one()));
        weights.push(DVector::from_fn(p, |i, _| lit::<T>(1.0 / (i as f64 + 1.0))));
    }
    for g in weights {
        let row = DMatrix::from_row_slice(1, n, (g.transpose() * c).as_slice());
        if numerical_rank(&observability_matrix(a, &row), lit(RANK_TOL))? < n {
            continue;
        }
        let Some(ell) = ackermann(a, &row, &alpha) else { continue };
        let l = &ell * g.transpose();
        let got = char_poly(&(a - &l * c))?;
        let ok = got.iter().zip(&alpha).all(|(x, y)| (*x - *y).abs() <= lit::<T>(1e-6) * (T::one() + y.abs()));
        if ok {
            return Ok(l);
        }
    }
    Err(Error::Identity(format!(
        "no single-output reduction places the observer poles (n = {n}, p = {p}, first pole {})",
        to_f64(poles[0].re)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::poly_from_real_roots;
    use nalgebra::dmatrix;

    fn real(v: &[f64]) -> Vec<Complex<f64>> {
        v.iter().map(|&x| Complex::new(x, 0.0)).collect()
    }

    #[test]
    fn plant_example_gain() {
        let a = dmatrix![0.0, 1.0, 0.0; 0.0, 0.0, 0.0; 0.0, 0.0, -1.0];
        let c = dmatrix![1.0, 2.0, 3.0];
        let l = place_observer_gain(&a, &c, &real(&[-5.0, -6.0, -7.0])).unwrap();
        for (got, want) in l.iter().zip([-523.0, 210.0, 40.0]) {
            assert!((got - want).abs() <= 5e-3 * want.abs(), "{got} vs {want}");
        }
        let mut eig: Vec<f64> = eigenvalues(&(a - &l * c)).unwrap().iter().map(|z| z.re).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in eig.iter().zip([-7.0, -6.0, -5.0]) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn double_integrator() {
        let l = place_observer_gain(&dmatrix![0.0, 1.0; 0.0, 0.0], &dmatrix![1.0, 0.0], &real(&[-1.0, -1.0])).unwrap();
        assert!((l - dmatrix![2.0; 1.0]).norm() < 1e-12);
    }

    #[test]
    fn poles_already_in_place() {
        let a = dmatrix![-1.0, 0.0; 0.0, -2.0];
        let c = dmatrix![1.0, 1.0];
        let l = place_observer_gain(&a, &c, &real(&[-1.0, -2.0])).unwrap();
        assert!(l.norm() < 1e-12);
    }

    #[test]
    fn multi_output_and_complex_poles() {
        let a = dmatrix![0.0f64, 1.0, 0.0; 0.0, 0.0, 1.0; 1.0, -2.0, 0.5];
        let c = dmatrix![1.0, 0.0, 0.0; 0.0, 0.0, 1.0];
        let poles = vec![Complex::new(-2.0, 1.0), Complex::new(-2.0, -1.0), Complex::new(-3.0, 0.0)];
        let l = place_observer_gain(&a, &c, &poles).unwrap();
        let got = char_poly(&(a - l * c)).unwrap();
        let want = poly_from_roots(&poles).unwrap();
        for (x, y) in got.iter().zip(want) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn unobservable_rejected() {
        let a = dmatrix![-1.0, 0.0; 0.0, 1.0];
        let c = dmatrix![1.0, 0.0];
        assert!(matches!(place_observer_gain(&a, &c, &real(&[-1.0, -2.0])), Err(Error::Pbh { .. })));
        assert!(place_observer_gain(&a, &c, &real(&[-1.0])).is_err());
    }

    #[test]
    fn char_poly_matches_roots() {
        let a = dmatrix![0.0f64, 1.0, 0.0; 0.0, 0.0, 1.0; -210.0, -107.0, -18.0];
        let c = char_poly(&a).unwrap();
        for (x, y) in c.iter().zip(poly_from_real_roots(&[-5.0, -6.0, -7.0])) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
