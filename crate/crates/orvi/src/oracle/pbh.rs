//! Eigenvalue-wise rank tests (stabilizability, detectability, transmission
//! zeros).

use nalgebra::{Complex, DMatrix};

use crate::error::{dim, Error, Result};
use crate::linalg::{eigenvalues, singular_values, RANK_TOL};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbhMode {
    /// `[A − λI, B]` at eigenvalues with `Re λ ≥ −1e-9`.
    Stabilizable,
    /// `[A − λI; C]` at eigenvalues with `Re λ ≥ −1e-9`.
    Detectable,
    /// `[A − λI, B]` at every eigenvalue.
    Controllable,
    /// `[A − λI; C]` at every eigenvalue.
    Observable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbhReport<T: Real> {
    pub ok: bool,
    /// Eigenvalue with the largest rank gap (ties: smallest relative
    /// singular value); `None` when no eigenvalue was tested.
    pub worst_eigenvalue: Option<Complex<T>>,
    pub worst_rank_gap: usize,
}

impl<T: Real> PbhReport<T> {
    pub fn into_error(self, context: &'static str) -> Error {
        let z = self.worst_eigenvalue.unwrap_or(Complex::new(T::zero(), T::zero()));
        Error::Pbh { context, re: to_f64(z.re), im: to_f64(z.im), gap: self.worst_rank_gap }
    }
}

/// Real matrix whose rank is twice the complex rank of `x + i·y`.
fn realify<T: Real>(x: &DMatrix<T>, y: &DMatrix<T>) -> DMatrix<T> {
    let (r, c) = x.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    out.view_mut((0, 0), (r, c)).copy_from(x);
    out.view_mut((0, c), (r, c)).copy_from(&(-y));
    out.view_mut((r, 0), (r, c)).copy_from(y);
    out.view_mut((r, c), (r, c)).copy_from(x);
    out
}

/// Complex rank of `x + i·y` and the ratio of its `target`-th singular
/// value to the largest one.
fn complex_rank<T: Real>(x: &DMatrix<T>, y: &DMatrix<T>, target: usize) -> Result<(usize, T)> {
    let real = y.iter().all(|v| *v == T::zero());
    let s = if real { singular_values(x)? } else { singular_values(&realify(x, y))? };
    let factor = if real { 1 } else { 2 };
    let smax = if s.is_empty() { T::zero() } else { s[0] };
    let thr = lit::<T>(RANK_TOL) * smax;
    let rank = if smax > T::zero() { s.iter().filter(|&&v| v > thr).count() / factor } else { 0 };
    let idx = factor * target - 1;
    let ratio = if smax > T::zero() && idx < s.len() { s[idx] / smax } else { T::zero() };
    Ok((rank, ratio))
}

pub fn pbh_check<T: Real>(a: &DMatrix<T>, bc: &DMatrix<T>, mode: PbhMode) -> Result<PbhReport<T>> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(dim("pbh_check", "A is not square"));
    }
    let dual = matches!(mode, PbhMode::Detectable | PbhMode::Observable);
    let (a, b) = if dual {
        if bc.ncols() != n {
            return Err(dim("pbh_check", format!("C has {} columns for n = {n}", bc.ncols())));
        }
        (a.transpose(), bc.transpose())
    } else {
        if bc.nrows() != n {
            return Err(dim("pbh_check", format!("B has {} rows for n = {n}", bc.nrows())));
        }
        (a.clone(), bc.clone())
    };
    let all = matches!(mode, PbhMode::Controllable | PbhMode::Observable);
    let floor = lit::<T>(-1e-9);

    let mut worst: Option<(usize, T, Complex<T>)> = None;
    for lambda in eigenvalues(&a)? {
        if !all && lambda.re < floor {
            continue;
        }
        // For the dual test the eigenvalue of Aᵀ is the same; conjugation
        // does not change rank.
        let mut x = DMatrix::zeros(n, n + b.ncols());
        x.view_mut((0, 0), (n, n)).copy_from(&(&a - DMatrix::identity(n, n) * lambda.re));
        x.view_mut((0, n), b.shape()).copy_from(&b);
        let mut y = DMatrix::zeros(n, n + b.ncols());
        if lambda.im != T::zero() {
            y.view_mut((0, 0), (n, n)).copy_from(&(DMatrix::identity(n, n) * (-lambda.im)));
        }
        let (rank, ratio) = complex_rank(&x, &y, n)?;
        let gap = n - rank.min(n);
        let replace = match &worst {
            None => true,
            Some((g, r, _)) => gap > *g || (gap == *g && ratio < *r),
        };
        if replace {
            worst = Some((gap, ratio, lambda));
        }
    }
    Ok(match worst {
        Some((gap, _, z)) => PbhReport { ok: gap == 0, worst_eigenvalue: Some(z), worst_rank_gap: gap },
        None => PbhReport { ok: true, worst_eigenvalue: None, worst_rank_gap: 0 },
    })
}

/// Complex rank of `[[A − λI, B], [C, 0]]`.
pub fn rosenbrock_rank<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, c: &DMatrix<T>, lambda: Complex<T>) -> Result<usize> {
    let (n, m, p) = (a.nrows(), b.ncols(), c.nrows());
    if !a.is_square() || b.nrows() != n || c.ncols() != n {
        return Err(dim("rosenbrock_rank", "inconsistent (A, B, C)"));
    }
    let mut x = DMatrix::zeros(n + p, n + m);
    x.view_mut((0, 0), (n, n)).copy_from(&(a - DMatrix::identity(n, n) * lambda.re));
    x.view_mut((0, n), (n, m)).copy_from(b);
    x.view_mut((n, 0), (p, n)).copy_from(c);
    let mut y = DMatrix::zeros(n + p, n + m);
    y.view_mut((0, 0), (n, n)).copy_from(&(DMatrix::identity(n, n) * (-lambda.im)));
    Ok(complex_rank(&x, &y, 1)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn plant() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        (dmatrix![0.0, 1.0, 0.0; 0.0, 0.0, 0.0; 0.0, 0.0, -1.0], dmatrix![0.0; 1.0; 0.0], dmatrix![1.0, 2.0, 3.0])
    }

    #[test]
    fn stabilizable_but_not_controllable() {
        let (a, b, c) = plant();
        assert!(pbh_check(&a, &b, PbhMode::Stabilizable).unwrap().ok);
        let ctrb = pbh_check(&a, &b, PbhMode::Controllable).unwrap();
        assert!(!ctrb.ok);
        assert!((ctrb.worst_eigenvalue.unwrap().re + 1.0).abs() < 1e-12);
        assert!(pbh_check(&a, &c, PbhMode::Observable).unwrap().ok);
        assert!(pbh_check(&a, &c, PbhMode::Detectable).unwrap().ok);
    }

    #[test]
    fn unstabilizable_scalar() {
        let r = pbh_check(&dmatrix![1.0], &dmatrix![0.0], PbhMode::Stabilizable).unwrap();
        assert!(!r.ok);
        assert_eq!(r.worst_eigenvalue.unwrap().re, 1.0);
        assert_eq!(r.worst_rank_gap, 1);
    }

    #[test]
    fn complex_mode_detected() {
        // Rotation observed through a channel that misses it.
        let a = dmatrix![0.0f64, 1.0, 0.0; -1.0, 0.0, 0.0; 0.0, 0.0, -1.0];
        let c = dmatrix![0.0, 0.0, 1.0];
        let r = pbh_check(&a, &c, PbhMode::Detectable).unwrap();
        assert!(!r.ok);
        assert!((r.worst_eigenvalue.unwrap().im.abs() - 1.0).abs() < 1e-12);
        assert!(pbh_check(&a, &dmatrix![1.0, 0.0, 1.0], PbhMode::Observable).unwrap().ok);
    }

    #[test]
    fn transmission_rank_at_exosystem_modes() {
        let (a, b, c) = plant();
        for im in [1.0, -1.0] {
            assert_eq!(rosenbrock_rank(&a, &b, &c, Complex::new(0.0, im)).unwrap(), 4);
        }
        // A zero of the plant: C x = x_3 only, λ = -1 is a blocking zero.
        let c3 = dmatrix![0.0, 0.0, 1.0];
        assert!(rosenbrock_rank(&a, &b, &c3, Complex::new(-1.0, 0.0)).unwrap() < 4);
    }
}
