//! Dense helpers: half-vectorizations, Kronecker products, companion forms,
//! spectra, ranks and least squares.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen, QR, SVD};

use crate::error::{dim, Error, Result};
use crate::scalar::{cabs, lit, nan, to_f64, Real};

/// Relative singular-value threshold used for every numerical rank decision.
pub const RANK_TOL: f64 = 1e-8;

/// Symmetry tolerance; inputs are symmetrized by averaging.
pub const SYM_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 10_000;

/// `n(n+1)/2`.
#[inline]
pub fn tri(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Quadratic monomials `[x1², x1x2, …, x1xn, x2², …, xn²]`.
pub fn vecv<T: Real>(x: &DVector<T>) -> DVector<T> {
    let n = x.len();
    let mut out = DVector::zeros(tri(n));
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[k] = x[i] * x[j];
            k += 1;
        }
    }
    out
}

/// Like [`vecv`] but checks the expected length first.
pub fn vecv_checked<T: Real>(x: &DVector<T>, n: usize) -> Result<DVector<T>> {
    if x.len() != n || n == 0 {
        return Err(dim("vecv", format!("vector of length {} for n = {n}", x.len())));
    }
    Ok(vecv(x))
}

/// Upper-triangular packing with doubled off-diagonals, so that
/// `vecs(P)·vecv(x) = xᵀPx`. The input is symmetrized by averaging.
pub fn vecs<T: Real>(p: &DMatrix<T>) -> Result<DVector<T>> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(dim("vecs", format!("{}x{} is not square", n, p.ncols())));
    }
    let mut out = DVector::zeros(tri(n));
    let mut k = 0;
    for i in 0..n {
        out[k] = p[(i, i)];
        k += 1;
        for j in i + 1..n {
            out[k] = p[(i, j)] + p[(j, i)];
            k += 1;
        }
    }
    Ok(out)
}

/// Inverse of [`vecs`].
pub fn unvecs<T: Real>(v: &DVector<T>, n: usize) -> Result<DMatrix<T>> {
    if v.len() != tri(n) {
        return Err(dim("unvecs", format!("length {} for n = {n}", v.len())));
    }
    let half: T = lit(0.5);
    let mut p = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        p[(i, i)] = v[k];
        k += 1;
        for j in i + 1..n {
            let h = v[k] * half;
            p[(i, j)] = h;
            p[(j, i)] = h;
            k += 1;
        }
    }
    Ok(p)
}

/// Column-stacking vectorization.
pub fn vec<T: Real>(x: &DMatrix<T>) -> DVector<T> {
    DVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec<T: Real>(v: &DVector<T>, rows: usize, cols: usize) -> Result<DMatrix<T>> {
    if v.len() != rows * cols {
        return Err(dim("unvec", format!("length {} for {rows}x{cols}", v.len())));
    }
    Ok(DMatrix::from_column_slice(rows, cols, v.as_slice()))
}

pub fn kron<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a.kronecker(b)
}

pub fn block_diag<T: Real>(blocks: &[&DMatrix<T>]) -> DMatrix<T> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn symmetrize<T: Real>(p: &DMatrix<T>) -> DMatrix<T> {
    (p + p.transpose()) * lit::<T>(0.5)
}

pub fn is_symmetric<T: Real>(p: &DMatrix<T>, tol: T) -> bool {
    p.is_square() && (p - p.transpose()).amax() <= tol * (T::one() + p.amax())
}

/// Monic companion matrix with superdiagonal ones and last row `-α`, paired
/// with `b = e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionPair<T: Real> {
    pub alpha: Vec<T>,
    pub a: DMatrix<T>,
    pub b: DVector<T>,
}

impl<T: Real> CompanionPair<T> {
    pub fn new(alpha: &[T]) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(Error::Polynomial("companion form needs degree ≥ 1".into()));
        }
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = T::one();
        }
        for (j, &c) in alpha.iter().enumerate() {
            a[(n - 1, j)] = -c;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = T::one();
        Ok(Self { alpha: alpha.to_vec(), a, b })
    }

    pub fn degree(&self) -> usize {
        self.alpha.len()
    }
}

/// Coefficients `[α_0, …, α_{n-1}]` of `∏(s − r_i)`. Complex roots must come
/// in conjugate pairs.
pub fn poly_from_roots<T: Real>(roots: &[Complex<T>]) -> Result<Vec<T>> {
    let scale = roots.iter().fold(T::one(), |m, r| m.max(cabs(*r)));
    let tol = lit::<T>(1e-9) * scale;
    let mut used = vec![false; roots.len()];
    for (i, r) in roots.iter().enumerate() {
        if r.im.abs() <= tol || used[i] {
            continue;
        }
        let partner = (0..roots.len()).find(|&j| j != i && !used[j] && cabs(roots[j] - r.conj()) <= tol);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return Err(Error::UnpairedRoot { re: to_f64(r.re), im: to_f64(r.im) }),
        }
    }

    // Highest-degree-first product, then reversed.
    let mut c: Vec<Complex<T>> = vec![Complex::new(T::one(), T::zero())];
    for r in roots {
        let mut next = vec![Complex::new(T::zero(), T::zero()); c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k] += *ck;
            next[k + 1] -= *ck * *r;
        }
        c = next;
    }
    Ok(c.iter().rev().take(roots.len()).map(|z| z.re).collect())
}

/// Real roots convenience wrapper for [`poly_from_roots`].
pub fn poly_from_real_roots<T: Real>(roots: &[T]) -> Vec<T> {
    let z: Vec<_> = roots.iter().map(|&r| Complex::new(r, T::zero())).collect();
    poly_from_roots(&z).expect("real roots are self-conjugate")
}

/// Evaluate the monic polynomial with low-order coefficients `alpha` at a
/// scalar.
pub fn poly_eval<T: Real>(alpha: &[T], s: Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::one(), T::zero());
    for &c in alpha.iter().rev() {
        acc = acc * s + Complex::new(c, T::zero());
    }
    acc
}

/// Evaluate the monic polynomial at a square matrix (Horner).
pub fn poly_eval_matrix<T: Real>(alpha: &[T], a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let eye = DMatrix::<T>::identity(n, n);
    let mut acc = eye.clone();
    for &c in alpha.iter().rev() {
        acc = &acc * a + &eye * c;
    }
    acc
}

fn require_square<T: Real>(a: &DMatrix<T>, context: &'static str) -> Result<()> {
    if !a.is_square() {
        return Err(dim(context, format!("{}x{} is not square", a.nrows(), a.ncols())));
    }
    Ok(())
}

/// Diagonal similarity by powers of two that evens out row and column
/// norms (Parlett–Reinsch); exact in floating point and markedly improves
/// eigenvalue accuracy for companion-like matrices.
pub fn balance<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let mut b = a.clone();
    let two: T = lit(2.0);
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].abs();
                    r += b[(i, j)].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let total = c + r;
            let mut f = T::one();
            let (mut cc, mut rr) = (c, r);
            while cc < rr / two {
                cc *= two;
                rr /= two;
                f *= two;
            }
            while cc >= rr * two {
                cc /= two;
                rr *= two;
                f /= two;
            }
            if (cc + rr) < lit::<T>(0.95) * total && f != T::one() {
                done = false;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
    }
    b
}

/// Eigenvalues via a real Schur decomposition of the balanced matrix.
pub fn eigenvalues<T: Real>(a: &DMatrix<T>) -> Result<Vec<Complex<T>>> {
    require_square(a, "eigenvalues")?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonConvergence { what: "eigenvalues of a non-finite matrix" });
    }
    let schur = Schur::try_new(balance(a), T::default_epsilon(), MAX_SWEEPS)
        .ok_or(Error::NonConvergence { what: "Schur decomposition" })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Stability verdict with its margin (largest real part).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hurwitz<T> {
    pub verdict: bool,
    pub margin: T,
}

/// Real parts within a few ulps of `‖A‖` are reported as exactly zero so
/// that marginally stable matrices are not declared Hurwitz by rounding.
pub fn is_hurwitz<T: Real>(a: &DMatrix<T>) -> Result<Hurwitz<T>> {
    require_square(a, "is_hurwitz")?;
    let eig = eigenvalues(a)?;
    let snap = lit::<T>(1e-13) * (T::one() + a.norm());
    let margin = eig
        .iter()
        .map(|z| if z.re.abs() <= snap { T::zero() } else { z.re })
        .fold(T::min_value().unwrap_or(-T::one() / T::default_epsilon()), |m, r| m.max(r));
    Ok(Hurwitz { verdict: margin < T::zero(), margin })
}

pub fn singular_values<T: Real>(a: &DMatrix<T>) -> Result<DVector<T>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonConvergence { what: "SVD of a non-finite matrix" });
    }
    let svd = SVD::try_new(a.clone(), false, false, T::default_epsilon(), MAX_SWEEPS)
        .ok_or(Error::NonConvergence { what: "SVD" })?;
    let mut s = svd.singular_values;
    s.as_mut_slice().sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// Number of singular values above `rel · σ_max`.
pub fn numerical_rank<T: Real>(a: &DMatrix<T>, rel: T) -> Result<usize> {
    let s = singular_values(a)?;
    Ok(rank_of(&s, rel))
}

pub fn rank_of<T: Real>(s: &DVector<T>, rel: T) -> usize {
    match s.iter().copied().reduce(|a, b| a.max(b)) {
        Some(max) if max > T::zero() => s.iter().filter(|&&x| x > rel * max).count(),
        _ => 0,
    }
}

/// Column 2-norms with zero columns mapped to one.
pub fn column_scales<T: Real>(a: &DMatrix<T>) -> DVector<T> {
    DVector::from_iterator(
        a.ncols(),
        a.column_iter().map(|c| {
            let n = c.norm();
            if n > T::zero() {
                n
            } else {
                T::one()
            }
        }),
    )
}

/// `a` with every column scaled to unit norm, plus the scales.
pub fn equilibrate_columns<T: Real>(a: &DMatrix<T>) -> (DMatrix<T>, DVector<T>) {
    let s = column_scales(a);
    let mut out = a.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col /= s[j];
    }
    (out, s)
}

pub fn spectral_norm<T: Real>(a: &DMatrix<T>) -> T {
    if a.is_square() && a.nrows() <= 64 && is_symmetric(a, T::zero()) {
        let e = SymmetricEigen::new(a.clone());
        return e.eigenvalues.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    }
    singular_values(a).map(|s| if s.is_empty() { T::zero() } else { s[0] }).unwrap_or_else(|_| nan())
}

/// Symmetric positive-semidefinite square root (negative eigenvalues
/// clipped).
pub fn psd_sqrt<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let e = SymmetricEigen::new(symmetrize(a));
    let d = e.eigenvalues.map(|x| x.max(T::zero()).sqrt());
    &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose()
}

/// Tall least-squares solver: column equilibration followed by a thin QR
/// factorization, reusable for many right-hand sides.
#[derive(Debug, Clone)]
pub struct LeastSquares<T: Real> {
    qt: DMatrix<T>,
    r: DMatrix<T>,
    scale: DVector<T>,
}

impl<T: Real> LeastSquares<T> {
    pub fn new(a: &DMatrix<T>) -> Result<Self> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::Rank { context: format!("least squares with {m} rows"), rank: m, required: n });
        }
        let (scaled, scale) = equilibrate_columns(a);
        let qr = QR::new(scaled);
        let r = qr.r();
        let dmax = r.diagonal().iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
        let tiny = T::default_epsilon() * lit::<T>(m as f64) * dmax;
        if dmax == T::zero() || r.diagonal().iter().any(|d| d.abs() <= tiny || !d.is_finite()) {
            let rank = numerical_rank(a, lit(RANK_TOL)).unwrap_or(0);
            return Err(Error::Rank { context: "least squares".into(), rank, required: n });
        }
        Ok(Self { qt: qr.q().transpose(), r, scale })
    }

    pub fn ncols(&self) -> usize {
        self.r.ncols()
    }

    pub fn solve(&self, b: &DVector<T>) -> DVector<T> {
        let rhs = &self.qt * b;
        let mut x = self.r.solve_upper_triangular(&rhs).expect("triangular factor checked nonsingular");
        x.component_div_assign(&self.scale);
        x
    }
}

/// One-shot least-squares solve `min ‖A x − b‖`.
pub fn lstsq<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>> {
    if a.nrows() != b.len() {
        return Err(dim("lstsq", format!("{} rows vs rhs of length {}", a.nrows(), b.len())));
    }
    Ok(LeastSquares::new(a)?.solve(b))
}

/// Stack matrices horizontally.
pub fn hstack<T: Real>(blocks: &[&DMatrix<T>]) -> Result<DMatrix<T>> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    if blocks.iter().any(|b| b.nrows() != rows) {
        return Err(dim("hstack", "row counts differ"));
    }
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), b.shape()).copy_from(*b);
        c += b.ncols();
    }
    Ok(out)
}

/// Stack matrices vertically.
pub fn vstack<T: Real>(blocks: &[&DMatrix<T>]) -> Result<DMatrix<T>> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    if blocks.iter().any(|b| b.ncols() != cols) {
        return Err(dim("vstack", "column counts differ"));
    }
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), b.shape()).copy_from(*b);
        r += b.nrows();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use nalgebra::dvector;
    use proptest::prelude::*;

    #[test]
    fn vecv_examples() {
        assert_eq!(vecv(&dvector![1.0, 2.0]), dvector![1.0, 2.0, 4.0]);
        assert_eq!(vecv(&DVector::<f64>::zeros(3)), DVector::zeros(6));
        assert_eq!(vecv(&dvector![1.0, -1.0, 2.0]), dvector![1.0, -1.0, 2.0, 1.0, -2.0, 4.0]);
        assert!(vecv_checked(&dvector![1.0, 2.0], 3).is_err());
    }

    #[test]
    fn vecs_examples() {
        assert_eq!(vecs(&DMatrix::<f64>::identity(2, 2)).unwrap(), dvector![1.0, 0.0, 1.0]);
        assert_eq!(vecs(&dmatrix![1.0, 2.0; 2.0, 3.0]).unwrap(), dvector![1.0, 4.0, 3.0]);
        assert!(vecs(&DMatrix::<f64>::zeros(2, 3)).is_err());
        assert!(unvecs(&dvector![1.0, 2.0], 2).is_err());
    }

    #[test]
    fn vecs_works_in_single_precision() {
        let p = dmatrix![2.0f32, 1.0; 1.0, 5.0];
        assert_eq!(unvecs(&vecs(&p).unwrap(), 2).unwrap(), p);
    }

    #[test]
    fn vec_is_column_major() {
        let x = dmatrix![1.0, 2.0; 3.0, 4.0];
        assert_eq!(vec(&x), dvector![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(unvec(&vec(&x), 2, 2).unwrap(), x);
    }

    #[test]
    fn vec_kron_identity() {
        // aᵀ X b = (b ⊗ a)ᵀ vec(X)
        let a = dvector![1.0, -2.0];
        let b = dvector![0.5, 3.0, 1.0];
        let x = dmatrix![1.0, 2.0, 3.0; 4.0, 5.0, 6.0];
        let lhs: f64 = (a.transpose() * &x * &b)[0];
        let rhs =
            kron(&DMatrix::from_column_slice(3, 1, b.as_slice()), &DMatrix::from_column_slice(2, 1, a.as_slice()));
        assert!((lhs - (rhs.transpose() * vec(&x))[0]).abs() < 1e-12);
    }

    #[test]
    fn poly_examples() {
        assert_eq!(poly_from_real_roots(&[-5.0, -6.0, -7.0]), vec![210.0, 107.0, 18.0]);
        assert_eq!(poly_from_real_roots(&[0.0]), vec![0.0]);
        assert_eq!(poly_from_real_roots(&[-1.0, -1.0]), vec![1.0, 2.0]);
        let pair = [Complex::new(0.0, 1.0), Complex::new(0.0, -1.0)];
        assert_eq!(poly_from_roots(&pair).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(poly_from_roots(&[Complex::new(1.0, 2.0)]), Err(Error::UnpairedRoot { .. })));
    }

    #[test]
    fn companion_layout() {
        let c = CompanionPair::new(&[210.0, 107.0, 18.0]).unwrap();
        assert_eq!(c.a, dmatrix![0.0, 1.0, 0.0; 0.0, 0.0, 1.0; -210.0, -107.0, -18.0]);
        assert_eq!(c.b, dvector![0.0, 0.0, 1.0]);
        // sum / product of eigenvalues
        let eig = eigenvalues(&c.a).unwrap();
        let sum: f64 = eig.iter().map(|z| z.re).sum();
        let prod = eig.iter().fold(Complex::new(1.0, 0.0), |p, z| p * z);
        assert!((sum + 18.0).abs() < 1e-10);
        assert!((prod.re + 210.0).abs() < 1e-10 * 210.0);
        assert!(CompanionPair::<f64>::new(&[]).is_err());
    }

    #[test]
    fn hurwitz_examples() {
        let h = is_hurwitz(&dmatrix![-1.0f64]).unwrap();
        assert!(h.verdict && (h.margin + 1.0).abs() < 1e-14);
        let h = is_hurwitz(&dmatrix![0.0, 1.0; -1.0, 0.0]).unwrap();
        assert!(!h.verdict);
        assert_eq!(h.margin, 0.0);
        assert!(is_hurwitz(&DMatrix::<f64>::zeros(2, 3)).is_err());
        let h32 = is_hurwitz(&dmatrix![-2.0f32, 1.0; 0.0, -3.0]).unwrap();
        assert!(h32.verdict && (h32.margin + 2.0).abs() < 1e-5);
    }

    #[test]
    fn rank_and_lstsq() {
        let a = dmatrix![1.0, 2.0; 2.0, 4.0; 3.0, 6.0];
        assert_eq!(numerical_rank(&a, RANK_TOL).unwrap(), 1);
        assert!(LeastSquares::new(&a).is_err());
        assert_eq!(numerical_rank(&DMatrix::<f64>::zeros(3, 2), RANK_TOL).unwrap(), 0);

        let a = dmatrix![1.0, 0.0; 0.0, 1e6; 1.0, 1e6];
        let x = dvector![2.0, -3e-6];
        let b = &a * &x;
        let got = lstsq(&a, &b).unwrap();
        assert!((got - x).norm() < 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let q = dmatrix![4.0, 2.0; 2.0, 2.0];
        let s = psd_sqrt(&q);
        assert!((&s * &s - q).norm() < 1e-12);
    }

    fn sym(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-10.0..10.0f64, n * n).prop_map(move |v| {
            let m = DMatrix::from_vec(n, n, v);
            symmetrize(&m)
        })
    }

    proptest! {
        #[test]
        fn vecs_vecv_duality((p, x) in (1usize..6).prop_flat_map(|n| (sym(n), proptest::collection::vec(-5.0..5.0f64, n)))) {
            let x = DVector::from_vec(x);
            let lhs = vecs(&p).unwrap().dot(&vecv(&x));
            let rhs = (x.transpose() * &p * &x)[0];
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn unvecs_roundtrip_exact(p in (1usize..7).prop_flat_map(sym)) {
            prop_assert_eq!(unvecs(&vecs(&p).unwrap(), p.nrows()).unwrap(), p);
        }

        #[test]
        fn companion_reproduces_roots(mut roots in proptest::collection::vec(-8.0..-0.5f64, 1..5), pairs in proptest::collection::vec((-3.0..0.0f64, 0.5..3.0f64), 0..2)) {
            // Keep roots separated so the eigenproblem is well conditioned.
            roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assume!(roots.windows(2).all(|w| w[1] - w[0] > 0.3));
            let mut all: Vec<Complex<f64>> = roots.iter().map(|&r| Complex::new(r, 0.0)).collect();
            for (re, im) in pairs {
                all.push(Complex::new(re, im));
                all.push(Complex::new(re, -im));
            }
            prop_assume!(all.iter().enumerate().all(|(i, a)| all.iter().skip(i + 1).all(|b| (a - b).norm() > 0.3)));
            let alpha = poly_from_roots(&all).unwrap();
            let eig = eigenvalues(&CompanionPair::new(&alpha).unwrap().a).unwrap();
            let mut left = eig.clone();
            for r in &all {
                let (k, d) = left.iter().enumerate()
                    .map(|(k, z)| (k, (z - r).norm()))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap()).unwrap();
                prop_assert!(d < 1e-8, "root {r} missed by {d}");
                left.remove(k);
            }
            for r in &all {
                let v = poly_eval(&alpha, *r).norm();
                prop_assert!(v <= 1e-9 * (1.0 + r.norm().powi(all.len() as i32)));
            }
        }
    }
}
