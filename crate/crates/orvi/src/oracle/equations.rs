//! Regulator (Sylvester), Lyapunov and Riccati equation solvers by
//! Kronecker vectorization.

use nalgebra::DMatrix;

use crate::error::{dim, Error, Result};
use crate::linalg::{eigenvalues, is_hurwitz, kron, symmetrize, unvec, vec};
use crate::oracle::pbh::{pbh_check, PbhMode};
use crate::scalar::{cabs, lit, to_f64, Real};

/// Solve `X S = A X + E`.
pub fn solve_sylvester_regulator<T: Real>(s: &DMatrix<T>, a: &DMatrix<T>, e: &DMatrix<T>) -> Result<DMatrix<T>> {
    let (q, n) = (s.nrows(), a.nrows());
    if !s.is_square() || !a.is_square() || e.shape() != (n, q) {
        return Err(dim("solve_sylvester_regulator", "S, A, E shapes disagree"));
    }
    let es = eigenvalues(s)?;
    let ea = eigenvalues(a)?;
    for zs in &es {
        for za in &ea {
            if cabs(*zs - *za) <= lit(1e-8) {
                return Err(Error::SpectraOverlap {
                    context: "regulator equation",
                    re: to_f64(zs.re),
                    im: to_f64(zs.im),
                });
            }
        }
    }
    // vec(XS) − vec(AX) = (Sᵀ ⊗ I_n − I_q ⊗ A) vec X
    let lhs = kron(&s.transpose(), &DMatrix::identity(n, n)) - kron(&DMatrix::identity(q, q), a);
    let x = lhs.lu().solve(&vec(e)).ok_or(Error::SpectraOverlap {
        context: "regulator equation",
        re: f64::NAN,
        im: f64::NAN,
    })?;
    let x = unvec(&x, n, q)?;
    let resid = (&x * s - a * &x - e).norm();
    let bound = lit::<T>(1e-9) * (T::one() + x.norm());
    if resid > bound {
        return Err(Error::Identity(format!(
            "regulator equation residual {:e} above {:e}",
            to_f64(resid),
            to_f64(bound)
        )));
    }
    Ok(x)
}

/// Solve `AᵀP + PA + Q = 0` for Hurwitz `A`.
pub fn solve_lyapunov<T: Real>(a: &DMatrix<T>, q: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(dim("solve_lyapunov", "A and Q shapes disagree"));
    }
    let eye = DMatrix::identity(n, n);
    let at = a.transpose();
    let lhs = kron(&eye, &at) + kron(&at, &eye);
    let p = lhs.lu().solve(&(-vec(q))).ok_or(Error::NonConvergence { what: "Lyapunov solve (singular operator)" })?;
    Ok(symmetrize(&unvec(&p, n, n)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution<T: Real> {
    pub p: DMatrix<T>,
    /// `K = −R⁻¹BᵀP`.
    pub k: DMatrix<T>,
    /// Frobenius norm of the Riccati residual.
    pub residual: T,
    /// Largest real part of `λ(A + BK)`.
    pub closed_loop_margin: T,
}

/// `AᵀP + PA + Q − PBR⁻¹BᵀP` (Frobenius norm).
pub fn care_residual<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, q: &DMatrix<T>, r_inv: &DMatrix<T>, p: &DMatrix<T>) -> T {
    (a.transpose() * p + p * a + q - p * b * r_inv * b.transpose() * p).norm()
}

const NEWTON_MAX: usize = 200;
const HOMOTOPY_MAX: usize = 500;

/// Newton–Kleinman from a stabilizing gain. Returns `(P, K)`.
fn kleinman<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    q: &DMatrix<T>,
    r: &DMatrix<T>,
    r_inv: &DMatrix<T>,
    mut k: DMatrix<T>,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let mut p_prev: Option<DMatrix<T>> = None;
    for _ in 0..NEWTON_MAX {
        let acl = a + b * &k;
        let p = solve_lyapunov(&acl, &(q + k.transpose() * r * &k))?;
        k = -(r_inv * b.transpose() * &p);
        if let Some(prev) = &p_prev {
            let step = (&p - prev).norm();
            if step <= lit::<T>(1e3) * T::default_epsilon() * (T::one() + p.norm()) {
                return Ok((p, k));
            }
        }
        p_prev = Some(p);
    }
    let p = p_prev.expect("at least one Newton step");
    Ok((p, k))
}

/// Stabilizing solution of `AᵀP + PA + Q − PBR⁻¹BᵀP = 0`.
///
/// A stabilizing initial gain is obtained by continuation in a left shift
/// `A − σI`: for large `σ` the zero gain stabilizes, and each solved shifted
/// problem yields a gain that still stabilizes a somewhat smaller shift.
pub fn solve_care<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    q: &DMatrix<T>,
    r: &DMatrix<T>,
) -> Result<RiccatiSolution<T>> {
    let (n, m) = (a.nrows(), b.ncols());
    if !a.is_square() || b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(dim("solve_care", "A, B, Q, R shapes disagree"));
    }
    let r = symmetrize(r);
    let q = symmetrize(q);
    let r_inv =
        r.clone().cholesky().ok_or_else(|| Error::Config("R must be symmetric positive definite".into()))?.inverse();
    let stab = pbh_check(a, b, PbhMode::Stabilizable)?;
    if !stab.ok {
        return Err(stab.into_error("solve_care (A, B) stabilizability"));
    }

    let eye = DMatrix::<T>::identity(n, n);
    let open = is_hurwitz(a)?;
    let mut k = DMatrix::zeros(m, n);
    if !open.verdict {
        let mut sigma = open.margin.max(T::zero()) + T::one();
        let mut converged = false;
        for _ in 0..HOMOTOPY_MAX {
            let shifted = a - &eye * sigma;
            let (_, ks) = kleinman(&shifted, b, &q, &r, &r_inv, k.clone())?;
            let mu = is_hurwitz(&(&shifted + b * &ks))?.margin;
            if mu >= T::zero() {
                return Err(Error::NoStabilizingGain(format!(
                    "shifted closed loop lost stability at σ = {}",
                    to_f64(sigma)
                )));
            }
            k = ks;
            // A − σ'I + BK has margin μ + (σ − σ'); keep 10% of it.
            let next = sigma + mu * lit::<T>(0.9);
            if next <= T::zero() {
                converged = true;
                break;
            }
            sigma = next;
        }
        if !converged || !is_hurwitz(&(a + b * &k))?.verdict {
            return Err(Error::NoStabilizingGain("shift continuation stalled".into()));
        }
    }

    let (p, k) = kleinman(a, b, &q, &r, &r_inv, k)?;
    let p = symmetrize(&p);
    let residual = care_residual(a, b, &q, &r_inv, &p);
    let bound = lit::<T>(1e-8) * (T::one() + p.norm());
    if !(residual <= bound) {
        return Err(Error::RiccatiResidual { residual: to_f64(residual), bound: to_f64(bound) });
    }
    let margin = is_hurwitz(&(a + b * &k))?.margin;
    if margin >= T::zero() {
        return Err(Error::NoStabilizingGain("Newton limit is not stabilizing".into()));
    }
    Ok(RiccatiSolution { p, k, residual, closed_loop_margin: margin })
}
