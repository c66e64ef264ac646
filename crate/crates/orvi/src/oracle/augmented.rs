//! The filter-plus-internal-model system in `ρ = col(ζ, z)` and the
//! Riccati correspondence with the state-plus-internal-model system.

use nalgebra::DMatrix;

use crate::error::{dim, Result};
use crate::internal_model::InternalModel;
use crate::linalg::{block_diag, psd_sqrt, vstack};
use crate::oracle::equations::{solve_care, solve_sylvester_regulator, RiccatiSolution};
use crate::oracle::parameterization::ObserverParameterization;
use crate::oracle::pbh::{pbh_check, PbhMode};
use crate::scalar::Real;
use crate::system::{Exosystem, LtiPlant};

/// `ρ̇ = A_ρ ρ + B_ρ u + E_ρ v + D_ρ e_x`, with `e_x = Mζ + X′v − x`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedAux<T: Real> {
    pub a_rho: DMatrix<T>,
    pub b_rho: DMatrix<T>,
    pub e_rho: DMatrix<T>,
    pub d_rho: DMatrix<T>,
    /// `blockdiag(M, I_{n_z})`, so that `col(x, z) ≈ W ρ` when `E = 0`.
    pub w: DMatrix<T>,
    /// Solution of `X′S = (A − LC)X′ + E`.
    pub x_prime: DMatrix<T>,
    pub n_rho: usize,
}

/// `A_ζ = (I ⊗ 𝒜) + E_ζ C M`.
pub fn a_zeta<T: Real>(plant: &LtiPlant<T>, param: &ObserverParameterization<T>) -> DMatrix<T> {
    &param.filter.a_blocks + &param.filter.e_zeta * &plant.c * &param.m
}

/// `A_ρ` and `B_ρ`; independent of the exosystem.
pub fn augmented_pair<T: Real>(
    plant: &LtiPlant<T>,
    param: &ObserverParameterization<T>,
    im: &InternalModel<T>,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if im.copies != plant.p() {
        return Err(dim("augmented system", format!("{} copies for p = {}", im.copies, plant.p())));
    }
    let nzeta = param.filter.dim();
    let nz = im.n_z();
    let mut a = DMatrix::zeros(nzeta + nz, nzeta + nz);
    a.view_mut((0, 0), (nzeta, nzeta)).copy_from(&a_zeta(plant, param));
    a.view_mut((nzeta, 0), (nz, nzeta)).copy_from(&(&im.g2 * &plant.c * &param.m));
    a.view_mut((nzeta, nzeta), (nz, nz)).copy_from(&im.g1);
    let b = vstack(&[&param.filter.b_zeta, &DMatrix::zeros(nz, plant.m())])?;
    Ok((a, b))
}

pub fn build_augmented_aux<T: Real>(
    plant: &LtiPlant<T>,
    param: &ObserverParameterization<T>,
    im: &InternalModel<T>,
    exo: &Exosystem<T>,
) -> Result<AugmentedAux<T>> {
    if exo.q() != plant.q() {
        return Err(dim("augmented system", format!("q = {} vs E with {} columns", exo.q(), plant.q())));
    }
    let (a_rho, b_rho) = augmented_pair(plant, param, im)?;
    let abar = &plant.a - &param.l * &plant.c;
    let x_prime = solve_sylvester_regulator(&exo.s, &abar, &plant.e)?;
    let cx = &plant.c * &x_prime;
    let e_rho = vstack(&[&(&param.filter.e_zeta * &cx), &(&im.g2 * (&cx + &plant.f))])?;
    let d_rho = -vstack(&[&(&param.filter.e_zeta * &plant.c), &(&im.g2 * &plant.c)])?;
    let eye = DMatrix::identity(im.n_z(), im.n_z());
    let w = block_diag(&[&param.m, &eye]);
    let stab = pbh_check(&a_rho, &b_rho, PbhMode::Stabilizable)?;
    if !stab.ok {
        return Err(stab.into_error("augmented pair (A_ρ, B_ρ) stabilizability"));
    }
    let n_rho = a_rho.nrows();
    Ok(AugmentedAux { a_rho, b_rho, e_rho, d_rho, w, x_prime, n_rho })
}

#[derive(Debug, Clone)]
pub struct CorrespondenceReport<T: Real> {
    pub xi: RiccatiSolution<T>,
    pub rho: RiccatiSolution<T>,
    /// `Q_ρ = Wᵀ Q_ξ W`.
    pub q_rho: DMatrix<T>,
    pub w: DMatrix<T>,
    /// `‖P_ρ* − WᵀP_ξ*W‖_F / ‖P_ρ*‖_F`.
    pub deviation: T,
    /// `‖K_ρ* − K_ξ*W‖_F / ‖K_ξ*W‖_F`.
    pub gain_deviation: T,
    pub q_rho_observable: bool,
    pub q_rho_detectable: bool,
}

/// Solve the Riccati equation of the state-plus-internal-model system
/// `(Y, J, C̄ᵀQ̄C̄, R)` and of the filter system `(A_ρ, B_ρ, WᵀQ_ξW, R)` and
/// compare `P_ρ*` against `WᵀP_ξ*W`. Without an internal model the filter
/// system alone is compared against the plant (`P_ζ* = MᵀP*M`); `q_bar` is
/// then just `Q_y`.
pub fn verify_riccati_correspondence<T: Real>(
    plant: &LtiPlant<T>,
    param: &ObserverParameterization<T>,
    im: Option<&InternalModel<T>>,
    q_bar: &DMatrix<T>,
    r: &DMatrix<T>,
) -> Result<CorrespondenceReport<T>> {
    let (n, m, p) = (plant.n(), plant.m(), plant.p());
    let nz = im.map_or(0, |im| im.n_z());
    if q_bar.shape() != (p + nz, p + nz) {
        return Err(dim(
            "verify_riccati_correspondence",
            format!("Q̄ is {}x{}, expected {}", q_bar.nrows(), q_bar.ncols(), p + nz),
        ));
    }
    let (y, j, cbar, a_rho, b_rho, w) = match im {
        Some(im) => {
            let mut y = DMatrix::zeros(n + nz, n + nz);
            y.view_mut((0, 0), (n, n)).copy_from(&plant.a);
            y.view_mut((n, 0), (nz, n)).copy_from(&(&im.g2 * &plant.c));
            y.view_mut((n, n), (nz, nz)).copy_from(&im.g1);
            let j = vstack(&[&plant.b, &DMatrix::zeros(nz, m)])?;
            let cbar = block_diag(&[&plant.c, &DMatrix::identity(nz, nz)]);
            let (a_rho, b_rho) = augmented_pair(plant, param, im)?;
            let w = block_diag(&[&param.m, &DMatrix::identity(nz, nz)]);
            (y, j, cbar, a_rho, b_rho, w)
        }
        None => (
            plant.a.clone(),
            plant.b.clone(),
            plant.c.clone(),
            a_zeta(plant, param),
            param.filter.b_zeta.clone(),
            param.m.clone(),
        ),
    };
    let q_xi = cbar.transpose() * q_bar * &cbar;
    let xi = solve_care(&y, &j, &q_xi, r)?;
    let q_rho = w.transpose() * &q_xi * &w;
    let rho = solve_care(&a_rho, &b_rho, &q_rho, r)?;

    let mapped = w.transpose() * &xi.p * &w;
    let deviation = (&rho.p - &mapped).norm() / rho.p.norm();
    let kw = &xi.k * &w;
    let gain_deviation = (&rho.k - &kw).norm() / kw.norm();
    let sq = psd_sqrt(&q_rho);
    let q_rho_observable = pbh_check(&a_rho, &sq, PbhMode::Observable)?.ok;
    let q_rho_detectable = pbh_check(&a_rho, &sq, PbhMode::Detectable)?.ok;
    Ok(CorrespondenceReport { xi, rho, q_rho, w, deviation, gain_deviation, q_rho_observable, q_rho_detectable })
}
