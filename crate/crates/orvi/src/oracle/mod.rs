//! Model-based ground truth. Nothing in the learning path may call into
//! this module; tests and reports use it to certify learned quantities.

pub mod augmented;
pub mod equations;
pub mod parameterization;
pub mod pbh;
pub mod placement;

pub use augmented::{build_augmented_aux, verify_riccati_correspondence, AugmentedAux, CorrespondenceReport};
pub use equations::{solve_care, solve_lyapunov, solve_sylvester_regulator, RiccatiSolution};
pub use parameterization::{compute_parameterization, ObserverParameterization};
pub use pbh::{pbh_check, rosenbrock_rank, PbhMode, PbhReport};
pub use placement::{char_poly, place_observer_gain};
