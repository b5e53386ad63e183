//! Fixtures shared by the criterion benches.

use fmps_core::funcgrid::{discretize, DiscretizedState, FunctionSpec};
use fmps_core::mps::{from_state_vector, MatrixProductState};

pub fn gaussian_state(n: usize) -> DiscretizedState {
    let spec = FunctionSpec::gaussian(0.0, 1.0);
    discretize(&spec, &spec.default_domain(), n).expect("gaussian discretizes")
}

pub fn gaussian_mps(n: usize) -> MatrixProductState {
    from_state_vector(&gaussian_state(n)).expect("TT-SVD succeeds")
}
