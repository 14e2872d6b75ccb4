//! Numerical laboratory for the square-root obstruction of a perturbed
//! radial Hamiltonian map on a ball.
//!
//! The map `Φ = φ_H ∘ φ_{εF}` on `B^{2N}(R)` has, for small `ε`, exactly one
//! primitive `2k`-cycle. If `Φ = ψ²` then `[x_i] ↦ [ψ(x_i)]` would be a free
//! involution on the set of `2k`-cycles, forcing an even count, so an odd
//! count certifies that no square root exists. The crate builds the map,
//! enumerates its cycles numerically, issues that certificate and checks the
//! structural properties the argument relies on.

pub mod construction;
pub mod dynamics;
pub mod maps;
pub mod obstruction;
pub mod params;
pub mod point;
pub mod verification;

pub use construction::{Construction, Cutoff, Perturbation, Profile, RadialProfile};
pub use dynamics::{
    cycle_space, enumerate_fixed_points, iterate, minimal_period, newton_fixed_point, CycleClass, CycleSpace,
    EnumerationOptions, FixedPointRecord, FixedPointSet, NewtonOutcome,
};
pub use maps::{MapError, MapHandle, SelfMap};
pub use obstruction::{gcd_certified, parity_certificate, Certificate, Verdict};
pub use params::{Params, ParamsError};
pub use point::{BallPoint, PolarLast};
pub use verification::{run_suite, CheckKind, CheckReport, Suite, SuiteOptions};
