//! Regulated (làdlàg) trajectories at desk scale: a finite path model with
//! independent spot values at jumps, constructive exhaustion of the jump set
//! by increasing time sequences, the induced integer-valued counting measure
//! with integration against it, seeded compound-Poisson generators, and a
//! Monte-Carlo harness verifying the Poisson and compound-Poisson laws of
//! jump functionals against closed forms.

pub mod borel;
pub mod error;
pub mod exhaust;
pub mod measure;
pub mod par;
pub mod path;
pub mod quad;
pub mod selftest;
pub mod sim;
pub mod verify;

pub use borel::{BorelSet, Interval};
pub use error::{Error, Result};
pub use exhaust::{
    check_disjoint_exhaustion, exhaust_global, exhaust_restricted, exhaust_restricted_filter_sort,
    exhaust_restricted_filter_sort_with_len, exhaust_restricted_with_len, remark_identity_at,
    SequenceKind, StopTime, StoppingSequence,
};
pub use measure::{
    counting_process, integrate, integrate_direct, jump_sum_process, measure, Integration,
    MeasureValue, ProductSet, Rectangle,
};
pub use path::{
    enumerate_finite_set, magnitude_band, time_window, CellIndex, JumpEvent, LayeredDecomposition,
    RegulatedPath, Side,
};
pub use sim::{
    generate_path, nu, simulate_compound_poisson, simulate_ladlag, JumpLaw, PathStream, SimConfig,
    ThetaLaw,
};
pub use verify::{
    restricted_expectation, verify_compound_mean, verify_poisson_law, GofReport, IncrementsCheck,
    Integrand, ReportJson, SimulationReport, Verdict,
};
