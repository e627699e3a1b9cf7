//! Step-by-step verifiers for the weak-type sparse bounds, the auxiliary
//! propositions, and exploratory sweeps.

mod props;
mod search;
mod sweep;
mod theorem;
mod trace;

pub use props::{calibration, prop31_check, prop32_check, CalibratedReport, Calibration, CalibrationEntry};
pub use search::{extremal_search, write_trajectory_csv, Objective, SearchBestJson, SearchOutcome, TrajectoryRow};
pub use sweep::{log_sweep, power_sweep, write_sweep_csv, SweepRow, SWEEP_HEADER};
pub use theorem::{reduction_construct_eprime, thm_a_verify, thm_c_verify, verify_theorem, Branch, EPrime, TheoremInput, TheoremParams};
pub use trace::{Measures, PipelineTrace, Step, TraceSummary, TraceWitness};
