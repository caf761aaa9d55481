//! Executable checks of the divergence's properties: a seeded property
//! suite, the two discontinuity demonstrations, and distinguishers against
//! f-, Bregman and Jensen divergences.

mod demos;
mod distinguish;
mod suite;

pub use demos::{
    demo_first_variable_discontinuity, demo_second_variable_discontinuity, second_var_closed_form,
    second_var_sequence, FirstVarDemo, FirstVarRow, SecondVarDemo, SecondVarRow, FIRST_VAR_PROBE_EPS,
    FIRST_VAR_PROBE_LEVEL, SECOND_VAR_TOL,
};
pub use distinguish::{
    distinguish_from_bregman, distinguish_from_f_divergence, distinguish_from_jensen, BregmanReport,
    FDistinguishReport, FOutcome, FWitness, JensenReport, F_EQUALITY_TOL, F_SEARCH_BUDGET, F_WITNESS_GAP,
};
pub use suite::{format_report_table, run_property_suite, total_failures, PropertyReport, PROPERTIES};
