//! Finite sums of exponential functions `S(k) = sum_j C_j T_j^k`.
//!
//! The crate covers canonical sums and their derivatives, pair functions and
//! their characteristic points, synchronization of pairs at a common point,
//! root isolation with extremum and inflection counting, the IRR equation,
//! and an empirical checker for the published root and extremum bounds.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the `F64`
//! and `F32` aliases below name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod claims;
pub mod expsum;
pub mod gen;
pub mod irr;
pub mod pairfn;
pub mod roots;
pub mod scalar;
pub mod sync;

pub use claims::{check_instance, claim_check, Claim, ClaimConfig, ClaimReport};
pub use expsum::{
    collapse_log_sum, collapse_shifts, merge_terms, CoreError, ExpSum, ExpTerm, ScaledValue,
    ShiftedTerm,
};
pub use gen::GeneratorConfig;
pub use irr::{
    irr_evaluate, irr_solve, schedule_to_expsum, sign_sequence, taylor_coefficients, CashFlow,
    CashFlowSchedule, IrrError, IrrSolution, MultiplicityNote, SignSequence,
};
pub use pairfn::{CharacteristicPoints, PairError, PairFunction, PairKind};
pub use roots::{
    analyze, default_window, find_roots, intersections, isolate_roots, polynomial_lift,
    series_scan, series_scan_from, sign_change_bound, solve_level, Asymptote, Crossing,
    ExtremumKind, Intersections, Root, RootError, RootReport, SeriesScan,
};
pub use scalar::Scalar;
pub use sync::{
    add_strong_terms, pick_sync_point, proportional_split, split_shared_mi, sync_at_point,
    AdjustSide, PointKind, ResidualSide, SplitResult, StrongShare, SyncError, SyncResult,
};

pub type ExpTermF64 = ExpTerm<f64>;
pub type ExpSumF64 = ExpSum<f64>;
pub type PairFunctionF64 = PairFunction<f64>;
pub type SyncResultF64 = SyncResult<f64>;
pub type SplitResultF64 = SplitResult<f64>;
pub type RootReportF64 = RootReport<f64>;
pub type CashFlowScheduleF64 = CashFlowSchedule<f64>;
pub type IrrSolutionF64 = IrrSolution<f64>;
pub type ClaimReportF64 = ClaimReport<f64>;

pub type ExpTermF32 = ExpTerm<f32>;
pub type ExpSumF32 = ExpSum<f32>;
pub type PairFunctionF32 = PairFunction<f32>;
