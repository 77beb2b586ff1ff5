//! The comb: teeth `Gamma(e_0, ..., e_n)`, their limit `Phi`, and the
//! stage-by-stage parameter search that keeps it smooth.

pub mod construct;
pub mod curve;
pub mod digits;
pub mod regularity;

pub use curve::{cr_distance, phi, sample_tooth, CombAtlas, CombCurve, CombPointKey, CurvePoint, PhiValue, Strip};
pub use digits::{all_prefixes, theta_of, x_of, Prefix};
pub use construct::{choose_stage, construct, AlphaSchedule, Construction, ConstructionConfig, PredicateRecord, StageRecord};
pub use regularity::{verify_holder, verify_lipschitz_inverse, verify_truncation, CheckStatus, HolderReport, LipschitzReport, PairReport};
