//! Folding translation flows through the uniformizers: exact time sets,
//! composed maps and the resulting semiflows.

pub mod flow;
pub mod ladder;
pub mod time;

pub use flow::{periodic_orbit_set, semiflow_apply};
pub use ladder::{AxisChain, ComposedMap, LadderPoint};
pub use time::{RationalTime, TimeSetDescriptor};
