//! Tube-log Riemann surfaces, their explicit uniformizers, folded
//! translation flows, and finite-depth hedgehogs carrying smooth combs.

pub mod comb;
pub mod error;
pub mod folding;
pub mod hedgehog;
pub mod hexfloat;
pub mod ledger;
pub mod logmag;
pub mod numeric;
pub mod surface;
pub mod uniformizer;

pub use error::{Error, Result};
pub use logmag::{LogMagnitude, Sign};
pub use uniformizer::{
    base_k, solve_lambda, Anchored, BranchState, NormalizedUniformizer, Offset, Preimage, ScaledDerivative,
};
pub use surface::{continue_norm_k, deck, follow, lift_base, translate, Continued, RemovedRegions, SheetAddress, SurfacePoint};
pub use ledger::{ParameterLedger, Provenance};
pub use logmag::TinyScale;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/combs.md")]
    mod combs {}
    #[doc = include_str!("../../../book/src/hedgehogs.md")]
    mod hedgehogs {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
