//! Exact lower bounds on the effective conductivity of planar composites made
//! of two isotropic conductors `k1 <= k2` and an ideal conductor, together
//! with the wheel assemblages that attain them.
//!
//! The crate has three layers:
//!
//! - closed forms: [`bounds`] (conductivity and the dual resistivity
//!   problem) and [`elastic`] (plane bulk modulus with void or rigid phase);
//! - an independent reconstruction of the bound from translated energy
//!   wells, in [`translation`];
//! - constructions and checks: [`wheel`] builds the optimal assemblages,
//!   [`radial`] solves their homogenized axisymmetric problem exactly and
//!   [`verify`] embeds a rasterized wheel in a finite-volume grid.
//!
//! ```
//! use wheelbound::{lower_bound, ConductorSet, Fractions, Regime};
//!
//! let c = ConductorSet::new(1.0, 2.0)?;
//! let f = Fractions::new(0.14, 0.25)?;
//! let b = lower_bound(&c, &f);
//! assert_eq!(b.regime, Regime::Intermediate);
//! assert!((b.value - 39.0 / 7.0).abs() < 1e-12);
//! # Ok::<(), wheelbound::Error>(())
//! ```

pub mod bounds;
pub mod elastic;
mod error;
pub mod optimize;
pub mod phases;
pub mod radial;
pub mod raster;
pub mod translation;
pub mod verify;
pub mod wheel;

pub use bounds::{dual_resistivity_bound, lower_bound, optimal_fields, BoundResult, FieldSpec};
pub use error::{Error, Result};
pub use phases::{
    classify_regime, make_conductors, make_fractions, thresholds, ConductorSet, Fractions, Phase,
    Regime, ResistorSet,
};
pub use translation::maximize_over_t;
pub use wheel::{build_wheel, WheelKind, WheelSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/translation.md")]
    mod translation {}
    #[doc = include_str!("../../../book/src/wheels.md")]
    mod wheels {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/elasticity.md")]
    mod elasticity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
