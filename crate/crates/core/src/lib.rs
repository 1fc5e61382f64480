#![doc = include_str!("../../../book/src/introduction.md")]

pub mod calabi;
pub mod causality;
pub mod error;
pub mod geometry;
pub mod holonomy;
pub mod lorentz;
pub mod scalar;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/frames.md")]
    mod frames {}
    #[doc = include_str!("../../../book/src/holonomy.md")]
    mod holonomy {}
    #[doc = include_str!("../../../book/src/calabi.md")]
    mod calabi {}
    #[doc = include_str!("../../../book/src/causality.md")]
    mod causality {}
}
