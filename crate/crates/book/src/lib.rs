//! Runs the guide's snippets as doctests. One module per chapter so a
//! failure names its chapter.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/distributions.md")]
pub mod distributions {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/estimators.md")]
pub mod estimators {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/robust.md")]
pub mod robust {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/erm.md")]
pub mod erm {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}
