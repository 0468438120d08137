//! Representative families over uniform matroids, computed through randomized
//! separators with a size/time tradeoff parameter `c`, and the solvers that
//! use them.
//!
//! ```
//! use repfam::{compute_representative, verify_representation, RepConfig, RepMode, Universe, WeightedFamily};
//!
//! let u = Universe::new(5);
//! let members = vec![u.set([0, 1])?, u.set([1, 4])?, u.set([1, 3])?, u.set([0, 2])?];
//! let family = WeightedFamily::unweighted(u, 2, members)?;
//! let cfg = RepConfig::default().with_skip_threshold(Some(0));
//! let rep = compute_representative(u, 4, &family, RepMode::Unweighted, &cfg)?;
//! assert!(verify_representation(&family, &rep, 4, RepMode::Unweighted)?.holds());
//! # Ok::<(), repfam::Error>(())
//! ```

pub mod error;
pub mod graph;
pub mod io;
pub mod kpath;
pub mod ktree;
pub mod pcover;
pub mod repfam;
pub mod separator;
pub mod sets;

pub use error::{Error, Result};
pub use repfam::{compute_representative, compute_representative_with, RepConfig, Representer, Strategy};
pub use separator::{Separator, SeparatorParams};
pub use sets::{enumerate_subsets, verify_representation, ElementSet, RepMode, Universe, Verdict, WeightedFamily};
