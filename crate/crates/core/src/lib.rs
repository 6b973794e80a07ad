//! Scale, asymptotic classes and scale-multiplicative semigroups for groups acting on regular
//! trees with prescribed local actions.

pub mod cli;
pub mod directions;
pub mod element;
pub mod error;
pub mod perm;
pub mod samples;
pub mod scale;
pub mod semigroup;
pub mod tree;

pub use element::{Ambient, Elem, Portrait};
pub use error::{Error, Result};
pub use perm::{Perm, PermGroup};
pub use tree::{CompleteSubtree, EdgeRef, Vertex};
