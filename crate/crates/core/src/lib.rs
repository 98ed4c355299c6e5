//! Multivalued functions on finite sets, relational constraints, and the
//! Galois connections between classes of functions and sets of constraints.

pub mod cli;
pub mod constraint;
pub mod enumerate;
pub mod error;
pub mod galois;
pub mod multifunction;
pub mod universe;

pub use constraint::{Bounds, Constraint, ConstraintSet, ConstraintTable, Scheme};
pub use enumerate::Budget;
pub use error::{Error, Result};
pub use multifunction::{FunctionClass, FunctionKind, MultiFunction};
pub use universe::{Relation, Slot, Tuple, Universe, UniverseRef};
