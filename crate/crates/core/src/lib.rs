//! Product-one sequences over finite groups and the infinite dihedral group,
//! and the factorization arithmetic of the monoids they form.

pub mod dihedral;
pub mod error;
pub mod group;
pub mod monoid;
pub mod product;
pub mod sequence;
pub mod verify;

pub use error::{Error, Result};
pub use group::{CayleyTable, Element, GroupKind, GroupSpec};
pub use monoid::{AtomInventory, AtomMode, Certificate, Monoid};
pub use product::{is_product_one, product_one_ordering, product_set_dp, product_set_perm, Budgets, ProductSet};
pub use sequence::{GroundSet, Sequence};
