use thiserror::Error;

use crate::group::Element;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("elements {0:?} and {1:?} belong to different group families")]
    MixedVariants(Element, Element),
    #[error("element {0:?} does not belong to the group")]
    ForeignElement(Element),
    #[error("exponent overflow in {0}")]
    Overflow(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid Cayley table: {0}")]
    InvalidTable(String),
    #[error("unknown element name `{0}`")]
    UnknownElement(String),
    #[error("element {0} occurs twice in the ground set")]
    DuplicateElement(String),
    #[error("element {0} is not in the ground set")]
    NotInGround(String),
    #[error("sequences live over different ground sets ({0} vs {1} terms)")]
    GroundMismatch(usize, usize),
    #[error("sequence does not divide the other")]
    NotDividing,
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn budget(what: &'static str, needed: impl Into<u128>, limit: impl Into<u128>) -> Self {
        Error::BudgetExceeded {
            what,
            needed: needed.into(),
            limit: limit.into(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
