use thiserror::Error;

use crate::universe::Element;

/// Errors raised by the automaton machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NucaError {
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),

    #[error("element {element} does not belong to universe {universe}")]
    ForeignElement { element: String, universe: String },

    #[error("universe {0} is infinite")]
    InfiniteUniverse(String),

    #[error("alphabet size {0} is not supported (expected 1..=255)")]
    InvalidAlphabet(usize),

    #[error("letter {letter} is out of range for an alphabet of size {size}")]
    LetterOutOfRange { letter: u32, size: u32 },

    #[error("memory does not contain the identity")]
    IdentityNotInMemory,

    #[error("memory lists cell {0} twice")]
    DuplicateMemoryCell(Element),

    #[error("memory is not contained in the target memory: missing {0}")]
    MemoryNotContained(Element),

    #[error("rule table has length {got}, expected {expected}")]
    TableLength { got: usize, expected: usize },

    #[error("rules disagree on {0}")]
    Mismatch(String),

    #[error("pattern is missing cells {}", fmt_cells(.0))]
    MissingCells(Vec<Element>),

    #[error("no rule assigned to cell {0}")]
    MissingRule(Element),

    #[error("precondition violated at cell {cell}: {reason}")]
    Precondition { cell: Element, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("enumeration needs {needed} entries, budget is {budget}")]
    BudgetExceeded { needed: String, budget: u64 },

    #[error("uniformly bounded singularity search exhausted at radius {0}")]
    UbsExhausted(usize),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
}

fn fmt_cells(cells: &[Element]) -> String {
    let shown: Vec<String> = cells.iter().take(8).map(|c| c.to_string()).collect();
    if cells.len() > 8 {
        format!("{} ... ({} total)", shown.join(" "), cells.len())
    } else {
        shown.join(" ")
    }
}

pub type Result<T, E = NucaError> = std::result::Result<T, E>;

impl NucaError {
    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        NucaError::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}
