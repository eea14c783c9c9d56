//! Source locations, used to map counterexample steps back to plan text.

use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based, inclusive source range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        debug_assert!((start_line, start_col) <= (end_line, end_col));
        SourceSpan {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn point(line: u32, col: u32) -> Self {
        SourceSpan::new(line, col, line, col)
    }

    pub fn cover(self, other: SourceSpan) -> SourceSpan {
        SourceSpan {
            start_line: self.start_line.min(other.start_line),
            start_col: if self.start_line < other.start_line {
                self.start_col
            } else if other.start_line < self.start_line {
                other.start_col
            } else {
                self.start_col.min(other.start_col)
            },
            end_line: self.end_line.max(other.end_line),
            end_col: if self.end_line > other.end_line {
                self.end_col
            } else if other.end_line > self.end_line {
                other.end_col
            } else {
                self.end_col.max(other.end_col)
            },
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start_line == self.end_line {
            write!(f, "{}:{}-{}", self.start_line, self.start_col, self.end_col)
        } else {
            write!(
                f,
                "{}:{}-{}:{}",
                self.start_line, self.start_col, self.end_line, self.end_col
            )
        }
    }
}
