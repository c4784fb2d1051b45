use thiserror::Error;

use crate::analogies::CellRef;
use crate::bitmap::BinaryImage;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("a {dim}x{dim} matrix needs {expected} cells, got {got}")]
    CellCountMismatch {
        dim: usize,
        expected: usize,
        got: usize,
    },
    #[error("need at least 2 options, got {0}")]
    TooFewOptions(usize),
    #[error("answer {answer} out of range for {options} options")]
    AnswerOutOfRange { answer: usize, options: usize },
}

/// A matrix with its bottom-right entry missing, plus answer options.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub id: String,
    pub dim: usize,
    /// Row-major, blank omitted.
    cells: Vec<BinaryImage>,
    pub options: Vec<BinaryImage>,
    pub answer: Option<usize>,
}

impl Problem {
    pub fn new(
        id: impl Into<String>,
        dim: usize,
        cells: Vec<BinaryImage>,
        options: Vec<BinaryImage>,
        answer: Option<usize>,
    ) -> Result<Self, ProblemError> {
        if dim != 2 && dim != 3 {
            return Err(ProblemError::BadDimension(dim));
        }
        if cells.len() != dim * dim - 1 {
            return Err(ProblemError::CellCountMismatch {
                dim,
                expected: dim * dim - 1,
                got: cells.len(),
            });
        }
        if options.len() < 2 {
            return Err(ProblemError::TooFewOptions(options.len()));
        }
        if let Some(a) = answer {
            if a >= options.len() {
                return Err(ProblemError::AnswerOutOfRange {
                    answer: a,
                    options: options.len(),
                });
            }
        }
        Ok(Problem {
            id: id.into(),
            dim,
            cells,
            options,
            answer,
        })
    }

    pub fn cells(&self) -> &[BinaryImage] {
        &self.cells
    }

    /// `None` for the blank and for out-of-range coordinates.
    pub fn cell(&self, row: usize, col: usize) -> Option<&BinaryImage> {
        if row >= self.dim || col >= self.dim {
            return None;
        }
        self.cells.get(row * self.dim + col)
    }

    pub fn image(&self, cell: CellRef) -> Option<&BinaryImage> {
        match cell {
            CellRef::Entry { row, col } => self.cell(row, col),
            CellRef::Blank => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blank(n: usize) -> Vec<BinaryImage> {
        vec![BinaryImage::new(4, 4); n]
    }

    #[test]
    fn shape_checks() {
        assert!(Problem::new("p", 2, blank(3), blank(6), Some(5)).is_ok());
        assert_eq!(
            Problem::new("p", 2, blank(8), blank(6), None),
            Err(ProblemError::CellCountMismatch { dim: 2, expected: 3, got: 8 })
        );
        assert!(matches!(Problem::new("p", 3, blank(8), blank(1), None), Err(ProblemError::TooFewOptions(1))));
        assert!(matches!(Problem::new("p", 3, blank(8), blank(8), Some(8)), Err(ProblemError::AnswerOutOfRange { .. })));
        assert_eq!(Problem::new("p", 4, blank(15), blank(8), None), Err(ProblemError::BadDimension(4)));
    }

    #[test]
    fn blank_has_no_image() {
        let p = Problem::new("p", 3, blank(8), blank(8), None).unwrap();
        assert!(p.cell(2, 2).is_none());
        assert!(p.image(CellRef::Blank).is_none());
        assert!(p.cell(2, 1).is_some());
    }
}
