//! Analogy enumeration for 2×2 and 3×3 matrices.
//!
//! Every analogy is read off a *window*: a permutation of the matrix cells
//! laid out as a square with the blank in the bottom-right corner. The
//! identity window gives the simple row and column analogies (group S).
//! Windows with swapped columns (H), swapped rows (V) or rows taken along the
//! wrapped diagonals of the tiled matrix (R) give the expanded-matrix
//! analogies; anything already produced by an earlier group is dropped, so
//! the groups partition the list.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::transforms::{Arity, UnknownName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellRef {
    Entry { row: usize, col: usize },
    Blank,
}

impl CellRef {
    pub const fn at(row: usize, col: usize) -> Self {
        CellRef::Entry { row, col }
    }

    /// Letter in row-major order (`A` is the top-left cell).
    pub fn letter(self, dim: usize) -> char {
        match self {
            CellRef::Entry { row, col } => (b'A' + (row * dim + col) as u8) as char,
            CellRef::Blank => '?',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnalogyGroup {
    S,
    H,
    V,
    R,
}

impl AnalogyGroup {
    pub const ALL: [AnalogyGroup; 4] = [AnalogyGroup::S, AnalogyGroup::H, AnalogyGroup::V, AnalogyGroup::R];

    pub fn name(self) -> &'static str {
        match self {
            AnalogyGroup::S => "S",
            AnalogyGroup::H => "H",
            AnalogyGroup::V => "V",
            AnalogyGroup::R => "R",
        }
    }
}

impl fmt::Display for AnalogyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnalogyGroup {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AnalogyGroup::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Pair,
    Trio,
}

impl Shape {
    pub fn accepts(self, arity: Arity) -> bool {
        matches!(
            (self, arity),
            (Shape::Pair, Arity::Unary) | (Shape::Trio, Arity::Binary | Arity::Hybrid)
        )
    }
}

/// `source :: target`, where the last target cell is the one to predict:
/// the blank, or a known cell acting as a forced option.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Analogy {
    pub shape: Shape,
    pub source: Vec<CellRef>,
    pub target: Vec<CellRef>,
    pub group: AnalogyGroup,
    pub label: String,
}

impl Analogy {
    fn new(dim: usize, source: Vec<CellRef>, target: Vec<CellRef>, group: AnalogyGroup) -> Self {
        let shape = if source.len() == 2 { Shape::Pair } else { Shape::Trio };
        let label = colon_label(dim, &source, &target);
        Analogy {
            shape,
            source,
            target,
            group,
            label,
        }
    }

    /// The cell whose image is predicted.
    pub fn answer(&self) -> CellRef {
        *self.target.last().expect("nonempty target")
    }

    fn key(&self) -> (Vec<CellRef>, Vec<CellRef>) {
        (self.source.clone(), self.target.clone())
    }
}

fn colon_label(dim: usize, source: &[CellRef], target: &[CellRef]) -> String {
    let side = |cells: &[CellRef]| {
        cells
            .iter()
            .map(|c| c.letter(dim).to_string())
            .collect::<Vec<_>>()
            .join(":")
    };
    format!("{}::{}", side(source), side(target))
}

/// An analogy of analogies: all but the last subproblem predict a known
/// cell; the last predicts the blank.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecursiveAnalogy {
    pub subproblems: Vec<Analogy>,
    pub group: AnalogyGroup,
    pub label: String,
}

impl RecursiveAnalogy {
    fn new(subproblems: Vec<Analogy>, group: AnalogyGroup) -> Self {
        let label = subproblems
            .iter()
            .map(|a| a.label.as_str())
            .collect::<Vec<_>>()
            .join(":::");
        RecursiveAnalogy {
            subproblems,
            group,
            label,
        }
    }

    pub fn n(&self) -> usize {
        self.subproblems.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AnyAnalogy {
    Simple(Analogy),
    Recursive(RecursiveAnalogy),
}

impl AnyAnalogy {
    pub fn label(&self) -> &str {
        match self {
            AnyAnalogy::Simple(a) => &a.label,
            AnyAnalogy::Recursive(r) => &r.label,
        }
    }

    pub fn group(&self) -> AnalogyGroup {
        match self {
            AnyAnalogy::Simple(a) => a.group,
            AnyAnalogy::Recursive(r) => r.group,
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            AnyAnalogy::Simple(a) => a.shape,
            AnyAnalogy::Recursive(r) => r.subproblems[0].shape,
        }
    }

    fn key(&self) -> Vec<(Vec<CellRef>, Vec<CellRef>)> {
        match self {
            AnyAnalogy::Simple(a) => vec![a.key()],
            AnyAnalogy::Recursive(r) => r.subproblems.iter().map(Analogy::key).collect(),
        }
    }

    fn with_group(mut self, group: AnalogyGroup) -> Self {
        match &mut self {
            AnyAnalogy::Simple(a) => a.group = group,
            AnyAnalogy::Recursive(r) => {
                r.group = group;
                for s in &mut r.subproblems {
                    s.group = group;
                }
            }
        }
        self
    }
}

/// A square arrangement of matrix cells with the blank bottom-right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub cells: Vec<Vec<CellRef>>,
}

impl Window {
    /// Builds a window from letters (`'?'` for the blank), row by row.
    pub fn from_letters(rows: &[&str]) -> Self {
        let dim = rows.len();
        let cells = rows
            .iter()
            .map(|row| {
                row.chars()
                    .map(|ch| match ch {
                        '?' => CellRef::Blank,
                        _ => {
                            let i = (ch as u8 - b'A') as usize;
                            CellRef::at(i / dim, i % dim)
                        }
                    })
                    .collect()
            })
            .collect();
        Window { cells }
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    fn at(&self, r: usize, c: usize) -> CellRef {
        self.cells[r][c]
    }
}

/// Windows behind each group.
pub fn windows(dim: usize, group: AnalogyGroup) -> Vec<Window> {
    let w = Window::from_letters;
    match (dim, group) {
        (2, AnalogyGroup::S) => vec![w(&["AB", "C?"])],
        (2, AnalogyGroup::H) => vec![w(&["BA", "C?"])],
        (2, AnalogyGroup::V) => vec![w(&["CB", "A?"])],
        (2, AnalogyGroup::R) => vec![],
        (_, AnalogyGroup::S) => vec![w(&["ABC", "DEF", "GH?"])],
        (_, AnalogyGroup::H) => vec![w(&["BAC", "EDF", "HG?"])],
        (_, AnalogyGroup::V) => vec![w(&["DEF", "ABC", "GH?"])],
        (_, AnalogyGroup::R) => vec![w(&["BFG", "CDH", "AE?"]), w(&["AFH", "CEG", "BD?"])],
    }
}

/// Simple and recursive analogies of one window, in a fixed order: pair
/// analogies (sub-grids nearest the blank first, row-wise before
/// column-wise), trio analogies, recursive trios, recursive pairs.
pub fn window_analogies(window: &Window, group: AnalogyGroup, dim: usize) -> Vec<AnyAnalogy> {
    let n = window.dim();
    let at = |r, c| window.at(r, c);
    let simple = |src: Vec<CellRef>, tgt: Vec<CellRef>| Analogy::new(dim, src, tgt, group);
    let mut out = Vec::new();
    if n == 2 {
        out.push(AnyAnalogy::Simple(simple(vec![at(0, 0), at(0, 1)], vec![at(1, 0), at(1, 1)])));
        out.push(AnyAnalogy::Simple(simple(vec![at(0, 0), at(1, 0)], vec![at(0, 1), at(1, 1)])));
        return out;
    }

    let subgrids = [(1, 1), (0, 1), (1, 0), (0, 0)];
    let row_pair = |r: usize, c: usize| simple(vec![at(r, c), at(r, 2)], vec![at(2, c), at(2, 2)]);
    let col_pair = |r: usize, c: usize| simple(vec![at(r, c), at(2, c)], vec![at(r, 2), at(2, 2)]);
    for (r, c) in subgrids {
        out.push(AnyAnalogy::Simple(row_pair(r, c)));
        out.push(AnyAnalogy::Simple(col_pair(r, c)));
    }

    let row = |r: usize| (0..3).map(|c| at(r, c)).collect::<Vec<_>>();
    let col = |c: usize| (0..3).map(|r| at(r, c)).collect::<Vec<_>>();
    for r in [0, 1] {
        out.push(AnyAnalogy::Simple(simple(row(r), row(2))));
    }
    for c in [0, 1] {
        out.push(AnyAnalogy::Simple(simple(col(c), col(2))));
    }

    out.push(AnyAnalogy::Recursive(RecursiveAnalogy::new(
        vec![simple(row(0), row(1)), simple(row(1), row(2))],
        group,
    )));
    out.push(AnyAnalogy::Recursive(RecursiveAnalogy::new(
        vec![simple(col(0), col(1)), simple(col(1), col(2))],
        group,
    )));

    for (r, c) in subgrids {
        let first = simple(vec![at(0, c), at(0, 2)], vec![at(1, c), at(1, 2)]);
        out.push(AnyAnalogy::Recursive(RecursiveAnalogy::new(vec![first, row_pair(r, c)], group)));
        let first = simple(vec![at(r, 0), at(2, 0)], vec![at(r, 1), at(2, 1)]);
        out.push(AnyAnalogy::Recursive(RecursiveAnalogy::new(vec![first, col_pair(r, c)], group)));
    }
    out
}

/// Every group's analogies, each group deduplicated against the earlier
/// ones in S, H, V, R order.
fn all_groups(dim: usize) -> Vec<AnyAnalogy> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for group in AnalogyGroup::ALL {
        for w in windows(dim, group) {
            for a in window_analogies(&w, group, dim) {
                if seen.insert(a.key()) {
                    out.push(a.with_group(group));
                }
            }
        }
    }
    out
}

/// Analogies of the requested groups, in group order S, H, V, R.
pub fn enumerate_analogies(dim: usize, groups: &[AnalogyGroup]) -> Vec<AnyAnalogy> {
    all_groups(dim)
        .into_iter()
        .filter(|a| groups.contains(&a.group()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    Horizontal,
    Vertical,
    Diagonal,
}

/// Expanded-matrix analogies not already produced by the simple set.
pub fn expand_matrix(dim: usize, scheme: Expansion) -> Vec<AnyAnalogy> {
    let group = match scheme {
        Expansion::Horizontal => AnalogyGroup::H,
        Expansion::Vertical => AnalogyGroup::V,
        Expansion::Diagonal => AnalogyGroup::R,
    };
    enumerate_analogies(dim, &[group])
}
