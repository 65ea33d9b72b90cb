//! Discrete model of a finite atomless measure space.
//!
//! A [`Grid`] partitions `[0, total_measure]` into contiguous cells. Each cell
//! carries its measure and a quadrature node (the interval midpoint). Grids are
//! immutable; [`Grid::refine`] halves every cell and returns a [`Refinement`]
//! describing where each coarse cell went, so that functions and masks can be
//! transported deterministically.

use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least one cell")]
    NoCells,
    #[error("total measure must be positive and finite, got {0}")]
    BadTotal(f64),
    #[error("cell {index} has non-positive or non-finite measure {measure}")]
    BadCellMeasure { index: usize, measure: f64 },
    #[error("mask has {got} flags but the grid has {expected} cells")]
    MaskLength { expected: usize, got: usize },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("cannot split an empty mask")]
    EmptyMask,
}

/// One cell of a grid: the interval `[start, start + measure)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub start: f64,
    pub measure: f64,
    pub representative: f64,
}

impl Cell {
    fn new(start: f64, measure: f64) -> Self {
        Cell {
            start,
            measure,
            representative: start + 0.5 * measure,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.measure
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    cells: Vec<Cell>,
    total_measure: f64,
}

impl Grid {
    /// `n` cells of measure `total / n` with midpoint representatives.
    pub fn uniform(n: usize, total: f64) -> Result<Grid, GridError> {
        if n == 0 {
            return Err(GridError::NoCells);
        }
        if !(total > 0.0 && total.is_finite()) {
            return Err(GridError::BadTotal(total));
        }
        let width = total / n as f64;
        let cells = (0..n)
            .map(|i| Cell::new(total * i as f64 / n as f64, width))
            .collect();
        Ok(Grid {
            cells,
            total_measure: total,
        })
    }

    /// Contiguous cells starting at 0 with the given measures.
    pub fn from_measures(measures: &[f64]) -> Result<Grid, GridError> {
        if measures.is_empty() {
            return Err(GridError::NoCells);
        }
        let mut cells = Vec::with_capacity(measures.len());
        let mut start = 0.0;
        for (index, &measure) in measures.iter().enumerate() {
            if !(measure > 0.0 && measure.is_finite()) {
                return Err(GridError::BadCellMeasure { index, measure });
            }
            cells.push(Cell::new(start, measure));
            start += measure;
        }
        Ok(Grid {
            cells,
            total_measure: start,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn weights(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.cells.iter().map(|c| c.measure)
    }

    pub fn representatives(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.cells.iter().map(|c| c.representative)
    }

    /// Halve every cell. Child `2i` is the left half of cell `i`, child
    /// `2i + 1` the right half. The total measure is copied, not re-summed.
    pub fn refine(self: &Arc<Self>) -> Refinement {
        let mut cells = Vec::with_capacity(2 * self.cells.len());
        for c in &self.cells {
            let half = 0.5 * c.measure;
            cells.push(Cell::new(c.start, half));
            cells.push(Cell::new(c.start + half, half));
        }
        Refinement {
            coarse: Arc::clone(self),
            fine: Arc::new(Grid {
                cells,
                total_measure: self.total_measure,
            }),
        }
    }

    /// Refine `times` times in a row.
    pub fn refine_times(self: &Arc<Self>, times: usize) -> Arc<Grid> {
        let mut g = Arc::clone(self);
        for _ in 0..times {
            g = g.refine().fine;
        }
        g
    }

    /// Two handles denote the same grid if they share storage or are
    /// structurally equal.
    pub fn same(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}

/// Result of [`Grid::refine`]: the coarse grid, the fine grid, and the fixed
/// index map `i -> (2i, 2i + 1)`.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub coarse: Arc<Grid>,
    pub fine: Arc<Grid>,
}

impl Refinement {
    pub fn children(&self, coarse_index: usize) -> [usize; 2] {
        [2 * coarse_index, 2 * coarse_index + 1]
    }

    pub fn parent(&self, fine_index: usize) -> usize {
        fine_index / 2
    }
}

/// A measurable subset of the grid, given as a union of whole cells.
#[derive(Debug, Clone)]
pub struct SubsetMask {
    grid: Arc<Grid>,
    members: Vec<bool>,
}

impl PartialEq for SubsetMask {
    fn eq(&self, other: &Self) -> bool {
        Grid::same(&self.grid, &other.grid) && self.members == other.members
    }
}

impl SubsetMask {
    pub fn new(grid: Arc<Grid>, members: Vec<bool>) -> Result<Self, GridError> {
        if members.len() != grid.len() {
            return Err(GridError::MaskLength {
                expected: grid.len(),
                got: members.len(),
            });
        }
        Ok(SubsetMask { grid, members })
    }

    pub fn full(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        SubsetMask {
            grid,
            members: vec![true; n],
        }
    }

    pub fn empty(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        SubsetMask {
            grid,
            members: vec![false; n],
        }
    }

    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(usize, &Cell) -> bool) -> Self {
        let members = grid.cells().iter().enumerate().map(|(i, c)| f(i, c)).collect();
        SubsetMask { grid, members }
    }

    /// Cells whose representative lies in `[lo, hi)`.
    pub fn interval(grid: Arc<Grid>, lo: f64, hi: f64) -> Self {
        Self::from_fn(grid, |_, c| c.representative >= lo && c.representative < hi)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn member_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn measure(&self) -> f64 {
        self.member_indices().map(|i| self.grid.cell(i).measure).sum()
    }

    pub fn complement(&self) -> Self {
        SubsetMask {
            grid: Arc::clone(&self.grid),
            members: self.members.iter().map(|&m| !m).collect(),
        }
    }

    pub fn intersect(&self, other: &SubsetMask) -> Result<Self, GridError> {
        self.check_grid(other)?;
        Ok(SubsetMask {
            grid: Arc::clone(&self.grid),
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(&a, &b)| a && b)
                .collect(),
        })
    }

    pub fn union(&self, other: &SubsetMask) -> Result<Self, GridError> {
        self.check_grid(other)?;
        Ok(SubsetMask {
            grid: Arc::clone(&self.grid),
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(&a, &b)| a || b)
                .collect(),
        })
    }

    pub fn is_disjoint(&self, other: &SubsetMask) -> bool {
        self.members.iter().zip(&other.members).all(|(&a, &b)| !(a && b))
    }

    fn check_grid(&self, other: &SubsetMask) -> Result<(), GridError> {
        if Grid::same(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(GridError::GridMismatch)
        }
    }

    /// Image of this mask on the refined grid: both children inherit the flag.
    pub fn transport(&self, r: &Refinement) -> Result<Self, GridError> {
        if !Grid::same(&self.grid, &r.coarse) {
            return Err(GridError::GridMismatch);
        }
        Ok(SubsetMask {
            grid: Arc::clone(&r.fine),
            members: self.members.iter().flat_map(|&m| [m, m]).collect(),
        })
    }

    /// Split into two disjoint masks of equal measure whose union is `self`.
    ///
    /// Tries a prefix split of the member cells first. If the member count is
    /// odd or no prefix hits half the measure, the grid is refined once and
    /// each member cell is split between the halves (left child / right child),
    /// which is exact. The returned masks then live on the refined grid.
    pub fn equal_split(&self) -> Result<(SubsetMask, SubsetMask), GridError> {
        let members: Vec<usize> = self.member_indices().collect();
        if members.is_empty() {
            return Err(GridError::EmptyMask);
        }
        let total = self.measure();
        if members.len().is_multiple_of(2) {
            if let Some(split) = self.prefix_split(&members, total) {
                return Ok(split);
            }
        }
        let r = self.grid.refine();
        let fine = self.transport(&r)?;
        let fine_members: Vec<usize> = fine.member_indices().collect();
        if let Some(split) = fine.prefix_split(&fine_members, total) {
            return Ok(split);
        }
        let mut left = vec![false; r.fine.len()];
        let mut right = vec![false; r.fine.len()];
        for &i in &members {
            let [a, b] = r.children(i);
            left[a] = true;
            right[b] = true;
        }
        Ok((
            SubsetMask {
                grid: Arc::clone(&r.fine),
                members: left,
            },
            SubsetMask {
                grid: r.fine,
                members: right,
            },
        ))
    }

    fn prefix_split(&self, members: &[usize], total: f64) -> Option<(SubsetMask, SubsetMask)> {
        let half = 0.5 * total;
        let tol = 1e-12 * total;
        let mut acc = 0.0;
        for (k, &i) in members.iter().enumerate() {
            acc += self.grid.cell(i).measure;
            if (acc - half).abs() <= tol {
                let mut left = vec![false; self.grid.len()];
                let mut right = vec![false; self.grid.len()];
                for &j in &members[..=k] {
                    left[j] = true;
                }
                for &j in &members[k + 1..] {
                    right[j] = true;
                }
                return Some((
                    SubsetMask {
                        grid: Arc::clone(&self.grid),
                        members: left,
                    },
                    SubsetMask {
                        grid: Arc::clone(&self.grid),
                        members: right,
                    },
                ));
            }
            if acc > half + tol {
                return None;
            }
        }
        None
    }
}
