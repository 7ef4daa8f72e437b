//! Per-good grids `{k * e_g / n}` and the exhaustive allocations built on
//! them. Cells are indexed lexicographically with good 0 most significant,
//! and per-individual utility tables are precomputed once per grid.

use crate::economy::Economy;
use crate::error::{Error, Result};

/// Largest number of cells a single-bundle table may hold.
const TABLE_BUDGET: u128 = 20_000_000;

#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub n: usize,
    pub goods: usize,
    pub side: usize,
    pub cells: usize,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(n: usize, goods: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("grid resolution must be positive"));
        }
        let side = n + 1;
        let cells = (side as u128).pow(goods as u32);
        if cells > TABLE_BUDGET {
            return Err(Error::BudgetExceeded {
                size: cells,
                budget: TABLE_BUDGET,
            });
        }
        let mut strides = vec![1; goods];
        for g in (0..goods.saturating_sub(1)).rev() {
            strides[g] = strides[g + 1] * side;
        }
        Ok(Grid {
            n,
            goods,
            side,
            cells: cells as usize,
            strides,
        })
    }

    pub fn index(&self, k: &[usize]) -> usize {
        k.iter().zip(&self.strides).map(|(k, s)| k * s).sum()
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut k = vec![0; self.goods];
        for g in 0..self.goods {
            k[g] = idx / self.strides[g];
            idx %= self.strides[g];
        }
        k
    }

    pub fn bundle(&self, k: &[usize], endowment: &[f64]) -> Vec<f64> {
        k.iter()
            .zip(endowment)
            .map(|(k, e)| *k as f64 * e / self.n as f64)
            .collect()
    }

    /// The full cell `(n, ..., n)`, i.e. the whole endowment.
    pub fn full(&self) -> Vec<usize> {
        vec![self.n; self.goods]
    }

    /// Number of exhaustive allocations for `families` families.
    pub fn allocation_count(&self, families: usize) -> u128 {
        (self.side as u128)
            .checked_pow((self.goods * families.saturating_sub(1)) as u32)
            .unwrap_or(u128::MAX)
    }

    /// Cells `k <= bound` in lexicographic order.
    pub fn cells_below<'b>(&self, bound: &'b [usize]) -> CellsBelow<'b> {
        CellsBelow {
            bound,
            next: Some(vec![0; self.goods]),
        }
    }
}

pub(crate) struct CellsBelow<'a> {
    bound: &'a [usize],
    next: Option<Vec<usize>>,
}

impl Iterator for CellsBelow<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut k = current.clone();
        let mut g = k.len();
        loop {
            if g == 0 {
                break;
            }
            g -= 1;
            if k[g] < self.bound[g] {
                k[g] += 1;
                self.next = Some(k);
                break;
            }
            k[g] = 0;
        }
        Some(current)
    }
}

/// Utility of every individual (flat member order) at every grid cell.
pub(crate) struct UtilityTables {
    pub values: Vec<Vec<f64>>,
}

impl UtilityTables {
    pub fn new(econ: &Economy, grid: &Grid) -> Self {
        let bundles: Vec<Vec<f64>> = (0..grid.cells)
            .map(|c| grid.bundle(&grid.coords(c), &econ.endowment))
            .collect();
        let values = econ
            .members()
            .map(|(_, ind)| bundles.iter().map(|b| ind.utility.value(b)).collect())
            .collect();
        UtilityTables { values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trips() {
        let grid = Grid::new(4, 3).unwrap();
        for c in 0..grid.cells {
            assert_eq!(grid.index(&grid.coords(c)), c);
        }
    }

    #[test]
    fn cells_below_are_lexicographic() {
        let grid = Grid::new(3, 2).unwrap();
        let cells: Vec<_> = grid.cells_below(&[1, 2]).collect();
        assert_eq!(
            cells,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        let idx: Vec<_> = cells.iter().map(|k| grid.index(k)).collect();
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn oversized_table_is_rejected() {
        assert!(matches!(
            Grid::new(1000, 3),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
