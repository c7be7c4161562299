//! Multiscale structure scores for real-valued space-time grids.
//!
//! A grid is normalized to [-1, 1], then repeatedly block-averaged with a
//! fixed coarsening filter. Every step keeps the grid dimensions: each block
//! mean is written back over the cells it came from, so level k is piecewise
//! constant on blocks of roughly `lambda^k` cells per axis. Edge blocks that
//! do not divide evenly average over their true extent, which keeps each
//! step a projection.
//!
//! The score of step k is the absolute difference of mean squares between
//! levels k and k+1, halved. The total score sums all steps except the
//! finest one (step 0), which is dominated by single-cell noise and is
//! reported separately. Constant grids score zero at every step.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid must have at least one row and one column")]
    Empty,
    #[error("grid contains a non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("data length {len} does not match {rows}x{cols}")]
    ShapeMismatch {
        len: usize,
        rows: usize,
        cols: usize,
    },
    #[error("coarsening filter must have lambda >= 1 on both axes and exceed 1 on at least one")]
    InvalidFilter,
    #[error("block extents must be at least 1")]
    InvalidBlock,
    #[error("partial score {k} needs level {} but the pyramid tops out at {k_max}", k + 1)]
    LevelOutOfRange { k: usize, k_max: usize },
    #[error("pyramid with {levels} levels has no coarse steps beyond the finest")]
    DegeneratePyramid { levels: usize },
}

/// Real-valued matrix with space along rows and time along columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SpaceTimeGrid {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, GridError> {
        if rows == 0 || cols == 0 {
            return Err(GridError::Empty);
        }
        if data.len() != rows * cols {
            return Err(GridError::ShapeMismatch {
                len: data.len(),
                rows,
                cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, GridError> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    /// Row-major cell values.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    fn check_finite(&self) -> Result<(), GridError> {
        for (idx, v) in self.data.iter().enumerate() {
            if !v.is_finite() {
                return Err(GridError::NonFinite {
                    row: idx / self.cols,
                    col: idx % self.cols,
                });
            }
        }
        Ok(())
    }
}

/// Per-axis coarsening factors. Block extents at step k are
/// `min(lambda_x^k, rows)` by `min(lambda_t^k, cols)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Filter {
    pub lambda_x: usize,
    pub lambda_t: usize,
}

impl Filter {
    pub fn new(lambda_x: usize, lambda_t: usize) -> Result<Self, GridError> {
        if lambda_x == 0 || lambda_t == 0 || (lambda_x == 1 && lambda_t == 1) {
            return Err(GridError::InvalidFilter);
        }
        Ok(Self { lambda_x, lambda_t })
    }

    /// 2x2 coarsening, the default used throughout.
    pub fn square() -> Self {
        Self {
            lambda_x: 2,
            lambda_t: 2,
        }
    }

    /// Space-only coarsening (columns untouched).
    pub fn spatial(lambda_x: usize) -> Result<Self, GridError> {
        if lambda_x < 2 {
            return Err(GridError::InvalidFilter);
        }
        Ok(Self {
            lambda_x,
            lambda_t: 1,
        })
    }

    /// Time-only coarsening (rows untouched).
    pub fn temporal(lambda_t: usize) -> Result<Self, GridError> {
        if lambda_t < 2 {
            return Err(GridError::InvalidFilter);
        }
        Ok(Self {
            lambda_x: 1,
            lambda_t,
        })
    }
}

impl Default for Filter {
    fn default() -> Self {
        Self::square()
    }
}

/// Stack of successively coarser views of one grid. `levels[0]` is the
/// input; the last level is constant along every coarsened axis.
#[derive(Debug, Clone)]
pub struct Pyramid {
    filter: Filter,
    levels: Vec<SpaceTimeGrid>,
}

impl Pyramid {
    pub fn filter(&self) -> Filter {
        self.filter
    }

    pub fn levels(&self) -> &[SpaceTimeGrid] {
        &self.levels
    }

    /// Index of the coarsest level.
    pub fn k_max(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Score breakdown for one grid. `steps[k]` is the partial score of
/// coarsening step k; `total` sums `steps[1..]`, leaving out the finest step.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityReport {
    pub steps: Vec<f64>,
    pub total: f64,
}

/// Affine rescale of the grid onto [-1, 1]. A constant grid maps to all
/// zeros. Values must be finite.
pub fn normalize_grid(grid: &SpaceTimeGrid) -> Result<SpaceTimeGrid, GridError> {
    grid.check_finite()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in &grid.data {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let data = if lo == hi {
        vec![0.0; grid.data.len()]
    } else {
        let span = hi - lo;
        grid.data
            .iter()
            .map(|&v| 2.0 * (v - lo) / span - 1.0)
            .collect()
    };
    Ok(SpaceTimeGrid {
        rows: grid.rows,
        cols: grid.cols,
        data,
    })
}

/// One block-averaging pass. Blocks are `block_x` rows by `block_t` columns,
/// anchored at the origin; edge blocks shrink to whatever remains. The mean
/// of each block is written back over all of its cells, so the output has
/// the same shape as the input.
pub fn coarse_grain_step(
    grid: &SpaceTimeGrid,
    block_x: usize,
    block_t: usize,
) -> Result<SpaceTimeGrid, GridError> {
    if block_x == 0 || block_t == 0 {
        return Err(GridError::InvalidBlock);
    }
    let (rows, cols) = (grid.rows, grid.cols);
    let mut out = vec![0.0; rows * cols];
    let mut bi = 0;
    while bi < rows {
        let ext_x = block_x.min(rows - bi);
        let mut bj = 0;
        while bj < cols {
            let ext_t = block_t.min(cols - bj);
            let mut acc = 0.0;
            for i in bi..bi + ext_x {
                for j in bj..bj + ext_t {
                    acc += grid.data[i * cols + j];
                }
            }
            let mean = acc / (ext_x * ext_t) as f64;
            for i in bi..bi + ext_x {
                for j in bj..bj + ext_t {
                    out[i * cols + j] = mean;
                }
            }
            bj += ext_t;
        }
        bi += ext_x;
    }
    Ok(SpaceTimeGrid {
        rows,
        cols,
        data: out,
    })
}

/// Builds the full coarsening stack for a normalized grid. Level k is
/// obtained from level k-1 using block extents `min(lambda^k, axis)`.
/// Construction stops at the first level where every coarsened axis has
/// been merged to full extent.
pub fn build_pyramid(grid: &SpaceTimeGrid, filter: Filter) -> Result<Pyramid, GridError> {
    Filter::new(filter.lambda_x, filter.lambda_t)?;
    let (rows, cols) = (grid.rows, grid.cols);
    let mut levels = vec![grid.clone()];
    let mut block_x = 1usize;
    let mut block_t = 1usize;
    loop {
        block_x = block_x.saturating_mul(filter.lambda_x).min(rows);
        block_t = block_t.saturating_mul(filter.lambda_t).min(cols);
        let next = coarse_grain_step(levels.last().unwrap(), block_x, block_t)?;
        levels.push(next);
        let merged_x = filter.lambda_x == 1 || block_x == rows;
        let merged_t = filter.lambda_t == 1 || block_t == cols;
        if merged_x && merged_t {
            return Ok(Pyramid { filter, levels });
        }
    }
}

/// Partial score of step k: half the absolute difference of mean squares
/// between levels k+1 and k. Accumulated in row-major order.
pub fn partial_dissimilarity(pyramid: &Pyramid, k: usize) -> Result<f64, GridError> {
    let k_max = pyramid.k_max();
    if k + 1 > k_max {
        return Err(GridError::LevelOutOfRange { k, k_max });
    }
    let fine = &pyramid.levels[k];
    let coarse = &pyramid.levels[k + 1];
    let mut acc = 0.0;
    for (a, b) in coarse.data.iter().zip(fine.data.iter()) {
        acc += a * a - b * b;
    }
    let cells = (fine.rows * fine.cols) as f64;
    Ok(acc.abs() / (2.0 * cells))
}

/// Sums the partial scores of steps 1 through k_max - 1 in ascending order.
/// The finest step is computed and reported but kept out of the total.
/// Pyramids with fewer than three levels have no step to sum and error out.
pub fn total_dissimilarity(pyramid: &Pyramid) -> Result<DissimilarityReport, GridError> {
    let k_max = pyramid.k_max();
    if k_max < 2 {
        return Err(GridError::DegeneratePyramid {
            levels: pyramid.levels.len(),
        });
    }
    let steps: Vec<f64> = (0..k_max)
        .map(|k| partial_dissimilarity(pyramid, k))
        .collect::<Result<_, _>>()?;
    let total = steps[1..].iter().sum();
    Ok(DissimilarityReport { steps, total })
}

/// Space-only score: each time column is treated as an independent L-by-1
/// grid, coarsened along space alone, and the per-column totals are
/// averaged over all T columns. The grid is expected to be normalized.
pub fn spatial_dissimilarity(grid: &SpaceTimeGrid, lambda_x: usize) -> Result<f64, GridError> {
    let filter = Filter::spatial(lambda_x)?;
    let mut acc = 0.0;
    for j in 0..grid.cols {
        let column: Vec<f64> = (0..grid.rows).map(|i| grid.get(i, j)).collect();
        let col_grid = SpaceTimeGrid::from_vec(grid.rows, 1, column)?;
        let pyramid = build_pyramid(&col_grid, filter)?;
        acc += total_dissimilarity(&pyramid)?.total;
    }
    Ok(acc / grid.cols as f64)
}

/// Time-only score, the row-wise mirror of [`spatial_dissimilarity`]:
/// per-row 1-by-T pyramids coarsened along time, averaged over all L rows.
pub fn temporal_dissimilarity(grid: &SpaceTimeGrid, lambda_t: usize) -> Result<f64, GridError> {
    let filter = Filter::temporal(lambda_t)?;
    let mut acc = 0.0;
    for i in 0..grid.rows {
        let row = grid.data[i * grid.cols..(i + 1) * grid.cols].to_vec();
        let row_grid = SpaceTimeGrid::from_vec(1, grid.cols, row)?;
        let pyramid = build_pyramid(&row_grid, filter)?;
        acc += total_dissimilarity(&pyramid)?.total;
    }
    Ok(acc / grid.rows as f64)
}

/// Normalize, build the default pyramid, and total in one call.
pub fn grid_dissimilarity(
    grid: &SpaceTimeGrid,
    filter: Filter,
) -> Result<DissimilarityReport, GridError> {
    let normalized = normalize_grid(grid)?;
    let pyramid = build_pyramid(&normalized, filter)?;
    total_dissimilarity(&pyramid)
}
