//! Thin browser bindings over the core library. Three operations are
//! exposed: run a lattice-gas trajectory, score an arbitrary grid, and run
//! one driven-chain circuit. Each returns a small result object with typed
//! getters so a plain script can draw the rasters on a canvas.
//!
//! The logic lives in ordinary functions returning `Result<_, String>` so the
//! crate also compiles and tests on native targets, where the generated
//! bindings are inert.

use dissim_core::clg::{run_strided, trajectory_to_movable_grid, ChainConfig};
use dissim_core::dtc::{record_to_grid, run_circuit, DisorderRealization};
use dissim_core::grid::{
    build_pyramid, grid_dissimilarity, normalize_grid, total_dissimilarity, Filter, SpaceTimeGrid,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn raster(grid: &SpaceTimeGrid) -> Vec<u8> {
    grid.values().iter().map(|&v| (v > 0.0) as u8).collect()
}

/// Lattice-gas trajectory with its structure scores.
#[wasm_bindgen]
pub struct LatticeGasRun {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
    dissimilarity: f64,
    active_fraction: f64,
    absorbed_at: Option<u32>,
}

#[wasm_bindgen]
impl LatticeGasRun {
    #[wasm_bindgen(getter)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[wasm_bindgen(getter)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major 0/1 bytes; rows are sites, columns are sweeps.
    #[wasm_bindgen(getter)]
    pub fn cells(&self) -> Vec<u8> {
        self.cells.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn dissimilarity(&self) -> f64 {
        self.dissimilarity
    }

    #[wasm_bindgen(getter)]
    pub fn active_fraction(&self) -> f64 {
        self.active_fraction
    }

    /// Sweep index where the chain froze, if it did.
    #[wasm_bindgen(getter)]
    pub fn absorbed_at(&self) -> Option<u32> {
        self.absorbed_at
    }
}

pub fn lattice_gas_impl(
    sites: usize,
    density: f64,
    sweeps: usize,
    seed: u64,
) -> Result<LatticeGasRun, String> {
    if !(0.0..=1.0).contains(&density) {
        return Err(format!("density {density} outside [0, 1]"));
    }
    let config = ChainConfig {
        sites,
        particles: (density * sites as f64).round() as usize,
        steps: sweeps,
        seed,
    };
    let traj = run_strided(config, sites).map_err(|e| e.to_string())?;
    let movable = trajectory_to_movable_grid(&traj);
    let score = grid_dissimilarity(
        &normalize_grid(&movable).map_err(|e| e.to_string())?,
        Filter::square(),
    )
    .map_err(|e| e.to_string())?;
    Ok(LatticeGasRun {
        rows: movable.rows(),
        cols: movable.cols(),
        cells: raster(&movable),
        dissimilarity: score.total,
        active_fraction: traj.final_state.active_fraction(),
        absorbed_at: traj.absorbed_at.map(|s| s as u32),
    })
}

/// Run a lattice-gas chain and score its movable-particle history.
#[wasm_bindgen]
pub fn lattice_gas(
    sites: usize,
    density: f64,
    sweeps: usize,
    seed: u64,
) -> Result<LatticeGasRun, String> {
    lattice_gas_impl(sites, density, sweeps, seed)
}

/// Coarsening-step score breakdown for one grid.
#[wasm_bindgen]
pub struct GridScore {
    partials: Vec<f64>,
    total: f64,
}

#[wasm_bindgen]
impl GridScore {
    /// Partial score for each coarsening step; step 0 is excluded from the
    /// total.
    #[wasm_bindgen(getter)]
    pub fn partials(&self) -> Vec<f64> {
        self.partials.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn total(&self) -> f64 {
        self.total
    }
}

pub fn score_grid_impl(
    rows: usize,
    cols: usize,
    values: &[f64],
    lambda_x: usize,
    lambda_t: usize,
) -> Result<GridScore, String> {
    if values.len() != rows * cols {
        return Err(format!(
            "expected {rows}x{cols} = {} values, got {}",
            rows * cols,
            values.len()
        ));
    }
    let grid = SpaceTimeGrid::from_vec(rows, cols, values.to_vec()).map_err(|e| e.to_string())?;
    let filter = Filter::new(lambda_x, lambda_t).map_err(|e| e.to_string())?;
    let normalized = normalize_grid(&grid).map_err(|e| e.to_string())?;
    let pyramid = build_pyramid(&normalized, filter).map_err(|e| e.to_string())?;
    let report = total_dissimilarity(&pyramid).map_err(|e| e.to_string())?;
    Ok(GridScore {
        partials: report.steps,
        total: report.total,
    })
}

/// Normalize a row-major grid and return its multiscale score breakdown.
#[wasm_bindgen]
pub fn score_grid(
    rows: usize,
    cols: usize,
    values: &[f64],
    lambda_x: usize,
    lambda_t: usize,
) -> Result<GridScore, String> {
    score_grid_impl(rows, cols, values, lambda_x, lambda_t)
}

/// One driven-chain circuit: sampled bitstrings and their score.
#[wasm_bindgen]
pub struct DriveRun {
    qubits: usize,
    cycles: usize,
    cells: Vec<u8>,
    initial: Vec<u8>,
    dissimilarity: f64,
    period2: bool,
}

#[wasm_bindgen]
impl DriveRun {
    #[wasm_bindgen(getter)]
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    #[wasm_bindgen(getter)]
    pub fn cycles(&self) -> usize {
        self.cycles
    }

    /// Row-major 0/1 bytes; rows are qubits, columns are cycles.
    #[wasm_bindgen(getter)]
    pub fn cells(&self) -> Vec<u8> {
        self.cells.clone()
    }

    /// The random initial bitstring, one byte per qubit.
    #[wasm_bindgen(getter)]
    pub fn initial(&self) -> Vec<u8> {
        self.initial.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn dissimilarity(&self) -> f64 {
        self.dissimilarity
    }

    /// Whether the whole record is an exact period-2 alternation.
    #[wasm_bindgen(getter)]
    pub fn period2(&self) -> bool {
        self.period2
    }
}

pub fn drive_chain_impl(
    qubits: usize,
    epsilon: f64,
    cycles: usize,
    seed: u64,
) -> Result<DriveRun, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let disorder = DisorderRealization::random(qubits, epsilon, &mut rng);
    let record = run_circuit(&disorder, cycles, &mut rng).map_err(|e| e.to_string())?;
    let grid = record_to_grid(&record);
    let score = grid_dissimilarity(&grid, Filter::square()).map_err(|e| e.to_string())?;
    let period2 = record.rows.iter().enumerate().all(|(t, row)| {
        row.iter()
            .zip(&record.initial_bits)
            .all(|(&b, &b0)| b == if t % 2 == 0 { 1 - b0 } else { b0 })
    });
    Ok(DriveRun {
        qubits,
        cycles,
        cells: (0..qubits * cycles)
            .map(|i| record.rows[i % cycles][i / cycles])
            .collect(),
        initial: record.initial_bits.clone(),
        dissimilarity: score.total,
        period2,
    })
}

/// Run one spin-flip drive circuit with the given imperfection.
#[wasm_bindgen]
pub fn drive_chain(
    qubits: usize,
    epsilon: f64,
    cycles: usize,
    seed: u64,
) -> Result<DriveRun, String> {
    drive_chain_impl(qubits, epsilon, cycles, seed)
}
