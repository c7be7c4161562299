//! Conserved lattice gas on a one-dimensional ring.
//!
//! N particles live on L sites, at most one per site. A particle is active
//! when at least one neighbor site is occupied. One update move picks a
//! movable active particle uniformly at random and hops it to an empty
//! neighbor site. On a ring with L > 2 a particle is movable exactly when
//! one neighbor is occupied and the other is empty, so the destination is
//! forced. Dynamics with no movable particle are frozen: either a true
//! absorbing state (no active particles) or the fully packed ring.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::SpaceTimeGrid;

#[derive(Debug, Error, PartialEq)]
pub enum ClgError {
    #[error("chain needs at least one site")]
    NoSites,
    #[error("{particles} particles do not fit on {sites} sites")]
    TooManyParticles { particles: usize, sites: usize },
    #[error("a run must record at least one row")]
    NoSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    /// Ring length L.
    pub sites: usize,
    /// Particle count N, conserved by every move.
    pub particles: usize,
    /// Recorded rows T.
    pub steps: usize,
    pub seed: u64,
}

/// Occupancy of the ring, one byte per site (0 empty, 1 occupied).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainState {
    occ: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Moved {
        from: usize,
        to: usize,
    },
    /// No movable active particle; the configuration can never change again.
    Frozen,
}

impl ChainState {
    /// Build a state from explicit bits; any nonzero byte counts as occupied.
    pub fn from_bits(bits: &[u8]) -> ChainState {
        ChainState {
            occ: bits.iter().map(|&b| (b != 0) as u8).collect(),
        }
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occ
    }

    pub fn sites(&self) -> usize {
        self.occ.len()
    }

    pub fn particles(&self) -> usize {
        self.occ.iter().map(|&b| b as usize).sum()
    }

    #[inline]
    fn neighbors(&self, i: usize) -> (usize, usize) {
        let l = self.occ.len();
        ((i + l - 1) % l, (i + 1) % l)
    }

    /// True when site i holds a particle with an occupied neighbor.
    #[inline]
    pub fn is_active(&self, i: usize) -> bool {
        if self.occ[i] == 0 || self.occ.len() < 2 {
            return false;
        }
        let (left, right) = self.neighbors(i);
        self.occ[left] == 1 || self.occ[right] == 1
    }

    /// Fraction of sites holding an active particle, the order parameter.
    pub fn active_fraction(&self) -> f64 {
        let active = (0..self.occ.len()).filter(|&i| self.is_active(i)).count();
        active as f64 / self.occ.len() as f64
    }

    fn collect_movable(&self, out: &mut Vec<usize>) {
        out.clear();
        let l = self.occ.len();
        if l < 3 {
            return;
        }
        for i in 0..l {
            if self.occ[i] == 1 {
                let (left, right) = self.neighbors(i);
                // movable: exactly one occupied neighbor
                if self.occ[left] + self.occ[right] == 1 {
                    out.push(i);
                }
            }
        }
    }
}

/// Uniformly random placement of `particles` on `sites` distinct sites.
pub fn init_random(
    sites: usize,
    particles: usize,
    rng: &mut impl Rng,
) -> Result<ChainState, ClgError> {
    if sites == 0 {
        return Err(ClgError::NoSites);
    }
    if particles > sites {
        return Err(ClgError::TooManyParticles { particles, sites });
    }
    let mut occ = vec![0u8; sites];
    for idx in rand::seq::index::sample(rng, sites, particles) {
        occ[idx] = 1;
    }
    Ok(ChainState { occ })
}

/// One update move. Scans for movable active particles, hops one of them
/// (chosen uniformly) to its empty neighbor, or reports the state frozen.
pub fn step(state: &mut ChainState, rng: &mut impl Rng, scratch: &mut Vec<usize>) -> StepOutcome {
    state.collect_movable(scratch);
    if scratch.is_empty() {
        return StepOutcome::Frozen;
    }
    let from = scratch[rng.gen_range(0..scratch.len())];
    let (left, right) = state.neighbors(from);
    let to = if state.occ[left] == 0 { left } else { right };
    state.occ[from] = 0;
    state.occ[to] = 1;
    StepOutcome::Moved { from, to }
}

/// Recorded history of one run: occupancy and activity per recorded row.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: ChainConfig,
    /// `rows[j]` is the occupancy after row j was recorded; frozen runs
    /// repeat their final occupancy through the remaining rows.
    pub rows: Vec<Vec<u8>>,
    /// Activity indicator per recorded row, aligned with `rows`.
    pub active_rows: Vec<Vec<u8>>,
    /// Row index at which the dynamics froze, if it did.
    pub absorbed_at: Option<usize>,
    /// Final configuration (equal to the last row).
    pub final_state: ChainState,
}

/// Runs the chain recording one row per update move.
pub fn run(config: ChainConfig) -> Result<Trajectory, ClgError> {
    run_strided(config, 1)
}

/// Runs the chain recording one row every `stride` update moves. Row j is
/// the state after (j + 1) * stride moves; `stride = sites` records once
/// per sweep. Once frozen, remaining rows repeat the final state.
pub fn run_strided(config: ChainConfig, stride: usize) -> Result<Trajectory, ClgError> {
    if config.steps == 0 {
        return Err(ClgError::NoSteps);
    }
    let stride = stride.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = init_random(config.sites, config.particles, &mut rng)?;
    let mut scratch = Vec::with_capacity(config.sites);
    let mut rows = Vec::with_capacity(config.steps);
    let mut active_rows = Vec::with_capacity(config.steps);
    let mut absorbed_at = None;
    for row in 0..config.steps {
        if absorbed_at.is_none() {
            for _ in 0..stride {
                if let StepOutcome::Frozen = step(&mut state, &mut rng, &mut scratch) {
                    absorbed_at = Some(row);
                    break;
                }
            }
        }
        rows.push(state.occ.clone());
        let active: Vec<u8> = (0..config.sites)
            .map(|i| state.is_active(i) as u8)
            .collect();
        active_rows.push(active);
    }
    Ok(Trajectory {
        config,
        rows,
        active_rows,
        absorbed_at,
        final_state: state,
    })
}

/// Occupancy history as a space-by-time grid with bits mapped to -1 and +1.
/// Grid row i is site i, column j is recorded row j.
pub fn trajectory_to_grid(trajectory: &Trajectory) -> SpaceTimeGrid {
    bits_to_grid(&trajectory.rows, trajectory.config.sites)
}

/// Activity history as a space-by-time grid: +1 where the site held an
/// active particle at that row, -1 elsewhere.
pub fn trajectory_to_activity_grid(trajectory: &Trajectory) -> SpaceTimeGrid {
    bits_to_grid(&trajectory.active_rows, trajectory.config.sites)
}

/// Movable-particle history as a space-by-time grid: +1 where the site held a
/// particle the update rule could have moved (occupied, exactly one occupied
/// neighbor), -1 elsewhere.
///
/// This is the default input for the dissimilarity sweep. Unlike raw
/// occupancy it vanishes identically once the chain freezes, so the frozen
/// phase scores zero, and unlike the active-site field its total is not tied
/// to the conserved particle number, which keeps the score's maximum stable
/// across chain lengths.
pub fn trajectory_to_movable_grid(trajectory: &Trajectory) -> SpaceTimeGrid {
    let sites = trajectory.config.sites;
    let steps = trajectory.rows.len();
    SpaceTimeGrid::from_fn(sites, steps, |i, j| {
        let row = &trajectory.rows[j];
        let neighbors = row[(i + sites - 1) % sites] + row[(i + 1) % sites];
        if row[i] == 1 && neighbors == 1 {
            1.0
        } else {
            -1.0
        }
    })
    .expect("trajectory is never empty")
}

fn bits_to_grid(rows: &[Vec<u8>], sites: usize) -> SpaceTimeGrid {
    let steps = rows.len();
    SpaceTimeGrid::from_fn(
        sites,
        steps,
        |i, j| if rows[j][i] == 1 { 1.0 } else { -1.0 },
    )
    .expect("trajectory is never empty")
}
