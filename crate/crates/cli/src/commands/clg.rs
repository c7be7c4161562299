//! Lattice-gas density sweep and the standalone compressed-density probe.

use super::Stat;
use crate::config::{resolve, resolve_required, FileConfig};
use crate::output::{fmt_f64, CsvDoc, RunContext};
use crate::CliError;
use dissim_core::cid::compute_cid;
use dissim_core::clg::{run_strided, trajectory_to_movable_grid, ChainConfig, ChainState};
use dissim_core::grid::{
    build_pyramid, normalize_grid, spatial_dissimilarity, temporal_dissimilarity,
    total_dissimilarity, Filter,
};
use dissim_core::seeding::task_seed;
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct SweepParams {
    pub sites: usize,
    /// Recorded rows; one row per full sweep of the chain.
    pub steps: usize,
    pub seeds: usize,
    pub rhos: Vec<f64>,
    pub master: u64,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub rho: f64,
    pub particles: usize,
    pub dxt: Stat,
    pub dx: Stat,
    pub dt: Stat,
    pub cid: Stat,
    pub fa: Stat,
}

pub fn density_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(min > 0.0) || !(max <= 1.0) || max < min || !(step > 0.0) {
        return Err(CliError::Usage(format!(
            "density grid needs 0 < rho-min <= rho-max <= 1 and rho-step > 0, \
             got min={min}, max={max}, step={step}"
        )));
    }
    let n = ((max - min) / step + 0.5).floor() as usize + 1;
    Ok((0..n).map(|i| min + i as f64 * step).collect())
}

/// Metrics of a single trajectory: dissimilarities of the movable-particle
/// history, compressed density of the final occupancy, final activity.
fn one_run(sites: usize, particles: usize, steps: usize, seed: u64) -> Result<[f64; 5], CliError> {
    let traj = run_strided(
        ChainConfig {
            sites,
            particles,
            steps,
            seed,
        },
        sites,
    )?;
    let normalized = normalize_grid(&trajectory_to_movable_grid(&traj))?;
    let dxt = total_dissimilarity(&build_pyramid(&normalized, Filter::square())?)?.total;
    let dx = spatial_dissimilarity(&normalized, 2)?;
    let dt = temporal_dissimilarity(&normalized, 2)?;
    let cid = compute_cid(traj.final_state.occupancy())?.cid;
    let fa = traj.final_state.active_fraction();
    Ok([dxt, dx, dt, cid, fa])
}

pub fn sweep(params: &SweepParams) -> Result<Vec<SweepPoint>, CliError> {
    let seeds = params.seeds;
    let runs: Vec<Result<[f64; 5], CliError>> = (0..params.rhos.len() * seeds)
        .into_par_iter()
        .map(|task| {
            let rho = params.rhos[task / seeds];
            let particles = (rho * params.sites as f64).round() as usize;
            one_run(
                params.sites,
                particles,
                params.steps,
                task_seed(params.master, task as u64),
            )
        })
        .collect();
    let mut points = Vec::with_capacity(params.rhos.len());
    for (ri, &rho) in params.rhos.iter().enumerate() {
        let mut columns = [const { Vec::new() }; 5];
        for run in &runs[ri * seeds..(ri + 1) * seeds] {
            let metrics = run.as_ref().map_err(|e| CliError::Failure(e.to_string()))?;
            for (c, v) in columns.iter_mut().zip(metrics) {
                c.push(*v);
            }
        }
        let [dxt, dx, dt, cid, fa] = columns.map(|c| Stat::from_samples(&c));
        points.push(SweepPoint {
            rho,
            particles: (rho * params.sites as f64).round() as usize,
            dxt,
            dx,
            dt,
            cid,
            fa,
        });
    }
    Ok(points)
}

pub fn sweep_csv(points: &[SweepPoint]) -> CsvDoc {
    let mut doc = CsvDoc::new(
        "clg-sweep-v1",
        &[
            "rho",
            "dxt_mean",
            "dxt_stderr",
            "dx_mean",
            "dx_stderr",
            "dt_mean",
            "dt_stderr",
            "cid_mean",
            "cid_stderr",
            "fa_mean",
            "fa_stderr",
        ],
    );
    for p in points {
        doc.push(&[
            fmt_f64(p.rho),
            fmt_f64(p.dxt.mean),
            fmt_f64(p.dxt.stderr),
            fmt_f64(p.dx.mean),
            fmt_f64(p.dx.stderr),
            fmt_f64(p.dt.mean),
            fmt_f64(p.dt.stderr),
            fmt_f64(p.cid.mean),
            fmt_f64(p.cid.stderr),
            fmt_f64(p.fa.mean),
            fmt_f64(p.fa.stderr),
        ]);
    }
    doc
}

pub struct SweepFlags {
    pub sites: Option<usize>,
    pub steps: Option<usize>,
    pub seeds: Option<usize>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub rho_step: Option<f64>,
}

pub fn run_sweep(
    flags: &SweepFlags,
    cfg: &FileConfig,
    master: u64,
    ctx: &mut RunContext,
) -> Result<(), CliError> {
    let sites = resolve(flags.sites, cfg, "sites", 64)?;
    let steps = resolve(flags.steps, cfg, "steps", 1024)?;
    let seeds = resolve(flags.seeds, cfg, "seeds", 100)?;
    let rho_min = resolve(flags.rho_min, cfg, "rho_min", 0.30)?;
    let rho_max = resolve(flags.rho_max, cfg, "rho_max", 0.95)?;
    let rho_step = resolve(flags.rho_step, cfg, "rho_step", 0.05)?;
    if sites < 4 || steps == 0 || seeds == 0 {
        return Err(CliError::Usage(format!(
            "need sites >= 4, steps >= 1, seeds >= 1; got sites={sites}, steps={steps}, seeds={seeds}"
        )));
    }
    let rhos = density_grid(rho_min, rho_max, rho_step)?;
    ctx.param("seed", master);
    ctx.param("sites", sites);
    ctx.param("steps", steps);
    ctx.param("seeds", seeds);
    ctx.param("rho_min", rho_min);
    ctx.param("rho_max", rho_max);
    ctx.param("rho_step", rho_step);

    let points = sweep(&SweepParams {
        sites,
        steps,
        seeds,
        rhos,
        master,
    })?;
    ctx.write_csv("clg_sweep.csv", &sweep_csv(&points))?;
    Ok(())
}

/// Parse a chain state file: ASCII '0'/'1', whitespace ignored.
pub fn read_state_file(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    let mut bits = Vec::new();
    for ch in text.chars() {
        match ch {
            '0' => bits.push(0u8),
            '1' => bits.push(1u8),
            c if c.is_whitespace() => {}
            c => {
                return Err(CliError::Failure(format!(
                    "{}: state files hold only 0, 1, and whitespace, found {c:?}",
                    path.display()
                )))
            }
        }
    }
    if bits.is_empty() {
        return Err(CliError::Failure(format!(
            "{}: state file is empty",
            path.display()
        )));
    }
    Ok(bits)
}

pub fn run_cid(
    state_file: Option<PathBuf>,
    cfg: &FileConfig,
    ctx: &mut RunContext,
) -> Result<(), CliError> {
    let path = resolve_required(state_file, cfg, "state_file")?;
    let bits = read_state_file(&path)?;
    let state = ChainState::from_bits(&bits);
    let result = compute_cid(state.occupancy())?;
    ctx.param("state_file", path.display());
    let mut doc = CsvDoc::new(
        "clg-cid-v1",
        &["sites", "original_bytes", "compressed_bytes", "cid"],
    );
    doc.push(&[
        state.sites().to_string(),
        result.original_bytes.to_string(),
        result.compressed_bytes.to_string(),
        fmt_f64(result.cid),
    ]);
    ctx.write_csv("clg_cid.csv", &doc)?;
    println!(
        "cid {} ({} sites, {} -> {} bytes)",
        fmt_f64(result.cid),
        state.sites(),
        result.original_bytes,
        result.compressed_bytes
    );
    Ok(())
}
