//! Trotterized Heisenberg-ring evolution on a geometric time grid.
//!
//! One qubit (the "reference") starts in |0> on top of a Haar-random rest;
//! the chain is evolved with exact two-qubit bond propagators in a
//! second-order even/odd splitting. Two observables come out of a run:
//! the reference-qubit magnetization curve and the windowed space-time
//! dissimilarity of bitstring samples taken after every step.

use crate::fit::{self, FitError, PowerLaw};
use crate::grid::{grid_dissimilarity, Filter, GridError, SpaceTimeGrid};
use crate::qsim::{insert_zero_bit, QsimError, StateVector, TwoQubitUnitary};
use crate::seeding::task_seed;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

/// Exchange constant of every bond; fixes the unit of time.
pub const EXCHANGE: f64 = 1.0;

/// Moving-average width (in windows) used before transition detection.
pub const SMOOTHING_WINDOW: usize = 5;

/// Half-width of the slope stencil used by [`detect_transition`].
const SLOPE_STENCIL: usize = 3;

/// Upper end of the early-time search region for the first transition.
pub const EARLY_TIME_CUTOFF: f64 = 5.0;

/// A slope only counts as a transition when it exceeds this many of its
/// own propagated standard errors.
const NOISE_FLOOR_FACTOR: f64 = 4.0;

/// Time range used to pin the hydrodynamic tail amplitude.
pub const AMPLITUDE_FIT_RANGE: (f64, f64) = (5.0, 12.0);

/// Times past this are treated as the finite-size plateau.
pub const PLATEAU_TIME: f64 = 25.0;

/// Exponent of the hydrodynamic magnetization tail.
pub const HYDRO_EXPONENT: f64 = -2.0 / 3.0;

/// States evolved together by the batched kernel.
const LANES: usize = 16;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("schedule needs 0 < t0 < horizon and at least 2 grid times, got t0={t0}, horizon={horizon}, points={points}")]
    BadSchedule {
        t0: f64,
        horizon: f64,
        points: usize,
    },
    #[error("ring splitting needs an even qubit count of at least 4, got {qubits}")]
    BadChain { qubits: usize },
    #[error("{steps} steps do not split into whole windows of {window} (window must be >= 2)")]
    BadWindow { steps: usize, window: usize },
    #[error("need at least one experiment")]
    NoExperiments,
    #[error("estimator needs at least {needed} windows, got {got}")]
    TooFewWindows { got: usize, needed: usize },
    #[error("curve has no usable points in the required time range")]
    EmptyRange,
    #[error("plateau estimate is not positive, cannot place the onset")]
    BadPlateau,
    #[error(transparent)]
    Sim(#[from] QsimError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Geometric simulation-time grid t_i = t0 * r^i with r = (horizon/t0)^{1/(N-1)}.
#[derive(Debug, Clone)]
pub struct TrotterSchedule {
    /// The N cumulative grid times; `times[0] = t0`, `times[N-1] = horizon`.
    pub times: Vec<f64>,
    /// The N-1 gaps between consecutive grid times.
    pub deltas: Vec<f64>,
}

impl TrotterSchedule {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Step durations walked by a runner starting from t = 0: the 0 -> t0
    /// step followed by the grid gaps. One bitstring sample per entry.
    pub fn step_sizes(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.times[0]).chain(self.deltas.iter().copied())
    }
}

pub fn build_schedule(
    t0: f64,
    horizon: f64,
    points: usize,
) -> Result<TrotterSchedule, TransportError> {
    if !(t0 > 0.0) || !(horizon > t0) || points < 2 {
        return Err(TransportError::BadSchedule {
            t0,
            horizon,
            points,
        });
    }
    let ratio = horizon / t0;
    let span = (points - 1) as f64;
    let times: Vec<f64> = (0..points)
        .map(|i| t0 * ratio.powf(i as f64 / span))
        .collect();
    let deltas = times.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(TrotterSchedule { times, deltas })
}

/// Ensemble settings for one run.
#[derive(Debug, Clone)]
pub struct TransportConfig {
    pub qubits: usize,
    /// true: first qubit prepared in |0> on top of Haar-random rest;
    /// false: fully Haar-random control.
    pub with_reference: bool,
    pub experiments: usize,
    /// Steps per dissimilarity window.
    pub window: usize,
    pub seed: u64,
}

// exp(-i J dt S.S) restricted to a bond: diagonal phase on the aligned
// states, a 2x2 rotation mixing the anti-aligned pair.
#[derive(Debug, Clone, Copy)]
struct BondCoeffs {
    diag: Complex64,
    same: Complex64,
    swap: Complex64,
}

impl BondCoeffs {
    fn new(dt: f64) -> BondCoeffs {
        let phi = EXCHANGE * dt / 2.0;
        let pref = Complex64::from_polar(1.0, EXCHANGE * dt / 4.0);
        BondCoeffs {
            diag: Complex64::from_polar(1.0, -EXCHANGE * dt / 4.0),
            same: pref * phi.cos(),
            swap: pref * Complex64::new(0.0, -phi.sin()),
        }
    }
}

/// Dense 4x4 matrix of the exact bond propagator exp(-i J dt S_a.S_b),
/// basis |b a> with the first target the low bit.
pub fn bond_matrix(dt: f64) -> [[Complex64; 4]; 4] {
    let c = BondCoeffs::new(dt);
    let zero = Complex64::new(0.0, 0.0);
    [
        [c.diag, zero, zero, zero],
        [zero, c.same, c.swap, zero],
        [zero, c.swap, c.same, zero],
        [zero, zero, zero, c.diag],
    ]
}

/// Same propagator packaged for the generic two-qubit gate path.
pub fn bond_unitary(dt: f64, a: usize, b: usize) -> TwoQubitUnitary {
    TwoQubitUnitary::new(bond_matrix(dt), a, b)
}

fn apply_bond_scalar(amps: &mut [Complex64], a: usize, b: usize, c: &BondCoeffs) {
    let (p1, p2) = if a < b { (a, b) } else { (b, a) };
    let (sa, sb) = (1usize << a, 1usize << b);
    for k in 0..amps.len() >> 2 {
        let i = insert_zero_bit(insert_zero_bit(k, p1), p2);
        let (i01, i10, i11) = (i + sa, i + sb, i + sa + sb);
        amps[i] *= c.diag;
        amps[i11] *= c.diag;
        let (x, y) = (amps[i01], amps[i10]);
        amps[i01] = c.same * x + c.swap * y;
        amps[i10] = c.swap * x + c.same * y;
    }
}

fn check_chain(qubits: usize) -> Result<(), TransportError> {
    if qubits < 4 || !qubits.is_multiple_of(2) {
        return Err(TransportError::BadChain { qubits });
    }
    Ok(())
}

/// One second-order splitting step of the Heisenberg ring: half a step of
/// the even bonds, a full step of the odd bonds, half a step of the even
/// bonds again. Bonds are (q, q+1 mod L); the wrap bond is odd because L
/// is even.
pub fn trotter_step(state: &mut StateVector, dt: f64) -> Result<(), TransportError> {
    let l = state.qubits();
    check_chain(l)?;
    let half = BondCoeffs::new(dt / 2.0);
    let full = BondCoeffs::new(dt);
    let amps = state.amplitudes_mut();
    for q in (0..l).step_by(2) {
        apply_bond_scalar(amps, q, q + 1, &half);
    }
    for q in (1..l).step_by(2) {
        apply_bond_scalar(amps, q, (q + 1) % l, &full);
    }
    for q in (0..l).step_by(2) {
        apply_bond_scalar(amps, q, q + 1, &half);
    }
    Ok(())
}

/// Starting state of one experiment.
pub fn initial_state(
    qubits: usize,
    with_reference: bool,
    rng: &mut impl Rng,
) -> Result<StateVector, TransportError> {
    if with_reference {
        let rest = StateVector::haar_random(qubits - 1, rng)?;
        Ok(StateVector::basis_state(1, &[0])?.tensor(&rest)?)
    } else {
        Ok(StateVector::haar_random(qubits, rng)?)
    }
}

// Fixed-width batch of state vectors in split re/im layout, lane index
// fastest. Padding lanes replicate the last live experiment and their
// output is dropped.
struct BatchedStates {
    qubits: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl BatchedStates {
    fn pack(states: &[StateVector]) -> BatchedStates {
        assert!(!states.is_empty() && states.len() <= LANES);
        let qubits = states[0].qubits();
        let dim = 1usize << qubits;
        let mut re = vec![0.0; dim * LANES];
        let mut im = vec![0.0; dim * LANES];
        for lane in 0..LANES {
            let src = states[lane.min(states.len() - 1)].amplitudes();
            for (k, a) in src.iter().enumerate() {
                re[k * LANES + lane] = a.re;
                im[k * LANES + lane] = a.im;
            }
        }
        BatchedStates { qubits, re, im }
    }

    fn apply_bond(&mut self, a: usize, b: usize, c: &BondCoeffs) {
        let dim = 1usize << self.qubits;
        let (p1, p2) = if a < b { (a, b) } else { (b, a) };
        let (sa, sb) = (1usize << a, 1usize << b);
        let (dr, di) = (c.diag.re, c.diag.im);
        let (sr, si) = (c.same.re, c.same.im);
        let (wr, wi) = (c.swap.re, c.swap.im);
        let mut tin = [[0.0f64; LANES]; 8];
        let mut tout = [[0.0f64; LANES]; 8];
        for k in 0..dim >> 2 {
            let i = insert_zero_bit(insert_zero_bit(k, p1), p2);
            let idx = [i, i + sa, i + sb, i + sa + sb];
            for (j, &ix) in idx.iter().enumerate() {
                tin[2 * j].copy_from_slice(&self.re[ix * LANES..(ix + 1) * LANES]);
                tin[2 * j + 1].copy_from_slice(&self.im[ix * LANES..(ix + 1) * LANES]);
            }
            for l in 0..LANES {
                tout[0][l] = dr * tin[0][l] - di * tin[1][l];
                tout[1][l] = dr * tin[1][l] + di * tin[0][l];
                tout[6][l] = dr * tin[6][l] - di * tin[7][l];
                tout[7][l] = dr * tin[7][l] + di * tin[6][l];
                tout[2][l] = sr * tin[2][l] - si * tin[3][l] + wr * tin[4][l] - wi * tin[5][l];
                tout[3][l] = sr * tin[3][l] + si * tin[2][l] + wr * tin[5][l] + wi * tin[4][l];
                tout[4][l] = wr * tin[2][l] - wi * tin[3][l] + sr * tin[4][l] - si * tin[5][l];
                tout[5][l] = wr * tin[3][l] + wi * tin[2][l] + sr * tin[5][l] + si * tin[4][l];
            }
            for (j, &ix) in idx.iter().enumerate() {
                self.re[ix * LANES..(ix + 1) * LANES].copy_from_slice(&tout[2 * j]);
                self.im[ix * LANES..(ix + 1) * LANES].copy_from_slice(&tout[2 * j + 1]);
            }
        }
    }

    fn step(&mut self, dt: f64) {
        let l = self.qubits;
        let half = BondCoeffs::new(dt / 2.0);
        let full = BondCoeffs::new(dt);
        for q in (0..l).step_by(2) {
            self.apply_bond(q, q + 1, &half);
        }
        for q in (1..l).step_by(2) {
            self.apply_bond(q, (q + 1) % l, &full);
        }
        for q in (0..l).step_by(2) {
            self.apply_bond(q, q + 1, &half);
        }
    }

    // Per-lane squared norm and Z expectation (unnormalized) on one qubit.
    fn norms_and_z(&self, target: usize) -> ([f64; LANES], [f64; LANES]) {
        let dim = 1usize << self.qubits;
        let mask = 1usize << target;
        let mut norm = [0.0; LANES];
        let mut z = [0.0; LANES];
        for k in 0..dim {
            let base = k * LANES;
            let r: &[f64; LANES] = self.re[base..base + LANES].try_into().unwrap();
            let m: &[f64; LANES] = self.im[base..base + LANES].try_into().unwrap();
            let sign = if k & mask == 0 { 1.0 } else { -1.0 };
            for l in 0..LANES {
                let p = r[l] * r[l] + m[l] * m[l];
                norm[l] += p;
                z[l] += sign * p;
            }
        }
        (norm, z)
    }

    // Same subtractive scan as the single-state sampler so a batched run
    // reproduces its draws bit for bit.
    fn sample_lane(&self, lane: usize, threshold: f64) -> usize {
        let dim = 1usize << self.qubits;
        let mut r = threshold;
        let mut chosen = dim - 1;
        for k in 0..dim {
            let re = self.re[k * LANES + lane];
            let im = self.im[k * LANES + lane];
            r -= re * re + im * im;
            if r <= 0.0 {
                chosen = k;
                break;
            }
        }
        chosen
    }
}

/// Ensemble mean of a time series plus its spread.
#[derive(Debug, Clone)]
pub struct MagnetizationCurve {
    pub times: Vec<f64>,
    /// Mean reference-qubit <S^z> per time.
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Per-window dissimilarity statistics over the ensemble.
#[derive(Debug, Clone)]
pub struct MonitoringCurve {
    /// Geometric midpoint of each window's first and last grid time.
    pub window_times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Everything measured in one monitored run.
#[derive(Debug, Clone)]
pub struct MonitoringOutput {
    pub dissimilarity: MonitoringCurve,
    pub magnetization: MagnetizationCurve,
}

struct BatchSums {
    win_sum: Vec<f64>,
    win_sq: Vec<f64>,
    mag_sum: Vec<f64>,
    mag_sq: Vec<f64>,
}

fn rows_to_grid(qubits: usize, rows: &[usize]) -> SpaceTimeGrid {
    SpaceTimeGrid::from_fn(qubits, rows.len(), |q, s| {
        if rows[s] >> q & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    })
    .expect("window is never empty")
}

/// Dissimilarity of each consecutive `window`-step block of bitstring rows;
/// `rows[s]` packs the chain left to right into the low bits.
pub fn windowed_dissimilarity(
    qubits: usize,
    rows: &[usize],
    window: usize,
) -> Result<Vec<f64>, TransportError> {
    if window < 2 || rows.is_empty() || !rows.len().is_multiple_of(window) {
        return Err(TransportError::BadWindow {
            steps: rows.len(),
            window,
        });
    }
    let filter = Filter::square();
    rows.chunks(window)
        .map(|chunk| {
            let grid = rows_to_grid(qubits, chunk);
            Ok(grid_dissimilarity(&grid, filter)?.total)
        })
        .collect()
}

fn run_engine(
    config: &TransportConfig,
    schedule: &TrotterSchedule,
    with_windows: bool,
) -> Result<(usize, BatchSums), TransportError> {
    check_chain(config.qubits)?;
    if config.experiments == 0 {
        return Err(TransportError::NoExperiments);
    }
    let steps = schedule.len();
    let n_windows = if with_windows {
        if config.window < 2 || !steps.is_multiple_of(config.window) {
            return Err(TransportError::BadWindow {
                steps,
                window: config.window,
            });
        }
        steps / config.window
    } else {
        0
    };

    let n_batches = config.experiments.div_ceil(LANES);
    let batch_results: Result<Vec<BatchSums>, TransportError> = {
        let run = |batch| run_batch(config, schedule, with_windows, n_windows, batch);
        #[cfg(feature = "parallel")]
        {
            (0..n_batches).into_par_iter().map(run).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n_batches).map(run).collect()
        }
    };
    let batches = batch_results?;

    let mut total = BatchSums {
        win_sum: vec![0.0; n_windows],
        win_sq: vec![0.0; n_windows],
        mag_sum: vec![0.0; steps + 1],
        mag_sq: vec![0.0; steps + 1],
    };
    for b in batches {
        for (t, s) in total.win_sum.iter_mut().zip(&b.win_sum) {
            *t += s;
        }
        for (t, s) in total.win_sq.iter_mut().zip(&b.win_sq) {
            *t += s;
        }
        for (t, s) in total.mag_sum.iter_mut().zip(&b.mag_sum) {
            *t += s;
        }
        for (t, s) in total.mag_sq.iter_mut().zip(&b.mag_sq) {
            *t += s;
        }
    }
    Ok((config.experiments, total))
}

fn run_batch(
    config: &TransportConfig,
    schedule: &TrotterSchedule,
    with_windows: bool,
    n_windows: usize,
    batch: usize,
) -> Result<BatchSums, TransportError> {
    let steps = schedule.len();
    let filter = Filter::square();
    let first = batch * LANES;
    let live = LANES.min(config.experiments - first);
    let mut rngs: Vec<ChaCha8Rng> = (0..LANES)
        .map(|lane| {
            let exp = first + lane.min(live - 1);
            ChaCha8Rng::seed_from_u64(task_seed(config.seed, exp as u64))
        })
        .collect();
    let mut states = Vec::with_capacity(LANES);
    for rng in rngs.iter_mut() {
        states.push(initial_state(config.qubits, config.with_reference, rng)?);
    }

    let mut sums = BatchSums {
        win_sum: vec![0.0; n_windows],
        win_sq: vec![0.0; n_windows],
        mag_sum: vec![0.0; steps + 1],
        mag_sq: vec![0.0; steps + 1],
    };
    for state in states.iter().take(live) {
        // normalizing keeps the reference-qubit start bit-exact at 1/2
        let m = state.expect_z(0)? / state.norm_sqr() / 2.0;
        sums.mag_sum[0] += m;
        sums.mag_sq[0] += m * m;
    }

    let mut batch_states = BatchedStates::pack(&states);
    drop(states);
    let mut window_rows: Vec<Vec<usize>> = vec![Vec::with_capacity(config.window); live];
    for (s, dt) in schedule.step_sizes().enumerate() {
        batch_states.step(dt);
        let (norms, zs) = batch_states.norms_and_z(0);
        for lane in 0..live {
            if (norms[lane] - 1.0).abs() > 1e-6 {
                return Err(QsimError::CorruptedState { norm: norms[lane] }.into());
            }
            let m = zs[lane] / norms[lane] / 2.0;
            sums.mag_sum[s + 1] += m;
            sums.mag_sq[s + 1] += m * m;
        }
        if with_windows {
            // padding lanes still draw so their stream stays in step
            for lane in 0..LANES {
                let u: f64 = rngs[lane].gen();
                if lane < live {
                    let row = batch_states.sample_lane(lane, u * norms[lane]);
                    window_rows[lane].push(row);
                }
            }
            if (s + 1) % config.window == 0 {
                let w = s / config.window;
                for rows in window_rows.iter_mut() {
                    let grid = rows_to_grid(config.qubits, rows);
                    let d = grid_dissimilarity(&grid, filter)?.total;
                    sums.win_sum[w] += d;
                    sums.win_sq[w] += d * d;
                    rows.clear();
                }
            }
        }
    }
    Ok(sums)
}

fn spread(sum: f64, sumsq: f64, n: usize) -> (f64, f64) {
    let mean = sum / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sumsq - sum * sum / n as f64) / (n - 1) as f64).max(0.0);
    (mean, var.sqrt())
}

/// Reference-qubit magnetization <S^z> against time, averaged over the
/// ensemble. The curve starts with the exact t = 0 point.
pub fn run_magnetization(
    config: &TransportConfig,
    schedule: &TrotterSchedule,
) -> Result<MagnetizationCurve, TransportError> {
    let (n, sums) = run_engine(config, schedule, false)?;
    let mut times = Vec::with_capacity(schedule.len() + 1);
    times.push(0.0);
    times.extend_from_slice(&schedule.times);
    let mut mean = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let (m, s) = spread(sums.mag_sum[i], sums.mag_sq[i], n);
        mean.push(m);
        stderr.push(s / (n as f64).sqrt());
    }
    Ok(MagnetizationCurve {
        times,
        mean,
        stderr,
    })
}

/// Monitored run: one bitstring sample per step, scored per window, with
/// the magnetization curve of the same ensemble thrown in for free.
pub fn run_windowed_dissimilarity(
    config: &TransportConfig,
    schedule: &TrotterSchedule,
) -> Result<MonitoringOutput, TransportError> {
    let (n, sums) = run_engine(config, schedule, true)?;
    let n_windows = sums.win_sum.len();
    let mut window_times = Vec::with_capacity(n_windows);
    let mut mean = Vec::with_capacity(n_windows);
    let mut std = Vec::with_capacity(n_windows);
    let mut stderr = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let lo = schedule.times[w * config.window];
        let hi = schedule.times[(w + 1) * config.window - 1];
        window_times.push((lo * hi).sqrt());
        let (m, s) = spread(sums.win_sum[w], sums.win_sq[w], n);
        mean.push(m);
        std.push(s);
        stderr.push(s / (n as f64).sqrt());
    }
    let mut times = Vec::with_capacity(schedule.len() + 1);
    times.push(0.0);
    times.extend_from_slice(&schedule.times);
    let mut mag_mean = Vec::with_capacity(times.len());
    let mut mag_stderr = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let (m, s) = spread(sums.mag_sum[i], sums.mag_sq[i], n);
        mag_mean.push(m);
        mag_stderr.push(s / (n as f64).sqrt());
    }
    Ok(MonitoringOutput {
        dissimilarity: MonitoringCurve {
            window_times,
            mean,
            std,
            stderr,
        },
        magnetization: MagnetizationCurve {
            times,
            mean: mag_mean,
            stderr: mag_stderr,
        },
    })
}

/// Power-law fit of the magnetization tail over `[t_min, t_max]`.
pub fn fit_magnetization_tail(
    curve: &MagnetizationCurve,
    t_min: f64,
    t_max: f64,
) -> Result<PowerLaw, TransportError> {
    Ok(fit::fit_power_law(&curve.times, &curve.mean, t_min, t_max)?)
}

/// Outcome of the early-transition search.
#[derive(Debug, Clone)]
pub struct TransitionReport {
    /// Window center time of the strongest early slope, or None when the
    /// curve is flat there.
    pub time: Option<f64>,
    /// Largest early-time slope significance (slope over its propagated
    /// standard error).
    pub score: f64,
    /// Significance a slope must beat to count as a transition.
    pub threshold: f64,
}

/// Locate the first qualitative change of a dissimilarity curve.
///
/// The curve is smoothed with a short moving average and a local
/// least-squares slope against log window time is taken at every window;
/// the slope's standard error is propagated from the per-window standard
/// errors. The early-time window with the most significant slope wins,
/// provided it clears the significance threshold; otherwise the curve is
/// declared flat. Slopes are taken against log time because the window
/// grid is geometric; differencing against raw time would amplify sample
/// noise at the short-time end by the reciprocal of the local step.
pub fn detect_transition(curve: &MonitoringCurve) -> Result<TransitionReport, TransportError> {
    let n = curve.window_times.len();
    if n < SMOOTHING_WINDOW {
        return Err(TransportError::TooFewWindows {
            got: n,
            needed: SMOOTHING_WINDOW,
        });
    }
    let smoothed = fit::moving_average(&curve.mean, SMOOTHING_WINDOW);
    let log_t: Vec<f64> = curve.window_times.iter().map(|t| t.ln()).collect();
    let w = SMOOTHING_WINDOW as f64;

    let mut score = 0.0;
    let mut peak_time = None;
    for i in 0..n {
        if curve.window_times[i] >= EARLY_TIME_CUTOFF {
            break;
        }
        let lo = i.saturating_sub(SLOPE_STENCIL);
        let hi = (i + SLOPE_STENCIL).min(n - 1);
        let slope = fit::fit_line(&log_t[lo..=hi], &smoothed[lo..=hi])?.slope;
        let x_mean = log_t[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
        let sum_dx2: f64 = log_t[lo..=hi].iter().map(|x| (x - x_mean).powi(2)).sum();
        // var of a LS slope with smoothed inputs: sum c_j^2 var(y_j) / W
        let var: f64 = log_t[lo..=hi]
            .iter()
            .zip(&curve.stderr[lo..=hi])
            .map(|(x, e)| ((x - x_mean) / sum_dx2 * e).powi(2) / w)
            .sum();
        let z = if var > 0.0 {
            slope.abs() / var.sqrt()
        } else if slope.abs() > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if z > score {
            score = z;
            peak_time = Some(curve.window_times[i]);
        }
    }
    let time = if score > NOISE_FLOOR_FACTOR {
        peak_time
    } else {
        None
    };
    Ok(TransitionReport {
        time,
        score,
        threshold: NOISE_FLOOR_FACTOR,
    })
}

/// Ratio of the spread of window means to the typical single-window
/// standard error. A featureless stream gives a value near 1; curves with
/// structure score far above it. Values below 3 count as flat.
pub fn flatness_statistic(curve: &MonitoringCurve) -> Result<f64, TransportError> {
    if curve.mean.len() < 2 {
        return Err(TransportError::TooFewWindows {
            got: curve.mean.len(),
            needed: 2,
        });
    }
    let (_, spread) = fit::mean_std(&curve.mean);
    let ms: f64 = curve.stderr.iter().map(|e| e * e).sum::<f64>() / curve.stderr.len() as f64;
    let typical = ms.sqrt();
    if typical == 0.0 {
        return Ok(if spread == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(spread / typical)
}

/// Where the hydrodynamic tail meets the finite-size plateau.
#[derive(Debug, Clone)]
pub struct PlateauOnset {
    /// Amplitude A of the A t^{-2/3} tail.
    pub amplitude: f64,
    /// Late-time magnetization plateau.
    pub plateau: f64,
    /// Crossing time (A / plateau)^{3/2}.
    pub onset: f64,
}

/// Estimate when the magnetization decay stops: pin the tail amplitude at
/// fixed exponent -2/3 over a mid-time range, average the late-time
/// plateau, and intersect the two.
pub fn estimate_plateau_onset(curve: &MagnetizationCurve) -> Result<PlateauOnset, TransportError> {
    let mut log_sum = 0.0;
    let mut count = 0usize;
    for (t, y) in curve.times.iter().zip(&curve.mean) {
        if *t >= AMPLITUDE_FIT_RANGE.0 && *t <= AMPLITUDE_FIT_RANGE.1 && *y > 0.0 {
            log_sum += y.ln() - HYDRO_EXPONENT * t.ln();
            count += 1;
        }
    }
    if count < 3 {
        return Err(TransportError::EmptyRange);
    }
    let amplitude = (log_sum / count as f64).exp();

    let late: Vec<f64> = curve
        .times
        .iter()
        .zip(&curve.mean)
        .filter(|(t, _)| **t >= PLATEAU_TIME)
        .map(|(_, y)| *y)
        .collect();
    if late.is_empty() {
        return Err(TransportError::EmptyRange);
    }
    let plateau = late.iter().sum::<f64>() / late.len() as f64;
    if plateau <= 0.0 {
        return Err(TransportError::BadPlateau);
    }
    let onset = (amplitude / plateau).powf(1.0 / -HYDRO_EXPONENT);
    Ok(PlateauOnset {
        amplitude,
        plateau,
        onset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::StateVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn schedule_hits_both_endpoints() {
        let s = build_schedule(0.5, 7.0, 2).unwrap();
        assert_eq!(s.times, vec![0.5, 7.0]);
        assert_eq!(s.deltas, vec![6.5]);

        let s = build_schedule(0.01, 126.0, 4096).unwrap();
        assert_eq!(s.times.len(), 4096);
        assert!((s.times[0] - 0.01).abs() < 1e-12);
        assert!((s.times[4095] - 126.0).abs() / 126.0 < 1e-9);
        let total: f64 = 0.01 + s.deltas.iter().sum::<f64>();
        assert!((total - 126.0).abs() / 126.0 < 1e-9);
    }

    #[test]
    fn schedule_rejects_bad_bounds() {
        assert!(build_schedule(0.0, 1.0, 8).is_err());
        assert!(build_schedule(-0.1, 1.0, 8).is_err());
        assert!(build_schedule(2.0, 1.0, 8).is_err());
        assert!(build_schedule(1.0, 1.0, 8).is_err());
        assert!(build_schedule(0.1, 1.0, 1).is_err());
    }

    #[test]
    fn bond_matches_eigendecomposition_oracle() {
        // spectral form: phase exp(i 3 dt / 4) on the singlet projector,
        // exp(-i dt / 4) on the triplet projector
        for &dt in &[0.0, 0.3, 1.7, -0.9] {
            let got = bond_matrix(dt);
            let s = Complex64::from_polar(1.0, 0.75 * dt);
            let t = Complex64::from_polar(1.0, -0.25 * dt);
            let half = c(0.5, 0.0);
            let mut want = [[c(0.0, 0.0); 4]; 4];
            want[0][0] = t;
            want[3][3] = t;
            want[1][1] = half * (s + t);
            want[2][2] = half * (s + t);
            want[1][2] = half * (t - s);
            want[2][1] = half * (t - s);
            for r in 0..4 {
                for col in 0..4 {
                    assert!(
                        (got[r][col] - want[r][col]).norm() < 1e-10,
                        "dt={dt} entry ({r},{col})"
                    );
                }
            }
        }
    }

    #[test]
    fn scalar_bond_agrees_with_generic_gate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = StateVector::haar_random(4, &mut rng).unwrap();
        let mut b = a.clone();
        let dt = 0.42;
        apply_bond_scalar(a.amplitudes_mut(), 3, 0, &BondCoeffs::new(dt));
        b.apply_2q(&bond_unitary(dt, 3, 0)).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn trotter_rejects_bad_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut odd = StateVector::haar_random(5, &mut rng).unwrap();
        assert!(matches!(
            trotter_step(&mut odd, 0.1),
            Err(TransportError::BadChain { qubits: 5 })
        ));
        let mut short = StateVector::haar_random(2, &mut rng).unwrap();
        assert!(trotter_step(&mut short, 0.1).is_err());
    }

    #[test]
    fn zero_step_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reference = StateVector::haar_random(6, &mut rng).unwrap();
        let mut state = reference.clone();
        trotter_step(&mut state, 0.0).unwrap();
        for (x, y) in state.amplitudes().iter().zip(reference.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn step_conserves_norm_and_total_sz() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = StateVector::haar_random(6, &mut rng).unwrap();
        let total_z = |s: &StateVector| -> f64 { (0..6).map(|q| s.expect_z(q).unwrap()).sum() };
        let before = total_z(&state);
        for i in 0..50 {
            trotter_step(&mut state, 0.03 + 0.01 * (i as f64 % 7.0)).unwrap();
        }
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((total_z(&state) - before).abs() < 1e-10);
    }

    #[test]
    fn halving_steps_quarters_the_error() {
        // second-order splitting: magnetization error at fixed horizon
        // shrinks about 4x when the grid is doubled
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let init = initial_state(6, true, &mut rng).unwrap();
        let run = |points: usize| -> f64 {
            let schedule = build_schedule(0.02, 4.0, points).unwrap();
            let mut s = init.clone();
            for dt in schedule.step_sizes() {
                trotter_step(&mut s, dt).unwrap();
            }
            s.expect_z(0).unwrap()
        };
        let (m1, m2, m4) = (run(48), run(96), run(192));
        let ratio = (m1 - m2).abs() / (m2 - m4).abs();
        assert!(
            (2.8..=5.5).contains(&ratio),
            "convergence ratio {ratio}, diffs {} {}",
            m1 - m2,
            m2 - m4
        );
    }

    #[test]
    fn windowed_dissimilarity_of_constant_stream_is_zero() {
        let rows = vec![0b1010usize; 32];
        let scores = windowed_dissimilarity(4, &rows, 8).unwrap();
        assert_eq!(scores.len(), 4);
        for s in scores {
            assert_eq!(s, 0.0);
        }
        assert!(windowed_dissimilarity(4, &rows, 5).is_err());
        assert!(windowed_dissimilarity(4, &rows, 1).is_err());
    }

    #[test]
    fn batched_run_matches_per_state_evolution() {
        // 5 live lanes exercise the padding path
        let config = TransportConfig {
            qubits: 6,
            with_reference: true,
            experiments: 5,
            window: 8,
            seed: 99,
        };
        let schedule = build_schedule(0.05, 3.0, 24).unwrap();
        let out = run_windowed_dissimilarity(&config, &schedule).unwrap();

        // same thing with the public single-state path
        let mut mags = vec![vec![]; config.experiments];
        let mut window_scores = vec![vec![]; config.experiments];
        for e in 0..config.experiments {
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(config.seed, e as u64));
            let mut state = initial_state(config.qubits, true, &mut rng).unwrap();
            mags[e].push(state.expect_z(0).unwrap() / 2.0);
            let mut rows = Vec::new();
            for dt in schedule.step_sizes() {
                trotter_step(&mut state, dt).unwrap();
                mags[e].push(state.expect_z(0).unwrap() / 2.0);
                let bits = state.sample_bitstring(&mut rng).unwrap();
                rows.push(
                    bits.iter()
                        .enumerate()
                        .fold(0usize, |acc, (q, b)| acc | (usize::from(*b) << q)),
                );
            }
            window_scores[e] = windowed_dissimilarity(config.qubits, &rows, config.window).unwrap();
        }

        for (w, t) in out.dissimilarity.window_times.iter().enumerate() {
            let lo = schedule.times[w * config.window];
            let hi = schedule.times[(w + 1) * config.window - 1];
            assert!((t - (lo * hi).sqrt()).abs() < 1e-12);
            let mean: f64 = window_scores.iter().map(|s| s[w]).sum::<f64>() / 5.0;
            assert!(
                (out.dissimilarity.mean[w] - mean).abs() < 1e-12,
                "window {w}: batched {} vs scalar {}",
                out.dissimilarity.mean[w],
                mean
            );
        }
        for (i, t) in out.magnetization.times.iter().enumerate() {
            let mean: f64 = mags.iter().map(|m| m[i]).sum::<f64>() / 5.0;
            assert!(
                (out.magnetization.mean[i] - mean).abs() < 1e-10,
                "time {t}: batched {} vs scalar {}",
                out.magnetization.mean[i],
                mean
            );
        }
        assert_eq!(out.magnetization.mean[0], 0.5);
    }

    #[test]
    fn magnetization_run_starts_at_exact_half() {
        let config = TransportConfig {
            qubits: 4,
            with_reference: true,
            experiments: 3,
            window: 4,
            seed: 5,
        };
        let schedule = build_schedule(0.1, 1.0, 8).unwrap();
        let curve = run_magnetization(&config, &schedule).unwrap();
        assert_eq!(curve.times[0], 0.0);
        assert_eq!(curve.mean[0], 0.5);
        assert_eq!(curve.stderr[0], 0.0);
        assert_eq!(curve.times.len(), 9);
    }

    fn synthetic_curve(times: Vec<f64>, mean: Vec<f64>, noise: f64) -> MonitoringCurve {
        let n = mean.len();
        MonitoringCurve {
            window_times: times,
            mean,
            std: vec![noise; n],
            stderr: vec![noise; n],
        }
    }

    #[test]
    fn transition_detector_finds_a_step() {
        let schedule = build_schedule(0.05, 50.0, 64).unwrap();
        let times = schedule.times.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mean: Vec<f64> = times
            .iter()
            .map(|t| {
                let base = if *t < 0.8 { 0.05 } else { 0.15 };
                base + 1e-4 * (rng.gen::<f64>() - 0.5)
            })
            .collect();
        let report = detect_transition(&synthetic_curve(times, mean, 1e-4)).unwrap();
        let t = report.time.expect("step should be detected");
        assert!((0.4..=1.6).contains(&t), "detected at {t}");
    }

    #[test]
    fn transition_detector_stays_quiet_on_flat_noise() {
        let schedule = build_schedule(0.05, 50.0, 64).unwrap();
        let times = schedule.times.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mean: Vec<f64> = times
            .iter()
            .map(|_| 0.1 + 1e-3 * (rng.gen::<f64>() - 0.5))
            .collect();
        let report = detect_transition(&synthetic_curve(times, mean, 1e-3)).unwrap();
        assert!(report.time.is_none(), "false alarm at {:?}", report.time);
    }

    #[test]
    fn flatness_separates_flat_from_trending() {
        let schedule = build_schedule(0.05, 50.0, 64).unwrap();
        let times = schedule.times.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let flat: Vec<f64> = times
            .iter()
            .map(|_| 0.1 + 1e-3 * (rng.gen::<f64>() - 0.5))
            .collect();
        let trended: Vec<f64> = times.iter().map(|t| 0.1 + 0.02 * t.ln()).collect();
        let noise = 1e-3 / 12f64.sqrt();
        let f1 = flatness_statistic(&synthetic_curve(times.clone(), flat, noise)).unwrap();
        let f2 = flatness_statistic(&synthetic_curve(times, trended, noise)).unwrap();
        assert!(f1 < 3.0, "flat curve scored {f1}");
        assert!(f2 > 10.0, "trended curve scored {f2}");
    }

    #[test]
    fn plateau_onset_recovers_synthetic_crossing() {
        // crossing at (0.4/0.05)^{3/2} ~ 22.6, inside the grid and ahead
        // of the plateau-average region
        let schedule = build_schedule(0.05, 60.0, 256).unwrap();
        let amplitude = 0.4_f64;
        let plateau = 0.05;
        let expected = (amplitude / plateau).powf(1.5);
        let mean: Vec<f64> = schedule
            .times
            .iter()
            .map(|t| (amplitude * t.powf(-2.0 / 3.0)).max(plateau))
            .collect();
        let mut times = vec![0.0];
        times.extend_from_slice(&schedule.times);
        let mut full = vec![0.5];
        full.extend(mean);
        let curve = MagnetizationCurve {
            stderr: vec![0.0; times.len()],
            times,
            mean: full,
        };
        let est = estimate_plateau_onset(&curve).unwrap();
        assert!(
            (est.onset - expected).abs() / expected < 0.05,
            "onset {} vs expected {expected}",
            est.onset
        );
        assert!((est.amplitude - amplitude).abs() / amplitude < 0.02);
        assert!((est.plateau - plateau).abs() / plateau < 0.02);
    }
}
