//! Periodically driven qubit chain: each drive cycle applies a diagonal
//! Ising-plus-field unitary followed by a nearly complete X rotation on every
//! qubit. Sampled bitstrings form qubit-by-cycle grids whose dissimilarity
//! locates the breakdown of period-2 order as the rotation error grows.

use crate::fit::{self, Line};
use crate::grid::{grid_dissimilarity, Filter, SpaceTimeGrid};
use crate::qsim::{rx, rz, QsimError, StateVector, TwoQubitUnitary};
use crate::seeding::task_seed;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

pub const COUPLING_LO: f64 = -0.75 * PI;
pub const COUPLING_HI: f64 = -0.25 * PI;
pub const FIELD_LO: f64 = -PI;
pub const FIELD_HI: f64 = PI;

#[derive(Debug, Error, PartialEq)]
pub enum DtcError {
    #[error("flip imperfection {0} outside [0, 0.5]")]
    BadEpsilon(f64),
    #[error("coupling {index} = {value} outside [{COUPLING_LO}, {COUPLING_HI}]")]
    BadCoupling { index: usize, value: f64 },
    #[error("field {index} = {value} outside [{FIELD_LO}, {FIELD_HI}]")]
    BadField { index: usize, value: f64 },
    #[error("parameter shapes inconsistent for {qubits} qubits")]
    BadShape { qubits: usize },
    #[error("need at least one cycle")]
    NoCycles,
    #[error(
        "record has {got} cycles, step {step} requested (steps count completed cycles from 1)"
    )]
    StepOutOfRange { step: usize, got: usize },
    #[error("bitstring lengths differ: {a} vs {b}")]
    HammingLengthMismatch { a: usize, b: usize },
    #[error("curve needs at least {needed} points inside window [{lo}, {hi}]")]
    SparseWindow { lo: f64, hi: f64, needed: usize },
    #[error(transparent)]
    Fit(#[from] fit::FitError),
    #[error(transparent)]
    Sim(#[from] QsimError),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// One circuit instance: couplings and fields drawn once and reused for every
/// cycle, plus the imperfect-flip parameter and the starting bitstring.
#[derive(Debug, Clone)]
pub struct DisorderRealization {
    pub couplings: Vec<f64>,
    pub fields: Vec<f64>,
    pub epsilon: f64,
    pub initial_bits: Vec<u8>,
}

impl DisorderRealization {
    pub fn random(qubits: usize, epsilon: f64, rng: &mut impl Rng) -> DisorderRealization {
        let couplings = (0..qubits.saturating_sub(1))
            .map(|_| rng.gen_range(COUPLING_LO..=COUPLING_HI))
            .collect();
        let fields = (0..qubits)
            .map(|_| rng.gen_range(FIELD_LO..=FIELD_HI))
            .collect();
        let initial_bits = (0..qubits).map(|_| rng.gen_range(0..=1u8)).collect();
        DisorderRealization {
            couplings,
            fields,
            epsilon,
            initial_bits,
        }
    }

    pub fn qubits(&self) -> usize {
        self.initial_bits.len()
    }

    pub fn validate(&self) -> Result<(), DtcError> {
        let l = self.qubits();
        if l == 0 || self.couplings.len() != l - 1 || self.fields.len() != l {
            return Err(DtcError::BadShape { qubits: l });
        }
        if !(0.0..=0.5).contains(&self.epsilon) {
            return Err(DtcError::BadEpsilon(self.epsilon));
        }
        for (index, &value) in self.couplings.iter().enumerate() {
            if !(COUPLING_LO..=COUPLING_HI).contains(&value) {
                return Err(DtcError::BadCoupling { index, value });
            }
        }
        for (index, &value) in self.fields.iter().enumerate() {
            if !(FIELD_LO..=FIELD_HI).contains(&value) {
                return Err(DtcError::BadField { index, value });
            }
        }
        Ok(())
    }
}

/// Compiled form of one circuit: the Ising-plus-field factor is diagonal in
/// the computational basis, so it is stored as a phase per amplitude index and
/// applied with one elementwise pass instead of L+L-1 gates.
pub struct FloquetCircuit {
    qubits: usize,
    phases: Vec<Complex64>,
    flip: [[Complex64; 2]; 2],
}

impl FloquetCircuit {
    pub fn compile(d: &DisorderRealization) -> Result<FloquetCircuit, DtcError> {
        d.validate()?;
        let l = d.qubits();
        let dim = 1usize << l;
        let mut phases = Vec::with_capacity(dim);
        for index in 0..dim {
            // spin value +1 for bit 0, -1 for bit 1
            let z = |q: usize| 1.0 - 2.0 * ((index >> q) & 1) as f64;
            let mut energy = 0.0;
            for (i, &j) in d.couplings.iter().enumerate() {
                energy += j * z(i) * z(i + 1);
            }
            for (i, &h) in d.fields.iter().enumerate() {
                energy += h * z(i);
            }
            phases.push(Complex64::from_polar(1.0, -0.5 * energy));
        }
        Ok(FloquetCircuit {
            qubits: l,
            phases,
            flip: rx((1.0 - d.epsilon) * PI),
        })
    }

    /// One drive cycle: diagonal phases first, then the imperfect flip on
    /// every qubit.
    pub fn apply_cycle(&self, state: &mut StateVector) -> Result<(), DtcError> {
        if state.qubits() != self.qubits {
            return Err(DtcError::BadShape {
                qubits: state.qubits(),
            });
        }
        for (a, p) in state.amplitudes_mut().iter_mut().zip(&self.phases) {
            *a *= p;
        }
        for q in 0..self.qubits {
            state.apply_1q_unchecked(&self.flip, q);
        }
        Ok(())
    }
}

/// Uncompiled single cycle, matching the contract signature.
pub fn apply_floquet_cycle(
    state: &mut StateVector,
    d: &DisorderRealization,
) -> Result<(), DtcError> {
    FloquetCircuit::compile(d)?.apply_cycle(state)
}

/// Same cycle built from elementary gates: each two-spin phase factor becomes
/// CNOT / z-rotation / CNOT, each field term a z-rotation. Used to check the
/// compiled diagonal against an independent construction.
pub fn apply_floquet_cycle_gates(
    state: &mut StateVector,
    d: &DisorderRealization,
) -> Result<(), DtcError> {
    d.validate()?;
    let l = d.qubits();
    if state.qubits() != l {
        return Err(DtcError::BadShape {
            qubits: state.qubits(),
        });
    }
    for (i, &j) in d.couplings.iter().enumerate() {
        state.apply_2q(&TwoQubitUnitary::cnot(i, i + 1))?;
        state.apply_1q(&rz(j), i + 1)?;
        state.apply_2q(&TwoQubitUnitary::cnot(i, i + 1))?;
    }
    for (i, &h) in d.fields.iter().enumerate() {
        state.apply_1q(&rz(h), i)?;
    }
    let flip = rx((1.0 - d.epsilon) * PI);
    for q in 0..l {
        state.apply_1q(&flip, q)?;
    }
    Ok(())
}

/// Sampled bitstrings, one row per completed cycle.
#[derive(Debug, Clone)]
pub struct BitstringRecord {
    pub initial_bits: Vec<u8>,
    pub rows: Vec<Vec<u8>>,
}

/// Evolve one circuit for `cycles` cycles, sampling one bitstring after each
/// cycle without collapsing the state.
pub fn run_circuit(
    d: &DisorderRealization,
    cycles: usize,
    rng: &mut impl Rng,
) -> Result<BitstringRecord, DtcError> {
    if cycles == 0 {
        return Err(DtcError::NoCycles);
    }
    let circuit = FloquetCircuit::compile(d)?;
    let mut state = StateVector::basis_state(d.qubits(), &d.initial_bits)?;
    let mut rows = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        circuit.apply_cycle(&mut state)?;
        rows.push(state.sample_bitstring(rng)?);
    }
    Ok(BitstringRecord {
        initial_bits: d.initial_bits.clone(),
        rows,
    })
}

pub fn hamming_distance(a: &[u8], b: &[u8]) -> Result<usize, DtcError> {
    if a.len() != b.len() {
        return Err(DtcError::HammingLengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Normalized histograms of Hamming distance from the initial bitstring at
/// two time steps, over an ensemble of records. A step counts completed
/// cycles, starting at 1, so an even step compares against an even number of
/// flips. Returns (histogram at steps.0, histogram at steps.1), each summing
/// to 1.
pub fn hamming_histogram(
    records: &[BitstringRecord],
    steps: (usize, usize),
) -> Result<(Vec<f64>, Vec<f64>), DtcError> {
    let l = records.first().map(|r| r.initial_bits.len()).unwrap_or(0);
    let mut hist = (vec![0.0; l + 1], vec![0.0; l + 1]);
    for r in records {
        for (step, out) in [(steps.0, &mut hist.0), (steps.1, &mut hist.1)] {
            let row = step.checked_sub(1).and_then(|s| r.rows.get(s)).ok_or(
                DtcError::StepOutOfRange {
                    step,
                    got: r.rows.len(),
                },
            )?;
            out[hamming_distance(&r.initial_bits, row)?] += 1.0;
        }
    }
    let n = records.len().max(1) as f64;
    for v in hist.0.iter_mut().chain(hist.1.iter_mut()) {
        *v /= n;
    }
    Ok(hist)
}

/// Bit rows to a qubit-by-cycle grid with 0/1 mapped to -1/+1.
pub fn record_to_grid(record: &BitstringRecord) -> SpaceTimeGrid {
    let l = record.initial_bits.len();
    let cycles = record.rows.len();
    SpaceTimeGrid::from_fn(
        l,
        cycles,
        |q, t| if record.rows[t][q] == 1 { 1.0 } else { -1.0 },
    )
    .expect("record is never empty")
}

#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Mean grid dissimilarity versus flip imperfection. Each realization draws
/// fresh disorder and a fresh random initial bitstring from a child seed, so
/// the curve is reproducible for a fixed master seed regardless of
/// parallelism.
pub fn dissimilarity_vs_epsilon(
    qubits: usize,
    epsilons: &[f64],
    realizations: usize,
    cycles: usize,
    master_seed: u64,
) -> Result<Vec<CurvePoint>, DtcError> {
    epsilons
        .iter()
        .enumerate()
        .map(|(ei, &epsilon)| {
            let one = |r: usize| -> Result<f64, DtcError> {
                let seed = task_seed(master_seed, (ei * realizations + r) as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let d = DisorderRealization::random(qubits, epsilon, &mut rng);
                let record = run_circuit(&d, cycles, &mut rng)?;
                let report = grid_dissimilarity(&record_to_grid(&record), Filter::square())?;
                Ok(report.total)
            };
            #[cfg(feature = "parallel")]
            let scores: Result<Vec<f64>, DtcError> =
                (0..realizations).into_par_iter().map(one).collect();
            #[cfg(not(feature = "parallel"))]
            let scores: Result<Vec<f64>, DtcError> = (0..realizations).map(one).collect();
            let scores = scores?;
            let (mean, std) = fit::mean_std(&scores);
            Ok(CurvePoint {
                epsilon,
                mean,
                stderr: std / (realizations as f64).sqrt(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct CriticalPoint {
    pub epsilon_c: f64,
    pub ordered_fit: Line,
    pub disordered_fit: Line,
    pub ordered_points: usize,
    pub disordered_points: usize,
}

fn window_fit(curve: &[CurvePoint], lo: f64, hi: f64) -> Result<(Line, usize), DtcError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in curve {
        if p.epsilon >= lo - 1e-12 && p.epsilon <= hi + 1e-12 {
            xs.push(p.epsilon);
            ys.push(p.mean);
        }
    }
    if xs.len() < 3 {
        return Err(DtcError::SparseWindow { lo, hi, needed: 3 });
    }
    Ok((fit::fit_line(&xs, &ys)?, xs.len()))
}

/// Critical imperfection from the crossing of straight-line fits deep inside
/// the ordered (rapid-growth) and disordered (flat) regions of the curve.
pub fn estimate_epsilon_c(
    curve: &[CurvePoint],
    ordered_window: (f64, f64),
    disordered_window: (f64, f64),
) -> Result<CriticalPoint, DtcError> {
    let (ordered_fit, ordered_points) = window_fit(curve, ordered_window.0, ordered_window.1)?;
    let (disordered_fit, disordered_points) =
        window_fit(curve, disordered_window.0, disordered_window.1)?;
    let epsilon_c = fit::crossing(&ordered_fit, &disordered_fit)?;
    Ok(CriticalPoint {
        epsilon_c,
        ordered_fit,
        disordered_fit,
        ordered_points,
        disordered_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn random_realization_respects_ranges() {
        let mut r = rng(1);
        for _ in 0..50 {
            let d = DisorderRealization::random(8, 0.1, &mut r);
            d.validate().unwrap();
        }
    }

    #[test]
    fn validation_catches_out_of_range_parameters() {
        let mut r = rng(2);
        let mut d = DisorderRealization::random(4, 0.1, &mut r);
        d.epsilon = 0.6;
        assert_eq!(d.validate(), Err(DtcError::BadEpsilon(0.6)));
        d.epsilon = 0.1;
        d.couplings[1] = 0.3;
        assert!(matches!(
            d.validate(),
            Err(DtcError::BadCoupling { index: 1, .. })
        ));
        d.couplings[1] = -0.5 * PI;
        d.fields[0] = 4.0;
        assert!(matches!(
            d.validate(),
            Err(DtcError::BadField { index: 0, .. })
        ));
    }

    #[test]
    fn perfect_flip_alternates_exactly() {
        let mut r = rng(3);
        for _ in 0..10 {
            let d = DisorderRealization::random(6, 0.0, &mut r);
            let record = run_circuit(&d, 12, &mut r).unwrap();
            let flipped: Vec<u8> = d.initial_bits.iter().map(|b| 1 - b).collect();
            for (t, row) in record.rows.iter().enumerate() {
                let expected = if t % 2 == 0 {
                    &flipped
                } else {
                    &d.initial_bits
                };
                assert_eq!(row, expected, "cycle {t}");
            }
        }
    }

    #[test]
    fn perfect_flip_grid_scores_zero_dissimilarity() {
        let mut r = rng(4);
        let d = DisorderRealization::random(16, 0.0, &mut r);
        let record = run_circuit(&d, 16, &mut r).unwrap();
        let report = grid_dissimilarity(&record_to_grid(&record), Filter::square()).unwrap();
        assert_eq!(report.total, 0.0);
    }

    #[test]
    fn compiled_cycle_matches_gate_construction() {
        let mut r = rng(5);
        for _ in 0..5 {
            let d = DisorderRealization::random(5, 0.17, &mut r);
            let mut a = StateVector::haar_random(5, &mut r).unwrap();
            let mut b = a.clone();
            apply_floquet_cycle(&mut a, &d).unwrap();
            apply_floquet_cycle_gates(&mut b, &d).unwrap();
            let diff = a
                .amplitudes()
                .iter()
                .zip(b.amplitudes())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0f64, f64::max);
            assert!(diff < 1e-12, "constructions disagree by {diff}");
        }
    }

    #[test]
    fn hamming_distance_matches_loop_oracle() {
        let mut r = rng(6);
        for _ in 0..100 {
            let a: Vec<u8> = (0..16).map(|_| r.gen_range(0..=1)).collect();
            let b: Vec<u8> = (0..16).map(|_| r.gen_range(0..=1)).collect();
            let mut expected = 0;
            for i in 0..16 {
                if a[i] != b[i] {
                    expected += 1;
                }
            }
            assert_eq!(hamming_distance(&a, &b).unwrap(), expected);
            assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
            let comp: Vec<u8> = a.iter().map(|x| 1 - x).collect();
            assert_eq!(hamming_distance(&a, &comp).unwrap(), 16);
        }
        assert!(hamming_distance(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn histograms_at_zero_imperfection_are_parity_deltas() {
        let mut r = rng(7);
        let records: Vec<BitstringRecord> = (0..20)
            .map(|_| {
                let d = DisorderRealization::random(8, 0.0, &mut r);
                run_circuit(&d, 64, &mut r).unwrap()
            })
            .collect();
        // step 62 = 62 completed flips (even) -> back at the initial bits;
        // step 63 -> the complement
        let (even, odd) = hamming_histogram(&records, (62, 63)).unwrap();
        assert!((even[0] - 1.0).abs() < 1e-12);
        assert!((odd[8] - 1.0).abs() < 1e-12);
        assert!((even.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((odd.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(hamming_histogram(&records, (0, 1)).is_err());
        assert!(hamming_histogram(&records, (64, 65)).is_err());
    }

    #[test]
    fn curve_is_reproducible_and_grows_from_ordered_side() {
        let eps = [0.02, 0.3];
        let a = dissimilarity_vs_epsilon(8, &eps, 24, 16, 99).unwrap();
        let b = dissimilarity_vs_epsilon(8, &eps, 24, 16, 99).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean, y.mean);
            assert_eq!(x.stderr, y.stderr);
        }
        assert!(
            a[0].mean < a[1].mean,
            "ordered {} vs disordered {}",
            a[0].mean,
            a[1].mean
        );
    }

    #[test]
    fn crossing_estimator_on_synthetic_curve() {
        let curve: Vec<CurvePoint> = (0..=50)
            .map(|i| {
                let epsilon = i as f64 * 0.01;
                let mean = if epsilon < 0.2 { 2.0 * epsilon } else { 0.4 };
                CurvePoint {
                    epsilon,
                    mean,
                    stderr: 0.0,
                }
            })
            .collect();
        let cp = estimate_epsilon_c(&curve, (0.04, 0.10), (0.25, 0.40)).unwrap();
        assert!((cp.epsilon_c - 0.2).abs() < 1e-12);
        assert_eq!(cp.ordered_points, 7);
        assert_eq!(cp.disordered_points, 16);
    }

    #[test]
    fn sparse_window_is_an_error() {
        let curve = [CurvePoint {
            epsilon: 0.05,
            mean: 0.1,
            stderr: 0.0,
        }];
        assert!(matches!(
            estimate_epsilon_c(&curve, (0.0, 0.1), (0.2, 0.3)),
            Err(DtcError::SparseWindow { .. })
        ));
    }
}
