//! Dense statevector simulator for up to 24 qubits: one- and two-qubit
//! unitaries, Z expectations, and Born-rule bitstring sampling that leaves the
//! state untouched.
//!
//! Conventions, fixed once and used everywhere: qubit 0 is the least
//! significant bit of the amplitude index, |0> has Z expectation +1 (so the
//! spin-z value is +1/2), and bit 0/1 maps to grid value -1/+1.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum QsimError {
    #[error("qubit count {n} outside supported range 1..={MAX_QUBITS}")]
    BadQubitCount { n: usize },
    #[error("bitstring length {got} does not match qubit count {n}")]
    BitLengthMismatch { n: usize, got: usize },
    #[error("amplitude vector length {got} is not 2^{n}")]
    BadAmplitudeLength { n: usize, got: usize },
    #[error("target qubit {target} out of range for {n} qubits")]
    TargetOutOfRange { target: usize, n: usize },
    #[error("two-qubit gate targets must be distinct, got {target}")]
    DuplicateTargets { target: usize },
    #[error("matrix is not unitary (defect {defect:.2e})")]
    NonUnitary { defect: f64 },
    #[error("state norm {norm} deviates from 1 beyond tolerance")]
    CorruptedState { norm: f64 },
}

#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// 4x4 unitary acting on an ordered qubit pair. The matrix is indexed by the
/// two-bit value (bit of `targets.1` << 1) | (bit of `targets.0`), i.e.
/// `targets.1` is the high bit of the pair, matching the ket |q1 q0>.
#[derive(Debug, Clone)]
pub struct TwoQubitUnitary {
    pub matrix: [[Complex64; 4]; 4],
    pub targets: (usize, usize),
}

impl TwoQubitUnitary {
    pub fn new(matrix: [[Complex64; 4]; 4], low: usize, high: usize) -> Self {
        TwoQubitUnitary {
            matrix,
            targets: (low, high),
        }
    }

    /// CNOT in the usual sense: flips `target` when `control` is 1.
    pub fn cnot(control: usize, target: usize) -> Self {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        // Basis order |control target>: flip target on rows 10 and 11.
        TwoQubitUnitary {
            matrix: [[l, o, o, o], [o, l, o, o], [o, o, o, l], [o, o, l, o]],
            targets: (target, control),
        }
    }
}

fn unitary_defect_2(u: &[[Complex64; 2]; 2]) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let mut dot = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                dot += u[k][r].conj() * u[k][c];
            }
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

fn unitary_defect_4(u: &[[Complex64; 4]; 4]) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let mut dot = Complex64::new(0.0, 0.0);
            for k in 0..4 {
                dot += u[k][r].conj() * u[k][c];
            }
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

/// Spread the bits of `k` so that bit position `p` of the result is zero.
#[inline]
pub(crate) fn insert_zero_bit(k: usize, p: usize) -> usize {
    let mask = (1usize << p) - 1;
    ((k & !mask) << 1) | (k & mask)
}

impl StateVector {
    fn check_n(n: usize) -> Result<(), QsimError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(QsimError::BadQubitCount { n });
        }
        Ok(())
    }

    /// Computational basis state; `bits[q]` is the value of qubit q.
    pub fn basis_state(n: usize, bits: &[u8]) -> Result<StateVector, QsimError> {
        Self::check_n(n)?;
        if bits.len() != n {
            return Err(QsimError::BitLengthMismatch { n, got: bits.len() });
        }
        let mut index = 0usize;
        for (q, &b) in bits.iter().enumerate() {
            if b != 0 {
                index |= 1 << q;
            }
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Exact Haar-random pure state: i.i.d. standard complex Gaussian entries,
    /// normalized. Unitary invariance of the Gaussian makes the result Haar.
    pub fn haar_random(n: usize, rng: &mut impl Rng) -> Result<StateVector, QsimError> {
        Self::check_n(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for _ in 0..1usize << n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            amps.push(Complex64::new(re, im));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Ok(StateVector { n, amps })
    }

    /// Tensor product; `self` keeps the low qubits, `other` supplies the high ones.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, QsimError> {
        let n = self.n + other.n;
        Self::check_n(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for &hi in &other.amps {
            for &lo in &self.amps {
                amps.push(hi * lo);
            }
        }
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<StateVector, QsimError> {
        Self::check_n(n)?;
        if amps.len() != 1 << n {
            return Err(QsimError::BadAmplitudeLength { n, got: amps.len() });
        }
        let state = StateVector { n, amps };
        let norm = state.norm_sqr().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(QsimError::CorruptedState { norm });
        }
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_target(&self, target: usize) -> Result<(), QsimError> {
        if target >= self.n {
            return Err(QsimError::TargetOutOfRange { target, n: self.n });
        }
        Ok(())
    }

    pub fn apply_1q(&mut self, u: &[[Complex64; 2]; 2], target: usize) -> Result<(), QsimError> {
        self.check_target(target)?;
        let defect = unitary_defect_2(u);
        if defect > 1e-10 {
            return Err(QsimError::NonUnitary { defect });
        }
        self.apply_1q_unchecked(u, target);
        Ok(())
    }

    pub(crate) fn apply_1q_unchecked(&mut self, u: &[[Complex64; 2]; 2], target: usize) {
        let stride = 1usize << target;
        let dim = self.amps.len();
        let (u00, u01, u10, u11) = (u[0][0], u[0][1], u[1][0], u[1][1]);
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let a = self.amps[i];
                let b = self.amps[i + stride];
                self.amps[i] = u00 * a + u01 * b;
                self.amps[i + stride] = u10 * a + u11 * b;
            }
            base += stride << 1;
        }
    }

    pub fn apply_2q(&mut self, gate: &TwoQubitUnitary) -> Result<(), QsimError> {
        let (a, b) = gate.targets;
        self.check_target(a)?;
        self.check_target(b)?;
        if a == b {
            return Err(QsimError::DuplicateTargets { target: a });
        }
        let defect = unitary_defect_4(&gate.matrix);
        if defect > 1e-12 {
            return Err(QsimError::NonUnitary { defect });
        }
        self.apply_2q_unchecked(&gate.matrix, a, b);
        Ok(())
    }

    pub(crate) fn apply_2q_unchecked(&mut self, m: &[[Complex64; 4]; 4], low: usize, high: usize) {
        let (p1, p2) = if low < high { (low, high) } else { (high, low) };
        let s_low = 1usize << low;
        let s_high = 1usize << high;
        let groups = self.amps.len() >> 2;
        for k in 0..groups {
            let i = insert_zero_bit(insert_zero_bit(k, p1), p2);
            let idx = [i, i + s_low, i + s_high, i + s_low + s_high];
            let g = [
                self.amps[idx[0]],
                self.amps[idx[1]],
                self.amps[idx[2]],
                self.amps[idx[3]],
            ];
            for (r, &target) in idx.iter().enumerate() {
                self.amps[target] =
                    m[r][0] * g[0] + m[r][1] * g[1] + m[r][2] * g[2] + m[r][3] * g[3];
            }
        }
    }

    /// Z expectation on one qubit: +1 for |0>, -1 for |1>.
    pub fn expect_z(&self, target: usize) -> Result<f64, QsimError> {
        self.check_target(target)?;
        let mask = 1usize << target;
        let mut total = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if i & mask == 0 {
                total += p;
            } else {
                total -= p;
            }
        }
        Ok(total)
    }

    /// One Born-rule sample of all qubits. The state is not modified: this
    /// reproduces one-shot-per-run statistics without re-running the circuit.
    pub fn sample_bitstring(&self, rng: &mut impl Rng) -> Result<Vec<u8>, QsimError> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(QsimError::CorruptedState { norm });
        }
        let mut r: f64 = rng.gen::<f64>() * norm;
        let mut chosen = self.amps.len() - 1;
        for (i, a) in self.amps.iter().enumerate() {
            r -= a.norm_sqr();
            if r <= 0.0 {
                chosen = i;
                break;
            }
        }
        Ok((0..self.n).map(|q| ((chosen >> q) & 1) as u8).collect())
    }
}

/// R_x(theta) = exp(-i theta X / 2).
pub fn rx(theta: f64) -> [[Complex64; 2]; 2] {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

/// R_z(theta) = exp(-i theta Z / 2).
pub fn rz(theta: f64) -> [[Complex64; 2]; 2] {
    let half = theta / 2.0;
    [
        [Complex64::from_polar(1.0, -half), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, half)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Dense operator for a 1q gate via direct tensor placement.
    fn dense_1q(n: usize, u: &[[Complex64; 2]; 2], target: usize) -> Vec<Vec<Complex64>> {
        let dim = 1 << n;
        let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                if (i & !(1 << target)) == (j & !(1 << target)) {
                    let bi = (i >> target) & 1;
                    let bj = (j >> target) & 1;
                    m[i][j] = u[bi][bj];
                }
            }
        }
        m
    }

    fn dense_2q(n: usize, g: &TwoQubitUnitary) -> Vec<Vec<Complex64>> {
        let dim = 1 << n;
        let (lo, hi) = g.targets;
        let other_mask = !((1usize << lo) | (1usize << hi));
        let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                if (i & other_mask) == (j & other_mask) {
                    let pi = (((i >> hi) & 1) << 1) | ((i >> lo) & 1);
                    let pj = (((j >> hi) & 1) << 1) | ((j >> lo) & 1);
                    m[i][j] = g.matrix[pi][pj];
                }
            }
        }
        m
    }

    fn matvec(m: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
        m.iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn x_gate() -> [[Complex64; 2]; 2] {
        [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
    }

    #[test]
    fn basis_state_places_single_amplitude() {
        let s = StateVector::basis_state(1, &[0]).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        // |10>: qubit 1 set, qubit 0 clear -> index 2
        let s = StateVector::basis_state(2, &[0, 1]).unwrap();
        assert_eq!(s.amplitudes()[2], c(1.0, 0.0));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(StateVector::basis_state(2, &[0]).is_err());
        assert!(StateVector::basis_state(25, &[0; 25]).is_err());
    }

    #[test]
    fn haar_state_is_normalized_and_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = StateVector::haar_random(6, &mut rng).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let mean_p = s.amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>() / 64.0;
        assert!((mean_p - 1.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn haar_z_expectation_centered_with_predicted_variance() {
        // Over Haar states, <Z> has mean 0 and variance 1/(2^n + 1).
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 4;
        let draws = 2000;
        let zs: Vec<f64> = (0..draws)
            .map(|_| {
                StateVector::haar_random(n, &mut rng)
                    .unwrap()
                    .expect_z(2)
                    .unwrap()
            })
            .collect();
        let mean = zs.iter().sum::<f64>() / draws as f64;
        let var = zs.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (draws - 1) as f64;
        let predicted = 1.0 / (2f64.powi(n as i32) + 1.0);
        let sigma_mean = (predicted / draws as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma_mean, "mean {mean}");
        assert!(
            (var - predicted).abs() / predicted < 0.15,
            "var {var} vs {predicted}"
        );
    }

    #[test]
    fn x_flips_and_rz_only_phases() {
        let mut s = StateVector::basis_state(1, &[0]).unwrap();
        s.apply_1q(&x_gate(), 0).unwrap();
        assert!((s.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);

        let mut s = StateVector::basis_state(3, &[1, 0, 1]).unwrap();
        let before: Vec<f64> = s.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        s.apply_1q(&rz(0.73), 1).unwrap();
        let after: Vec<f64> = s.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn one_qubit_gate_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut s = StateVector::haar_random(3, &mut rng).unwrap();
            let u = rx(rng.gen::<f64>() * 6.0);
            let target = rng.gen_range(0..3);
            let expected = matvec(&dense_1q(3, &u, target), s.amplitudes());
            s.apply_1q(&u, target).unwrap();
            assert!(max_diff(s.amplitudes(), &expected) < 1e-12);
        }
    }

    #[test]
    fn rejects_non_unitary_gates() {
        let mut s = StateVector::basis_state(2, &[0, 0]).unwrap();
        let bad = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]];
        assert!(matches!(
            s.apply_1q(&bad, 0),
            Err(QsimError::NonUnitary { .. })
        ));
        let mut bad4 = TwoQubitUnitary::cnot(0, 1);
        bad4.matrix[3][2] = c(0.5, 0.0);
        assert!(matches!(
            s.apply_2q(&bad4),
            Err(QsimError::NonUnitary { .. })
        ));
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        // |10>: control (qubit 1) set, target (qubit 0) clear
        let mut s = StateVector::basis_state(2, &[0, 1]).unwrap();
        s.apply_2q(&TwoQubitUnitary::cnot(1, 0)).unwrap();
        assert!((s.amplitudes()[3] - c(1.0, 0.0)).norm() < 1e-15);
        // control clear: nothing happens
        let mut s = StateVector::basis_state(2, &[1, 0]).unwrap();
        s.apply_2q(&TwoQubitUnitary::cnot(1, 0)).unwrap();
        assert!((s.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_qubit_gate_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let mut s = StateVector::haar_random(4, &mut rng).unwrap();
            // random product of structured unitaries to get a generic 4x4
            let mut m = [[c(0.0, 0.0); 4]; 4];
            for (r, row) in m.iter_mut().enumerate() {
                row[r] = c(1.0, 0.0);
            }
            let gates: [[[Complex64; 2]; 2]; 2] =
                [rx(rng.gen::<f64>() * 6.0), rz(rng.gen::<f64>() * 6.0)];
            // m = (g0 on pair-low) * (g1 on pair-high), dense 4x4
            let mut full = [[c(0.0, 0.0); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let (il, ih) = (i & 1, i >> 1);
                    let (jl, jh) = (j & 1, j >> 1);
                    full[i][j] = gates[0][il][jl] * gates[1][ih][jh];
                }
            }
            let mut lo = rng.gen_range(0..4);
            let mut hi = rng.gen_range(0..4);
            if lo == hi {
                hi = (hi + 1) % 4;
            }
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut lo, &mut hi);
            }
            let gate = TwoQubitUnitary::new(full, lo, hi);
            let expected = matvec(&dense_2q(4, &gate), s.amplitudes());
            s.apply_2q(&gate).unwrap();
            assert!(max_diff(s.amplitudes(), &expected) < 1e-12);
        }
    }

    #[test]
    fn duplicate_targets_rejected() {
        let mut s = StateVector::basis_state(2, &[0, 0]).unwrap();
        let g = TwoQubitUnitary::cnot(1, 1);
        assert_eq!(
            s.apply_2q(&g),
            Err(QsimError::DuplicateTargets { target: 1 })
        );
    }

    #[test]
    fn gates_on_distinct_qubits_commute_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = StateVector::haar_random(5, &mut rng).unwrap();
        let u = rx(1.1);
        let v = rz(2.3);
        let mut ab = base.clone();
        ab.apply_1q(&u, 1).unwrap();
        ab.apply_1q(&v, 3).unwrap();
        let mut ba = base.clone();
        ba.apply_1q(&v, 3).unwrap();
        ba.apply_1q(&u, 1).unwrap();
        assert!(max_diff(ab.amplitudes(), ba.amplitudes()) < 1e-12);
    }

    #[test]
    fn inverse_gate_restores_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let base = StateVector::haar_random(4, &mut rng).unwrap();
        let mut s = base.clone();
        s.apply_1q(&rx(0.9), 2).unwrap();
        s.apply_1q(&rx(-0.9), 2).unwrap();
        assert!(max_diff(s.amplitudes(), base.amplitudes()) < 1e-12);
    }

    #[test]
    fn sampling_is_faithful_and_nondestructive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = StateVector::basis_state(3, &[1, 0, 1]).unwrap();
        for _ in 0..20 {
            assert_eq!(s.sample_bitstring(&mut rng).unwrap(), vec![1, 0, 1]);
        }

        // uniform superposition over 3 qubits
        let amp = c(1.0 / 8f64.sqrt(), 0.0);
        let u = StateVector::from_amplitudes(3, vec![amp; 8]).unwrap();
        let trials = 100_000;
        let mut counts = [0usize; 8];
        for _ in 0..trials {
            let bits = u.sample_bitstring(&mut rng).unwrap();
            let idx = bits[0] as usize | (bits[1] as usize) << 1 | (bits[2] as usize) << 2;
            counts[idx] += 1;
        }
        let p = 1.0 / 8.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for &count in &counts {
            let freq = count as f64 / trials as f64;
            assert!((freq - p).abs() < 5.0 * sigma, "freq {freq}");
        }
        // state untouched by sampling
        assert!((u.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_state_samples_only_correlated_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let amp = c(1.0 / 2f64.sqrt(), 0.0);
        let bell =
            StateVector::from_amplitudes(2, vec![amp, c(0.0, 0.0), c(0.0, 0.0), amp]).unwrap();
        for _ in 0..200 {
            let bits = bell.sample_bitstring(&mut rng).unwrap();
            assert_eq!(bits[0], bits[1]);
        }
    }

    #[test]
    fn expect_z_signs() {
        let zero = StateVector::basis_state(1, &[0]).unwrap();
        assert!((zero.expect_z(0).unwrap() - 1.0).abs() < 1e-15);
        let one = StateVector::basis_state(1, &[1]).unwrap();
        assert!((one.expect_z(0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_product_orders_qubits_low_to_high() {
        let lo = StateVector::basis_state(1, &[1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let hi = StateVector::haar_random(2, &mut rng).unwrap();
        let s = lo.tensor(&hi).unwrap();
        assert_eq!(s.qubits(), 3);
        // qubit 0 is |1> with certainty
        assert!((s.expect_z(0).unwrap() + 1.0).abs() < 1e-12);
        for (i, a) in s.amplitudes().iter().enumerate() {
            if i & 1 == 0 {
                assert_eq!(a.norm_sqr(), 0.0);
            }
        }
    }

    #[test]
    fn norm_survives_long_random_two_qubit_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut s = StateVector::haar_random(16, &mut rng).unwrap();
        let thetas: Vec<f64> = (0..8)
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        for step in 0..4096usize {
            let a = step % 16;
            let b = (a + 1) % 16;
            let theta = thetas[step % 8];
            let (c_, s_) = (theta.cos(), theta.sin());
            // a structured unitary: mixes |01> and |10>, phases elsewhere
            let m = [
                [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c(c_, 0.0), c(0.0, -s_), c(0.0, 0.0)],
                [c(0.0, 0.0), c(0.0, -s_), c(c_, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            ];
            s.apply_2q_unchecked(&m, a, b);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }
}
