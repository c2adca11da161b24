//! Stabilizer/destabilizer tableau with native Pauli-product measurement.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliGroupBasis, PauliString};

/// Per-shot random source: ChaCha8 keyed by `seed`, on stream `stream_id`.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen::<bool>()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub index: usize,
    pub operator: PauliString,
    /// `+1` or `-1`.
    pub outcome: i8,
    pub deterministic: bool,
}

impl MeasurementRecord {
    /// The outcome as a bit: `+1 → 0`, `-1 → 1`.
    pub fn bit(&self) -> bool {
        self.outcome < 0
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerState {
    n: usize,
    stabilizers: Vec<PauliString>,
    destabilizers: Vec<PauliString>,
    next_index: usize,
}

impl StabilizerState {
    /// The state `|0…0⟩`.
    pub fn reset_all_zero(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("stabilizer state needs at least one qubit"));
        }
        Ok(StabilizerState {
            n,
            stabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect(),
            destabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli::X)).collect(),
            next_index: 0,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    pub fn measurements_taken(&self) -> usize {
        self.next_index
    }

    fn check_op(&self, op: &PauliString) -> Result<()> {
        if op.num_qubits() != self.n {
            return Err(Error::Dimension {
                left: self.n,
                right: op.num_qubits(),
            });
        }
        if !op.is_hermitian() {
            return Err(Error::NotHermitian(op.to_string()));
        }
        Ok(())
    }

    /// The `±1` value of `op` if it is determined by the state.
    pub fn peek(&self, op: &PauliString) -> Result<Option<i8>> {
        self.check_op(op)?;
        if self.stabilizers.iter().any(|s| !s.commutes_unchecked(op)) {
            return Ok(None);
        }
        Ok(Some(self.deterministic_sign(op)))
    }

    /// For `op` in the stabilizer group up to sign, rebuilds it from the
    /// stabilizers picked out by the anticommuting destabilizers.
    fn deterministic_sign(&self, op: &PauliString) -> i8 {
        let mut prod = PauliString::identity(self.n);
        for (d, s) in self.destabilizers.iter().zip(&self.stabilizers) {
            if !d.commutes_unchecked(op) {
                prod.mul_assign_right(s);
            }
        }
        debug_assert!(prod.same_up_to_phase(op), "operator not in stabilizer group");
        if prod.phase() == op.phase() {
            1
        } else {
            debug_assert_eq!((prod.phase() + 2) & 3, op.phase());
            -1
        }
    }

    pub fn measure(&mut self, op: &PauliString, rng: &mut RandomStream) -> Result<MeasurementRecord> {
        self.measure_with(op, || if rng.coin() { -1 } else { 1 })
    }

    /// Postselected measurement: a random outcome is forced to `outcome`;
    /// a determined one is returned as is.
    pub fn measure_forced(&mut self, op: &PauliString, outcome: i8) -> Result<MeasurementRecord> {
        if outcome != 1 && outcome != -1 {
            return Err(Error::arg(format!("outcome must be +1 or -1, got {outcome}")));
        }
        self.measure_with(op, || outcome)
    }

    fn measure_with(&mut self, op: &PauliString, choose: impl FnOnce() -> i8) -> Result<MeasurementRecord> {
        self.check_op(op)?;
        let index = self.next_index;
        self.next_index += 1;
        let Some(p) = self.stabilizers.iter().position(|s| !s.commutes_unchecked(op)) else {
            return Ok(MeasurementRecord {
                index,
                operator: op.clone(),
                outcome: self.deterministic_sign(op),
                deterministic: true,
            });
        };
        let pivot = self.stabilizers[p].clone();
        for j in 0..self.n {
            if j != p && !self.stabilizers[j].commutes_unchecked(op) {
                self.stabilizers[j].mul_assign_right(&pivot);
            }
            if j != p && !self.destabilizers[j].commutes_unchecked(op) {
                self.destabilizers[j].mul_assign_right(&pivot);
            }
        }
        let outcome = choose();
        self.destabilizers[p] = pivot;
        self.stabilizers[p] = if outcome < 0 { op.negated() } else { op.clone() };
        if cfg!(debug_assertions) && self.n <= 64 && index % 61 == 0 {
            self.check_invariants()?;
        }
        Ok(MeasurementRecord {
            index,
            operator: op.clone(),
            outcome,
            deterministic: false,
        })
    }

    /// Conjugates the state by `err`: flips the signs of anticommuting rows.
    pub fn apply_pauli(&mut self, err: &PauliString) -> Result<()> {
        if err.num_qubits() != self.n {
            return Err(Error::Dimension {
                left: self.n,
                right: err.num_qubits(),
            });
        }
        for row in self.stabilizers.iter_mut().chain(self.destabilizers.iter_mut()) {
            if !row.commutes_unchecked(err) {
                row.negate();
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, qubit: usize, p: Pauli) -> Result<()> {
        if p != Pauli::I {
            self.apply_pauli(&PauliString::single(self.n, qubit, p))?;
        }
        Ok(())
    }

    fn check_qubit_and_p(&self, qubit: usize, p: f64) -> Result<()> {
        if qubit >= self.n {
            return Err(Error::arg(format!("qubit {qubit} out of range {}", self.n)));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::arg(format!("probability {p} outside [0, 1]")));
        }
        Ok(())
    }

    /// With probability `p` applies a uniformly random non-identity Pauli.
    pub fn apply_depolarizing(&mut self, qubit: usize, p: f64, rng: &mut RandomStream) -> Result<Pauli> {
        self.check_qubit_and_p(qubit, p)?;
        let applied = if rng.uniform() < p {
            Pauli::NON_IDENTITY[rng.below(3)]
        } else {
            Pauli::I
        };
        self.apply_single(qubit, applied)?;
        Ok(applied)
    }

    /// With probability `p` applies X.
    pub fn apply_bitflip(&mut self, qubit: usize, p: f64, rng: &mut RandomStream) -> Result<Pauli> {
        self.check_qubit_and_p(qubit, p)?;
        let applied = if rng.uniform() < p { Pauli::X } else { Pauli::I };
        self.apply_single(qubit, applied)?;
        Ok(applied)
    }

    /// The stabilizer group, phases dropped.
    pub fn stabilizer_group(&self) -> PauliGroupBasis {
        PauliGroupBasis::from_generators(self.n, &self.stabilizers).expect("sizes agree")
    }

    /// Full commutation-structure check of the tableau.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if !self.stabilizers[i].is_hermitian() {
                return Err(Error::invariant(format!("stabilizer {i} not Hermitian")));
            }
            for j in 0..n {
                let s_s = self.stabilizers[i].commutes_unchecked(&self.stabilizers[j]);
                let d_d = self.destabilizers[i].commutes_unchecked(&self.destabilizers[j]);
                let d_s = self.destabilizers[i].commutes_unchecked(&self.stabilizers[j]);
                if !s_s || !d_d || d_s != (i != j) {
                    return Err(Error::invariant(format!("tableau rows {i},{j} break commutation structure")));
                }
            }
        }
        Ok(())
    }
}
