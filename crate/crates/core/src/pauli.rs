//! n-qubit Pauli operators in the symplectic representation, and subgroups
//! of the Pauli group described by independent generators.
//!
//! A [`PauliString`] stores `i^phase · X(x) · Z(z)`: all X factors to the
//! left of all Z factors. Under this convention `X·Z = -iY`, so a single `Y`
//! is stored as `x = z = 1, phase = 1`. The text literal (`"+XYZ"`, `"-iZ"`)
//! is written in terms of `Y` letters; its sign is the *literal phase*
//! `phase - |x & z| (mod 4)`, which is `0` or `2` exactly for Hermitian
//! operators.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use crate::bits::BitVec;
use crate::error::{Error, Result};

/// A single-qubit Pauli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn from_xz(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `i^phase · X(x) · Z(z)` on `n` qubits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: BitVec,
    z: BitVec,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    /// Builds `i^phase · X(x) · Z(z)` from raw parts.
    pub fn from_parts(x: BitVec, z: BitVec, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension {
                left: x.len(),
                right: z.len(),
            });
        }
        Ok(PauliString {
            x,
            z,
            phase: phase & 3,
        })
    }

    /// The Hermitian operator with literal sign `+` and the given masks.
    pub fn hermitian(x: BitVec, z: BitVec) -> Self {
        assert_eq!(x.len(), z.len(), "mask length mismatch");
        let phase = (x.and_popcount(&z) & 3) as u8;
        PauliString { x, z, phase }
    }

    pub fn from_symplectic(v: &BitVec) -> Self {
        let n = v.len() / 2;
        Self::hermitian(v.slice(0, n), v.slice(n, n))
    }

    pub fn x_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        Self::hermitian(BitVec::from_indices(n, qubits), BitVec::zeros(n))
    }

    pub fn z_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        Self::hermitian(BitVec::zeros(n), BitVec::from_indices(n, qubits))
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut out = Self::identity(n);
        out.set(qubit, p);
        out
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    #[inline]
    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    /// Exponent of `i` in the stored `X·Z` ordered form.
    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Exponent of `i` in front of the literal (Y-letter) form.
    pub fn literal_phase(&self) -> u8 {
        (self.phase + 4 - (self.x.and_popcount(&self.z) & 3) as u8) & 3
    }

    pub fn is_hermitian(&self) -> bool {
        self.literal_phase() & 1 == 0
    }

    /// True when the literal sign is `-` (for Hermitian operators).
    pub fn is_negative(&self) -> bool {
        self.literal_phase() == 2
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_xz(self.x.get(qubit), self.z.get(qubit))
    }

    /// Overwrites the Pauli on one qubit, keeping the literal sign.
    pub fn set(&mut self, qubit: usize, p: Pauli) {
        let lit = self.literal_phase();
        self.x.set(qubit, p.has_x());
        self.z.set(qubit, p.has_z());
        self.phase = (lit + (self.x.and_popcount(&self.z) & 3) as u8) & 3;
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.negate();
        out
    }

    /// The same operator with literal sign forced to `+`.
    pub fn unsigned(&self) -> Self {
        Self::hermitian(self.x.clone(), self.z.clone())
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        self.x.or(&self.z).iter_ones().collect()
    }

    /// `[x | z]` as a single 2n-bit vector.
    pub fn symplectic(&self) -> BitVec {
        self.x.concat(&self.z)
    }

    /// Equality up to phase.
    pub fn same_up_to_phase(&self, other: &PauliString) -> bool {
        self.x == other.x && self.z == other.z
    }

    fn check_dims(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::Dimension {
                left: self.num_qubits(),
                right: other.num_qubits(),
            });
        }
        Ok(())
    }

    /// The exact product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_dims(other)?;
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// `self ← self · other`. Panics on size mismatch.
    pub fn mul_assign_right(&mut self, other: &PauliString) {
        assert_eq!(self.num_qubits(), other.num_qubits(), "Pauli size mismatch");
        let swaps = self.z.and_popcount(&other.x);
        self.phase = ((self.phase as u32 + other.phase as u32 + 2 * swaps) & 3) as u8;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.commutes_unchecked(other))
    }

    /// Commutation test without the size check (debug-asserted).
    #[inline]
    pub fn commutes_unchecked(&self, other: &PauliString) -> bool {
        debug_assert_eq!(self.num_qubits(), other.num_qubits());
        let mut acc = 0u64;
        let (ax, az, bx, bz) = (self.x.words(), self.z.words(), other.x.words(), other.z.words());
        for k in 0..ax.len() {
            acc ^= (ax[k] & bz[k]) ^ (az[k] & bx[k]);
        }
        acc.count_ones() & 1 == 0
    }

    /// Tensor-style restriction test: true if `self` acts only on qubits in `qubits`.
    pub fn supported_within(&self, mask: &BitVec) -> bool {
        let support = self.x.or(&self.z);
        support.and(mask) == support
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign_right(rhs);
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.literal_phase() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            line: 0,
            msg: format!("{msg} in Pauli literal {s:?}"),
        };
        let (lit_phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1u8, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            return Err(bad("missing sign prefix"));
        };
        let n = body.chars().count();
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for (q, c) in body.chars().enumerate() {
            match c {
                'I' | '_' => {}
                'X' => x.set(q, true),
                'Z' => z.set(q, true),
                'Y' => {
                    x.set(q, true);
                    z.set(q, true);
                }
                _ => return Err(bad(&format!("unexpected character {c:?}"))),
            }
        }
        let phase = (lit_phase + (x.and_popcount(&z) & 3) as u8) & 3;
        Ok(PauliString { x, z, phase })
    }
}

/// Outcome of a membership query against a [`PauliGroupBasis`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub in_group: bool,
    /// Indices of generators whose product equals the candidate up to phase.
    pub decomposition: Option<Vec<usize>>,
    /// Whether the ordered generator product also matches the candidate's phase.
    pub phase_match: Option<bool>,
}

#[derive(Clone, Debug)]
struct EchelonRow {
    vec: BitVec,
    combo: BitVec,
    pivot: usize,
}

/// Reduced row-echelon form over GF(2), tracking which inputs formed each row.
///
/// Pivots are the lowest set index, so with the `[x | z]` layout the X block
/// is pivoted before the Z block and lower qubits before higher ones.
#[derive(Clone, Debug)]
pub(crate) struct Echelon {
    width: usize,
    rows: Vec<EchelonRow>,
    inputs: usize,
}

impl Echelon {
    pub(crate) fn new(width: usize) -> Self {
        Echelon {
            width,
            rows: Vec::new(),
            inputs: 0,
        }
    }

    /// Reduces `v` in place; returns the combination of inputs that was used.
    fn reduce(&self, v: &mut BitVec) -> BitVec {
        let mut combo = BitVec::zeros(self.inputs.max(1));
        for row in &self.rows {
            if v.get(row.pivot) {
                v.xor_assign(&row.vec);
                combo.xor_assign_prefix(&row.combo);
            }
        }
        combo
    }

    /// Adds input vector number `self.inputs`. Returns true when it was independent.
    pub(crate) fn push(&mut self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.width);
        let idx = self.inputs;
        self.inputs += 1;
        for row in &mut self.rows {
            row.combo.grow(self.inputs);
        }
        let mut r = v.clone();
        let mut combo = self.reduce(&mut r);
        combo.grow(self.inputs);
        combo.flip(idx);
        let Some(pivot) = r.first_one() else {
            return false;
        };
        for row in &mut self.rows {
            if row.vec.get(pivot) {
                row.vec.xor_assign(&r);
                row.combo.xor_assign(&combo);
            }
        }
        let pos = self.rows.partition_point(|row| row.pivot < pivot);
        self.rows.insert(pos, EchelonRow { vec: r, combo, pivot });
        true
    }

    /// Solves `v = sum of inputs`; returns the input indices when solvable.
    pub(crate) fn solve(&self, v: &BitVec) -> Option<Vec<usize>> {
        let mut r = v.clone();
        let combo = self.reduce(&mut r);
        if r.is_zero() {
            Some(combo.iter_ones().filter(|&i| i < self.inputs).collect())
        } else {
            None
        }
    }

    pub(crate) fn contains(&self, v: &BitVec) -> bool {
        let mut r = v.clone();
        for row in &self.rows {
            if r.get(row.pivot) {
                r.xor_assign(&row.vec);
            }
        }
        r.is_zero()
    }

    pub(crate) fn row_vectors(&self) -> impl Iterator<Item = &BitVec> {
        self.rows.iter().map(|r| &r.vec)
    }

    pub(crate) fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.pivot).collect()
    }
}

/// A subgroup of the n-qubit Pauli group, up to phases, given by
/// GF(2)-independent generators.
#[derive(Clone, Debug)]
pub struct PauliGroupBasis {
    n: usize,
    generators: Vec<PauliString>,
    echelon: Echelon,
}

impl PauliGroupBasis {
    pub fn new(n: usize) -> Self {
        PauliGroupBasis {
            n,
            generators: Vec::new(),
            echelon: Echelon::new(2 * n),
        }
    }

    /// Keeps the independent operators of `ops`, in order.
    pub fn from_generators<'a>(n: usize, ops: impl IntoIterator<Item = &'a PauliString>) -> Result<Self> {
        let mut b = Self::new(n);
        for op in ops {
            b.push(op.clone())?;
        }
        Ok(b)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Adds `op` if it is independent of the current generators.
    /// Returns whether it was added.
    pub fn push(&mut self, op: PauliString) -> Result<bool> {
        if op.num_qubits() != self.n {
            return Err(Error::Dimension {
                left: self.n,
                right: op.num_qubits(),
            });
        }
        let v = op.symplectic();
        if self.echelon.contains(&v) {
            return Ok(false);
        }
        let added = self.echelon.push(&v);
        debug_assert!(added);
        self.generators.push(op);
        Ok(true)
    }

    /// Membership up to phase, with decomposition and a phase check.
    pub fn membership(&self, candidate: &PauliString) -> Membership {
        if candidate.num_qubits() != self.n {
            return Membership {
                in_group: false,
                decomposition: None,
                phase_match: None,
            };
        }
        match self.echelon.solve(&candidate.symplectic()) {
            None => Membership {
                in_group: false,
                decomposition: None,
                phase_match: None,
            },
            Some(idx) => {
                let mut prod = PauliString::identity(self.n);
                for &i in &idx {
                    prod.mul_assign_right(&self.generators[i]);
                }
                Membership {
                    in_group: true,
                    phase_match: Some(prod.phase() == candidate.phase()),
                    decomposition: Some(idx),
                }
            }
        }
    }

    pub fn contains(&self, candidate: &PauliString) -> bool {
        candidate.num_qubits() == self.n && self.echelon.contains(&candidate.symplectic())
    }

    /// Every operator commuting with all generators, as a basis of rank `2n - rank`.
    pub fn centralizer(&self) -> PauliGroupBasis {
        let n = self.n;
        // P = (x, z) commutes with g iff (x, z) . (z_g, x_g) = 0.
        let mut ech = Echelon::new(2 * n);
        for g in &self.generators {
            ech.push(&g.z_bits().concat(g.x_bits()));
        }
        let mut out = PauliGroupBasis::new(n);
        for v in nullspace(&ech, 2 * n) {
            out.push(PauliString::from_symplectic(&v)).expect("sizes agree");
        }
        out
    }

    /// The intersection of two groups (Zassenhaus).
    pub fn intersection(&self, other: &PauliGroupBasis) -> Result<PauliGroupBasis> {
        if other.n != self.n {
            return Err(Error::Dimension {
                left: self.n,
                right: other.n,
            });
        }
        let w = 2 * self.n;
        let mut ech = Echelon::new(2 * w);
        for g in &self.generators {
            let v = g.symplectic();
            ech.push(&v.concat(&v));
        }
        let zero = BitVec::zeros(w);
        for g in &other.generators {
            ech.push(&g.symplectic().concat(&zero));
        }
        let mut out = PauliGroupBasis::new(self.n);
        for row in ech.row_vectors() {
            if row.slice(0, w).is_zero() {
                out.push(PauliString::from_symplectic(&row.slice(w, w)))?;
            }
        }
        Ok(out)
    }

    pub fn is_subgroup_of(&self, other: &PauliGroupBasis) -> bool {
        self.n == other.n && self.generators.iter().all(|g| other.contains(g))
    }

    /// Group equality up to phases.
    pub fn same_group(&self, other: &PauliGroupBasis) -> bool {
        self.rank() == other.rank() && self.is_subgroup_of(other)
    }

    pub fn is_abelian(&self) -> bool {
        let g = &self.generators;
        (0..g.len()).all(|i| (i + 1..g.len()).all(|j| g[i].commutes_unchecked(&g[j])))
    }

    /// The center `G ∩ Z(G)`.
    pub fn center(&self) -> PauliGroupBasis {
        self.intersection(&self.centralizer()).expect("sizes agree")
    }

    /// True if `op` commutes with every generator.
    pub fn commutes_with_all(&self, op: &PauliString) -> bool {
        self.generators.iter().all(|g| g.commutes_unchecked(op))
    }
}

/// Basis of `{v : row . v = 0 for all rows}` for a row-reduced system.
pub(crate) fn nullspace(ech: &Echelon, width: usize) -> Vec<BitVec> {
    let pivots = ech.pivots();
    let mut is_pivot = vec![false; width];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let rows: Vec<&BitVec> = ech.row_vectors().collect();
    let mut out = Vec::new();
    for free in (0..width).filter(|&c| !is_pivot[c]) {
        let mut v = BitVec::zeros(width);
        v.set(free, true);
        // In reduced form each row is pivot + free columns, so the pivot
        // variable equals the row's coefficient on this free column.
        for (row, &p) in rows.iter().zip(&pivots) {
            if row.get(free) {
                v.set(p, true);
            }
        }
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        // XZ = -iY under the declared convention.
        assert_eq!(p("+X").multiply(&p("+Z")).unwrap().to_string(), "-iY");
        assert_eq!(p("+Z").multiply(&p("+X")).unwrap().to_string(), "+iY");
        assert_eq!(&p("+Y") * &p("+Y"), p("+I"));
        assert_eq!(&p("+X") * &p("+Y"), p("+iZ"));
    }

    #[test]
    fn literal_round_trip_and_hermiticity() {
        for s in ["+XXIII", "-YZI", "+iXYZ", "-iIIY", "+"] {
            let op = p(s);
            assert_eq!(op.to_string(), s);
        }
        assert!(p("-YZ").is_hermitian());
        assert!(!p("+iX").is_hermitian());
        assert!("XZ".parse::<PauliString>().is_err());
        assert!("+XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn commutation_and_weight() {
        assert!(!p("+X").commutes(&p("+Z")).unwrap());
        assert!(p("+XX").commutes(&p("+ZZ")).unwrap());
        assert!(p("+X").commutes(&p("+ZZ")).is_err());
        assert_eq!(p("+IXYZI").weight(), 3);
        assert_eq!(PauliString::identity(7).weight(), 0);
    }

    #[test]
    fn membership_with_decomposition() {
        let g = PauliGroupBasis::from_generators(3, &[p("+ZZI"), p("+IZZ")]).unwrap();
        let m = g.membership(&p("+ZIZ"));
        assert!(m.in_group);
        assert_eq!(m.decomposition, Some(vec![0, 1]));
        assert_eq!(m.phase_match, Some(true));
        assert_eq!(g.membership(&p("-ZIZ")).phase_match, Some(false));
        assert!(!g.membership(&p("+ZII")).in_group);
        let id = g.membership(&PauliString::identity(3));
        assert!(id.in_group);
        assert_eq!(id.decomposition, Some(vec![]));
    }

    #[test]
    fn centralizer_of_single_z() {
        let g = PauliGroupBasis::from_generators(1, &[p("+Z")]).unwrap();
        let c = g.centralizer();
        assert_eq!(c.rank(), 1);
        assert!(c.contains(&p("+Z")));
    }

    #[test]
    fn intersection_of_overlapping_groups() {
        let a = PauliGroupBasis::from_generators(3, &[p("+ZZI"), p("+XII")]).unwrap();
        let b = PauliGroupBasis::from_generators(3, &[p("+ZZI"), p("+IXI")]).unwrap();
        let i = a.intersection(&b).unwrap();
        assert_eq!(i.rank(), 1);
        assert!(i.contains(&p("+ZZI")));
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(|(letters, phase)| {
            let mut x = BitVec::zeros(letters.len());
            let mut z = BitVec::zeros(letters.len());
            for (q, &l) in letters.iter().enumerate() {
                x.set(q, l & 1 == 1);
                z.set(q, l & 2 == 2);
            }
            PauliString::from_parts(x, z, phase).unwrap()
        })
    }

    fn arb_triple() -> impl Strategy<Value = (PauliString, PauliString, PauliString)> {
        (1usize..=64).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n), arb_pauli(n)))
    }

    fn arb_hermitian_pair() -> impl Strategy<Value = (PauliString, PauliString)> {
        (1usize..=64).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n)))
            .prop_map(|(a, b)| (a.unsigned(), b.unsigned()))
    }

    proptest! {
        #[test]
        fn product_is_associative((a, b, c) in arb_triple()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn commutation_matches_product_order((a, b) in arb_hermitian_pair()) {
            let ab = &a * &b;
            let ba = &b * &a;
            prop_assert!(ab.same_up_to_phase(&ba));
            prop_assert_eq!(a.commutes(&b).unwrap(), ab.phase() == ba.phase());
        }

        #[test]
        fn hermitian_squares_to_identity((a, _b) in arb_hermitian_pair()) {
            let sq = &a * &a;
            prop_assert!(sq.is_identity());
            prop_assert_eq!(sq.phase(), 0);
        }

        #[test]
        fn literal_round_trips((a, _b, _c) in arb_triple()) {
            let s = a.to_string();
            prop_assert_eq!(s.parse::<PauliString>().unwrap(), a);
        }

        #[test]
        fn centralizer_rank_and_containment(ops in proptest::collection::vec(arb_pauli(6), 0..8)) {
            let g = PauliGroupBasis::from_generators(6, &ops).unwrap();
            let c = g.centralizer();
            prop_assert_eq!(c.rank(), 12 - g.rank());
            for op in c.generators() {
                prop_assert!(g.commutes_with_all(op));
            }
            if g.is_abelian() {
                prop_assert!(g.is_subgroup_of(&c));
            }
        }
    }
}
