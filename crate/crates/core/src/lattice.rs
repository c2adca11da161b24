//! Bacon-Shor lattice geometry, checks and virtual-qubit operators.
//!
//! Qubits sit at `(row, col)` with row 0 at the bottom of the lattice and
//! column 0 on the left; the flat index is `row * cols + col`. XX checks are
//! horizontal (two neighbouring columns of one row), ZZ checks vertical.
//!
//! Plaquettes are named by their top-right corner `(x, y) = (col, row)`, so
//! plaquette `(x, y)` has corners in columns `x-1, x` and rows `y-1, y`.
//! Plaquettes in column 0 or row 0 are the imaginary ones hanging off the
//! left/bottom boundary; they carry the stabilizer and logical qubits.

use std::fmt;

use crate::error::{Error, Result};
use crate::pauli::{PauliGroupBasis, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckType {
    X,
    Z,
}

impl CheckType {
    pub fn other(self) -> CheckType {
        match self {
            CheckType::X => CheckType::Z,
            CheckType::Z => CheckType::X,
        }
    }
}

/// A weight-2 check. X edges join `(row, col)` and `(row, col + 1)`;
/// Z edges join `(row, col)` and `(row + 1, col)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub kind: CheckType,
    pub row: usize,
    pub col: usize,
}

impl Edge {
    pub fn xx(row: usize, col: usize) -> Edge {
        Edge {
            kind: CheckType::X,
            row,
            col,
        }
    }

    pub fn zz(row: usize, col: usize) -> Edge {
        Edge {
            kind: CheckType::Z,
            row,
            col,
        }
    }

    /// The two qubits as `(row, col)` pairs.
    pub fn endpoints(&self) -> [(usize, usize); 2] {
        match self.kind {
            CheckType::X => [(self.row, self.col), (self.row, self.col + 1)],
            CheckType::Z => [(self.row, self.col), (self.row + 1, self.col)],
        }
    }
}

/// Top-right corner of a plaquette. `col` is the paper's `x`, `row` its `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaquetteCoord {
    pub row: usize,
    pub col: usize,
}

impl PlaquetteCoord {
    /// Plaquette at horizontal position `x` (column) and height `y` (row).
    pub fn xy(x: usize, y: usize) -> Self {
        PlaquetteCoord { row: y, col: x }
    }

    pub fn shifted(self, dx: isize, dy: isize) -> Option<Self> {
        Some(PlaquetteCoord {
            col: self.col.checked_add_signed(dx)?,
            row: self.row.checked_add_signed(dy)?,
        })
    }

    pub fn is_interior(&self) -> bool {
        self.row >= 1 && self.col >= 1
    }
}

impl fmt::Display for PlaquetteCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.col, self.row)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeParameters {
    pub n: usize,
    pub k: usize,
    pub g: usize,
    pub s: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeLayout {
    rows: usize,
    cols: usize,
}

impl CodeLayout {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::arg(format!("lattice must be at least 2x2, got {rows}x{cols}")));
        }
        Ok(CodeLayout { rows, cols })
    }

    pub fn square(d: usize) -> Result<Self> {
        Self::new(d, d)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_qubits(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn qubit(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.rows && col < self.cols);
        row * self.cols + col
    }

    pub fn coords(&self, q: usize) -> (usize, usize) {
        (q / self.cols, q % self.cols)
    }

    pub fn code_parameters(&self) -> CodeParameters {
        let (l, m) = (self.rows, self.cols);
        CodeParameters {
            n: l * m,
            k: 1,
            g: (l - 1) * (m - 1),
            s: (l - 1) + (m - 1),
        }
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        match e.kind {
            CheckType::X => e.row < self.rows && e.col + 1 < self.cols,
            CheckType::Z => e.row + 1 < self.rows && e.col < self.cols,
        }
    }

    pub fn check(&self, e: &Edge) -> Result<PauliString> {
        if !self.contains_edge(e) {
            return Err(Error::arg(format!("edge {e:?} outside {}x{} lattice", self.rows, self.cols)));
        }
        let qs = e.endpoints().map(|(r, c)| self.qubit(r, c));
        Ok(match e.kind {
            CheckType::X => PauliString::x_on(self.num_qubits(), qs),
            CheckType::Z => PauliString::z_on(self.num_qubits(), qs),
        })
    }

    /// XX check on row `row` between columns `col` and `col + 1`.
    pub fn xx_check(&self, row: usize, col: usize) -> Result<PauliString> {
        self.check(&Edge::xx(row, col))
    }

    /// ZZ check in column `col` between rows `row` and `row + 1`.
    pub fn zz_check(&self, col: usize, row: usize) -> Result<PauliString> {
        self.check(&Edge::zz(row, col))
    }

    /// All edges of one type, row-major by their first endpoint.
    pub fn edges(&self, kind: CheckType) -> Vec<Edge> {
        let mut out = Vec::new();
        match kind {
            CheckType::X => {
                for r in 0..self.rows {
                    for c in 0..self.cols - 1 {
                        out.push(Edge::xx(r, c));
                    }
                }
            }
            CheckType::Z => {
                for r in 0..self.rows - 1 {
                    for c in 0..self.cols {
                        out.push(Edge::zz(r, c));
                    }
                }
            }
        }
        out
    }

    pub fn all_edges(&self) -> Vec<Edge> {
        let mut e = self.edges(CheckType::X);
        e.extend(self.edges(CheckType::Z));
        e
    }

    pub fn plaquettes(&self) -> impl Iterator<Item = PlaquetteCoord> + '_ {
        (0..self.rows).flat_map(move |y| (0..self.cols).map(move |x| PlaquetteCoord::xy(x, y)))
    }

    fn check_plaquette(&self, p: PlaquetteCoord) -> Result<()> {
        if p.row >= self.rows || p.col >= self.cols {
            return Err(Error::arg(format!("plaquette {p} outside {}x{} lattice", self.rows, self.cols)));
        }
        Ok(())
    }

    fn x_block(&self, rows: impl Iterator<Item = usize> + Clone, cols: impl Iterator<Item = usize> + Clone) -> PauliString {
        let qs = rows.flat_map(|r| cols.clone().map(move |c| (r, c)));
        PauliString::x_on(self.num_qubits(), qs.map(|(r, c)| self.qubit(r, c)))
    }

    fn z_block(&self, rows: impl Iterator<Item = usize> + Clone, cols: impl Iterator<Item = usize> + Clone) -> PauliString {
        let qs = rows.flat_map(|r| cols.clone().map(move |c| (r, c)));
        PauliString::z_on(self.num_qubits(), qs.map(|(r, c)| self.qubit(r, c)))
    }

    /// Virtual X operator of the plaquette.
    ///
    /// Logical `(0,0)`: X down column 0. Horizontal stabilizer qubit `(0,y)`:
    /// X on column 0 from row `y` up. Vertical stabilizer `(x,0)`: X on columns
    /// `x-1, x`. Gauge `(x,y)`: the XX checks of columns `x-1, x` from row `y` up.
    pub fn virtual_x(&self, p: PlaquetteCoord) -> Result<PauliString> {
        self.check_plaquette(p)?;
        let (x, y, l) = (p.col, p.row, self.rows);
        Ok(match (x, y) {
            (0, _) => self.x_block(y..l, 0..1),
            (_, 0) => self.x_block(0..l, x - 1..x + 1),
            _ => self.x_block(y..l, x - 1..x + 1),
        })
    }

    /// Virtual Z operator of the plaquette; the transpose of [`Self::virtual_x`].
    ///
    /// Logical `(0,0)`: Z along row 0. Horizontal stabilizer `(0,y)`: Z on rows
    /// `y-1, y`. Vertical stabilizer qubit `(x,0)`: Z on row 0 from column `x`
    /// right. Gauge `(x,y)`: the ZZ checks of rows `y-1, y` from column `x` right.
    pub fn virtual_z(&self, p: PlaquetteCoord) -> Result<PauliString> {
        self.check_plaquette(p)?;
        let (x, y, m) = (p.col, p.row, self.cols);
        Ok(match (x, y) {
            (_, 0) => self.z_block(0..1, x..m),
            (0, _) => self.z_block(y - 1..y + 1, 0..m),
            _ => self.z_block(y - 1..y + 1, x..m),
        })
    }

    /// Product of the XX checks joining columns `c` and `c + 1` (an X-type stabilizer).
    pub fn column_pair_x(&self, c: usize) -> PauliString {
        self.x_block(0..self.rows, c..c + 2)
    }

    /// Product of the ZZ checks joining rows `r` and `r + 1` (a Z-type stabilizer).
    pub fn row_pair_z(&self, r: usize) -> PauliString {
        self.z_block(r..r + 2, 0..self.cols)
    }

    pub fn logical_x(&self) -> PauliString {
        self.x_block(0..self.rows, 0..1)
    }

    pub fn logical_z(&self) -> PauliString {
        self.z_block(0..1, 0..self.cols)
    }

    /// All XX and ZZ checks; rank equals the number of edges.
    pub fn gauge_group(&self) -> PauliGroupBasis {
        let checks: Vec<_> = self.all_edges().iter().map(|e| self.check(e).expect("edge in range")).collect();
        PauliGroupBasis::from_generators(self.num_qubits(), &checks).expect("sizes agree")
    }

    /// Column-pair X products followed by row-pair Z products.
    pub fn stabilizer_group(&self) -> PauliGroupBasis {
        let mut gens: Vec<_> = (0..self.cols - 1).map(|c| self.column_pair_x(c)).collect();
        gens.extend((0..self.rows - 1).map(|r| self.row_pair_z(r)));
        PauliGroupBasis::from_generators(self.num_qubits(), &gens).expect("sizes agree")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_on_3x3() {
        let l = CodeLayout::square(3).unwrap();
        assert_eq!(l.xx_check(0, 0).unwrap().to_string(), "+XXIIIIIII");
        assert_eq!(l.zz_check(0, 0).unwrap().to_string(), "+ZIIZIIIII");
        assert_eq!(l.all_edges().len(), 12);
        assert!(l.xx_check(0, 2).is_err());
        assert!(l.zz_check(0, 2).is_err());
    }

    #[test]
    fn code_parameters_formulas() {
        let p = |l, m| CodeLayout::new(l, m).unwrap().code_parameters();
        assert_eq!(p(3, 3), CodeParameters { n: 9, k: 1, g: 4, s: 4 });
        assert_eq!(p(2, 2), CodeParameters { n: 4, k: 1, g: 1, s: 2 });
        assert_eq!(p(5, 7), CodeParameters { n: 35, k: 1, g: 24, s: 10 });
        assert!(CodeLayout::new(1, 4).is_err());
    }

    #[test]
    fn virtual_operator_shapes() {
        let l = CodeLayout::square(3).unwrap();
        let lx = l.virtual_x(PlaquetteCoord::xy(0, 0)).unwrap();
        assert_eq!(lx, l.logical_x());
        assert_eq!(lx.weight(), 3);
        let gz = l.virtual_z(PlaquetteCoord::xy(1, 1)).unwrap();
        assert_eq!(gz.weight(), 4);
        // Product of the XX checks of columns 1,2 is the column-2 X stabilizer.
        let mut prod = PauliString::identity(9);
        for r in 0..3 {
            prod.mul_assign_right(&l.xx_check(r, 1).unwrap());
        }
        assert_eq!(prod, l.virtual_x(PlaquetteCoord::xy(2, 0)).unwrap());
        assert!(l.virtual_x(PlaquetteCoord::xy(3, 0)).is_err());
    }

    fn commutation_matrix_is_canonical(d: usize) {
        let l = CodeLayout::square(d).unwrap();
        let ps: Vec<_> = l.plaquettes().collect();
        for p in &ps {
            let xp = l.virtual_x(*p).unwrap();
            assert!(xp.is_hermitian() && xp.phase() == 0);
            for q in &ps {
                let zq = l.virtual_z(*q).unwrap();
                assert_eq!(xp.commutes(&zq).unwrap(), p != q, "X{p} vs Z{q}");
                assert!(xp.commutes(&l.virtual_x(*q).unwrap()).unwrap());
                assert!(zq.commutes(&l.virtual_z(*p).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn canonical_commutation_exhaustive() {
        for d in 2..=5 {
            commutation_matrix_is_canonical(d);
        }
    }

    #[test]
    fn virtual_operators_generate_full_pauli_group() {
        let l = CodeLayout::new(3, 4).unwrap();
        let mut ops = Vec::new();
        for p in l.plaquettes() {
            ops.push(l.virtual_x(p).unwrap());
            ops.push(l.virtual_z(p).unwrap());
        }
        let g = PauliGroupBasis::from_generators(12, &ops).unwrap();
        assert_eq!(g.rank(), 24);
    }

    #[test]
    fn groups_ranks_and_center() {
        for (rows, cols) in [(2, 2), (3, 3), (2, 4), (4, 3), (5, 5)] {
            let l = CodeLayout::new(rows, cols).unwrap();
            let g = l.gauge_group();
            let s = l.stabilizer_group();
            assert_eq!(g.rank(), rows * (cols - 1) + cols * (rows - 1));
            assert_eq!(s.rank(), (rows - 1) + (cols - 1));
            assert!(s.is_subgroup_of(&g));
            assert!(g.center().same_group(&s));
            let c = g.centralizer();
            assert!(c.contains(&l.logical_x()) && c.contains(&l.logical_z()));
            assert!(!g.contains(&l.logical_x()));
        }
    }
}
