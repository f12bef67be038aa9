//! Dense exact linear algebra over the rationals.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::Zero;

use crate::scalar::{self, Scalar};

#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = scalar::one();
        }
        m
    }

    /// Builds from row vectors; all rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Scalar>>) -> Self {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix row");
            data.extend(row);
        }
        RationalMatrix {
            rows: nrows,
            cols,
            data,
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        RationalMatrix::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&v| scalar::int(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = RationalMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    if !rhs[(k, j)].is_zero() {
                        out[(i, j)] += a * &rhs[(k, j)];
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(scalar::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut out = RationalMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].clone();
            }
        }
        out
    }

    /// Top-left `k × k` block.
    pub fn leading_block(&self, k: usize) -> RationalMatrix {
        let mut out = RationalMatrix::zeros(k, k);
        for r in 0..k {
            for c in 0..k {
                out[(r, c)] = self[(r, c)].clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// `row[target] -= factor · row[source]`
    fn eliminate(&mut self, target: usize, source: usize, factor: &Scalar) {
        for c in 0..self.cols {
            let s = &self.data[source * self.cols + c];
            if !s.is_zero() {
                let delta = factor * s;
                self.data[target * self.cols + c] -= delta;
            }
        }
    }

    fn scale_row(&mut self, r: usize, factor: &Scalar) {
        for c in 0..self.cols {
            let v = &mut self.data[r * self.cols + c];
            if !v.is_zero() {
                *v *= factor;
            }
        }
    }

    pub fn rref(&self) -> Rref {
        self.rref_with_transform().0
    }

    /// Reduced row echelon form together with the invertible `E` such that
    /// `R = E · M`. Pivots are the first nonzero entry scanning columns left
    /// to right and rows top to bottom.
    pub fn rref_with_transform(&self) -> (Rref, RationalMatrix) {
        let mut r = self.clone();
        let mut e = RationalMatrix::identity(self.rows);
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&i| !r[(i, col)].is_zero()) else {
                continue;
            };
            r.swap_rows(row, p);
            e.swap_rows(row, p);
            let inv = scalar::one() / &r[(row, col)];
            r.scale_row(row, &inv);
            e.scale_row(row, &inv);
            for i in 0..self.rows {
                if i != row && !r[(i, col)].is_zero() {
                    let factor = r[(i, col)].clone();
                    r.eliminate(i, row, &factor);
                    e.eliminate(i, row, &factor);
                }
            }
            pivots.push(col);
            row += 1;
        }
        let rank = pivots.len();
        (Rref { matrix: r, pivots, rank }, e)
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Exact nullspace basis, one vector per free column, in column order.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let rref = self.rref();
        kernel_from_rref(&rref, self.cols)
    }

    /// Solves `M x = b`; `None` when inconsistent.
    pub fn solve_affine(&self, b: &[Scalar]) -> Option<AffineSolution> {
        self.solve_affine_with_certificate(b).ok()
    }

    /// Like [`solve_affine`](Self::solve_affine), but an inconsistent system
    /// yields a certificate `y` with `yᵀM = 0` and `yᵀb ≠ 0`.
    pub fn solve_affine_with_certificate(&self, b: &[Scalar]) -> Result<AffineSolution, Vec<Scalar>> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        let mut aug = RationalMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, self.cols)] = b[r].clone();
        }
        let (rref, e) = aug.rref_with_transform();
        if let Some(pos) = rref.pivots.iter().position(|&c| c == self.cols) {
            return Err(e.row(pos).to_vec());
        }
        let mut particular = vec![scalar::zero(); self.cols];
        for (r, &c) in rref.pivots.iter().enumerate() {
            particular[c] = rref.matrix[(r, self.cols)].clone();
        }
        let kernel = kernel_from_rref(&rref, self.cols);
        Ok(AffineSolution { particular, kernel })
    }

    /// Exact determinant by elimination; square matrices only.
    pub fn determinant(&self) -> Scalar {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let mut m = self.clone();
        let mut det = scalar::one();
        for col in 0..self.cols {
            let Some(p) = (col..self.rows).find(|&i| !m[(i, col)].is_zero()) else {
                return scalar::zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m[(col, col)].clone();
            det *= &pivot;
            for i in col + 1..self.rows {
                if !m[(i, col)].is_zero() {
                    let factor = &m[(i, col)] / &pivot;
                    m.eliminate(i, col, &factor);
                }
            }
        }
        det
    }

    /// Leading principal minors `Δ_1, ..., Δ_n`.
    pub fn leading_minors(&self) -> Vec<Scalar> {
        (1..=self.rows.min(self.cols))
            .map(|k| self.leading_block(k).determinant())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// `Some(c)` when the matrix equals `c · I`.
    pub fn scalar_multiple_of_identity(&self) -> Option<Scalar> {
        if self.rows != self.cols || self.rows == 0 {
            return None;
        }
        let c = self[(0, 0)].clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let expected = if i == j { &c } else { &Scalar::zero() };
                if &self[(i, j)] != expected {
                    return None;
                }
            }
        }
        Some(c)
    }
}

fn kernel_from_rref(rref: &Rref, cols: usize) -> Vec<Vec<Scalar>> {
    let mut is_pivot = vec![false; cols];
    for &p in &rref.pivots {
        if p < cols {
            is_pivot[p] = true;
        }
    }
    (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![scalar::zero(); cols];
            v[free] = scalar::one();
            for (r, &p) in rref.pivots.iter().enumerate() {
                if p < cols {
                    v[p] = -rref.matrix[(r, free)].clone();
                }
            }
            v
        })
        .collect()
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Scalar;
    fn index(&self, (r, c): (usize, usize)) -> &Scalar {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Scalar {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl serde::Serialize for RationalMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(|v| v.to_string()).collect())
            .collect();
        rows.serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: RationalMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<Scalar>,
    pub kernel: Vec<Vec<Scalar>>,
}

/// True when `vectors` are linearly independent.
pub fn independent(vectors: &[Vec<Scalar>]) -> bool {
    match vectors.first() {
        None => true,
        Some(v) => RationalMatrix::from_rows(v.len(), vectors.to_vec()).rank() == vectors.len(),
    }
}

/// True when `v` lies in the span of `basis`.
pub fn in_span(basis: &[Vec<Scalar>], v: &[Scalar]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    // columns are the basis vectors
    let m = RationalMatrix::from_rows(
        basis.len(),
        (0..v.len())
            .map(|i| basis.iter().map(|b| b[i].clone()).collect())
            .collect(),
    );
    m.solve_affine(v).is_some()
}
