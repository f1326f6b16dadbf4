//! Arithmetic over GF(2^w) and dense matrices over it.
//!
//! Each field is defined by a fixed primitive polynomial so that serialized
//! matrices mean the same thing everywhere. Multiplication goes through
//! exp/log tables built lazily on first use.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{PicodError, Result};

/// Largest supported field exponent.
pub const MAX_W: u8 = 16;

/// Primitive polynomials, indexed by `w`, including the `x^w` term.
///
/// `w = 8` uses `x^8 + x^4 + x^3 + x^2 + 1` (0x11d), the usual Reed-Solomon choice.
const PRIMITIVE_POLY: [u32; MAX_W as usize + 1] = [
    0, 0x3, 0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11d, 0x211, 0x409, 0x805, 0x1053, 0x201b, 0x4443,
    0x8003, 0x1100b,
];

/// A single field element. Always reduced, i.e. `value < 2^w` for its field.
pub type FieldElem = u16;

/// Handle to the tables of GF(2^w).
pub struct GaloisField {
    w: u8,
    order: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

static FIELDS: [OnceLock<GaloisField>; MAX_W as usize + 1] =
    [const { OnceLock::new() }; MAX_W as usize + 1];

impl GaloisField {
    pub fn get(w: u8) -> Result<&'static GaloisField> {
        if w == 0 || w > MAX_W {
            return Err(PicodError::domain(format!(
                "field exponent w={w} outside 1..={MAX_W}"
            )));
        }
        Ok(FIELDS[w as usize].get_or_init(|| GaloisField::build(w)))
    }

    fn build(w: u8) -> GaloisField {
        let order = 1u32 << w;
        let poly = PRIMITIVE_POLY[w as usize];
        let mut exp = vec![0u16; 2 * (order as usize - 1)];
        let mut log = vec![0u16; order as usize];
        let mut x = 1u32;
        for (i, e) in exp.iter_mut().take(order as usize - 1).enumerate() {
            *e = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & order != 0 {
                x ^= poly;
            }
            // The generator must return to 1 only after visiting every nonzero element.
            assert!(
                x != 1 || i + 2 == order as usize,
                "polynomial {poly:#x} is not primitive"
            );
        }
        let period = order as usize - 1;
        for i in period..2 * period {
            exp[i] = exp[i - period];
        }
        GaloisField { w, order, exp, log }
    }

    pub fn w(&self) -> u8 {
        self.w
    }

    /// Number of elements, `2^w`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn poly(&self) -> u32 {
        PRIMITIVE_POLY[self.w as usize]
    }

    pub fn contains(&self, a: FieldElem) -> bool {
        (a as u32) < self.order
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a == 0 {
            return Err(PicodError::domain("inverse of zero"));
        }
        let period = self.order as usize - 1;
        Ok(self.exp[(period - self.log[a as usize] as usize) % period])
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElem, e: u32) -> FieldElem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let period = self.order as u64 - 1;
        let l = (self.log[a as usize] as u64 * e as u64) % period;
        self.exp[l as usize]
    }
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.w, self.poly())
    }
}

/// Row-major matrix over GF(2^w).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Matrix {
    w: u8,
    rows: usize,
    cols: usize,
    entries: Vec<FieldElem>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    w: u8,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = PicodError;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        let field = GaloisField::get(r.w)?;
        let entries = r
            .entries
            .iter()
            .map(|&e| {
                if e < field.order() {
                    Ok(e as FieldElem)
                } else {
                    Err(PicodError::domain(format!(
                        "entry {e} not in GF(2^{})",
                        r.w
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_entries(r.w, r.rows, r.cols, entries)
    }
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        MatrixRepr {
            w: m.w,
            rows: m.rows,
            cols: m.cols,
            entries: m.entries.iter().map(|&e| e as u32).collect(),
        }
    }
}

impl Matrix {
    pub fn zeros(w: u8, rows: usize, cols: usize) -> Result<Matrix> {
        GaloisField::get(w)?;
        Ok(Matrix {
            w,
            rows,
            cols,
            entries: vec![0; rows * cols],
        })
    }

    pub fn identity(w: u8, n: usize) -> Result<Matrix> {
        let mut m = Matrix::zeros(w, n, n)?;
        for i in 0..n {
            m.set(i, i, 1);
        }
        Ok(m)
    }

    pub fn from_entries(
        w: u8,
        rows: usize,
        cols: usize,
        entries: Vec<FieldElem>,
    ) -> Result<Matrix> {
        let field = GaloisField::get(w)?;
        if entries.len() != rows * cols {
            return Err(PicodError::domain(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&e| !field.contains(e)) {
            return Err(PicodError::domain(format!("entry {bad} not in GF(2^{w})")));
        }
        Ok(Matrix {
            w,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(w: u8, cols: usize, rows: &[Vec<FieldElem>]) -> Result<Matrix> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(PicodError::domain(format!(
                "row of length {} in a {cols}-column matrix",
                r.len()
            )));
        }
        Matrix::from_entries(w, rows.len(), cols, rows.concat())
    }

    /// Rows `e_c` for each 0-based column `c` in `units`.
    pub fn unit_rows(w: u8, cols: usize, units: &[usize]) -> Result<Matrix> {
        let mut m = Matrix::zeros(w, units.len(), cols)?;
        for (i, &c) in units.iter().enumerate() {
            if c >= cols {
                return Err(PicodError::domain(format!(
                    "unit column {c} out of range for {cols} columns"
                )));
            }
            m.set(i, c, 1);
        }
        Ok(m)
    }

    pub fn w(&self) -> u8 {
        self.w
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[FieldElem] {
        &self.entries
    }

    pub fn field(&self) -> &'static GaloisField {
        GaloisField::get(self.w).expect("matrix built with a valid field")
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Submatrix keeping the given columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        let mut entries = Vec::with_capacity(self.rows * keep.len());
        for r in 0..self.rows {
            entries.extend(keep.iter().map(|&c| self.get(r, c)));
        }
        Matrix {
            w: self.w,
            rows: self.rows,
            cols: keep.len(),
            entries,
        }
    }

    pub fn select_rows(&self, keep: &[usize]) -> Matrix {
        let mut entries = Vec::with_capacity(self.cols * keep.len());
        for &r in keep {
            entries.extend_from_slice(self.row(r));
        }
        Matrix {
            w: self.w,
            rows: keep.len(),
            cols: self.cols,
            entries,
        }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.w != other.w || self.cols != other.cols {
            return Err(PicodError::domain("vstack of incompatible matrices"));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(Matrix {
            w: self.w,
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.w != other.w || self.cols != other.rows {
            return Err(PicodError::domain("product of incompatible matrices"));
        }
        let f = self.field();
        let mut out = Matrix::zeros(self.w, self.rows, other.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form, in place. Returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let f = self.field();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            self.swap_rows(lead, p);
            let inv = f.inv(self.get(lead, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = f.mul(self.get(lead, j), inv);
                self.set(lead, j, v);
            }
            for r in 0..self.rows {
                let factor = self.get(r, c);
                if r == lead || factor == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = f.add(self.get(r, j), f.mul(factor, self.get(lead, j)));
                    self.set(r, j, v);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        self.clone().rref().len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix GF(2^{}) {}x{}", self.w, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// `k x n` Vandermonde matrix with entry `(i, j) = points[j]^i`.
pub fn vandermonde(w: u8, k: usize, points: &[FieldElem]) -> Result<Matrix> {
    let field = GaloisField::get(w)?;
    if k > points.len() {
        return Err(PicodError::domain(format!(
            "vandermonde needs k <= #points, got k={k}, {} points",
            points.len()
        )));
    }
    for (i, &p) in points.iter().enumerate() {
        if !field.contains(p) {
            return Err(PicodError::domain(format!("point {p} not in GF(2^{w})")));
        }
        if points[..i].contains(&p) {
            return Err(PicodError::domain(format!(
                "duplicate evaluation point {p}"
            )));
        }
    }
    let mut m = Matrix::zeros(w, k, points.len())?;
    for (j, &p) in points.iter().enumerate() {
        for i in 0..k {
            m.set(i, j, field.pow(p, i as u32));
        }
    }
    Ok(m)
}
