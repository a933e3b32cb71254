//! Dense matrices and canonical subspaces over F_p.
//!
//! Every [`Subspace`] is stored as the reduced row-echelon form of a basis,
//! so two subspaces are equal as sets exactly when they compare equal.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::Prime;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    p: Prime,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Output of [`FpMatrix::rref`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FpMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl FpMatrix {
    pub fn zeros(p: Prime, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: Prime, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row-major residues; entries must already lie in `[0, p)`.
    pub fn new(p: Prime, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(rows * cols, data.len()));
        }
        if let Some(&bad) = data.iter().find(|&&x| x >= p.get()) {
            return Err(Error::InvalidParameter(format!(
                "entry {bad} is not reduced modulo {p}"
            )));
        }
        Ok(FpMatrix {
            p,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from signed rows, reducing every entry modulo `p`.
    pub fn from_rows<R: AsRef<[i64]>>(p: Prime, cols: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::dims(cols, r.len()));
            }
            data.extend(r.iter().map(|&x| p.reduce(x)));
        }
        Ok(FpMatrix {
            p,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub(crate) fn from_residue_rows(p: Prime, cols: usize, rows: &[Vec<u32>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            debug_assert_eq!(r.len(), cols);
            data.extend_from_slice(r);
        }
        FpMatrix {
            p,
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: u32) {
        self.data[r * self.cols + c] = value % self.p.get();
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.row_iter().map(<[u32]>::to_vec).collect()
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::dims(self.cols, other.rows));
        }
        let p = self.p.get() as u64;
        let mut out = FpMatrix::zeros(self.p, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(other.row(k)) {
                    *slot = (*slot + a as u64 * b as u64) % p;
                }
            }
            for (c, &a) in acc.iter().enumerate() {
                out.data[r * other.cols + c] = a as u32;
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::dims(self.cols, v.len()));
        }
        let p = self.p.get() as u64;
        Ok(self
            .row_iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % p)
                    as u32
            })
            .collect())
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(Error::dims(self.cols, other.cols));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FpMatrix {
            p: self.p,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Reduced row-echelon form by Gauss-Jordan elimination.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let rank = pivots.len();
        m.data.truncate(rank * m.cols);
        let zero_rows = m.rows - rank;
        m.data.extend(std::iter::repeat_n(0, zero_rows * m.cols));
        Rref {
            matrix: m,
            rank,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    /// Row-reduces in place and returns the pivot columns. Rows past the rank
    /// are left zero.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if pr != r {
                for k in 0..cols {
                    self.data.swap(pr * cols + k, r * cols + k);
                }
            }
            let inv = p.inv(self.data[r * cols + c]);
            if inv != 1 {
                for k in c..cols {
                    let x = &mut self.data[r * cols + k];
                    *x = p.mul(*x, inv);
                }
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c];
                if f == 0 {
                    continue;
                }
                let f = p.neg(f);
                for k in c..cols {
                    let a = self.data[r * cols + k];
                    if a != 0 {
                        let x = &mut self.data[i * cols + k];
                        *x = p.add(*x, p.mul(f, a));
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// `{ v : self * v = 0 }`.
    pub fn kernel(&self) -> Subspace {
        let Rref { matrix, pivots, .. } = self.rref();
        let p = self.p;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut rows = Vec::with_capacity(self.cols - pivots.len());
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (t, &c) in pivots.iter().enumerate() {
                v[c] = p.neg(matrix.get(t, f));
            }
            rows.push(v);
        }
        Subspace::from_generators(FpMatrix::from_residue_rows(p, self.cols, &rows))
    }

    fn same_field(&self, other: &FpMatrix) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p.get(), other.p.get()));
        }
        Ok(())
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FpMatrix<{}>{:?}", self.p, self.to_rows())
    }
}

impl Serialize for FpMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FpMatrix", 4)?;
        st.serialize_field("p", &self.p.get())?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("entries", &self.to_rows())?;
        st.end()
    }
}

/// A subspace of F_p^d held as the RREF of a basis (no zero rows).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: FpMatrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(p: Prime, ambient_dim: usize) -> Self {
        Subspace {
            basis: FpMatrix::zeros(p, 0, ambient_dim),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: Prime, ambient_dim: usize) -> Self {
        Subspace {
            basis: FpMatrix::identity(p, ambient_dim),
            pivots: (0..ambient_dim).collect(),
        }
    }

    /// The row space of `m`.
    pub fn from_generators(m: FpMatrix) -> Self {
        let Rref {
            mut matrix,
            rank,
            pivots,
        } = m.rref();
        matrix.data.truncate(rank * matrix.cols);
        matrix.rows = rank;
        Subspace {
            basis: matrix,
            pivots,
        }
    }

    /// Span of signed integer vectors.
    pub fn span<R: AsRef<[i64]>>(p: Prime, ambient_dim: usize, vectors: &[R]) -> Result<Self> {
        Ok(Self::from_generators(FpMatrix::from_rows(
            p,
            ambient_dim,
            vectors,
        )?))
    }

    pub(crate) fn span_residues(p: Prime, ambient_dim: usize, vectors: &[Vec<u32>]) -> Self {
        Self::from_generators(FpMatrix::from_residue_rows(p, ambient_dim, vectors))
    }

    /// Wraps a matrix that is already in RREF without zero rows.
    pub(crate) fn from_rref_unchecked(basis: FpMatrix, pivots: Vec<usize>) -> Self {
        debug_assert_eq!(basis.rows, pivots.len());
        Subspace { basis, pivots }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.basis.p
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.basis.cols
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &FpMatrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_vectors(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.basis.row_iter()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    /// Reduces `v` against the basis; the result is the canonical coset
    /// representative (zero at every pivot column).
    pub fn reduce(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.ambient_dim() {
            return Err(Error::dims(self.ambient_dim(), v.len()));
        }
        let p = self.prime();
        let mut out: Vec<u32> = v.iter().map(|&x| x % p.get()).collect();
        for (row, &c) in self.basis.row_iter().zip(&self.pivots) {
            let f = out[c];
            if f == 0 {
                continue;
            }
            let f = p.neg(f);
            for (x, &a) in out.iter_mut().zip(row).skip(c) {
                if a != 0 {
                    *x = p.add(*x, p.mul(f, a));
                }
            }
        }
        Ok(out)
    }

    pub fn contains(&self, v: &[u32]) -> Result<bool> {
        Ok(self.reduce(v)?.iter().all(|&x| x == 0))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        self.compatible(other)?;
        for v in other.basis_vectors() {
            if !self.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A matrix whose kernel is exactly this subspace.
    pub fn annihilator(&self) -> FpMatrix {
        self.basis.kernel().basis
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.compatible(other)?;
        Ok(Subspace::from_generators(self.basis.vstack(&other.basis)?))
    }

    /// Intersection as the kernel of the stacked annihilators.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        self.compatible(other)?;
        let stacked = self.annihilator().vstack(&other.annihilator())?;
        Ok(stacked.kernel())
    }

    /// `{ v : map * v in self }`, computed as the kernel of `Q * map` where
    /// `Q` is the annihilator of `self`.
    pub fn preimage(&self, map: &FpMatrix) -> Result<Subspace> {
        if map.p != self.prime() {
            return Err(Error::ModulusMismatch(map.p.get(), self.prime().get()));
        }
        if map.rows != self.ambient_dim() {
            return Err(Error::dims(self.ambient_dim(), map.rows));
        }
        Ok(self.annihilator().mul(map)?.kernel())
    }

    /// Image of this subspace under `map` (acting on column vectors).
    pub fn image(&self, map: &FpMatrix) -> Result<Subspace> {
        if map.cols != self.ambient_dim() {
            return Err(Error::dims(map.cols, self.ambient_dim()));
        }
        let rows = self
            .basis_vectors()
            .map(|v| map.mul_vec(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Subspace::span_residues(self.prime(), map.rows, &rows))
    }

    /// Restricts to the coordinates listed in `coords`, which must cover the
    /// support of every basis vector.
    pub(crate) fn restrict(&self, coords: &[usize]) -> Subspace {
        let rows: Vec<Vec<u32>> = self
            .basis_vectors()
            .map(|v| coords.iter().map(|&c| v[c]).collect())
            .collect();
        Subspace::span_residues(self.prime(), coords.len(), &rows)
    }

    fn compatible(&self, other: &Subspace) -> Result<()> {
        if self.prime() != other.prime() {
            return Err(Error::ModulusMismatch(
                self.prime().get(),
                other.prime().get(),
            ));
        }
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::dims(self.ambient_dim(), other.ambient_dim()));
        }
        Ok(())
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace<F_{}^{}>{:?}",
            self.prime(),
            self.ambient_dim(),
            self.basis.to_rows()
        )
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Subspace", 3)?;
        st.serialize_field("ambient_dim", &self.ambient_dim())?;
        st.serialize_field("dim", &self.dim())?;
        st.serialize_field("basis", &self.basis.to_rows())?;
        st.end()
    }
}
