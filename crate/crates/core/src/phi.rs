//! The spaces V (degree-two commutator coordinates) and W (degree-three
//! commutator coordinates) for a fixed generator count, together with the
//! maps `phi_r : V -> W` encoding `c -> [c, x_r]`.
//!
//! Basis vectors of V are `v_ji` for `1 <= i < j <= n`, ordered
//! lexicographically by `(i, j)`. Basis vectors of W are `w_jik` for
//! `1 <= i < j <= n`, `i <= k <= n`, ordered lexicographically by `(i, j, k)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::linalg::FpMatrix;

/// Index of the basis vector `v_ji` (the commutator `[x_j, x_i]`), `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairIndex {
    pub j: usize,
    pub i: usize,
}

impl PairIndex {
    pub fn new(j: usize, i: usize) -> Self {
        PairIndex { j, i }
    }

    pub fn involves(self, g: usize) -> bool {
        self.j == g || self.i == g
    }
}

impl fmt::Display for PairIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.j < 10 {
            write!(f, "v{}{}", self.j, self.i)
        } else {
            write!(f, "v({},{})", self.j, self.i)
        }
    }
}

/// Index of the basis vector `w_jik` (the commutator `[x_j, x_i, x_k]`),
/// `i < j`, `i <= k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TripleIndex {
    pub j: usize,
    pub i: usize,
    pub k: usize,
}

impl TripleIndex {
    pub fn new(j: usize, i: usize, k: usize) -> Self {
        TripleIndex { j, i, k }
    }
}

impl fmt::Display for TripleIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.j < 10 && self.k < 10 {
            write!(f, "w{}{}{}", self.j, self.i, self.k)
        } else {
            write!(f, "w({},{},{})", self.j, self.i, self.k)
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, t| acc * (n - t) / (t + 1))
}

/// Bijections between pair/triple indices and column positions.
#[derive(Clone, Debug)]
pub struct BasisIndex {
    n: usize,
    pairs: Vec<PairIndex>,
    triples: Vec<TripleIndex>,
    pair_pos: Vec<usize>,
    triple_pos: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl BasisIndex {
    pub fn new(n: usize) -> Self {
        let m = n + 1;
        let mut pairs = Vec::new();
        let mut triples = Vec::new();
        let mut pair_pos = vec![NONE; m * m];
        let mut triple_pos = vec![NONE; m * m * m];
        for i in 1..=n {
            for j in i + 1..=n {
                pair_pos[j * m + i] = pairs.len();
                pairs.push(PairIndex { j, i });
            }
        }
        for i in 1..=n {
            for j in i + 1..=n {
                for k in i..=n {
                    triple_pos[(j * m + i) * m + k] = triples.len();
                    triples.push(TripleIndex { j, i, k });
                }
            }
        }
        BasisIndex {
            n,
            pairs,
            triples,
            pair_pos,
            triple_pos,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim_v(&self) -> usize {
        self.pairs.len()
    }

    pub fn dim_w(&self) -> usize {
        self.triples.len()
    }

    pub fn pairs(&self) -> &[PairIndex] {
        &self.pairs
    }

    pub fn triples(&self) -> &[TripleIndex] {
        &self.triples
    }

    pub fn pair_to_col(&self, j: usize, i: usize) -> Result<usize> {
        if !(1 <= i && i < j && j <= self.n) {
            return Err(Error::IndexOutOfRange(format!(
                "pair ({j},{i}) needs 1 <= i < j <= {}",
                self.n
            )));
        }
        Ok(self.pair_col(j, i))
    }

    pub fn triple_to_col(&self, j: usize, i: usize, k: usize) -> Result<usize> {
        if !(1 <= i && i < j && j <= self.n && i <= k && k <= self.n) {
            return Err(Error::IndexOutOfRange(format!(
                "triple ({j},{i},{k}) needs 1 <= i < j <= {n}, i <= k <= {n}",
                n = self.n
            )));
        }
        Ok(self.triple_col(j, i, k))
    }

    pub fn col_to_pair(&self, col: usize) -> Result<PairIndex> {
        self.pairs
            .get(col)
            .copied()
            .ok_or_else(|| Error::IndexOutOfRange(format!("V column {col}")))
    }

    pub fn col_to_triple(&self, col: usize) -> Result<TripleIndex> {
        self.triples
            .get(col)
            .copied()
            .ok_or_else(|| Error::IndexOutOfRange(format!("W column {col}")))
    }

    /// Unchecked lookup; callers guarantee the index constraints.
    #[inline]
    pub(crate) fn pair_col(&self, j: usize, i: usize) -> usize {
        let c = self.pair_pos[j * (self.n + 1) + i];
        debug_assert_ne!(c, NONE);
        c
    }

    #[inline]
    pub(crate) fn triple_col(&self, j: usize, i: usize, k: usize) -> usize {
        let m = self.n + 1;
        let c = self.triple_pos[(j * m + i) * m + k];
        debug_assert_ne!(c, NONE);
        c
    }
}

/// V, W and the matrices of `phi_1, ..., phi_n` for one `(n, p)`.
#[derive(Clone, Debug)]
pub struct PhiStructure {
    p: Prime,
    index: BasisIndex,
    phi: Vec<FpMatrix>,
    /// `sparse[r][col]` lists the nonzero entries of column `col` of `phi_{r+1}`.
    sparse: Vec<Vec<Vec<(usize, u32)>>>,
}

impl PhiStructure {
    pub fn build(n: usize, p: Prime) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 generators, got {n}"
            )));
        }
        let index = BasisIndex::new(n);
        let (dim_v, dim_w) = (index.dim_v(), index.dim_w());
        let mut phi = Vec::with_capacity(n);
        let mut sparse = Vec::with_capacity(n);
        for r in 1..=n {
            let mut m = FpMatrix::zeros(p, dim_w, dim_v);
            let mut cols = Vec::with_capacity(dim_v);
            for (col, &PairIndex { j, i }) in index.pairs().iter().enumerate() {
                let entries = if r >= i {
                    vec![(index.triple_col(j, i, r), 1)]
                } else {
                    vec![
                        (index.triple_col(j, r, i), 1),
                        (index.triple_col(i, r, j), p.get() - 1),
                    ]
                };
                for &(row, val) in &entries {
                    m.set(row, col, val);
                }
                cols.push(entries);
            }
            phi.push(m);
            sparse.push(cols);
        }
        Ok(PhiStructure {
            p,
            index,
            phi,
            sparse,
        })
    }

    pub fn n(&self) -> usize {
        self.index.n()
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn dim_v(&self) -> usize {
        self.index.dim_v()
    }

    pub fn dim_w(&self) -> usize {
        self.index.dim_w()
    }

    pub fn index(&self) -> &BasisIndex {
        &self.index
    }

    /// Matrix of `phi_r`, `1 <= r <= n`.
    pub fn phi(&self, r: usize) -> &FpMatrix {
        &self.phi[r - 1]
    }

    pub fn phis(&self) -> &[FpMatrix] {
        &self.phi
    }

    /// Nonzero entries `(row, value)` of column `col` of `phi_r`.
    pub fn phi_column(&self, r: usize, col: usize) -> &[(usize, u32)] {
        &self.sparse[r - 1][col]
    }

    /// `phi_r(v)` using the sparse column lists.
    pub fn apply(&self, r: usize, v: &[u32]) -> Vec<u32> {
        let p = self.p;
        let mut out = vec![0u32; self.dim_w()];
        for (col, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(row, val) in &self.sparse[r - 1][col] {
                out[row] = p.add(out[row], p.mul(a, val));
            }
        }
        out
    }

    /// The standard basis vector `v_ji`.
    pub fn v(&self, j: usize, i: usize) -> Result<Vec<u32>> {
        let mut out = vec![0; self.dim_v()];
        out[self.index.pair_to_col(j, i)?] = 1;
        Ok(out)
    }

    /// The standard basis vector `w_jik`.
    pub fn w(&self, j: usize, i: usize, k: usize) -> Result<Vec<u32>> {
        let mut out = vec![0; self.dim_w()];
        out[self.index.triple_to_col(j, i, k)?] = 1;
        Ok(out)
    }
}
