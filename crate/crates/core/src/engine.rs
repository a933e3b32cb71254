//! The capability criterion: a class-two exponent-p group with relation
//! subspace `X` of V is capable exactly when `X = Z_X`, where
//!
//! ```text
//! Y_X = <phi_1(X), ..., phi_n(X)>        (subspace of W)
//! Z_X = phi_1^{-1}(Y_X) ∩ ... ∩ phi_n^{-1}(Y_X)
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::linalg::{FpMatrix, Subspace};
use crate::phi::{PairIndex, PhiStructure};

fn check_ambient(ps: &PhiStructure, x: &Subspace) -> Result<()> {
    if x.prime() != ps.prime() {
        return Err(Error::ModulusMismatch(x.prime().get(), ps.prime().get()));
    }
    if x.ambient_dim() != ps.dim_v() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim_v(),
            found: x.ambient_dim(),
        });
    }
    Ok(())
}

/// `Y_X`, the span of all `phi_r(x)` for `x` in a basis of `X`.
pub fn compute_y(ps: &PhiStructure, x: &Subspace) -> Result<Subspace> {
    check_ambient(ps, x)?;
    let mut rows = Vec::with_capacity(ps.n() * x.dim());
    for v in x.basis_vectors() {
        for r in 1..=ps.n() {
            rows.push(ps.apply(r, v));
        }
    }
    Ok(Subspace::span_residues(ps.prime(), ps.dim_w(), &rows))
}

/// `Z_X` given `Y_X`. The preimages `phi_r^{-1}(Y)` are the kernels of
/// `Q * phi_r` with `Q` the annihilator of `Y`; their intersection is the
/// kernel of the stacked products.
pub fn compute_z_from_y(ps: &PhiStructure, y: &Subspace) -> Result<Subspace> {
    if y.ambient_dim() != ps.dim_w() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim_w(),
            found: y.ambient_dim(),
        });
    }
    let p = ps.prime();
    let q = y.annihilator();
    let (qr, dim_v) = (q.rows(), ps.dim_v());
    let mut data = vec![0u32; ps.n() * qr * dim_v];
    for r in 1..=ps.n() {
        let block = (r - 1) * qr;
        for col in 0..dim_v {
            for &(wrow, val) in ps.phi_column(r, col) {
                for t in 0..qr {
                    let a = q.get(t, wrow);
                    if a != 0 {
                        let slot = &mut data[(block + t) * dim_v + col];
                        *slot = p.add(*slot, p.mul(a, val));
                    }
                }
            }
        }
    }
    Ok(FpMatrix::new(p, ps.n() * qr, dim_v, data)?.kernel())
}

pub fn compute_z(ps: &PhiStructure, x: &Subspace) -> Result<Subspace> {
    compute_z_from_y(ps, &compute_y(ps, x)?)
}

/// Flags from theorem consequences that predict capability without the full
/// computation. They are reported, never trusted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FastPaths {
    /// `dim X <= 2`.
    pub small_dim: bool,
    /// `X` is spanned by standard basis vectors.
    pub coordinate: bool,
    /// Some generator index appears in no coordinate of `X`.
    pub missing_index: Option<usize>,
}

impl FastPaths {
    pub fn detect(ps: &PhiStructure, x: &Subspace) -> Self {
        FastPaths {
            small_dim: x.dim() <= 2,
            coordinate: is_coordinate_subspace(x),
            missing_index: missing_index(ps, x),
        }
    }

    pub fn any(&self) -> bool {
        self.small_dim || self.coordinate || self.missing_index.is_some()
    }
}

/// True when every RREF basis row is a standard basis vector.
pub fn is_coordinate_subspace(x: &Subspace) -> bool {
    x.basis_vectors()
        .all(|row| row.iter().filter(|&&a| a != 0).count() == 1)
}

/// Smallest generator index `g` such that no vector of `X` has a nonzero
/// coordinate at any pair involving `g`.
pub fn missing_index(ps: &PhiStructure, x: &Subspace) -> Option<usize> {
    let pairs = ps.index().pairs();
    (1..=ps.n()).find(|&g| {
        x.basis_vectors().all(|row| {
            pairs
                .iter()
                .zip(row)
                .all(|(pr, &a)| a == 0 || !pr.involves(g))
        })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CapabilityReport {
    pub n: usize,
    pub p: Prime,
    pub x: Subspace,
    pub dim_x: usize,
    pub y: Subspace,
    pub dim_y: usize,
    pub z: Subspace,
    pub dim_z: usize,
    pub capable: bool,
    /// Basis of `Z_X` modulo `X`: RREF of the residues of `Z`'s basis, sorted
    /// by pivot. Empty exactly when capable.
    pub witnesses: Vec<Vec<u32>>,
    /// `dim Z(G)/[G,G]`.
    pub central_dim: usize,
    /// The necessary rank bound for capable groups holds.
    pub hn_ok: bool,
    /// `dim X <= 2`, which forces capability.
    pub sufficient_hit: bool,
    pub fast_paths: FastPaths,
}

impl CapabilityReport {
    /// Witnesses written in `v_ji` notation, e.g. `v41 + 2*v31`.
    pub fn witness_strings(&self, ps: &PhiStructure) -> Vec<String> {
        self.witnesses
            .iter()
            .map(|w| format_v_vector(ps, w))
            .collect()
    }
}

pub fn format_v_vector(ps: &PhiStructure, v: &[u32]) -> String {
    let p = ps.prime().get();
    let mut terms = Vec::new();
    for (pr, &a) in ps.index().pairs().iter().zip(v) {
        if a == 0 {
            continue;
        }
        let (sign, mag) = if a * 2 > p { ("-", p - a) } else { ("+", a) };
        let body = if mag == 1 {
            pr.to_string()
        } else {
            format!("{mag}*{pr}")
        };
        terms.push((sign, body));
    }
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (t, (sign, body)) in terms.into_iter().enumerate() {
        match (t, sign) {
            (0, "+") => {}
            (0, _) => out.push('-'),
            _ => {
                out.push(' ');
                out.push_str(sign);
                out.push(' ');
            }
        }
        out.push_str(&body);
    }
    out
}

/// Basis of `Z / X` as canonical residues.
pub fn witnesses(x: &Subspace, z: &Subspace) -> Result<Vec<Vec<u32>>> {
    let mut residues = Vec::new();
    for v in z.basis_vectors() {
        let r = x.reduce(v)?;
        if r.iter().any(|&a| a != 0) {
            residues.push(r);
        }
    }
    let span = Subspace::span_residues(x.prime(), x.ambient_dim(), &residues);
    Ok(span.basis().to_rows())
}

pub fn is_capable(ps: &PhiStructure, x: &Subspace) -> Result<CapabilityReport> {
    check_ambient(ps, x)?;
    let y = compute_y(ps, x)?;
    let z = compute_z_from_y(ps, &y)?;
    let witnesses = witnesses(x, &z)?;
    let central = central_coefficient_space(ps, x)?;
    let hn_ok = hn_check_with(ps, x, central.dim());
    let fast_paths = FastPaths::detect(ps, x);
    Ok(CapabilityReport {
        n: ps.n(),
        p: ps.prime(),
        dim_x: x.dim(),
        dim_y: y.dim(),
        dim_z: z.dim(),
        capable: witnesses.is_empty(),
        witnesses,
        central_dim: central.dim(),
        hn_ok,
        sufficient_hit: fast_paths.small_dim,
        fast_paths,
        x: x.clone(),
        y,
        z,
    })
}

/// The `V`-image of `[x_i, x_r]`, as a column-ready vector.
fn commutator_image(ps: &PhiStructure, i: usize, r: usize) -> Vec<(usize, u32)> {
    let p = ps.prime();
    let idx = ps.index();
    match i.cmp(&r) {
        std::cmp::Ordering::Greater => vec![(idx.pair_col(i, r), 1)],
        std::cmp::Ordering::Less => vec![(idx.pair_col(r, i), p.get() - 1)],
        std::cmp::Ordering::Equal => vec![],
    }
}

/// Matrix (dim V x n) of `psi_r : a -> sum_i a_i [x_i, x_r]`.
pub fn psi_matrix(ps: &PhiStructure, r: usize) -> FpMatrix {
    let mut m = FpMatrix::zeros(ps.prime(), ps.dim_v(), ps.n());
    for i in 1..=ps.n() {
        for (row, val) in commutator_image(ps, i, r) {
            m.set(row, i - 1, val);
        }
    }
    m
}

/// Coefficient vectors `a` in F_p^n such that `x_1^{a_1}...x_n^{a_n}` is
/// central modulo `[G,G]`, i.e. `psi_r(a)` lies in `X` for every `r`. Its
/// dimension is `dim Z(G)/[G,G]`.
pub fn central_coefficient_space(ps: &PhiStructure, x: &Subspace) -> Result<Subspace> {
    check_ambient(ps, x)?;
    let q = x.annihilator();
    let mut stacked = FpMatrix::zeros(ps.prime(), 0, ps.n());
    for r in 1..=ps.n() {
        stacked = stacked.vstack(&q.mul(&psi_matrix(ps, r))?)?;
    }
    Ok(stacked.kernel())
}

/// The matrix of the map induced on V by the generator change whose new
/// generators are the columns of `change`: column `(a, b)` holds the
/// old-basis coordinates of `[y_a, y_b]`.
pub fn alternating_square(ps: &PhiStructure, change: &FpMatrix) -> FpMatrix {
    let p = ps.prime();
    let pairs = ps.index().pairs();
    let mut m = FpMatrix::zeros(p, ps.dim_v(), ps.dim_v());
    for (col, new) in pairs.iter().enumerate() {
        for (row, old) in pairs.iter().enumerate() {
            let (a, b) = (new.j - 1, new.i - 1);
            let (j, i) = (old.j - 1, old.i - 1);
            let plus = p.mul(change.get(j, a), change.get(i, b));
            let minus = p.mul(change.get(i, a), change.get(j, b));
            m.set(row, col, p.sub(plus, minus));
        }
    }
    m
}

/// Result of splitting off the central cyclic factors: `G = K ⊕ C_p^r` with
/// `K` on `m = n - r` generators and relation subspace `reduced`.
#[derive(Clone, Debug, Serialize)]
pub struct SpecialReduction {
    pub m: usize,
    pub r: usize,
    /// Columns are the new generators in terms of the old ones; the last
    /// `r` columns span the central coefficient space.
    pub change: FpMatrix,
    /// `X` written in the new generators.
    pub transformed: Subspace,
    /// Relation subspace of `K`, over `V_m`.
    pub reduced: Subspace,
}

impl SpecialReduction {
    /// Capability of the original group, decided through `K`.
    pub fn verdict(&self) -> Result<bool> {
        if self.m <= 1 {
            // K is trivial or cyclic, so G is abelian of rank m + r.
            return Ok(self.m + self.r >= 2);
        }
        let ps = PhiStructure::build(self.m, self.reduced.prime())?;
        Ok(is_capable(&ps, &self.reduced)?.capable)
    }
}

pub fn reduce_special(ps: &PhiStructure, x: &Subspace) -> Result<SpecialReduction> {
    check_ambient(ps, x)?;
    let p = ps.prime();
    let n = ps.n();
    let central = central_coefficient_space(ps, x)?;
    let r = central.dim();
    let m = n - r;

    // Complete the central basis greedily with standard basis vectors.
    let mut span = central.clone();
    let mut completion = Vec::with_capacity(m);
    for g in 0..n {
        let mut e = vec![0u32; n];
        e[g] = 1;
        if !span.contains(&e)? {
            span = span.sum(&Subspace::span_residues(p, n, &[e.clone()]))?;
            completion.push(e);
        }
    }
    debug_assert_eq!(completion.len(), m);
    let columns: Vec<Vec<u32>> = completion
        .into_iter()
        .chain(central.basis().to_rows())
        .collect();
    let change = FpMatrix::from_residue_rows(p, n, &columns).transpose();

    let lambda = alternating_square(ps, &change);
    if lambda.rank() != ps.dim_v() {
        return Err(Error::DecompositionFailure(
            "generator change is not invertible on V".into(),
        ));
    }
    let transformed = x.preimage(&lambda)?;

    let idx = ps.index();
    let mut inner = Vec::new();
    for (col, pr) in idx.pairs().iter().enumerate() {
        if pr.j > m {
            let mut e = vec![0u32; ps.dim_v()];
            e[col] = 1;
            if !transformed.contains(&e)? {
                return Err(Error::DecompositionFailure(format!(
                    "{pr} is not a relation after the generator change"
                )));
            }
        }
    }
    // Coordinates of V_m inside V_n, listed in V_m's own order.
    if m >= 2 {
        let small = crate::phi::BasisIndex::new(m);
        for &PairIndex { j, i } in small.pairs() {
            inner.push(idx.pair_col(j, i));
        }
    }
    let outer = ps.dim_v() - inner.len();
    let inner_part = transformed.intersection(&coordinate_span(ps, &inner)?)?;
    if inner_part.dim() + outer != transformed.dim() {
        return Err(Error::DecompositionFailure(format!(
            "dim X' = {} but the split gives {} + {}",
            transformed.dim(),
            inner_part.dim(),
            outer
        )));
    }
    let reduced = inner_part.restrict(&inner);
    Ok(SpecialReduction {
        m,
        r,
        change,
        transformed,
        reduced,
    })
}

fn coordinate_span(ps: &PhiStructure, cols: &[usize]) -> Result<Subspace> {
    let rows: Vec<Vec<u32>> = cols
        .iter()
        .map(|&c| {
            let mut e = vec![0u32; ps.dim_v()];
            e[c] = 1;
            e
        })
        .collect();
    Ok(Subspace::span_residues(ps.prime(), ps.dim_v(), &rows))
}

/// Smallest `k >= 0` with `k^2 + 3k >= 2m`, i.e. `ceil((-3 + sqrt(9 + 8m)) / 2)`.
pub fn hn_required_rank(m: usize) -> usize {
    let m = m as u128;
    let mut k: u128 = 0;
    while k * k + 3 * k < 2 * m {
        k += 1;
    }
    k as usize
}

fn hn_check_with(ps: &PhiStructure, x: &Subspace, central_dim: usize) -> bool {
    let m = ps.n() - central_dim;
    let k = ps.dim_v() - x.dim();
    k >= hn_required_rank(m)
}

/// Necessary condition for capability: with `m = dim G/Z(G)` and
/// `k = dim [G,G]`, a capable group has `k >= ceil((-3 + sqrt(9 + 8m)) / 2)`.
pub fn hn_bound_check(ps: &PhiStructure, x: &Subspace) -> Result<bool> {
    let central = central_coefficient_space(ps, x)?;
    Ok(hn_check_with(ps, x, central.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(n: usize, p: u32) -> PhiStructure {
        PhiStructure::build(n, Prime::new(p).unwrap()).unwrap()
    }

    fn span_pairs(s: &PhiStructure, vecs: &[&[(usize, usize, i64)]]) -> Subspace {
        let rows: Vec<Vec<i64>> = vecs
            .iter()
            .map(|terms| {
                let mut v = vec![0i64; s.dim_v()];
                for &(j, i, c) in terms.iter() {
                    v[s.index().pair_to_col(j, i).unwrap()] += c;
                }
                v
            })
            .collect();
        Subspace::span(s.prime(), s.dim_v(), &rows).unwrap()
    }

    fn extraspecial(s: &PhiStructure) -> Subspace {
        span_pairs(
            s,
            &[
                &[(3, 1, 1), (3, 2, -1)],
                &[(3, 1, 1), (4, 1, -1)],
                &[(4, 2, 1)],
                &[(4, 3, 1)],
                &[(2, 1, 1)],
            ],
        )
    }

    #[test]
    fn y_examples() {
        let s = ps(4, 3);
        assert!(compute_y(&s, &Subspace::zero(s.prime(), 6))
            .unwrap()
            .is_zero());
        let x1 = span_pairs(&s, &[&[(2, 1, 1)], &[(3, 1, 1)], &[(4, 1, 1)]]);
        let x2 = span_pairs(&s, &[&[(2, 1, 1)], &[(3, 1, 1)], &[(3, 2, 1)]]);
        assert_eq!(compute_y(&s, &x1).unwrap().dim(), 12);
        assert_eq!(compute_y(&s, &x2).unwrap().dim(), 11);
        let x = span_pairs(&s, &[&[(4, 2, 1), (3, 1, 2)]]);
        assert_eq!(compute_y(&s, &x).unwrap().dim(), 4);
    }

    #[test]
    fn z_examples() {
        let s = ps(4, 3);
        let zero = Subspace::zero(s.prime(), 6);
        assert_eq!(compute_z(&s, &zero).unwrap(), zero);
        let full = Subspace::full(s.prime(), 6);
        assert_eq!(compute_z(&s, &full).unwrap(), full);
        assert!(compute_z(&s, &extraspecial(&s)).unwrap().is_full());
        let coord = span_pairs(&s, &[&[(2, 1, 1)], &[(4, 3, 1)]]);
        assert_eq!(compute_z(&s, &coord).unwrap(), coord);
    }

    #[test]
    fn extraspecial_is_not_capable() {
        for p in [3, 5, 7] {
            let s = ps(4, p);
            let x = extraspecial(&s);
            let rep = is_capable(&s, &x).unwrap();
            assert!(!rep.capable);
            assert_eq!((rep.dim_x, rep.dim_z), (5, 6));
            assert_eq!(rep.witnesses.len(), 1);
            // v41 lies in X + <witness> but not in X.
            let v41 = s.v(4, 1).unwrap();
            assert!(!x.contains(&v41).unwrap());
            let w = Subspace::span_residues(s.prime(), 6, &rep.witnesses);
            assert!(x.sum(&w).unwrap().contains(&v41).unwrap());
            assert_eq!(rep.central_dim, 0);
            assert!(!rep.hn_ok);
        }
    }

    #[test]
    fn mismatched_ambient_is_rejected() {
        let s = ps(4, 3);
        let bad = Subspace::zero(s.prime(), 5);
        assert!(compute_y(&s, &bad).is_err());
        assert!(is_capable(&s, &bad).is_err());
        let other = Subspace::zero(Prime::new(5).unwrap(), 6);
        assert!(matches!(
            compute_y(&s, &other),
            Err(Error::ModulusMismatch(5, 3))
        ));
    }

    #[test]
    fn central_space_examples() {
        let s = ps(4, 3);
        let full = Subspace::full(s.prime(), 6);
        assert!(central_coefficient_space(&s, &full).unwrap().is_full());
        assert!(central_coefficient_space(&s, &extraspecial(&s))
            .unwrap()
            .is_zero());

        // Brute force: all 27 coefficient vectors at n=3, X = 0.
        let s3 = ps(3, 3);
        let zero = Subspace::zero(s3.prime(), 3);
        let mut central = 0;
        for code in 0..27u32 {
            let a = [code % 3, code / 3 % 3, code / 9];
            let ok = (1..=3).all(|r| {
                psi_matrix(&s3, r)
                    .mul_vec(&a)
                    .unwrap()
                    .iter()
                    .all(|&x| x == 0)
            });
            central += ok as usize;
        }
        assert_eq!(central, 1);
        assert!(central_coefficient_space(&s3, &zero).unwrap().is_zero());
    }

    #[test]
    fn reduce_special_examples() {
        let s = ps(4, 3);
        let x = extraspecial(&s);
        let red = reduce_special(&s, &x).unwrap();
        assert_eq!((red.r, red.m), (0, 4));
        assert_eq!(red.reduced, x);
        assert!(!red.verdict().unwrap());

        let s3 = ps(3, 3);
        let x = span_pairs(&s3, &[&[(3, 1, 1)], &[(3, 2, 1)]]);
        let red = reduce_special(&s3, &x).unwrap();
        assert_eq!((red.r, red.m), (1, 2));
        assert!(red.reduced.is_zero());
        assert_eq!(red.reduced.ambient_dim(), 1);
        assert!(red.verdict().unwrap());

        let s2 = ps(2, 3);
        let red = reduce_special(&s2, &Subspace::full(s2.prime(), 1)).unwrap();
        assert_eq!((red.r, red.m), (2, 0));
        assert!(red.verdict().unwrap());
    }

    #[test]
    fn reduce_special_nontrivial_change() {
        // x1 x2 is central modulo the relations [x3,x1] = [x3,x2]^{-1}:
        // [x1 x2, x3] = [x1,x3][x2,x3] = -(v31 + v32).
        let s = ps(3, 5);
        let x = span_pairs(&s, &[&[(3, 1, 1), (3, 2, 1)], &[(2, 1, 1)]]);
        let c = central_coefficient_space(&s, &x).unwrap();
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&[1, 1, 0]).unwrap());
        let red = reduce_special(&s, &x).unwrap();
        assert_eq!((red.r, red.m), (1, 2));
        assert_eq!(red.verdict().unwrap(), is_capable(&s, &x).unwrap().capable);
    }

    #[test]
    fn hn_values() {
        // Float oracle for the closed form.
        for m in 0..2000usize {
            let root = (-3.0 + (9.0 + 8.0 * m as f64).sqrt()) / 2.0;
            let expected = (root - 1e-9).ceil().max(0.0) as usize;
            assert_eq!(hn_required_rank(m), expected, "m = {m}");
        }
        assert_eq!(hn_required_rank(4), 2);
        assert_eq!(hn_required_rank(3), 2);
        assert_eq!(hn_required_rank(0), 0);
        let s = ps(4, 3);
        assert!(!hn_bound_check(&s, &extraspecial(&s)).unwrap());
        assert!(hn_bound_check(&s, &Subspace::full(s.prime(), 6)).unwrap());
    }

    #[test]
    fn witness_formatting() {
        let s = ps(4, 3);
        let v = s.v(4, 1).unwrap();
        assert_eq!(format_v_vector(&s, &v), "v41");
        let mut u = vec![0u32; 6];
        u[s.index().pair_to_col(3, 1).unwrap()] = 1;
        u[s.index().pair_to_col(3, 2).unwrap()] = 2;
        assert_eq!(format_v_vector(&s, &u), "v31 - v32");
        assert_eq!(format_v_vector(&s, &[0; 6]), "0");
    }
}
