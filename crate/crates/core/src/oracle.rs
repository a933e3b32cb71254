//! Exact arithmetic in the class-three nilpotent product `K` of `n` cyclic
//! groups of order `p`, with `[K,K]` of exponent `p`.
//!
//! Every element has a unique normal form
//!
//! ```text
//! x_1^{a_1} ... x_n^{a_n} * prod [x_j,x_i]^{b_ji} * prod [x_j,x_i,x_k]^{c_jik}
//! ```
//!
//! with `i < j` and `i <= k`, all exponents mod `p`. Products are computed by
//! collection: generators are moved left in increasing index order, the
//! commutators this produces are accumulated in `K_2` (abelian), and
//! degree-three commutators not already basic are rewritten with the Jacobi
//! identity. `K_3` is central.
//!
//! This module is an independent ground truth for the linear-algebra engine.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::linalg::Subspace;
use crate::phi::{BasisIndex, PairIndex, PhiStructure};

/// Exponent vectors of an element in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NormalForm {
    /// Generator exponents, `a[g-1]` for `x_g`.
    pub a: Vec<u32>,
    /// Exponents of `[x_j,x_i]`, in V's pair order.
    pub b: Vec<u32>,
    /// Exponents of `[x_j,x_i,x_k]`, in W's triple order.
    pub c: Vec<u32>,
}

impl NormalForm {
    pub fn is_identity(&self) -> bool {
        self.a.iter().chain(&self.b).chain(&self.c).all(|&x| x == 0)
    }

    pub fn in_commutator_subgroup(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }
}

/// A word in the generators: `(generator, exponent)` letters, generators 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Word(pub Vec<(usize, i64)>);

impl Word {
    pub fn letter(g: usize, e: i64) -> Self {
        Word(vec![(g, e)])
    }

    /// The commutator word `x_j^{-1} x_i^{-1} x_j x_i`.
    pub fn commutator(j: usize, i: usize) -> Self {
        Word(vec![(j, -1), (i, -1), (j, 1), (i, 1)])
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|&(g, e)| (g, -e)).collect())
    }

    pub fn concat(mut self, other: &Word) -> Self {
        self.0.extend_from_slice(&other.0);
        self
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::default();
        for _ in 0..e.unsigned_abs() {
            out.0.extend_from_slice(&base.0);
        }
        out
    }
}

/// The group `K` for fixed `(n, p)`.
#[derive(Clone, Debug)]
pub struct NilpotentProduct {
    p: Prime,
    index: BasisIndex,
}

impl NilpotentProduct {
    pub fn new(n: usize, p: Prime) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "need at least one generator".into(),
            ));
        }
        Ok(NilpotentProduct {
            p,
            index: BasisIndex::new(n),
        })
    }

    pub fn n(&self) -> usize {
        self.index.n()
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn index(&self) -> &BasisIndex {
        &self.index
    }

    pub fn identity(&self) -> NormalForm {
        NormalForm {
            a: vec![0; self.n()],
            b: vec![0; self.index.dim_v()],
            c: vec![0; self.index.dim_w()],
        }
    }

    pub fn generator(&self, g: usize) -> Result<NormalForm> {
        if !(1..=self.n()).contains(&g) {
            return Err(Error::IndexOutOfRange(format!("generator x_{g}")));
        }
        let mut u = self.identity();
        u.a[g - 1] = 1;
        Ok(u)
    }

    /// The element of `K_2` with the given V-coordinates.
    pub fn from_commutator_coords(&self, b: &[u32]) -> Result<NormalForm> {
        if b.len() != self.index.dim_v() {
            return Err(Error::DimensionMismatch {
                expected: self.index.dim_v(),
                found: b.len(),
            });
        }
        let mut u = self.identity();
        u.b = b.iter().map(|&x| x % self.p.get()).collect();
        Ok(u)
    }

    pub fn basic_commutator(&self, j: usize, i: usize) -> Result<NormalForm> {
        let mut u = self.identity();
        u.b[self.index.pair_to_col(j, i)?] = 1;
        Ok(u)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> NormalForm {
        let p = self.p.get();
        let mut draw = |len| (0..len).map(|_| rng.gen_range(0..p)).collect();
        NormalForm {
            a: draw(self.n()),
            b: draw(self.index.dim_v()),
            c: draw(self.index.dim_w()),
        }
    }

    fn check(&self, u: &NormalForm) -> Result<()> {
        let shape = [
            (u.a.len(), self.n()),
            (u.b.len(), self.index.dim_v()),
            (u.c.len(), self.index.dim_w()),
        ];
        for (found, expected) in shape {
            if found != expected {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        if u.a
            .iter()
            .chain(&u.b)
            .chain(&u.c)
            .any(|&x| x >= self.p.get())
        {
            return Err(Error::InvalidParameter(format!(
                "exponents must be reduced modulo {}",
                self.p
            )));
        }
        Ok(())
    }

    /// `[x_j, x_i, x_r]` for `i < j` in terms of basic triples: already basic
    /// when `r >= i`, otherwise `[x_j,x_r,x_i] [x_i,x_r,x_j]^{-1}`.
    fn rewrite_triple(&self, j: usize, i: usize, r: usize) -> [(usize, u32); 2] {
        if r >= i {
            [(self.index.triple_col(j, i, r), 1), (0, 0)]
        } else {
            [
                (self.index.triple_col(j, r, i), 1),
                (self.index.triple_col(i, r, j), self.p.get() - 1),
            ]
        }
    }

    /// Right multiplication by a single generator `x_r`.
    fn mul_generator(&self, g: &mut NormalForm, r: usize) {
        let p = self.p;
        let n = self.n();
        // B x_r = x_r B [B, x_r]
        for (col, &PairIndex { j, i }) in self.index.pairs().iter().enumerate() {
            let e = g.b[col];
            if e == 0 {
                continue;
            }
            for (t, coef) in self.rewrite_triple(j, i, r) {
                if coef != 0 {
                    g.c[t] = p.add(g.c[t], p.mul(e, coef));
                }
            }
        }
        // T x_r = x_r T [T, x_r] with T = x_{r+1}^{a_{r+1}} ... x_n^{a_n}, expanded by
        // [x_s^e T', x_r] = [x_s^e, x_r] [[x_s^e, x_r], T'] [T', x_r].
        for s in r + 1..=n {
            let e = g.a[s - 1];
            if e == 0 {
                continue;
            }
            let bc = self.index.pair_col(s, r);
            g.b[bc] = p.add(g.b[bc], e);
            let tc = self.index.triple_col(s, r, s);
            g.c[tc] = p.add(g.c[tc], binom2(p, e));
            for t in s + 1..=n {
                let f = g.a[t - 1];
                if f != 0 {
                    let tc = self.index.triple_col(s, r, t);
                    g.c[tc] = p.add(g.c[tc], p.mul(e, f));
                }
            }
        }
        g.a[r - 1] = p.add(g.a[r - 1], 1);
    }

    fn mul_generator_pow(&self, g: &mut NormalForm, r: usize, e: u32) {
        for _ in 0..e {
            self.mul_generator(g, r);
        }
    }

    pub fn multiply(&self, u: &NormalForm, v: &NormalForm) -> Result<NormalForm> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.mul_unchecked(u, v))
    }

    fn mul_unchecked(&self, u: &NormalForm, v: &NormalForm) -> NormalForm {
        let p = self.p;
        let mut g = u.clone();
        for (r, &e) in v.a.iter().enumerate() {
            self.mul_generator_pow(&mut g, r + 1, e);
        }
        // K_2 is abelian and K_3 central.
        for (x, &y) in g.b.iter_mut().zip(&v.b) {
            *x = p.add(*x, y);
        }
        for (x, &y) in g.c.iter_mut().zip(&v.c) {
            *x = p.add(*x, y);
        }
        g
    }

    pub fn inverse(&self, u: &NormalForm) -> Result<NormalForm> {
        self.check(u)?;
        Ok(self.inv_unchecked(u))
    }

    fn inv_unchecked(&self, u: &NormalForm) -> NormalForm {
        let p = self.p;
        // w = x_n^{-a_n} ... x_1^{-a_1}; then u w lies in K_2 and
        // u^{-1} = w (u w)^{-1}.
        let mut uw = u.clone();
        let mut w = self.identity();
        for r in (1..=self.n()).rev() {
            let e = p.neg(u.a[r - 1]);
            self.mul_generator_pow(&mut uw, r, e);
            self.mul_generator_pow(&mut w, r, e);
        }
        debug_assert!(uw.in_commutator_subgroup());
        for (x, &y) in w.b.iter_mut().zip(&uw.b) {
            *x = p.sub(*x, y);
        }
        for (x, &y) in w.c.iter_mut().zip(&uw.c) {
            *x = p.sub(*x, y);
        }
        w
    }

    /// `u^e` by square-and-multiply; negative exponents invert first.
    pub fn power(&self, u: &NormalForm, e: i64) -> Result<NormalForm> {
        self.check(u)?;
        let mut base = if e < 0 {
            self.inv_unchecked(u)
        } else {
            u.clone()
        };
        let mut e = e.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_unchecked(&acc, &base);
            }
            base = self.mul_unchecked(&base, &base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// `[u, v] = u^{-1} v^{-1} u v`.
    pub fn commutator(&self, u: &NormalForm, v: &NormalForm) -> Result<NormalForm> {
        self.check(u)?;
        self.check(v)?;
        let ui = self.inv_unchecked(u);
        let vi = self.inv_unchecked(v);
        let uv = self.mul_unchecked(u, v);
        Ok(self.mul_unchecked(&self.mul_unchecked(&ui, &vi), &uv))
    }

    pub fn evaluate(&self, word: &Word) -> Result<NormalForm> {
        let mut g = self.identity();
        for &(gen, e) in &word.0 {
            if !(1..=self.n()).contains(&gen) {
                return Err(Error::IndexOutOfRange(format!("generator x_{gen}")));
            }
            self.mul_generator_pow(&mut g, gen, self.p.reduce(e));
        }
        Ok(g)
    }
}

fn binom2(p: Prime, e: u32) -> u32 {
    let e = e as u64;
    ((e * (e.saturating_sub(1)) / 2) % p.get() as u64) as u32
}

fn same_params(ps: &PhiStructure, k: &NilpotentProduct) -> bool {
    ps.n() == k.n() && ps.prime() == k.prime()
}

/// Checks, for every pair `(j,i)` and every `r`, that the group commutator
/// `[[x_j,x_i], x_r]` has W-coordinates equal to column `(j,i)` of `phi_r`.
pub fn phi_crosscheck(ps: &PhiStructure) -> Result<bool> {
    let k = NilpotentProduct::new(ps.n(), ps.prime())?;
    for (col, pr) in ps.index().pairs().iter().enumerate() {
        let basic = k.basic_commutator(pr.j, pr.i)?;
        for r in 1..=ps.n() {
            let c = k.commutator(&basic, &k.generator(r)?)?;
            if !c.in_commutator_subgroup() || c.b.iter().any(|&x| x != 0) {
                return Ok(false);
            }
            let mut column = vec![0u32; ps.dim_w()];
            for &(row, val) in ps.phi_column(r, col) {
                column[row] = val;
            }
            if c.c != column {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `[N, K]` in W-coordinates, computed with group commutators: the span of
/// `[k, x_r]` over a basis `k` of the relation subgroup and all generators.
pub fn group_level_yx(ps: &PhiStructure, x: &Subspace) -> Result<Subspace> {
    let k = NilpotentProduct::new(ps.n(), ps.prime())?;
    if x.ambient_dim() != ps.dim_v() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim_v(),
            found: x.ambient_dim(),
        });
    }
    debug_assert!(same_params(ps, &k));
    let mut rows = Vec::new();
    for v in x.basis_vectors() {
        let elem = k.from_commutator_coords(v)?;
        for r in 1..=ps.n() {
            let c = k.commutator(&elem, &k.generator(r)?)?;
            debug_assert!(c.in_commutator_subgroup() && c.b.iter().all(|&x| x == 0));
            rows.push(c.c);
        }
    }
    Ok(Subspace::span_residues(ps.prime(), ps.dim_w(), &rows))
}

/// One row of the self-test table.
#[derive(Clone, Debug, Serialize)]
pub struct SelfTestRow {
    pub check: String,
    pub n: usize,
    pub p: u32,
    pub trials: usize,
    pub failures: usize,
}

impl SelfTestRow {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug)]
pub struct SelfTestConfig {
    pub ns: Vec<usize>,
    pub primes: Vec<u32>,
    /// Random instances per commutator identity.
    pub identity_trials: usize,
    pub assoc_trials: usize,
    pub seed: u64,
}

impl Default for SelfTestConfig {
    fn default() -> Self {
        SelfTestConfig {
            ns: vec![2, 3, 4, 5],
            primes: vec![3, 5],
            identity_trials: 1000,
            assoc_trials: 500,
            seed: 0x5eed,
        }
    }
}

fn binom2_int(r: i64) -> i64 {
    r * (r - 1) / 2
}

/// Runs the commutator identities, group axioms, Jacobi rewriting and the
/// phi crosscheck over every configured `(n, p)`.
pub fn selftest(cfg: &SelfTestConfig) -> Result<Vec<SelfTestRow>> {
    use rand::SeedableRng;
    let mut rows = Vec::new();
    for &p in &cfg.primes {
        let prime = Prime::new(p)?;
        for &n in &cfg.ns {
            let k = NilpotentProduct::new(n, prime)?;
            let mut rng =
                rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed ^ ((n as u64) << 32) ^ p as u64);
            let mul = |a: &NormalForm, b: &NormalForm| k.mul_unchecked(a, b);
            let com = |a: &NormalForm, b: &NormalForm| k.commutator(a, b).unwrap();
            let pow = |a: &NormalForm, e: i64| k.power(a, e).unwrap();
            let mut record = |name: &str, trials: usize, failures: usize| {
                rows.push(SelfTestRow {
                    check: name.to_string(),
                    n,
                    p,
                    trials,
                    failures,
                })
            };

            let t = cfg.assoc_trials;
            let mut bad = 0;
            for _ in 0..t {
                let (x, y, z) = (k.random(&mut rng), k.random(&mut rng), k.random(&mut rng));
                bad += (mul(&mul(&x, &y), &z) != mul(&x, &mul(&y, &z))) as usize;
            }
            record("associativity", t, bad);

            let mut bad = 0;
            for _ in 0..t {
                let x = k.random(&mut rng);
                let e = k.identity();
                let ok = mul(&x, &e) == x
                    && mul(&e, &x) == x
                    && mul(&k.inv_unchecked(&x), &x).is_identity()
                    && mul(&x, &k.inv_unchecked(&x)).is_identity();
                bad += !ok as usize;
            }
            record("identity and inverse", t, bad);

            let t = cfg.identity_trials;
            let range = 3 * p as i64;
            let (mut ba, mut bb, mut bc, mut bd, mut be) = (0, 0, 0, 0, 0);
            for _ in 0..t {
                let (x, y, z) = (k.random(&mut rng), k.random(&mut rng), k.random(&mut rng));
                // (a) [xy,z] = [x,z][x,z,y][y,z]
                let lhs = com(&mul(&x, &y), &z);
                let xz = com(&x, &z);
                let rhs = mul(&mul(&xz, &com(&xz, &y)), &com(&y, &z));
                ba += (lhs != rhs) as usize;
                // (b) [x,yz] = [x,z][z,[y,x]][x,y]
                let lhs = com(&x, &mul(&y, &z));
                let rhs = mul(&mul(&com(&x, &z), &com(&z, &com(&y, &x))), &com(&x, &y));
                bb += (lhs != rhs) as usize;
                // (c) [x,y,z][y,z,x][z,x,y] = e
                let j = mul(
                    &mul(&com(&com(&x, &y), &z), &com(&com(&y, &z), &x)),
                    &com(&com(&z, &x), &y),
                );
                bc += !j.is_identity() as usize;
                // (d), (e) power laws
                let r = rng.gen_range(-range..=range);
                let s = rng.gen_range(-range..=range);
                let xy = com(&x, &y);
                let xyx = com(&xy, &x);
                let xyy = com(&xy, &y);
                let lhs = com(&pow(&x, r), &pow(&y, s));
                let rhs = mul(
                    &mul(&pow(&xy, r * s), &pow(&xyx, s * binom2_int(r))),
                    &pow(&xyy, r * binom2_int(s)),
                );
                bd += (lhs != rhs) as usize;
                let lhs = com(&pow(&y, r), &pow(&x, s));
                let rhs = mul(
                    &mul(&pow(&xy, -r * s), &pow(&xyx, -r * binom2_int(s))),
                    &pow(&xyy, -s * binom2_int(r)),
                );
                be += (lhs != rhs) as usize;
            }
            record("commutator identity (a)", t, ba);
            record("commutator identity (b)", t, bb);
            record("commutator identity (c)", t, bc);
            record("commutator identity (d)", t, bd);
            record("commutator identity (e)", t, be);

            // Jacobi rewriting on generators: [x_j,x_i,x_r] = [x_j,x_r,x_i][x_i,x_r,x_j]^{-1}, r < i < j.
            let mut trials = 0;
            let mut bad = 0;
            let gens: Vec<NormalForm> = (1..=n).map(|g| k.generator(g).unwrap()).collect();
            for r in 1..=n {
                for i in r + 1..=n {
                    for j in i + 1..=n {
                        let (xj, xi, xr) = (&gens[j - 1], &gens[i - 1], &gens[r - 1]);
                        let lhs = com(&com(xj, xi), xr);
                        let rhs = mul(
                            &com(&com(xj, xr), xi),
                            &k.inv_unchecked(&com(&com(xi, xr), xj)),
                        );
                        trials += 1;
                        bad += (lhs != rhs) as usize;
                    }
                }
            }
            record("jacobi rewriting", trials, bad);

            if n >= 2 {
                let ps = PhiStructure::build(n, prime)?;
                let ok = phi_crosscheck(&ps)?;
                record("phi crosscheck", ps.dim_v() * n, !ok as usize);
            }
        }
    }
    Ok(rows)
}
