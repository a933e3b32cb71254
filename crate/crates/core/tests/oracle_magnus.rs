//! Checks the collection engine against a model it shares no code with: the
//! Magnus map `x_i -> 1 + X_i` into the units of the free associative algebra
//! over F_p truncated in degree 4. For `p >= 5` this map is a faithful
//! representation of the class-three exponent-p group, so products, inverses
//! and commutators computed by collection must match matrix-free algebra
//! products exactly, and distinct normal forms must have distinct images.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use capacheck_core::oracle::{NilpotentProduct, NormalForm, Word};
use capacheck_core::phi::BasisIndex;
use capacheck_core::Prime;

/// Element of `F_p<X_1..X_n> / (degree >= 4)`, dense over words of length <= 3.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Trunc {
    n: usize,
    p: u64,
    coef: Vec<u64>,
}

impl Trunc {
    fn offset(n: usize, len: usize) -> usize {
        (0..len).map(|l| n.pow(l as u32)).sum()
    }

    fn size(n: usize) -> usize {
        Self::offset(n, 4)
    }

    fn zero(n: usize, p: u64) -> Self {
        Trunc {
            n,
            p,
            coef: vec![0; Self::size(n)],
        }
    }

    fn one(n: usize, p: u64) -> Self {
        let mut t = Self::zero(n, p);
        t.coef[0] = 1;
        t
    }

    /// `(length, code)` of each slot, code read base n.
    fn slot(&self, idx: usize) -> (usize, usize) {
        let mut len = 0;
        while Self::offset(self.n, len + 1) <= idx {
            len += 1;
        }
        (len, idx - Self::offset(self.n, len))
    }

    fn mul(&self, other: &Trunc) -> Trunc {
        let mut out = Self::zero(self.n, self.p);
        for (ia, &a) in self.coef.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let (la, ca) = self.slot(ia);
            for (ib, &b) in other.coef.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let (lb, cb) = other.slot(ib);
                if la + lb > 3 {
                    continue;
                }
                let code = ca * self.n.pow(lb as u32) + cb;
                let slot = Self::offset(self.n, la + lb) + code;
                out.coef[slot] = (out.coef[slot] + a * b) % self.p;
            }
        }
        out
    }

    /// `(1 + N)^{-1} = 1 - N + N^2 - N^3` for `N` without constant term.
    fn inverse(&self) -> Trunc {
        assert_eq!(self.coef[0], 1);
        let mut nil = self.clone();
        nil.coef[0] = 0;
        let mut out = Self::one(self.n, self.p);
        let mut term = Self::one(self.n, self.p);
        for k in 1..=3 {
            term = term.mul(&nil);
            for (o, &t) in out.coef.iter_mut().zip(&term.coef) {
                *o = if k % 2 == 1 {
                    (*o + self.p - t) % self.p
                } else {
                    (*o + t) % self.p
                };
            }
        }
        out
    }

    fn pow(&self, e: u32) -> Trunc {
        (0..e).fold(Self::one(self.n, self.p), |acc, _| acc.mul(self))
    }

    fn commutator(&self, other: &Trunc) -> Trunc {
        self.inverse().mul(&other.inverse()).mul(self).mul(other)
    }
}

struct Magnus {
    k: NilpotentProduct,
    idx: BasisIndex,
    gens: Vec<Trunc>,
}

impl Magnus {
    fn new(n: usize, p: u32) -> Self {
        let prime = Prime::new(p).unwrap();
        let gens = (0..n)
            .map(|g| {
                let mut t = Trunc::one(n, p as u64);
                t.coef[Trunc::offset(n, 1) + g] = 1;
                t
            })
            .collect();
        Magnus {
            k: NilpotentProduct::new(n, prime).unwrap(),
            idx: BasisIndex::new(n),
            gens,
        }
    }

    fn gen(&self, g: usize) -> &Trunc {
        &self.gens[g - 1]
    }

    /// Image of `x_1^{a_1}..x_n^{a_n} prod [x_j,x_i]^b prod [x_j,x_i,x_k]^c`.
    fn image(&self, u: &NormalForm) -> Trunc {
        let n = self.gens.len();
        let p = self.gens[0].p;
        let mut acc = Trunc::one(n, p);
        for (g, &e) in u.a.iter().enumerate() {
            acc = acc.mul(&self.gen(g + 1).pow(e));
        }
        for (pr, &e) in self.idx.pairs().iter().zip(&u.b) {
            let c = self.gen(pr.j).commutator(self.gen(pr.i));
            acc = acc.mul(&c.pow(e));
        }
        for (t, &e) in self.idx.triples().iter().zip(&u.c) {
            let c = self
                .gen(t.j)
                .commutator(self.gen(t.i))
                .commutator(self.gen(t.k));
            acc = acc.mul(&c.pow(e));
        }
        acc
    }

    fn word_image(&self, w: &Word) -> Trunc {
        let n = self.gens.len();
        let p = self.gens[0].p;
        w.0.iter().fold(Trunc::one(n, p), |acc, &(g, e)| {
            let base = if e < 0 {
                self.gen(g).inverse()
            } else {
                self.gen(g).clone()
            };
            acc.mul(&base.pow(e.unsigned_abs() as u32))
        })
    }
}

#[test]
fn generators_have_order_p_in_the_model() {
    for p in [5u32, 7] {
        let m = Magnus::new(3, p);
        for g in 1..=3 {
            assert_eq!(m.gen(g).pow(p), Trunc::one(3, p as u64));
        }
        // Commutators of weight two also have order p.
        let c = m.gen(2).commutator(m.gen(1));
        assert_eq!(c.pow(p), Trunc::one(3, p as u64));
    }
}

#[test]
fn multiplication_is_a_homomorphism() {
    for p in [5u32, 7] {
        for n in 2..=4 {
            let m = Magnus::new(n, p);
            let mut rng = ChaCha8Rng::seed_from_u64(u64::from(p) * 100 + n as u64);
            for _ in 0..60 {
                let u = m.k.random(&mut rng);
                let v = m.k.random(&mut rng);
                let uv = m.k.multiply(&u, &v).unwrap();
                assert_eq!(m.image(&uv), m.image(&u).mul(&m.image(&v)), "n={n} p={p}");
            }
        }
    }
}

#[test]
fn inverse_commutator_and_power_match() {
    let m = Magnus::new(3, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let u = m.k.random(&mut rng);
        let v = m.k.random(&mut rng);
        assert_eq!(m.image(&m.k.inverse(&u).unwrap()), m.image(&u).inverse());
        assert_eq!(
            m.image(&m.k.commutator(&u, &v).unwrap()),
            m.image(&u).commutator(&m.image(&v))
        );
        assert_eq!(m.image(&m.k.power(&u, 3).unwrap()), m.image(&u).pow(3));
        assert_eq!(
            m.image(&m.k.power(&u, -2).unwrap()),
            m.image(&u).inverse().pow(2)
        );
    }
}

#[test]
fn swapping_two_generators() {
    // x_2 x_1 collected, checked in the model rather than by hand.
    let m = Magnus::new(2, 5);
    let x1 = m.k.generator(1).unwrap();
    let x2 = m.k.generator(2).unwrap();
    let prod = m.k.multiply(&x2, &x1).unwrap();
    assert_eq!(prod.a, vec![1, 1]);
    assert_eq!(m.image(&prod), m.gen(2).mul(m.gen(1)));
}

#[test]
fn words_evaluate_consistently() {
    let m = Magnus::new(4, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    use rand::Rng;
    for _ in 0..40 {
        let w = Word(
            (0..rng.gen_range(1..12))
                .map(|_| (rng.gen_range(1..=4), rng.gen_range(-9..10)))
                .collect(),
        );
        assert_eq!(m.image(&m.k.evaluate(&w).unwrap()), m.word_image(&w));
    }
}

#[test]
fn normal_form_is_faithful_for_two_generators() {
    // All 5^5 normal forms at n = 2 have pairwise distinct images.
    let m = Magnus::new(2, 5);
    let mut seen = HashSet::new();
    for code in 0..5u32.pow(5) {
        let d = |t: u32| (code / 5u32.pow(t)) % 5;
        let u = NormalForm {
            a: vec![d(0), d(1)],
            b: vec![d(2)],
            c: vec![d(3), d(4)],
        };
        assert!(seen.insert(m.image(&u).coef), "collision at {u:?}");
    }
}

#[test]
fn basic_triple_commutators() {
    // [[x_3,x_2],x_1] = [x_3,x_1,x_2] [x_2,x_1,x_3]^{-1} in the model too.
    let m = Magnus::new(3, 5);
    let b32 = m.k.basic_commutator(3, 2).unwrap();
    let c = m.k.commutator(&b32, &m.k.generator(1).unwrap()).unwrap();
    let lhs = m.gen(3).commutator(m.gen(2)).commutator(m.gen(1));
    assert_eq!(m.image(&c), lhs);
    let idx = BasisIndex::new(3);
    assert_eq!(c.c[idx.triple_to_col(3, 1, 2).unwrap()], 1);
    assert_eq!(c.c[idx.triple_to_col(2, 1, 3).unwrap()], 4);
}
