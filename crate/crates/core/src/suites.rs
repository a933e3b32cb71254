//! Named property suites: theorem consequences checked on concrete inputs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{compute_y, compute_z, is_capable};
use crate::enumeration::{random_subspace, GrassmannianSampler};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::linalg::Subspace;
use crate::oracle::{group_level_yx, phi_crosscheck};
use crate::phi::{PairIndex, PhiStructure};
use crate::presentation::{coordinate_subspace, coproduct, extend_with_central};

pub const SUITES: [&str; 6] = [
    "coordsub",
    "addcyclic",
    "coprod",
    "limits",
    "hn",
    "crosscheck",
];

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub n: usize,
    pub p: Prime,
    /// Random instances for the sampled suites.
    pub samples: usize,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(n: usize, p: Prime) -> Self {
        SuiteConfig {
            n,
            p,
            samples: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub n: usize,
    pub p: Prime,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, cfg: &SuiteConfig) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            n: cfg.n,
            p: cfg.p,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match name {
        "coordsub" => coordsub(cfg),
        "addcyclic" => addcyclic(cfg),
        "coprod" => coprod(cfg),
        "limits" => limits(cfg),
        "hn" => hn(cfg),
        "crosscheck" => crosscheck(cfg),
        _ => Err(Error::InvalidParameter(format!(
            "unknown suite `{name}`; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

fn rows(x: &Subspace) -> String {
    format!("{:?}", x.basis().to_rows())
}

/// Every coordinate subspace satisfies `Z_X = X`.
pub fn coordsub(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let ps = PhiStructure::build(cfg.n, cfg.p)?;
    let pairs = ps.index().pairs().to_vec();
    if pairs.len() > 20 {
        return Err(Error::InvalidParameter(format!(
            "2^{} coordinate subspaces is too many",
            pairs.len()
        )));
    }
    let mut rep = SuiteReport::new("coordsub", cfg);
    for mask in 0u32..1 << pairs.len() {
        let s: Vec<PairIndex> = (0..pairs.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| pairs[b])
            .collect();
        let x = coordinate_subspace(cfg.n, cfg.p, &s)?;
        let z = compute_z(&ps, &x)?;
        rep.check(z == x, || format!("Z_X != X for X = {}", rows(&x)));
    }
    Ok(rep)
}

/// Adding a central cyclic factor preserves the verdict.
pub fn addcyclic(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let ps = PhiStructure::build(cfg.n, cfg.p)?;
    let big = PhiStructure::build(cfg.n + 1, cfg.p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = SuiteReport::new("addcyclic", cfg);
    for _ in 0..cfg.samples {
        let x = random_subspace(ps.dim_v(), cfg.p, &mut rng)?;
        let a = is_capable(&ps, &x)?.capable;
        let b = is_capable(&big, &extend_with_central(cfg.n, &x)?)?.capable;
        rep.check(a == b, || {
            format!("verdict {a} but {b} after adding C_p, X = {}", rows(&x))
        });
    }
    Ok(rep)
}

/// Class-two coproducts are capable. Splits `n` as `a = n/2`, `b = n - a`.
pub fn coprod(cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.n < 4 {
        return Err(Error::InvalidParameter("coprod needs n >= 4".into()));
    }
    let a = cfg.n / 2;
    let b = cfg.n - a;
    let ps = PhiStructure::build(cfg.n, cfg.p)?;
    let (da, db) = (crate::phi::binomial(a, 2), crate::phi::binomial(b, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = SuiteReport::new("coprod", cfg);
    for _ in 0..cfg.samples {
        let xa = random_subspace(da, cfg.p, &mut rng)?;
        let xb = random_subspace(db, cfg.p, &mut rng)?;
        let x = coproduct(a, &xa, b, &xb)?;
        rep.check(is_capable(&ps, &x)?.capable, || {
            format!(
                "coproduct not capable: Xa = {}, Xb = {}",
                rows(&xa),
                rows(&xb)
            )
        });
    }
    Ok(rep)
}

fn span_pairs(ps: &PhiStructure, pairs: &[(usize, usize)]) -> Result<Subspace> {
    let s: Vec<PairIndex> = pairs.iter().map(|&(j, i)| PairIndex::new(j, i)).collect();
    coordinate_subspace(ps.n(), ps.prime(), &s)
}

/// `dim Y_X = n dim X` for `dim X` in {1, 2}, and for `3 <= k < n` the two
/// explicit `k`-dimensional subspaces reach `kn` and `kn - 1`.
pub fn limits(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let ps = PhiStructure::build(cfg.n, cfg.p)?;
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = SuiteReport::new("limits", cfg);
    for k in 1..=2.min(ps.dim_v()) {
        let sampler = GrassmannianSampler::new(ps.dim_v(), cfg.p, k)?;
        for _ in 0..cfg.samples {
            let x = sampler.sample(&mut rng);
            let dy = compute_y(&ps, &x)?.dim();
            rep.check(dy == n * k, || {
                format!("dim Y = {dy} != {} for X = {}", n * k, rows(&x))
            });
        }
    }
    for k in 3..n {
        let x1: Vec<(usize, usize)> = (2..=k + 1).map(|j| (j, 1)).collect();
        let mut x2 = vec![(2, 1), (3, 1), (3, 2)];
        x2.extend((5..=k + 1).map(|j| (j, 1)));
        let d1 = compute_y(&ps, &span_pairs(&ps, &x1)?)?.dim();
        let d2 = compute_y(&ps, &span_pairs(&ps, &x2)?)?.dim();
        rep.check(d1 == k * n, || {
            format!("k = {k}: dim Y(X1) = {d1}, expected {}", k * n)
        });
        rep.check(d2 == k * n - 1, || {
            format!("k = {k}: dim Y(X2) = {d2}, expected {}", k * n - 1)
        });
    }
    Ok(rep)
}

/// Capable groups meet the rank bound.
pub fn hn(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let ps = PhiStructure::build(cfg.n, cfg.p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = SuiteReport::new("hn", cfg);
    for _ in 0..cfg.samples {
        let x = random_subspace(ps.dim_v(), cfg.p, &mut rng)?;
        let r = is_capable(&ps, &x)?;
        rep.check(!r.capable || r.hn_ok, || {
            format!("capable but below the bound: X = {}", rows(&x))
        });
    }
    Ok(rep)
}

/// Group commutators agree with the phi matrices and with `Y_X`.
pub fn crosscheck(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let ps = PhiStructure::build(cfg.n, cfg.p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = SuiteReport::new("crosscheck", cfg);
    rep.check(phi_crosscheck(&ps)?, || {
        "phi columns disagree with [[x_j,x_i],x_r]".into()
    });
    for _ in 0..cfg.samples {
        let x = random_subspace(ps.dim_v(), cfg.p, &mut rng)?;
        let ok = group_level_yx(&ps, &x)? == compute_y(&ps, &x)?;
        rep.check(ok, || format!("[N,K] != Y_X for X = {}", rows(&x)));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, p: u32, samples: usize) -> SuiteConfig {
        SuiteConfig {
            samples,
            ..SuiteConfig::new(n, Prime::new(p).unwrap())
        }
    }

    #[test]
    fn every_suite_passes_small() {
        for name in SUITES {
            let c = cfg(4, 3, 20);
            let rep = run_suite(name, &c).unwrap();
            assert!(rep.passed(), "{name}: {:?}", rep.failures);
            assert!(rep.checks > 0);
        }
    }

    #[test]
    fn coordsub_counts_subsets() {
        assert_eq!(coordsub(&cfg(4, 3, 0)).unwrap().checks, 64);
        assert!(coordsub(&cfg(7, 3, 0)).is_err());
    }

    #[test]
    fn limits_covers_explicit_pairs() {
        // n = 5: k = 3 and k = 4, two checks each, plus the samples.
        let rep = limits(&cfg(5, 5, 10)).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.checks, 20 + 4);
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", &cfg(4, 3, 1)).is_err());
        assert!(coprod(&cfg(3, 3, 1)).is_err());
    }
}
