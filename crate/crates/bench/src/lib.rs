//! Inputs shared by the benchmarks.

use capacheck_core::enumeration::GrassmannianSampler;
use capacheck_core::presentation::build_extraspecial;
use capacheck_core::{PhiStructure, Prime, Subspace};

pub fn prime(p: u32) -> Prime {
    Prime::new(p).expect("benchmark primes are valid")
}

pub fn extraspecial(p: u32) -> (PhiStructure, Subspace) {
    let p = prime(p);
    let ps = PhiStructure::build(4, p).expect("n = 4 is valid");
    let x = build_extraspecial(p)
        .to_subspace()
        .expect("relators are commutators");
    (ps, x)
}

/// `count` subspaces of dimension `k` drawn with a fixed seed.
pub fn sample(ps: &PhiStructure, k: usize, count: usize, seed: u64) -> Vec<Subspace> {
    use rand::SeedableRng;
    let sampler = GrassmannianSampler::new(ps.dim_v(), ps.prime(), k).expect("k <= dim V");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sampler.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let (ps, x) = extraspecial(5);
        assert_eq!(x.dim(), 5);
        let xs = sample(&ps, 3, 4, 0);
        assert_eq!(xs.len(), 4);
        assert!(xs.iter().all(|x| x.dim() == 3));
        assert_eq!(xs, sample(&ps, 3, 4, 0));
    }
}
