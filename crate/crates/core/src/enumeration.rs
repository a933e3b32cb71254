//! Sweeps over the Grassmannians `Gr(k, V)`.
//!
//! A `k`-dimensional subspace of `F_p^d` is identified with its RREF basis:
//! a pivot pattern (a `k`-subset of columns) plus the free entries, which sit
//! right of each pivot in non-pivot columns. Patterns are visited in
//! lexicographic order of the pivot sets and free entries are read as a
//! base-`p` number, row-major, first entry most significant. A pattern with
//! `f` free entries holds `p^f` subspaces, and the global rank of a subspace
//! is its offset in this order.

use std::collections::BTreeMap;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{compute_y, is_capable, is_coordinate_subspace, missing_index, reduce_special};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::linalg::{FpMatrix, Subspace};
use crate::phi::PhiStructure;

pub const DEFAULT_BUDGET: u128 = 100_000_000;

fn overflow(what: &str) -> Error {
    Error::InvalidParameter(format!("{what} does not fit in 128 bits"))
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

/// Gaussian binomial `[d choose k]_p`, the number of `k`-dimensional
/// subspaces of `F_p^d`.
pub fn gaussian_binomial(d: usize, k: usize, p: u32) -> Result<u128> {
    if k > d {
        return Err(Error::InvalidParameter(format!(
            "subspace dimension {k} exceeds ambient dimension {d}"
        )));
    }
    let q = u128::from(p);
    // Pascal-type recurrence [d,k] = [d-1,k-1] + q^k [d-1,k]; stays exact.
    let mut row = vec![1u128];
    for dd in 1..=d {
        let mut next = vec![1u128; dd + 1];
        for kk in 1..dd {
            let qk = checked_pow(q, kk).ok_or_else(|| overflow("Gaussian binomial"))?;
            next[kk] = qk
                .checked_mul(row[kk])
                .and_then(|t| t.checked_add(row[kk - 1]))
                .ok_or_else(|| overflow("Gaussian binomial"))?;
        }
        row = next;
    }
    Ok(row[k])
}

pub fn count_subspaces(d: usize, p: Prime, k: usize) -> Result<u128> {
    gaussian_binomial(d, k, p.get())
}

/// One RREF pivot pattern of `Gr(k, F_p^d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotPattern {
    pub pivots: Vec<usize>,
    /// `(row, column)` of each free entry, row-major.
    pub free: Vec<(usize, usize)>,
    /// `p^free.len()`.
    pub count: u128,
}

impl PivotPattern {
    pub fn new(d: usize, p: Prime, pivots: Vec<usize>) -> Result<Self> {
        let mut free = Vec::new();
        for (row, &pc) in pivots.iter().enumerate() {
            for col in pc + 1..d {
                if !pivots.contains(&col) {
                    free.push((row, col));
                }
            }
        }
        let count =
            checked_pow(u128::from(p.get()), free.len()).ok_or_else(|| overflow("pattern size"))?;
        Ok(PivotPattern {
            pivots,
            free,
            count,
        })
    }

    /// The subspace at offset `index` (must be `< count`).
    pub fn subspace(&self, d: usize, p: Prime, mut index: u128) -> Subspace {
        let k = self.pivots.len();
        let mut data = vec![0u32; k * d];
        for (row, &pc) in self.pivots.iter().enumerate() {
            data[row * d + pc] = 1;
        }
        let q = u128::from(p.get());
        for &(row, col) in self.free.iter().rev() {
            data[row * d + col] = (index % q) as u32;
            index /= q;
        }
        let basis = FpMatrix::new(p, k, d, data).expect("residues are reduced");
        Subspace::from_rref_unchecked(basis, self.pivots.clone())
    }
}

/// All `k`-subsets of `0..d` in lexicographic order.
fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > d {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let Some(t) = (0..k).rev().find(|&t| c[t] < d - k + t) else {
            return out;
        };
        c[t] += 1;
        for u in t + 1..k {
            c[u] = c[u - 1] + 1;
        }
    }
}

pub fn pivot_patterns(d: usize, p: Prime, k: usize) -> Result<Vec<PivotPattern>> {
    combinations(d, k)
        .into_iter()
        .map(|piv| PivotPattern::new(d, p, piv))
        .collect()
}

/// Yields every `k`-dimensional subspace of `F_p^d` once, in canonical order.
pub struct SubspaceIterator {
    d: usize,
    p: Prime,
    patterns: Vec<PivotPattern>,
    pattern: usize,
    cursor: u128,
}

impl SubspaceIterator {
    pub fn new(d: usize, p: Prime, k: usize) -> Result<Self> {
        if k > d {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension {k} exceeds ambient dimension {d}"
            )));
        }
        Ok(SubspaceIterator {
            d,
            p,
            patterns: pivot_patterns(d, p, k)?,
            pattern: 0,
            cursor: 0,
        })
    }

    /// `(pattern index, offset within pattern)` of the next subspace.
    pub fn position(&self) -> (usize, u128) {
        (self.pattern, self.cursor)
    }

    pub fn seek(&mut self, pattern: usize, cursor: u128) {
        self.pattern = pattern;
        self.cursor = cursor;
    }
}

impl Iterator for SubspaceIterator {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        while let Some(pat) = self.patterns.get(self.pattern) {
            if self.cursor < pat.count {
                let s = pat.subspace(self.d, self.p, self.cursor);
                self.cursor += 1;
                return Some(s);
            }
            self.pattern += 1;
            self.cursor = 0;
        }
        None
    }
}

/// Draws uniformly from `Gr(k, F_p^d)`: a pattern is chosen with probability
/// proportional to its size, then an offset uniformly inside it.
pub struct GrassmannianSampler {
    d: usize,
    p: Prime,
    patterns: Vec<PivotPattern>,
    cumulative: Vec<u128>,
}

impl GrassmannianSampler {
    pub fn new(d: usize, p: Prime, k: usize) -> Result<Self> {
        let patterns = pivot_patterns(d, p, k)?;
        let mut cumulative = Vec::with_capacity(patterns.len());
        let mut acc: u128 = 0;
        for pat in &patterns {
            acc = acc
                .checked_add(pat.count)
                .ok_or_else(|| overflow("Grassmannian size"))?;
            cumulative.push(acc);
        }
        Ok(GrassmannianSampler {
            d,
            p,
            patterns,
            cumulative,
        })
    }

    pub fn total(&self) -> u128 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    /// The subspace of global rank `rank`.
    pub fn nth(&self, rank: u128) -> Subspace {
        let t = self.cumulative.partition_point(|&c| c <= rank);
        let base = if t == 0 { 0 } else { self.cumulative[t - 1] };
        self.patterns[t].subspace(self.d, self.p, rank - base)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Subspace {
        self.nth(rng.gen_range(0..self.total()))
    }
}

/// Random subspace of `F_p^d`: the dimension is uniform, then the subspace is
/// uniform within that Grassmannian.
pub fn random_subspace<R: Rng + ?Sized>(d: usize, p: Prime, rng: &mut R) -> Result<Subspace> {
    let k = rng.gen_range(0..=d);
    Ok(GrassmannianSampler::new(d, p, k)?.sample(rng))
}

pub const AUDIT_RULES: [&str; 6] = [
    "small_dim_capable",
    "coordinate_capable",
    "missing_index_capable",
    "capable_meets_hn_bound",
    "small_dim_y",
    "reduce_special_agrees",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub dim_x: usize,
    pub basis: Vec<Vec<u32>>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimStats {
    pub k: usize,
    pub total: u128,
    pub capable: u128,
    pub non_capable: u128,
    /// `dim Y_X -> count`.
    pub dim_y: BTreeMap<usize, u128>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatchHit {
    pub watch: usize,
    pub capable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub n: usize,
    pub p: Prime,
    pub exhaustive: bool,
    pub sample: Option<u64>,
    pub seed: u64,
    pub dims: Vec<DimStats>,
    pub violation_counts: BTreeMap<String, u128>,
    /// The first few violations in visiting order.
    pub violations: Vec<Violation>,
    /// Watched subspaces that were visited, with their verdicts.
    pub watched: Vec<WatchHit>,
}

impl CensusReport {
    pub fn total(&self) -> u128 {
        self.dims.iter().map(|s| s.total).sum()
    }

    pub fn capable(&self) -> u128 {
        self.dims.iter().map(|s| s.capable).sum()
    }

    pub fn non_capable(&self) -> u128 {
        self.dims.iter().map(|s| s.non_capable).sum()
    }

    pub fn violation_total(&self) -> u128 {
        self.violation_counts.values().sum()
    }

    /// One row per `(k, verdict)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p,k,verdict,count\n");
        for s in &self.dims {
            for (verdict, count) in [("capable", s.capable), ("non_capable", s.non_capable)] {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    self.n, self.p, s.k, verdict, count
                ));
            }
        }
        out
    }
}

const MAX_RECORDED_VIOLATIONS: usize = 100;

#[derive(Clone, Debug)]
pub struct CensusConfig {
    pub n: usize,
    pub p: Prime,
    /// Subspace dimensions to visit; all of `0..=dim V` when `None`.
    pub dims: Option<RangeInclusive<usize>>,
    /// Draw this many uniform samples per dimension instead of sweeping.
    pub sample: Option<u64>,
    pub seed: u64,
    pub workers: usize,
    pub budget: u128,
    /// Subspaces whose verdicts are reported when visited.
    pub watch: Vec<Subspace>,
    pub checkpoint: Option<PathBuf>,
    /// Subspaces per shard.
    pub chunk: u128,
}

impl CensusConfig {
    pub fn new(n: usize, p: Prime) -> Self {
        CensusConfig {
            n,
            p,
            dims: None,
            sample: None,
            seed: 0,
            workers: 1,
            budget: DEFAULT_BUDGET,
            watch: Vec::new(),
            checkpoint: None,
            chunk: 2048,
        }
    }

    fn dim_range(&self, dim_v: usize) -> Result<RangeInclusive<usize>> {
        let r = self.dims.clone().unwrap_or(0..=dim_v);
        if r.is_empty() || *r.end() > dim_v {
            return Err(Error::InvalidParameter(format!(
                "dimension range {}..{} is not inside 0..{dim_v}",
                r.start(),
                r.end()
            )));
        }
        Ok(r)
    }
}

/// A contiguous slice of work: either a range of offsets within one pattern
/// or a block of samples.
#[derive(Clone, Debug)]
enum Shard {
    Sweep {
        k: usize,
        pattern: usize,
        start: u128,
        end: u128,
    },
    Sample {
        k: usize,
        block: u64,
        count: u64,
    },
}

impl Shard {
    fn k(&self) -> usize {
        match *self {
            Shard::Sweep { k, .. } | Shard::Sample { k, .. } => k,
        }
    }
}

/// Partial census state; merging is associative and order-sensitive only in
/// the violation and watch lists, which follow shard order.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
struct Tally {
    dims: BTreeMap<usize, DimStats>,
    violation_counts: BTreeMap<String, u128>,
    violations: Vec<Violation>,
    watched: Vec<WatchHit>,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        for (k, s) in other.dims {
            let e = self.dims.entry(k).or_insert_with(|| DimStats {
                k,
                ..DimStats::default()
            });
            e.total += s.total;
            e.capable += s.capable;
            e.non_capable += s.non_capable;
            for (dy, c) in s.dim_y {
                *e.dim_y.entry(dy).or_insert(0) += c;
            }
        }
        for (rule, c) in other.violation_counts {
            *self.violation_counts.entry(rule).or_insert(0) += c;
        }
        for v in other.violations {
            if self.violations.len() < MAX_RECORDED_VIOLATIONS {
                self.violations.push(v);
            }
        }
        self.watched.extend(other.watched);
    }
}

/// Everything a worker needs; shared read-only.
struct Context {
    ps: PhiStructure,
    reduced: Vec<Option<PhiStructure>>,
    samplers: BTreeMap<usize, GrassmannianSampler>,
    seed: u64,
    watch: Vec<Subspace>,
}

impl Context {
    fn visit(&self, x: &Subspace, tally: &mut Tally) -> Result<()> {
        let ps = &self.ps;
        let n = ps.n();
        let k = x.dim();
        let report = is_capable(ps, x)?;
        let stats = tally.dims.entry(k).or_insert_with(|| DimStats {
            k,
            ..DimStats::default()
        });
        stats.total += 1;
        if report.capable {
            stats.capable += 1;
        } else {
            stats.non_capable += 1;
        }
        *stats.dim_y.entry(report.dim_y).or_insert(0) += 1;

        let mut fail = |rule: &str, detail: String| {
            *tally.violation_counts.entry(rule.to_string()).or_insert(0) += 1;
            tally.violations.push(Violation {
                rule: rule.to_string(),
                dim_x: k,
                basis: x.basis().to_rows(),
                detail,
            });
        };
        if k <= 2 && !report.capable {
            fail(AUDIT_RULES[0], "dim X <= 2 but not capable".into());
        }
        if is_coordinate_subspace(x) && !report.capable {
            fail(AUDIT_RULES[1], "coordinate subspace but not capable".into());
        }
        if let Some(g) = missing_index(ps, x) {
            if !report.capable {
                fail(AUDIT_RULES[2], format!("index {g} unused but not capable"));
            }
        }
        if report.capable && !report.hn_ok {
            fail(AUDIT_RULES[3], "capable but below the rank bound".into());
        }
        if (k == 1 || k == 2) && report.dim_y != n * k {
            fail(
                AUDIT_RULES[4],
                format!("dim Y = {}, expected {}", report.dim_y, n * k),
            );
        }
        let red = reduce_special(ps, x)?;
        let verdict = if red.m <= 1 {
            red.m + red.r >= 2
        } else {
            let small = self.reduced[red.m]
                .as_ref()
                .expect("built for every m >= 2");
            is_capable(small, &red.reduced)?.capable
        };
        if verdict != report.capable {
            fail(
                AUDIT_RULES[5],
                format!("reduced verdict {verdict} (m = {}, r = {})", red.m, red.r),
            );
        }

        for (w, target) in self.watch.iter().enumerate() {
            if target == x {
                tally.watched.push(WatchHit {
                    watch: w,
                    capable: report.capable,
                });
            }
        }
        Ok(())
    }

    fn run(&self, shard: &Shard, patterns: &BTreeMap<usize, Vec<PivotPattern>>) -> Result<Tally> {
        let mut tally = Tally::default();
        tally.dims.insert(
            shard.k(),
            DimStats {
                k: shard.k(),
                ..DimStats::default()
            },
        );
        let (d, p) = (self.ps.dim_v(), self.ps.prime());
        match *shard {
            Shard::Sweep {
                k,
                pattern,
                start,
                end,
            } => {
                let pat = &patterns[&k][pattern];
                let mut i = start;
                while i < end {
                    self.visit(&pat.subspace(d, p, i), &mut tally)?;
                    i += 1;
                }
            }
            Shard::Sample { k, block, count } => {
                let mut rng = shard_rng(self.seed, k, block);
                let sampler = &self.samplers[&k];
                for _ in 0..count {
                    self.visit(&sampler.sample(&mut rng), &mut tally)?;
                }
            }
        }
        Ok(tally)
    }
}

fn shard_rng(seed: u64, k: usize, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((k as u64) << 40) | block);
    rng
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    fingerprint: String,
    completed: usize,
    tally: Tally,
}

fn fingerprint(cfg: &CensusConfig, dims: &RangeInclusive<usize>) -> String {
    let watch: Vec<Vec<Vec<u32>>> = cfg.watch.iter().map(|w| w.basis().to_rows()).collect();
    format!(
        "n={} p={} dims={}..={} sample={:?} seed={} chunk={} watch={:?}",
        cfg.n,
        cfg.p,
        dims.start(),
        dims.end(),
        cfg.sample,
        cfg.seed,
        cfg.chunk,
        watch
    )
}

fn load_checkpoint(path: &Path, fp: &str) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let ck: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    if ck.fingerprint != fp {
        return Err(Error::CheckpointMismatch(format!(
            "{} was written for `{}`, not `{fp}`",
            path.display(),
            ck.fingerprint
        )));
    }
    Ok(Some(ck))
}

fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_vec(ck)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Number of subspaces the configuration would visit.
pub fn planned_visits(cfg: &CensusConfig) -> Result<u128> {
    let ps_dim = crate::phi::binomial(cfg.n, 2);
    let dims = cfg.dim_range(ps_dim)?;
    let mut total: u128 = 0;
    for k in dims {
        let c = match cfg.sample {
            Some(s) => u128::from(s),
            None => count_subspaces(ps_dim, cfg.p, k)?,
        };
        total = total
            .checked_add(c)
            .ok_or_else(|| overflow("visit count"))?;
    }
    Ok(total)
}

pub fn census(cfg: &CensusConfig) -> Result<CensusReport> {
    if cfg.workers == 0 {
        return Err(Error::InvalidParameter("need at least one worker".into()));
    }
    if cfg.chunk == 0 {
        return Err(Error::InvalidParameter(
            "chunk size must be positive".into(),
        ));
    }
    let ps = PhiStructure::build(cfg.n, cfg.p)?;
    let d = ps.dim_v();
    let dims = cfg.dim_range(d)?;
    let visits = planned_visits(cfg)?;
    if visits > cfg.budget {
        return Err(Error::BudgetExceeded {
            count: visits,
            budget: cfg.budget,
        });
    }
    for w in &cfg.watch {
        if w.ambient_dim() != d || w.prime() != cfg.p {
            return Err(Error::InvalidParameter(
                "watched subspace is not in V".into(),
            ));
        }
    }

    let mut patterns = BTreeMap::new();
    let mut samplers = BTreeMap::new();
    let mut shards = Vec::new();
    for k in dims.clone() {
        match cfg.sample {
            None => {
                let pats = pivot_patterns(d, cfg.p, k)?;
                for (t, pat) in pats.iter().enumerate() {
                    let mut start = 0;
                    while start < pat.count {
                        let end = pat.count.min(start + cfg.chunk);
                        shards.push(Shard::Sweep {
                            k,
                            pattern: t,
                            start,
                            end,
                        });
                        start = end;
                    }
                }
                patterns.insert(k, pats);
            }
            Some(s) => {
                let per = cfg.chunk.min(u128::from(u64::MAX)) as u64;
                let mut done = 0;
                let mut block = 0;
                while done < s {
                    let count = per.min(s - done);
                    shards.push(Shard::Sample { k, block, count });
                    done += count;
                    block += 1;
                }
                samplers.insert(k, GrassmannianSampler::new(d, cfg.p, k)?);
            }
        }
    }

    let mut reduced = vec![None, None];
    for m in 2..=cfg.n {
        reduced.push(Some(PhiStructure::build(m, cfg.p)?));
    }
    let ctx = Context {
        ps,
        reduced,
        samplers,
        seed: cfg.seed,
        watch: cfg.watch.clone(),
    };

    let fp = fingerprint(cfg, &dims);
    let mut tally = Tally::default();
    for k in dims.clone() {
        tally.dims.insert(
            k,
            DimStats {
                k,
                ..DimStats::default()
            },
        );
    }
    let mut completed = 0;
    if let Some(path) = &cfg.checkpoint {
        if let Some(ck) = load_checkpoint(path, &fp)? {
            tally = ck.tally;
            completed = ck.completed.min(shards.len());
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    // Shards are processed in batches so a checkpoint can be written between them.
    let batch = (cfg.workers * 16).max(64);
    while completed < shards.len() {
        let end = shards.len().min(completed + batch);
        let parts: Vec<Result<Tally>> = pool.install(|| {
            shards[completed..end]
                .par_iter()
                .map(|s| ctx.run(s, &patterns))
                .collect()
        });
        for part in parts {
            tally.merge(part?);
        }
        completed = end;
        if let Some(path) = &cfg.checkpoint {
            save_checkpoint(
                path,
                &Checkpoint {
                    fingerprint: fp.clone(),
                    completed,
                    tally: tally.clone(),
                },
            )?;
        }
    }

    let mut violation_counts: BTreeMap<String, u128> =
        AUDIT_RULES.iter().map(|r| (r.to_string(), 0)).collect();
    for (rule, c) in tally.violation_counts {
        *violation_counts.entry(rule).or_insert(0) += c;
    }
    Ok(CensusReport {
        n: cfg.n,
        p: cfg.p,
        exhaustive: cfg.sample.is_none(),
        sample: cfg.sample,
        seed: cfg.seed,
        dims: tally.dims.into_values().collect(),
        violation_counts,
        violations: tally.violations,
        watched: tally.watched,
    })
}

/// Histogram of `dim Y_X` over `Gr(k, V)`: exhaustive when `samples` is
/// `None`, otherwise that many uniform draws.
pub fn dimy_profile(
    n: usize,
    p: Prime,
    k: usize,
    samples: Option<u64>,
    seed: u64,
    budget: u128,
) -> Result<BTreeMap<usize, u128>> {
    let ps = PhiStructure::build(n, p)?;
    let d = ps.dim_v();
    let sampler = GrassmannianSampler::new(d, p, k)?;
    let visits = samples.map(u128::from).unwrap_or(sampler.total());
    if visits > budget {
        return Err(Error::BudgetExceeded {
            count: visits,
            budget,
        });
    }
    let mut hist = BTreeMap::new();
    let mut add = |x: Subspace| -> Result<()> {
        *hist.entry(compute_y(&ps, &x)?.dim()).or_insert(0) += 1;
        Ok(())
    };
    match samples {
        None => {
            for x in SubspaceIterator::new(d, p, k)? {
                add(x)?;
            }
        }
        Some(s) => {
            let mut rng = shard_rng(seed, k, 0);
            for _ in 0..s {
                add(sampler.sample(&mut rng))?;
            }
        }
    }
    Ok(hist)
}
