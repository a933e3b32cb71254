//! Group presentations and the relation subspace `X` of V they determine.
//!
//! Text format:
//!
//! ```text
//! n=4 p=3
//! [3,1][3,2]^-1
//! [4,2]
//! ```
//!
//! The first line fixes the generator count and the prime. Every further
//! nonempty line is one relator, a product of commutators `[j,i]` (with
//! `j > i`) each optionally raised to an integer power. `#` starts a comment.
//! Generator powers are implicit: every generator has order `p`.
//!
//! A file whose header starts with `raw-V` instead lists a basis of `X`
//! directly, one comma-separated vector of `dim V` residues per line.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::linalg::Subspace;
use crate::oracle::{NilpotentProduct, Word};
use crate::phi::{binomial, BasisIndex, PairIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommutatorPower {
    pub j: usize,
    pub i: usize,
    pub e: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Relator(pub Vec<CommutatorPower>);

impl Relator {
    pub fn to_word(&self) -> Word {
        self.0.iter().fold(Word::default(), |w, f| {
            w.concat(&Word::commutator(f.j, f.i).pow(f.e))
        })
    }
}

impl fmt::Display for Relator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "[{},{}]", c.j, c.i)?;
            if c.e != 1 {
                write!(f, "^{}", c.e)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub n: usize,
    pub p: Prime,
    pub relators: Vec<Relator>,
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={} p={}", self.n, self.p)?;
        for r in &self.relators {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Either a presentation or a directly supplied relation subspace.
#[derive(Clone, Debug)]
pub enum GroupInput {
    Presentation(Presentation),
    Raw { n: usize, p: Prime, x: Subspace },
}

impl GroupInput {
    pub fn n(&self) -> usize {
        match self {
            GroupInput::Presentation(pres) => pres.n,
            GroupInput::Raw { n, .. } => *n,
        }
    }

    pub fn prime(&self) -> Prime {
        match self {
            GroupInput::Presentation(pres) => pres.p,
            GroupInput::Raw { p, .. } => *p,
        }
    }

    pub fn to_subspace(&self) -> Result<Subspace> {
        match self {
            GroupInput::Presentation(pres) => pres.to_subspace(),
            GroupInput::Raw { x, .. } => Ok(x.clone()),
        }
    }
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Lines with comments stripped, paired with 1-based line numbers; blank
/// lines dropped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.split('#').next().unwrap_or("");
        (!l.trim().is_empty()).then_some((k + 1, l))
    })
}

fn column_of(line: &str, token: &str) -> usize {
    line[..token.as_ptr() as usize - line.as_ptr() as usize]
        .chars()
        .count()
        + 1
}

#[derive(Default)]
struct Header {
    raw: bool,
    n: Option<usize>,
    p: Option<u32>,
}

fn parse_header(lineno: usize, line: &str) -> Result<Header> {
    let mut h = Header::default();
    for (t, tok) in line.split_whitespace().enumerate() {
        let col = column_of(line, tok);
        if t == 0 && tok == "raw-V" {
            h.raw = true;
            continue;
        }
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| perr(lineno, col, format!("expected key=value, found `{tok}`")))?;
        let bad = || perr(lineno, col, format!("`{val}` is not a nonnegative integer"));
        match key {
            "n" => h.n = Some(val.parse().map_err(|_| bad())?),
            "p" => h.p = Some(val.parse().map_err(|_| bad())?),
            _ => return Err(perr(lineno, col, format!("unknown header key `{key}`"))),
        }
    }
    Ok(h)
}

fn header_prime(lineno: usize, p: u32) -> Result<Prime> {
    Prime::new(p).map_err(|e| match e {
        Error::EvenPrime => perr(lineno, 1, "p = 2 is not supported: p must be an odd prime"),
        other => perr(lineno, 1, format!("p must be an odd prime: {other}")),
    })
}

/// Parses the presentation format (not `raw-V`).
pub fn parse(text: &str) -> Result<Presentation> {
    match parse_input(text, None, None)? {
        GroupInput::Presentation(pres) => Ok(pres),
        GroupInput::Raw { .. } => Err(perr(1, 1, "expected a presentation, found raw-V input")),
    }
}

/// Parses either format. `n` and `p` fill in values missing from the header
/// and must agree with it when both are given.
pub fn parse_input(text: &str, n: Option<usize>, p: Option<u32>) -> Result<GroupInput> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| perr(1, 1, "empty input: expected a header like `n=4 p=3`"))?;
    let h = parse_header(hline, header)?;
    let merge = |name: &str, from_file: Option<u64>, given: Option<u64>| -> Result<u64> {
        match (from_file, given) {
            (Some(a), Some(b)) if a != b => Err(perr(
                hline,
                1,
                format!("header says {name}={a} but {name}={b} was requested"),
            )),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(perr(hline, 1, format!("missing `{name}=` in header"))),
        }
    };
    let n = merge("n", h.n.map(|x| x as u64), n.map(|x| x as u64))? as usize;
    let p = header_prime(
        hline,
        merge("p", h.p.map(u64::from), p.map(u64::from))? as u32,
    )?;
    if n < 2 {
        return Err(perr(hline, 1, format!("need n >= 2 generators, got {n}")));
    }

    if h.raw {
        let dim = binomial(n, 2);
        let mut rows = Vec::new();
        for (lineno, line) in lines {
            let mut row = Vec::with_capacity(dim);
            for tok in line.split(',') {
                let t = tok.trim();
                let v: i64 = t.parse().map_err(|_| {
                    perr(
                        lineno,
                        column_of(line, tok),
                        format!("`{t}` is not an integer"),
                    )
                })?;
                row.push(p.reduce(v));
            }
            if row.len() != dim {
                return Err(perr(
                    lineno,
                    1,
                    format!(
                        "expected {dim} entries (dim V for n={n}), found {}",
                        row.len()
                    ),
                ));
            }
            rows.push(row);
        }
        let x = Subspace::span_residues(p, dim, &rows);
        return Ok(GroupInput::Raw { n, p, x });
    }

    let mut relators = Vec::new();
    for (lineno, line) in lines {
        relators.push(parse_relator(lineno, line, n)?);
    }
    Ok(GroupInput::Presentation(Presentation { n, p, relators }))
}

fn parse_relator(lineno: usize, line: &str, n: usize) -> Result<Relator> {
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut pos = 0;
    let col = |pos: usize| pos + 1;
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].1.is_whitespace() {
            *pos += 1;
        }
    };
    let read_int = |pos: &mut usize, signed: bool| -> Result<i64> {
        let start = *pos;
        if signed && *pos < chars.len() && (chars[*pos].1 == '-' || chars[*pos].1 == '+') {
            *pos += 1;
        }
        while *pos < chars.len() && chars[*pos].1.is_ascii_digit() {
            *pos += 1;
        }
        let s: String = chars[start..*pos].iter().map(|&(_, c)| c).collect();
        s.parse()
            .map_err(|_| perr(lineno, col(start), "expected an integer"))
    };
    let expect = |pos: &mut usize, c: char| -> Result<()> {
        if *pos < chars.len() && chars[*pos].1 == c {
            *pos += 1;
            Ok(())
        } else {
            let found = chars
                .get(*pos)
                .map(|&(_, c)| format!("`{c}`"))
                .unwrap_or_else(|| "end of line".into());
            Err(perr(
                lineno,
                col(*pos),
                format!("expected `{c}`, found {found}"),
            ))
        }
    };

    let mut factors = Vec::new();
    loop {
        skip_ws(&mut pos);
        if pos == chars.len() {
            break;
        }
        let start = pos;
        expect(&mut pos, '[')?;
        skip_ws(&mut pos);
        let j = read_int(&mut pos, false)?;
        skip_ws(&mut pos);
        expect(&mut pos, ',')?;
        skip_ws(&mut pos);
        let i = read_int(&mut pos, false)?;
        skip_ws(&mut pos);
        expect(&mut pos, ']')?;
        let (j, i) = (j as usize, i as usize);
        if !(1 <= i && i < j && j <= n) {
            return Err(perr(
                lineno,
                col(start),
                format!("commutator [{j},{i}] needs 1 <= i < j <= {n}"),
            ));
        }
        let mut e = 1;
        skip_ws(&mut pos);
        if pos < chars.len() && chars[pos].1 == '^' {
            pos += 1;
            skip_ws(&mut pos);
            e = read_int(&mut pos, true)?;
        }
        factors.push(CommutatorPower { j, i, e });
    }
    Ok(Relator(factors))
}

/// Evaluates words in the class-two quotient and spans their commutator
/// coordinates. Every word must lie in the commutator subgroup.
pub fn words_to_subspace(n: usize, p: Prime, words: &[Word]) -> Result<Subspace> {
    let k = NilpotentProduct::new(n, p)?;
    let mut rows = Vec::with_capacity(words.len());
    for (index, w) in words.iter().enumerate() {
        let g = k.evaluate(w)?;
        if !g.in_commutator_subgroup() {
            return Err(Error::RelatorNotInCommutator {
                index,
                exponents: g.a,
            });
        }
        rows.push(g.b);
    }
    Ok(Subspace::span_residues(p, binomial(n, 2), &rows))
}

impl Presentation {
    pub fn to_subspace(&self) -> Result<Subspace> {
        let words: Vec<Word> = self.relators.iter().map(Relator::to_word).collect();
        words_to_subspace(self.n, self.p, &words)
    }
}

/// The four-generator extra-special group of order `p^5`:
/// `[x3,x1] = [x3,x2] = [x4,x1]`, `[x4,x2] = [x4,x3] = [x2,x1] = e`.
pub fn build_extraspecial(p: Prime) -> Presentation {
    let c = |j, i, e| CommutatorPower { j, i, e };
    Presentation {
        n: 4,
        p,
        relators: vec![
            Relator(vec![c(3, 1, 1), c(3, 2, -1)]),
            Relator(vec![c(3, 1, 1), c(4, 1, -1)]),
            Relator(vec![c(4, 2, 1)]),
            Relator(vec![c(4, 3, 1)]),
            Relator(vec![c(2, 1, 1)]),
        ],
    }
}

fn check_v(x: &Subspace, n: usize) -> Result<()> {
    let dim = binomial(n, 2);
    if x.ambient_dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.ambient_dim(),
        });
    }
    Ok(())
}

/// Copies `x` from V(`from`) into V(`to`), relabelling generator `g` as `g + shift`.
fn embed(x: &Subspace, from: usize, to: usize, shift: usize) -> Vec<Vec<u32>> {
    let small = BasisIndex::new(from);
    let big = BasisIndex::new(to);
    x.basis_vectors()
        .map(|v| {
            let mut out = vec![0u32; big.dim_v()];
            for (&a, &PairIndex { j, i }) in v.iter().zip(small.pairs()) {
                out[big.pair_col(j + shift, i + shift)] = a;
            }
            out
        })
        .collect()
}

/// Relation subspace of the class-two nilpotent product of the groups with
/// relation subspaces `xa` (over V(a)) and `xb` (over V(b)); the second
/// factor's generators become `a+1, ..., a+b`.
pub fn coproduct(a: usize, xa: &Subspace, b: usize, xb: &Subspace) -> Result<Subspace> {
    if xa.prime() != xb.prime() {
        return Err(Error::ModulusMismatch(xa.prime().get(), xb.prime().get()));
    }
    if a == 0 || b == 0 {
        return Err(Error::InvalidParameter(
            "coproduct factors need generators".into(),
        ));
    }
    check_v(xa, a)?;
    check_v(xb, b)?;
    let n = a + b;
    let mut rows = embed(xa, a, n, 0);
    rows.extend(embed(xb, b, n, a));
    Ok(Subspace::span_residues(xa.prime(), binomial(n, 2), &rows))
}

/// Relation subspace of `G ⊕ C_p`: `x` embedded in V(n+1) plus every
/// `v_(n+1)i`.
pub fn extend_with_central(n: usize, x: &Subspace) -> Result<Subspace> {
    check_v(x, n)?;
    let big = BasisIndex::new(n + 1);
    let mut rows = embed(x, n, n + 1, 0);
    for i in 1..=n {
        let mut e = vec![0u32; big.dim_v()];
        e[big.pair_col(n + 1, i)] = 1;
        rows.push(e);
    }
    Ok(Subspace::span_residues(x.prime(), big.dim_v(), &rows))
}

/// Span of `{ v_ji : (j,i) in pairs }`.
pub fn coordinate_subspace(n: usize, p: Prime, pairs: &[PairIndex]) -> Result<Subspace> {
    let idx = BasisIndex::new(n);
    let rows = pairs
        .iter()
        .map(|pr| {
            let mut e = vec![0u32; idx.dim_v()];
            e[idx.pair_to_col(pr.j, pr.i)?] = 1;
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Subspace::span_residues(p, idx.dim_v(), &rows))
}
