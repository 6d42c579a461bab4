//! Binary words, bi-infinite sequences and the shift action.
//!
//! Every sequence is addressed by absolute integer index. A [`BiSequence`]
//! is immutable once built, so windows can be evaluated from any number of
//! threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Rational;

/// A nonempty finite word over {0,1}.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        if let Some(&s) = symbols.iter().find(|&&s| s > 1) {
            return Err(Error::InvalidSymbol(char::from(b'0' + s.min(9))));
        }
        Ok(Word(symbols))
    }

    pub(crate) fn from_vec_unchecked(symbols: Vec<u8>) -> Self {
        debug_assert!(!symbols.is_empty() && symbols.iter().all(|&s| s <= 1));
        Word(symbols)
    }

    /// The word of length `len` whose symbols are the low bits of `code`,
    /// most significant first.
    pub fn from_code(code: u64, len: usize) -> Self {
        assert!((1..=64).contains(&len));
        Word((0..len).map(|i| ((code >> (len - 1 - i)) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<u8> {
        self.0
    }

    pub fn at(&self, i: usize) -> u8 {
        self.0[i]
    }

    /// Symbol of the periodic extension `w^∞` at any integer index.
    pub fn cyclic(&self, i: i64) -> u8 {
        self.0[i.rem_euclid(self.0.len() as i64) as usize]
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&s| s == 1).count()
    }

    pub fn repeat(&self, m: usize) -> Word {
        assert!(m >= 1);
        Word(self.0.repeat(m))
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn complement(&self) -> Word {
        Word(self.0.iter().map(|s| 1 - s).collect())
    }

    pub fn rotate(&self, r: usize) -> Word {
        let mut v = self.0.clone();
        v.rotate_left(r % self.0.len());
        Word(v)
    }

    /// Subword starting at `start` of length `len`.
    pub fn sub(&self, start: usize, len: usize) -> Word {
        Word(self.0[start..start + len].to_vec())
    }

    /// Shortest `r` with `self = root^(len/r)`.
    pub fn primitive_root(&self) -> Word {
        let n = self.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (p..n).all(|i| self.0[i] == self.0[i - p]) {
                return Word(self.0[..p].to_vec());
            }
        }
        unreachable!()
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive_root().len() == self.len()
    }

    /// Whether `self` occurs at position `pos` of `text`.
    pub fn occurs_at(&self, text: &[u8], pos: usize) -> bool {
        text.get(pos..pos + self.len()) == Some(&self.0[..])
    }

    /// All `2^len` words of length `len` in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = Word> {
        assert!((1..=30).contains(&len));
        (0..1u64 << len).map(move |c| Word::from_code(c, len))
    }

    /// Lyndon words (primitive necklace representatives) of length 1..=max_len,
    /// ordered by length then lexicographically. One word per periodic orbit.
    pub fn lyndon_up_to(max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        for len in 1..=max_len {
            for w in Word::all(len) {
                if w.is_lyndon() {
                    out.push(w);
                }
            }
        }
        out
    }

    /// Strictly smaller than all its proper rotations.
    pub fn is_lyndon(&self) -> bool {
        (1..self.len()).all(|r| self.rotate(r) > *self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidSymbol(other)),
            })
            .collect::<Result<Vec<u8>>>()?;
        Word::new(v)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Hamming density `#{i : u_i ≠ v_i} / |u|`, exact.
pub fn mismatch_density(u: &Word, v: &Word) -> Result<Rational> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    let d = u.0.iter().zip(&v.0).filter(|(a, b)| a != b).count();
    Ok(Rational::new(d as i64, u.len() as i64))
}

const HALF_TURN: u128 = 1 << 127;

/// A circle rotation number stored as a 128-bit binary fraction.
///
/// Phases are multiples of the stored fraction modulo `2^128`; the coding
/// interval `[0, 1/2]` is `[0, 2^127]` in these units.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Rotation {
    frac: u128,
}

impl Rotation {
    /// `(√5 − 1)/2`, truncated to 128 fractional bits.
    pub fn golden() -> Self {
        let five: BigUint = BigUint::from(5u32) << 256usize;
        let s = five.sqrt();
        let bits: BigUint = (s - (BigUint::from(1u32) << 128)) >> 1;
        Rotation {
            frac: u128::try_from(bits).expect("golden fraction fits 128 bits"),
        }
    }

    /// Fractional part of `(p + q√d)/r`; `d` must not be a perfect square.
    pub fn from_quadratic(p: i64, q: i64, d: u64, r: i64) -> Result<Self> {
        let root = num_integer::Roots::sqrt(&d);
        if root * root == d || q == 0 || r == 0 {
            return Err(Error::InvalidParameter(format!(
                "({p} + {q}√{d})/{r} is not a quadratic irrational"
            )));
        }
        let scale: BigInt = BigInt::from(1) << 128usize;
        let radicand: BigUint = (BigUint::from(d) * BigUint::from(q.unsigned_abs()).pow(2)) << 256usize;
        let t = BigInt::from_biguint(Sign::Plus, radicand.sqrt());
        let t = if q < 0 { -t } else { t };
        let num: BigInt = BigInt::from(p) * &scale + t;
        let floored = num.div_floor(&BigInt::from(r)).mod_floor(&scale);
        let (_, digits) = floored.to_u64_digits();
        let mut frac = 0u128;
        for (i, d) in digits.iter().enumerate().take(2) {
            frac |= (*d as u128) << (64 * i);
        }
        Ok(Rotation { frac })
    }

    /// Only the 53 significand bits of `g` are meaningful.
    pub fn from_f64(g: f64) -> Result<Self> {
        if !(g > 0.0 && g < 1.0) {
            return Err(Error::InvalidParameter(format!("rotation {g} not in (0,1)")));
        }
        Ok(Rotation {
            frac: (g * 2f64.powi(128)) as u128,
        })
    }

    pub fn from_bits(frac: u128) -> Self {
        Rotation { frac }
    }

    pub fn bits(&self) -> u128 {
        self.frac
    }

    pub fn to_f64(&self) -> f64 {
        self.frac as f64 / 2f64.powi(128)
    }

    /// Phase `nγ mod 1` in units of `2^-128` (computed with the stored fraction).
    pub fn phase(&self, n: i64) -> u128 {
        (n as i128 as u128).wrapping_mul(self.frac)
    }

    /// Coding of a phase by the closed half circle `[0, 1/2]`.
    pub fn code(phase: u128) -> u8 {
        u8::from(phase <= HALF_TURN)
    }

    /// `χ_[0,1/2](frac(nγ))` for the true irrational, failing if the stored
    /// precision cannot decide the side of an endpoint.
    pub fn symbol(&self, n: i64) -> Result<u8> {
        let v = self.phase(n);
        let w = n.unsigned_abs() as u128;
        // the true phase lies in [lo, lo + w] modulo 2^128
        let lo = if n >= 0 { v } else { v.wrapping_sub(w) };
        match lo.checked_add(w) {
            Some(hi) if hi <= HALF_TURN => Ok(1),
            Some(_) if lo > HALF_TURN => Ok(0),
            _ => Err(Error::EndpointAmbiguity { index: n }),
        }
    }
}

impl Serialize for Rotation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if *self == Rotation::golden() {
            serializer.serialize_str("golden")
        } else {
            serializer.collect_str(&format_args!("0x{:032x}", self.frac))
        }
    }
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        use serde::de::Error as _;
        match Repr::deserialize(deserializer)? {
            Repr::Num(g) => Rotation::from_f64(g).map_err(D::Error::custom),
            Repr::Text(s) if s == "golden" => Ok(Rotation::golden()),
            Repr::Text(s) => {
                let hex = s
                    .strip_prefix("0x")
                    .ok_or_else(|| D::Error::custom("rotation must be \"golden\", hex, or a number"))?;
                u128::from_str_radix(hex, 16)
                    .map(Rotation::from_bits)
                    .map_err(D::Error::custom)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockKind {
    B,
    C,
}

impl BlockKind {
    fn idx(self) -> usize {
        match self {
            BlockKind::B => 0,
            BlockKind::C => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            BlockKind::B => BlockKind::C,
            BlockKind::C => BlockKind::B,
        }
    }
}

/// Nested blocks `B_{j+1} = B_j^{a_j} C_j`, `C_{j+1} = C_j^{a_j} B_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSystem {
    seeds: [Word; 2],
    exponents: Vec<u64>,
    lens: Vec<[u64; 2]>,
}

impl BlockSystem {
    pub fn new(seed_b: Word, seed_c: Word, exponents: Vec<u64>) -> Result<Self> {
        let mut lens = vec![[seed_b.len() as u64, seed_c.len() as u64]];
        for &a in &exponents {
            if a == 0 {
                return Err(Error::InvalidParameter("block exponents must be ≥ 1".into()));
            }
            let [b, c] = *lens.last().unwrap();
            let grow = |own: u64, other: u64| a.checked_mul(own).and_then(|x| x.checked_add(other));
            match (grow(b, c), grow(c, b)) {
                (Some(nb), Some(nc)) if nb < (1 << 62) && nc < (1 << 62) => lens.push([nb, nc]),
                _ => return Err(Error::InvalidParameter("block lengths overflow".into())),
            }
        }
        Ok(BlockSystem {
            seeds: [seed_b, seed_c],
            exponents,
            lens,
        })
    }

    /// Default exponents `a_j = 4^j`, `j = 1..=levels`.
    pub fn default_exponents(levels: usize) -> Vec<u64> {
        (1..=levels as u32).map(|j| 4u64.pow(j)).collect()
    }

    pub fn levels(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn len(&self, level: usize, kind: BlockKind) -> u64 {
        self.lens[level][kind.idx()]
    }

    pub fn symbol(&self, mut level: usize, mut kind: BlockKind, mut pos: u64) -> u8 {
        debug_assert!(pos < self.len(level, kind));
        while level > 0 {
            let a = self.exponents[level - 1];
            let own = self.lens[level - 1][kind.idx()];
            if pos < a * own {
                pos %= own;
            } else {
                pos -= a * own;
                kind = kind.other();
            }
            level -= 1;
        }
        self.seeds[kind.idx()].at(pos as usize)
    }

    /// The level-`level` sub-block containing `pos` of the top block
    /// `(top, kind)`: returns its kind and start offset.
    pub fn sub_block(&self, top: usize, kind: BlockKind, pos: u64, level: usize) -> (BlockKind, u64) {
        assert!(level <= top);
        let (mut l, mut k, mut p, mut start) = (top, kind, pos, 0u64);
        while l > level {
            let a = self.exponents[l - 1];
            let own = self.lens[l - 1][k.idx()];
            if p < a * own {
                let q = p / own;
                start += q * own;
                p -= q * own;
            } else {
                start += a * own;
                p -= a * own;
                k = k.other();
            }
            l -= 1;
        }
        (k, start)
    }

    pub fn block_word(&self, level: usize, kind: BlockKind) -> Word {
        let len = self.len(level, kind);
        assert!(len <= 1 << 28, "block too large to materialise");
        Word::from_vec_unchecked((0..len).map(|p| self.symbol(level, kind, p)).collect())
    }
}

/// A block system extended bi-infinitely: `B_depth` occupies the central
/// range `[-⌊len/2⌋, len - ⌊len/2⌋)`. Symbol queries outside that range fail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSequence {
    system: BlockSystem,
    depth: usize,
}

impl BlockSequence {
    pub fn system(&self) -> &BlockSystem {
        &self.system
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn central_range(&self) -> (i64, i64) {
        let len = self.system.len(self.depth, BlockKind::B) as i64;
        let lo = -(len / 2);
        (lo, lo + len)
    }

    pub fn symbol(&self, i: i64) -> Result<u8> {
        let (lo, hi) = self.central_range();
        if i < lo || i >= hi {
            return Err(Error::OutsideCentralBlock { index: i, lo, hi });
        }
        Ok(self.system.symbol(self.depth, BlockKind::B, (i - lo) as u64))
    }

    /// Symbol of the periodic tiling by `B_depth`.
    pub fn tiled_symbol(&self, i: i64) -> u8 {
        let (lo, hi) = self.central_range();
        let pos = (i - lo).rem_euclid(hi - lo) as u64;
        self.system.symbol(self.depth, BlockKind::B, pos)
    }

    /// Kind and absolute start of the level-`level` block containing index `i`.
    pub fn block_at(&self, i: i64, level: usize) -> Result<(BlockKind, i64)> {
        let (lo, hi) = self.central_range();
        if i < lo || i >= hi {
            return Err(Error::OutsideCentralBlock { index: i, lo, hi });
        }
        let (k, s) = self.system.sub_block(self.depth, BlockKind::B, (i - lo) as u64, level);
        Ok((k, lo + s as i64))
    }

    /// Absolute start of the first level-`level` block of `kind` starting at or after `from`.
    pub fn find_block(&self, level: usize, kind: BlockKind, from: i64) -> Option<i64> {
        let (lo, hi) = self.central_range();
        let mut i = from.max(lo);
        while i < hi {
            let (k, start) = self.block_at(i, level).ok()?;
            if k == kind && start >= from {
                return Some(start);
            }
            i = start + self.system.len(level, k) as i64;
        }
        None
    }
}

#[derive(Serialize, Deserialize)]
struct BlockSequenceRepr {
    seed_b: Word,
    seed_c: Word,
    exponents: Vec<u64>,
    depth: usize,
}

/// Infinite binary sequences indexed by ℤ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BiSequence {
    Periodic { word: Word },
    /// `z_n = χ_[0,1/2](frac((n + offset)γ))`.
    Sturmian { gamma: Rotation, offset: i64 },
    BlockRecursive(Arc<BlockSequence>),
    /// `(Shifted{s,k})_i = s_{i+k}`.
    Shifted { base: Box<BiSequence>, k: i64 },
    Complemented { base: Box<BiSequence> },
}

impl BiSequence {
    pub fn periodic(word: Word) -> Self {
        BiSequence::Periodic { word }
    }

    pub fn sturmian(gamma: Rotation, offset: i64) -> Self {
        BiSequence::Sturmian { gamma, offset }
    }

    pub fn golden_sturmian() -> Self {
        BiSequence::sturmian(Rotation::golden(), 0)
    }

    pub fn shifted(self, k: i64) -> Self {
        BiSequence::Shifted {
            base: Box::new(self),
            k,
        }
    }

    pub fn complemented(self) -> Self {
        BiSequence::Complemented { base: Box::new(self) }
    }

    pub fn symbol(&self, i: i64) -> Result<u8> {
        match self {
            BiSequence::Periodic { word } => Ok(word.cyclic(i)),
            BiSequence::Sturmian { gamma, offset } => gamma.symbol(i + offset),
            BiSequence::BlockRecursive(b) => b.symbol(i),
            BiSequence::Shifted { base, k } => base.symbol(i + k),
            BiSequence::Complemented { base } => base.symbol(i).map(|s| 1 - s),
        }
    }

    /// Symbols `a..=b` as a raw vector.
    pub fn fill(&self, a: i64, b: i64) -> Result<Vec<u8>> {
        if a > b {
            return Err(Error::EmptyWindow { a, b });
        }
        match self {
            BiSequence::Periodic { word } => Ok((a..=b).map(|i| word.cyclic(i)).collect()),
            BiSequence::Shifted { base, k } => base.fill(a + k, b + k),
            BiSequence::Complemented { base } => {
                let mut v = base.fill(a, b)?;
                v.iter_mut().for_each(|s| *s = 1 - *s);
                Ok(v)
            }
            _ => (a..=b).map(|i| self.symbol(i)).collect(),
        }
    }

    pub fn window(&self, a: i64, b: i64) -> Result<Word> {
        self.fill(a, b).map(Word::from_vec_unchecked)
    }

    /// Least period when the sequence is periodic.
    pub fn period(&self) -> Option<usize> {
        match self {
            BiSequence::Periodic { word } => Some(word.primitive_root().len()),
            BiSequence::Shifted { base, .. } | BiSequence::Complemented { base } => base.period(),
            _ => None,
        }
    }

    /// One period starting at index 0, when periodic.
    pub fn period_word(&self) -> Option<Word> {
        let p = self.period()?;
        self.window(0, p as i64 - 1).ok()
    }
}

impl Serialize for BiSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(tag = "variant")]
        enum Repr<'a> {
            Periodic { word: &'a Word },
            Sturmian { gamma: &'a Rotation, offset: i64 },
            BlockRecursive(BlockSequenceRepr),
            Shifted { base: &'a BiSequence, k: i64 },
            Complemented { base: &'a BiSequence },
        }
        let repr = match self {
            BiSequence::Periodic { word } => Repr::Periodic { word },
            BiSequence::Sturmian { gamma, offset } => Repr::Sturmian { gamma, offset: *offset },
            BiSequence::BlockRecursive(b) => Repr::BlockRecursive(BlockSequenceRepr {
                seed_b: b.system.seeds[0].clone(),
                seed_c: b.system.seeds[1].clone(),
                exponents: b.system.exponents.clone(),
                depth: b.depth,
            }),
            BiSequence::Shifted { base, k } => Repr::Shifted { base, k: *k },
            BiSequence::Complemented { base } => Repr::Complemented { base },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BiSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(tag = "variant")]
        enum Repr {
            Periodic { word: Word },
            Sturmian {
                gamma: Rotation,
                #[serde(default)]
                offset: i64,
            },
            BlockRecursive(BlockSequenceRepr),
            Shifted { base: Box<BiSequence>, k: i64 },
            Complemented { base: Box<BiSequence> },
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Periodic { word } => BiSequence::Periodic { word },
            Repr::Sturmian { gamma, offset } => BiSequence::Sturmian { gamma, offset },
            Repr::BlockRecursive(r) => block_sequence(r.seed_b, r.seed_c, &r.exponents, r.depth)
                .map_err(serde::de::Error::custom)?,
            Repr::Shifted { base, k } => BiSequence::Shifted { base, k },
            Repr::Complemented { base } => BiSequence::Complemented { base },
        })
    }
}

/// `window(seq, a, b)`: symbols `seq_a … seq_b`.
pub fn window(seq: &BiSequence, a: i64, b: i64) -> Result<Word> {
    seq.window(a, b)
}

/// Block-recursive sequence of the given depth, `B_depth` centred at 0.
pub fn block_sequence(seed_b: Word, seed_c: Word, exponents: &[u64], depth: usize) -> Result<BiSequence> {
    if depth > exponents.len() {
        return Err(Error::InvalidParameter(format!(
            "depth {depth} exceeds the {} supplied exponents",
            exponents.len()
        )));
    }
    let system = BlockSystem::new(seed_b, seed_c, exponents[..depth].to_vec())?;
    Ok(BiSequence::BlockRecursive(Arc::new(BlockSequence { system, depth })))
}

/// A shift-invariant set `Z`, in one of three finite descriptions.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum SubshiftSpec {
    PeriodicOrbit { word: Word },
    /// Sequences all of whose length-`l` subwords lie in `factors`.
    FactorSet { l: usize, factors: BTreeSet<Word> },
    /// Length-`l` factors seen in `seq` over `[-window, window]`.
    OrbitClosureApprox { seq: BiSequence, window: i64, l: usize },
}

/// Follower graph on length-`l` factors: `u → v` when `u[1..] = v[..l-1]`.
#[derive(Clone, Debug)]
pub struct FactorGraph {
    pub l: usize,
    pub factors: Vec<Word>,
    pub followers: Vec<Vec<usize>>,
}

impl FactorGraph {
    pub fn from_factors(l: usize, factors: &BTreeSet<Word>) -> Result<Self> {
        if l == 0 || factors.is_empty() {
            return Err(Error::InvalidParameter("factor set must be nonempty with l ≥ 1".into()));
        }
        if let Some(bad) = factors.iter().find(|w| w.len() != l) {
            return Err(Error::LengthMismatch(bad.len(), l));
        }
        let factors: Vec<Word> = factors.iter().cloned().collect();
        let mut by_prefix: BTreeMap<&[u8], Vec<usize>> = BTreeMap::new();
        for (i, f) in factors.iter().enumerate() {
            by_prefix.entry(&f.symbols()[..l - 1]).or_default().push(i);
        }
        let followers: Vec<Vec<usize>> = factors
            .iter()
            .map(|f| by_prefix.get(&f.symbols()[1..]).cloned().unwrap_or_default())
            .collect();
        if let Some(i) = followers.iter().position(Vec::is_empty) {
            return Err(Error::DeadEnd(factors[i].to_string()));
        }
        Ok(FactorGraph { l, factors, followers })
    }
}

impl SubshiftSpec {
    pub fn factor_graph(&self) -> Result<FactorGraph> {
        match self {
            SubshiftSpec::PeriodicOrbit { word } => {
                let root = word.primitive_root();
                let p = root.len();
                let set: BTreeSet<Word> = (0..p).map(|r| root.rotate(r)).collect();
                FactorGraph::from_factors(p, &set)
            }
            SubshiftSpec::FactorSet { l, factors } => FactorGraph::from_factors(*l, factors),
            SubshiftSpec::OrbitClosureApprox { seq, window, l } => {
                let syms = seq.fill(-window, *window)?;
                if syms.len() < *l {
                    return Err(Error::InvalidParameter("window shorter than factor length".into()));
                }
                let mut set: BTreeSet<Word> = syms
                    .windows(*l)
                    .map(|w| Word::from_vec_unchecked(w.to_vec()))
                    .collect();
                // boundary factors may lack a follower inside the window
                loop {
                    let prefixes: BTreeSet<Vec<u8>> =
                        set.iter().map(|w| w.symbols()[..l - 1].to_vec()).collect();
                    let before = set.len();
                    set.retain(|w| prefixes.contains(&w.symbols()[1..]));
                    if set.len() == before {
                        break;
                    }
                }
                FactorGraph::from_factors(*l, &set)
            }
        }
    }
}
