//! The d-regular tree as the Cayley graph of the free product of d copies of
//! Z/2, and the product graphs `T×T` and `T×Z` built from it.
//!
//! A vertex of the tree is a reduced word over the generators `0..d`: no two
//! consecutive letters are equal, because every generator is an involution.
//! Right-multiplying by a generator either appends it or, when it equals the
//! last letter, cancels it. The length of the word is the distance to the
//! root.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::seed::mix64;

pub type Letter = u8;

const INLINE_LETTERS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("degree must be at least 3, got {0}")]
    Degree(u32),
    #[error("letter {letter} out of range for degree {d}")]
    Letter { letter: Letter, d: u8 },
    #[error("word is not reduced at position {0}")]
    NotReduced(usize),
    #[error("vertex set is empty")]
    EmptySet,
    #[error("operation {op} is not defined on {kind}")]
    Unsupported { op: &'static str, kind: GraphKind },
    #[error("enumeration of {requested} vertices exceeds the budget of {budget}")]
    Budget { requested: u128, budget: u128 },
}

/// A reduced word over involutive generators.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeWord {
    letters: SmallVec<[Letter; INLINE_LETTERS]>,
}

impl TreeWord {
    pub fn root() -> Self {
        Self::default()
    }

    /// Builds a word from letters that must already be reduced.
    pub fn from_reduced(letters: &[Letter]) -> Result<Self, TreeError> {
        if let Some(i) = letters.windows(2).position(|w| w[0] == w[1]) {
            return Err(TreeError::NotReduced(i + 1));
        }
        Ok(Self {
            letters: SmallVec::from_slice(letters),
        })
    }

    /// The product of the given generators, reduced.
    pub fn product<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut w = Self::root();
        for s in letters {
            w.push(s);
        }
        w
    }

    /// Distance to the root.
    #[inline]
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    #[inline]
    pub fn is_root(&self) -> bool {
        self.letters.is_empty()
    }

    #[inline]
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    #[inline]
    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// Right-multiplies by the generator `s`.
    #[inline]
    pub fn push(&mut self, s: Letter) {
        if self.letters.last() == Some(&s) {
            self.letters.pop();
        } else {
            self.letters.push(s);
        }
    }

    #[inline]
    pub fn times(&self, s: Letter) -> Self {
        let mut w = self.clone();
        w.push(s);
        w
    }

    pub fn parent(&self) -> Option<Self> {
        if self.is_root() {
            return None;
        }
        let mut w = self.clone();
        w.letters.pop();
        Some(w)
    }

    /// Group product `self · other`.
    pub fn mul(&self, other: &TreeWord) -> TreeWord {
        let mut w = self.clone();
        for &s in other.letters() {
            w.push(s);
        }
        w
    }

    /// The inverse of a product of involutions is the reversed word.
    pub fn inverse(&self) -> TreeWord {
        TreeWord {
            letters: self.letters.iter().rev().copied().collect(),
        }
    }

    pub fn common_prefix_len(&self, other: &TreeWord) -> usize {
        self.letters
            .iter()
            .zip(other.letters.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Tree distance: `|x| + |y| − 2·lcp(x, y)`.
    pub fn distance(&self, other: &TreeWord) -> usize {
        self.len() + other.len() - 2 * self.common_prefix_len(other)
    }

    pub fn check_degree(&self, d: u8) -> Result<(), TreeError> {
        match self.letters.iter().find(|&&s| s >= d) {
            Some(&letter) => Err(TreeError::Letter { letter, d }),
            None => Ok(()),
        }
    }

    /// Folds the word into a running hash.
    #[inline]
    pub(crate) fn hash_into(letters: &[Letter], mut h: u64) -> u64 {
        h = mix64(h ^ (letters.len() as u64).wrapping_mul(0xa076_1d64_78bd_642f));
        for chunk in letters.chunks(8) {
            let mut packed = 0u64;
            for (i, &s) in chunk.iter().enumerate() {
                packed |= (s as u64 + 1) << (8 * i);
            }
            h = mix64(h ^ packed);
        }
        h
    }
}

impl fmt::Debug for TreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return f.write_str("ε");
        }
        for s in self.letters.iter() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Number of vertices at distance `k` from a vertex of the d-regular tree:
/// `1` for `k = 0`, `d·(d−1)^(k−1)` otherwise.
pub fn sphere_size(d: u8, k: u32) -> u128 {
    if k == 0 {
        1
    } else {
        d as u128 * (d as u128 - 1).pow(k - 1)
    }
}

/// Number of edges with exactly one endpoint in `set`, in the d-regular tree.
///
/// For a connected set this equals `(d−2)|A| + 2`; for a forest with `c`
/// components it equals `(d−2)|A| + 2c`.
pub fn edge_boundary(d: u8, set: &HashSet<TreeWord>) -> Result<u64, TreeError> {
    if set.is_empty() {
        return Err(TreeError::EmptySet);
    }
    let mut count = 0;
    for w in set {
        for s in 0..d {
            if !set.contains(&w.times(s)) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Alias of [`edge_boundary`] for the connected case.
pub fn connected_subtree_boundary(d: u8, set: &HashSet<TreeWord>) -> Result<u64, TreeError> {
    edge_boundary(d, set)
}

/// Number of connected components of `set` in the tree.
pub fn component_count(d: u8, set: &HashSet<TreeWord>) -> usize {
    let mut seen: HashSet<&TreeWord> = HashSet::with_capacity(set.len());
    let mut components = 0;
    for start in set {
        if seen.contains(start) {
            continue;
        }
        components += 1;
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start);
        while let Some(w) = queue.pop_front() {
            for s in 0..d {
                let n = w.times(s);
                if let Some(member) = set.get(&n) {
                    if seen.insert(member) {
                        queue.push_back(n);
                    }
                }
            }
        }
    }
    components
}

/// Grows a uniformly-attached random connected subtree of `size` vertices
/// containing the root.
pub fn random_subtree<R: Rng + ?Sized>(d: u8, size: usize, rng: &mut R) -> HashSet<TreeWord> {
    let mut set = HashSet::with_capacity(size);
    let mut members = vec![TreeWord::root()];
    set.insert(TreeWord::root());
    while set.len() < size.max(1) {
        let base = &members[rng.random_range(0..members.len())];
        let next = base.times(rng.random_range(0..d));
        if set.insert(next.clone()) {
            members.push(next);
        }
    }
    set
}

/// Which product graph is being percolated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    /// A single d-regular tree.
    Tree,
    /// `T×T`.
    #[serde(alias = "TxT")]
    Txt,
    /// `T×Z`.
    #[serde(alias = "TxZ")]
    Txz,
}

impl GraphKind {
    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Tree => "tree",
            GraphKind::Txt => "TxT",
            GraphKind::Txz => "TxZ",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GraphKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tree" => Ok(GraphKind::Tree),
            "txt" => Ok(GraphKind::Txt),
            "txz" => Ok(GraphKind::Txz),
            other => Err(format!("unknown graph kind `{other}` (tree, txt, txz)")),
        }
    }
}

/// The second coordinate of a product vertex.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fiber {
    Tree(TreeWord),
    Line(i64),
}

impl Fiber {
    #[inline]
    pub fn norm(&self) -> usize {
        match self {
            Fiber::Tree(w) => w.len(),
            Fiber::Line(z) => z.unsigned_abs() as usize,
        }
    }

    pub fn distance(&self, other: &Fiber) -> usize {
        match (self, other) {
            (Fiber::Tree(a), Fiber::Tree(b)) => a.distance(b),
            (Fiber::Line(a), Fiber::Line(b)) => a.abs_diff(*b) as usize,
            _ => panic!("mixed fiber types"),
        }
    }

    pub fn as_word(&self) -> Option<&TreeWord> {
        match self {
            Fiber::Tree(w) => Some(w),
            Fiber::Line(_) => None,
        }
    }
}

impl fmt::Debug for Fiber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fiber::Tree(w) => write!(f, "{w:?}"),
            Fiber::Line(z) => write!(f, "{z}"),
        }
    }
}

/// A vertex of the product graph. For the single-tree graph the second
/// coordinate stays at the root.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductVertex {
    pub a: TreeWord,
    pub b: Fiber,
}

impl ProductVertex {
    pub fn new(a: TreeWord, b: TreeWord) -> Self {
        Self { a, b: Fiber::Tree(b) }
    }

    pub fn on_line(a: TreeWord, z: i64) -> Self {
        Self { a, b: Fiber::Line(z) }
    }

    /// `|x| = |x₁| + |x₂|`.
    #[inline]
    pub fn norm(&self) -> usize {
        self.a.len() + self.b.norm()
    }

    /// The symmetry class `(|x₁|, |x₂|)`.
    #[inline]
    pub fn class(&self) -> LevelSpec {
        LevelSpec::new(self.a.len() as u32, self.b.norm() as u32)
    }
}

impl fmt::Debug for ProductVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.a, self.b)
    }
}

/// Identifies the symmetry class `{z : d(z₁,y₁)=k₁, d(z₂,y₂)=k₂}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LevelSpec {
    pub k1: u32,
    pub k2: u32,
}

impl LevelSpec {
    pub const fn new(k1: u32, k2: u32) -> Self {
        Self { k1, k2 }
    }

    pub const fn norm(self) -> u32 {
        self.k1 + self.k2
    }

    pub const fn swapped(self) -> Self {
        Self::new(self.k2, self.k1)
    }
}

/// Which coordinate an edge changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    First,
    Second,
}

impl Coord {
    pub fn index(self) -> u8 {
        match self {
            Coord::First => 1,
            Coord::Second => 2,
        }
    }
}

/// One move along an edge: right-multiplication by a generator of one
/// coordinate. On a `Z` coordinate letter `0` is `−1` and letter `1` is `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub coord: Coord,
    pub letter: Letter,
}

/// A canonical undirected edge: `base` is the endpoint whose changed
/// coordinate is shorter (on `Z`, smaller), and applying `(coord, letter)` to
/// `base` yields the other endpoint.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub base: ProductVertex,
    pub coord: Coord,
    pub letter: Letter,
}

impl fmt::Debug for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}--[{}:{}]", self.base, self.coord.index(), self.letter)
    }
}

impl EdgeKey {
    /// The edge traversed by taking `step` from `v`, canonicalized.
    pub fn from_step(v: &ProductVertex, step: Step) -> EdgeKey {
        match step.coord {
            Coord::First => {
                if v.a.last() == Some(step.letter) {
                    EdgeKey {
                        base: ProductVertex {
                            a: v.a.times(step.letter),
                            b: v.b.clone(),
                        },
                        coord: Coord::First,
                        letter: step.letter,
                    }
                } else {
                    EdgeKey {
                        base: v.clone(),
                        coord: Coord::First,
                        letter: step.letter,
                    }
                }
            }
            Coord::Second => match &v.b {
                Fiber::Tree(w) => {
                    let base = if w.last() == Some(step.letter) {
                        ProductVertex {
                            a: v.a.clone(),
                            b: Fiber::Tree(w.times(step.letter)),
                        }
                    } else {
                        v.clone()
                    };
                    EdgeKey {
                        base,
                        coord: Coord::Second,
                        letter: step.letter,
                    }
                }
                Fiber::Line(z) => {
                    let lo = if step.letter == 0 { *z - 1 } else { *z };
                    EdgeKey {
                        base: ProductVertex {
                            a: v.a.clone(),
                            b: Fiber::Line(lo),
                        },
                        coord: Coord::Second,
                        letter: 1,
                    }
                }
            },
        }
    }

    /// Re-canonicalizes; the identity on canonical keys.
    pub fn canonical(&self) -> EdgeKey {
        EdgeKey::from_step(&self.base, Step {
            coord: self.coord,
            letter: self.letter,
        })
    }

    pub fn endpoints(&self) -> (ProductVertex, ProductVertex) {
        let other = apply_step(&self.base, Step {
            coord: self.coord,
            letter: self.letter,
        });
        (self.base.clone(), other)
    }

    /// Hash of `(seed, edge)` computed without building the key.
    #[inline]
    pub(crate) fn fingerprint_of_step(seed: u64, v: &ProductVertex, step: Step) -> u64 {
        let mut h = mix64(seed ^ 0x51af_d7ed_558c_cd1d);
        match step.coord {
            Coord::First => {
                let a = v.a.letters();
                let base_a = if v.a.last() == Some(step.letter) {
                    &a[..a.len() - 1]
                } else {
                    a
                };
                h = mix64(h ^ (0x100 | step.letter as u64));
                h = TreeWord::hash_into(base_a, h);
                h = hash_fiber(&v.b, None, h);
            }
            Coord::Second => {
                let letter = match &v.b {
                    Fiber::Line(_) => 1,
                    Fiber::Tree(_) => step.letter,
                };
                h = mix64(h ^ (0x200 | letter as u64));
                h = TreeWord::hash_into(v.a.letters(), h);
                h = hash_fiber(&v.b, Some(step.letter), h);
            }
        }
        mix64(h)
    }

    pub fn fingerprint(&self, seed: u64) -> u64 {
        Self::fingerprint_of_step(seed, &self.base, Step {
            coord: self.coord,
            letter: self.letter,
        })
    }
}

#[inline]
fn hash_fiber(b: &Fiber, moving: Option<Letter>, h: u64) -> u64 {
    match b {
        Fiber::Tree(w) => {
            let l = w.letters();
            let base = match moving {
                Some(s) if w.last() == Some(s) => &l[..l.len() - 1],
                _ => l,
            };
            TreeWord::hash_into(base, h)
        }
        Fiber::Line(z) => {
            let lo = match moving {
                Some(0) => *z - 1,
                _ => *z,
            };
            mix64(h ^ (lo as u64).wrapping_mul(0xe703_7ed1_a0b4_28db) ^ 0x300)
        }
    }
}

#[inline]
pub fn apply_step(v: &ProductVertex, step: Step) -> ProductVertex {
    let mut out = v.clone();
    apply_step_in_place(&mut out, step);
    out
}

#[inline]
fn apply_step_in_place(v: &mut ProductVertex, step: Step) {
    match step.coord {
        Coord::First => v.a.push(step.letter),
        Coord::Second => match &mut v.b {
            Fiber::Tree(w) => w.push(step.letter),
            Fiber::Line(z) => *z += if step.letter == 0 { -1 } else { 1 },
        },
    }
}

/// A product graph of a given kind and tree degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductGraph {
    pub kind: GraphKind,
    pub d: u8,
}

impl ProductGraph {
    pub fn new(kind: GraphKind, d: u8) -> Result<Self, TreeError> {
        if d < 3 {
            return Err(TreeError::Degree(d as u32));
        }
        Ok(Self { kind, d })
    }

    pub fn tree(d: u8) -> Self {
        Self::new(GraphKind::Tree, d).expect("degree ≥ 3")
    }

    pub fn txt(d: u8) -> Self {
        Self::new(GraphKind::Txt, d).expect("degree ≥ 3")
    }

    pub fn txz(d: u8) -> Self {
        Self::new(GraphKind::Txz, d).expect("degree ≥ 3")
    }

    pub fn origin(&self) -> ProductVertex {
        match self.kind {
            GraphKind::Tree | GraphKind::Txt => {
                ProductVertex::new(TreeWord::root(), TreeWord::root())
            }
            GraphKind::Txz => ProductVertex::on_line(TreeWord::root(), 0),
        }
    }

    pub fn degree(&self) -> usize {
        match self.kind {
            GraphKind::Tree => self.d as usize,
            GraphKind::Txt => 2 * self.d as usize,
            GraphKind::Txz => self.d as usize + 2,
        }
    }

    pub fn is_valid(&self, v: &ProductVertex) -> bool {
        let first = v.a.check_degree(self.d).is_ok();
        match (self.kind, &v.b) {
            (GraphKind::Tree, Fiber::Tree(w)) => first && w.is_root(),
            (GraphKind::Txt, Fiber::Tree(w)) => first && w.check_degree(self.d).is_ok(),
            (GraphKind::Txz, Fiber::Line(_)) => first,
            _ => false,
        }
    }

    /// The moves out of `v` in enumeration order: coordinate 1 before
    /// coordinate 2 and, within a coordinate, by the resulting letter
    /// sequence (the parent sorts first, then children by letter; on `Z`,
    /// `−1` before `+1`).
    pub fn steps(&self, v: &ProductVertex) -> SmallVec<[Step; 12]> {
        let mut out = SmallVec::new();
        tree_steps(self.d, &v.a, Coord::First, &mut out);
        match (self.kind, &v.b) {
            (GraphKind::Tree, _) => {}
            (GraphKind::Txt, Fiber::Tree(w)) => tree_steps(self.d, w, Coord::Second, &mut out),
            (GraphKind::Txz, Fiber::Line(_)) => {
                out.push(Step { coord: Coord::Second, letter: 0 });
                out.push(Step { coord: Coord::Second, letter: 1 });
            }
            _ => panic!("vertex {v:?} does not belong to {}", self.kind),
        }
        out
    }

    pub fn neighbors(&self, v: &ProductVertex) -> Vec<ProductVertex> {
        self.steps(v).into_iter().map(|s| apply_step(v, s)).collect()
    }

    pub fn distance(&self, x: &ProductVertex, y: &ProductVertex) -> usize {
        x.a.distance(&y.a) + x.b.distance(&y.b)
    }

    /// Size of the coordinate-2 sphere of radius `k`.
    pub fn fiber_sphere_size(&self, k: u32) -> u128 {
        match self.kind {
            GraphKind::Tree => (k == 0) as u128,
            GraphKind::Txt => sphere_size(self.d, k),
            GraphKind::Txz => {
                if k == 0 {
                    1
                } else {
                    2
                }
            }
        }
    }

    /// `|L(0)|` for the class `spec`.
    pub fn level_size(&self, spec: LevelSpec) -> u128 {
        sphere_size(self.d, spec.k1) * self.fiber_sphere_size(spec.k2)
    }

    /// `|B(r)|` in the graph metric.
    pub fn ball_size(&self, r: u32) -> u128 {
        (0..=r)
            .flat_map(|k1| (0..=r - k1).map(move |k2| LevelSpec::new(k1, k2)))
            .map(|s| self.level_size(s))
            .sum()
    }

    /// Group product, coordinatewise.
    pub fn mul(&self, x: &ProductVertex, y: &ProductVertex) -> ProductVertex {
        let b = match (&x.b, &y.b) {
            (Fiber::Tree(a), Fiber::Tree(b)) => Fiber::Tree(a.mul(b)),
            (Fiber::Line(a), Fiber::Line(b)) => Fiber::Line(a + b),
            _ => panic!("mixed fiber types"),
        };
        ProductVertex { a: x.a.mul(&y.a), b }
    }

    pub fn inverse(&self, x: &ProductVertex) -> ProductVertex {
        let b = match &x.b {
            Fiber::Tree(w) => Fiber::Tree(w.inverse()),
            Fiber::Line(z) => Fiber::Line(-z),
        };
        ProductVertex { a: x.a.inverse(), b }
    }

    /// A uniform element of the level set `L(0)` of `spec`: independent
    /// nonbacktracking walks of lengths `k₁`, `k₂` from the root.
    pub fn sample_level_point<R: Rng + ?Sized>(&self, spec: LevelSpec, rng: &mut R) -> ProductVertex {
        let a = nonbacktracking_word(self.d, spec.k1, rng);
        let b = match self.kind {
            GraphKind::Tree => {
                debug_assert_eq!(spec.k2, 0, "single tree has no second coordinate");
                Fiber::Tree(TreeWord::root())
            }
            GraphKind::Txt => Fiber::Tree(nonbacktracking_word(self.d, spec.k2, rng)),
            GraphKind::Txz => {
                let k = spec.k2 as i64;
                Fiber::Line(if k > 0 && rng.random_bool(0.5) { -k } else { k })
            }
        };
        ProductVertex { a, b }
    }

    /// `origin · X` with `X` uniform on `L(0)`: a uniform point of `L(origin)`.
    pub fn sample_level_point_from<R: Rng + ?Sized>(
        &self,
        origin: &ProductVertex,
        spec: LevelSpec,
        rng: &mut R,
    ) -> ProductVertex {
        let x = self.sample_level_point(spec, rng);
        self.mul(origin, &x)
    }

    /// All vertices of `B(r)`, in graph-distance order, lexicographic within
    /// a shell. Refuses enumerations larger than `budget`.
    pub fn enumerate_ball(&self, r: u32, budget: u128) -> Result<Vec<ProductVertex>, TreeError> {
        let requested = self.ball_size(r);
        if requested > budget {
            return Err(TreeError::Budget { requested, budget });
        }
        let origin = self.origin();
        let mut seen: HashSet<ProductVertex> = HashSet::from([origin.clone()]);
        let mut shell = vec![origin];
        let mut out = shell.clone();
        for _ in 0..r {
            let mut next = Vec::new();
            for v in &shell {
                for n in self.neighbors(v) {
                    if seen.insert(n.clone()) {
                        next.push(n);
                    }
                }
            }
            next.sort();
            out.extend(next.iter().cloned());
            shell = next;
        }
        Ok(out)
    }
}

fn tree_steps(d: u8, w: &TreeWord, coord: Coord, out: &mut SmallVec<[Step; 12]>) {
    let last = w.last();
    if let Some(s) = last {
        out.push(Step { coord, letter: s });
    }
    for s in 0..d {
        if Some(s) != last {
            out.push(Step { coord, letter: s });
        }
    }
}

/// `K(n; a, c)`: points at depth `a` and distance `c` from a fixed point at
/// depth `n` in the `d`-regular tree.
pub fn shell_overlap(d: u8, n: u32, a: u32, c: u32) -> u128 {
    let s = n + a;
    if c > s || (s - c) % 2 != 0 {
        return 0;
    }
    let j = (s - c) / 2;
    if j > n || j > a {
        return 0;
    }
    let excursion = a - j;
    if excursion == 0 {
        return 1;
    }
    let d = d as u128;
    let first = d - (j > 0) as u128 - (j < n) as u128;
    first * (d - 1).pow(excursion - 1)
}

/// A uniform reduced word of length `k`: first letter uniform over `d`, each
/// later letter uniform over the `d − 1` letters different from its
/// predecessor.
pub fn nonbacktracking_word<R: Rng + ?Sized>(d: u8, k: u32, rng: &mut R) -> TreeWord {
    let mut letters: SmallVec<[Letter; INLINE_LETTERS]> = SmallVec::with_capacity(k as usize);
    let mut prev: Option<Letter> = None;
    for _ in 0..k {
        let s = match prev {
            None => rng.random_range(0..d),
            Some(p) => {
                let s = rng.random_range(0..d - 1);
                if s >= p {
                    s + 1
                } else {
                    s
                }
            }
        };
        letters.push(s);
        prev = Some(s);
    }
    TreeWord { letters }
}

/// Every reduced word of length exactly `k`, lexicographically.
pub fn words_of_length(d: u8, k: u32) -> Vec<TreeWord> {
    let mut out = vec![TreeWord::root()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * d as usize);
        for w in &out {
            for s in 0..d {
                if w.last() != Some(s) {
                    let mut n = w.clone();
                    n.letters.push(s);
                    next.push(n);
                }
            }
        }
        out = next;
    }
    out
}

/// A fixed representative of the sphere of radius `k`: `0,1,0,1,…`.
pub fn alternating_word(k: u32) -> TreeWord {
    TreeWord::product((0..k).map(|i| (i % 2) as Letter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn w(letters: &[u8]) -> TreeWord {
        TreeWord::from_reduced(letters).unwrap()
    }

    #[test]
    fn root_has_full_degree() {
        let g = ProductGraph::txt(3);
        let n = g.neighbors(&g.origin());
        assert_eq!(n.len(), 6);
        assert!(n.iter().all(|v| v.norm() == 1));
        assert_eq!(ProductGraph::txz(3).neighbors(&ProductGraph::txz(3).origin()).len(), 5);
        assert_eq!(ProductGraph::tree(4).neighbors(&ProductGraph::tree(4).origin()).len(), 4);
    }

    #[test]
    fn involution_cancellation() {
        let g = ProductGraph::txt(3);
        let v = ProductVertex::new(w(&[0]), TreeWord::root());
        let firsts: Vec<TreeWord> = g
            .neighbors(&v)
            .into_iter()
            .filter(|n| n.b == Fiber::Tree(TreeWord::root()))
            .map(|n| n.a)
            .collect();
        assert_eq!(firsts, vec![TreeWord::root(), w(&[0, 1]), w(&[0, 2])]);
    }

    #[test]
    fn degree_is_constant() {
        let mut rng = rng_from_seed(1);
        for kind in [GraphKind::Txt, GraphKind::Txz] {
            let g = ProductGraph::new(kind, 3).unwrap();
            for _ in 0..10_000 {
                let spec = LevelSpec::new(rng.random_range(0..10), rng.random_range(0..10));
                let v = g.sample_level_point(spec, &mut rng);
                assert_eq!(g.neighbors(&v).len(), g.degree());
            }
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(w(&[0, 1]).distance(&w(&[0, 2])), 2);
        assert_eq!(TreeWord::root().distance(&w(&[0, 1, 0])), 3);
    }

    #[test]
    fn distance_matches_bfs() {
        let d = 3;
        let mut rng = rng_from_seed(2);
        let ball: Vec<TreeWord> = (0..=8).flat_map(|k| words_of_length(d, k)).collect();
        for _ in 0..200 {
            let x = &ball[rng.random_range(0..ball.len())];
            // BFS from x over the tree
            let mut dist = std::collections::HashMap::from([(x.clone(), 0usize)]);
            let mut queue = VecDeque::from([x.clone()]);
            while let Some(u) = queue.pop_front() {
                let du = dist[&u];
                if du == 16 {
                    continue;
                }
                for s in 0..d {
                    let n = u.times(s);
                    if !dist.contains_key(&n) {
                        dist.insert(n.clone(), du + 1);
                        queue.push_back(n);
                    }
                }
            }
            for _ in 0..20 {
                let y = &ball[rng.random_range(0..ball.len())];
                assert_eq!(x.distance(y), dist[y], "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn sphere_sizes_match_enumeration() {
        assert_eq!(sphere_size(3, 0), 1);
        assert_eq!(sphere_size(3, 2), 6);
        for d in 3..=5 {
            for k in 0..=6 {
                assert_eq!(sphere_size(d, k), words_of_length(d, k).len() as u128);
            }
        }
    }

    #[test]
    fn ball_sizes_match_bfs() {
        let g = ProductGraph::txt(3);
        assert_eq!(g.ball_size(0), 1);
        assert_eq!(g.ball_size(1), 7);
        for r in 0..=5 {
            assert_eq!(g.enumerate_ball(r, u128::MAX).unwrap().len() as u128, g.ball_size(r));
        }
        let z = ProductGraph::txz(3);
        for r in 0..=5 {
            assert_eq!(z.enumerate_ball(r, u128::MAX).unwrap().len() as u128, z.ball_size(r));
        }
    }

    #[test]
    fn ball_budget_is_enforced() {
        let g = ProductGraph::txt(3);
        assert!(matches!(g.enumerate_ball(10, 1000), Err(TreeError::Budget { .. })));
    }

    #[test]
    fn level_points_have_requested_norms() {
        let g = ProductGraph::txt(3);
        let mut rng = rng_from_seed(3);
        assert_eq!(g.sample_level_point(LevelSpec::new(0, 0), &mut rng), g.origin());
        for _ in 0..1000 {
            let spec = LevelSpec::new(rng.random_range(0..12), rng.random_range(0..12));
            assert_eq!(g.sample_level_point(spec, &mut rng).class(), spec);
        }
    }

    #[test]
    fn level_sampler_is_uniform_on_small_class() {
        // chi-square against exact enumeration of the 9 points of L(0) for (1,1)
        let g = ProductGraph::txt(3);
        let mut rng = rng_from_seed(4);
        let n = 100_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            *counts.entry(g.sample_level_point(LevelSpec::new(1, 1), &mut rng)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 9);
        let expected = n as f64 / 9.0;
        let sigma = (n as f64 * (1.0 / 9.0) * (8.0 / 9.0)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - expected).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn boundary_examples() {
        let root: HashSet<_> = [TreeWord::root()].into();
        assert_eq!(connected_subtree_boundary(3, &root).unwrap(), 3);
        let path: HashSet<_> = [TreeWord::root(), w(&[1])].into();
        assert_eq!(connected_subtree_boundary(3, &path).unwrap(), 4);
        assert_eq!(edge_boundary(3, &HashSet::new()), Err(TreeError::EmptySet));
    }

    #[test]
    fn boundary_identity_on_random_subtrees() {
        let mut rng = rng_from_seed(5);
        for d in 3..=5u8 {
            for _ in 0..200 {
                let size = rng.random_range(1..=200);
                let a = random_subtree(d, size, &mut rng);
                assert_eq!(component_count(d, &a), 1);
                let expected = (d as u64 - 2) * a.len() as u64 + 2;
                assert_eq!(edge_boundary(d, &a).unwrap(), expected);
            }
        }
    }

    #[test]
    fn boundary_of_forest_counts_components() {
        let mut rng = rng_from_seed(6);
        let d = 3;
        for _ in 0..200 {
            let mut a = random_subtree(d, rng.random_range(1..50), &mut rng);
            // a translated copy far away
            let shift = alternating_word(40);
            let b = random_subtree(d, rng.random_range(1..50), &mut rng);
            a.extend(b.iter().map(|x| shift.mul(x)));
            let c = component_count(d, &a) as u64;
            assert_eq!(c, 2);
            assert_eq!(edge_boundary(d, &a).unwrap(), (d as u64 - 2) * a.len() as u64 + 2 * c);
        }
    }

    #[test]
    fn edge_keys_agree_from_both_ends() {
        let mut rng = rng_from_seed(7);
        for kind in [GraphKind::Txt, GraphKind::Txz, GraphKind::Tree] {
            let g = ProductGraph::new(kind, 3).unwrap();
            for _ in 0..2000 {
                let k2 = if kind == GraphKind::Tree { 0 } else { rng.random_range(0..6) };
                let v = g.sample_level_point(LevelSpec::new(rng.random_range(0..6), k2), &mut rng);
                for step in g.steps(&v) {
                    let e = EdgeKey::from_step(&v, step);
                    assert_eq!(e.canonical(), e);
                    let u = apply_step(&v, step);
                    let back = g
                        .steps(&u)
                        .into_iter()
                        .find(|s| apply_step(&u, *s) == v)
                        .unwrap();
                    let e2 = EdgeKey::from_step(&u, back);
                    assert_eq!(e, e2);
                    assert_eq!(e.fingerprint(11), EdgeKey::fingerprint_of_step(11, &v, step));
                    assert_eq!(e.fingerprint(11), EdgeKey::fingerprint_of_step(11, &u, back));
                    let (x, y) = e.endpoints();
                    assert!((x == v && y == u) || (x == u && y == v));
                }
            }
        }
    }

    #[test]
    fn inverse_is_reversal_and_preserves_class() {
        let g = ProductGraph::txt(4);
        let mut rng = rng_from_seed(8);
        for _ in 0..1000 {
            let x = g.sample_level_point(LevelSpec::new(rng.random_range(0..9), rng.random_range(0..9)), &mut rng);
            let inv = g.inverse(&x);
            assert_eq!(inv.class(), x.class());
            assert_eq!(g.mul(&x, &inv), g.origin());
        }
    }

    proptest! {
        #[test]
        fn operations_stay_reduced(ops in proptest::collection::vec((0u8..4, 0u8..4), 0..60)) {
            let mut x = TreeWord::root();
            let mut y = TreeWord::root();
            for (a, b) in ops {
                x.push(a);
                y = y.times(b).mul(&x).inverse();
                prop_assert!(TreeWord::from_reduced(x.letters()).is_ok());
                prop_assert!(TreeWord::from_reduced(y.letters()).is_ok());
            }
        }

        #[test]
        fn distance_is_a_metric(
            a in proptest::collection::vec(0u8..3, 0..12),
            b in proptest::collection::vec(0u8..3, 0..12),
            c in proptest::collection::vec(0u8..3, 0..12),
        ) {
            let (x, y, z) = (TreeWord::product(a), TreeWord::product(b), TreeWord::product(c));
            prop_assert_eq!(x.distance(&y), y.distance(&x));
            prop_assert_eq!(x.distance(&x), 0);
            prop_assert!(x.distance(&z) <= x.distance(&y) + y.distance(&z));
            if x != y { prop_assert!(x.distance(&y) > 0); }
            // left translation is an isometry
            prop_assert_eq!(z.mul(&x).distance(&z.mul(&y)), x.distance(&y));
        }

        #[test]
        fn arbitrary_sets_are_nonamenable(words in proptest::collection::hash_set(proptest::collection::vec(0u8..3, 0..6), 1..40)) {
            let set: HashSet<TreeWord> = words.into_iter().map(TreeWord::product).collect();
            let boundary = edge_boundary(3, &set).unwrap();
            prop_assert!(boundary >= set.len() as u64);
        }
    }
}
