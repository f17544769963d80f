//! Exact-rational contraction maps on the line and the plane, and the Moran
//! construction `{E_i = φ_i(W) : i ∈ Γ_*}` they generate.
//!
//! All maps are diagonal with positive ratios, so images of axis-aligned
//! boxes are boxes and every geometric predicate reduces to comparisons of
//! rationals. Diameters are carried as exact squares.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, ln_rational, q_int, to_f64, Q};
use crate::subshift::Subshift;
use crate::word::Word;

/// Default cap on tree nodes visited by a single descent.
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ContractionMap {
    /// `x ↦ r x + a`
    Homothety1D { r: Q, a: Q },
    /// `(x, y) ↦ (r x + a, s y + b)`
    DiagonalAffine2D { r: Q, s: Q, a: Q, b: Q },
}

fn check_ratio(name: &str, value: &Q) -> Result<()> {
    if value.is_positive() && value < &Q::one() {
        Ok(())
    } else {
        Err(Error::InvalidMap(format!("{name} = {} is not in (0, 1)", format_rational(value))))
    }
}

impl ContractionMap {
    pub fn homothety(r: Q, a: Q) -> Result<Self> {
        check_ratio("r", &r)?;
        Ok(ContractionMap::Homothety1D { r, a })
    }

    pub fn diagonal(r: Q, s: Q, a: Q, b: Q) -> Result<Self> {
        check_ratio("r", &r)?;
        check_ratio("s", &s)?;
        Ok(ContractionMap::DiagonalAffine2D { r, s, a, b })
    }

    pub fn dimension(&self) -> usize {
        match self {
            ContractionMap::Homothety1D { .. } => 1,
            ContractionMap::DiagonalAffine2D { .. } => 2,
        }
    }

    /// Per-axis `(ratio, translation)` pairs.
    pub fn axes(&self) -> Vec<(Q, Q)> {
        match self {
            ContractionMap::Homothety1D { r, a } => vec![(r.clone(), a.clone())],
            ContractionMap::DiagonalAffine2D { r, s, a, b } => {
                vec![(r.clone(), a.clone()), (s.clone(), b.clone())]
            }
        }
    }

    fn from_axes(axes: Vec<(Q, Q)>) -> Self {
        let mut it = axes.into_iter();
        let (r, a) = it.next().expect("at least one axis");
        match it.next() {
            None => ContractionMap::Homothety1D { r, a },
            Some((s, b)) => ContractionMap::DiagonalAffine2D { r, s, a, b },
        }
    }

    /// `self ∘ other`.
    pub fn then_apply(&self, other: &ContractionMap) -> ContractionMap {
        let axes = self
            .axes()
            .into_iter()
            .zip(other.axes())
            .map(|((r1, a1), (r2, a2))| (&r1 * &r2, &r1 * &a2 + a1))
            .collect();
        ContractionMap::from_axes(axes)
    }

    pub fn apply(&self, point: &Point) -> Result<Point> {
        check_dim(self.dimension(), point)?;
        Ok(Point(
            self.axes()
                .iter()
                .zip(point.coords())
                .map(|((r, a), x)| r * x + a)
                .collect(),
        ))
    }

    pub fn fixed_point(&self) -> Point {
        Point(
            self.axes()
                .iter()
                .map(|(r, a)| a / (Q::one() - r))
                .collect(),
        )
    }

    /// Largest axis ratio (the Lipschitz constant).
    pub fn max_ratio(&self) -> Q {
        self.axes().into_iter().map(|(r, _)| r).max().expect("non-empty")
    }

    pub fn min_ratio(&self) -> Q {
        self.axes().into_iter().map(|(r, _)| r).min().expect("non-empty")
    }

    /// Image of an axis-aligned box.
    pub fn image(&self, cell: &AxisBox) -> AxisBox {
        let (lo, hi) = self
            .axes()
            .iter()
            .zip(cell.lo.iter().zip(&cell.hi))
            .map(|((r, a), (l, h))| (r * l + a, r * h + a))
            .unzip();
        AxisBox { lo, hi }
    }

    /// Ratio of a similarity (all axes equal), if it is one.
    pub fn similarity_ratio(&self) -> Option<Q> {
        let axes = self.axes();
        let r = axes[0].0.clone();
        axes.iter().all(|(s, _)| *s == r).then_some(r)
    }
}

impl fmt::Display for ContractionMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContractionMap::Homothety1D { r, a } => {
                write!(f, "x -> {} x + {}", format_rational(r), format_rational(a))
            }
            ContractionMap::DiagonalAffine2D { r, s, a, b } => write!(
                f,
                "(x, y) -> ({} x + {}, {} y + {})",
                format_rational(r),
                format_rational(a),
                format_rational(s),
                format_rational(b)
            ),
        }
    }
}

/// A point of `ℝ¹` or `ℝ²` with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub Vec<Q>);

impl Point {
    pub fn line(x: Q) -> Self {
        Point(vec![x])
    }

    pub fn plane(x: Q, y: Q) -> Self {
        Point(vec![x, y])
    }

    pub fn coords(&self) -> &[Q] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn check_dim(expected: usize, point: &Point) -> Result<()> {
    if point.dimension() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found: point.dimension() })
    }
}

/// Closed axis-aligned box: an interval in 1D, a rectangle in 2D.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AxisBox {
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
}

/// The seed set `W` of a Moran construction.
pub type SeedSet = AxisBox;

impl AxisBox {
    pub fn interval(lo: Q, hi: Q) -> Result<Self> {
        AxisBox::new(vec![lo], vec![hi])
    }

    pub fn rectangle(x_lo: Q, x_hi: Q, y_lo: Q, y_hi: Q) -> Result<Self> {
        AxisBox::new(vec![x_lo, y_lo], vec![x_hi, y_hi])
    }

    pub fn new(lo: Vec<Q>, hi: Vec<Q>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
            return Err(Error::InvalidSystem("box corners must have dimension 1 or 2".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidSystem("box has lo > hi".into()));
        }
        let cell = AxisBox { lo, hi };
        if cell.diameter_squared().is_zero() {
            return Err(Error::InvalidSystem("seed set must have positive diameter".into()));
        }
        Ok(cell)
    }

    pub fn unit(dimension: usize) -> Self {
        AxisBox { lo: vec![Q::zero(); dimension], hi: vec![Q::one(); dimension] }
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn widths(&self) -> Vec<Q> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }

    pub fn diameter_squared(&self) -> Q {
        self.widths().iter().map(|w| w * w).sum()
    }

    pub fn diameter(&self) -> Diameter {
        Diameter::from_box(self)
    }

    pub fn midpoint(&self) -> Point {
        Point(
            self.lo
                .iter()
                .zip(&self.hi)
                .map(|(l, h)| (l + h) / q_int(2))
                .collect(),
        )
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| b <= a)
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        p.coords()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (l, h))| l <= x && x <= h)
    }

    /// Squared Euclidean distance from `p` to the box.
    pub fn distance_squared(&self, p: &Point) -> Q {
        p.coords()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(x, (l, h))| {
                let d = if x < l {
                    l - x
                } else if x > h {
                    x - h
                } else {
                    Q::zero()
                };
                &d * &d
            })
            .sum()
    }

    /// Closed-set test `box ∩ B(p, r) ≠ ∅`.
    pub fn meets_ball(&self, p: &Point, r: &Q) -> bool {
        self.distance_squared(p) <= r * r
    }
}

impl fmt::Display for AxisBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| format!("[{}, {}]", format_rational(l), format_rational(h)))
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// A diameter stored as its exact square.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diameter {
    squared: Q,
    exact: Option<Q>,
}

impl Diameter {
    fn from_box(cell: &AxisBox) -> Self {
        let widths = cell.widths();
        let exact = (widths.len() == 1).then(|| widths[0].clone());
        Diameter { squared: cell.diameter_squared(), exact }
    }

    pub fn squared(&self) -> &Q {
        &self.squared
    }

    /// The diameter itself when it is known to be rational (always in 1D).
    pub fn exact(&self) -> Option<&Q> {
        self.exact.as_ref()
    }

    /// Exact comparison with a non-negative rational.
    pub fn cmp_rational(&self, r: &Q) -> Ordering {
        self.squared.cmp(&(r * r))
    }

    pub fn le(&self, r: &Q) -> bool {
        self.cmp_rational(r) != Ordering::Greater
    }

    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(d) => to_f64(d),
            None => to_f64(&self.squared).sqrt(),
        }
    }

    pub fn ln(&self) -> f64 {
        0.5 * ln_rational(&self.squared)
    }
}

impl PartialOrd for Diameter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Diameter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.squared.cmp(&other.squared)
    }
}

/// An ordered list of contractions; symbol `s` denotes `maps[s - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IfsSystem {
    dimension: usize,
    maps: Vec<ContractionMap>,
}

impl IfsSystem {
    pub fn new(maps: Vec<ContractionMap>) -> Result<Self> {
        if maps.len() < 2 || maps.len() > 255 {
            return Err(Error::InvalidSystem(format!("need 2..=255 maps, got {}", maps.len())));
        }
        let dimension = maps[0].dimension();
        if maps.iter().any(|m| m.dimension() != dimension) {
            return Err(Error::InvalidSystem("maps of mixed dimension".into()));
        }
        let first = maps[0].fixed_point();
        if maps.iter().all(|m| m.fixed_point() == first) {
            return Err(Error::InvalidSystem("all maps share one fixed point".into()));
        }
        Ok(IfsSystem { dimension, maps })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn maps(&self) -> &[ContractionMap] {
        &self.maps
    }

    pub fn alphabet(&self) -> u8 {
        self.maps.len() as u8
    }

    pub fn map(&self, symbol: u8) -> Result<&ContractionMap> {
        self.maps
            .get((symbol as usize).wrapping_sub(1))
            .ok_or(Error::InvalidSymbol { symbol: symbol as usize, alphabet: self.alphabet() })
    }

    /// `ᾱ`, the largest contraction ratio over all maps and axes.
    pub fn alpha_bar(&self) -> Q {
        self.maps.iter().map(ContractionMap::max_ratio).max().expect("non-empty")
    }

    /// `α̲`, the smallest contraction ratio over all maps and axes.
    pub fn alpha_underline(&self) -> Q {
        self.maps.iter().map(ContractionMap::min_ratio).min().expect("non-empty")
    }

    /// Per-symbol ratios when every map is a similarity.
    pub fn similarity_ratios(&self) -> Option<Vec<Q>> {
        self.maps.iter().map(ContractionMap::similarity_ratio).collect()
    }

    /// `φ_i = φ_{i_1} ∘ ⋯ ∘ φ_{i_n}` with exact parameters.
    pub fn compose(&self, word: &Word) -> Result<ContractionMap> {
        if word.alphabet() != self.alphabet() {
            return Err(Error::AlphabetMismatch { left: self.alphabet(), right: word.alphabet() });
        }
        let (&first, rest) = word.symbols().split_first().ok_or(Error::EmptyWord)?;
        let mut acc = self.map(first)?.clone();
        for &s in rest {
            acc = acc.then_apply(self.map(s)?);
        }
        Ok(acc)
    }

    /// Seed set built from the fixed points: `⋂_i B(z_i, R)` with
    /// `R = λ / (1 − ᾱ)`. On the line this is an exact interval; in the plane
    /// the rational box `⋂_i [z_i − R', z_i + R']²` with `R' = λ₁ / (1 − ᾱ)`,
    /// where `λ₁ ≥ λ` is the largest ℓ¹ distance between fixed points.
    pub fn seed_set(&self) -> SeedSet {
        let fixed: Vec<Point> = self.maps.iter().map(ContractionMap::fixed_point).collect();
        let mut lambda = Q::zero();
        for a in &fixed {
            for b in &fixed {
                let d: Q = a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs()).sum();
                if d > lambda {
                    lambda = d;
                }
            }
        }
        let radius = lambda / (Q::one() - self.alpha_bar());
        let lo = (0..self.dimension)
            .map(|k| fixed.iter().map(|z| &z.0[k] - &radius).max().expect("non-empty"))
            .collect();
        let hi = (0..self.dimension)
            .map(|k| fixed.iter().map(|z| &z.0[k] + &radius).min().expect("non-empty"))
            .collect();
        AxisBox { lo, hi }
    }

    /// Accepts an explicit seed when `φ_i(W) ⊆ W` for every map.
    pub fn check_seed(&self, seed: &SeedSet) -> Result<()> {
        if seed.dimension() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: seed.dimension() });
        }
        for (k, m) in self.maps.iter().enumerate() {
            if !seed.contains_box(&m.image(seed)) {
                return Err(Error::SeedNotInvariant { symbol: k as u8 + 1 });
            }
        }
        Ok(())
    }
}

/// `{φ_i(W) : i ∈ Γ_*}` for an IFS, a subshift `Γ` and a seed `W`.
#[derive(Clone, Debug)]
pub struct MoranConstruction {
    system: IfsSystem,
    subshift: Subshift,
    seed: SeedSet,
    node_budget: usize,
}

/// A node visited by a descent: word, follower state and the composed map.
#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub word: Word,
    pub state: usize,
    pub axes: Vec<(Q, Q)>,
}

impl Node {
    pub fn cell(&self, seed: &AxisBox) -> AxisBox {
        let (lo, hi) = self
            .axes
            .iter()
            .zip(seed.lo.iter().zip(&seed.hi))
            .map(|((r, a), (l, h))| (r * l + a, r * h + a))
            .unzip();
        AxisBox { lo, hi }
    }

    pub fn diameter_squared(&self, seed: &AxisBox) -> Q {
        self.axes
            .iter()
            .zip(seed.widths())
            .map(|((r, _), w)| {
                let x = r * w;
                &x * &x
            })
            .sum()
    }
}

impl MoranConstruction {
    pub fn new(system: IfsSystem, subshift: Subshift, seed: SeedSet) -> Result<Self> {
        system.check_seed(&seed)?;
        MoranConstruction::unverified(system, subshift, seed)
    }

    /// Full-shift construction on the computed seed set.
    pub fn full_shift(system: IfsSystem) -> Result<Self> {
        let subshift = Subshift::full(system.alphabet())?;
        let seed = system.seed_set();
        MoranConstruction::new(system, subshift, seed)
    }

    /// Skips the forward-invariance check, for diagnosing broken inputs with
    /// [`MoranConstruction::verify_moran_axioms`].
    pub fn unverified(system: IfsSystem, subshift: Subshift, seed: SeedSet) -> Result<Self> {
        if subshift.alphabet() != system.alphabet() {
            return Err(Error::AlphabetMismatch { left: system.alphabet(), right: subshift.alphabet() });
        }
        if seed.dimension() != system.dimension() {
            return Err(Error::DimensionMismatch { expected: system.dimension(), found: seed.dimension() });
        }
        Ok(MoranConstruction { system, subshift, seed, node_budget: DEFAULT_NODE_BUDGET })
    }

    pub fn with_node_budget(mut self, budget: usize) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn node_budget(&self) -> usize {
        self.node_budget
    }

    pub fn system(&self) -> &IfsSystem {
        &self.system
    }

    pub fn subshift(&self) -> &Subshift {
        &self.subshift
    }

    pub fn seed(&self) -> &SeedSet {
        &self.seed
    }

    pub fn dimension(&self) -> usize {
        self.system.dimension()
    }

    pub fn alphabet(&self) -> u8 {
        self.system.alphabet()
    }

    fn check_word(&self, word: &Word) -> Result<()> {
        if word.alphabet() != self.alphabet() {
            return Err(Error::AlphabetMismatch { left: self.alphabet(), right: word.alphabet() });
        }
        if !self.subshift.is_allowed(word) {
            return Err(Error::DisallowedWord(word.to_string()));
        }
        Ok(())
    }

    /// `E_i`; the empty word gives `W`.
    pub fn cell(&self, word: &Word) -> Result<AxisBox> {
        self.check_word(word)?;
        if word.is_empty() {
            return Ok(self.seed.clone());
        }
        Ok(self.system.compose(word)?.image(&self.seed))
    }

    pub fn diameter(&self, word: &Word) -> Result<Diameter> {
        Ok(self.cell(word)?.diameter())
    }

    /// `log diam(E_i)` in floating point, for words too long for exact powers.
    pub fn ln_diameter(&self, word: &Word) -> Result<f64> {
        Ok(*self.ln_diameter_prefixes(word)?.last().expect("prefix list is non-empty"))
    }

    /// `log diam(E_{i|k})` for `k = 0, …, |i|`.
    pub fn ln_diameter_prefixes(&self, word: &Word) -> Result<Vec<f64>> {
        self.check_word(word)?;
        let mut logs: Vec<f64> = self.seed.widths().iter().map(ln_rational).collect();
        let per_axis: Vec<Vec<f64>> = self
            .system
            .maps()
            .iter()
            .map(|m| m.axes().iter().map(|(r, _)| ln_rational(r)).collect())
            .collect();
        let combine = |logs: &[f64]| {
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = logs.iter().map(|l| (2.0 * (l - max)).exp()).sum();
            max + 0.5 * sum.ln()
        };
        let mut out = Vec::with_capacity(word.len() + 1);
        out.push(combine(&logs));
        for &s in word.symbols() {
            for (acc, l) in logs.iter_mut().zip(&per_axis[s as usize - 1]) {
                *acc += l;
            }
            out.push(combine(&logs));
        }
        Ok(out)
    }

    pub(crate) fn root(&self) -> Node {
        Node {
            word: Word::empty(self.alphabet()),
            state: self.subshift.initial_state(),
            axes: self
                .seed
                .lo
                .iter()
                .map(|_| (Q::one(), Q::zero()))
                .collect(),
        }
    }

    pub(crate) fn children(&self, node: &Node) -> Vec<Node> {
        let mut out = Vec::new();
        for s in 1..=self.alphabet() {
            if let Some(state) = self.subshift.step(node.state, s) {
                let axes = node
                    .axes
                    .iter()
                    .zip(self.system.maps()[s as usize - 1].axes())
                    .map(|((r, a), (r2, a2))| (r * &r2, r * &a2 + a))
                    .collect();
                out.push(Node { word: node.word.push(s), state, axes });
            }
        }
        out
    }

    /// Visits `Γ_*` depth-first in lexicographic order. `visit` returns whether
    /// to descend below the node.
    pub(crate) fn descend(&self, mut visit: impl FnMut(&Node) -> Result<bool>) -> Result<()> {
        let mut stack = vec![self.root()];
        let mut visited = 0usize;
        while let Some(node) = stack.pop() {
            visited += 1;
            if visited > self.node_budget {
                return Err(Error::Budget { limit: self.node_budget });
            }
            if visit(&node)? {
                let mut kids = self.children(&node);
                kids.reverse();
                stack.extend(kids);
            }
        }
        Ok(())
    }

    /// `Γ_n` together with the cells `E_i`.
    pub fn level(&self, n: usize) -> Result<Vec<(Word, AxisBox)>> {
        let mut out = Vec::new();
        self.descend(|node| {
            if node.word.len() == n {
                out.push((node.word.clone(), node.cell(&self.seed)));
                Ok(false)
            } else {
                Ok(true)
            }
        })?;
        Ok(out)
    }

    fn stopping_descent(
        &self,
        r: &Q,
        keep: impl Fn(&Node) -> bool,
        mut emit: impl FnMut(&Node),
    ) -> Result<()> {
        if !r.is_positive() {
            return Err(Error::InvalidRadius);
        }
        let r2 = r * r;
        self.descend(|node| {
            if node.word.is_empty() {
                return Ok(true);
            }
            if !keep(node) {
                return Ok(false);
            }
            if node.diameter_squared(&self.seed) <= r2 {
                emit(node);
                Ok(false)
            } else {
                Ok(true)
            }
        })
    }

    /// `Γ(r) = {i : diam(E_i) ≤ r < diam(E_{i^-})}`, with the root never
    /// selected (so `r ≥ diam(W)` yields the first-level words).
    pub fn stopping_set(&self, r: &Q) -> Result<Vec<Word>> {
        let mut out = Vec::new();
        self.stopping_descent(r, |_| true, |node| out.push(node.word.clone()))?;
        Ok(out)
    }

    /// `Γ(x, r) = {i ∈ Γ(r) : E_i ∩ B(x, r) ≠ ∅}` with closed sets.
    pub fn local_cluster(&self, x: &Point, r: &Q) -> Result<Vec<Word>> {
        Ok(self.local_cluster_nodes(x, r)?.into_iter().map(|n| n.word).collect())
    }

    /// Words of `Γ(ρ)` whose cells meet `B(x, r)`; their cells cover
    /// `B(x, r) ∩ E` and shrink onto it as `ρ → 0`.
    pub fn covering_words(&self, x: &Point, r: &Q, rho: &Q) -> Result<Vec<Word>> {
        check_dim(self.dimension(), x)?;
        if !r.is_positive() {
            return Err(Error::InvalidRadius);
        }
        let mut out = Vec::new();
        self.stopping_descent(
            rho,
            |node| node.cell(&self.seed).meets_ball(x, r),
            |node| out.push(node.word.clone()),
        )?;
        Ok(out)
    }

    pub(crate) fn local_cluster_nodes(&self, x: &Point, r: &Q) -> Result<Vec<Node>> {
        check_dim(self.dimension(), x)?;
        let mut out = Vec::new();
        self.stopping_descent(
            r,
            |node| node.cell(&self.seed).meets_ball(x, r),
            |node| out.push(node.clone()),
        )?;
        Ok(out)
    }

    /// Checks M1 (nesting), M3 and M4 with exact witnesses and the decay bound
    /// `max_{Γ_n} diam(E_i) ≤ diam(W) ᾱ^n` for all levels up to `depth`.
    pub fn verify_moran_axioms(&self, depth: usize) -> Result<MoranReport> {
        if depth == 0 {
            return Err(Error::Argument("depth must be at least 1".into()));
        }
        let seed_d2 = self.seed.diameter_squared();
        let widths = self.seed.widths();
        let alpha_bar = self.system.alpha_bar();
        let alpha_low = self.system.alpha_underline();
        // M3 constant: D² = max_k 1 / w_k² over axes of positive width.
        let d_bound_sq = widths
            .iter()
            .filter(|w| w.is_positive())
            .map(|w| Q::one() / (w * w))
            .max()
            .expect("positive diameter");
        let similarity = self.system.similarity_ratios().is_some();

        let mut report = MoranReport {
            depth,
            nesting_ok: true,
            nesting_witness: None,
            d_squared: d_bound_sq.clone(),
            d_exact_similarity: similarity,
            m3_max_ratio_squared: Q::zero(),
            m3_ok: true,
            m3_witness: None,
            alpha_underline: alpha_low.clone(),
            m4_min_ratio_squared: None,
            m4_ok: true,
            m4_witness: None,
            alpha_bar: alpha_bar.clone(),
            c_constant: seed_d2.clone(),
            decay_ok: true,
            decay_witness: None,
        };

        let mut levels: Vec<Vec<(Word, AxisBox)>> = vec![vec![(Word::empty(self.alphabet()), self.seed.clone())]];
        for n in 1..=depth {
            let next = self.level(n)?;
            // nesting and M4 against the parent
            let parents = &levels[n - 1];
            let alpha_low_sq = &alpha_low * &alpha_low;
            let mut max_d2 = Q::zero();
            for (word, cell) in &next {
                let parent_word = word.predecessor().expect("non-empty");
                let parent = parents
                    .binary_search_by(|(w, _)| w.cmp(&parent_word))
                    .map(|i| &parents[i].1)
                    .expect("parent present");
                if report.nesting_ok && !parent.contains_box(cell) {
                    report.nesting_ok = false;
                    report.nesting_witness = Some(word.clone());
                }
                let ratio = cell.diameter_squared() / parent.diameter_squared();
                if report.m4_min_ratio_squared.as_ref().is_none_or(|m| &ratio < m) {
                    report.m4_min_ratio_squared = Some(ratio.clone());
                }
                if report.m4_ok && ratio < alpha_low_sq {
                    report.m4_ok = false;
                    report.m4_witness = Some(word.clone());
                }
                let d2 = cell.diameter_squared();
                if d2 > max_d2 {
                    max_d2 = d2;
                }
            }
            let bound = &seed_d2 * crate::rational::pow(&(&alpha_bar * &alpha_bar), n);
            if report.decay_ok && max_d2 > bound {
                report.decay_ok = false;
                report.decay_witness = next
                    .iter()
                    .find(|(_, c)| c.diameter_squared() == max_d2)
                    .map(|(w, _)| w.clone());
            }
            levels.push(next);
        }

        // M3 over all splits ij with |i| + |j| ≤ depth.
        for n in 2..=depth {
            for (word, cell) in &levels[n] {
                for split in 1..n {
                    let i = word.prefix(split);
                    let j = word.shift_by(split);
                    let di = find(&levels[split], &i);
                    let dj = find(&levels[n - split], &j);
                    let (Some(di), Some(dj)) = (di, dj) else { continue };
                    let ratio = cell.diameter_squared() / (di.diameter_squared() * dj.diameter_squared());
                    if ratio > report.m3_max_ratio_squared {
                        report.m3_max_ratio_squared = ratio.clone();
                    }
                    if report.m3_ok && ratio > d_bound_sq {
                        report.m3_ok = false;
                        report.m3_witness = Some(word.clone());
                    }
                }
            }
        }
        Ok(report)
    }
}

fn find<'a>(level: &'a [(Word, AxisBox)], word: &Word) -> Option<&'a AxisBox> {
    level
        .binary_search_by(|(w, _)| w.cmp(word))
        .ok()
        .map(|i| &level[i].1)
}

/// Outcome of [`MoranConstruction::verify_moran_axioms`]. Squared quantities
/// are exact.
#[derive(Clone, Debug)]
pub struct MoranReport {
    pub depth: usize,
    pub nesting_ok: bool,
    pub nesting_witness: Option<Word>,
    /// `D²` certified for M3: `max_k 1 / w_k²` over the seed widths. For
    /// similarities `D = 1 / diam(W)` holds with equality.
    pub d_squared: Q,
    pub d_exact_similarity: bool,
    pub m3_max_ratio_squared: Q,
    pub m3_ok: bool,
    pub m3_witness: Option<Word>,
    pub alpha_underline: Q,
    pub m4_min_ratio_squared: Option<Q>,
    pub m4_ok: bool,
    pub m4_witness: Option<Word>,
    pub alpha_bar: Q,
    /// `C²` in `diam(E_i)² ≤ C² ᾱ^{2n}`, i.e. `diam(W)²`.
    pub c_constant: Q,
    pub decay_ok: bool,
    pub decay_witness: Option<Word>,
}

impl MoranReport {
    pub fn all_ok(&self) -> bool {
        self.nesting_ok && self.m3_ok && self.m4_ok && self.decay_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn hom(r: Q, a: Q) -> ContractionMap {
        ContractionMap::homothety(r, a).unwrap()
    }

    fn three_halves() -> IfsSystem {
        IfsSystem::new(vec![
            hom(q(1, 2), q(0, 1)),
            hom(q(1, 2), q(1, 4)),
            hom(q(1, 2), q(1, 2)),
        ])
        .unwrap()
    }

    fn dyadic() -> MoranConstruction {
        let sys = IfsSystem::new(vec![hom(q(1, 2), q(0, 1)), hom(q(1, 2), q(1, 2))]).unwrap();
        MoranConstruction::new(sys, Subshift::full(2).unwrap(), AxisBox::unit(1)).unwrap()
    }

    fn w(k: u8, s: &str) -> Word {
        Word::parse(k, s).unwrap()
    }

    #[test]
    fn compose_matches_hand_computation() {
        let sys = three_halves();
        let expected = hom(q(1, 4), q(1, 4));
        assert_eq!(sys.compose(&w(3, "21")).unwrap(), expected);
        assert_eq!(sys.compose(&w(3, "13")).unwrap(), expected);
        assert_eq!(sys.compose(&w(3, "1")).unwrap(), sys.maps()[0]);
        assert!(matches!(sys.compose(&Word::empty(3)), Err(Error::EmptyWord)));
    }

    #[test]
    fn seed_set_for_dyadic_pair() {
        let sys = IfsSystem::new(vec![hom(q(1, 2), q(0, 1)), hom(q(1, 2), q(1, 2))]).unwrap();
        assert_eq!(sys.seed_set(), AxisBox::interval(q(-1, 1), q(2, 1)).unwrap());
        assert!(sys.check_seed(&AxisBox::unit(1)).is_ok());
        assert!(matches!(
            sys.check_seed(&AxisBox::interval(q(0, 1), q(1, 2)).unwrap()),
            Err(Error::SeedNotInvariant { symbol: 2 })
        ));
    }

    #[test]
    fn computed_seed_is_forward_invariant() {
        let sys = IfsSystem::new(vec![
            ContractionMap::diagonal(q(1, 3), q(1, 2), q(1, 10), q(0, 1)).unwrap(),
            ContractionMap::diagonal(q(1, 2), q(1, 3), q(1, 2), q(2, 3)).unwrap(),
        ])
        .unwrap();
        sys.check_seed(&sys.seed_set()).unwrap();
        three_halves().check_seed(&three_halves().seed_set()).unwrap();
    }

    #[test]
    fn shared_fixed_point_is_rejected() {
        let maps = vec![hom(q(1, 2), q(0, 1)), hom(q(1, 3), q(0, 1))];
        assert!(matches!(IfsSystem::new(maps), Err(Error::InvalidSystem(_))));
        assert!(ContractionMap::homothety(q(3, 2), q(0, 1)).is_err());
    }

    #[test]
    fn diameters() {
        let mc = dyadic();
        assert_eq!(mc.diameter(&w(2, "121")).unwrap().exact(), Some(&q(1, 8)));
        let sys = IfsSystem::new(vec![
            ContractionMap::diagonal(q(1, 2), q(1, 3), q(0, 1), q(0, 1)).unwrap(),
            ContractionMap::diagonal(q(1, 2), q(1, 3), q(1, 2), q(2, 3)).unwrap(),
        ])
        .unwrap();
        let mc2 = MoranConstruction::new(sys, Subshift::full(2).unwrap(), AxisBox::unit(2)).unwrap();
        assert_eq!(mc2.diameter(&w(2, "1")).unwrap().squared(), &q(13, 36));
        assert!((mc2.ln_diameter(&w(2, "1")).unwrap() - (13f64 / 36.0).sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn stopping_set_examples() {
        let mc = dyadic();
        let words: Vec<String> = mc.stopping_set(&q(1, 4)).unwrap().iter().map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["11", "12", "21", "22"]);
        assert_eq!(mc.stopping_set(&q(1, 1)).unwrap().len(), 2);
        assert!(matches!(mc.stopping_set(&q(0, 1)), Err(Error::InvalidRadius)));
    }

    #[test]
    fn local_cluster_examples() {
        let mc = dyadic();
        assert_eq!(mc.local_cluster(&Point::line(q(1, 2)), &q(1, 4)).unwrap().len(), 4);
        assert!(mc.local_cluster(&Point::line(q(5, 1)), &q(1, 8)).unwrap().is_empty());
        // E_112 = [1/8, 1/4] touches the closed ball [-1/8, 1/8]
        let at_zero = mc.local_cluster(&Point::line(q(0, 1)), &q(1, 8)).unwrap();
        assert_eq!(at_zero, vec![w(2, "111"), w(2, "112")]);
        assert!(matches!(
            mc.local_cluster(&Point::plane(q(0, 1), q(0, 1)), &q(1, 8)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn moran_axioms_for_similarity() {
        let report = dyadic().verify_moran_axioms(5).unwrap();
        assert!(report.all_ok());
        assert!(report.d_exact_similarity);
        // D · diam(W) = 1 and the M3 ratio is attained with equality
        assert_eq!(report.d_squared, q(1, 1));
        assert_eq!(report.m3_max_ratio_squared, q(1, 1));
    }

    #[test]
    fn broken_system_reports_nesting_failure() {
        let sys = IfsSystem::new(vec![hom(q(1, 2), q(0, 1)), hom(q(1, 2), q(3, 4))]).unwrap();
        let mc = MoranConstruction::unverified(sys.clone(), Subshift::full(2).unwrap(), AxisBox::unit(1)).unwrap();
        let report = mc.verify_moran_axioms(3).unwrap();
        assert!(!report.nesting_ok);
        assert_eq!(report.nesting_witness, Some(w(2, "2")));
        assert!(MoranConstruction::new(sys, Subshift::full(2).unwrap(), AxisBox::unit(1)).is_err());
    }
}
