//! Finite unions of closed intervals with exact endpoints, used as level
//! approximations `E_n` of self-homothetic sets on the line.
//!
//! Endpoints share one denominator, so sorting, merging and distance
//! queries run on plain `i128` numerators. All scaling is checked and
//! reports [`Error::Overflow`] instead of wrapping.

use std::cmp::Ordering;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{add128, div128, format_q128, mul128, sub128, Q128};

/// Sorted, pairwise disjoint closed intervals `[lo/den, hi/den]`
/// (degenerate ones allowed), stored in lowest common terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeoSet {
    den: i128,
    ivs: Vec<(i128, i128)>,
}

impl Default for GeoSet {
    fn default() -> Self {
        GeoSet { den: 1, ivs: Vec::new() }
    }
}

/// A 1D homothety `x ↦ r x + a` in fixed-width rationals, `r > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Homothety {
    pub r: Q128,
    pub a: Q128,
}

impl Homothety {
    pub fn new(r: Q128, a: Q128) -> Self {
        assert!(r.is_positive(), "homothety ratio must be positive");
        Homothety { r, a }
    }

    pub fn identity() -> Self {
        Homothety { r: Q128::one(), a: Q128::zero() }
    }

    pub fn apply(&self, x: &Q128) -> Result<Q128> {
        add128(&mul128(&self.r, x)?, &self.a)
    }

    /// `self ∘ inner`.
    pub fn then(&self, inner: &Homothety) -> Result<Homothety> {
        Ok(Homothety { r: mul128(&self.r, &inner.r)?, a: self.apply(&inner.a)? })
    }

    pub fn fixed_point(&self) -> Result<Q128> {
        div128(&self.a, &sub128(&Q128::one(), &self.r)?)
    }
}

fn checked_lcm(a: i128, b: i128) -> Result<i128> {
    (a / a.gcd(&b)).checked_mul(b).ok_or(Error::Overflow)
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

fn add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

fn merge_sorted(ivs: &mut Vec<(i128, i128)>) {
    if !ivs.windows(2).all(|w| w[0].0 <= w[1].0) {
        ivs.sort_unstable();
    }
    let mut out: Vec<(i128, i128)> = Vec::with_capacity(ivs.len());
    for &(lo, hi) in ivs.iter() {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    *ivs = out;
}

impl GeoSet {
    pub fn empty() -> Self {
        GeoSet::default()
    }

    pub fn interval(lo: Q128, hi: Q128) -> Result<Self> {
        GeoSet::from_intervals(vec![(lo, hi)])
    }

    pub fn unit() -> Self {
        GeoSet { den: 1, ivs: vec![(0, 1)] }
    }

    pub fn point(x: Q128) -> Result<Self> {
        GeoSet::interval(x, x)
    }

    /// Sorts and merges overlapping or touching intervals; empty ones
    /// (`lo > hi`) are dropped.
    pub fn from_intervals(intervals: Vec<(Q128, Q128)>) -> Result<Self> {
        let mut den = 1i128;
        for (lo, hi) in &intervals {
            den = checked_lcm(den, *lo.denom())?;
            den = checked_lcm(den, *hi.denom())?;
        }
        let scale = |x: &Q128| mul(*x.numer(), den / x.denom());
        let mut ivs = Vec::with_capacity(intervals.len());
        for (lo, hi) in &intervals {
            if lo <= hi {
                ivs.push((scale(lo)?, scale(hi)?));
            }
        }
        Ok(GeoSet::from_raw(den, ivs))
    }

    fn from_raw(den: i128, mut ivs: Vec<(i128, i128)>) -> Self {
        merge_sorted(&mut ivs);
        let mut g = den;
        for &(lo, hi) in &ivs {
            if g == 1 {
                break;
            }
            g = g.gcd(&lo).gcd(&hi);
        }
        if g > 1 {
            for iv in &mut ivs {
                iv.0 /= g;
                iv.1 /= g;
            }
        }
        GeoSet { den: den / g, ivs }
    }

    /// The set with every numerator scaled to denominator `target`, a
    /// multiple of the current one.
    fn rescaled(&self, target: i128) -> Result<Vec<(i128, i128)>> {
        let f = target / self.den;
        if f == 1 {
            return Ok(self.ivs.clone());
        }
        self.ivs.iter().map(|&(lo, hi)| Ok((mul(lo, f)?, mul(hi, f)?))).collect()
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn len(&self) -> usize {
        self.ivs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    fn q(&self, n: i128) -> Q128 {
        Q128::new(n, self.den)
    }

    pub fn interval_at(&self, i: usize) -> (Q128, Q128) {
        let (lo, hi) = self.ivs[i];
        (self.q(lo), self.q(hi))
    }

    pub fn intervals(&self) -> Vec<(Q128, Q128)> {
        (0..self.len()).map(|i| self.interval_at(i)).collect()
    }

    pub fn min(&self) -> Option<Q128> {
        self.ivs.first().map(|iv| self.q(iv.0))
    }

    pub fn max(&self) -> Option<Q128> {
        self.ivs.last().map(|iv| self.q(iv.1))
    }

    pub fn diameter(&self) -> Result<Q128> {
        match (self.ivs.first(), self.ivs.last()) {
            (Some(a), Some(b)) => Ok(self.q(b.1 - a.0)),
            _ => Err(Error::EmptySet),
        }
    }

    pub fn total_length(&self) -> Result<Q128> {
        let mut total = 0i128;
        for (lo, hi) in &self.ivs {
            total = add(total, hi - lo)?;
        }
        Ok(self.q(total))
    }

    /// Open gaps between consecutive intervals.
    pub fn gaps(&self) -> Vec<(Q128, Q128)> {
        self.ivs.windows(2).map(|w| (self.q(w[0].1), self.q(w[1].0))).collect()
    }

    /// Ordering of `x` against the endpoint numerator `n`.
    fn cmp_point(&self, n: i128, x: &Q128) -> Ordering {
        // n/den vs p/q: compare n·q with p·den when it fits
        match (n.checked_mul(*x.denom()), x.numer().checked_mul(self.den)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.q(n).cmp(x),
        }
    }

    /// Index of the interval containing `x`, if any.
    pub fn locate(&self, x: &Q128) -> Option<usize> {
        let idx = self.ivs.partition_point(|iv| self.cmp_point(iv.0, x) != Ordering::Greater);
        (idx > 0 && self.cmp_point(self.ivs[idx - 1].1, x) != Ordering::Less).then(|| idx - 1)
    }

    pub fn contains(&self, x: &Q128) -> bool {
        self.locate(x).is_some()
    }

    /// Indices of the intervals meeting `[u, v]`.
    pub fn range_meeting(&self, u: &Q128, v: &Q128) -> std::ops::Range<usize> {
        let start = self.ivs.partition_point(|iv| self.cmp_point(iv.1, u) == Ordering::Less);
        let end = self.ivs.partition_point(|iv| self.cmp_point(iv.0, v) != Ordering::Greater);
        start..end.max(start)
    }

    /// Gap lengths between consecutive intervals in an index range, as
    /// `(left end, right end)` in floating point.
    pub fn gaps_f64(&self, range: std::ops::Range<usize>) -> Vec<(f64, f64)> {
        let d = self.den as f64;
        self.ivs[range].windows(2).map(|w| (w[0].1 as f64 / d, w[1].0 as f64 / d)).collect()
    }

    fn common(&self, other: &GeoSet) -> Result<(i128, Vec<(i128, i128)>, Vec<(i128, i128)>)> {
        let den = checked_lcm(self.den, other.den)?;
        Ok((den, self.rescaled(den)?, other.rescaled(den)?))
    }

    pub fn union(&self, other: &GeoSet) -> Result<GeoSet> {
        let (den, mut a, b) = self.common(other)?;
        a.extend(b);
        Ok(GeoSet::from_raw(den, a))
    }

    pub fn image(&self, map: &Homothety) -> Result<GeoSet> {
        self.union_of_images(std::slice::from_ref(map))
    }

    /// `⋃_k φ_k(A)`.
    pub fn union_of_images(&self, maps: &[Homothety]) -> Result<GeoSet> {
        // φ(n/den) = (p n)/(q den) + s/t over the common denominator
        let mut den = 1i128;
        for m in maps {
            den = checked_lcm(den, mul(*m.r.denom(), self.den)?)?;
            den = checked_lcm(den, *m.a.denom())?;
        }
        let mut ivs = Vec::with_capacity(self.len() * maps.len());
        for m in maps {
            let f = mul(*m.r.numer(), den / (m.r.denom() * self.den))?;
            let shift = mul(*m.a.numer(), den / m.a.denom())?;
            for &(lo, hi) in &self.ivs {
                ivs.push((add(mul(lo, f)?, shift)?, add(mul(hi, f)?, shift)?));
            }
        }
        Ok(GeoSet::from_raw(den, ivs))
    }

    pub fn intersect_interval(&self, u: &Q128, v: &Q128) -> Result<GeoSet> {
        let range = self.range_meeting(u, v);
        let den = checked_lcm(checked_lcm(self.den, *u.denom())?, *v.denom())?;
        let f = den / self.den;
        let un = mul(*u.numer(), den / u.denom())?;
        let vn = mul(*v.numer(), den / v.denom())?;
        let mut ivs = Vec::with_capacity(range.len());
        for &(lo, hi) in &self.ivs[range] {
            ivs.push((mul(lo, f)?.max(un), mul(hi, f)?.min(vn)));
        }
        Ok(GeoSet::from_raw(den, ivs))
    }

    /// `M_{u,v}(A ∩ [u, v])` with `M_{u,v}(x) = (x − u)/(v − u)`.
    pub fn magnify(&self, u: &Q128, v: &Q128) -> Result<GeoSet> {
        if u >= v {
            return Err(Error::InvalidWindow { u: format_q128(u), v: format_q128(v) });
        }
        let scale = div128(&Q128::one(), &sub128(v, u)?)?;
        let shift = -mul128(u, &scale)?;
        self.intersect_interval(u, v)?.image(&Homothety { r: scale, a: shift })
    }

    /// Distance from `x` to the set.
    pub fn distance_to(&self, x: &Q128) -> Result<Q128> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let idx = self.ivs.partition_point(|iv| self.cmp_point(iv.0, x) != Ordering::Greater);
        let mut best: Option<Q128> = None;
        if idx > 0 {
            let hi = self.q(self.ivs[idx - 1].1);
            best = Some(if &hi >= x { Q128::zero() } else { sub128(x, &hi)? });
        }
        if idx < self.len() {
            let d = sub128(&self.q(self.ivs[idx].0), x)?;
            best = Some(best.map_or(d, |b| b.min(d)));
        }
        Ok(best.expect("non-empty"))
    }

    /// `sup_{a ∈ A} d(a, B)` on doubled common numerators. On each interval of
    /// `A`, `d(·, B)` peaks at an endpoint or at the midpoint of a gap of `B`.
    fn directed(a: &[(i128, i128)], b: &[(i128, i128)]) -> i128 {
        let dist = |x: i128| -> i128 {
            let idx = b.partition_point(|iv| iv.0 <= x);
            let mut best = i128::MAX;
            if idx > 0 {
                best = (x - b[idx - 1].1).max(0);
            }
            if idx < b.len() {
                best = best.min(b[idx].0 - x);
            }
            best
        };
        let inside = |x: i128| -> bool {
            let idx = a.partition_point(|iv| iv.0 <= x);
            idx > 0 && a[idx - 1].1 >= x
        };
        let mut best = 0;
        for &(lo, hi) in a {
            best = best.max(dist(lo)).max(dist(hi));
        }
        for w in b.windows(2) {
            let mid = (w[0].1 + w[1].0) / 2;
            if inside(mid) {
                best = best.max(dist(mid));
            }
        }
        best
    }

    pub fn directed_distance(&self, other: &GeoSet) -> Result<Q128> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::EmptySet);
        }
        let (den, a, b) = self.common(other)?;
        let double = |v: Vec<(i128, i128)>| -> Result<Vec<(i128, i128)>> {
            v.into_iter().map(|(lo, hi)| Ok((mul(lo, 2)?, mul(hi, 2)?))).collect()
        };
        let (a, b) = (double(a)?, double(b)?);
        Ok(Q128::new(GeoSet::directed(&a, &b), mul(den, 2)?))
    }

    pub fn hausdorff(&self, other: &GeoSet) -> Result<Q128> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::EmptySet);
        }
        let (den, a, b) = self.common(other)?;
        let double = |v: Vec<(i128, i128)>| -> Result<Vec<(i128, i128)>> {
            v.into_iter().map(|(lo, hi)| Ok((mul(lo, 2)?, mul(hi, 2)?))).collect()
        };
        let (a, b) = (double(a)?, double(b)?);
        let d = GeoSet::directed(&a, &b).max(GeoSet::directed(&b, &a));
        Ok(Q128::new(d, mul(den, 2)?))
    }

    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        let d = self.den as f64;
        self.ivs.iter().map(|&(a, b)| (a as f64 / d, b as f64 / d)).collect()
    }

    pub fn is_subset_of(&self, other: &GeoSet) -> Result<bool> {
        let (_, a, b) = self.common(other)?;
        Ok(a.iter().all(|&(lo, hi)| {
            let idx = b.partition_point(|iv| iv.0 <= lo);
            idx > 0 && b[idx - 1].1 >= hi
        }))
    }
}

/// `E_n = ⋃_{|i| = n} φ_i(seed)` for a full-shift homothety system.
pub fn attractor_level(maps: &[Homothety], seed: &GeoSet, n: usize) -> Result<GeoSet> {
    let mut set = seed.clone();
    for _ in 0..n {
        set = set.union_of_images(maps)?;
    }
    Ok(set)
}

/// All levels `E_0, …, E_n`.
pub fn attractor_levels(maps: &[Homothety], seed: &GeoSet, n: usize) -> Result<Vec<GeoSet>> {
    let mut levels = vec![seed.clone()];
    for _ in 0..n {
        let next = levels.last().expect("non-empty").union_of_images(maps)?;
        levels.push(next);
    }
    Ok(levels)
}
