//! The self-homothetic set `E` of `{x/2, x/5 + 1/2, x/7 + 6/7}`: an open set
//! condition example whose magnifications around `1/2` converge to
//! `K = ½E ∪ (½E + ½)`, together with finite certificate families showing
//! that `K` is not a magnification of `E` over the tested windows.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geoset::{attractor_levels, GeoSet, Homothety};
use crate::ifs::{ContractionMap, IfsSystem, Point};
use crate::rational::{add128, format_q128, mul128, q, q128_to_f64, Q, Q128};
use crate::word::Word;

fn r(n: i128, d: i128) -> Q128 {
    Q128::new(n, d)
}

/// `φ_1(x) = x/2`, `φ_2(x) = x/5 + 1/2`, `φ_3(x) = x/7 + 6/7`.
pub fn example_maps() -> Vec<Homothety> {
    vec![
        Homothety::new(r(1, 2), r(0, 1)),
        Homothety::new(r(1, 5), r(1, 2)),
        Homothety::new(r(1, 7), r(6, 7)),
    ]
}

/// The same maps as an exact [`IfsSystem`].
pub fn example_system() -> IfsSystem {
    let h = |a: i64, b: i64, c: i64, d: i64| ContractionMap::homothety(q(a, b), q(c, d)).expect("valid map");
    IfsSystem::new(vec![h(1, 2, 0, 1), h(1, 5, 1, 2), h(1, 7, 6, 7)]).expect("valid system")
}

/// `K = ½A ∪ (½A + ½)`.
pub fn doubled(a: &GeoSet) -> Result<GeoSet> {
    let left = a.image(&Homothety::new(r(1, 2), r(0, 1)))?;
    let right = a.image(&Homothety::new(r(1, 2), r(1, 2)))?;
    left.union(&right)
}

/// Gaps of `E_1` inside `[0, 1]` and `η`, the length of the first one.
pub fn level_one_gap() -> Result<((Q128, Q128), Q128)> {
    let e1 = GeoSet::unit().union_of_images(&example_maps())?;
    let gap = *e1.gaps().first().ok_or(Error::EmptySet)?;
    let eta = gap.1 - gap.0;
    Ok((gap, eta))
}

/// Smallest `m ≥ 1` with `n ≤ 1 + m log₂7 − log₂5 < n + 1/j` for
/// `n = ⌊1 + m log₂7 − log₂5⌋`, decided in exact integer arithmetic:
/// `5·2^n ≤ 2·7^m` and `(2·7^m)^j < 5^j·2^{nj+1}`.
pub fn furstenberg_sequence(j: u32) -> Result<(u32, u32)> {
    if j == 0 {
        return Err(Error::Argument("j must be at least 1".into()));
    }
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    for m in 1u32..10_000 {
        let lhs = &two * BigInt::from(7).pow(m);
        // n = largest integer with 5·2^n ≤ 2·7^m
        let mut n = 0u32;
        while &five * two.clone().pow(n + 1) <= lhs {
            n += 1;
        }
        if &five * two.clone().pow(n) > lhs {
            continue;
        }
        let upper = five.clone().pow(j) * two.clone().pow(n * j + 1);
        if lhs.clone().pow(j) < upper {
            return Ok((m, n));
        }
    }
    Err(Error::NonConvergence(format!("no m below 10000 for j = {j}")))
}

/// Window `[u_j, v_j] = ½ ∓ ½ 7^{−m}`.
pub fn window(m: u32) -> Result<(Q128, Q128)> {
    let half_width = Q128::new(1, 2 * 7i128.checked_pow(m).ok_or(Error::Overflow)?);
    Ok((r(1, 2) - half_width, r(1, 2) + half_width))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleCheck {
    pub j: u32,
    pub m: u32,
    pub n: u32,
    /// `7^m diam(φ_{1 3^m}(E))`.
    pub left_scale: String,
    /// `7^m diam(φ_{2 1^n}(E))`.
    pub right_scale: String,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Exact check of `½ ≤ 7^m diam(φ_{2 1^n}(E)) ≤ ½·2^{1/j}`, using
/// `diam(E) = 1` and diameters from the composed maps.
pub fn scale_sandwich(j: u32) -> Result<ScaleCheck> {
    let (m, n) = furstenberg_sequence(j)?;
    let system = example_system();
    let seven_m = Q::from_integer(BigInt::from(7).pow(m));
    let ratio = |symbols: Vec<u8>| -> Result<Q> {
        let map = system.compose(&Word::new(3, symbols)?)?;
        Ok(map.max_ratio())
    };
    let mut left = vec![1u8];
    left.extend(std::iter::repeat_n(3u8, m as usize));
    let mut right = vec![2u8];
    right.extend(std::iter::repeat_n(1u8, n as usize));
    let left_scale = &seven_m * ratio(left)?;
    let right_scale = &seven_m * ratio(right)?;
    let half = q(1, 2);
    let lower_ok = right_scale >= half;
    // (2x)^j ≤ 2
    let doubled_pow: Q = Pow::pow(&right_scale * Q::from_integer(BigInt::from(2)), j);
    let upper_ok = doubled_pow <= Q::from_integer(BigInt::from(2));
    Ok(ScaleCheck {
        j,
        m,
        n,
        left_scale: crate::rational::format_rational(&left_scale),
        right_scale: crate::rational::format_rational(&right_scale),
        lower_ok,
        upper_ok,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub j: u32,
    pub m: u32,
    pub n: u32,
    pub u: String,
    pub v: String,
    /// Exact `D(A_j, K_depth)`.
    pub distance: String,
    pub distance_approx: f64,
}

/// `D(M_{u_j, v_j}(E_depth ∩ [u_j, v_j]), K_depth)` for `j = 1..=j_max`.
pub fn convergence_table(e_depth: &GeoSet, j_max: u32) -> Result<Vec<ConvergenceRow>> {
    let k = doubled(e_depth)?;
    (1..=j_max)
        .map(|j| {
            let (m, n) = furstenberg_sequence(j)?;
            let (u, v) = window(m)?;
            let a = e_depth.magnify(&u, &v)?;
            let d = a.hausdorff(&k)?;
            Ok(ConvergenceRow {
                j,
                m,
                n,
                u: format_q128(&u),
                v: format_q128(&v),
                distance: format_q128(&d),
                distance_approx: q128_to_f64(&d),
            })
        })
        .collect()
}

/// `π(w t̄)`: the image of the fixed point of `φ_t` under `φ_w`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Anchor {
    pub word: String,
    pub tail: u8,
    #[serde(skip)]
    pub value: Q128,
}

fn fixed_point(symbol: u8) -> Result<Q128> {
    example_maps()[symbol as usize - 1].fixed_point()
}

/// Distinct points `π(w1̄)` and `π(w3̄)` for `|w| ≤ max_len`, sorted, each
/// labelled by its first (shortest, then lexicographic) anchor word.
pub fn anchor_points(max_len: usize) -> Result<Vec<Anchor>> {
    let maps = example_maps();
    let mut found: Vec<Anchor> = Vec::new();
    let mut frontier: Vec<(Word, Homothety)> = vec![(Word::empty(3), Homothety::new(Q128::one(), Q128::zero()))];
    for len in 0..=max_len {
        for (word, map) in &frontier {
            for tail in [1u8, 3u8] {
                found.push(Anchor { word: word.to_string(), tail, value: map.apply(&fixed_point(tail)?)? });
            }
        }
        if len < max_len {
            let mut next = Vec::with_capacity(frontier.len() * 3);
            for (word, map) in &frontier {
                for (s, m) in maps.iter().enumerate() {
                    next.push((word.push(s as u8 + 1), map.then(m)?));
                }
            }
            frontier = next;
        }
    }
    // stable sort keeps the first label for each value
    found.sort_by(|a, b| a.value.cmp(&b.value));
    found.dedup_by(|later, earlier| later.value == earlier.value);
    Ok(found)
}

/// `k = ½ φ_w(z_s) + half/2` with `z_s` the fixed point of `φ_s`; a point
/// of `K` because `φ_w(z_s) ∈ E`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KWitness {
    pub half: u8,
    pub word: String,
    pub fixed_symbol: u8,
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowCertificate {
    pub u: String,
    pub v: String,
    pub u_anchor: Anchor,
    pub v_anchor: Anchor,
    pub witness_k: String,
    pub witness: KWitness,
    /// Level `d` with `k ∉ M_{u,v}(E_d ∩ [u, v])`.
    pub depth: usize,
    pub verdict: &'static str,
}

/// A point of `E` strictly inside `(lo, hi)`, as `φ_w(0)`, found by descent
/// in floating point; callers re-check exactly.
fn e_point_in(lo: f64, hi: f64, max_depth: usize) -> Option<Vec<u8>> {
    const MAPS: [(f64, f64); 3] = [(0.5, 0.0), (0.2, 0.5), (1.0 / 7.0, 6.0 / 7.0)];
    let margin = 1e-12;
    let mut frontier: Vec<(Vec<u8>, f64, f64)> = vec![(Vec::new(), 1.0, 0.0)];
    for _ in 0..=max_depth {
        let mut next = Vec::new();
        for (w, ratio, shift) in frontier {
            // φ_w(0) = shift
            if shift > lo + margin && shift < hi - margin {
                return Some(w);
            }
            for (s, (r, a)) in MAPS.iter().enumerate() {
                let (r2, a2) = (ratio * r, ratio * a + shift);
                if a2 + r2 > lo && a2 < hi {
                    let mut w2 = w.clone();
                    w2.push(s as u8 + 1);
                    next.push((w2, r2, a2));
                }
            }
        }
        if next.is_empty() || next.len() > 4096 {
            return None;
        }
        frontier = next;
    }
    None
}

fn k_value(witness: &KWitness) -> Result<Q128> {
    let maps = example_maps();
    let mut map = Homothety::new(Q128::one(), Q128::zero());
    for c in witness.word.chars() {
        let s = c.to_digit(10).ok_or_else(|| Error::WordSyntax(witness.word.clone()))? as usize;
        map = map.then(&maps[s - 1])?;
    }
    let e_point = map.apply(&fixed_point(witness.fixed_symbol)?)?;
    Ok(e_point / 2 + Q128::new(witness.half as i128, 2))
}

/// Searches `E_1, E_2, …` for a gap of `E_d` inside `[u, v]` whose image
/// under `M_{u,v}` contains a point of `K`.
pub fn certify_window(levels: &[GeoSet], u: &Anchor, v: &Anchor) -> Option<WindowCertificate> {
    const MAX_SCAN: usize = 50_000;
    let (uq, vq) = (u.value, v.value);
    let (uf, vf) = (q128_to_f64(&uq), q128_to_f64(&vq));
    let width = vf - uf;
    for (d, level) in levels.iter().enumerate().skip(1) {
        let range = level.range_meeting(&uq, &vq);
        if range.len() > MAX_SCAN {
            continue;
        }
        let mut gaps: Vec<(f64, f64)> = level
            .gaps_f64(range)
            .into_iter()
            .filter(|(a, b)| *a >= uf && *b <= vf)
            .collect();
        gaps.sort_by(|a, b| (b.1 - b.0).total_cmp(&(a.1 - a.0)).then(a.0.total_cmp(&b.0)));
        for (g0, g1) in gaps.into_iter().take(8) {
            let (a, b) = ((g0 - uf) / width, (g1 - uf) / width);
            for half in [0u8, 1u8] {
                let (lo, hi) = (2.0 * a - half as f64, 2.0 * b - half as f64);
                let Some(w) = e_point_in(lo, hi, 12) else { continue };
                let witness = KWitness {
                    half,
                    word: w.iter().map(|s| char::from(b'0' + s)).collect(),
                    fixed_symbol: 1,
                };
                let Ok(k) = k_value(&witness) else { continue };
                let Ok(y) = mul128(&(vq - uq), &k).and_then(|t| add128(&t, &uq)) else { continue };
                if y > uq && y < vq && !level.contains(&y) {
                    return Some(WindowCertificate {
                        u: format_q128(&uq),
                        v: format_q128(&vq),
                        u_anchor: u.clone(),
                        v_anchor: v.clone(),
                        witness_k: format_q128(&k),
                        witness,
                        depth: d,
                        verdict: "excluded",
                    });
                }
            }
        }
    }
    None
}

/// Whether `y ∈ E_d = ⋃_{|i| = d} φ_i([0, 1])`, by pulling `y` back through
/// every map whose image contains it.
pub fn in_level_set(system: &IfsSystem, y: &Q, d: usize) -> bool {
    let (zero, one) = (Q::zero(), Q::one());
    if *y < zero || *y > one {
        return false;
    }
    if d == 0 {
        return true;
    }
    system.maps().iter().any(|m| {
        let axes = m.axes();
        let (ratio, shift) = &axes[0];
        let pre = (y - shift) / ratio;
        pre >= zero && pre <= one && in_level_set(system, &pre, d - 1)
    })
}

/// Independent re-check of a certificate in big rationals: the anchors
/// give `u` and `v`, the witness gives `k ∈ K`, and `u + k(v − u) ∉ E_d`.
pub fn verify_certificate(cert: &WindowCertificate) -> Result<bool> {
    let system = example_system();
    let anchor_value = |a: &Anchor| -> Result<Q> {
        let tail_map = system.map(a.tail)?;
        let z = tail_map.fixed_point();
        let w = Word::parse(3, &a.word)?;
        if w.is_empty() {
            return Ok(z.0[0].clone());
        }
        Ok(system.compose(&w)?.apply(&z)?.0[0].clone())
    };
    let u = anchor_value(&cert.u_anchor)?;
    let v = anchor_value(&cert.v_anchor)?;
    if crate::rational::format_rational(&u) != cert.u || crate::rational::format_rational(&v) != cert.v || u >= v {
        return Ok(false);
    }
    let z = system.map(cert.witness.fixed_symbol)?.fixed_point();
    let w = Word::parse(3, &cert.witness.word)?;
    let e_point = if w.is_empty() { z.0[0].clone() } else { system.compose(&w)?.apply(&Point::line(z.0[0].clone()))?.0[0].clone() };
    let k = e_point / Q::from_integer(BigInt::from(2)) + q(cert.witness.half as i64, 2);
    if crate::rational::format_rational(&k) != cert.witness_k {
        return Ok(false);
    }
    let y = &u + &k * (&v - &u);
    Ok(!in_level_set(&system, &y, cert.depth))
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub depth: usize,
    pub j_max: u32,
    pub gap: (String, String),
    pub eta: String,
    pub sequence: Vec<(u32, u32, u32)>,
    pub convergence: Vec<ConvergenceRow>,
    pub sandwich: Vec<ScaleCheck>,
    pub anchor_len: usize,
    pub windows: usize,
    pub certificates: Vec<WindowCertificate>,
    pub undecided: Vec<(String, String)>,
}

impl DemoReport {
    pub fn certified_fraction(&self) -> f64 {
        if self.windows == 0 {
            return 0.0;
        }
        self.certificates.len() as f64 / self.windows as f64
    }
}

/// The full pipeline: `E_depth`, the convergence table for `j ≤ j_max`, the
/// scale checks, and certificates for all windows between anchor points
/// with words of length at most `anchor_len`.
pub fn furstenberg_demo(depth: usize, j_max: u32, anchor_len: usize) -> Result<DemoReport> {
    if depth == 0 || j_max == 0 {
        return Err(Error::Argument("depth and j_max must be positive".into()));
    }
    let levels = attractor_levels(&example_maps(), &GeoSet::unit(), depth)?;
    let (gap, eta) = level_one_gap()?;
    let sequence = (1..=j_max)
        .map(|j| furstenberg_sequence(j).map(|(m, n)| (j, m, n)))
        .collect::<Result<Vec<_>>>()?;
    let convergence = convergence_table(&levels[depth], j_max)?;
    let sandwich = (1..=j_max).map(scale_sandwich).collect::<Result<Vec<_>>>()?;
    let anchors = anchor_points(anchor_len)?;
    let mut certificates = Vec::new();
    let mut undecided = Vec::new();
    let mut windows = 0usize;
    for (a, u) in anchors.iter().enumerate() {
        for v in &anchors[a + 1..] {
            windows += 1;
            match certify_window(&levels, u, v) {
                Some(cert) => certificates.push(cert),
                None => undecided.push((format_q128(&u.value), format_q128(&v.value))),
            }
        }
    }
    Ok(DemoReport {
        depth,
        j_max,
        gap: (format_q128(&gap.0), format_q128(&gap.1)),
        eta: format_q128(&eta),
        sequence,
        convergence,
        sandwich,
        anchor_len,
        windows,
        certificates,
        undecided,
    })
}
