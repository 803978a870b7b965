//! Exact path metrics on 1-skeletons.
//!
//! Stage covers are measured in a geodesic metric of scale `2^{-i/2}`, which
//! is irrational for odd `i`. All distances therefore live in the quadratic
//! field `Q[sqrt(2)]`, where every comparison is exact.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::complex::{ComplexRef, VertexId};

/// Element `a + b*sqrt(2)` of `Q[sqrt(2)]`. The representation is unique, so
/// equality is structural and ordering is decided by sign analysis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuadExt {
    a: BigRational,
    b: BigRational,
}

impl QuadExt {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QuadExt { a, b }
    }

    pub fn rational(a: BigRational) -> Self {
        QuadExt {
            a,
            b: BigRational::zero(),
        }
    }

    pub fn from_ints(a: i64, b: i64) -> Self {
        QuadExt {
            a: BigRational::from_integer(BigInt::from(a)),
            b: BigRational::from_integer(BigInt::from(b)),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        QuadExt::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        QuadExt::from_ints(0, 0)
    }

    pub fn one() -> Self {
        QuadExt::from_ints(1, 0)
    }

    /// `2^{-i/2}`: rational for even `i`, a `sqrt(2)` multiple for odd `i`.
    pub fn inv_sqrt2_pow(i: u32) -> Self {
        let half_pow = |e: u32| BigRational::new(BigInt::one(), BigInt::one() << e);
        if i.is_multiple_of(2) {
            QuadExt::rational(half_pow(i / 2))
        } else {
            // 2^{-i/2} = sqrt(2) * 2^{-(i+1)/2}
            QuadExt::new(BigRational::zero(), half_pow(i.div_ceil(2)))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.b
    }

    fn is_positive(&self) -> bool {
        // sign of a + b*sqrt(2)
        if self.a.is_zero() {
            return self.b.is_positive();
        }
        if self.b.is_zero() {
            return self.a.is_positive();
        }
        match (self.a.is_positive(), self.b.is_positive()) {
            (true, true) => true,
            (false, false) => false,
            // a > 0, b < 0: positive iff a^2 > 2 b^2
            (true, false) => &self.a * &self.a > BigRational::from_integer(2.into()) * &self.b * &self.b,
            // a < 0, b > 0: positive iff 2 b^2 > a^2
            (false, true) => BigRational::from_integer(2.into()) * &self.b * &self.b > &self.a * &self.a,
        }
    }

    pub fn scale_int(&self, k: u64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        QuadExt {
            a: &self.a * &k,
            b: &self.b * &k,
        }
    }
}

impl Add for QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: QuadExt) -> QuadExt {
        QuadExt {
            a: self.a + rhs.a,
            b: self.b + rhs.b,
        }
    }
}

impl Sub for QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: QuadExt) -> QuadExt {
        QuadExt {
            a: self.a - rhs.a,
            b: self.b - rhs.b,
        }
    }
}

impl Mul for QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: QuadExt) -> QuadExt {
        // (a + b r)(c + d r) = ac + 2bd + (ad + bc) r, r = sqrt(2)
        let two = BigRational::from_integer(2.into());
        QuadExt {
            a: &self.a * &rhs.a + two * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadExt {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = QuadExt {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
        };
        if diff.is_zero() {
            Ordering::Equal
        } else if diff.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}*sqrt(2)", self.b)
        } else {
            write!(f, "{} + {}*sqrt(2)", self.a, self.b)
        }
    }
}

/// A distance value: finite or across components.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Dist {
    Finite(QuadExt),
    Infinite,
}

impl Dist {
    pub fn finite(&self) -> Option<&QuadExt> {
        match self {
            Dist::Finite(q) => Some(q),
            Dist::Infinite => None,
        }
    }

    pub fn unwrap_finite(self) -> QuadExt {
        match self {
            Dist::Finite(q) => q,
            Dist::Infinite => panic!("distance is infinite"),
        }
    }
}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Dist::Finite(a), Dist::Finite(b)) => a.cmp(b),
            (Dist::Finite(_), Dist::Infinite) => Ordering::Less,
            (Dist::Infinite, Dist::Finite(_)) => Ordering::Greater,
            (Dist::Infinite, Dist::Infinite) => Ordering::Equal,
        }
    }
}

/// Edge-path metric on the 1-skeleton of a complex, with every edge assigned
/// the same length `scale`. For graphs this is the geodesic metric with that
/// edge length; in higher dimension it dominates the geodesic metric, so
/// every upper bound checked against it is conservative.
#[derive(Clone, Debug)]
pub struct ScaledPathMetric {
    complex: ComplexRef,
    scale: QuadExt,
}

impl ScaledPathMetric {
    pub fn new(complex: ComplexRef, scale: QuadExt) -> Self {
        assert!(scale > QuadExt::zero(), "scale must be positive");
        ScaledPathMetric { complex, scale }
    }

    /// Metric of scale `2^{-i/2}` used for stage `i` covers.
    pub fn for_stage(complex: ComplexRef, stage: u32) -> Self {
        ScaledPathMetric::new(complex, QuadExt::inv_sqrt2_pow(stage))
    }

    pub fn complex(&self) -> &ComplexRef {
        &self.complex
    }

    pub fn scale(&self) -> &QuadExt {
        &self.scale
    }

    /// Unweighted hop counts from `u` to every vertex; `u64::MAX` marks
    /// unreachable vertices.
    pub fn hops_from(&self, u: VertexId) -> Vec<u64> {
        let n = self.complex.vertex_count();
        let mut dist = vec![u64::MAX; n];
        let mut queue = VecDeque::new();
        dist[u.0 as usize] = 0;
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x.0 as usize];
            for &y in self.complex.neighbors(x) {
                if dist[y.0 as usize] == u64::MAX {
                    dist[y.0 as usize] = dx + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: VertexId, w: VertexId) -> Dist {
        if u == w {
            return Dist::Finite(QuadExt::zero());
        }
        let hops = self.hops_from(u)[w.0 as usize];
        if hops == u64::MAX {
            Dist::Infinite
        } else {
            Dist::Finite(self.scale.scale_int(hops))
        }
    }

    /// Max pairwise distance within a vertex set. `Infinite` if the set
    /// straddles components.
    pub fn diameter_of(&self, verts: &[VertexId]) -> Dist {
        let mut best: u64 = 0;
        for (i, &u) in verts.iter().enumerate() {
            let hops = self.hops_from(u);
            for &w in &verts[i + 1..] {
                let h = hops[w.0 as usize];
                if h == u64::MAX {
                    return Dist::Infinite;
                }
                best = best.max(h);
            }
        }
        Dist::Finite(self.scale.scale_int(best))
    }

    /// Hop diameter of the whole complex; `None` when disconnected or empty.
    pub fn hop_diameter(&self) -> Option<u64> {
        let verts: Vec<VertexId> = self.complex.vertex_ids().collect();
        if verts.is_empty() {
            return None;
        }
        let mut best = 0u64;
        for &u in &verts {
            let hops = self.hops_from(u);
            for &w in &verts {
                let h = hops[w.0 as usize];
                if h == u64::MAX {
                    return None;
                }
                best = best.max(h);
            }
        }
        Some(best)
    }

    /// Vertices within distance `r` of `u` (closed ball on vertices). The
    /// search is truncated at the hop radius, so balls are cheap even on
    /// large complexes.
    pub fn ball(&self, u: VertexId, r: &QuadExt) -> Vec<VertexId> {
        let mut max_hops = 0u64;
        while self.scale.scale_int(max_hops + 1) <= *r {
            max_hops += 1;
        }
        let mut out = vec![u];
        let mut dist: std::collections::HashMap<VertexId, u64> = [(u, 0)].into();
        let mut queue = VecDeque::new();
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            let dx = dist[&x];
            if dx == max_hops {
                continue;
            }
            for &y in self.complex.neighbors(x) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(y) {
                    e.insert(dx + 1);
                    out.push(y);
                    queue.push_back(y);
                }
            }
        }
        out.sort_unstable();
        out
    }
}
