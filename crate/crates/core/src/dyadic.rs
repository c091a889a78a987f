//! Exact dyadic interval and rectangle geometry on the unit square.
//!
//! All geometry is integer arithmetic on `(scale, position)` pairs; real
//! numbers appear only in function values such as Haar amplitudes. An
//! interval `(s, p)` denotes `[p·2^{-s}, (p+1)·2^{-s}) ⊆ [0, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported scale; `2^{-52}` is still exact in an `f64`.
pub const MAX_SCALE: u32 = 52;

/// A half-open dyadic subinterval of `[0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[derive(Serialize, Deserialize)]
#[serde(try_from = "IntervalRepr", into = "IntervalRepr")]
pub struct DyadicInterval {
    scale: u32,
    position: u64,
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    s: u32,
    p: u64,
}

impl TryFrom<IntervalRepr> for DyadicInterval {
    type Error = Error;
    fn try_from(r: IntervalRepr) -> Result<Self> {
        DyadicInterval::new(r.s, r.p)
    }
}

impl From<DyadicInterval> for IntervalRepr {
    fn from(i: DyadicInterval) -> Self {
        IntervalRepr { s: i.scale, p: i.position }
    }
}

impl std::fmt::Debug for DyadicInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}/{d}, {}/{d})", self.position, self.position + 1, d = 1u64 << self.scale.min(63))
    }
}

impl DyadicInterval {
    pub fn new(scale: u32, position: u64) -> Result<Self> {
        if scale > MAX_SCALE {
            return Err(Error::ScaleTooLarge(scale));
        }
        if position >= 1u64 << scale {
            return Err(Error::PositionOutOfRange { scale, position });
        }
        Ok(Self { scale, position })
    }

    /// The unit interval `[0, 1)`.
    pub fn unit() -> Self {
        Self { scale: 0, position: 0 }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    /// `|I| = 2^{-scale}`, exact.
    pub fn length<T: Scalar>(&self) -> T {
        T::exp2_int(-(self.scale as i32))
    }

    /// `|I|^{-1/2} = 2^{scale/2}`, the Haar amplitude on `I`.
    pub fn inv_sqrt_length<T: Scalar>(&self) -> T {
        T::sqrt_pow2(self.scale)
    }

    pub fn left_child(&self) -> Result<Self> {
        Self::new(self.scale + 1, self.position << 1)
    }

    pub fn right_child(&self) -> Result<Self> {
        Self::new(self.scale + 1, (self.position << 1) | 1)
    }

    pub fn parent(&self) -> Option<Self> {
        (self.scale > 0).then(|| Self {
            scale: self.scale - 1,
            position: self.position >> 1,
        })
    }

    /// The unique ancestor at the given coarser (or equal) scale.
    pub fn ancestor_at(&self, scale: u32) -> Option<Self> {
        (scale <= self.scale).then(|| Self {
            scale,
            position: self.position >> (self.scale - scale),
        })
    }

    /// Containment of half-open intervals, by integer shifts only.
    pub fn contains(&self, inner: &DyadicInterval) -> bool {
        inner.scale >= self.scale && (inner.position >> (inner.scale - self.scale)) == self.position
    }

    /// Whether `self` and `other` share no point. Dyadic intervals either
    /// nest or are disjoint.
    pub fn disjoint(&self, other: &DyadicInterval) -> bool {
        !self.contains(other) && !other.contains(self)
    }
}

/// The unique scale-`i` dyadic interval containing `point ∈ [0, 1)`.
pub fn interval_containing<T: Scalar>(point: T, scale: u32) -> Result<DyadicInterval> {
    if scale > MAX_SCALE {
        return Err(Error::ScaleTooLarge(scale));
    }
    let p = point.to_f64().ok_or(Error::NonFinite)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::PointOutOfDomain(p));
    }
    let cells = 1u64 << scale;
    let position = ((p * cells as f64) as u64).min(cells - 1);
    DyadicInterval::new(scale, position)
}

/// The minimal dyadic interval containing both arguments (at worst `[0, 1)`).
pub fn least_common_ancestor(a: &DyadicInterval, b: &DyadicInterval) -> DyadicInterval {
    let mut s = a.scale.min(b.scale);
    let mut pa = a.position >> (a.scale - s);
    let mut pb = b.position >> (b.scale - s);
    while pa != pb {
        pa >>= 1;
        pb >>= 1;
        s -= 1;
    }
    DyadicInterval { scale: s, position: pa }
}

/// The constant value of the Haar function `h_I` on a cell at least as fine
/// as `I`: `+|I|^{-1/2}` on the left half, `-|I|^{-1/2}` on the right half,
/// `0` outside `I`.
pub fn haar_value<T: Scalar>(interval: &DyadicInterval, cell: &DyadicInterval) -> Result<T> {
    if cell.scale < interval.scale {
        return Err(Error::CellTooCoarse { interval: interval.scale, cell: cell.scale });
    }
    if !interval.contains(cell) {
        return Ok(T::zero());
    }
    if cell.scale == interval.scale {
        // The cell is I itself; h_I is not constant there.
        return Err(Error::CellTooCoarse { interval: interval.scale, cell: cell.scale });
    }
    let child_position = cell.position >> (cell.scale - interval.scale - 1);
    let amplitude: T = interval.inv_sqrt_length();
    if child_position == interval.position << 1 {
        Ok(amplitude)
    } else {
        Ok(-amplitude)
    }
}

/// A dyadic rectangle `I × J ⊆ [0, 1)²`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[derive(Serialize, Deserialize)]
#[serde(try_from = "RectangleRepr", into = "RectangleRepr")]
pub struct DyadicRectangle {
    pub x: DyadicInterval,
    pub y: DyadicInterval,
}

#[derive(Serialize, Deserialize)]
struct RectangleRepr {
    sx: u32,
    px: u64,
    sy: u32,
    py: u64,
}

impl TryFrom<RectangleRepr> for DyadicRectangle {
    type Error = Error;
    fn try_from(r: RectangleRepr) -> Result<Self> {
        Ok(DyadicRectangle {
            x: DyadicInterval::new(r.sx, r.px)?,
            y: DyadicInterval::new(r.sy, r.py)?,
        })
    }
}

impl From<DyadicRectangle> for RectangleRepr {
    fn from(r: DyadicRectangle) -> Self {
        RectangleRepr {
            sx: r.x.scale(),
            px: r.x.position(),
            sy: r.y.scale(),
            py: r.y.position(),
        }
    }
}

impl DyadicRectangle {
    pub fn new(x: DyadicInterval, y: DyadicInterval) -> Self {
        Self { x, y }
    }

    pub fn unit() -> Self {
        Self::new(DyadicInterval::unit(), DyadicInterval::unit())
    }

    /// `|R| = |I|·|J|`, exact.
    pub fn area<T: Scalar>(&self) -> T {
        T::exp2_int(-((self.x.scale() + self.y.scale()) as i32))
    }

    pub fn contains(&self, inner: &DyadicRectangle) -> bool {
        self.x.contains(&inner.x) && self.y.contains(&inner.y)
    }

    /// Largest of the two scales; drives the minimal exact truncation depth.
    pub fn max_scale(&self) -> u32 {
        self.x.scale().max(self.y.scale())
    }
}

/// Truncated grid: intervals of scale `≤ depth` inside `[0, 1)`, step
/// functions constant on cells of scale exactly `depth`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    depth: u32,
}

impl GridSpec {
    pub fn new(depth: u32) -> Result<Self> {
        if depth > MAX_SCALE {
            return Err(Error::ScaleTooLarge(depth));
        }
        Ok(Self { depth })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of cells, `2^d`.
    pub fn num_cells(&self) -> usize {
        1usize << self.depth
    }

    /// Number of intervals of scale `≤ d`, `2^{d+1} - 1`.
    pub fn num_intervals(&self) -> usize {
        (1usize << (self.depth + 1)) - 1
    }

    /// Cell measure `2^{-d}`, exact.
    pub fn cell_measure<T: Scalar>(&self) -> T {
        T::exp2_int(-(self.depth as i32))
    }

    /// Heap index of an interval of scale `≤ d`: `2^s - 1 + p`.
    pub fn interval_index(&self, interval: &DyadicInterval) -> usize {
        debug_assert!(interval.scale() <= self.depth);
        ((1u64 << interval.scale()) - 1 + interval.position()) as usize
    }

    /// Range of depth-`d` cell indices covered by an interval.
    pub fn cell_range(&self, interval: &DyadicInterval) -> std::ops::Range<usize> {
        debug_assert!(interval.scale() <= self.depth);
        let width = 1usize << (self.depth - interval.scale());
        let start = interval.position() as usize * width;
        start..start + width
    }

    /// All intervals of scale `≤ d` in heap (scale-major) order.
    pub fn intervals(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        (0..=self.depth).flat_map(|s| {
            (0..1u64 << s).map(move |p| DyadicInterval { scale: s, position: p })
        })
    }

    /// All cells (intervals of scale exactly `d`) in position order.
    pub fn cells(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        let d = self.depth;
        (0..1u64 << d).map(move |p| DyadicInterval { scale: d, position: p })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: u32, p: u64) -> DyadicInterval {
        DyadicInterval::new(s, p).unwrap()
    }

    #[test]
    fn contains_basics() {
        let unit = DyadicInterval::unit();
        assert!(unit.contains(&iv(1, 0)));
        assert!(!iv(1, 0).contains(&iv(1, 1)));
        for s in 0..4 {
            for p in 0..1u64 << s {
                assert!(iv(s, p).contains(&iv(s, p)));
            }
        }
    }

    #[test]
    fn contains_is_partial_order() {
        // Exhaustive at depth 4.
        let grid = GridSpec::new(4).unwrap();
        let all: Vec<_> = grid.intervals().collect();
        for a in &all {
            assert!(a.contains(a));
            for b in &all {
                if a.contains(b) && b.contains(a) {
                    assert_eq!(a, b);
                }
                for c in &all {
                    if a.contains(b) && b.contains(c) {
                        assert!(a.contains(c));
                    }
                }
            }
        }
    }

    #[test]
    fn interval_containing_examples() {
        assert_eq!(interval_containing(0.3f64, 1).unwrap(), iv(1, 0));
        assert_eq!(interval_containing(0.3f64, 2).unwrap(), iv(2, 1));
        assert_eq!(interval_containing(0.0f64, 0).unwrap(), iv(0, 0));
        assert!(interval_containing(1.0f64, 3).is_err());
        assert!(interval_containing(-0.1f64, 3).is_err());
    }

    #[test]
    fn interval_containing_boundary_safety() {
        // Points just below 1 and around cell boundaries land in the right
        // cell even where the multiplication rounds.
        let below_one = 1.0 - f64::EPSILON;
        for s in [0, 1, 7, 31, 52] {
            let i = interval_containing(below_one, s).unwrap();
            assert_eq!(i.position(), (1u64 << s) - 1, "scale {s}");
        }
        let below_half = 0.5 - f64::EPSILON / 2.0;
        assert_eq!(interval_containing(below_half, 1).unwrap(), iv(1, 0));
        assert_eq!(interval_containing(0.5, 1).unwrap(), iv(1, 1));
    }

    #[test]
    fn interval_containing_is_inverse_of_membership() {
        for s in 0..=6 {
            for p in 0..1u64 << s {
                let i = iv(s, p);
                let mid = (p as f64 + 0.5) / (1u64 << s) as f64;
                assert_eq!(interval_containing(mid, s).unwrap(), i);
            }
        }
    }

    #[test]
    fn lca_examples() {
        assert_eq!(least_common_ancestor(&iv(2, 0), &iv(2, 2)), iv(0, 0));
        assert_eq!(least_common_ancestor(&iv(2, 0), &iv(2, 1)), iv(1, 0));
        let i = iv(3, 5);
        assert_eq!(least_common_ancestor(&i, &i), i);
    }

    #[test]
    fn lca_is_minimal_common_ancestor() {
        let grid = GridSpec::new(4).unwrap();
        let all: Vec<_> = grid.intervals().collect();
        for a in &all {
            for b in &all {
                let l = least_common_ancestor(a, b);
                assert!(l.contains(a) && l.contains(b));
                // No proper dyadic descendant of l contains both.
                if l.scale() < MAX_SCALE {
                    for child in [l.left_child().unwrap(), l.right_child().unwrap()] {
                        assert!(!(child.contains(a) && child.contains(b)));
                    }
                }
            }
        }
    }

    #[test]
    fn haar_examples() {
        let unit = DyadicInterval::unit();
        assert_eq!(haar_value::<f64>(&unit, &iv(1, 0)).unwrap(), 1.0);
        assert_eq!(haar_value::<f64>(&unit, &iv(2, 3)).unwrap(), -1.0);
        assert_eq!(haar_value::<f64>(&iv(1, 0), &iv(2, 2)).unwrap(), 0.0);
        assert!(haar_value::<f64>(&iv(2, 1), &iv(1, 0)).is_err());
        assert!(haar_value::<f64>(&iv(1, 0), &iv(1, 0)).is_err());
    }

    #[test]
    fn haar_normalisation_and_mean_zero() {
        // For every I with scale < d: sum over depth-d cells of
        // h_I(c)^2 · 2^{-d} = 1 and h_I(c) · 2^{-d} = 0.
        let d = 4;
        let grid = GridSpec::new(d).unwrap();
        let measure = grid.cell_measure::<f64>();
        for i in GridSpec::new(d - 1).unwrap().intervals() {
            let mut sq = 0.0;
            let mut mean = 0.0;
            for c in grid.cells() {
                let v: f64 = haar_value(&i, &c).unwrap();
                sq += v * v * measure;
                mean += v * measure;
            }
            assert!((sq - 1.0).abs() < 1e-12, "L2 norm of h_{i:?}: {sq}");
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn grid_counts() {
        for d in 0..6 {
            let grid = GridSpec::new(d).unwrap();
            assert_eq!(grid.intervals().count(), (1 << (d + 1)) - 1);
            assert_eq!(grid.cells().count(), 1 << d);
        }
    }

    #[test]
    fn area_is_exact() {
        let r = DyadicRectangle::new(iv(3, 2), iv(1, 1));
        assert_eq!(r.area::<f64>(), 2f64.powi(-4));
        assert_eq!(DyadicRectangle::unit().area::<f64>(), 1.0);
    }

    #[test]
    fn interval_serde_shape() {
        let i = iv(3, 5);
        let json = serde_json::to_string(&i).unwrap();
        assert_eq!(json, r#"{"s":3,"p":5}"#);
        let back: DyadicInterval = serde_json::from_str(&json).unwrap();
        assert_eq!(back, i);
        // Invalid positions are rejected on deserialisation.
        assert!(serde_json::from_str::<DyadicInterval>(r#"{"s":1,"p":2}"#).is_err());
    }

    #[test]
    fn rectangle_serde_shape() {
        let r = DyadicRectangle::new(iv(2, 1), iv(1, 0));
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"sx":2,"px":1,"sy":1,"py":0}"#);
        assert_eq!(serde_json::from_str::<DyadicRectangle>(&json).unwrap(), r);
    }
}
