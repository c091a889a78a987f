//! Rectangular, product, and mixed BMO norms, with the square-function and
//! maximal-function machinery behind the embedding inequalities.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::config::{C_CAR, C_EMB, PROD_BMO_CAP};
use crate::dyadic::{DyadicInterval, DyadicRectangle, GridSpec};
use crate::error::{Error, Result};
use crate::forms::FunctionFamily;
use crate::scalar::Scalar;
use crate::sequences::CoefficientSequence;

/// Cap on the grid depth of materialised 2D step functions (`4^d` cells).
const MAX_STEP_DEPTH: u32 = 12;

/// A finite union of dyadic rectangles inside `[0,1)²` — an admissible set
/// for the product BMO supremum: every point lies in one of the parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectangleUnion {
    parts: BTreeSet<DyadicRectangle>,
}

impl RectangleUnion {
    pub fn new<I: IntoIterator<Item = DyadicRectangle>>(parts: I) -> Self {
        Self { parts: parts.into_iter().collect() }
    }

    pub fn parts(&self) -> impl Iterator<Item = &DyadicRectangle> {
        self.parts.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Exact measure in integer units of `2^{-(sx+sy)}`, where `sx`, `sy`
    /// are the finest part scales: a sweep over x-strips with merged
    /// y-extents.
    fn measure_units(&self) -> (u128, u32, u32) {
        let sx = self.parts.iter().map(|r| r.x.scale()).max().unwrap_or(0);
        let sy = self.parts.iter().map(|r| r.y.scale()).max().unwrap_or(0);
        let spans: Vec<(u64, u64, u64, u64)> = self
            .parts
            .iter()
            .map(|r| {
                let xs = r.x.position() << (sx - r.x.scale());
                let xe = (r.x.position() + 1) << (sx - r.x.scale());
                let ys = r.y.position() << (sy - r.y.scale());
                let ye = (r.y.position() + 1) << (sy - r.y.scale());
                (xs, xe, ys, ye)
            })
            .collect();
        let mut cuts: Vec<u64> = spans.iter().flat_map(|s| [s.0, s.1]).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut units: u128 = 0;
        for w in cuts.windows(2) {
            let (strip_start, strip_end) = (w[0], w[1]);
            let mut ys: Vec<(u64, u64)> = spans
                .iter()
                .filter(|s| s.0 <= strip_start && strip_end <= s.1)
                .map(|s| (s.2, s.3))
                .collect();
            if ys.is_empty() {
                continue;
            }
            ys.sort_unstable();
            let mut covered: u128 = 0;
            let (mut lo, mut hi) = ys[0];
            for &(s, e) in &ys[1..] {
                if s > hi {
                    covered += (hi - lo) as u128;
                    lo = s;
                    hi = e;
                } else {
                    hi = hi.max(e);
                }
            }
            covered += (hi - lo) as u128;
            units += (strip_end - strip_start) as u128 * covered;
        }
        (units, sx, sy)
    }

    /// Exact Lebesgue measure of the union.
    pub fn measure<T: Scalar>(&self) -> T {
        let (units, sx, sy) = self.measure_units();
        T::from_u128(units).unwrap() * T::exp2_int(-((sx + sy) as i32))
    }

    /// Whether a dyadic rectangle is covered by the union, decided exactly:
    /// clip every part to the rectangle and compare swept measures in
    /// integer units.
    pub fn covers(&self, rect: &DyadicRectangle) -> bool {
        let clipped: Vec<DyadicRectangle> = self
            .parts
            .iter()
            .filter_map(|part| {
                let x = clip(&part.x, &rect.x)?;
                let y = clip(&part.y, &rect.y)?;
                Some(DyadicRectangle::new(x, y))
            })
            .collect();
        if clipped.iter().any(|c| c == rect) {
            return true;
        }
        if clipped.is_empty() {
            return false;
        }
        let union = RectangleUnion::new(clipped);
        let (units, sx, sy) = union.measure_units();
        let shift = (sx - rect.x.scale()) + (sy - rect.y.scale());
        units == 1u128 << shift
    }
}

/// Intersection of two dyadic intervals: the finer one if nested, else none.
fn clip(a: &DyadicInterval, b: &DyadicInterval) -> Option<DyadicInterval> {
    if a.contains(b) {
        Some(*b)
    } else if b.contains(a) {
        Some(*a)
    } else {
        None
    }
}

/// Rectangular BMO: `sup over I₀ × J₀` of
/// `(Σ_{I×J ⊆ I₀×J₀} λ_{IJ}² / |I₀×J₀|)^{1/2}`. An optimal rectangle can be
/// shrunk to the componentwise least common ancestor of the support
/// rectangles it captures, so scanning all ancestor pairs of support
/// rectangles is exhaustive.
pub fn rect_bmo<T: Scalar>(lambda: &CoefficientSequence<T>) -> Result<T> {
    if lambda.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut captured: HashMap<DyadicRectangle, T> = HashMap::new();
    for (r, v) in lambda.iter() {
        let sq = *v * *v;
        let mut x = Some(r.x);
        while let Some(i0) = x {
            let mut y = Some(r.y);
            while let Some(j0) = y {
                *captured
                    .entry(DyadicRectangle::new(i0, j0))
                    .or_insert_with(T::zero) += sq;
                y = j0.parent();
            }
            x = i0.parent();
        }
    }
    let mut best = T::zero();
    for (candidate, sum) in captured {
        best = best.max(sum / candidate.area());
    }
    Ok(best.sqrt())
}

/// Exact product BMO norm for small supports.
///
/// Admissible sets can be shrunk: replacing `Ω` by the union of the support
/// rectangles it contains keeps every captured rectangle and can only drop
/// measure, so the supremum is attained on unions of support subsets; only
/// inclusion-antichains produce distinct unions.
pub fn prod_bmo_exact<T: Scalar>(lambda: &CoefficientSequence<T>) -> Result<T> {
    prod_bmo_exact_capped(lambda, PROD_BMO_CAP)
}

pub fn prod_bmo_exact_capped<T: Scalar>(lambda: &CoefficientSequence<T>, cap: usize) -> Result<T> {
    if lambda.is_empty() {
        return Err(Error::EmptySupport);
    }
    if lambda.support_len() > cap {
        return Err(Error::SizeOverCap { size: lambda.support_len(), cap });
    }
    let support: Vec<DyadicRectangle> = lambda.iter().map(|(r, _)| *r).collect();
    let values: Vec<T> = lambda.iter().map(|(_, v)| *v).collect();

    let mut best = T::zero();
    let mut chosen: Vec<usize> = Vec::new();
    antichain_search(&support, &values, 0, &mut chosen, &mut best);
    Ok(best.sqrt())
}

fn antichain_search<T: Scalar>(
    support: &[DyadicRectangle],
    values: &[T],
    from: usize,
    chosen: &mut Vec<usize>,
    best: &mut T,
) {
    for next in from..support.len() {
        let comparable = chosen.iter().any(|&k| {
            support[k].contains(&support[next]) || support[next].contains(&support[k])
        });
        if comparable {
            continue;
        }
        chosen.push(next);
        let union = RectangleUnion::new(chosen.iter().map(|&k| support[k]));
        let measure: T = union.measure();
        let mut captured = T::zero();
        for (r, v) in support.iter().zip(values) {
            if union.covers(r) {
                captured += *v * *v;
            }
        }
        *best = best.max(captured / measure);
        antichain_search(support, values, next + 1, chosen, best);
        chosen.pop();
    }
}

/// Certified lower bound for the product BMO norm of any finite support:
/// greedy union growth from the best single rectangle, combined with the
/// rectangular BMO value (every rectangle is an admissible set).
pub fn prod_bmo_greedy<T: Scalar>(lambda: &CoefficientSequence<T>) -> Result<T> {
    if lambda.is_empty() {
        return Err(Error::EmptySupport);
    }
    let support: Vec<DyadicRectangle> = lambda.iter().map(|(r, _)| *r).collect();
    let values: Vec<T> = lambda.iter().map(|(_, v)| *v).collect();

    let ratio = |subset: &[usize]| -> T {
        let union = RectangleUnion::new(subset.iter().map(|&k| support[k]));
        let measure: T = union.measure();
        let mut captured = T::zero();
        for (r, v) in support.iter().zip(&values) {
            if union.covers(r) {
                captured += *v * *v;
            }
        }
        captured / measure
    };

    // Best single rectangle as the seed.
    let mut seed = 0usize;
    let mut seed_ratio = T::zero();
    for k in 0..support.len() {
        let r = ratio(&[k]);
        if r > seed_ratio {
            seed_ratio = r;
            seed = k;
        }
    }
    let mut chosen = vec![seed];
    let mut running_max = seed_ratio;
    let mut remaining: Vec<usize> = (0..support.len()).filter(|&k| k != seed).collect();
    while !remaining.is_empty() {
        let mut best_k = 0usize;
        let mut best_ratio = T::neg_infinity();
        for (pos, &k) in remaining.iter().enumerate() {
            chosen.push(k);
            let r = ratio(&chosen);
            chosen.pop();
            if r > best_ratio {
                best_ratio = r;
                best_k = pos;
            }
        }
        chosen.push(remaining.remove(best_k));
        running_max = running_max.max(best_ratio);
    }

    Ok(running_max.sqrt().max(rect_bmo(lambda)?))
}

/// Orientation of the one-parameter (mixed) BMO condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Fix the x-interval index: `sup over (I₀, J₀)` of
    /// `(Σ_{J ⊆ J₀} λ_{I₀ J}² / (|I₀||J₀|))^{1/2}`.
    XFixed,
    /// The symmetric condition with the y-interval index fixed.
    YFixed,
}

/// The one-parameter BMO condition implied by conditional boundedness.
/// Index intervals range over the support; window candidates over
/// ancestors-or-self of the paired support intervals.
pub fn mixed_bmo<T: Scalar>(lambda: &CoefficientSequence<T>, orientation: Orientation) -> Result<T> {
    if lambda.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut grouped: HashMap<DyadicInterval, Vec<(DyadicInterval, T)>> = HashMap::new();
    for (r, v) in lambda.iter() {
        let (index, window) = match orientation {
            Orientation::XFixed => (r.x, r.y),
            Orientation::YFixed => (r.y, r.x),
        };
        grouped.entry(index).or_default().push((window, *v));
    }
    let mut best = T::zero();
    for (index, entries) in grouped {
        let mut candidates: BTreeSet<DyadicInterval> = BTreeSet::new();
        for (window, _) in &entries {
            let mut current = Some(*window);
            while let Some(w) = current {
                candidates.insert(w);
                current = w.parent();
            }
        }
        let index_len: T = index.length();
        for w0 in candidates {
            let sum: T = entries
                .iter()
                .filter(|(w, _)| w0.contains(w))
                .map(|(_, v)| *v * *v)
                .sum();
            let ratio = sum / (index_len * w0.length());
            best = best.max(ratio);
        }
    }
    Ok(best.sqrt())
}

/// A function on `[0,1)²` constant on depth-`d` grid cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Step2D<T> {
    depth: u32,
    values: Vec<T>,
}

impl<T: Scalar> Step2D<T> {
    pub fn zeros(depth: u32) -> Result<Self> {
        if depth > MAX_STEP_DEPTH {
            return Err(Error::SizeOverCap { size: 1 << (2 * depth), cap: 1 << (2 * MAX_STEP_DEPTH) });
        }
        let n = 1usize << depth;
        Ok(Self { depth, values: vec![T::zero(); n * n] })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn side(&self) -> usize {
        1usize << self.depth
    }

    pub fn get(&self, cx: usize, cy: usize) -> T {
        self.values[cx * self.side() + cy]
    }

    pub fn set(&mut self, cx: usize, cy: usize, v: T) {
        let n = self.side();
        self.values[cx * n + cy] = v;
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        Self { depth: self.depth, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    /// `∫ |f|`, exact cell sum.
    pub fn l1_norm(&self) -> T {
        let measure = T::exp2_int(-(2 * self.depth as i32));
        self.values.iter().map(|v| v.abs() * measure).sum()
    }

    /// `∫ f²`, exact cell sum.
    pub fn l2_norm_sq(&self) -> T {
        let measure = T::exp2_int(-(2 * self.depth as i32));
        self.values.iter().map(|v| *v * *v * measure).sum()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// Measure of `{f > threshold}`.
    pub fn superlevel_measure(&self, threshold: T) -> T {
        let measure = T::exp2_int(-(2 * self.depth as i32));
        let count = self.values.iter().filter(|v| **v > threshold).count();
        T::from_usize(count).unwrap() * measure
    }

    /// Measure of `{f > threshold} ∩ R` for a dyadic rectangle.
    pub fn superlevel_measure_in(&self, threshold: T, rect: &DyadicRectangle) -> T {
        let grid = GridSpec::new(self.depth).expect("validated depth");
        let measure = T::exp2_int(-(2 * self.depth as i32));
        let mut count = 0usize;
        for cx in grid.cell_range(&rect.x) {
            for cy in grid.cell_range(&rect.y) {
                if self.get(cx, cy) > threshold {
                    count += 1;
                }
            }
        }
        T::from_usize(count).unwrap() * measure
    }
}

/// The square function `s_A = (Σ |A_{IJ}|² 1_{I×J} / |I×J|)^{1/2}` as an
/// exact step function at depth `d ≥ max_scale(A)`.
pub fn square_function<T: Scalar>(a: &CoefficientSequence<T>, depth: u32) -> Result<Step2D<T>> {
    if depth < a.max_scale() {
        return Err(Error::DepthTooSmall { required: a.max_scale(), got: depth });
    }
    let grid = GridSpec::new(depth)?;
    let mut out: Step2D<T> = Step2D::zeros(depth)?;
    for (r, v) in a.iter() {
        let weight = *v * *v / r.area();
        for cx in grid.cell_range(&r.x) {
            for cy in grid.cell_range(&r.y) {
                let cur = out.get(cx, cy);
                out.set(cx, cy, cur + weight);
            }
        }
    }
    Ok(out.map(|v| v.sqrt()))
}

/// The dyadic strong maximal function: cellwise supremum of `|f|`-averages
/// over all dyadic rectangles (scales `0..=d` on each axis) containing the
/// cell.
pub fn strong_maximal<T: Scalar>(f: &Step2D<T>) -> Step2D<T> {
    let d = f.depth();
    let n = 1usize << d;
    // Block sums of |f| for every scale pair, by repeated halving.
    let mut sums: Vec<Vec<Vec<T>>> = Vec::with_capacity(d as usize + 1);
    let base: Vec<Vec<T>> = (0..n)
        .map(|cx| (0..n).map(|cy| f.get(cx, cy).abs()).collect())
        .collect();
    sums.push(base);
    for level in 1..=d {
        let prev = &sums[level as usize - 1];
        let rows = prev.len() / 2;
        let next: Vec<Vec<T>> = (0..rows)
            .map(|r| {
                (0..prev[0].len())
                    .map(|c| prev[2 * r][c] + prev[2 * r + 1][c])
                    .collect()
            })
            .collect();
        sums.push(next);
    }
    // sums_x[k] has x blocks of width 2^k cells; now reduce in y for each.
    // Layout: averages[(i, j)] over the interval pair (scale d-i, d-j).
    let mut out = Step2D::zeros(d).expect("depth bounded by input");
    for cx in 0..n {
        for cy in 0..n {
            let mut best = T::zero();
            for ix in 0..=d {
                // x block at scale d - ix covering cx.
                let bx = cx >> ix;
                for jy in 0..=d {
                    let by = cy >> jy;
                    // Sum of the block: reduce y inside the x-reduced row.
                    let row = &sums[ix as usize][bx];
                    let width = 1usize << jy;
                    let mut block_sum = T::zero();
                    for c in by * width..(by + 1) * width {
                        block_sum += row[c];
                    }
                    let cells = T::from_usize((1usize << ix) * width).unwrap();
                    best = best.max(block_sum / cells);
                }
            }
            out.set(cx, cy, best);
        }
    }
    out
}

/// The 1D dyadic maximal function of a depth-`d` step function.
pub fn dyadic_maximal<T: Scalar>(values: &[T], depth: u32) -> Vec<T> {
    let n = 1usize << depth;
    assert_eq!(values.len(), n);
    let mut out = vec![T::zero(); n];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut best = T::zero();
        for s in 0..=depth {
            let width = 1usize << (depth - s);
            let block = c / width;
            let sum: T = values[block * width..(block + 1) * width]
                .iter()
                .map(|v| v.abs())
                .sum();
            best = best.max(sum / T::from_usize(width).unwrap());
        }
        *slot = best;
    }
    out
}

/// One level set of the embedding diagnostic decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct LevelSet<T> {
    /// Level exponent: the set is `{s_A > 2^k}`.
    pub k: i32,
    /// Measure of `U_k = {s_A > 2^k}`.
    pub u_measure: T,
    /// Measure of `V_k = {M 1_{U_k} > 1/2}`.
    pub v_measure: T,
    /// Number of support rectangles of `A` with `|R ∩ U_k| > |R|/2`.
    pub captured: usize,
}

/// Record of one embedding-inequality check
/// `Σ |λ_R||A_R| ≤ C · ‖λ‖_BMOprod · ‖s_A‖₁`.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport<T> {
    pub lhs: T,
    pub bmo: T,
    #[serde(rename = "sA_l1")]
    pub sa_l1: T,
    pub constant: T,
    pub pass: bool,
    pub levels: Vec<LevelSet<T>>,
}

/// Evaluate both sides of the embedding inequality together with the
/// level-set diagnostics that drive its proof.
pub fn embedding_check<T: Scalar>(
    lambda: &CoefficientSequence<T>,
    a: &CoefficientSequence<T>,
    depth: u32,
) -> Result<EmbeddingReport<T>> {
    let mut lhs = T::zero();
    for (r, v) in lambda.iter() {
        lhs += v.abs() * a.get(r).abs();
    }
    let bmo = prod_bmo_exact(lambda)?;
    let (sa_l1, levels) = if a.is_empty() {
        (T::zero(), Vec::new())
    } else {
        let s = square_function(a, depth)?;
        let sa_l1 = s.l1_norm();
        let mut levels = Vec::new();
        let positive_min = s
            .map(|v| if v > T::zero() { v } else { T::infinity() })
            .values_min();
        let k_lo = positive_min.log2().floor().to_i32().unwrap() - 1;
        let k_hi = s.max_value().log2().floor().to_i32().unwrap();
        let half = T::from_f64(0.5).unwrap();
        for k in k_lo..=k_hi {
            let threshold = T::exp2_int(k);
            let u_measure = s.superlevel_measure(threshold);
            if u_measure <= T::zero() {
                continue;
            }
            let indicator = s.map(|v| if v > threshold { T::one() } else { T::zero() });
            let maximal = strong_maximal(&indicator);
            let v_measure = maximal.superlevel_measure(half);
            let captured = a
                .iter()
                .filter(|(r, _)| {
                    let inside = s.superlevel_measure_in(threshold, r);
                    inside > r.area::<T>() * half
                })
                .count();
            levels.push(LevelSet { k, u_measure, v_measure, captured });
        }
        (sa_l1, levels)
    };
    let constant = T::from_f64(C_EMB).unwrap();
    let slack = T::from_f64(1e-12).unwrap();
    let pass = lhs <= constant * bmo * sa_l1 + slack;
    Ok(EmbeddingReport { lhs, bmo, sa_l1, constant, pass, levels })
}

/// Record of one mixed-embedding check: the unconditional
/// `ℓ¹(L²) × ℓ²(L²)` bound driven by the one-parameter BMO condition.
#[derive(Clone, Debug, Serialize)]
pub struct MixedEmbeddingReport<T> {
    pub lhs: T,
    pub bound: T,
    pub constant: T,
    pub pass: bool,
}

/// `Σ |λ_{IJ} ⟨g_J⟩_I ⟨u_I⟩_J| ≤ C · mixed_bmo(λ) · (Σ‖g_J‖₂²)^{1/2} · Σ‖u_I‖₂`.
pub fn mixed_embedding_check<T: Scalar>(
    lambda: &CoefficientSequence<T>,
    u: &FunctionFamily<T>,
    g: &FunctionFamily<T>,
) -> Result<MixedEmbeddingReport<T>> {
    if u.depth() != g.depth() {
        return Err(Error::DepthMismatch(u.depth(), g.depth()));
    }
    if u.depth() < lambda.max_scale() {
        return Err(Error::DepthTooSmall { required: lambda.max_scale(), got: u.depth() });
    }
    let mut lhs = T::zero();
    for (rect, value) in lambda.iter() {
        let g_avg = g.average(&rect.y, &rect.x)?;
        let u_avg = u.average(&rect.x, &rect.y)?;
        lhs += (*value * g_avg * u_avg).abs();
    }
    let constant = T::from_f64(C_CAR).unwrap();
    let bound = if lambda.is_empty() {
        T::zero()
    } else {
        constant * mixed_bmo(lambda, Orientation::XFixed)? * g.norm_sq().sqrt() * u.norm_l1_l2()
    };
    let slack = T::from_f64(1e-12).unwrap();
    Ok(MixedEmbeddingReport { lhs, bound, constant, pass: lhs <= bound + slack })
}

impl<T: Scalar> Step2D<T> {
    fn values_min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::x_norm;
    use crate::sequences::{column_example, identity_example};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(s: u32, p: u64) -> DyadicInterval {
        DyadicInterval::new(s, p).unwrap()
    }

    fn rect(sx: u32, px: u64, sy: u32, py: u64) -> DyadicRectangle {
        DyadicRectangle::new(iv(sx, px), iv(sy, py))
    }

    fn random_rect(rng: &mut ChaCha8Rng, max_scale: u32) -> DyadicRectangle {
        let sx = rng.random_range(0..=max_scale);
        let sy = rng.random_range(0..=max_scale);
        rect(sx, rng.random_range(0..1u64 << sx), sy, rng.random_range(0..1u64 << sy))
    }

    fn random_lambda(rng: &mut ChaCha8Rng, max_scale: u32, count: usize) -> CoefficientSequence<f64> {
        let mut l = CoefficientSequence::new();
        for _ in 0..count {
            l.insert(random_rect(rng, max_scale), rng.random_range(-1.0..1.0)).unwrap();
        }
        l
    }

    #[test]
    fn measure_matches_inclusion_exclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..200 {
            let rects: Vec<DyadicRectangle> =
                (0..rng.random_range(1..=3)).map(|_| random_rect(&mut rng, 5)).collect();
            let union = RectangleUnion::new(rects.clone());
            let swept: f64 = union.measure();

            let inter = |rs: &[&DyadicRectangle]| -> f64 {
                let mut x = rs[0].x;
                let mut y = rs[0].y;
                for r in &rs[1..] {
                    match (clip(&x, &r.x), clip(&y, &r.y)) {
                        (Some(cx), Some(cy)) => {
                            x = cx;
                            y = cy;
                        }
                        _ => return 0.0,
                    }
                }
                DyadicRectangle::new(x, y).area()
            };
            let mut expected = 0.0;
            let n = rects.len();
            for mask in 1..1usize << n {
                let subset: Vec<&DyadicRectangle> =
                    (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &rects[i]).collect();
                let sign = if subset.len() % 2 == 1 { 1.0 } else { -1.0 };
                expected += sign * inter(&subset);
            }
            assert!((swept - expected).abs() < 1e-15, "swept {swept} vs ie {expected}");
        }
    }

    #[test]
    fn covers_detects_containment() {
        let union = RectangleUnion::new([rect(1, 0, 0, 0), rect(1, 1, 1, 0)]);
        assert!(union.covers(&rect(1, 0, 0, 0)));
        assert!(union.covers(&rect(2, 1, 1, 1)));
        assert!(!union.covers(&rect(0, 0, 0, 0)));
        assert!(!union.covers(&rect(1, 1, 0, 0)));
        // Two half-height halves covering the unit square jointly.
        let split = RectangleUnion::new([rect(1, 0, 0, 0), rect(1, 1, 0, 0)]);
        assert!(split.covers(&rect(0, 0, 0, 0)));
    }

    #[test]
    fn rect_bmo_single_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..10 {
            let r = random_rect(&mut rng, 4);
            let c: f64 = rng.random_range(0.1..2.0);
            let mut lambda = CoefficientSequence::new();
            lambda.insert(r, c).unwrap();
            let expected = c / r.area::<f64>().sqrt();
            assert!((rect_bmo(&lambda).unwrap() - expected).abs() < 1e-12);
        }
        assert!(matches!(
            rect_bmo(&CoefficientSequence::<f64>::new()),
            Err(Error::EmptySupport)
        ));
    }

    #[test]
    fn rect_bmo_identity_diverges() {
        for d in 0..=6u32 {
            let lambda = identity_example::<f64>(d).unwrap();
            let expected = ((d + 1) as f64).sqrt();
            assert!((rect_bmo(&lambda).unwrap() - expected).abs() < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn rect_bmo_column_closed_form() {
        for d in 0..=10u32 {
            let lambda = column_example::<f64>(d).unwrap();
            let expected = (2.0 - 2f64.powi(-(d as i32))).sqrt();
            assert!((rect_bmo(&lambda).unwrap() - expected).abs() < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn prod_bmo_examples() {
        let mut single = CoefficientSequence::new();
        single.insert(rect(1, 0, 2, 1), -1.5).unwrap();
        let expected = 1.5 / rect(1, 0, 2, 1).area::<f64>().sqrt();
        assert!((prod_bmo_exact(&single).unwrap() - expected).abs() < 1e-12);

        let identity1 = identity_example::<f64>(1).unwrap();
        assert!((prod_bmo_exact(&identity1).unwrap() - 2f64.sqrt()).abs() < 1e-12);

        for d in 0..=8u32 {
            let lambda = column_example::<f64>(d).unwrap();
            let expected = (2.0 - 2f64.powi(-(d as i32))).sqrt();
            let got = prod_bmo_exact(&lambda).unwrap();
            assert!((got - expected).abs() < 1e-12, "d = {d}: {got} vs {expected}");
        }
    }

    #[test]
    fn prod_bmo_matches_full_subset_enumeration() {
        // Oracle without antichain pruning: all nonempty subsets.
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..20 {
            let count = rng.random_range(1..=6);
            let lambda = random_lambda(&mut rng, 3, count);
            if lambda.is_empty() {
                continue;
            }
            let support: Vec<DyadicRectangle> = lambda.iter().map(|(r, _)| *r).collect();
            let n = support.len();
            let mut brute: f64 = 0.0;
            for mask in 1..1usize << n {
                let subset: Vec<DyadicRectangle> =
                    (0..n).filter(|i| mask >> i & 1 == 1).map(|i| support[i]).collect();
                let union = RectangleUnion::new(subset);
                let measure: f64 = union.measure();
                let captured: f64 = lambda
                    .iter()
                    .filter(|(r, _)| union.covers(r))
                    .map(|(_, v)| v * v)
                    .sum();
                brute = brute.max(captured / measure);
            }
            let fast = prod_bmo_exact(&lambda).unwrap();
            assert!((fast - brute.sqrt()).abs() < 1e-12, "{fast} vs {}", brute.sqrt());
        }
    }

    #[test]
    fn greedy_is_a_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        for _ in 0..20 {
            let count = rng.random_range(1..=8);
            let lambda = random_lambda(&mut rng, 3, count);
            if lambda.is_empty() {
                continue;
            }
            let exact = prod_bmo_exact(&lambda).unwrap();
            let greedy = prod_bmo_greedy(&lambda).unwrap();
            assert!(greedy <= exact + 1e-12, "greedy {greedy} above exact {exact}");
        }

        let mut single = CoefficientSequence::<f64>::new();
        single.insert(rect(2, 1, 1, 0), 0.3).unwrap();
        assert!(
            (prod_bmo_greedy(&single).unwrap() - prod_bmo_exact(&single).unwrap()).abs() < 1e-15
        );

        let identity1 = identity_example::<f64>(1).unwrap();
        assert!((prod_bmo_greedy(&identity1).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rect_bmo_below_prod_bmo() {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        for _ in 0..20 {
            let count = rng.random_range(1..=6);
            let lambda = random_lambda(&mut rng, 3, count);
            if lambda.is_empty() {
                continue;
            }
            let r = rect_bmo(&lambda).unwrap();
            let p = prod_bmo_exact(&lambda).unwrap();
            assert!(r <= p + 1e-12, "rect {r} above prod {p}");
        }
    }

    #[test]
    fn mixed_bmo_cases() {
        let mut single = CoefficientSequence::<f64>::new();
        single.insert(DyadicRectangle::unit(), -0.8).unwrap();
        assert!((mixed_bmo(&single, Orientation::XFixed).unwrap() - 0.8).abs() < 1e-15);
        assert!((mixed_bmo(&single, Orientation::YFixed).unwrap() - 0.8).abs() < 1e-15);

        for d in 0..=8u32 {
            let lambda = column_example::<f64>(d).unwrap();
            let expected = (2.0 - 2f64.powi(-(d as i32))).sqrt();
            let got = mixed_bmo(&lambda, Orientation::XFixed).unwrap();
            assert!((got - expected).abs() < 1e-12, "d = {d}: {got}");
        }

        // Single entries: both orientations coincide with the conditional
        // norm |c| / sqrt(|R|).
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for _ in 0..10 {
            let r = random_rect(&mut rng, 3);
            let c: f64 = rng.random_range(0.1..2.0);
            let mut lambda = CoefficientSequence::new();
            lambda.insert(r, c).unwrap();
            let expected = c / r.area::<f64>().sqrt();
            let x = x_norm(&lambda, 3).unwrap();
            for orientation in [Orientation::XFixed, Orientation::YFixed] {
                let m = mixed_bmo(&lambda, orientation).unwrap();
                assert!((m - expected).abs() < 1e-12);
                assert!((m - x).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mixed_bmo_below_x_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        for _ in 0..20 {
            let lambda = random_lambda(&mut rng, 3, 5);
            if lambda.is_empty() {
                continue;
            }
            let x = x_norm(&lambda, 3).unwrap();
            for orientation in [Orientation::XFixed, Orientation::YFixed] {
                let m = mixed_bmo(&lambda, orientation).unwrap();
                assert!(m <= x + 1e-8, "mixed {m} above x {x}");
            }
        }
    }

    #[test]
    fn square_function_values() {
        let mut a = CoefficientSequence::new();
        a.insert(DyadicRectangle::unit(), 1.0).unwrap();
        let s = square_function(&a, 0).unwrap();
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.l1_norm(), 1.0);

        let mut a2 = CoefficientSequence::new();
        a2.insert(DyadicRectangle::unit(), 3.0).unwrap();
        a2.insert(rect(1, 0, 1, 0), 1.0).unwrap();
        let s2 = square_function(&a2, 1).unwrap();
        assert!((s2.get(0, 0) - 13f64.sqrt()).abs() < 1e-15);
        assert!((s2.get(1, 1) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn square_function_l2_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(127);
        for _ in 0..20 {
            let a = random_lambda(&mut rng, 3, 6);
            let s = square_function(&a, 3).unwrap();
            let sum_sq: f64 = a.iter().map(|(_, v)| v * v).sum();
            assert!((s.l2_norm_sq() - sum_sq).abs() < 1e-12);
        }
    }

    #[test]
    fn strong_maximal_cases() {
        let mut ones: Step2D<f64> = Step2D::zeros(2).unwrap();
        for cx in 0..4 {
            for cy in 0..4 {
                ones.set(cx, cy, 1.0);
            }
        }
        let m = strong_maximal(&ones);
        for cx in 0..4 {
            for cy in 0..4 {
                assert_eq!(m.get(cx, cy), 1.0);
            }
        }

        // Indicator of [0,1/2)²: at the cell containing (3/4, 3/4) the only
        // rectangle meeting the support is the full square, average 1/4.
        let mut f: Step2D<f64> = Step2D::zeros(2).unwrap();
        for cx in 0..2 {
            for cy in 0..2 {
                f.set(cx, cy, 1.0);
            }
        }
        let m = strong_maximal(&f);
        assert_eq!(m.get(3, 3), 0.25);

        // Dominates |f| cellwise.
        let mut rng = ChaCha8Rng::seed_from_u64(131);
        let mut g: Step2D<f64> = Step2D::zeros(3).unwrap();
        for cx in 0..8 {
            for cy in 0..8 {
                g.set(cx, cy, rng.random_range(-1.0..1.0));
            }
        }
        let mg = strong_maximal(&g);
        for cx in 0..8 {
            for cy in 0..8 {
                assert!(mg.get(cx, cy) >= g.get(cx, cy).abs() - 1e-15);
            }
        }
    }

    #[test]
    fn strong_maximal_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(137);
        let depth = 3u32;
        let mut f: Step2D<f64> = Step2D::zeros(depth).unwrap();
        for cx in 0..8 {
            for cy in 0..8 {
                f.set(cx, cy, rng.random_range(-1.0..1.0));
            }
        }
        let fast = strong_maximal(&f);
        let grid = GridSpec::new(depth).unwrap();
        for cx in 0..8usize {
            for cy in 0..8usize {
                let mut best: f64 = 0.0;
                for sx in 0..=depth {
                    for sy in 0..=depth {
                        let ix = iv(sx, (cx as u64) >> (depth - sx));
                        let jy = iv(sy, (cy as u64) >> (depth - sy));
                        let mut sum = 0.0;
                        let mut count = 0usize;
                        for bx in grid.cell_range(&ix) {
                            for by in grid.cell_range(&jy) {
                                sum += f.get(bx, by).abs();
                                count += 1;
                            }
                        }
                        best = best.max(sum / count as f64);
                    }
                }
                assert!((fast.get(cx, cy) - best).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn dyadic_maximal_1d() {
        let values = [1.0, 0.0, 0.0, 0.0];
        let m = dyadic_maximal(&values, 2);
        assert_eq!(m, vec![1.0, 0.5, 0.25, 0.25]);
    }

    #[test]
    fn embedding_trivial_cases() {
        let mut unit = CoefficientSequence::new();
        unit.insert(DyadicRectangle::unit(), 1.0).unwrap();
        let report = embedding_check(&unit, &unit, 0).unwrap();
        assert_eq!(report.lhs, 1.0);
        assert_eq!(report.bmo, 1.0);
        assert_eq!(report.sa_l1, 1.0);
        assert!(report.pass);

        let zero = CoefficientSequence::<f64>::new();
        let report = embedding_check(&unit, &zero, 2).unwrap();
        assert_eq!(report.lhs, 0.0);
        assert_eq!(report.sa_l1, 0.0);
        assert!(report.pass);
    }

    #[test]
    fn embedding_report_serialises_fixed_keys() {
        let mut unit = CoefficientSequence::new();
        unit.insert(DyadicRectangle::unit(), 1.0).unwrap();
        let report = embedding_check(&unit, &unit, 0).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in ["lhs", "bmo", "sA_l1", "constant", "pass"] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }

    #[test]
    fn mixed_embedding_trivial() {
        let mut unit = CoefficientSequence::<f64>::new();
        unit.insert(DyadicRectangle::unit(), -0.7).unwrap();
        let mut u = FunctionFamily::new(0).unwrap();
        u.insert_constant(DyadicInterval::unit(), 1.0).unwrap();
        let g = u.clone();
        let report = mixed_embedding_check(&unit, &u, &g).unwrap();
        assert!((report.lhs - 0.7).abs() < 1e-15);
        assert!(report.pass);

        let zero = CoefficientSequence::<f64>::new();
        let report = mixed_embedding_check(&zero, &u, &g).unwrap();
        assert_eq!(report.lhs, 0.0);
        assert!(report.pass);
    }
}
