//! The mixed paraproduct bilinear form and its equivalent realisations:
//! the double-Haar pairing, the two-family form, and the truncated linear
//! operator between weighted coordinate spaces.
//!
//! Truncation is exact, not approximate: for a sequence supported at scales
//! `≤ d₀` inside `[0,1)²`, every average `⟨g_J⟩_I` sees only depth-`d` cell
//! averages for any `d ≥ d₀`, and replacing a function by its cell-average
//! projection never increases its L² norm, so the supremum over depth-`d`
//! step families equals the supremum over all of L².

use std::collections::BTreeMap;

use crate::dyadic::{haar_value, DyadicInterval, DyadicRectangle, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequences::CoefficientSequence;

/// Which tensor factor is paired against a Haar function when a double-Haar
/// expansion is split into a one-parameter family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Pair out the x variable: members indexed by x-intervals, functions
    /// of y. Produces the first (`u`) argument of the form.
    XHaar,
    /// Pair out the y variable: members indexed by y-intervals, functions
    /// of x. Produces the second (`g`) argument of the form.
    YHaar,
}

/// A finite double-Haar coefficient map: `f = Σ f_{IJ} h_I ⊗ h_J`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HaarExpansion2D<T> {
    coeffs: BTreeMap<DyadicRectangle, T>,
}

impl<T: Scalar> HaarExpansion2D<T> {
    pub fn new() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    pub fn insert(&mut self, rect: DyadicRectangle, value: T) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite);
        }
        if value.is_zero() {
            self.coeffs.remove(&rect);
        } else {
            self.coeffs.insert(rect, value);
        }
        Ok(())
    }

    pub fn from_entries<I>(iter: I) -> Result<Self>
    where
        I: IntoIterator<Item = (DyadicRectangle, T)>,
    {
        let mut f = Self::new();
        for (rect, value) in iter {
            if f.coeffs.contains_key(&rect) {
                return Err(Error::DuplicateRectangle(rect));
            }
            f.insert(rect, value)?;
        }
        Ok(f)
    }

    pub fn get(&self, rect: &DyadicRectangle) -> T {
        self.coeffs.get(rect).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DyadicRectangle, &T)> {
        self.coeffs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `‖f‖₂² = Σ f_{IJ}²` by orthonormality of the double Haar system.
    pub fn norm_sq(&self) -> T {
        self.coeffs.values().map(|v| *v * *v).sum()
    }

    pub fn max_x_scale(&self) -> u32 {
        self.coeffs.keys().map(|r| r.x.scale()).max().unwrap_or(0)
    }

    pub fn max_y_scale(&self) -> u32 {
        self.coeffs.keys().map(|r| r.y.scale()).max().unwrap_or(0)
    }

    /// Evaluate the represented function at a grid cell of the given depth.
    pub fn value_on_cell(&self, cx: &DyadicInterval, cy: &DyadicInterval) -> Result<T> {
        let mut acc = T::zero();
        for (r, v) in &self.coeffs {
            let hx: T = haar_value(&r.x, cx)?;
            if hx.is_zero() {
                continue;
            }
            let hy: T = haar_value(&r.y, cy)?;
            acc += *v * hx * hy;
        }
        Ok(acc)
    }
}

/// A finite family of depth-`d` step functions on `[0,1)`, indexed by dyadic
/// intervals: the `(u_I)` and `(g_J)` arguments of the bilinear form.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionFamily<T> {
    depth: u32,
    members: BTreeMap<DyadicInterval, Vec<T>>,
}

impl<T: Scalar> FunctionFamily<T> {
    pub fn new(depth: u32) -> Result<Self> {
        GridSpec::new(depth)?;
        Ok(Self { depth, members: BTreeMap::new() })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.depth).expect("depth validated on construction")
    }

    pub fn insert_member(&mut self, index: DyadicInterval, cells: Vec<T>) -> Result<()> {
        let expected = 1usize << self.depth;
        if cells.len() != expected {
            return Err(Error::BadMemberLength { depth: self.depth, expected, got: cells.len() });
        }
        if cells.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.members.insert(index, cells);
        Ok(())
    }

    /// Insert a member constant on its whole domain.
    pub fn insert_constant(&mut self, index: DyadicInterval, value: T) -> Result<()> {
        self.insert_member(index, vec![value; 1usize << self.depth])
    }

    /// Insert the indicator of `support`, scaled by `value`.
    pub fn insert_indicator(
        &mut self,
        index: DyadicInterval,
        support: &DyadicInterval,
        value: T,
    ) -> Result<()> {
        let grid = self.grid();
        if support.scale() > self.depth {
            return Err(Error::DepthTooSmall { required: support.scale(), got: self.depth });
        }
        let mut cells = vec![T::zero(); grid.num_cells()];
        for c in grid.cell_range(support) {
            cells[c] = value;
        }
        self.insert_member(index, cells)
    }

    pub fn member(&self, index: &DyadicInterval) -> Option<&[T]> {
        self.members.get(index).map(Vec::as_slice)
    }

    pub fn members(&self) -> impl Iterator<Item = (&DyadicInterval, &Vec<T>)> {
        self.members.iter()
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    /// Mean of a member over the cells of `window`; zero for an absent
    /// member. `window` must not be finer than the grid.
    pub fn average(&self, index: &DyadicInterval, window: &DyadicInterval) -> Result<T> {
        if window.scale() > self.depth {
            return Err(Error::DepthTooSmall { required: window.scale(), got: self.depth });
        }
        let Some(cells) = self.members.get(index) else {
            return Ok(T::zero());
        };
        let range = self.grid().cell_range(window);
        let len = T::from_usize(range.len()).unwrap();
        let sum: T = cells[range].iter().copied().sum();
        Ok(sum / len)
    }

    /// Squared L² norm of one member (cell sums are exact).
    pub fn member_norm_sq(&self, index: &DyadicInterval) -> T {
        let measure: T = self.grid().cell_measure();
        self.members
            .get(index)
            .map(|cells| cells.iter().map(|v| *v * *v * measure).sum())
            .unwrap_or_else(T::zero)
    }

    /// `Σ_members ‖·‖₂²`, the squared family norm.
    pub fn norm_sq(&self) -> T {
        let measure: T = self.grid().cell_measure();
        self.members
            .values()
            .map(|cells| cells.iter().map(|v| *v * *v * measure).sum::<T>())
            .sum()
    }

    /// `Σ_members ‖·‖₂`, the ℓ¹(L²) family norm.
    pub fn norm_l1_l2(&self) -> T {
        self.members
            .keys()
            .map(|index| self.member_norm_sq(index).sqrt())
            .sum()
    }

    /// Replace every member by its cell-average projection at a coarser
    /// depth, re-sampled on this grid. Leaves the form invariant whenever
    /// the coarser depth still resolves the paired sequence.
    pub fn averaged_at(&self, depth: u32) -> Result<Self> {
        if depth > self.depth {
            return Err(Error::DepthTooSmall { required: depth, got: self.depth });
        }
        let block = 1usize << (self.depth - depth);
        let block_len = T::from_usize(block).unwrap();
        let mut out = Self::new(self.depth)?;
        for (index, cells) in &self.members {
            let mut averaged = vec![T::zero(); cells.len()];
            for coarse in 0..1usize << depth {
                let range = coarse * block..(coarse + 1) * block;
                let mean: T = cells[range.clone()].iter().copied().sum::<T>() / block_len;
                for c in range {
                    averaged[c] = mean;
                }
            }
            out.insert_member(*index, averaged)?;
        }
        Ok(out)
    }
}

/// The bilinear form `Γ_λ((u_I), (g_J)) = Σ λ_{IJ} ⟨g_J⟩_I ⟨u_I⟩_J`,
/// evaluated exactly as the finite sum over the support of `λ`.
pub fn gamma_eval<T: Scalar>(
    lambda: &CoefficientSequence<T>,
    u: &FunctionFamily<T>,
    g: &FunctionFamily<T>,
) -> Result<T> {
    if u.depth() != g.depth() {
        return Err(Error::DepthMismatch(u.depth(), g.depth()));
    }
    if u.depth() < lambda.max_scale() {
        return Err(Error::DepthTooSmall { required: lambda.max_scale(), got: u.depth() });
    }
    let mut acc = T::zero();
    for (rect, value) in lambda.iter() {
        let g_avg = g.average(&rect.y, &rect.x)?;
        if g_avg.is_zero() {
            continue;
        }
        let u_avg = u.average(&rect.x, &rect.y)?;
        acc += *value * g_avg * u_avg;
    }
    Ok(acc)
}

/// The paraproduct pairing
/// `P_λ(f, g) = Σ λ_{IJ} ⟨f, h_I ⊗ 1_J/|J|⟩ ⟨g, 1_I/|I| ⊗ h_J⟩`
/// on finitely supported double-Haar expansions. The pairings reduce to
/// `⟨f, h_I ⊗ 1_J/|J|⟩ = Σ_{J' ⊋ J} f_{IJ'} h_{J'}(J)` and symmetrically.
pub fn evaluate_p<T: Scalar>(
    lambda: &CoefficientSequence<T>,
    f: &HaarExpansion2D<T>,
    g: &HaarExpansion2D<T>,
) -> Result<T> {
    // Group the expansions by the index that must match λ exactly.
    let mut f_by_x: BTreeMap<DyadicInterval, Vec<(DyadicInterval, T)>> = BTreeMap::new();
    for (r, v) in f.iter() {
        f_by_x.entry(r.x).or_default().push((r.y, *v));
    }
    let mut g_by_y: BTreeMap<DyadicInterval, Vec<(DyadicInterval, T)>> = BTreeMap::new();
    for (r, v) in g.iter() {
        g_by_y.entry(r.y).or_default().push((r.x, *v));
    }

    let mut acc = T::zero();
    for (rect, value) in lambda.iter() {
        let f_pair = match f_by_x.get(&rect.x) {
            None => T::zero(),
            Some(entries) => {
                let mut s = T::zero();
                for (j_prime, coeff) in entries {
                    if j_prime.contains(&rect.y) && *j_prime != rect.y {
                        s += *coeff * haar_value::<T>(j_prime, &rect.y)?;
                    }
                }
                s
            }
        };
        if f_pair.is_zero() {
            continue;
        }
        let g_pair = match g_by_y.get(&rect.y) {
            None => T::zero(),
            Some(entries) => {
                let mut s = T::zero();
                for (i_prime, coeff) in entries {
                    if i_prime.contains(&rect.x) && *i_prime != rect.x {
                        s += *coeff * haar_value::<T>(i_prime, &rect.x)?;
                    }
                }
                s
            }
        };
        acc += *value * f_pair * g_pair;
    }
    Ok(acc)
}

/// Split a double-Haar expansion into a one-parameter family by pairing one
/// tensor factor against its Haar functions: for `Axis::YHaar` the member at
/// `J` is the step function `Σ_I g_{IJ} h_I`, sampled on depth-`d` cells.
/// The family norm equals the expansion norm (Parseval, exact on the grid).
pub fn family_from_expansion<T: Scalar>(
    expansion: &HaarExpansion2D<T>,
    axis: Axis,
    depth: u32,
) -> Result<FunctionFamily<T>> {
    let required = match axis {
        Axis::XHaar => expansion.max_y_scale(),
        Axis::YHaar => expansion.max_x_scale(),
    } + if expansion.is_empty() { 0 } else { 1 };
    if depth < required {
        return Err(Error::DepthTooSmall { required, got: depth });
    }
    let grid = GridSpec::new(depth)?;
    let mut per_member: BTreeMap<DyadicInterval, Vec<(DyadicInterval, T)>> = BTreeMap::new();
    for (r, v) in expansion.iter() {
        let (index, haar_interval) = match axis {
            Axis::XHaar => (r.x, r.y),
            Axis::YHaar => (r.y, r.x),
        };
        per_member.entry(index).or_default().push((haar_interval, *v));
    }
    let mut family = FunctionFamily::new(depth)?;
    for (index, terms) in per_member {
        let mut cells = vec![T::zero(); grid.num_cells()];
        for (interval, coeff) in terms {
            let amplitude: T = interval.inv_sqrt_length();
            let range = grid.cell_range(&interval);
            let half = range.len() / 2;
            for c in range.start..range.start + half {
                cells[c] += coeff * amplitude;
            }
            for c in range.start + half..range.end {
                cells[c] -= coeff * amplitude;
            }
        }
        family.insert_member(index, cells)?;
    }
    Ok(family)
}

/// The flat families realising a matrix bilinear form through the lift:
/// `u_I = 2^{-i/2} a_i 1_{[0,1)}` for every `|I| = 2^{-i}`, and likewise for
/// `b`. The family norms equal the Euclidean norms of `a` and `b`.
pub fn matrix_embedding<T: Scalar>(
    a: &[T],
    b: &[T],
    depth: u32,
) -> Result<(FunctionFamily<T>, FunctionFamily<T>)> {
    let max_scale = a.len().max(b.len()).saturating_sub(1) as u32;
    if depth < max_scale {
        return Err(Error::DepthTooSmall { required: max_scale, got: depth });
    }
    let build = |coeffs: &[T]| -> Result<FunctionFamily<T>> {
        let mut family = FunctionFamily::new(depth)?;
        for (i, &coeff) in coeffs.iter().enumerate() {
            let value = coeff * T::inv_sqrt_pow2(i as u32);
            for p in 0..1u64 << i {
                family.insert_constant(DyadicInterval::new(i as u32, p)?, value)?;
            }
        }
        Ok(family)
    };
    Ok((build(a)?, build(b)?))
}

/// The truncated form realised as a linear map `G` from u-coordinates to
/// g-coordinates, matrix-free.
///
/// Coordinates are L²-weighted cell values (`value · 2^{-d/2}`), so the
/// Euclidean operator norm of `G` equals the norm of the truncated form.
/// The public coordinate space is indexed by (interval of scale `≤ d`,
/// depth-`d` cell) on each side; internally only members whose interval
/// occurs in the support of `λ` are kept, since all other coordinates lie
/// in the kernel (columns) or the cokernel (rows) of `G` and cannot affect
/// the operator norm.
pub struct TruncatedFormOperator<T> {
    grid: GridSpec,
    x_members: Vec<DyadicInterval>,
    y_members: Vec<DyadicInterval>,
    entries: Vec<KernelEntry<T>>,
}

/// One coefficient of the form, with all apply indices baked in. The same
/// entry drives both directions: the forward apply averages the x-member
/// over its y-window (`pre_lo..pre_hi`) and writes onto the y-member over
/// its x-range (`diff_lo..diff_hi`); the adjoint swaps the two index pairs.
/// The weight `λ_{IJ} · 2^{i+j-d}` is shared.
struct KernelEntry<T> {
    pre_lo: u32,
    pre_hi: u32,
    diff_lo: u32,
    diff_hi: u32,
    factor: T,
}

impl<T: Scalar> TruncatedFormOperator<T> {
    pub fn new(lambda: &CoefficientSequence<T>, depth: u32) -> Result<Self> {
        if depth < lambda.max_scale() {
            return Err(Error::DepthTooSmall { required: lambda.max_scale(), got: depth });
        }
        let grid = GridSpec::new(depth)?;
        let x_members: Vec<DyadicInterval> = lambda.x_intervals().into_iter().collect();
        let y_members: Vec<DyadicInterval> = lambda.y_intervals().into_iter().collect();
        let x_index: BTreeMap<DyadicInterval, usize> =
            x_members.iter().enumerate().map(|(k, i)| (*i, k)).collect();
        let y_index: BTreeMap<DyadicInterval, usize> =
            y_members.iter().enumerate().map(|(k, j)| (*j, k)).collect();
        let stride = grid.num_cells() + 1;
        let entries = lambda
            .iter()
            .map(|(r, v)| {
                let x_base = x_index[&r.x] * stride;
                let y_base = y_index[&r.y] * stride;
                let window = grid.cell_range(&r.y);
                let indicator = grid.cell_range(&r.x);
                KernelEntry {
                    pre_lo: (x_base + window.start) as u32,
                    pre_hi: (x_base + window.end) as u32,
                    diff_lo: (y_base + indicator.start) as u32,
                    diff_hi: (y_base + indicator.end) as u32,
                    factor: *v
                        * T::exp2_int(r.x.scale() as i32 + r.y.scale() as i32 - depth as i32),
                }
            })
            .collect();
        Ok(Self { grid, x_members, y_members, entries })
    }

    pub fn depth(&self) -> u32 {
        self.grid.depth()
    }

    /// Coordinate dimension of the full (public) spaces,
    /// `(2^{d+1} - 1) · 2^d` on each side.
    pub fn full_dim(&self) -> usize {
        self.grid.num_intervals() * self.grid.num_cells()
    }

    /// Dimensions of the internal support-restricted spaces.
    pub fn restricted_dims(&self) -> (usize, usize) {
        let cells = self.grid.num_cells();
        (self.x_members.len() * cells, self.y_members.len() * cells)
    }

    pub fn x_members(&self) -> &[DyadicInterval] {
        &self.x_members
    }

    pub fn y_members(&self) -> &[DyadicInterval] {
        &self.y_members
    }

    /// `y = G x` on full coordinates.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.full_dim() {
            return Err(Error::DimensionMismatch { expected: self.full_dim(), got: x.len() });
        }
        let cells = self.grid.num_cells();
        let restricted = self.gather(x, &self.x_members);
        let out = self.apply_restricted(&restricted)?;
        let mut full = vec![T::zero(); self.full_dim()];
        for (k, member) in self.y_members.iter().enumerate() {
            let dst = self.grid.interval_index(member) * cells;
            full[dst..dst + cells].copy_from_slice(&out[k * cells..(k + 1) * cells]);
        }
        Ok(full)
    }

    /// `x = Gᵀ y` on full coordinates.
    pub fn adjoint_apply(&self, y: &[T]) -> Result<Vec<T>> {
        if y.len() != self.full_dim() {
            return Err(Error::DimensionMismatch { expected: self.full_dim(), got: y.len() });
        }
        let cells = self.grid.num_cells();
        let restricted = self.gather(y, &self.y_members);
        let out = self.adjoint_apply_restricted(&restricted)?;
        let mut full = vec![T::zero(); self.full_dim()];
        for (k, member) in self.x_members.iter().enumerate() {
            let dst = self.grid.interval_index(member) * cells;
            full[dst..dst + cells].copy_from_slice(&out[k * cells..(k + 1) * cells]);
        }
        Ok(full)
    }

    fn gather(&self, full: &[T], members: &[DyadicInterval]) -> Vec<T> {
        let cells = self.grid.num_cells();
        let mut out = vec![T::zero(); members.len() * cells];
        for (k, member) in members.iter().enumerate() {
            let src = self.grid.interval_index(member) * cells;
            out[k * cells..(k + 1) * cells].copy_from_slice(&full[src..src + cells]);
        }
        out
    }

    /// `y = G x` on support-restricted coordinates. Cost
    /// `O((|supp_x| + |supp_y|) · 2^d + |supp λ|)` per call.
    pub fn apply_restricted(&self, x: &[T]) -> Result<Vec<T>> {
        self.apply_impl(x, false)
    }

    /// `x = Gᵀ y` on support-restricted coordinates.
    pub fn adjoint_apply_restricted(&self, y: &[T]) -> Result<Vec<T>> {
        self.apply_impl(y, true)
    }

    fn apply_impl(&self, input: &[T], adjoint: bool) -> Result<Vec<T>> {
        let cells = self.grid.num_cells();
        let (in_count, out_count) = if adjoint {
            (self.y_members.len(), self.x_members.len())
        } else {
            (self.x_members.len(), self.y_members.len())
        };
        let expected = in_count * cells;
        if input.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: input.len() });
        }

        // Prefix sums of every input member for O(1) window sums.
        let mut prefix = vec![T::zero(); in_count * (cells + 1)];
        for m in 0..in_count {
            let src = &input[m * cells..(m + 1) * cells];
            let dst = &mut prefix[m * (cells + 1)..(m + 1) * (cells + 1)];
            for (c, v) in src.iter().enumerate() {
                dst[c + 1] = dst[c] + *v;
            }
        }

        // Difference arrays per output member; one range update per entry.
        let mut diff = vec![T::zero(); out_count * (cells + 1)];
        for e in &self.entries {
            let (lo, hi, dlo, dhi) = if adjoint {
                (e.diff_lo, e.diff_hi, e.pre_lo, e.pre_hi)
            } else {
                (e.pre_lo, e.pre_hi, e.diff_lo, e.diff_hi)
            };
            let contribution =
                e.factor * (prefix[hi as usize] - prefix[lo as usize]);
            diff[dlo as usize] += contribution;
            diff[dhi as usize] -= contribution;
        }

        let mut out = vec![T::zero(); out_count * cells];
        for m in 0..out_count {
            let d = &diff[m * (cells + 1)..(m + 1) * (cells + 1)];
            let dst = &mut out[m * cells..(m + 1) * cells];
            let mut running = T::zero();
            for c in 0..cells {
                running += d[c];
                dst[c] = running;
            }
        }
        Ok(out)
    }

    /// Support-restricted coordinates of a family (members outside the
    /// support are dropped; they cannot affect the form).
    pub fn restrict_family(&self, family: &FunctionFamily<T>, side: Axis) -> Result<Vec<T>> {
        if family.depth() != self.depth() {
            return Err(Error::DepthMismatch(family.depth(), self.depth()));
        }
        let members = match side {
            Axis::XHaar => &self.x_members,
            Axis::YHaar => &self.y_members,
        };
        let cells = self.grid.num_cells();
        let weight = T::one() / T::sqrt_pow2(self.depth());
        let mut out = vec![T::zero(); members.len() * cells];
        for (k, member) in members.iter().enumerate() {
            if let Some(values) = family.member(member) {
                for (c, v) in values.iter().enumerate() {
                    out[k * cells + c] = *v * weight;
                }
            }
        }
        Ok(out)
    }
}

/// Full L²-weighted coordinates of a family on the grid of its depth.
/// Members must be indexed by intervals of scale `≤ depth`.
pub fn family_coordinates<T: Scalar>(family: &FunctionFamily<T>) -> Result<Vec<T>> {
    let grid = family.grid();
    let cells = grid.num_cells();
    let weight = T::one() / T::sqrt_pow2(family.depth());
    let mut out = vec![T::zero(); grid.num_intervals() * cells];
    for (index, values) in family.members() {
        if index.scale() > family.depth() {
            return Err(Error::DepthTooSmall { required: index.scale(), got: family.depth() });
        }
        let base = grid.interval_index(index) * cells;
        for (c, v) in values.iter().enumerate() {
            out[base + c] = *v * weight;
        }
    }
    Ok(out)
}
