//! Coefficient sequences indexed by dyadic rectangles, the matrix lift, and
//! the named example sequences, plus dense matrices and sign patterns.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{MAX_SUPPORT, MAX_WALSH_LOG};
use crate::dyadic::{DyadicInterval, DyadicRectangle, MAX_SCALE};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finitely supported map from dyadic rectangles to reals. Rectangles
/// absent from the map carry the value zero; zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSequence<T> {
    entries: BTreeMap<DyadicRectangle, T>,
}

impl<T: Scalar> Default for CoefficientSequence<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> CoefficientSequence<T> {
    pub fn new() -> Self {
        Self { entries: BTreeMap::new() }
    }

    /// Insert a coefficient; a zero value removes the entry, keeping the
    /// support sparse by construction.
    pub fn insert(&mut self, rect: DyadicRectangle, value: T) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite);
        }
        if value.is_zero() {
            self.entries.remove(&rect);
        } else {
            self.entries.insert(rect, value);
        }
        Ok(())
    }

    /// Build from entries, rejecting duplicate rectangles.
    pub fn from_entries<I>(iter: I) -> Result<Self>
    where
        I: IntoIterator<Item = (DyadicRectangle, T)>,
    {
        let mut seq = Self::new();
        for (rect, value) in iter {
            if seq.entries.contains_key(&rect) {
                return Err(Error::DuplicateRectangle(rect));
            }
            seq.insert(rect, value)?;
        }
        Ok(seq)
    }

    pub fn get(&self, rect: &DyadicRectangle) -> T {
        self.entries.get(rect).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DyadicRectangle, &T)> {
        self.entries.iter()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest scale appearing in the support; the minimal exact truncation
    /// depth. Zero for the empty sequence.
    pub fn max_scale(&self) -> u32 {
        self.entries.keys().map(|r| r.max_scale()).max().unwrap_or(0)
    }

    /// Distinct x-intervals of the support, sorted.
    pub fn x_intervals(&self) -> BTreeSet<DyadicInterval> {
        self.entries.keys().map(|r| r.x).collect()
    }

    /// Distinct y-intervals of the support, sorted.
    pub fn y_intervals(&self) -> BTreeSet<DyadicInterval> {
        self.entries.keys().map(|r| r.y).collect()
    }

    /// Entrywise absolute value; same support.
    pub fn abs(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|(r, v)| (*r, v.abs())).collect(),
        }
    }

    /// Entrywise multiplication by a ±1 pattern; support unchanged.
    pub fn apply_signs(&self, signs: &SignPattern) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(r, v)| (*r, if signs.is_flipped(r) { -*v } else { *v }))
                .collect(),
        }
    }

    /// Multiply the entry at `I × J` by `ε_I(I) · ε_J(J)` (product signs).
    pub fn apply_product_signs(&self, eps_x: &IntervalSigns, eps_y: &IntervalSigns) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(r, v)| {
                    let s = eps_x.sign(&r.x) * eps_y.sign(&r.y);
                    (*r, if s < 0 { -*v } else { *v })
                })
                .collect(),
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = Self::new();
        for (r, v) in &self.entries {
            out.insert(*r, *v * factor).expect("finite product");
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (r, v) in &other.entries {
            let sum = out.get(r) + *v;
            out.insert(*r, sum).expect("finite sum");
        }
        out
    }

    /// If the sequence is space-independent — for every supported scale pair
    /// `(i, j)` all `2^{i+j}` rectangles of `[0,1)²` are present with one
    /// common value — return the matrix `A` with `A^{ij}` recovered from
    /// `λ_{ij} = 2^{-(i+j)/2} A^{ij}`. This inverts `lift_matrix`.
    pub fn scale_matrix(&self) -> Option<DenseMatrix<T>> {
        if self.is_empty() {
            return None;
        }
        let mut per_scale: BTreeMap<(u32, u32), (T, usize)> = BTreeMap::new();
        for (r, v) in &self.entries {
            let key = (r.x.scale(), r.y.scale());
            match per_scale.get_mut(&key) {
                None => {
                    per_scale.insert(key, (*v, 1));
                }
                Some((value, count)) => {
                    if *value != *v {
                        return None;
                    }
                    *count += 1;
                }
            }
        }
        let n_rows = per_scale.keys().map(|(i, _)| i + 1).max().unwrap() as usize;
        let n_cols = per_scale.keys().map(|(_, j)| j + 1).max().unwrap() as usize;
        let mut matrix = DenseMatrix::zeros(n_rows, n_cols);
        for ((i, j), (value, count)) in per_scale {
            if count != 1usize << (i + j) {
                return None;
            }
            matrix.set(i as usize, j as usize, value * T::sqrt_pow2(i + j));
        }
        Some(matrix)
    }
}

/// The matrix lift: `λ_{IJ} = 2^{-(i+j)/2} A^{ij}` for every rectangle
/// `I × J ⊆ [0,1)²` with `(|I|, |J|) = (2^{-i}, 2^{-j})`, `i <` rows,
/// `j <` cols; zero elsewhere.
pub fn lift_matrix<T: Scalar>(matrix: &DenseMatrix<T>) -> Result<CoefficientSequence<T>> {
    if matrix.rows() == 0 || matrix.cols() == 0 {
        return Ok(CoefficientSequence::new());
    }
    if matrix.rows() as u32 > MAX_SCALE + 1 || matrix.cols() as u32 > MAX_SCALE + 1 {
        return Err(Error::ScaleTooLarge(matrix.rows().max(matrix.cols()) as u32 - 1));
    }
    // Support size in u128: scale sums reach 104 for the largest matrices.
    let mut support = 0u128;
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            if !matrix.get(i, j).is_zero() {
                support += 1u128 << (i + j);
            }
        }
    }
    if support > MAX_SUPPORT as u128 {
        return Err(Error::SizeOverCap {
            size: support.try_into().unwrap_or(usize::MAX),
            cap: MAX_SUPPORT,
        });
    }
    let mut seq = CoefficientSequence::new();
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            let a = matrix.get(i, j);
            if a.is_zero() {
                continue;
            }
            let value = a * T::inv_sqrt_pow2((i + j) as u32);
            for p in 0..1u64 << i {
                for q in 0..1u64 << j {
                    let rect = DyadicRectangle::new(
                        DyadicInterval::new(i as u32, p)?,
                        DyadicInterval::new(j as u32, q)?,
                    );
                    seq.insert(rect, value)?;
                }
            }
        }
    }
    Ok(seq)
}

/// `λ_{IJ} = |I|^{1/2} |J|^{1/2}` whenever `|I| = |J|`, down to scale `d`:
/// the lift of the `(d+1) × (d+1)` identity.
pub fn identity_example<T: Scalar>(depth: u32) -> Result<CoefficientSequence<T>> {
    lift_matrix(&DenseMatrix::identity(depth as usize + 1))
}

/// `λ = 2^{-j/2}` at `[0,1) × [0,2^{-j})` for `j = 0..=d`; nothing else.
pub fn column_example<T: Scalar>(depth: u32) -> Result<CoefficientSequence<T>> {
    let mut seq = CoefficientSequence::new();
    for j in 0..=depth {
        let rect = DyadicRectangle::new(DyadicInterval::unit(), DyadicInterval::new(j, 0)?);
        seq.insert(rect, T::inv_sqrt_pow2(j))?;
    }
    Ok(seq)
}

/// The `2^m × 2^m` Sylvester–Walsh ±1 matrix; rows are pairwise orthogonal
/// with `H · Hᵀ = 2^m · Id`.
pub fn walsh_hadamard<T: Scalar>(m: u32) -> Result<DenseMatrix<T>> {
    Ok(DenseMatrix::from_signs(&walsh_hadamard_signs(m)?))
}

/// Sign-level Walsh matrix, for exact integer orthogonality checks.
pub fn walsh_hadamard_signs(m: u32) -> Result<Vec<Vec<i8>>> {
    if m > MAX_WALSH_LOG {
        return Err(Error::SizeOverCap { size: 1 << m, cap: 1 << MAX_WALSH_LOG });
    }
    let n = 1usize << m;
    let mut h = vec![vec![1i8; n]; n];
    let mut block = 1;
    while block < n {
        for r in 0..block {
            for c in 0..block {
                let v = h[r][c];
                h[r][c + block] = v;
                h[r + block][c] = v;
                h[r + block][c + block] = -v;
            }
        }
        block <<= 1;
    }
    Ok(h)
}

/// The lift of `(N+1)^{-1/2} ·` Walsh matrix with `N + 1 = 2^m`: the
/// orthogonal-signs sequence with unit conditional norm and unconditional
/// norm `√(N+1)`. Materialisation is limited by the support cap; the lift
/// of a `2^m × 2^m` matrix has `(2^{2^m} - 1)²` entries, so only small `m`
/// fit in memory. Beyond the cap use `hadamard_scale_matrix` together with
/// the scale-block norm engine.
pub fn hadamard_sequence<T: Scalar>(m: u32) -> Result<CoefficientSequence<T>> {
    lift_matrix(&hadamard_scale_matrix(m)?)
}

/// `(N+1)^{-1/2} ·` Walsh matrix, the scale matrix of `hadamard_sequence`.
pub fn hadamard_scale_matrix<T: Scalar>(m: u32) -> Result<DenseMatrix<T>> {
    Ok(walsh_hadamard(m)?.scaled(T::inv_sqrt_pow2(m)))
}

/// An `n × n` matrix of independent ±1 entries, reproducible from the seed.
pub fn random_sign_matrix<T: Scalar>(n: usize, seed: u64) -> DenseMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if rng.random::<bool>() { T::one() } else { -T::one() };
            matrix.set(i, j, v);
        }
    }
    matrix
}

/// A finite dense real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::RaggedMatrix);
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows: n_rows, cols: n_cols, data })
    }

    fn from_signs(signs: &[Vec<i8>]) -> Self {
        let rows = signs.len();
        let cols = signs.first().map_or(0, Vec::len);
        let data = signs
            .iter()
            .flat_map(|row| row.iter().map(|&s| if s > 0 { T::one() } else { -T::one() }))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * factor).collect(),
        }
    }

    /// Entrywise absolute value.
    pub fn map_abs(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Submatrix keeping rows `i ≥ row_from` and cols `j ≥ col_from`.
    pub fn tail_block(&self, row_from: usize, col_from: usize) -> Self {
        let rows = self.rows.saturating_sub(row_from);
        let cols = self.cols.saturating_sub(col_from);
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.set(i, j, self.get(i + row_from, j + col_from));
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Write as headerless CSV, one row per line.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{:?}", v.to_f64().unwrap())).collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a headerless CSV of rows; rejects ragged or non-finite input.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut rows: Vec<Vec<T>> = Vec::new();
        for record in r.records() {
            let record = record?;
            let row: std::result::Result<Vec<f64>, _> =
                record.iter().map(|s| s.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| Error::InvalidConfig(format!("bad matrix entry: {e}")))?;
            rows.push(row.into_iter().map(|v| T::from_f64(v).unwrap()).collect());
        }
        Self::from_rows(rows)
    }
}

/// A ±1 sign pattern on rectangles, default `+1`; stored as the flipped set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignPattern {
    flipped: BTreeSet<DyadicRectangle>,
}

impl SignPattern {
    pub fn all_plus() -> Self {
        Self::default()
    }

    pub fn from_flipped<I: IntoIterator<Item = DyadicRectangle>>(iter: I) -> Self {
        Self { flipped: iter.into_iter().collect() }
    }

    pub fn is_flipped(&self, rect: &DyadicRectangle) -> bool {
        self.flipped.contains(rect)
    }

    pub fn sign<T: Scalar>(&self, rect: &DyadicRectangle) -> T {
        if self.is_flipped(rect) {
            -T::one()
        } else {
            T::one()
        }
    }

    /// All `2^k` sign patterns over the given support, for the exhaustive
    /// unconditional-norm oracle.
    pub fn enumerate(support: &[DyadicRectangle]) -> impl Iterator<Item = SignPattern> + '_ {
        let k = support.len();
        assert!(k < usize::BITS as usize);
        (0..1usize << k).map(move |mask| {
            SignPattern::from_flipped(
                support
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| mask >> idx & 1 == 1)
                    .map(|(_, r)| *r),
            )
        })
    }
}

/// A ±1 pattern on intervals, default `+1`; one factor of a product sign.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntervalSigns {
    flipped: BTreeSet<DyadicInterval>,
}

impl IntervalSigns {
    pub fn all_plus() -> Self {
        Self::default()
    }

    pub fn all_minus_on<I: IntoIterator<Item = DyadicInterval>>(iter: I) -> Self {
        Self { flipped: iter.into_iter().collect() }
    }

    pub fn sign(&self, interval: &DyadicInterval) -> i8 {
        if self.flipped.contains(interval) {
            -1
        } else {
            1
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceEntryRepr {
    sx: u32,
    px: u64,
    sy: u32,
    pl: u64,
    val: f64,
}

#[derive(Serialize, Deserialize)]
struct SequenceFileRepr {
    entries: Vec<SequenceEntryRepr>,
}

/// Serialise a sequence to the JSON interchange format
/// `{"entries": [{"sx","px","sy","pl","val"}, ...]}`.
pub fn write_sequence_json<T: Scalar, W: Write>(
    seq: &CoefficientSequence<T>,
    mut writer: W,
) -> Result<()> {
    let repr = SequenceFileRepr {
        entries: seq
            .iter()
            .map(|(r, v)| SequenceEntryRepr {
                sx: r.x.scale(),
                px: r.x.position(),
                sy: r.y.scale(),
                pl: r.y.position(),
                val: v.to_f64().unwrap(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut writer, &repr)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Load a sequence from the JSON interchange format; rejects duplicate
/// rectangles and non-finite values.
pub fn read_sequence_json<T: Scalar, R: Read>(reader: R) -> Result<CoefficientSequence<T>> {
    let repr: SequenceFileRepr = serde_json::from_reader(reader)?;
    let mut entries = Vec::with_capacity(repr.entries.len());
    for e in repr.entries {
        if !e.val.is_finite() {
            return Err(Error::NonFinite);
        }
        let rect = DyadicRectangle::new(
            DyadicInterval::new(e.sx, e.px)?,
            DyadicInterval::new(e.sy, e.pl)?,
        );
        entries.push((rect, T::from_f64(e.val).unwrap()));
    }
    CoefficientSequence::from_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: u32, p: u64) -> DyadicInterval {
        DyadicInterval::new(s, p).unwrap()
    }

    fn rect(sx: u32, px: u64, sy: u32, py: u64) -> DyadicRectangle {
        DyadicRectangle::new(iv(sx, px), iv(sy, py))
    }

    #[test]
    fn lift_of_identity_2x2() {
        let seq = lift_matrix(&DenseMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(seq.support_len(), 5);
        assert_eq!(seq.get(&DyadicRectangle::unit()), 1.0);
        for p in 0..2 {
            for q in 0..2 {
                assert_eq!(seq.get(&rect(1, p, 1, q)), 0.5);
            }
        }
    }

    #[test]
    fn lift_of_zero_and_1x1() {
        let zero = lift_matrix(&DenseMatrix::<f64>::zeros(3, 3)).unwrap();
        assert!(zero.is_empty());
        let c = DenseMatrix::from_rows(vec![vec![-2.5f64]]).unwrap();
        let seq = lift_matrix(&c).unwrap();
        assert_eq!(seq.support_len(), 1);
        assert_eq!(seq.get(&DyadicRectangle::unit()), -2.5);
    }

    #[test]
    fn lift_support_size() {
        // Support of the lift of a dense n×n matrix is (2^n - 1)^2.
        let mut m = DenseMatrix::<f64>::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, 1.0 + (i * 3 + j) as f64);
            }
        }
        let seq = lift_matrix(&m).unwrap();
        assert_eq!(seq.support_len(), (7usize).pow(2));
    }

    #[test]
    fn lift_inverts_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut m = DenseMatrix::<f64>::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, rng.random_range(-1.0..1.0));
            }
        }
        let seq = lift_matrix(&m).unwrap();
        for (r, v) in seq.iter() {
            let scale = r.x.scale() + r.y.scale();
            let recovered = *v * f64::sqrt_pow2(scale);
            let expected = m.get(r.x.scale() as usize, r.y.scale() as usize);
            assert!((recovered - expected).abs() < 1e-12);
        }
        // And the structured inverse agrees.
        let back = seq.scale_matrix().expect("lift is space-independent");
        for i in 0..3 {
            for j in 0..3 {
                assert!((back.get(i, j) - m.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scale_matrix_rejects_non_space_independent() {
        let mut seq = CoefficientSequence::<f64>::new();
        seq.insert(rect(1, 0, 0, 0), 1.0).unwrap();
        assert!(seq.scale_matrix().is_none()); // missing the (1,1,0,0) slot
        seq.insert(rect(1, 1, 0, 0), 2.0).unwrap();
        assert!(seq.scale_matrix().is_none()); // unequal values
    }

    #[test]
    fn abs_and_signs() {
        let mut seq = CoefficientSequence::<f64>::new();
        seq.insert(rect(0, 0, 0, 0), -3.0).unwrap();
        assert_eq!(seq.abs().get(&DyadicRectangle::unit()), 3.0);

        let nonneg = identity_example::<f64>(2).unwrap();
        assert_eq!(nonneg.abs(), nonneg);

        let signs = SignPattern::from_flipped([rect(0, 0, 0, 0)]);
        let flipped = seq.apply_signs(&signs);
        assert_eq!(flipped.get(&DyadicRectangle::unit()), 3.0);
        assert_eq!(flipped.apply_signs(&signs), seq);
        assert_eq!(seq.apply_signs(&SignPattern::all_plus()), seq);
    }

    #[test]
    fn abs_ignores_sign_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..10 {
            let mut lambda = CoefficientSequence::<f64>::new();
            for _ in 0..6 {
                let sx = rng.random_range(0..=3u32);
                let sy = rng.random_range(0..=3u32);
                let r = rect(sx, rng.random_range(0..1u64 << sx), sy, rng.random_range(0..1u64 << sy));
                lambda.insert(r, rng.random_range(-1.0..1.0)).unwrap();
            }
            let flipped: Vec<DyadicRectangle> = lambda
                .iter()
                .filter(|_| rng.random::<bool>())
                .map(|(r, _)| *r)
                .collect();
            let signs = SignPattern::from_flipped(flipped);
            assert_eq!(lambda.apply_signs(&signs).abs(), lambda.abs());
        }
    }

    #[test]
    fn abs_of_hadamard_is_lift_of_ones() {
        let seq = hadamard_sequence::<f64>(1).unwrap();
        let ones = DenseMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let expected = lift_matrix(&ones.scaled(0.5f64.sqrt())).unwrap();
        assert_eq!(seq.abs(), expected);
    }

    #[test]
    fn product_signs() {
        let seq = identity_example::<f64>(1).unwrap();
        let plus = IntervalSigns::all_plus();
        assert_eq!(seq.apply_product_signs(&plus, &plus), seq);

        let all_x = IntervalSigns::all_minus_on(seq.x_intervals());
        let flipped = seq.apply_product_signs(&all_x, &plus);
        assert_eq!(flipped, seq.scaled(-1.0));
    }

    #[test]
    fn identity_example_small() {
        let d0 = identity_example::<f64>(0).unwrap();
        assert_eq!(d0.support_len(), 1);
        assert_eq!(d0.get(&DyadicRectangle::unit()), 1.0);

        let d1 = identity_example::<f64>(1).unwrap();
        assert_eq!(d1.support_len(), 5);
        assert_eq!(d1.get(&DyadicRectangle::unit()), 1.0);
        assert_eq!(d1.get(&rect(1, 0, 1, 1)), 0.5);

        for d in 0..=5u32 {
            let expected: usize = (0..=d).map(|i| 4usize.pow(i)).sum();
            assert_eq!(identity_example::<f64>(d).unwrap().support_len(), expected);
        }
    }

    #[test]
    fn column_example_values() {
        let d0 = column_example::<f64>(0).unwrap();
        assert_eq!(d0.support_len(), 1);
        assert_eq!(d0.get(&DyadicRectangle::unit()), 1.0);

        let d2 = column_example::<f64>(2).unwrap();
        assert_eq!(d2.support_len(), 3);
        assert_eq!(d2.get(&rect(0, 0, 0, 0)), 1.0);
        assert_eq!(d2.get(&rect(0, 0, 1, 0)), 0.5f64.sqrt());
        assert_eq!(d2.get(&rect(0, 0, 2, 0)), 0.5);
    }

    #[test]
    fn walsh_matrices() {
        let h0 = walsh_hadamard_signs(0).unwrap();
        assert_eq!(h0, vec![vec![1]]);
        let h1 = walsh_hadamard_signs(1).unwrap();
        assert_eq!(h1, vec![vec![1, 1], vec![1, -1]]);

        // Row orthogonality in exact integer arithmetic: H·Hᵀ = 2^m·Id.
        for m in 0..=6u32 {
            let h = walsh_hadamard_signs(m).unwrap();
            let n = 1usize << m;
            for r in 0..n {
                for r2 in 0..n {
                    let dot: i64 = (0..n).map(|c| h[r][c] as i64 * h[r2][c] as i64).sum();
                    assert_eq!(dot, if r == r2 { n as i64 } else { 0 });
                }
            }
        }
    }

    #[test]
    fn hadamard_sequence_small() {
        let m0 = hadamard_sequence::<f64>(0).unwrap();
        assert_eq!(m0.support_len(), 1);
        assert_eq!(m0.get(&DyadicRectangle::unit()), 1.0);

        let m1 = hadamard_sequence::<f64>(1).unwrap();
        assert_eq!(m1.support_len(), 9);
        let amp = 0.5f64.sqrt();
        assert_eq!(m1.get(&rect(0, 0, 0, 0)), amp);
        // Sign from the Walsh matrix: entry (1,1) is -1.
        assert_eq!(m1.get(&rect(1, 0, 1, 0)), -amp * 0.5);

        // All magnitudes at scale pair (i, j) are 2^{-m/2}·2^{-(i+j)/2}.
        for (r, v) in m1.abs().iter() {
            let expected = amp * f64::inv_sqrt_pow2(r.x.scale() + r.y.scale());
            assert!((v - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn random_sign_matrix_reproducible() {
        let a = random_sign_matrix::<f64>(16, 42);
        let b = random_sign_matrix::<f64>(16, 42);
        assert_eq!(a, b);
        assert_ne!(a, random_sign_matrix::<f64>(16, 43));
        for i in 0..16 {
            for j in 0..16 {
                assert!(a.get(i, j).abs() == 1.0);
            }
        }
    }

    #[test]
    fn random_sign_matrix_mean_is_small() {
        // Law-of-large-numbers sanity: 10 seeds of 256×256 entries.
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..10 {
            let m = random_sign_matrix::<f64>(256, seed);
            for i in 0..256 {
                sum += m.row(i).iter().sum::<f64>();
            }
            count += 256 * 256;
        }
        let mean = sum / count as f64;
        assert!(mean.abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn sequence_json_roundtrip_and_validation() {
        let seq = column_example::<f64>(3).unwrap();
        let mut buf = Vec::new();
        write_sequence_json(&seq, &mut buf).unwrap();
        let back: CoefficientSequence<f64> = read_sequence_json(&buf[..]).unwrap();
        assert_eq!(back, seq);

        let dup = r#"{"entries":[
            {"sx":0,"px":0,"sy":0,"pl":0,"val":1.0},
            {"sx":0,"px":0,"sy":0,"pl":0,"val":2.0}
        ]}"#;
        assert!(matches!(
            read_sequence_json::<f64, _>(dup.as_bytes()),
            Err(Error::DuplicateRectangle(_))
        ));

        let inf = r#"{"entries":[{"sx":0,"px":0,"sy":0,"pl":0,"val":1e999}]}"#;
        assert!(read_sequence_json::<f64, _>(inf.as_bytes()).is_err());
    }

    #[test]
    fn matrix_csv_roundtrip() {
        let m = DenseMatrix::from_rows(vec![vec![1.0, -0.5, 0.25], vec![0.0, 2.0, -3.5]]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = DenseMatrix::<f64>::read_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn lift_rejects_oversized_support() {
        let mut m = DenseMatrix::<f64>::zeros(16, 16);
        m.set(15, 15, 1.0); // 2^30 rectangles
        assert!(matches!(lift_matrix(&m), Err(Error::SizeOverCap { .. })));
    }
}
