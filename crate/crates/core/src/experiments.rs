//! Reproducible experiment runners and their serialisable reports.
//!
//! Runners are plain library functions over an [`ExperimentConfig`]; the
//! command-line front end is a thin argument parser over them. Identical
//! configs produce identical reports, bit for bit: all randomness comes
//! from seeded generators with per-trial streams, and every pass flag is
//! recomputable from the numbers stored in its row.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bmo::{mixed_bmo, prod_bmo_exact, rect_bmo, Orientation};
use crate::config::{DEFAULT_SEED, DEFAULT_TOL};
use crate::dyadic::{DyadicInterval, DyadicRectangle};
use crate::error::{Error, Result};
use crate::norms::{
    mlambda_norm, spectral_norm_dense, x_norm, x_norm_space_independent, xprime_norm,
    xprime_sign_oracle,
};
use crate::sequences::{
    column_example, hadamard_scale_matrix, hadamard_sequence, identity_example, lift_matrix,
    random_sign_matrix, CoefficientSequence, DenseMatrix, IntervalSigns,
};

/// Shared experiment configuration; each runner reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub tol: f64,
    pub trials: usize,
    /// Matrix size for the lift-equality experiment (≤ 8).
    pub dim: usize,
    /// Largest Walsh exponent for the norm-gap experiment (≤ 6).
    pub m_max: u32,
    /// Largest depth for the identity/column experiments.
    pub d_max: u32,
    /// Matrix size for the random-sign-norm experiment (≤ 512).
    pub n: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            tol: DEFAULT_TOL,
            trials: 20,
            dim: 8,
            m_max: 4,
            d_max: 8,
            n: 128,
        }
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.tol <= 0.0 || self.tol.is_nan() {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        Ok(())
    }
}

/// One table row of an experiment report.
pub trait ReportRow: Serialize {
    fn headers() -> &'static [&'static str];
    fn cells(&self) -> Vec<String>;
    fn pass(&self) -> bool;
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// A finished experiment: configuration, per-row records, and the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport<R> {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub rows: Vec<R>,
    pub pass: bool,
}

impl<R: ReportRow> ExperimentReport<R> {
    fn new(experiment: &str, config: &ExperimentConfig, rows: Vec<R>) -> Self {
        let pass = rows.iter().all(ReportRow::pass);
        Self { experiment: experiment.into(), config: config.clone(), rows, pass }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(R::headers())?;
        for row in &self.rows {
            w.write_record(row.cells())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table for terminal output.
    pub fn render_text(&self) -> String {
        let headers: Vec<String> = R::headers().iter().map(|h| h.to_string()).collect();
        let mut table: Vec<Vec<String>> = vec![headers];
        for row in &self.rows {
            table.push(row.cells());
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = format!("experiment: {}\n", self.experiment);
        for (idx, row) in table.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:>w$}", w = w))
                .collect();
            out.push_str(&line.join("  "));
            out.push('\n');
            if idx == 0 {
                out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
                out.push('\n');
            }
        }
        out.push_str(&format!("verdict: {}\n", if self.pass { "PASS" } else { "FAIL" }));
        out
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix<f64> {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    m
}

/// Random sparse sequence with the exact support size: scales uniform up to
/// `max_scale` on each axis, values uniform in `[-1, 1]` bounded away from
/// zero. The shared instance distribution of the property experiments and
/// the calibration sweep.
pub fn random_sparse_lambda(
    rng: &mut ChaCha8Rng,
    max_scale: u32,
    support: usize,
) -> CoefficientSequence<f64> {
    let mut lambda = CoefficientSequence::new();
    while lambda.support_len() < support {
        let sx = rng.random_range(0..=max_scale);
        let sy = rng.random_range(0..=max_scale);
        let rect = DyadicRectangle::new(
            DyadicInterval::new(sx, rng.random_range(0..1u64 << sx)).unwrap(),
            DyadicInterval::new(sy, rng.random_range(0..1u64 << sy)).unwrap(),
        );
        let mut v: f64 = rng.random_range(-1.0..1.0);
        if v.abs() < 0.05 {
            v = 0.05f64.copysign(v + f64::MIN_POSITIVE);
        }
        lambda.insert(rect, v).unwrap();
    }
    lambda
}

/// Random function family on the depth-`d` grid, same distribution as the
/// mixed-embedding instances: a mix of constant members, indicator members,
/// and fully random cell values, so that window averages of every size
/// occur.
pub fn random_function_family(
    rng: &mut ChaCha8Rng,
    depth: u32,
    members: usize,
) -> crate::forms::FunctionFamily<f64> {
    let mut family = crate::forms::FunctionFamily::new(depth).expect("small depth");
    while family.member_count() < members {
        let s = rng.random_range(0..=depth);
        let index = DyadicInterval::new(s, rng.random_range(0..1u64 << s)).unwrap();
        match rng.random_range(0..3u8) {
            0 => {
                let v: f64 = rng.random_range(-1.0..1.0);
                family.insert_constant(index, v).unwrap();
            }
            1 => {
                let s2 = rng.random_range(0..=depth);
                let support = DyadicInterval::new(s2, rng.random_range(0..1u64 << s2)).unwrap();
                let v: f64 = rng.random_range(-1.0..1.0);
                family.insert_indicator(index, &support, v).unwrap();
            }
            _ => {
                let cells =
                    (0..1usize << depth).map(|_| rng.random_range(-1.0..1.0)).collect();
                family.insert_member(index, cells).unwrap();
            }
        }
    }
    family
}

/// Random family whose member indices and indicator windows are biased
/// towards the given interval pools, so that the family actually interacts
/// with a sequence supported there. Used to drive the embedding checks
/// close to their extremal configurations.
fn random_matched_family(
    rng: &mut ChaCha8Rng,
    depth: u32,
    members: usize,
    indices: &[DyadicInterval],
    windows: &[DyadicInterval],
) -> crate::forms::FunctionFamily<f64> {
    let mut family = crate::forms::FunctionFamily::new(depth).expect("small depth");
    while family.member_count() < members {
        let index = if !indices.is_empty() && rng.random::<bool>() {
            indices[rng.random_range(0..indices.len())]
        } else {
            let s = rng.random_range(0..=depth);
            DyadicInterval::new(s, rng.random_range(0..1u64 << s)).unwrap()
        };
        match rng.random_range(0..3u8) {
            0 => {
                let v: f64 = rng.random_range(-1.0..1.0);
                family.insert_constant(index, v).unwrap();
            }
            1 => {
                let support = if !windows.is_empty() && rng.random::<bool>() {
                    windows[rng.random_range(0..windows.len())]
                } else {
                    let s = rng.random_range(0..=depth);
                    DyadicInterval::new(s, rng.random_range(0..1u64 << s)).unwrap()
                };
                let v: f64 = rng.random_range(-1.0..1.0);
                family.insert_indicator(index, &support, v).unwrap();
            }
            _ => {
                let cells =
                    (0..1usize << depth).map(|_| rng.random_range(-1.0..1.0)).collect();
                family.insert_member(index, cells).unwrap();
            }
        }
    }
    family
}

/// One instance of the sufficiency-chain checks: a sparse `λ`, a sparse `A`
/// sharing part of its support (so the embedding left side is nontrivial),
/// and a pair of families biased towards λ's support intervals.
pub fn sufficiency_instance(
    rng: &mut ChaCha8Rng,
) -> (
    CoefficientSequence<f64>,
    CoefficientSequence<f64>,
    crate::forms::FunctionFamily<f64>,
    crate::forms::FunctionFamily<f64>,
) {
    // One instance in eight is a tight one: a single coefficient paired
    // with matched constant members, the configuration where the mixed
    // embedding ratio attains its extremal value √|R|.
    if rng.random_range(0..8u8) == 0 {
        let rect = if rng.random::<bool>() {
            DyadicRectangle::unit()
        } else {
            let sx = rng.random_range(0..=3u32);
            let sy = rng.random_range(0..=3u32);
            DyadicRectangle::new(
                DyadicInterval::new(sx, rng.random_range(0..1u64 << sx)).unwrap(),
                DyadicInterval::new(sy, rng.random_range(0..1u64 << sy)).unwrap(),
            )
        };
        let mut lambda = CoefficientSequence::new();
        let c: f64 = rng.random_range(0.1..1.0);
        lambda.insert(rect, c).unwrap();
        let a = lambda.scaled(rng.random_range(0.5..2.0));
        let mut u = crate::forms::FunctionFamily::new(3).expect("small depth");
        let vu: f64 = rng.random_range(0.1..1.0);
        u.insert_constant(rect.x, vu).unwrap();
        let mut g = crate::forms::FunctionFamily::new(3).expect("small depth");
        let vg: f64 = rng.random_range(0.1..1.0);
        g.insert_constant(rect.y, vg).unwrap();
        return (lambda, a, u, g);
    }

    let lambda_support = rng.random_range(2..=10);
    let lambda = random_sparse_lambda(rng, 3, lambda_support);
    // A shares a random subset of λ's support plus fresh rectangles.
    let mut a = CoefficientSequence::new();
    for (r, _) in lambda.iter() {
        if rng.random::<bool>() {
            let v: f64 = rng.random_range(-1.0..1.0);
            a.insert(*r, v).unwrap();
        }
    }
    let extra_support = rng.random_range(1..=5);
    let extra = random_sparse_lambda(rng, 3, extra_support);
    let mut a = a.add(&extra);
    if a.is_empty() {
        let v: f64 = rng.random_range(0.1..1.0);
        a.insert(DyadicRectangle::unit(), v).unwrap();
    }
    let xs: Vec<DyadicInterval> = lambda.x_intervals().into_iter().collect();
    let ys: Vec<DyadicInterval> = lambda.y_intervals().into_iter().collect();
    let u_members = rng.random_range(2..=5);
    let u = random_matched_family(rng, 3, u_members, &xs, &ys);
    let g_members = rng.random_range(2..=5);
    let g = random_matched_family(rng, 3, g_members, &ys, &xs);
    (lambda, a, u, g)
}

// ---------------------------------------------------------------------------
// verify-thm1: ‖A‖ = ‖L(A)‖_X on random matrices.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct MatrixLiftRow {
    pub trial: usize,
    pub dim: usize,
    pub matrix_norm: f64,
    pub lift_norm: f64,
    pub rel_gap: f64,
    pub pass: bool,
}

impl ReportRow for MatrixLiftRow {
    fn headers() -> &'static [&'static str] {
        &["trial", "dim", "matrix_norm", "lift_norm", "rel_gap", "pass"]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.dim.to_string(),
            fmt_f64(self.matrix_norm),
            fmt_f64(self.lift_norm),
            fmt_f64(self.rel_gap),
            self.pass.to_string(),
        ]
    }
    fn pass(&self) -> bool {
        self.pass
    }
}

/// The lift equality on seeded random matrices: the spectral norm of `A`
/// against the independently computed truncated-operator norm of the lifted
/// sequence at the minimal exact depth.
pub fn run_matrix_lift(config: &ExperimentConfig) -> Result<ExperimentReport<MatrixLiftRow>> {
    config.validate()?;
    if config.dim == 0 || config.dim > 8 {
        return Err(Error::InvalidConfig(format!("dim {} not in 1..=8", config.dim)));
    }
    let mut rows = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let mut rng = trial_rng(config.seed, trial as u64);
        let a = random_matrix(&mut rng, config.dim);
        let matrix_norm = spectral_norm_dense(&a)?;
        let lift = lift_matrix(&a)?;
        let lift_norm = x_norm(&lift, config.dim as u32 - 1)?;
        let rel_gap = (lift_norm - matrix_norm).abs() / matrix_norm;
        rows.push(MatrixLiftRow {
            trial,
            dim: config.dim,
            matrix_norm,
            lift_norm,
            rel_gap,
            pass: rel_gap <= 1e-6,
        });
    }
    Ok(ExperimentReport::new("verify-thm1", config, rows))
}

// ---------------------------------------------------------------------------
// hadamard-gap: x = 1 while x' = √(N+1) grows without bound.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct HadamardRow {
    pub m: u32,
    pub size: u64,
    pub x_norm: f64,
    pub xprime_norm: f64,
    pub ratio: f64,
    /// Which engines produced the values: the scale-block engine always
    /// runs; the direct truncated-operator engine runs whenever the lifted
    /// sequence is small enough to materialise.
    pub engine: String,
    /// Largest disagreement between the two engines, when both ran.
    pub direct_gap: Option<f64>,
    pub pass: bool,
}

impl ReportRow for HadamardRow {
    fn headers() -> &'static [&'static str] {
        &["m", "size", "x_norm", "xprime_norm", "ratio", "engine", "direct_gap", "pass"]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            self.size.to_string(),
            fmt_f64(self.x_norm),
            fmt_f64(self.xprime_norm),
            fmt_f64(self.ratio),
            self.engine.clone(),
            fmt_opt(self.direct_gap),
            self.pass.to_string(),
        ]
    }
    fn pass(&self) -> bool {
        self.pass
    }
}

/// The unbounded unconditional/conditional gap of the orthogonal-sign
/// sequences, one row per Walsh exponent.
pub fn run_hadamard_gap(config: &ExperimentConfig) -> Result<ExperimentReport<HadamardRow>> {
    config.validate()?;
    if config.m_max > 6 {
        return Err(Error::InvalidConfig(format!("m_max {} above cap 6", config.m_max)));
    }
    let mut rows = Vec::new();
    for m in 0..=config.m_max {
        let size = 1u64 << m;
        let depth = size as u32 - 1;
        let scale = hadamard_scale_matrix::<f64>(m)?;
        let x_scale = x_norm_space_independent(&scale, depth)?;
        let xp_scale = x_norm_space_independent(&scale.map_abs(), depth)?;

        // The direct engine needs the materialised sequence; its support is
        // (2^{2^m} - 1)², which only fits for small m.
        let direct = match hadamard_sequence::<f64>(m) {
            Ok(seq) => {
                let x = x_norm(&seq, depth)?;
                let xp = xprime_norm(&seq, depth)?;
                Some((x, xp))
            }
            Err(Error::SizeOverCap { .. }) => None,
            Err(e) => return Err(e),
        };

        let (x_value, xp_value, engine, direct_gap) = match direct {
            Some((x, xp)) => {
                let gap = (x - x_scale).abs().max((xp - xp_scale).abs());
                (x, xp, "direct+scale-block".to_string(), Some(gap))
            }
            None => (x_scale, xp_scale, "scale-block".to_string(), None),
        };
        let expected_xp = (size as f64).sqrt();
        let pass = (x_value - 1.0).abs() <= 1e-8
            && (xp_value - expected_xp).abs() <= 1e-8
            && direct_gap.is_none_or(|g| g <= 1e-8);
        rows.push(HadamardRow {
            m,
            size,
            x_norm: x_value,
            xprime_norm: xp_value,
            ratio: xp_value / x_value,
            engine,
            direct_gap,
            pass,
        });
    }
    Ok(ExperimentReport::new("hadamard-gap", config, rows))
}

// ---------------------------------------------------------------------------
// bmo-identity: unit operator norm with divergent rectangular BMO.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct BmoIdentityRow {
    pub d: u32,
    pub x_norm: f64,
    pub xprime_norm: f64,
    pub rect_bmo: f64,
    pub rect_expected: f64,
    pub pass: bool,
}

impl ReportRow for BmoIdentityRow {
    fn headers() -> &'static [&'static str] {
        &["d", "x_norm", "xprime_norm", "rect_bmo", "rect_expected", "pass"]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            fmt_f64(self.x_norm),
            fmt_f64(self.xprime_norm),
            fmt_f64(self.rect_bmo),
            fmt_f64(self.rect_expected),
            self.pass.to_string(),
        ]
    }
    fn pass(&self) -> bool {
        self.pass
    }
}

/// The identity-lift sequence: unconditionally bounded with unit norm at
/// every depth while its rectangular BMO norm `√(d+1)` diverges.
pub fn run_bmo_identity(config: &ExperimentConfig) -> Result<ExperimentReport<BmoIdentityRow>> {
    config.validate()?;
    if config.d_max > 8 {
        return Err(Error::InvalidConfig(format!("d_max {} above cap 8", config.d_max)));
    }
    let mut rows = Vec::new();
    for d in 0..=config.d_max {
        let lambda = identity_example::<f64>(d)?;
        let x = x_norm(&lambda, d)?;
        let xp = xprime_norm(&lambda, d)?;
        let rect = rect_bmo(&lambda)?;
        let rect_expected = ((d + 1) as f64).sqrt();
        let pass = (x - 1.0).abs() <= 1e-8
            && (xp - 1.0).abs() <= 1e-8
            && (rect - rect_expected).abs() <= 1e-12;
        rows.push(BmoIdentityRow { d, x_norm: x, xprime_norm: xp, rect_bmo: rect, rect_expected, pass });
    }
    let mut report = ExperimentReport::new("bmo-identity", config, rows);
    let increasing = report.rows.windows(2).all(|w| w[1].rect_bmo > w[0].rect_bmo);
    report.pass &= increasing;
    Ok(report)
}

// ---------------------------------------------------------------------------
// column-example: product BMO bounded, pointwise-matrix norm divergent.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ColumnRow {
    pub d: u32,
    pub prod_bmo: f64,
    pub rect_bmo: f64,
    pub rect_expected: f64,
    pub mlambda: f64,
    pub mlambda_expected: f64,
    pub x_norm: f64,
    /// Midpoint-discretised quadratic form `‖M_λ a₀‖²` of the slowly
    /// divergent test vector; diagnostic only.
    pub m_quad: f64,
    pub pass: bool,
}

impl ReportRow for ColumnRow {
    fn headers() -> &'static [&'static str] {
        &[
            "d",
            "prod_bmo",
            "rect_bmo",
            "rect_expected",
            "mlambda",
            "mlambda_expected",
            "x_norm",
            "m_quad",
            "pass",
        ]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            fmt_f64(self.prod_bmo),
            fmt_f64(self.rect_bmo),
            fmt_f64(self.rect_expected),
            fmt_f64(self.mlambda),
            fmt_f64(self.mlambda_expected),
            fmt_f64(self.x_norm),
            fmt_f64(self.m_quad),
            self.pass.to_string(),
        ]
    }
    fn pass(&self) -> bool {
        self.pass
    }
}

/// Midpoint discretisation of the quadratic form that witnesses the
/// divergence of the column sequence's pointwise multiplier: the test
/// vector has the single component `a₀(x, y) = 1 / (√y (1 - ln y))` on the
/// unit square, and the integrand is independent of `x`.
fn column_quadratic_form(depth: u32) -> f64 {
    let cells = 1u64 << depth;
    let width = 2f64.powi(-(depth as i32));
    let mut acc = 0.0;
    for l in 0..cells {
        let y = (l as f64 + 0.5) * width;
        let a0 = 1.0 / (y.sqrt() * (1.0 - y.ln()));
        let count = (0..=depth).filter(|j| y < 2f64.powi(-(*j as i32))).count();
        acc += count as f64 * a0 * a0 * width;
    }
    acc
}

/// The column sequence: product BMO stays below `√2` while the pointwise
/// multiplier norm grows as `√(d+1)`; the conditional norm trend is
/// recorded alongside as boundedness evidence.
///
/// The trend gates compare the deepest row against depth 4 and are
/// calibrated for the full run (`d_max = 12`, where the multiplier ratio
/// reaches `√(13/5) ≈ 1.61`); they are skipped for `d_max < 4`.
pub fn run_column_example(config: &ExperimentConfig) -> Result<ExperimentReport<ColumnRow>> {
    config.validate()?;
    if config.d_max > 12 {
        return Err(Error::InvalidConfig(format!("d_max {} above cap 12", config.d_max)));
    }
    let mut rows = Vec::new();
    for d in 0..=config.d_max {
        let lambda = column_example::<f64>(d)?;
        let prod = prod_bmo_exact(&lambda)?;
        let rect = rect_bmo(&lambda)?;
        let rect_expected = (2.0 - 2f64.powi(-(d as i32))).sqrt();
        let mlambda = mlambda_norm(&lambda, d)?;
        let mlambda_expected = ((d + 1) as f64).sqrt();
        let x = x_norm(&lambda, d)?;
        let pass = prod <= 2f64.sqrt() + 1e-8
            && (rect - rect_expected).abs() <= 1e-12
            && (mlambda - mlambda_expected).abs() <= 1e-8;
        rows.push(ColumnRow {
            d,
            prod_bmo: prod,
            rect_bmo: rect,
            rect_expected,
            mlambda,
            mlambda_expected,
            x_norm: x,
            m_quad: column_quadratic_form(d),
            pass,
        });
    }
    let mut report = ExperimentReport::new("column-example", config, rows);
    if config.d_max >= 4 {
        let x_at = |d: u32| report.rows[d as usize].x_norm;
        let m_at = |d: u32| report.rows[d as usize].mlambda;
        let bounded = x_at(config.d_max) - x_at(4) <= 0.5;
        let divergent = m_at(config.d_max) / m_at(4) >= 1.5;
        report.pass &= bounded && divergent;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// necessary: conditions implied by conditional boundedness.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct NecessaryRow {
    pub trial: usize,
    pub support: usize,
    pub x_norm: f64,
    pub mixed_x: f64,
    pub mixed_y: f64,
    /// |x_norm(λ) - x_norm(ε_p λ)| for a random product sign flip.
    pub sign_flip_gap: f64,
    /// Every support entry satisfies |λ_R| ≤ √|R| · ‖λ‖_X.
    pub pointwise_ok: bool,
    /// |‖|λ|‖_X - max over sign patterns of ‖ελ‖_X|.
    pub oracle_gap: Option<f64>,
    pub pass: bool,
}

impl ReportRow for NecessaryRow {
    fn headers() -> &'static [&'static str] {
        &[
            "trial",
            "support",
            "x_norm",
            "mixed_x",
            "mixed_y",
            "sign_flip_gap",
            "pointwise_ok",
            "oracle_gap",
            "pass",
        ]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.support.to_string(),
            fmt_f64(self.x_norm),
            fmt_f64(self.mixed_x),
            fmt_f64(self.mixed_y),
            fmt_f64(self.sign_flip_gap),
            self.pointwise_ok.to_string(),
            fmt_opt(self.oracle_gap),
            self.pass.to_string(),
        ]
    }
    fn pass(&self) -> bool {
        self.pass
    }
}

/// Necessary conditions on random sparse sequences: both one-parameter BMO
/// conditions below the conditional norm, product-sign invariance, the
/// pointwise entry bound, and agreement of the absolute-value route with
/// the exhaustive sign oracle.
pub fn run_necessary_conditions(
    config: &ExperimentConfig,
) -> Result<ExperimentReport<NecessaryRow>> {
    config.validate()?;
    let tol = config.tol.max(1e-8);
    let mut rows = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let mut rng = trial_rng(config.seed, trial as u64);
        let support = rng.random_range(2..=6);
        let lambda = random_sparse_lambda(&mut rng, 3, support);
        let depth = 3;
        let x = x_norm(&lambda, depth)?;
        let mixed_x = mixed_bmo(&lambda, Orientation::XFixed)?;
        let mixed_y = mixed_bmo(&lambda, Orientation::YFixed)?;

        let flip_x = IntervalSigns::all_minus_on(
            lambda.x_intervals().into_iter().filter(|_| rng.random::<bool>()),
        );
        let flip_y = IntervalSigns::all_minus_on(
            lambda.y_intervals().into_iter().filter(|_| rng.random::<bool>()),
        );
        let flipped = lambda.apply_product_signs(&flip_x, &flip_y);
        let sign_flip_gap = (x - x_norm(&flipped, depth)?).abs();

        let pointwise_ok = lambda
            .iter()
            .all(|(r, v)| v.abs() <= r.area::<f64>().sqrt() * x + tol);

        let oracle_gap = if lambda.support_len() <= 6 {
            let oracle = xprime_sign_oracle(&lambda, depth)?;
            Some((xprime_norm(&lambda, depth)? - oracle).abs())
        } else {
            None
        };

        let pass = mixed_x <= x + tol
            && mixed_y <= x + tol
            && sign_flip_gap <= tol
            && pointwise_ok
            && oracle_gap.is_none_or(|g| g <= tol);
        rows.push(NecessaryRow {
            trial,
            support: lambda.support_len(),
            x_norm: x,
            mixed_x,
            mixed_y,
            sign_flip_gap,
            pointwise_ok,
            oracle_gap,
            pass,
        });
    }
    Ok(ExperimentReport::new("necessary", config, rows))
}

// ---------------------------------------------------------------------------
// random-norms: spectral norms of random sign matrices.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct RandomNormRow {
    pub trial: usize,
    pub n: usize,
    pub norm: f64,
    pub ratio: f64,
}

impl ReportRow for RandomNormRow {
    fn headers() -> &'static [&'static str] {
        &["trial", "n", "norm", "ratio"]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.n.to_string(),
            fmt_f64(self.norm),
            fmt_f64(self.ratio),
        ]
    }
    fn pass(&self) -> bool {
        true
    }
}

/// Spectral norms of seeded ±1 matrices: the norm grows like `√n`, with the
/// median of `‖A‖/√n` checked against a fixed band for n large enough for
/// the asymptotics to show.
pub fn run_random_norms(config: &ExperimentConfig) -> Result<ExperimentReport<RandomNormRow>> {
    config.validate()?;
    if config.n == 0 || config.n > 512 {
        return Err(Error::InvalidConfig(format!("n {} not in 1..=512", config.n)));
    }
    let mut seed_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let matrix_seed: u64 = seed_rng.random();
        let a = random_sign_matrix::<f64>(config.n, matrix_seed);
        let norm = spectral_norm_dense(&a)?;
        let ratio = norm / (config.n as f64).sqrt();
        rows.push(RandomNormRow { trial, n: config.n, norm, ratio });
    }
    let mut report = ExperimentReport::new("random-norms", config, rows);
    if config.n >= 32 {
        let mut ratios: Vec<f64> = report.rows.iter().map(|r| r.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        let mid = ratios.len() / 2;
        let median = if ratios.len() % 2 == 1 {
            ratios[mid]
        } else {
            0.5 * (ratios[mid - 1] + ratios[mid])
        };
        report.pass &= (1.5..=2.5).contains(&median);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// norms: ad-hoc queries for sequences and matrices loaded from files.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct NormQueryRow {
    pub depth: u32,
    pub support: usize,
    pub x_norm: f64,
    pub xprime_norm: f64,
    pub rect_bmo: f64,
    pub mixed_bmo_x: f64,
    pub mixed_bmo_y: f64,
    pub mlambda_norm: f64,
    /// Exact product BMO when the support is within the search cap.
    pub prod_bmo: Option<f64>,
    /// Certified greedy lower bound, reported instead of the exact value
    /// for supports above the cap.
    pub prod_bmo_lower: Option<f64>,
}

impl ReportRow for NormQueryRow {
    fn headers() -> &'static [&'static str] {
        &[
            "depth",
            "support",
            "x_norm",
            "xprime_norm",
            "rect_bmo",
            "mixed_bmo_x",
            "mixed_bmo_y",
            "mlambda_norm",
            "prod_bmo",
            "prod_bmo_lower",
        ]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.depth.to_string(),
            self.support.to_string(),
            fmt_f64(self.x_norm),
            fmt_f64(self.xprime_norm),
            fmt_f64(self.rect_bmo),
            fmt_f64(self.mixed_bmo_x),
            fmt_f64(self.mixed_bmo_y),
            fmt_f64(self.mlambda_norm),
            fmt_opt(self.prod_bmo),
            fmt_opt(self.prod_bmo_lower),
        ]
    }
    fn pass(&self) -> bool {
        true
    }
}

/// All norms of a loaded sequence at one depth.
pub fn run_norm_query(
    lambda: &CoefficientSequence<f64>,
    depth: Option<u32>,
    config: &ExperimentConfig,
) -> Result<ExperimentReport<NormQueryRow>> {
    if lambda.is_empty() {
        return Err(Error::EmptySupport);
    }
    let depth = depth.unwrap_or_else(|| lambda.max_scale());
    let (prod_bmo, prod_bmo_lower) = match prod_bmo_exact(lambda) {
        Ok(v) => (Some(v), None),
        Err(Error::SizeOverCap { .. }) => (None, Some(crate::bmo::prod_bmo_greedy(lambda)?)),
        Err(e) => return Err(e),
    };
    let row = NormQueryRow {
        depth,
        support: lambda.support_len(),
        x_norm: x_norm(lambda, depth)?,
        xprime_norm: xprime_norm(lambda, depth)?,
        rect_bmo: rect_bmo(lambda)?,
        mixed_bmo_x: mixed_bmo(lambda, Orientation::XFixed)?,
        mixed_bmo_y: mixed_bmo(lambda, Orientation::YFixed)?,
        mlambda_norm: mlambda_norm(lambda, depth)?,
        prod_bmo,
        prod_bmo_lower,
    };
    Ok(ExperimentReport::new("norms", config, vec![row]))
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixQueryRow {
    pub rows: usize,
    pub cols: usize,
    pub spectral_norm: f64,
    /// Norm of the lifted sequence, by the scale-block engine.
    pub lift_x_norm: f64,
    pub rel_gap: f64,
}

impl ReportRow for MatrixQueryRow {
    fn headers() -> &'static [&'static str] {
        &["rows", "cols", "spectral_norm", "lift_x_norm", "rel_gap"]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.rows.to_string(),
            self.cols.to_string(),
            fmt_f64(self.spectral_norm),
            fmt_f64(self.lift_x_norm),
            fmt_f64(self.rel_gap),
        ]
    }
    fn pass(&self) -> bool {
        true
    }
}

/// Spectral norm of a loaded matrix and of its lifted sequence.
pub fn run_matrix_query(
    matrix: &DenseMatrix<f64>,
    config: &ExperimentConfig,
) -> Result<ExperimentReport<MatrixQueryRow>> {
    let spectral = spectral_norm_dense(matrix)?;
    let depth = matrix.rows().max(matrix.cols()).saturating_sub(1) as u32;
    let lift = x_norm_space_independent(matrix, depth)?;
    let rel_gap = if spectral > 0.0 { (lift - spectral).abs() / spectral } else { 0.0 };
    let row = MatrixQueryRow {
        rows: matrix.rows(),
        cols: matrix.cols(),
        spectral_norm: spectral,
        lift_x_norm: lift,
        rel_gap,
    };
    Ok(ExperimentReport::new("matrix-norms", config, vec![row]))
}
