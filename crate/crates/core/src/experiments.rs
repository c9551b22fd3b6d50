//! Monte Carlo harness: memory experiments, lifetime simulation, threshold
//! scans and the scaling fit.
//!
//! Every trial draws from its own ChaCha8 stream selected by `(seed, trial)`,
//! and results are gathered in trial order, so outputs do not depend on the
//! number of worker threads.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{CodeLayout, SeCircuit};
use crate::decoder::{Decoded, Decoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::graph::{build_pair, DecodingGraph, Weighting};
use crate::matcher::AllPairs;
use crate::noise::{code_capacity_faults, enumerate_single_faults, symmetric_difference, FaultEnumeration, Sample};
use crate::pauli::PauliOperator;
use crate::scalar::Scalar;

/// Version of the CSV and JSON output layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Mwpm,
    #[default]
    Irmwpm,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Mwpm => "mwpm",
            DecoderKind::Irmwpm => "irmwpm",
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mwpm" => Ok(DecoderKind::Mwpm),
            "irmwpm" => Ok(DecoderKind::Irmwpm),
            other => Err(Error::Config(format!("unknown decoder `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub distance: usize,
    /// Noisy rounds per decoding window.
    pub rounds: usize,
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub decoder_config: DecoderConfig,
    /// Rounds between virtual decodes in lifetime runs.
    pub check_period: usize,
    pub idle_noise: bool,
    /// Decoder used for the virtual check; `None` means the trial's decoder.
    pub virtual_decoder: Option<DecoderKind>,
    pub round_cap: u64,
}

impl SimConfig {
    /// Defaults for distance `l`: `l` rounds per window and per check.
    pub fn new(distance: usize, p: f64) -> Self {
        Self {
            distance,
            rounds: distance,
            p,
            trials: 1000,
            seed: 0,
            decoder: DecoderKind::Irmwpm,
            decoder_config: DecoderConfig { strict_monotonicity: false, ..DecoderConfig::default() },
            check_period: distance,
            idle_noise: true,
            virtual_decoder: None,
            round_cap: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.distance < 2 {
            return Err(Error::InvalidDistance(self.distance));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidRate(self.p));
        }
        if self.decoder_config.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.check_period == 0 || self.check_period % self.rounds != 0 {
            return Err(Error::Config(format!(
                "check period {} must be a positive multiple of rounds {}",
                self.check_period, self.rounds
            )));
        }
        Ok(())
    }
}

/// Everything that depends only on `(L, T, p)`: enumeration, graphs and
/// base-weight path tables. Built once and shared read-only across trials.
#[derive(Debug)]
pub struct Setup<F = f64> {
    pub layout: CodeLayout,
    pub enumeration: FaultEnumeration,
    pub gx: DecodingGraph<F>,
    pub gz: DecodingGraph<F>,
    pub ax: AllPairs<F>,
    pub az: AllPairs<F>,
    pub p: f64,
}

impl<F: Scalar> Setup<F> {
    /// Graphs for `rounds` noisy rounds. With `final_round_perfect` false the
    /// last layer of measurement errors becomes boundary edges.
    pub fn new(distance: usize, rounds: usize, p: f64, idle_noise: bool, final_round_perfect: bool) -> Result<Self> {
        let layout = CodeLayout::new(distance)?;
        let circuit = SeCircuit::new(&layout);
        let enumeration = enumerate_single_faults(&layout, &circuit, rounds, idle_noise, final_round_perfect)?;
        Self::from_enumeration(layout, enumeration, Weighting::LogProbability { p }, p)
    }

    /// Perfect-measurement setup on the 2D lattice.
    pub fn code_capacity(distance: usize, p: f64) -> Result<Self> {
        let layout = CodeLayout::new(distance)?;
        let enumeration = code_capacity_faults(&layout)?;
        Self::from_enumeration(layout, enumeration, Weighting::LogProbability { p }, p)
    }

    fn from_enumeration(layout: CodeLayout, enumeration: FaultEnumeration, weighting: Weighting, p: f64) -> Result<Self> {
        let (gx, gz) = build_pair(&layout, &enumeration, weighting)?;
        let ax = AllPairs::new(&gx, &gx.base_weights())?;
        let az = AllPairs::new(&gz, &gz.base_weights())?;
        Ok(Self { layout, enumeration, gx, gz, ax, az, p })
    }

    pub fn decoder(&self, config: DecoderConfig) -> Decoder<'_, F> {
        Decoder::new(&self.gx, &self.gz, self.layout.num_data(), config).with_base_tables(&self.ax, &self.az)
    }

    pub fn decode(&self, kind: DecoderKind, config: DecoderConfig, events: &[Vec<usize>; 2]) -> Result<Decoded> {
        let d = self.decoder(config);
        match kind {
            DecoderKind::Mwpm => d.decode_mwpm(&events[0], &events[1]),
            DecoderKind::Irmwpm => d.decode(&events[0], &events[1]),
        }
    }
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Outcome of one decoding window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub failed: bool,
    /// Full decoder iterations after the initial matching.
    pub iterations: usize,
    pub converged: bool,
    pub monotone: bool,
}

impl TrialRecord {
    fn from_decoded(failed: bool, d: &Decoded) -> Self {
        Self { failed, iterations: d.iterations, converged: d.converged, monotone: d.trace.is_monotone() }
    }
}

/// One memory experiment: `T` noisy rounds, one perfect round, decode, and
/// compare the correction with the true residual error.
pub fn run_memory_trial<F: Scalar>(
    setup: &Setup<F>,
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrialRecord> {
    let sample = setup.enumeration.sample(config.p, rng);
    decode_sample(setup, config, &sample)
}

/// Decode a known sample and report whether the decoder failed on it.
pub fn decode_sample<F: Scalar>(setup: &Setup<F>, config: &SimConfig, sample: &Sample) -> Result<TrialRecord> {
    let decoded = setup.decode(config.decoder, config.decoder_config, &sample.events)?;
    let net = sample.residual.multiply(&decoded.correction())?;
    Ok(TrialRecord::from_decoded(setup.layout.is_logical_error(&net)?, &decoded))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub failures: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    /// Point estimate with its 95% Wilson score interval.
    pub fn new(failures: u64, trials: u64) -> Self {
        assert!(trials > 0 && failures <= trials);
        let (k, n) = (failures as f64, trials as f64);
        let z2 = Z95 * Z95;
        let centre = (k + z2 / 2.0) / (n + z2);
        let half = Z95 / (n + z2) * (k * (n - k) / n + z2 / 4.0).sqrt();
        Self { failures, trials, rate: k / n, ci_low: (centre - half).max(0.0), ci_high: (centre + half).min(1.0) }
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStats {
    /// `histogram[k]` counts trials that ran `k` additional iterations.
    pub histogram: Vec<u64>,
    pub mean: f64,
    pub max: usize,
    /// Trials stopped by the iteration cap.
    pub not_converged: u64,
}

/// Distribution of additional iterations beyond the initial matching.
pub fn iteration_stats(records: &[TrialRecord]) -> IterationStats {
    let max = records.iter().map(|r| r.iterations).max().unwrap_or(0);
    let mut histogram = vec![0u64; max + 1];
    for r in records {
        histogram[r.iterations] += 1;
    }
    let total: usize = records.iter().map(|r| r.iterations).sum();
    let mean = if records.is_empty() { 0.0 } else { total as f64 / records.len() as f64 };
    let not_converged = records.iter().filter(|r| !r.converged).count() as u64;
    IterationStats { histogram, mean, max, not_converged }
}

/// Aggregated memory-experiment result for one `(L, p, decoder)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub distance: usize,
    pub rounds: usize,
    pub p: f64,
    pub decoder: DecoderKind,
    pub rate: RateEstimate,
    pub iterations: IterationStats,
    /// Trials whose correction weight increased at some step.
    pub monotonicity_violations: u64,
}

/// Run `config.trials` memory trials in parallel on a prepared setup.
pub fn run_memory_on<F: Scalar>(setup: &Setup<F>, config: &SimConfig) -> Result<PointResult> {
    config.validate()?;
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_memory_trial(setup, config, &mut trial_rng(config.seed, t)))
        .collect::<Result<_>>()?;
    Ok(summarize(config, &records))
}

pub fn run_memory(config: &SimConfig) -> Result<PointResult> {
    config.validate()?;
    let setup = Setup::<f64>::new(config.distance, config.rounds, config.p, config.idle_noise, true)?;
    run_memory_on(&setup, config)
}

fn summarize(config: &SimConfig, records: &[TrialRecord]) -> PointResult {
    let failures = records.iter().filter(|r| r.failed).count() as u64;
    PointResult {
        distance: config.distance,
        rounds: config.rounds,
        p: config.p,
        decoder: config.decoder,
        rate: RateEstimate::new(failures, records.len() as u64),
        iterations: iteration_stats(records),
        monotonicity_violations: records.iter().filter(|r| !r.monotone).count() as u64,
    }
}

/// Running state of a lifetime simulation between decoding windows.
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeState {
    /// Data error, including every correction applied so far.
    pub data: PauliOperator,
    /// Per lattice and check, the syndrome the next first round is compared
    /// against: the last measured value, shifted by applied corrections.
    pub reference: [Vec<u8>; 2],
}

impl LifetimeState {
    pub fn new<F: Scalar>(setup: &Setup<F>) -> Self {
        Self {
            data: PauliOperator::identity(setup.layout.num_data()),
            reference: [vec![0; setup.gx.num_checks()], vec![0; setup.gz.num_checks()]],
        }
    }

    /// Fold one window's sampled faults into the state and return the window's
    /// detection events. `sample` must come from a window enumeration without
    /// a perfect round, whose events assume an error-free start.
    pub fn advance<F: Scalar>(&mut self, setup: &Setup<F>, sample: &Sample) -> Result<[Vec<usize>; 2]> {
        let syndrome = setup.layout.ideal_syndrome(&self.data)?;
        let mut out = [Vec::new(), Vec::new()];
        for (slot, g) in [&setup.gx, &setup.gz].into_iter().enumerate() {
            let n = g.num_checks();
            let events = &sample.events[slot];
            let mismatch: Vec<usize> =
                (0..n).filter(|&i| syndrome[g.checks[i]] != self.reference[slot][i]).collect();
            out[slot] = symmetric_difference(events, &mismatch);
            let mut last: Vec<u8> = g.checks.iter().map(|&s| syndrome[s]).collect();
            for &v in events {
                last[v % n] ^= 1;
            }
            self.reference[slot] = last;
        }
        self.data.mul_assign(&sample.residual)?;
        Ok(out)
    }

    /// Apply a correction to the data and shift the reference syndrome by it.
    pub fn apply<F: Scalar>(&mut self, setup: &Setup<F>, correction: &PauliOperator) -> Result<()> {
        let s = setup.layout.ideal_syndrome(correction)?;
        for (slot, g) in [&setup.gx, &setup.gz].into_iter().enumerate() {
            for (i, &c) in g.checks.iter().enumerate() {
                self.reference[slot][i] ^= s[c];
            }
        }
        self.data.mul_assign(correction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LifetimeRecord {
    /// Noisy rounds executed up to and including the failing window.
    pub rounds: u64,
    pub capped: bool,
    pub windows: u64,
    pub iterations: u64,
    pub monotonicity_violations: u64,
}

/// Noisy SE in windows of `T` rounds, each decoded and corrected; every
/// check period an ideal decoder with one perfect round looks for a logical
/// error without touching the running state.
pub fn run_lifetime_trial<F: Scalar>(
    window: &Setup<F>,
    ideal: &Setup<F>,
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Result<LifetimeRecord> {
    let mut state = LifetimeState::new(window);
    let virtual_kind = config.virtual_decoder.unwrap_or(config.decoder);
    let mut rec = LifetimeRecord { rounds: 0, capped: false, windows: 0, iterations: 0, monotonicity_violations: 0 };
    loop {
        let sample = window.enumeration.sample(config.p, rng);
        let events = state.advance(window, &sample)?;
        let decoded = window.decode(config.decoder, config.decoder_config, &events)?;
        state.apply(window, &decoded.correction())?;
        rec.rounds += config.rounds as u64;
        rec.windows += 1;
        rec.iterations += decoded.iterations as u64;
        rec.monotonicity_violations += u64::from(!decoded.trace.is_monotone());
        if rec.rounds % config.check_period as u64 == 0 && virtual_check(ideal, virtual_kind, config, &state.data)? {
            return Ok(rec);
        }
        if rec.rounds >= config.round_cap {
            rec.capped = true;
            return Ok(rec);
        }
    }
}

/// Whether an ideal 2D decode of `data` leaves a logical error.
fn virtual_check<F: Scalar>(ideal: &Setup<F>, kind: DecoderKind, config: &SimConfig, data: &PauliOperator) -> Result<bool> {
    let syndrome = ideal.layout.ideal_syndrome(data)?;
    let events = [&ideal.gx, &ideal.gz].map(|g| (0..g.num_checks()).filter(|&i| syndrome[g.checks[i]] == 1).collect());
    let decoded = ideal.decode(kind, config.decoder_config, &events)?;
    ideal.layout.is_logical_error(&data.multiply(&decoded.correction())?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifetimeResult {
    pub distance: usize,
    pub rounds: usize,
    pub check_period: usize,
    pub p: f64,
    pub decoder: DecoderKind,
    pub virtual_decoder: DecoderKind,
    pub trials: u64,
    /// Mean rounds survived; capped trials count as the cap.
    pub mean_rounds: f64,
    pub std_error: f64,
    pub capped: u64,
    pub mean_iterations_per_window: f64,
    pub monotonicity_violations: u64,
}

pub fn run_lifetime(config: &SimConfig) -> Result<LifetimeResult> {
    config.validate()?;
    let window = Setup::<f64>::new(config.distance, config.rounds, config.p, config.idle_noise, false)?;
    let ideal = Setup::<f64>::code_capacity(config.distance, config.p)?;
    let records: Vec<LifetimeRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_lifetime_trial(&window, &ideal, config, &mut trial_rng(config.seed, t)))
        .collect::<Result<_>>()?;
    let n = records.len() as f64;
    let mean = records.iter().map(|r| r.rounds as f64).sum::<f64>() / n;
    let var = records.iter().map(|r| (r.rounds as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let windows: u64 = records.iter().map(|r| r.windows).sum();
    Ok(LifetimeResult {
        distance: config.distance,
        rounds: config.rounds,
        check_period: config.check_period,
        p: config.p,
        decoder: config.decoder,
        virtual_decoder: config.virtual_decoder.unwrap_or(config.decoder),
        trials: records.len() as u64,
        mean_rounds: mean,
        std_error: (var / n).sqrt(),
        capped: records.iter().filter(|r| r.capped).count() as u64,
        mean_iterations_per_window: records.iter().map(|r| r.iterations).sum::<u64>() as f64 / windows as f64,
        monotonicity_violations: records.iter().map(|r| r.monotonicity_violations).sum(),
    })
}

/// One measured point of a threshold scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub distance: usize,
    pub p: f64,
    pub failures: u64,
    pub trials: u64,
}

impl From<&PointResult> for ScanPoint {
    fn from(r: &PointResult) -> Self {
        Self { distance: r.distance, p: r.p, failures: r.rate.failures, trials: r.rate.trials }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCrossing {
    pub smaller: usize,
    pub larger: usize,
    pub crossing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub pairs: Vec<PairCrossing>,
    /// Mean of the pairwise crossings, if every pair crosses.
    pub crossing: Option<f64>,
    pub bootstrap_std: Option<f64>,
    pub bootstrap_ci: Option<(f64, f64)>,
    pub resamples: usize,
    /// Resamples in which some pair did not cross.
    pub resamples_without_crossing: usize,
}

/// Smoothed log-rate used for curve fitting, finite even with no failures.
fn log_rate(failures: u64, trials: u64) -> f64 {
    ((failures as f64 + 0.5) / (trials as f64 + 1.0)).log10()
}

/// Least-squares quadratic `y = c0 + c1 x + c2 x²` through `(x, y)`.
fn quadratic_fit(xs: &[f64], ys: &[f64]) -> Result<[f64; 3]> {
    let a = DMatrix::from_fn(xs.len(), 3, |i, j| xs[i].powi(j as i32));
    let c = lstsq(a, DVector::from_column_slice(ys))?;
    Ok([c[0], c[1], c[2]])
}

/// Least squares by SVD, refusing rank-deficient designs.
fn lstsq(a: DMatrix<f64>, y: DVector<f64>) -> Result<DVector<f64>> {
    let params = a.ncols();
    let svd = a.svd(true, true);
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let rank = s.iter().filter(|&&v| v > smax * 1e-10).count();
    if rank < params {
        return Err(Error::RankDeficient { rank, params, singular_values: s.iter().cloned().collect() });
    }
    svd.solve(&y, smax * 1e-10).map_err(|e| Error::Config(e.to_string()))
}

/// Where the larger code's curve first rises above the smaller one's, within
/// `[lo, hi]` in log10 p.
fn curve_crossing(small: &[f64; 3], large: &[f64; 3], lo: f64, hi: f64) -> Option<f64> {
    let diff = |x: f64| (large[0] - small[0]) + (large[1] - small[1]) * x + (large[2] - small[2]) * x * x;
    const STEPS: usize = 1000;
    let at = |i: usize| lo + (hi - lo) * i as f64 / STEPS as f64;
    for i in 0..STEPS {
        let (mut a, mut b) = (at(i), at(i + 1));
        if diff(a) < 0.0 && diff(b) >= 0.0 {
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if diff(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(10f64.powf(0.5 * (a + b)));
        }
    }
    None
}

fn pairwise_crossings(points: &[ScanPoint], distances: &[usize], counts: &[u64]) -> Result<Vec<Option<f64>>> {
    let xs: Vec<f64> = points.iter().map(|q| q.p.log10()).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mut curves = Vec::with_capacity(distances.len());
    for &l in distances {
        let idx: Vec<usize> = (0..points.len()).filter(|&i| points[i].distance == l).collect();
        let x: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let y: Vec<f64> = idx.iter().map(|&i| log_rate(counts[i], points[i].trials)).collect();
        curves.push(quadratic_fit(&x, &y)?);
    }
    let mut out = Vec::new();
    for i in 0..distances.len() {
        for j in i + 1..distances.len() {
            out.push(curve_crossing(&curves[i], &curves[j], lo, hi));
        }
    }
    Ok(out)
}

/// Fit a quadratic in log-log space to each distance's curve and locate the
/// pairwise crossings; uncertainty from a parametric bootstrap that redraws
/// every point's failure count from its binomial.
pub fn threshold_scan(points: &[ScanPoint], resamples: usize, seed: u64) -> Result<ThresholdEstimate> {
    let mut distances: Vec<usize> = points.iter().map(|q| q.distance).collect();
    distances.sort_unstable();
    distances.dedup();
    if distances.len() < 2 {
        return Err(Error::Config("threshold scan needs at least two distances".into()));
    }
    for &l in &distances {
        let n = points.iter().filter(|q| q.distance == l).count();
        if n < 4 {
            return Err(Error::Config(format!("distance {l} has {n} p-points; need at least 4")));
        }
    }
    let counts: Vec<u64> = points.iter().map(|q| q.failures).collect();
    let crossings = pairwise_crossings(points, &distances, &counts)?;
    let mut pairs = Vec::new();
    let mut k = 0;
    for i in 0..distances.len() {
        for j in i + 1..distances.len() {
            pairs.push(PairCrossing { smaller: distances[i], larger: distances[j], crossing: crossings[k] });
            k += 1;
        }
    }
    let mean = |c: &[Option<f64>]| -> Option<f64> {
        let v: Option<Vec<f64>> = c.iter().copied().collect();
        v.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    let crossing = mean(&crossings);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let redrawn: Vec<u64> = points
            .iter()
            .map(|q| Binomial::new(q.trials, q.failures as f64 / q.trials as f64).expect("valid binomial").sample(&mut rng))
            .collect();
        if let Some(m) = mean(&pairwise_crossings(points, &distances, &redrawn)?) {
            boot.push(m);
        }
    }
    let (bootstrap_std, bootstrap_ci) = if boot.len() >= 2 {
        let m = boot.iter().sum::<f64>() / boot.len() as f64;
        let sd = (boot.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt();
        boot.sort_by(|a, b| a.total_cmp(b));
        let q = |f: f64| boot[((boot.len() - 1) as f64 * f).round() as usize];
        (Some(sd), Some((q(0.025), q(0.975))))
    } else {
        (None, None)
    };
    Ok(ThresholdEstimate {
        pairs,
        crossing,
        bootstrap_std,
        bootstrap_ci,
        resamples,
        resamples_without_crossing: resamples - boot.len(),
    })
}

/// Parameters of `log10 P_L = aL² + bL + c + (eL² + fL + g) log10 p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FitParams {
    pub fn log10_rate(&self, p: f64, l: usize) -> f64 {
        let l = l as f64;
        self.a * l * l + self.b * l + self.c + (self.e * l * l + self.f * l + self.g) * p.log10()
    }

    pub fn predict(&self, p: f64, l: usize) -> f64 {
        10f64.powf(self.log10_rate(p, l))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: FitParams,
    /// Residuals in log10 space, in input order.
    pub residuals: Vec<f64>,
    pub rms: f64,
}

/// Least-squares fit of `(p, L, rate)` points in log10 space. Points with a
/// zero rate carry no information on the log scale and are rejected.
pub fn fit_scaling(data: &[(f64, usize, f64)]) -> Result<FitResult> {
    if data.len() < 6 {
        return Err(Error::Config(format!("need at least 6 points, got {}", data.len())));
    }
    if let Some(bad) = data.iter().find(|d| !(d.0 > 0.0 && d.2 > 0.0)) {
        return Err(Error::Config(format!("p and rate must be positive, got {bad:?}")));
    }
    let row = |&(p, l, _): &(f64, usize, f64)| {
        let (l, x) = (l as f64, p.log10());
        [l * l, l, 1.0, l * l * x, l * x, x]
    };
    let a = DMatrix::from_fn(data.len(), 6, |i, j| row(&data[i])[j]);
    let y = DVector::from_iterator(data.len(), data.iter().map(|d| d.2.log10()));
    let c = lstsq(a, y)?;
    let params = FitParams { a: c[0], b: c[1], c: c[2], e: c[3], f: c[4], g: c[5] };
    let residuals: Vec<f64> = data.iter().map(|&(p, l, r)| r.log10() - params.log10_rate(p, l)).collect();
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(FitResult { params, residuals, rms })
}

/// CSV table, one row per point.
pub fn to_csv(results: &[PointResult]) -> String {
    let mut out = String::from("distance,rounds,p,decoder,trials,failures,rate,ci_low,ci_high,mean_iters,monotonicity_violations\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.distance,
            r.rounds,
            r.p,
            r.decoder.name(),
            r.rate.trials,
            r.rate.failures,
            r.rate.rate,
            r.rate.ci_low,
            r.rate.ci_high,
            r.iterations.mean,
            r.monotonicity_violations
        ));
    }
    out
}
