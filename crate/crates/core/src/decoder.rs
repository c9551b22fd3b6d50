//! The iterative reweighting decoder.
//!
//! Both lattices are matched once on base weights. Then, repeatedly, the
//! Z lattice is rematched with weights conditioned on the current X
//! matching, and the X lattice with weights conditioned on that new Z
//! matching. Reweighting always starts again from the base weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DecodingGraph, Weighting};
use crate::matcher::{match_table, matching_to_correction, mwpm, AllPairs, MatchingResult};
use crate::pauli::PauliOperator;
use crate::scalar::{neg_ln, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoppingMode {
    /// Halt when the estimate pair repeats in two consecutive iterations.
    #[default]
    Consecutive,
    /// Halt when either estimate equals any earlier estimate of its type.
    Algorithm1Literal,
    /// Halt when the correction weight stops decreasing.
    WeightStable,
}

impl std::str::FromStr for StoppingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consecutive" => Ok(StoppingMode::Consecutive),
            "algorithm1-literal" => Ok(StoppingMode::Algorithm1Literal),
            "weight-stable" => Ok(StoppingMode::WeightStable),
            other => Err(Error::Config(format!("unknown stopping mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Maximum number of full iterations after the initial matching.
    pub max_iters: usize,
    pub stopping: StoppingMode,
    /// Also reweight from matched edges that end on the boundary.
    pub reweight_boundary: bool,
    /// Never let a reweighted edge become heavier than its base weight.
    pub clamp_to_base: bool,
    /// Return an error when the correction weight increases.
    pub strict_monotonicity: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iters: 10,
            stopping: StoppingMode::Consecutive,
            reweight_boundary: true,
            clamp_to_base: false,
            strict_monotonicity: true,
        }
    }
}

/// Weight overrides on top of a base graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightOverlay<F> {
    pub overrides: BTreeMap<usize, F>,
}

impl<F: Scalar> WeightOverlay<F> {
    pub fn is_empty(&self) -> bool {
        self.overrides.is_empty()
    }

    /// Full weight vector: base weights with overrides applied.
    pub fn apply(&self, base: &DecodingGraph<F>) -> Vec<F> {
        let mut w = base.base_weights();
        for (&e, &x) in &self.overrides {
            w[e] = x;
        }
        w
    }
}

/// Overlay for `primal` given a matching on `dual`: every primal edge
/// correlated with a matched dual edge gets `-ln P(primal | dual)`, or 0
/// under unit weighting. Several candidates for one edge keep the smallest.
pub fn reweight<F: Scalar>(
    primal: &DecodingGraph<F>,
    dual: &DecodingGraph<F>,
    dual_matching: &MatchingResult<F>,
    config: &DecoderConfig,
) -> WeightOverlay<F> {
    let mut overlay = WeightOverlay { overrides: BTreeMap::new() };
    for e in dual_matching.edges() {
        if !config.reweight_boundary && dual.edges[e].is_boundary() {
            continue;
        }
        for c in &dual.correlations[e] {
            let f = c.dual_edge;
            let mut w = match primal.weighting {
                Weighting::Unit => F::zero(),
                Weighting::LogProbability { .. } => neg_ln::<F>(c.conditional),
            };
            if config.clamp_to_base {
                w = w.min(primal.edges[f].weight);
            }
            overlay.overrides.entry(f).and_modify(|x: &mut F| *x = x.min(w)).or_insert(w);
        }
    }
    overlay
}

/// Pauli weight of the joint estimate `E_X E_Z`.
pub fn correction_weight(ex: &PauliOperator, ez: &PauliOperator) -> Result<usize> {
    Ok(ex.multiply(ez)?.weight())
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    /// Half-iteration index times two: 0, 1, 2, ... for j = 0, 0.5, 1, ...
    pub half_steps: usize,
    #[serde(serialize_with = "crate::noise::serialize_pauli")]
    pub correction_x: PauliOperator,
    #[serde(serialize_with = "crate::noise::serialize_pauli")]
    pub correction_z: PauliOperator,
    /// Pauli weight of the joint estimate.
    pub weight: usize,
    /// Matching weights on the lattices they were found on.
    pub matching_weight_x: f64,
    pub matching_weight_z: f64,
}

impl TraceStep {
    pub fn index(&self) -> f64 {
        self.half_steps as f64 / 2.0
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
}

impl IterationTrace {
    /// First step at which the correction weight went up, if any.
    pub fn first_increase(&self) -> Option<(usize, usize)> {
        self.steps.windows(2).position(|w| w[1].weight > w[0].weight).map(|i| (i, i + 1))
    }

    pub fn is_monotone(&self) -> bool {
        self.first_increase().is_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Decoded {
    #[serde(serialize_with = "crate::noise::serialize_pauli")]
    pub correction_x: PauliOperator,
    #[serde(serialize_with = "crate::noise::serialize_pauli")]
    pub correction_z: PauliOperator,
    /// Full iterations run after the initial matching.
    pub iterations: usize,
    /// Whether the stopping rule fired before the iteration cap.
    pub converged: bool,
    pub trace: IterationTrace,
}

impl Decoded {
    pub fn correction(&self) -> PauliOperator {
        self.correction_x.multiply(&self.correction_z).expect("same size")
    }
}

/// Decide whether to halt after the last full iteration. `history` holds the
/// full-iteration estimates `(E_X, E_Z, W)` from iteration 0 on.
pub fn should_stop(history: &[(PauliOperator, PauliOperator, usize)], mode: StoppingMode) -> bool {
    let Some((last, earlier)) = history.split_last() else { return false };
    let Some(prev) = earlier.last() else { return false };
    match mode {
        StoppingMode::Consecutive => last.0 == prev.0 && last.1 == prev.1,
        StoppingMode::Algorithm1Literal => earlier.iter().any(|h| h.0 == last.0) || earlier.iter().any(|h| h.1 == last.1),
        StoppingMode::WeightStable => last.2 >= prev.2,
    }
}

/// Shared decoder over a fixed pair of base graphs.
#[derive(Debug, Clone, Copy)]
pub struct Decoder<'a, F> {
    pub gx: &'a DecodingGraph<F>,
    pub gz: &'a DecodingGraph<F>,
    pub num_data: usize,
    pub config: DecoderConfig,
    base_tables: Option<(&'a AllPairs<F>, &'a AllPairs<F>)>,
}

impl<'a, F: Scalar> Decoder<'a, F> {
    pub fn new(gx: &'a DecodingGraph<F>, gz: &'a DecodingGraph<F>, num_data: usize, config: DecoderConfig) -> Self {
        Self { gx, gz, num_data, config, base_tables: None }
    }

    /// Use precomputed base-weight shortest paths for the unweighted matchings.
    pub fn with_base_tables(mut self, ax: &'a AllPairs<F>, az: &'a AllPairs<F>) -> Self {
        self.base_tables = Some((ax, az));
        self
    }

    /// Plain matching on base weights.
    pub fn decode_mwpm(&self, events_x: &[usize], events_z: &[usize]) -> Result<Decoded> {
        let (mx, mz) = (self.match_base(self.gx, events_x)?, self.match_base(self.gz, events_z)?);
        let (ex, ez) = (self.correction(self.gx, &mx), self.correction(self.gz, &mz));
        let step = self.step(0, &ex, &ez, &mx, &mz)?;
        Ok(Decoded { correction_x: ex, correction_z: ez, iterations: 0, converged: true, trace: IterationTrace { steps: vec![step] } })
    }

    pub fn decode(&self, events_x: &[usize], events_z: &[usize]) -> Result<Decoded> {
        if self.config.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        let mut mx = self.match_base(self.gx, events_x)?;
        let mut mz = self.match_base(self.gz, events_z)?;
        let mut ex = self.correction(self.gx, &mx);
        let mut ez = self.correction(self.gz, &mz);
        let mut trace = IterationTrace { steps: vec![self.step(0, &ex, &ez, &mx, &mz)?] };
        if events_x.is_empty() && events_z.is_empty() {
            return Ok(Decoded { correction_x: ex, correction_z: ez, iterations: 0, converged: true, trace });
        }
        let mut history = vec![(ex.clone(), ez.clone(), trace.steps[0].weight)];
        let mut converged = false;
        let mut k = 0;
        while k < self.config.max_iters {
            k += 1;
            let wz = reweight(self.gz, self.gx, &mx, &self.config).apply(self.gz);
            mz = mwpm(self.gz, &wz, events_z)?;
            ez = self.correction(self.gz, &mz);
            let half = self.step(2 * k - 1, &ex, &ez, &mx, &mz)?;
            self.push(&mut trace, half)?;

            let wx = reweight(self.gx, self.gz, &mz, &self.config).apply(self.gx);
            mx = mwpm(self.gx, &wx, events_x)?;
            ex = self.correction(self.gx, &mx);
            let full = self.step(2 * k, &ex, &ez, &mx, &mz)?;
            let w = full.weight;
            self.push(&mut trace, full)?;

            history.push((ex.clone(), ez.clone(), w));
            if should_stop(&history, self.config.stopping) {
                converged = true;
                break;
            }
        }
        Ok(Decoded { correction_x: ex, correction_z: ez, iterations: k, converged, trace })
    }

    fn match_base(&self, g: &DecodingGraph<F>, events: &[usize]) -> Result<MatchingResult<F>> {
        match self.base_tables {
            Some((ax, az)) => {
                let table = if std::ptr::eq(g, self.gx) { ax } else { az };
                match_table(g, &table.table(events))
            }
            None => mwpm(g, &g.base_weights(), events),
        }
    }

    fn correction(&self, g: &DecodingGraph<F>, m: &MatchingResult<F>) -> PauliOperator {
        matching_to_correction(g, m, self.num_data)
    }

    fn step(
        &self,
        half_steps: usize,
        ex: &PauliOperator,
        ez: &PauliOperator,
        mx: &MatchingResult<F>,
        mz: &MatchingResult<F>,
    ) -> Result<TraceStep> {
        Ok(TraceStep {
            half_steps,
            correction_x: ex.clone(),
            correction_z: ez.clone(),
            weight: correction_weight(ex, ez)?,
            matching_weight_x: mx.total_weight.as_f64(),
            matching_weight_z: mz.total_weight.as_f64(),
        })
    }

    fn push(&self, trace: &mut IterationTrace, step: TraceStep) -> Result<()> {
        let prev = trace.steps.last().expect("initial step");
        if self.config.strict_monotonicity && step.weight > prev.weight {
            return Err(Error::Monotonicity {
                step: format!("{} -> {}", prev.index(), step.index()),
                from: prev.weight,
                to: step.weight,
            });
        }
        trace.steps.push(step);
        Ok(())
    }
}
