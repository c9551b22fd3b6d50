//! Circuit-level depolarizing noise on the SE circuit: fault sampling,
//! Pauli-frame simulation of noisy rounds, and exhaustive single-fault
//! enumeration.
//!
//! Fault locations, per round:
//! - after every CNOT, one of the 15 nontrivial two-qubit Paulis, each with
//!   probability `p/15`;
//! - every measurement outcome flips with probability `p`;
//! - with idle noise enabled, every data qubit suffers X, Y or Z with
//!   probability `p/3` each during the measure/prepare step.
//!
//! Detection events are the bits that differ from the previous round; the
//! reference before round 0 is all zero (the code starts in the codespace).

use rand::Rng;
use serde::Serialize;

use crate::code::{Basis, CodeLayout, Lattice, Operation, SeCircuit};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator};
use crate::scalar::Rational;

/// Physical fault rate and the idle-noise switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseParams {
    pub p: f64,
    /// Depolarize idle data qubits once per round.
    pub idle_noise: bool,
}

impl NoiseParams {
    pub fn new(p: f64, idle_noise: bool) -> Result<Self> {
        if !(0.0..1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidRate(p));
        }
        Ok(Self { p, idle_noise })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FaultPayload {
    /// Single-qubit Pauli after an idle step.
    Single(Pauli),
    /// Two-qubit Pauli `(control, target)` after a CNOT; never `(I, I)`.
    Two(Pauli, Pauli),
    MeasurementFlip,
}

impl FaultPayload {
    /// All 15 nontrivial two-qubit Paulis, control-major.
    pub fn two_qubit_paulis() -> impl Iterator<Item = FaultPayload> {
        const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        (1..16).map(|k| FaultPayload::Two(P[k / 4], P[k % 4]))
    }

    /// First-order rate as a coefficient of `p`.
    pub fn coefficient(self) -> Rational {
        match self {
            FaultPayload::Single(_) => Rational::new(1, 3),
            FaultPayload::Two(..) => Rational::new(1, 15),
            FaultPayload::MeasurementFlip => Rational::from_integer(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FaultEvent {
    pub round: usize,
    /// Index into the round's operations in execution order.
    pub op: usize,
    pub payload: FaultPayload,
}

/// Kind of operation a fault location follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SiteKind {
    Cnot,
    Measure,
    Idle,
}

impl SiteKind {
    pub fn payloads(self) -> Vec<FaultPayload> {
        match self {
            SiteKind::Cnot => FaultPayload::two_qubit_paulis().collect(),
            SiteKind::Measure => vec![FaultPayload::MeasurementFlip],
            SiteKind::Idle => Pauli::NONTRIVIAL.iter().map(|&p| FaultPayload::Single(p)).collect(),
        }
    }
}

/// Noisy operations of one round, in execution order.
pub fn fault_sites(circuit: &SeCircuit, idle_noise: bool) -> Vec<(usize, SiteKind)> {
    circuit
        .operations()
        .enumerate()
        .filter_map(|(i, op)| match op {
            Operation::Cnot { .. } => Some((i, SiteKind::Cnot)),
            Operation::Measure { .. } => Some((i, SiteKind::Measure)),
            Operation::Idle { .. } if idle_noise => Some((i, SiteKind::Idle)),
            _ => None,
        })
        .collect()
}

/// Draw independent faults for `rounds` noisy rounds. Locations are visited in
/// a fixed order so the draw is a pure function of the generator state.
pub fn sample_faults<R: Rng + ?Sized>(
    circuit: &SeCircuit,
    params: &NoiseParams,
    rounds: usize,
    rng: &mut R,
) -> Vec<FaultEvent> {
    let sites = fault_sites(circuit, params.idle_noise);
    let mut faults = Vec::new();
    if params.p == 0.0 {
        return faults;
    }
    for round in 0..rounds {
        for &(op, kind) in &sites {
            if rng.gen::<f64>() < params.p {
                faults.push(FaultEvent { round, op, payload: random_payload(kind, rng) });
            }
        }
    }
    faults
}

pub(crate) fn random_payload<R: Rng + ?Sized>(kind: SiteKind, rng: &mut R) -> FaultPayload {
    const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    match kind {
        SiteKind::Cnot => {
            let k = rng.gen_range(1..16);
            FaultPayload::Two(P[k / 4], P[k % 4])
        }
        SiteKind::Measure => FaultPayload::MeasurementFlip,
        SiteKind::Idle => FaultPayload::Single(P[rng.gen_range(1..4)]),
    }
}

/// Measured syndromes and derived detection events of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyndromeHistory {
    /// `measurements[t][s]`, one row per round (including a perfect final round when requested).
    pub measurements: Vec<Vec<u8>>,
    /// Detection events per lattice, as sorted node indices `t * n_checks + local_stabilizer`.
    pub events: [Vec<usize>; 2],
    /// Data-qubit error left after the last round.
    pub residual: PauliOperator,
}

impl SyndromeHistory {
    pub fn events(&self, lattice: Lattice) -> &[usize] {
        &self.events[lattice.slot()]
    }

    pub fn num_layers(&self) -> usize {
        self.measurements.len()
    }
}

/// Pauli frame over every qubit of the circuit.
struct Frame {
    x: Vec<bool>,
    z: Vec<bool>,
}

impl Frame {
    fn new(n: usize) -> Self {
        Self { x: vec![false; n], z: vec![false; n] }
    }

    fn apply(&mut self, q: usize, p: Pauli) {
        self.x[q] ^= p.has_x();
        self.z[q] ^= p.has_z();
    }
}

fn validate(circuit: &SeCircuit, ops: &[Operation], fault: &FaultEvent, rounds: usize) -> Result<()> {
    let bad = |why: &str| Err(Error::InvalidFault(format!("{fault:?}: {why}")));
    if fault.round >= rounds {
        return bad("round out of range");
    }
    let Some(op) = ops.get(fault.op) else { return bad("operation out of range") };
    match (op, fault.payload) {
        (Operation::Cnot { .. }, FaultPayload::Two(a, b)) if (a, b) != (Pauli::I, Pauli::I) => Ok(()),
        (Operation::Measure { .. }, FaultPayload::MeasurementFlip) => Ok(()),
        (Operation::Idle { qubit }, FaultPayload::Single(p)) if p != Pauli::I && *qubit < circuit.num_data => {
            Ok(())
        }
        _ => bad("payload does not match operation"),
    }
}

/// Run `rounds` noisy SE rounds with the given faults (plus one fault-free
/// round when `final_round_perfect`).
pub fn simulate(
    layout: &CodeLayout,
    circuit: &SeCircuit,
    faults: &[FaultEvent],
    rounds: usize,
    final_round_perfect: bool,
) -> Result<SyndromeHistory> {
    let ops: Vec<Operation> = circuit.operations().copied().collect();
    for f in faults {
        validate(circuit, &ops, f, rounds)?;
    }
    let mut sorted = faults.to_vec();
    sorted.sort();
    let mut frame = Frame::new(circuit.num_qubits);
    let total_rounds = rounds + usize::from(final_round_perfect);
    let mut measurements = Vec::with_capacity(total_rounds);
    let mut cursor = 0;
    for round in 0..total_rounds {
        let mut bits = vec![0u8; layout.num_stabilizers()];
        for (i, op) in ops.iter().enumerate() {
            let mut flip = false;
            let start = cursor;
            while cursor < sorted.len() && (sorted[cursor].round, sorted[cursor].op) == (round, i) {
                if sorted[cursor].payload == FaultPayload::MeasurementFlip {
                    flip ^= true;
                }
                cursor += 1;
            }
            run_op(&mut frame, op, &mut bits, flip);
            for f in &sorted[start..cursor] {
                apply_payload(&mut frame, op, f.payload);
            }
        }
        measurements.push(bits);
    }
    let residual = data_frame(&frame, circuit.num_data);
    let events = detection_events(layout, &measurements);
    Ok(SyndromeHistory { measurements, events, residual })
}

fn run_op(frame: &mut Frame, op: &Operation, bits: &mut [u8], flip: bool) {
    match *op {
        Operation::Cnot { control, target } => {
            frame.x[target] ^= frame.x[control];
            frame.z[control] ^= frame.z[target];
        }
        Operation::Measure { qubit, basis, stabilizer } => {
            let outcome = match basis {
                Basis::Z => frame.x[qubit],
                Basis::X => frame.z[qubit],
            };
            bits[stabilizer] = u8::from(outcome ^ flip);
        }
        Operation::Prepare { qubit, .. } => {
            frame.x[qubit] = false;
            frame.z[qubit] = false;
        }
        Operation::Idle { .. } => {}
    }
}

fn apply_payload(frame: &mut Frame, op: &Operation, payload: FaultPayload) {
    match (*op, payload) {
        (Operation::Cnot { control, target }, FaultPayload::Two(a, b)) => {
            frame.apply(control, a);
            frame.apply(target, b);
        }
        (Operation::Idle { qubit }, FaultPayload::Single(p)) => frame.apply(qubit, p),
        _ => {}
    }
}

fn data_frame(frame: &Frame, num_data: usize) -> PauliOperator {
    let mut out = PauliOperator::identity(num_data);
    for q in 0..num_data {
        out.set(q, Pauli::from_bits(frame.x[q], frame.z[q]));
    }
    out
}

/// Detection events of both lattices from a measurement record.
pub fn detection_events(layout: &CodeLayout, measurements: &[Vec<u8>]) -> [Vec<usize>; 2] {
    let mut events = [Vec::new(), Vec::new()];
    for lattice in Lattice::BOTH {
        let checks = layout.stabilizers_of(lattice.check_kind());
        let out = &mut events[lattice.slot()];
        for (t, row) in measurements.iter().enumerate() {
            for (local, &s) in checks.iter().enumerate() {
                let prev = if t == 0 { 0 } else { measurements[t - 1][s] };
                if row[s] != prev {
                    out.push(t * checks.len() + local);
                }
            }
        }
    }
    events
}

/// Effect of one single fault in an otherwise fault-free run.
#[derive(Debug, Clone, Serialize)]
pub struct EnumeratedFault {
    pub fault: FaultEvent,
    /// Detection events on `Lattice::X` (Z checks) and `Lattice::Z` (X checks).
    pub events: [Vec<usize>; 2],
    #[serde(serialize_with = "serialize_pauli")]
    pub residual: PauliOperator,
    /// First-order probability as a coefficient of `p`.
    #[serde(serialize_with = "serialize_rational")]
    pub coefficient: Rational,
}

impl EnumeratedFault {
    pub fn events(&self, lattice: Lattice) -> &[usize] {
        &self.events[lattice.slot()]
    }
}

pub(crate) fn serialize_pauli<S: serde::Serializer>(p: &PauliOperator, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

pub(crate) fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Every single fault of a `rounds`-round experiment, grouped by location.
#[derive(Debug, Clone, Serialize)]
pub struct FaultEnumeration {
    pub rounds: usize,
    pub final_round_perfect: bool,
    pub idle_noise: bool,
    /// Number of node layers (rounds, plus the perfect round if any).
    pub layers: usize,
    /// Detection nodes per lattice.
    pub num_nodes: [usize; 2],
    pub faults: Vec<EnumeratedFault>,
    /// `(round, op, kind, first fault index)` per location; the location's
    /// payloads occupy consecutive entries of `faults` in `SiteKind::payloads` order.
    #[serde(skip)]
    pub sites: Vec<(usize, usize, SiteKind, usize)>,
}

/// Inject every possible single fault once. Uses linearity of the frame
/// simulation: each payload is the XOR of single-qubit X/Z components, and
/// each component is propagated once from its location.
pub fn enumerate_single_faults(
    layout: &CodeLayout,
    circuit: &SeCircuit,
    rounds: usize,
    idle_noise: bool,
    final_round_perfect: bool,
) -> Result<FaultEnumeration> {
    if rounds == 0 {
        return Err(Error::Config("need at least one noisy round".into()));
    }
    let ops: Vec<Operation> = circuit.operations().copied().collect();
    let layers = rounds + usize::from(final_round_perfect);
    let mut faults = Vec::new();
    let mut sites = Vec::new();
    for round in 0..rounds {
        for (op_index, kind) in fault_sites(circuit, idle_noise) {
            let op = ops[op_index];
            // Components in payload bit order: control X, control Z, target X, target Z.
            let components: Vec<Effect> = match (kind, op) {
                (SiteKind::Cnot, Operation::Cnot { control, target }) => [
                    (control, Pauli::X),
                    (control, Pauli::Z),
                    (target, Pauli::X),
                    (target, Pauli::Z),
                ]
                .iter()
                .map(|&(q, p)| propagate(layout, circuit, &ops, round, op_index, layers, Seed::Pauli(q, p)))
                .collect(),
                (SiteKind::Idle, Operation::Idle { qubit }) => [Pauli::X, Pauli::Z]
                    .iter()
                    .map(|&p| propagate(layout, circuit, &ops, round, op_index, layers, Seed::Pauli(qubit, p)))
                    .collect(),
                (SiteKind::Measure, Operation::Measure { stabilizer, .. }) => {
                    vec![propagate(layout, circuit, &ops, round, op_index, layers, Seed::Flip(stabilizer))]
                }
                _ => unreachable!("site kind mismatch"),
            };
            sites.push((round, op_index, kind, faults.len()));
            for payload in kind.payloads() {
                let mut effect = Effect::empty(circuit.num_data);
                let mut add = |c: &Effect| effect.xor(c);
                match payload {
                    FaultPayload::Two(a, b) => {
                        if a.has_x() {
                            add(&components[0]);
                        }
                        if a.has_z() {
                            add(&components[1]);
                        }
                        if b.has_x() {
                            add(&components[2]);
                        }
                        if b.has_z() {
                            add(&components[3]);
                        }
                    }
                    FaultPayload::Single(p) => {
                        if p.has_x() {
                            add(&components[0]);
                        }
                        if p.has_z() {
                            add(&components[1]);
                        }
                    }
                    FaultPayload::MeasurementFlip => add(&components[0]),
                }
                let fault = FaultEvent { round, op: op_index, payload };
                for events in &effect.events {
                    if events.len() > 2 {
                        return Err(Error::TooManyEvents { fault: format!("{fault:?}"), count: events.len() });
                    }
                }
                faults.push(EnumeratedFault {
                    fault,
                    events: effect.events,
                    residual: effect.residual,
                    coefficient: payload.coefficient(),
                });
            }
        }
    }
    let num_nodes = Lattice::BOTH.map(|l| layout.stabilizers_of(l.check_kind()).len() * layers);
    Ok(FaultEnumeration { rounds, final_round_perfect, idle_noise, layers, num_nodes, faults, sites })
}

/// Detection events and residual error of one sampled run.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub events: [Vec<usize>; 2],
    pub residual: PauliOperator,
    pub num_faults: usize,
}

impl Sample {
    pub fn events(&self, lattice: Lattice) -> &[usize] {
        &self.events[lattice.slot()]
    }
}

impl FaultEnumeration {
    /// Position of `fault` in `faults`.
    pub fn index_of(&self, fault: &FaultEvent) -> Option<usize> {
        let site = self.sites.binary_search_by_key(&(fault.round, fault.op), |s| (s.0, s.1)).ok()?;
        let (_, _, kind, first) = self.sites[site];
        let offset = kind.payloads().iter().position(|&p| p == fault.payload)?;
        Some(first + offset)
    }

    /// Combined effect of several faults, by linearity of the frame simulation.
    pub fn combine(&self, faults: &[FaultEvent]) -> Result<Sample> {
        let mut acc = Accumulator::new(self);
        for f in faults {
            let i = self.index_of(f).ok_or_else(|| Error::InvalidFault(format!("{f:?}")))?;
            acc.add(&self.faults[i]);
        }
        Ok(acc.finish(faults.len()))
    }

    /// Draw faults at rate `p` and return their combined effect. Consumes the
    /// generator exactly as [`sample_faults`] does for the same circuit, so
    /// both paths see the same faults for the same seed.
    pub fn sample<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> Sample {
        let mut acc = Accumulator::new(self);
        let mut count = 0;
        if p > 0.0 {
            for &(_, _, kind, first) in &self.sites {
                if rng.gen::<f64>() < p {
                    let offset = match random_payload(kind, rng) {
                        FaultPayload::Two(a, b) => 4 * a as usize + b as usize - 1,
                        FaultPayload::Single(a) => a as usize - 1,
                        FaultPayload::MeasurementFlip => 0,
                    };
                    acc.add(&self.faults[first + offset]);
                    count += 1;
                }
            }
        }
        acc.finish(count)
    }
}

struct Accumulator {
    parity: [Vec<bool>; 2],
    residual: PauliOperator,
}

impl Accumulator {
    fn new(en: &FaultEnumeration) -> Self {
        let n = en.faults.first().map_or(0, |f| f.residual.num_qubits());
        Self { parity: en.num_nodes.map(|k| vec![false; k]), residual: PauliOperator::identity(n) }
    }

    fn add(&mut self, f: &EnumeratedFault) {
        for slot in 0..2 {
            for &v in &f.events[slot] {
                self.parity[slot][v] ^= true;
            }
        }
        self.residual.mul_assign(&f.residual).expect("same size");
    }

    fn finish(self, num_faults: usize) -> Sample {
        let events = self.parity.map(|p| (0..p.len()).filter(|&v| p[v]).collect());
        Sample { events, residual: self.residual, num_faults }
    }
}

/// Single data-qubit faults of the code-capacity model: every X, Y, Z on
/// every data qubit, read out by one perfect syndrome layer.
pub fn code_capacity_faults(layout: &CodeLayout) -> Result<FaultEnumeration> {
    let n = layout.num_data();
    let mut faults = Vec::with_capacity(3 * n);
    for q in 0..n {
        for p in Pauli::NONTRIVIAL {
            let residual = PauliOperator::single(n, q, p);
            let syndrome = layout.ideal_syndrome(&residual)?;
            let events = Lattice::BOTH.map(|lattice| {
                let checks = layout.stabilizers_of(lattice.check_kind());
                (0..checks.len()).filter(|&i| syndrome[checks[i]] == 1).collect()
            });
            let payload = FaultPayload::Single(p);
            faults.push(EnumeratedFault {
                fault: FaultEvent { round: 0, op: q, payload },
                events,
                residual,
                coefficient: payload.coefficient(),
            });
        }
    }
    let num_nodes = Lattice::BOTH.map(|l| layout.stabilizers_of(l.check_kind()).len());
    Ok(FaultEnumeration {
        rounds: 0,
        final_round_perfect: true,
        idle_noise: false,
        layers: 1,
        num_nodes,
        faults,
        sites: (0..n).map(|q| (0, q, SiteKind::Idle, 3 * q)).collect(),
    })
}

enum Seed {
    Pauli(usize, Pauli),
    Flip(usize),
}

#[derive(Clone)]
struct Effect {
    events: [Vec<usize>; 2],
    residual: PauliOperator,
}

impl Effect {
    fn empty(num_data: usize) -> Self {
        Self { events: [Vec::new(), Vec::new()], residual: PauliOperator::identity(num_data) }
    }

    fn xor(&mut self, other: &Effect) {
        for slot in 0..2 {
            self.events[slot] = symmetric_difference(&self.events[slot], &other.events[slot]);
        }
        self.residual.mul_assign(&other.residual).expect("same size");
    }
}

/// Symmetric difference of two sorted index lists.
pub fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Propagate a single-qubit Pauli (inserted after `ops[op_index]` of `round`)
/// or a measurement flip to the end of the run.
fn propagate(
    layout: &CodeLayout,
    circuit: &SeCircuit,
    ops: &[Operation],
    round: usize,
    op_index: usize,
    layers: usize,
    seed: Seed,
) -> Effect {
    let mut frame = Frame::new(circuit.num_qubits);
    // Outcome differences relative to the fault-free run, which measures all zeros.
    let mut flips: Vec<Vec<u8>> = vec![vec![0; layout.num_stabilizers()]; layers];
    match seed {
        Seed::Pauli(q, p) => {
            frame.apply(q, p);
            for (t, row) in flips.iter_mut().enumerate().skip(round) {
                let skip = if t == round { op_index + 1 } else { 0 };
                for op in &ops[skip..] {
                    run_op(&mut frame, op, row, false);
                }
            }
        }
        Seed::Flip(s) => flips[round][s] = 1,
    }
    let residual = data_frame(&frame, circuit.num_data);
    let events = detection_events(layout, &flips);
    Effect { events, residual }
}
