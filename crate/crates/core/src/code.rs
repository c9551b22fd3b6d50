//! Planar `[[L² + (L−1)², 1, L]]` surface code layout and its syndrome
//! extraction circuit.
//!
//! Qubits live on a `(2L−1) × (2L−1)` grid. Data qubits sit where
//! `row + col` is even and are numbered row-major from 0, so for `L = 3` the
//! bottom row holds qubits 10, 11 and 12. Measurement qubits sit where
//! `row + col` is odd: Z-type ancillas on even rows, X-type ancillas on odd
//! rows. Logical X is the bottom row of data qubits, logical Z the left column.
//!
//! One SE round has five time steps: four CNOT layers visiting the north,
//! west, east and south neighbours in that order, then a layer that measures
//! and re-prepares every ancilla while the data qubits idle. Z-type ancillas
//! start in `|0⟩`, act as CNOT targets and are measured in the Z basis;
//! X-type ancillas start in `|+⟩`, act as CNOT controls and are measured in
//! the X basis. Boundary stabilizers skip their missing neighbour but keep
//! the remaining CNOTs in the same time steps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StabilizerKind {
    X,
    Z,
}

impl StabilizerKind {
    pub fn dual(self) -> Self {
        match self {
            StabilizerKind::X => StabilizerKind::Z,
            StabilizerKind::Z => StabilizerKind::X,
        }
    }
}

/// CNOT visiting order within a round.
pub const SCHEDULE: [Direction; 4] = [Direction::N, Direction::W, Direction::E, Direction::S];

/// Number of time steps per SE round.
pub const STEPS_PER_ROUND: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    N,
    W,
    E,
    S,
}

impl Direction {
    fn offset(self) -> (isize, isize) {
        match self {
            Direction::N => (-1, 0),
            Direction::W => (0, -1),
            Direction::E => (0, 1),
            Direction::S => (1, 0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Stabilizer {
    pub kind: StabilizerKind,
    /// Grid position of the measurement qubit.
    pub position: (usize, usize),
    /// Data-qubit neighbours in schedule order (N, W, E, S).
    pub neighbors: [Option<usize>; 4],
}

impl Stabilizer {
    pub fn support(&self) -> Vec<usize> {
        self.neighbors.iter().flatten().copied().collect()
    }

    pub fn weight(&self) -> usize {
        self.neighbors.iter().flatten().count()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CodeLayout {
    pub distance: usize,
    pub data_qubits: Vec<(usize, usize)>,
    /// All measurement qubits, row-major. Syndrome bit `s` belongs to `stabilizers[s]`.
    pub stabilizers: Vec<Stabilizer>,
    #[serde(skip)]
    pub logical_x: PauliOperator,
    #[serde(skip)]
    pub logical_z: PauliOperator,
    #[serde(skip)]
    by_kind: [Vec<usize>; 2],
    #[serde(skip)]
    local_index: Vec<usize>,
}

impl CodeLayout {
    pub fn new(distance: usize) -> Result<Self> {
        if distance < 2 {
            return Err(Error::InvalidDistance(distance));
        }
        let size = 2 * distance - 1;
        let mut grid = vec![vec![None; size]; size];
        let mut data_qubits = Vec::new();
        for (r, row) in grid.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                if (r + c) % 2 == 0 {
                    *cell = Some(data_qubits.len());
                    data_qubits.push((r, c));
                }
            }
        }
        let lookup = |r: isize, c: isize| -> Option<usize> {
            if r < 0 || c < 0 || r >= size as isize || c >= size as isize {
                return None;
            }
            grid[r as usize][c as usize]
        };
        let mut stabilizers = Vec::new();
        for r in 0..size {
            for c in 0..size {
                if (r + c) % 2 == 1 {
                    let kind = if r % 2 == 0 { StabilizerKind::Z } else { StabilizerKind::X };
                    let neighbors = SCHEDULE.map(|d| {
                        let (dr, dc) = d.offset();
                        lookup(r as isize + dr, c as isize + dc)
                    });
                    stabilizers.push(Stabilizer { kind, position: (r, c), neighbors });
                }
            }
        }
        let n = data_qubits.len();
        let bottom: Vec<usize> = (0..n).filter(|&q| data_qubits[q].0 == size - 1).collect();
        let left: Vec<usize> = (0..n).filter(|&q| data_qubits[q].1 == 0).collect();
        let logical_x = PauliOperator::from_supports(n, &bottom, &[]);
        let logical_z = PauliOperator::from_supports(n, &[], &left);

        let mut by_kind = [Vec::new(), Vec::new()];
        let mut local_index = Vec::with_capacity(stabilizers.len());
        for (s, stab) in stabilizers.iter().enumerate() {
            let list = &mut by_kind[kind_slot(stab.kind)];
            local_index.push(list.len());
            list.push(s);
        }
        Ok(Self { distance, data_qubits, stabilizers, logical_x, logical_z, by_kind, local_index })
    }

    pub fn num_data(&self) -> usize {
        self.data_qubits.len()
    }

    pub fn num_stabilizers(&self) -> usize {
        self.stabilizers.len()
    }

    /// Global stabilizer indices of one kind, in row-major order.
    pub fn stabilizers_of(&self, kind: StabilizerKind) -> &[usize] {
        &self.by_kind[kind_slot(kind)]
    }

    /// Position of a stabilizer within `stabilizers_of(kind)`.
    pub fn local_index(&self, stabilizer: usize) -> usize {
        self.local_index[stabilizer]
    }

    pub fn x_stabilizers(&self) -> Vec<Vec<usize>> {
        self.supports(StabilizerKind::X)
    }

    pub fn z_stabilizers(&self) -> Vec<Vec<usize>> {
        self.supports(StabilizerKind::Z)
    }

    fn supports(&self, kind: StabilizerKind) -> Vec<Vec<usize>> {
        self.stabilizers_of(kind).iter().map(|&s| self.stabilizers[s].support()).collect()
    }

    /// The stabilizer generator as a Pauli operator on the data qubits.
    pub fn stabilizer_operator(&self, s: usize) -> PauliOperator {
        let stab = &self.stabilizers[s];
        let pauli = match stab.kind {
            StabilizerKind::X => Pauli::X,
            StabilizerKind::Z => Pauli::Z,
        };
        let mut op = PauliOperator::identity(self.num_data());
        for q in stab.support() {
            op.set(q, pauli);
        }
        op
    }

    /// One bit per stabilizer (global order): 1 when `error` anticommutes.
    pub fn ideal_syndrome(&self, error: &PauliOperator) -> Result<Vec<u8>> {
        if error.num_qubits() != self.num_data() {
            return Err(Error::Dimension { left: error.num_qubits(), right: self.num_data() });
        }
        Ok(self
            .stabilizers
            .iter()
            .map(|stab| {
                let parity = stab
                    .support()
                    .into_iter()
                    .filter(|&q| match stab.kind {
                        StabilizerKind::X => error.z_bit(q),
                        StabilizerKind::Z => error.x_bit(q),
                    })
                    .count();
                (parity % 2) as u8
            })
            .collect())
    }

    /// `true` when the error flips the encoded qubit.
    pub fn is_logical_error(&self, residual: &PauliOperator) -> Result<bool> {
        Ok(residual.anticommutes(&self.logical_x)? || residual.anticommutes(&self.logical_z)?)
    }
}

fn kind_slot(kind: StabilizerKind) -> usize {
    match kind {
        StabilizerKind::X => 0,
        StabilizerKind::Z => 1,
    }
}

/// A decoding lattice, named by the error type it decodes: `Lattice::X`
/// collects Z-stabilizer detection events and corrects X errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Lattice {
    X,
    Z,
}

impl Lattice {
    pub const BOTH: [Lattice; 2] = [Lattice::X, Lattice::Z];

    pub fn check_kind(self) -> StabilizerKind {
        match self {
            Lattice::X => StabilizerKind::Z,
            Lattice::Z => StabilizerKind::X,
        }
    }

    pub fn dual(self) -> Self {
        match self {
            Lattice::X => Lattice::Z,
            Lattice::Z => Lattice::X,
        }
    }

    pub fn slot(self) -> usize {
        match self {
            Lattice::X => 0,
            Lattice::Z => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Basis {
    Z,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    Cnot { control: usize, target: usize },
    Measure { qubit: usize, basis: Basis, stabilizer: usize },
    Prepare { qubit: usize, basis: Basis },
    Idle { qubit: usize },
}

/// One round of syndrome extraction. Qubits `0..num_data` are data qubits;
/// the ancilla of stabilizer `s` is qubit `num_data + s`.
#[derive(Debug, Clone, Serialize)]
pub struct SeCircuit {
    pub num_data: usize,
    pub num_qubits: usize,
    /// Operations of one round, grouped by time step.
    pub steps: Vec<Vec<Operation>>,
}

impl SeCircuit {
    pub fn new(layout: &CodeLayout) -> Self {
        let num_data = layout.num_data();
        let num_qubits = num_data + layout.num_stabilizers();
        let mut steps = vec![Vec::new(); STEPS_PER_ROUND];
        for (slot, step) in steps.iter_mut().take(SCHEDULE.len()).enumerate() {
            for (s, stab) in layout.stabilizers.iter().enumerate() {
                let Some(q) = stab.neighbors[slot] else { continue };
                let ancilla = num_data + s;
                step.push(match stab.kind {
                    StabilizerKind::X => Operation::Cnot { control: ancilla, target: q },
                    StabilizerKind::Z => Operation::Cnot { control: q, target: ancilla },
                });
            }
        }
        let last = &mut steps[STEPS_PER_ROUND - 1];
        for (s, stab) in layout.stabilizers.iter().enumerate() {
            let basis = match stab.kind {
                StabilizerKind::X => Basis::X,
                StabilizerKind::Z => Basis::Z,
            };
            last.push(Operation::Measure { qubit: num_data + s, basis, stabilizer: s });
        }
        for (s, stab) in layout.stabilizers.iter().enumerate() {
            let basis = match stab.kind {
                StabilizerKind::X => Basis::X,
                StabilizerKind::Z => Basis::Z,
            };
            last.push(Operation::Prepare { qubit: num_data + s, basis });
        }
        for q in 0..num_data {
            last.push(Operation::Idle { qubit: q });
        }
        Self { num_data, num_qubits, steps }
    }

    /// Operations of one round in execution order.
    pub fn operations(&self) -> impl Iterator<Item = &Operation> + '_ {
        self.steps.iter().flatten()
    }

    pub fn ops_per_round(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn cnots_per_round(&self) -> usize {
        self.operations().filter(|op| matches!(op, Operation::Cnot { .. })).count()
    }
}
