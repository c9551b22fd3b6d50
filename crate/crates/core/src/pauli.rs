//! Bit-mask Pauli algebra. Phases are never tracked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Single-qubit Pauli up to phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator `X^a Z^b` stored as two packed bit vectors.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let words = n.div_ceil(WORD);
        Self { n, x: vec![0; words], z: vec![0; words] }
    }

    /// Build from the supports of the X and Z parts.
    pub fn from_supports(n: usize, xs: &[usize], zs: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in xs {
            p.flip_x(q);
        }
        for &q in zs {
            p.flip_z(q);
        }
        p
    }

    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut p = Self::identity(n);
        p.set(qubit, pauli);
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, q: usize) -> bool {
        debug_assert!(q < self.n);
        self.x[q / WORD] >> (q % WORD) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        debug_assert!(q < self.n);
        self.z[q / WORD] >> (q % WORD) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set(&mut self, q: usize, pauli: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / WORD, 1u64 << (q % WORD));
        self.x[w] = if pauli.has_x() { self.x[w] | b } else { self.x[w] & !b };
        self.z[w] = if pauli.has_z() { self.z[w] | b } else { self.z[w] & !b };
    }

    pub fn flip_x(&mut self, q: usize) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        self.x[q / WORD] ^= 1 << (q % WORD);
    }

    pub fn flip_z(&mut self, q: usize) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        self.z[q / WORD] ^= 1 << (q % WORD);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Size of the support.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    /// Product up to phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.mul_assign(other)?;
        Ok(out)
    }

    pub fn mul_assign(&mut self, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
        Ok(())
    }

    /// Symplectic inner product: `true` when the operators anticommute.
    pub fn anticommutes(&self, other: &Self) -> Result<bool> {
        self.check_dim(other)?;
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity += (self.x[i] & other.z[i]).count_ones();
            parity += (self.z[i] & other.x[i]).count_ones();
        }
        Ok(parity % 2 == 1)
    }

    /// Commutation parity as a bit: 0 commute, 1 anticommute.
    pub fn commutation_parity(&self, other: &Self) -> Result<u8> {
        self.anticommutes(other).map(u8::from)
    }

    /// The X component `E_X`.
    pub fn x_part(&self) -> Self {
        Self { n: self.n, x: self.x.clone(), z: vec![0; self.z.len()] }
    }

    /// The Z component `E_Z`.
    pub fn z_part(&self) -> Self {
        Self { n: self.n, x: vec![0; self.x.len()], z: self.z.clone() }
    }

    pub fn x_support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q)).collect()
    }

    pub fn z_support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.z_bit(q)).collect()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension { left: self.n, right: other.n });
        }
        Ok(())
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.get(q).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().collect();
        let mut p = Self::identity(chars.len());
        for (q, c) in chars.into_iter().enumerate() {
            let pauli = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::PauliParse(other)),
            };
            p.set(q, pauli);
        }
        Ok(p)
    }
}
