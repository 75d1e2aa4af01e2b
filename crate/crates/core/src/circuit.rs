//! Flagged syndrome-extraction circuits and Pauli-frame propagation.
//!
//! Qubits 0..=6 are data, 7 is the syndrome ancilla and 8 the flag. Both
//! auxiliary qubits are re-prepared for every plaquette, so one pair serves
//! the whole schedule.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::steane::{CodeDefinition, PauliString, StabilizerKind, DATA_QUBITS};

pub const ANCILLA: usize = 7;
pub const FLAG: usize = 8;
pub const NUM_QUBITS: usize = 9;
const DATA_BITS: u16 = (1 << DATA_QUBITS) - 1;

/// One of the 12 per-round input channels, in the fixed order
/// S_X1..3, S_Z1..3, F_X1..3, F_Z1..3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel(pub u8);

impl Channel {
    pub const COUNT: usize = 12;

    pub fn syndrome(kind: StabilizerKind, k: usize) -> Channel {
        match kind {
            StabilizerKind::X => Channel(k as u8),
            StabilizerKind::Z => Channel(3 + k as u8),
        }
    }

    pub fn flag(kind: StabilizerKind, k: usize) -> Channel {
        match kind {
            StabilizerKind::X => Channel(6 + k as u8),
            StabilizerKind::Z => Channel(9 + k as u8),
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_flag(self) -> bool {
        self.0 >= 6
    }

    pub fn kind(self) -> StabilizerKind {
        if self.0 % 6 < 3 {
            StabilizerKind::X
        } else {
            StabilizerKind::Z
        }
    }

    /// Plaquette index 0..3.
    pub fn plaquette(self) -> usize {
        (self.0 % 3) as usize
    }

    pub fn all() -> impl Iterator<Item = Channel> {
        (0..Self::COUNT as u8).map(Channel)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = if self.is_flag() { 'F' } else { 'S' };
        let kind = match self.kind() {
            StabilizerKind::X => 'X',
            StabilizerKind::Z => 'Z',
        };
        write!(f, "{letter}_{kind}{}", self.plaquette() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    /// Reset to |0⟩.
    PrepareZ,
    /// Reset to |+⟩.
    PrepareX,
    Cnot,
    Cz,
    MeasureZ,
    MeasureX,
}

impl GateKind {
    pub fn is_two_qubit(self) -> bool {
        matches!(self, GateKind::Cnot | GateKind::Cz)
    }
}

/// What a fault at a location may look like.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocationKind {
    /// Flipped preparation or readout: a single Pauli, probability 2p/3.
    Spam,
    /// Depolarizing after a one-qubit gate: 3 Paulis at p/3 each.
    OneQubit,
    /// Depolarizing after a two-qubit gate: 15 Paulis at p/15 each.
    TwoQubit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// Operands; the second is ignored for one-qubit gates. For CNOT the
    /// first is the control.
    pub qubits: [usize; 2],
    /// Stable index of this gate inside its circuit.
    pub location: usize,
    /// Channel receiving the outcome of a measurement.
    pub record: Option<Channel>,
}

impl Gate {
    pub fn location_kind(&self) -> LocationKind {
        match self.kind {
            GateKind::Cnot | GateKind::Cz => LocationKind::TwoQubit,
            _ => LocationKind::Spam,
        }
    }

    /// The Pauli inserted by a SPAM fault at this gate.
    pub fn spam_flip(&self) -> SinglePauli {
        match self.kind {
            GateKind::PrepareZ | GateKind::MeasureZ => SinglePauli::X,
            GateKind::PrepareX | GateKind::MeasureX => SinglePauli::Z,
            _ => SinglePauli::I,
        }
    }
}

/// Ordered gate list with unique, stable location ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateList {
    pub gates: Vec<Gate>,
}

impl GateList {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn push(&mut self, kind: GateKind, qubits: [usize; 2], record: Option<Channel>) {
        let location = self.gates.len();
        self.gates.push(Gate { kind, qubits, location, record });
    }

    /// `n` back-to-back copies with location ids renumbered consecutively.
    pub fn repeated(&self, n: usize) -> GateList {
        let mut out = GateList { gates: Vec::with_capacity(self.len() * n) };
        for _ in 0..n {
            for g in &self.gates {
                out.push(g.kind, g.qubits, g.record);
            }
        }
        out
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// Preparation of the seven data qubits for a memory in `basis`.
    pub fn data_preparation(basis: crate::steane::Basis) -> GateList {
        let kind = match basis {
            crate::steane::Basis::Z => GateKind::PrepareZ,
            crate::steane::Basis::X => GateKind::PrepareX,
        };
        let mut out = GateList { gates: Vec::new() };
        for q in 0..DATA_QUBITS {
            out.push(kind, [q, q], None);
        }
        out
    }
}

/// One QEC cycle: flagged readouts of S_X1, S_X2, S_X3, S_Z1, S_Z2, S_Z3.
///
/// Each plaquette with coupling order (i, j, k, l) runs
/// `prep anc |+⟩, prep flag |0⟩, C(i), CNOT(anc→flag), C(j), C(k),
/// CNOT(anc→flag), C(l), measure anc in X, measure flag in Z`, where `C` is a
/// CNOT from the ancilla onto the data qubit for X-type plaquettes and a CZ
/// for Z-type ones.
pub fn build_qec_cycle(code: &CodeDefinition) -> GateList {
    let mut out = GateList { gates: Vec::new() };
    for kind in [StabilizerKind::X, StabilizerKind::Z] {
        let entangler = match kind {
            StabilizerKind::X => GateKind::Cnot,
            StabilizerKind::Z => GateKind::Cz,
        };
        for (k, order) in code.gate_order.iter().enumerate() {
            out.push(GateKind::PrepareX, [ANCILLA, ANCILLA], None);
            out.push(GateKind::PrepareZ, [FLAG, FLAG], None);
            out.push(entangler, [ANCILLA, order[0]], None);
            out.push(GateKind::Cnot, [ANCILLA, FLAG], None);
            out.push(entangler, [ANCILLA, order[1]], None);
            out.push(entangler, [ANCILLA, order[2]], None);
            out.push(GateKind::Cnot, [ANCILLA, FLAG], None);
            out.push(entangler, [ANCILLA, order[3]], None);
            out.push(GateKind::MeasureX, [ANCILLA, ANCILLA], Some(Channel::syndrome(kind, k)));
            out.push(GateKind::MeasureZ, [FLAG, FLAG], Some(Channel::flag(kind, k)));
        }
    }
    out
}

/// Gates in one plaquette readout of [`build_qec_cycle`].
pub const PLAQUETTE_GATES: usize = 10;

/// Offset (within a plaquette block) of the gate after which an ancilla X
/// fault produces hook class E1, E2, E3 respectively.
pub const HOOK_OFFSETS: [usize; 3] = [3, 4, 5];

/// Location id of the `e`-th hook gate (0-based class) for plaquette `k` of
/// the given kind, within one cycle.
pub fn hook_location(kind: StabilizerKind, k: usize, e: usize) -> usize {
    let block = match kind {
        StabilizerKind::X => k,
        StabilizerKind::Z => 3 + k,
    };
    block * PLAQUETTE_GATES + HOOK_OFFSETS[e]
}

/// Single-qubit Pauli, encoded as (x, z) bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SinglePauli {
    I,
    X,
    Y,
    Z,
}

impl SinglePauli {
    pub const NONTRIVIAL: [SinglePauli; 3] = [SinglePauli::X, SinglePauli::Y, SinglePauli::Z];
    pub const ALL: [SinglePauli; 4] = [SinglePauli::I, SinglePauli::X, SinglePauli::Y, SinglePauli::Z];

    pub fn bits(self) -> (bool, bool) {
        match self {
            SinglePauli::I => (false, false),
            SinglePauli::X => (true, false),
            SinglePauli::Y => (true, true),
            SinglePauli::Z => (false, true),
        }
    }
}

/// Pauli on the operands of one gate (the second entry is unused for
/// one-qubit locations).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalPauli(pub SinglePauli, pub SinglePauli);

impl LocalPauli {
    pub fn is_identity(&self) -> bool {
        self.0 == SinglePauli::I && self.1 == SinglePauli::I
    }

    /// The 15 nontrivial two-qubit Paulis in lexicographic I<X<Y<Z order.
    pub fn two_qubit_set() -> impl Iterator<Item = LocalPauli> {
        SinglePauli::ALL
            .into_iter()
            .flat_map(|a| SinglePauli::ALL.into_iter().map(move |b| LocalPauli(a, b)))
            .filter(|p| !p.is_identity())
    }
}

/// Bit-packed X/Z error record over all nine qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliFrame {
    pub x: u16,
    pub z: u16,
}

impl PauliFrame {
    pub fn apply(&mut self, q: usize, p: SinglePauli) {
        let (x, z) = p.bits();
        self.x ^= (x as u16) << q;
        self.z ^= (z as u16) << q;
    }

    pub fn inject(&mut self, gate: &Gate, p: LocalPauli) {
        self.apply(gate.qubits[0], p.0);
        if gate.kind.is_two_qubit() {
            self.apply(gate.qubits[1], p.1);
        }
    }

    /// Error currently sitting on the data qubits.
    pub fn data(&self) -> PauliString {
        PauliString::from_masks((self.x & DATA_BITS) as u8, (self.z & DATA_BITS) as u8)
    }

    pub fn with_data(mut self, p: PauliString) -> Self {
        self.x = (self.x & !DATA_BITS) | p.x_mask() as u16;
        self.z = (self.z & !DATA_BITS) | p.z_mask() as u16;
        self
    }

    fn bit(v: u16, q: usize) -> u16 {
        (v >> q) & 1
    }

    /// Conjugates the frame through `gate`. Returns the outcome flip for
    /// measurements.
    pub fn propagate(&mut self, gate: &Gate) -> Option<bool> {
        let [a, b] = gate.qubits;
        match gate.kind {
            GateKind::PrepareZ | GateKind::PrepareX => {
                self.x &= !(1 << a);
                self.z &= !(1 << a);
                None
            }
            GateKind::Cnot => {
                self.x ^= Self::bit(self.x, a) << b;
                self.z ^= Self::bit(self.z, b) << a;
                None
            }
            GateKind::Cz => {
                let (xa, xb) = (Self::bit(self.x, a), Self::bit(self.x, b));
                self.z ^= (xb << a) | (xa << b);
                None
            }
            GateKind::MeasureZ => Some(Self::bit(self.x, a) == 1),
            GateKind::MeasureX => Some(Self::bit(self.z, a) == 1),
        }
    }
}

/// Frame-level propagation of a single gate, as a free function.
pub fn propagate(mut frame: PauliFrame, gate: &Gate) -> (PauliFrame, Option<bool>) {
    let out = frame.propagate(gate);
    (frame, out)
}
