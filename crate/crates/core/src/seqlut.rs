//! Sequential look-up-table decoder with flag-aware hook correction.
//!
//! Each error species is tracked on its own: X errors through the Z-type
//! syndrome increments and the flags of the X-type plaquettes, Z errors
//! through the X-type increments and the Z-type flags. A head pointer walks
//! over the rounds and raises a FLAG or ERROR signal; the signal is resolved
//! with the syndrome seen one round later, which is how single measurement
//! errors are told apart from data errors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decoder::Decoder;
use crate::sim::SyndromeFlagVolume;
use crate::steane::{half_bits, Basis, CodeDefinition, PauliString, StabilizerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signal {
    None,
    /// Syndrome change first seen at `round` (1-based).
    Error { round: usize },
    /// Flag of `plaquette` (0-based within its type) raised at `round`.
    Flag { plaquette: usize, round: usize },
}

/// One hook-error row: an ancilla fault `E_e` in the readout of a plaquette
/// leaves `data_error`, whose syndrome selects `correction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagRow {
    pub plaquette: usize,
    /// Fault position 1..=3.
    pub ancilla_error: usize,
    pub data_error: PauliString,
    pub syndrome: u8,
    pub correction: PauliString,
}

impl fmt::Display for FlagRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "plaquette {} E{}: {} -> {} -> {}",
            self.plaquette + 1,
            self.ancilla_error,
            self.data_error,
            half_bits(self.syndrome),
            self.correction
        )
    }
}

/// Corrections applied when a plaquette's flag fired, keyed by the
/// syndrome seen afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagCorrectionTable {
    /// Type of the flagged plaquettes, which is also the Pauli type of the
    /// hook errors they produce.
    pub plaquette_kind: StabilizerKind,
    pub rows: Vec<FlagRow>,
}

impl FlagCorrectionTable {
    /// Derives the nine rows from the coupling order: a fault on the ancilla
    /// right after its e-th coupling spreads onto the data qubits coupled
    /// later. Weight-3 spreads are replaced by their weight-1 equivalent.
    pub fn new(code: &CodeDefinition, plaquette_kind: StabilizerKind) -> Self {
        let detector = other(plaquette_kind);
        let mut rows = Vec::with_capacity(9);
        for (k, order) in code.gate_order.iter().enumerate() {
            for e in 1..=3 {
                let mask = order[e..].iter().fold(0u8, |m, &q| m | 1 << q);
                let data_error = PauliString::of_kind(plaquette_kind, mask);
                let reduced = data_error ^ code.generator(plaquette_kind, k);
                let correction = if reduced.weight() < data_error.weight() { reduced } else { data_error };
                let syndrome = code.syndrome_of(data_error).half(detector);
                rows.push(FlagRow { plaquette: k, ancilla_error: e, data_error, syndrome, correction });
            }
        }
        Self { plaquette_kind, rows }
    }

    pub fn lookup(&self, plaquette: usize, syndrome: u8) -> Option<PauliString> {
        self.rows.iter().find(|r| r.plaquette == plaquette && r.syndrome == syndrome).map(|r| r.correction)
    }
}

fn other(kind: StabilizerKind) -> StabilizerKind {
    match kind {
        StabilizerKind::X => StabilizerKind::Z,
        StabilizerKind::Z => StabilizerKind::X,
    }
}

/// Pointer state and accumulated correction of one species.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqLutState {
    pub signal: Signal,
    pub reference: usize,
    pub head: usize,
    pub frame: PauliString,
}

impl Default for SeqLutState {
    fn default() -> Self {
        Self { signal: Signal::None, reference: 0, head: 1, frame: PauliString::IDENTITY }
    }
}

#[derive(Debug, Clone)]
pub struct SeqLut {
    code: CodeDefinition,
    /// Tables for X-type and Z-type plaquettes.
    tables: [FlagCorrectionTable; 2],
}

impl SeqLut {
    pub fn new(code: CodeDefinition) -> Self {
        let tables = [FlagCorrectionTable::new(&code, StabilizerKind::X), FlagCorrectionTable::new(&code, StabilizerKind::Z)];
        Self { code, tables }
    }

    pub fn table(&self, plaquette_kind: StabilizerKind) -> &FlagCorrectionTable {
        match plaquette_kind {
            StabilizerKind::X => &self.tables[0],
            StabilizerKind::Z => &self.tables[1],
        }
    }

    /// Tracks the errors flipping a readout in `basis`: X errors for a Z
    /// readout, Z errors for an X readout.
    pub fn track(&self, volume: &SyndromeFlagVolume, basis: Basis) -> SeqLutState {
        let (detector, plaquette_kind) = match basis {
            Basis::Z => (StabilizerKind::Z, StabilizerKind::X),
            Basis::X => (StabilizerKind::X, StabilizerKind::Z),
        };
        let table = self.table(plaquette_kind);
        let rounds = volume.num_rounds();
        let mut cumulative = vec![0u8; rounds + 1];
        for t in 1..=rounds {
            cumulative[t] = cumulative[t - 1] ^ volume.increment(t - 1, detector);
        }
        let residual = |frame: PauliString, t: usize| cumulative[t] ^ self.code.syndrome_of(frame).half(detector);

        let mut st = SeqLutState::default();
        let resolve = |st: &mut SeqLutState, sigma: u8| {
            let correction = match st.signal {
                Signal::Flag { plaquette, .. } => {
                    table.lookup(plaquette, sigma).unwrap_or_else(|| self.code.pure_error_correction(sigma, detector))
                }
                _ => self.code.pure_error_correction(sigma, detector),
            };
            st.frame ^= correction;
            st.signal = Signal::None;
        };
        while st.head <= rounds {
            let head = st.head;
            if st.signal == Signal::None {
                let flags = volume.flags(head - 1, plaquette_kind);
                if flags != 0 {
                    st.signal = Signal::Flag { plaquette: flags.trailing_zeros() as usize, round: head };
                } else if residual(st.frame, head) != 0 {
                    st.signal = Signal::Error { round: head };
                } else {
                    st.reference = head;
                }
            } else {
                let sigma = residual(st.frame, head);
                resolve(&mut st, sigma);
                st.reference = head;
            }
            st.head += 1;
        }
        // A signal raised in the last round is resolved as if the volume
        // continued with quiet rounds.
        if st.signal != Signal::None {
            let sigma = residual(st.frame, rounds);
            resolve(&mut st, sigma);
        }
        st
    }

    /// Logical flips predicted for (Z readout, X readout), i.e. whether a
    /// logical X and a logical Z error occurred.
    pub fn decode(&self, volume: &SyndromeFlagVolume) -> (bool, bool) {
        (self.predict(volume, Basis::Z), self.predict(volume, Basis::X))
    }
}

impl Decoder for SeqLut {
    fn predict(&self, volume: &SyndromeFlagVolume, basis: Basis) -> bool {
        let st = self.track(volume, basis);
        self.code.readout_flip(st.frame, basis)
    }

    fn name(&self) -> &str {
        "seqlut"
    }
}
