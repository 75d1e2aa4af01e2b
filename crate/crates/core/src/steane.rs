//! The ⟦7,1,3⟧ Steane code: phase-free Pauli algebra on the seven data
//! qubits, syndrome extraction, pure-error lookup and logical readout.
//!
//! Data qubits are numbered 1..=7 in user-facing constructors and stored as
//! bit `q - 1` of a 7-bit mask. Stabilizer `k` (0-based) sits at bit `k` of a
//! half-syndrome.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DATA_QUBITS: usize = 7;
const DATA_MASK: u8 = 0x7f;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("residual {0} has nontrivial syndrome {1}; apply a pure-error correction first")]
    OutsideCodespace(PauliString, Syndrome),
    #[error("qubit index {0} outside 1..=7")]
    BadQubit(usize),
}

/// Memory readout basis. `Z` readout detects logical bit flips (X errors),
/// `X` readout detects logical phase flips (Z errors).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::X => write!(f, "X"),
            Basis::Z => write!(f, "Z"),
        }
    }
}

/// Type of a stabilizer generator (and of the Pauli it is built from).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilizerKind {
    X,
    Z,
}

/// Phase-free Pauli operator on the data qubits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PauliString {
    x_mask: u8,
    z_mask: u8,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x_mask: 0, z_mask: 0 };

    pub fn from_masks(x_mask: u8, z_mask: u8) -> Self {
        Self { x_mask: x_mask & DATA_MASK, z_mask: z_mask & DATA_MASK }
    }

    /// X on the listed qubits (1-based).
    pub fn x(qubits: &[usize]) -> Result<Self, CodeError> {
        Ok(Self::from_masks(mask_of(qubits)?, 0))
    }

    /// Z on the listed qubits (1-based).
    pub fn z(qubits: &[usize]) -> Result<Self, CodeError> {
        Ok(Self::from_masks(0, mask_of(qubits)?))
    }

    /// A Pauli of the given kind supported on `mask`.
    pub fn of_kind(kind: StabilizerKind, mask: u8) -> Self {
        match kind {
            StabilizerKind::X => Self::from_masks(mask, 0),
            StabilizerKind::Z => Self::from_masks(0, mask),
        }
    }

    pub fn x_mask(&self) -> u8 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u8 {
        self.z_mask
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    /// Phase-free product.
    pub fn compose(self, other: PauliString) -> PauliString {
        PauliString { x_mask: self.x_mask ^ other.x_mask, z_mask: self.z_mask ^ other.z_mask }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let overlap = (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        overlap.is_multiple_of(2)
    }

    /// The part of this Pauli of one kind only (X part or Z part).
    pub fn part(&self, kind: StabilizerKind) -> PauliString {
        match kind {
            StabilizerKind::X => PauliString::from_masks(self.x_mask, 0),
            StabilizerKind::Z => PauliString::from_masks(0, self.z_mask),
        }
    }
}

impl BitXor for PauliString {
    type Output = PauliString;
    fn bitxor(self, rhs: PauliString) -> PauliString {
        self.compose(rhs)
    }
}

impl BitXorAssign for PauliString {
    fn bitxor_assign(&mut self, rhs: PauliString) {
        *self = self.compose(rhs);
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        for q in 0..DATA_QUBITS {
            let bit = 1u8 << q;
            let c = match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                (true, true) => 'Y',
                (true, false) => 'X',
                (false, true) => 'Z',
                (false, false) => continue,
            };
            write!(f, "{c}{}", q + 1)?;
        }
        Ok(())
    }
}

fn mask_of(qubits: &[usize]) -> Result<u8, CodeError> {
    qubits.iter().try_fold(0u8, |m, &q| {
        if (1..=DATA_QUBITS).contains(&q) {
            Ok(m ^ (1 << (q - 1)))
        } else {
            Err(CodeError::BadQubit(q))
        }
    })
}

/// Six syndrome bits: `x` holds the X-type generator outcomes (s_X), `z` the
/// Z-type ones (s_Z). Each is a 3-bit half-syndrome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Syndrome {
    pub x: u8,
    pub z: u8,
}

impl Syndrome {
    pub fn is_trivial(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn half(&self, kind: StabilizerKind) -> u8 {
        match kind {
            StabilizerKind::X => self.x,
            StabilizerKind::Z => self.z,
        }
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s_X={} s_Z={}", half_bits(self.x), half_bits(self.z))
    }
}

/// Renders a half-syndrome as the three-character string used in the
/// correction table ("010" = only the second generator fires).
pub fn half_bits(h: u8) -> String {
    (0..3).map(|k| if h >> k & 1 == 1 { '1' } else { '0' }).collect()
}

/// Code layout: plaquette supports, the entangling-gate order of each flagged
/// readout, and the fixed logical representatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDefinition {
    /// Supports shared by the X- and Z-type generator of each plaquette.
    pub supports: [u8; 3],
    /// 0-based data qubits of each plaquette in the order they are coupled.
    pub gate_order: [[usize; 4]; 3],
    pub logical_x_support: u8,
    pub logical_z_support: u8,
}

impl Default for CodeDefinition {
    fn default() -> Self {
        Self::steane()
    }
}

impl CodeDefinition {
    pub fn steane() -> Self {
        let gate_order = [[0, 1, 2, 3], [1, 2, 4, 5], [2, 3, 5, 6]];
        let supports = gate_order.map(|o| o.iter().fold(0u8, |m, &q| m | 1 << q));
        // qubits 1, 4, 7
        let logical = 0b100_1001;
        debug_assert_eq!(logical, (1 << 0) | (1 << 3) | (1 << 6));
        Self { supports, gate_order, logical_x_support: logical, logical_z_support: logical }
    }

    pub fn id(&self) -> &'static str {
        "steane-7-1-3"
    }

    pub fn generator(&self, kind: StabilizerKind, k: usize) -> PauliString {
        PauliString::of_kind(kind, self.supports[k])
    }

    pub fn generators(&self) -> impl Iterator<Item = PauliString> + '_ {
        [StabilizerKind::X, StabilizerKind::Z]
            .into_iter()
            .flat_map(move |kind| (0..3).map(move |k| self.generator(kind, k)))
    }

    pub fn logical_x(&self) -> PauliString {
        PauliString::from_masks(self.logical_x_support, 0)
    }

    pub fn logical_z(&self) -> PauliString {
        PauliString::from_masks(0, self.logical_z_support)
    }

    /// Half-syndrome measured by the generators of `kind` on a data mask.
    pub fn half_syndrome(&self, mask: u8) -> u8 {
        self.supports
            .iter()
            .enumerate()
            .fold(0u8, |s, (k, &sup)| s | (((mask & sup).count_ones() & 1) as u8) << k)
    }

    /// Z-type generators see X errors, X-type generators see Z errors.
    pub fn syndrome_of(&self, p: PauliString) -> Syndrome {
        Syndrome { x: self.half_syndrome(p.z_mask()), z: self.half_syndrome(p.x_mask()) }
    }

    /// Unique weight-≤1 Pauli whose syndrome under the `stabilizer`-type
    /// generators equals `half`. The correction is of the opposite type.
    pub fn pure_error_correction(&self, half: u8, stabilizer: StabilizerKind) -> PauliString {
        let half = half & 0b111;
        let mask = if half == 0 {
            0
        } else {
            // Every nonzero pattern picks out exactly one qubit: the one lying in
            // precisely the flagged supports.
            (0..DATA_QUBITS)
                .map(|q| 1u8 << q)
                .find(|&bit| self.half_syndrome(bit) == half)
                .expect("Steane half-syndromes are a bijection onto weight-1 errors")
        };
        match stabilizer {
            StabilizerKind::Z => PauliString::from_masks(mask, 0),
            StabilizerKind::X => PauliString::from_masks(0, mask),
        }
    }

    /// Full pure-error correction for both halves of a syndrome.
    pub fn pure_error_for(&self, s: Syndrome) -> PauliString {
        self.pure_error_correction(s.z, StabilizerKind::Z) ^ self.pure_error_correction(s.x, StabilizerKind::X)
    }

    /// Logical flip seen by a readout in `basis`. A Z readout flips iff the
    /// residual anticommutes with Z_L; an X readout iff it anticommutes with X_L.
    pub fn logical_parity(&self, residual: PauliString, basis: Basis) -> Result<bool, CodeError> {
        let s = self.syndrome_of(residual);
        let relevant = match basis {
            Basis::Z => s.z,
            Basis::X => s.x,
        };
        if relevant != 0 {
            return Err(CodeError::OutsideCodespace(residual, s));
        }
        Ok(self.logical_parity_unchecked(residual, basis))
    }

    pub(crate) fn logical_parity_unchecked(&self, residual: PauliString, basis: Basis) -> bool {
        let overlap = match basis {
            Basis::Z => residual.x_mask() & self.logical_z_support,
            Basis::X => residual.z_mask() & self.logical_x_support,
        };
        overlap.count_ones() % 2 == 1
    }

    /// Logical flip left after the ideal final readout: the relevant half of
    /// the residual is pushed back into the codespace with the pure-error
    /// correction, then its logical parity is read.
    pub fn readout_flip(&self, residual: PauliString, basis: Basis) -> bool {
        let kind = match basis {
            Basis::Z => StabilizerKind::Z,
            Basis::X => StabilizerKind::X,
        };
        let corrected = residual ^ self.pure_error_correction(self.syndrome_of(residual).half(kind), kind);
        self.logical_parity_unchecked(corrected, basis)
    }

    /// The 8 elements generated by the `kind`-type generators alone.
    pub fn stabilizer_subgroup(&self, kind: StabilizerKind) -> Vec<PauliString> {
        (0u8..8)
            .map(|bits| {
                (0..3).filter(|k| bits >> k & 1 == 1).fold(PauliString::IDENTITY, |acc, k| acc ^ self.generator(kind, k))
            })
            .collect()
    }

    /// The full 64-element stabilizer group.
    pub fn stabilizer_group(&self) -> Vec<PauliString> {
        let xs = self.stabilizer_subgroup(StabilizerKind::X);
        let zs = self.stabilizer_subgroup(StabilizerKind::Z);
        xs.iter().flat_map(|&a| zs.iter().map(move |&b| a ^ b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code() -> CodeDefinition {
        CodeDefinition::steane()
    }

    #[test]
    fn compose_examples() {
        let x5 = PauliString::x(&[5]).unwrap();
        assert!((x5 ^ x5).is_identity());
        let e = x5 ^ PauliString::x(&[1, 4, 7]).unwrap();
        assert_eq!(e, PauliString::x(&[1, 4, 5, 7]).unwrap());
        assert_eq!(format!("{e}"), "X1X4X5X7");
        let y3 = PauliString::x(&[3]).unwrap() ^ PauliString::z(&[3]).unwrap();
        assert_eq!(format!("{y3}"), "Y3");
    }

    #[test]
    fn bad_qubit_rejected() {
        assert_eq!(PauliString::x(&[0]), Err(CodeError::BadQubit(0)));
        assert_eq!(PauliString::z(&[8]), Err(CodeError::BadQubit(8)));
    }

    #[test]
    fn syndrome_examples() {
        let c = code();
        let e = PauliString::x(&[1, 4, 5, 7]).unwrap();
        assert_eq!(c.syndrome_of(e), Syndrome { x: 0, z: 0b010 });
        assert_eq!(c.syndrome_of(PauliString::x(&[5]).unwrap()), Syndrome { x: 0, z: 0b010 });
        assert!(c.syndrome_of(PauliString::IDENTITY).is_trivial());
    }

    #[test]
    fn pure_error_examples() {
        let c = code();
        assert_eq!(c.pure_error_correction(0b010, StabilizerKind::Z), PauliString::x(&[5]).unwrap());
        assert!(c.pure_error_correction(0, StabilizerKind::Z).is_identity());
        assert_eq!(c.pure_error_correction(0b111, StabilizerKind::X), PauliString::z(&[3]).unwrap());
    }

    #[test]
    fn pure_error_matches_brute_force() {
        let c = code();
        for half in 0u8..8 {
            let candidates: Vec<u8> = std::iter::once(0u8)
                .chain((0..7).map(|q| 1u8 << q))
                .filter(|&m| c.half_syndrome(m) == half)
                .collect();
            assert_eq!(candidates.len(), 1, "half-syndrome {half:03b}");
            assert_eq!(c.pure_error_correction(half, StabilizerKind::Z).x_mask(), candidates[0]);
        }
    }

    #[test]
    fn generators_commute_and_logicals_anticommute() {
        let c = code();
        let gens: Vec<_> = c.generators().collect();
        for a in &gens {
            for b in &gens {
                assert!(a.commutes_with(b));
            }
            assert!(a.commutes_with(&c.logical_x()));
            assert!(a.commutes_with(&c.logical_z()));
        }
        assert!(!c.logical_x().commutes_with(&c.logical_z()));
    }

    #[test]
    fn logical_parity_examples() {
        let c = code();
        assert_eq!(c.logical_parity(c.logical_x(), Basis::Z), Ok(true));
        assert_eq!(c.logical_parity(PauliString::IDENTITY, Basis::Z), Ok(false));
        for s in c.stabilizer_subgroup(StabilizerKind::X) {
            assert_eq!(c.logical_parity(s, Basis::Z), Ok(false));
        }
        for s in c.stabilizer_group() {
            assert_eq!(c.logical_parity(s, Basis::Z), Ok(false));
            assert_eq!(c.logical_parity(s, Basis::X), Ok(false));
        }
        assert!(matches!(
            c.logical_parity(PauliString::x(&[5]).unwrap(), Basis::Z),
            Err(CodeError::OutsideCodespace(..))
        ));
    }

    #[test]
    fn decomposition_worked_example() {
        // E = X1X4X5X7 = I · X5 · X_L; after C_P = X5 the residual is X_L.
        let c = code();
        let e = PauliString::x(&[1, 4, 5, 7]).unwrap();
        let cp = c.pure_error_for(c.syndrome_of(e));
        assert_eq!(cp, PauliString::x(&[5]).unwrap());
        assert_eq!(e ^ cp, c.logical_x());
        assert!(c.readout_flip(e, Basis::Z));
    }

    #[test]
    fn normalizer_equivalent_logical_gives_same_parity() {
        // Z_L on {1,4,7} vs Z_L multiplied by a stabilizer.
        let c = code();
        let mut alt = c.clone();
        alt.logical_z_support ^= c.supports[0];
        alt.logical_x_support ^= c.supports[1];
        for x in 0u8..128 {
            for z in [0u8, 0b101_0101, 0b001_1110] {
                let p = PauliString::from_masks(x, z);
                assert_eq!(c.readout_flip(p, Basis::Z), alt.readout_flip(p, Basis::Z));
                let q = PauliString::from_masks(z, x);
                assert_eq!(c.readout_flip(q, Basis::X), alt.readout_flip(q, Basis::X));
            }
        }
    }

    #[test]
    fn exhaustive_invariants() {
        let c = code();
        let gens: Vec<_> = c.generators().collect();
        let stabs = c.stabilizer_group();
        for x in 0u8..128 {
            for z in 0u8..128 {
                let p = PauliString::from_masks(x, z);
                let s = c.syndrome_of(p);
                for g in &gens {
                    assert_eq!(c.syndrome_of(p ^ *g), s);
                }
                let r = p ^ c.pure_error_for(s);
                assert!(c.syndrome_of(r).is_trivial());
                let lx = c.logical_parity(r, Basis::Z).unwrap();
                let lz = c.logical_parity(r, Basis::X).unwrap();
                for g in stabs.iter().step_by(7) {
                    assert_eq!(c.logical_parity(r ^ *g, Basis::Z).unwrap(), lx);
                    assert_eq!(c.logical_parity(r ^ *g, Basis::X).unwrap(), lz);
                }
            }
        }
    }
}
