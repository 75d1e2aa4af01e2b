//! Memory-experiment sampling by Pauli-frame propagation.
//!
//! A run prepares the data qubits, performs one noisy flagged cycle whose
//! syndrome becomes the reference s(0) (its flags are dropped), then `T`
//! recorded cycles, then an ideal transversal data readout followed by the
//! pure-error correction.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{build_qec_cycle, Channel, Gate, GateKind, GateList, LocalPauli, PauliFrame};
use crate::noise::{uniform, NoiseModel};
use crate::steane::{Basis, CodeDefinition, PauliString, StabilizerKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VolumeError {
    #[error("round word {0:#x} uses bits above the 12 channels")]
    BadWord(u16),
    #[error("malformed text volume: {0}")]
    BadText(String),
}

/// Syndrome increments and flag bits for rounds 1..=T, one 12-bit word per
/// round (bit `c` is channel `c`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SyndromeFlagVolume {
    rounds: Vec<u16>,
}

impl SyndromeFlagVolume {
    pub fn new(rounds: Vec<u16>) -> Result<Self, VolumeError> {
        if let Some(&w) = rounds.iter().find(|&&w| w >> Channel::COUNT != 0) {
            return Err(VolumeError::BadWord(w));
        }
        Ok(Self { rounds })
    }

    pub fn zeros(t: usize) -> Self {
        Self { rounds: vec![0; t] }
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn words(&self) -> &[u16] {
        &self.rounds
    }

    /// `t` is 0-based (round t+1).
    pub fn bit(&self, t: usize, ch: Channel) -> bool {
        self.rounds[t] >> ch.index() & 1 == 1
    }

    pub fn set(&mut self, t: usize, ch: Channel, value: bool) {
        let m = 1u16 << ch.index();
        if value {
            self.rounds[t] |= m;
        } else {
            self.rounds[t] &= !m;
        }
    }

    /// 3-bit syndrome increment of the `kind`-type generators in round `t`.
    pub fn increment(&self, t: usize, kind: StabilizerKind) -> u8 {
        let shift = Channel::syndrome(kind, 0).index();
        (self.rounds[t] >> shift & 0b111) as u8
    }

    pub fn flags(&self, t: usize, kind: StabilizerKind) -> u8 {
        let shift = Channel::flag(kind, 0).index();
        (self.rounds[t] >> shift & 0b111) as u8
    }

    pub fn is_all_zero(&self) -> bool {
        self.rounds.iter().all(|&w| w == 0)
    }

    pub fn truncated(&self, t: usize) -> Self {
        Self { rounds: self.rounds[..t.min(self.rounds.len())].to_vec() }
    }

    pub fn with_trailing_zero_rounds(&self, n: usize) -> Self {
        let mut rounds = self.rounds.clone();
        rounds.extend(std::iter::repeat_n(0, n));
        Self { rounds }
    }

    /// Round values of the listed channels as 0.0/1.0.
    pub fn features(&self, channels: &[Channel]) -> Vec<Vec<f64>> {
        (0..self.num_rounds())
            .map(|t| channels.iter().map(|&c| if self.bit(t, c) { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    /// Rounds as strings of twelve '0'/'1' characters in channel order,
    /// separated by spaces.
    pub fn to_text(&self) -> String {
        self.rounds
            .iter()
            .map(|&w| (0..Channel::COUNT).map(|c| if w >> c & 1 == 1 { '1' } else { '0' }).collect::<String>())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn from_text(s: &str) -> Result<Self, VolumeError> {
        let rounds = s
            .split_whitespace()
            .map(|tok| {
                if tok.len() != Channel::COUNT {
                    return Err(VolumeError::BadText(tok.to_string()));
                }
                tok.chars().enumerate().try_fold(0u16, |w, (c, ch)| match ch {
                    '0' => Ok(w),
                    '1' => Ok(w | 1 << c),
                    _ => Err(VolumeError::BadText(tok.to_string())),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { rounds })
    }
}

impl fmt::Display for SyndromeFlagVolume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// One memory-experiment shot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorySample {
    pub volume: SyndromeFlagVolume,
    pub basis: Basis,
    pub m_in: bool,
    pub m_out: bool,
}

impl MemorySample {
    /// Logical flip parity m_L = m_in ⊕ m_out.
    pub fn label(&self) -> bool {
        self.m_in ^ self.m_out
    }
}

/// Where in a run a gate sits, for fault sources that target specific cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    DataPreparation,
    PreparationCycle,
    /// Recorded cycle, 1-based.
    Cycle(usize),
    /// Noiseless trailing cycle appended after the recorded ones.
    Flush,
}

pub trait FaultSource {
    fn fault(&mut self, phase: Phase, gate: &Gate) -> Option<LocalPauli>;
}

/// No faults at all.
pub struct Noiseless;

impl FaultSource for Noiseless {
    fn fault(&mut self, _: Phase, _: &Gate) -> Option<LocalPauli> {
        None
    }
}

/// Independent depolarizing faults everywhere except flush cycles.
pub struct SampledNoise<'a, R: Rng> {
    pub noise: NoiseModel,
    pub rng: &'a mut R,
}

impl<R: Rng> FaultSource for SampledNoise<'_, R> {
    fn fault(&mut self, phase: Phase, gate: &Gate) -> Option<LocalPauli> {
        if phase == Phase::Flush {
            return None;
        }
        let u = uniform(self.rng);
        self.noise.sample_at(gate, u)
    }
}

/// Full record of a run: the volume plus the data error after every
/// recorded cycle, which gives the ideal-readout label of each prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub volume: SyndromeFlagVolume,
    pub data_after_round: Vec<PauliString>,
}

impl Trajectory {
    pub fn final_data(&self) -> PauliString {
        *self.data_after_round.last().unwrap_or(&PauliString::IDENTITY)
    }
}

/// Runs memory experiments for one code.
#[derive(Debug, Clone)]
pub struct Simulator {
    code: CodeDefinition,
    cycle: GateList,
}

impl Simulator {
    pub fn new(code: CodeDefinition) -> Self {
        let cycle = build_qec_cycle(&code);
        Self { code, cycle }
    }

    pub fn code(&self) -> &CodeDefinition {
        &self.code
    }

    pub fn cycle(&self) -> &GateList {
        &self.cycle
    }

    fn run_gates(frame: &mut PauliFrame, gates: &GateList, phase: Phase, source: &mut dyn FaultSource) -> u16 {
        let mut word = 0u16;
        for g in &gates.gates {
            let measure = matches!(g.kind, GateKind::MeasureX | GateKind::MeasureZ);
            if measure {
                if let Some(p) = source.fault(phase, g) {
                    frame.inject(g, p);
                }
            }
            if let (Some(true), Some(ch)) = (frame.propagate(g), g.record) {
                word |= 1 << ch.index();
            }
            if !measure {
                if let Some(p) = source.fault(phase, g) {
                    frame.inject(g, p);
                }
            }
        }
        word
    }

    /// Runs data preparation, the reference cycle, `rounds` recorded cycles
    /// and `flush` noiseless cycles. The returned volume has
    /// `rounds + flush` entries.
    pub fn trajectory(&self, basis: Basis, rounds: usize, flush: usize, source: &mut dyn FaultSource) -> Trajectory {
        const SYNDROME_BITS: u16 = 0b11_1111;
        let mut frame = PauliFrame::default();
        Self::run_gates(&mut frame, &GateList::data_preparation(basis), Phase::DataPreparation, source);
        let mut previous = Self::run_gates(&mut frame, &self.cycle, Phase::PreparationCycle, source) & SYNDROME_BITS;
        let mut words = Vec::with_capacity(rounds + flush);
        let mut data_after_round = Vec::with_capacity(rounds + flush);
        for t in 0..rounds + flush {
            let phase = if t < rounds { Phase::Cycle(t + 1) } else { Phase::Flush };
            let word = Self::run_gates(&mut frame, &self.cycle, phase, source);
            let syndrome = word & SYNDROME_BITS;
            words.push((syndrome ^ previous) | (word & !SYNDROME_BITS));
            previous = syndrome;
            data_after_round.push(frame.data());
        }
        Trajectory { volume: SyndromeFlagVolume { rounds: words }, data_after_round }
    }

    /// Label of a finished trajectory read out in `basis`.
    pub fn label_of(&self, residual: PauliString, basis: Basis) -> bool {
        self.code.readout_flip(residual, basis)
    }

    pub fn sample<R: Rng>(&self, noise: NoiseModel, rounds: usize, basis: Basis, m_in: bool, rng: &mut R) -> MemorySample {
        let mut source = SampledNoise { noise, rng };
        let traj = self.trajectory(basis, rounds, 0, &mut source);
        let flip = self.label_of(traj.final_data(), basis);
        MemorySample { volume: traj.volume, basis, m_in, m_out: m_in ^ flip }
    }
}

/// Samples one memory experiment with `T = rounds ≥ 1` recorded cycles.
pub fn sample_memory_experiment<R: Rng>(
    code: &CodeDefinition,
    noise: NoiseModel,
    rounds: usize,
    basis: Basis,
    m_in: bool,
    rng: &mut R,
) -> MemorySample {
    assert!(rounds >= 1, "a memory experiment needs at least one recorded cycle");
    Simulator::new(code.clone()).sample(noise, rounds, basis, m_in, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::ShotStreams;

    #[test]
    fn noiseless_runs_are_trivial() {
        let sim = Simulator::new(CodeDefinition::steane());
        let mut rng = ShotStreams::new(1).shot(0);
        for basis in [Basis::X, Basis::Z] {
            for m_in in [false, true] {
                let s = sim.sample(NoiseModel::noiseless(), 5, basis, m_in, &mut rng);
                assert!(s.volume.is_all_zero());
                assert_eq!(s.volume.num_rounds(), 5);
                assert!(!s.label());
                assert_eq!(s.m_out, m_in);
            }
        }
    }

    #[test]
    fn data_error_before_first_round() {
        let sim = Simulator::new(CodeDefinition::steane());
        let mut frame = PauliFrame::default().with_data(PauliString::x(&[5]).unwrap());
        let mut words = Vec::new();
        for _ in 0..2 {
            words.push(Simulator::run_gates(&mut frame, sim.cycle(), Phase::Cycle(1), &mut Noiseless));
        }
        // Z-type generators see X5: s_Z = 010 in both rounds, so the increment
        // appears in round 1 only.
        let s1 = words[0] & 0x3f;
        let s2 = words[1] & 0x3f;
        assert_eq!(s1, 0b010 << 3);
        assert_eq!(s1 ^ s2, 0);
        let code = sim.code();
        assert_eq!(code.pure_error_for(code.syndrome_of(frame.data())), PauliString::x(&[5]).unwrap());
        assert!(!code.readout_flip(frame.data(), Basis::Z));
    }

    #[test]
    fn text_round_trip() {
        let v = SyndromeFlagVolume::new(vec![0b0000_0100_0001, 0, 0xfff]).unwrap();
        let text = v.to_text();
        assert_eq!(text.split(' ').next().unwrap(), "100000100000");
        assert_eq!(SyndromeFlagVolume::from_text(&text).unwrap(), v);
        assert!(SyndromeFlagVolume::new(vec![1 << 12]).is_err());
        assert!(SyndromeFlagVolume::from_text("10").is_err());
    }

    #[test]
    fn reproducible_given_seed() {
        let sim = Simulator::new(CodeDefinition::steane());
        let noise = NoiseModel::new(0.01).unwrap();
        let streams = ShotStreams::new(42);
        for shot in 0..50 {
            let a = sim.sample(noise, 6, Basis::Z, shot % 2 == 0, &mut streams.shot(shot));
            let b = sim.sample(noise, 6, Basis::Z, shot % 2 == 0, &mut streams.shot(shot));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn frame_syndrome_matches_code_syndrome() {
        // The cumulative syndrome read by the circuit equals the code syndrome
        // of the data error, once measurement errors are absent. Use noise on
        // data-coupled gates only by checking noiseless readout of the final
        // data frame over random runs.
        let sim = Simulator::new(CodeDefinition::steane());
        let noise = NoiseModel::new(0.02).unwrap();
        let streams = ShotStreams::new(9);
        for shot in 0..2000 {
            let mut rng = streams.shot(shot);
            let mut source = SampledNoise { noise, rng: &mut rng };
            let traj = sim.trajectory(Basis::Z, 3, 0, &mut source);
            // Re-measure the final data error with a noiseless cycle twice.
            let mut frame = PauliFrame::default().with_data(traj.final_data());
            let w = Simulator::run_gates(&mut frame, sim.cycle(), Phase::Flush, &mut Noiseless);
            let s = sim.code().syndrome_of(traj.final_data());
            assert_eq!(w & 0b111, s.x as u16);
            assert_eq!(w >> 3 & 0b111, s.z as u16);
            assert_eq!(w >> 6, 0);
        }
    }
}
