//! Deterministic error placement: every single fault in a short memory
//! experiment is injected once and the decoder must undo all of them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateList, LocalPauli, LocationKind, SinglePauli};
use crate::decoder::Decoder;
use crate::sim::{FaultSource, Phase, Simulator, Trajectory};
use crate::steane::Basis;

/// A single Pauli inserted at one location of one recorded cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultInjection {
    /// Recorded cycle, 1-based.
    pub cycle: usize,
    /// Location id inside the cycle's gate list.
    pub location: usize,
    pub pauli: LocalPauli,
}

impl FaultSource for FaultInjection {
    fn fault(&mut self, phase: Phase, gate: &Gate) -> Option<LocalPauli> {
        (phase == Phase::Cycle(self.cycle) && gate.location == self.location).then_some(self.pauli)
    }
}

/// Every location of `cycles` copies of `cycle` paired with every element of
/// its error set.
pub fn enumerate_single_faults(cycle: &GateList, cycles: usize) -> Vec<FaultInjection> {
    let mut out = Vec::new();
    for c in 1..=cycles {
        for g in &cycle.gates {
            let paulis: Vec<LocalPauli> = match g.location_kind() {
                LocationKind::Spam => vec![LocalPauli(g.spam_flip(), SinglePauli::I)],
                LocationKind::OneQubit => SinglePauli::NONTRIVIAL.iter().map(|&p| LocalPauli(p, SinglePauli::I)).collect(),
                LocationKind::TwoQubit => LocalPauli::two_qubit_set().collect(),
            };
            out.extend(paulis.into_iter().map(|pauli| FaultInjection { cycle: c, location: g.location, pauli }));
        }
    }
    out
}

/// Noiseless cycles appended after the faulty ones so that every fault is
/// visible in the volume. Errors on the data caught by the X-type generators
/// only show up one cycle later, since those are read out first.
pub fn flush_cycles(basis: Basis) -> usize {
    match basis {
        Basis::Z => 0,
        Basis::X => 1,
    }
}

pub fn run_with_fault(sim: &Simulator, fault: FaultInjection, cycles: usize, basis: Basis) -> Trajectory {
    let mut source = fault;
    sim.trajectory(basis, cycles, flush_cycles(basis), &mut source)
}

/// Whether `decoder` mispredicts the logical flip caused by `fault`.
pub fn fault_fails(decoder: &dyn Decoder, sim: &Simulator, fault: FaultInjection, cycles: usize, basis: Basis) -> bool {
    let traj = run_with_fault(sim, fault, cycles, basis);
    let truth = sim.label_of(traj.final_data(), basis);
    decoder.predict(&traj.volume, basis) != truth
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepReport {
    pub basis: Basis,
    pub cycles: usize,
    pub locations: usize,
    pub injections: usize,
    pub failing: Vec<FaultInjection>,
}

impl DepReport {
    pub fn failures(&self) -> usize {
        self.failing.len()
    }

    pub fn fraction(&self) -> f64 {
        if self.injections == 0 {
            0.0
        } else {
            self.failures() as f64 / self.injections as f64
        }
    }
}

pub fn dep_report(decoder: &dyn Decoder, sim: &Simulator, basis: Basis, cycles: usize) -> DepReport {
    let faults = enumerate_single_faults(sim.cycle(), cycles);
    let failing = faults.par_iter().copied().filter(|&f| fault_fails(decoder, sim, f, cycles, basis)).collect();
    DepReport { basis, cycles, locations: sim.cycle().len() * cycles, injections: faults.len(), failing }
}

/// Fraction of single faults in two cycles that `decoder` fails to undo.
pub fn dep_failure_fraction(decoder: &dyn Decoder, sim: &Simulator, basis: Basis) -> f64 {
    dep_report(decoder, sim, basis, 2).fraction()
}
