//! Common decoder interface.

use crate::sim::SyndromeFlagVolume;
use crate::steane::Basis;

/// Predicts the logical flip parity m_L of a memory experiment read out in
/// `basis` from its syndrome-flag volume.
pub trait Decoder: Sync {
    fn predict(&self, volume: &SyndromeFlagVolume, basis: Basis) -> bool;

    fn name(&self) -> &str;
}

/// Always predicts "no logical flip".
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityDecoder;

impl Decoder for IdentityDecoder {
    fn predict(&self, _: &SyndromeFlagVolume, _: Basis) -> bool {
        false
    }

    fn name(&self) -> &str {
        "identity"
    }
}

/// Always predicts a logical flip.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysFlipDecoder;

impl Decoder for AlwaysFlipDecoder {
    fn predict(&self, _: &SyndromeFlagVolume, _: Basis) -> bool {
        true
    }

    fn name(&self) -> &str {
        "always-flip"
    }
}
