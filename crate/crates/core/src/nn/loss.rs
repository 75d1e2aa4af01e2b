//! Binary cross-entropy and its masked multi-head variant.

use super::spec::NnError;

/// Probabilities are clamped into this band before taking logarithms.
pub const CLAMP: f64 = 1e-7;

fn check(q: f64) -> Result<f64, NnError> {
    if q.is_nan() || !(0.0..=1.0).contains(&q) {
        return Err(NnError::Shape { layer: usize::MAX, message: format!("probability {q} outside [0, 1]") });
    }
    Ok(q.clamp(CLAMP, 1.0 - CLAMP))
}

/// −(p ln q + (1−p) ln(1−q)).
pub fn bce_loss(p: bool, q: f64) -> Result<f64, NnError> {
    let q = check(q)?;
    Ok(if p { -q.ln() } else { -(1.0 - q).ln() })
}

/// Sum of the BCE of every head whose label is present.
pub fn masked_bce_loss(labels: &[Option<bool>], q: &[f64]) -> Result<f64, NnError> {
    labels.iter().zip(q).filter_map(|(l, &q)| l.map(|p| bce_loss(p, q))).sum()
}

/// Gradient of [`masked_bce_loss`] with respect to the sigmoid logits;
/// masked heads get exactly zero.
pub fn masked_bce_logit_grad(labels: &[Option<bool>], q: &[f64]) -> Vec<f64> {
    labels.iter().zip(q).map(|(l, &q)| l.map_or(0.0, |p| q - p as u8 as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        assert!((bce_loss(true, 0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(bce_loss(false, 1e-12).unwrap() < 1e-6);
        assert!(bce_loss(true, 0.0).unwrap().is_finite());
        assert!(bce_loss(true, 1.5).is_err());
    }

    #[test]
    fn masked_head_matches_single_head() {
        let q = [0.3, 0.9];
        assert_eq!(masked_bce_loss(&[Some(true), None], &q).unwrap(), bce_loss(true, 0.3).unwrap());
        assert_eq!(masked_bce_logit_grad(&[None, Some(false)], &q), vec![0.0, 0.9]);
    }
}
