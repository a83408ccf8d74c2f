//! Ordered collections: item i (1-based) is bound by i applications of the
//! sequence matrix and the terms are summed.

use crate::error::{check_dim, Result};
use crate::vsa::{BindingMatrix, HyperVector};

/// `Σ_i M^i · items[i-1]`.
///
/// Evaluated from the last item backwards as `M(x₁ + M(x₂ + M(x₃ + …)))`,
/// which takes one matrix-vector product per item.
pub fn encode_sequence(items: &[HyperVector], m_seq: &BindingMatrix, normalize_result: bool) -> Result<HyperVector> {
    let n = m_seq.dim();
    for item in items {
        check_dim(n, item.dim())?;
    }
    let mut acc: Option<HyperVector> = None;
    for item in items.iter().rev() {
        let inner = match acc {
            Some(tail) => item.add(&tail)?,
            None => item.clone(),
        };
        acc = Some(m_seq.bind(&inner)?);
    }
    let out = acc.unwrap_or_else(|| HyperVector::zeros(n));
    Ok(if normalize_result { out.normalized() } else { out })
}
