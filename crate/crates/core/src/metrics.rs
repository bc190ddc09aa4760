//! Error metrics over interior-masked grid fields.

use crate::coefficients::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::scalar::{to_f64, Real};

/// Relative (or absolute, when the truth vanishes) field errors over the
/// interior mask.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FieldError {
    pub rel_l2: f64,
    pub rel_linf: f64,
    /// Set when the truth is identically zero on the mask and the reported
    /// numbers are absolute norms of the estimate.
    pub absolute: bool,
    pub masked_nodes: usize,
}

/// Relative L2/Linf error of `estimate` against `truth` over grid nodes at
/// relative interior depth `interior_fraction` (0 keeps every in-domain
/// node). Grids must match exactly.
pub fn rel_l2<T: Real>(
    estimate: &ScalarField<T>,
    truth: &ScalarField<T>,
    domain: &Domain<T>,
    interior_fraction: T,
) -> Result<FieldError> {
    if estimate.spec() != truth.spec() {
        return Err(Error::validation("field grids do not match"));
    }
    let spec = estimate.spec();
    let mut num2 = 0.0f64;
    let mut den2 = 0.0f64;
    let mut num_inf = 0.0f64;
    let mut den_inf = 0.0f64;
    let mut masked = 0usize;
    for idx in 0..spec.n_nodes() {
        let x = spec.node(idx);
        if !domain.is_interior(x, interior_fraction) {
            continue;
        }
        masked += 1;
        let e = to_f64(estimate.values()[idx]);
        let t = to_f64(truth.values()[idx]);
        num2 += (e - t) * (e - t);
        den2 += t * t;
        num_inf = num_inf.max((e - t).abs());
        den_inf = den_inf.max(t.abs());
    }
    if masked == 0 {
        return Err(Error::validation("interior mask is empty"));
    }
    if den2 == 0.0 {
        return Ok(FieldError {
            rel_l2: num2.sqrt(),
            rel_linf: num_inf,
            absolute: true,
            masked_nodes: masked,
        });
    }
    Ok(FieldError {
        rel_l2: (num2 / den2).sqrt(),
        rel_linf: num_inf / den_inf,
        absolute: false,
        masked_nodes: masked,
    })
}
