use super::oracle::AlbedoOracle;
use crate::coefficients::{GridSpec, ScalarField};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::transforms::{invert_ls, xray, InversionMode, InversionParams, LineSet, Sinogram};

/// Boundary measurement algebra of the two-level collimated probe: recovers
/// the line attenuation factor `mu(tau_+) = exp(-X sigma_a)` from two exit
/// measurements with distinct inflow levels. Exact up to round-off on exact
/// ray data.
pub fn recover_mu_line<T: Real>(v1_exit: T, v2_exit: T, v1_in: T, v2_in: T) -> Result<T> {
    if !(v1_in > v2_in && v2_in > T::zero()) {
        return Err(Error::Degenerate(
            "need distinct positive inflow levels v1 > v2 > 0".into(),
        ));
    }
    if v1_exit <= T::zero() || v2_exit <= T::zero() {
        return Err(Error::Degenerate("nonpositive exit values".into()));
    }
    let denom = v1_exit.recip() - v2_exit.recip();
    if denom == T::zero() {
        return Err(Error::Degenerate("exit values coincide".into()));
    }
    Ok((v1_in.recip() - v2_in.recip()) / denom)
}

/// Per-line failure record of a reconstruction sweep.
#[derive(Debug, Clone)]
pub struct LineReport {
    pub line_index: usize,
    pub reason: String,
}

pub struct ScatterfreeOutput<T> {
    pub field: ScalarField<T>,
    /// Transform samples actually inverted (over the kept lines).
    pub sinogram: Sinogram<T>,
    pub kept_lines: LineSet<T>,
    pub dropped: Vec<LineReport>,
    pub inversion_iterations: usize,
}

/// Scattering-free absorption recovery: two collimated probes per line give
/// the X-ray transform of `sigma_a`, inverted by regularized least squares.
pub fn recover_sigma_a_scatterfree<T: Real>(
    oracle: &AlbedoOracle<T>,
    lines: &LineSet<T>,
    levels: (T, T),
    grid: &GridSpec<T>,
    params: &InversionParams<T>,
) -> Result<ScatterfreeOutput<T>> {
    let (v1, v2) = levels;
    if !(v1 > v2 && v2 > T::zero()) {
        return Err(Error::validation("need probe levels v1 > v2 > 0"));
    }
    let mut kept = Vec::new();
    let mut values = Vec::new();
    let mut dropped = Vec::new();
    for (i, line) in lines.lines().iter().enumerate() {
        let result = (|| -> Result<T> {
            let e1 = oracle.query_ray(v1, line.entry, line.direction)?;
            let e2 = oracle.query_ray(v2, line.entry, line.direction)?;
            let mu = recover_mu_line(e1, e2, v1, v2)?;
            if mu <= T::zero() {
                return Err(Error::Degenerate("nonpositive attenuation factor".into()));
            }
            Ok(-mu.ln())
        })();
        match result {
            Ok(v) => {
                kept.push(i);
                values.push(v);
            }
            Err(e) => dropped.push(LineReport {
                line_index: i,
                reason: e.to_string(),
            }),
        }
    }
    let kept_lines = lines.subset(&kept)?;
    let sinogram = Sinogram { values };
    let inv = invert_ls(
        InversionMode::Plain,
        &sinogram,
        &kept_lines,
        grid,
        params,
    )?;
    Ok(ScatterfreeOutput {
        field: inv.field,
        sinogram,
        kept_lines,
        dropped,
        inversion_iterations: inv.iterations,
    })
}

/// Scattering-free two-photon coefficient recovery with known `sigma_a`: one
/// collimated probe per line gives the attenuated X-ray transform
/// `A_b = mu(tau_+)/v(tau_+) - 1/v_in`, inverted with the same machinery.
pub fn recover_sigma_b_scatterfree<T: Real>(
    oracle: &AlbedoOracle<T>,
    sigma_a: &ScalarField<T>,
    lines: &LineSet<T>,
    v_in: T,
    grid: &GridSpec<T>,
    params: &InversionParams<T>,
) -> Result<ScatterfreeOutput<T>> {
    if v_in <= T::zero() {
        return Err(Error::validation("probe level must be positive"));
    }
    // known-attenuation line factors mu(tau_+) = exp(-X sigma_a)
    let xa = xray(sigma_a, lines, params.step)?;
    let mut kept = Vec::new();
    let mut values = Vec::new();
    let mut dropped = Vec::new();
    for (i, line) in lines.lines().iter().enumerate() {
        let result = (|| -> Result<T> {
            let v_exit = oracle.query_ray(v_in, line.entry, line.direction)?;
            if v_exit <= T::zero() {
                return Err(Error::Degenerate("nonpositive exit value".into()));
            }
            let mu = (-xa.values[i]).exp();
            Ok(mu / v_exit - v_in.recip())
        })();
        match result {
            Ok(v) => {
                kept.push(i);
                values.push(v);
            }
            Err(e) => dropped.push(LineReport {
                line_index: i,
                reason: e.to_string(),
            }),
        }
    }
    let kept_lines = lines.subset(&kept)?;
    let sinogram = Sinogram { values };
    let inv = invert_ls(
        InversionMode::Attenuated(sigma_a),
        &sinogram,
        &kept_lines,
        grid,
        params,
    )?;
    Ok(ScatterfreeOutput {
        field: inv.field,
        sinogram,
        kept_lines,
        dropped,
        inversion_iterations: inv.iterations,
    })
}
