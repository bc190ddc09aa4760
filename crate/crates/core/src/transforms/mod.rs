//! X-ray and attenuated X-ray transforms over structured line sets, with a
//! matrix-free regularized least-squares inverter.

mod invert;
mod lines;

pub use invert::{adjoint_apply, invert_ls, InversionMode, InversionOutput, InversionParams};
pub use lines::{Line, LineSet};

use crate::coefficients::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::ChordSteps;
use crate::scalar::{real, Real};

/// Per-line transform values (field units times length).
#[derive(Debug, Clone)]
pub struct Sinogram<T> {
    pub values: Vec<T>,
}

impl<T: Real> Sinogram<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Line integrals of `field` along every chord, composite trapezoid at the
/// given step.
pub fn xray<T: Real>(field: &ScalarField<T>, lines: &LineSet<T>, step: T) -> Result<Sinogram<T>> {
    if step <= T::zero() {
        return Err(Error::validation("transform step must be > 0"));
    }
    let half = real::<T>(0.5);
    let values = lines
        .lines()
        .iter()
        .map(|line| {
            let steps = ChordSteps::new(T::zero(), line.length, step);
            let mut acc = T::zero();
            let mut prev = field.evaluate(line.entry);
            for i in 1..steps.n_nodes {
                let v = field.evaluate(line.point(steps.node(i)));
                acc += (prev + v) * steps.dt * half;
                prev = v;
            }
            acc
        })
        .collect();
    Ok(Sinogram { values })
}

/// Attenuated line integrals `integral mu(t) field(t) dt` with
/// `mu(t) = exp(-integral_0^t attenuation)`, both integrals marched on the
/// same trapezoid nodes.
pub fn attenuated_xray<T: Real>(
    field: &ScalarField<T>,
    attenuation: &ScalarField<T>,
    lines: &LineSet<T>,
    step: T,
) -> Result<Sinogram<T>> {
    if step <= T::zero() {
        return Err(Error::validation("transform step must be > 0"));
    }
    let half = real::<T>(0.5);
    let values = lines
        .lines()
        .iter()
        .map(|line| {
            let steps = ChordSteps::new(T::zero(), line.length, step);
            let mut int_a = T::zero();
            let mut prev_a = attenuation.evaluate(line.entry);
            let mut acc = T::zero();
            let mut prev_g = field.evaluate(line.entry); // mu(0) = 1
            for i in 1..steps.n_nodes {
                let p = line.point(steps.node(i));
                let a = attenuation.evaluate(p);
                int_a += (prev_a + a) * steps.dt * half;
                prev_a = a;
                let g = (-int_a).exp() * field.evaluate(p);
                acc += (prev_g + g) * steps.dt * half;
                prev_g = g;
            }
            acc
        })
        .collect();
    Ok(Sinogram { values })
}
