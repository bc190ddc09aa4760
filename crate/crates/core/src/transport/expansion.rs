use super::field::RadianceField;
use super::kernel::{angular_mean, sup_abs_diff, sweep_all, Discretization};
use super::linear::{linear_fixed_point, KernelCtx};
use super::nonlinear::{solve_nonlinear, NonlinearOutput, SolveSettings};
use crate::coefficients::{BoundSource, BoundarySource, PhaseFunction, ScalarField};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub struct ExpansionOutput<T> {
    pub u0: NonlinearOutput<T>,
    pub u1: RadianceField<T>,
    /// Iterations of the fixed point on the mean of the first-order term.
    pub inner_iterations: usize,
}

/// First two terms of the small-amplitude expansion for `f = f0 + delta f1`:
/// the background `u0` (nonlinear solve with `f0`) and the first-order term
/// `u1`, which solves the linear problem with attenuation frozen at the
/// background mean and the nonlocal volume source `-sigma_b <u1> u0`,
/// realized as a fixed point on `<u1>`.
pub fn expansion_terms<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    kernel: Option<&PhaseFunction<T>>,
    f0: &BoundarySource<T>,
    f1: &BoundarySource<T>,
    settings: &SolveSettings<T>,
) -> Result<ExpansionOutput<T>> {
    if f0.is_collimated() || f1.is_collimated() {
        return Err(Error::validation(
            "expansion terms are defined for angularly resolved sources",
        ));
    }
    let u0 = solve_nonlinear(disc, sigma_a, sigma_b, kernel, f0, settings)?;

    let sa = disc.sample(sigma_a);
    let sb = disc.sample(sigma_b);
    let att0 = disc.attenuation_nodes(&sa, &sb, u0.field.mean());
    let ctx = kernel.map(|k| KernelCtx::build(disc, k));
    let bound1 = BoundSource::new(f1, &disc.domain, &disc.angles)?;

    let n_nodes = disc.n_nodes();
    let n_total = n_nodes * disc.n_angles();
    let mut jf1 = vec![T::zero(); n_total];
    sweep_all(disc, &att0, None, Some(&bound1), &mut jf1);

    let mut m1 = vec![T::zero(); n_nodes];
    let mut m1_next = vec![T::zero(); n_nodes];
    let mut q = vec![T::zero(); n_total];
    let mut gq = vec![T::zero(); n_total];
    let mut base = vec![T::zero(); n_total];
    let mut warm: Option<Vec<T>> = None;
    let mut inner_total = 0usize;

    for _it in 0..settings.max_outer {
        // nonlocal source of the first-order equation
        for j in 0..disc.n_angles() {
            let u0j = &u0.field.values()[j * n_nodes..(j + 1) * n_nodes];
            let qj = &mut q[j * n_nodes..(j + 1) * n_nodes];
            for ((qv, u0v), (sbv, m1v)) in
                qj.iter_mut().zip(u0j).zip(sb.iter().zip(&m1))
            {
                *qv = -(*sbv) * *m1v * *u0v;
            }
        }
        sweep_all(disc, &att0, Some((&q, false)), None, &mut gq);
        for ((b, jf), g) in base.iter_mut().zip(&jf1).zip(&gq) {
            *b = *jf + *g;
        }
        let fp = linear_fixed_point(
            disc,
            &att0,
            ctx.as_ref(),
            &base,
            settings.inner_tol,
            settings.max_inner,
            warm.take(),
        )?;
        inner_total += fp.iterations;
        angular_mean(disc, &fp.u, &mut m1_next);
        let inc = sup_abs_diff(&m1_next, &m1);
        std::mem::swap(&mut m1, &mut m1_next);
        warm = Some(fp.u);
        if inc <= settings.outer_tol {
            let u1 = warm.take().unwrap();
            let mut mean = vec![T::zero(); n_nodes];
            angular_mean(disc, &u1, &mut mean);
            return Ok(ExpansionOutput {
                u0,
                u1: RadianceField::from_parts(disc.grid.clone(), disc.angles.clone(), u1, mean),
                inner_iterations: inner_total,
            });
        }
    }
    Err(Error::IterationCap(format!(
        "first-order mean fixed point stalled after {} iterations",
        settings.max_outer
    )))
}
