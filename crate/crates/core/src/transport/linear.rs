use super::field::RadianceField;
use super::kernel::{angular_mean, sup_abs_diff, sweep_all, Discretization};
use crate::coefficients::{BoundSource, BoundarySource, PhaseFunction, ScalarField};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Scattering context: nodal `kappa` plus the phase coupling, specialized for
/// isotropic tables where `K u = kappa * p0 * <u>`.
pub(crate) struct KernelCtx<T> {
    kappa_nodes: Vec<T>,
    mode: KMode<T>,
}

enum KMode<T> {
    Isotropic(T),
    /// Row-major `[j][i] = p(theta_i . theta_j) * w_i`.
    General(Vec<T>),
}

impl<T: Real> KernelCtx<T> {
    pub fn build(disc: &Discretization<T>, kernel: &PhaseFunction<T>) -> Self {
        let kappa_nodes = disc.sample(kernel.kappa());
        let mode = if kernel.is_isotropic() {
            KMode::Isotropic(kernel.eval_p(T::zero()))
        } else {
            let na = disc.n_angles();
            let mut pw = vec![T::zero(); na * na];
            for j in 0..na {
                for i in 0..na {
                    let c = disc.angles.direction(i).dot(disc.angles.direction(j));
                    pw[j * na + i] = kernel.eval_p(c) * disc.angles.weight(i);
                }
            }
            KMode::General(pw)
        };
        Self { kappa_nodes, mode }
    }

    /// Builds the volume scattering source `K u` on the grid. Returns `true`
    /// when the output is a single direction-shared grid.
    pub fn scatter(
        &self,
        disc: &Discretization<T>,
        u: &[T],
        mean_buf: &mut [T],
        out: &mut [T],
    ) -> bool {
        let n = disc.n_nodes();
        match &self.mode {
            KMode::Isotropic(p0) => {
                angular_mean(disc, u, mean_buf);
                for ((o, k), m) in out[..n].iter_mut().zip(&self.kappa_nodes).zip(mean_buf.iter())
                {
                    *o = *k * *p0 * *m;
                }
                true
            }
            KMode::General(pw) => {
                let na = disc.n_angles();
                out.iter_mut().for_each(|v| *v = T::zero());
                for j in 0..na {
                    let row = &pw[j * na..(j + 1) * na];
                    let chunk_start = j * n;
                    for i in 0..na {
                        let w = row[i];
                        if w == T::zero() {
                            continue;
                        }
                        let ui = &u[i * n..(i + 1) * n];
                        for (o, v) in out[chunk_start..chunk_start + n].iter_mut().zip(ui) {
                            *o += w * *v;
                        }
                    }
                    for (o, k) in out[chunk_start..chunk_start + n]
                        .iter_mut()
                        .zip(&self.kappa_nodes)
                    {
                        *o *= *k;
                    }
                }
                false
            }
        }
    }

    pub(crate) fn scatter_len(&self, disc: &Discretization<T>) -> usize {
        match self.mode {
            KMode::Isotropic(_) => disc.n_nodes(),
            KMode::General(_) => disc.n_nodes() * disc.n_angles(),
        }
    }
}

pub(crate) struct FixedPointOutput<T> {
    pub u: Vec<T>,
    pub iterations: usize,
    pub final_increment: T,
}

/// Source iteration `u <- H u + base` until the sup increment drops to
/// `tol`; `base` is the precomputed ballistic + volume-source term.
pub(crate) fn linear_fixed_point<T: Real>(
    disc: &Discretization<T>,
    att_nodes: &[T],
    kernel: Option<&KernelCtx<T>>,
    base: &[T],
    tol: T,
    max_iter: usize,
    warm: Option<Vec<T>>,
) -> Result<FixedPointOutput<T>> {
    let ctx = match kernel {
        None => {
            return Ok(FixedPointOutput {
                u: base.to_vec(),
                iterations: 1,
                final_increment: T::zero(),
            })
        }
        Some(c) => c,
    };
    let mut u = warm.unwrap_or_else(|| base.to_vec());
    let mut next = vec![T::zero(); u.len()];
    let mut mean_buf = vec![T::zero(); disc.n_nodes()];
    let mut scatter_buf = vec![T::zero(); ctx.scatter_len(disc)];
    for it in 1..=max_iter {
        let shared = ctx.scatter(disc, &u, &mut mean_buf, &mut scatter_buf);
        sweep_all(
            disc,
            att_nodes,
            Some((&scatter_buf, shared)),
            None,
            &mut next,
        );
        for (nv, b) in next.iter_mut().zip(base) {
            *nv += *b;
        }
        let inc = sup_abs_diff(&next, &u);
        std::mem::swap(&mut u, &mut next);
        if inc <= tol {
            return Ok(FixedPointOutput {
                u,
                iterations: it,
                final_increment: inc,
            });
        }
    }
    Err(Error::IterationCap(format!(
        "source iteration did not reach tol {tol:e} within {max_iter} sweeps"
    )))
}

/// Output of a frozen-coefficient linear solve.
pub struct LinearOutput<T> {
    pub field: RadianceField<T>,
    pub iterations: usize,
    pub final_increment: T,
}

/// Solves the linear transport problem with attenuation
/// `sigma_a + sigma_b |m|` and scattering `kernel` by source iteration.
/// Refuses when the scattering smallness `mu = tau_sup * sup k` reaches 1.
pub fn solve_linear<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    m: &ScalarField<T>,
    kernel: Option<&PhaseFunction<T>>,
    f: &BoundarySource<T>,
    tol: T,
) -> Result<LinearOutput<T>> {
    if tol <= T::zero() {
        return Err(Error::validation("linear solve tolerance must be > 0"));
    }
    let mu = disc.domain.max_chord() * kernel.map(|k| k.sup()).unwrap_or(T::zero());
    if mu >= T::one() {
        return Err(Error::Admissibility(format!(
            "scattering smallness mu = {mu} >= 1; the source iteration diverges"
        )));
    }
    let sa = disc.sample(sigma_a);
    let sb = disc.sample(sigma_b);
    let mn = disc.sample(m);
    let att = disc.attenuation_nodes(&sa, &sb, &mn);
    let bound = BoundSource::new(f, &disc.domain, &disc.angles)?;
    let mut base = vec![T::zero(); disc.n_nodes() * disc.n_angles()];
    sweep_all(disc, &att, None, Some(&bound), &mut base);
    let ctx = kernel.map(|k| KernelCtx::build(disc, k));
    let fp = linear_fixed_point(disc, &att, ctx.as_ref(), &base, tol, 100_000, None)?;
    let mut mean = vec![T::zero(); disc.n_nodes()];
    angular_mean(disc, &fp.u, &mut mean);
    Ok(LinearOutput {
        field: RadianceField::from_parts(disc.grid.clone(), disc.angles.clone(), fp.u, mean),
        iterations: fp.iterations,
        final_increment: fp.final_increment,
    })
}

/// Ballistic transport of the inflow data under attenuation
/// `sigma_a + sigma_b |m|` (the source term of the integral formulation).
pub fn apply_ballistic<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    m: &ScalarField<T>,
    f: &BoundarySource<T>,
) -> Result<RadianceField<T>> {
    let sa = disc.sample(sigma_a);
    let sb = disc.sample(sigma_b);
    let mn = disc.sample(m);
    let att = disc.attenuation_nodes(&sa, &sb, &mn);
    let bound = BoundSource::new(f, &disc.domain, &disc.angles)?;
    let mut u = vec![T::zero(); disc.n_nodes() * disc.n_angles()];
    sweep_all(disc, &att, None, Some(&bound), &mut u);
    let mut mean = vec![T::zero(); disc.n_nodes()];
    angular_mean(disc, &u, &mut mean);
    Ok(RadianceField::from_parts(
        disc.grid.clone(),
        disc.angles.clone(),
        u,
        mean,
    ))
}

/// One application of the scattering integral operator to a radiance field,
/// under attenuation `sigma_a + sigma_b |m|`.
pub fn apply_scattering<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    m: &ScalarField<T>,
    kernel: &PhaseFunction<T>,
    u: &RadianceField<T>,
) -> Result<RadianceField<T>> {
    if u.values().len() != disc.n_nodes() * disc.n_angles() {
        return Err(Error::validation(
            "radiance field layout does not match the discretization",
        ));
    }
    let sa = disc.sample(sigma_a);
    let sb = disc.sample(sigma_b);
    let mn = disc.sample(m);
    let att = disc.attenuation_nodes(&sa, &sb, &mn);
    let ctx = KernelCtx::build(disc, kernel);
    let mut mean_buf = vec![T::zero(); disc.n_nodes()];
    let mut scatter_buf = vec![T::zero(); ctx.scatter_len(disc)];
    let shared = ctx.scatter(disc, u.values(), &mut mean_buf, &mut scatter_buf);
    let mut out = vec![T::zero(); disc.n_nodes() * disc.n_angles()];
    sweep_all(disc, &att, Some((&scatter_buf, shared)), None, &mut out);
    let mut mean = vec![T::zero(); disc.n_nodes()];
    angular_mean(disc, &out, &mut mean);
    Ok(RadianceField::from_parts(
        disc.grid.clone(),
        disc.angles.clone(),
        out,
        mean,
    ))
}
