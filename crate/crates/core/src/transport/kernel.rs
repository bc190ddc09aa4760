use crate::coefficients::field::GridSampler;
use crate::coefficients::{BoundSource, GridSpec, ScalarField};
use crate::geometry::{AngularGrid, ChordSteps, Domain};
use crate::scalar::Real;
use crate::vec3::Vec3;
use rayon::prelude::*;

/// Spatial/angular discretization shared by the transport solvers.
///
/// The spatial grid covers the domain's bounding box; nodes outside the
/// domain receive the natural continuation of the solution along their
/// backtraced ray (the chord integrals clip to the domain), which keeps the
/// interpolation stencils near the boundary consistent.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub domain: Domain<T>,
    pub grid: GridSpec<T>,
    pub angles: AngularGrid<T>,
    pub chord_step: T,
}

impl<T: Real> Discretization<T> {
    /// Grid with `n` nodes per axis over the bounding box; chord step
    /// defaults to half the grid spacing.
    pub fn new(domain: Domain<T>, n: usize, angles: AngularGrid<T>) -> Self {
        let grid = GridSpec::covering(&domain, n);
        let chord_step = grid.min_spacing() * crate::scalar::real(0.5);
        Self {
            domain,
            grid,
            angles,
            chord_step,
        }
    }

    pub fn with_chord_step(mut self, step: T) -> Self {
        self.chord_step = step;
        self
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    /// Coefficient field resampled at the grid nodes.
    pub fn sample(&self, field: &ScalarField<T>) -> Vec<T> {
        (0..self.grid.n_nodes())
            .map(|i| field.evaluate(self.grid.node(i)))
            .collect()
    }

    /// Nodal attenuation `sigma_a + sigma_b * |m|`.
    pub(crate) fn attenuation_nodes(&self, sa: &[T], sb: &[T], m: &[T]) -> Vec<T> {
        sa.iter()
            .zip(sb)
            .zip(m)
            .map(|((a, b), mm)| *a + *b * mm.abs())
            .collect()
    }
}

/// Transported value at `(x, theta)`: chord quadrature of the attenuated
/// volume source plus the attenuated boundary term,
/// `integral exp(-A(l)) q(x - l theta) dl + f(entry) exp(-A(tau))`.
///
/// The running attenuation and the outer integral share the same trapezoid
/// nodes. Rays that miss the domain contribute zero.
#[inline]
pub(crate) fn sweep_point<T: Real>(
    domain: &Domain<T>,
    att: &GridSampler<'_, T>,
    src: Option<&GridSampler<'_, T>>,
    boundary: Option<(&BoundSource<'_, T>, Vec3<T>)>,
    x: Vec3<T>,
    theta: Vec3<T>,
    step: T,
) -> T {
    let (l0, l1) = match domain.backward_interval(x, theta) {
        Some(iv) => iv,
        None => {
            // upstream of the domain: the inflow value rides along unattenuated,
            // which keeps interpolation stencils near the entry boundary consistent
            if let Some((f, dir)) = boundary {
                if let Some((t0, _)) = domain.line_interval(x, theta) {
                    return f.eval(x + theta * t0, dir);
                }
            }
            return T::zero();
        }
    };
    let steps = ChordSteps::new(l0, l1, step);
    let half = crate::scalar::real::<T>(0.5);
    let mut attenuation = T::zero();
    let mut prev_a = att.eval(x - theta * l0);
    let mut integral = T::zero();
    let mut prev_g = match src {
        Some(s) => s.eval(x - theta * l0),
        None => T::zero(),
    };
    for k in 1..steps.n_nodes {
        let y = x - theta * steps.node(k);
        let a = att.eval(y);
        attenuation += (prev_a + a) * steps.dt * half;
        prev_a = a;
        if let Some(s) = src {
            let g = (-attenuation).exp() * s.eval(y);
            integral += (prev_g + g) * steps.dt * half;
            prev_g = g;
        }
    }
    let mut out = integral;
    if let Some((f, dir)) = boundary {
        out += f.eval(x - theta * l1, dir) * (-attenuation).exp();
    }
    out
}

/// One transport sweep over every (node, direction) pair. `scatter` holds the
/// per-direction volume source (a single shared grid when `shared` is set,
/// e.g. for isotropic kernels). Output is angle-major, matching `u` layout.
///
/// Work is split into fixed-size chunks of the flattened index space so both
/// many-direction and collimated solves parallelize; every cell is computed
/// independently, so results do not depend on the thread count.
pub(crate) fn sweep_all<T: Real>(
    disc: &Discretization<T>,
    att_nodes: &[T],
    scatter: Option<(&[T], bool)>,
    boundary: Option<&BoundSource<'_, T>>,
    out: &mut [T],
) {
    let n_nodes = disc.n_nodes();
    const CHUNK: usize = 2048;
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
        let att = GridSampler::new(&disc.grid, att_nodes);
        let mut current_j = usize::MAX;
        let mut theta = Vec3::zero();
        let mut src_sampler: Option<GridSampler<'_, T>> = None;
        for (off, value) in chunk.iter_mut().enumerate() {
            let g = ci * CHUNK + off;
            let j = g / n_nodes;
            let node = g % n_nodes;
            if j != current_j {
                current_j = j;
                theta = disc.angles.direction(j);
                src_sampler = scatter.map(|(buf, shared)| {
                    let s = if shared {
                        &buf[..n_nodes]
                    } else {
                        &buf[j * n_nodes..(j + 1) * n_nodes]
                    };
                    GridSampler::new(&disc.grid, s)
                });
            }
            *value = sweep_point(
                &disc.domain,
                &att,
                src_sampler.as_ref(),
                boundary.map(|b| (b, theta)),
                disc.grid.node(node),
                theta,
                disc.chord_step,
            );
        }
    });
}

/// Angular mean per node, summed in fixed direction order.
pub(crate) fn angular_mean<T: Real>(disc: &Discretization<T>, u: &[T], out: &mut [T]) {
    let n_nodes = disc.n_nodes();
    out.iter_mut().for_each(|v| *v = T::zero());
    for j in 0..disc.n_angles() {
        let w = disc.angles.weight(j);
        let slice = &u[j * n_nodes..(j + 1) * n_nodes];
        for (o, s) in out.iter_mut().zip(slice) {
            *o += w * *s;
        }
    }
}

pub(crate) fn sup_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).abs()))
}

pub(crate) fn sup_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}
