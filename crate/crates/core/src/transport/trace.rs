use super::field::RadianceField;
use super::kernel::{sweep_point, Discretization};
use super::linear::KernelCtx;
use super::nonlinear::{solve_nonlinear, NonlinearOutput, SolveSettings};
use crate::coefficients::field::GridSampler;
use crate::coefficients::{BoundSource, BoundarySource, PhaseFunction, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::{boundary_sets, AngularGrid, BoundaryClass, BoundaryNode, Domain};
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use rayon::prelude::*;

/// Outflow radiance samples on boundary nodes; inflow and tangent pairs hold
/// zero. Values are angle-major like `RadianceField`.
#[derive(Debug, Clone)]
pub struct BoundaryTrace<T> {
    domain: Domain<T>,
    nodes: Vec<BoundaryNode<T>>,
    angles: AngularGrid<T>,
    values: Vec<T>,
}

impl<T: Real> BoundaryTrace<T> {
    pub fn nodes(&self) -> &[BoundaryNode<T>] {
        &self.nodes
    }

    pub fn angles(&self) -> &AngularGrid<T> {
        &self.angles
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn value(&self, node: usize, angle: usize) -> T {
        self.values[angle * self.nodes.len() + node]
    }

    pub fn classify(&self, node: usize, angle: usize) -> BoundaryClass {
        let nd = self.nodes[node].normal.dot(self.angles.direction(angle));
        if nd.abs() < real(1e-12) {
            BoundaryClass::Tangent
        } else if nd > T::zero() {
            BoundaryClass::Outflow
        } else {
            BoundaryClass::Inflow
        }
    }

    pub fn xi_weight(&self, node: usize, angle: usize) -> T {
        let nd = self.nodes[node].normal.dot(self.angles.direction(angle));
        if nd.abs() < real(1e-12) {
            T::zero()
        } else {
            nd.abs() * self.nodes[node].weight * self.angles.weight(angle)
        }
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |a, v| a.min(*v))
    }

    /// Trace value at an arbitrary boundary point: nearest nodes along the
    /// 1-D boundary parametrization with linear interpolation on planar
    /// domains, nearest node on 3-D domains.
    pub fn value_at(&self, x: Vec3<T>, angle: usize) -> T {
        let n = self.nodes.len();
        if self.domain.dim() == 3 {
            let b = self.nearest_node(x);
            return self.value(b, angle);
        }
        let p = self.domain.boundary_param(x);
        let total = self.domain.perimeter();
        // nodes are sorted by param; find the bracketing pair (cyclic)
        let idx = self
            .nodes
            .partition_point(|nd| nd.param < p);
        let (i0, i1) = if idx == 0 || idx == n {
            (n - 1, 0)
        } else {
            (idx - 1, idx)
        };
        let p0 = self.nodes[i0].param;
        let p1 = self.nodes[i1].param;
        let gap = if i1 == 0 { p1 + total - p0 } else { p1 - p0 };
        let off = if p < p0 { p + total - p0 } else { p - p0 };
        let t = if gap > T::zero() { off / gap } else { T::zero() };
        self.value(i0, angle) * (T::one() - t) + self.value(i1, angle) * t
    }

    fn nearest_node(&self, x: Vec3<T>) -> usize {
        let mut best = 0;
        let mut best_d = T::infinity();
        for (i, nd) in self.nodes.iter().enumerate() {
            let d = (nd.point - x).norm_sq();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Evaluates the outflow trace of a converged radiance field on a boundary
/// sampling of the given resolution.
pub fn trace_field<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    kernel: Option<&PhaseFunction<T>>,
    f: &BoundarySource<T>,
    field: &RadianceField<T>,
    resolution: usize,
) -> Result<BoundaryTrace<T>> {
    let tdisc = Discretization {
        domain: disc.domain.clone(),
        grid: disc.grid.clone(),
        angles: field.angles().clone(),
        chord_step: disc.chord_step,
    };
    let sampling = boundary_sets(&tdisc.domain, &tdisc.angles, resolution)?;
    let state = TraceState::prepare(&tdisc, sigma_a, sigma_b, kernel, f, field)?;
    let nodes: Vec<BoundaryNode<T>> = sampling.nodes().to_vec();
    let nb = nodes.len();
    let na = tdisc.angles.len();
    let mut values = vec![T::zero(); nb * na];
    values
        .par_chunks_mut(nb)
        .enumerate()
        .for_each(|(j, chunk)| {
            let theta = tdisc.angles.direction(j);
            for (b, out) in chunk.iter_mut().enumerate() {
                let nd = nodes[b].normal.dot(theta);
                if nd > real(1e-12) {
                    *out = state.eval(&tdisc, nodes[b].point, theta, j);
                }
            }
        });
    Ok(BoundaryTrace {
        domain: tdisc.domain.clone(),
        nodes,
        angles: tdisc.angles.clone(),
        values,
    })
}

/// Trace of the converged field at one exact boundary point and grid
/// direction, bypassing boundary-node interpolation.
pub fn trace_at<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    kernel: Option<&PhaseFunction<T>>,
    f: &BoundarySource<T>,
    field: &RadianceField<T>,
    x: Vec3<T>,
    angle: usize,
) -> Result<T> {
    let tdisc = Discretization {
        domain: disc.domain.clone(),
        grid: disc.grid.clone(),
        angles: field.angles().clone(),
        chord_step: disc.chord_step,
    };
    let state = TraceState::prepare(&tdisc, sigma_a, sigma_b, kernel, f, field)?;
    Ok(state.eval(&tdisc, x, tdisc.angles.direction(angle), angle))
}

/// Precomputed attenuation/scatter grids for trace evaluation.
pub(crate) struct TraceState<'a, T> {
    att: Vec<T>,
    scatter: Option<(Vec<T>, bool)>,
    bound: BoundSource<'a, T>,
    n_nodes: usize,
}

impl<'a, T: Real> TraceState<'a, T> {
    pub(crate) fn prepare(
        disc: &Discretization<T>,
        sigma_a: &ScalarField<T>,
        sigma_b: &ScalarField<T>,
        kernel: Option<&PhaseFunction<T>>,
        f: &'a BoundarySource<T>,
        field: &RadianceField<T>,
    ) -> Result<Self> {
        if field.angles().len() != disc.n_angles() {
            return Err(Error::validation(
                "radiance field angular layout does not match the discretization",
            ));
        }
        let sa = disc.sample(sigma_a);
        let sb = disc.sample(sigma_b);
        let att = disc.attenuation_nodes(&sa, &sb, field.mean());
        let scatter = match kernel {
            Some(k) => {
                let ctx = KernelCtx::build(disc, k);
                let mut mean_buf = vec![T::zero(); disc.n_nodes()];
                let mut buf = vec![T::zero(); ctx.scatter_len(disc)];
                let shared = ctx.scatter(disc, field.values(), &mut mean_buf, &mut buf);
                Some((buf, shared))
            }
            None => None,
        };
        let bound = BoundSource::new(f, &disc.domain, field.angles())?;
        Ok(Self {
            att,
            scatter,
            bound,
            n_nodes: disc.n_nodes(),
        })
    }

    pub(crate) fn eval(
        &self,
        disc: &Discretization<T>,
        x: Vec3<T>,
        theta: Vec3<T>,
        angle: usize,
    ) -> T {
        let att = GridSampler::new(&disc.grid, &self.att);
        let src = self.scatter.as_ref().map(|(buf, shared)| {
            let s = if *shared {
                &buf[..self.n_nodes]
            } else {
                &buf[angle * self.n_nodes..(angle + 1) * self.n_nodes]
            };
            GridSampler::new(&disc.grid, s)
        });
        sweep_point(
            &disc.domain,
            &att,
            src.as_ref(),
            Some((&self.bound, theta)),
            x,
            theta,
            disc.chord_step,
        )
    }
}

/// Full albedo measurement: nonlinear solve followed by the outflow trace.
pub fn albedo<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    kernel: Option<&PhaseFunction<T>>,
    f: &BoundarySource<T>,
    settings: &SolveSettings<T>,
    boundary_resolution: usize,
) -> Result<(BoundaryTrace<T>, NonlinearOutput<T>)> {
    let solution = solve_nonlinear(disc, sigma_a, sigma_b, kernel, f, settings)?;
    let trace = trace_field(
        disc,
        sigma_a,
        sigma_b,
        kernel,
        f,
        &solution.field,
        boundary_resolution,
    )?;
    Ok((trace, solution))
}
