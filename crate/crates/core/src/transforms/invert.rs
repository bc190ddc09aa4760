use super::lines::LineSet;
use super::Sinogram;
use crate::coefficients::field::{GridSampler, GridSamplerIdx};
use crate::coefficients::{GridSpec, ScalarField};
use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};
use rayon::prelude::*;

/// Forward model choice for the inversion.
pub enum InversionMode<'a, T> {
    Plain,
    Attenuated(&'a ScalarField<T>),
}

#[derive(Debug, Clone)]
pub struct InversionParams<T> {
    /// Tikhonov weight; `None` picks `1e-3` times the power-iteration scale
    /// of the normal operator.
    pub lambda: Option<T>,
    pub max_iters: usize,
    pub tol: T,
    /// Quadrature step of the discretized transform.
    pub step: T,
}

impl<T: Real> InversionParams<T> {
    pub fn with_step(step: T) -> Self {
        Self {
            lambda: None,
            max_iters: 500,
            tol: real(1e-8),
            step,
        }
    }
}

pub struct InversionOutput<T> {
    pub field: ScalarField<T>,
    pub iterations: usize,
    pub relative_gradient: f64,
    /// Regularized least-squares objective per iteration (monotone).
    pub objective_history: Vec<f64>,
    pub lambda: T,
}

/// Discretized transform: per-line trapezoid samples with optional
/// accumulated attenuation factors. The adjoint scatters through the exact
/// transpose of the multilinear interpolation footprint.
pub(crate) struct DiscreteTransform<'a, T> {
    lines: &'a LineSet<T>,
    grid: GridSpec<T>,
    /// Per line: (sample positions folded as flat params, trapezoid*mu weight).
    samples: Vec<Vec<(crate::vec3::Vec3<T>, T)>>,
}

impl<'a, T: Real> DiscreteTransform<'a, T> {
    pub fn new(
        lines: &'a LineSet<T>,
        grid: &GridSpec<T>,
        attenuation: Option<&ScalarField<T>>,
        step: T,
    ) -> Self {
        use crate::geometry::ChordSteps;
        let half = real::<T>(0.5);
        let samples = lines
            .lines()
            .par_iter()
            .map(|line| {
                let steps = ChordSteps::new(T::zero(), line.length, step);
                let mut out = Vec::with_capacity(steps.n_nodes);
                match attenuation {
                    None => {
                        for i in 0..steps.n_nodes {
                            out.push((line.point(steps.node(i)), steps.weight(i)));
                        }
                    }
                    Some(att) => {
                        let mut int_a = T::zero();
                        let mut prev_a = att.evaluate(line.entry);
                        out.push((line.entry, steps.weight(0)));
                        for i in 1..steps.n_nodes {
                            let p = line.point(steps.node(i));
                            let a = att.evaluate(p);
                            int_a += (prev_a + a) * steps.dt * half;
                            prev_a = a;
                            out.push((p, steps.weight(i) * (-int_a).exp()));
                        }
                    }
                }
                out
            })
            .collect();
        Self {
            lines,
            grid: grid.clone(),
            samples,
        }
    }

    pub fn forward(&self, g: &[T], out: &mut [T]) {
        let sampler_grid = self.grid.clone();
        out.par_iter_mut().enumerate().for_each(|(li, o)| {
            let sampler = GridSampler::new(&sampler_grid, g);
            let mut acc = T::zero();
            for (p, w) in &self.samples[li] {
                acc += *w * sampler.eval(*p);
            }
            *o = acc;
        });
    }

    /// Exact transpose of `forward`; sequential scatter in line order keeps
    /// the accumulation deterministic.
    pub fn adjoint(&self, y: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        let idx = GridSamplerIdx::new(&self.grid);
        for (li, samples) in self.samples.iter().enumerate() {
            let yv = y[li];
            if yv == T::zero() {
                continue;
            }
            for (p, w) in samples {
                if let Some(st) = idx.stencil(*p) {
                    for (i, sw) in st {
                        out[i] += yv * *w * sw;
                    }
                }
            }
        }
        let _ = self.lines;
    }

    pub fn n_rows(&self) -> usize {
        self.samples.len()
    }

    pub fn n_cols(&self) -> usize {
        self.grid.n_nodes()
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

/// Conjugate-gradient least squares on the Tikhonov-regularized normal
/// equations of the discretized transform; the output is clamped at zero.
pub fn invert_ls<T: Real>(
    mode: InversionMode<'_, T>,
    data: &Sinogram<T>,
    lines: &LineSet<T>,
    grid: &GridSpec<T>,
    params: &InversionParams<T>,
) -> Result<InversionOutput<T>> {
    if lines.is_empty() {
        return Err(Error::validation("line set is empty"));
    }
    if data.len() != lines.len() {
        return Err(Error::validation("sinogram length does not match line set"));
    }
    if params.lambda.map(|l| l < T::zero()).unwrap_or(false) {
        return Err(Error::validation("regularization weight must be >= 0"));
    }
    let attenuation = match mode {
        InversionMode::Plain => None,
        InversionMode::Attenuated(a) => Some(a),
    };
    let op = DiscreteTransform::new(lines, grid, attenuation, params.step);
    let n = op.n_cols();
    let m = op.n_rows();

    // gradient at zero
    let mut s = vec![T::zero(); n];
    op.adjoint(&data.values, &mut s);
    let gamma0 = dot(&s, &s);
    if gamma0 == T::zero() {
        return Ok(InversionOutput {
            field: ScalarField::zero(grid.clone()),
            iterations: 0,
            relative_gradient: 0.0,
            objective_history: Vec::new(),
            lambda: params.lambda.unwrap_or(T::zero()),
        });
    }

    let lambda = match params.lambda {
        Some(l) => l,
        None => real::<T>(1e-3) * normal_operator_scale(&op),
    };

    let mut x = vec![T::zero(); n];
    let mut r = data.values.clone();
    let mut p = s.clone();
    let mut q = vec![T::zero(); m];
    let mut gamma = gamma0;
    let mut history = Vec::new();
    let mut iterations = 0;
    for it in 1..=params.max_iters {
        op.forward(&p, &mut q);
        let denom = dot(&q, &q) + lambda * dot(&p, &p);
        if denom <= T::zero() {
            break;
        }
        let alpha = gamma / denom;
        for (xv, pv) in x.iter_mut().zip(&p) {
            *xv += alpha * *pv;
        }
        for (rv, qv) in r.iter_mut().zip(&q) {
            *rv -= alpha * *qv;
        }
        op.adjoint(&r, &mut s);
        for (sv, xv) in s.iter_mut().zip(&x) {
            *sv -= lambda * *xv;
        }
        let gamma_new = dot(&s, &s);
        let objective = to_f64(dot(&r, &r) + lambda * dot(&x, &x));
        history.push(objective);
        iterations = it;
        if (gamma_new / gamma0).sqrt() <= params.tol {
            gamma = gamma_new;
            break;
        }
        let beta = gamma_new / gamma;
        for (pv, sv) in p.iter_mut().zip(&s) {
            *pv = *sv + beta * *pv;
        }
        gamma = gamma_new;
    }

    let clamped: Vec<T> = x.iter().map(|v| v.max(T::zero())).collect();
    Ok(InversionOutput {
        field: ScalarField::from_values(grid.clone(), clamped)?,
        iterations,
        relative_gradient: to_f64((gamma / gamma0).sqrt()),
        objective_history: history,
        lambda,
    })
}

/// One adjoint application of the discretized transform: scatters sinogram
/// values back through the exact transpose of the forward footprint.
pub fn adjoint_apply<T: Real>(
    lines: &LineSet<T>,
    grid: &GridSpec<T>,
    attenuation: Option<&ScalarField<T>>,
    step: T,
    y: &[T],
) -> Vec<T> {
    let op = DiscreteTransform::new(lines, grid, attenuation, step);
    let mut out = vec![T::zero(); op.n_cols()];
    op.adjoint(y, &mut out);
    out
}

/// Five power iterations estimating the spectral scale of the normal
/// operator, used for the default regularization weight.
fn normal_operator_scale<T: Real>(op: &DiscreteTransform<'_, T>) -> T {
    let n = op.n_cols();
    let m = op.n_rows();
    let mut v: Vec<T> = (0..n)
        .map(|i| {
            // deterministic pseudo-random start
            let h = (i as u64).wrapping_mul(0x9e3779b97f4a7c15).rotate_left(31);
            real::<T>(((h >> 11) as f64) / ((1u64 << 53) as f64) + 0.5)
        })
        .collect();
    let mut av = vec![T::zero(); m];
    let mut w = vec![T::zero(); n];
    let mut scale = T::one();
    for _ in 0..5 {
        let norm = dot(&v, &v).sqrt();
        if norm == T::zero() {
            return T::one();
        }
        v.iter_mut().for_each(|x| *x /= norm);
        op.forward(&v, &mut av);
        op.adjoint(&av, &mut w);
        scale = dot(&w, &w).sqrt();
        std::mem::swap(&mut v, &mut w);
    }
    scale.max(T::epsilon())
}
