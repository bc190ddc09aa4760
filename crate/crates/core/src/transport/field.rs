use crate::coefficients::{GridSpec, ScalarField};
use crate::geometry::AngularGrid;
use crate::scalar::Real;

/// Radiance samples on (spatial grid node, angular node), angle-major, with
/// the consistent angular mean field.
#[derive(Debug, Clone)]
pub struct RadianceField<T> {
    grid: GridSpec<T>,
    angles: AngularGrid<T>,
    u: Vec<T>,
    mean: Vec<T>,
}

impl<T: Real> RadianceField<T> {
    pub(crate) fn from_parts(
        grid: GridSpec<T>,
        angles: AngularGrid<T>,
        u: Vec<T>,
        mean: Vec<T>,
    ) -> Self {
        debug_assert_eq!(u.len(), grid.n_nodes() * angles.len());
        debug_assert_eq!(mean.len(), grid.n_nodes());
        Self {
            grid,
            angles,
            u,
            mean,
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn angles(&self) -> &AngularGrid<T> {
        &self.angles
    }

    pub fn values(&self) -> &[T] {
        &self.u
    }

    #[inline]
    pub fn value(&self, node: usize, angle: usize) -> T {
        self.u[angle * self.grid.n_nodes() + node]
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    /// Mean field as an interpolable grid field.
    pub fn mean_field(&self) -> ScalarField<T> {
        ScalarField::from_values(self.grid.clone(), self.mean.clone()).expect("consistent grid")
    }

    /// Angular mean recomputed from `u` in fixed index order.
    pub fn recompute_mean(&self) -> Vec<T> {
        let n = self.grid.n_nodes();
        let mut out = vec![T::zero(); n];
        for j in 0..self.angles.len() {
            let w = self.angles.weight(j);
            for (o, v) in out.iter_mut().zip(&self.u[j * n..(j + 1) * n]) {
                *o += w * *v;
            }
        }
        out
    }

    pub fn min_value(&self) -> T {
        self.u.iter().fold(T::infinity(), |a, v| a.min(*v))
    }

    pub fn max_abs(&self) -> T {
        self.u.iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }

    /// Supremum over nodes of the angular mean of `|u|`.
    pub fn sup_mean_abs(&self) -> T {
        let n = self.grid.n_nodes();
        let mut best = T::zero();
        for node in 0..n {
            let mut acc = T::zero();
            for j in 0..self.angles.len() {
                acc += self.angles.weight(j) * self.u[j * n + node].abs();
            }
            best = best.max(acc);
        }
        best
    }
}
