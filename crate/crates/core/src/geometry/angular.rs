use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// Quadrature nodes on the unit sphere with weights normalized to sum 1
/// (the angular measure in all averages is the normalized surface measure).
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid<T> {
    directions: Vec<Vec3<T>>,
    weights: Vec<T>,
    dim: usize,
}

impl<T: Real> AngularGrid<T> {
    /// Equispaced nodes on S^1 with equal weights `1/n`; `n` must be even so
    /// the grid is antipodally closed.
    pub fn s1(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::validation(
                "S^1 grid needs an even node count >= 4 for antipodal closure",
            ));
        }
        let w = T::one() / T::from_usize(n).unwrap();
        let tau = real::<T>(std::f64::consts::TAU);
        let directions = (0..n)
            .map(|i| Vec3::from_angle(tau * T::from_usize(i).unwrap() / T::from_usize(n).unwrap()))
            .collect();
        Ok(Self {
            directions,
            weights: vec![w; n],
            dim: 2,
        })
    }

    /// Latitude-longitude product grid on S^2: polar midpoints with exact
    /// band-area weights, uniform azimuth. `n_azimuth` must be even and the
    /// polar midpoint layout is equator-symmetric, so the grid is antipodally
    /// closed. Weights sum to 1 exactly by construction.
    pub fn s2(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar < 2 || n_azimuth < 4 || n_azimuth % 2 != 0 {
            return Err(Error::validation(
                "S^2 grid needs n_polar >= 2 and even n_azimuth >= 4",
            ));
        }
        let pi = real::<T>(std::f64::consts::PI);
        let tau = real::<T>(std::f64::consts::TAU);
        let np = T::from_usize(n_polar).unwrap();
        let na = T::from_usize(n_azimuth).unwrap();
        let mut directions = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for i in 0..n_polar {
            let a0 = pi * T::from_usize(i).unwrap() / np;
            let a1 = pi * T::from_usize(i + 1).unwrap() / np;
            let mid = (a0 + a1) * real::<T>(0.5);
            // band area fraction of the unit sphere: (cos a0 - cos a1)/2,
            // split uniformly over the azimuth nodes
            let band = (a0.cos() - a1.cos()) * real::<T>(0.5) / na;
            for j in 0..n_azimuth {
                let phi = tau * T::from_usize(j).unwrap() / na;
                directions.push(Vec3::new(
                    mid.sin() * phi.cos(),
                    mid.sin() * phi.sin(),
                    mid.cos(),
                ));
                weights.push(band);
            }
        }
        Ok(Self {
            directions,
            weights,
            dim: 3,
        })
    }

    /// Single-direction grid with weight 1; represents the exact collimated
    /// delta source rather than a quadrature rule.
    pub fn collimated(theta: Vec3<T>, dim: usize) -> Self {
        Self {
            directions: vec![theta.normalized()],
            weights: vec![T::one()],
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline(always)]
    pub fn direction(&self, j: usize) -> Vec3<T> {
        self.directions[j]
    }

    #[inline(always)]
    pub fn weight(&self, j: usize) -> T {
        self.weights[j]
    }

    pub fn directions(&self) -> &[Vec3<T>] {
        &self.directions
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Angular average in fixed index order.
    pub fn mean(&self, values: &[T]) -> T {
        let mut acc = T::zero();
        for (w, v) in self.weights.iter().zip(values) {
            acc += *w * *v;
        }
        acc
    }

    /// Index of the node antipodal to `j`, when present.
    pub fn antipode(&self, j: usize) -> Option<usize> {
        let target = -self.directions[j];
        let tol = real::<T>(1e-10);
        self.directions
            .iter()
            .position(|d| (*d - target).norm() < tol)
    }

    /// Index of the node closest to `theta`.
    pub fn nearest(&self, theta: Vec3<T>) -> usize {
        let mut best = 0;
        let mut best_dot = T::neg_infinity();
        for (j, d) in self.directions.iter().enumerate() {
            let dd = d.dot(theta);
            if dd > best_dot {
                best_dot = dd;
                best = j;
            }
        }
        best
    }
}
