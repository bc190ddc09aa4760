//! Convex domain geometry: ray/boundary intersections, chord quadrature,
//! boundary sampling and angular quadrature.

mod angular;
mod boundary;
mod domain;

pub use angular::AngularGrid;
pub use boundary::{boundary_sets, BoundaryClass, BoundaryNode, BoundarySampling};
pub use domain::{Domain, DomainKind, Sign};

use crate::error::Result;
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Uniform trapezoid discretization of a chord segment `[l0, l1]`.
///
/// The number of intervals is `ceil((l1 - l0)/h)`, so the actual spacing is
/// never larger than the requested step. Weights sum to `l1 - l0` exactly.
#[derive(Debug, Clone, Copy)]
pub struct ChordSteps<T> {
    pub start: T,
    pub dt: T,
    pub n_nodes: usize,
}

impl<T: Real> ChordSteps<T> {
    pub fn new(l0: T, l1: T, h: T) -> Self {
        let len = (l1 - l0).max(T::zero());
        if len == T::zero() {
            return Self {
                start: l0,
                dt: T::zero(),
                n_nodes: 1,
            };
        }
        let n = (len / h).ceil();
        let n = n.to_usize().unwrap_or(1).max(1);
        Self {
            start: l0,
            dt: len / T::from_usize(n).unwrap(),
            n_nodes: n + 1,
        }
    }

    #[inline(always)]
    pub fn node(&self, i: usize) -> T {
        self.start + self.dt * T::from_usize(i).unwrap()
    }

    /// Trapezoid weight of node `i`.
    #[inline(always)]
    pub fn weight(&self, i: usize) -> T {
        if self.n_nodes == 1 {
            T::zero()
        } else if i == 0 || i == self.n_nodes - 1 {
            self.dt * crate::scalar::real(0.5)
        } else {
            self.dt
        }
    }
}

/// Chord discretization of `[0, tau_-(x, theta)]` with trapezoid weights.
pub fn chord_quadrature<T: Real>(
    domain: &Domain<T>,
    x: Vec3<T>,
    theta: Vec3<T>,
    h: T,
) -> Result<(Vec<T>, Vec<T>)> {
    if h <= T::zero() {
        return Err(crate::error::Error::validation("chord step must be > 0"));
    }
    let tau = domain.exit_time(x, theta, Sign::Minus)?;
    let steps = ChordSteps::new(T::zero(), tau, h);
    let nodes = (0..steps.n_nodes).map(|i| steps.node(i)).collect();
    let weights = (0..steps.n_nodes).map(|i| steps.weight(i)).collect();
    Ok((nodes, weights))
}
