use super::{AngularGrid, Domain};
use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// Classification of a boundary node / direction pair by the sign of
/// `n(x) . theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClass {
    Inflow,
    Outflow,
    Tangent,
}

#[derive(Debug, Clone)]
pub struct BoundaryNode<T> {
    pub point: Vec3<T>,
    pub normal: Vec3<T>,
    /// Surface measure carried by the node.
    pub weight: T,
    /// Arc-length parameter on planar domains (ordering key for trace
    /// interpolation); zero on 3-D domains.
    pub param: T,
}

/// Boundary sampling paired with an angular grid; provides the inflow/outflow
/// split and the boundary measure `|n.theta| dmu dtheta`.
#[derive(Debug, Clone)]
pub struct BoundarySampling<T> {
    nodes: Vec<BoundaryNode<T>>,
    angles: AngularGrid<T>,
    tangent_band: T,
}

/// Samples the boundary with `resolution` nodes (per-axis scaled for product
/// shapes) and classifies every (node, direction) pair.
pub fn boundary_sets<T: Real>(
    domain: &Domain<T>,
    angles: &AngularGrid<T>,
    resolution: usize,
) -> Result<BoundarySampling<T>> {
    if resolution < 8 {
        return Err(Error::validation("boundary resolution must be >= 8"));
    }
    let nodes = sample_boundary(domain, resolution);
    Ok(BoundarySampling {
        nodes,
        angles: angles.clone(),
        tangent_band: real(1e-12),
    })
}

fn sample_boundary<T: Real>(domain: &Domain<T>, resolution: usize) -> Vec<BoundaryNode<T>> {
    use super::domain::DomainKind;
    let mut nodes = Vec::new();
    match *domain.kind() {
        DomainKind::Disk2 { center, radius } => {
            let tau = real::<T>(std::f64::consts::TAU);
            let n = T::from_usize(resolution).unwrap();
            let w = tau * radius / n;
            for i in 0..resolution {
                let a = tau * T::from_usize(i).unwrap() / n;
                let dir = Vec3::from_angle(a);
                nodes.push(BoundaryNode {
                    point: center + dir * radius,
                    normal: dir,
                    weight: w,
                    param: a * radius,
                });
            }
        }
        DomainKind::Rect2 { lo, hi } => {
            let w_len = hi.x - lo.x;
            let h_len = hi.y - lo.y;
            let perimeter = (w_len + h_len) * real::<T>(2.0);
            // sides walked counterclockwise, nodes at midpoint offsets
            let sides: [(Vec3<T>, Vec3<T>, Vec3<T>, T); 4] = [
                (lo, Vec3::xy(T::one(), T::zero()), Vec3::xy(T::zero(), -T::one()), w_len),
                (
                    Vec3::xy(hi.x, lo.y),
                    Vec3::xy(T::zero(), T::one()),
                    Vec3::xy(T::one(), T::zero()),
                    h_len,
                ),
                (hi, Vec3::xy(-T::one(), T::zero()), Vec3::xy(T::zero(), T::one()), w_len),
                (
                    Vec3::xy(lo.x, hi.y),
                    Vec3::xy(T::zero(), -T::one()),
                    Vec3::xy(-T::one(), T::zero()),
                    h_len,
                ),
            ];
            for (origin, along, normal, len) in sides {
                let frac = len / perimeter;
                let count = (T::from_usize(resolution).unwrap() * frac)
                    .round()
                    .to_usize()
                    .unwrap_or(1)
                    .max(1);
                let dw = len / T::from_usize(count).unwrap();
                for i in 0..count {
                    let offset = dw * (T::from_usize(i).unwrap() + real::<T>(0.5));
                    let p = origin + along * offset;
                    nodes.push(BoundaryNode {
                        point: p,
                        normal,
                        weight: dw,
                        param: domain.boundary_param(p),
                    });
                }
            }
            nodes.sort_by(|a, b| a.param.partial_cmp(&b.param).unwrap());
        }
        DomainKind::Ball3 { center, radius } => {
            let n_polar = resolution;
            let n_az = resolution * 2;
            let pi = real::<T>(std::f64::consts::PI);
            let tau = real::<T>(std::f64::consts::TAU);
            let np = T::from_usize(n_polar).unwrap();
            let na = T::from_usize(n_az).unwrap();
            for i in 0..n_polar {
                let a0 = pi * T::from_usize(i).unwrap() / np;
                let a1 = pi * T::from_usize(i + 1).unwrap() / np;
                let mid = (a0 + a1) * real::<T>(0.5);
                let band = radius * radius * tau * (a0.cos() - a1.cos()) / na;
                for j in 0..n_az {
                    let phi = tau * T::from_usize(j).unwrap() / na;
                    let dir = Vec3::new(mid.sin() * phi.cos(), mid.sin() * phi.sin(), mid.cos());
                    nodes.push(BoundaryNode {
                        point: center + dir * radius,
                        normal: dir,
                        weight: band,
                        param: T::zero(),
                    });
                }
            }
        }
    }
    nodes
}

impl<T: Real> BoundarySampling<T> {
    pub fn nodes(&self) -> &[BoundaryNode<T>] {
        &self.nodes
    }

    pub fn angles(&self) -> &AngularGrid<T> {
        &self.angles
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn classify(&self, node: usize, angle: usize) -> BoundaryClass {
        let nd = self.nodes[node].normal.dot(self.angles.direction(angle));
        if nd.abs() < self.tangent_band {
            BoundaryClass::Tangent
        } else if nd > T::zero() {
            BoundaryClass::Outflow
        } else {
            BoundaryClass::Inflow
        }
    }

    /// Measure weight `|n.theta| * (surface weight) * (angular weight)` of a
    /// pair; zero on the tangent band.
    pub fn xi_weight(&self, node: usize, angle: usize) -> T {
        let nd = self.nodes[node].normal.dot(self.angles.direction(angle));
        if nd.abs() < self.tangent_band {
            T::zero()
        } else {
            nd.abs() * self.nodes[node].weight * self.angles.weight(angle)
        }
    }

    /// Total measure of the outflow set.
    pub fn outflow_measure(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.nodes.len() {
            for j in 0..self.angles.len() {
                if self.classify(i, j) == BoundaryClass::Outflow {
                    acc += self.xi_weight(i, j);
                }
            }
        }
        acc
    }

    /// Index of the node nearest to a boundary point.
    pub fn nearest_node(&self, x: Vec3<T>) -> usize {
        let mut best = 0;
        let mut best_d = T::infinity();
        for (i, n) in self.nodes.iter().enumerate() {
            let d = (n.point - x).norm_sq();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}
