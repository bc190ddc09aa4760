use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// Axis-aligned interpolation grid. Planar grids carry `shape[2] == 1` and
/// ignore the `z` coordinate entirely.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub lo: Vec3<T>,
    pub hi: Vec3<T>,
    pub shape: [usize; 3],
}

impl<T: Real> GridSpec<T> {
    pub fn planar(lo: Vec3<T>, hi: Vec3<T>, shape: [usize; 2]) -> Self {
        assert!(shape[0] >= 2 && shape[1] >= 2);
        Self {
            lo: Vec3::xy(lo.x, lo.y),
            hi: Vec3::xy(hi.x, hi.y),
            shape: [shape[0], shape[1], 1],
        }
    }

    pub fn volumetric(lo: Vec3<T>, hi: Vec3<T>, shape: [usize; 3]) -> Self {
        assert!(shape.iter().all(|&n| n >= 2));
        Self { lo, hi, shape }
    }

    /// Grid over the bounding box of a domain with `n` nodes per axis.
    pub fn covering(domain: &Domain<T>, n: usize) -> Self {
        let (lo, hi) = domain.bounding_box();
        if domain.dim() == 2 {
            Self::planar(lo, hi, [n, n])
        } else {
            Self::volumetric(lo, hi, [n, n, n])
        }
    }

    pub fn is_planar(&self) -> bool {
        self.shape[2] == 1
    }

    pub fn n_nodes(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn spacing(&self, axis: usize) -> T {
        let n = self.shape[axis];
        if n <= 1 {
            T::zero()
        } else {
            (self.hi.component(axis) - self.lo.component(axis)) / T::from_usize(n - 1).unwrap()
        }
    }

    /// Smallest nonzero axis spacing.
    pub fn min_spacing(&self) -> T {
        let mut s = T::infinity();
        for axis in 0..3 {
            if self.shape[axis] > 1 {
                s = s.min(self.spacing(axis));
            }
        }
        s
    }

    #[inline(always)]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.shape[1] + j) * self.shape[0] + i
    }

    pub fn node(&self, idx: usize) -> Vec3<T> {
        let i = idx % self.shape[0];
        let j = (idx / self.shape[0]) % self.shape[1];
        let k = idx / (self.shape[0] * self.shape[1]);
        Vec3::new(
            self.lo.x + self.spacing(0) * T::from_usize(i).unwrap(),
            self.lo.y + self.spacing(1) * T::from_usize(j).unwrap(),
            self.lo.z + self.spacing(2) * T::from_usize(k).unwrap(),
        )
    }
}

/// Multilinear evaluation over borrowed grid values; zero outside the box.
pub(crate) struct GridSampler<'a, T> {
    lo: Vec3<T>,
    inv_d: Vec3<T>,
    nx: usize,
    ny: usize,
    nz: usize,
    values: &'a [T],
    edge_tol: T,
}

impl<'a, T: Real> GridSampler<'a, T> {
    pub fn new(spec: &GridSpec<T>, values: &'a [T]) -> Self {
        debug_assert_eq!(values.len(), spec.n_nodes());
        let inv = |axis: usize| {
            let s = spec.spacing(axis);
            if s > T::zero() {
                T::one() / s
            } else {
                T::zero()
            }
        };
        Self {
            lo: spec.lo,
            inv_d: Vec3::new(inv(0), inv(1), inv(2)),
            nx: spec.shape[0],
            ny: spec.shape[1],
            nz: spec.shape[2],
            values,
            edge_tol: real(1e-9),
        }
    }

    #[inline(always)]
    fn axis_coord(&self, p: T, lo: T, inv: T, n: usize) -> Option<(usize, T)> {
        if n == 1 {
            return Some((0, T::zero()));
        }
        let f = (p - lo) * inv;
        let top = T::from_usize(n - 1).unwrap();
        if f < -self.edge_tol || f > top + self.edge_tol {
            return None;
        }
        let f = f.max(T::zero()).min(top);
        let mut i = f.floor().to_usize().unwrap_or(0);
        if i >= n - 1 {
            i = n - 2;
        }
        Some((i, f - T::from_usize(i).unwrap()))
    }

    #[inline(always)]
    pub fn eval(&self, p: Vec3<T>) -> T {
        let (i, tx) = match self.axis_coord(p.x, self.lo.x, self.inv_d.x, self.nx) {
            Some(v) => v,
            None => return T::zero(),
        };
        let (j, ty) = match self.axis_coord(p.y, self.lo.y, self.inv_d.y, self.ny) {
            Some(v) => v,
            None => return T::zero(),
        };
        let one = T::one();
        if self.nz == 1 {
            let base = j * self.nx + i;
            let v00 = self.values[base];
            let v10 = self.values[base + 1];
            let v01 = self.values[base + self.nx];
            let v11 = self.values[base + self.nx + 1];
            let a = v00 * (one - tx) + v10 * tx;
            let b = v01 * (one - tx) + v11 * tx;
            a * (one - ty) + b * ty
        } else {
            let (k, tz) = match self.axis_coord(p.z, self.lo.z, self.inv_d.z, self.nz) {
                Some(v) => v,
                None => return T::zero(),
            };
            let plane = self.nx * self.ny;
            let base = (k * self.ny + j) * self.nx + i;
            let f = |b: usize| {
                let v00 = self.values[b];
                let v10 = self.values[b + 1];
                let v01 = self.values[b + self.nx];
                let v11 = self.values[b + self.nx + 1];
                let a = v00 * (one - tx) + v10 * tx;
                let c = v01 * (one - tx) + v11 * tx;
                a * (one - ty) + c * ty
            };
            f(base) * (one - tz) + f(base + plane) * tz
        }
    }

    /// Multilinear scatter: the exact transpose of `eval`, accumulating
    /// `value` into the stencil of `p`. Used by the transform adjoint.
    #[inline(always)]
    pub fn scatter(spec: &GridSpec<T>, out: &mut [T], p: Vec3<T>, value: T) {
        let sampler = GridSamplerIdx::new(spec);
        if let Some(st) = sampler.stencil(p) {
            for (idx, w) in st {
                out[idx] += value * w;
            }
        }
    }
}

/// Stencil enumeration used by the adjoint scatter.
pub(crate) struct GridSamplerIdx<T> {
    lo: Vec3<T>,
    inv_d: Vec3<T>,
    nx: usize,
    ny: usize,
    nz: usize,
    edge_tol: T,
}

impl<T: Real> GridSamplerIdx<T> {
    pub fn new(spec: &GridSpec<T>) -> Self {
        let inv = |axis: usize| {
            let s = spec.spacing(axis);
            if s > T::zero() {
                T::one() / s
            } else {
                T::zero()
            }
        };
        Self {
            lo: spec.lo,
            inv_d: Vec3::new(inv(0), inv(1), inv(2)),
            nx: spec.shape[0],
            ny: spec.shape[1],
            nz: spec.shape[2],
            edge_tol: real(1e-9),
        }
    }

    #[inline(always)]
    fn axis_coord(&self, p: T, lo: T, inv: T, n: usize) -> Option<(usize, T)> {
        if n == 1 {
            return Some((0, T::zero()));
        }
        let f = (p - lo) * inv;
        let top = T::from_usize(n - 1).unwrap();
        if f < -self.edge_tol || f > top + self.edge_tol {
            return None;
        }
        let f = f.max(T::zero()).min(top);
        let mut i = f.floor().to_usize().unwrap_or(0);
        if i >= n - 1 {
            i = n - 2;
        }
        Some((i, f - T::from_usize(i).unwrap()))
    }

    /// Up to 8 (index, weight) pairs of the multilinear stencil at `p`.
    pub fn stencil(&self, p: Vec3<T>) -> Option<Vec<(usize, T)>> {
        let (i, tx) = self.axis_coord(p.x, self.lo.x, self.inv_d.x, self.nx)?;
        let (j, ty) = self.axis_coord(p.y, self.lo.y, self.inv_d.y, self.ny)?;
        let one = T::one();
        let mut out = Vec::with_capacity(8);
        if self.nz == 1 {
            let base = j * self.nx + i;
            out.push((base, (one - tx) * (one - ty)));
            out.push((base + 1, tx * (one - ty)));
            out.push((base + self.nx, (one - tx) * ty));
            out.push((base + self.nx + 1, tx * ty));
        } else {
            let (k, tz) = self.axis_coord(p.z, self.lo.z, self.inv_d.z, self.nz)?;
            let plane = self.nx * self.ny;
            let base = (k * self.ny + j) * self.nx + i;
            for (dz, wz) in [(0usize, one - tz), (plane, tz)] {
                out.push((base + dz, (one - tx) * (one - ty) * wz));
                out.push((base + dz + 1, tx * (one - ty) * wz));
                out.push((base + dz + self.nx, (one - tx) * ty * wz));
                out.push((base + dz + self.nx + 1, tx * ty * wz));
            }
        }
        Some(out)
    }
}

/// Scalar coefficient field sampled on an axis-aligned grid with multilinear
/// interpolation; evaluates to zero outside the bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    spec: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn from_values(spec: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.n_nodes() {
            return Err(Error::validation(format!(
                "value count {} does not match grid with {} nodes",
                values.len(),
                spec.n_nodes()
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn zero(spec: GridSpec<T>) -> Self {
        let n = spec.n_nodes();
        Self {
            spec,
            values: vec![T::zero(); n],
        }
    }

    pub fn constant(spec: GridSpec<T>, value: T) -> Self {
        let n = spec.n_nodes();
        Self {
            spec,
            values: vec![value; n],
        }
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn evaluate(&self, x: Vec3<T>) -> T {
        GridSampler::new(&self.spec, &self.values).eval(x)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |a, v| a.max(*v))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |a, v| a.min(*v))
    }

    /// Pointwise map into a new field on the same grid.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            spec: self.spec.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }
}

/// Phantom building blocks; all amplitudes must be nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive<T> {
    Gaussian {
        center: Vec3<T>,
        amplitude: T,
        width: T,
    },
    Disc {
        center: Vec3<T>,
        radius: T,
        amplitude: T,
    },
    Constant {
        amplitude: T,
    },
}

impl<T: Real> Primitive<T> {
    fn validate(&self) -> Result<()> {
        let amp = match self {
            Primitive::Gaussian { amplitude, width, .. } => {
                if *width <= T::zero() {
                    return Err(Error::validation("gaussian width must be > 0"));
                }
                *amplitude
            }
            Primitive::Disc { amplitude, radius, .. } => {
                if *radius <= T::zero() {
                    return Err(Error::validation("disc radius must be > 0"));
                }
                *amplitude
            }
            Primitive::Constant { amplitude } => *amplitude,
        };
        if amp < T::zero() {
            Err(Error::validation("phantom amplitude must be >= 0"))
        } else {
            Ok(())
        }
    }

    pub fn eval(&self, x: Vec3<T>) -> T {
        match self {
            Primitive::Gaussian {
                center,
                amplitude,
                width,
            } => {
                let r2 = (x - *center).norm_sq();
                *amplitude * (-(r2 * real::<T>(0.5)) / (*width * *width)).exp()
            }
            Primitive::Disc {
                center,
                radius,
                amplitude,
            } => {
                if (x - *center).norm() <= *radius {
                    *amplitude
                } else {
                    T::zero()
                }
            }
            Primitive::Constant { amplitude } => *amplitude,
        }
    }
}

/// Sums the primitives on the grid nodes; an empty list yields a zero field.
pub fn make_phantom<T: Real>(
    primitives: &[Primitive<T>],
    spec: &GridSpec<T>,
) -> Result<ScalarField<T>> {
    for p in primitives {
        p.validate()?;
    }
    let mut values = vec![T::zero(); spec.n_nodes()];
    for (idx, v) in values.iter_mut().enumerate() {
        let x = spec.node(idx);
        for p in primitives {
            *v += p.eval(x);
        }
    }
    ScalarField::from_values(spec.clone(), values)
}
