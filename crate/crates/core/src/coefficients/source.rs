use crate::error::{Error, Result};
use crate::geometry::{AngularGrid, Domain};
use crate::scalar::{real, to_f64, Real};
use crate::vec3::Vec3;
use std::sync::OnceLock;

/// Radial C-infinity bump supported on the unit ball, `h(0) = 1`:
/// `h(t) = exp(1 - 1/(1 - t^2))` for `|t| < 1`, else 0.
pub fn bump_profile<T: Real>(t: T) -> T {
    let t2 = t * t;
    if t2 >= T::one() {
        T::zero()
    } else {
        (T::one() - T::one() / (T::one() - t2)).exp()
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// `eps^(1-n) * integral over the sphere (normalized measure) of
/// h(|theta - theta'|/eps)`, by fine polar quadrature.
pub(crate) fn mollifier_integral(eps: f64, dim: usize) -> f64 {
    if eps <= 0.0 {
        return 0.0;
    }
    let amax = if eps < 2.0 {
        2.0 * (eps / 2.0).asin()
    } else {
        std::f64::consts::PI
    };
    let h = |a: f64| bump_profile::<f64>(2.0 * (a / 2.0).sin() / eps);
    match dim {
        2 => simpson(h, 0.0, amax, 4000) / (std::f64::consts::PI * eps),
        _ => simpson(|a| h(a) * a.sin(), 0.0, amax, 4000) * 0.5 / (eps * eps),
    }
}

/// The sphere mollifier constant: the small-width limit of
/// [`mollifier_integral`]. Cached per dimension.
pub fn omega_standard(dim: usize) -> f64 {
    static CACHE: OnceLock<[f64; 2]> = OnceLock::new();
    let vals = CACHE.get_or_init(|| {
        let compute = |d: usize| {
            let i0 = mollifier_integral(8.0e-4, d);
            let i1 = mollifier_integral(4.0e-4, d);
            i1 + (i1 - i0) / 3.0
        };
        [compute(2), compute(3)]
    });
    if dim == 2 {
        vals[0]
    } else {
        vals[1]
    }
}

/// Mass of the omega-normalized angular mollifier at finite width:
/// `(1/(omega eps^(n-1))) * integral h(|theta-theta'|/eps) dtheta`, which
/// tends to 1 as `eps -> 0`.
pub fn spherical_cap_mass(eps: f64, dim: usize) -> f64 {
    mollifier_integral(eps, dim) / omega_standard(dim)
}

/// Flat-space bump mass `integral over R^(n-1) of h(|t|) dt`, the boundary
/// mollifier normalization. Cached per dimension.
pub fn flat_bump_mass(dim: usize) -> f64 {
    static CACHE: OnceLock<[f64; 2]> = OnceLock::new();
    let vals = CACHE.get_or_init(|| {
        let line = 2.0 * simpson(bump_profile::<f64>, 0.0, 1.0, 4000);
        let plane =
            std::f64::consts::TAU * simpson(|r| bump_profile::<f64>(r) * r, 0.0, 1.0, 4000);
        [line, plane]
    });
    if dim == 2 {
        vals[0]
    } else {
        vals[1]
    }
}

/// Smooth inflow data: a constant plus nonnegative angular lobes with
/// optional Gaussian spatial envelopes.
#[derive(Debug, Clone)]
pub struct SmoothSource<T> {
    pub base: T,
    pub lobes: Vec<Lobe<T>>,
}

#[derive(Debug, Clone)]
pub struct Lobe<T> {
    pub amplitude: T,
    pub axis: Vec3<T>,
    pub sharpness: i32,
    /// Optional `(center, width)` Gaussian factor in the entry position.
    pub spatial: Option<(Vec3<T>, T)>,
}

impl<T: Real> SmoothSource<T> {
    pub fn constant(value: T) -> Self {
        Self {
            base: value,
            lobes: Vec::new(),
        }
    }

    pub fn eval(&self, x: Vec3<T>, theta: Vec3<T>) -> T {
        let mut v = self.base;
        for lobe in &self.lobes {
            let ang = ((T::one() + theta.dot(lobe.axis)) * real::<T>(0.5))
                .max(T::zero())
                .powi(lobe.sharpness);
            let spatial = match lobe.spatial {
                Some((c, w)) => (-(x - c).norm_sq() * real::<T>(0.5) / (w * w)).exp(),
                None => T::one(),
            };
            v += lobe.amplitude * ang * spatial;
        }
        v
    }
}

/// Boundary profile of a collimated source.
#[derive(Debug, Clone)]
pub enum SpatialProfile<T> {
    Constant(T),
    Gaussian {
        center: Vec3<T>,
        amplitude: T,
        width: T,
        floor: T,
    },
}

impl<T: Real> SpatialProfile<T> {
    pub fn eval(&self, x: Vec3<T>) -> T {
        match self {
            SpatialProfile::Constant(v) => *v,
            SpatialProfile::Gaussian {
                center,
                amplitude,
                width,
                floor,
            } => *floor + *amplitude * (-(x - *center).norm_sq() * real::<T>(0.5) / (*width * *width)).exp(),
        }
    }
}

/// Collimated source `v_-(x) delta_{theta0}(theta)`; the delta is represented
/// exactly by single-direction transport, never mollified.
#[derive(Debug, Clone)]
pub struct CollimatedSource<T> {
    pub profile: SpatialProfile<T>,
    pub theta0: Vec3<T>,
}

/// Mollified angular (and optionally spatial) beam:
/// `c0 + delta/(omega eps^(n-1)) h(|theta - theta'|/eps) * [window(x)]`.
#[derive(Debug, Clone)]
pub struct MollifiedBeam<T> {
    pub c0: T,
    pub delta: T,
    pub eps: T,
    pub theta_center: Vec3<T>,
    pub spatial: Option<SpatialWindow<T>>,
}

/// Spatial concentration of a beam around a boundary point.
#[derive(Debug, Clone)]
pub struct SpatialWindow<T> {
    pub center: Vec3<T>,
    pub eps_prime: T,
    /// When present, a tabulated window (e.g. a test-function aggregate)
    /// evaluated in the tangent frame at `center`; otherwise the unit-mass
    /// boundary bump of width `eps_prime`.
    pub table: Option<WindowTable<T>>,
}

/// Bilinear table in the tangent frame of a boundary point.
#[derive(Debug, Clone)]
pub struct WindowTable<T> {
    pub origin: Vec3<T>,
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    pub half1: T,
    pub half2: T,
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<T>,
}

impl<T: Real> WindowTable<T> {
    pub fn eval(&self, x: Vec3<T>) -> T {
        let d = x - self.origin;
        let a = d.dot(self.e1);
        let b = d.dot(self.e2);
        let fa = (a + self.half1) / (self.half1 + self.half1)
            * T::from_usize(self.n1 - 1).unwrap();
        let fb = (b + self.half2) / (self.half2 + self.half2)
            * T::from_usize(self.n2 - 1).unwrap();
        if fa < T::zero()
            || fb < T::zero()
            || fa > T::from_usize(self.n1 - 1).unwrap()
            || fb > T::from_usize(self.n2 - 1).unwrap()
        {
            return T::zero();
        }
        let ia = fa.floor().to_usize().unwrap_or(0).min(self.n1 - 2);
        let ib = fb.floor().to_usize().unwrap_or(0).min(self.n2 - 2);
        let ta = fa - T::from_usize(ia).unwrap();
        let tb = fb - T::from_usize(ib).unwrap();
        let at = |i: usize, j: usize| self.values[j * self.n1 + i];
        let one = T::one();
        (at(ia, ib) * (one - ta) + at(ia + 1, ib) * ta) * (one - tb)
            + (at(ia, ib + 1) * (one - ta) + at(ia + 1, ib + 1) * ta) * tb
    }
}

impl<T: Real> SpatialWindow<T> {
    pub fn eval(&self, x: Vec3<T>, dim: usize) -> T {
        match &self.table {
            Some(t) => t.eval(x),
            None => {
                let r = (x - self.center).norm() / self.eps_prime;
                let norm = real::<T>(flat_bump_mass(dim))
                    * self.eps_prime.powi(dim as i32 - 1);
                bump_profile(r) / norm
            }
        }
    }
}

impl<T: Real> MollifiedBeam<T> {
    /// Pointwise angular mollifier factor (before discrete mass correction).
    pub fn angular_factor(&self, theta: Vec3<T>, dim: usize) -> T {
        let dist = (theta - self.theta_center).norm();
        let norm =
            real::<T>(omega_standard(dim)) * self.eps.powi(dim as i32 - 1);
        bump_profile(dist / self.eps) / norm
    }
}

/// Inflow boundary data on `Gamma_-`.
#[derive(Debug, Clone)]
pub enum BoundarySource<T> {
    Smooth(SmoothSource<T>),
    Collimated(CollimatedSource<T>),
    MollifiedBeam(MollifiedBeam<T>),
}

impl<T: Real> BoundarySource<T> {
    pub fn constant(value: T) -> Self {
        BoundarySource::Smooth(SmoothSource::constant(value))
    }

    pub fn collimated(profile: SpatialProfile<T>, theta0: Vec3<T>) -> Self {
        BoundarySource::Collimated(CollimatedSource {
            profile,
            theta0: theta0.normalized(),
        })
    }

    pub fn beam(c0: T, delta: T, eps: T, theta_center: Vec3<T>) -> Result<Self> {
        if delta <= T::zero() || eps <= T::zero() {
            return Err(Error::validation("beam needs delta > 0 and eps > 0"));
        }
        if c0 < T::zero() {
            return Err(Error::validation("beam offset c0 must be >= 0"));
        }
        Ok(BoundarySource::MollifiedBeam(MollifiedBeam {
            c0,
            delta,
            eps,
            theta_center: theta_center.normalized(),
            spatial: None,
        }))
    }

    pub fn is_collimated(&self) -> bool {
        matches!(self, BoundarySource::Collimated(_))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BoundarySource::Smooth(s) => {
                if s.base < T::zero() || s.lobes.iter().any(|l| l.amplitude < T::zero()) {
                    return Err(Error::validation("smooth source must be nonnegative"));
                }
            }
            BoundarySource::Collimated(c) => {
                if let SpatialProfile::Constant(v) = c.profile {
                    if v < T::zero() {
                        return Err(Error::validation("collimated level must be >= 0"));
                    }
                }
            }
            BoundarySource::MollifiedBeam(b) => {
                if b.delta <= T::zero() || b.eps <= T::zero() || b.c0 < T::zero() {
                    return Err(Error::validation("beam needs delta, eps > 0 and c0 >= 0"));
                }
            }
        }
        Ok(())
    }
}

/// A boundary source bound to an angular grid. Mollified beams carry a mass
/// correction factor so the discrete angular mass matches the continuum mass
/// of the normalized mollifier at the same width; all other sources evaluate
/// pointwise.
#[derive(Debug, Clone)]
pub struct BoundSource<'a, T> {
    source: &'a BoundarySource<T>,
    dim: usize,
    angular_scale: T,
}

impl<'a, T: Real> BoundSource<'a, T> {
    pub fn new(
        source: &'a BoundarySource<T>,
        domain: &Domain<T>,
        angles: &AngularGrid<T>,
    ) -> Result<Self> {
        let dim = domain.dim();
        let angular_scale = match source {
            BoundarySource::MollifiedBeam(b) => {
                let mut disc = T::zero();
                for j in 0..angles.len() {
                    disc += angles.weight(j) * b.angular_factor(angles.direction(j), dim);
                }
                if disc <= T::zero() {
                    return Err(Error::validation(
                        "mollified beam is invisible on this angular grid; \
                         align theta' with a node or widen eps",
                    ));
                }
                let cont = real::<T>(spherical_cap_mass(to_f64(b.eps), dim));
                cont / disc
            }
            _ => T::one(),
        };
        Ok(Self {
            source,
            dim,
            angular_scale,
        })
    }

    pub fn source(&self) -> &BoundarySource<T> {
        self.source
    }

    /// Evaluate the inflow datum at an entry point and direction.
    #[inline]
    pub fn eval(&self, x: Vec3<T>, theta: Vec3<T>) -> T {
        match self.source {
            BoundarySource::Smooth(s) => s.eval(x, theta),
            BoundarySource::Collimated(c) => {
                if theta.dot(c.theta0) > T::one() - real::<T>(1e-12) {
                    c.profile.eval(x)
                } else {
                    T::zero()
                }
            }
            BoundarySource::MollifiedBeam(b) => {
                let spatial = match &b.spatial {
                    Some(w) => w.eval(x, self.dim),
                    None => T::one(),
                };
                b.c0 + b.delta * self.angular_scale * b.angular_factor(theta, self.dim) * spatial
            }
        }
    }
}
