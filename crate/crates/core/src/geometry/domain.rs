use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// Direction of travel for exit-time queries: `Plus` follows `+theta`,
/// `Minus` follows `-theta` (the backtrace toward the inflow boundary).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind<T> {
    Disk2 { center: Vec3<T>, radius: T },
    Ball3 { center: Vec3<T>, radius: T },
    Rect2 { lo: Vec3<T>, hi: Vec3<T> },
}

/// Open bounded convex domain with closed-form ray intersections.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<T> {
    kind: DomainKind<T>,
}

impl<T: Real> Domain<T> {
    pub fn disk2(center: Vec3<T>, radius: T) -> Self {
        assert!(radius > T::zero(), "radius must be positive");
        Self {
            kind: DomainKind::Disk2 {
                center: Vec3::xy(center.x, center.y),
                radius,
            },
        }
    }

    pub fn ball3(center: Vec3<T>, radius: T) -> Self {
        assert!(radius > T::zero(), "radius must be positive");
        Self {
            kind: DomainKind::Ball3 { center, radius },
        }
    }

    pub fn rect2(lo: Vec3<T>, hi: Vec3<T>) -> Self {
        assert!(lo.x < hi.x && lo.y < hi.y, "rect needs lo < hi");
        Self {
            kind: DomainKind::Rect2 {
                lo: Vec3::xy(lo.x, lo.y),
                hi: Vec3::xy(hi.x, hi.y),
            },
        }
    }

    pub fn kind(&self) -> &DomainKind<T> {
        &self.kind
    }

    /// Spatial dimension: 2 or 3.
    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Ball3 { .. } => 3,
            _ => 2,
        }
    }

    pub fn diameter(&self) -> T {
        match self.kind {
            DomainKind::Disk2 { radius, .. } | DomainKind::Ball3 { radius, .. } => {
                radius + radius
            }
            DomainKind::Rect2 { lo, hi } => (hi - lo).norm(),
        }
    }

    /// Supremum of the chord length over all lines; equals the diameter for
    /// these convex shapes.
    pub fn max_chord(&self) -> T {
        self.diameter()
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Vec3<T>, Vec3<T>) {
        match self.kind {
            DomainKind::Disk2 { center, radius } => (
                Vec3::xy(center.x - radius, center.y - radius),
                Vec3::xy(center.x + radius, center.y + radius),
            ),
            DomainKind::Ball3 { center, radius } => (
                Vec3::new(center.x - radius, center.y - radius, center.z - radius),
                Vec3::new(center.x + radius, center.y + radius, center.z + radius),
            ),
            DomainKind::Rect2 { lo, hi } => (lo, hi),
        }
    }

    /// Signed distance to the boundary, negative inside.
    pub fn signed_distance(&self, x: Vec3<T>) -> T {
        match self.kind {
            DomainKind::Disk2 { center, radius } | DomainKind::Ball3 { center, radius } => {
                (x - center).norm() - radius
            }
            DomainKind::Rect2 { lo, hi } => {
                // inside: negative of the distance to the nearest face
                let dx = (lo.x - x.x).max(x.x - hi.x);
                let dy = (lo.y - x.y).max(x.y - hi.y);
                if dx <= T::zero() && dy <= T::zero() {
                    dx.max(dy)
                } else {
                    let px = dx.max(T::zero());
                    let py = dy.max(T::zero());
                    (px * px + py * py).sqrt()
                }
            }
        }
    }

    /// Closure membership with a relative geometric tolerance.
    pub fn contains_closure(&self, x: Vec3<T>) -> bool {
        self.signed_distance(x) <= real::<T>(1e-12) * self.diameter()
    }

    /// Outward unit normal at a boundary point.
    pub fn normal_at(&self, x: Vec3<T>) -> Vec3<T> {
        match self.kind {
            DomainKind::Disk2 { center, .. } | DomainKind::Ball3 { center, .. } => {
                (x - center).normalized()
            }
            DomainKind::Rect2 { lo, hi } => {
                // nearest face wins
                let d = [
                    (x.x - lo.x).abs(),
                    (hi.x - x.x).abs(),
                    (x.y - lo.y).abs(),
                    (hi.y - x.y).abs(),
                ];
                let mut best = 0;
                for i in 1..4 {
                    if d[i] < d[best] {
                        best = i;
                    }
                }
                match best {
                    0 => Vec3::xy(-T::one(), T::zero()),
                    1 => Vec3::xy(T::one(), T::zero()),
                    2 => Vec3::xy(T::zero(), -T::one()),
                    _ => Vec3::xy(T::zero(), T::one()),
                }
            }
        }
    }

    /// Intersection of the backward ray `l -> x - l*theta`, `l >= 0`, with the
    /// domain closure. Returns the parameter interval `[l0, l1]`, or `None`
    /// when the ray misses. For interior points `l0 = 0` and `l1` is the
    /// backtrace distance `tau_-`.
    pub fn backward_interval(&self, x: Vec3<T>, theta: Vec3<T>) -> Option<(T, T)> {
        self.line_interval(x, -theta)
    }

    /// Intersection of the forward ray `t -> x + t*dir`, `t >= 0`, with the
    /// domain closure.
    pub fn line_interval(&self, x: Vec3<T>, dir: Vec3<T>) -> Option<(T, T)> {
        match self.kind {
            DomainKind::Disk2 { center, radius } | DomainKind::Ball3 { center, radius } => {
                let d = x - center;
                let b = d.dot(dir);
                let c = d.norm_sq() - radius * radius;
                let disc = b * b - c;
                if disc < T::zero() {
                    return None;
                }
                let s = disc.sqrt();
                let t0 = -b - s;
                let t1 = -b + s;
                if t1 < T::zero() {
                    return None;
                }
                Some((t0.max(T::zero()), t1))
            }
            DomainKind::Rect2 { lo, hi } => {
                let mut t0 = T::zero();
                let mut t1 = T::infinity();
                for axis in 0..2 {
                    let xa = x.component(axis);
                    let da = dir.component(axis);
                    let la = lo.component(axis);
                    let ha = hi.component(axis);
                    if da.abs() < T::epsilon() {
                        if xa < la || xa > ha {
                            return None;
                        }
                    } else {
                        let mut a = (la - xa) / da;
                        let mut b = (ha - xa) / da;
                        if a > b {
                            std::mem::swap(&mut a, &mut b);
                        }
                        t0 = t0.max(a);
                        t1 = t1.min(b);
                    }
                }
                if t0 > t1 {
                    None
                } else {
                    Some((t0, t1))
                }
            }
        }
    }

    /// Distance from `x` to the boundary along `+theta` (`Sign::Plus`) or
    /// `-theta` (`Sign::Minus`). `x` must lie in the domain closure.
    pub fn exit_time(&self, x: Vec3<T>, theta: Vec3<T>, sign: Sign) -> Result<T> {
        if !self.contains_closure(x) {
            return Err(Error::OutsideDomain(format!(
                "({:?}) is outside the domain closure",
                x
            )));
        }
        let dir = match sign {
            Sign::Plus => theta,
            Sign::Minus => -theta,
        };
        match self.line_interval(x, dir) {
            Some((_, t1)) => Ok(t1.max(T::zero())),
            // grazing contact at the boundary
            None => Ok(T::zero()),
        }
    }

    /// 1-D boundary parametrization (arc length) used to interpolate traces
    /// on planar domains; total length equals the perimeter.
    pub fn boundary_param(&self, x: Vec3<T>) -> T {
        match self.kind {
            DomainKind::Disk2 { center, radius } => {
                let d = x - center;
                let a = d.y.atan2(d.x);
                let two_pi = real::<T>(std::f64::consts::TAU);
                let a = if a < T::zero() { a + two_pi } else { a };
                a * radius
            }
            DomainKind::Rect2 { lo, hi } => {
                let w = hi.x - lo.x;
                let h = hi.y - lo.y;
                // walk the perimeter counterclockwise from lo
                let eps = real::<T>(1e-9) * self.diameter();
                if (x.y - lo.y).abs() < eps {
                    x.x - lo.x
                } else if (x.x - hi.x).abs() < eps {
                    w + (x.y - lo.y)
                } else if (x.y - hi.y).abs() < eps {
                    w + h + (hi.x - x.x)
                } else {
                    w + h + w + (hi.y - x.y)
                }
            }
            DomainKind::Ball3 { .. } => T::zero(),
        }
    }

    pub fn perimeter(&self) -> T {
        match self.kind {
            DomainKind::Disk2 { radius, .. } => real::<T>(std::f64::consts::TAU) * radius,
            DomainKind::Rect2 { lo, hi } => {
                let two = real::<T>(2.0);
                two * ((hi.x - lo.x) + (hi.y - lo.y))
            }
            DomainKind::Ball3 { radius, .. } => {
                real::<T>(4.0 * std::f64::consts::PI) * radius * radius
            }
        }
    }

    /// True when `x` lies at relative depth `fraction` or deeper inside the
    /// domain (used for interior error masks).
    pub fn is_interior(&self, x: Vec3<T>, fraction: T) -> bool {
        let scale = self.diameter() * real::<T>(0.5);
        self.signed_distance(x) <= -fraction * scale
    }
}
