use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// One measurement chord: entry point on the boundary, inward unit
/// direction, chord length, and the layout indices it came from.
#[derive(Debug, Clone)]
pub struct Line<T> {
    pub entry: Vec3<T>,
    pub direction: Vec3<T>,
    pub length: T,
    pub angle_index: usize,
    pub offset_index: usize,
}

impl<T: Real> Line<T> {
    #[inline]
    pub fn point(&self, t: T) -> Vec3<T> {
        self.entry + self.direction * t
    }

    pub fn exit(&self) -> Vec3<T> {
        self.point(self.length)
    }
}

/// Structured family of chords (parallel-beam layout in 2-D, or explicit
/// lists). Lines that miss the domain are dropped at construction.
#[derive(Debug, Clone)]
pub struct LineSet<T> {
    lines: Vec<Line<T>>,
    pub n_angles: usize,
    pub n_offsets: usize,
}

impl<T: Real> LineSet<T> {
    /// Parallel-beam layout: `n_angles` view angles uniform over half a turn,
    /// `n_offsets` signed offsets across the domain width.
    pub fn parallel_beam_2d(
        domain: &Domain<T>,
        n_angles: usize,
        n_offsets: usize,
    ) -> Result<Self> {
        if domain.dim() != 2 {
            return Err(Error::validation("parallel-beam layout is planar"));
        }
        if n_angles == 0 || n_offsets == 0 {
            return Err(Error::validation("line layout must be nonempty"));
        }
        let (lo, hi) = domain.bounding_box();
        let center = (lo + hi) * real::<T>(0.5);
        let half_width = (hi - lo).norm() * real::<T>(0.5);
        let pi = real::<T>(std::f64::consts::PI);
        let mut lines = Vec::new();
        for ia in 0..n_angles {
            let phi = pi * T::from_usize(ia).unwrap() / T::from_usize(n_angles).unwrap();
            let dir = Vec3::from_angle(phi);
            let perp = Vec3::xy(-dir.y, dir.x);
            for io in 0..n_offsets {
                // cell-centered offsets in (-1, 1) so tangent lines are avoided
                let s = (T::from_usize(io).unwrap() + real::<T>(0.5))
                    / T::from_usize(n_offsets).unwrap()
                    * real::<T>(2.0)
                    - T::one();
                let anchor = center + perp * (s * half_width);
                // clip the full line through `anchor` to the domain
                let probe = anchor - dir * (half_width + half_width);
                if let Some((t0, t1)) = domain.line_interval(probe, dir) {
                    if t1 - t0 > real::<T>(1e-9) * domain.diameter() {
                        lines.push(Line {
                            entry: probe + dir * t0,
                            direction: dir,
                            length: t1 - t0,
                            angle_index: ia,
                            offset_index: io,
                        });
                    }
                }
            }
        }
        if lines.is_empty() {
            return Err(Error::validation("no line intersects the domain"));
        }
        Ok(Self {
            lines,
            n_angles,
            n_offsets,
        })
    }

    /// Single chord entering at `entry` with direction `dir`.
    pub fn single(domain: &Domain<T>, entry: Vec3<T>, dir: Vec3<T>) -> Result<Self> {
        let dir = dir.normalized();
        let line = Self::make_line(domain, entry, dir, 0, 0)?;
        Ok(Self {
            lines: vec![line],
            n_angles: 1,
            n_offsets: 1,
        })
    }

    /// Explicit chord list from (entry, direction) pairs.
    pub fn from_rays(domain: &Domain<T>, rays: &[(Vec3<T>, Vec3<T>)]) -> Result<Self> {
        if rays.is_empty() {
            return Err(Error::validation("empty ray list"));
        }
        let mut lines = Vec::with_capacity(rays.len());
        for (i, (entry, dir)) in rays.iter().enumerate() {
            lines.push(Self::make_line(domain, *entry, dir.normalized(), 0, i)?);
        }
        let n = lines.len();
        Ok(Self {
            lines,
            n_angles: 1,
            n_offsets: n,
        })
    }

    fn make_line(
        domain: &Domain<T>,
        entry: Vec3<T>,
        dir: Vec3<T>,
        angle_index: usize,
        offset_index: usize,
    ) -> Result<Line<T>> {
        if domain.signed_distance(entry).abs() > real::<T>(1e-9) * domain.diameter() {
            return Err(Error::validation("line entry must lie on the boundary"));
        }
        let n = domain.normal_at(entry);
        if n.dot(dir) >= T::zero() {
            return Err(Error::validation("line direction must point inward"));
        }
        let (_, t1) = domain
            .line_interval(entry, dir)
            .ok_or_else(|| Error::validation("line does not cross the domain"))?;
        Ok(Line {
            entry,
            direction: dir,
            length: t1,
            angle_index,
            offset_index,
        })
    }

    /// Sub-family over the given line indices (layout metadata is kept).
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::validation("no usable lines remain"));
        }
        Ok(Self {
            lines: keep.iter().map(|&i| self.lines[i].clone()).collect(),
            n_angles: self.n_angles,
            n_offsets: self.n_offsets,
        })
    }

    pub fn lines(&self) -> &[Line<T>] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}
