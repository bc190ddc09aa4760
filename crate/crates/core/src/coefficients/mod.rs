//! Coefficient fields, phantoms, scattering kernel and boundary sources.

mod admissibility;
pub(crate) mod field;
mod source;

pub use admissibility::{
    check_admissibility, omega_constant, star_norm, AdmissibilityReport, OmegaEstimate,
};
pub use field::{make_phantom, GridSpec, Primitive, ScalarField};
pub use source::{
    bump_profile, flat_bump_mass, omega_standard, spherical_cap_mass, BoundSource,
    BoundarySource, CollimatedSource, Lobe, MollifiedBeam, SmoothSource, SpatialProfile,
    SpatialWindow, WindowTable,
};

/// Scattering kernel `k(x, theta', theta) = kappa(x) * p(theta'.theta)` with a
/// nonnegative tabulated phase function over the cosine of the scattering
/// angle.
#[derive(Debug, Clone)]
pub struct PhaseFunction<T> {
    kappa: ScalarField<T>,
    /// Uniform table over cos in [-1, 1], linearly interpolated.
    p_table: Vec<T>,
}

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::vec3::Vec3;

impl<T: Real> PhaseFunction<T> {
    pub fn new(kappa: ScalarField<T>, p_table: Vec<T>) -> Result<Self> {
        if p_table.len() < 2 {
            return Err(Error::validation("phase table needs at least 2 entries"));
        }
        if p_table.iter().any(|v| *v < T::zero()) || kappa.min_value() < T::zero() {
            return Err(Error::validation("phase function must be nonnegative"));
        }
        Ok(Self { kappa, p_table })
    }

    /// Isotropic kernel `k = kappa(x)`.
    pub fn isotropic(kappa: ScalarField<T>) -> Result<Self> {
        Self::new(kappa, vec![T::one(), T::one()])
    }

    pub fn kappa(&self) -> &ScalarField<T> {
        &self.kappa
    }

    pub fn p_table(&self) -> &[T] {
        &self.p_table
    }

    pub fn is_isotropic(&self) -> bool {
        self.p_table.iter().all(|v| *v == self.p_table[0])
    }

    /// Phase value at a given scattering cosine.
    pub fn eval_p(&self, cos_angle: T) -> T {
        let c = cos_angle.max(-T::one()).min(T::one());
        let n = self.p_table.len();
        let f = (c + T::one()) * real::<T>(0.5) * T::from_usize(n - 1).unwrap();
        let i = f
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(n.saturating_sub(2));
        let t = f - T::from_usize(i).unwrap();
        self.p_table[i] * (T::one() - t) + self.p_table[i + 1] * t
    }

    pub fn eval(&self, x: Vec3<T>, theta_in: Vec3<T>, theta_out: Vec3<T>) -> T {
        self.kappa.evaluate(x) * self.eval_p(theta_in.dot(theta_out))
    }

    /// Grid supremum `max kappa * max p`.
    pub fn sup(&self) -> T {
        let pk = self
            .p_table
            .iter()
            .fold(T::zero(), |a, v| a.max(*v));
        self.kappa.max_value() * pk
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_spec() -> GridSpec<f64> {
        GridSpec::planar(Vec3::xy(-1.0, -1.0), Vec3::xy(1.0, 1.0), [9, 9])
    }

    #[test]
    fn phase_interp_and_sup() {
        let kappa = make_phantom(&[Primitive::Constant { amplitude: 0.25 }], &unit_spec()).unwrap();
        let p = PhaseFunction::new(kappa, vec![0.0, 1.0, 2.0]).unwrap();
        assert!((p.eval_p(-1.0) - 0.0).abs() < 1e-15);
        assert!((p.eval_p(0.0) - 1.0).abs() < 1e-15);
        assert!((p.eval_p(0.5) - 1.5).abs() < 1e-15);
        assert!((p.sup() - 0.5).abs() < 1e-15);
        assert!(!p.is_isotropic());
    }

    #[test]
    fn isotropic_detection() {
        let kappa = make_phantom(&[Primitive::Constant { amplitude: 0.1 }], &unit_spec()).unwrap();
        let p = PhaseFunction::isotropic(kappa).unwrap();
        assert!(p.is_isotropic());
        assert!((p.eval(Vec3::xy(0.0, 0.0), Vec3::xy(1.0, 0.0), Vec3::xy(0.0, 1.0)) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn negative_phase_rejected() {
        let kappa = make_phantom(&[Primitive::Constant { amplitude: 0.1 }], &unit_spec()).unwrap();
        assert!(PhaseFunction::new(kappa, vec![1.0, -0.5]).is_err());
    }
}
