use crate::coefficients::{BoundarySource, PhaseFunction, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::{AngularGrid, Domain};
use crate::scalar::{real, Real};
use crate::transport::{
    albedo, solve_nonlinear, solve_riccati_ray, trace_at, BoundaryTrace, Discretization,
    NonlinearOutput, SolveSettings,
};
use crate::vec3::Vec3;

/// Discretization and tolerance choices of the synthetic measurement device.
#[derive(Debug, Clone)]
pub struct OracleSettings<T> {
    pub grid_n: usize,
    pub boundary_resolution: usize,
    pub solve: SolveSettings<T>,
    /// Step of the exact collimated ray solves.
    pub ray_step: T,
    /// Chord quadrature step of the grid solver; half the grid spacing when
    /// unset.
    pub chord_step: Option<T>,
}

impl<T: Real> OracleSettings<T> {
    pub fn new(grid_n: usize, boundary_resolution: usize) -> Self {
        Self {
            grid_n,
            boundary_resolution,
            solve: SolveSettings::default(),
            ray_step: real(1e-4),
            chord_step: None,
        }
    }
}

/// The albedo measurement map bound to a fixed ground-truth medium. Queries
/// are deterministic: identical queries return bit-identical traces.
pub struct AlbedoOracle<T> {
    domain: Domain<T>,
    sigma_a: ScalarField<T>,
    sigma_b: ScalarField<T>,
    kernel: Option<PhaseFunction<T>>,
    disc: Discretization<T>,
    settings: OracleSettings<T>,
}

impl<T: Real> AlbedoOracle<T> {
    pub fn new(
        domain: Domain<T>,
        sigma_a: ScalarField<T>,
        sigma_b: ScalarField<T>,
        kernel: Option<PhaseFunction<T>>,
        angles: AngularGrid<T>,
        settings: OracleSettings<T>,
    ) -> Self {
        let mut disc = Discretization::new(domain.clone(), settings.grid_n, angles);
        if let Some(step) = settings.chord_step {
            disc = disc.with_chord_step(step);
        }
        Self {
            domain,
            sigma_a,
            sigma_b,
            kernel,
            disc,
            settings,
        }
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn discretization(&self) -> &Discretization<T> {
        &self.disc
    }

    pub fn settings(&self) -> &OracleSettings<T> {
        &self.settings
    }

    pub fn scattering_free(&self) -> bool {
        self.kernel
            .as_ref()
            .map(|k| k.sup() == T::zero())
            .unwrap_or(true)
    }

    /// Full boundary measurement for one inflow datum.
    pub fn query(&self, f: &BoundarySource<T>) -> Result<(BoundaryTrace<T>, NonlinearOutput<T>)> {
        albedo(
            &self.disc,
            &self.sigma_a,
            &self.sigma_b,
            self.kernel.as_ref(),
            f,
            &self.settings.solve,
            self.settings.boundary_resolution,
        )
    }

    /// Nonlinear solve without the trace extraction.
    pub fn solve(&self, f: &BoundarySource<T>) -> Result<NonlinearOutput<T>> {
        solve_nonlinear(
            &self.disc,
            &self.sigma_a,
            &self.sigma_b,
            self.kernel.as_ref(),
            f,
            &self.settings.solve,
        )
    }

    /// Trace of a solved field at an exact boundary point and grid direction.
    pub fn trace_at(
        &self,
        f: &BoundarySource<T>,
        solution: &NonlinearOutput<T>,
        x: Vec3<T>,
        angle: usize,
    ) -> Result<T> {
        trace_at(
            &self.disc,
            &self.sigma_a,
            &self.sigma_b,
            self.kernel.as_ref(),
            f,
            &solution.field,
            x,
            angle,
        )
    }

    /// Exit value of a collimated beam entering at `entry` with level `v_in`;
    /// takes the exact Riccati path, which requires a scattering-free medium.
    pub fn query_ray(&self, v_in: T, entry: Vec3<T>, direction: Vec3<T>) -> Result<T> {
        if !self.scattering_free() {
            return Err(Error::validation(
                "collimated ray queries require a scattering-free medium",
            ));
        }
        let profile = solve_riccati_ray(
            &self.sigma_a,
            &self.sigma_b,
            v_in,
            entry,
            direction,
            &self.domain,
            self.settings.ray_step,
        )?;
        Ok(profile.exit_value())
    }
}
