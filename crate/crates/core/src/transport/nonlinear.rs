use super::field::RadianceField;
use super::kernel::{angular_mean, sup_abs_diff, sweep_all, Discretization};
use super::linear::{linear_fixed_point, KernelCtx};
use crate::coefficients::{
    check_admissibility, AdmissibilityReport, BoundSource, BoundarySource, PhaseFunction,
    ScalarField,
};
use crate::error::{Error, Result};
use crate::geometry::AngularGrid;
use crate::scalar::{real, to_f64, Real};

/// Solver tolerances; the defaults put quadrature, not iteration, in charge
/// of the error budget.
#[derive(Debug, Clone, Copy)]
pub struct SolveSettings<T> {
    pub outer_tol: T,
    pub inner_tol: T,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl<T: Real> Default for SolveSettings<T> {
    fn default() -> Self {
        Self {
            outer_tol: real(1e-10),
            inner_tol: real(1e-12),
            max_outer: 200,
            max_inner: 100_000,
        }
    }
}

/// Convergence record of a nonlinear solve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NonlinearDiagnostics {
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub outer_increments: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub mu: f64,
    pub nu: f64,
}

pub struct NonlinearOutput<T> {
    pub field: RadianceField<T>,
    pub diagnostics: NonlinearDiagnostics,
    pub admissibility: AdmissibilityReport<T>,
}

/// Solves the nonlinear transport problem by the mean-field fixed point
/// `m_{k+1} = <solve_linear(m_k)>`, starting from `m_0 = 0`. Refuses
/// inadmissible coefficient tuples. Collimated sources take the
/// single-direction path and require a vanishing scattering kernel.
pub fn solve_nonlinear<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    kernel: Option<&PhaseFunction<T>>,
    f: &BoundarySource<T>,
    settings: &SolveSettings<T>,
) -> Result<NonlinearOutput<T>> {
    f.validate()?;
    if settings.outer_tol <= T::zero() || settings.inner_tol <= T::zero() {
        return Err(Error::validation("tolerances must be > 0"));
    }
    if f.is_collimated() {
        if kernel.map(|k| k.sup()).unwrap_or(T::zero()) > T::zero() {
            return Err(Error::validation(
                "collimated sources model single-direction transport and require k = 0",
            ));
        }
        return solve_collimated(disc, sigma_a, sigma_b, f, settings);
    }
    let report = check_admissibility(
        sigma_a,
        sigma_b,
        kernel,
        f,
        &disc.domain,
        &disc.angles,
        disc.n_nodes().max(16),
    )?;
    if !report.pass {
        return Err(Error::Admissibility(format!(
            "tuple fails Definition-1 admissibility: mu = {}, nu = {}, nonneg = {}",
            report.mu, report.nu, report.nonneg_ok
        )));
    }

    let sa = disc.sample(sigma_a);
    let sb = disc.sample(sigma_b);
    let bound = BoundSource::new(f, &disc.domain, &disc.angles)?;
    let ctx = kernel.map(|k| KernelCtx::build(disc, k));

    let n_total = disc.n_nodes() * disc.n_angles();
    let mut m = vec![T::zero(); disc.n_nodes()];
    let mut m_next = vec![T::zero(); disc.n_nodes()];
    let mut base = vec![T::zero(); n_total];
    let mut warm: Option<Vec<T>> = None;
    let mut increments = Vec::new();
    let mut inner_total = 0usize;

    for _outer in 0..settings.max_outer {
        let att = disc.attenuation_nodes(&sa, &sb, &m);
        sweep_all(disc, &att, None, Some(&bound), &mut base);
        let fp = linear_fixed_point(
            disc,
            &att,
            ctx.as_ref(),
            &base,
            settings.inner_tol,
            settings.max_inner,
            warm.take(),
        )?;
        inner_total += fp.iterations;
        angular_mean(disc, &fp.u, &mut m_next);
        let inc = sup_abs_diff(&m_next, &m);
        increments.push(to_f64(inc));
        std::mem::swap(&mut m, &mut m_next);
        warm = Some(fp.u);
        if inc <= settings.outer_tol {
            let u = warm.take().unwrap();
            let mut mean = vec![T::zero(); disc.n_nodes()];
            angular_mean(disc, &u, &mut mean);
            let ratios = ratio_sequence(&increments);
            return Ok(NonlinearOutput {
                field: RadianceField::from_parts(
                    disc.grid.clone(),
                    disc.angles.clone(),
                    u,
                    mean,
                ),
                diagnostics: NonlinearDiagnostics {
                    outer_iterations: increments.len(),
                    inner_iterations: inner_total,
                    outer_increments: increments,
                    contraction_ratios: ratios,
                    mu: to_f64(report.mu),
                    nu: to_f64(report.nu),
                },
                admissibility: report,
            });
        }
    }
    Err(Error::IterationCap(format!(
        "mean-field fixed point stalled after {} iterations; increments {:?} (expected ratio ~ nu = {})",
        settings.max_outer,
        tail(&increments, 5),
        report.nu,
    )))
}

fn solve_collimated<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    f: &BoundarySource<T>,
    settings: &SolveSettings<T>,
) -> Result<NonlinearOutput<T>> {
    let theta0 = match f {
        BoundarySource::Collimated(c) => c.theta0,
        _ => unreachable!("checked by caller"),
    };
    let cdisc = Discretization {
        domain: disc.domain.clone(),
        grid: disc.grid.clone(),
        angles: AngularGrid::collimated(theta0, disc.domain.dim()),
        chord_step: disc.chord_step,
    };
    let sa = cdisc.sample(sigma_a);
    let sb = cdisc.sample(sigma_b);
    let bound = BoundSource::new(f, &cdisc.domain, &cdisc.angles)?;
    let n = cdisc.n_nodes();
    let mut v = vec![T::zero(); n];
    let mut v_next = vec![T::zero(); n];
    let mut increments = Vec::new();
    for _outer in 0..settings.max_outer {
        let att = cdisc.attenuation_nodes(&sa, &sb, &v);
        sweep_all(&cdisc, &att, None, Some(&bound), &mut v_next);
        let inc = sup_abs_diff(&v_next, &v);
        increments.push(to_f64(inc));
        std::mem::swap(&mut v, &mut v_next);
        if inc <= settings.outer_tol {
            let ratios = ratio_sequence(&increments);
            let mean = v.clone();
            return Ok(NonlinearOutput {
                field: RadianceField::from_parts(cdisc.grid.clone(), cdisc.angles.clone(), v, mean),
                diagnostics: NonlinearDiagnostics {
                    outer_iterations: increments.len(),
                    inner_iterations: increments.len(),
                    outer_increments: increments,
                    contraction_ratios: ratios,
                    mu: 0.0,
                    nu: f64::NAN,
                },
                admissibility: trivial_report(&cdisc, sigma_a, sigma_b),
            });
        }
    }
    Err(Error::IterationCap(format!(
        "collimated fixed point stalled after {} iterations; increments {:?}",
        settings.max_outer,
        tail(&increments, 5),
    )))
}

fn trivial_report<T: Real>(
    disc: &Discretization<T>,
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
) -> AdmissibilityReport<T> {
    // collimated solves have no smallness requirement; record the norms only
    AdmissibilityReport {
        mu: T::zero(),
        nu: T::zero(),
        tau_sup: disc.domain.max_chord(),
        k_sup: T::zero(),
        sigma_b_sup: sigma_b.max_value().max(T::zero()),
        star: T::nan(),
        nonneg_ok: sigma_a.min_value() >= T::zero() && sigma_b.min_value() >= T::zero(),
        mu_ok: true,
        nu_ok: true,
        pass: true,
    }
}

fn ratio_sequence(increments: &[f64]) -> Vec<f64> {
    increments
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect()
}

fn tail(v: &[f64], n: usize) -> Vec<f64> {
    v.iter().rev().take(n).rev().copied().collect()
}
