use super::field::ScalarField;
use super::source::{BoundSource, BoundarySource};
use super::PhaseFunction;
use crate::error::{Error, Result};
use crate::geometry::{AngularGrid, Domain};
use crate::scalar::{real, to_f64, Real};
use crate::vec3::Vec3;

/// Discrete star norm: the maximum over interior probe points of the angular
/// average of backtraced inflow values. Collimated sources use the full
/// angular measure on their single direction.
pub fn star_norm<T: Real>(
    f: &BoundarySource<T>,
    domain: &Domain<T>,
    angles: &AngularGrid<T>,
    probes: usize,
) -> Result<T> {
    if probes < 16 {
        return Err(Error::validation("star norm needs at least 16 probes"));
    }
    let bound = BoundSource::new(f, domain, angles)?;
    let per_axis = (probes as f64)
        .powf(1.0 / domain.dim() as f64)
        .ceil()
        .max(2.0) as usize;
    let (lo, hi) = domain.bounding_box();
    let mut best = T::zero();
    let n_z = if domain.dim() == 3 { per_axis } else { 1 };
    for kz in 0..n_z {
        for ky in 0..per_axis {
            for kx in 0..per_axis {
                let frac = |k: usize| {
                    (T::from_usize(k).unwrap() + real::<T>(0.5))
                        / T::from_usize(per_axis).unwrap()
                };
                let x = Vec3::new(
                    lo.x + (hi.x - lo.x) * frac(kx),
                    lo.y + (hi.y - lo.y) * frac(ky),
                    if domain.dim() == 3 {
                        lo.z + (hi.z - lo.z) * frac(kz)
                    } else {
                        T::zero()
                    },
                );
                if domain.signed_distance(x) >= T::zero() {
                    continue;
                }
                let value = match f {
                    BoundarySource::Collimated(c) => {
                        match domain.backward_interval(x, c.theta0) {
                            Some((_, l1)) => bound.eval(x - c.theta0 * l1, c.theta0).abs(),
                            None => T::zero(),
                        }
                    }
                    _ => {
                        let mut acc = T::zero();
                        for j in 0..angles.len() {
                            let th = angles.direction(j);
                            if let Some((_, l1)) = domain.backward_interval(x, th) {
                                acc += angles.weight(j) * bound.eval(x - th * l1, th).abs();
                            }
                        }
                        acc
                    }
                };
                best = best.max(value);
            }
        }
    }
    Ok(best)
}

/// Extrapolated mollifier constant for a radial profile `h` over a
/// decreasing width schedule.
#[derive(Debug, Clone)]
pub struct OmegaEstimate<T> {
    pub value: T,
    pub error_estimate: T,
    pub per_level: Vec<(T, T)>,
}

/// Computes `lim eps^(1-n) integral h(|theta-theta'|/eps) dtheta` over the
/// schedule, Richardson-extrapolating the last two levels.
pub fn omega_constant<T: Real>(
    h: impl Fn(T) -> T,
    schedule: &[T],
    dim: usize,
) -> Result<OmegaEstimate<T>> {
    if schedule.is_empty() {
        return Err(Error::validation("omega schedule must be nonempty"));
    }
    for w in schedule.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::validation("omega schedule must strictly decrease"));
        }
    }
    if schedule.iter().any(|e| *e <= T::zero()) {
        return Err(Error::validation("omega schedule must be positive"));
    }
    let mut per_level = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let e = to_f64(eps);
        let amax = if e < 2.0 {
            2.0 * (e / 2.0).asin()
        } else {
            std::f64::consts::PI
        };
        // polar quadrature of the zonal integrand
        let n = 4000usize;
        let step = amax / n as f64;
        let mut acc = 0.0f64;
        let eval = |a: f64| {
            let t = 2.0 * (a / 2.0).sin() / e;
            let hv = to_f64(h(real::<T>(t)));
            match dim {
                2 => hv,
                _ => hv * a.sin(),
            }
        };
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * eval(step * i as f64);
        }
        acc *= step;
        let value = match dim {
            2 => acc / (std::f64::consts::PI * e),
            _ => acc * 0.5 / (e * e),
        };
        per_level.push((eps, real::<T>(value)));
    }
    let (value, error_estimate) = if per_level.len() == 1 {
        (per_level[0].1, per_level[0].1.abs())
    } else {
        let (e0, i0) = per_level[per_level.len() - 2];
        let (e1, i1) = per_level[per_level.len() - 1];
        let r = e1 / e0;
        let r2 = r * r;
        // widths shrink geometrically and the sphere-vs-flat bias is O(eps^2)
        let extrap = i1 + (i1 - i0) * r2 / (T::one() - r2);
        (extrap, (i1 - i0).abs())
    };
    Ok(OmegaEstimate {
        value,
        error_estimate,
        per_level,
    })
}

/// Definition-1 admissibility data: the scattering smallness `mu`, the
/// nonlinear contraction budget `nu`, and the per-clause outcomes.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport<T> {
    pub mu: T,
    pub nu: T,
    pub tau_sup: T,
    pub k_sup: T,
    pub sigma_b_sup: T,
    pub star: T,
    pub nonneg_ok: bool,
    pub mu_ok: bool,
    pub nu_ok: bool,
    pub pass: bool,
}

/// Evaluates Definition-1 admissibility for a coefficient tuple. Failures are
/// reported, never thrown.
pub fn check_admissibility<T: Real>(
    sigma_a: &ScalarField<T>,
    sigma_b: &ScalarField<T>,
    kernel: Option<&PhaseFunction<T>>,
    f: &BoundarySource<T>,
    domain: &Domain<T>,
    angles: &AngularGrid<T>,
    probes: usize,
) -> Result<AdmissibilityReport<T>> {
    let tau_sup = domain.max_chord();
    let k_sup = kernel.map(|k| k.sup()).unwrap_or(T::zero());
    let sigma_b_sup = sigma_b.max_value().max(T::zero());
    let star = star_norm(f, domain, angles, probes)?;
    let nonneg_ok = sigma_a.min_value() >= T::zero()
        && sigma_b.min_value() >= T::zero()
        && f.validate().is_ok();
    let mu = tau_sup * k_sup;
    let mu_ok = mu < T::one();
    let nu = if mu_ok {
        let denom = (T::one() - mu) * (T::one() - mu);
        tau_sup * sigma_b_sup * star / denom
    } else {
        T::infinity()
    };
    let nu_ok = nu < T::one();
    Ok(AdmissibilityReport {
        mu,
        nu,
        tau_sup,
        k_sup,
        sigma_b_sup,
        star,
        nonneg_ok,
        mu_ok,
        nu_ok,
        pass: nonneg_ok && mu_ok && nu_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{bump_profile, make_phantom, GridSpec, Primitive};

    fn disk() -> Domain<f64> {
        Domain::disk2(Vec3::xy(0.0, 0.0), 1.0)
    }

    fn const_field(v: f64) -> ScalarField<f64> {
        let spec = GridSpec::planar(Vec3::xy(-1.0, -1.0), Vec3::xy(1.0, 1.0), [17, 17]);
        make_phantom(&[Primitive::Constant { amplitude: v }], &spec).unwrap()
    }

    #[test]
    fn star_norm_of_constant_is_the_constant() {
        let d = disk();
        let g = AngularGrid::s1(32).unwrap();
        let f = BoundarySource::constant(0.7);
        let s = star_norm(&f, &d, &g, 64).unwrap();
        assert!((s - 0.7).abs() < 1e-14);
        let z = star_norm(&BoundarySource::constant(0.0), &d, &g, 64).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn star_norm_homogeneous() {
        let d = disk();
        let g = AngularGrid::s1(64).unwrap();
        let theta0 = g.direction(3);
        for lambda in [0.25, 2.0, 10.0] {
            let f1 = BoundarySource::beam(0.0, 1.0e-3, 0.1, theta0).unwrap();
            let f2 = BoundarySource::beam(0.0, 1.0e-3 * lambda, 0.1, theta0).unwrap();
            let s1 = star_norm(&f1, &d, &g, 100).unwrap();
            let s2 = star_norm(&f2, &d, &g, 100).unwrap();
            assert!(((s2 - lambda * s1) / (lambda * s1)).abs() < 1e-12);
        }
    }

    #[test]
    fn star_norm_beam_near_delta() {
        // the beam's angular average equals delta * mollifier mass
        let d = disk();
        let g = AngularGrid::s1(512).unwrap();
        let delta = 1.0e-3;
        let f = BoundarySource::beam(0.0, delta, 0.05, g.direction(9)).unwrap();
        let s = star_norm(&f, &d, &g, 256).unwrap();
        assert!(
            (s - delta).abs() / delta < 0.05,
            "star norm {s} should approximate delta {delta}"
        );
    }

    #[test]
    fn omega_constant_examples() {
        // stabilizes between the last two levels
        let est = omega_constant(bump_profile::<f64>, &[0.05, 0.025], 2).unwrap();
        let reference = crate::coefficients::omega_standard(2);
        assert!(
            ((est.value - reference) / reference).abs() < 1e-3,
            "omega estimate {} vs {}",
            est.value,
            reference
        );
        // h = 0 gives 0
        let z = omega_constant(|_: f64| 0.0, &[0.1, 0.05], 2).unwrap();
        assert_eq!(z.value, 0.0);
        // scaling h by 1/2 halves omega
        let half = omega_constant(|t: f64| 0.5 * bump_profile(t), &[0.05, 0.025], 2).unwrap();
        assert!(((half.value - 0.5 * est.value) / est.value).abs() < 1e-12);
        // non-monotone schedule rejected
        assert!(omega_constant(bump_profile::<f64>, &[0.05, 0.1], 2).is_err());
    }

    #[test]
    fn admissibility_arithmetic() {
        let d = disk();
        let g = AngularGrid::s1(32).unwrap();
        // k = 0, sigma_b = 0: mu = nu = 0, pass
        let rep = check_admissibility(
            &const_field(0.3),
            &const_field(0.0),
            None,
            &BoundarySource::constant(1.0),
            &d,
            &g,
            64,
        )
        .unwrap();
        assert_eq!(rep.mu, 0.0);
        assert_eq!(rep.nu, 0.0);
        assert!(rep.pass);

        // unit disk: tau_sup = 2, k_sup = 0.25 -> mu = 0.5
        let kernel = PhaseFunction::isotropic(const_field(0.25)).unwrap();
        let rep = check_admissibility(
            &const_field(0.0),
            &const_field(0.1),
            Some(&kernel),
            &BoundarySource::constant(1.0),
            &d,
            &g,
            64,
        )
        .unwrap();
        assert!((rep.mu - 0.5).abs() < 1e-14);
        // nu = 2 * 0.1 * 1 / (1 - 0.5)^2 = 0.8
        assert!((rep.nu - 0.8).abs() < 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn admissibility_monotone_in_k_and_f() {
        let d = disk();
        let g = AngularGrid::s1(32).unwrap();
        let mut last_mu = -1.0;
        for amp in [0.05, 0.1, 0.2, 0.4] {
            let kernel = PhaseFunction::isotropic(const_field(amp)).unwrap();
            let rep = check_admissibility(
                &const_field(0.0),
                &const_field(0.1),
                Some(&kernel),
                &BoundarySource::constant(1.0),
                &d,
                &g,
                64,
            )
            .unwrap();
            assert!(rep.mu > last_mu);
            last_mu = rep.mu;
        }
        let mut last_nu = -1.0;
        for c0 in [0.5, 1.0, 2.0] {
            let rep = check_admissibility(
                &const_field(0.0),
                &const_field(0.1),
                None,
                &BoundarySource::constant(c0),
                &d,
                &g,
                64,
            )
            .unwrap();
            assert!(rep.nu > last_nu);
            last_nu = rep.nu;
        }
    }
}
