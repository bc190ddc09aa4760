use super::oracle::AlbedoOracle;
use crate::coefficients::{
    bump_profile, flat_bump_mass, BoundarySource, GridSpec, MollifiedBeam, PhaseFunction,
    ScalarField, SpatialWindow, WindowTable,
};
use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainKind, Sign};
use crate::scalar::{real, to_f64, Real};
use crate::transforms::{invert_ls, InversionMode, InversionParams, LineSet, Sinogram};
use crate::transport::{solve_linear, Discretization};
use crate::vec3::Vec3;

/// Geometric refinement schedules realizing the iterated limits of the
/// scattering-case reconstructions. All sequences decrease; extrapolation
/// order 1 Richardson-extrapolates the innermost parameter, order 0 reads
/// the last value.
#[derive(Debug, Clone)]
pub struct LimitSchedule<T> {
    pub eps: Vec<T>,
    pub delta: Vec<T>,
    pub gamma: Vec<T>,
    pub eps_prime: Vec<T>,
    pub gamma1: Vec<T>,
    pub gamma2: Vec<T>,
    pub extrapolation: u8,
}

/// Geometric sequence `head * ratio^i`, `i = 0..levels`.
pub fn refine_schedule<T: Real>(head: T, ratio: T, levels: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(levels);
    let mut v = head;
    for _ in 0..levels {
        out.push(v);
        v = v * ratio;
    }
    out
}

impl<T: Real> LimitSchedule<T> {
    /// Planar default: eps and gamma from 0.1, amplitude from `delta_head`,
    /// ratio 0.5, three levels, Richardson on the innermost parameter.
    pub fn planar_default(delta_head: T) -> Self {
        let half = real::<T>(0.5);
        Self {
            eps: refine_schedule(real(0.1), half, 3),
            delta: refine_schedule(delta_head, half, 3),
            gamma: refine_schedule(real(0.1), half, 3),
            eps_prime: Vec::new(),
            gamma1: Vec::new(),
            gamma2: Vec::new(),
            extrapolation: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for seq in [
            &self.eps,
            &self.delta,
            &self.gamma,
            &self.eps_prime,
            &self.gamma1,
            &self.gamma2,
        ] {
            if seq.iter().any(|v| *v <= T::zero()) {
                return Err(Error::validation("schedule values must be positive"));
            }
            for w in seq.windows(2) {
                if w[1] >= w[0] {
                    return Err(Error::validation("schedule sequences must decrease"));
                }
            }
        }
        if self.eps.is_empty() || self.delta.is_empty() || self.gamma.is_empty() {
            return Err(Error::validation("eps, delta and gamma schedules are required"));
        }
        Ok(())
    }

    /// Extrapolated limit of `values` sampled along a geometric parameter
    /// sequence whose leading error term is `O(parameter^power)`.
    fn extrapolate(&self, params: &[T], values: &[T], power: i32) -> T {
        let n = values.len();
        if self.extrapolation == 0 || n < 2 {
            return values[n - 1];
        }
        let r = params[n - 1] / params[n - 2];
        let rp = r.powi(power);
        values[n - 1] + (values[n - 1] - values[n - 2]) * rp / (T::one() - rp)
    }
}

/// Per-probe convergence record.
#[derive(Debug, Clone)]
pub struct ProbeDiagnostics {
    /// (eps, delta, aperture average at the readout gamma) per level.
    pub levels: Vec<(f64, f64, f64)>,
    /// (gamma, recovered line value at that gamma) after the inner
    /// extrapolation; feeds the outer-limit slope studies.
    pub gamma_study: Vec<(f64, f64)>,
    /// Index of the angular node the beam was centered on.
    pub theta_index: usize,
    pub extrapolated: f64,
}

/// Aperture average of an exit trace against the mollifier of width `gamma`
/// around the beam direction.
fn aperture_average<T: Real>(
    trace_values: impl Fn(usize) -> T,
    disc: &Discretization<T>,
    theta_prime: Vec3<T>,
    gamma: T,
) -> T {
    let mut acc = T::zero();
    for j in 0..disc.n_angles() {
        let th = disc.angles.direction(j);
        let hv = bump_profile((th - theta_prime).norm() / gamma);
        if hv > T::zero() {
            acc += disc.angles.weight(j) * trace_values(j) * hv;
        }
    }
    acc
}

/// Recovers one X-ray transform value of `sigma_a` through the vanishing-beam
/// limit: mollified-beam queries, aperture averages of `u/delta` at the exit
/// point, and the scheduled iterated limit (gamma outermost). Returns
/// `-log(limit)`.
pub fn recover_xray_sigma_a_scattering<T: Real>(
    oracle: &AlbedoOracle<T>,
    theta_prime: Vec3<T>,
    exit_point: Vec3<T>,
    schedule: &LimitSchedule<T>,
) -> Result<(T, ProbeDiagnostics)> {
    schedule.validate()?;
    let disc = oracle.discretization();
    let j_center = disc.angles.nearest(theta_prime.normalized());
    let theta_c = disc.angles.direction(j_center);

    let n_levels = schedule.eps.len().max(schedule.delta.len());
    let seq_at = |seq: &[T], i: usize| seq[i.min(seq.len() - 1)];

    // aperture averages per (level, gamma)
    let mut apertures = vec![Vec::with_capacity(schedule.gamma.len()); n_levels];
    let mut level_eps = Vec::new();
    let mut levels_diag = Vec::new();
    for i in 0..n_levels {
        let eps = seq_at(&schedule.eps, i);
        let delta = seq_at(&schedule.delta, i);
        let beam = BoundarySource::beam(T::zero(), delta, eps, theta_c)?;
        let (trace, _) = oracle.query(&beam)?;
        for &gamma in &schedule.gamma {
            let a = aperture_average(
                |j| trace.value_at(exit_point, j) / delta,
                disc,
                theta_c,
                gamma,
            );
            apertures[i].push(a);
        }
        level_eps.push(eps);
        levels_diag.push((to_f64(eps), to_f64(delta), to_f64(*apertures[i].last().unwrap())));
    }

    // inner extrapolation per gamma: the aperture bias of the radial
    // mollifier is quadratic in eps
    let mut gamma_study = Vec::new();
    let mut limit = T::nan();
    for (gi, &gamma) in schedule.gamma.iter().enumerate() {
        let seq: Vec<T> = apertures.iter().map(|row| row[gi]).collect();
        let a = schedule.extrapolate(&level_eps, &seq, 2);
        let v = if a > T::zero() { -a.ln() } else { T::nan() };
        gamma_study.push((to_f64(gamma), to_f64(v)));
        if gi + 1 == schedule.gamma.len() {
            limit = a;
        }
    }
    if !(limit > T::zero()) {
        return Err(Error::Degenerate(
            "aperture limit is not positive; the ballistic term is lost".into(),
        ));
    }
    Ok((
        -limit.ln(),
        ProbeDiagnostics {
            levels: levels_diag,
            gamma_study,
            theta_index: j_center,
            extrapolated: to_f64(limit),
        },
    ))
}

/// Recovers one line integral of the effective attenuation
/// `sigma_a + sigma_b <w>` (Theorem-B data) by beam-over-background queries.
/// The background trace (constant source `c0`) is measured once and
/// subtracted, realizing the first-order term whose ballistic limit carries
/// the effective attenuation; the amplitude is read at the smallest delta
/// (outermost limit), the mollifier width Richardson-extrapolates.
pub fn recover_effective_attenuation<T: Real>(
    oracle: &AlbedoOracle<T>,
    c0: T,
    theta_prime: Vec3<T>,
    exit_point: Vec3<T>,
    schedule: &LimitSchedule<T>,
) -> Result<(T, ProbeDiagnostics)> {
    schedule.validate()?;
    if c0 <= T::zero() {
        return Err(Error::validation("background level c0 must be positive"));
    }
    let disc = oracle.discretization();
    let j_center = disc.angles.nearest(theta_prime.normalized());
    let theta_c = disc.angles.direction(j_center);
    let delta = *schedule.delta.last().unwrap();

    let background = BoundarySource::constant(c0);
    let (bg_trace, _) = oracle.query(&background)?;

    let mut apertures = vec![Vec::with_capacity(schedule.gamma.len()); schedule.eps.len()];
    let mut levels_diag = Vec::new();
    for (i, &eps) in schedule.eps.iter().enumerate() {
        let beam = BoundarySource::beam(c0, delta, eps, theta_c)?;
        let (trace, _) = oracle.query(&beam)?;
        for &gamma in &schedule.gamma {
            let a = aperture_average(
                |j| (trace.value_at(exit_point, j) - bg_trace.value_at(exit_point, j)) / delta,
                disc,
                theta_c,
                gamma,
            );
            apertures[i].push(a);
        }
        levels_diag.push((to_f64(eps), to_f64(delta), to_f64(*apertures[i].last().unwrap())));
    }

    let mut gamma_study = Vec::new();
    let mut limit = T::nan();
    for (gi, &gamma) in schedule.gamma.iter().enumerate() {
        let seq: Vec<T> = apertures.iter().map(|row| row[gi]).collect();
        let a = schedule.extrapolate(&schedule.eps, &seq, 2);
        let v = if a > T::zero() { -a.ln() } else { T::nan() };
        gamma_study.push((to_f64(gamma), to_f64(v)));
        if gi + 1 == schedule.gamma.len() {
            limit = a;
        }
    }
    if !(limit > T::zero()) {
        return Err(Error::Degenerate(
            "effective-attenuation limit is not positive".into(),
        ));
    }
    Ok((
        -limit.ln(),
        ProbeDiagnostics {
            levels: levels_diag,
            gamma_study,
            theta_index: j_center,
            extrapolated: to_f64(limit),
        },
    ))
}

pub struct SigmaBScatteringOutput<T> {
    pub field: ScalarField<T>,
    /// Reconstructed effective attenuation field.
    pub effective: ScalarField<T>,
    /// Mean of the recovered background solution on the reconstruction grid.
    pub mean_w: ScalarField<T>,
    pub floor: T,
    /// Fraction of in-domain nodes where the effective attenuation fell
    /// below the known absorption.
    pub negative_fraction: f64,
    pub inconsistent_inputs: bool,
}

/// Recovers `sigma_b` from line data of the effective attenuation
/// `S = sigma_a + sigma_b <w>`: invert the line data, re-solve the now-linear
/// transport problem with total attenuation `S` to obtain `<w>`, and divide,
/// flooring the denominator at the positivity constant.
#[allow(clippy::too_many_arguments)]
pub fn recover_sigma_b_scattering<T: Real>(
    line_data: &Sinogram<T>,
    lines: &LineSet<T>,
    sigma_a: &ScalarField<T>,
    kernel: Option<&PhaseFunction<T>>,
    c0: T,
    grid: &GridSpec<T>,
    params: &InversionParams<T>,
    solver_disc: &Discretization<T>,
) -> Result<SigmaBScatteringOutput<T>> {
    if c0 <= T::zero() {
        return Err(Error::validation("background level c0 must be positive"));
    }
    let inv = invert_ls(InversionMode::Plain, line_data, lines, grid, params)?;
    let effective = inv.field;

    // with S known the background problem is linear in w
    let zero = ScalarField::zero(grid.clone());
    let w = solve_linear(
        solver_disc,
        &effective,
        &zero,
        &zero,
        kernel,
        &BoundarySource::constant(c0),
        solver_disc_tol(solver_disc),
    )?;
    let w_mean_solver = w.field.mean_field();
    let mean_w_values: Vec<T> = (0..grid.n_nodes())
        .map(|i| w_mean_solver.evaluate(grid.node(i)))
        .collect();
    let mean_w = ScalarField::from_values(grid.clone(), mean_w_values)?;

    // bootstrap the positivity floor from the current estimate
    let domain = &solver_disc.domain;
    let mu = domain.max_chord() * kernel.map(|k| k.sup()).unwrap_or(T::zero());
    let tiny = real::<T>(1e-12);
    let mut sb_sup = T::zero();
    let mut in_domain = 0usize;
    let mut negative = 0usize;
    for i in 0..grid.n_nodes() {
        let x = grid.node(i);
        if domain.signed_distance(x) >= T::zero() {
            continue;
        }
        in_domain += 1;
        let s = effective.values()[i];
        let a = sigma_a.values()[i];
        if s < a {
            negative += 1;
        }
        let est = (s - a).max(T::zero()) / mean_w.values()[i].max(tiny);
        sb_sup = sb_sup.max(est);
    }
    let sa_sup = sigma_a.max_value().max(T::zero());
    let floor_constant = (-(domain.diameter())
        * (sa_sup + sb_sup * c0 / (T::one() - mu)))
        .exp();
    let floor = floor_constant * c0;

    let values: Vec<T> = (0..grid.n_nodes())
        .map(|i| {
            let num = effective.values()[i] - sigma_a.values()[i];
            (num / mean_w.values()[i].max(floor)).max(T::zero())
        })
        .collect();
    let negative_fraction = if in_domain > 0 {
        negative as f64 / in_domain as f64
    } else {
        0.0
    };
    Ok(SigmaBScatteringOutput {
        field: ScalarField::from_values(grid.clone(), values)?,
        effective,
        mean_w,
        floor,
        negative_fraction,
        inconsistent_inputs: negative_fraction > 0.05,
    })
}

fn solver_disc_tol<T: Real>(_disc: &Discretization<T>) -> T {
    real(1e-12)
}

/// C-infinity plateau profile on (-1, 1) with unit integral and values in
/// [0, 1]: identically 1 on |t| <= 0.05, smooth decay to 0 at |t| = 0.95.
pub(crate) fn plateau_profile<T: Real>(t: T) -> T {
    let a = real::<T>(0.05);
    let b = real::<T>(0.95);
    let t = t.abs();
    if t <= a {
        T::one()
    } else if t >= b {
        T::zero()
    } else {
        let s = (b - t) / (b - a);
        let f = |x: T| {
            if x <= T::zero() {
                T::zero()
            } else {
                (-x.recip()).exp()
            }
        };
        f(s) / (f(s) + f(T::one() - s))
    }
}

/// Result of one pointwise kernel recovery.
#[derive(Debug, Clone)]
pub struct KPointOutput<T> {
    pub value: T,
    /// (delta, normalized measurement) per level.
    pub levels: Vec<(f64, f64)>,
    pub exit_factor: T,
    pub entry_factor: T,
    pub theta_index: usize,
    pub theta_prime_index: usize,
}

/// Pointwise recovery of the scattering kernel `k(x, theta', theta)` in 3-D
/// from single scattering: a spatially windowed beam enters toward `x` along
/// `theta'`, the exit trace is read at the `theta`-exit of `x`, and the
/// test-function window in the source realizes the boundary integral of the
/// measurement functional. The extrapolated limit is divided by the two
/// ballistic attenuation factors computed from the known `sigma_a`.
pub fn recover_k_point<T: Real>(
    oracle: &AlbedoOracle<T>,
    sigma_a: &ScalarField<T>,
    x: Vec3<T>,
    theta_prime: Vec3<T>,
    theta: Vec3<T>,
    schedule: &LimitSchedule<T>,
) -> Result<KPointOutput<T>> {
    schedule.validate()?;
    let domain = oracle.domain().clone();
    if domain.dim() != 3 {
        return Err(Error::validation("pointwise kernel recovery needs a 3-D domain"));
    }
    if schedule.eps_prime.is_empty() || schedule.gamma1.is_empty() || schedule.gamma2.is_empty()
    {
        return Err(Error::validation(
            "3-D schedules need eps_prime, gamma1 and gamma2 sequences",
        ));
    }
    let disc = oracle.discretization();
    let j_in = disc.angles.nearest(theta_prime.normalized());
    let j_out = disc.angles.nearest(theta.normalized());
    let th_in = disc.angles.direction(j_in);
    let th_out = disc.angles.direction(j_out);
    if th_in.dot(th_out).abs() >= T::one() - real::<T>(1e-6) {
        return Err(Error::validation("directions must not be parallel"));
    }
    if domain.signed_distance(x) >= T::zero() {
        return Err(Error::validation("scattering point must be interior"));
    }

    let tau_minus = domain.exit_time(x, th_in, Sign::Minus)?;
    let tau_plus = domain.exit_time(x, th_out, Sign::Plus)?;
    let x_entry = x - th_in * tau_minus;
    let x_exit = x + th_out * tau_plus;

    let eps = *schedule.eps.last().unwrap();
    let eps_prime = *schedule.eps_prime.last().unwrap();
    let gamma1 = *schedule.gamma1.last().unwrap();
    let gamma2 = *schedule.gamma2.last().unwrap();

    let window = build_window_table(
        &domain, x_entry, th_in, th_out, gamma1, gamma2, eps_prime,
    )?;

    let mut levels = Vec::new();
    let mut deltas = Vec::new();
    let mut values = Vec::new();
    for &delta in &schedule.delta {
        let beam = BoundarySource::MollifiedBeam(MollifiedBeam {
            c0: T::zero(),
            delta,
            eps,
            theta_center: th_in,
            spatial: Some(SpatialWindow {
                center: x_entry,
                eps_prime,
                table: Some(window.clone()),
            }),
        });
        let solution = oracle.solve(&beam)?;
        let m = oracle.trace_at(&beam, &solution, x_exit, j_out)? / delta;
        deltas.push(delta);
        values.push(m);
        levels.push((to_f64(delta), to_f64(m)));
    }
    // leading delta-error of the nonlinear response is linear
    let limit = schedule.extrapolate(&deltas, &values, 1);

    let exit_factor = segment_attenuation(sigma_a, x, x_exit);
    let entry_factor = segment_attenuation(sigma_a, x_entry, x);
    Ok(KPointOutput {
        value: limit / (exit_factor * entry_factor),
        levels,
        exit_factor,
        entry_factor,
        theta_index: j_out,
        theta_prime_index: j_in,
    })
}

/// `exp(-integral of sigma_a along the segment [p, q])` by trapezoid.
fn segment_attenuation<T: Real>(sigma_a: &ScalarField<T>, p: Vec3<T>, q: Vec3<T>) -> T {
    let n = 400usize;
    let len = (q - p).norm();
    let dt = len / T::from_usize(n).unwrap();
    let mut acc = T::zero();
    let mut prev = sigma_a.evaluate(p);
    for i in 1..=n {
        let t = T::from_usize(i).unwrap() * dt;
        let v = sigma_a.evaluate(p + (q - p) * (t / len));
        acc += (prev + v) * dt * real::<T>(0.5);
        prev = v;
    }
    (-acc).exp()
}

/// Tabulates the aggregated spatial window
/// `G(y) = integral over the boundary patch of
///  phi_{gamma1,gamma2}(x' - x_entry) * W_eps'(y - x') dmu(x')`
/// in the tangent frame at the beam entry, where `W` is the unit-mass
/// boundary mollifier and `phi` the exit-localizing test function.
fn build_window_table<T: Real>(
    domain: &Domain<T>,
    x_entry: Vec3<T>,
    theta_in: Vec3<T>,
    theta_out: Vec3<T>,
    gamma1: T,
    gamma2: T,
    eps_prime: T,
) -> Result<WindowTable<T>> {
    let normal = domain.normal_at(x_entry);
    if normal.dot(theta_in) > -real::<T>(0.05) {
        return Err(Error::validation(
            "beam entry is too tangential for a stable window",
        ));
    }
    // theta'_perp: unit vector in span(theta, theta') orthogonal to theta'
    let tp = theta_in;
    let mut perp = theta_out - tp * theta_out.dot(tp);
    let pn = perp.norm();
    if pn < real::<T>(1e-8) {
        return Err(Error::validation("directions must not be parallel"));
    }
    perp = perp / pn;
    let align = theta_out.dot(perp); // theta . theta'_perp

    // tangent frame at the entry point
    let seed = if normal.x.abs() < real::<T>(0.9) {
        Vec3::new(T::one(), T::zero(), T::zero())
    } else {
        Vec3::new(T::zero(), T::one(), T::zero())
    };
    let e1 = (seed - normal * seed.dot(normal)).normalized();
    let e2 = normal.cross(e1);

    let phi = |z: Vec3<T>| -> T {
        let in_plane = tp * z.dot(tp) + perp * z.dot(perp);
        let off_plane = z - in_plane;
        let t1 = z.dot(perp) / (gamma1 * align);
        plateau_profile(t1) / gamma1 * bump_profile(off_plane.norm() / gamma2)
    };
    let w_norm = real::<T>(flat_bump_mass(3)) * eps_prime * eps_prime;

    let half = gamma1 / align.abs() + eps_prime + gamma2;
    let n = 65usize;
    let nq = 49usize;

    // boundary chart around the entry point: tangent coordinates projected
    // onto the sphere, with the exact area element of the projection
    let (center, radius) = match domain.kind() {
        DomainKind::Ball3 { center, radius } => (*center, *radius),
        _ => {
            return Err(Error::validation(
                "the 3-D window chart is implemented for ball domains",
            ))
        }
    };
    let chart = |a: T, b: T| -> (Vec3<T>, T) {
        let p = x_entry + e1 * a + e2 * b;
        let v = p - center;
        let vn = v.norm();
        let vhat = v / vn;
        let point = center + vhat * radius;
        let da = (e1 - vhat * vhat.dot(e1)) * (radius / vn);
        let db = (e2 - vhat * vhat.dot(e2)) * (radius / vn);
        (point, da.cross(db).norm())
    };

    // quadrature of the test function over the source-position patch
    let dq = (half + half) / T::from_usize(nq - 1).unwrap();
    let mut phi_nodes: Vec<(Vec3<T>, T)> = Vec::new();
    for iq in 0..nq {
        for jq in 0..nq {
            let a = -half + dq * T::from_usize(iq).unwrap();
            let b = -half + dq * T::from_usize(jq).unwrap();
            let (xp, jac) = chart(a, b);
            let weight = phi(xp - x_entry) * jac * dq * dq;
            if weight > T::zero() {
                phi_nodes.push((xp, weight));
            }
        }
    }
    if phi_nodes.is_empty() {
        return Err(Error::validation(
            "test-function window is empty on the boundary patch",
        ));
    }

    let dt = (half + half) / T::from_usize(n - 1).unwrap();
    let mut values = vec![T::zero(); n * n];
    for it in 0..n {
        for jt in 0..n {
            let a = -half + dt * T::from_usize(it).unwrap();
            let b = -half + dt * T::from_usize(jt).unwrap();
            let (y, _) = chart(a, b);
            let mut g = T::zero();
            for (xp, w) in &phi_nodes {
                let r = (y - *xp).norm() / eps_prime;
                if r < T::one() {
                    g += *w * bump_profile(r);
                }
            }
            values[jt * n + it] = g / w_norm;
        }
    }
    Ok(WindowTable {
        origin: x_entry,
        e1,
        e2,
        half1: half,
        half2: half,
        n1: n,
        n2: n,
        values,
    })
}
