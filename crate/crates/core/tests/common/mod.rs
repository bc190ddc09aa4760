//! Shared helpers for the integration suites: an adaptive Runge-Kutta ray
//! oracle independent of the production integrators, random admissible
//! instance builders, and a suite lock that keeps wall-clock budgets honest.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::{Mutex, MutexGuard, OnceLock};
use tpa_transport::coefficients::{
    check_admissibility, make_phantom, star_norm, AdmissibilityReport, BoundarySource, GridSpec,
    Lobe, PhaseFunction, Primitive, ScalarField, SmoothSource,
};
use tpa_transport::geometry::{AngularGrid, Domain};
use tpa_transport::transport::Discretization;
use tpa_transport::vec3::Vec3;

/// Serializes expensive tests so the asserted runtimes are not polluted by
/// sibling tests sharing the two-core rayon pool.
pub fn suite_lock() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|e| e.into_inner())
}

pub fn disk() -> Domain<f64> {
    Domain::disk2(Vec3::xy(0.0, 0.0), 1.0)
}

pub fn planar_spec(n: usize) -> GridSpec<f64> {
    GridSpec::planar(Vec3::xy(-1.0, -1.0), Vec3::xy(1.0, 1.0), [n, n])
}

pub fn const_field(v: f64) -> ScalarField<f64> {
    make_phantom(&[Primitive::Constant { amplitude: v }], &planar_spec(17)).unwrap()
}

pub fn gaussian_field(
    n: usize,
    center: (f64, f64),
    amplitude: f64,
    width: f64,
) -> ScalarField<f64> {
    make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(center.0, center.1),
            amplitude,
            width,
        }],
        &planar_spec(n),
    )
    .unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Adaptive Dormand-Prince 5(4) integration of the collimated ray equation
/// `v' = -(sigma_a + sigma_b v) v` along `entry + s dir`, independent of the
/// closed-form production path. The multilinear coefficient fields have
/// derivative kinks on cell boundaries, which defeat smooth step control, so
/// the ray is cut at every grid-line crossing and integrated piecewise.
pub fn rk45_ray(
    sigma_a: &ScalarField<f64>,
    sigma_b: &ScalarField<f64>,
    v0: f64,
    entry: Vec3<f64>,
    dir: Vec3<f64>,
    length: f64,
    tol: f64,
) -> f64 {
    let mut cuts = vec![0.0, length];
    for spec in [sigma_a.spec(), sigma_b.spec()] {
        for axis in 0..3 {
            if spec.shape[axis] <= 1 {
                continue;
            }
            let da = dir.component(axis);
            if da.abs() < 1e-14 {
                continue;
            }
            let lo = spec.lo.component(axis);
            let d = spec.spacing(axis);
            for i in 0..spec.shape[axis] {
                let s = (lo + d * i as f64 - entry.component(axis)) / da;
                if s > 0.0 && s < length {
                    cuts.push(s);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut v = v0;
    for w in cuts.windows(2) {
        v = rk45_segment(sigma_a, sigma_b, v, entry, dir, w[0], w[1], tol);
    }
    v
}

fn rk45_segment(
    sigma_a: &ScalarField<f64>,
    sigma_b: &ScalarField<f64>,
    v0: f64,
    entry: Vec3<f64>,
    dir: Vec3<f64>,
    s_start: f64,
    s_end: f64,
    tol: f64,
) -> f64 {
    let length = s_end - s_start;
    if length <= 0.0 {
        return v0;
    }
    let f = |s: f64, v: f64| -> f64 {
        let p = entry + dir * (s_start + s);
        -(sigma_a.evaluate(p) + sigma_b.evaluate(p) * v) * v
    };
    let mut s = 0.0;
    let mut v = v0;
    let mut h = (length / 8.0).min(1e-2).max(1e-12);
    let a = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
    ];
    let b5 = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    let b4 = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [0.0f64; 7];
    let mut steps = 0usize;
    while s < length {
        if s + h > length {
            h = length - s;
        }
        k[0] = f(s, v);
        for stage in 1..6 {
            let mut acc = 0.0;
            for j in 0..stage {
                acc += a[stage][j] * k[j];
            }
            k[stage] = f(s + h * c_node(stage), v + h * acc);
        }
        let v5 = v + h * (0..6).map(|j| b5[j] * k[j]).sum::<f64>();
        k[6] = f(s + h, v5);
        let v4 = v + h * (0..7).map(|j| b4[j] * k[j]).sum::<f64>();
        let scale = tol + tol * v.abs().max(v5.abs());
        let err = ((v5 - v4) / scale).abs();
        if err <= 1.0 {
            s += h;
            v = v5;
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * factor).min(length).max(1e-14);
        steps += 1;
        assert!(steps < 2_000_000, "RK oracle failed to advance");
    }
    v
}

fn c_node(stage: usize) -> f64 {
    [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0][stage]
}

/// A randomized admissible coefficient tuple on the unit disk with targeted
/// smallness parameters.
pub struct Instance {
    pub domain: Domain<f64>,
    pub disc: Discretization<f64>,
    pub sigma_a: ScalarField<f64>,
    pub sigma_b: ScalarField<f64>,
    pub kernel: Option<PhaseFunction<f64>>,
    pub source: BoundarySource<f64>,
    pub report: AdmissibilityReport<f64>,
}

pub fn random_admissible(
    rng: &mut ChaCha8Rng,
    grid_n: usize,
    n_angles: usize,
    mu_max: f64,
    nu_max: f64,
) -> Instance {
    let domain = disk();
    let angles = AngularGrid::s1(n_angles).unwrap();
    let disc = Discretization::new(domain.clone(), grid_n, angles.clone());
    let spec = planar_spec(grid_n);

    let mu_target = rng.gen_range(0.3 * mu_max..mu_max);
    let anisotropic = rng.gen_bool(0.4);
    let (p_table, p_max) = if anisotropic {
        (vec![0.6, 1.0, 1.4], 1.4)
    } else {
        (vec![1.0, 1.0], 1.0)
    };
    let kappa_amp = mu_target / (2.0 * p_max);
    let kernel = if mu_target > 1e-3 {
        let kappa =
            make_phantom(&[Primitive::Constant { amplitude: kappa_amp }], &spec).unwrap();
        Some(PhaseFunction::new(kappa, p_table).unwrap())
    } else {
        None
    };

    let mut lobes = Vec::new();
    for _ in 0..rng.gen_range(0..3usize) {
        lobes.push(Lobe {
            amplitude: rng.gen_range(0.0..1.0),
            axis: Vec3::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)),
            sharpness: rng.gen_range(1..5),
            spatial: None,
        });
    }
    let source = BoundarySource::Smooth(SmoothSource {
        base: rng.gen_range(0.2..1.0),
        lobes,
    });
    let star = star_norm(&source, &domain, &angles, grid_n * grid_n).unwrap();

    let nu_target = rng.gen_range(0.2 * nu_max..nu_max);
    let sb_amp = nu_target * (1.0 - mu_target) * (1.0 - mu_target) / (2.0 * star);
    let sigma_b = make_phantom(&[Primitive::Constant { amplitude: sb_amp }], &spec).unwrap();
    let sigma_a = make_phantom(
        &[
            Primitive::Constant {
                amplitude: rng.gen_range(0.0..0.4),
            },
            Primitive::Gaussian {
                center: Vec3::xy(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)),
                amplitude: rng.gen_range(0.0..0.4),
                width: rng.gen_range(0.25..0.6),
            },
        ],
        &spec,
    )
    .unwrap();

    let report = check_admissibility(
        &sigma_a,
        &sigma_b,
        kernel.as_ref(),
        &source,
        &domain,
        &angles,
        grid_n * grid_n,
    )
    .unwrap();
    assert!(report.pass, "instance generator produced mu={} nu={}", report.mu, report.nu);
    Instance {
        domain,
        disc,
        sigma_a,
        sigma_b,
        kernel,
        source,
        report,
    }
}
