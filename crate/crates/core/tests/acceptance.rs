//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured figures (run with `--nocapture` to see them).

mod common;

use common::{rel_err, suite_lock};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use tpa_transport::coefficients::{
    make_phantom, BoundarySource, GridSpec, Lobe, PhaseFunction, Primitive, ScalarField,
    SmoothSource, SpatialProfile,
};
use tpa_transport::geometry::{AngularGrid, Domain, Sign};
use tpa_transport::metrics::rel_l2;
use tpa_transport::reconstruction::{
    recover_effective_attenuation, recover_k_point, recover_sigma_a_scatterfree,
    recover_sigma_b_scatterfree, recover_sigma_b_scattering, recover_xray_sigma_a_scattering,
    AlbedoOracle, LimitSchedule, OracleSettings,
};
use tpa_transport::transforms::{xray, InversionParams, LineSet};
use tpa_transport::transport::{
    expansion_terms, solve_linear, solve_nonlinear, solve_riccati_ray, trace_at, Discretization,
    SolveSettings,
};
use tpa_transport::vec3::Vec3;

fn ray_phantoms() -> (ScalarField<f64>, ScalarField<f64>) {
    let spec = common::planar_spec(65);
    let sa = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(0.1, -0.05),
            amplitude: 0.4,
            width: 0.45,
        }],
        &spec,
    )
    .unwrap();
    let sb = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(-0.15, 0.1),
            amplitude: 0.3,
            width: 0.5,
        }],
        &spec,
    )
    .unwrap();
    (sa, sb)
}

fn random_inward_ray(rng: &mut ChaCha8Rng) -> (Vec3<f64>, Vec3<f64>) {
    loop {
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let entry = Vec3::from_angle(a);
        let b = rng.gen_range(0.0..std::f64::consts::TAU);
        let dir = Vec3::from_angle(b);
        if entry.dot(dir) < -0.2 {
            return (entry, dir);
        }
    }
}

#[test]
fn criterion_01_riccati_exactness() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let domain = common::disk();
    let (sa, sb) = ray_phantoms();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..64 {
        let (entry, dir) = random_inward_ray(&mut rng);
        let v0 = rng.gen_range(0.5..2.0);
        let profile =
            solve_riccati_ray(&sa, &sb, v0, entry, dir, &domain, 2.0e-5).unwrap();
        let reference = common::rk45_ray(
            &sa,
            &sb,
            v0,
            entry,
            dir,
            profile.chord_length(),
            1.0e-12,
        );
        worst = worst.max(rel_err(profile.exit_value(), reference));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(worst <= 1.0e-8, "max relative error {worst:.3e}");
    assert!(elapsed < 5.0, "took {elapsed:.1} s");
    println!("PASS criterion 01: riccati vs adaptive RK, max rel err {worst:.2e} ({elapsed:.2} s)");
}

#[test]
fn criterion_02_nonlinear_matches_riccati() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let domain = common::disk();
    let (sa, sb) = ray_phantoms();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let theta0 = Vec3::from_angle(rng.gen_range(0.0..std::f64::consts::TAU));
    let f = BoundarySource::collimated(SpatialProfile::Constant(1.0), theta0);
    let disc = Discretization::new(domain.clone(), 257, AngularGrid::s1(16).unwrap());
    let settings = SolveSettings {
        outer_tol: 1.0e-10,
        ..SolveSettings::default()
    };
    let out = solve_nonlinear(&disc, &sa, &sb, None, &f, &settings).unwrap();

    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 64 {
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let entry = Vec3::from_angle(a);
        if entry.dot(theta0) > -0.25 {
            continue;
        }
        count += 1;
        let profile =
            solve_riccati_ray(&sa, &sb, 1.0, entry, theta0, &domain, 1.0e-5).unwrap();
        let exit_point = entry + theta0 * profile.chord_length();
        let grid_exit = trace_at(&disc, &sa, &sb, None, &f, &out.field, exit_point, 0).unwrap();
        worst = worst.max(rel_err(grid_exit, profile.exit_value()));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(worst <= 1.0e-4, "max relative error {worst:.3e}");
    assert!(elapsed < 30.0, "took {elapsed:.1} s");
    println!(
        "PASS criterion 02: nonlinear collimated solve vs riccati, max rel err {worst:.2e} ({elapsed:.2} s)"
    );
}

#[test]
fn criterion_03_a_priori_bound() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_ratio = 0.0f64;
    for _ in 0..20 {
        let inst = common::random_admissible(&mut rng, 17, 16, 0.6, 0.8);
        let out = solve_nonlinear(
            &inst.disc,
            &inst.sigma_a,
            &inst.sigma_b,
            inst.kernel.as_ref(),
            &inst.source,
            &SolveSettings::default(),
        )
        .unwrap();
        let bound = inst.report.star / (1.0 - inst.report.mu) * (1.0 + 1.0e-6);
        let observed = out.field.sup_mean_abs();
        worst_ratio = worst_ratio.max(observed / bound);
        assert!(
            observed <= bound,
            "mean bound violated: {observed} > {bound} (mu {}, nu {})",
            inst.report.mu,
            inst.report.nu
        );
    }
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "PASS criterion 03: a-priori mean bound holds on 20 instances, worst ratio {worst_ratio:.6} ({elapsed:.2} s)"
    );
}

#[test]
fn criterion_04_contraction_ratio() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let inst = common::random_admissible(&mut rng, 17, 16, 0.5, 0.7);
        let radius = inst.report.star / (1.0 - inst.report.mu);
        let spec = inst.disc.grid.clone();
        let mean_of = |m: &ScalarField<f64>| {
            solve_linear(
                &inst.disc,
                &inst.sigma_a,
                &inst.sigma_b,
                m,
                inst.kernel.as_ref(),
                &inst.source,
                1.0e-13,
            )
            .unwrap()
            .field
            .mean_field()
        };
        for _ in 0..10 {
            let draw = |rng: &mut ChaCha8Rng| {
                let vals: Vec<f64> = (0..spec.n_nodes())
                    .map(|_| rng.gen_range(-radius..radius))
                    .collect();
                ScalarField::from_values(spec.clone(), vals).unwrap()
            };
            let m1 = draw(&mut rng);
            let m2 = draw(&mut rng);
            let c1 = mean_of(&m1);
            let c2 = mean_of(&m2);
            let num = c1
                .values()
                .iter()
                .zip(c2.values())
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            let den = m1
                .values()
                .iter()
                .zip(m2.values())
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            let ratio = num / den;
            worst = worst.max(ratio / inst.report.nu);
            assert!(
                ratio <= inst.report.nu * 1.05,
                "Lipschitz ratio {ratio} exceeds nu {} * 1.05",
                inst.report.nu
            );
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "PASS criterion 04: mean-field map Lipschitz ratio <= nu * 1.05, worst ratio/nu {worst:.4} ({elapsed:.2} s)"
    );
}

#[test]
fn criterion_05_positivity_floor() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let domain = common::disk();
    let spec = common::planar_spec(33);
    let sa = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(0.1, 0.0),
            amplitude: 0.4,
            width: 0.3,
        }],
        &spec,
    )
    .unwrap();
    let sb = make_phantom(&[Primitive::Constant { amplitude: 0.1 }], &spec).unwrap();
    let kappa = make_phantom(&[Primitive::Constant { amplitude: 0.15 }], &spec).unwrap();
    let kernel = PhaseFunction::isotropic(kappa).unwrap();
    let c0 = 1.0;
    let disc = Discretization::new(domain.clone(), 33, AngularGrid::s1(32).unwrap());
    let out = solve_nonlinear(
        &disc,
        &sa,
        &sb,
        Some(&kernel),
        &BoundarySource::constant(c0),
        &SolveSettings::default(),
    )
    .unwrap();
    let report = &out.admissibility;
    let floor = (-(domain.diameter())
        * (sa.max_value() + sb.max_value() * report.star / (1.0 - report.mu)))
        .exp()
        * c0;
    // the bound concerns points of the domain; nodes whose rays miss stay 0
    let mut min_inside = f64::INFINITY;
    for node in 0..disc.n_nodes() {
        if domain.signed_distance(disc.grid.node(node)) < 0.0 {
            for j in 0..disc.n_angles() {
                min_inside = min_inside.min(out.field.value(node, j));
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(
        min_inside >= floor - 1.0e-8,
        "min radiance {min_inside} fell below the floor {floor}"
    );
    println!(
        "PASS criterion 05: positivity floor {floor:.4e} <= min radiance {min_inside:.4e} ({elapsed:.2} s)"
    );
}

#[test]
fn criterion_06_expansion_order() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let domain = common::disk();
    let spec = common::planar_spec(33);
    let sa = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(0.0, 0.1),
            amplitude: 0.3,
            width: 0.4,
        }],
        &spec,
    )
    .unwrap();
    let sb = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(-0.1, -0.1),
            amplitude: 0.12,
            width: 0.5,
        }],
        &spec,
    )
    .unwrap();
    let kappa = make_phantom(&[Primitive::Constant { amplitude: 0.1 }], &spec).unwrap();
    let kernel = PhaseFunction::isotropic(kappa).unwrap();
    let disc = Discretization::new(domain, 33, AngularGrid::s1(32).unwrap());
    let settings = SolveSettings {
        outer_tol: 1.0e-11,
        inner_tol: 1.0e-12,
        ..SolveSettings::default()
    };
    let lobe = |amp: f64| Lobe {
        amplitude: amp,
        axis: Vec3::xy(1.0, 0.0),
        sharpness: 4,
        spatial: None,
    };
    let f0 = BoundarySource::constant(1.0);
    let f1 = BoundarySource::Smooth(SmoothSource {
        base: 0.0,
        lobes: vec![lobe(1.0)],
    });
    let exp = expansion_terms(&disc, &sa, &sb, Some(&kernel), &f0, &f1, &settings).unwrap();

    let deltas = [1.0e-2, 5.0e-3, 2.5e-3];
    let mut remainders = Vec::new();
    for &delta in &deltas {
        let f = BoundarySource::Smooth(SmoothSource {
            base: 1.0,
            lobes: vec![lobe(delta)],
        });
        let u = solve_nonlinear(&disc, &sa, &sb, Some(&kernel), &f, &settings).unwrap();
        let mut sup = 0.0f64;
        for i in 0..u.field.values().len() {
            let r = u.field.values()[i]
                - exp.u0.field.values()[i]
                - delta * exp.u1.values()[i];
            sup = sup.max(r.abs());
        }
        remainders.push(sup / (delta * delta));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    for w in remainders.windows(2) {
        assert!(
            w[1] <= 2.0 * w[0],
            "second-order remainder degraded: R = {remainders:?}"
        );
    }
    assert!(elapsed < 120.0, "took {elapsed:.1} s");
    println!(
        "PASS criterion 06: expansion remainder R(delta) = {remainders:?} stays second order ({elapsed:.2} s)"
    );
}

fn scatterfree_oracle() -> (AlbedoOracle<f64>, ScalarField<f64>, ScalarField<f64>) {
    let domain = common::disk();
    let grid64 = common::planar_spec(64);
    let sa_truth = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(0.15, -0.1),
            amplitude: 0.4,
            width: 0.3,
        }],
        &grid64,
    )
    .unwrap();
    let sb_truth = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(-0.2, 0.15),
            amplitude: 0.3,
            width: 0.4,
        }],
        &grid64,
    )
    .unwrap();
    let mut settings = OracleSettings::new(33, 64);
    settings.ray_step = 1.0e-3;
    let oracle = AlbedoOracle::new(
        domain,
        sa_truth.clone(),
        sb_truth.clone(),
        None,
        AngularGrid::s1(16).unwrap(),
        settings,
    );
    (oracle, sa_truth, sb_truth)
}

#[test]
fn criterion_07_sigma_a_round_trip_scatterfree() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let (oracle, sa_truth, _) = scatterfree_oracle();
    let lines = LineSet::parallel_beam_2d(oracle.domain(), 120, 120).unwrap();
    let grid64 = common::planar_spec(64);
    let params = InversionParams {
        lambda: None,
        max_iters: 400,
        tol: 1.0e-9,
        step: 0.02,
    };
    let out = recover_sigma_a_scatterfree(&oracle, &lines, (1.0, 0.5), &grid64, &params).unwrap();
    let err = rel_l2(&out.field, &sa_truth, oracle.domain(), 0.0).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(out.dropped.is_empty(), "dropped {} lines", out.dropped.len());
    assert!(err.rel_l2 <= 0.05, "relative L2 {}", err.rel_l2);
    assert!(elapsed < 60.0, "took {elapsed:.1} s");
    println!(
        "PASS criterion 07: scatter-free sigma_a round trip rel L2 {:.4} ({elapsed:.2} s)",
        err.rel_l2
    );
}

#[test]
fn criterion_08_sigma_b_round_trip_scatterfree() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let (oracle, sa_truth, sb_truth) = scatterfree_oracle();
    let lines = LineSet::parallel_beam_2d(oracle.domain(), 120, 120).unwrap();
    let grid64 = common::planar_spec(64);
    let params = InversionParams {
        lambda: None,
        max_iters: 400,
        tol: 1.0e-9,
        step: 0.02,
    };
    let out =
        recover_sigma_b_scatterfree(&oracle, &sa_truth, &lines, 1.0, &grid64, &params).unwrap();
    let err = rel_l2(&out.field, &sb_truth, oracle.domain(), 0.0).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(err.rel_l2 <= 0.08, "relative L2 {}", err.rel_l2);
    assert!(elapsed < 90.0, "took {elapsed:.1} s");
    println!(
        "PASS criterion 08: scatter-free sigma_b round trip rel L2 {:.4} ({elapsed:.2} s)",
        err.rel_l2
    );
}

#[test]
fn criterion_09_scattering_line_values() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let domain = common::disk();
    let spec = common::planar_spec(25);
    let a = 0.4;
    let sa = make_phantom(&[Primitive::Constant { amplitude: a }], &spec).unwrap();
    let sb = make_phantom(&[Primitive::Constant { amplitude: 0.25 }], &spec).unwrap();
    let kappa = make_phantom(&[Primitive::Constant { amplitude: 0.15 }], &spec).unwrap();
    let kernel = PhaseFunction::isotropic(kappa).unwrap();
    let mut settings = OracleSettings::new(25, 512);
    settings.solve.outer_tol = 1.0e-9;
    settings.solve.inner_tol = 1.0e-11;
    let oracle = AlbedoOracle::new(
        domain.clone(),
        sa,
        sb,
        Some(&kernel).cloned(),
        AngularGrid::s1(2048).unwrap(),
        settings,
    );
    let schedule = LimitSchedule {
        eps: vec![0.05, 0.025],
        delta: vec![1.0e-3, 5.0e-4],
        gamma: vec![0.05, 0.025, 0.0125],
        eps_prime: vec![],
        gamma1: vec![],
        gamma2: vec![],
        extrapolation: 1,
    };
    let exit_point = Vec3::xy(1.0, 0.0);
    let theta_prime = Vec3::xy(1.0, 0.0);
    let (value, diag) =
        recover_xray_sigma_a_scattering(&oracle, theta_prime, exit_point, &schedule).unwrap();
    let chord = domain
        .exit_time(exit_point, theta_prime, Sign::Minus)
        .unwrap();
    let truth = a * chord;
    let err = rel_err(value, truth);

    // gamma-convergence slope from the per-gamma recovered values
    let pts: Vec<(f64, f64)> = diag
        .gamma_study
        .iter()
        .filter(|(_, v)| v.is_finite())
        .map(|(g, v)| (g.ln(), (v - truth).abs().max(1e-14).ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    let elapsed = t0.elapsed().as_secs_f64();
    assert!(err <= 0.02, "line value {value} vs {truth}: rel err {err:.4}");
    assert!(slope >= 0.8, "gamma slope {slope:.3} below 0.8: {:?}", diag.gamma_study);
    println!(
        "PASS criterion 09: scattering-case line value rel err {err:.4}, gamma slope {slope:.2} ({elapsed:.2} s)"
    );
}

#[test]
fn criterion_10_theorem_b_pipeline() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let domain = common::disk();
    let spec = common::planar_spec(33);
    let sa = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(0.1, -0.05),
            amplitude: 0.3,
            width: 0.4,
        }],
        &spec,
    )
    .unwrap();
    let sb = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(-0.1, 0.1),
            amplitude: 0.1,
            width: 0.4,
        }],
        &spec,
    )
    .unwrap();
    let kappa = make_phantom(&[Primitive::Constant { amplitude: 0.15 }], &spec).unwrap();
    let kernel = PhaseFunction::isotropic(kappa).unwrap();
    let c0 = 1.0;

    // (a) one probe line, beam-extracted vs forward-computed line integral
    let mut probe_settings = OracleSettings::new(33, 512);
    probe_settings.solve.outer_tol = 1.0e-7;
    probe_settings.solve.inner_tol = 1.0e-9;
    let probe_oracle = AlbedoOracle::new(
        domain.clone(),
        sa.clone(),
        sb.clone(),
        Some(kernel.clone()),
        AngularGrid::s1(1024).unwrap(),
        probe_settings,
    );
    let schedule = LimitSchedule {
        eps: vec![0.1, 0.05],
        delta: vec![1.0e-3],
        gamma: vec![0.1, 0.05],
        eps_prime: vec![],
        gamma1: vec![],
        gamma2: vec![],
        extrapolation: 1,
    };
    let exit_point = Vec3::xy(1.0, 0.0);
    let theta_prime = Vec3::xy(1.0, 0.0);
    let (probe_value, _diag) =
        recover_effective_attenuation(&probe_oracle, c0, theta_prime, exit_point, &schedule)
            .unwrap();
    // forward truth: solve the background problem, integrate the effective
    // attenuation along the same chord
    let w_fine = probe_oracle.solve(&BoundarySource::constant(c0)).unwrap();
    let w_mean_fine = w_fine.field.mean_field();
    let truth = {
        let n = 4000;
        let dt = 2.0 / n as f64;
        let mut acc = 0.0;
        let mut prev = {
            let p = Vec3::xy(-1.0, 0.0);
            sa.evaluate(p) + sb.evaluate(p) * w_mean_fine.evaluate(p)
        };
        for i in 1..=n {
            let p = Vec3::xy(-1.0 + dt * i as f64, 0.0);
            let v = sa.evaluate(p) + sb.evaluate(p) * w_mean_fine.evaluate(p);
            acc += 0.5 * (prev + v) * dt;
            prev = v;
        }
        acc
    };
    let probe_err = rel_err(probe_value, truth);
    assert!(
        probe_err <= 0.02,
        "effective attenuation {probe_value} vs {truth}: rel err {probe_err:.4}"
    );

    // (b) field part: effective-attenuation sinogram from the background
    // solution (the measurement the per-line procedure converges to, as
    // certified above), inverted and divided back
    let mut field_settings = OracleSettings::new(41, 128);
    field_settings.solve.outer_tol = 1.0e-8;
    let field_oracle = AlbedoOracle::new(
        domain.clone(),
        sa.clone(),
        sb.clone(),
        Some(kernel.clone()),
        AngularGrid::s1(128).unwrap(),
        field_settings,
    );
    let w = field_oracle.solve(&BoundarySource::constant(c0)).unwrap();
    let s_solver_grid = {
        let disc = field_oracle.discretization();
        let sa_nodes = disc.sample(&sa);
        let sb_nodes = disc.sample(&sb);
        let values: Vec<f64> = (0..disc.n_nodes())
            .map(|i| sa_nodes[i] + sb_nodes[i] * w.field.mean()[i])
            .collect();
        ScalarField::from_values(disc.grid.clone(), values).unwrap()
    };
    let lines = LineSet::parallel_beam_2d(&domain, 120, 120).unwrap();
    let s_data = xray(&s_solver_grid, &lines, 0.01).unwrap();
    let grid64 = common::planar_spec(64);
    let sa64 = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(0.1, -0.05),
            amplitude: 0.3,
            width: 0.4,
        }],
        &grid64,
    )
    .unwrap();
    let sb64 = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(-0.1, 0.1),
            amplitude: 0.1,
            width: 0.4,
        }],
        &grid64,
    )
    .unwrap();
    let params = InversionParams {
        lambda: None,
        max_iters: 400,
        tol: 1.0e-9,
        step: 0.02,
    };
    let out = recover_sigma_b_scattering(
        &s_data,
        &lines,
        &sa64,
        Some(&kernel),
        c0,
        &grid64,
        &params,
        field_oracle.discretization(),
    )
    .unwrap();
    let err = rel_l2(&out.field, &sb64, &domain, 0.1).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(!out.inconsistent_inputs, "effective attenuation fell below sigma_a");
    assert!(err.rel_l2 <= 0.10, "sigma_b field rel L2 {}", err.rel_l2);
    assert!(elapsed < 600.0, "took {elapsed:.1} s");
    println!(
        "PASS criterion 10: effective attenuation rel err {probe_err:.4}, sigma_b field rel L2 {:.4} ({elapsed:.1} s)",
        err.rel_l2
    );
}

#[test]
fn criterion_11_k_point_recovery_3d() {
    let _g = suite_lock();
    let t0 = Instant::now();
    let domain: Domain<f64> = Domain::ball3(Vec3::new(0.0, 0.0, 0.0), 1.0);
    let spec = GridSpec::volumetric(
        Vec3::new(-1.0, -1.0, -1.0),
        Vec3::new(1.0, 1.0, 1.0),
        [24, 24, 24],
    );
    let kappa_amp = 0.1; // mu = 0.2 on the unit ball
    let sa = make_phantom(&[Primitive::Constant { amplitude: 0.2 }], &spec).unwrap();
    let sb = make_phantom(&[Primitive::Constant { amplitude: 0.02 }], &spec).unwrap();
    let kappa = make_phantom(&[Primitive::Constant { amplitude: kappa_amp }], &spec).unwrap();
    let kernel = PhaseFunction::isotropic(kappa).unwrap();
    let mut settings = OracleSettings::new(24, 16);
    settings.solve.outer_tol = 1.0e-8;
    settings.solve.inner_tol = 1.0e-9;
    settings.chord_step = Some(2.0 / 23.0); // one grid spacing
    let angles = AngularGrid::s2(10, 20).unwrap();
    let oracle = AlbedoOracle::new(
        domain.clone(),
        sa.clone(),
        sb,
        Some(kernel),
        angles.clone(),
        settings,
    );
    let schedule = LimitSchedule {
        eps: vec![1.0e-3],
        delta: vec![1.0e-3],
        gamma: vec![0.1],
        eps_prime: vec![0.18],
        gamma1: vec![0.22],
        gamma2: vec![0.22],
        extrapolation: 0,
    };

    let points = [Vec3::new(0.2, 0.1, -0.05), Vec3::new(-0.15, -0.1, 0.1)];
    let mut worst = 0.0f64;
    let mut checked = 0;
    for &x in &points {
        // two inflow directions and two non-parallel readout directions
        let tp1 = angles.nearest(Vec3::new(1.0, 0.3, 0.2));
        let tp2 = angles.nearest(Vec3::new(-0.4, 1.0, -0.3));
        for &jp in &[tp1, tp2] {
            let theta_prime = angles.direction(jp);
            let mut picked = 0;
            for j in 0..angles.len() {
                let theta: Vec3<f64> = angles.direction(j);
                if theta.dot(theta_prime).abs() < 0.5 && picked < 2 {
                    picked += 1;
                    let out = recover_k_point(&oracle, &sa, x, theta_prime, theta, &schedule)
                        .unwrap();
                    let err = rel_err(out.value, kappa_amp);
                    worst = worst.max(err);
                    checked += 1;
                    assert!(
                        err <= 0.15,
                        "recovered k {} vs {kappa_amp} at triple {checked}: rel err {err:.3}",
                        out.value
                    );
                }
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert_eq!(checked, 8, "expected 8 sampled triples");
    assert!(elapsed < 900.0, "took {elapsed:.1} s");
    println!(
        "PASS criterion 11: pointwise k recovery on 8 triples, worst rel err {worst:.3} ({elapsed:.1} s)"
    );
}

#[test]
fn criterion_12_adjoint_consistency() {
    let _g = suite_lock();
    let t0 = Instant::now();
    use tpa_transport::transforms::{attenuated_xray, Sinogram};
    let domain = common::disk();
    let grid = common::planar_spec(21);
    let lines = LineSet::parallel_beam_2d(&domain, 9, 11).unwrap();
    let att = make_phantom(
        &[Primitive::Gaussian {
            center: Vec3::xy(0.1, 0.0),
            amplitude: 0.5,
            width: 0.4,
        }],
        &grid,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let mut worst = 0.0f64;
    for pair in 0..20 {
        let attenuated = pair % 2 == 1;
        let g_vals: Vec<f64> = (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y_vals: Vec<f64> = (0..lines.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = ScalarField::from_values(grid.clone(), g_vals.clone()).unwrap();
        // forward via the public transform
        let ag = if attenuated {
            attenuated_xray(&g, &att, &lines, 0.03).unwrap()
        } else {
            xray(&g, &lines, 0.03).unwrap()
        };
        let _ = Sinogram { values: y_vals.clone() };
        // adjoint via the inversion operator's internals is exercised in unit
        // tests; here the identity is checked through invert_ls gradients:
        // <Ag, y> accumulated directly vs <g, A^T y> via one CG step probe
        let lhs: f64 = ag.values.iter().zip(&y_vals).map(|(a, b)| a * b).sum();
        let rhs = adjoint_probe(&lines, &grid, attenuated.then_some(&att), &y_vals, &g_vals);
        let scale = lhs.abs().max(rhs.abs()).max(1e-30);
        worst = worst.max(((lhs - rhs) / scale).abs());
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(worst <= 1.0e-10, "adjoint mismatch {worst:.3e}");
    println!(
        "PASS criterion 12: transform adjoint consistency, worst rel mismatch {worst:.2e} ({elapsed:.2} s)"
    );
}

/// `<g, A^T y>` computed through the discretized transform used by the
/// inverter (trapezoid samples, multilinear footprint).
fn adjoint_probe(
    lines: &LineSet<f64>,
    grid: &GridSpec<f64>,
    att: Option<&ScalarField<f64>>,
    y: &[f64],
    g: &[f64],
) -> f64 {
    use tpa_transport::transforms::adjoint_apply;
    let aty = adjoint_apply(lines, grid, att, 0.03, y);
    aty.iter().zip(g).map(|(a, b)| a * b).sum()
}
