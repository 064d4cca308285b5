//! Field-level properties of the wave-function layer: orthonormality on the
//! sphere, rotation consistency through explicit Cartesian frame changes,
//! and mode projection.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use svwe_channel::quadrature::SphereQuadrature;
use svwe_channel::specfun::RadialKind;
use svwe_channel::swe::{
    modes, project_field_onto_modes, rotate_coefficients, svwf, synthesize_field, Frame, ModeCoefficients,
    ModeIndex, SphericalPoint, VectorFieldSample,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_coeffs(rng: &mut ChaCha8Rng, nmax: usize) -> ModeCoefficients {
    let mut t = ModeCoefficients::zeros(nmax);
    for mode in modes(nmax) {
        t.set(mode, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unwrap();
    }
    t
}

/// Frame obtained from the reference one by `phi` about z, then `theta`
/// about the new y. Columns are the new axes in reference coordinates.
fn frame_axes(phi: f64, theta: f64) -> Matrix3<f64> {
    let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), phi);
    let ry = Rotation3::from_axis_angle(&Vector3::y_axis(), theta);
    (rz * ry).into_inner()
}

fn rel_close(a: &Vector3<Complex64>, b: &Vector3<Complex64>, tol: f64) -> bool {
    let diff: f64 = (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    diff <= tol * scale
}

#[test]
fn tangential_angular_functions_are_orthonormal() {
    // The angular parts are F_1/z_n for TE and the tangential F_2 divided by
    // (1/kr) d(kr z_n)/d(kr) for TM. Fixes the Legendre normalization.
    let nmax = 5;
    let quad = SphereQuadrature::for_degree(nmax);
    let k = 1.0;
    let r = 2.7;
    let radial_factors: Vec<(Complex64, Complex64)> = (0..=nmax)
        .map(|n| svwf_radial(RadialKind::Outward, n, k * r))
        .collect();
    let all: Vec<ModeIndex> = modes(nmax).collect();
    let mut samples: Vec<Vec<[Complex64; 2]>> = vec![Vec::new(); all.len()];
    let mut weights = Vec::new();
    for (theta, phi, w) in quad.nodes() {
        let p = SphericalPoint::new(r, theta, phi).unwrap();
        weights.push(w);
        for (i, &mode) in all.iter().enumerate() {
            let f = svwf(RadialKind::Outward, mode, &p, k).unwrap();
            let radial = if mode.s == 1 { radial_factors[mode.n].0 } else { radial_factors[mode.n].1 };
            samples[i].push([f.components[1] / radial, f.components[2] / radial]);
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..all.len() {
        for b in 0..all.len() {
            let mut acc = c(0.0, 0.0);
            for (q, &w) in weights.iter().enumerate() {
                let (x, y) = (samples[a][q], samples[b][q]);
                acc += (x[0].conj() * y[0] + x[1].conj() * y[1]) * w;
            }
            let expect = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((acc - c(expect, 0.0)).norm());
        }
    }
    assert!(worst < 1e-8, "worst deviation from identity {worst:e}");
}

// (z_n, (1/x) d(x z_n)/dx) packed as a pair of complex values.
fn svwf_radial(kind: RadialKind, n: usize, x: f64) -> (Complex64, Complex64) {
    if n == 0 {
        return (c(0.0, 0.0), c(0.0, 0.0));
    }
    let z = svwe_channel::specfun::radial(kind, n, x).unwrap();
    let d = svwe_channel::specfun::radial_kr_derivative(kind, n, x).unwrap() / x;
    (z, d)
}

#[test]
fn rotation_reproduces_field_in_rotated_frame() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let k = 2.0;
    for _ in 0..20 {
        let t = random_coeffs(&mut rng, 3);
        let phi0 = rng.random_range(0.0..2.0 * PI);
        let theta0 = rng.random_range(0.0..PI);
        let rotated = rotate_coefficients(&t, phi0, theta0);
        let axes = frame_axes(phi0, theta0);
        for kind in [RadialKind::Outward, RadialKind::Regular] {
            let x = Vector3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let p = SphericalPoint::from_cartesian(x).unwrap();
            let p_rot = SphericalPoint::from_cartesian(axes.transpose() * x).unwrap();
            let e = synthesize_field(&t, kind, &p, k, 1.0, c(1.0, 0.0)).unwrap().with_frame(Frame::Global);
            let e_rot = synthesize_field(&rotated, kind, &p_rot, k, 1.0, c(1.0, 0.0)).unwrap().with_frame(Frame::Local);
            let v = e.to_cartesian();
            let v_in_rotated = axes.map(|a| c(a, 0.0)).transpose() * v;
            assert!(rel_close(&v_in_rotated, &e_rot.to_cartesian(), 1e-9));
        }
    }
}

#[test]
fn tilted_dipole_spreads_only_within_degree_one() {
    let mut t = ModeCoefficients::zeros(2);
    t.set(ModeIndex::new(2, 0, 1).unwrap(), c(1.0, 0.0)).unwrap();
    let r = rotate_coefficients(&t, 0.0, PI / 2.0);
    for (mode, v) in r.iter() {
        if mode.n != 1 || mode.s != 2 {
            assert_eq!(v.norm(), 0.0);
        }
    }
    let nonzero = r.iter().filter(|(_, v)| v.norm() > 1e-12).count();
    assert_eq!(nonzero, 2); // m = ±1; d^1_{00}(π/2) = 0
    assert!((r.power() - 1.0).abs() < 1e-12);
}

#[test]
fn projection_recovers_basis_functions() {
    let k = 1.0;
    let r_sample = 3.0;
    let nmax = 3;
    let target_a = ModeIndex::new(2, -1, 2).unwrap();
    let target_b = ModeIndex::new(1, 3, 3).unwrap();
    let sampler = |p: &SphericalPoint| -> svwe_channel::Result<VectorFieldSample> {
        let a = svwf(RadialKind::Regular, target_a, p, k)?;
        let b = svwf(RadialKind::Regular, target_b, p, k)?;
        let mut out = a;
        for i in 0..3 {
            out.components[i] = a.components[i] * 2.0 + b.components[i] * c(0.0, 3.0);
        }
        Ok(out)
    };
    let p = project_field_onto_modes(sampler, nmax, r_sample, k, 12).unwrap();
    for (mode, v) in p.iter() {
        let expect = if mode == target_a {
            c(2.0, 0.0)
        } else if mode == target_b {
            c(0.0, 3.0)
        } else {
            c(0.0, 0.0)
        };
        assert!((v - expect).norm() < 1e-8, "{mode:?}: {v}");
    }
}

#[test]
fn projection_refuses_radius_at_bessel_zero() {
    // j_1 has its first zero at x ≈ 4.493409457909064.
    let sampler = |p: &SphericalPoint| Ok(VectorFieldSample::zero(*p, Frame::Local));
    let err = project_field_onto_modes(sampler, 2, 4.493409457909064, 1.0, 8).unwrap_err();
    assert!(matches!(err, svwe_channel::Error::Conditioning { .. }));
}

#[test]
fn projection_resynthesizes_distant_dipole_field() {
    // Outgoing TM10 source 40 units away along x; its field around the origin
    // is source-free and expandable in regular waves.
    let k = 1.0;
    let source = Vector3::new(40.0, 0.0, 0.0);
    let mut dipole = ModeCoefficients::zeros(1);
    dipole.set(ModeIndex::new(2, 0, 1).unwrap(), c(1.0, 0.0)).unwrap();
    let field_at = |x: Vector3<f64>| -> Vector3<Complex64> {
        let p = SphericalPoint::from_cartesian(x - source).unwrap();
        synthesize_field(&dipole, RadialKind::Outward, &p, k, 1.0, c(1.0, 0.0)).unwrap().to_cartesian()
    };
    let nmax = 14;
    let r_sample = 2.2;
    let p = project_field_onto_modes(
        |pt: &SphericalPoint| {
            let v = field_at(pt.to_cartesian());
            Ok(VectorFieldSample::from_cartesian(*pt, Frame::Local, &v))
        },
        nmax,
        r_sample,
        k,
        40,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let x = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let pt = SphericalPoint::from_cartesian(x).unwrap();
        let resynth = synthesize_field(&p, RadialKind::Regular, &pt, k, 1.0, c(1.0, 0.0)).unwrap().to_cartesian();
        assert!(rel_close(&field_at(x), &resynth, 1e-4));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rotation_preserves_power(seed in 0u64..10_000, phi in 0.0..(2.0 * PI), theta in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_coeffs(&mut rng, 4);
        let r = rotate_coefficients(&t, phi, theta);
        prop_assert!((r.power() - t.power()).abs() <= 1e-12 * t.power());
    }

    #[test]
    fn regular_synthesis_is_mean_of_travelling(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_coeffs(&mut rng, 3);
        let p = SphericalPoint::new(rng.random_range(0.3..3.0), rng.random_range(0.0..PI), rng.random_range(0.0..6.0)).unwrap();
        let v = c(0.4, 1.1);
        let f1 = synthesize_field(&t, RadialKind::Regular, &p, 1.7, 377.0, v).unwrap();
        let f3 = synthesize_field(&t, RadialKind::Outward, &p, 1.7, 377.0, v).unwrap();
        let f4 = synthesize_field(&t, RadialKind::Inward, &p, 1.7, 377.0, v).unwrap();
        for i in 0..3 {
            let avg = (f3.components[i] + f4.components[i]) * 0.5;
            prop_assert!((avg - f1.components[i]).norm() <= 1e-12 * (1.0 + f1.components[i].norm()));
        }
    }
}
