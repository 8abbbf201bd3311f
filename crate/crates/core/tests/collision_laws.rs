//! Statistical and algebraic properties of the collision rules.

use std::f64::consts::PI;

use granot_core::collision::{
    contraction_factor_cross_section, contraction_factor_gain, frame_from_axis, kac_post_collision, kac_rate,
    post_collision_pair, sample_gain, sample_sigma, CrossSection,
};
use granot_core::ensemble::InitialRecipe;
use granot_core::numeric::integrate;
use granot_core::rng::stream_rng;
use granot_core::transport::{sphere::uniform_direction, w2_exact_assignment};
use granot_core::vec3::{self, Vec3};
use proptest::prelude::*;
use rand::Rng;

fn random_vec<R: Rng>(rng: &mut R, scale: f64) -> Vec3 {
    std::array::from_fn(|_| scale * (2.0 * rng.random::<f64>() - 1.0))
}

#[test]
fn momentum_is_conserved_per_collision() {
    let mut rng = stream_rng(1, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000_000 {
        let v = random_vec(&mut rng, 10.0);
        let w = random_vec(&mut rng, 10.0);
        let sigma = uniform_direction(&mut rng);
        let e = rng.random_range(0.01..=1.0);
        let (vp, wp) = post_collision_pair(&v, &w, &sigma, e).unwrap();
        let before = vec3::add(&v, &w);
        let after = vec3::add(&vp, &wp);
        let scale = vec3::norm(&v) + vec3::norm(&w);
        worst = worst.max(vec3::norm(&vec3::sub(&before, &after)) / scale);
    }
    assert!(worst <= 1e-13, "relative momentum drift {worst:e}");
}

#[test]
fn energy_never_increases() {
    let mut rng = stream_rng(1, 1);
    let mut strict = 0;
    for _ in 0..100_000 {
        let v = random_vec(&mut rng, 3.0);
        let w = random_vec(&mut rng, 3.0);
        let sigma = uniform_direction(&mut rng);
        let e = rng.random_range(0.01..1.0);
        let (vp, wp) = post_collision_pair(&v, &w, &sigma, e).unwrap();
        let before = vec3::dot(&v, &v) + vec3::dot(&w, &w);
        let after = vec3::dot(&vp, &vp) + vec3::dot(&wp, &wp);
        assert!(after <= before + 1e-12);
        if after < before - 1e-12 {
            strict += 1;
        }
    }
    assert!(strict > 99_000);
}

#[test]
fn elastic_collision_along_relative_velocity_keeps_energy() {
    let mut rng = stream_rng(1, 2);
    for _ in 0..1000 {
        let v = random_vec(&mut rng, 3.0);
        let w = random_vec(&mut rng, 3.0);
        let u = vec3::sub(&v, &w);
        let sigma = vec3::scale(&u, 1.0 / vec3::norm(&u));
        let (vp, wp) = post_collision_pair(&v, &w, &sigma, 1.0).unwrap();
        let before = vec3::dot(&v, &v) + vec3::dot(&w, &w);
        let after = vec3::dot(&vp, &vp) + vec3::dot(&wp, &wp);
        assert!((after - before).abs() < 1e-12 * before.max(1.0));
    }
}

#[test]
fn isotropic_kernel_fills_octants_evenly() {
    let mut rng = stream_rng(2, 0);
    let k = vec3::scale(&[1.0, 2.0, -2.0], 1.0 / 3.0);
    let xs = CrossSection::constant();
    let n = 80_000;
    let mut counts = [0usize; 8];
    let mut mean_cos = 0.0;
    for _ in 0..n {
        let s = sample_sigma(&k, &xs, &mut rng).unwrap();
        let idx = (s[0] > 0.0) as usize | ((s[1] > 0.0) as usize) << 1 | ((s[2] > 0.0) as usize) << 2;
        counts[idx] += 1;
        mean_cos += vec3::dot(&s, &k);
    }
    let expected = n as f64 / 8.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 7 degrees of freedom; the 99.9% quantile is 24.3
    assert!(chi2 < 24.3, "chi2 = {chi2}, counts {counts:?}");
    // σ·k is uniform on [-1, 1]: standard error sqrt(1/3n) ≈ 0.002
    assert!((mean_cos / n as f64).abs() < 0.01);
}

#[test]
fn linear_kernel_mean_cosine() {
    let xs = CrossSection::from_density("linear", |c| (1.0 + c) / (4.0 * PI)).unwrap();
    assert!((xs.mean_cosine() - 1.0 / 3.0).abs() < 1e-10);
    let mut rng = stream_rng(2, 1);
    let n = 200_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let k = uniform_direction(&mut rng);
        acc += vec3::dot(&sample_sigma(&k, &xs, &mut rng).unwrap(), &k);
    }
    let m = acc / n as f64;
    assert!((m - 1.0 / 3.0).abs() < 0.01 / 3.0, "E[σ·k] = {m}");
}

#[test]
fn narrow_forward_kernel_keeps_direction() {
    // triangular spike on [1 - w, 1], normalized: 2π · (w/2) · h = 1
    let w = 1e-3;
    let h = 1.0 / (PI * w);
    let xs = CrossSection::from_density("spike", move |c| if c > 1.0 - w { h * (c - (1.0 - w)) / w } else { 0.0 })
        .unwrap();
    let mut rng = stream_rng(2, 2);
    let k = vec3::scale(&[0.0, 3.0, 4.0], 0.2);
    for _ in 0..1000 {
        let s = sample_sigma(&k, &xs, &mut rng).unwrap();
        assert!(vec3::dot(&s, &k) > 1.0 - 2.0 * w);
    }
}

#[test]
fn tabulated_kernel_matches_closed_form() {
    let rows: Vec<(f64, f64)> = (0..=20).map(|k| {
        let c = -1.0 + k as f64 / 10.0;
        (c, 2.0 * (1.0 + c))
    }).collect();
    let xs = CrossSection::from_table(&rows).unwrap();
    assert!(xs.normalization_residual() > 0.1);
    assert!((xs.density(0.5) - 1.5 / (4.0 * PI)).abs() < 1e-12);
    assert!((xs.mean_cosine() - 1.0 / 3.0).abs() < 1e-10);
    for e in [0.0, 0.3, 0.8] {
        let g = contraction_factor_cross_section(e, &xs).unwrap();
        assert!((g - ((3.0 + e * e) / 4.0 + (1.0 - e * e) / 12.0)).abs() < 1e-10);
    }
}

#[test]
fn gain_factor_is_monotone() {
    let mut prev = contraction_factor_gain(0.0).unwrap();
    for k in 1..=100 {
        let g = contraction_factor_gain(k as f64 / 100.0).unwrap();
        assert!(g > prev);
        prev = g;
    }
    assert_eq!(prev, 1.0);
}

#[test]
fn kac_rate_matches_gamma_function_form() {
    // (1/2π)∫|cos|^q = Γ((q+1)/2) / (sqrt(π) Γ(q/2 + 1)); for integer p this is
    // the central binomial ratio (2m-1)!!/(2m)!! with q = 2m
    for p in 1..=6 {
        let m = p + 1;
        let mut ratio = 1.0;
        for j in 1..=m {
            ratio *= (2 * j - 1) as f64 / (2 * j) as f64;
        }
        let beta = 0.5 * (1.0 - 2.0 * ratio);
        assert!((kac_rate(p as f64).unwrap() - beta).abs() < 1e-10, "p = {p}");
    }
    let mut prev = 0.0;
    for k in 1..40 {
        let b = kac_rate(k as f64 * 0.25).unwrap();
        assert!(b > prev && b < 0.5);
        prev = b;
    }
}

#[test]
fn quadrature_reproduces_time_integral() {
    // ∫_0^t (θ0^{-1/2} + c s)^{-1} ds = ln(1 + c sqrt(θ0) t) / c
    let (c, theta0, t) = (0.375, 2.0, 3.0);
    let q = integrate(|s| 1.0 / (1.0 / f64::sqrt(theta0) + c * s), 0.0, t, 1e-13);
    assert!((q - (c * theta0.sqrt() * t).ln_1p() / c).abs() < 1e-10);
}

#[test]
fn gain_operator_contracts_small_sample() {
    let n = 600;
    let mut rng = stream_rng(3, 0);
    let zero = vec![0.0; 3];
    let f = InitialRecipe::Gaussian { mean: zero.clone(), theta: 1.0 }.build(n, 3, &mut rng).unwrap();
    let g = InitialRecipe::UniformCube { mean: zero.clone(), theta: 3.0 }.build(n, 3, &mut rng).unwrap();
    let f2 = InitialRecipe::Gaussian { mean: zero, theta: 1.0 }.build(n, 3, &mut rng).unwrap();
    let d0 = w2_exact_assignment(f.velocities(), g.velocities(), 3).unwrap().0;
    let slack = 3.0 * w2_exact_assignment(f.velocities(), f2.velocities(), 3).unwrap().0;
    let e = 0.5;
    let qf = sample_gain(f.velocities(), e, &CrossSection::constant(), n, &mut rng).unwrap();
    let qg = sample_gain(g.velocities(), e, &CrossSection::constant(), n, &mut rng).unwrap();
    let d1 = w2_exact_assignment(&qf, &qg, 3).unwrap().0;
    assert!(d1 <= contraction_factor_gain(e).unwrap() * d0 + slack);
}

proptest! {
    #[test]
    fn frames_are_orthonormal_and_right_handed(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let n = (x * x + y * y + z * z).sqrt();
        prop_assume!(n > 1e-3);
        let k = [x / n, y / n, z / n];
        for axis in [k, vec3::scale(&k, -1.0)] {
            let (t1, t2, kk) = frame_from_axis(&axis).unwrap();
            let basis = [t1, t2, kk];
            for a in 0..3 {
                for b in 0..3 {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((vec3::dot(&basis[a], &basis[b]) - expect).abs() < 1e-12);
                }
            }
            let c = vec3::cross(&t1, &t2);
            prop_assert!(vec3::norm(&vec3::sub(&c, &kk)) < 1e-12);
        }
    }

    #[test]
    fn kac_energy_identity(v in -10.0f64..10.0, w in -10.0f64..10.0, theta in 0.0f64..(2.0 * PI), p in 0.0f64..4.0) {
        let (a, b) = kac_post_collision(v, w, theta, p);
        let factor = theta.cos().abs().powf(2.0 * (p + 1.0)) + theta.sin().abs().powf(2.0 * (p + 1.0));
        let expected = factor * (v * v + w * w);
        prop_assert!((a * a + b * b - expected).abs() <= 1e-12 * (v * v + w * w).max(1e-300));
    }

    #[test]
    fn post_collision_speeds_stay_on_the_sphere(
        v in prop::array::uniform3(-5.0f64..5.0),
        w in prop::array::uniform3(-5.0f64..5.0),
        e in 0.01f64..=1.0,
        seed in any::<u64>(),
    ) {
        // v' lies on the sphere of center (v+w)/2 + (1-e)(v-w)/4, radius (1+e)|v-w|/4
        let sigma = uniform_direction(&mut stream_rng(seed, 0));
        let (vp, _) = post_collision_pair(&v, &w, &sigma, e).unwrap();
        let u = vec3::sub(&v, &w);
        let center = vec3::add(&vec3::scale(&vec3::add(&v, &w), 0.5), &vec3::scale(&u, 0.25 * (1.0 - e)));
        let r = 0.25 * (1.0 + e) * vec3::norm(&u);
        prop_assert!((vec3::norm(&vec3::sub(&vp, &center)) - r).abs() < 1e-12);
    }
}
