use approx::assert_relative_eq;
use orthant_lamperti::analytics::{
    corrective_jump_cdf, corrective_jump_sampler, effective_sigma, jump_vector_v, killing_rate, reference_sigma,
    sde_coefficients,
};
use orthant_lamperti::clock::Clock;
use orthant_lamperti::csvio::{read_map, read_skeleton, write_map, write_skeleton};
use orthant_lamperti::geometry::{l1_norm, polar_compose, polar_decompose, reflect_once, SimplexPoint, SIMPLEX_TOL};
use orthant_lamperti::lamperti::{map_to_ssmp, skeleton_distance, ssmp_to_map};
use orthant_lamperti::levy::StableParams;
use orthant_lamperti::path::{EventTag, JumpMark, PathStatus, SkeletonPath};
use orthant_lamperti::rng::stream;
use proptest::prelude::*;

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3..10.0f64, d)
}

fn angle(d: usize) -> impl Strategy<Value = SimplexPoint> {
    point(d).prop_map(|v| SimplexPoint::normalize(&v).unwrap())
}

/// Alive skeleton in the open orthant with increasing event times.
fn skeleton() -> impl Strategy<Value = SkeletonPath> {
    (2usize..5).prop_flat_map(|d| {
        prop::collection::vec((1e-4..0.5f64, point(d), any::<bool>()), 1..40).prop_map(move |steps| {
            let mut p = SkeletonPath::start(&vec![1.0; d]);
            let mut t = 0.0;
            for (dt, x, jump) in steps {
                t += dt;
                let (mark, tag) =
                    if jump { (Some(JumpMark { coord: 0, size: x[0] - p.last_value()[0] }), EventTag::Jump) } else { (None, EventTag::Grid) };
                p.push(t, &x, mark, tag);
            }
            p.horizon = t + 0.1;
            p
        })
    })
}

fn stable() -> impl Strategy<Value = StableParams> {
    (0.3..1.9f64, 0.05..0.95f64).prop_filter_map("admissible", |(a, r)| StableParams::new(a, r).ok())
}

proptest! {
    #[test]
    fn polar_roundtrip(x in (2usize..6).prop_flat_map(point)) {
        let p = polar_decompose(&x).unwrap();
        let a = p.angle().unwrap();
        prop_assert!((a.components().iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL);
        let back = polar_compose(&p, x.len());
        for (u, v) in x.iter().zip(&back) {
            assert_relative_eq!(u, v, max_relative = 1e-14);
        }
    }

    #[test]
    fn angle_is_invariant_under_dyadic_scaling(x in (2usize..6).prop_flat_map(point), k in -20i32..20) {
        let s = 2f64.powi(k);
        let y: Vec<f64> = x.iter().map(|c| c * s).collect();
        let (p, q) = (polar_decompose(&x).unwrap(), polar_decompose(&y).unwrap());
        prop_assert_eq!(p.angle(), q.angle());
        assert_relative_eq!(p.log_norm() + f64::from(k) * std::f64::consts::LN_2, q.log_norm(), epsilon = 1e-13);
    }

    #[test]
    fn reflection_keeps_norm_and_lands_in_orthant(x in (2usize..6).prop_flat_map(point), j in 0usize..2) {
        let mut y = x.clone();
        y[j] = -y[j];
        let r = reflect_once(&y).unwrap();
        prop_assert_eq!(l1_norm(&r), l1_norm(&y));
        prop_assert_eq!(&r, &x);
    }

    #[test]
    fn clock_inverse_is_right_inverse(rates in prop::collection::vec(1e-3..50.0f64, 1..30), u in 0.0..1.0f64) {
        let times: Vec<f64> = (0..=rates.len()).map(|k| k as f64 * 0.1).collect();
        let c = Clock::from_rates(&times, &rates).unwrap();
        let target = u * c.terminal();
        let s = c.invert(target).unwrap();
        assert_relative_eq!(c.eval(s), target, max_relative = 1e-12, epsilon = 1e-12);
        prop_assert!(c.eval(s - 1e-9 * (1.0 + s)) <= target + 1e-12);
    }

    #[test]
    fn lamperti_roundtrip_is_exact(z in skeleton(), alpha in 0.5..2.0f64) {
        let m = ssmp_to_map(&z, alpha).unwrap();
        m.validate().unwrap();
        let back = map_to_ssmp(&m, alpha).unwrap();
        prop_assert!(skeleton_distance(&z, &back) <= 1e-9);
        // MAP time is the Lamperti clock, so it increases with ssMp time.
        prop_assert!(m.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn path_csv_roundtrip(z in skeleton(), alpha in 0.5..2.0f64) {
        let mut buf = Vec::new();
        write_skeleton(&z, &mut buf).unwrap();
        prop_assert_eq!(&read_skeleton(buf.as_slice()).unwrap(), &z);
        let m = ssmp_to_map(&z, alpha).unwrap();
        let mut buf = Vec::new();
        write_map(&m, &mut buf).unwrap();
        prop_assert_eq!(read_map(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn levy_constants(p in stable(), delta in 0.01..10.0f64) {
        prop_assert!(p.c1() >= 0.0 && p.c2() >= 0.0);
        let a = p.alpha();
        assert_relative_eq!(p.tail_mass(delta), (p.c1() + p.c2()) * delta.powf(-a) / a, max_relative = 1e-12);
        let psi = p.char_exponent(0.0);
        prop_assert!(psi.norm() == 0.0);
        // |E e^{izX}| ≤ 1.
        prop_assert!(p.char_exponent(1.3).re >= -1e-12);
    }

    #[test]
    fn killing_rate_is_scale_free(params in stable().prop_filter("two-sided", |p| p.is_two_sided()), x in point(3), k in -10i32..10) {
        let ps = vec![params; 3];
        let y: Vec<f64> = x.iter().map(|c| c * 2f64.powi(k)).collect();
        prop_assert_eq!(killing_rate(&ps, &x).unwrap(), killing_rate(&ps, &y).unwrap());
        let th = SimplexPoint::normalize(&x).unwrap();
        let closed: f64 = th.components().iter().map(|t| params.c2() * t.powf(-params.alpha()) / params.alpha()).sum();
        assert_relative_eq!(killing_rate(&ps, &x).unwrap(), closed, max_relative = 1e-12);
    }

    #[test]
    fn jump_vector_stays_on_simplex(th in (2usize..6).prop_flat_map(angle), j in 0usize..2, y in -5.0..5.0f64) {
        if let Ok(v) = jump_vector_v(&th, j, y) {
            prop_assert!((v.components().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(v.components().iter().all(|&c| c >= 0.0));
        } else {
            // Only killing jumps have no landing angle.
            prop_assert!(y <= (1.0 - th[j]).ln());
        }
    }

    #[test]
    fn corrective_cdf_is_a_distribution(alpha in 0.3..1.9f64, th in angle(2), x in -3.0..3.0f64, h in 0.0..2.0f64) {
        let f = corrective_jump_cdf(alpha, &th, x).unwrap();
        let g = corrective_jump_cdf(alpha, &th, x + h).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f) && f <= g + 1e-15);
        prop_assert!(corrective_jump_cdf(alpha, &th, 60.0).unwrap() > 1.0 - 1e-6_f64.max(2.0 * (-alpha * 60.0f64).exp()));
    }

    #[test]
    fn corrective_sampler_lands_on_simplex(alpha in 0.3..1.9f64, th in (2usize..5).prop_flat_map(angle), seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let (j, dx, after) = corrective_jump_sampler(alpha, &th, &mut rng).unwrap();
        prop_assert!(j < th.dim());
        prop_assert!(dx >= (1.0 - th[j]).ln());
        prop_assert!((after.components().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sde_identities(t1 in 0.0..=1.0f64) {
        let th = SimplexPoint::new(vec![t1, 1.0 - t1]).unwrap();
        let c = sde_coefficients(&th).unwrap();
        assert_relative_eq!(c.lambda2 * c.lambda3, 2.0, epsilon = 1e-14);
        let (e, r) = (effective_sigma(&c), reference_sigma(t1, 1.0 - t1));
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((e[i][j] - r[i][j]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn killed_status_survives_csv() {
    let mut z = SkeletonPath::start(&[0.5, 0.5]);
    z.push(0.3, &[-0.1, 0.5], Some(JumpMark { coord: 0, size: -0.6 }), EventTag::Kill);
    z.status = PathStatus::Killed { time: 0.3, coord: Some(0), overshoot: 0.1 };
    z.horizon = 0.3;
    let mut buf = Vec::new();
    write_skeleton(&z, &mut buf).unwrap();
    assert_eq!(read_skeleton(buf.as_slice()).unwrap(), z);
}
