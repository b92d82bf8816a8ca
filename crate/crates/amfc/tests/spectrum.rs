use amfc::probability::{ProbabilitySequence, TailRule};
use amfc::spectrum::{
    apply_f, eigen_residual, eigenvector, iterate_f, iterate_f_traced, membership_via_q,
    spectral_mapping_check, OrbitStatus, ESCAPE_TOLERANCE,
};
use amfc::transition::build_truncated;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn const_seq(d: u32, p: f64) -> ProbabilitySequence {
    ProbabilitySequence::constant(d, p).unwrap()
}

#[test]
fn one_stays_exactly_fixed_for_a_thousand_levels() {
    let sequences = [
        const_seq(2, 0.8),
        const_seq(3, 0.55),
        ProbabilitySequence::new(
            2,
            vec![0.9, 0.31, 0.67],
            TailRule::IidUniform { lo: 0.05, hi: 0.99, seed: 11, skip: 0 },
        )
        .unwrap(),
    ];
    for probs in &sequences {
        let result = iterate_f_traced(c(1.0, 0.0), probs, 1000);
        assert!(result.is_inside());
        let trace = result.trace.unwrap();
        assert_eq!(trace.len(), 1000);
        assert!(trace.iter().all(|&m| m == 1.0), "1 must be exactly fixed");
    }
}

#[test]
fn constant_half_spectrum_is_the_unit_segment() {
    // d = 2, p = 1/2: the cascade is z -> (2z - 1)^2, conjugate to the
    // Chebyshev map w^2 - 2; the bounded set is the segment [0, 1].
    let probs = const_seq(2, 0.5);
    for i in 0..=50 {
        let x = i as f64 / 50.0;
        let status = iterate_f(c(x, 0.0), &probs, 4096).status;
        assert!(
            matches!(status, OrbitStatus::Bounded { .. }),
            "x = {x} left the segment: {status:?}"
        );
    }
    for z in [
        c(-0.02, 0.0),
        c(1.02, 0.0),
        c(0.5, 0.05),
        c(0.25, -0.05),
        c(0.9, 0.1),
        c(-0.5, 0.3),
        c(1.5, 0.0),
    ] {
        let status = iterate_f(z, &probs, 4096).status;
        assert!(
            matches!(status, OrbitStatus::Escaped { .. }),
            "{z} should escape"
        );
    }
}

#[test]
fn real_slice_of_the_three_quarters_spectrum_is_a_half_wider_segment() {
    // d = 2, p = 3/4: on the real axis the bounded set is [-1/2, 1]; the
    // membership factor q_1 is negative on the left part, which is why
    // membership tests the moduli and never the signs.
    let probs = const_seq(2, 0.75);
    for x in [-0.5, -0.4, -0.1, 0.0, 0.3, 0.7, 1.0] {
        let result = membership_via_q(c(x, 0.0), &probs, 2048);
        assert!(result.result.is_inside(), "x = {x} is inside");
        if x < -0.25 {
            assert!(result.q[0].re < 0.0, "first factor is negative at x = {x}");
        }
    }
    for x in [-0.6, -0.52, 1.03, 1.4] {
        assert!(
            !iterate_f(c(x, 0.0), &probs, 2048).is_inside(),
            "x = {x} is outside"
        );
    }
}

#[test]
fn bounded_orbits_keep_every_membership_factor_in_the_disk() {
    let probs = const_seq(2, 0.8);
    let budget = 512;
    let mut inside_seen = 0;
    for i in 0..40 {
        for j in 0..40 {
            let z = c(-0.8 + 2.0 * i as f64 / 39.0, -1.0 + 2.0 * j as f64 / 39.0);
            let m = membership_via_q(z, &probs, budget);
            if m.result.is_inside() {
                inside_seen += 1;
                assert_eq!(m.q.len(), budget);
                assert!(
                    m.q.iter().all(|q| q.norm() <= 1.0 + ESCAPE_TOLERANCE),
                    "inside point {z} has a factor outside the disk"
                );
            } else {
                let last = m.q.last().unwrap();
                assert!(last.norm() > 1.0, "escape forces the last factor out");
            }
        }
    }
    assert!(inside_seen > 100, "grid too coarse: {inside_seen}");
}

#[test]
fn membership_routes_agree_bit_for_bit() {
    let probs = ProbabilitySequence::new(
        3,
        vec![0.75, 2.0 / 3.0],
        TailRule::Constant { value: 0.75 },
    )
    .unwrap();
    for i in 0..25 {
        for j in 0..25 {
            let z = c(-0.9 + 2.0 * i as f64 / 24.0, -0.9 + 1.8 * j as f64 / 24.0);
            let direct = iterate_f(z, &probs, 96);
            let via_q = membership_via_q(z, &probs, 96);
            assert_eq!(direct.status, via_q.result.status);
        }
    }
}

#[test]
fn orbit_levels_shift_by_exactly_one_under_the_advanced_point() {
    let sequences = [
        const_seq(2, 0.7),
        ProbabilitySequence::new(
            2,
            vec![0.6, 0.85],
            TailRule::IidUniform { lo: 0.5, hi: 0.95, seed: 5, skip: 0 },
        )
        .unwrap(),
    ];
    for probs in &sequences {
        let shifted_probs = probs.shift(1);
        for i in 0..30 {
            for j in 0..10 {
                let z = c(
                    -0.4 + 1.4 * i as f64 / 29.0,
                    -0.45 + 0.9 * j as f64 / 9.0,
                );
                let check = spectral_mapping_check(z, probs, 64);
                assert!(check.agrees, "disagreement at {z}: {check:?}");

                // the traces themselves coincide bitwise, offset by one
                let base = iterate_f_traced(z, probs, 65).trace.unwrap();
                let advanced = apply_f(z, probs.p(1), probs.d());
                let shifted = iterate_f_traced(advanced, &shifted_probs, 64)
                    .trace
                    .unwrap();
                assert_eq!(&base[1..], &shifted[..base.len() - 1]);
            }
        }
    }
}

/// Scans the default spectrum window for points the orbit test keeps, used
/// to feed the eigenvector residual checks with genuine interior samples.
fn inside_samples(probs: &ProbabilitySequence, want: usize) -> Vec<Complex64> {
    let p1 = probs.p(1);
    let (cx, half) = (1.0 - p1, 1.2 * p1);
    let mut found = Vec::new();
    let n = 60;
    for i in 0..n {
        for j in 0..n {
            let z = c(
                cx - half + 2.0 * half * i as f64 / (n - 1) as f64,
                -half + 2.0 * half * j as f64 / (n - 1) as f64,
            );
            // stay away from the boundary: demand a healthy margin budget
            if iterate_f(z, probs, 512).is_inside() {
                found.push(z);
                if found.len() == want {
                    return found;
                }
            }
        }
    }
    found
}

#[test]
fn interior_eigenvalues_have_tiny_residuals() {
    for probs in [
        const_seq(2, 0.8),
        const_seq(3, 0.8),
        ProbabilitySequence::new(
            3,
            vec![0.75, 2.0 / 3.0],
            TailRule::Constant { value: 0.75 },
        )
        .unwrap(),
    ] {
        let d = probs.d() as usize;
        let size = d.pow(5);
        let op = build_truncated(&probs, size).unwrap();
        let samples = inside_samples(&probs, 40);
        assert!(samples.len() >= 30, "not enough interior samples");
        for lambda in samples {
            let slice = eigenvector(lambda, &probs, size, c(1.0, 0.0));
            assert!(!slice.overflow);
            let residual = eigen_residual(&slice, &op);
            assert!(
                residual < 1e-10,
                "residual {residual} at lambda = {lambda} (d = {d})"
            );
        }
    }
}

#[test]
fn exterior_eigenvalues_blow_the_residual_or_overflow() {
    let probs = const_seq(2, 0.8);
    let size = 256;
    let op = build_truncated(&probs, size).unwrap();

    // just outside: the formal eigenvector grows and roundoff amplifies
    let lambda = c(0.1, 0.9);
    assert!(!iterate_f(lambda, &probs, 512).is_inside());
    let slice = eigenvector(lambda, &probs, size, c(1.0, 0.0));
    let residual = eigen_residual(&slice, &op);
    assert!(
        slice.overflow || residual > 1e-6,
        "exterior point looks interior: residual {residual}"
    );

    // far outside: the entries overflow outright
    let far = eigenvector(c(1.5, 0.0), &probs, size, c(1.0, 0.0));
    assert!(far.overflow);
}

#[test]
fn interior_residual_ignores_the_clipped_boundary_rows() {
    // residuals are only meaningful on rows whose carry stays inside the
    // truncation; sizes one below a power of d exercise the skip logic
    let probs = const_seq(2, 0.8);
    let samples = inside_samples(&probs, 3);
    for &size in &[31usize, 32, 33] {
        let op = build_truncated(&probs, size).unwrap();
        for &lambda in &samples {
            let slice = eigenvector(lambda, &probs, size, c(1.0, 0.0));
            assert!(eigen_residual(&slice, &op) < 1e-10);
        }
    }
}
