//! Acceptance gate: ten criteria covering the whole pipeline, one test per
//! criterion. Each prints a `criterion NN ...: PASS` line with its runtime
//! (visible under --nocapture) and fails its own runtime budget.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bergman::error::Error;
use bergman::harness::{near_zero_search, run_experiment, ExperimentConfig};
use bergman::indexing::{
    basis_coefficient, enumerate_basis, monomial_norm_sq, MultiIndex, SpaceParams,
};
use bergman::muntz::{
    muntz_distance, muntz_distance_gram, trent_density_verdict, IntegerSetDesc, PairSetDesc,
    TailConvention, TrentVerdict,
};
use bergman::operators::TruncatedOperator;
use bergman::quadrature::{ball_integral, slicing_check, QuadOptions, QuadPath};
use bergman::reconstruction::{build_constraints, nullspace_certificate, NullspaceVerdict};
use bergman::spectra::{
    degree_zero_set, omega, omega_sequence, omega_with, profile_with_zeros, OmegaMethod,
};
use bergman::symbols::{RadialProfile, SampledProfile, StepProfile, SymbolExpr, SymbolTerm};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn pass(number: u32, name: &str, started: Instant, budget_secs: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_secs,
        "criterion {number} exceeded its runtime budget: {elapsed:.2}s >= {budget_secs}s"
    );
    println!("criterion {number:02} {name}: PASS ({elapsed:.2}s < {budget_secs}s)");
}

fn ball(n: usize) -> SpaceParams {
    SpaceParams::unweighted(n).unwrap()
}

fn random_poly_profile(rng: &mut impl Rng, max_deg: usize) -> RadialProfile {
    let len = rng.random_range(1..=max_deg + 1);
    RadialProfile::PolyT2((0..len).map(|_| rng.random_range(-2.0..2.0)).collect())
}

/// Any of the four profile kinds, with well-formed data.
fn random_profile(rng: &mut impl Rng) -> RadialProfile {
    match rng.random_range(0..4u32) {
        0 => random_poly_profile(rng, 4),
        1 => RadialProfile::PowerT(rng.random_range(0.0..6.0)),
        2 => {
            let pieces = rng.random_range(2..=4usize);
            let mut breaks = vec![0.0];
            for i in 1..pieces {
                let base = i as f64 / pieces as f64;
                breaks.push(base + rng.random_range(-0.1..0.1) / pieces as f64);
            }
            breaks.push(1.0);
            let values = (0..pieces).map(|_| rng.random_range(-2.0..2.0)).collect();
            RadialProfile::Step(StepProfile { breaks, values })
        }
        _ => {
            let segments = rng.random_range(4..=8usize);
            let mut grid = vec![0.0];
            for i in 1..segments {
                let base = i as f64 / segments as f64;
                grid.push(base + rng.random_range(-0.1..0.1) / segments as f64);
            }
            grid.push(1.0);
            let values = (0..=segments).map(|_| rng.random_range(-2.0..2.0)).collect();
            RadialProfile::Sampled(SampledProfile::new(grid, values))
        }
    }
}

fn random_poly_symbol(
    rng: &mut impl Rng,
    n: usize,
    max_exp: u32,
    max_profile_deg: usize,
) -> SymbolExpr {
    let terms: Vec<SymbolTerm> = (0..rng.random_range(1..=3usize))
        .map(|_| SymbolTerm {
            coeff: Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            p: MultiIndex((0..n).map(|_| rng.random_range(0..=max_exp)).collect()),
            q: MultiIndex((0..n).map(|_| rng.random_range(0..=max_exp)).collect()),
            rho: random_poly_profile(rng, max_profile_deg),
        })
        .collect();
    SymbolExpr::new(n, terms).unwrap()
}

#[test]
fn criterion_01_omega_closed_form_agrees_with_both_quadrature_paths() {
    let started = Instant::now();
    let gauss = QuadOptions {
        path: QuadPath::Gauss,
        ..QuadOptions::default()
    };
    let adaptive = QuadOptions {
        path: QuadPath::Adaptive,
        ..QuadOptions::default()
    };
    for n in 1..=3usize {
        let flat = ball(n);
        let weighted = SpaceParams::new(n, 1.5).unwrap();
        for a in 0..=6u32 {
            let rho = RadialProfile::PowerT(a as f64);
            for s in 0..=40u32 {
                let x = n as f64 + s as f64;
                let closed = x / (x + a as f64);
                for opts in [&gauss, &adaptive] {
                    let (v, method) = omega_with(&rho, s as f64, &flat, opts).unwrap();
                    assert_eq!(method, OmegaMethod::Quadrature);
                    assert!(
                        (v - closed).abs() <= 1e-12,
                        "n={n} a={a} s={s}: quadrature {v} vs closed form {closed}"
                    );
                }
                let (g, _) = omega_with(&rho, s as f64, &weighted, &gauss).unwrap();
                let (ad, _) = omega_with(&rho, s as f64, &weighted, &adaptive).unwrap();
                assert!(
                    (g - ad).abs() <= 1e-11,
                    "n={n} a={a} s={s} alpha=1.5: Gauss {g} vs adaptive {ad}"
                );
            }
        }
    }
    pass(1, "omega closed form vs quadrature", started, 5.0);
}

#[test]
fn criterion_02_radial_symbols_assemble_exactly_diagonally() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let cutoff = 10u32;
    for trial in 0..100 {
        let n = rng.random_range(1..=3usize);
        let alpha = if rng.random_bool(0.5) { 0.0 } else { 0.75 };
        let space = SpaceParams::new(n, alpha).unwrap();
        let profile = random_profile(&mut rng);
        let f = SymbolExpr::radial(n, profile.clone()).unwrap();
        let op = TruncatedOperator::assemble(&f, &space, cutoff).unwrap();
        let seq = omega_sequence(&profile, &space, cutoff).unwrap();
        let basis = op.basis();
        for row in 0..basis.size() {
            for col in 0..basis.size() {
                let got = op.matrix()[(row, col)];
                if row != col {
                    assert_eq!(
                        got,
                        Complex64::new(0.0, 0.0),
                        "trial {trial}: off-diagonal entry ({row},{col}) not structurally zero"
                    );
                } else {
                    let want = seq.values()[basis.indices()[row].degree() as usize];
                    assert_eq!(got.im, 0.0);
                    assert!(
                        (got.re - want).abs() <= 1e-12,
                        "trial {trial}: diagonal {row}: {} vs omega {want}",
                        got.re
                    );
                }
            }
        }
    }
    pass(2, "radial symbols are diagonal with omega on the diagonal", started, 30.0);
}

#[test]
fn criterion_03_assembly_matches_brute_force_ball_integrals() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2003);
    for trial in 0..20 {
        let n = rng.random_range(1..=2usize);
        let cutoff = if n == 1 {
            rng.random_range(4..=6u32)
        } else {
            rng.random_range(3..=4u32)
        };
        let space = ball(n);
        let f = random_poly_symbol(&mut rng, n, 2, 3);
        let op = TruncatedOperator::assemble(&f, &space, cutoff).unwrap();
        let exactness = f.monomial_degree() + cutoff;
        let basis = op.basis();
        for (row, k) in basis.indices().iter().enumerate() {
            for (col, m) in basis.indices().iter().enumerate() {
                let raw = ball_integral(&f, m, k, &space, exactness).unwrap();
                let want = raw * basis_coefficient(m, &space) * basis_coefficient(k, &space);
                let got = op.matrix()[(row, col)];
                assert!(
                    (got - want).norm() <= 1e-12,
                    "trial {trial}: entry ({k}, {m}): {got} vs {want}"
                );
            }
        }
    }
    pass(3, "assembly identity vs ball integrals", started, 60.0);
}

#[test]
fn criterion_04_slicing_identity_on_random_polynomial_integrands() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2004);
    for trial in 0..50 {
        let n = rng.random_range(2..=3usize);
        let space = ball(n);
        let max_exp = if n == 2 { 2 } else { 1 };
        let g = random_poly_symbol(&mut rng, n, max_exp, 2);
        let report = slicing_check(&g, &space).unwrap();
        assert!(
            report.discrepancy <= 1e-12,
            "trial {trial} (n={n}): slicing discrepancy {}",
            report.discrepancy
        );
    }
    pass(4, "slicing identity", started, 30.0);
}

#[test]
fn criterion_05_muntz_distance_paths_agree() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2005);
    for trial in 0..200 {
        let len = rng.random_range(1..=8usize);
        let mut exponents: Vec<f64> = Vec::with_capacity(len);
        while exponents.len() < len {
            let e = rng.random_range(-0.4..8.0);
            if exponents.iter().all(|x: &f64| (x - e).abs() > 1e-3) {
                exponents.push(e);
            }
        }
        let lambda = rng.random_range(-0.4..8.0);
        let closed = muntz_distance(lambda, &exponents).unwrap();
        let gram = muntz_distance_gram(lambda, &exponents).unwrap();
        assert!(
            (closed - gram).abs() <= 1e-10,
            "trial {trial}: lambda {lambda}, {exponents:?}: {closed} vs {gram}"
        );
    }
    // dist(t, span{t^2}) = 1/(4 sqrt 3), exact by the rational Gram oracle
    let target = 0.25 / 3.0f64.sqrt();
    assert!((muntz_distance_gram(1.0, &[2.0]).unwrap() - target).abs() <= 1e-12);
    assert!((muntz_distance(1.0, &[2.0]).unwrap() - target).abs() <= 1e-12);
    pass(5, "Muntz distance dual-path agreement", started, 5.0);
}

#[test]
fn criterion_06_zero_middle_gives_exactly_zero_product() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2006);
    for trial in 0..10 {
        let n = rng.random_range(1..=2usize);
        let space = ball(n);
        // strictly positive profiles certify nonzero with an empty W
        fn positive_flanks(rng: &mut impl Rng, count: usize) -> Vec<RadialProfile> {
            (0..count)
                .map(|_| {
                    let len = rng.random_range(1..=3usize);
                    RadialProfile::PolyT2(
                        (0..len).map(|_| rng.random_range(0.5..1.5)).collect(),
                    )
                })
                .collect()
        }
        let left_count = rng.random_range(1..=3usize);
        let right_count = rng.random_range(1..=3usize);
        let config = ExperimentConfig {
            space,
            flanks_left: positive_flanks(&mut rng, left_count),
            flanks_right: positive_flanks(&mut rng, right_count),
            middle: SymbolExpr::radial(n, RadialProfile::PolyT2(vec![0.0])).unwrap(),
            cutoff: 8,
            eps_zero: 1e-10,
            support_degree: 2,
            w_tail: None,
        };
        let report = run_experiment(&config).unwrap();
        assert!(report.middle_structurally_zero, "trial {trial}");
        assert_eq!(report.product_max_abs, 0.0, "trial {trial}");
        assert_eq!(report.product_frobenius, 0.0, "trial {trial}");
    }
    pass(6, "zero middle annihilates the product exactly", started, 10.0);
}

#[test]
fn criterion_07_engineered_zero_sets_certify_only_zero() {
    let started = Instant::now();
    let space = ball(1);
    for zeros in [vec![], vec![0u32], vec![0, 2]] {
        // the engineered flank realizes exactly this zero set
        let flank = if zeros.is_empty() {
            RadialProfile::constant(1.0)
        } else {
            profile_with_zeros(&zeros, &space).unwrap()
        };
        let seq = omega_sequence(&flank, &space, 12).unwrap();
        let zset = degree_zero_set(&seq, 1e-10).unwrap();
        assert_eq!(zset.degrees, zeros, "engineered profile zero set");

        for support in 0..=4u32 {
            let constraint_degree = support + zeros.len() as u32 + 2;
            let system =
                build_constraints(support, &zeros, constraint_degree, &space).unwrap();
            let cert = nullspace_certificate(&system).unwrap();
            assert!(
                matches!(cert.verdict, NullspaceVerdict::OnlyZero),
                "W={zeros:?} A={support}: expected OnlyZero"
            );
            assert!(
                cert.sigma_min >= 1e-10,
                "W={zeros:?} A={support}: sigma_min {}",
                cert.sigma_min
            );
        }

        // a constraint budget that cannot dominate support + |W| fails loudly
        let starved = build_constraints(4, &zeros, 4 + zeros.len() as u32, &space);
        assert!(matches!(starved, Err(Error::InsufficientSlack { .. })));
    }
    pass(7, "engineered W certificates are OnlyZero, starved runs refuse", started, 20.0);
}

/// Near-zero map built directly from the coupling rule: column (a, b) holds
/// the entries of L T_{z^a conj(z)^b} R, which for radial flanks is
/// omega_L(|k|) c_k c_m |z^(m+a)|^2 omega_R(|m|) at coupled (k, m).
fn explicit_moment_map_sigma_min(
    left: &RadialProfile,
    right: &RadialProfile,
    support: u32,
    space: &SpaceParams,
    cutoff: u32,
) -> f64 {
    let window = enumerate_basis(space, support);
    let basis = enumerate_basis(space, cutoff);
    let dim = basis.size();
    let left_omega: Vec<f64> = (0..=cutoff)
        .map(|s| omega(left, s as f64, space).unwrap())
        .collect();
    let right_omega: Vec<f64> = (0..=cutoff)
        .map(|s| omega(right, s as f64, space).unwrap())
        .collect();
    let cols = window.size() * window.size();
    let mut map = DMatrix::<f64>::zeros(dim * dim, cols);
    let mut col = 0;
    for a in window.indices() {
        for b in window.indices() {
            for (ci, m) in basis.indices().iter().enumerate() {
                let coupled = m.plus(a);
                let Some(k) = coupled.checked_sub(b) else {
                    continue;
                };
                if k.degree() > cutoff {
                    continue;
                }
                let ri = basis.index_of(&k).unwrap();
                map[(ri * dim + ci, col)] = left_omega[k.degree() as usize]
                    * basis_coefficient(m, space)
                    * basis_coefficient(&k, space)
                    * monomial_norm_sq(&coupled, space)
                    * right_omega[m.degree() as usize];
            }
            col += 1;
        }
    }
    let svd = map.svd(false, false);
    let order = svd.singular_values.len();
    svd.singular_values[order - 1]
}

#[test]
fn criterion_08_near_zero_search_matches_explicit_moment_map() {
    let started = Instant::now();
    let space = ball(1);
    let support = 2u32;
    let cutoff = 5u32;
    let budget = 1_000_000;
    let constant = RadialProfile::constant(1.0);
    let pinned_profile = profile_with_zeros(&[0], &space).unwrap();

    let free = near_zero_search(
        std::slice::from_ref(&constant),
        std::slice::from_ref(&constant),
        support,
        &space,
        cutoff,
        budget,
    )
    .unwrap();
    assert!(free.sigma_min > 0.0, "empty W: the moment map is injective");

    let pinned = near_zero_search(
        std::slice::from_ref(&pinned_profile),
        std::slice::from_ref(&constant),
        support,
        &space,
        cutoff,
        budget,
    )
    .unwrap();
    assert!(
        pinned.sigma_min <= free.sigma_min + 1e-12,
        "enlarging W must not increase the minimum: {} vs {}",
        pinned.sigma_min,
        free.sigma_min
    );

    let free_oracle = explicit_moment_map_sigma_min(&constant, &constant, support, &space, cutoff);
    let pinned_oracle =
        explicit_moment_map_sigma_min(&pinned_profile, &constant, support, &space, cutoff);
    assert!(
        (free.sigma_min - free_oracle).abs() <= 1e-10,
        "empty W: {} vs oracle {}",
        free.sigma_min,
        free_oracle
    );
    assert!(
        (pinned.sigma_min - pinned_oracle).abs() <= 1e-10,
        "W={{0}}: {} vs oracle {}",
        pinned.sigma_min,
        pinned_oracle
    );
    pass(8, "near-zero search vs explicit moment map", started, 20.0);
}

#[test]
fn criterion_09_trent_verdicts_are_range_stable() {
    let started = Instant::now();
    let full = PairSetDesc::FullGrid;
    let diagonal_only = PairSetDesc::DiagonalBand {
        j_min: 0,
        j_max: 0,
        diagonals: vec![(
            0,
            IntegerSetDesc::Arithmetic { start: 0, step: 1 },
        )],
        tail: TailConvention::Empty,
    };
    for (lo, hi) in [(-1i64, 1i64), (-5, 5), (-20, 20)] {
        let report = trent_density_verdict(&full, lo, hi).unwrap();
        assert_eq!(report.verdict, TrentVerdict::Dense, "full grid on {lo}..{hi}");
        let report = trent_density_verdict(&diagonal_only, lo, hi).unwrap();
        assert_eq!(
            report.verdict,
            TrentVerdict::NotDense { witness_j: 1 },
            "diagonal-only on {lo}..{hi}"
        );
    }
    pass(9, "Trent density verdicts, stable across ranges", started, 1.0);
}

fn manifest_without_time_fields(path: &Path) -> serde_json::Value {
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let obj = doc.as_object_mut().unwrap();
    // both manifest time fields: the timestamp and the measured wall time
    obj.remove("timestamp_unix_ms").unwrap();
    obj.remove("wall_ms").unwrap();
    doc
}

#[test]
fn criterion_10_cli_reruns_are_byte_identical() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let sym_path = dir.path().join("shift.json");
    std::fs::write(
        &sym_path,
        r#"{"dim": 1, "terms": [
            {"c": [-0.5, 0.0], "p": [0], "q": [0], "rho": {"poly_t2": [1.0]}},
            {"c": [1.0, 0.0], "p": [0], "q": [0], "rho": {"poly_t2": [0.0, 1.0]}}]}"#,
    )
    .unwrap();
    let exp_path = dir.path().join("exp.json");
    std::fs::write(
        &exp_path,
        r#"{"space": {"dimension": 1, "weight_alpha": 0.0},
            "flanks_left": [{"poly_t2": [-0.5, 1.0]}],
            "flanks_right": [{"poly_t2": [1.0]}],
            "middle": {"dim": 1, "terms": [{"c": [1.0, 0.0], "p": [1], "q": [0],
                                            "rho": {"poly_t2": [1.0]}}]},
            "cutoff": 6, "eps_zero": 1e-10, "support_degree": 2}"#,
    )
    .unwrap();

    // (name of the data file, argv tail producing it)
    let sym = sym_path.to_str().unwrap();
    let exp = exp_path.to_str().unwrap();
    let jobs: Vec<(&str, Vec<String>)> = vec![
        (
            "seq.csv",
            ["omega", "--symbol", sym, "--n", "1", "--alpha", "0.5", "--smax", "15", "--csv", "seq.csv"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "mat.csv",
            ["matrix", "--symbol", sym, "--degree", "6", "--csv", "mat.csv"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "cert.json",
            ["reconstruct", "--W", "0,2", "--support", "3", "--dc", "8", "--out", "cert.json"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "report.json",
            ["zp-experiment", "--config", exp, "--out", "report.json"]
                .map(String::from)
                .to_vec(),
        ),
    ];
    for (file, args) in &jobs {
        let run = |out_dir: &Path| {
            let st = Command::new(env!("CARGO_BIN_EXE_bergman"))
                .args(args)
                .env("BERGMAN_OUT_DIR", out_dir)
                .output()
                .unwrap();
            assert_eq!(st.status.code(), Some(0), "{args:?}");
        };
        let d1 = dir.path().join(format!("{file}.run1"));
        let d2 = dir.path().join(format!("{file}.run2"));
        run(&d1);
        run(&d2);
        let b1 = std::fs::read(d1.join(file)).unwrap();
        let b2 = std::fs::read(d2.join(file)).unwrap();
        assert_eq!(b1, b2, "data file {file} differs between reruns");
        assert_eq!(
            manifest_without_time_fields(&d1.join(format!("{file}.manifest.json"))),
            manifest_without_time_fields(&d2.join(format!("{file}.manifest.json"))),
            "manifest for {file} differs beyond its time fields"
        );
    }
    pass(10, "CLI reruns byte-identical", started, 30.0);
}
