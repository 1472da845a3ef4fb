//! Desk-scale acceptance checks, one test per contract item. Tolerances and
//! budgets are pinned here rather than read from configuration so that a
//! regression in either the engine or the corpus shows up as a failing line.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use invlift::desing::{apply_chain, chain_forward_point, resolve_nc_2d, ResolveOptions};
use invlift::lifter::{lift_curve, lift_multi, LiftChart, LiftOptions, LiftProblem};
use invlift::roots::isolate_clusters;
use invlift::textio::parse_series;
use invlift::weak::{glue_power_substitution, VerifyOptions};
use invlift::{
    assemble_weak_lift, check_real_orders, run_corpus, section_map, verify_weak, ChartMap, Family,
    InvariantSystem, Membership, Scalar, Series,
};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("..")
        .join("corpus")
}

fn corpus_specs() -> Vec<(String, Value)> {
    let mut out: Vec<(String, Value)> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("directory entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| {
            let text = fs::read_to_string(&p).expect("corpus file");
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, serde_json::from_str(&text).expect("corpus json"))
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn family_of(v: &Value) -> Family {
    match v["family"].as_str().expect("family field") {
        "symmetric_complex" => Family::SymmetricComplex,
        "signed_perm_real" => Family::SignedPermReal,
        "symmetric_real_trace_zero" => Family::SymmetricRealTraceZero,
        other => panic!("unknown family {other}"),
    }
}

struct LiftJob {
    name: String,
    sys: InvariantSystem,
    q: u8,
    components: Vec<Series>,
}

/// All corpus problems that are expected to emit charts.
fn corpus_lift_jobs() -> Vec<LiftJob> {
    corpus_specs()
        .into_iter()
        .filter_map(|(name, v)| {
            let q = match v["subcommand"].as_str().expect("subcommand") {
                "lift-curve" => 1u8,
                "lift-surface" => 2u8,
                _ => return None,
            };
            if v["expect"]["outcome"].as_str() != Some("ok") {
                return None;
            }
            let trunc = v["trunc"].as_u64().map(|t| t as u32);
            let sys = InvariantSystem::new(family_of(&v), v["n"].as_u64().unwrap() as usize)
                .expect("corpus system");
            let components = v["components"]
                .as_array()
                .expect("components")
                .iter()
                .map(|c| parse_series(c.as_str().unwrap(), q, trunc).expect("corpus series"))
                .collect();
            Some(LiftJob {
                name,
                sys,
                q,
                components,
            })
        })
        .collect()
}

fn lift_job(job: &LiftJob, precision: u32) -> Vec<LiftChart> {
    let opts = LiftOptions {
        precision,
        ..LiftOptions::default()
    };
    let problem = LiftProblem::new(job.sys, job.components.clone(), opts)
        .unwrap_or_else(|e| panic!("{}: {e}", job.name));
    let lifted = if job.q == 1 {
        lift_curve(&problem)
    } else {
        lift_multi(&problem)
    };
    lifted.unwrap_or_else(|e| panic!("{}: {e}", job.name))
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn pow_rat(r: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc = &acc * r;
    }
    acc
}

/// Whether two value enclosures can describe the same number, with `slack`
/// covering a known truncation tail on top of the ball radii.
fn enclosures_meet(a: &Scalar, b: &Scalar, slack: &BigRational) -> bool {
    let d = a.sub(b);
    let (re, im) = d.mid();
    let tol = a.rad() + b.rad() + slack;
    &re * &re + &im * &im <= &tol * &tol
}

#[test]
fn corpus_lifts_certify_the_identity_exactly() {
    let started = Instant::now();
    let summary = run_corpus(&corpus_dir(), 4).expect("corpus run");
    let elapsed = started.elapsed();
    assert!(summary.all_pass(), "corpus rows failed:\n{}", summary.table());
    let certified = summary
        .rows
        .iter()
        .filter(|r| r.detail.contains("identity certified"))
        .count();
    assert!(
        certified >= 25,
        "only {certified} chart-emitting problems certified the lifting identity"
    );
    assert!(elapsed < Duration::from_secs(60), "corpus run took {elapsed:?}");

    let mut complex_n = Vec::new();
    let mut signed_n = Vec::new();
    let mut dims = Vec::new();
    for (_, v) in corpus_specs() {
        let q = match v["subcommand"].as_str().unwrap() {
            "lift-curve" => 1u64,
            "lift-surface" => 2u64,
            _ => continue,
        };
        dims.push(q);
        match v["family"].as_str().unwrap_or("") {
            "symmetric_complex" => complex_n.push(v["n"].as_u64().unwrap()),
            "signed_perm_real" => signed_n.push(v["n"].as_u64().unwrap()),
            _ => {}
        }
    }
    for n in [2, 3, 4] {
        assert!(complex_n.contains(&n), "no symmetric_complex({n}) problem in the corpus");
    }
    for n in [1, 2, 3] {
        assert!(signed_n.contains(&n), "no signed_perm_real({n}) problem in the corpus");
    }
    for q in [1, 2] {
        assert!(dims.contains(&q), "no {q}-parameter problem in the corpus");
    }
    println!("{certified} lift problems certified the identity in {elapsed:?}");
}

#[test]
fn curve_lift_values_match_isolated_fiber_roots() {
    let started = Instant::now();
    let mut problems = 0usize;
    for job in corpus_lift_jobs() {
        if job.q != 1 || job.sys.family != Family::SymmetricComplex {
            continue;
        }
        let charts = lift_job(&job, 128);
        let chart = &charts[0];
        let n = job.sys.n;
        let rho = chart.rho[0].mid().0;
        let order = chart.lift.iter().filter_map(|s| s.trunc).min();
        for k in 1i64..=50 {
            // Parameters deep inside the chart: truncated lift series carry
            // a tail allowance (8|u|)^order below, sound while coefficients
            // grow at most 8^k against the chart radius, which holds for
            // every square-root-type expansion in the corpus (growth 4^k).
            let u = &rho * rat(k, 4096);
            let su = Scalar::from_rational(u.clone());
            let t = chain_forward_point(&chart.chain, &[su.clone()]).expect("chain forward");
            let fv: Vec<Scalar> = job.components.iter().map(|c| c.eval_exact(&[t[0].clone()])).collect();
            // Monic fiber polynomial with the lifted invariants as signed
            // coefficients, ascending powers.
            let mut coeffs = vec![Scalar::zero(); n + 1];
            coeffs[n] = Scalar::one();
            for (idx, v) in fv.iter().enumerate() {
                coeffs[n - 1 - idx] = if idx % 2 == 0 { v.neg() } else { v.clone() };
            }
            let clusters = isolate_clusters(&coeffs, 128).expect("fiber isolation");
            let tail = order.map_or_else(BigRational::zero, |o| pow_rat(&(u.abs() * rat(8, 1)), o));
            let values: Vec<Scalar> = chart
                .lift
                .iter()
                .map(|s| s.eval_exact(&[su.clone()]))
                .collect();
            let mut matched = 0usize;
            for cl in &clusters {
                let hits = values
                    .iter()
                    .filter(|v| enclosures_meet(v, &cl.center, &tail))
                    .count();
                assert_eq!(
                    hits,
                    cl.multiplicity,
                    "{}: cluster near {:?} at parameter {u} matched {hits} lift values, fiber has {}",
                    job.name,
                    cl.center.to_c64(),
                    cl.multiplicity
                );
                matched += hits;
            }
            assert_eq!(matched, n, "{}: unmatched lift values at parameter {u}", job.name);
        }
        problems += 1;
    }
    assert!(problems >= 5, "expected several complex curve problems, found {problems}");
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "oracle comparison took {elapsed:?}");
    println!("{problems} problems x 50 parameters matched certified isolation in {elapsed:?}");
}

#[test]
fn chart_chains_have_the_stated_substitution_structure() {
    let mut even_pairs = 0usize;
    let mut real_charts = 0usize;
    for job in corpus_lift_jobs() {
        let charts = lift_job(&job, 128);
        if job.sys.is_real() {
            for chart in &charts {
                assert!(
                    chart
                        .chain
                        .iter()
                        .all(|m| !matches!(m, ChartMap::PowerSubstitution { .. })),
                    "{}: a real-mode chain contains a power substitution",
                    job.name
                );
                real_charts += 1;
            }
            continue;
        }
        for chart in &charts {
            for (i, link) in chart.chain.iter().enumerate() {
                let ChartMap::PowerSubstitution { gamma, eps } = link else {
                    continue;
                };
                for (k, (&g, &e)) in gamma.iter().zip(eps.iter()).enumerate() {
                    if g % 2 == 1 {
                        assert_eq!(
                            e, 0,
                            "{}: an odd exponent {g} carries a sign flip",
                            job.name
                        );
                        continue;
                    }
                    let mut flipped = eps.clone();
                    flipped[k] ^= 1;
                    let wanted = ChartMap::power_substitution(gamma.clone(), flipped);
                    let found = charts.iter().any(|c| {
                        c.chain.len() > i
                            && c.chain[..i] == chart.chain[..i]
                            && c.chain[i] == wanted
                    });
                    assert!(
                        found,
                        "{}: no sign-flipped sibling for axis {k} at chain position {i}",
                        job.name
                    );
                    even_pairs += 1;
                }
            }
        }
    }
    assert!(even_pairs > 0, "the corpus exercised no even substitution axes");
    assert!(real_charts > 0, "the corpus exercised no real-mode charts");
    println!("checked {even_pairs} even-axis sign pairs and {real_charts} real chains");
}

#[test]
fn resolved_leaves_carry_comparable_orders() {
    let s2 = |text: &str| parse_series(text, 2, None).unwrap();
    let b1 = InvariantSystem::new(Family::SignedPermReal, 1).unwrap();
    let b2 = InvariantSystem::new(Family::SignedPermReal, 2).unwrap();
    let tz2 = InvariantSystem::new(Family::SymmetricRealTraceZero, 2).unwrap();
    let fixtures: Vec<(Option<InvariantSystem>, Vec<Series>)> = vec![
        (None, vec![s2("x^2 - y^2"), s2("x*y")]),
        (None, vec![s2("x^4 + 2*x^2*y^2 + y^4")]),
        (Some(b1), vec![s2("x^2 + y^2")]),
        (Some(b2), vec![s2("x^2 + y^2"), s2("x^2*y^2")]),
        (Some(tz2), vec![s2("2*x^2 + 2*y^2")]),
    ];
    let opts = ResolveOptions::default();
    let mut leaves_checked = 0usize;
    for (sys, tracked) in &fixtures {
        let tree = resolve_nc_2d(tracked, &opts).expect("fixture resolves");
        for leaf in &tree.leaves {
            let alphas: Vec<&Vec<u32>> = leaf.alphas.iter().flatten().collect();
            for a in &alphas {
                for b in &alphas {
                    let le = a.iter().zip(b.iter()).all(|(x, y)| x <= y);
                    let ge = a.iter().zip(b.iter()).all(|(x, y)| x >= y);
                    assert!(le || ge, "incomparable leaf exponents {a:?} and {b:?}");
                }
            }
            if let Some(sys) = sys {
                let check = check_real_orders(sys, &leaf.alphas);
                assert!(
                    check.pass,
                    "real order conditions failed on a leaf of {:?}: {}",
                    leaf.alphas, check.detail
                );
            }
            leaves_checked += 1;
        }
    }
    assert!(leaves_checked > 0);
    println!("checked exponent comparability on {leaves_checked} leaves");
}

#[test]
fn plane_curve_fixtures_resolve_with_certificates() {
    let s2 = |text: &str| parse_series(text, 2, None).unwrap();
    let fixtures = [
        "x*y",
        "x^2 - y^2",
        "y^2 - x^3",
        "x*y^2 - y^3 - x^4 + x^3*y",
    ];
    let opts = ResolveOptions {
        max_leaves: 512,
        ..ResolveOptions::default()
    };
    for text in fixtures {
        let f = s2(text);
        let tree = resolve_nc_2d(std::slice::from_ref(&f), &opts)
            .unwrap_or_else(|e| panic!("{text} failed to resolve: {e}"));
        assert!(
            tree.descent_log.iter().all(|s| s.depth <= 16),
            "{text}: a descent path exceeded 16 blow-up steps"
        );
        for w in tree.descent_log.windows(2) {
            if w[1].depth > w[0].depth {
                assert!(
                    w[1].measure <= w[0].measure,
                    "{text}: multiplicity grew from {} to {} going deeper",
                    w[0].measure,
                    w[1].measure
                );
            }
        }
        for leaf in &tree.leaves {
            assert!(leaf.certified, "{text}: uncertified leaf");
            let alpha = leaf.alphas[0]
                .as_ref()
                .unwrap_or_else(|| panic!("{text}: tracked function vanished on a leaf"));
            let unit = leaf.units[0].as_ref().expect("unit series");
            assert_eq!(
                unit.value_at_zero().nonzero_certified(),
                Some(true),
                "{text}: unit not certified nonzero at a leaf center"
            );
            let pulled = apply_chain(&f, &leaf.chain).expect("pullback");
            let mono = Series::monomial(Scalar::one(), [alpha[0], alpha[1]], 2);
            let diff = pulled.sub(&mono.mul(unit));
            assert_eq!(
                diff.is_zero(),
                Some(true),
                "{text}: factorization residual is not exactly zero on a leaf"
            );
        }
    }
    println!("4 fixtures resolved; units certified, factorizations exact");
}

#[test]
fn gradient_integrals_match_closed_forms() {
    let sys = InvariantSystem::new(Family::SymmetricComplex, 2).unwrap();
    let s1 = |text: &str| parse_series(text, 1, None).unwrap();
    let s2 = |text: &str| parse_series(text, 2, None).unwrap();

    // Square-root pair on [-1,1]: each fiber component has total variation 1,
    // and the anisotropic integral takes the maximum over components on each
    // of the two monotone halves, giving exactly 2.
    let problem = LiftProblem::new(sys, vec![s1("0"), s1("-t")], LiftOptions::default()).unwrap();
    let (wl, report) = assemble_weak_lift(&problem).expect("curve assembly");
    assert_eq!(report.grid_levels.last(), Some(&12));
    let integral = *report.gradient_integrals.last().unwrap();
    assert!(
        (integral - 2.0).abs() <= 2.0 * 1.0e-3,
        "arc integral {integral} is not within 1e-3 of 2"
    );
    // In one parameter the branch locus is the single point t = 0, which
    // carries counting measure 1 and no length.
    assert!(wl.exceptional.segments.is_empty());
    assert_eq!(wl.exceptional.points.len(), 1);
    assert_eq!(report.exceptional_measure, wl.exceptional.measure());
    assert_eq!(report.exceptional_measure, 1.0);

    // The y-independent band: variation only across x = 0, length 2 of seam.
    let problem2 = LiftProblem::new(sys, vec![s2("0"), s2("-x")], LiftOptions::default()).unwrap();
    let (wl2, report2) = assemble_weak_lift(&problem2).expect("surface assembly");
    assert!(report2.grid_levels.len() >= 4);
    let cauchy = report2.gradient_cauchy.expect("at least two levels");
    assert!(cauchy <= 1.0e-3, "integral estimates are not Cauchy: {cauchy}");
    let constructed2: f64 = wl2.exceptional.segments.iter().map(|s| s.length()).sum();
    assert_eq!(report2.exceptional_measure, constructed2);
    assert_eq!(constructed2, 2.0, "the seam should be the segment x = 0");
    println!("integral {integral} vs 2; surface ladder Cauchy at {cauchy:.2e}");
}

#[test]
fn membership_agrees_with_direct_sampling() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1f2e3d4c);
    // The image test concerns the real families; the complex quotient map is
    // onto, so there is nothing to reject there.
    let systems = [
        InvariantSystem::new(Family::SignedPermReal, 1).unwrap(),
        InvariantSystem::new(Family::SignedPermReal, 2).unwrap(),
        InvariantSystem::new(Family::SignedPermReal, 3).unwrap(),
        InvariantSystem::new(Family::SymmetricRealTraceZero, 2).unwrap(),
        InvariantSystem::new(Family::SymmetricRealTraceZero, 3).unwrap(),
    ];
    for i in 0..10_000usize {
        let sys = &systems[i % systems.len()];
        let mut x: Vec<Scalar> = (0..sys.n)
            .map(|_| Scalar::from_ratio(rng.random_range(-256..=256), 128))
            .collect();
        if sys.family == Family::SymmetricRealTraceZero {
            // Sample inside the trace-zero subspace, where the generators
            // parametrize the image.
            let sum = x[..sys.n - 1]
                .iter()
                .fold(Scalar::zero(), |acc, v| acc.add(v));
            x[sys.n - 1] = sum.neg();
        }
        let z = sys.sigma_eval(&x).expect("invariant evaluation");
        let verdict = sys.membership_test(&z).expect("membership");
        assert_ne!(
            verdict,
            Membership::Outside,
            "a directly sampled invariant point was rejected by {}({})",
            sys.family,
            sys.n
        );
    }

    let mut exterior = 0usize;
    for k in 0..350i64 {
        let z = vec![Scalar::from_ratio(-k - 1, 100)];
        assert_eq!(
            systems[0].membership_test(&z).unwrap(),
            Membership::Outside,
            "negative first invariant accepted: {}",
            -k - 1
        );
        exterior += 1;
    }
    for k in 0..350i64 {
        // z2 = z1^2/4 + (k+1)/4 breaks z1^2 >= 4 z2 by exactly k+1.
        let z1 = Scalar::from_ratio(k, 100);
        let z2 = Scalar::from_ratio(k * k, 40_000).add(&Scalar::from_ratio(k + 1, 4));
        assert_eq!(
            systems[1].membership_test(&[z1, z2]).unwrap(),
            Membership::Outside,
            "discriminant violation accepted at k = {k}"
        );
        exterior += 1;
    }
    for k in 0..300i64 {
        let z = vec![Scalar::from_ratio(-k - 1, 250)];
        assert_eq!(
            systems[3].membership_test(&z).unwrap(),
            Membership::Outside,
            "negative quadratic power sum accepted: {}",
            -k - 1
        );
        exterior += 1;
    }
    assert_eq!(exterior, 1000);
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "membership sweep took {elapsed:?}");
    println!("10000 interior + 1000 exterior points agreed in {elapsed:?}");
}

#[test]
fn real_curve_lifts_are_lipschitz_stable_and_breakage_is_detected() {
    let sys = InvariantSystem::new(Family::SignedPermReal, 1).unwrap();
    let s1 = |text: &str| parse_series(text, 1, None).unwrap();
    for text in ["t^2", "t^2 + t^4"] {
        let problem =
            LiftProblem::new(sys, vec![s1(text)], LiftOptions::default()).unwrap();
        let (_, report) = assemble_weak_lift(&problem).expect("assembly");
        assert!(report.bounded_pass, "{text}: lift values exceeded the fiber bound");
        assert!(report.sup_value.is_finite());
        assert_eq!(
            report.lipschitz_pass,
            Some(true),
            "{text}: the gradient sup did not stabilize"
        );
        let change = report.lipschitz_change.expect("two ladder levels");
        assert!(
            change < 0.05,
            "{text}: gradient sup changed by {change} across the last two levels"
        );
    }

    // Hand-built charts lifting through s -> s instead of the regular
    // s -> s^2: the glued map is |t|^(1/2), whose difference quotients grow
    // through the refinement ladder.
    let gamma = vec![2u32];
    let charts: Vec<LiftChart> = [0u8, 1u8]
        .iter()
        .map(|&eps| LiftChart {
            chain: vec![ChartMap::power_substitution(gamma.clone(), vec![eps])],
            lift: vec![s1("t")],
            basepoint: vec![Scalar::zero()],
            monomials: Vec::new(),
            rho: vec![Scalar::one()],
            descent_log: Vec::new(),
        })
        .collect();
    let wl = glue_power_substitution(sys, &charts).expect("gluing");
    let report = verify_weak(&[s1("t^2")], &wl, &VerifyOptions::for_dim(1)).expect("verification");
    assert_eq!(
        report.lipschitz_pass,
        Some(false),
        "the harness accepted a square-root singularity as Lipschitz"
    );
    println!("regular fixtures stable; the broken fixture fails as designed");
}

#[test]
fn sections_invert_the_quotient_on_a_grid() {
    let sys = InvariantSystem::new(Family::SymmetricComplex, 2).unwrap();
    let radius = BigRational::from_integer(BigInt::from(2));
    // Level 6 puts 64 intervals on each axis of [-2,2]^2.
    let (wl, report) = section_map(sys, &radius, 6, 128).expect("section sampling");
    assert!(
        report.residual_pass,
        "section residuals exceeded ball tolerance: {:?}",
        report.messages
    );
    assert_eq!(
        report.residual_samples + wl.exceptional.points.len(),
        65 * 65,
        "samples and exceptional nodes should tile the grid"
    );
    assert!(wl.exceptional.segments.is_empty());
    let four = Scalar::from_ratio(4, 1);
    for p in &wl.exceptional.points {
        let disc = p[0].mul(&p[0]).sub(&four.mul(&p[1]));
        assert!(
            disc.is_zero_exact(),
            "an exceptional sample sits off the discriminant: {:?}",
            (p[0].to_c64(), p[1].to_c64())
        );
    }
    println!(
        "{} samples inverted; {} exceptional nodes, all on the discriminant",
        report.residual_samples,
        wl.exceptional.points.len()
    );
}
