//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! reach the test log.

use std::process::{Command, ExitCode};
use std::time::Instant;

use austere_core::austere::*;
use austere_core::classify::*;
use austere_core::families::*;
use austere_core::geometry::*;
use austere_core::numerics::{
    finite_diff_second, haar_rotation, jet_eval, jet_relative_error, SymMatrix, DEFAULT_FD_STEP,
};
use austere_core::slag::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn points(imm: &Immersion, count: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_points(
        imm.domain(),
        &SamplePlan {
            random: count,
            seed,
            ..Default::default()
        },
    )
}

fn random_helicoid_spec(rng: &mut ChaCha8Rng) -> HelicoidSpec {
    let m = rng.random_range(2..=4);
    let s = rng.random_range(1..m);
    let mut lambdas = vec![rng.random_range(-2.0..2.0)];
    for _ in 0..s {
        let mag: f64 = rng.random_range(0.3..3.0);
        lambdas.push(if rng.random_bool(0.5) { mag } else { -mag });
    }
    HelicoidSpec::new(m, s, lambdas).expect("valid spec")
}

fn random_specs() -> Vec<HelicoidSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0002);
    (0..20).map(|_| random_helicoid_spec(&mut rng)).collect()
}

fn all_families() -> Vec<(String, Immersion, bool)> {
    let mut out: Vec<(String, Immersion, bool)> = random_specs()
        .iter()
        .map(|s| {
            (
                format!("helicoid m={} s={}", s.m, s.s),
                generalized_helicoid(s).unwrap(),
                true,
            )
        })
        .collect();
    let curve = HoloCurveSpec::from_real(&[&[1.0], &[0.0, 1.0], &[0.0, 0.0, 1.0]]).unwrap();
    let cyl = HoloCurveSpec::from_real(&[&[0.0, 1.0], &[0.0, 0.0, 1.0]]).unwrap();
    let h1 = classical_helicoid(1.0).unwrap();
    out.extend([
        (
            "classical helicoid".into(),
            classical_helicoid(0.7).unwrap(),
            true,
        ),
        ("helicoid cone".into(), helicoid_cone(1.2).unwrap(), true),
        (
            "helicoid x helicoid".into(),
            product_immersion(&h1, &classical_helicoid(0.5).unwrap()).unwrap(),
            true,
        ),
        (
            "helicoid x R2".into(),
            product_immersion(&h1, &euclidean_factor(2).unwrap()).unwrap(),
            true,
        ),
        ("complex cone".into(), complex_cone(&curve).unwrap(), true),
        (
            "complex cylinder".into(),
            complex_cylinder(&cyl).unwrap(),
            true,
        ),
        ("flat".into(), flat(3, 5).unwrap(), true),
        ("sphere".into(), sphere(3, 1.0).unwrap(), false),
    ]);
    out
}

fn c1_oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0001);
    let mut disagreements = 0;
    let mut constructed_misses = 0;
    for _ in 0..1000 {
        let v: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
        let s = SymMatrix::from_isometric_vec(4, &v);
        if is_austere_matrix(&s, 1e-9) != eigen_symmetry_oracle(&s, 1e-9).unwrap() {
            disagreements += 1;
        }
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let q = haar_rotation(&mut rng, 4);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![a, b, -a, -b]));
        let t = SymMatrix::symmetrize(&(&q * d * q.transpose()));
        let (x, y) = (
            is_austere_matrix(&t, 1e-9),
            eigen_symmetry_oracle(&t, 1e-9).unwrap(),
        );
        if x != y {
            disagreements += 1;
        }
        if !x {
            constructed_misses += 1;
        }
    }
    verdict(
        disagreements == 0 && constructed_misses == 0,
        format!("{disagreements} disagreements over 2000 matrices, {constructed_misses} symmetric spectra rejected"),
    )
}

fn c2_family_austerity() -> Verdict {
    let (mut worst_austere, mut worst_h) = (0.0f64, 0.0f64);
    for (k, spec) in random_specs().iter().enumerate() {
        let imm = generalized_helicoid(spec).unwrap();
        for x in points(&imm, 100, k as u64) {
            let sff = second_fundamental_form(&imm, &x).unwrap();
            worst_austere = worst_austere.max(austere_point_defect(&sff));
            worst_h = worst_h.max(
                mean_curvature_vector(&sff)
                    .iter()
                    .map(|h| h * h)
                    .sum::<f64>()
                    .sqrt(),
            );
        }
    }
    verdict(
        worst_austere < 1e-8 && worst_h < 1e-8,
        format!(
            "20 specs x 100 points: max austere defect {worst_austere:.2e}, max |H| {worst_h:.2e}"
        ),
    )
}

fn c3_model_validity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0003);
    let qa = is_austere_subspace(&qa_basis(), 1e-9).unwrap();
    let qb = is_austere_subspace(&qb_basis(), 1e-9).unwrap();
    let (mut valid_ok, mut broken_fail, mut trials) = (0, 0, 0);
    while trials < 50 {
        let (l1, l2) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let Ok(p) = QCParams::from_pair(l1, l2) else {
            continue;
        };
        let l3 = p.lambdas()[2];
        if l3.abs() > 100.0 {
            continue;
        }
        trials += 1;
        if is_austere_subspace(&qc_basis(&p), 1e-9).unwrap() {
            valid_ok += 1;
        }
        let bump = if rng.random_bool(0.5) { 0.1 } else { -0.1 };
        if !is_austere_subspace(&qc_basis(&QCParams::new_unchecked(l1, l2, l3 + bump)), 1e-9)
            .unwrap()
        {
            broken_fail += 1;
        }
    }
    verdict(
        qa && qb && valid_ok == 50 && broken_fail == 50,
        format!("Q_A {qa}, Q_B {qb}, Q_C valid {valid_ok}/50, violated rejected {broken_fail}/50"),
    )
}

fn c4_rulings() -> Verdict {
    let (mut straight, mut ruled) = (0.0f64, 0.0f64);
    for (k, spec) in random_specs().iter().enumerate() {
        let imm = generalized_helicoid(spec).unwrap();
        for x in points(&imm, 100, 100 + k as u64) {
            straight = straight.max(ruling_straightness_defect(&imm, &x, 2).unwrap());
            let sff = second_fundamental_form(&imm, &x).unwrap();
            let e = ruling_frame(&imm, &sff.frame, None).unwrap();
            ruled = ruled.max(ruled_condition_check(&sff, &e).unwrap());
        }
    }
    let cone = helicoid_cone(1.0).unwrap();
    let mut cone_worst = 0.0f64;
    for x in points(&cone, 100, 7) {
        let sff = second_fundamental_form(&cone, &x).unwrap();
        let e = ruling_frame(&cone, &sff.frame, Some(3)).unwrap();
        cone_worst = cone_worst
            .max(ruled_condition_check(&sff, &e).unwrap())
            .max(ruling_straightness_defect(&cone, &x, 2).unwrap());
    }
    verdict(
        straight < 1e-12 && ruled < 1e-10 && cone_worst < 1e-10 && e_dim_ok(&cone),
        format!("straightness {straight:.2e}, II on ruling {ruled:.2e}, cone 3-plane check {cone_worst:.2e}"),
    )
}

fn e_dim_ok(cone: &Immersion) -> bool {
    cone.ruling_coords().map(<[usize]>::len) == Some(3)
}

fn random_subspace(model: &SymSpan, dim: usize, rng: &mut ChaCha8Rng) -> SymSpan {
    let basis = (0..dim)
        .map(|_| {
            let c: Vec<f64> = (0..model.basis().len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            model.element(&c)
        })
        .collect();
    SymSpan::new(4, basis).unwrap()
}

fn c5_type_recovery() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0005);
    let trials = 200;
    let mut cases = Vec::with_capacity(3 * trials);
    for k in 0..trials {
        for (t, model) in [ModelType::A, ModelType::B, ModelType::C].into_iter().enumerate() {
            let span = match model {
                ModelType::A => {
                    let d = rng.random_range(1..=6);
                    random_subspace(&qa_basis(), d, &mut rng)
                }
                ModelType::B => {
                    let d = rng.random_range(1..=5);
                    random_subspace(&qb_basis(), d, &mut rng)
                }
                ModelType::C => loop {
                    let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                    if let Ok(p) = QCParams::from_pair(a, b) {
                        if p.lambdas()[2].abs() < 30.0 {
                            let d = rng.random_range(1..=3);
                            break random_subspace(&qc_basis(&p), d, &mut rng);
                        }
                    }
                },
            };
            let q = haar_rotation(&mut rng, 4);
            cases.push((t, model, span.conjugate(&q), span, derive_seed(0xACCE_0005, (3 * k + t) as u64)));
        }
    }
    let outcomes: Vec<(usize, bool, bool)> = cases
        .par_iter()
        .map(|(t, model, conj, span, seed)| {
            let opts = FitOptions::with_seed(*seed);
            let residual = match model {
                ModelType::A => fit_type_a(conj).unwrap().residual,
                ModelType::B => fit_type_b(conj, &opts).unwrap().residual,
                ModelType::C => fit_type_c(conj, &opts).unwrap().residual,
            };
            let before = classify_span(span, DEFAULT_CLASSIFY_THRESHOLD, &opts).unwrap().verdict;
            let after = classify_span(conj, DEFAULT_CLASSIFY_THRESHOLD, &opts).unwrap().verdict;
            (*t, residual < 1e-6, before == after)
        })
        .collect();
    let mut recovered = [0usize; 3];
    for &(t, ok, _) in &outcomes {
        recovered[t] += usize::from(ok);
    }
    let invariant = outcomes.iter().filter(|o| o.2).count();
    let need = (trials * 95).div_ceil(100);
    verdict(
        recovered.iter().all(|&r| r >= need) && invariant == 3 * trials,
        format!(
            "recovered A {}/{trials}, B {}/{trials}, C {}/{trials}; verdict invariant {invariant}/{}",
            recovered[0],
            recovered[1],
            recovered[2],
            3 * trials
        ),
    )
}

fn c6_taxonomy() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let h1 = classical_helicoid(1.0).unwrap();
    let hh = product_immersion(&h1, &classical_helicoid(0.6).unwrap()).unwrap();
    let g = generalized_helicoid(&HelicoidSpec::new(4, 3, vec![0.45, 1.0, 1.7, -2.3]).unwrap())
        .unwrap();
    let curve = HoloCurveSpec::from_real(&[&[1.0], &[0.0, 1.0], &[0.0, 0.0, 1.0]]).unwrap();
    let cone = complex_cone(&curve).unwrap();
    let hr2 = product_immersion(&h1, &euclidean_factor(2).unwrap()).unwrap();
    let t = DEFAULT_CLASSIFY_THRESHOLD;

    let good = points(&hh, 10, 61).iter().all(|x| {
        let r = classify_point(&hh, x, t).unwrap();
        r.verdict.contains(&ModelType::B) && r.span_dim == 2
    });
    ok &= good;
    notes.push(format!("HxH B,delta=2 {good}"));

    let mut lam_max = 0.0f64;
    let good = points(&g, 10, 62).iter().all(|x| {
        let r = classify_point(&g, x, t).unwrap();
        let lam = r.qc_params.map(|p| p.lambdas());
        if let Some(l) = lam {
            lam_max = l.iter().fold(lam_max, |a, v| a.max(v.abs()));
        }
        r.span_dim == 3
            && r.verdict.contains(&ModelType::C)
            && lam.is_some_and(|l| l.iter().all(|v| v.abs() < 1e-4))
    });
    ok &= good;
    notes.push(format!(
        "G(4,3) delta=3,C,lambda~0 {good} (max |lambda| {lam_max:.1e})"
    ));

    let good = points(&cone, 10, 63).iter().all(|x| {
        let r = classify_point(&cone, x, t).unwrap();
        r.verdict.contains(&ModelType::A) && j_invariance_defect(&cone, x).unwrap() < 1e-10
    });
    ok &= good;
    notes.push(format!("complex cone A,J-invariant {good}"));

    let good = points(&hr2, 10, 64).iter().all(|x| {
        let sff = second_fundamental_form(&hr2, x).unwrap();
        normal_rank(&sff, 1e-8) == 1
            && relative_nullity(&sff, 1e-8).unwrap().dim == 2
            && gauss_map_rank(&sff, 1e-8).unwrap() == 2
            && classify_point(&hr2, x, t).unwrap().rank_one
    });
    ok &= good;
    notes.push(format!("HxR2 delta=1,nullity=2,gauss=2 {good}"));
    verdict(ok, notes.join("; "))
}

fn c7_holomorphy() -> Verdict {
    let curve = HoloCurveSpec::from_real(&[&[1.0], &[0.0, 1.0], &[0.0, 0.0, 1.0]]).unwrap();
    let cone = complex_cone(&curve).unwrap();
    let (mut good, mut flipped) = (0.0f64, f64::INFINITY);
    for x in points(&cone, 50, 71) {
        good = good.max(
            ruling_map_holomorphy_defect(&cone, &x, DEFAULT_FD_STEP, RulingOrientation::Negative)
                .unwrap(),
        );
        flipped = flipped.min(
            ruling_map_holomorphy_defect(&cone, &x, DEFAULT_FD_STEP, RulingOrientation::Positive)
                .unwrap(),
        );
    }
    verdict(
        good < 1e-4 && flipped > 0.1,
        format!("50 points: max defect {good:.2e} (-J), min flipped defect {flipped:.2e} (+J)"),
    )
}

fn c8_conormal_bundles() -> Verdict {
    let mut worst_lag = 0.0f64;
    let mut worst_austere_spread = 0.0f64;
    let mut sphere_spread = f64::INFINITY;
    for (k, (_, imm, austere)) in all_families().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xACCE_0008, k as u64));
        let codim = imm.ambient_dim() - imm.domain_dim();
        let samples: Vec<ConormalSample> = points(imm, 50, 80 + k as u64)
            .iter()
            .map(|x| {
                let xi = (0..codim).map(|_| rng.random_range(-1.0..1.0)).collect();
                ConormalSample::new(imm, x, xi).unwrap()
            })
            .collect();
        for s in &samples {
            let b = conormal_tangent_basis_refined(imm, s, DEFAULT_FD_STEP, STENCIL_REFINEMENTS)
                .unwrap();
            worst_lag = worst_lag.max(lagrangian_defect(&b).unwrap());
        }
        let spread =
            special_phase_defect(imm, &samples, DEFAULT_FD_STEP, Convention::PlusI).unwrap();
        if *austere {
            worst_austere_spread = worst_austere_spread.max(spread);
        } else {
            sphere_spread = sphere_spread.min(spread);
        }
    }
    verdict(
        worst_lag < 1e-6 && worst_austere_spread < 1e-4 && sphere_spread > 0.01,
        format!(
            "max Lagrangian defect {worst_lag:.2e}, austere phase spread {worst_austere_spread:.2e}, sphere spread {sphere_spread:.2e}"
        ),
    )
}

fn c9_differentiation() -> Verdict {
    let mut worst = 0.0f64;
    let families = all_families();
    for (k, (_, imm, _)) in families.iter().enumerate() {
        for x in points(imm, 100, 90 + k as u64) {
            let jet = jet_eval(imm.map(), &x).unwrap();
            let (jac, hess) =
                finite_diff_second(|y| imm.map().eval(y), &x, DEFAULT_FD_STEP).unwrap();
            worst = worst.max(jet_relative_error(&jet, &jac, &hess));
        }
    }
    verdict(
        worst < 1e-5,
        format!(
            "{} evaluators x 100 points: max relative error {worst:.2e}",
            families.len()
        ),
    )
}

fn c10_determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("austere-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut identical = 0;
    let runs = [
        (
            "verify",
            "helicoid",
            vec![
                "--param",
                "m=4",
                "--param",
                "s=3",
                "--param",
                "lambdas=0.5,1,2,-1.5",
            ],
        ),
        ("classify", "helicoid_product", vec![]),
        ("classify", "complex_cone", vec![]),
    ];
    for (i, (cmd, family, extra)) in runs.iter().enumerate() {
        let mut outs = Vec::new();
        for rep in 0..2 {
            let path = dir.join(format!("run{i}-{rep}.json"));
            let mut args = vec![
                *cmd, "--family", family, "--random", "25", "--seed", "20240611",
            ];
            args.extend(extra.iter().copied());
            args.extend(["--format", "structured", "--out", path.to_str().unwrap()]);
            let status = Command::new(env!("CARGO_BIN_EXE_austere"))
                .args(&args)
                .status()
                .unwrap();
            outs.push(status.success().then(|| std::fs::read(&path).unwrap()));
        }
        if outs[0].is_some() && outs[0] == outs[1] {
            identical += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    verdict(
        identical == runs.len(),
        format!("{identical}/{} report pairs byte-identical", runs.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("austerity oracle equivalence", c1_oracle_equivalence),
        ("family austerity", c2_family_austerity),
        ("maximal model validity", c3_model_validity),
        ("ruling verification", c4_rulings),
        ("type recovery", c5_type_recovery),
        ("taxonomy spot-checks", c6_taxonomy),
        ("holomorphy", c7_holomorphy),
        ("conormal bundles", c8_conormal_bundles),
        ("differentiation soundness", c9_differentiation),
        ("determinism", c10_determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        if !v.passed {
            failed += 1;
        }
        println!(
            "{} criterion {:2} {name}: {} [{:.1}s]",
            if v.passed { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/10 passed in {:.1}s",
        10 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
