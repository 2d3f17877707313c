//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails. Run with `cargo test --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use itertools::Itertools;
use rand::Rng;
use rand::seq::SliceRandom;

use vcmod::classgen::{gen_cluster_decorated, gen_finite_cofinite, gen_intervals, gen_patterns, gen_power_set, gen_random, gen_thresholds};
use vcmod::cli::pattern_mixture;
use vcmod::empirics::{empirical_sup_deviation, packing_lower_bounds, packing_number, ugc_curve, PackingMode};
use vcmod::family::{FiniteCofinite, OrderedClass};
use vcmod::learning::{
    is_consistent, learn, learner_image, pac_error_estimate, sample_complexity_bound, ImageMode, InconsistencyPolicy,
    LabeledSample, LearnerKind, PacConfig,
};
use vcmod::measures::{DiscreteMeasure, MeasureSpec, SampleSeq};
use vcmod::rng::derive_rng;
use vcmod::shattering::{is_strongly_shattered, vc_after_removal, vc_dimension, vc_mod_ideal, vc_thick, RemovalMode};
use vcmod::stone::{lift_witness, vc_on_stone};
use vcmod::{ConceptClass, Error, PointSet, PrincipalIdeal, WorkLimits};

const SEED: u64 = 20_240_601;

/// Tolerances, pinned.
const SIGMA_SLACK: f64 = 3.0;
const C4_FLOOR: f64 = 0.95;
/// Rounding slack when comparing sums of point masses with the analytic floor.
const FLOAT_TOL: f64 = 1e-9;
const C3_ADVERSARY_FLOOR: f64 = 0.9;
const C3_ENUM_EPS: f64 = 0.1;
const C3_ENUM_FREQ: f64 = 0.9;
const C5_EPS: f64 = 0.2;
const C5_DELTA: f64 = 0.1;
const C5_ATOM_BOUND: f64 = 1.0 / 200.0;
/// 50-digit decimal evaluation of `(128/ε²)(d·ln((2e²/ε)·ln(2e/ε)) + ln(8/δ))`
/// at ε = 0.1, δ = 0.05, d = 2.
const S_0_1_0_05_2_REFERENCE: &str = "228314.77865222635632592982836588681050594861127950";
const S_GOLDEN: u64 = 228_315;
/// Branch-and-bound budget per packing instance before falling back to greedy.
const PACKING_EXACT_NODES: u64 = 100_000;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// The shared random suite: classes on `m <= 10` points with at most 40
/// concepts, each paired with a random negligible set.
fn random_suite(count: usize) -> Vec<(ConceptClass, PrincipalIdeal)> {
    (0..count as u64)
        .map(|i| {
            let mut rng = derive_rng(SEED, "acceptance-suite", &[i]);
            let m = rng.gen_range(2..=10);
            let rows = rng.gen_range(1..=40);
            let density = rng.gen_range(0.15..0.85);
            let class = gen_random(m, rows, density, SEED ^ i).unwrap();
            let p_neg = [0.0, 0.2, 0.4, 0.7][i as usize % 4];
            let n = PointSet::from_points(m, (0..m).filter(|_| rng.gen_bool(p_neg))).unwrap();
            (class, PrincipalIdeal::new(n))
        })
        .collect()
}

fn c1(suite: &[(ConceptClass, PrincipalIdeal)], limits: &WorkLimits) -> Outcome {
    let mut mismatches = 0;
    let mut bad_witness = 0;
    for (class, ideal) in suite {
        let direct = vc_mod_ideal(class, ideal, limits).unwrap();
        let stone = vc_on_stone(class, ideal, limits).unwrap();
        if direct.dimension != stone.dimension {
            mismatches += 1;
        }
        let lifted = lift_witness(class, ideal, &stone.carvers).unwrap();
        let ok = lifted.len() == stone.dimension
            && lifted.clusters().iter().all(|a| !ideal.contains(a))
            && is_strongly_shattered(class, &lifted).unwrap().is_some();
        if !ok {
            bad_witness += 1;
        }
    }
    outcome(
        mismatches == 0 && bad_witness == 0,
        format!("{} classes: {mismatches} vc_mod/vc_stone mismatches, {bad_witness} invalid lifted witnesses", suite.len()),
    )
}

fn c2(suite: &[(ConceptClass, PrincipalIdeal)], limits: &WorkLimits) -> Outcome {
    let mut mismatches = 0;
    for (class, ideal) in suite {
        let direct = vc_mod_ideal(class, ideal, limits).unwrap().dimension;
        let restricted = match class.restrict(&ideal.co_negligible()).unwrap() {
            Some(r) => vc_dimension(&r, limits).unwrap().dimension,
            None => 0,
        };
        if direct != restricted {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{} classes: {mismatches} mismatches", suite.len()))
}

/// No pair of disjoint 3-point clusters is strongly shattered. Shrinking
/// clusters preserves strong shattering, so this rules out all pairs of
/// clusters of size >= 3.
fn no_thick_pair(class: &ConceptClass, k: usize) -> bool {
    let m = class.m();
    let triples: Vec<PointSet> = (0..m).combinations(k).map(|c| PointSet::from_points(m, c).unwrap()).collect();
    for (i, a) in triples.iter().enumerate() {
        for b in &triples[i + 1..] {
            if !a.is_disjoint(b) {
                continue;
            }
            let hit = |in_a: bool, in_b: bool| {
                class.concepts().iter().any(|c| {
                    (if in_a { a.is_subset(c) } else { a.is_disjoint(c) })
                        && (if in_b { b.is_subset(c) } else { b.is_disjoint(c) })
                })
            };
            if hit(false, false) && hit(true, false) && hit(false, true) && hit(true, true) {
                return false;
            }
        }
    }
    true
}

fn c3(limits: &WorkLimits) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let fc16 = gen_finite_cofinite(16, 2, limits).unwrap();
    let vc = vc_dimension(&fc16, limits).unwrap();
    let cert_ok = vc.certificate.verify(&fc16).unwrap();
    let thick = vc_thick(&fc16, 3, limits).unwrap();
    let thick_cert = thick.certificate.verify(&fc16).unwrap();
    let exhaustive = no_thick_pair(&fc16, 3);
    let part_a = vc.dimension >= 2 && cert_ok && thick.dimension == 1 && thick_cert && exhaustive;
    pass &= part_a;
    notes.push(format!(
        "FC(16,2): vc={} (cert {}), vc_thick(3)={} (cert {}, no 3+3 pair {})",
        vc.dimension, cert_ok, thick.dimension, thick_cert, exhaustive
    ));

    let m = 1000;
    let uniform = DiscreteMeasure::uniform(m).unwrap();
    // a cofinite target: the adversary should answer with a small finite set
    let target = PointSet::from_points(m, [10, 20, 30]).unwrap().complement();
    let adversary = |t: usize| {
        let family = FiniteCofinite::new(m, t).unwrap();
        let config = PacConfig {
            n: 50,
            trials: 5000,
            seed: SEED,
            epsilons: vec![],
            policy: InconsistencyPolicy::Error,
            stream: vec![t as u64],
        };
        pac_error_estimate(&family, LearnerKind::Adversarial, &target, &uniform, &config).unwrap()
    };
    let adv = adversary(5);
    let part_b = adv.mean_error + SIGMA_SLACK * adv.std_error >= C3_ADVERSARY_FLOOR;
    pass &= part_b;
    notes.push(format!(
        "adversary FC(1000,5) n=50: mean error {:.4} ± {:.4} (need >= {C3_ADVERSARY_FLOOR})",
        adv.mean_error, adv.std_error
    ));
    let adv50 = adversary(50);
    notes.push(format!("[info: with t=50 the adversary reaches {:.4}]", adv50.mean_error));

    let n = sample_complexity_bound(0.1, 0.1, 1).unwrap() as usize;
    let family = FiniteCofinite::new(m, 5).unwrap();
    let targets = [
        PointSet::empty(m),
        PointSet::full(m),
        PointSet::from_points(m, [3, 141, 592, 653, 999]).unwrap(),
        PointSet::from_points(m, [2, 718, 281, 828]).unwrap().complement(),
    ];
    let mut worst_freq: f64 = 1.0;
    for (ti, target) in targets.iter().enumerate() {
        let config = PacConfig {
            n,
            trials: 200,
            seed: SEED,
            epsilons: vec![C3_ENUM_EPS],
            policy: InconsistencyPolicy::Error,
            stream: vec![ti as u64],
        };
        let est = pac_error_estimate(&family, LearnerKind::Enumeration, target, &uniform, &config).unwrap();
        worst_freq = worst_freq.min(1.0 - est.exceedance[0].fraction);
    }
    let part_c = worst_freq >= C3_ENUM_FREQ;
    pass &= part_c;
    notes.push(format!("enumeration n={n}: worst P(error <= 0.1) = {worst_freq:.3} over 4 targets"));
    outcome(pass, notes.join("; "))
}

fn c4() -> Outcome {
    let m = 1000;
    let family = FiniteCofinite::new(m, 50).unwrap();
    let uniform = DiscreteMeasure::uniform(m).unwrap();
    let est = empirical_sup_deviation(&family, &uniform, 50, 1000, SEED).unwrap();
    let violations = est.per_trial.iter().filter(|&&d| d < C4_FLOOR - FLOAT_TOL).count();
    let min = est.per_trial.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(violations == 0, format!("FC(1000,50) n=50, 1000 trials: min sup deviation {min:.4}, {violations} below {C4_FLOOR}"))
}

fn c5(limits: &WorkLimits) -> Outcome {
    let cs = 40;
    let classes = [
        (1, gen_cluster_decorated(&gen_thresholds(10).unwrap(), cs, 0, SEED).unwrap()),
        (2, gen_cluster_decorated(&gen_intervals(10).unwrap(), cs, 0, SEED).unwrap()),
        (3, gen_cluster_decorated(&gen_power_set(3).unwrap(), 133, 0, SEED).unwrap()),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (d, class) in &classes {
        let m = class.m();
        let vc = vc_dimension(class, limits).unwrap().dimension;
        let specs = [
            MeasureSpec::Uniform { support: None },
            MeasureSpec::UniformRange { start: 0, end: 200 },
            MeasureSpec::Mixture {
                components: vec![MeasureSpec::Uniform { support: None }, MeasureSpec::UniformRange { start: m - 200, end: m }],
                coefficients: vec![0.5, 0.5],
            },
        ];
        let measures: Vec<DiscreteMeasure> = specs.iter().map(|s| s.build(m).unwrap()).collect();
        let atom_ok = measures.iter().all(|mu| mu.atom_bound() <= C5_ATOM_BOUND + 1e-15);
        let n = sample_complexity_bound(C5_EPS, C5_DELTA, *d).unwrap() as usize;
        let family = OrderedClass::natural(class).unwrap();
        let curve = ugc_curve(&family, &measures, &[n], C5_EPS, 200, SEED ^ *d as u64).unwrap();
        let p = &curve[0];
        let ok = vc == *d && atom_ok && p.probability <= C5_DELTA + SIGMA_SLACK * p.std_error;
        pass &= ok;
        notes.push(format!("d={d} (vc {vc}, m {m}) n={n}: P={:.4}", p.probability));
    }
    let golden = sample_complexity_bound(0.1, 0.05, 2).unwrap();
    let reference: f64 = S_0_1_0_05_2_REFERENCE.parse().unwrap();
    // the reference is far from an integer, so its ceiling is unambiguous
    let reference_ceil = reference.ceil() as u64;
    let golden_ok = golden == S_GOLDEN && golden == reference_ceil && (reference.fract() - 0.5).abs() < 0.49;
    pass &= golden_ok;
    notes.push(format!("s(0.1,0.05,2) = {golden} (reference ceil {reference_ceil})"));
    outcome(pass, notes.join("; "))
}

fn c6() -> Outcome {
    let limits = WorkLimits { packing_nodes: PACKING_EXACT_NODES, ..WorkLimits::default() };
    let mut failures = Vec::new();
    let (mut exact, mut greedy) = (0, 0);
    for d in 1..=12 {
        for eps in [0.05, 0.1, 0.2] {
            let class = gen_patterns(d, 1).unwrap();
            let mu = pattern_mixture(d, 1).unwrap();
            let bounds = packing_lower_bounds(d, eps).unwrap();
            // exact where the clique search fits its budget; otherwise a
            // greedy packing, which is still a valid lower bound
            let size = match packing_number(&class, &mu, 2.0 * eps, PackingMode::Exact, &limits) {
                Ok(r) => {
                    exact += 1;
                    r.size
                }
                Err(Error::WorkLimitExceeded { .. }) => {
                    greedy += 1;
                    packing_number(&class, &mu, 2.0 * eps, PackingMode::Greedy, &limits).unwrap().size
                }
                Err(e) => panic!("{e}"),
            };
            if (size as f64) < bounds.combinatorial || bounds.combinatorial < bounds.chernoff_okamoto {
                failures.push(format!("d={d} eps={eps}: {size} vs {:.3}/{:.3}", bounds.combinatorial, bounds.chernoff_okamoto));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("36 points ({exact} exact, {greedy} greedy lower bounds); failures: {failures:?}"),
    )
}

fn c7(suite: &[(ConceptClass, PrincipalIdeal)], limits: &WorkLimits) -> Outcome {
    use rayon::prelude::*;
    // consistency identity L(σ, C ∩ σ) ∩ σ = C ∩ σ
    let per_class = 2_000usize;
    let chunks: Vec<(u64, u64)> = suite
        .par_iter()
        .enumerate()
        .map(|(ci, (class, _))| {
            let family = OrderedClass::natural(class).unwrap();
            let m = class.m();
            let mu = DiscreteMeasure::uniform(m).unwrap();
            let mut rng = derive_rng(SEED, "acceptance-c7", &[ci as u64]);
            let (mut calls, mut bad) = (0u64, 0u64);
            for i in 0..per_class {
                let target = class.concept(rng.gen_range(0..class.len()));
                let n = rng.gen_range(0..=2 * m);
                let points: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
                let support = PointSet::from_points(m, points.iter().copied()).unwrap();
                let sample = LabeledSample::from_target(SampleSeq { points, seed: SEED }, target);
                let kind = if i % 2 == 0 { LearnerKind::Enumeration } else { LearnerKind::Adversarial };
                let h = learn(&family, kind, &sample, target, &mu).unwrap().expect("target is consistent");
                calls += 1;
                if h.concept.intersection(&support) != target.intersection(&support) || !is_consistent(&h.concept, &sample) {
                    bad += 1;
                }
            }
            (calls, bad)
        })
        .collect();
    let calls: u64 = chunks.iter().map(|c| c.0).sum();
    let bad: u64 = chunks.iter().map(|c| c.1).sum();

    // image of the enumeration learner lies in the order prefix up to the target
    let mut image_checks = 0;
    let mut image_bad = 0;
    let mut image_classes: Vec<ConceptClass> = (2..=6).flat_map(|m| [gen_thresholds(m).unwrap(), gen_intervals(m).unwrap()]).collect();
    image_classes.extend(suite.iter().filter(|(c, _)| c.m() <= 6).take(20).map(|(c, _)| c.clone()));
    for (ci, class) in image_classes.iter().enumerate() {
        let mut shuffled: Vec<usize> = (0..class.len()).collect();
        shuffled.shuffle(&mut derive_rng(SEED, "acceptance-c7-order", &[ci as u64]));
        for order in [(0..class.len()).collect::<Vec<_>>(), shuffled] {
            for target in 0..class.len() {
                for n in 1..=4 {
                    let image = learner_image(class, &order, target, n, ImageMode::Exhaustive, limits).unwrap();
                    image_checks += 1;
                    if !image.exhaustive || image.positions.iter().any(|&p| p > image.target_position) {
                        image_bad += 1;
                    }
                }
            }
        }
    }
    outcome(
        calls >= 1_000_000 && bad == 0 && image_bad == 0,
        format!("{calls} learner invocations, {bad} identity violations; {image_checks} exhaustive images, {image_bad} outside prefix"),
    )
}

fn c8(suite: &[(ConceptClass, PrincipalIdeal)], limits: &WorkLimits) -> Outcome {
    let mut violations = Vec::new();
    for (i, (class, ideal)) in suite.iter().enumerate() {
        let m = class.m();
        let vc = vc_dimension(class, limits).unwrap().dimension;
        let thick: Vec<usize> = (1..=m).map(|k| vc_thick(class, k, limits).unwrap().dimension).collect();
        if thick[0] != vc || thick.windows(2).any(|w| w[1] > w[0]) {
            violations.push(format!("class {i}: thick {thick:?}"));
        }
        let removal: Vec<usize> =
            (0..=m.min(3)).map(|b| vc_after_removal(class, b, RemovalMode::Exact, limits).unwrap().dimension).collect();
        if removal[0] != vc || removal.windows(2).any(|w| w[1] > w[0]) {
            violations.push(format!("class {i}: removal {removal:?}"));
        }
        let mut rng = derive_rng(SEED, "acceptance-c8", &[i as u64]);
        let outer = PointSet::from_points(m, (0..m).filter(|_| rng.gen_bool(0.7))).unwrap();
        let inner = PointSet::from_points(m, outer.iter().filter(|_| rng.gen_bool(0.6))).unwrap();
        let vc_on = |s: &PointSet| class.restrict(s).unwrap().map_or(0, |r| vc_dimension(&r, limits).unwrap().dimension);
        let (vi, vo) = (vc_on(&inner), vc_on(&outer));
        if vi > vo || vo > vc {
            violations.push(format!("class {i}: restriction {vi} {vo} {vc}"));
        }
        let vm = vc_mod_ideal(class, ideal, limits).unwrap().dimension;
        if vm > vc {
            violations.push(format!("class {i}: vc_mod {vm} > vc {vc}"));
        }
    }
    outcome(violations.is_empty(), format!("{} classes, violations: {violations:?}", suite.len()))
}

fn run_cli(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_vcmod")).args(args).current_dir(dir).output().expect("run vcmod");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn c9() -> Outcome {
    let dir = std::env::temp_dir().join(format!("vcmod-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("pac.json"),
        r#"{"class": {"generate": {"family": "finite_cofinite", "m": 1000, "t": 50}},
            "learner": {"kind": "adversarial"},
            "measures": [{"uniform": {}}, {"uniform_range": {"start": 0, "end": 500}}],
            "targets": [[], [1, 2, 3]],
            "n_grid": [10, 50], "epsilons": [0.1, 0.5], "trials": 300}"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("ugc.json"),
        r#"{"class": {"generate": {"family": "cluster_decorated", "base": {"family": "intervals", "m": 8}, "cluster_size": 25, "noise": 0, "seed": 1}},
            "measures": [{"uniform": {}}, {"uniform_range": {"start": 0, "end": 100}}],
            "n_grid": [5, 20, 80, 320], "epsilons": [0.1, 0.2], "trials": 300}"#,
    )
    .unwrap();
    let (code, class) = run_cli(&["gen", "random", "--m", "9", "--count", "30", "--density", "0.5", "--seed", "5"], &dir);
    assert_eq!(code, 0);
    std::fs::write(dir.join("r.cls"), &class).unwrap();
    std::fs::write(dir.join("n.set"), "vcset 1\nm 9\n100000011\n").unwrap();

    let commands: [&[&str]; 4] = [
        &["pac-sim", "--config", "pac.json", "--seed", "11"],
        &["ugc-sim", "--config", "ugc.json", "--seed", "11"],
        &["stone-check", "--class", "r.cls", "--negligible", "n.set"],
        &["gen", "random", "--m", "12", "--count", "40", "--density", "0.3", "--seed", "11"],
    ];
    let mut differing = Vec::new();
    let mut runs = 0;
    for cmd in commands {
        let mut outputs = Vec::new();
        for jobs in [None, Some("1"), Some("3"), Some("8")] {
            let mut args: Vec<&str> = cmd.to_vec();
            if let Some(j) = jobs {
                args.extend(["--jobs", j]);
            }
            let (code, out) = run_cli(&args, &dir);
            runs += 1;
            if code != 0 || out.is_empty() {
                differing.push(format!("{} exited {code}", cmd[0]));
            }
            outputs.push(out);
        }
        if outputs.iter().any(|o| o != &outputs[0]) {
            differing.push(cmd[0].to_string());
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(differing.is_empty(), format!("{runs} runs over 4 commands and jobs {{default,1,3,8}}; differing: {differing:?}"))
}

fn main() {
    let limits = WorkLimits::default();
    let suite = random_suite(600);
    let criteria: Vec<Criterion> = vec![
        ("1 stone/strong-shattering equivalence", Box::new(|| c1(&suite, &limits))),
        ("2 vc_mod equals vc of the restriction", Box::new(|| c2(&suite, &limits))),
        ("3 finite/cofinite example", Box::new(|| c3(&limits))),
        ("4 uniform deviation failure mode", Box::new(c4)),
        ("5 deviation bound dominance", Box::new(|| c5(&limits))),
        ("6 packing bounds", Box::new(c6)),
        ("7 learner invariants", Box::new(|| c7(&suite, &limits))),
        ("8 monotonicity battery", Box::new(|| c8(&suite, &limits))),
        ("9 CLI determinism", Box::new(c9)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let r = check();
        let secs = start.elapsed().as_secs_f64();
        println!("{} criterion {name}: {} [{secs:.1}s]", if r.pass { "PASS" } else { "FAIL" }, r.detail);
        if !r.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
