//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with a custom harness (`harness = false`) so the lines come out in
//! order; the process exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;

use cpdual::channel::{BallChannel, ChannelModel, Dmc};
use cpdual::covering::{
    analytic_failure, exponent_report, simulate_covering, CoveringConfig, OutputTypeChoice,
};
use cpdual::distortion::{
    ball_cardinalities, check_duality_levels, excess_probs_both_random, DistortionFn,
    DistortionMatrix, Threshold,
};
use cpdual::oracle::{binary_hamming_rd, blahut_arimoto};
use cpdual::packing::{bound_check, estimate_omega, simulate_packing};
use cpdual::prob::{ArithPolicy, ExactProb};
use cpdual::rng::StreamKey;
use cpdual::types::{
    enumerate_types, for_each_member, multinomial, sample_uniform, visit_joint_types, TypeVector,
};
use cpdual::{Limits, Rational};

const SEED: u64 = 20_260_101;
const BLOCKLENGTHS: [usize; 5] = [2, 4, 6, 8, 12];
const LIMITS: Limits = Limits::DEFAULT;

type Outcome = Result<String, String>;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn levels() -> Vec<Rational> {
    vec![r(0, 1), r(1, 4), r(1, 3), r(1, 2), r(3, 4)]
}

/// Hamming plus an asymmetric rational matrix for each alphabet pair.
fn matrices(rows: usize, cols: usize) -> Vec<(&'static str, DistortionMatrix)> {
    let asym = [
        [r(0, 1), r(1, 1), r(1, 2)],
        [r(2, 3), r(0, 1), r(1, 1)],
        [r(1, 1), r(1, 3), r(0, 1)],
    ];
    let entries = (0..rows)
        .flat_map(|x| (0..cols).map(move |y| asym[x][y]))
        .collect();
    vec![
        ("hamming", DistortionMatrix::hamming(rows, cols)),
        (
            "asymmetric",
            DistortionMatrix::new(rows, cols, entries).unwrap(),
        ),
    ]
}

fn alphabet_pairs() -> Vec<(usize, usize)> {
    vec![(2, 2), (2, 3), (3, 2), (3, 3)]
}

fn types(size: usize, n: usize) -> Vec<TypeVector> {
    enumerate_types(size, n, LIMITS.enumeration_budget).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let levels = levels();
    let mut instances = 0usize;
    let mut failures = Vec::new();
    for (rows, cols) in alphabet_pairs() {
        for (name, d) in matrices(rows, cols) {
            for n in BLOCKLENGTHS {
                let pairs: Vec<(TypeVector, TypeVector)> = types(rows, n)
                    .into_iter()
                    .flat_map(|p| types(cols, n).into_iter().map(move |q| (p.clone(), q)))
                    .collect();
                let results: Vec<_> = pairs
                    .par_iter()
                    .enumerate()
                    .map(|(i, (p, q))| {
                        let key = StreamKey::new(
                            SEED,
                            "acceptance-duality",
                            &[rows as u64, cols as u64, n as u64, i as u64],
                        );
                        check_duality_levels(p, q, &levels, &d, 2, &key, &LIMITS)
                    })
                    .collect();
                for reports in results {
                    let reports =
                        reports.map_err(|e| format!("{name} {rows}x{cols} n={n}: {e}"))?;
                    for rep in reports {
                        instances += 1;
                        if !rep.equal {
                            failures.push(format!(
                                "{name} n={n} p={} q={} D={}",
                                rep.p, rep.q, rep.level
                            ));
                        }
                    }
                }
            }
        }
    }
    within_runtime(start, 60.0)?;
    if failures.is_empty() {
        Ok(format!(
            "{instances} instances (every p and q), fixed-y = fixed-u = both-random exactly"
        ))
    } else {
        Err(format!(
            "{} of {instances} instances unequal, first: {}",
            failures.len(),
            failures[0]
        ))
    }
}

fn within_runtime(start: Instant, limit_secs: f64) -> Result<(), String> {
    let secs = start.elapsed().as_secs_f64();
    if secs <= limit_secs {
        Ok(())
    } else {
        Err(format!("took {secs:.1}s, runtime target is {limit_secs}s"))
    }
}

/// Balanced and maximally skewed full-support source types at `n`.
fn source_family(size: usize, n: usize) -> Vec<TypeVector> {
    let mut balanced: Vec<usize> = (0..size)
        .map(|i| n / size + usize::from(i < n % size))
        .collect();
    balanced.sort_unstable_by(|a, b| b.cmp(a));
    let mut family = vec![TypeVector::new(balanced).unwrap()];
    if n >= size {
        let mut skewed = vec![1; size];
        skewed[0] = n - (size - 1);
        let skewed = TypeVector::new(skewed).unwrap();
        if !family.contains(&skewed) {
            family.push(skewed);
        }
    }
    family
}

fn criterion_2() -> Outcome {
    const PAIRS: u64 = 20;
    let levels = levels();
    let mut comparisons = 0usize;
    let mut instances = 0usize;
    for (rows, cols) in alphabet_pairs() {
        for (name, d) in matrices(rows, cols) {
            for n in BLOCKLENGTHS {
                let cells: Vec<(TypeVector, TypeVector)> = source_family(rows, n)
                    .into_iter()
                    .flat_map(|p| types(cols, n).into_iter().map(move |q| (p.clone(), q)))
                    .collect();
                let outcome: Result<Vec<usize>, String> = cells
                    .par_iter()
                    .enumerate()
                    .map(|(i, (p, q))| {
                        let key = StreamKey::new(
                            SEED,
                            "acceptance-cardinality",
                            &[rows as u64, cols as u64, n as u64, i as u64],
                        );
                        let mut mismatches = 0;
                        for k in 0..PAIRS {
                            let mut rng = key.stream(k);
                            let y1 = sample_uniform(q, &mut rng);
                            let y2 = sample_uniform(q, &mut rng);
                            let a = ball_cardinalities(&y1, p, &levels, &d, &LIMITS)
                                .map_err(|e| e.to_string())?;
                            let b = ball_cardinalities(&y2, p, &levels, &d, &LIMITS)
                                .map_err(|e| e.to_string())?;
                            mismatches += a.iter().zip(&b).filter(|(x, y)| x != y).count();
                        }
                        Ok(mismatches)
                    })
                    .collect();
                let mismatches: usize = outcome
                    .map_err(|e| format!("{name} n={n}: {e}"))?
                    .into_iter()
                    .sum();
                if mismatches > 0 {
                    return Err(format!(
                        "{name} {rows}x{cols} n={n}: {mismatches} unequal cardinalities"
                    ));
                }
                instances += cells.len() * levels.len();
                comparisons += cells.len() * levels.len() * PAIRS as usize;
            }
        }
    }
    Ok(format!(
        "{comparisons} same-type pairs over {instances} instances (balanced and skewed p, every q), all equal"
    ))
}

fn criterion_3() -> Outcome {
    const PAIR_LIMIT: u64 = 100_000;
    let levels = levels();
    let mut instances = 0usize;
    let mut pairs_enumerated = 0u64;
    for (rows, cols) in alphabet_pairs() {
        for (name, d) in matrices(rows, cols) {
            for n in BLOCKLENGTHS {
                let cutoffs: Vec<u64> = levels
                    .iter()
                    .map(|&l| Threshold::for_fn(&d, n, l).unwrap().cutoff())
                    .collect();
                let cells: Vec<(TypeVector, TypeVector)> = types(rows, n)
                    .into_iter()
                    .flat_map(|p| types(cols, n).into_iter().map(move |q| (p.clone(), q)))
                    .filter(|(p, q)| p.class_size() * q.class_size() <= BigUint::from(PAIR_LIMIT))
                    .collect();
                let bad: Vec<String> = cells
                    .par_iter()
                    .filter_map(|(p, q)| {
                        let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
                        for_each_member(p, |u| {
                            for_each_member(q, |v| {
                                *hist.entry(d.scaled_total(u, v)).or_insert(0) += 1
                            });
                        });
                        let total: u64 = hist.values().sum();
                        let exact = excess_probs_both_random(p, q, &levels, &d, &LIMITS).unwrap();
                        cutoffs.iter().zip(&exact).find_map(|(&c, e)| {
                            let count: u64 = hist.range(c + 1..).map(|(_, v)| v).sum();
                            let brute = ExactProb::from_counts(count.into(), total.into()).unwrap();
                            (brute != *e)
                                .then(|| format!("{name} n={n} p={p} q={q}: {brute} vs {e}"))
                        })
                    })
                    .collect();
                if let Some(first) = bad.first() {
                    return Err(first.clone());
                }
                instances += cells.len() * levels.len();
                pairs_enumerated += cells
                    .iter()
                    .map(|(p, q)| {
                        use num_traits::ToPrimitive;
                        (p.class_size() * q.class_size()).to_u64().unwrap()
                    })
                    .sum::<u64>();
            }
        }
    }
    Ok(format!(
        "{instances} instances with |T_p||T_q| <= 1e5 match double enumeration ({pairs_enumerated} pairs visited)"
    ))
}

fn criterion_4() -> Outcome {
    let mut margins = 0usize;
    for (rows, cols) in alphabet_pairs() {
        for n in 1..=16 {
            let ps = types(rows, n);
            let qs = types(cols, n);
            let bad = ps
                .par_iter()
                .flat_map_iter(|p| qs.iter().map(move |q| (p, q)))
                .find_any(|(p, q)| {
                    let mut sum = BigUint::zero();
                    visit_joint_types(p, q, |cells| {
                        sum += multinomial(cells);
                        Ok(())
                    })
                    .unwrap();
                    sum != p.class_size() * q.class_size()
                });
            if let Some((p, q)) = bad {
                return Err(format!("margins p={p} q={q} do not partition T_p x T_q"));
            }
            margins += ps.len() * qs.len();
        }
    }
    Ok(format!(
        "{margins} margin pairs (n <= 16, alphabets 2 and 3): sums equal |T_p||T_q|"
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let d = DistortionMatrix::hamming(2, 2);
    let mut detail = Vec::new();
    let mut failures = Vec::new();
    for level in [r(1, 20), r(11, 100), r(1, 5)] {
        let target = binary_hamming_rd(*level.numer() as f64 / *level.denom() as f64);
        let mut last = f64::NAN;
        for n in (3..=9).map(|k| 1usize << k) {
            let p = TypeVector::new(vec![n / 2, n / 2]).unwrap();
            let e = exponent_report(&p, level, &d, ArithPolicy::Log, &LIMITS)
                .map_err(|e| e.to_string())?
                .exponent
                .as_f64();
            if e < target {
                failures.push(format!("D={level} n={n}: {e:.6} < {target:.6}"));
            }
            last = e;
        }
        if (last - target).abs() > 0.05 {
            failures.push(format!("D={level} n=512: gap {:.4} > 0.05", last - target));
        }
        detail.push(format!("D={level}: gap {:.4}", last - target));
    }
    within_runtime(start, 120.0)?;
    if failures.is_empty() {
        Ok(format!(
            "exponent >= 1-h(D) for n = 8..512; at n=512 {}",
            detail.join(", ")
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_6() -> Outcome {
    let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let mut worst: f64 = 0.0;
    for i in 0..25 {
        let level = 0.01 + 0.02 * i as f64;
        let pt =
            blahut_arimoto(&[0.5, 0.5], &d, level, 1e-10).map_err(|e| format!("D={level}: {e}"))?;
        worst = worst.max((pt.rate - binary_hamming_rd(level)).abs());
    }
    if worst <= 1e-6 {
        Ok(format!(
            "max |BA - (1-h(D))| = {worst:.2e} over D = 0.01..0.49"
        ))
    } else {
        Err(format!("max deviation {worst:.2e} > 1e-6"))
    }
}

fn criterion_7() -> Outcome {
    const TRIALS: u64 = 10_000;
    let d = DistortionMatrix::hamming(2, 2);
    let level = r(1, 4);
    let channels: Vec<Box<dyn ChannelModel>> = vec![
        Box::new(BallChannel::new(d.clone(), level).unwrap()),
        Box::new(Dmc::bsc(0.05).unwrap()),
    ];
    let mut cells = 0;
    let mut min_margin = f64::INFINITY;
    let mut failures = Vec::new();
    for (ci, ch) in channels.iter().enumerate() {
        for n in [2usize, 4, 8] {
            let p = TypeVector::new(vec![n / 2, n / 2]).unwrap();
            let key = StreamKey::new(SEED, "acceptance-pack", &[ci as u64, n as u64]);
            let omega =
                estimate_omega(&**ch, &p, level, &d, TRIALS, &key.child("omega", &[])).unwrap();
            let a = cpdual::covering::best_q(&p, level, &d, ArithPolicy::Exact, &LIMITS).unwrap();
            for (ri, rate) in [0.0, 0.1, 0.25].into_iter().enumerate() {
                let res = simulate_packing(
                    &**ch,
                    &p,
                    level,
                    &d,
                    rate,
                    TRIALS,
                    &key.child("pack", &[ri as u64]),
                    ArithPolicy::Exact,
                    &LIMITS,
                )
                .unwrap();
                let check = bound_check(&res, a.a(), &omega);
                cells += 1;
                min_margin =
                    min_margin.min(check.empirical - (check.conservative_bound - check.slack));
                if !check.pass {
                    failures.push(format!("{} n={n} R={rate}: {:?}", ch.name(), check));
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!(
            "{cells} cells (ball and BSC(0.05), D=1/4): empirical >= bound - 3 half-widths, min excess {min_margin:.4}"
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_8() -> Outcome {
    const RUNS: u64 = 100;
    let d = DistortionMatrix::hamming(2, 2);
    let p = TypeVector::new(vec![4, 4]).unwrap();
    let q = TypeVector::new(vec![4, 4]).unwrap();
    let level = r(1, 4);
    let cfg = CoveringConfig {
        p: p.clone(),
        q: OutputTypeChoice::Fixed(q.clone()),
        level,
        rate: 0.25,
        trials: 1000,
    };
    let analytic = analytic_failure(&p, &q, level, &d, 4, ArithPolicy::Exact, &LIMITS)
        .unwrap()
        .to_f64();
    let inside = (0..RUNS)
        .filter(|&i| {
            let key = StreamKey::new(SEED, "acceptance-calibration", &[i]);
            let res = simulate_covering(&cfg, &d, &key, ArithPolicy::Exact, &LIMITS).unwrap();
            res.chosen().empirical.contains(analytic)
        })
        .count();
    let line = format!("{inside}/100 runs contain the analytic failure {analytic:.4} (need >= 93)");
    if inside >= 93 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn criterion_9() -> Outcome {
    const TRIALS: u64 = 1000;
    let d = DistortionMatrix::hamming(2, 2);
    let level = r(11, 100);
    let p = TypeVector::new(vec![64, 64]).unwrap();
    let ch = Dmc::bsc(0.03).unwrap();
    let key = StreamKey::new(SEED, "acceptance-separation", &[]);
    let omega = estimate_omega(&ch, &p, level, &d, TRIALS, &key.child("omega", &[])).unwrap();
    if omega.point() >= 0.05 {
        return Err(format!(
            "BSC(0.03) does not carry U within D: omega {:.4}",
            omega.point()
        ));
    }
    let exponent = exponent_report(&p, level, &d, ArithPolicy::Auto, &LIMITS)
        .unwrap()
        .exponent
        .as_f64();
    let run = |rate: f64, tag: u64| {
        simulate_packing(
            &ch,
            &p,
            level,
            &d,
            rate,
            TRIALS,
            &key.child("pack", &[tag]),
            ArithPolicy::Auto,
            &LIMITS,
        )
        .map(|res| res.correct_rate())
        .map_err(|e| e.to_string())
    };
    let good = run(0.25, 0)?;
    let over = run(exponent + 0.3, 1)?;
    let line = format!(
        "omega {:.4}, exponent {exponent:.4}; correct {good:.3} at R=0.25, {over:.3} at R={:.4}",
        omega.point(),
        exponent + 0.3
    );
    if good >= 0.9 && over < 0.5 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn run_cli(command: &str, config: &Path, threads: usize, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_cpdual"))
        .args([command, "--config"])
        .arg(config)
        .args(["--threads", &threads.to_string(), "--out"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{command} --threads {threads} exited with {}: {}",
            status.status,
            String::from_utf8_lossy(&status.stderr)
        ))
    }
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn criterion_10() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let runs = [
        ("duality", "duality_binary.toml"),
        ("exponent", "exponent_binary.toml"),
        ("cover", "cover_small.toml"),
        ("pack", "pack_bsc.toml"),
        ("separation", "separation_bsc.toml"),
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (command, config) in runs {
        let a = tmp.path().join(format!("{command}-1"));
        let b = tmp.path().join(format!("{command}-4"));
        run_cli(command, &configs.join(config), 1, &a)?;
        run_cli(command, &configs.join(config), 4, &b)?;
        let (fa, fb) = (csv_files(&a), csv_files(&b));
        if fa.is_empty() || fa != fb {
            return Err(format!(
                "{command}: CSV outputs differ between --threads 1 and 4"
            ));
        }
        files += fa.len();
    }
    Ok(format!(
        "{files} CSV files byte-identical across --threads 1 and 4 for all five commands"
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("duality identity", criterion_1),
        ("ball cardinality symmetry", criterion_2),
        ("exact vs brute force", criterion_3),
        ("joint-type partition", criterion_4),
        ("exponent convergence", criterion_5),
        ("Blahut-Arimoto vs closed form", criterion_6),
        ("packing bound", criterion_7),
        ("covering calibration", criterion_8),
        ("separation demo", criterion_9),
        ("determinism", criterion_10),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {label}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
