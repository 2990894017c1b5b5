//! One PASS/FAIL line per acceptance criterion, on the default synthetic
//! benchmark. Exits nonzero if any criterion fails.

mod common;

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use vae_debias::adversary::bce;
use vae_debias::data::{synth_generate, write_csv_to, Attribute, EmbeddingDataset, Split, SynthConfig, Task};
use vae_debias::eval::{
    auc, eod, fairness_report, fit_linear_probe, fit_logistic_probe, latent_sweep, DatasetReport, FairnessReport,
    ProbeLabel,
};
use vae_debias::poison_bench::{run_poison_sweep, EmbeddingKind, PoisonCurve, PoisonSweepConfig};
use vae_debias::trainer::{relative_recon_mse, train, transform_dataset, Checkpoint, TrainConfig, TransformMode};
use vae_debias::vae::kl_loss;

const SWEEP_DIMS: [usize; 5] = [4, 8, 16, 32, 64];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn benchmark_config() -> TrainConfig {
    TrainConfig {
        latent_dim: 32,
        epochs: 50,
        ..TrainConfig::default()
    }
}

fn f(v: Option<f64>) -> String {
    v.map_or("undefined".into(), |x| format!("{x:.3}"))
}

/// Everything the benchmark produces, kept as bytes for the determinism check.
struct Run {
    data: EmbeddingDataset,
    checkpoint: Checkpoint,
    debiased: EmbeddingDataset,
    report: FairnessReport,
    poison: PoisonCurve,
    poison_time: Duration,
    bytes: Vec<(&'static str, Vec<u8>)>,
}

fn run_benchmark() -> Run {
    let data = synth_generate(&SynthConfig::default()).unwrap();
    let checkpoint = train(&data, &benchmark_config()).unwrap();
    let debiased = transform_dataset(&checkpoint, &data, TransformMode::default()).unwrap();
    let report = fairness_report(&data, &debiased).unwrap();
    let t = Instant::now();
    let poison = run_poison_sweep(&data, &debiased, &PoisonSweepConfig::default()).unwrap();
    let poison_time = t.elapsed();

    let csv = |ds: &EmbeddingDataset| {
        let mut b = Vec::new();
        write_csv_to(ds, &mut b).unwrap();
        b
    };
    let mut poison_csv = Vec::new();
    poison.write_csv(&mut poison_csv).unwrap();
    let bytes = vec![
        ("synthetic csv", csv(&data)),
        ("checkpoint", checkpoint.to_json().into_bytes()),
        ("transformed csv", csv(&debiased)),
        ("fairness report", serde_json::to_vec_pretty(&report).unwrap()),
        ("poison csv", poison_csv),
    ];
    Run {
        data,
        checkpoint,
        debiased,
        report,
        poison,
        poison_time,
        bytes,
    }
}

fn gradients() -> Outcome {
    let t = Instant::now();
    let suite = common::gradient_suite();
    let secs = t.elapsed().as_secs_f64();
    let (name, worst) = suite.iter().fold(("", 0.0f64), |acc, (n, e)| if *e > acc.1 { (n, *e) } else { acc });
    outcome(
        worst <= 1e-4 && secs < 10.0,
        format!("{} checks, max rel err {worst:.2e} ({name}), {secs:.2}s", suite.len()),
    )
}

fn formulas() -> Outcome {
    let checks = [
        ("kl(0,0)", kl_loss(&[0.0], &[0.0]).unwrap() == 0.0),
        ("kl([1],[0])", kl_loss(&[1.0], &[0.0]).unwrap() == 0.5),
        ("bce(0.5,1)", (bce(0.5, 1.0) - LN_2).abs() <= 1e-12),
        ("auc", auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap() == 0.75),
        ("eod", {
            let s = [0.9, 0.9, 0.9, 0.9, 0.1, 0.9, 0.9, 0.9, 0.1, 0.1];
            let g = [false, false, false, false, false, true, true, true, true, true];
            eod(&s, &[1; 10], &g, 0.5).unwrap().eod == Some(0.2)
        }),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    if failed.is_empty() {
        outcome(true, "kl, bce, auc and eod oracles exact")
    } else {
        outcome(false, format!("failed: {}", failed.join(", ")))
    }
}

fn plain_vae(data: &EmbeddingDataset) -> Outcome {
    let cfg = TrainConfig {
        lambda_adv: 0.0,
        epochs: 30,
        ..benchmark_config()
    };
    let ck = train(data, &cfg).unwrap();
    let rel = relative_recon_mse(&ck, data, Split::Test).unwrap();
    outcome(rel <= 0.2, format!("test relative recon mse {rel:.3} (<= 0.2)"))
}

fn sex_scrubbing(o: &DatasetReport, d: &DatasetReport) -> Outcome {
    let (before, after) = (o.sex.as_ref().unwrap().auc, d.sex.as_ref().unwrap().auc);
    outcome(
        before >= 0.95 && after <= 0.65,
        format!("sex probe auc {before:.3} -> {after:.3} (>= 0.95 -> <= 0.65)"),
    )
}

fn age_scrubbing(o: &DatasetReport, d: &DatasetReport) -> Outcome {
    let (oa, da) = (o.age.as_ref().unwrap(), d.age.as_ref().unwrap());
    let base = oa.mean_baseline_mae;
    outcome(
        da.mae >= 1.3 * oa.mae && da.mae >= 0.7 * base,
        format!(
            "age mae {:.2} -> {:.2} (x{:.2}, >= 1.3), mean-age baseline {base:.2} (ratio {:.2}, >= 0.7)",
            oa.mae,
            da.mae,
            da.mae / oa.mae,
            da.mae / base
        ),
    )
}

fn utility(o: &DatasetReport, d: &DatasetReport) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for t in Task::ALL {
        let (a, b) = (o.task(t).unwrap().auc, d.task(t).unwrap().auc);
        pass &= (a - b).abs() <= 0.05;
        parts.push(format!("{t} auc {a:.3} -> {b:.3}"));
    }
    outcome(pass, format!("{} (|diff| <= 0.05)", parts.join(", ")))
}

fn fairness(o: &DatasetReport, d: &DatasetReport) -> Outcome {
    let mut pass = SynthConfig::default().task_group_bias > 0.0;
    let mut parts = Vec::new();
    for t in Task::ALL {
        for a in Attribute::ALL {
            let (x, y) = (o.task(t).unwrap().eod_for(a), d.task(t).unwrap().eod_for(a));
            pass &= matches!((x, y), (Some(x), Some(y)) if y <= x);
            parts.push(format!("{t}/{a} {} -> {}", f(x), f(y)));
        }
    }
    outcome(pass, format!("eod {}", parts.join(", ")))
}

fn poisoning(curve: &PoisonCurve, elapsed: Duration) -> Outcome {
    let mut pass = elapsed < Duration::from_secs(600);
    let mut full = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for row in curve.rows.iter().filter(|r| r.embedding == EmbeddingKind::Original) {
        let deb = curve
            .get(EmbeddingKind::Debiased, row.task, row.target_group, row.fraction)
            .unwrap();
        let (Some(o), Some(d)) = (row.eod, deb.eod) else {
            pass = false;
            continue;
        };
        if row.fraction >= 0.5 {
            worst_margin = worst_margin.min(o - d);
            pass &= d <= o;
        }
        if row.fraction == 1.0 {
            pass &= o >= 0.5 && d <= 0.15;
            full.push(format!("{}/g{} {o:.3}/{d:.3}", row.task, row.target_group));
        }
    }
    outcome(
        pass,
        format!(
            "at 100% flip orig/deb eod {}; min orig-deb margin at >= 50% {worst_margin:.3}; {:.1}s",
            full.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn sweep(data: &EmbeddingDataset) -> Outcome {
    let r = latent_sweep(data, &SWEEP_DIMS, &benchmark_config()).unwrap();
    let (lo, hi) = (r.rows.first().unwrap(), r.rows.last().unwrap());
    let gain = hi.task1_auc - lo.task1_auc;
    let trend = r
        .rows
        .iter()
        .map(|x| format!("{}:{:.3}/{:.3}", x.latent_dim, x.task1_auc, x.sex_auc))
        .collect::<Vec<_>>()
        .join(" ");
    outcome(
        gain >= 0.1 && hi.sex_auc >= lo.sex_auc,
        format!("dim:task1/sex auc {trend}; task1 gain {gain:.3} (>= 0.1)"),
    )
}

fn determinism(a: &Run, b: &Run) -> Outcome {
    let differing: Vec<&str> = a
        .bytes
        .iter()
        .zip(&b.bytes)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0)
        .collect();
    if differing.is_empty() {
        let names: Vec<&str> = a.bytes.iter().map(|x| x.0).collect();
        outcome(true, format!("byte-identical across two runs: {}", names.join(", ")))
    } else {
        outcome(false, format!("differ: {}", differing.join(", ")))
    }
}

fn corrupt_test_labels(ds: &EmbeddingDataset) -> EmbeddingDataset {
    let recs = ds
        .records()
        .iter()
        .cloned()
        .map(|mut r| {
            if r.split == Split::Test {
                r.sex = 1 - r.sex;
                r.cancer_1y = 1 - r.cancer_1y;
                r.cancer_2y = 1 - r.cancer_2y;
                r.age = 130.0 - r.age;
            }
            r
        })
        .collect();
    EmbeddingDataset::new(ds.dimension(), recs).unwrap()
}

fn hygiene(run: &Run) -> Outcome {
    let labels = [ProbeLabel::Sex, ProbeLabel::Task(Task::Cancer1y), ProbeLabel::Task(Task::Cancer2y)];
    let mut fits = 0;
    let mut pass = true;
    for ds in [&run.data, &run.debiased] {
        let bad = corrupt_test_labels(ds);
        for l in labels {
            pass &= fit_logistic_probe(ds, l).unwrap() == fit_logistic_probe(&bad, l).unwrap();
            fits += 1;
        }
        pass &= fit_linear_probe(ds).unwrap() == fit_linear_probe(&bad).unwrap();
        fits += 1;
    }
    outcome(pass, format!("{fits} probes refit after corrupting test labels, parameters unchanged"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("gradient correctness", gradients()),
        ("loss formula oracles", formulas()),
    ];
    let first = run_benchmark();
    let second = run_benchmark();
    let (o, d) = (&first.report.original, &first.report.debiased);
    assert_eq!(first.checkpoint.config, benchmark_config());

    results.push(("plain VAE reconstruction", plain_vae(&first.data)));
    results.push(("sex scrubbing", sex_scrubbing(o, d)));
    results.push(("age scrubbing", age_scrubbing(o, d)));
    results.push(("utility preserved", utility(o, d)));
    results.push(("fairness improved", fairness(o, d)));
    results.push(("poisoning robustness", poisoning(&first.poison, first.poison_time)));
    results.push(("latent sweep trend", sweep(&first.data)));
    results.push(("determinism", determinism(&first, &second)));
    results.push(("probe hygiene", hygiene(&first)));

    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        println!("{} {:>2} {name}: {}", if r.pass { "PASS" } else { "FAIL" }, i + 1, r.detail);
        failed += usize::from(!r.pass);
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
