//! End-to-end acceptance checks. Prints one PASS/FAIL/SKIP line per check
//! and fails if any check fails.
//!
//! Check 8 needs the UNSW-NB15 partition files; point `NIDT_UNSW_DIR` at a
//! directory holding `UNSW_NB15_training-set.csv` and
//! `UNSW_NB15_testing-set.csv` to run it.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use common::gradcheck::{cases, run_case, TOLERANCE};
use common::synth;
use nidt::config::RunConfig;
use nidt::dataset::{load_csvs, split, split_indices, RawRow, SplitSpec};
use nidt::eval::{auc, confusion, evaluate, roc, ConfusionMatrix};
use nidt::features::{fit_importance, ForestConfig};
use nidt::model::{build, Family};
use nidt::pipeline::{fit_preprocessing, train_bundle};
use nidt::schema::Schema;
use nidt::transfer::{export_bundle, Bundle, InferenceEngine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn architecture_fidelity() -> Result<String, String> {
    let m = build(Family::CnnLstm, 32, 0).map_err(|e| e.to_string())?;
    let rows: Vec<_> = m.arch.summary().into_iter().filter(|r| r.kind != "relu" && r.kind != "sigmoid").collect();
    let expected: &[(&[usize], usize)] = &[
        (&[32, 64], 256),
        (&[32, 64], 12_352),
        (&[16, 64], 0),
        (&[16, 128], 24_704),
        (&[16, 128], 49_280),
        (&[8, 128], 0),
        (&[8, 256], 98_560),
        (&[8, 256], 196_864),
        (&[4, 256], 0),
        (&[100], 142_800),
        (&[256], 25_856),
        (&[256], 0),
        (&[128], 32_896),
        (&[128], 0),
        (&[1], 129),
    ];
    ensure(rows.len() == expected.len(), || format!("{} layer rows, expected {}", rows.len(), expected.len()))?;
    for (r, (shape, params)) in rows.iter().zip(expected) {
        ensure(r.output_shape == *shape && r.params == *params, || {
            format!("{}: shape {:?} params {}, expected {:?} {}", r.name, r.output_shape, r.params, shape, params)
        })?;
    }
    let total = m.network.param_count();
    ensure(total == 583_697, || format!("total {total}"))?;
    Ok(format!("{} rows match, {total} parameters", rows.len()))
}

fn gradient_soundness() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for case in cases() {
        for seed in 0..20 {
            let r = run_case(&case, seed);
            ensure(r.max_err <= TOLERANCE, || format!("{} seed {seed}: relative error {:e}", case.name, r.max_err))?;
            worst = worst.max(r.max_err);
            n += 1;
        }
    }
    Ok(format!("{n} checks, worst relative error {worst:.2e}"))
}

fn transfer_invariance() -> Result<String, String> {
    let (schema, records) = synth::separable(10_000, 32, 3);
    let config = RunConfig { forest_trees: 10, ..RunConfig::default() };
    let prep = fit_preprocessing(&records, &schema, &config).map_err(|e| e.to_string())?;
    let model = build(Family::CnnLstm, prep.selection.k(), 7).map_err(|e| e.to_string())?;
    let (x, _) = prep.apply(&records, &schema).map_err(|e| e.to_string())?;
    let source = model.predict_proba(&x).map_err(|e| e.to_string())?;

    let bundle = Bundle::new(model, prep.selection, prep.scaler, prep.encoding, schema, Default::default())
        .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.nidt");
    let summary = export_bundle(&path, &bundle).map_err(|e| e.to_string())?;
    let engine = InferenceEngine::load(&path).map_err(|e| e.to_string())?;
    let rows: Vec<RawRow> = records.into_iter().map(RawRow::from).collect();
    let many = std::thread::available_parallelism().map_or(2, |n| n.get().max(2));
    let bits = |v: &[f32]| v.iter().map(|s| s.to_bits()).collect::<Vec<_>>();
    for threads in [1, many] {
        let target = engine.infer_threads(&rows, threads).map_err(|e| e.to_string())?;
        ensure(bits(&target) == bits(&source), || format!("scores differ with {threads} threads"))?;
    }
    Ok(format!("{} records bit-identical at 1 and {many} threads ({summary})", rows.len()))
}

fn split_fidelity() -> Result<String, String> {
    let labels = synth::labels(257_673, 0.64, 11);
    let idx = split_indices(&labels, &SplitSpec::default()).map_err(|e| e.to_string())?;
    let sizes = (idx.train.len(), idx.val.len(), idx.test.len());
    ensure(sizes == (154_603, 51_535, 51_535), || format!("sizes {sizes:?}"))?;
    Ok(format!("{} / {} / {}", sizes.0, sizes.1, sizes.2))
}

fn metric_oracles() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = rng.gen_range(2..=500);
        let mut labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        labels[0] = 0;
        labels[1] = 1;
        // Coarse scores on odd instances to force ties.
        let scores: Vec<f64> = (0..n)
            .map(|_| if i % 2 == 1 { f64::from(rng.gen_range(0..10u8)) / 10.0 } else { rng.gen() })
            .collect();
        let a = auc(&roc(&labels, &scores).map_err(|e| e.to_string())?).ok_or("auc undefined")?;
        let diff = (a - synth::mann_whitney(&labels, &scores)).abs();
        ensure(diff <= 1e-9, || format!("instance {i}: AUC differs from Mann-Whitney by {diff:e}"))?;
        worst = worst.max(diff);
    }
    let cm = confusion(&[1, 1, 0, 0], &[1, 0, 0, 1]).map_err(|e| e.to_string())?;
    ensure(cm == ConfusionMatrix { tp: 1, fp: 1, tn: 1, fn_: 1 }, || format!("{cm:?}"))?;
    let cm = ConfusionMatrix { tp: 8, fn_: 2, fp: 1, tn: 89 };
    ensure(cm.tpr().value() == 0.8, || "tpr".into())?;
    ensure(cm.fpr().value() == 1.0 / 90.0, || "fpr".into())?;
    ensure(cm.accuracy().pct() == 97.0, || "accuracy".into())?;
    let c = roc(&[1, 0, 1, 0], &[0.9, 0.8, 0.4, 0.1]).map_err(|e| e.to_string())?;
    ensure(auc(&c) == Some(0.75), || "fixture AUC".into())?;
    Ok(format!("100 AUC instances within {worst:.1e}, fixtures exact"))
}

fn importance_sanity() -> Result<String, String> {
    for seed in 0..10 {
        let (x, y) = synth::planted(400, 8, seed);
        let config = ForestConfig { seed, ..ForestConfig::default() };
        let report = fit_importance(&x, &y, &config).map_err(|e| e.to_string())?;
        let top = report.ranked()[0].0.to_string();
        ensure(top == "planted", || format!("seed {seed}: `{top}` ranked first"))?;
        let c = report.score("constant").unwrap_or(f64::NAN);
        ensure(c == 0.0, || format!("seed {seed}: constant scored {c}"))?;
    }
    Ok("planted feature first on 10 seeds, constant feature 0".into())
}

fn end_to_end() -> Result<String, String> {
    let (schema, records) = synth::separable(2_000, 32, 21);
    let config = RunConfig { batch_size: 32, max_epochs: 50, patience: 5, ..RunConfig::default() };
    let splits = split(&records, &config.split_spec()).map_err(|e| e.to_string())?;
    let outcome = train_bundle(Family::CnnLstm, &splits.train, &splits.val, &schema, &config).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.nidt");
    export_bundle(&path, &outcome.bundle).map_err(|e| e.to_string())?;
    let engine = InferenceEngine::load(&path).map_err(|e| e.to_string())?;
    let labels: Vec<u8> = splits.test.iter().map(|r| r.label).collect();
    let rows: Vec<RawRow> = splits.test.into_iter().map(RawRow::from).collect();
    let scores: Vec<f64> = engine.infer(&rows).map_err(|e| e.to_string())?.into_iter().map(f64::from).collect();
    let (report, _) = evaluate(&labels, &scores, config.threshold).map_err(|e| e.to_string())?;
    let epochs = outcome.report.epochs.len();
    ensure(report.accuracy_pct >= 95.0, || format!("test accuracy {:.2}% after {epochs} epochs", report.accuracy_pct))?;
    Ok(format!(
        "test accuracy {:.2}% (chosen epoch {} of {epochs})",
        report.accuracy_pct,
        outcome.report.chosen_epoch.unwrap_or(0)
    ))
}

fn real_data() -> Outcome {
    let Some(dir) = std::env::var_os("NIDT_UNSW_DIR").map(PathBuf::from) else {
        return Outcome::Skip("set NIDT_UNSW_DIR to the UNSW-NB15 partition directory".into());
    };
    let files = [dir.join("UNSW_NB15_training-set.csv"), dir.join("UNSW_NB15_testing-set.csv")];
    if let Some(missing) = files.iter().find(|p| !p.exists()) {
        return Outcome::Skip(format!("{} not found", missing.display()));
    }
    let run = || -> Result<String, String> {
        let schema = Schema::unsw_nb15();
        let config = RunConfig::default();
        let records = load_csvs(&files, &schema).map_err(|e| e.to_string())?;
        let splits = split(&records, &config.split_spec()).map_err(|e| e.to_string())?;
        let outcome = train_bundle(Family::CnnLstm, &splits.train, &splits.val, &schema, &config).map_err(|e| e.to_string())?;
        let engine = InferenceEngine::new(outcome.bundle);
        let labels: Vec<u8> = splits.test.iter().map(|r| r.label).collect();
        let scores: Vec<f64> = engine.infer(&splits.test).map_err(|e| e.to_string())?.into_iter().map(f64::from).collect();
        let (report, _) = evaluate(&labels, &scores, config.threshold).map_err(|e| e.to_string())?;
        ensure(report.accuracy_pct >= 90.0, || format!("test accuracy {:.2}%", report.accuracy_pct))?;
        Ok(format!("test accuracy {:.2}% on {} records", report.accuracy_pct, labels.len()))
    };
    match run() {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

fn guarded(f: fn() -> Result<String, String>) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => Outcome::Pass(s),
        Ok(Err(s)) => Outcome::Fail(s),
        Err(_) => Outcome::Fail("panicked".into()),
    }
}

fn main() -> std::process::ExitCode {
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("architecture fidelity", Box::new(|| guarded(architecture_fidelity))),
        ("gradient soundness", Box::new(|| guarded(gradient_soundness))),
        ("transfer invariance", Box::new(|| guarded(transfer_invariance))),
        ("split fidelity", Box::new(|| guarded(split_fidelity))),
        ("metric oracle equivalence", Box::new(|| guarded(metric_oracles))),
        ("feature-importance sanity", Box::new(|| guarded(importance_sanity))),
        ("end-to-end learnability", Box::new(|| guarded(end_to_end))),
        ("real-data accuracy (optional)", Box::new(real_data)),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let line = match &outcome {
            Outcome::Pass(d) => format!("PASS criterion {} {name}: {d} [{secs:.1}s]", i + 1),
            Outcome::Fail(d) => format!("FAIL criterion {} {name}: {d} [{secs:.1}s]", i + 1),
            Outcome::Skip(d) => format!("SKIP criterion {} {name}: {d}", i + 1),
        };
        println!("{line}");
        if matches!(outcome, Outcome::Fail(_)) {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
