use std::fmt::Write as _;
use std::path::Path;

use nidt::config::RunConfig;
use nidt::dataset::{
    fit_encoding, load_csv, load_csvs, load_raw_csv, split, split_provenance, to_matrix, write_records, RawRow,
};
use nidt::eval::{append_benchmark_log, benchmark as run_benchmark, evaluate as run_evaluate, BENCHMARK_LOG_HEADER};
use nidt::features::fit_importance;
use nidt::fsutil::write_atomic;
use nidt::model::{classify, Family};
use nidt::pipeline::train_bundle;
use nidt::schema::Schema;
use nidt::transfer::{export_bundle, load_bundle, InferenceEngine};

use crate::error::CliError;
use crate::output::OutputDir;

pub const CHECKPOINT: &str = "checkpoint.nidt";

fn schema_for(config: &RunConfig) -> Result<Schema, CliError> {
    if config.schema == "unsw-nb15" {
        Ok(Schema::unsw_nb15())
    } else {
        Ok(Schema::load(Path::new(&config.schema))?)
    }
}

fn open_bundle(path: &Path) -> Result<nidt::transfer::Bundle, CliError> {
    load_bundle(path).map_err(|e| match e {
        nidt::transfer::TransferError::Io(e) => CliError::new("io", format!("{}: {e}", path.display())),
        e => CliError::from(e).in_file(path),
    })
}

fn csv_bytes(schema: &Schema, records: &[nidt::FlowRecord]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_records(&mut buf, schema, records)?;
    Ok(buf)
}

pub fn prepare(config: &RunConfig, inputs: &[std::path::PathBuf], out: &Path) -> Result<(), CliError> {
    let schema = schema_for(config)?;
    let records = load_csvs(inputs, &schema)?;
    let spec = config.split_spec();
    let splits = split(&records, &spec)?;
    let encoding = fit_encoding(&splits.train, &schema, &schema.categorical_names())?;

    let mut dir = OutputDir::create(out)?;
    dir.write("train.csv", csv_bytes(&schema, &splits.train)?)?;
    dir.write("val.csv", csv_bytes(&schema, &splits.val)?)?;
    dir.write("test.csv", csv_bytes(&schema, &splits.test)?)?;
    dir.write("split.provenance", split_provenance(&spec, &splits).to_string())?;
    let json = serde_json::to_string_pretty(&encoding).expect("encoding serializes");
    dir.write("encoding.json", json + "\n")?;
    dir.write("config.txt", config.to_kv().to_string())?;
    dir.commit()?;

    println!("train {}", splits.train.len());
    println!("val {}", splits.val.len());
    println!("test {}", splits.test.len());
    Ok(())
}

pub fn importance(config: &RunConfig, train: &Path, out: &Path) -> Result<(), CliError> {
    let schema = schema_for(config)?;
    let records = load_csv(train, &schema)?;
    let encoding = fit_encoding(&records, &schema, &schema.categorical_names())?;
    let (x, y) = to_matrix(&records, &schema, &encoding)?;
    let report = fit_importance(&x, &y, &config.forest_config())?;
    write_atomic(out, report.to_csv().as_bytes())?;
    if report.degenerate {
        eprintln!("warning: no split was possible; every score is 0");
    }
    for (name, score) in report.ranked().into_iter().take(10) {
        println!("{name} {score:.6}");
    }
    Ok(())
}

pub fn train(config: &RunConfig, family: Family, data: &Path, out: &Path) -> Result<(), CliError> {
    let schema = schema_for(config)?;
    let train_records = load_csv(&data.join("train.csv"), &schema)?;
    let val_records = load_csv(&data.join("val.csv"), &schema)?;
    let outcome = nidt::model::with_threads(config.threads, || {
        train_bundle(family, &train_records, &val_records, &schema, config)
    })??;

    let mut dir = OutputDir::create(out)?;
    dir.write(CHECKPOINT, outcome.bundle.encode())?;
    dir.write("train_report.csv", outcome.report.to_csv())?;
    dir.write("importance.csv", outcome.preprocessing.importance.to_csv())?;
    dir.write("selection.txt", outcome.preprocessing.selection.to_kv().to_string())?;
    dir.write("scaler.txt", outcome.preprocessing.scaler.to_kv().to_string())?;
    dir.write("config.txt", config.to_kv().to_string())?;
    dir.commit()?;

    match (outcome.report.chosen_epoch, outcome.report.best_val_acc()) {
        (Some(epoch), Some(acc)) => println!(
            "{family}: kept epoch {epoch} of {}, validation accuracy {:.2}%",
            outcome.report.epochs.len(),
            acc * 100.0
        ),
        _ => println!("{family}: no training epochs run, initial weights saved"),
    }
    Ok(())
}

pub fn export(model_dir: &Path, out: &Path) -> Result<(), CliError> {
    let bundle = open_bundle(&model_dir.join(CHECKPOINT))?;
    let summary = export_bundle(out, &bundle)?;
    println!("{} {} {:016x}", out.display(), summary.bytes, summary.digest);
    Ok(())
}

fn engine_and_rows(bundle: &Path, input: &Path) -> Result<(InferenceEngine, Vec<RawRow>), CliError> {
    let engine = InferenceEngine::new(open_bundle(bundle)?);
    let rows = load_raw_csv(input, &engine.header().schema)?;
    Ok((engine, rows))
}

pub fn infer(config: &RunConfig, bundle: &Path, input: &Path, out: &Path) -> Result<(), CliError> {
    let (engine, rows) = engine_and_rows(bundle, input)?;
    let scores = engine.infer_threads(&rows, config.threads)?;
    let preds = classify(&scores, config.threshold);
    let mut text = String::from("row,score,prediction\n");
    for (i, (s, p)) in scores.iter().zip(&preds).enumerate() {
        let _ = writeln!(text, "{i},{s},{p}");
    }
    write_atomic(out, text.as_bytes())?;
    let attacks = preds.iter().filter(|&&p| p == 1).count();
    println!("scored {} rows, {attacks} flagged as attacks", rows.len());
    Ok(())
}

pub fn evaluate(config: &RunConfig, bundle: &Path, input: &Path, out: &Path) -> Result<(), CliError> {
    let (engine, rows) = engine_and_rows(bundle, input)?;
    let labels = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.label.ok_or_else(|| CliError::new("data", format!("row {} has no label", i + 1))))
        .collect::<Result<Vec<u8>, _>>()?;
    let scores: Vec<f64> = engine.infer_threads(&rows, config.threads)?.into_iter().map(f64::from).collect();
    let (report, curve) = run_evaluate(&labels, &scores, config.threshold)?;

    let mut dir = OutputDir::create(out)?;
    dir.write("report.txt", report.to_text())?;
    dir.write("report.json", report.to_json())?;
    dir.write("roc.csv", curve.to_csv())?;
    dir.write("confusion.txt", report.confusion.grid())?;
    dir.write("config.txt", config.to_kv().to_string())?;
    dir.commit()?;
    print!("{}", report.to_text());
    Ok(())
}

pub fn benchmark(
    config: &RunConfig,
    bundle: &Path,
    input: &Path,
    log: Option<&Path>,
    name: Option<String>,
    domain: &str,
) -> Result<(), CliError> {
    let (engine, rows) = engine_and_rows(bundle, input)?;
    let (result, _) = run_benchmark(&engine, &rows, config.threads)?;
    let model = name.unwrap_or_else(|| engine.header().architecture.family.to_string());
    if let Some(path) = log {
        append_benchmark_log(path, &model, domain, &result)?;
    }
    println!("{BENCHMARK_LOG_HEADER}");
    println!("{model},{domain},{},{},{}", result.thread_count, result.wall_seconds, result.records_per_second);
    eprintln!("{} records", result.record_count);
    Ok(())
}
