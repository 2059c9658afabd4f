//! Execution of a resolved [`RunConfig`].

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kdewatch::detector::run_series;
use kdewatch::estimator::{
    build_exp_lut, estimate_pdf, rmse_study, scaled_fixed_point_pdf, RMSE_GRID_POINTS,
};
use kdewatch::eval::{
    load_series, match_reference_series, score, sweep, synth_series, write_series, LabeledSeries, SweepAxis,
    SweepOptions, SweepTable,
};
use kdewatch::kernels::{KernelSpec, Normalization};
use kdewatch::nonideality::quantize;
use kdewatch::seed::rng_from;
use kdewatch::table::Table;
use serde_json::{json, Value};

use crate::args::Command;
use crate::config::RunConfig;

/// Decades from 10µ to 100m, the default threshold sweep.
pub const THRESHOLD_GRID: [f64; 5] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

/// Output files written to a temporary name and renamed into place only
/// once every output has been produced.
struct Staged {
    dir: PathBuf,
    files: Vec<(PathBuf, PathBuf)>,
}

impl Staged {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        let target = self.dir.join(name);
        let temp = self.dir.join(format!(".{name}.partial"));
        let file = fs::File::create(&temp).with_context(|| format!("creating {}", temp.display()))?;
        self.files.push((temp, target));
        Ok(BufWriter::new(file))
    }

    fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        let mut out = self.create(name)?;
        table.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut out = self.create(name)?;
        serde_json::to_writer_pretty(&mut out, value)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    fn commit(mut self) -> Result<Vec<PathBuf>> {
        let files = std::mem::take(&mut self.files);
        let mut written = Vec::with_capacity(files.len());
        for (temp, target) in &files {
            if let Err(e) = fs::rename(temp, target) {
                for (t, _) in &files {
                    let _ = fs::remove_file(t);
                }
                for w in &written {
                    let _ = fs::remove_file(w);
                }
                return Err(e).with_context(|| format!("writing {}", target.display()));
            }
            written.push(target.clone());
        }
        Ok(written)
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        for (temp, _) in &self.files {
            let _ = fs::remove_file(temp);
        }
    }
}

/// Header comments that let any output be regenerated.
fn provenance(config: &RunConfig) -> Result<Vec<String>> {
    Ok(vec![
        format!("kdewatch {} {}", env!("CARGO_PKG_VERSION"), config.command),
        format!("seed: {}", config.detector.seed),
        format!("config: {}", serde_json::to_string(config)?),
    ])
}

fn with_comments(mut table: Table, comments: &[String]) -> Table {
    for c in comments {
        table.comment(c.clone());
    }
    table
}

fn environment() -> Value {
    json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "os": std::env::consts::OS,
        "arch": std::env::consts::ARCH,
    })
}

fn report(config: &RunConfig, outputs: &[&str], results: Value) -> Result<Value> {
    Ok(json!({
        "command": config.command,
        "config": serde_json::to_value(config)?,
        "outputs": outputs,
        "results": results,
        "environment": environment(),
    }))
}

fn input_path(config: &RunConfig) -> Result<&Path> {
    match &config.input {
        Some(p) => Ok(p),
        None => bail!("no input given"),
    }
}

/// Runs the command and returns the files written.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut staged = Staged::new(&config.output_dir)?;
    match config.kind {
        Command::Detect => detect(config, &mut staged)?,
        Command::Sweep => run_sweep(config, &mut staged)?,
        Command::Synth => synth(config, &mut staged)?,
        Command::RmseStudy => rmse(config, &mut staged)?,
        Command::DigitalCompare => digital(config, &mut staged)?,
    }
    staged.commit()
}

fn load(config: &RunConfig, path: &Path) -> Result<LabeledSeries> {
    load_series(path, &config.value_column, &config.label_column)
        .with_context(|| format!("reading {}", path.display()))
}

fn detect(config: &RunConfig, staged: &mut Staged) -> Result<()> {
    let series = load(config, input_path(config)?)?;
    let results = run_series(&config.detector, &series.values)?;
    let metrics = score(&results, &series.labels, config.ignore_warmup)?;

    let mut table = Table::new(["index", "value", "likelihood", "label", "is_anomaly"]);
    for (r, &truth) in results.iter().zip(&series.labels) {
        table.push_row([
            r.index.to_string(),
            r.value.to_string(),
            r.likelihood.to_string(),
            r.label.as_str().to_string(),
            u8::from(truth).to_string(),
        ]);
    }
    let comments = provenance(config)?;
    staged.table("results.csv", &with_comments(table, &comments))?;
    let results = json!({
        "series": series.name,
        "length": series.len(),
        "metrics": metrics,
    });
    staged.json(
        "report.json",
        &report(config, &["results.csv", "report.json"], results)?,
    )
}

fn sweep_options(config: &RunConfig) -> SweepOptions {
    SweepOptions {
        trials: config.trials,
        seed: config.detector.seed,
        ignore_warmup: config.ignore_warmup,
    }
}

fn sweep_axes(config: &RunConfig) -> Vec<SweepAxis> {
    if config.axes.is_empty() {
        vec![SweepAxis::PThres(THRESHOLD_GRID.to_vec())]
    } else {
        config.axes.clone()
    }
}

fn sweep_summary(table: &SweepTable) -> Value {
    json!({
        "axes": table.axes,
        "cells": table.rows.len(),
        "rows": table.rows,
        "best": table.best(),
    })
}

fn run_sweep(config: &RunConfig, staged: &mut Staged) -> Result<()> {
    let input = input_path(config)?;
    let axes = sweep_axes(config);
    let options = sweep_options(config);
    let comments = provenance(config)?;

    if !input.is_dir() {
        let series = load(config, input)?;
        let table = sweep(&series, &config.detector, &axes, &options)?;
        staged.table("sweep.csv", &with_comments(table.to_table(), &comments))?;
        let results = json!({ "series": series.name, "sweep": sweep_summary(&table) });
        return staged.json(
            "report.json",
            &report(config, &["sweep.csv", "report.json"], results)?,
        );
    }

    let mut paths: Vec<PathBuf> = fs::read_dir(input)
        .with_context(|| format!("listing {}", input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let candidates: Vec<LabeledSeries> = paths.iter().map(|p| load(config, p)).collect::<Result<_>>()?;
    let mapping = match_reference_series(&candidates);
    if mapping.iter().all(|m| m.candidate.is_none()) {
        bail!("no series in {} matches a reference series", input.display());
    }

    let mut outputs = Vec::new();
    let mut per_series = Vec::new();
    for m in &mapping {
        let Some(j) = m.candidate else { continue };
        let table = sweep(&candidates[j], &config.detector, &axes, &options)?;
        let name = format!("sweep_ts{}.csv", m.reference);
        let mut series_comments = comments.clone();
        series_comments.push(format!(
            "series: {} (reference {})",
            candidates[j].name, m.reference
        ));
        staged.table(&name, &with_comments(table.to_table(), &series_comments))?;
        per_series.push(json!({
            "reference": m.reference,
            "series": candidates[j].name,
            "file": paths[j].file_name().map(|f| f.to_string_lossy().into_owned()),
            "sweep": sweep_summary(&table),
        }));
        outputs.push(name);
    }
    outputs.push("report.json".into());
    let outputs: Vec<&str> = outputs.iter().map(String::as_str).collect();
    let results = json!({ "mapping": mapping, "series": per_series });
    staged.json("report.json", &report(config, &outputs, results)?)
}

fn synth(config: &RunConfig, staged: &mut Staged) -> Result<()> {
    let series = synth_series(
        &config.distribution,
        config.length,
        config.anomaly_rate,
        config.anomaly_offset,
        config.detector.seed,
    )?;
    let mut out = staged.create("series.csv")?;
    write_series(&series, &provenance(config)?, &mut out)?;
    out.flush()?;
    drop(out);
    let results = json!({
        "series": series.name,
        "length": series.len(),
        "n_anomalies": series.n_anomalies(),
    });
    staged.json(
        "report.json",
        &report(config, &["series.csv", "report.json"], results)?,
    )
}

fn rmse(config: &RunConfig, staged: &mut Staged) -> Result<()> {
    let study = rmse_study(
        &config.distribution,
        &config.n_in_values,
        config.trials,
        &config.detector.kernel,
        config.detector.seed,
    )?;
    let comments = provenance(config)?;

    let mut table = Table::new(["n_in", "mean_rmse", "std_rmse", "standard_error", "trials"]);
    for r in &study.rows {
        table.push_row([
            r.n_in.to_string(),
            r.mean_rmse.to_string(),
            r.std_rmse.to_string(),
            r.standard_error().to_string(),
            r.trials.to_string(),
        ]);
    }
    staged.table("rmse.csv", &with_comments(table, &comments))?;

    let mut header = vec!["x".to_string(), "truth".to_string()];
    header.extend(config.n_in_values.iter().map(|n| format!("estimate_n{n}")));
    let mut curves = Table::new(header);
    for (i, (&x, &truth)) in study.truth.grid().iter().zip(study.truth.values()).enumerate() {
        let mut row = vec![x.to_string(), truth.to_string()];
        row.extend(study.first_trial_curves.iter().map(|c| c.values()[i].to_string()));
        curves.push_row(row);
    }
    staged.table("curves.csv", &with_comments(curves, &comments))?;

    let results = json!({ "grid_points": RMSE_GRID_POINTS, "rows": study.rows });
    staged.json(
        "report.json",
        &report(config, &["rmse.csv", "curves.csv", "report.json"], results)?,
    )
}

/// Samples windows from the configured distribution, quantizes them to the
/// input word size and compares the integer LUT pipeline with the
/// real-valued unscaled estimate at every sample code.
fn digital(config: &RunConfig, staged: &mut Staged) -> Result<()> {
    let fp = config.fixed_point;
    let max_code = fp.max_code();
    let sigma_code = config.detector.kernel.bandwidth * max_code as f64;
    let lut = build_exp_lut(&fp, sigma_code)?;
    let real_spec = KernelSpec::gaussian(sigma_code)?.with_normalization(Normalization::Unscaled);
    let windows = config.trials;
    let n_in = config.detector.n_in;

    let mut rng = rng_from(config.detector.seed);
    let mut table = Table::new(["window", "sample_code", "fixed_point", "real", "abs_error"]);
    let mut worst: f64 = 0.0;
    let mut per_window = Vec::with_capacity(windows);
    for w in 0..windows {
        let codes: Vec<u32> = (0..n_in)
            .map(|_| {
                quantize(
                    config.distribution.sample(&mut rng).clamp(0.0, 1.0),
                    fp.input_bits,
                )
            })
            .collect::<kdewatch::Result<_>>()?;
        let window: Vec<f64> = codes.iter().map(|&c| c as f64).collect();
        let mut window_worst: f64 = 0.0;
        for sample in 0..=max_code {
            let fixed = scaled_fixed_point_pdf(&codes, sample, &fp, &lut)?;
            let real = estimate_pdf(&window, &real_spec, sample as f64)? * kdewatch::kernels::SQRT_2PI;
            let err = (fixed - real).abs();
            window_worst = window_worst.max(err);
            table.push_row([
                w.to_string(),
                sample.to_string(),
                fixed.to_string(),
                real.to_string(),
                err.to_string(),
            ]);
        }
        worst = worst.max(window_worst);
        per_window.push(window_worst);
    }
    staged.table("digital.csv", &with_comments(table, &provenance(config)?))?;
    let results = json!({
        "windows": windows,
        "sigma_code": sigma_code,
        "lut_entries": lut.len(),
        "accumulator_bits": fp.accumulator_bits(n_in),
        "max_abs_error": worst,
        "per_window_max_abs_error": per_window,
    });
    staged.json(
        "report.json",
        &report(config, &["digital.csv", "report.json"], results)?,
    )
}
