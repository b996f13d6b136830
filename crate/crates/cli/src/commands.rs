use std::fs;
use std::io::Write;
use std::path::Path;

use deeppink::io::{
    format_value, read_design_file, read_response_file, read_square_matrix_file, write_json_file, write_matrix_file,
};
use deeppink::knockoffs::DEFAULT_SHRINK_FACTOR;
use deeppink::net::{gradient_check, run_ensemble};
use deeppink::simgen::{gen_design, SimConfig};
use deeppink::{
    estimate_covariance, exchangeability_diagnostic, sample_knockoffs, select as filter_select, CovarianceMode,
    DesignMatrix, Error, ExchangeabilityDiagnostic, KnockoffModel, Rule, Seed, SelectionReport, TrainConfig,
};
use serde::Serialize;

use crate::manifest::{Artifact, RunManifest};
use crate::{CliError, CovarianceArg, Diagnostic, KnockoffsArgs, SelectArgs, SimulateArgs, StageExt, ValidateArgs};

#[derive(Debug, Serialize)]
struct CovarianceSource {
    /// `known`, `empirical` or `shrinkage`.
    mode: &'static str,
    shrinkage: Option<f64>,
    /// Diagonal jitter added to reach positive definiteness.
    jitter: f64,
}

#[derive(Debug, Serialize)]
struct KnockoffSummary {
    covariance: CovarianceSource,
    s: Vec<f64>,
    diagnostic: ExchangeabilityDiagnostic,
}

/// Reads the design, centers it (and scales it when no Σ is supplied and
/// `scale_without_sigma` is set), builds the knockoff model and samples X̃.
fn build_knockoffs(
    x: &DesignMatrix,
    sigma: Option<&Path>,
    covariance: CovarianceArg,
    shrinkage: Option<f64>,
    scale_without_sigma: bool,
    seed: Seed,
) -> Result<(deeppink::AugmentedDesign, KnockoffSummary), CliError> {
    let (mode, label) = match (sigma, covariance) {
        (Some(path), _) => (
            CovarianceMode::Known(read_square_matrix_file(path).stage("reading covariance")?),
            "known",
        ),
        (None, CovarianceArg::Empirical) => (CovarianceMode::Empirical, "empirical"),
        (None, CovarianceArg::Shrinkage) => (CovarianceMode::Shrinkage(shrinkage), "shrinkage"),
    };
    let xs = x
        .standardize(sigma.is_none() && scale_without_sigma)
        .stage("standardizing design")?;
    let est = estimate_covariance(&xs, &mode).stage("covariance estimation")?;
    let model = KnockoffModel::equicorrelated(&est.sigma).stage("knockoff construction")?;
    let aug = sample_knockoffs(&xs, &model, seed).stage("knockoff sampling")?;
    let diagnostic = exchangeability_diagnostic(&aug, &model);
    let summary = KnockoffSummary {
        covariance: CovarianceSource {
            mode: label,
            shrinkage: est.shrinkage,
            jitter: est.jitter,
        },
        s: model.s().iter().copied().collect(),
        diagnostic,
    };
    Ok((aug, summary))
}

#[derive(Debug, Serialize)]
struct KnockoffsConfig {
    covariance: &'static str,
    shrinkage: Option<f64>,
    shrink_factor: f64,
}

pub fn knockoffs(a: &KnockoffsArgs) -> Result<(), CliError> {
    let x = read_design_file(&a.x).stage("reading design")?;
    let seed = Seed(a.seed);
    let (aug, summary) = build_knockoffs(
        &x,
        a.sigma.as_deref(),
        a.covariance,
        a.shrinkage,
        false,
        seed.child("knockoff", 0),
    )?;

    // Knockoffs are sampled for the centered design; shift back to the data's location.
    let n = x.n() as f64;
    let means: Vec<f64> = x.values().column_iter().map(|c| c.sum() / n).collect();
    let mut xk = aug.knockoff().clone();
    for (j, mut col) in xk.column_iter_mut().enumerate() {
        col.add_scalar_mut(means[j]);
    }
    let sidecar = a.sidecar.clone().unwrap_or_else(|| a.out.with_extension("json"));
    let config = KnockoffsConfig {
        covariance: summary.covariance.mode,
        shrinkage: a.shrinkage,
        shrink_factor: DEFAULT_SHRINK_FACTOR,
    };
    let mut manifest = RunManifest::new("knockoffs", &config, a.seed).input(&a.x);
    if let Some(s) = &a.sigma {
        manifest = manifest.input(s);
    }
    let manifest = manifest.output(&a.out).output(&sidecar);
    write_matrix_file(&a.out, &aug.knockoff_names(), &xk).stage("writing knockoffs")?;
    write_json_file(
        &sidecar,
        &Artifact {
            manifest: &manifest,
            payload: &summary,
        },
    )
    .stage("writing sidecar")?;
    eprintln!(
        "wrote {} ({}x{}); exchangeability diagnostic {}",
        a.out.display(),
        xk.nrows(),
        xk.ncols(),
        if summary.diagnostic.pass { "passed" } else { "FAILED" }
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct SelectConfig {
    q: f64,
    rule: Rule,
    covariance: &'static str,
    shrinkage: Option<f64>,
    scaled: bool,
    train: TrainConfig,
    /// Penalty actually used.
    l1_lambda_effective: f64,
}

#[derive(Debug, Serialize)]
struct SelectPayload {
    selection: SelectionReport,
    selected_names: Vec<String>,
    column_names: Vec<String>,
    statistics: Vec<f64>,
    knockoffs: KnockoffSummary,
}

pub fn select(a: &SelectArgs) -> Result<(), CliError> {
    let x = read_design_file(&a.x).stage("reading design")?;
    let y = read_response_file(&a.y).stage("reading response")?;
    y.check_matches(&x).stage("reading response")?;
    let seed = Seed(a.seed);
    let (aug, knockoffs) = build_knockoffs(
        &x,
        a.sigma.as_deref(),
        a.covariance,
        a.shrinkage,
        true,
        seed.child("knockoff", 0),
    )?;
    let train = a.train.config().with_seed(seed.child("network", 0));
    let ensemble = run_ensemble(&aug, &y, &train).stage("training")?;
    let selection = filter_select(&ensemble.statistics, a.q, a.rule.into()).stage("filtering")?;

    let names = x.column_names().to_vec();
    let config = SelectConfig {
        q: a.q,
        rule: a.rule.into(),
        covariance: knockoffs.covariance.mode,
        shrinkage: a.shrinkage,
        scaled: a.sigma.is_none(),
        l1_lambda_effective: train.effective_lambda(x.p(), x.n()),
        train,
    };
    let mut manifest = RunManifest::new("select", &config, a.seed).input(&a.x).input(&a.y);
    if let Some(s) = &a.sigma {
        manifest = manifest.input(s);
    }
    let manifest = manifest.output(&a.out);
    let payload = SelectPayload {
        selected_names: selection.selected.iter().map(|&j| names[j].clone()).collect(),
        selection,
        column_names: names,
        statistics: ensemble.statistics,
        knockoffs,
    };
    write_json_file(
        &a.out,
        &Artifact {
            manifest: &manifest,
            payload: &payload,
        },
    )
    .stage("writing report")?;
    eprintln!(
        "selected {} of {} features: {}",
        payload.selected_names.len(),
        payload.column_names.len(),
        payload.selected_names.join(", ")
    );
    Ok(())
}

fn sim_config(a: &SimulateArgs) -> SimConfig {
    let base = match a.model {
        crate::ModelArg::Linear => SimConfig::linear(a.p),
        crate::ModelArg::SingleIndex => SimConfig::single_index(a.p),
    };
    SimConfig {
        n: a.n,
        s_sparsity: a.s.unwrap_or(base.s_sparsity),
        amplitude: a.amplitude,
        rho: a.rho,
        sigma_noise: a.noise,
        q: a.q,
        rule: a.rule.into(),
        repetitions: a.reps,
        seed: Seed(a.seed),
        train: a.train.config(),
        ..base
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let cfg = sim_config(a);
    cfg.validate().stage("configuration")?;
    fs::create_dir_all(&a.out_dir)
        .map_err(Error::from)
        .stage("creating output directory")?;
    let json_path = a.out_dir.join("report.json");
    let csv_path = a.out_dir.join("repetitions.csv");
    let report = deeppink::run_experiment(&cfg).stage("simulation")?;
    let manifest = RunManifest::new("simulate", &cfg, a.seed)
        .output(&json_path)
        .output(&csv_path);
    write_json_file(
        &json_path,
        &Artifact {
            manifest: &manifest,
            payload: &report,
        },
    )
    .stage("writing report")?;
    write_repetitions_csv(&csv_path, &report).stage("writing report")?;
    let agg = &report.aggregates;
    eprintln!(
        "{} repetitions: empirical FDR {:.4} (se {:.4}), mean power {:.4} (se {:.4})",
        report.repetitions.len(),
        agg.empirical_fdr,
        agg.fdp_std_error,
        agg.mean_power,
        agg.power_std_error
    );
    Ok(())
}

fn write_repetitions_csv(path: &Path, report: &deeppink::ExperimentReport) -> deeppink::Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "rep,fdp,power,n_selected,threshold")?;
    for r in &report.repetitions {
        let t = r.threshold.map_or_else(|| "inf".to_string(), format_value);
        writeln!(
            f,
            "{},{},{},{},{}",
            r.rep,
            format_value(r.fdp),
            format_value(r.power),
            r.n_selected,
            t
        )?;
    }
    f.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ValidateConfig {
    diagnostic: Diagnostic,
    instances: Option<usize>,
    n: Option<usize>,
    p: Option<usize>,
    corrupt_s: bool,
}

pub fn validate(a: &ValidateArgs) -> Result<(), CliError> {
    let (pass, summary, result) = match a.diagnostic {
        Diagnostic::GradientCheck => {
            let r = gradient_check(Seed(a.seed), a.instances);
            let line = format!(
                "gradient check: {} instances, {} coordinates ({} skipped near kinks), max relative error {:.3e} (tolerance {:.0e})",
                r.instances, r.coordinates_checked, r.coordinates_skipped, r.max_relative_error, r.tolerance
            );
            (r.pass, line, serde_json::to_value(&r).expect("report serializes"))
        }
        Diagnostic::Exchangeability => {
            let r = exchangeability(a)?;
            let line = format!(
                "exchangeability: n {}, p {}, max deviation {:.4} (tolerance {:.4})",
                r.n, r.p, r.max_deviation, r.tolerance
            );
            (r.pass, line, serde_json::to_value(&r).expect("report serializes"))
        }
    };
    println!("{} {summary}", if pass { "PASS" } else { "FAIL" });
    if let Some(out) = &a.out {
        let gradient = matches!(a.diagnostic, Diagnostic::GradientCheck);
        let config = ValidateConfig {
            diagnostic: a.diagnostic,
            instances: gradient.then_some(a.instances),
            n: (!gradient).then_some(a.n),
            p: (!gradient).then_some(a.p),
            corrupt_s: a.corrupt_s,
        };
        let manifest = RunManifest::new("validate", &config, a.seed).output(out);
        write_json_file(
            out,
            &Artifact {
                manifest: &manifest,
                payload: serde_json::json!({ "pass": pass, "result": result }),
            },
        )
        .stage("writing result")?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::DiagnosticFailed(summary))
    }
}

/// Knockoffs for an autoregressive-precision design with known Σ. With
/// `corrupt_s` the sampler uses a quarter of the gap the diagnostic checks against.
fn exchangeability(a: &ValidateArgs) -> Result<ExchangeabilityDiagnostic, CliError> {
    let mut cfg = SimConfig::linear(a.p);
    cfg.n = a.n;
    cfg.validate().stage("configuration")?;
    let seed = Seed(a.seed);
    let (x, sigma) = gen_design(&cfg, seed.child("design", 0)).stage("design generation")?;
    let model = KnockoffModel::equicorrelated(&sigma).stage("knockoff construction")?;
    let sampler = if a.corrupt_s {
        KnockoffModel::new(&sigma, &(model.s() * 0.25)).stage("knockoff construction")?
    } else {
        model.clone()
    };
    let aug = sample_knockoffs(&x, &sampler, seed.child("knockoff", 0)).stage("knockoff sampling")?;
    Ok(exchangeability_diagnostic(&aug, &model))
}
