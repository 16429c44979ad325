use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chidt::c45::C45Params;
use chidt::dataset::{
    cover_all_labels_split, generate_synthetic, load_csv, read_records_csv, to_csv, CsvOptions, Dataset, FeatureVector,
    GeneratorConfig, LabelSet, SplitSpec, LABEL_SEPARATOR,
};
use chidt::eval::{evaluate_holdout, evaluate_kfold, evaluate_resubstitution, format_report, EvaluationReport};
use chidt::multilabel::{train_br, train_chidt, ChiDtModel, CodePredictor, Stage2};
use chidt::ontology::{
    is_valid, load_exclusions, CodeHierarchy, ExclusionGroup, TermLexicon, ValidCombinationRegistry,
};

use crate::config::{ProtocolName, RunConfig};
use crate::error::{CliError, CliResult};
use crate::{read, write};

fn load_dataset(cfg: &RunConfig) -> CliResult<Dataset> {
    let path = cfg.dataset_path();
    load_csv(&read(&path)?, &CsvOptions::default()).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_model(cfg: &RunConfig, path: &Path) -> CliResult<ChiDtModel> {
    let model =
        ChiDtModel::from_json(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    match cfg.strategy_flag {
        Some(s) if s != model.strategy => Err(CliError::Invalid(format!(
            "{} was trained with --strategy {}, not {}",
            path.display(),
            model.strategy.as_str(),
            s.as_str()
        ))),
        _ => Ok(model),
    }
}

fn load_registry(path: &Path) -> CliResult<ValidCombinationRegistry> {
    ValidCombinationRegistry::from_json(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_exclusion_groups(cfg: &RunConfig) -> CliResult<Vec<ExclusionGroup>> {
    let Some(path) = &cfg.paths.exclusions else {
        return Ok(Vec::new());
    };
    let hierarchy_path =
        cfg.paths.hierarchy.as_ref().ok_or_else(|| {
            CliError::Invalid("exclusions are checked against a hierarchy: set paths.hierarchy".into())
        })?;
    let hierarchy = CodeHierarchy::from_json(&read(hierarchy_path)?)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", hierarchy_path.display())))?;
    load_exclusions(&read(path)?, &hierarchy).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// Observed combinations of `train`, plus the configured registry file if any.
fn training_registry(cfg: &RunConfig, train: &Dataset) -> CliResult<ValidCombinationRegistry> {
    let mut registry = ValidCombinationRegistry::observed(train);
    if let Some(path) = &cfg.paths.registry {
        registry.extend(&load_registry(path)?);
    }
    Ok(registry)
}

pub fn gen(cfg: &RunConfig) -> CliResult<String> {
    let path = cfg
        .paths
        .generator
        .as_ref()
        .ok_or_else(|| CliError::Invalid("gen needs paths.generator".into()))?;
    let mut generator: GeneratorConfig =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    generator.seed = cfg.require_seed("gen")?;
    let (ds, profiles) = generate_synthetic(&generator)?;
    let mut registry = ValidCombinationRegistry::new();
    for p in profiles {
        registry.declare(p)?;
    }
    let out = cfg.out_dir();
    write(&out.join("corpus.csv"), &to_csv(&ds, &CsvOptions::default())?)?;
    write(&out.join("registry.json"), &registry.to_json()?)?;
    Ok(format!(
        "records\t{}\nlabels\t{}\ncombinations\t{}\n",
        ds.len(),
        ds.present_labels().len(),
        registry.len()
    ))
}

fn split_for(cfg: &RunConfig, ds: &Dataset) -> CliResult<SplitSpec> {
    match cfg.split.train_size {
        Some(n) => Ok(cover_all_labels_split(ds, n, cfg.require_seed("the training split")?)?),
        None => Ok(SplitSpec::from_train(ds.ids(), ds)?),
    }
}

pub fn train(cfg: &RunConfig) -> CliResult<String> {
    let ds = load_dataset(cfg)?;
    let split = split_for(cfg, &ds)?;
    let train = ds.subset(&split.train_ids);
    let registry = training_registry(cfg, &train)?;
    let combos = registry.len();
    let model = train_chidt(&train, &cfg.cascade, registry, load_exclusion_groups(cfg)?)?;
    let out = cfg.out_dir();
    write(
        &out.join("split.json"),
        &serde_json::to_string_pretty(&split).map_err(chidt::Error::from)?,
    )?;
    write(&cfg.model_path(), &model.to_json()?)?;
    Ok(format!(
        "trained {} on {} of {} records ({} codes, {} registered combinations)\n",
        model.name(),
        train.len(),
        ds.len(),
        train.alphabet().len(),
        combos
    ))
}

/// Reads `id,terms` rows and maps each term list through the lexicon.
fn term_rows(
    cfg: &RunConfig,
    input: &str,
    schema: &[chidt::dataset::Attribute],
) -> CliResult<Vec<(String, FeatureVector)>> {
    let path = cfg
        .paths
        .lexicon
        .as_ref()
        .ok_or_else(|| CliError::Invalid("--terms needs paths.lexicon".into()))?;
    let lexicon =
        TermLexicon::from_json(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let mut reader = csv::Reader::from_reader(input.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::Invalid(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Invalid(format!("term input has no `{name}` column")))
    };
    let (id_col, terms_col) = (col("id")?, col("terms")?);
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Invalid(e.to_string()))?;
        let terms: Vec<&str> = rec[terms_col]
            .split(LABEL_SEPARATOR)
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .collect();
        rows.push((rec[id_col].to_owned(), lexicon.map_terms(&terms, schema)?.features));
    }
    Ok(rows)
}

pub fn predict(cfg: &RunConfig, input: &Path, terms: bool) -> CliResult<String> {
    let model = load_model(cfg, &cfg.model_path())?;
    let text = read(input)?;
    let rows: Vec<(String, FeatureVector)> = if terms {
        term_rows(cfg, &text, &model.schema)?
    } else {
        read_records_csv(&text, &CsvOptions::default(), &model.schema)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", input.display())))?
            .into_iter()
            .map(|r| (r.id, r.features))
            .collect()
    };
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Invalid(e.to_string());
    writer
        .write_record(["id", "codes", "triggered", "reason"])
        .map_err(io)?;
    for (id, x) in rows {
        let out = model.predict(&x)?;
        let triggered = if out.trace.triggered { "true" } else { "false" };
        writer
            .write_record([
                id.as_str(),
                &out.labels.join(LABEL_SEPARATOR),
                triggered,
                out.trace.reason.as_str(),
            ])
            .map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    write(&cfg.out_dir().join("predictions.csv"), &text)?;
    Ok(text)
}

pub fn eval(cfg: &RunConfig, stage1_only: bool) -> CliResult<String> {
    let ds = load_dataset(cfg)?;
    let mode = cfg.evaluation.mode;
    let report: EvaluationReport = match cfg.evaluation.protocol {
        ProtocolName::KFold => {
            let seed = cfg.require_seed("k-fold evaluation")?;
            let exclusions = load_exclusion_groups(cfg)?;
            if stage1_only {
                evaluate_kfold(&ds, cfg.evaluation.k, seed, mode, |train| {
                    train_br(train, &cfg.cascade.stage1)
                })?
            } else {
                evaluate_kfold(&ds, cfg.evaluation.k, seed, mode, |train| {
                    let registry =
                        training_registry(cfg, train).map_err(|e| chidt::Error::InvalidArgument(e.to_string()))?;
                    train_chidt(train, &cfg.cascade, registry, exclusions.clone())
                })?
            }
        }
        protocol => {
            let model = load_model(cfg, &cfg.model_path())?;
            let split = SplitSpec::from_train(model.training_ids.clone(), &ds)
                .map_err(|e| CliError::Invalid(format!("model does not belong to this dataset: {e}")))?;
            let predictor: &dyn CodePredictor = if stage1_only { &model.stage1 } else { &model };
            if protocol == ProtocolName::Holdout {
                evaluate_holdout(predictor, &ds, &split, mode)?
            } else {
                evaluate_resubstitution(predictor, &ds, &split, mode)?
            }
        }
    };
    let text = format_report(&report);
    let out = cfg.out_dir();
    write(&out.join("report.txt"), &text)?;
    write(&out.join("report.json"), &report.to_json()?)?;
    Ok(text)
}

pub fn inspect(cfg: &RunConfig, model_path: Option<PathBuf>) -> CliResult<String> {
    let model = load_model(cfg, &model_path.unwrap_or_else(|| cfg.model_path()))?;
    let mut out = String::new();
    let _ = writeln!(out, "model\t{}", model.name());
    let _ = writeln!(
        out,
        "schema\t{} attributes (fingerprint {})",
        model.schema.len(),
        model.schema_fingerprint
    );
    let _ = writeln!(out, "training records\t{}", model.training_ids.len());
    let _ = writeln!(out, "codes\t{}", model.stage1.codes.join(" "));
    let _ = writeln!(out, "registered combinations\t{}", model.registry.len());
    let _ = writeln!(out, "exclusion groups\t{}", model.exclusions.len());
    let _ = writeln!(out, "fallback\t{}", if model.fallback { "on" } else { "off" });
    describe_br(
        &mut out,
        "stage 1",
        &model.stage1.params,
        model.stage1.threshold,
        &model.stage1.constant_labels,
    );
    for (code, tree) in model.stage1.codes.iter().zip(&model.stage1.trees) {
        let _ = writeln!(out, "\n== stage 1: {code} ==\n{}", tree.render());
    }
    match &model.stage2 {
        Stage2::Br(br) => {
            describe_br(&mut out, "stage 2", &br.params, br.threshold, &br.constant_labels);
            for (code, tree) in br.codes.iter().zip(&br.trees) {
                let _ = writeln!(out, "\n== stage 2: {code} ==\n{}", tree.render());
            }
        }
        Stage2::Lp(lp) => {
            let _ = writeln!(
                out,
                "\nstage 2\tlabel powerset, {} combinations, min_leaf {}, pruning {}",
                lp.combinations.len(),
                lp.params.min_leaf,
                on_off(lp.params.pruning)
            );
            let _ = writeln!(out, "\n== stage 2: label powerset ==\n{}", lp.tree.render());
        }
    }
    Ok(out)
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

fn describe_br(out: &mut String, stage: &str, params: &C45Params, threshold: f64, constant: &[String]) {
    let _ = writeln!(
        out,
        "\n{stage}\tbinary relevance, min_leaf {}, pruning {} (cf {}), threshold {threshold}",
        params.min_leaf,
        on_off(params.pruning),
        params.confidence_factor
    );
    if !constant.is_empty() {
        let _ = writeln!(out, "{stage} constant codes\t{}", constant.join(" "));
    }
}

/// One verdict per input line. Lines hold ';'-joined codes, `{}` is the
/// empty set, blank lines and `#` comments are skipped.
pub fn validate(cfg: &RunConfig, input: &Path, registry: Option<PathBuf>) -> CliResult<String> {
    let registry_path = registry
        .or_else(|| cfg.paths.registry.clone())
        .unwrap_or_else(|| cfg.out_dir().join("registry.json"));
    let registry = load_registry(&registry_path)?;
    let exclusions = load_exclusion_groups(cfg)?;
    let mut out = String::new();
    for line in read(input)?.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ls = if line == "{}" {
            LabelSet::new()
        } else {
            LabelSet::parse(line, LABEL_SEPARATOR)
        };
        let shown = if ls.is_empty() {
            "{}".to_owned()
        } else {
            ls.join(LABEL_SEPARATOR)
        };
        let _ = writeln!(out, "{shown}\t{}", is_valid(&registry, &exclusions, &ls).as_str());
    }
    Ok(out)
}
