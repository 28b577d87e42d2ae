//! Subcommand implementations.

use std::path::{Path, PathBuf};

use szclass_core::classifiers::ClassifierKind;
use szclass_core::derive_seed;
use szclass_core::error::Error;
use szclass_core::evaluation::{make_folds, run_cv, run_single_split, CvOptions, FoldAssignment};
use szclass_core::featurize::{
    featurize_manifest, read_cache_expect, write_cache, FeatureMatrix, FeatureSpec,
    FeaturizeOptions, FeaturizeOutput, Method, WindowSpec,
};
use szclass_core::hpo::{
    config_from_params, default_space, random_search, select_top_configs, sweep_csv,
    sweep_preproc_grid, GridPoint, SweepRow,
};
use szclass_core::ingest::{
    dataset_stats, parse_manifest, render_stats_table, stats_csv, EdfFile, Manifest,
};
use szclass_core::synthgen::{generate_corpus, GenSpec};

use crate::config::RunConfig;
use crate::render::{fmt_num, render_cv_table, CvSummary, CvSummaryRow};
use crate::{CliError, CliResult};

fn ensure_out(cfg: &RunConfig) -> CliResult<PathBuf> {
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("--out DIR is required".into()))?;
    std::fs::create_dir_all(&out).map_err(|e| Error::io(out.display().to_string(), e))?;
    Ok(out)
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_echo(out: &Path, cfg: &RunConfig) -> CliResult<()> {
    write_json(&out.join("config_echo.json"), cfg)
}

fn load_manifest(cfg: &RunConfig) -> CliResult<(Manifest, PathBuf)> {
    let path = cfg
        .manifest
        .clone()
        .ok_or_else(|| CliError::Usage("--manifest PATH is required".into()))?;
    let text =
        std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let manifest = parse_manifest(&text)?;
    let data_root = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok((manifest, data_root))
}

/// The configured montage, or every channel of the first referenced file.
fn resolve_montage(
    cfg: &RunConfig,
    manifest: &Manifest,
    data_root: &Path,
) -> CliResult<Vec<String>> {
    if let Some(montage) = &cfg.montage {
        if montage.is_empty() {
            return Err(CliError::Usage("config montage list is empty".into()));
        }
        return Ok(montage.clone());
    }
    let first = manifest.entries.first().ok_or(CliError::Msg {
        msg: "empty manifest".into(),
        code: 2,
    })?;
    let path = data_root.join(&first.file_path);
    let labels = EdfFile::open(&path)?.channel_labels();
    log::info!(
        "montage derived from {}: {} channels",
        path.display(),
        labels.len()
    );
    Ok(labels)
}

fn compute_features(
    cfg: &RunConfig,
    manifest: &Manifest,
    montage: &[String],
    data_root: &Path,
    window: &WindowSpec,
    spec: &FeatureSpec,
) -> CliResult<FeaturizeOutput> {
    let opts = FeaturizeOptions {
        target_fs: cfg.target_fs,
        data_root: Some(data_root.to_path_buf()),
    };
    Ok(featurize_manifest(manifest, montage, window, spec, &opts)?)
}

fn cache_file_name(spec: &FeatureSpec, window: &WindowSpec) -> String {
    format!(
        "features_m{}_f{}_w{}_o{}.szft",
        spec.method,
        fmt_num(spec.f_max),
        fmt_num(window.w_l),
        fmt_num(window.o)
    )
}

/// A cache's provenance must line up with the manifest it is used for:
/// every row's seizure id must name a manifest entry with the same label
/// and patient.
fn cache_matches_manifest(features: &FeatureMatrix, manifest: &Manifest) -> bool {
    let n = manifest.len() as u32;
    (0..features.num_rows()).all(|r| {
        let row = features.row(r);
        if row.seizure_id >= n {
            return false;
        }
        let event = &manifest.entries[row.seizure_id as usize].event;
        event.ty == row.label && event.patient_id == features.patient_of_row(r)
    })
}

pub fn cmd_stats(cfg: &RunConfig) -> CliResult<()> {
    let out = ensure_out(cfg)?;
    let (manifest, _) = load_manifest(cfg)?;
    if manifest.is_empty() {
        return Err(CliError::Msg {
            msg: "empty manifest".into(),
            code: 2,
        });
    }
    if manifest.mysz_skipped > 0 {
        log::warn!("{} MYSZ rows were skipped", manifest.mysz_skipped);
    }
    let rows = dataset_stats(&manifest)?;
    let table = render_stats_table(&rows);
    write_file(&out.join("stats.csv"), stats_csv(&rows).as_bytes())?;
    write_file(&out.join("stats.txt"), table.as_bytes())?;
    write_echo(&out, cfg)?;
    print!("{table}");
    Ok(())
}

pub fn cmd_synth(
    cfg: &RunConfig,
    genspec_path: Option<&PathBuf>,
    seed_override: Option<u64>,
    shared_patients: bool,
) -> CliResult<()> {
    let out = ensure_out(cfg)?;
    let mut spec = match genspec_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            serde_json::from_str::<GenSpec>(&text).map_err(|e| Error::InvalidSpec {
                what: "gen spec",
                msg: format!("{}: {e}", path.display()),
            })?
        }
        None => GenSpec::default(),
    };
    if let Some(seed) = seed_override {
        spec.seed = seed;
    }
    if shared_patients {
        spec.shared_patients = true;
    }
    let corpus = generate_corpus(&spec, &out)?;
    write_json(&out.join("genspec_echo.json"), &spec)?;
    log::info!(
        "generated {} clips under {}",
        corpus.manifest.len(),
        corpus.edf_dir.display()
    );
    println!(
        "wrote {} clips ({} classes x {} patients x {} seizures) and {}",
        corpus.manifest.len(),
        spec.classes.len(),
        spec.patients_per_class,
        spec.seizures_per_patient,
        corpus.manifest_path.display()
    );
    Ok(())
}

pub fn cmd_featurize(cfg: &RunConfig) -> CliResult<()> {
    let out = ensure_out(cfg)?;
    let (manifest, data_root) = load_manifest(cfg)?;
    let montage = resolve_montage(cfg, &manifest, &data_root)?;
    let window = cfg.window_spec()?;
    let spec = cfg.feature_spec()?;

    let cache = out.join(cache_file_name(&spec, &window));
    if cache.exists() {
        match read_cache_expect(&cache, &window, &spec, &montage) {
            Ok((features, meta)) if cache_matches_manifest(&features, &manifest) => {
                log::info!(
                    "cache-hit: {} ({} rows, D = {})",
                    cache.display(),
                    meta.rows,
                    meta.d
                );
                println!(
                    "cache hit: {} ({} rows, D = {})",
                    cache.display(),
                    features.num_rows(),
                    features.dim()
                );
                write_echo(&out, cfg)?;
                return Ok(());
            }
            Ok(_) => {
                log::warn!("existing cache does not match this manifest; recomputing");
            }
            Err(e) => {
                log::warn!("existing cache unusable ({e}); recomputing");
            }
        }
    }

    let result = compute_features(cfg, &manifest, &montage, &data_root, &window, &spec)?;
    write_cache(&cache, &result.features, &window, &spec, &montage)?;
    if !result.skipped.is_empty() {
        write_json(&out.join("featurize_skips.json"), &result.skipped)?;
    }
    write_echo(&out, cfg)?;
    println!(
        "wrote {} ({} rows, D = {}, {} events skipped)",
        cache.display(),
        result.features.num_rows(),
        result.features.dim(),
        result.skipped.len()
    );
    Ok(())
}

/// Features for one grid point, via the on-disk cache when present.
fn features_for_point(
    cfg: &RunConfig,
    manifest: &Manifest,
    montage: &[String],
    data_root: &Path,
    out: &Path,
    method: Method,
    point: &GridPoint,
) -> CliResult<FeatureMatrix> {
    let window = WindowSpec::new(point.w_l, point.overlap_s())?;
    let mut spec = FeatureSpec::new(method, point.f_max)?;
    spec.log_floor = cfg.log_floor;

    let cache = out.join(cache_file_name(&spec, &window));
    if cache.exists() {
        if let Ok((features, _)) = read_cache_expect(&cache, &window, &spec, montage) {
            if cache_matches_manifest(&features, manifest) {
                log::info!("cache-hit: {}", cache.display());
                return Ok(features);
            }
            log::warn!("cache {} does not match this manifest; recomputing", cache.display());
        }
    }
    let result = compute_features(cfg, manifest, montage, data_root, &window, &spec)?;
    for skip in &result.skipped {
        log::warn!("skipped event {}: {}", skip.seizure_id, skip.reason);
    }
    Ok(result.features)
}

/// Derive hyperparameters for one cell, searching the first split when
/// tuning is on.
fn cell_config(
    cfg: &RunConfig,
    kind: ClassifierKind,
    features: &FeatureMatrix,
    assignment: &FoldAssignment,
    cell_seed: u64,
) -> CliResult<szclass_core::classifiers::ClassifierConfig> {
    if !cfg.tune {
        return Ok(cfg.fixed_config(kind));
    }
    let space = default_space(kind);
    let opts = CvOptions {
        standardize: cfg.standardize,
        seed: cell_seed,
    };
    let result = random_search(
        &space,
        |_, params| {
            let config = config_from_params(kind, params)?;
            run_single_split(features, assignment, 0, &config, &opts).map(|r| r.weighted_f1)
        },
        cfg.search_budget,
        cell_seed,
    )?;
    log::info!(
        "tuned {kind}: best first-split weighted F1 {:.4} at trial {}",
        result.best().objective.unwrap_or(f64::NAN),
        result.best_index
    );
    Ok(config_from_params(kind, &result.best().params)?)
}

pub fn cmd_cv(cfg: &RunConfig, top_from: Option<&PathBuf>) -> CliResult<()> {
    let out = ensure_out(cfg)?;
    let (manifest, data_root) = load_manifest(cfg)?;
    if manifest.is_empty() {
        return Err(CliError::Msg {
            msg: "empty manifest".into(),
            code: 2,
        });
    }
    let montage = resolve_montage(cfg, &manifest, &data_root)?;
    let method = cfg.method()?;
    let mode = cfg.cv_mode()?;
    let k = cfg.fold_count()?;
    let events = manifest.events();
    let assignment = make_folds(&events, mode, k, cfg.seed)?;

    // Preprocessing configs: the top rows of a sweep table, or the single
    // configured point.
    let points: Vec<GridPoint> = match top_from {
        Some(path) => {
            let rows = read_sweep_csv(path)?;
            let filtered: Vec<SweepRow> = rows.into_iter().filter(|r| r.method == method).collect();
            select_top_configs(&filtered, cfg.top_n)?
        }
        None => vec![GridPoint {
            f_max: cfg.f_max,
            w_l: cfg.w_l,
            o_frac: cfg.overlap,
        }],
    };
    let kinds = cfg.classifier_kinds()?;

    let mut summary = CvSummary {
        method: method.as_u8(),
        cv_mode: mode.name().to_string(),
        folds: k,
        seed: cfg.seed,
        standardize: cfg.standardize,
        tuned: cfg.tune,
        classifiers: kinds.iter().map(|k| k.name().to_string()).collect(),
        rows: Vec::new(),
    };

    for (pi, point) in points.iter().enumerate() {
        let features =
            features_for_point(cfg, &manifest, &montage, &data_root, &out, method, point)?;
        let mut scores = Vec::new();
        let mut reports = Vec::new();
        for (ki, kind) in kinds.iter().enumerate() {
            let cell_seed = derive_seed(cfg.seed, (pi * 16 + ki) as u64);
            let config = cell_config(cfg, *kind, &features, &assignment, cell_seed)?;
            let opts = CvOptions {
                standardize: cfg.standardize,
                seed: cell_seed,
            };
            let mut report = run_cv(&features, &assignment, &config, &opts)?;
            report.spec_echo = Some(serde_json::json!({
                "method": method.as_u8(),
                "f_max": point.f_max,
                "w_l": point.w_l,
                "o": point.overlap_s(),
                "target_fs": cfg.target_fs,
                "montage_channels": montage.len(),
            }));
            let file = format!(
                "metrics_{}_f{}_w{}_o{}.json",
                kind.name(),
                fmt_num(point.f_max),
                fmt_num(point.w_l),
                fmt_num(point.overlap_s())
            );
            write_json(&out.join(&file), &report)?;
            log::info!(
                "cv {} f_max={} W_l={} O={}: mean weighted F1 {:.4}",
                kind.name(),
                point.f_max,
                point.w_l,
                point.overlap_s(),
                report.mean_weighted_f1
            );
            scores.push(report.mean_weighted_f1);
            reports.push(file);
        }
        summary.rows.push(CvSummaryRow {
            f_max: point.f_max,
            w_l: point.w_l,
            o: point.overlap_s(),
            scores,
            reports,
        });
    }

    write_json(&out.join("cv_summary.json"), &summary)?;
    let table = render_cv_table(&summary);
    write_file(&out.join("cv_table.txt"), table.as_bytes())?;
    write_echo(&out, cfg)?;
    print!("{table}");
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<()> {
    let out = ensure_out(cfg)?;
    let (manifest, data_root) = load_manifest(cfg)?;
    if manifest.is_empty() {
        return Err(CliError::Msg {
            msg: "empty manifest".into(),
            code: 2,
        });
    }
    let montage = resolve_montage(cfg, &manifest, &data_root)?;
    let mode = cfg.cv_mode()?;
    let k = cfg.fold_count()?;
    let events = manifest.events();
    let assignment = make_folds(&events, mode, k, cfg.seed)?;

    let methods: Vec<Method> = cfg
        .sweep_methods
        .iter()
        .map(|m| {
            Method::try_from(*m).map_err(|e| Error::InvalidSpec {
                what: "config",
                msg: e,
            })
        })
        .collect::<Result<_, _>>()?;
    let classifiers: Vec<ClassifierKind> = cfg
        .sweep_classifiers
        .iter()
        .map(|c| ClassifierKind::parse(c))
        .collect::<Result<_, _>>()?;

    // The sweep visits one (method, grid point) at a time, so a one-slot
    // feature cache keeps memory bounded by a single point's matrix.
    type PointKey = (u8, u64, u64, u64);
    let point_key = |m: Method, p: &GridPoint| -> PointKey {
        (
            m.as_u8(),
            p.f_max.to_bits(),
            p.w_l.to_bits(),
            p.o_frac.to_bits(),
        )
    };
    let current: std::sync::Mutex<Option<(PointKey, std::sync::Arc<FeatureMatrix>)>> =
        std::sync::Mutex::new(None);
    let features_for =
        |method: Method, point: &GridPoint| -> CliResult<std::sync::Arc<FeatureMatrix>> {
            let key = point_key(method, point);
            let mut slot = current.lock().unwrap();
            if let Some((k, features)) = slot.as_ref() {
                if *k == key {
                    return Ok(features.clone());
                }
            }
            log::info!(
                "featurizing method {} f_max={} W_l={} O={}",
                method,
                point.f_max,
                point.w_l,
                point.overlap_s()
            );
            let features = std::sync::Arc::new(features_for_point(
                cfg, &manifest, &montage, &data_root, &out, method, point,
            )?);
            *slot = Some((key, features.clone()));
            Ok(features)
        };

    let opts = CvOptions {
        standardize: cfg.standardize,
        seed: cfg.seed,
    };
    let (rows, trials) = sweep_preproc_grid(
        &methods,
        &classifiers,
        cfg.search_budget,
        cfg.seed,
        |method, classifier, point, _trial, params| {
            let features = features_for(method, point)
                .map_err(|e| Error::spec("sweep featurization", e.message()))?;
            let config = config_from_params(classifier, params)?;
            run_single_split(&features, &assignment, 0, &config, &opts).map(|r| r.weighted_f1)
        },
    )?;
    let grid = szclass_core::hpo::preproc_grid();

    write_file(&out.join("sweep.csv"), sweep_csv(&rows).as_bytes())?;
    let mut log_lines = String::new();
    for t in &trials {
        log_lines.push_str(&serde_json::to_string(t).expect("serializable"));
        log_lines.push('\n');
    }
    write_file(&out.join("sweep_trials.jsonl"), log_lines.as_bytes())?;
    write_echo(&out, cfg)?;
    println!(
        "swept {} grid points x {} methods x {} classifiers (budget {}); best row:",
        grid.len(),
        methods.len(),
        classifiers.len(),
        cfg.search_budget
    );
    if let Some(best) = rows.iter().max_by(|a, b| {
        a.weighted_f1
            .partial_cmp(&b.weighted_f1)
            .unwrap_or(std::cmp::Ordering::Equal)
    }) {
        println!(
            "method {} {} f_max={} W_l={} O={} weighted_f1={:.4}",
            best.method,
            best.classifier,
            fmt_num(best.f_max),
            fmt_num(best.w_l),
            fmt_num(best.o),
            best.weighted_f1
        );
    }
    Ok(())
}

fn read_sweep_csv(path: &Path) -> CliResult<Vec<SweepRow>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "method,classifier,f_max,W_l,O,weighted_f1" {
                return Err(CliError::Msg {
                    msg: format!("{}: unexpected sweep header {line:?}", path.display()),
                    code: 2,
                });
            }
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(CliError::Msg {
                msg: format!("{}: bad sweep row at line {}", path.display(), i + 1),
                code: 2,
            });
        }
        let parse_f = |s: &str| -> CliResult<f64> {
            s.parse().map_err(|_| CliError::Msg {
                msg: format!("{}: bad number {s:?} at line {}", path.display(), i + 1),
                code: 2,
            })
        };
        rows.push(SweepRow {
            method: Method::try_from(parse_f(parts[0])? as u8).map_err(|e| Error::InvalidSpec {
                what: "sweep csv",
                msg: e,
            })?,
            classifier: ClassifierKind::parse(parts[1])?,
            f_max: parse_f(parts[2])?,
            w_l: parse_f(parts[3])?,
            o: parse_f(parts[4])?,
            weighted_f1: parse_f(parts[5])?,
        });
    }
    Ok(rows)
}

pub fn cmd_search(cfg: &RunConfig) -> CliResult<()> {
    let out = ensure_out(cfg)?;
    let (manifest, data_root) = load_manifest(cfg)?;
    if manifest.is_empty() {
        return Err(CliError::Msg {
            msg: "empty manifest".into(),
            code: 2,
        });
    }
    let montage = resolve_montage(cfg, &manifest, &data_root)?;
    let method = cfg.method()?;
    let mode = cfg.cv_mode()?;
    let k = cfg.fold_count()?;
    let events = manifest.events();
    let assignment = make_folds(&events, mode, k, cfg.seed)?;
    let kind = cfg.classifier_kinds()?[0];

    let point = GridPoint {
        f_max: cfg.f_max,
        w_l: cfg.w_l,
        o_frac: cfg.overlap,
    };
    let features = features_for_point(cfg, &manifest, &montage, &data_root, &out, method, &point)?;
    let opts = CvOptions {
        standardize: cfg.standardize,
        seed: cfg.seed,
    };
    let space = default_space(kind);
    let full_cv = cfg.search_eval == "cv";
    let result = random_search(
        &space,
        |_, params| {
            let config = config_from_params(kind, params)?;
            if full_cv {
                run_cv(&features, &assignment, &config, &opts).map(|r| r.mean_weighted_f1)
            } else {
                run_single_split(&features, &assignment, 0, &config, &opts).map(|r| r.weighted_f1)
            }
        },
        cfg.search_budget,
        cfg.seed,
    )?;

    let mut log_lines = String::new();
    for t in &result.trials {
        log_lines.push_str(&serde_json::to_string(t).expect("serializable"));
        log_lines.push('\n');
    }
    write_file(&out.join("trials.jsonl"), log_lines.as_bytes())?;
    let best_config = config_from_params(kind, &result.best().params)?;
    write_json(
        &out.join("best.json"),
        &serde_json::json!({
            "classifier": kind.name(),
            "objective": result.best().objective,
            "trial_index": result.best_index,
            "params": result.best().params,
            "config": best_config,
            "budget": result.budget,
            "seed": result.seed,
            "sampler": result.sampler,
            "eval": cfg.search_eval,
        }),
    )?;
    write_echo(&out, cfg)?;
    println!(
        "search over {} trials: best {} = {:.4} at trial {}",
        result.budget,
        if full_cv {
            "cv weighted F1"
        } else {
            "first-split weighted F1"
        },
        result.best().objective.unwrap_or(f64::NAN),
        result.best_index
    );
    Ok(())
}

pub fn cmd_report(run_dir: &Path) -> CliResult<()> {
    let summary_path = run_dir.join("cv_summary.json");
    let text = std::fs::read_to_string(&summary_path)
        .map_err(|e| Error::io(summary_path.display().to_string(), e))?;
    let summary: CvSummary = serde_json::from_str(&text).map_err(|e| Error::InvalidSpec {
        what: "cv summary",
        msg: format!("{}: {e}", summary_path.display()),
    })?;
    let table = render_cv_table(&summary);
    write_file(&run_dir.join("cv_table.txt"), table.as_bytes())?;
    print!("{table}");
    Ok(())
}
