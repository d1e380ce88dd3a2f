use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::composite::{
    fit_composite, fit_ud, recursive_forecast, BlockPredictor, ChainMode, CompositeConfig, CompositeForecaster,
    CompositeModel, SeasonSource, UdConfig, UdForecaster, UdModel,
};
use crate::data::{
    anomalies_from_sst, build_neighbor_map, compute_monthly_climatology, extract_blocks, format_value,
    parse_coordinate_csv, parse_value_csv, serialize_coordinate_csv, serialize_value_csv, Block, CoordinateTable,
    Dataset, TimeGrid, Variable, WINDOW,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    annual_global_mean, line_chart, persistence_horizon_curve, random_split, report_csv, skill_score, split_score,
    yearly_rmse, EvalSet, Series, SkillReport,
};
use crate::features::{build_baltic_rows, build_rg48_matrix, build_seasonal_dataset, build_ud_matrix, FeatureMatrix, Layout};
use crate::models::io;
use crate::models::{fit_mlp_classifier, BayesianRidgeConfig, GbdtConfig, MlpConfig, Persistence};
use crate::month::Month;
use crate::synth::{generate, SynthConfig};

use super::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Synth,
    Climatology,
    Features,
    Train,
    Predict,
    Forecast9,
    Evaluate,
    Report,
}

/// A file produced by a command, relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: &str, text: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            bytes: text.into().into_bytes(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceModel {
    pub target_offset: usize,
}

/// Any model the CLI can train and apply.
#[derive(Clone, Debug, PartialEq)]
pub enum SavedModel {
    Composite(CompositeModel),
    Ud(UdModel),
    Persistence(PersistenceModel),
}

impl SavedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            SavedModel::Composite(_) => "composite",
            SavedModel::Ud(_) => "ud",
            SavedModel::Persistence(_) => "persistence",
        }
    }

    pub fn target_offset(&self) -> usize {
        match self {
            SavedModel::Composite(m) => m.target_offset,
            SavedModel::Ud(m) => m.target_offset,
            SavedModel::Persistence(m) => m.target_offset,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        match self {
            SavedModel::Composite(m) => io::to_json(self.kind(), m),
            SavedModel::Ud(m) => io::to_json(self.kind(), m),
            SavedModel::Persistence(m) => io::to_json(self.kind(), m),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let kind = io::peek_kind(text)?;
        match kind.as_str() {
            "composite" => Ok(SavedModel::Composite(io::from_json(text, "composite")?)),
            "ud" => Ok(SavedModel::Ud(io::from_json(text, "ud")?)),
            "persistence" => Ok(SavedModel::Persistence(io::from_json(text, "persistence")?)),
            other => Err(Error::ModelFormat(format!("unknown model kind '{other}'"))),
        }
    }

    /// Binds the model to the dataset's coordinates.
    pub fn predictor<'a>(&'a self, coords: &'a CoordinateTable) -> Result<Box<dyn BlockPredictor + 'a>> {
        Ok(match self {
            SavedModel::Composite(m) => Box::new(CompositeForecaster::new(m, coords)?),
            SavedModel::Ud(m) => Box::new(UdForecaster::new(m, coords)?),
            SavedModel::Persistence(_) => Box::new(Persistence),
        })
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Vec<Artifact>> {
    match command {
        Command::Synth => synth(cfg),
        Command::Climatology => climatology(cfg),
        Command::Features => features(cfg),
        Command::Train => train(cfg),
        Command::Predict => predict(cfg),
        Command::Forecast9 => forecast9(cfg),
        Command::Evaluate => evaluate(cfg),
        Command::Report => report(cfg),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn start_month(cfg: &RunConfig) -> Result<Month> {
    cfg.month("start_month")?
        .ok_or_else(|| Error::Config("--start-month is required (files carry no timestamps)".into()))
}

fn load_grid(cfg: &RunConfig, key: &str, variable: Variable, start: Month) -> Result<Option<TimeGrid>> {
    cfg.input_path(key)?
        .map(|p| parse_value_csv(&read(&p)?, variable, start))
        .transpose()
}

fn base_period(cfg: &RunConfig, grid: &TimeGrid) -> Result<(Month, Month)> {
    Ok(cfg.month_range("climatology_base")?.unwrap_or((grid.start(), grid.end())))
}

/// All configured grids, aligned, with land locations dropped. SSTA is
/// derived from SST when no SSTA file is given.
pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let start = start_month(cfg)?;
    let coords_path = cfg
        .input_path("coords")?
        .ok_or_else(|| Error::Config("missing required key 'coords'".into()))?;
    let coords = parse_coordinate_csv(&read(&coords_path)?)?;
    let sst = load_grid(cfg, "sst", Variable::Sst, start)?;
    let ssta = match load_grid(cfg, "ssta", Variable::Ssta, start)? {
        Some(g) => g,
        None => {
            let sst = sst
                .as_ref()
                .ok_or_else(|| Error::Config("either 'ssta' or 'sst' must be given".into()))?;
            let clim = compute_monthly_climatology(sst, base_period(cfg, sst)?)?;
            anomalies_from_sst(sst, &clim)?
        }
    };
    let mut data = Dataset::new(ssta, coords)?;
    for g in [
        sst,
        load_grid(cfg, "mslp", Variable::Mslp, start)?,
        load_grid(cfg, "t2m", Variable::T2m, start)?,
    ]
    .into_iter()
    .flatten()
    {
        data = data.with_grid(g)?;
    }
    let data = data.drop_absent()?;
    log::info!(
        "loaded {} months × {} locations ({}..{})",
        data.n_months(),
        data.n_locations(),
        data.start(),
        data.end()
    );
    Ok(data)
}

fn training_part(cfg: &RunConfig, data: &Dataset) -> Result<Dataset> {
    match cfg.month("train_end")? {
        Some(end) if end < data.end() => data.slice_months(data.start(), end),
        _ => Ok(data.clone()),
    }
}

fn load_model(cfg: &RunConfig) -> Result<(SavedModel, String)> {
    let path = cfg
        .input_path("model_file")?
        .ok_or_else(|| Error::Config("missing required key 'model_file'".into()))?;
    let text = read(&path)?;
    let id = hex::encode(&Sha256::digest(text.as_bytes())[..8]);
    Ok((SavedModel::from_json(&text)?, id))
}

fn synth(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let d = SynthConfig::default();
    let config = SynthConfig {
        n_lat: cfg.get_or("synth_n_lat", d.n_lat)?,
        n_lon: cfg.get_or("synth_n_lon", d.n_lon)?,
        lat0: cfg.get_or("synth_lat0", d.lat0)?,
        lon0: cfg.get_or("synth_lon0", d.lon0)?,
        step: cfg.get_or("synth_step", d.step)?,
        months: cfg.get_or("synth_months", d.months)?,
        start: cfg.month("start_month")?.unwrap_or(d.start),
        seed: cfg.get_or("seed", d.seed)?,
        seasonal_amplitude: cfg.get_or("synth_seasonal_amplitude", d.seasonal_amplitude)?,
        trend_per_decade: cfg.get_or("synth_trend_per_decade", d.trend_per_decade)?,
        oscillation_period: cfg.get_or("synth_oscillation_period", d.oscillation_period)?,
        oscillation_amplitude: cfg.get_or("synth_oscillation_amplitude", d.oscillation_amplitude)?,
        noise_std: cfg.get_or("synth_noise_std", d.noise_std)?,
        land_fraction: cfg.get_or("synth_land_fraction", d.land_fraction)?,
    };
    let out = generate(&config)?;
    let clim = compute_monthly_climatology(&out.sst, base_period(cfg, &out.sst)?)?;
    let ssta = anomalies_from_sst(&out.sst, &clim)?;
    log::info!(
        "synthetic grid: {} locations ({} land), {} months from {}",
        out.coords.len(),
        out.land.iter().filter(|l| **l).count(),
        config.months,
        config.start
    );
    Ok(vec![
        Artifact::new("coords.csv", serialize_coordinate_csv(&out.coords)),
        Artifact::new("sst.csv", serialize_value_csv(&out.sst)),
        Artifact::new("ssta.csv", serialize_value_csv(&ssta)),
        Artifact::new("mslp.csv", serialize_value_csv(&out.mslp)),
        Artifact::new("t2m.csv", serialize_value_csv(&out.t2m)),
        Artifact::new("manifest.txt", config.manifest()),
    ])
}

fn climatology(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let start = start_month(cfg)?;
    let sst = load_grid(cfg, "sst", Variable::Sst, start)?
        .ok_or_else(|| Error::Config("missing required key 'sst'".into()))?;
    let clim = compute_monthly_climatology(&sst, base_period(cfg, &sst)?)?;
    let ssta = anomalies_from_sst(&sst, &clim)?;
    let ids = sst.location_ids().to_vec();
    let table = |values: &[f64]| -> Result<String> {
        Ok(serialize_value_csv(&TimeGrid::new(Variable::Sst, Month::from_ym(0, 1), ids.clone(), values.to_vec())?))
    };
    Ok(vec![
        Artifact::new("climatology_avg.csv", table(&clim.avg)?),
        Artifact::new("climatology_std.csv", table(&clim.std)?),
        Artifact::new("ssta.csv", serialize_value_csv(&ssta)),
    ])
}

fn features(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let data = load_dataset(cfg)?;
    let layout: Layout = cfg.get_or("layout", Layout::Rg48)?;
    let offset = cfg.get_or("offset", 3usize)?;
    let matrix = match layout {
        Layout::Rg48 => {
            let nmap = build_neighbor_map(data.coords())?;
            build_rg48_matrix(&extract_blocks(&data, WINDOW, offset, 1)?, &nmap, data.coords())?
        }
        Layout::Ud50 | Layout::Ud74 => {
            let clim = match layout {
                Layout::Ud74 => {
                    let train = training_part(cfg, &data)?;
                    Some(compute_monthly_climatology(train.ssta(), (train.start(), train.end()))?)
                }
                _ => None,
            };
            build_ud_matrix(&extract_blocks(&data, WINDOW, offset, 1)?, data.coords(), clim.as_ref())?
        }
        Layout::Baltic3 => {
            let ssta = data.ssta();
            let anchors: Vec<Month> = (0..ssta.n_months())
                .map(|t| ssta.month_of(t))
                .filter(|m| m.is_september() && *m - 24 >= ssta.start())
                .collect();
            FeatureMatrix::concat(
                Layout::Baltic3,
                anchors
                    .iter()
                    .map(|&a| build_baltic_rows(ssta, data.coords(), a))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };
    log::info!("{} {layout} rows ({} skipped)", matrix.n_rows(), matrix.skipped);
    Ok(vec![Artifact::new("features.csv", matrix.to_csv())])
}

fn composite_config(cfg: &RunConfig) -> Result<CompositeConfig> {
    let d = CompositeConfig::default();
    Ok(CompositeConfig {
        short_years: cfg.get_or("short_years", d.short_years)?,
        long_years: cfg.get_or("long_years", d.long_years)?,
        trailing_correction_years: cfg.get_or("correction_years", d.trailing_correction_years)?,
        c_global: cfg.get_or("c_global", d.c_global)?,
        target_offset: cfg.get_or("offset", d.target_offset)?,
        ridge: BayesianRidgeConfig::default(),
    })
}

fn ud_config(cfg: &RunConfig) -> Result<UdConfig> {
    let d = UdConfig::default();
    let seed: u64 = cfg.get_or("seed", 0)?;
    let gbdt = GbdtConfig {
        n_trees: cfg.get_or("gbdt_trees", d.gbdt.n_trees)?,
        max_depth: cfg.get_or("gbdt_depth", d.gbdt.max_depth)?,
        learning_rate: cfg.get_or("gbdt_learning_rate", d.gbdt.learning_rate)?,
        min_leaf: cfg.get_or("gbdt_min_leaf", d.gbdt.min_leaf)?,
        seed,
        ..d.gbdt.clone()
    };
    let gbdt_alt = GbdtConfig {
        n_trees: gbdt.n_trees,
        min_leaf: gbdt.min_leaf,
        seed: seed.wrapping_add(1),
        ..d.gbdt_alt.clone()
    };
    let weights = match cfg.list_f64("ensemble_weights")? {
        None => d.weights,
        Some(w) => <[f64; 3]>::try_from(w.as_slice())
            .map_err(|_| Error::Config("ensemble_weights needs exactly three values".into()))?,
    };
    let layout: Layout = cfg.get_or("ud_layout", d.layout)?;
    if !matches!(layout, Layout::Ud50 | Layout::Ud74) {
        return Err(Error::Config(format!("ud_layout must be UD50 or UD74, got {layout}")));
    }
    Ok(UdConfig {
        layout,
        target_offset: cfg.get_or("offset", d.target_offset)?,
        block_stride: cfg.get_or("ud_stride", d.block_stride)?,
        gbdt,
        gbdt_alt,
        ridge: BayesianRidgeConfig::default(),
        weights,
    })
}

fn train(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let data = load_dataset(cfg)?;
    let train = training_part(cfg, &data)?;
    let model = match cfg.raw("model").unwrap_or("composite") {
        "composite" => {
            let mut m = fit_composite(&train, &composite_config(cfg)?)?;
            match cfg.raw("season_source").unwrap_or("calendar") {
                "calendar" => {}
                "classifier" => {
                    let sst = train.require(Variable::Sst)?;
                    let seasonal = build_seasonal_dataset(sst)?;
                    let d = MlpConfig::default();
                    let mlp_cfg = MlpConfig {
                        hidden: cfg.get_or("mlp_hidden", d.hidden)?,
                        epochs: cfg.get_or("mlp_epochs", d.epochs)?,
                        learning_rate: cfg.get_or("mlp_learning_rate", d.learning_rate)?,
                        seed: cfg.get_or("seed", d.seed)?,
                        ..d
                    };
                    let mlp = fit_mlp_classifier(&seasonal, &mlp_cfg)?;
                    m.season_source = SeasonSource::Classifier {
                        model: mlp,
                        columns: seasonal.columns,
                    };
                }
                other => return Err(Error::Config(format!("unknown season_source '{other}'"))),
            }
            log::info!(
                "composite: short α={:.4} λ={:.4}, long α={:.4} λ={:.4}",
                m.model_short.alpha,
                m.model_short.lambda,
                m.model_long.alpha,
                m.model_long.lambda
            );
            SavedModel::Composite(m)
        }
        "ud" => SavedModel::Ud(fit_ud(&train, &ud_config(cfg)?)?),
        "persistence" => SavedModel::Persistence(PersistenceModel {
            target_offset: cfg.get_or("offset", 3)?,
        }),
        other => return Err(Error::Config(format!("unknown model '{other}'"))),
    };
    Ok(vec![Artifact::new("model.json", model.to_json()?)])
}

/// Block whose window ends at `end`, with every grid the dataset holds.
fn block_ending(data: &Dataset, end: Month, offset: usize) -> Result<Block<'_>> {
    let t_end = data.ssta().index_of(end).ok_or(Error::MonthOutOfRange(end))?;
    if t_end + 1 < WINDOW {
        return Err(Error::InsufficientHistory(format!("window ending {end} starts before the data")));
    }
    let t0 = t_end + 1 - WINDOW;
    let mut block = Block::new(data.start() + t0 as i64, WINDOW, offset, data.n_locations());
    for v in Variable::ALL {
        if let Some(g) = data.grid(v) {
            block = block.with_window(v, g.rows(t0, WINDOW))?;
        }
    }
    Ok(block)
}

fn forecast_artifacts(
    cfg: &RunConfig,
    data: &Dataset,
    model: &SavedModel,
    model_id: &str,
    anchor: Month,
    target: Month,
    row: Vec<f64>,
    extra: &str,
) -> Result<Vec<Artifact>> {
    let ids = data.ssta().location_ids().to_vec();
    let grid = TimeGrid::new(Variable::Ssta, target, ids, row)?;
    let mut meta = String::new();
    let _ = writeln!(meta, "model={}", model.kind());
    let _ = writeln!(meta, "model_id={model_id}");
    let _ = writeln!(meta, "config_hash={}", cfg.hash());
    let _ = writeln!(meta, "anchor={anchor}");
    let _ = writeln!(meta, "target={target}");
    meta.push_str(extra);
    Ok(vec![
        Artifact::new("forecast.csv", serialize_value_csv(&grid)),
        Artifact::new("forecast.meta", meta),
    ])
}

fn predict(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let data = load_dataset(cfg)?;
    let (model, id) = load_model(cfg)?;
    let anchor = cfg.month("anchor")?.unwrap_or(data.end());
    let offset = model.target_offset();
    let block = block_ending(&data, anchor, offset)?;
    let row = model.predictor(data.coords())?.predict_block(&block)?;
    let extra = format!("offset={offset}\n");
    forecast_artifacts(cfg, &data, &model, &id, anchor, block.target_month(), row, &extra)
}

fn forecast9(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let data = load_dataset(cfg)?;
    let (model, id) = load_model(cfg)?;
    let anchor = cfg.month("anchor")?.unwrap_or(data.end());
    let horizon = cfg.get_or("chain_offset", 9usize)?;
    let base = model.target_offset();
    let predictor = model.predictor(data.coords())?;
    let outcome = recursive_forecast(predictor.as_ref(), &data, anchor, horizon, base, ChainMode::Shared)?;
    log::info!("chained {} rounds of offset {base} to {}", outcome.rounds, outcome.target_month);
    let extra = format!("offset={horizon}\nbase_offset={base}\nrounds={}\n", outcome.rounds);
    forecast_artifacts(cfg, &data, &model, &id, anchor, outcome.target_month, outcome.forecast, &extra)
}

struct Scored {
    eval: EvalSet,
    predictions: Vec<Vec<f64>>,
    /// Composite without corrections, when applicable.
    uncorrected: Option<Vec<Vec<f64>>>,
    report: SkillReport,
}

fn score(cfg: &RunConfig, data: &Dataset, model: &SavedModel) -> Result<Scored> {
    let train_end = cfg.month("train_end")?;
    let blocks: Vec<_> = extract_blocks(data, WINDOW, model.target_offset(), 1)?
        .into_iter()
        .filter(|(b, t)| t.is_some() && train_end.is_none_or(|e| b.target_month() > e))
        .collect();
    if blocks.is_empty() {
        return Err(Error::EmptyComparison);
    }
    let run = |p: &(dyn BlockPredictor + '_)| -> Result<Vec<Vec<f64>>> {
        blocks.par_iter().map(|(b, _)| p.predict_block(b)).collect()
    };
    let predictions = run(model.predictor(data.coords())?.as_ref())?;
    let uncorrected = match model {
        SavedModel::Composite(m) => Some(run(&CompositeForecaster::new(m, data.coords())?.without_corrections())?),
        _ => None,
    };
    let eval = EvalSet::from_blocks(&blocks)?;
    let report = skill_score(&predictions, &eval)?;
    log::info!(
        "{} blocks: rmse model {:.5}, persistence {:.5}, skill {:.5}",
        eval.len(),
        report.rmse_model,
        report.rmse_persistence,
        report.skill
    );
    Ok(Scored {
        eval,
        predictions,
        uncorrected,
        report,
    })
}

fn evaluate(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let data = load_dataset(cfg)?;
    let (model, _) = load_model(cfg)?;
    let s = score(cfg, &data, &model)?;
    Ok(vec![Artifact::new("report.csv", report_csv(&s.report))])
}

fn report(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let data = load_dataset(cfg)?;
    let (model, _) = load_model(cfg)?;
    let s = score(cfg, &data, &model)?;
    let mut artifacts = vec![Artifact::new("report.csv", report_csv(&s.report))];

    // per-year RMSE chart
    let yearly = |preds: &[Vec<f64>]| -> Result<Vec<(f64, f64)>> {
        Ok(yearly_rmse(preds, &s.eval.truths, &s.eval.target_months)?
            .iter()
            .map(|r| (r.year as f64, r.rmse()))
            .collect())
    };
    let mut series = vec![Series {
        name: format!("{} model", model.kind()),
        points: yearly(&s.predictions)?,
    }];
    if let Some(u) = &s.uncorrected {
        series.push(Series {
            name: "without corrections".into(),
            points: yearly(u)?,
        });
    }
    series.push(Series {
        name: "persistence".into(),
        points: yearly(&s.eval.baseline)?,
    });
    artifacts.push(Artifact::new(
        "rmse_per_year.svg",
        line_chart("RMSE per year", "year", "RMSE", &series),
    ));

    // public/private split
    if s.eval.len() >= 2 {
        let (a, b) = random_split(s.eval.len(), cfg.get_or("seed", 0)?);
        let (public, private) = split_score(&s.predictions, &s.eval, &a, &b)?;
        let mut csv = String::from("subset,n_blocks,rmse_model,rmse_persistence,skill\n");
        for (name, r) in [("public", &public), ("private", &private)] {
            let _ = writeln!(
                csv,
                "{name},{},{},{},{}",
                r.n_blocks,
                format_value(r.rmse_model),
                format_value(r.rmse_persistence),
                format_value(r.skill)
            );
        }
        artifacts.push(Artifact::new("split.csv", csv));
    }

    // diagnostics on the raw temperature when available
    let grid = data.grid(Variable::Sst).unwrap_or(data.ssta());
    let max_n = cfg.get_or("horizon_max", 24usize)?.min(grid.n_months() - 1);
    let curve = persistence_horizon_curve(grid, max_n)?;
    let mut csv = String::from("lag,rmse\n");
    for (n, v) in curve.iter().enumerate() {
        let _ = writeln!(csv, "{},{}", n + 1, format_value(*v));
    }
    artifacts.push(Artifact::new("horizon.csv", csv));
    artifacts.push(Artifact::new(
        "horizon.svg",
        line_chart(
            &format!("RMSE using N months back values ({})", grid.variable()),
            "N (months)",
            "RMSE",
            &[Series {
                name: "persistence".into(),
                points: curve.iter().enumerate().map(|(n, v)| ((n + 1) as f64, *v)).collect(),
            }],
        ),
    ));
    let means = annual_global_mean(grid);
    let mut csv = String::from("year,mean\n");
    for (y, v) in &means {
        let _ = writeln!(csv, "{y},{}", format_value(*v));
    }
    artifacts.push(Artifact::new("global_mean.csv", csv));
    artifacts.push(Artifact::new(
        "global_mean.svg",
        line_chart(
            &format!("Global average {} per year", grid.variable()),
            "year",
            "mean",
            &[Series {
                name: grid.variable().to_string(),
                points: means.iter().map(|(y, v)| (*y as f64, *v)).collect(),
            }],
        ),
    ));
    Ok(artifacts)
}
