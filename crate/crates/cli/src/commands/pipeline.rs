//! `pipeline`: the full run, ingest through SEA, driven by one config file
//! and written into a manifest-tracked run directory.

use std::path::PathBuf;

use clap::Args;
use spillover_core::adf::adf_test;
use spillover_core::graph::{apply_threshold, to_graph, ThresholdSpec};
use spillover_core::regress::ols_newey_west;
use spillover_core::rng::stage_seed;
use spillover_core::sea::{event_sets, superposed_epoch, EpochSpec};
use spillover_core::var::{select_order, stability_check};

use super::quantreg::fit_quantile_set;
use super::regress::{assemble_designs, cpi_control, scatter_json};
use super::rolling::{average_rolled, roll_window_set};
use super::spillover::compute_table;
use crate::config::{
    parse_criterion, parse_method, parse_form, parse_variant, OrderSpec, RunConfig,
    DEFAULT_SNAPSHOT_YEARS,
};
use crate::error::{CliError, Result};
use crate::formats::graph::{export, GraphFormat};
use crate::formats::{model, tables};
use crate::io::{format_float, CatalogSchema, PanelOptions};
use crate::manifest::RunWriter;

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Override the config's worker count.
    #[arg(long)]
    pub workers: Option<usize>,
}

pub fn run(args: &PipelineArgs) -> Result<()> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(workers) = args.workers {
        config.rolling.workers = workers;
    }
    config.validate()?;
    let config_hash = config.hash();

    let mut writer = RunWriter::create(&config.output_dir)?;
    match execute(&config, &mut writer) {
        Ok(()) => {
            let manifest = writer.finish(&config_hash, config.seed)?;
            eprintln!(
                "run complete: {} files, run hash {}",
                manifest.files.len(),
                &manifest.run_hash[..16]
            );
            Ok(())
        }
        Err((stage, error)) => {
            writer.mark_failed(&stage, &error);
            Err(error.at_stage(&stage))
        }
    }
}

type StageResult<T> = std::result::Result<T, (String, CliError)>;

fn at<T>(stage: &str, r: Result<T>) -> StageResult<T> {
    r.map_err(|e| (stage.to_string(), e))
}

fn execute(config: &RunConfig, writer: &mut RunWriter) -> StageResult<()> {
    let delimiter = at("config", config.delimiter_byte())?;

    // --- ingest ---------------------------------------------------------
    writer.begin_stage("ingest");
    eprintln!("[ingest] loading {}", config.inputs.panel.display());
    let file = at(
        "ingest",
        std::fs::File::open(&config.inputs.panel).map_err(|e| {
            CliError::data(format!("cannot open {}: {e}", config.inputs.panel.display()))
        }),
    )?;
    let options = PanelOptions {
        delimiter,
        year_column: config.inputs.year_column.clone(),
        gap_policy: config.inputs.gap_policy,
    };
    let (raw, report) = at("ingest", crate::io::load_panel(file, &options))?;
    at("config", config.validate_against_panel(raw.n_locations(), raw.len().saturating_sub(1)))?;
    let mut bytes = Vec::new();
    at("ingest", crate::io::save_panel(&raw, &mut bytes, delimiter))?;
    at("ingest", writer.write("panel/raw.csv", &bytes))?;
    let report_json = serde_json::json!({
        "gaps": report.gaps,
        "dropped_rows": report.dropped_rows,
        "kept_span": report.kept_span,
        "years": raw.len(),
        "locations": raw.locations(),
    });
    at(
        "ingest",
        writer.write(
            "panel/report.json",
            (serde_json::to_string_pretty(&report_json).unwrap() + "\n").as_bytes(),
        ),
    )?;

    // --- prepare: winsorize + correlation + difference --------------------
    writer.begin_stage("prepare");
    let winsorized = match config.prepare.winsorize {
        Some(p) => {
            let (w, warnings) =
                at("prepare", raw.winsorize(p).map_err(|e| CliError::config(e.to_string())))?;
            for warning in warnings {
                eprintln!("[prepare] warning: {warning}");
            }
            w
        }
        None => raw.clone(),
    };
    let mut bytes = Vec::new();
    at("prepare", crate::io::save_panel(&winsorized, &mut bytes, delimiter))?;
    at("prepare", writer.write("panel/winsorized.csv", &bytes))?;

    let correlation = at(
        "prepare",
        winsorized
            .correlation_matrix()
            .map_err(|e| CliError::numerical(e.to_string())),
    )?;
    let mut corr_csv = String::from("location");
    for loc in winsorized.locations() {
        corr_csv.push(',');
        corr_csv.push_str(loc);
    }
    corr_csv.push('\n');
    for (i, loc) in winsorized.locations().iter().enumerate() {
        corr_csv.push_str(loc);
        for j in 0..winsorized.n_locations() {
            corr_csv.push(',');
            corr_csv.push_str(&format_float(correlation[(i, j)]));
        }
        corr_csv.push('\n');
    }
    at("prepare", writer.write("panel/correlation.csv", corr_csv.as_bytes()))?;

    let differenced = at(
        "prepare",
        winsorized
            .first_difference()
            .map_err(|e| CliError::data(e.to_string())),
    )?;
    let mut bytes = Vec::new();
    at("prepare", crate::io::save_panel(&differenced, &mut bytes, delimiter))?;
    at("prepare", writer.write("panel/differenced.csv", &bytes))?;

    // --- adf --------------------------------------------------------------
    writer.begin_stage("adf");
    eprintln!("[adf] lag order {} on differenced series", config.adf.lag_order);
    let form = at("adf", parse_form(&config.adf.form))?;
    let mut adf_rows = Vec::new();
    for (j, location) in differenced.locations().iter().enumerate() {
        let result = at(
            "adf",
            adf_test(&differenced.column(j), config.adf.lag_order, form)
                .map_err(|e| CliError::numerical(format!("{location}: {e}"))),
        )?;
        adf_rows.push((location.clone(), result));
    }
    at("adf", writer.write("adf/adf.csv", tables::adf_table_csv(&adf_rows).as_bytes()))?;

    // --- var: order selection + full-sample model -------------------------
    writer.begin_stage("var");
    let method = at("var", parse_method(&config.var.method))?;
    let order = match &config.var.order {
        OrderSpec::Fixed(p) => *p,
        OrderSpec::Auto(_) => {
            let criterion = at("var", parse_criterion(&config.var.criterion))?;
            let selection = at(
                "var",
                select_order(&differenced, config.var.max_order, criterion)
                    .map_err(|e| CliError::numerical(e.to_string())),
            )?;
            let text = serde_json::to_string_pretty(&selection).unwrap() + "\n";
            at("var", writer.write("model/order_selection.json", text.as_bytes()))?;
            eprintln!("[var] {criterion:?} selected order {}", selection.chosen);
            selection.chosen
        }
    };
    let (full_table, full_model) = at(
        "var",
        compute_table(&differenced, order, config.var.horizon, method),
    )?;
    let model_json = at("var", model::to_json(&full_model))?;
    at("var", writer.write("model/var_model.json", model_json.as_bytes()))?;
    let stability = stability_check(&full_model);
    if !stability.stable {
        eprintln!(
            "[var] warning: companion spectral radius {:.3} >= 1; decomposition horizon may be unreliable",
            stability.spectral_radius
        );
    }
    let stability_json = serde_json::json!({
        "spectral_radius": stability.spectral_radius,
        "stable": stability.stable,
        "order": order,
    });
    at(
        "var",
        writer.write(
            "model/stability.json",
            (serde_json::to_string_pretty(&stability_json).unwrap() + "\n").as_bytes(),
        ),
    )?;

    // --- full-sample spillover table --------------------------------------
    writer.begin_stage("spillover");
    at(
        "spillover",
        writer.write(
            "spillover/full_sample.csv",
            tables::spillover_table_csv(&full_table).as_bytes(),
        ),
    )?;
    let table_json = at("spillover", tables::spillover_table_json(&full_table))?;
    at(
        "spillover",
        writer.write("spillover/full_sample.json", table_json.as_bytes()),
    )?;
    eprintln!("[spillover] full-sample total: {:.2}", full_table.total);

    // --- rolling -----------------------------------------------------------
    writer.begin_stage("rolling");
    let windows = config.rolling.windows.expand();
    eprintln!(
        "[rolling] windows {:?} with {} worker(s)",
        (windows[0], *windows.last().unwrap()),
        config.rolling.workers
    );
    let rolled = at(
        "rolling",
        roll_window_set(
            &differenced,
            &windows,
            order,
            config.var.horizon,
            method,
            config.rolling.workers,
        ),
    )?;
    for r in &rolled {
        for warning in &r.warnings {
            eprintln!("[rolling] warning: {warning}");
        }
        at(
            "rolling",
            writer.write(
                &format!("rolling/window_{}.csv", r.window),
                tables::single_index_csv(&r.index()).as_bytes(),
            ),
        )?;
    }
    let average = average_rolled(&rolled);
    at(
        "rolling",
        writer.write("rolling/average.csv", tables::index_csv(&average).as_bytes()),
    )?;

    // --- network snapshots --------------------------------------------------
    writer.begin_stage("network");
    let coordinates = match &config.inputs.coordinates {
        Some(path) => {
            let file = at(
                "network",
                std::fs::File::open(path)
                    .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display()))),
            )?;
            Some(at("network", crate::io::load_coordinates(file, delimiter))?)
        }
        None => None,
    };
    let formats: Vec<GraphFormat> = {
        let mut v = Vec::new();
        for name in &config.network.formats {
            v.push(at("network", name.parse::<GraphFormat>())?);
        }
        v
    };
    let threshold = ThresholdSpec::new(config.network.retain_above, config.network.highlight_above);
    let emit_graph = |writer: &mut RunWriter,
                          tag: &str,
                          table: &spillover_core::spillover::SpilloverTable|
     -> StageResult<()> {
        let (graph, warnings) = to_graph(table, coordinates.as_ref());
        for warning in warnings {
            eprintln!("[network] warning: {warning}");
        }
        let cut = apply_threshold(&graph, &threshold, config.network.recompute_sizes);
        for format in &formats {
            let bytes = at("network", export(&cut, *format))?;
            at(
                "network",
                writer.write(&format!("network/{tag}.{}", format.extension()), &bytes),
            )?;
        }
        Ok(())
    };
    emit_graph(writer, "full_sample", &full_table)?;

    let largest = *windows.last().unwrap();
    let largest_rolled = rolled.iter().find(|r| r.window == largest).unwrap();
    let snapshot_years = config
        .network
        .snapshot_years
        .clone()
        .unwrap_or_else(|| DEFAULT_SNAPSHOT_YEARS.to_vec());
    for &wanted in &snapshot_years {
        // Clamp to the nearest available terminal year.
        let Some((year, table)) = largest_rolled
            .end_years
            .iter()
            .zip(&largest_rolled.tables)
            .filter_map(|(&y, t)| t.as_ref().map(|t| (y, t)))
            .min_by_key(|(y, _)| (y - wanted).abs())
        else {
            continue;
        };
        if year != wanted {
            eprintln!("[network] snapshot {wanted} mapped to nearest terminal year {year}");
        }
        emit_graph(writer, &format!("snapshot_{year}"), table)?;
    }

    // --- conflict ingestion ---------------------------------------------------
    let Some(catalog_path) = &config.inputs.catalog else {
        writer.begin_stage("conflict (skipped: no catalog)");
        writer.begin_stage("regression (skipped: no catalog)");
        writer.begin_stage("quantreg (skipped: no catalog)");
        writer.begin_stage("sea (skipped: no catalog)");
        return Ok(());
    };
    writer.begin_stage("conflict");
    let schema = config.conflict.schema.clone().unwrap_or_else(CatalogSchema::default);
    let file = at(
        "conflict",
        std::fs::File::open(catalog_path)
            .map_err(|e| CliError::data(format!("cannot open {}: {e}", catalog_path.display()))),
    )?;
    let (events, catalog_report) = at("conflict", crate::io::parse_catalog(file, &schema, delimiter))?;
    let kept = spillover_core::conflict::filter_regions(&events, &config.conflict.regions);
    eprintln!(
        "[conflict] {} events, {} in regions {:?}, {} dropped (missing fatalities)",
        events.len(),
        kept.len(),
        config.conflict.regions,
        catalog_report.dropped_missing_fatalities
    );
    let fatalities = at(
        "conflict",
        spillover_core::conflict::fatalities_per_year(&kept)
            .map_err(|e| CliError::data(e.to_string())),
    )?;
    let mut fat_csv = String::from("year,fatalities\n");
    for year in fatalities.years() {
        fat_csv.push_str(&format!(
            "{year},{}\n",
            format_float(fatalities.get(year).unwrap())
        ));
    }
    at("conflict", writer.write("conflict/fatalities.csv", fat_csv.as_bytes()))?;
    let conflict_report = serde_json::json!({
        "events_total": events.len(),
        "events_kept": kept.len(),
        "regions": config.conflict.regions,
        "dropped_missing_fatalities": catalog_report.dropped_missing_fatalities,
    });
    at(
        "conflict",
        writer.write(
            "conflict/report.json",
            (serde_json::to_string_pretty(&conflict_report).unwrap() + "\n").as_bytes(),
        ),
    )?;

    // --- regressions -----------------------------------------------------------
    writer.begin_stage("regression");
    let index_series: Vec<(i32, f64)> = average
        .years
        .iter()
        .zip(&average.mean)
        .filter_map(|(&y, v)| v.map(|v| (y, v)))
        .collect();
    let cpi = cpi_control(&winsorized, config.regression.cpi_window_mean);
    let designs = at(
        "regression",
        assemble_designs(&index_series, &fatalities, &cpi, &config.regression.exclusions),
    )?;
    let full_fit = at(
        "regression",
        ols_newey_west(&designs.full, config.regression.nw_lag)
            .map_err(|e| CliError::numerical(e.to_string())),
    )?;
    eprintln!("[regression] full sample n = {}", full_fit.n);
    let mut fits = vec![("full_sample".to_string(), full_fit)];
    if let Some(design) = &designs.excluded {
        let fit = at(
            "regression",
            ols_newey_west(design, config.regression.nw_lag)
                .map_err(|e| CliError::numerical(e.to_string())),
        )?;
        eprintln!("[regression] excluding ranges n = {}", fit.n);
        fits.push(("excluding_ranges".to_string(), fit));
    }
    let named: Vec<(String, &spillover_core::regress::RegressionFit)> =
        fits.iter().map(|(n, f)| (n.clone(), f)).collect();
    at(
        "regression",
        writer.write(
            "regression/ols.csv",
            tables::regression_comparison_csv(&named).as_bytes(),
        ),
    )?;
    let ols_json = at("regression", tables::regression_json(&named))?;
    at(
        "regression",
        writer.write("regression/ols.json", ols_json.as_bytes()),
    )?;
    let scatter_full = at(
        "regression",
        scatter_json(
            &designs.full,
            spillover_core::scatter::CurveMode::RestrictedCubicSpline { knots: 4 },
        ),
    )?;
    at(
        "regression",
        writer.write("regression/scatter_full.json", scatter_full.as_bytes()),
    )?;
    if let Some(design) = &designs.excluded {
        let scatter_excl = at(
            "regression",
            scatter_json(design, spillover_core::scatter::CurveMode::Linear),
        )?;
        at(
            "regression",
            writer.write("regression/scatter_excl.json", scatter_excl.as_bytes()),
        )?;
    }

    // --- quantile regressions -----------------------------------------------------
    writer.begin_stage("quantreg");
    let quantile_seed = stage_seed(config.seed, 0x7154_5245_47);
    let fits = at(
        "quantreg",
        fit_quantile_set(
            &designs.full,
            &config.regression.quantiles,
            config.regression.bootstrap,
            quantile_seed,
        ),
    )?;
    write_quantile_files(writer, "full", &fits)?;
    if let Some(design) = &designs.excluded {
        let fits = at(
            "quantreg",
            fit_quantile_set(
                design,
                &config.regression.quantiles,
                config.regression.bootstrap,
                quantile_seed,
            ),
        )?;
        write_quantile_files(writer, "excl", &fits)?;
    }

    // --- superposed epoch analysis ---------------------------------------------------
    if config.sea.spans.is_empty() {
        writer.begin_stage("sea (skipped: no spans configured)");
        return Ok(());
    }
    writer.begin_stage("sea");
    let years: Vec<i32> = index_series.iter().map(|&(y, _)| y).collect();
    for w in years.windows(2) {
        if w[1] != w[0] + 1 {
            return Err((
                "sea".to_string(),
                CliError::numerical(format!(
                    "averaged index has a gap between {} and {}; SEA needs contiguous years",
                    w[0], w[1]
                )),
            ));
        }
    }
    let values: Vec<f64> = index_series.iter().map(|&(_, v)| v).collect();
    let sea_seed = stage_seed(config.seed, 0x5345_41);
    for variant_name in &config.sea.variants {
        let variant = at("sea", parse_variant(variant_name))?;
        let events = at(
            "sea",
            event_sets(&config.sea.spans, variant, &config.sea.exclusions)
                .map_err(|e| CliError::config(e.to_string())),
        )?;
        let mut spec = EpochSpec::new(events, config.sea.half_width, config.sea.n_boot, sea_seed);
        spec.one_sided = config.sea.one_sided;
        let result = at(
            "sea",
            superposed_epoch(&years, &values, &spec)
                .map_err(|e| CliError::numerical(e.to_string())),
        )?;
        for warning in &result.warnings {
            eprintln!("[sea] warning: {warning}");
        }
        let n_flagged = result.flags_05.iter().filter(|&&f| f).count();
        eprintln!(
            "[sea] {variant_name}: {} epochs, {n_flagged} lags outside the 5% band",
            result.used_epochs
        );
        at(
            "sea",
            writer.write(
                &format!("sea/{variant_name}.csv"),
                tables::sea_csv(&result).as_bytes(),
            ),
        )?;
    }
    Ok(())
}

fn write_quantile_files(
    writer: &mut RunWriter,
    tag: &str,
    fits: &[(f64, spillover_core::regress::RegressionFit)],
) -> StageResult<()> {
    let named: Vec<(String, &spillover_core::regress::RegressionFit)> = fits
        .iter()
        .map(|(tau, fit)| (format!("q{:02}", (tau * 100.0).round() as u32), fit))
        .collect();
    at(
        "quantreg",
        writer.write(
            &format!("regression/quantreg_{tag}.csv"),
            tables::regression_comparison_csv(&named).as_bytes(),
        ),
    )?;
    let fits_json = at("quantreg", tables::regression_json(&named))?;
    at(
        "quantreg",
        writer.write(&format!("regression/quantreg_{tag}.json"), fits_json.as_bytes()),
    )?;
    let by_tau: Vec<(f64, &spillover_core::regress::RegressionFit)> =
        fits.iter().map(|(t, f)| (*t, f)).collect();
    at(
        "quantreg",
        writer.write(
            &format!("regression/quantile_coefficients_{tag}.csv"),
            tables::quantile_coefficients_csv(&by_tau, 1).as_bytes(),
        ),
    )?;
    Ok(())
}
