//! Command-line driver: descriptive statistics, factor regressions with
//! Newey-West inference, rolling coefficient paths, event studies, placebo
//! sampling, and synthetic fixture generation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sentfactor::date::TradingDate;
use sentfactor::error::{Error, Result};
use sentfactor::event::{
    compare_models, placebo_sample, run_model, EventWindowConfig, DEFAULT_ESTIMATION_LENGTH,
    DEFAULT_EVENT_WINDOW,
};
use sentfactor::panel::{
    compute_excess_return, load_factor_table, load_returns, load_vix_series, load_yield_series,
    merge_panel, MergedPanel, Unit,
};
use sentfactor::regression::{
    build_design, fit_with_newey_west, vif, RegressionSpec, Regressor, VIF_WARN_MODERATE,
    VIF_WARN_SEVERE,
};
use sentfactor::report::{
    describe_csv, describe_rows, event_csv, event_detail_csv, regression_csv, render_describe,
    render_event, render_regression_table, write_atomic, ModelColumn, OutputHeader,
};
use sentfactor::rolling::{path_to_csv, rolling_fit, significance_share};
use sentfactor::sentiment::{
    aggregate_daily, align_to_calendar, load_items, rolling_volatility, Lexicon, NonTradingPolicy,
};
use sentfactor::synthetic::{generate_raw, write_input_files, SimulationConfig};

#[derive(Parser)]
#[command(
    name = "sentfactor",
    version,
    about = "Sentiment-augmented Fama-French five-factor analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Factor table CSV (date,mkt_rf,smb,hml,rmw,cma,rf)
    #[arg(long)]
    factors: PathBuf,
    /// 10-year treasury yield CSV (date,dgs10_yield)
    #[arg(long)]
    yields: PathBuf,
    /// Asset returns CSV, long or wide format
    #[arg(long)]
    returns: PathBuf,
    /// Item-level sentiment CSV (date,source,p_pos,p_neu,p_neg[,text])
    #[arg(long)]
    sentiment: PathBuf,
    /// VIX close CSV (date,vix_close)
    #[arg(long)]
    vix: PathBuf,
    /// Asset to analyze (default: first asset in the returns file)
    #[arg(long)]
    asset: Option<String>,
    /// Unit of factor and return inputs
    #[arg(long, default_value = "percent")]
    unit: String,
    /// Newey-West lag cutoff
    #[arg(long, default_value_t = 5)]
    nw_lags: usize,
    /// Sentiment volatility window W
    #[arg(long, default_value_t = 21)]
    hv_window: usize,
    /// Output directory for machine-readable exports
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed recorded in output headers and driving all sampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics of the merged panel
    Describe {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Baseline / augmented / interaction regressions side by side
    Regress {
        #[command(flatten)]
        input: InputArgs,
        /// Also print variance inflation factors for the interaction design
        #[arg(long)]
        with_vif: bool,
    },
    /// Rolling-window coefficient paths for the sentiment loading
    Roll {
        #[command(flatten)]
        input: InputArgs,
        /// Window lengths in trading days (repeatable)
        #[arg(long = "window", default_values_t = vec![60usize])]
        windows: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        step: usize,
        /// Significance level for the share-of-rejections summary
        #[arg(long, default_value_t = 0.10)]
        level: f64,
    },
    /// Event study around a given date under both models
    Event {
        #[command(flatten)]
        input: InputArgs,
        /// Nominal event date (t=0 snaps to the next trading day)
        #[arg(long)]
        date: String,
        #[arg(long, default_value_t = DEFAULT_ESTIMATION_LENGTH)]
        estimation: usize,
        #[arg(long, default_value_t = DEFAULT_EVENT_WINDOW.0)]
        t1: i64,
        #[arg(long, default_value_t = DEFAULT_EVENT_WINDOW.1)]
        t2: i64,
    },
    /// Sample weekday-matched placebo dates from the panel calendar
    Placebo {
        #[command(flatten)]
        input: InputArgs,
        /// Reference event date (weekday matching target)
        #[arg(long)]
        date: String,
        /// Number of placebo dates to draw
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// Dates whose event windows are excluded from the pool (repeatable)
        #[arg(long = "exclude")]
        exclude: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_ESTIMATION_LENGTH)]
        estimation: usize,
        #[arg(long, default_value_t = DEFAULT_EVENT_WINDOW.0)]
        t1: i64,
        #[arg(long, default_value_t = DEFAULT_EVENT_WINDOW.1)]
        t2: i64,
    },
    /// Generate synthetic input files with known ground truth
    Simulate {
        /// Directory to write factors/yields/returns/sentiment/vix CSVs
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 724)]
        days: usize,
        #[arg(long, default_value_t = 1)]
        assets: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn parse_unit(s: &str) -> Result<Unit> {
    Unit::parse(s).ok_or_else(|| {
        Error::Precondition(format!("unknown unit `{s}`, expected percent or fraction"))
    })
}

/// Load all inputs and build the merged panel. Returns the panel and the
/// resolved asset name.
fn build_panel(input: &InputArgs) -> Result<(MergedPanel, String)> {
    let unit = parse_unit(&input.unit)?;
    let factors = load_factor_table(&input.factors, unit)?;
    let yields = load_yield_series(&input.yields)?;
    let vix = load_vix_series(&input.vix)?;
    let returns = load_returns(&input.returns, unit)?;
    let lexicon = Lexicon::builtin();
    let items = load_items(&input.sentiment, &lexicon)?;
    let calendar: Vec<TradingDate> = factors.iter().map(|f| f.date).collect();
    let (aligned, _dropped) = align_to_calendar(&items, &calendar, NonTradingPolicy::NextDay);
    let daily = aggregate_daily(&aligned);
    let hv = rolling_volatility(&daily, input.hv_window)?;
    let excess = compute_excess_return(&returns, &factors)?;
    let panel = merge_panel(&factors, &yields, &daily, Some(&hv), &vix, &excess)?;
    let asset = match &input.asset {
        Some(a) => {
            panel.asset_index(a)?;
            a.clone()
        }
        None => panel
            .assets
            .first()
            .cloned()
            .ok_or(Error::EmptyPanel)?,
    };
    Ok((panel, asset))
}

fn config_repr(input: &InputArgs, extra: &str) -> String {
    format!(
        "factors={} yields={} returns={} sentiment={} vix={} asset={:?} unit={} nw_lags={} hv_window={} {extra}",
        input.factors.display(),
        input.yields.display(),
        input.returns.display(),
        input.sentiment.display(),
        input.vix.display(),
        input.asset,
        input.unit,
        input.nw_lags,
        input.hv_window,
    )
}

fn export(out_dir: &Path, name: &str, header: &OutputHeader, body: &str) -> Result<()> {
    let mut contents = header.line();
    contents.push_str(body);
    let path = out_dir.join(name);
    write_atomic(&path, &contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_describe(input: &InputArgs) -> Result<()> {
    let (panel, asset) = build_panel(input)?;
    let rows = describe_rows(&panel, &asset)?;
    print!("{}", render_describe(&rows));
    let header = OutputHeader::new(&config_repr(input, "cmd=describe"), input.seed);
    export(&input.out, "describe.csv", &header, &describe_csv(&rows))
}

fn cmd_regress(input: &InputArgs, with_vif: bool) -> Result<()> {
    let (panel, asset) = build_panel(input)?;
    let mut columns: Vec<ModelColumn> = Vec::new();
    for spec in [
        RegressionSpec::baseline(),
        RegressionSpec::augmented(),
        RegressionSpec::interaction(),
    ] {
        let fit = build_design(&panel, &spec, &asset)
            .and_then(|d| fit_with_newey_west(&d, input.nw_lags))
            .map_err(|e| e.to_string());
        columns.push((spec.name.label().to_string(), fit));
    }
    print!("{}", render_regression_table(&columns));
    if with_vif {
        let design = build_design(&panel, &RegressionSpec::interaction(), &asset)?;
        let report = vif(&design)?;
        println!("\nVariance inflation factors (interaction design):");
        for entry in &report.entries {
            let note = if entry.exceeds(VIF_WARN_SEVERE) {
                "  <- severe"
            } else if entry.exceeds(VIF_WARN_MODERATE) {
                "  <- moderate"
            } else {
                ""
            };
            println!("  {:<12} {}{}", entry.label, entry.value, note);
        }
    }
    let header = OutputHeader::new(&config_repr(input, "cmd=regress"), input.seed);
    export(&input.out, "regress.csv", &header, &regression_csv(&columns))
}

fn cmd_roll(input: &InputArgs, windows: &[usize], step: usize, level: f64) -> Result<()> {
    let (panel, asset) = build_panel(input)?;
    let spec = RegressionSpec::augmented();
    for &w in windows {
        let path = rolling_fit(
            &panel,
            &spec,
            &asset,
            w,
            step,
            input.nw_lags,
            &[Regressor::Sentiment],
        )?;
        let share = significance_share(&path, level, None)?;
        println!(
            "W={w}: {} windows, share of |gamma| rejections at the {:.0}% level: {:.4}",
            path.points.len(),
            level * 100.0,
            share
        );
        let extra = format!("cmd=roll window={w} step={step} level={level}");
        let header = OutputHeader::new(&config_repr(input, &extra), input.seed);
        export(&input.out, &format!("roll_w{w}.csv"), &header, &path_to_csv(&path))?;
    }
    Ok(())
}

fn cmd_event(input: &InputArgs, date: &str, estimation: usize, t1: i64, t2: i64) -> Result<()> {
    let (panel, asset) = build_panel(input)?;
    let assets: Vec<String> = if input.asset.is_some() {
        vec![asset]
    } else {
        panel.assets.clone()
    };
    let config = EventWindowConfig {
        event_date: TradingDate::parse(date)?,
        estimation_length: estimation,
        t1,
        t2,
    };
    config.validate(RegressionSpec::augmented().k())?;
    let baseline = run_model(&panel, &assets, &config, &RegressionSpec::baseline())?;
    let augmented = run_model(&panel, &assets, &config, &RegressionSpec::augmented())?;
    let comparison = compare_models(&baseline, &augmented)?;
    print!("{}", render_event(&config, &baseline, &augmented, &comparison));
    let extra = format!("cmd=event date={date} estimation={estimation} t1={t1} t2={t2}");
    let header = OutputHeader::new(&config_repr(input, &extra), input.seed);
    export(
        &input.out,
        "event.csv",
        &header,
        &event_csv(&config, &baseline, &augmented, &comparison),
    )?;
    export(
        &input.out,
        "event_assets.csv",
        &header,
        &event_detail_csv(&baseline, &augmented),
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_placebo(
    input: &InputArgs,
    date: &str,
    n: usize,
    exclude: &[String],
    estimation: usize,
    t1: i64,
    t2: i64,
) -> Result<()> {
    let (panel, _) = build_panel(input)?;
    let reference = EventWindowConfig {
        event_date: TradingDate::parse(date)?,
        estimation_length: estimation,
        t1,
        t2,
    };
    let exclusions: Vec<TradingDate> = exclude
        .iter()
        .map(|s| TradingDate::parse(s))
        .collect::<Result<_>>()?;
    let calendar = panel.calendar();
    let dates = placebo_sample(&calendar, n, &reference, &exclusions, input.seed)?;
    let mut body = String::from("placebo_date\n");
    for d in &dates {
        println!("{d}");
        body.push_str(&format!("{d}\n"));
    }
    let extra = format!("cmd=placebo date={date} n={n} estimation={estimation} t1={t1} t2={t2}");
    let header = OutputHeader::new(&config_repr(input, &extra), input.seed);
    export(&input.out, "placebo_dates.csv", &header, &body)
}

fn cmd_simulate(dir: &Path, days: usize, assets: usize, seed: u64) -> Result<()> {
    let config = SimulationConfig {
        n_days: days,
        n_assets: assets,
        seed,
        ..SimulationConfig::default()
    };
    let raw = generate_raw(&config)?;
    write_input_files(&raw, dir)?;
    println!(
        "wrote {} trading days x {} assets of synthetic inputs to {}",
        raw.calendar.len(),
        assets,
        dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Describe { input } => cmd_describe(input),
        Command::Regress { input, with_vif } => cmd_regress(input, *with_vif),
        Command::Roll {
            input,
            windows,
            step,
            level,
        } => cmd_roll(input, windows, *step, *level),
        Command::Event {
            input,
            date,
            estimation,
            t1,
            t2,
        } => cmd_event(input, date, *estimation, *t1, *t2),
        Command::Placebo {
            input,
            date,
            n,
            exclude,
            estimation,
            t1,
            t2,
        } => cmd_placebo(input, date, *n, exclude, *estimation, *t1, *t2),
        Command::Simulate {
            dir,
            days,
            assets,
            seed,
        } => cmd_simulate(dir, *days, *assets, *seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
