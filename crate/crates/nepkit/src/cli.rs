//! The `nepkit` command line.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nepkit_core::metrics;
use nepkit_core::time::parse_date;
use nepkit_core::{CompositionPolicy, Date, Mode, Stage, StageSnapshot, Timestamp};

use crate::analytics::{self, AnalyticsOptions};
use crate::clock::{Clock, ManualClock, SystemClock};
use crate::config::ServiceConfig;
use crate::engine::{Engine, EngineOptions, DEFAULT_REPORT_CODE_PATTERN};
use crate::error::{Error, Result};
use crate::table::Table;

#[derive(Debug, Parser)]
#[command(
    name = "nepkit",
    version,
    about = "Current awareness reports over a working paper corpus"
)]
struct Cli {
    /// Data directory.
    #[arg(long, global = true, env = "NEPKIT_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,

    /// Fixed current time (YYYY-MM-DDTHH:MM:SSZ) instead of the system clock.
    #[arg(long, global = true, env = "NEPKIT_NOW", value_parser = parse_timestamp)]
    now: Option<Timestamp>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Register the papers of one or more archive batch files ("-" for stdin).
    Ingest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Compose the nep-all issue for a date from newly registered papers.
    Compose {
        #[arg(long, value_parser = parse_day)]
        date: Date,
        /// Also admit papers without a creation date.
        #[arg(long)]
        include_undated: bool,
        /// Drop papers created before this date.
        #[arg(long, value_parser = parse_day)]
        cutoff: Option<Date>,
    },
    /// Manage reports.
    #[command(subcommand)]
    Report(ReportCommand),
    /// Retrain a report's presorter on all its sent issues.
    Train {
        code: String,
    },
    /// List nep-all issues the report has not sent or deleted.
    Pending {
        code: String,
    },
    /// Open an issue and print its source list.
    Open {
        code: String,
        #[arg(value_parser = parse_day)]
        date: Date,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Submit the selected papers.
    Select(PaperListArgs),
    /// Submit the final order of the selected papers.
    Order(PaperListArgs),
    /// Send the ordered issue to all subscribers.
    Send {
        code: String,
        #[arg(value_parser = parse_day)]
        date: Date,
    },
    /// Delete an unsent issue.
    Delete {
        code: String,
        #[arg(value_parser = parse_day)]
        date: Date,
    },
    /// Show the state of an issue.
    Status {
        code: String,
        #[arg(value_parser = parse_day)]
        date: Date,
    },
    /// Add a subscriber address to a report.
    Subscribe {
        code: String,
        address: String,
    },
    /// Remove a subscriber address.
    Unsubscribe {
        code: String,
        address: String,
    },
    /// Service-wide report statistics.
    Stats,
    /// Evaluation tables as TSV.
    Metrics(MetricsArgs),
    /// Run the HTTP API until interrupted.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ReportCommand {
    /// Create a report.
    Add {
        code: String,
        #[arg(long)]
        subject: String,
        #[arg(long)]
        editor: String,
    },
    /// List reports with their subscriber counts.
    List,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Presorted,
    Unsorted,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Presorted => Mode::Presorted,
            ModeArg::Unsorted => Mode::Unsorted,
        }
    }
}

#[derive(Debug, Args)]
struct PaperListArgs {
    code: String,
    #[arg(value_parser = parse_day)]
    date: Date,
    /// Paper handles, in order.
    papers: Vec<String>,
    /// Read handles from a file, one per line, after any given inline.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(value_enum)]
    kind: MetricKind,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = metrics::DEFAULT_MIN_PRESORTED_ISSUES)]
    min_presorted: usize,
    /// Sessions at or above this many minutes are invalid.
    #[arg(long, default_value_t = metrics::DEFAULT_DURATION_THRESHOLD_MINUTES)]
    threshold: f64,
    /// Histogram bin width in minutes.
    #[arg(long, default_value_t = metrics::DEFAULT_CHUNK_MINUTES)]
    chunk: f64,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricKind {
    Pn,
    Ap,
    Rsl,
    Durations,
    Correlations,
}

fn parse_day(s: &str) -> std::result::Result<Date, String> {
    parse_date(s).ok_or_else(|| format!("`{s}` is not a YYYY-MM-DD date"))
}

fn parse_timestamp(s: &str) -> std::result::Result<Timestamp, String> {
    Timestamp::parse_iso(s).ok_or_else(|| format!("`{s}` is not a YYYY-MM-DDTHH:MM:SSZ timestamp"))
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 1 on a failed command, 2 on a usage
/// error.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return e.exit_code();
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn open_engine(cli: &Cli) -> Result<Engine> {
    let clock: Arc<dyn Clock> = match cli.now {
        Some(t) => Arc::new(ManualClock::new(t)),
        None => Arc::new(SystemClock),
    };
    Engine::open(
        &cli.data_dir,
        EngineOptions {
            clock,
            report_code_pattern: DEFAULT_REPORT_CODE_PATTERN.to_string(),
        },
    )
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::io(path, e))?;
        return Ok(text);
    }
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn paper_list(args: &PaperListArgs) -> Result<Vec<String>> {
    let mut papers = args.papers.clone();
    if let Some(path) = &args.file {
        let text = read_input(path)?;
        papers.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from),
        );
    }
    Ok(papers)
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn print_snapshot(engine: &Engine, snap: &StageSnapshot, out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "{} {} {} v{} ({} papers)",
        snap.report_code,
        snap.issue_date,
        snap.stage,
        snap.version,
        snap.len()
    )
    .map_err(io_out)?;
    if snap.stage == Stage::Source {
        for (i, handle) in snap.paper_handles.iter().enumerate() {
            let title = engine.paper(handle).map(|p| p.title).unwrap_or_default();
            writeln!(out, "{}\t{handle}\t{title}", i + 1).map_err(io_out)?;
        }
    }
    Ok(())
}

fn emit(table: &Table, dest: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let text = table.to_tsv();
    match dest {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => out.write_all(text.as_bytes()).map_err(io_out),
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    if let Command::Serve { config } = &cli.command {
        return serve(config, out);
    }
    let engine = open_engine(&cli)?;
    match cli.command {
        Command::Ingest { files } => {
            let mut total = 0;
            for file in &files {
                total += engine.ingest_batch(&read_input(file)?)?;
            }
            writeln!(
                out,
                "registered {total} new papers ({} in corpus)",
                engine.paper_count()
            )
            .map_err(io_out)?;
        }
        Command::Compose {
            date,
            include_undated,
            cutoff,
        } => {
            let policy = CompositionPolicy {
                exclude_undated: !include_undated,
                cutoff,
            };
            let issue = engine.compose_nep_all(date, &policy)?;
            writeln!(
                out,
                "nep-all {} composed with {} papers",
                issue.issue_date,
                issue.length()
            )
            .map_err(io_out)?;
        }
        Command::Report(ReportCommand::Add {
            code,
            subject,
            editor,
        }) => {
            let report = engine.add_report(&code, &subject, &editor)?;
            writeln!(out, "added report {}", report.code).map_err(io_out)?;
        }
        Command::Report(ReportCommand::List) => {
            let mut table = Table::new(["code", "subject", "editor", "created_on", "subscribers"]);
            for r in engine.reports() {
                let subs = engine.subscriber_count(&r.code)?;
                table.push([
                    r.code,
                    r.subject,
                    r.editor_name,
                    r.created_on.to_string(),
                    subs.to_string(),
                ]);
            }
            emit(&table, None, out)?;
        }
        Command::Train { code } => {
            let model = engine.train(&code)?;
            writeln!(
                out,
                "trained {} on {} issues ({} tokens)",
                model.report_code,
                model.trained_issue_count,
                model.vocabulary.len()
            )
            .map_err(io_out)?;
        }
        Command::Pending { code } => {
            let mut table = Table::new(["issue", "state"]);
            for p in engine.list_pending(&code)? {
                table.push([p.issue_date.to_string(), p.state.to_string()]);
            }
            emit(&table, None, out)?;
        }
        Command::Open { code, date, mode } => {
            let snap = engine.open_issue(&code, date, mode.into())?;
            print_snapshot(&engine, &snap, out)?;
        }
        Command::Select(args) => {
            let snap = engine.submit_selection(&args.code, args.date, &paper_list(&args)?)?;
            print_snapshot(&engine, &snap, out)?;
        }
        Command::Order(args) => {
            let snap = engine.submit_ordering(&args.code, args.date, &paper_list(&args)?)?;
            print_snapshot(&engine, &snap, out)?;
        }
        Command::Send { code, date } => {
            let receipt = engine.send_issue(&code, date)?;
            print_snapshot(&engine, &receipt.snapshot, out)?;
            writeln!(out, "delivered to {} subscribers", receipt.delivered).map_err(io_out)?;
        }
        Command::Delete { code, date } => {
            let status = engine.delete_issue(&code, date)?;
            writeln!(
                out,
                "{} {} {}",
                status.report_code, status.issue_date, status.state
            )
            .map_err(io_out)?;
        }
        Command::Status { code, date } => {
            let status = engine.issue_status(&code, date)?;
            writeln!(
                out,
                "{} {} {}",
                status.report_code, status.issue_date, status.state
            )
            .map_err(io_out)?;
        }
        Command::Subscribe { code, address } => {
            let added = engine.subscribe(&code, &address)?;
            let verb = if added {
                "subscribed"
            } else {
                "already subscribed"
            };
            writeln!(out, "{address} {verb} to {code}").map_err(io_out)?;
        }
        Command::Unsubscribe { code, address } => {
            let removed = engine.unsubscribe(&code, &address)?;
            let verb = if removed {
                "unsubscribed from"
            } else {
                "was not subscribed to"
            };
            writeln!(out, "{address} {verb} {code}").map_err(io_out)?;
        }
        Command::Stats => {
            let stats = engine.analytics_snapshot()?.statistics();
            emit(&analytics::statistics_table(&stats), None, out)?;
        }
        Command::Metrics(args) => run_metrics(&engine, &args, out)?,
        Command::Serve { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn run_metrics(engine: &Engine, args: &MetricsArgs, out: &mut dyn Write) -> Result<()> {
    let opts = AnalyticsOptions {
        threshold_minutes: args.threshold,
        chunk_minutes: args.chunk,
        min_presorted: args.min_presorted,
    };
    let data = engine.analytics_snapshot()?;
    let dest = args.out.as_deref();
    match args.kind {
        MetricKind::Pn => emit(&analytics::pn_table(&data.reports, args.n)?, dest, out),
        MetricKind::Ap => {
            let result = metrics::ap_at_n(&data.reports, args.n, opts.min_presorted)?;
            emit(&analytics::ap_table(&result), dest, out)
        }
        MetricKind::Rsl => {
            let result = metrics::avg_rsl(&data.reports, opts.min_presorted)?;
            emit(&analytics::rsl_table(&result), dest, out)
        }
        MetricKind::Durations => {
            let sessions = analytics::editing_sessions(&data.reports, opts.threshold_minutes);
            let histogram = metrics::duration_histogram(
                sessions.iter().map(|s| s.duration_minutes),
                opts.chunk_minutes,
            )?;
            let mut text = analytics::duration_table(&sessions).to_tsv();
            text.push('\n');
            text.push_str(&analytics::histogram_table(&histogram).to_tsv());
            match dest {
                Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
                None => out.write_all(text.as_bytes()).map_err(io_out),
            }
        }
        MetricKind::Correlations => {
            let results = data.correlations(opts.threshold_minutes)?;
            emit(&analytics::correlation_table(&results), dest, out)
        }
    }
}

fn serve(config_path: &Path, out: &mut dyn Write) -> Result<()> {
    let config = ServiceConfig::load(config_path)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("<runtime>", e))?;
    runtime.block_on(async {
        let handle = crate::http::serve(config).await?;
        writeln!(out, "listening on http://{}", handle.local_addr).map_err(io_out)?;
        out.flush().map_err(io_out)?;
        tokio::signal::ctrl_c()
            .await
            .map_err(|e| Error::io("<signal>", e))?;
        handle
            .shutdown()
            .await
            .map_err(|e| Error::io("<server>", e))
    })
}
