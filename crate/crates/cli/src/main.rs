use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gaitscope::catalog::{aggregates, load_catalog, query, shipped_catalog, DatasetRecord, Predicate};
use gaitscope::events::HeelStrikes;
use gaitscope::synth::{generate, WalkerSpec};
use gaitscope::{analyze_clip, compare_pair, render_report, write_bvh, ExpectedDirections, MetricsReport, ReportFormat};
use gaitscope_cli::files::{
    clip_id, has_extension, load_clip, load_config, load_sidecar, report_source, resolve_sidecar, write_atomic,
};
use gaitscope_cli::plot::{plot_table, PlotKind};
use gaitscope_cli::serve::{router, serve, AppState};

#[derive(Parser, Debug)]
#[command(name = "gaitscope", version, about = "Gait analysis of motion-capture clips")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CatalogFormat {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Computes a metrics report for one or more BVH clips.
    Analyze {
        /// BVH files. With more than one, `--out` names a directory.
        #[arg(required = true)]
        clips: Vec<PathBuf>,
        /// Analysis config (TOML, or JSON by extension).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Annotation sidecar. Defaults to the sidecar next to the clip.
        #[arg(long, conflicts_with = "no_sidecar")]
        sidecar: Option<PathBuf>,
        /// Ignore any sidecar next to the clip.
        #[arg(long)]
        no_sidecar: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Output file, or directory for several clips. Standard output otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dataset name recorded in the report source.
        #[arg(long)]
        dataset: Option<String>,
        /// Walking style recorded in the report source, e.g. old or normative.
        #[arg(long)]
        style: Option<String>,
        /// Worker threads for batch runs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Judges an old-style report against its normative counterpart.
    Compare {
        old: PathBuf,
        normative: PathBuf,
        /// Config supplying the tie tolerance.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Relative tie tolerance, overriding the config.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lists surveyed datasets matching an optional query.
    Catalog {
        /// Filter such as `older_adults > 0 and body_parts = "full body"`.
        query: Option<String>,
        /// Catalog TOML to use instead of the built-in one.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: CatalogFormat,
        /// Print aggregate counts of the matching records instead.
        #[arg(long)]
        summary: bool,
    },
    /// Writes per-frame plot data with event markers.
    ExportPlot {
        clip: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "no_sidecar")]
        sidecar: Option<PathBuf>,
        #[arg(long)]
        no_sidecar: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serves clips in a directory to the annotation inspector.
    Serve {
        dir: PathBuf,
        #[arg(long, default_value_t = 8650)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory of inspector assets served at the root.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
    /// Writes a synthetic walker clip from a spec file.
    Generate {
        /// Walker spec (TOML, or JSON by extension). Defaults apply without one.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the ground truth as JSON.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

/// Errors in how the command was invoked rather than in the data.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

struct AnalyzeOptions<'a> {
    config: &'a gaitscope::AnalysisConfig,
    sidecar: Option<&'a Path>,
    no_sidecar: bool,
    format: ReportFormat,
    dataset: Option<&'a str>,
    style: Option<&'a str>,
}

fn analyze_one(clip_path: &Path, opts: &AnalyzeOptions) -> Result<String> {
    let clip = load_clip(clip_path)?;
    let sidecar = match resolve_sidecar(clip_path, opts.sidecar, opts.no_sidecar) {
        Some(p) => Some(load_sidecar(&p)?),
        None => None,
    };
    let source = report_source(opts.config, clip_path, opts.dataset, opts.style);
    let analysis = analyze_clip(&clip, opts.config, sidecar.as_ref(), source)
        .with_context(|| format!("analyzing {}", clip_path.display()))?;
    if let HeelStrikes::Unreliable { drift_ratio } = analysis.events.left.heel_strikes {
        eprintln!(
            "warning: {}: heel strikes unreliable, ground level drifts (ratio {drift_ratio:.3})",
            clip_path.display()
        );
    }
    if analysis.segments.is_empty() {
        eprintln!("warning: {}: no analyzable walking segment", clip_path.display());
    }
    Ok(analysis.report.render(opts.format)?)
}

fn cmd_analyze(
    clips: &[PathBuf],
    opts: &AnalyzeOptions,
    out: Option<&Path>,
    jobs: Option<usize>,
) -> Result<()> {
    if let [clip] = clips {
        return emit(out, &analyze_one(clip, opts)?);
    }
    if opts.sidecar.is_some() {
        bail!(UsageError("--sidecar applies to a single clip".into()));
    }
    let Some(dir) = out else {
        bail!(UsageError("analyzing several clips needs --out DIR".into()));
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let ext = match opts.format {
        ReportFormat::Csv => "csv",
        ReportFormat::Json => "json",
    };
    let workers = jobs
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .clamp(1, clips.len());
    let next = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(clip) = clips.get(i) else { break };
                let target = dir.join(format!("{}.metrics.{ext}", clip_id(clip)));
                let result = analyze_one(clip, opts).and_then(|text| emit(Some(&target), &text));
                if let Err(e) = result {
                    failures.lock().expect("failure list poisoned").push(format!("{}: {e:#}", clip.display()));
                }
            });
        }
    });
    let mut failures = failures.into_inner().expect("failure list poisoned");
    failures.sort();
    for f in &failures {
        eprintln!("error: {f}");
    }
    if !failures.is_empty() {
        bail!("{} of {} clips failed", failures.len(), clips.len());
    }
    Ok(())
}

fn read_report(path: &Path) -> Result<MetricsReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    MetricsReport::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn catalog_table(records: &[&DatasetRecord]) -> String {
    let header = ["name", "category", "participants", "older_adults", "body_parts", "has_old_style", "old_style_minutes"];
    let rows: Vec<[String; 7]> = records
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                r.category.label().to_string(),
                r.participants.to_string(),
                r.older_adults.to_string(),
                r.body_parts.label().to_string(),
                r.has_old_style.label().to_string(),
                r.old_style_minutes.map(|m| m.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in &rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn catalog_csv(records: &[&DatasetRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "name",
        "category",
        "participants",
        "older_adults",
        "body_parts",
        "motor_skills",
        "has_old_style",
        "old_style_minutes",
        "citation",
    ])?;
    for r in records {
        w.write_record([
            r.name.clone(),
            r.category.label().to_string(),
            r.participants.to_string(),
            r.older_adults.to_string(),
            r.body_parts.label().to_string(),
            r.motor_skills.join("; "),
            r.has_old_style.label().to_string(),
            r.old_style_minutes.map(|m| m.to_string()).unwrap_or_default(),
            r.citation.clone(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn cmd_catalog(q: Option<&str>, file: Option<&Path>, format: CatalogFormat, summary: bool) -> Result<()> {
    let catalog = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            load_catalog(&text).with_context(|| format!("loading {}", path.display()))?
        }
        None => shipped_catalog(),
    };
    let matched: Vec<&DatasetRecord> = match q {
        Some(q) => {
            let predicate: Predicate = q.parse().map_err(|e| UsageError(format!("invalid query: {e}")))?;
            query(&catalog.records, &predicate)
        }
        None => catalog.records.iter().collect(),
    };
    let text = if summary {
        let owned: Vec<DatasetRecord> = matched.into_iter().cloned().collect();
        serde_json::to_string_pretty(&aggregates(&owned))? + "\n"
    } else {
        match format {
            CatalogFormat::Table => catalog_table(&matched),
            CatalogFormat::Csv => catalog_csv(&matched)?,
            CatalogFormat::Json => serde_json::to_string_pretty(&matched)? + "\n",
        }
    };
    emit(None, &text)
}

fn load_spec(path: Option<&Path>) -> Result<WalkerSpec> {
    let Some(path) = path else {
        return Ok(WalkerSpec::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = if has_extension(path, "json") {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text)?
    };
    Ok(spec)
}

fn run(args: Args) -> Result<()> {
    match args.command {
        Command::Analyze {
            clips,
            config,
            sidecar,
            no_sidecar,
            format,
            out,
            dataset,
            style,
            jobs,
        } => {
            let config = load_config(config.as_deref())?;
            let opts = AnalyzeOptions {
                config: &config,
                sidecar: sidecar.as_deref(),
                no_sidecar,
                format: format.into(),
                dataset: dataset.as_deref(),
                style: style.as_deref(),
            };
            cmd_analyze(&clips, &opts, out.as_deref(), jobs)
        }
        Command::Compare {
            old,
            normative,
            config,
            tolerance,
            format,
            out,
        } => {
            let config = load_config(config.as_deref())?;
            let tolerance = tolerance.unwrap_or(config.fidelity.tie_tolerance);
            if !(tolerance.is_finite() && tolerance >= 0.0) {
                bail!(UsageError(format!("tolerance must be non-negative, got {tolerance}")));
            }
            let report = compare_pair(
                &read_report(&old)?,
                &read_report(&normative)?,
                &ExpectedDirections::default(),
                tolerance,
            )?;
            emit(out.as_deref(), &render_report(&report, format.into())?)
        }
        Command::Catalog {
            query,
            file,
            format,
            summary,
        } => cmd_catalog(query.as_deref(), file.as_deref(), format, summary),
        Command::ExportPlot {
            clip,
            kind,
            config,
            sidecar,
            no_sidecar,
            format,
            out,
        } => {
            let config = load_config(config.as_deref())?;
            let motion = load_clip(&clip)?;
            let sidecar = match resolve_sidecar(&clip, sidecar.as_deref(), no_sidecar) {
                Some(p) => Some(load_sidecar(&p)?),
                None => None,
            };
            let source = report_source(&config, &clip, None, None);
            let id = source.clip_id.clone();
            let analysis = analyze_clip(&motion, &config, sidecar.as_ref(), source)?;
            let table = plot_table(kind, &analysis, &id, motion.spatial_unit(), config.up_axis);
            let text = match format {
                Format::Csv => table.to_csv()?,
                Format::Json => table.to_json()?,
            };
            emit(out.as_deref(), &text)
        }
        Command::Serve {
            dir,
            port,
            host,
            config,
            ui,
        } => {
            if !dir.is_dir() {
                bail!(UsageError(format!("{} is not a directory", dir.display())));
            }
            let config = load_config(config.as_deref())?;
            let app = router(AppState::new(dir, config), ui.as_deref());
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .with_context(|| format!("binding {host}:{port}"))?;
                eprintln!("serving on http://{}", listener.local_addr()?);
                serve(listener, app).await?;
                Ok(())
            })
        }
        Command::Generate { spec, out, truth } => {
            let spec = load_spec(spec.as_deref())?;
            let walk = generate(&spec)?;
            emit(Some(&out), &write_bvh(&walk.clip))?;
            if let Some(path) = truth {
                emit(Some(&path), &(serde_json::to_string_pretty(&walk.truth)? + "\n"))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
