use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use url::Url;

use treelink::fragmenter::{
    fragment, generate_dataset, write_fragments, SensorDataSpec, DEFAULT_BASE,
};
use treelink::harness::{
    query_analogs, report, run_bench, serve, BenchConfig, CriterionKind, ReportFormat, ServeOptions,
};
use treelink::rdf::vocab;
use treelink::{
    parse_query, traverse_and_query, Fetcher, TraversalOptions, TraversalResult, TypedValue,
};

#[derive(Parser)]
#[command(
    name = "treelink",
    version,
    about = "Link-traversal querying over TREE-fragmented RDF"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    Rule,
    Predicate,
}

impl From<Criterion> for CriterionKind {
    fn from(c: Criterion) -> Self {
        match c {
            Criterion::Rule => CriterionKind::Rule,
            Criterion::Predicate => CriterionKind::Predicate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sensor dataset and write it as a depth-1 B-tree.
    Fragment {
        /// Number of measurements.
        #[arg(long)]
        count: usize,
        /// Number of leaf documents.
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 31)]
        seed: u64,
        /// First timestamp (xsd:dateTime lexical form).
        #[arg(long, default_value = "2022-01-03T00:00:00Z")]
        start: String,
        /// Seconds between measurements.
        #[arg(long, default_value_t = 60)]
        step_secs: u64,
        #[arg(long, default_value_t = 4)]
        sensors: usize,
        #[arg(long, default_value = DEFAULT_BASE)]
        base: String,
        /// Also write the four benchmark queries as Q1.rq .. Q4.rq.
        #[arg(long)]
        write_queries: bool,
    },
    /// Serve a fragment directory over HTTP until interrupted.
    Serve {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = 0)]
        delay_ms: u64,
    },
    /// Traverse from the seeds and print the query's bindings.
    Query {
        /// Seed IRI (file:// or http://) or a local file path. Repeatable.
        #[arg(long = "seed", required = true)]
        seeds: Vec<String>,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum, default_value = "rule")]
        criterion: Criterion,
        #[arg(long, default_value_t = 120.0)]
        timeout_secs: f64,
        #[arg(long, default_value_t = 30.0)]
        request_timeout_secs: f64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        fetch_parallelism: u32,
    },
    /// Run the benchmark matrix described by a TOML config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Where to write the JSON report.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's artificial per-request delay.
        #[arg(long)]
        delay_ms: Option<u64>,
        /// Format printed to stdout.
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fragment {
            count,
            nodes,
            out,
            seed,
            start,
            step_secs,
            sensors,
            base,
            write_queries,
        } => {
            let start = TypedValue::parse_date_time(&start)
                .with_context(|| format!("invalid --start {start:?}"))?;
            let spec = SensorDataSpec {
                count,
                start_micros: start.magnitude() as i64,
                step: Duration::from_secs(step_secs),
                sensors,
                seed,
            };
            let data = generate_dataset(&spec)?;
            let set = fragment(&data, nodes, vocab::SAREF_HAS_TIMESTAMP, &base)?;
            let manifest = write_fragments(&set, &out)?;
            if write_queries {
                if count < 40 {
                    bail!("--write-queries needs --count of at least 40");
                }
                for analog in query_analogs(&spec) {
                    let path = out.join(format!("{}.rq", analog.id));
                    fs::write(&path, &analog.text)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            }
            println!(
                "wrote {} documents ({} measurements) to {}",
                manifest.entries.len(),
                count,
                out.display()
            );
            Ok(())
        }
        Command::Serve {
            dir,
            port,
            delay_ms,
        } => {
            let server = serve(
                &dir,
                port,
                ServeOptions {
                    delay: Duration::from_millis(delay_ms),
                    ..ServeOptions::default()
                },
            )?;
            println!("serving {} at {}", dir.display(), server.base_url());
            io::stdout().flush()?;
            loop {
                std::thread::park();
            }
        }
        Command::Query {
            seeds,
            query,
            criterion,
            timeout_secs,
            request_timeout_secs,
            fetch_parallelism,
        } => {
            let text = fs::read_to_string(&query)
                .with_context(|| format!("reading {}", query.display()))?;
            let q = parse_query(&text).with_context(|| format!("parsing {}", query.display()))?;
            let seeds = seeds
                .iter()
                .map(|s| seed_iri(s))
                .collect::<Result<Vec<_>>>()?;
            let request_timeout = Duration::from_secs_f64(request_timeout_secs);
            let fetcher = Fetcher::for_iri(&seeds[0], request_timeout)?;
            let criterion = CriterionKind::from(criterion).build(&q);
            let result = traverse_and_query(
                &seeds,
                &q,
                &criterion,
                &fetcher,
                TraversalOptions {
                    timeout: Duration::from_secs_f64(timeout_secs),
                    fetch_parallelism: fetch_parallelism as usize,
                },
            )?;
            let stdout = io::stdout();
            print_result(&mut stdout.lock(), q.projected(), &result)?;
            Ok(())
        }
        Command::Bench {
            config,
            out,
            delay_ms,
            format,
        } => {
            let mut cfg = BenchConfig::from_file(&config)?;
            if let Some(d) = delay_ms {
                cfg.delay_ms = d;
            }
            let r = run_bench(&cfg)?;
            fs::write(&out, report(&r, ReportFormat::Json))
                .with_context(|| format!("writing {}", out.display()))?;
            let format = match format {
                Format::Table => ReportFormat::Table,
                Format::Json => ReportFormat::Json,
                Format::Csv => ReportFormat::Csv,
            };
            print!("{}", report(&r, format));
            for (n, q) in r.dominance_violations() {
                log::warn!("n={n} {q}: rule-based run loaded more or returned different results");
            }
            Ok(())
        }
    }
}

/// Accepts IRIs as given and turns plain paths into `file://` IRIs.
fn seed_iri(s: &str) -> Result<String> {
    if s.contains("://") {
        return Ok(s.to_string());
    }
    let path = Path::new(s)
        .canonicalize()
        .with_context(|| format!("seed {s}"))?;
    Url::from_file_path(&path)
        .map(String::from)
        .map_err(|_| anyhow::anyhow!("seed {s} is not an absolute path"))
}

fn print_result(out: &mut impl Write, vars: &[String], result: &TraversalResult) -> io::Result<()> {
    let header: Vec<String> = vars.iter().map(|v| format!("?{v}")).collect();
    writeln!(out, "{}", header.join("\t"))?;
    for b in &result.bindings {
        let row: Vec<String> = vars
            .iter()
            .map(|v| b.get(v).map(|t| t.to_string()).unwrap_or_default())
            .collect();
        writeln!(out, "{}", row.join("\t"))?;
    }
    let m = &result.metrics;
    writeln!(out, "# requests: {}", m.requests)?;
    writeln!(out, "# failed requests: {}", m.failed_requests)?;
    writeln!(out, "# pruned links: {}", m.pruned_links)?;
    writeln!(out, "# results: {}", m.result_count)?;
    writeln!(out, "# peak store: {}", m.peak_store_size())?;
    writeln!(out, "# time ms: {:.3}", m.wall_time.as_secs_f64() * 1e3)?;
    if m.timed_out {
        writeln!(out, "# timed out: results may be incomplete")?;
    }
    Ok(())
}
