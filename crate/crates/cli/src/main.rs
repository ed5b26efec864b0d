use std::path::PathBuf;
use std::process::ExitCode;

use citesonic::ingest::InputFormat;
use citesonic_cli::{run, RunConfig, TimingOverrides};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Sonify publication records: chronological publication events,
/// open-access markers and citation-impact tones, rendered to WAV with MIDI,
/// JSON and CSV side outputs.
#[derive(Debug, Parser)]
#[command(name = "citesonic", version)]
struct Args {
    /// Record file (CSV/JSON) or a `.wav` insert; repeat for one segment each.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,

    /// Record format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Citation baselines, CSV with header `category,year,expected`.
    #[arg(long)]
    baselines: Option<PathBuf>,

    /// Mapping schema JSON.
    #[arg(long)]
    schema: Option<PathBuf>,

    /// Timing config JSON.
    #[arg(long)]
    timing: Option<PathBuf>,

    #[arg(long)]
    out_wav: Option<PathBuf>,
    #[arg(long)]
    out_midi: Option<PathBuf>,
    #[arg(long)]
    out_log: Option<PathBuf>,
    #[arg(long)]
    out_report: Option<PathBuf>,

    /// Master seed for the noise generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Skip the legend segment.
    #[arg(long)]
    no_legend: bool,

    /// Drop records published before this year.
    #[arg(long)]
    min_pub_year: Option<i32>,

    /// Drop records published after this year (e.g. to keep a citation window).
    #[arg(long)]
    max_pub_year: Option<i32>,

    /// Seconds per publication.
    #[arg(long)]
    slot: Option<f64>,
    #[arg(long)]
    lead_in: Option<f64>,
    #[arg(long)]
    segment_gap: Option<f64>,
    #[arg(long)]
    tone_duration: Option<f64>,

    /// Rendering threads.
    #[arg(long)]
    threads: Option<usize>,
}

impl From<Args> for RunConfig {
    fn from(a: Args) -> Self {
        RunConfig {
            inputs: a.inputs,
            format: a.format.map(|f| match f {
                Format::Csv => InputFormat::Csv,
                Format::Json => InputFormat::Json,
            }),
            baselines: a.baselines,
            schema: a.schema,
            timing: a.timing,
            timing_overrides: TimingOverrides {
                slot: a.slot,
                lead_in: a.lead_in,
                segment_gap: a.segment_gap,
                tone_duration: a.tone_duration,
            },
            out_wav: a.out_wav,
            out_midi: a.out_midi,
            out_log: a.out_log,
            out_report: a.out_report,
            seed: a.seed,
            legend: !a.no_legend,
            min_pub_year: a.min_pub_year,
            max_pub_year: a.max_pub_year,
            threads: a.threads,
        }
    }
}

fn main() -> ExitCode {
    let config = RunConfig::from(Args::parse());
    match run(&config) {
        Ok(summary) => {
            if summary.filtered > 0 {
                eprintln!(
                    "note: {} records outside the year filter were skipped",
                    summary.filtered
                );
            }
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
