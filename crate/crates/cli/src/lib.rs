//! End-to-end pipeline behind the `citesonic` binary.
//!
//! Each input file becomes one segment of the track. Record files (CSV or
//! JSON) are parsed, optionally filtered by publication year, ordered,
//! normalized, mapped and scheduled; `.wav` inputs are mixed in verbatim as
//! external inserts. The legend segment, when enabled, comes first.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use citesonic::export::{self, MappingReportRow};
use citesonic::ingest::{parse_records, sort_chronological, InputFormat};
use citesonic::mapping::{map_record, MappedPublication, MappingSchema};
use citesonic::normalization::{resolve_mncs, BaselineTable};
use citesonic::sequencing::{build_legend, concat, schedule, EventKind, Timeline, TimingConfig};
use citesonic::synthesis::{self, AudioBuffer};

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    /// One segment per input, in order.
    pub inputs: Vec<PathBuf>,
    /// Forces the record format; otherwise inferred from the extension.
    pub format: Option<InputFormat>,
    pub baselines: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub timing: Option<PathBuf>,
    pub timing_overrides: TimingOverrides,
    pub out_wav: Option<PathBuf>,
    pub out_midi: Option<PathBuf>,
    pub out_log: Option<PathBuf>,
    pub out_report: Option<PathBuf>,
    pub seed: u64,
    pub legend: bool,
    pub min_pub_year: Option<i32>,
    pub max_pub_year: Option<i32>,
    /// Rendering threads; `None` uses rayon's default pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct TimingOverrides {
    pub slot: Option<f64>,
    pub lead_in: Option<f64>,
    pub segment_gap: Option<f64>,
    pub tone_duration: Option<f64>,
}

impl TimingOverrides {
    fn apply(&self, cfg: &mut TimingConfig) {
        if let Some(v) = self.slot {
            cfg.slot = v;
        }
        if let Some(v) = self.lead_in {
            cfg.lead_in = v;
        }
        if let Some(v) = self.segment_gap {
            cfg.segment_gap = v;
        }
        if let Some(v) = self.tone_duration {
            cfg.tone_duration = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub publications: usize,
    pub open_access: usize,
    /// Records dropped by the year filter.
    pub filtered: usize,
    pub duration: f64,
    pub events: usize,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} publications, {} open access, {:.3} s, {} events",
            self.publications, self.open_access, self.duration, self.events
        )
    }
}

/// Everything the pipeline produces, before anything touches the disk.
pub struct Track {
    pub schema: MappingSchema,
    pub timing: TimingConfig,
    /// Segment timelines in track order (legend first when enabled).
    pub segments: Vec<Timeline>,
    pub timeline: Timeline,
    pub mapped: Vec<MappedPublication>,
    pub filtered: usize,
}

impl Track {
    pub fn summary(&self) -> Summary {
        Summary {
            publications: self.mapped.len(),
            open_access: self.mapped.iter().filter(|m| m.oa).count(),
            filtered: self.filtered,
            duration: self.timeline.total_duration,
            events: self.timeline.events.len(),
        }
    }

    pub fn report_rows(&self) -> Vec<MappingReportRow> {
        self.mapped.iter().map(MappingReportRow::from).collect()
    }

    pub fn count(&self, pred: impl Fn(&EventKind) -> bool) -> usize {
        self.timeline.count(pred)
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Runs every stage up to (not including) rendering.
pub fn build_track(config: &RunConfig) -> Result<Track> {
    if config.inputs.is_empty() {
        bail!("at least one --input is required");
    }
    let schema = match &config.schema {
        Some(p) => MappingSchema::from_json(&read(p)?)
            .with_context(|| format!("invalid schema {}", p.display()))?,
        None => MappingSchema::default(),
    };
    let mut timing = match &config.timing {
        Some(p) => TimingConfig::from_json(&read(p)?)
            .with_context(|| format!("invalid timing config {}", p.display()))?,
        None => TimingConfig::default(),
    };
    config.timing_overrides.apply(&mut timing);
    timing.validate()?;
    let baselines = match &config.baselines {
        Some(p) => BaselineTable::from_csv(&read(p)?)
            .with_context(|| format!("invalid baseline table {}", p.display()))?,
        None => BaselineTable::default(),
    };

    let mut segments = Vec::new();
    if config.legend {
        segments.push(build_legend(&schema, &timing)?);
    }
    let mut all_mapped = Vec::new();
    let mut filtered = 0;
    for path in &config.inputs {
        let raw = read(path)?;
        if has_extension(path, "wav") {
            let audio = export::read_wav(&raw)
                .with_context(|| format!("invalid insert {}", path.display()))?;
            if audio.sample_rate != timing.sample_rate {
                bail!(
                    "{} is {} Hz but the track is {} Hz",
                    path.display(),
                    audio.sample_rate,
                    timing.sample_rate
                );
            }
            if audio.samples.is_empty() {
                bail!("{} contains no audio", path.display());
            }
            segments.push(Timeline::insert(
                path,
                audio.duration(),
                timing.sample_rate,
            )?);
            continue;
        }

        let format = config.format.unwrap_or(if has_extension(path, "json") {
            InputFormat::Json
        } else {
            InputFormat::Csv
        });
        let records = parse_records(&raw, format)
            .with_context(|| format!("cannot parse {}", path.display()))?;
        let before = records.len();
        let records: Vec<_> = records
            .into_iter()
            .filter(|r| config.min_pub_year.is_none_or(|y| r.year >= y))
            .filter(|r| config.max_pub_year.is_none_or(|y| r.year <= y))
            .collect();
        filtered += before - records.len();

        let mut mapped = Vec::with_capacity(records.len());
        for rec in sort_chronological(records) {
            let mncs =
                resolve_mncs(&rec, &baselines).with_context(|| format!("in {}", path.display()))?;
            mapped.push(map_record(&rec, mncs, &schema)?);
        }
        segments.push(schedule(&mapped, &timing)?);
        all_mapped.extend(mapped);
    }

    let timeline = concat(&segments, timing.segment_gap)?;
    Ok(Track {
        schema,
        timing,
        segments,
        timeline,
        mapped: all_mapped,
        filtered,
    })
}

pub fn render_track(track: &Track, seed: u64, threads: Option<usize>) -> Result<AudioBuffer> {
    Ok(match threads {
        Some(n) => synthesis::render_with_threads(&track.timeline, &track.schema, seed, n)?,
        None => synthesis::render(&track.timeline, &track.schema, seed)?,
    })
}

/// Writes all files via temporaries renamed into place once every output has
/// been produced; on failure no output (or temporary) is left behind.
fn write_all(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    let mut staged: Vec<(PathBuf, &Path)> = Vec::new();
    let cleanup = |staged: &[(PathBuf, &Path)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (path, bytes) in files {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(format!(".{}.partial", std::process::id()));
        let tmp = path.with_file_name(name);
        if let Err(e) = fs::write(&tmp, bytes) {
            let _ = fs::remove_file(&tmp);
            cleanup(&staged);
            return Err(e).with_context(|| format!("cannot write {}", path.display()));
        }
        staged.push((tmp, path));
    }
    for (i, (tmp, path)) in staged.iter().enumerate() {
        if let Err(e) = fs::rename(tmp, path) {
            cleanup(&staged[i..]);
            for (_, done) in &staged[..i] {
                let _ = fs::remove_file(done);
            }
            return Err(e).with_context(|| format!("cannot write {}", path.display()));
        }
    }
    Ok(())
}

/// Runs the whole pipeline and writes the requested outputs.
pub fn run(config: &RunConfig) -> Result<Summary> {
    let track = build_track(config)?;
    let mut files = Vec::new();
    if let Some(p) = &config.out_wav {
        let audio = render_track(&track, config.seed, config.threads)?;
        files.push((p.clone(), export::write_wav(&audio)));
    }
    if let Some(p) = &config.out_midi {
        files.push((p.clone(), export::write_midi(&track.timeline)));
    }
    if let Some(p) = &config.out_log {
        let log =
            export::write_event_log(&track.timeline, &track.mapped, &track.schema, &track.timing)?;
        files.push((p.clone(), log));
    }
    if let Some(p) = &config.out_report {
        files.push((
            p.clone(),
            export::write_mapping_report(&track.report_rows())?,
        ));
    }
    write_all(&files)?;
    Ok(track.summary())
}
