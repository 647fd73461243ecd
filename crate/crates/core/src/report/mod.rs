//! End-to-end evaluation runs and the tables and plots they produce.
//!
//! A run scores every configured hypothesis file, builds WER-vs-SNR curves,
//! measures effective SNR gains, correlates per-word error rates with MaFI
//! norms and writes a bundle of CSV, Markdown, JSON and SVG files. The bundle
//! holds no timestamps or absolute paths, so identical inputs give
//! byte-identical outputs.

mod config;
mod svg;
mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gaincurve::{gain_report, CurvePoint, GainCell, GainResult, SystemCurves, WerCurve};
use crate::mafi::{self, load_norms, permutation_p, CorrelationResult, MafiEntry};
use crate::scoring::io::{iwer_csv, read_transcripts, score_pairs, TranscriptError, Transcripts};
use crate::scoring::{iwer_table, relative_increase, ErrorCounts, WordStats};
use crate::util::{derive_seed, write_atomic};

pub use config::{
    expand, path_component, snr_key, ConfigError, DatasetConfig, EvalConfig, MafiSettings,
    OcclusionSettings, SystemConfig, WerSource, SNR_PLACEHOLDER,
};
pub use svg::{render_curves_svg, Axes, PlotArea, PlotError, PlotOptions};
pub use table::{parse_csv_table, render_table, Cell, TableError, TableStyle};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{file}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Data {
        file: String,
        line: Option<usize>,
        message: String,
    },
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl RunError {
    fn data(file: &str, message: impl fmt::Display) -> Self {
        RunError::Data {
            file: file.to_string(),
            line: None,
            message: message.to_string(),
        }
    }

    fn transcript(file: &str, e: TranscriptError) -> Self {
        let line = match &e {
            TranscriptError::MalformedLine { line, .. }
            | TranscriptError::DuplicateUtterance { line, .. }
            | TranscriptError::BadRecord { line, .. } => Some(*line),
            _ => None,
        };
        RunError::Data {
            file: file.to_string(),
            line,
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Data { .. } | RunError::Output { .. } => EXIT_DATA,
        }
    }

    /// Machine-readable form for stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let (kind, file, line) = match self {
            RunError::Config(e) => ("config", None, e.line()),
            RunError::Data { file, line, .. } => ("data", Some(file.clone()), *line),
            RunError::Output { path, .. } => ("output", Some(path.clone()), None),
        };
        serde_json::json!({
            "error": kind,
            "exit_code": self.exit_code(),
            "file": file,
            "line": line,
            "message": self.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    AO,
    AV,
    VO,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::AO => "AO",
            Mode::AV => "AV",
            Mode::VO => "VO",
        })
    }
}

/// Corpus WER of one hypothesis file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WerEntry {
    pub dataset: String,
    pub system: String,
    pub mode: Mode,
    pub snr_db: Option<f64>,
    pub hypotheses: String,
    #[serde(flatten)]
    pub counts: ErrorCounts,
    /// Percent.
    pub wer: f64,
}

/// WERs without occlusion and with initial/middle occlusion, with relative
/// increases in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcclusionRow {
    pub dataset: String,
    pub system: String,
    pub none: f64,
    pub initial: Option<f64>,
    pub middle: Option<f64>,
    pub initial_increase: Option<f64>,
    pub middle_increase: Option<f64>,
    pub note: Option<String>,
}

impl OcclusionRow {
    pub fn new(
        dataset: impl Into<String>,
        system: impl Into<String>,
        none: f64,
        initial: Option<f64>,
        middle: Option<f64>,
        note: Option<String>,
    ) -> Self {
        let inc = |w: Option<f64>| w.and_then(|w| relative_increase(none, w).ok());
        Self {
            dataset: dataset.into(),
            system: system.into(),
            none,
            initial,
            middle,
            initial_increase: inc(initial),
            middle_increase: inc(middle),
            note,
        }
    }
}

/// One MaFI-vs-IWER correlation; `error` explains a missing result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub dataset: String,
    pub system: String,
    pub mode: Mode,
    pub snr_db: Option<f64>,
    pub result: Option<CorrelationResult>,
    pub permutation_p: Option<f64>,
    pub error: Option<String>,
}

impl CorrelationEntry {
    pub fn cell(&self) -> Cell {
        match &self.result {
            Some(r) => Cell::Correlation { r: r.r, p: r.p },
            None => Cell::Missing,
        }
    }
}

/// Full-precision results of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub wer: Vec<WerEntry>,
    pub gains: Vec<GainCell>,
    pub occlusion: Vec<OcclusionRow>,
    pub correlations: Vec<CorrelationEntry>,
}

/// Where a row of an output file came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub output: String,
    pub key: String,
    pub operation: String,
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Written files, relative to the output directory, in write order.
    pub files: Vec<String>,
    pub summary: Summary,
}

fn snr_cell(snr: Option<f64>) -> Cell {
    snr.map(|s| Cell::Text(snr_key(s)))
        .unwrap_or(Cell::Text("-".into()))
}

/// Corpus WER table, WERs rounded to one decimal.
pub fn wer_table(entries: &[WerEntry], style: TableStyle) -> Result<String, TableError> {
    let header = [
        "dataset", "system", "mode", "snr_db", "S", "D", "I", "N", "wer",
    ];
    let rows: Vec<Vec<Cell>> = entries
        .iter()
        .map(|e| {
            vec![
                e.dataset.as_str().into(),
                e.system.as_str().into(),
                e.mode.to_string().into(),
                snr_cell(e.snr_db),
                e.counts.subs.to_string().into(),
                e.counts.dels.to_string().into(),
                e.counts.ins.to_string().into(),
                e.counts.ref_words.to_string().into(),
                Cell::number(e.wer, 1),
            ]
        })
        .collect();
    render_table(&header, &rows, style)
}

/// Gain table; bounded gains are lower bounds, unavailable cells say why.
pub fn gain_table(cells: &[GainCell], style: TableStyle) -> Result<String, TableError> {
    let header = [
        "dataset",
        "system",
        "ref_snr_db",
        "ref_wer",
        "crossing_snr_db",
        "gain_db",
        "status",
    ];
    let rows: Vec<Vec<Cell>> = cells
        .iter()
        .map(|c| {
            let mut row: Vec<Cell> = vec![
                c.dataset.as_str().into(),
                c.system.as_str().into(),
                snr_key(c.ref_snr_db).into(),
            ];
            match &c.result {
                Ok(g) => row.extend([
                    Cell::number(g.ref_wer, 1),
                    Cell::number(g.crossing_snr_db, 1),
                    Cell::number(g.gain_db, 1),
                    Cell::from(if g.bounded { "lower bound" } else { "ok" }),
                ]),
                Err(e) => row.extend([
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Text(format!("unavailable: {e}")),
                ]),
            }
            row
        })
        .collect();
    render_table(&header, &rows, style)
}

/// Occlusion comparison table.
pub fn occlusion_table(rows: &[OcclusionRow], style: TableStyle) -> Result<String, TableError> {
    let header = [
        "dataset",
        "system",
        "none",
        "initial",
        "middle",
        "initial_increase",
        "middle_increase",
        "note",
    ];
    let opt = |v: Option<f64>, pct: bool| match v {
        Some(v) if pct => Cell::percent(v, 1),
        Some(v) => Cell::number(v, 1),
        None => Cell::Missing,
    };
    let body: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                r.dataset.as_str().into(),
                r.system.as_str().into(),
                Cell::number(r.none, 1),
                opt(r.initial, false),
                opt(r.middle, false),
                opt(r.initial_increase, true),
                opt(r.middle_increase, true),
                r.note.clone().unwrap_or_default().into(),
            ]
        })
        .collect();
    render_table(&header, &body, style)
}

/// Long-form correlation table.
pub fn correlation_table(
    entries: &[CorrelationEntry],
    style: TableStyle,
) -> Result<String, TableError> {
    let header = ["dataset", "system", "mode", "snr_db", "r", "n", "p", "cell"];
    let rows: Vec<Vec<Cell>> = entries
        .iter()
        .map(|e| {
            let (r, n, p) = match &e.result {
                Some(c) => (
                    Cell::number(c.r, 3),
                    Cell::Text(c.n.to_string()),
                    Cell::Text(format!("{:.3e}", c.p)),
                ),
                None => (Cell::Missing, Cell::Missing, Cell::Missing),
            };
            vec![
                e.dataset.as_str().into(),
                e.system.as_str().into(),
                e.mode.to_string().into(),
                snr_cell(e.snr_db),
                r,
                n,
                p,
                e.cell(),
            ]
        })
        .collect();
    render_table(&header, &rows, style)
}

/// Wide correlation table: one row per dataset, system and mode, one column
/// per SNR. A VO row has no SNR, so its single cell fills every column.
pub fn correlation_grid(
    entries: &[CorrelationEntry],
    snrs: &[f64],
    style: TableStyle,
) -> Result<String, TableError> {
    let mut header = vec![
        "dataset".to_string(),
        "system".to_string(),
        "mode".to_string(),
    ];
    header.extend(snrs.iter().map(|s| format!("{} dB", snr_key(*s))));
    let mut grouped: Vec<((String, String, Mode), BTreeMap<String, Cell>)> = Vec::new();
    for e in entries {
        let key = (e.dataset.clone(), e.system.clone(), e.mode);
        let pos = match grouped.iter().position(|(k, _)| *k == key) {
            Some(p) => p,
            None => {
                grouped.push((key, BTreeMap::new()));
                grouped.len() - 1
            }
        };
        let slot = e.snr_db.map(snr_key).unwrap_or_default();
        grouped[pos].1.insert(slot, e.cell());
    }
    let rows: Vec<Vec<Cell>> = grouped
        .into_iter()
        .map(|((d, s, m), cells)| {
            let mut row: Vec<Cell> = vec![d.into(), s.into(), m.to_string().into()];
            for snr in snrs {
                let cell = cells
                    .get(&snr_key(*snr))
                    .or_else(|| cells.get(""))
                    .cloned()
                    .unwrap_or(Cell::Text(String::new()));
                row.push(cell);
            }
            row
        })
        .collect();
    render_table(&header, &rows, style)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum JobKind {
    Curve(Mode, f64),
    Vo,
    Occlusion(usize),
}

#[derive(Debug, Clone)]
struct Job {
    dataset: usize,
    system: usize,
    kind: JobKind,
    path: String,
}

struct Scored {
    counts: ErrorCounts,
    iwer: Vec<WordStats>,
}

fn score_file(cfg: &EvalConfig, refs: &Transcripts, path: &str) -> Result<Scored, RunError> {
    let hyps = read_transcripts(&cfg.resolve(path)).map_err(|e| RunError::transcript(path, e))?;
    let scored = score_pairs(refs, &hyps).map_err(|e| RunError::transcript(path, e))?;
    let alignments = scored.iter().map(|s| &s.alignment);
    let counts = ErrorCounts::sum(alignments.clone());
    Ok(Scored {
        counts,
        iwer: iwer_table(alignments, 1),
    })
}

fn build_jobs(cfg: &EvalConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (di, d) in cfg.datasets.iter().enumerate() {
        for (si, s) in d.systems.iter().enumerate() {
            for (mode, template) in [(Mode::AO, &s.ao), (Mode::AV, &s.av)] {
                if let Some(t) = template {
                    for &snr in &cfg.snrs {
                        jobs.push(Job {
                            dataset: di,
                            system: si,
                            kind: JobKind::Curve(mode, snr),
                            path: expand(t, snr),
                        });
                    }
                }
            }
            if let Some(vo) = &s.vo {
                jobs.push(Job {
                    dataset: di,
                    system: si,
                    kind: JobKind::Vo,
                    path: vo.clone(),
                });
            }
            if let Some(o) = &s.occlusion {
                let sources = [Some(&o.none), o.initial.as_ref(), o.middle.as_ref()];
                for (k, src) in sources.into_iter().enumerate() {
                    if let Some(WerSource::File(p)) = src {
                        jobs.push(Job {
                            dataset: di,
                            system: si,
                            kind: JobKind::Occlusion(k),
                            path: p.clone(),
                        });
                    }
                }
            }
        }
    }
    jobs
}

struct Bundle {
    dir: PathBuf,
    files: Vec<String>,
}

impl Bundle {
    fn write(&mut self, rel: &str, text: &str) -> Result<(), RunError> {
        let path = self.dir.join(rel);
        write_atomic(&path, text.as_bytes()).map_err(|e| RunError::Output {
            path: rel.to_string(),
            message: e.to_string(),
        })?;
        self.files.push(rel.to_string());
        Ok(())
    }
}

fn table_err(e: TableError) -> RunError {
    RunError::Output {
        path: "table".into(),
        message: e.to_string(),
    }
}

fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn wer_curve(label: String, points: &[(f64, f64)]) -> Result<WerCurve, RunError> {
    // insertions can push WER past 100%; curves are bounded to [0, 100]
    let pts = points
        .iter()
        .map(|&(snr_db, wer)| CurvePoint {
            snr_db,
            wer: wer.min(100.0),
        })
        .collect();
    WerCurve::new(label.clone(), pts).map_err(|e| RunError::data(&label, e))
}

/// Runs the evaluation described by `cfg` and writes the bundle into
/// `cfg.out_dir()`.
pub fn run(cfg: &EvalConfig) -> Result<RunOutput, RunError> {
    let refs: Vec<Transcripts> = cfg
        .datasets
        .par_iter()
        .map(|d| {
            read_transcripts(&cfg.resolve(&d.refs)).map_err(|e| RunError::transcript(&d.refs, e))
        })
        .collect::<Result<_, _>>()?;
    let norms: Option<Vec<MafiEntry>> = match &cfg.mafi {
        Some(m) => {
            Some(load_norms(&cfg.resolve(&m.norms)).map_err(|e| RunError::data(&m.norms, e))?)
        }
        None => None,
    };

    let jobs = build_jobs(cfg);
    let scored: Vec<Scored> = jobs
        .par_iter()
        .map(|j| score_file(cfg, &refs[j.dataset], &j.path))
        .collect::<Result<_, _>>()?;

    let mut bundle = Bundle {
        dir: cfg.out_dir(),
        files: Vec::new(),
    };
    let mut provenance: Vec<ProvenanceEntry> = Vec::new();

    // WER table, in job order
    let mut wer = Vec::new();
    for (j, s) in jobs.iter().zip(&scored) {
        let (mode, snr) = match j.kind {
            JobKind::Curve(m, snr) => (m, Some(snr)),
            JobKind::Vo => (Mode::VO, None),
            JobKind::Occlusion(_) => continue,
        };
        let d = &cfg.datasets[j.dataset];
        let entry = WerEntry {
            dataset: d.name.clone(),
            system: d.systems[j.system].name.clone(),
            mode,
            snr_db: snr,
            hypotheses: j.path.clone(),
            counts: s.counts,
            wer: s.counts.wer().map_err(|e| RunError::data(&d.refs, e))?,
        };
        provenance.push(ProvenanceEntry {
            output: "wer.csv".into(),
            key: format!(
                "{}/{}/{}/{}",
                entry.dataset,
                entry.system,
                mode,
                snr.map(snr_key).unwrap_or_else(|| "-".into())
            ),
            operation: "corpus_wer".into(),
            inputs: vec![d.refs.clone(), j.path.clone()],
        });
        wer.push(entry);
    }
    bundle.write(
        "wer.csv",
        &wer_table(&wer, TableStyle::Csv).map_err(table_err)?,
    )?;
    bundle.write(
        "wer.md",
        &wer_table(&wer, TableStyle::Markdown).map_err(table_err)?,
    )?;

    // gains
    let mut systems = Vec::new();
    let mut curve_inputs: Vec<Vec<String>> = Vec::new();
    for d in &cfg.datasets {
        for s in &d.systems {
            let (Some(_), Some(_)) = (&s.ao, &s.av) else {
                continue;
            };
            let points = |mode: Mode| -> Vec<(f64, f64)> {
                wer.iter()
                    .filter(|e| e.dataset == d.name && e.system == s.name && e.mode == mode)
                    .map(|e| (e.snr_db.unwrap_or_default(), e.wer))
                    .collect()
            };
            systems.push(SystemCurves {
                system: s.name.clone(),
                dataset: d.name.clone(),
                ao: wer_curve(format!("{} AO", s.name), &points(Mode::AO))?,
                av: wer_curve(format!("{} AV", s.name), &points(Mode::AV))?,
            });
            let mut inputs = vec![d.refs.clone()];
            for t in [&s.ao, &s.av].into_iter().flatten() {
                inputs.extend(cfg.snrs.iter().map(|&snr| expand(t, snr)));
            }
            curve_inputs.push(inputs);
        }
    }
    let gains = gain_report(&systems, &cfg.ref_snrs);
    for (i, c) in gains.iter().enumerate() {
        provenance.push(ProvenanceEntry {
            output: "gains.csv".into(),
            key: format!("{}/{}/{}", c.dataset, c.system, snr_key(c.ref_snr_db)),
            operation: "effective_snr_gain".into(),
            inputs: curve_inputs[i / cfg.ref_snrs.len()].clone(),
        });
    }
    bundle.write(
        "gains.csv",
        &gain_table(&gains, TableStyle::Csv).map_err(table_err)?,
    )?;
    bundle.write(
        "gains.md",
        &gain_table(&gains, TableStyle::Markdown).map_err(table_err)?,
    )?;

    // occlusion
    let mut occlusion = Vec::new();
    for (di, d) in cfg.datasets.iter().enumerate() {
        for (si, s) in d.systems.iter().enumerate() {
            let Some(o) = &s.occlusion else { continue };
            let mut inputs = Vec::new();
            let mut value = |k: usize, src: Option<&WerSource>| -> Result<Option<f64>, RunError> {
                match src {
                    None => Ok(None),
                    Some(WerSource::Literal(v)) => Ok(Some(*v)),
                    Some(WerSource::File(p)) => {
                        let idx = jobs
                            .iter()
                            .position(|j| {
                                j.dataset == di && j.system == si && j.kind == JobKind::Occlusion(k)
                            })
                            .expect("occlusion job scheduled");
                        inputs.push(p.clone());
                        let w = scored[idx]
                            .counts
                            .wer()
                            .map_err(|e| RunError::data(&d.refs, e))?;
                        Ok(Some(w))
                    }
                }
            };
            let none = value(0, Some(&o.none))?.unwrap_or_default();
            let initial = value(1, o.initial.as_ref())?;
            let middle = value(2, o.middle.as_ref())?;
            if !inputs.is_empty() {
                inputs.insert(0, d.refs.clone());
            }
            provenance.push(ProvenanceEntry {
                output: "occlusion.csv".into(),
                key: format!("{}/{}", d.name, s.name),
                operation: "relative_increase".into(),
                inputs,
            });
            occlusion.push(OcclusionRow::new(
                &d.name,
                &s.name,
                none,
                initial,
                middle,
                o.note.clone(),
            ));
        }
    }
    if !occlusion.is_empty() {
        bundle.write(
            "occlusion.csv",
            &occlusion_table(&occlusion, TableStyle::Csv).map_err(table_err)?,
        )?;
        bundle.write(
            "occlusion.md",
            &occlusion_table(&occlusion, TableStyle::Markdown).map_err(table_err)?,
        )?;
    }

    // per-word error rates
    for (j, s) in jobs.iter().zip(&scored) {
        let name = match j.kind {
            JobKind::Curve(m, snr) => format!("{m}_{}", snr_key(snr)),
            JobKind::Vo => "VO".to_string(),
            JobKind::Occlusion(_) => continue,
        };
        let d = &cfg.datasets[j.dataset];
        let rel = format!(
            "iwer/{}/{}/{name}.csv",
            path_component(&d.name),
            path_component(&d.systems[j.system].name)
        );
        let table: Vec<WordStats> = s
            .iwer
            .iter()
            .filter(|w| w.count >= cfg.min_count.max(1))
            .cloned()
            .collect();
        bundle.write(&rel, &iwer_csv(&table))?;
        provenance.push(ProvenanceEntry {
            output: rel,
            key: "*".into(),
            operation: format!("iwer_table(min_count={})", cfg.min_count),
            inputs: vec![d.refs.clone(), j.path.clone()],
        });
    }

    // MaFI correlations
    let mut correlations = Vec::new();
    if let (Some(norms), Some(settings)) = (&norms, &cfg.mafi) {
        let snrs = cfg.mafi_snrs();
        let mut targets: Vec<usize> = Vec::new();
        for (di, d) in cfg.datasets.iter().enumerate() {
            for si in 0..d.systems.len() {
                for mode in [Mode::AO, Mode::VO, Mode::AV] {
                    for (idx, j) in jobs.iter().enumerate() {
                        if j.dataset != di || j.system != si {
                            continue;
                        }
                        let wanted = match j.kind {
                            JobKind::Curve(m, snr) => m == mode && snrs.contains(&snr),
                            JobKind::Vo => mode == Mode::VO,
                            JobKind::Occlusion(_) => false,
                        };
                        if wanted {
                            targets.push(idx);
                        }
                    }
                }
            }
        }
        correlations = targets
            .par_iter()
            .enumerate()
            .map(|(n, &idx)| {
                let j = &jobs[idx];
                let d = &cfg.datasets[j.dataset];
                let (mode, snr) = match j.kind {
                    JobKind::Curve(m, s) => (m, Some(s)),
                    _ => (Mode::VO, None),
                };
                let iwer = &scored[idx].iwer;
                let (result, error) = match mafi::correlate(norms, iwer, cfg.min_count) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                let permutation_p = if settings.permutations > 0 && result.is_some() {
                    let pairs = mafi::paired_samples(norms, iwer, cfg.min_count);
                    let x: Vec<f64> = pairs.iter().map(|p| p.1).collect();
                    let y: Vec<f64> = pairs.iter().map(|p| p.2).collect();
                    permutation_p(
                        &x,
                        &y,
                        settings.permutations,
                        derive_seed(cfg.seed, n as u64),
                    )
                    .ok()
                } else {
                    None
                };
                CorrelationEntry {
                    dataset: d.name.clone(),
                    system: d.systems[j.system].name.clone(),
                    mode,
                    snr_db: snr,
                    result,
                    permutation_p,
                    error,
                }
            })
            .collect();
        for (&idx, c) in targets.iter().zip(&correlations) {
            let d = &cfg.datasets[jobs[idx].dataset];
            provenance.push(ProvenanceEntry {
                output: "correlations.json".into(),
                key: format!(
                    "{}/{}/{}/{}",
                    c.dataset,
                    c.system,
                    c.mode,
                    c.snr_db.map(snr_key).unwrap_or_else(|| "-".into())
                ),
                operation: format!("pearson(mafi, iwer, min_count={})", cfg.min_count),
                inputs: vec![
                    settings.norms.clone(),
                    d.refs.clone(),
                    jobs[idx].path.clone(),
                ],
            });
        }
        bundle.write("correlations.json", &json_text(&correlations))?;
        bundle.write(
            "correlations.csv",
            &correlation_table(&correlations, TableStyle::Csv).map_err(table_err)?,
        )?;
        bundle.write(
            "correlations.md",
            &correlation_grid(&correlations, &snrs, TableStyle::Markdown).map_err(table_err)?,
        )?;
    }

    // one plot per dataset
    for d in &cfg.datasets {
        let mut curves = Vec::new();
        let mut marks: Vec<GainResult> = Vec::new();
        for (s, c) in systems.iter().zip(gains.chunks(cfg.ref_snrs.len())) {
            if s.dataset != d.name {
                continue;
            }
            curves.push(s.ao.clone());
            curves.push(s.av.clone());
            if let Some(Ok(g)) = c.first().map(|c| &c.result) {
                marks.push(*g);
            }
        }
        if curves.is_empty() {
            continue;
        }
        let opts = PlotOptions {
            title: Some(d.name.clone()),
            ..Default::default()
        };
        let svg =
            render_curves_svg(&curves, &marks, &opts).map_err(|e| RunError::data(&d.name, e))?;
        let rel = format!("plots/{}.svg", path_component(&d.name));
        bundle.write(&rel, &svg)?;
        provenance.push(ProvenanceEntry {
            output: rel,
            key: "*".into(),
            operation: "render_curves_svg".into(),
            inputs: vec!["wer.csv".into(), "gains.csv".into()],
        });
    }

    let summary = Summary {
        wer,
        gains,
        occlusion,
        correlations,
    };
    bundle.write("summary.json", &json_text(&summary))?;
    bundle.write("provenance.json", &json_text(&provenance))?;
    Ok(RunOutput {
        files: bundle.files,
        summary,
    })
}

/// Loads `path` and runs it, optionally redirecting the output directory.
pub fn run_config_file(path: &Path, out_override: Option<&Path>) -> Result<RunOutput, RunError> {
    let mut cfg = EvalConfig::load(path)?;
    if let Some(out) = out_override {
        cfg.out = std::env::current_dir()
            .map(|cwd| cwd.join(out))
            .unwrap_or_else(|_| out.to_path_buf());
    }
    run(&cfg)
}
