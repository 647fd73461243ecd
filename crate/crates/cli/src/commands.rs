use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use avsr_gauge_core::gaincurve::{gain_report, parse_curve_csv, SystemCurves};
use avsr_gauge_core::mafi::{self, g2p, load_norms, FeatureTable, Lexicon};
use avsr_gauge_core::noisemix::{generate_pink_noise, mix_at_snr, MixSpec, PeakPolicy};
use avsr_gauge_core::occlusion::{self, apply_dir, parse_ctm, parse_textgrid, ManifestFile};
use avsr_gauge_core::report::{
    self, gain_table, occlusion_table, render_curves_svg, snr_key, OcclusionRow, PlotOptions,
    RunError, TableStyle,
};
use avsr_gauge_core::scoring::io::{
    parse_iwer_csv, read_transcripts, score_pairs, write_scoring_outputs,
};
use avsr_gauge_core::scoring::Token;
use avsr_gauge_core::simkit::{parse_sim_config, sweep, synthetic_corpus};
use avsr_gauge_core::util::{derive_seed, write_atomic};
use avsr_gauge_core::wav::{read_wav, write_wav};
use avsr_gauge_core::{effective_snr_gain, gaincurve::format_curve_csv};

use crate::{CurveArgs, Global};

/// A failed command: exit code plus a message for the JSON error report.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    kind: &'static str,
    file: Option<String>,
    line: Option<usize>,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Display) -> Self {
        Self {
            code: 2,
            kind: "config",
            file: None,
            line: None,
            message: message.to_string(),
        }
    }

    fn data(file: impl AsRef<Path>, message: impl Display) -> Self {
        Self {
            code: 3,
            kind: "data",
            file: Some(file.as_ref().display().to_string()),
            line: None,
            message: message.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind,
            "exit_code": self.code,
            "file": self.file,
            "line": self.line,
            "message": self.message,
        })
        .to_string()
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        let v = e.to_json();
        Self {
            code: e.exit_code() as u8,
            kind: if e.exit_code() == report::EXIT_CONFIG {
                "config"
            } else {
                "data"
            },
            file: v["file"].as_str().map(String::from),
            line: v["line"].as_u64().map(|l| l as usize),
            message: e.to_string(),
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::data(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(|e| CliError::data(path, e))
}

pub fn run(g: &Global, config: &Path) -> Result<(), CliError> {
    let out = match g.out.as_slice() {
        [] => None,
        [p] => Some(p.as_path()),
        _ => return Err(CliError::usage("--out takes one directory")),
    };
    let mut cfg = report::EvalConfig::load(config).map_err(RunError::from)?;
    if let Some(out) = out {
        cfg.out = std::env::current_dir()
            .map(|d| d.join(out))
            .unwrap_or_else(|_| out.to_path_buf());
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    let result = report::run(&cfg)?;
    for f in &result.files {
        println!("{}", cfg.out_dir().join(f).display());
    }
    Ok(())
}

pub fn noise_gen(g: &Global, samples: usize, rate: u32) -> Result<(), CliError> {
    let out = g.out_one("WAV file")?;
    let noise = generate_pink_noise(samples, rate, g.seed()).map_err(CliError::usage)?;
    write_wav(out, &noise).map_err(|e| CliError::data(out, e))?;
    println!("{}", out.display());
    Ok(())
}

fn wav_inputs(speech: &Path) -> Result<Vec<PathBuf>, CliError> {
    if speech.is_file() {
        return Ok(vec![speech.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(speech)
        .map_err(|e| CliError::data(speech, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::data(speech, "no .wav files found"));
    }
    Ok(files)
}

pub fn noise_mix(
    g: &Global,
    speech: &Path,
    noise: Option<&Path>,
    snrs: &[f64],
    peak: &str,
) -> Result<(), CliError> {
    let out = g.out_one("directory")?;
    let policy: PeakPolicy = peak.parse().map_err(CliError::usage)?;
    let inputs = wav_inputs(speech)?;
    let noise = match noise {
        Some(p) => Some(read_wav(p).map_err(|e| CliError::data(p, e))?),
        None => None,
    };
    let mut manifest = csv::Writer::from_writer(Vec::new());
    manifest
        .write_record(["input_path", "snr_db", "noise_scale", "mixture_gain"])
        .map_err(|e| CliError::data(out, e))?;
    for (i, input) in inputs.iter().enumerate() {
        let audio = read_wav(input).map_err(|e| CliError::data(input, e))?;
        let noise = match &noise {
            Some(n) => n.clone(),
            None => generate_pink_noise(
                audio.len(),
                audio.sample_rate(),
                derive_seed(g.seed(), i as u64),
            )
            .map_err(|e| CliError::data(input, e))?,
        };
        let stem = input.file_stem().unwrap_or_default().to_string_lossy();
        for &snr in snrs {
            let spec = MixSpec {
                target_snr_db: snr,
                seed: g.seed(),
                peak_policy: policy,
            };
            let mix = mix_at_snr(&audio, &noise, &spec).map_err(|e| CliError::data(input, e))?;
            let path = out
                .join(format!("snr_{}", snr_key(snr)))
                .join(format!("{stem}.wav"));
            write_wav(&path, &mix.audio).map_err(|e| CliError::data(&path, e))?;
            manifest
                .write_record([
                    input.display().to_string(),
                    snr.to_string(),
                    mix.noise_scale.to_string(),
                    mix.mixture_gain.to_string(),
                ])
                .map_err(|e| CliError::data(out, e))?;
        }
    }
    let bytes = manifest.into_inner().map_err(|e| CliError::data(out, e))?;
    let path = out.join("mix_manifest.csv");
    write_atomic(&path, &bytes).map_err(|e| CliError::data(&path, e))?;
    println!("{}", path.display());
    Ok(())
}

pub fn score(g: &Global, reference: &Path, hyp: &Path, min_count: usize) -> Result<(), CliError> {
    let out = g.out_one("directory")?;
    let refs = read_transcripts(reference).map_err(|e| CliError::data(reference, e))?;
    let hyps = read_transcripts(hyp).map_err(|e| CliError::data(hyp, e))?;
    let scored = score_pairs(&refs, &hyps).map_err(|e| CliError::data(hyp, e))?;
    let summary =
        write_scoring_outputs(&scored, min_count, out).map_err(|e| CliError::data(out, e))?;
    println!(
        "WER {}% ({} words, {} utterances)",
        summary.wer_display, summary.counts.ref_words, summary.utterances
    );
    Ok(())
}

fn load_curves(c: &CurveArgs) -> Result<SystemCurves, CliError> {
    let (Some(ao), Some(av)) = (&c.ao, &c.av) else {
        return Err(CliError::usage("--ao and --av are required"));
    };
    let ao_curve = parse_curve_csv(&read_text(ao)?, &ao.display().to_string())
        .map_err(|e| CliError::data(ao, e))?;
    let av_curve = parse_curve_csv(&read_text(av)?, &av.display().to_string())
        .map_err(|e| CliError::data(av, e))?;
    Ok(SystemCurves {
        system: ao_curve.label().to_string(),
        dataset: String::new(),
        ao: ao_curve,
        av: av_curve,
    })
}

fn ref_snrs(c: &CurveArgs) -> Vec<f64> {
    if c.ref_snr.is_empty() {
        vec![0.0]
    } else {
        c.ref_snr.clone()
    }
}

pub fn gain(c: &CurveArgs, json: bool) -> Result<(), CliError> {
    let pair = load_curves(c)?;
    let cells = gain_report(std::slice::from_ref(&pair), &ref_snrs(c));
    if json {
        let v = serde_json::to_string_pretty(&cells).map_err(CliError::usage)?;
        println!("{v}");
    } else {
        print!(
            "{}",
            gain_table(&cells, TableStyle::Markdown).map_err(CliError::usage)?
        );
    }
    // an unavailable gain for the only pair is a data problem
    if cells.iter().all(|c| c.result.is_err()) {
        let reason = cells[0].result.as_ref().err().cloned().unwrap_or_default();
        return Err(CliError::data(
            c.av.as_deref().unwrap_or(Path::new("")),
            reason,
        ));
    }
    Ok(())
}

pub fn gain_plot(g: &Global, c: &CurveArgs) -> Result<(), CliError> {
    let out = g.out_one("SVG file")?;
    let pair = load_curves(c)?;
    let gains: Vec<_> = ref_snrs(c)
        .iter()
        .filter_map(|&r| effective_snr_gain(&pair.ao, &pair.av, r).ok())
        .collect();
    let svg = render_curves_svg(&[pair.ao, pair.av], &gains, &PlotOptions::default())
        .map_err(CliError::usage)?;
    write_text(out, &svg)?;
    println!("{}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn occlude_plan(
    g: &Global,
    align: &Path,
    fps: f64,
    position: &str,
    region: &str,
    fill: &str,
    tier: &str,
    utt: Option<String>,
) -> Result<(), CliError> {
    let out = g.out_one("manifest file")?;
    let position = position.parse().map_err(CliError::usage)?;
    let region = region.parse().map_err(CliError::usage)?;
    let fill = fill.parse().map_err(CliError::usage)?;
    let text = read_text(align)?;
    let is_textgrid = align
        .extension()
        .is_some_and(|x| x.eq_ignore_ascii_case("textgrid"));
    let utterances = if is_textgrid {
        let id = utt.unwrap_or_else(|| {
            align
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned()
        });
        let spans = parse_textgrid(&text, tier, &id).map_err(|e| CliError::data(align, e))?;
        [(id, spans)].into_iter().collect()
    } else {
        parse_ctm(&text).map_err(|e| CliError::data(align, e))?
    };
    let manifest = occlusion::plan_all(&utterances, fps, position, region, fill)
        .map_err(|e| CliError::data(align, e))?;
    write_text(out, &manifest.to_json())?;
    let windows: usize = manifest.manifests.iter().map(|m| m.windows.len()).sum();
    let skipped: usize = manifest.manifests.iter().map(|m| m.skipped.len()).sum();
    println!(
        "{} utterances, {windows} windows, {skipped} words too short to occlude",
        manifest.manifests.len()
    );
    Ok(())
}

pub fn occlude_apply(g: &Global, frames: &Path, manifest: &Path) -> Result<(), CliError> {
    let out = g.out_one("directory")?;
    let file =
        ManifestFile::from_json(&read_text(manifest)?).map_err(|e| CliError::data(manifest, e))?;
    // one utterance: frames sit directly in the directory; several: one
    // sub-directory per utterance id
    let single = file.manifests.len() == 1;
    let mut filled = 0;
    for m in &file.manifests {
        let (src, dst) = if single {
            (frames.to_path_buf(), out.to_path_buf())
        } else {
            (frames.join(&m.utt_id), out.join(&m.utt_id))
        };
        filled += apply_dir(&src, m, &dst).map_err(|e| CliError::data(&src, e))?;
    }
    println!("{filled} frames occluded");
    Ok(())
}

pub fn sim_sweep(g: &Global, config: &Path, refs: Option<&Path>) -> Result<(), CliError> {
    let [ao_out, av_out] = g.out.as_slice() else {
        return Err(CliError::usage("sim sweep needs --out AO.csv AV.csv"));
    };
    let text = read_text(config)?;
    let cfg = parse_sim_config(&text).map_err(|e| CliError {
        file: Some(config.display().to_string()),
        ..CliError::usage(e)
    })?;
    let seed = g.seed.unwrap_or(cfg.seed);
    let refs = match refs {
        Some(p) => read_transcripts(p).map_err(|e| CliError::data(p, e))?,
        None => synthetic_corpus(&cfg.corpus, seed).map_err(CliError::usage)?,
    };
    let (ao, av) = sweep(&cfg.audio_only(), &cfg.recognizer, &refs, &cfg.grid, seed)
        .map_err(|e| CliError::data(config, e))?;
    write_text(ao_out, &format_curve_csv(&ao))?;
    write_text(av_out, &format_curve_csv(&av))?;
    println!("{}\n{}", ao_out.display(), av_out.display());
    Ok(())
}

pub fn mafi_score(
    lexicon: Option<&Path>,
    features: Option<&Path>,
    target: &str,
    guesses: &[String],
) -> Result<(), CliError> {
    let table = match features {
        Some(p) => FeatureTable::parse(&read_text(p)?).map_err(|e| CliError::data(p, e))?,
        None => FeatureTable::shipped(),
    };
    let lexicon = match lexicon {
        Some(p) => Lexicon::parse(&read_text(p)?, table).map_err(|e| CliError::data(p, e))?,
        None => Lexicon::sample(),
    };
    let word =
        |w: &str| Token::normalized(w).ok_or_else(|| CliError::usage(format!("bad word `{w}`")));
    let segs = |w: &str| -> Result<_, CliError> {
        g2p(&word(w)?, &lexicon).map_err(|e| CliError::data("lexicon", e))
    };
    let target_segs = segs(target)?;
    let guess_segs = guesses
        .iter()
        .map(|g| segs(g))
        .collect::<Result<Vec<_>, _>>()?;
    let score = mafi::mafi_score(&target_segs, &guess_segs).map_err(CliError::usage)?;
    println!("{score}");
    Ok(())
}

pub fn mafi_correlate(
    g: &Global,
    norms: &Path,
    iwer: &Path,
    min_count: usize,
    permutations: Option<usize>,
) -> Result<(), CliError> {
    let norms_v = load_norms(norms).map_err(|e| CliError::data(norms, e))?;
    let table = parse_iwer_csv(&read_text(iwer)?, &iwer.display().to_string())
        .map_err(|e| CliError::data(iwer, e))?;
    let result =
        mafi::correlate(&norms_v, &table, min_count).map_err(|e| CliError::data(iwer, e))?;
    let perm = match permutations {
        Some(n) => {
            let pairs = mafi::paired_samples(&norms_v, &table, min_count);
            let x: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.2).collect();
            Some(mafi::permutation_p(&x, &y, n, g.seed()).map_err(CliError::usage)?)
        }
        None => None,
    };
    let json = serde_json::json!({
        "r": result.r,
        "n": result.n,
        "p": result.p,
        "stars": result.stars,
        "degenerate": result.degenerate,
        "cell": result.cell(),
        "permutation_p": perm,
        "min_count": min_count,
    });
    let text = format!(
        "{}\n",
        serde_json::to_string_pretty(&json).map_err(CliError::usage)?
    );
    match g.out.as_slice() {
        [] => print!("{text}"),
        [p] => {
            write_text(p, &text)?;
            println!("{}", result.cell());
        }
        _ => return Err(CliError::usage("--out takes one JSON file")),
    }
    Ok(())
}

pub fn report_occlusion(
    none: f64,
    initial: Option<f64>,
    middle: Option<f64>,
    note: Option<String>,
    dataset: &str,
    system: &str,
    style: &str,
) -> Result<(), CliError> {
    let style: TableStyle = style.parse().map_err(CliError::usage)?;
    let row = OcclusionRow::new(dataset, system, none, initial, middle, note);
    print!(
        "{}",
        occlusion_table(&[row], style).map_err(CliError::usage)?
    );
    Ok(())
}

pub fn report_plot(
    g: &Global,
    curves: &[PathBuf],
    y_max: Option<f64>,
    title: Option<String>,
) -> Result<(), CliError> {
    let out = g.out_one("SVG file")?;
    let parsed = curves
        .iter()
        .map(|p| {
            parse_curve_csv(&read_text(p)?, &p.display().to_string())
                .map_err(|e| CliError::data(p, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let opts = PlotOptions {
        title,
        y_range: y_max.map(|m| (0.0, m)),
        ..Default::default()
    };
    let svg = render_curves_svg(&parsed, &[], &opts).map_err(CliError::usage)?;
    write_text(out, &svg)?;
    println!("{}", out.display());
    Ok(())
}
