use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "avsr-gauge",
    version,
    about = "Measure what the visual stream buys an AVSR system"
)]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output location; a file or directory depending on the command
    /// (`sim sweep` takes two files).
    #[arg(long, global = true, num_args = 1..=2)]
    out: Vec<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a full evaluation described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate pink noise or mix noise into speech.
    #[command(subcommand)]
    Noise(NoiseCmd),
    /// Score hypotheses against references.
    Score(ScoreArgs),
    /// Effective SNR gain between audio-only and audio-visual curves.
    Gain(GainArgs),
    /// Plan and apply word-timed mouth occlusion.
    #[command(subcommand)]
    Occlude(OccludeCmd),
    /// Synthetic recognizer sweeps.
    #[command(subcommand)]
    Sim(SimCmd),
    /// MaFI scores and correlations.
    #[command(subcommand)]
    Mafi(MafiCmd),
    /// Stand-alone report tables and plots.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand, Debug)]
enum NoiseCmd {
    /// Write a pink-noise WAV file.
    Gen {
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 16_000)]
        rate: u32,
    },
    /// Mix noise into speech files at one or more SNRs.
    Mix {
        /// A WAV file or a directory of WAV files.
        #[arg(long)]
        speech: PathBuf,
        /// Noise WAV; pink noise is generated per file when omitted.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        snr: Vec<f64>,
        #[arg(long, default_value = "rescale")]
        peak: String,
    },
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long, default_value_t = avsr_gauge_core::scoring::DEFAULT_MIN_COUNT)]
    min_count: usize,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
struct GainArgs {
    #[command(subcommand)]
    plot: Option<GainPlotCmd>,
    #[command(flatten)]
    curves: CurveArgs,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Clone)]
struct CurveArgs {
    #[arg(long)]
    ao: Option<PathBuf>,
    #[arg(long)]
    av: Option<PathBuf>,
    #[arg(long = "ref-snr", allow_hyphen_values = true)]
    ref_snr: Vec<f64>,
}

#[derive(Subcommand, Debug)]
enum GainPlotCmd {
    /// Render both curves with the gain annotation as SVG (to `--out`).
    Plot(CurveArgs),
}

#[derive(Subcommand, Debug)]
enum OccludeCmd {
    /// Plan occlusion windows from a CTM or TextGrid alignment.
    Plan {
        #[arg(long)]
        align: PathBuf,
        #[arg(long, default_value_t = 25.0)]
        fps: f64,
        #[arg(long)]
        position: String,
        #[arg(long, default_value = "full-frame")]
        region: String,
        #[arg(long, default_value = "solid-gray")]
        fill: String,
        /// TextGrid tier holding the words.
        #[arg(long, default_value = "words")]
        tier: String,
        /// Utterance id for a TextGrid (defaults to the file stem).
        #[arg(long)]
        utt: Option<String>,
    },
    /// Apply a manifest to a directory of PNG frames.
    Apply {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum SimCmd {
    /// Simulate AO and AV curves and write them as `--out AO.csv AV.csv`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Reference transcripts; a synthetic corpus is generated otherwise.
        #[arg(long = "refs")]
        refs: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum MafiCmd {
    /// Score speechreaders' guesses against a target word.
    Score {
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        target: String,
        #[arg(long, num_args = 1.., required = true)]
        guess: Vec<String>,
    },
    /// Pearson correlation between MaFI norms and an IWER table.
    Correlate {
        #[arg(long)]
        norms: PathBuf,
        #[arg(long)]
        iwer: PathBuf,
        #[arg(long, default_value_t = avsr_gauge_core::scoring::DEFAULT_MIN_COUNT)]
        min_count: usize,
        /// Also run a permutation test with this many shuffles.
        #[arg(long)]
        permutations: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum ReportCmd {
    /// Relative WER increases under occlusion.
    Occlusion {
        #[arg(long)]
        none: f64,
        #[arg(long)]
        initial: Option<f64>,
        #[arg(long)]
        middle: Option<f64>,
        #[arg(long)]
        note: Option<String>,
        #[arg(long, default_value = "")]
        dataset: String,
        #[arg(long, default_value = "")]
        system: String,
        #[arg(long, default_value = "markdown")]
        style: String,
    },
    /// Plot curve CSV files into one SVG.
    Plot {
        #[arg(long, required = true)]
        curve: Vec<PathBuf>,
        #[arg(long)]
        y_max: Option<f64>,
        #[arg(long)]
        title: Option<String>,
    },
}

struct Global {
    seed: Option<u64>,
    out: Vec<PathBuf>,
}

impl Global {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn out_one(&self, what: &str) -> Result<&Path, CliError> {
        match self.out.as_slice() {
            [p] => Ok(p),
            _ => Err(CliError::usage(format!("--out takes exactly one {what}"))),
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let g = Global {
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::Run { config } => commands::run(&g, &config),
        Command::Noise(NoiseCmd::Gen { samples, rate }) => commands::noise_gen(&g, samples, rate),
        Command::Noise(NoiseCmd::Mix {
            speech,
            noise,
            snr,
            peak,
        }) => commands::noise_mix(&g, &speech, noise.as_deref(), &snr, &peak),
        Command::Score(a) => commands::score(&g, &a.reference, &a.hyp, a.min_count),
        Command::Gain(a) => match a.plot {
            Some(GainPlotCmd::Plot(c)) => commands::gain_plot(&g, &c),
            None => commands::gain(&a.curves, a.json),
        },
        Command::Occlude(OccludeCmd::Plan {
            align,
            fps,
            position,
            region,
            fill,
            tier,
            utt,
        }) => commands::occlude_plan(&g, &align, fps, &position, &region, &fill, &tier, utt),
        Command::Occlude(OccludeCmd::Apply { frames, manifest }) => {
            commands::occlude_apply(&g, &frames, &manifest)
        }
        Command::Sim(SimCmd::Sweep { config, refs }) => {
            commands::sim_sweep(&g, &config, refs.as_deref())
        }
        Command::Mafi(MafiCmd::Score {
            lexicon,
            features,
            target,
            guess,
        }) => commands::mafi_score(lexicon.as_deref(), features.as_deref(), &target, &guess),
        Command::Mafi(MafiCmd::Correlate {
            norms,
            iwer,
            min_count,
            permutations,
        }) => commands::mafi_correlate(&g, &norms, &iwer, min_count, permutations),
        Command::Report(ReportCmd::Occlusion {
            none,
            initial,
            middle,
            note,
            dataset,
            system,
            style,
        }) => commands::report_occlusion(none, initial, middle, note, &dataset, &system, &style),
        Command::Report(ReportCmd::Plot {
            curve,
            y_max,
            title,
        }) => commands::report_plot(&g, &curve, y_max, title),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("{}", CliError::usage(e.to_string()).to_json());
            return ExitCode::from(2);
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code)
        }
    }
}
