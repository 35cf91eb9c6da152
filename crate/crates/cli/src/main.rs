use std::path::PathBuf;
use std::process::ExitCode;

use bim_attention::enhancer::DEFAULT_MAX_ITERS;
use bim_attention::pipeline::{self, RunConfig, EXIT_ERROR};
use bim_attention::saliency::Mode;
use bim_attention::synth;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bim-attention",
    version,
    about = "Saliency-driven recoloring of BIM renders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Perspective,
    Baseline,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Perspective => Mode::Perspective,
            ModeArg::Baseline => Mode::Baseline,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Recolor a scene bundle so elements relevant to a profile stand out.
    Enhance {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Built-in profile (structure, method, plumbing) or one from --rules.
        #[arg(long)]
        profile: String,
        #[arg(long, value_enum, default_value = "perspective")]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// JSON rule pack adding or overriding profiles.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Also write diagnostic maps under OUT/intermediates.
        #[arg(long)]
        emit_intermediates: bool,
    },
    /// Render a synthetic scene bundle with ground truth.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time the pipeline on a bundle and print stage medians as JSON.
    Bench {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        profile: String,
        #[arg(long)]
        repeats: usize,
        #[arg(long, value_enum, default_value = "perspective")]
        mode: ModeArg,
        #[arg(long)]
        rules: Option<PathBuf>,
    },
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return exit(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match cli.command {
        Command::Enhance {
            bundle,
            out,
            profile,
            mode,
            max_iters,
            rules,
            emit_intermediates,
        } => {
            let config = RunConfig {
                bundle_dir: bundle,
                out_dir: out,
                profile,
                mode: mode.into(),
                max_iters,
                emit_intermediates,
                rule_pack: rules,
            };
            let result = pipeline::run(&config);
            match &result {
                Ok(outcome) => println!("{}", outcome.summary()),
                Err(e) => eprintln!("{e}"),
            }
            exit(pipeline::exit_code_for(&result))
        }
        Command::Synth { spec, out } => {
            match synth::load_spec(&spec).and_then(|s| synth::generate_scene(&s, &out)) {
                Ok(truth) => {
                    println!(
                        "wrote {}x{} scene with {} objects to {}",
                        truth.width,
                        truth.height,
                        truth.objects.len(),
                        out.display()
                    );
                    exit(0)
                }
                Err(e) => {
                    eprintln!("error in stage 'synth': {e}");
                    exit(EXIT_ERROR)
                }
            }
        }
        Command::Bench {
            bundle,
            profile,
            repeats,
            mode,
            rules,
        } => {
            let mut config = RunConfig::new(bundle, PathBuf::new(), &profile);
            config.mode = mode.into();
            config.rule_pack = rules;
            match pipeline::benchmark(&config, repeats) {
                Ok(report) => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&report).expect("report serializes")
                    );
                    exit(0)
                }
                Err(e) => {
                    eprintln!("{e}");
                    exit(EXIT_ERROR)
                }
            }
        }
    }
}
