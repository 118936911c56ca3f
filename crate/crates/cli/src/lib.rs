//! The `pnmf` command-line harness: scene synthesis, unmixing, evaluation,
//! the SNR-sweep benchmark and figure output.

pub mod cmd;
pub mod library;
pub mod manifest;
pub mod output;
pub mod parse;
pub mod results;
pub mod svg;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "pnmf", version, about = "Blind hyperspectral unmixing with denoiser priors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    Synth(cmd::synth::SynthArgs),
    Unmix(cmd::unmix::UnmixArgs),
    Eval(cmd::eval::EvalArgs),
    Bench(cmd::bench::BenchArgs),
    Plot(cmd::plot::PlotArgs),
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Synth(a) => {
            let dir = cmd::synth::run(a)?;
            eprintln!("wrote {}", dir.display());
        }
        Command::Unmix(a) => {
            let dir = cmd::unmix::run(a)?;
            eprintln!("wrote {}", dir.display());
        }
        Command::Eval(a) => {
            cmd::eval::run(a)?;
        }
        Command::Bench(a) => {
            let out = cmd::bench::run(a)?;
            eprintln!("wrote {} ({} runs)", out.dir.display(), out.rows.len());
        }
        Command::Plot(a) => {
            let dir = cmd::plot::run(a)?;
            eprintln!("wrote {}", dir.display());
        }
    }
    Ok(())
}
