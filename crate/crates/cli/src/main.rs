//! `gliovox`: evaluate segmentations and inpaintings, fuse ensembles,
//! generate surrogate masks, and run the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input/usage error.

mod checks_cmd;
mod eval_inpaint;
mod eval_seg;
mod fuse;
mod gen_masks;
mod manifest;
mod report;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "gliovox",
    version,
    about = "Volumetric brain-tumor analysis: segmentation/inpainting evaluation and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate label-map predictions against ground truth (legacy or
    /// lesion-wise DSC/HD95).
    EvalSeg(eval_seg::Args),
    /// Evaluate inpainted volumes against references inside masks
    /// (MSE/PSNR/SSIM, rank-sum over models).
    EvalInpaint(eval_inpaint::Args),
    /// Fuse probability stacks, decode to labels, and post-process
    /// enhancing tumor.
    Fuse(fuse::Args),
    /// Generate surrogate inpainting masks inside healthy tissue.
    GenMasks(gen_masks::Args),
    /// Run the gradient-check and metric-oracle verification suites.
    Checks(checks_cmd::Args),
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::EvalSeg(args) => eval_seg::run(args),
        Command::EvalInpaint(args) => eval_inpaint::run(args),
        Command::Fuse(args) => fuse::run(args),
        Command::GenMasks(args) => gen_masks::run(args),
        Command::Checks(args) => checks_cmd::run(args),
    };
    match outcome {
        Ok(code) => std::process::ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::ExitCode::from(2)
        }
    }
}
