//! `checks`: run the verification suites and report pass/fail.

use std::path::PathBuf;

use clap::ValueEnum;

use gliovox_core::checks::{run_checks, FaultInjection, Suite};
use gliovox_core::Result;

use crate::report::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Kernels,
    Metrics,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    /// Scale every analytic kernel gradient by 1.01; the gradient checks
    /// must then fail. Testing aid.
    ScaledGrad,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,

    /// Optional JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Deliberately corrupt the kernel backward passes.
    #[arg(long = "inject-fault", value_enum)]
    pub inject_fault: Option<FaultArg>,
}

pub fn run(args: Args) -> Result<u8> {
    let suite = match args.suite {
        SuiteArg::Kernels => Suite::Kernels,
        SuiteArg::Metrics => Suite::Metrics,
        SuiteArg::All => Suite::All,
    };
    let fault = args.inject_fault.map(|FaultArg::ScaledGrad| FaultInjection::ScaledGradient);
    let report = run_checks(suite, fault);

    for r in &report.results {
        println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
    }
    println!(
        "suite {}: {} ({}/{} checks passed)",
        report.suite,
        if report.pass { "PASS" } else { "FAIL" },
        report.results.iter().filter(|r| r.pass).count(),
        report.results.len()
    );

    if let Some(out) = &args.out {
        let wrapped = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "suite": report.suite,
            "pass": report.pass,
            "results": report.results,
        });
        std::fs::write(out, serde_json::to_string_pretty(&wrapped).expect("report serializes"))?;
    }
    Ok(if report.pass { 0 } else { 1 })
}
