//! Command-line driver for `textae`: preprocessing, training, evaluation,
//! bottleneck sweeps and critical-dimension detection.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numeric failure during training.

pub mod args;
pub mod commands;
pub mod config;

use textae::{Error, ErrorCategory};

use args::{Cli, Command};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err.category() {
        ErrorCategory::Usage => EXIT_USAGE,
        ErrorCategory::Data => EXIT_DATA,
        ErrorCategory::Numeric => EXIT_NUMERIC,
    }
}

pub fn run(cli: &Cli) -> textae::Result<String> {
    match &cli.command {
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Train(a) => commands::train(a),
        Command::Evaluate(a) => commands::evaluate_cmd(a),
        Command::Sweep(a) => commands::sweep_cmd(a),
        Command::CriticalDim(a) => commands::critical_dim(a),
    }
}
