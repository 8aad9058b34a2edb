use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quiver_dmod_cli::{
    cmd_curve, cmd_fourier, cmd_normal_form, cmd_solve, cmd_verify_paper_example, cmd_virasoro,
    render_json, render_text, InputError, Report, RunConfig, VirasoroParams, DEFAULT_ORDER,
};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Normal forms, flat sections and spectral curves of quiver D-modules.
#[derive(Parser, Debug)]
#[command(name = "quiverdm", version)]
struct Cli {
    /// Series truncation order (at least 4).
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER)]
    order: usize,
    /// Depth of the formal splitting; defaults to the top exponent plus 2.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Seed for generated companion matrices.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Formal normal form at infinity.
    NormalForm {
        /// Spec file path, or `builtin:NAME`.
        spec: String,
        /// Ignore B in the file and draw one from --seed.
        #[arg(long)]
        random_b: bool,
    },
    /// Flat sections on every sheet of the moduli cover, then verification.
    Solve {
        spec: String,
        #[arg(long)]
        random_b: bool,
    },
    /// Classical-limit spectral curve.
    Curve { spec: String },
    /// Local Fourier transforms of the exponential factor, every twist.
    Fourier { spec: String },
    /// Witt-algebra relation on the truncated Fock space.
    Virasoro {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        /// Mode cutoff.
        #[arg(long = "T", default_value_t = 14)]
        cutoff: u32,
        /// Guard: test monomials use only t_1..t_G.
        #[arg(long = "G", default_value_t = 6)]
        guard: u32,
        /// Degree bound for test monomials.
        #[arg(long, default_value_t = 3)]
        d: u32,
        /// Also check the string-quiver identity for this quiver size.
        #[arg(long)]
        string_n: Option<u32>,
        #[arg(long, default_value_t = 1, requires = "string_n")]
        string_k: u32,
    },
    /// Runs the bundled five-vertex, UMM and string examples end to end.
    VerifyPaperExample,
}

fn run(cli: &Cli) -> Result<Report, InputError> {
    let cfg = RunConfig::new(cli.order, cli.depth, cli.seed)?;
    match &cli.command {
        Command::NormalForm { spec, random_b } => cmd_normal_form(spec, *random_b, &cfg),
        Command::Solve { spec, random_b } => cmd_solve(spec, *random_b, &cfg),
        Command::Curve { spec } => cmd_curve(spec),
        Command::Fourier { spec } => cmd_fourier(spec, &cfg),
        Command::Virasoro {
            m,
            n,
            cutoff,
            guard,
            d,
            string_n,
            string_k,
        } => cmd_virasoro(&VirasoroParams {
            m: *m,
            n: *n,
            cutoff: *cutoff,
            guard: *guard,
            degree: *d,
            string: string_n.map(|s| (s, *string_k)),
        }),
        Command::VerifyPaperExample => cmd_verify_paper_example(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match cli.format {
        Format::Text => render_text(&report),
        Format::Json => render_json(&report) + "\n",
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
