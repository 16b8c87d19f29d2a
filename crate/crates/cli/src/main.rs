use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

use commands::Outcome;

/// Signatures of Hilbert–Poincaré complexes, boundary complexes and
/// triangulated manifolds.
///
/// Exit codes: 0 pass, 1 verification failure, 2 parse error, 3 numerical
/// degeneracy.
#[derive(Parser, Debug)]
#[command(name = "hpsig", version)]
struct Cli {
    /// Absolute tolerance, scaled by operator norms where relevant.
    #[arg(long, global = true, env = "HPSIG_TOL", default_value_t = hpsig::DEFAULT_TOL, value_parser = parse_tol)]
    tol: f64,

    /// Print a structured JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every defining identity of a .hpx or .smf document.
    Verify { path: PathBuf },
    /// Compute the signature of a closed complex or manifold.
    Signature {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
    },
    /// Simplicial pipeline for a closed .smf manifold.
    Simplicial { path: PathBuf },
    /// Build the boundary complex of a complex or manifold with boundary.
    Boundary { path: PathBuf },
    /// Check that the boundary complex has zero signature.
    BordismCheck { path: PathBuf },
    /// Mapping cone of the duality operator.
    Cone { path: PathBuf },
    /// Write a random valid .hpx document.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// For example `n=2,max_dim=6,group=z3`.
        #[arg(long, default_value = "n=2,max_dim=6,group=none")]
        profile: String,
        /// Generate a complex with boundary instead.
        #[arg(long)]
        boundary: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Barycentric subdivision of a .smf manifold.
    Subdivide {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    All,
    Mishchenko,
    HigsonRoe,
    Reduced,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(format!("tolerance must be positive and finite, got {s}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = cli.tol;
    let result = match &cli.command {
        Command::Verify { path } => commands::verify(path, tol),
        Command::Signature { path, method } => {
            let method = match method {
                MethodArg::All => None,
                MethodArg::Mishchenko => Some(hpsig::signature::Method::Mishchenko),
                MethodArg::HigsonRoe => Some(hpsig::signature::Method::HigsonRoe),
                MethodArg::Reduced => Some(hpsig::signature::Method::Reduced),
            };
            commands::signature(path, method, tol)
        }
        Command::Simplicial { path } => commands::simplicial(path, tol),
        Command::Boundary { path } => commands::boundary(path, tol),
        Command::BordismCheck { path } => commands::bordism_check(path, tol),
        Command::Cone { path } => commands::cone(path, tol),
        Command::Generate {
            seed,
            profile,
            boundary,
            out,
        } => commands::generate(*seed, profile, *boundary, out.as_deref()),
        Command::Subdivide { path, out } => commands::subdivide(path, out.as_deref()),
    };
    let outcome = result.unwrap_or_else(Outcome::from_error);
    outcome.print(cli.json);
    ExitCode::from(outcome.code)
}
