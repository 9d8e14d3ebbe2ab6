use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use troptheta::cli::{self, HypersurfaceFlags, Outcome, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "troptheta", version, about = "Exact tropical theta functions on polarized tropical affine tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a torus and polarization, print its lattice data and Gram matrix
    TorusValidate {
        /// Torus JSON (`-` for stdin)
        config: PathBuf,
    },
    /// Compute the corner locus of a theta function or a tropical polynomial
    Hypersurface {
        config: PathBuf,
        /// Write an SVG drawing of the complex (2-tori only)
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        check_balancing: bool,
        #[arg(long)]
        check_regular: bool,
        /// Output path for the complex JSON (default stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Certify vanishing of the (n+1)-st filtration step, or replay a certificate
    FiltrationVerify {
        /// Pipeline config, or a certificate with --replay
        config: PathBuf,
        #[arg(long)]
        replay: bool,
        /// Output path for the certificate (default stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply the Fourier functor to a brane symbol
    Fourier {
        symbol: PathBuf,
        /// Apply twice and compare with level negation and shift n
        #[arg(long)]
        twice: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn read_input(path: &PathBuf) -> io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path)
    }
}

fn emit(o: &Outcome, output: Option<&PathBuf>, svg: Option<&PathBuf>) -> io::Result<()> {
    match output {
        Some(p) => fs::write(p, &o.stdout)?,
        None => io::stdout().write_all(o.stdout.as_bytes())?,
    }
    if let (Some(p), Some(s)) = (svg, &o.svg) {
        fs::write(p, s)?;
    }
    let mut err = o.stderr.clone();
    if !err.is_empty() && !err.ends_with('\n') {
        err.push('\n');
    }
    io::stderr().write_all(err.as_bytes())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let (path, output, svg) = match &args.command {
        Command::TorusValidate { config } => (config, None, None),
        Command::Hypersurface { config, output, svg, .. } => (config, output.as_ref(), svg.as_ref()),
        Command::FiltrationVerify { config, output, .. } => (config, output.as_ref(), None),
        Command::Fourier { symbol, output, .. } => (symbol, output.as_ref(), None),
    };
    let text = match read_input(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let outcome = match &args.command {
        Command::TorusValidate { .. } => cli::cmd_torus_validate(&text),
        Command::Hypersurface { svg, check_balancing, check_regular, .. } => cli::cmd_hypersurface(
            &text,
            HypersurfaceFlags { svg: svg.is_some(), check_balancing: *check_balancing, check_regular: *check_regular },
        ),
        Command::FiltrationVerify { replay: true, .. } => cli::cmd_replay(&text),
        Command::FiltrationVerify { .. } => cli::cmd_filtration_verify(&text),
        Command::Fourier { twice, .. } => cli::cmd_fourier(&text, *twice),
    };
    if let Err(e) = emit(&outcome, output, svg) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    ExitCode::from(outcome.code as u8)
}
