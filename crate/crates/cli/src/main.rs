//! `tileforge`: self-affine tiles from the command line.
//!
//! Exit codes: 0 success, 1 verified negative, 2 input error, 3 resource cap.

#![allow(clippy::needless_range_loop)]

mod commands;
mod error;
mod ppm;
mod spec;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tileforge_core::attractor::DEFAULT_MAX_CELLS;
use tileforge_core::boxtile::BoxForm;
use tileforge_core::oned::IntSet1D;

use commands::{Limits, Outcome, RenderArgs};
use error::CliError;
use spec::ProblemSpec;

const MAX_CELLS_ENV: &str = "TILEFORGE_MAX_CELLS";

#[derive(Parser)]
#[command(name = "tileforge", version, about = "Self-affine tiles, box tiles, Haar bases and 1-D integer tiles")]
struct Cli {
    /// Worker threads for parallel kernels; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tile tests, measure bounds and images.
    #[command(subcommand)]
    Tile(TileCmd),
    /// Box tiles in cyclic normal form.
    #[command(subcommand)]
    Box(BoxCmd),
    /// Haar bases attached to a tile.
    #[command(subcommand)]
    Haar(HaarCmd),
    /// One-dimensional integer tiles.
    #[command(subcommand)]
    Oned(OnedCmd),
    /// Tensor product of two systems, printed as a spec.
    Product { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand)]
enum TileCmd {
    /// Exact tile test with measure bound and layer counts.
    Check { spec: PathBuf },
    /// Upper bounds on the measure for depths 1..=K.
    Measure { spec: PathBuf },
    /// Writes a binary PPM image of the attractor or a tiling by it.
    Render {
        spec: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        resolution: Option<u32>,
        #[arg(long)]
        out: PathBuf,
        /// Draw the integer translates {0..W-1}^d.
        #[arg(long, value_name = "W")]
        tiling: Option<i64>,
        /// Draw the translates listed in the spec.
        #[arg(long)]
        translates: bool,
        /// Pixel height of 1-D strips.
        #[arg(long, default_value_t = 16)]
        strip: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Sign {
    #[value(name = "+")]
    Plus,
    #[value(name = "-")]
    Minus,
}

#[derive(clap::Args)]
struct FormArgs {
    /// Comma-separated p_1,…,p_n.
    #[arg(short, long, value_delimiter = ',', required = true)]
    p: Vec<i64>,
    #[arg(long, allow_hyphen_values = true)]
    sign: Sign,
}

impl FormArgs {
    fn form(&self) -> Result<BoxForm, CliError> {
        let sign = match self.sign {
            Sign::Plus => 1,
            Sign::Minus => -1,
        };
        Ok(BoxForm::new(self.p.clone(), sign)?)
    }
}

#[derive(Subcommand)]
enum BoxCmd {
    /// Cyclic matrix and digits of a box form.
    Build(FormArgs),
    /// Digits of a box form.
    Digits(FormArgs),
    /// Whether a system's attractor is a parallelepiped.
    Detect { spec: PathBuf },
}

#[derive(Subcommand)]
enum HaarCmd {
    /// Wavelet coefficients of a tile system.
    Build { spec: PathBuf },
    /// Gram matrix of the scaling function and wavelets.
    Gram {
        spec: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        resolution: Option<u32>,
    },
}

#[derive(Subcommand)]
enum OnedCmd {
    /// Tiles a segment by translates of SET.
    Oracle {
        /// Comma list such as 0,3,6 or a spec path.
        set: String,
        #[arg(long)]
        n_max: Option<i64>,
    },
    /// Decomposes SET into progressions.
    Classify { set: String },
    /// All simple tiles of {0..N-1}.
    Enumerate { n: i64 },
    /// Whether SET is a union of aligned blocks of length L.
    Lset {
        set: String,
        #[arg(short, long)]
        l: i64,
    },
}

fn read_spec(path: &Path) -> Result<ProblemSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ProblemSpec::parse(&text)
}

fn read_set(arg: &str) -> Result<IntSet1D, CliError> {
    let list: Result<Vec<i64>, _> = arg.split(',').map(|t| t.trim().parse::<i64>()).collect();
    match list {
        Ok(v) => Ok(IntSet1D::new(v)?),
        Err(_) if Path::new(arg).exists() => read_spec(Path::new(arg))?.oned_set(),
        Err(_) => Err(CliError::Input(format!(
            "`{arg}` is neither a comma-separated integer list nor a spec file"
        ))),
    }
}

fn limits() -> Result<Limits, CliError> {
    let max_cells = match std::env::var(MAX_CELLS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| CliError::Input(format!("{MAX_CELLS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => DEFAULT_MAX_CELLS,
    };
    Ok(Limits { max_cells })
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot start {n} threads: {e}")))?;
    }
    let limits = limits()?;
    match cli.command {
        Command::Tile(TileCmd::Check { spec }) => commands::tile_check(&read_spec(&spec)?, limits),
        Command::Tile(TileCmd::Measure { spec }) => commands::tile_measure(&read_spec(&spec)?, limits),
        Command::Tile(TileCmd::Render {
            spec,
            depth,
            resolution,
            out,
            tiling,
            translates,
            strip,
        }) => commands::tile_render(
            &read_spec(&spec)?,
            &RenderArgs {
                depth,
                resolution,
                out: &out,
                tiling,
                translates,
                strip,
            },
            limits,
        ),
        Command::Box(BoxCmd::Build(f)) => commands::box_build(&f.form()?),
        Command::Box(BoxCmd::Digits(f)) => commands::box_digits_cmd(&f.form()?),
        Command::Box(BoxCmd::Detect { spec }) => commands::box_detect(&read_spec(&spec)?, limits),
        Command::Haar(HaarCmd::Build { spec }) => commands::haar_build(&read_spec(&spec)?),
        Command::Haar(HaarCmd::Gram {
            spec,
            depth,
            resolution,
        }) => commands::haar_gram(&read_spec(&spec)?, depth, resolution),
        Command::Oned(OnedCmd::Oracle { set, n_max }) => commands::oned_oracle(&read_set(&set)?, n_max),
        Command::Oned(OnedCmd::Classify { set }) => commands::oned_classify(&read_set(&set)?),
        Command::Oned(OnedCmd::Enumerate { n }) => commands::oned_enumerate(n),
        Command::Oned(OnedCmd::Lset { set, l }) => commands::oned_lset(&read_set(&set)?, l),
        Command::Product { a, b } => commands::product(&read_spec(&a)?, &read_spec(&b)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            let mut text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
            text.push('\n');
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(if outcome.negative { 1 } else { 0 })
        }
        Err(e) => {
            let body = serde_json::json!({ "error": e.code(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
