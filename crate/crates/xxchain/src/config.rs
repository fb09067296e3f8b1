//! Command-line flags and their validation into a [`RunConfig`].

use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xxchain_core::entanglement::DEFAULT_TOLERANCE;
use xxchain_core::oracle::ORACLE_MAX_SITES;
use xxchain_core::spectrum::DEFAULT_DEGENERACY_TOL;
use xxchain_core::{ChainParams, Precision};

use crate::CliError;

/// Largest N accepted by the closed-form commands. Fields and energies are
/// cheap; the cap only keeps `--r` ranges and sweeps bounded.
pub const MAX_SITES: usize = 4096;

#[derive(Debug, Parser)]
#[command(name = "xxchain", version, about = "Periodic XX chain: energies, critical fields, Schmidt ranks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sector ground energies E_0^r over a field grid.
    Energy(Opts),
    /// Critical fields, phase intervals and a plot-ready E_min(B) sweep.
    PhaseDiagram(Opts),
    /// Block-by-block Schmidt ranks of the sector ground states.
    Schmidt(Opts),
    /// Entanglement-class verdict across every critical field.
    Classify(Opts),
    /// Cross-check closed forms against exact diagonalization and dense ranks.
    Verify(Opts),
    /// Amplitudes of one sector ground state.
    State(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Standard,
    Extended,
}

/// Flags shared by all subcommands; each command reads the ones it needs.
#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Number of sites.
    #[arg(short = 'n', long = "n")]
    pub n: usize,
    /// Coupling J > 0.
    #[arg(short = 'j', long = "j", default_value_t = 1.0)]
    pub j: f64,
    /// Single field value.
    #[arg(short = 'b', long = "b", conflicts_with_all = ["b_range", "auto_grid"])]
    pub b: Option<f64>,
    /// Field sweep `start,stop,steps` (inclusive endpoints).
    #[arg(long = "b-range", conflicts_with = "auto_grid")]
    pub b_range: Option<String>,
    /// Use the midpoint of every phase interval as the field grid.
    #[arg(long = "auto-grid")]
    pub auto_grid: bool,
    /// Left block size M; defaults to ⌊N/2⌋.
    #[arg(short = 'm', long = "m")]
    pub m: Option<usize>,
    /// Sector `r` or inclusive range `a..b`; defaults to all of 0..⌊N/2⌋.
    #[arg(short = 'r', long = "r")]
    pub r: Option<String>,
    /// Relative rank threshold (rank commands) or degeneracy tolerance in
    /// units of J (energy commands).
    #[arg(long = "tol")]
    pub tol: Option<f64>,
    #[arg(long = "precision", value_enum, default_value_t = PrecisionArg::Standard)]
    pub precision: PrecisionArg,
    /// Exit 0 even when a rank decision is flagged unreliable.
    #[arg(long = "allow-unreliable")]
    pub allow_unreliable: bool,
    #[arg(long = "format", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    /// Worker threads; RAYON_NUM_THREADS is honoured when absent.
    #[arg(long = "threads")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Energy,
    PhaseDiagram,
    Schmidt,
    Classify,
    Verify,
    State,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Energy => "energy",
            CommandKind::PhaseDiagram => "phase-diagram",
            CommandKind::Schmidt => "schmidt",
            CommandKind::Classify => "classify",
            CommandKind::Verify => "verify",
            CommandKind::State => "state",
        }
    }

    fn default_tol(&self) -> f64 {
        match self {
            CommandKind::Energy | CommandKind::PhaseDiagram => DEFAULT_DEGENERACY_TOL,
            _ => DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldGrid {
    /// No field given; commands that need one fall back to their own default.
    Unset,
    Points(Vec<f64>),
    Auto,
}

/// Validated inputs for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub n: usize,
    pub j: f64,
    pub fields: FieldGrid,
    pub m: usize,
    pub sectors: RangeInclusive<usize>,
    /// `--r` was given rather than defaulted.
    pub explicit_sector: bool,
    pub tol: f64,
    pub precision: Precision,
    pub allow_unreliable: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn params(&self, b: f64) -> Result<ChainParams, CliError> {
        ChainParams::new(self.n, self.j, b).map_err(CliError::from)
    }

    pub fn max_sector(&self) -> usize {
        self.n / 2
    }

    /// Resolved field grid; `Auto` becomes the phase-interval midpoints in
    /// order of increasing `r`.
    pub fn field_points(&self) -> Result<Option<Vec<f64>>, CliError> {
        match &self.fields {
            FieldGrid::Unset => Ok(None),
            FieldGrid::Points(v) => Ok(Some(v.clone())),
            FieldGrid::Auto => {
                let diagram = xxchain_core::phase_diagram(&self.params(0.0)?);
                Ok(Some(diagram.intervals.iter().map(|i| i.midpoint()).collect()))
            }
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Parses `a` or `a..b` (inclusive).
pub fn parse_sector_range(s: &str) -> Result<RangeInclusive<usize>, CliError> {
    let num =
        |t: &str| t.trim().parse::<usize>().map_err(|_| invalid(format!("--r: '{t}' is not a non-negative integer")));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(invalid(format!("--r: empty range {a}..{b}")));
            }
            Ok(a..=b)
        }
        None => {
            let a = num(s)?;
            Ok(a..=a)
        }
    }
}

/// Parses `start,stop,steps` into `steps` evenly spaced points.
pub fn parse_field_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(invalid(format!("--b-range: expected start,stop,steps, got '{s}'")));
    }
    let f = |t: &str| t.parse::<f64>().map_err(|_| invalid(format!("--b-range: '{t}' is not a number")));
    let (start, stop) = (f(parts[0])?, f(parts[1])?);
    let steps: usize =
        parts[2].parse().map_err(|_| invalid(format!("--b-range: '{}' is not a step count", parts[2])))?;
    if steps == 0 {
        return Err(invalid("--b-range: steps must be at least 1"));
    }
    if steps > 1_000_000 {
        return Err(invalid("--b-range: at most 1000000 steps"));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (stop - start) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { stop } else { start + h * i as f64 }).collect())
}

impl RunConfig {
    pub fn from_cli(command: &Command) -> Result<Self, CliError> {
        let (kind, o) = match command {
            Command::Energy(o) => (CommandKind::Energy, o),
            Command::PhaseDiagram(o) => (CommandKind::PhaseDiagram, o),
            Command::Schmidt(o) => (CommandKind::Schmidt, o),
            Command::Classify(o) => (CommandKind::Classify, o),
            Command::Verify(o) => (CommandKind::Verify, o),
            Command::State(o) => (CommandKind::State, o),
        };
        Self::new(kind, o)
    }

    pub fn new(command: CommandKind, o: &Opts) -> Result<Self, CliError> {
        let n = o.n;
        // model-level checks (N >= 2, J > 0) come from the core crate
        ChainParams::new(n, o.j, 0.0)?;
        if n > MAX_SITES {
            return Err(invalid(format!("N={n} exceeds the supported maximum {MAX_SITES}")));
        }
        if command == CommandKind::Verify && n > ORACLE_MAX_SITES {
            return Err(invalid(format!("N={n} exceeds the oracle capacity N <= {ORACLE_MAX_SITES}")));
        }
        let fields = match (o.b, &o.b_range, o.auto_grid) {
            (Some(b), _, _) => FieldGrid::Points(vec![b]),
            (None, Some(s), _) => FieldGrid::Points(parse_field_range(s)?),
            (None, None, true) => FieldGrid::Auto,
            (None, None, false) => FieldGrid::Unset,
        };
        if let FieldGrid::Points(v) = &fields {
            for &b in v {
                ChainParams::new(n, o.j, b)?;
            }
        }
        let m = o.m.unwrap_or(n / 2);
        if m == 0 || m >= n {
            return Err(invalid(format!("M={m} must satisfy 1 <= M < N={n}")));
        }
        let max = n / 2;
        let sectors = match &o.r {
            Some(s) => parse_sector_range(s)?,
            None => 0..=max,
        };
        if *sectors.end() > max {
            return Err(invalid(format!("r={} is outside the ground-state family 0..={max} for N={n}", sectors.end())));
        }
        let tol = o.tol.unwrap_or(command.default_tol());
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid(format!("--tol {tol} must lie in (0, 1)")));
        }
        if o.threads == Some(0) {
            return Err(invalid("--threads must be at least 1"));
        }
        let precision = match o.precision {
            PrecisionArg::Standard => Precision::Standard,
            PrecisionArg::Extended => Precision::Extended,
        };
        Ok(Self {
            command,
            n,
            j: o.j,
            fields,
            m,
            sectors,
            explicit_sector: o.r.is_some(),
            tol,
            precision,
            allow_unreliable: o.allow_unreliable,
            format: o.format,
            output: o.output.clone(),
            threads: o.threads,
        })
    }
}
