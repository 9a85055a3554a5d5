//! Command-line front end: parse a JSON document, run one command, report.
//!
//! Exit codes: 0 computed, 1 invalid input, 2 incompatible bundle,
//! 3 internal verification failure.

pub mod document;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::exactla::{parse_rational, point_to_q, Rational};
use crate::fan::Wall;
use crate::klyachko::{check_compatibility, ToricBundle};
use crate::matroid::{build_lattice, enumerate_flats, ground_set, is_compatible_flat};
use crate::parliament::{parliament, reconstruct_filtrations, render_svg, SvgOptions};
use crate::stability::{check_stability, restrict_to_curve, weights_from_divisor, Polarization};

use document::{load, Input};
use report::{
    ground_elements, CheckReport, FlatEntry, FlatsReport, ParliamentReport, ReconstructReport,
    Report, RestrictReport, Trace, ValidateReport, WeightsReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INCOMPATIBLE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "toricstab",
    version,
    about = "Slope stability of toric vector bundles from Klyachko filtrations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for the randomized splitting search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Also report L(E), the ground-set step trace and the character sheets.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide (semi)stability with respect to the document's polarization.
    Check {
        file: PathBuf,
        /// Report only the semistability verdict.
        #[arg(long)]
        semistable_only: bool,
    },
    /// Polytopes, vertices, lattice points and character annotations.
    Parliament {
        file: PathBuf,
        /// Write an SVG drawing (two-dimensional fans only).
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Overlay the restriction segments of this wall.
        #[arg(long)]
        wall: Option<usize>,
    },
    /// Flats of the bundle's matroid, marked compatible or not.
    Flats { file: PathBuf },
    /// Splitting type on the invariant curve of a wall.
    Restrict {
        file: PathBuf,
        /// Index into the wall list, which is sorted by ray set.
        #[arg(long)]
        wall: usize,
    },
    /// Weights of the class D^{d-1} for a divisor D.
    Weights {
        file: PathBuf,
        /// Comma-separated coefficients, one per ray; integers or p/q.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        divisor: Vec<String>,
    },
    /// Rebuild the filtrations from the parliament and compare.
    Reconstruct { file: PathBuf },
    /// Validate the fan and the compatibility condition only.
    Validate { file: PathBuf },
}

/// A failed command: exit code plus the message for the diagnostic stream.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Incompatible(_) => EXIT_INCOMPATIBLE,
            Error::Verification(_) => EXIT_VERIFICATION,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

fn read_input(path: &Path) -> Result<Input, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    load(&text).map_err(|errs| {
        let lines: Vec<String> = errs
            .iter()
            .map(|e| format!("{}: {e}", path.display()))
            .collect();
        invalid(lines.join("\n"))
    })
}

fn need_bundle(input: &Input) -> Result<&ToricBundle, Failure> {
    input
        .bundle
        .as_ref()
        .ok_or_else(|| invalid("the document has no bundle block"))
}

fn need_polarization(input: &Input) -> Result<&Polarization, Failure> {
    input
        .polarization
        .as_ref()
        .ok_or_else(|| invalid("the document has no polarization block"))
}

fn wall_at(b: &ToricBundle, k: usize) -> Result<Wall, Failure> {
    let walls = b.fan().walls()?;
    let n = walls.len();
    walls
        .into_iter()
        .nth(k)
        .ok_or_else(|| invalid(format!("wall {k} out of range: the fan has {n} walls")))
}

fn trace_of(b: &ToricBundle, seed: u64) -> Result<Trace, Failure> {
    let lattice = build_lattice(b, None)?;
    let g = ground_set(b)?;
    let sheet = check_compatibility(b, seed)?;
    Ok(Trace::new(b, &lattice, &g, &sheet)?)
}

struct Output {
    report: Report,
    text: String,
    /// Exit code after printing, for reports that record a failed check.
    code: i32,
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    let seed = cli.seed;
    let ok = |report: Report, text: String| Output {
        report,
        text,
        code: EXIT_OK,
    };
    match &cli.command {
        Command::Check {
            file,
            semistable_only,
        } => {
            let input = read_input(file)?;
            let b = need_bundle(&input)?;
            let pol = need_polarization(&input)?;
            let r = check_stability(b, pol, seed)?;
            let trace = cli.trace.then(|| trace_of(b, seed)).transpose()?;
            let rep = CheckReport::new(b, pol, &r, *semistable_only, trace)?;
            let text = rep.text();
            Ok(ok(Report::Check(rep), text))
        }
        Command::Parliament { file, svg, wall } => {
            let input = read_input(file)?;
            let b = need_bundle(&input)?;
            let p = parliament(b, seed)?;
            let restriction = match wall {
                Some(k) => Some(restrict_to_curve(b, &wall_at(b, *k)?, seed)?),
                None => None,
            };
            let trace = cli.trace.then(|| trace_of(b, seed)).transpose()?;
            let mut rep = ParliamentReport::new(&p, restriction.as_ref(), trace)?;
            if let Some(path) = svg {
                let opts = SvgOptions {
                    segments: restriction
                        .iter()
                        .flat_map(|r| &r.pairs)
                        .map(|pair| (point_to_q(&pair.u), point_to_q(&pair.u_prime)))
                        .collect(),
                };
                let drawing = render_svg(&p, &opts)?;
                std::fs::write(path, drawing)
                    .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
                rep.svg = Some(path.display().to_string());
            }
            let text = rep.text();
            Ok(ok(Report::Parliament(rep), text))
        }
        Command::Flats { file } => {
            let input = read_input(file)?;
            let b = need_bundle(&input)?;
            check_compatibility(b, seed)?;
            let g = ground_set(b)?;
            let flats = enumerate_flats(&g)
                .iter()
                .map(|f| {
                    Ok(FlatEntry {
                        indices: f.indices.clone(),
                        labels: f.indices.iter().map(|&i| b.label(g.vector(i))).collect(),
                        rank: f.rank(),
                        compatible: is_compatible_flat(b, &g, f, seed)?.compatible,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let trace = cli.trace.then(|| trace_of(b, seed)).transpose()?;
            let rep = FlatsReport {
                schema_version: document::SCHEMA_VERSION,
                ground_set: ground_elements(b, &g),
                flats,
                trace,
            };
            let text = rep.text();
            Ok(ok(Report::Flats(rep), text))
        }
        Command::Restrict { file, wall } => {
            let input = read_input(file)?;
            let b = need_bundle(&input)?;
            let r = restrict_to_curve(b, &wall_at(b, *wall)?, seed)?;
            let rep = RestrictReport::new(*wall, &r)?;
            let text = rep.text();
            Ok(ok(Report::Restrict(rep), text))
        }
        Command::Weights { file, divisor } => {
            let input = read_input(file)?;
            let a = divisor
                .iter()
                .map(|s| parse_rational(s.trim()).map_err(|e| invalid(format!("--divisor: {e}"))))
                .collect::<Result<Vec<Rational>, _>>()?;
            let pol = weights_from_divisor(&input.fan, &a)?;
            let rep = WeightsReport {
                schema_version: document::SCHEMA_VERSION,
                divisor: report::qv(&a),
                weights: report::qv(&pol.weights),
            };
            let text = rep.text();
            Ok(ok(Report::Weights(rep), text))
        }
        Command::Reconstruct { file } => {
            let input = read_input(file)?;
            let b = need_bundle(&input)?;
            let p = parliament(b, seed)?;
            let rec = reconstruct_filtrations(&p, b.fan(), b.rank())?;
            let rep = ReconstructReport::new(&rec, b.filtrations());
            let text = rep.text(&rec);
            let code = if rep.round_trip {
                EXIT_OK
            } else {
                EXIT_VERIFICATION
            };
            Ok(Output {
                report: Report::Reconstruct(rep),
                text,
                code,
            })
        }
        Command::Validate { file } => {
            let input = read_input(file)?;
            let fan_report = input.fan.validate();
            let (sheet, trace) = match &input.bundle {
                Some(b) => (
                    Some(check_compatibility(b, seed)?),
                    cli.trace.then(|| trace_of(b, seed)).transpose()?,
                ),
                None => (None, None),
            };
            let rep = ValidateReport::new(&input.fan, &fan_report, sheet.as_ref(), trace)?;
            let text = rep.text();
            Ok(ok(Report::Validate(rep), text))
        }
    }
}

/// Runs one command line; results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let body = match cli.format {
                Format::Json => o.report.json(),
                Format::Text => o.text,
            };
            if out.write_all(body.as_bytes()).is_err() {
                return EXIT_INVALID;
            }
            if o.code != EXIT_OK {
                let _ = writeln!(
                    err,
                    "error: reconstructed filtrations differ from the input"
                );
            }
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
