use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use amfc::adding_machine::{simulate, step_distribution};
use amfc::julia::{
    classify_connectedness, conjugacy, quasicircle_check, GreenFunction, DEFAULT_PRODUCT_TOL,
};
use amfc::probability::ProbabilitySequence;
use amfc::render::{
    inside_component_count, render, write_levels_csv, write_pgm, CoordinateSystem, RenderConfig,
    Window,
};
use amfc::spectrum::{eigen_residual, eigenvector, iterate_f, iterate_f_traced};
use amfc::transition::{build_truncated, classify_recurrence, verify_self_similarity};

/// Base-d stochastic adding machine: chain simulation, truncated transition
/// operators, spectral membership, connectedness analysis, and renders.
#[derive(Parser)]
#[command(name = "amfc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Probability model argument, shared by every subcommand: inline JSON or
/// `@path` to a JSON file. The JSON shape is
/// `{"d": 3, "prefix": [0.75], "tail": {"kind": "constant", "value": 0.75}}`
/// with tail kinds `constant`, `cycle`, `iid_uniform`, `convergent_deficit`.
#[derive(Args)]
struct ProbsArg {
    /// Probability model: inline JSON or @path
    #[arg(long, value_name = "JSON|@FILE")]
    probs: String,
}

impl ProbsArg {
    fn parse(&self) -> Result<ProbabilitySequence> {
        let text = if let Some(path) = self.probs.strip_prefix('@') {
            fs::read_to_string(path).with_context(|| format!("reading {path}"))?
        } else {
            self.probs.clone()
        };
        ProbabilitySequence::from_json(&text).context("invalid probability model")
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the chain and report visit statistics
    Simulate {
        #[command(flatten)]
        probs: ProbsArg,
        /// Initial state
        #[arg(long, default_value_t = 0)]
        start: u64,
        /// Number of steps
        #[arg(long)]
        steps: u64,
        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the exact one-step distribution of the start state instead
        /// of simulating
        #[arg(long)]
        one_step: bool,
    },
    /// Emit the truncated transition operator as CSV triplets `n,m,p`
    Matrix {
        #[command(flatten)]
        probs: ProbsArg,
        /// Truncation size (states 0..size)
        #[arg(long)]
        size: usize,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check block self-similarity at scale d^j and report violations
        #[arg(long, value_name = "J")]
        check_self_similarity: Option<u32>,
    },
    /// Recurrence, connectedness, and quasicircle classification
    Classify {
        #[command(flatten)]
        probs: ProbsArg,
        /// Stage budget per critical orbit
        #[arg(long, default_value_t = 256)]
        budget: usize,
    },
    /// Test a point against the spectrum by orbit iteration
    SpectrumMember {
        #[command(flatten)]
        probs: ProbsArg,
        /// Point as `re,im`
        #[arg(long, value_name = "RE,IM")]
        point: String,
        /// Level budget
        #[arg(long, default_value_t = 64)]
        levels: usize,
        /// Include the modulus trace
        #[arg(long)]
        trace: bool,
    },
    /// Explicit eigenvector slice for a candidate eigenvalue, with residual
    Eigenvector {
        #[command(flatten)]
        probs: ProbsArg,
        /// Eigenvalue as `re,im`
        #[arg(long, value_name = "RE,IM")]
        lambda: String,
        /// Number of entries (use a power of d for clean residuals)
        #[arg(long)]
        size: usize,
        /// Write CSV `n,v_re,v_im` here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rasterize escape levels to a PGM image
    Render {
        #[command(flatten)]
        probs: ProbsArg,
        #[arg(long, value_enum, default_value_t = CoordsArg::Spectrum)]
        coords: CoordsArg,
        /// Image width in pixels
        #[arg(long, default_value_t = 512)]
        px: u32,
        /// Image height in pixels (defaults to width)
        #[arg(long)]
        height: Option<u32>,
        /// Level budget per pixel
        #[arg(long, default_value_t = 256)]
        budget: u32,
        /// View window as `center_re,center_im,width,height`
        #[arg(long, value_name = "CX,CY,W,H")]
        window: Option<String>,
        /// Output PGM path
        #[arg(long)]
        out: PathBuf,
        /// Also write per-pixel levels as CSV
        #[arg(long)]
        levels_csv: Option<PathBuf>,
        /// Also write raster metadata as JSON
        #[arg(long)]
        metadata: Option<PathBuf>,
    },
    /// Evaluate the Green function of the monic cascade
    Green {
        #[command(flatten)]
        probs: ProbsArg,
        /// Point as `re,im`
        #[arg(long, value_name = "RE,IM")]
        point: String,
        /// Cascade depth
        #[arg(long, default_value_t = 64)]
        depth: usize,
    },
    /// Monic conjugation data: scaling, offsets, quasicircle criterion
    Fibered {
        #[command(flatten)]
        probs: ProbsArg,
        /// Number of shifts to report offsets for
        #[arg(long, default_value_t = 8)]
        shifts: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CoordsArg {
    Spectrum,
    FilledJulia,
}

impl From<CoordsArg> for CoordinateSystem {
    fn from(c: CoordsArg) -> Self {
        match c {
            CoordsArg::Spectrum => CoordinateSystem::Spectrum,
            CoordsArg::FilledJulia => CoordinateSystem::FilledJulia,
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let (re, im) = s
        .split_once(',')
        .with_context(|| format!("expected `re,im`, got `{s}`"))?;
    Ok(Complex64::new(
        re.trim().parse().with_context(|| format!("bad real part `{re}`"))?,
        im.trim().parse().with_context(|| format!("bad imaginary part `{im}`"))?,
    ))
}

fn parse_window(s: &str) -> Result<Window> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        bail!("expected `center_re,center_im,width,height`, got `{s}`");
    }
    let mut vals = [0.0f64; 4];
    for (v, part) in vals.iter_mut().zip(&parts) {
        *v = part
            .trim()
            .parse()
            .with_context(|| format!("bad window component `{part}`"))?;
    }
    Ok(Window {
        center_re: vals[0],
        center_im: vals[1],
        width: vals[2],
        height: vals[3],
    })
}

/// Writes to stdout, exiting quietly when the consumer closed the pipe.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    let write = writeln!(out, "{text}").and_then(|_| out.flush());
    match write {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => Ok(other?),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(value)?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { probs, start, steps, seed, one_step } => {
            let probs = probs.parse()?;
            if one_step {
                let dist = step_distribution(start, &probs);
                return print_json(&dist);
            }
            let summary = simulate(start, steps, &probs, seed);
            print_json(&summary)
        }
        Command::Matrix { probs, size, out, check_self_similarity } => {
            let probs = probs.parse()?;
            let op = build_truncated(&probs, size)?;
            let mut summary = serde_json::json!({
                "size": op.size(),
                "entries": op.entry_count(),
            });
            if let Some(j) = check_self_similarity {
                let violations = verify_self_similarity(&op, j);
                summary["self_similarity"] = serde_json::json!({
                    "scale_exponent": j,
                    "violations": violations,
                });
            }
            match out {
                Some(path) => {
                    let mut w = BufWriter::new(
                        fs::File::create(&path)
                            .with_context(|| format!("creating {}", path.display()))?,
                    );
                    writeln!(w, "n,m,p")?;
                    for (n, m, p) in op.entries() {
                        writeln!(w, "{n},{m},{p}")?;
                    }
                    w.flush()?;
                    print_json(&summary)
                }
                None if check_self_similarity.is_some() => print_json(&summary),
                None => {
                    let mut text = String::from("n,m,p\n");
                    for (n, m, p) in op.entries() {
                        text.push_str(&format!("{n},{m},{p}\n"));
                    }
                    emit(text.trim_end())
                }
            }
        }
        Command::Classify { probs, budget } => {
            let probs = probs.parse()?;
            let recurrence = classify_recurrence(&probs);
            let connectedness = classify_connectedness(&probs, budget);
            let quasicircle = quasicircle_check(&probs)?;
            print_json(&serde_json::json!({
                "recurrence": recurrence,
                "connectedness": connectedness,
                "quasicircle": quasicircle,
            }))
        }
        Command::SpectrumMember { probs, point, levels, trace } => {
            let probs = probs.parse()?;
            let z = parse_complex(&point)?;
            let result = if trace {
                iterate_f_traced(z, &probs, levels)
            } else {
                iterate_f(z, &probs, levels)
            };
            print_json(&result)
        }
        Command::Eigenvector { probs, lambda, size, out } => {
            let probs = probs.parse()?;
            let lam = parse_complex(&lambda)?;
            let slice = eigenvector(lam, &probs, size, Complex64::new(1.0, 0.0));
            let op = build_truncated(&probs, size)?;
            let residual = eigen_residual(&slice, &op);
            let mut csv = String::from("n,v_re,v_im\n");
            for (n, v) in slice.v.iter().enumerate() {
                csv.push_str(&format!("{n},{},{}\n", v.re, v.im));
            }
            csv.push_str(&format!("# max_interior_residual = {residual}\n"));
            match out {
                Some(path) => {
                    fs::write(&path, &csv)
                        .with_context(|| format!("writing {}", path.display()))?;
                    print_json(&serde_json::json!({
                        "lambda": [lam.re, lam.im],
                        "size": size,
                        "overflow": slice.overflow,
                        "max_interior_residual": residual,
                    }))
                }
                None => emit(csv.trim_end()),
            }
        }
        Command::Render {
            probs,
            coords,
            px,
            height,
            budget,
            window,
            out,
            levels_csv,
            metadata,
        } => {
            let probs = probs.parse()?;
            let config = RenderConfig {
                width_px: px,
                height_px: height.unwrap_or(px),
                max_levels: budget,
                coords: coords.into(),
                window: window.as_deref().map(parse_window).transpose()?,
            };
            let raster = render(&probs, &config);
            write_pgm(&out, &raster)
                .with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = &levels_csv {
                write_levels_csv(path, &raster)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = &metadata {
                fs::write(path, serde_json::to_string_pretty(&raster.meta)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            print_json(&serde_json::json!({
                "out": out,
                "width": raster.width,
                "height": raster.height,
                "max_levels": raster.meta.max_levels,
                "window": raster.meta.window,
                "inside_pixels": raster.inside_count(),
                "inside_components": inside_component_count(&raster),
            }))
        }
        Command::Green { probs, point, depth } => {
            let probs = probs.parse()?;
            let z = parse_complex(&point)?;
            let green = GreenFunction::new(&probs, depth, DEFAULT_PRODUCT_TOL)?;
            print_json(&serde_json::json!({
                "point": [z.re, z.im],
                "depth": green.depth(),
                "green": green.eval(z),
            }))
        }
        Command::Fibered { probs, shifts } => {
            let probs = probs.parse()?;
            let conj = conjugacy(&probs, shifts, DEFAULT_PRODUCT_TOL)?;
            let quasi = quasicircle_check(&probs)?;
            print_json(&serde_json::json!({
                "conjugacy": conj,
                "quasicircle": quasi,
            }))
        }
    }
}
