//! `tentlim`: command-line front end for the tent-map inverse-limit toolkit.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tentlim_core::numerics::DEFAULT_PRECISION_BITS;

use commands::{Out, SymmetryArgs, VerifyArgs};
use config::Config;
use error::CliError;
use output::Format;

#[derive(Parser, Debug)]
#[command(name = "tentlim", version, about = "Exact combinatorics of tent-map inverse limits")]
struct Cli {
    /// Slope: p/q, a decimal, sqrt2, sqrt3, sqrt5, or golden.
    #[arg(long, global = true)]
    slope: Option<String>,
    /// Second slope, for `distinguish`.
    #[arg(long, global = true)]
    slope2: Option<String>,
    /// Bits for interval enclosures of irrational slopes
    /// [default: $TENTLIM_PRECISION_BITS or 128].
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// `key = value` file supplying defaults for any option.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Lemmas,
    Completeness,
    Symmetry,
    Lemma12,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Suite as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Critical orbit c_1 .. c_N with kappa and recurrence data.
    Orbit {
        #[arg(long)]
        depth: Option<usize>,
    },
    /// First index with c_kappa <= c.
    Kappa {
        #[arg(long)]
        depth: Option<usize>,
    },
    /// The delta bound of the symmetry arguments.
    Delta {
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Turning points and k-pattern of T^n on a window.
    Pattern {
        #[arg(long)]
        depth: Option<usize>,
        /// `lo,hi`; defaults to the core.
        #[arg(long)]
        window: Option<String>,
    },
    /// Find a window whose k-pattern is the given palindrome.
    Realize {
        /// Comma-separated levels, e.g. `1,3,1`.
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long)]
        max_depth: Option<usize>,
    },
    /// The arcs A_i, salient points, and the arc-lattice report.
    Arcs {
        #[arg(long)]
        max_i: Option<usize>,
    },
    /// The natural chain C_k.
    Chain {
        #[arg(long)]
        k: Option<usize>,
    },
    /// eps-symmetry of T^n on a window, or eps-closeness to T^i on the core.
    Symmetry {
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        center: Option<String>,
        /// Compare with T^i on the core instead of testing symmetry.
        #[arg(long)]
        compare_depth: Option<usize>,
    },
    /// Run a verification suite; exit status 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[arg(long)]
        max_i: Option<usize>,
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        /// Orbit depth for delta.
        #[arg(long)]
        delta_depth: Option<usize>,
        /// Chain index; defaults to the smallest with mesh below eps.
        #[arg(long)]
        k: Option<usize>,
        /// Arc depth D for completeness; defaults to k + 10.
        #[arg(long)]
        arc_depth: Option<usize>,
        /// Skip the symmetry sweep and use this eps.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Per-level patterns of [m_{n-1}, m_n] with side bits.
    Invariant {
        #[arg(long)]
        max_depth: Option<usize>,
    },
    /// First level where two slopes' invariant sequences differ.
    Distinguish {
        #[arg(long)]
        max_depth: Option<usize>,
    },
    /// Level-n points in [m_K, m_{K+1}).
    Count {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        level: Option<usize>,
    },
}

fn positive(name: &str, v: usize) -> Result<usize, CliError> {
    if v == 0 {
        Err(CliError::Usage(format!("--{} must be positive", name.replace('_', "-"))))
    } else {
        Ok(v)
    }
}

struct Ctx {
    cfg: Config,
}

impl Ctx {
    fn budget(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize, CliError> {
        positive(key, self.cfg.pick(flag, key, default)?)
    }

    fn budget_opt(&self, flag: Option<usize>, key: &str) -> Result<Option<usize>, CliError> {
        self.cfg.pick_opt(flag, key)?.map(|v| positive(key, v)).transpose()
    }

    fn text(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.cfg.get(key).map(str::to_string))
    }

    fn required(&self, flag: Option<String>, key: &str) -> Result<String, CliError> {
        self.text(flag, key)
            .ok_or_else(|| CliError::Usage(format!("--{} is required", key.replace('_', "-"))))
    }
}

fn precision(flag: Option<u32>, cfg: &Config) -> Result<u32, CliError> {
    let env = match std::env::var("TENTLIM_PRECISION_BITS") {
        Ok(v) => Some(
            v.parse::<u32>()
                .map_err(|_| CliError::Usage(format!("TENTLIM_PRECISION_BITS={:?} is not a number", v)))?,
        ),
        Err(_) => None,
    };
    let bits = cfg.pick(flag, "precision_bits", env.unwrap_or(DEFAULT_PRECISION_BITS))?;
    if bits < 16 {
        return Err(CliError::Usage("precision must be at least 16 bits".into()));
    }
    Ok(bits)
}

fn run(cli: Cli) -> Result<(output::Artifact, Format, Option<PathBuf>), CliError> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let bits = precision(cli.precision_bits, &cfg)?;
    let format = cfg.pick(cli.format, "format", Format::Json)?;
    let out_path = cli.output.clone().or_else(|| cfg.get("output").map(PathBuf::from));
    let ctx = Ctx { cfg };
    let slope = ctx.required(cli.slope.clone(), "slope")?;
    let map = commands::slope_map(&slope, bits)?;

    let artifact: Out = match cli.cmd {
        Cmd::Orbit { depth } => commands::orbit(&map, ctx.budget(depth, "depth", 20)?),
        Cmd::Kappa { depth } => commands::kappa(&map, ctx.budget_opt(depth, "depth")?),
        Cmd::Delta { depth } => commands::delta(&map, ctx.budget(depth, "depth", 20)?),
        Cmd::Pattern { depth, window } => {
            let w = commands::window(&map, ctx.text(window, "window").as_deref(), bits)?;
            commands::pattern(&map, ctx.budget(depth, "depth", 4)?, &w)
        }
        Cmd::Realize { pattern, max_depth } => {
            let p = ctx.required(pattern, "pattern")?;
            commands::realize(&map, &p, ctx.budget(max_depth, "max_depth", 12)?)
        }
        Cmd::Arcs { max_i } => commands::arcs(&map, ctx.budget(max_i, "max_i", 20)?),
        Cmd::Chain { k } => commands::chain(&map, ctx.budget(k, "k", 3)?),
        Cmd::Symmetry {
            depth,
            window,
            eps,
            center,
            compare_depth,
        } => {
            let w = commands::window(&map, ctx.text(window, "window").as_deref(), bits)?;
            let eps = commands::scalar(&ctx.required(eps, "eps")?, bits)?;
            let center = ctx.text(center, "center").map(|c| commands::scalar(&c, bits)).transpose()?;
            let compare_depth = ctx.cfg.pick_opt(compare_depth, "compare_depth")?;
            commands::symmetry(
                &map,
                SymmetryArgs {
                    depth: ctx.budget(depth, "depth", 4)?,
                    window: &w,
                    eps,
                    center,
                    compare_depth,
                },
            )
        }
        Cmd::Verify {
            suite,
            max_i,
            max_n,
            grid,
            delta_depth,
            k,
            arc_depth,
            eps,
        } => {
            let suite = ctx.cfg.pick(suite, "suite", Suite::Lemmas)?;
            let args = VerifyArgs {
                max_i: ctx.budget(max_i, "max_i", 20)?,
                max_n: ctx.budget(max_n, "max_n", 12)?,
                grid: ctx.budget(grid, "grid", 200)?,
                delta_depth: ctx.budget(delta_depth, "delta_depth", 20)?,
                k: ctx.budget_opt(k, "k")?,
                arc_depth: ctx.budget_opt(arc_depth, "arc_depth")?,
                eps: ctx.text(eps, "eps").map(|e| commands::scalar(&e, bits)).transpose()?,
            };
            match suite {
                Suite::Lemmas => commands::verify_lemmas(&map, &args),
                Suite::Completeness => commands::verify_completeness_suite(&map, &args),
                Suite::Symmetry => commands::verify_symmetry(&map, &args),
                Suite::Lemma12 => commands::verify_lemma12(&map, &args),
            }
        }
        Cmd::Invariant { max_depth } => commands::invariant(&map, ctx.budget(max_depth, "max_depth", 20)?),
        Cmd::Distinguish { max_depth } => {
            let other = commands::slope_map(&ctx.required(cli.slope2, "slope2")?, bits)?;
            commands::distinguish_cmd(&map, &other, ctx.budget(max_depth, "max_depth", 40)?)
        }
        Cmd::Count { k, level } => {
            let k = ctx.budget(k, "k", 1)?;
            commands::count(&map, k, ctx.budget(level, "level", k)?)
        }
    };
    Ok((artifact?, format, out_path))
}

fn fail(e: &CliError) -> ExitCode {
    let code = e.exit_code();
    eprintln!("{}", output::to_json_line(&serde_json::json!({"error": e.to_string(), "exit": code})).trim_end());
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (artifact, format, path) = match run(cli) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let text = match artifact.render(format) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let written = match &path {
        Some(p) => std::fs::write(p, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        return fail(&CliError::Io(e));
    }
    if artifact.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
