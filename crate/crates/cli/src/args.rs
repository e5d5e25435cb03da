use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::grid::GridSpec;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "bochner",
    version,
    about = "Functional inequalities under Bochner subordination"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Euclidean constants C_n, L_{n,α}, K_{n,α} for a supplied sharp Nash constant.
    Constants(Options),
    /// Transfer a rate along g (or a convex Ψ), or a Nash function along g.
    Transform(Options),
    /// Legendre conversion between rate and Nash functions.
    Nash(Options),
    /// Check the inequalities on a finite spectral model.
    Verify(Options),
    /// Ultracontractivity bounds, 1→2 norms and asymptotics.
    #[command(alias = "ultra-bound")]
    Ultra(Options),
    /// Compare subordination against the spectral symbol.
    SubordinateCheck(Options),
    /// Sampled lower bounds on the super-Poincaré profile.
    Profile(Options),
}

impl Command {
    pub fn id(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Transform(_) => "transform",
            Command::Nash(_) => "nash",
            Command::Verify(_) => "verify",
            Command::Ultra(_) => "ultra",
            Command::SubordinateCheck(_) => "subordinate-check",
            Command::Profile(_) => "profile",
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Command::Constants(o)
            | Command::Transform(o)
            | Command::Nash(o)
            | Command::Verify(o)
            | Command::Ultra(o)
            | Command::SubordinateCheck(o)
            | Command::Profile(o) => o,
        }
    }
}

/// Flags shared by all subcommands. A JSON config file may supply any of
/// them under the same names; flags given on the command line win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Command id; only checked against the subcommand when read from a config file.
    #[arg(skip)]
    pub command: Option<String>,

    /// Spectral model: torus:d,N[,h] | matrix:<file> | markov:<file>.
    #[arg(long)]
    pub model: Option<String>,
    /// Bernstein function: power:α | log1p | logpow:α,γ | elementary:λ | affine:a,b | identity.
    #[arg(long)]
    pub g: Option<String>,
    /// Rate function: power:n,c0 | euclid:n,N | ou | riemann:c,λ | const:c | fourier.
    #[arg(long)]
    pub beta: Option<String>,
    /// Nash function: power:c,p | euclid:n,N | zero | step:x0.
    #[arg(long)]
    pub nash: Option<String>,
    /// Nash rate Θ for ultra: power:c,q.
    #[arg(long)]
    pub theta: Option<String>,
    /// Convex Ψ for transform: power:p.
    #[arg(long)]
    pub psi: Option<String>,
    /// Subordinator measure: poisson:λ,t | stable-half:t.
    #[arg(long)]
    pub measure: Option<String>,

    #[arg(long)]
    #[serde(alias = "r_grid")]
    pub r_grid: Option<GridSpec>,
    #[arg(long)]
    #[serde(alias = "t_grid")]
    pub t_grid: Option<GridSpec>,
    #[arg(long)]
    #[serde(alias = "x_grid")]
    pub x_grid: Option<GridSpec>,

    /// Random test functions (verify, subordinate-check) or ascent starts (profile).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,

    /// Dimension(s): a list `1,2,3` or range `1-20` for constants, one value for ultra.
    #[arg(long)]
    pub n: Option<String>,
    /// α values for constants, comma separated.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Sharp Nash constant N_n (required by constants).
    #[arg(long)]
    #[serde(alias = "nash_constant")]
    pub nash_constant: Option<f64>,
    /// Coefficient c0 of β(r) = c0 r^{-n/2} for the asymptotics report.
    #[arg(long)]
    pub c0: Option<f64>,
    /// Lower end of the integral defining a(t).
    #[arg(long)]
    #[serde(alias = "s_min")]
    pub s_min: Option<f64>,
    /// Produce the asymptotics report in ultra.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub asymptotics: Option<bool>,

    /// Checks for verify: super-poincare,nash,decay,elementary.
    #[arg(long)]
    pub checks: Option<String>,
    /// Multiplier applied to the transferred rate (falsification control).
    #[arg(long)]
    pub scale: Option<f64>,

    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
}

impl<'de> Deserialize<'de> for Format {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        Options { config: $flags.config.clone(), $($field: $flags.$field.clone().or($file.$field),)* }
    };
}

impl Options {
    /// `self` with unset fields taken from `file`.
    pub fn over(&self, file: Options) -> Options {
        overlay!(
            self,
            file,
            command,
            model,
            g,
            beta,
            nash,
            theta,
            psi,
            measure,
            r_grid,
            t_grid,
            x_grid,
            samples,
            seed,
            n,
            alpha,
            nash_constant,
            c0,
            s_min,
            asymptotics,
            checks,
            scale,
            out,
            format
        )
    }

    pub fn load(path: &Path) -> anyhow::Result<Options> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config `{}`: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("invalid config `{}`: {e}", path.display()))
    }
}
