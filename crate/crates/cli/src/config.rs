//! Command-line grammar and per-subcommand validation.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gpt_cloak::{Core, ResidualForm};

#[derive(Parser, Debug)]
#[command(
    name = "gpt-cloak",
    version,
    about = "Design GPT-vanishing disk structures and estimate near-cloaking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve for conductivities whose first N contracted GPTs vanish.
    Design(DesignArgs),
    /// Emit contracted GPTs M_1..M_K of a structure.
    Gpt(GptArgs),
    /// Emit DtN eigenvalue perturbations of the shrunken structure.
    Dtn(DtnArgs),
    /// Fit the decay exponent of the DtN perturbation in rho.
    Decay(DecayArgs),
    /// Sample the mode-k potential on a Cartesian grid.
    Field(FieldArgs),
    /// Sample the push-forward conductivity tensor over the disk of radius 2.
    Pushforward(PushforwardArgs),
}

/// `free`, `insulated` or `fixed=<value>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreArg(pub Core);

impl FromStr for CoreArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "free" => Ok(CoreArg(Core::Free)),
            "insulated" => Ok(CoreArg(Core::Insulated)),
            _ => {
                let value = s.strip_prefix("fixed=").ok_or_else(|| {
                    format!("expected free, insulated or fixed=<value>, got '{s}'")
                })?;
                let v: f64 = value
                    .parse()
                    .map_err(|_| format!("fixed core value '{value}' is not a number"))?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(format!("fixed core value must be finite and >= 0, got {v}"));
                }
                Ok(CoreArg(if v == 0.0 {
                    Core::Insulated
                } else {
                    Core::Fixed(v)
                }))
            }
        }
    }
}

impl CoreArg {
    pub fn label(&self) -> String {
        match self.0 {
            Core::Free => "free".into(),
            Core::Insulated => "insulated".into(),
            Core::Fixed(v) => format!("fixed={v}"),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualArg {
    /// Lower-left entries of the contrast-normalized transfer product.
    Defect,
    /// The GPTs M_k.
    Gpt,
}

impl From<ResidualArg> for ResidualForm {
    fn from(r: ResidualArg) -> Self {
        match r {
            ResidualArg::Defect => ResidualForm::TriangularDefect,
            ResidualArg::Gpt => ResidualForm::Gpt,
        }
    }
}

/// Comma-separated floats, parsed as one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("'{t}' is not a number"))
            })
            .collect::<std::result::Result<_, _>>()
            .map(FloatList)
    }
}

#[derive(Args, Debug, Clone)]
pub struct DesignArgs {
    #[arg(long)]
    pub order: usize,
    #[arg(long)]
    pub core: CoreArg,
    /// Comma-separated descending radii r_1..r_{N+1}; defaults to 2 − (j−1)/N.
    #[arg(long)]
    pub radii: Option<FloatList>,
    #[arg(long)]
    pub out: PathBuf,
    /// Run report path; defaults to `<out>.report.toml`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
    #[arg(long, value_enum, default_value_t = ResidualArg::Defect)]
    pub residual: ResidualArg,
}

impl DesignArgs {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            bail!("--order: must be at least 1");
        }
        if let Some(FloatList(r)) = &self.radii {
            if r.len() != self.order + 1 {
                bail!(
                    "--radii: order {} needs {} radii, got {}",
                    self.order,
                    self.order + 1,
                    r.len()
                );
            }
            if r.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                bail!("--radii: radii must be positive");
            }
            if r.windows(2).any(|w| w[1] >= w[0]) {
                bail!("--radii: radii must be strictly decreasing");
            }
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            bail!("--tolerance: must be positive");
        }
        if self.max_iterations == 0 {
            bail!("--max-iterations: must be at least 1");
        }
        Ok(())
    }

    pub fn report_path(&self) -> PathBuf {
        self.report.clone().unwrap_or_else(|| {
            let mut p = self.out.clone().into_os_string();
            p.push(".report.toml");
            PathBuf::from(p)
        })
    }
}

fn check_kmax(k: u32) -> Result<()> {
    if k == 0 {
        bail!("--kmax: must be at least 1");
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        bail!("{name}: must be positive, got {v}");
    }
    Ok(())
}

fn check_grid(n: usize) -> Result<()> {
    if n < 2 {
        bail!("--grid: resolution must be at least 2");
    }
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct GptArgs {
    #[arg(long)]
    pub structure: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub kmax: u32,
    #[arg(long)]
    pub out: PathBuf,
}

impl GptArgs {
    pub fn validate(&self) -> Result<()> {
        check_kmax(self.kmax)
    }
}

#[derive(Args, Debug, Clone)]
pub struct DtnArgs {
    #[arg(long)]
    pub structure: PathBuf,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 2.0)]
    pub s: f64,
    #[arg(long, default_value_t = 50)]
    pub kmax: u32,
    #[arg(long)]
    pub out: PathBuf,
}

impl DtnArgs {
    pub fn validate(&self) -> Result<()> {
        check_positive("--rho", self.rho)?;
        check_positive("--s", self.s)?;
        check_kmax(self.kmax)
    }
}

#[derive(Args, Debug, Clone)]
pub struct DecayArgs {
    #[arg(long)]
    pub structure: PathBuf,
    #[arg(long = "rho-list", default_value = "0.1,0.05,0.025")]
    pub rho_list: FloatList,
    #[arg(long, default_value_t = 2.0)]
    pub s: f64,
    #[arg(long, default_value_t = 50)]
    pub kmax: u32,
    #[arg(long)]
    pub out: PathBuf,
}

impl DecayArgs {
    pub fn validate(&self) -> Result<()> {
        if self.rho_list.0.len() < 2 {
            bail!("--rho-list: at least two values are required");
        }
        for &r in &self.rho_list.0 {
            check_positive("--rho-list", r)?;
        }
        check_positive("--s", self.s)?;
        check_kmax(self.kmax)
    }
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    #[arg(long)]
    pub structure: PathBuf,
    #[arg(long)]
    pub mode: u32,
    /// Shrink factor applied to the structure before sampling.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    /// Half-width R of the sampled square [−R, R]².
    #[arg(long, default_value_t = 2.0)]
    pub extent: f64,
    #[arg(long)]
    pub out: PathBuf,
}

impl FieldArgs {
    pub fn validate(&self) -> Result<()> {
        if self.mode == 0 {
            bail!("--mode: must be at least 1");
        }
        check_positive("--rho", self.rho)?;
        check_positive("--extent", self.extent)?;
        check_grid(self.grid)
    }
}

#[derive(Args, Debug, Clone)]
pub struct PushforwardArgs {
    #[arg(long)]
    pub structure: PathBuf,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

impl PushforwardArgs {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.5) {
            bail!("--rho: must lie in (0, 3/2), got {}", self.rho);
        }
        check_grid(self.grid)
    }
}
