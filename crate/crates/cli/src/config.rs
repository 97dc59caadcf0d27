//! Command-line flags and the key=value configuration file.
//!
//! The file is INI-style: `[section]` headers followed by `key = value`
//! lines, `#` or `;` comments (whole-line, or after whitespace at the end
//! of a value). Recognised keys:
//!
//! ```text
//! [run]        command, n, format, output, manifest, long
//! [fields]     e0 (V/m), b0 (T)
//! [atom]       m1, m2 (kg)
//! [tolerances] delta0, delta_max, target
//! [sweep]      channel
//! [ac]         t_max (s), steps, quarter
//! [integrals]  check
//! ```
//!
//! Flags given on the command line override file values.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ini::Ini;
use rydqed::abraham::{Channel, KappaCutoff};
use rydqed::perturb::FieldConfiguration;
use rydqed::units::{AtomSpec, CODATA};
use serde::Serialize;

use crate::CliError;

pub const N_LIMIT: (u32, u32) = (1, 60);
/// κ₁ₐ above this n needs `--long`.
pub const LONG_THRESHOLD: u32 = 40;

#[derive(Debug, Parser)]
#[command(name = "rydqed", version, about = "Vacuum momentum of Rydberg atoms in crossed fields")]
pub struct Cli {
    /// Configuration file (key=value with sections).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Manifest path; defaults to <output>.manifest.json.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Static electric field E0 in V/m.
    #[arg(long, global = true)]
    pub e0: Option<f64>,
    /// Static magnetic field B0 in T.
    #[arg(long, global = true)]
    pub b0: Option<f64>,
    /// Core mass in kg.
    #[arg(long, global = true)]
    pub m1: Option<f64>,
    /// Electron mass in kg.
    #[arg(long, global = true)]
    pub m2: Option<f64>,
    /// Initial basis-cutoff increment Δ (n_max = n + Δ).
    #[arg(long, global = true)]
    pub delta0: Option<u32>,
    /// Largest Δ the doubling loop may reach.
    #[arg(long, global = true)]
    pub delta_max: Option<u32>,
    /// Relative convergence target under cutoff doubling.
    #[arg(long, global = true)]
    pub target: Option<f64>,
    /// Allow the expensive κ₁ₐ points with n > 40.
    #[arg(long, global = true)]
    pub long: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form and discrete-sum polarizability.
    Polarizability(NArgs),
    /// Abraham momentum and the three κ channels at single n.
    Abraham(NArgs),
    /// Aharonov-Casher momentum of the nR state.
    Ac(AcArgs),
    /// Mass-renormalization and relativistic k-integrals.
    Integrals(IntegralArgs),
    /// Figure data for one κ channel over an n range.
    Sweep(SweepArgs),
    /// Radial-integral cache management.
    Cache(CacheArgs),
    /// Run the command named in the configuration file.
    Run,
}

#[derive(Debug, Args, Default)]
pub struct NArgs {
    /// n or a:b (inclusive).
    #[arg(long)]
    pub n: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct AcArgs {
    /// Principal quantum number (n >= 3).
    #[arg(long)]
    pub n: Option<String>,
    /// End of the time series in s; one Stark period when absent.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of time samples.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Drop the relativistic 1/4 factor.
    #[arg(long)]
    pub no_quarter: bool,
}

#[derive(Debug, Args, Default)]
pub struct IntegralArgs {
    /// Which integral check to run; all when absent.
    #[arg(long, value_enum)]
    pub check: Option<IntegralCheck>,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    /// κ channel to sweep.
    #[arg(long, value_enum)]
    pub channel: Option<ChannelArg>,
    /// n or a:b (inclusive).
    #[arg(long)]
    pub n: Option<String>,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    #[command(subcommand)]
    pub action: CacheAction,
}

#[derive(Debug, Clone, Copy, Subcommand, Serialize)]
pub enum CacheAction {
    /// Print the cache location and entry count.
    Stats,
    /// Delete the persistent cache file.
    Clear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegralCheck {
    Quarter,
    Renorm,
    DeltaM,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ChannelArg {
    #[value(name = "kappa1a", alias = "k1a")]
    Kappa1a,
    #[value(name = "kappa1b", alias = "k1b")]
    Kappa1b,
    #[value(name = "kappa2", alias = "k2")]
    Kappa2,
}

impl From<ChannelArg> for Channel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Kappa1a => Channel::K1a,
            ChannelArg::Kappa1b => Channel::K1b,
            ChannelArg::Kappa2 => Channel::K2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Polarizability,
    Abraham,
    Ac,
    Integrals,
    Sweep,
    Cache,
}

impl CommandKind {
    fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "polarizability" => Self::Polarizability,
            "abraham" => Self::Abraham,
            "ac" => Self::Ac,
            "integrals" => Self::Integrals,
            "sweep" => Self::Sweep,
            "cache" => Self::Cache,
            other => return Err(CliError::Usage(format!("unknown command '{other}'"))),
        })
    }
}

/// Inclusive n interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NRange {
    pub lo: u32,
    pub hi: u32,
}

impl NRange {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("bad n range '{s}' (expected n or a:b)"));
        let (lo, hi) = match s.split_once(':') {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => {
                let v = s.trim().parse().map_err(|_| bad())?;
                (v, v)
            }
        };
        let r = Self { lo, hi };
        if lo < N_LIMIT.0 || hi > N_LIMIT.1 {
            return Err(CliError::Usage(format!("n range {lo}:{hi} outside [{}, {}]", N_LIMIT.0, N_LIMIT.1)));
        }
        Ok(r)
    }

    pub fn values(&self) -> Vec<u32> {
        (self.lo..=self.hi).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcSettings {
    pub t_max: Option<f64>,
    pub steps: usize,
    pub quarter: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub n_range: NRange,
    pub fields: FieldConfiguration,
    pub atom: AtomSpec,
    pub cutoff: KappaCutoff,
    pub output: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub format: Format,
    pub long: bool,
    pub channel: Option<ChannelArg>,
    pub check: IntegralCheck,
    pub ac: AcSettings,
    #[serde(skip)]
    pub cache_action: Option<CacheAction>,
}

/// Raw values from the file, looked up as `section.key`.
struct FileValues(Option<Ini>);

impl FileValues {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self(None)),
            Some(p) => Ini::load_from_file(p)
                .map(|i| Self(Some(i)))
                .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display()))),
        }
    }

    /// Value with any trailing ` #` or ` ;` comment removed.
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        let raw = self.0.as_ref()?.section(Some(section))?.get(key)?;
        let end = [" #", "\t#", " ;", "\t;"].iter().filter_map(|c| raw.find(c)).min().unwrap_or(raw.len());
        Some(raw[..end].trim())
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config [{section}] {key} = '{v}' does not parse"))),
        }
    }
}

fn value_enum<T: ValueEnum>(s: &str, what: &str) -> Result<T, CliError> {
    T::from_str(s.trim(), true).map_err(|_| CliError::Usage(format!("invalid {what} '{s}'")))
}

/// Default E0 for κ sweeps (V/m).
pub const DEFAULT_E0: f64 = 100.0;
/// Default B0 (T); keeps the Zeeman/Stark margin above 10 at n = 50.
pub const DEFAULT_B0: f64 = 1e-4;

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let file = FileValues::load(cli.config.as_deref())?;
        let (command, n_arg, channel_arg, check_arg, ac_args, cache_action) = match &cli.command {
            Command::Polarizability(a) => (CommandKind::Polarizability, a.n.clone(), None, None, None, None),
            Command::Abraham(a) => (CommandKind::Abraham, a.n.clone(), None, None, None, None),
            Command::Ac(a) => (CommandKind::Ac, a.n.clone(), None, None, Some(a), None),
            Command::Integrals(a) => (CommandKind::Integrals, None, None, a.check, None, None),
            Command::Sweep(a) => (CommandKind::Sweep, a.n.clone(), a.channel, None, None, None),
            Command::Cache(a) => (CommandKind::Cache, None, None, None, None, Some(a.action)),
            Command::Run => {
                let c = file
                    .get("run", "command")
                    .ok_or_else(|| CliError::Usage("'run' needs [run] command in the config file".into()))?;
                (CommandKind::parse(c.trim())?, None, None, None, None, None)
            }
        };
        if command == CommandKind::Cache && cache_action.is_none() {
            return Err(CliError::Usage("the cache command needs an action; use 'rydqed cache stats|clear'".into()));
        }

        let n_text = n_arg.or_else(|| file.get("run", "n").map(str::to_string));
        let n_range = match (n_text, command) {
            (Some(t), _) => NRange::parse(&t)?,
            (None, CommandKind::Integrals | CommandKind::Cache) => NRange { lo: 1, hi: 1 },
            (None, CommandKind::Sweep) => NRange { lo: 10, hi: 30 },
            (None, CommandKind::Ac) => NRange { lo: 50, hi: 50 },
            (None, _) => return Err(CliError::Usage("--n is required".into())),
        };

        let e0 = cli.e0.or(file.parse("fields", "e0")?).unwrap_or(DEFAULT_E0);
        let b0 = cli.b0.or(file.parse("fields", "b0")?).unwrap_or(DEFAULT_B0);
        let fields = FieldConfiguration::new(e0, b0, &CODATA).map_err(|e| CliError::Usage(e.to_string()))?;
        let m1 = cli.m1.or(file.parse("atom", "m1")?).unwrap_or(CODATA.m_p);
        let m2 = cli.m2.or(file.parse("atom", "m2")?).unwrap_or(CODATA.m_e);
        let atom = AtomSpec::new(m1, m2).map_err(|e| CliError::Usage(e.to_string()))?;

        let defaults = KappaCutoff::default();
        let cutoff = KappaCutoff {
            delta0: cli.delta0.or(file.parse("tolerances", "delta0")?).unwrap_or(defaults.delta0),
            delta_max: cli.delta_max.or(file.parse("tolerances", "delta_max")?).unwrap_or(defaults.delta_max),
            target: cli.target.or(file.parse("tolerances", "target")?).unwrap_or(defaults.target),
        };
        if cutoff.delta0 == 0 || cutoff.delta_max < cutoff.delta0 || !(cutoff.target > 0.0) {
            return Err(CliError::Usage(format!("invalid tolerances {cutoff:?}")));
        }

        let format = match cli.format {
            Some(f) => f,
            None => match file.get("run", "format") {
                Some(f) => value_enum(f, "format")?,
                None => Format::Csv,
            },
        };
        let channel = match channel_arg {
            Some(c) => Some(c),
            None => file.get("sweep", "channel").map(|c| value_enum(c, "channel")).transpose()?,
        };
        if command == CommandKind::Sweep && channel.is_none() {
            return Err(CliError::Usage("sweep needs --channel kappa1a|kappa1b|kappa2".into()));
        }
        let check = match check_arg {
            Some(c) => c,
            None => file.get("integrals", "check").map(|c| value_enum(c, "check")).transpose()?.unwrap_or(IntegralCheck::All),
        };
        let ac = AcSettings {
            t_max: ac_args.and_then(|a| a.t_max).or(file.parse("ac", "t_max")?),
            steps: ac_args.and_then(|a| a.steps).or(file.parse("ac", "steps")?).unwrap_or(64),
            quarter: if ac_args.is_some_and(|a| a.no_quarter) { false } else { file.parse("ac", "quarter")?.unwrap_or(true) },
        };
        let long = cli.long || file.parse("run", "long")?.unwrap_or(false);
        Ok(Self {
            command,
            n_range,
            fields,
            atom,
            cutoff,
            output: cli.output.clone().or_else(|| file.get("run", "output").map(PathBuf::from)),
            manifest: cli.manifest.clone().or_else(|| file.get("run", "manifest").map(PathBuf::from)),
            format,
            long,
            channel,
            check,
            ac,
            cache_action,
        })
    }

    pub fn manifest_path(&self) -> Option<PathBuf> {
        self.manifest.clone().or_else(|| {
            self.output.as_ref().map(|o| {
                let mut s = o.clone().into_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            })
        })
    }
}
